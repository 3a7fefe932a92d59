//! Print a program back to text and re-parse it: the round trip keeps
//! the answer sets and their costs (atom ids may relabel, names do not).
//!
//! ```sh
//! cargo run --example render_round_trip
//! ```

use aseo::generate::random_program;
use aseo::{brute_force_aseo, parse_program, render_program, Program};

fn ranked_by_name(program: &Program) -> Vec<(Vec<String>, String)> {
    let mut out: Vec<(Vec<String>, String)> = brute_force_aseo(program)
        .unwrap()
        .into_iter()
        .map(|r| {
            let names: Vec<String> =
                r.model.names(program).into_iter().map(str::to_string).collect();
            (names, r.cost.to_string())
        })
        .collect();
    out.sort();
    out
}

fn main() {
    let text = random_program(8, 10, 2, 7);
    let original = parse_program(&text).unwrap();
    let rendered = render_program(&original);
    println!("rendered form:\n{rendered}");
    let reparsed = parse_program(&rendered).unwrap();

    let before = ranked_by_name(&original);
    let after = ranked_by_name(&reparsed);
    assert_eq!(before, after);
    println!("round trip preserved all {} answer sets with their costs:", before.len());
    for (names, cost) in &before {
        println!("  {cost} {}", names.join(" "));
    }
}
