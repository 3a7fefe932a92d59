//! Parse a program and list its answer sets in cost order.
//!
//! ```sh
//! cargo run --example parse_and_rank
//! ```

use aseo::solver::SearchConfig;
use aseo::{naive_enumerate, parse_program};

const PROGRAM: &str = "
    % pick a dish and optionally a side; soup blocks dessert
    pasta :- not salad.
    salad :- not pasta.
    soup  :- salad, not dessert.
    dessert :- pasta.
    :- soup, dessert.
    #minimize{3@1:pasta; 2@1:salad; 1@1:soup; 2@1:dessert}.
";

fn main() {
    let program = parse_program(PROGRAM).expect("the menu parses");
    println!("{} atoms, {} rules, {} objective level(s)", program.atom_count(), program.rules.len(), program.levels());

    let out = naive_enumerate(&program, None, &SearchConfig::default()).expect("enumeration runs");
    println!("{} answer sets, cheapest first:", out.models.len());
    for ranked in &out.models {
        println!("  {} {}", ranked.cost, ranked.model.names(&program).join(" "));
    }
    println!(
        "search: {} decisions, {} conflicts",
        out.summary.decisions, out.summary.conflicts
    );
}
