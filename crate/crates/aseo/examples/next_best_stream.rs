//! Stream answer sets in non-decreasing cost order without storing them:
//! weight enumeration alternates optimization with equality and
//! strict-bound constraints, and this example prints the constraint
//! evolution alongside the models it emits.
//!
//! ```sh
//! cargo run --example next_best_stream
//! ```

use aseo::solver::SearchConfig;
use aseo::{parse_program, weight_enumerate};

fn main() {
    let path = format!("{}/fixtures/example1.lp", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).expect("fixture exists");
    let program = parse_program(&text).expect("fixture parses");

    let mut emitted = 0usize;
    let outcome = weight_enumerate(&program, None, &SearchConfig::default(), |ranked| {
        println!("model {}: {} {}", ranked.index, ranked.cost, ranked.model.names(&program).join(" "));
        emitted += 1;
    })
    .expect("enumeration runs");

    println!("\nconstraint evolution ({} optimizer calls):", outcome.optimize_calls);
    for frame in &outcome.frames {
        let eqs: Vec<String> =
            frame.eqs.iter().map(|(level, value)| format!("f{level} = {value}")).collect();
        match frame.gt {
            Some((level, bound)) => {
                println!("  [{}] with f{level} > {bound}", eqs.join(", "))
            }
            None => println!("  [{}]  (enumerate this class)", eqs.join(", ")),
        }
    }
    println!("\nemitted {emitted} models, never holding more than one in memory");
}
