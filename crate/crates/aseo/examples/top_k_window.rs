//! Top-k enumeration with threshold pruning: keep the best k models in a
//! window and cut off any partial assignment whose cost already exceeds
//! the k-th best. The instance makes the pruning visible by giving two
//! expensive atoms that doom every extension once both are chosen.
//!
//! ```sh
//! cargo run --example top_k_window
//! ```

use aseo::solver::SearchConfig;
use aseo::{parse_program, smart_enumerate};

const PROGRAM: &str = "
    % five independent switches, two of them costly
    s1 :- not t1. t1 :- not s1.
    s2 :- not t2. t2 :- not s2.
    s3 :- not t3. t3 :- not s3.
    s4 :- not t4. t4 :- not s4.
    s5 :- not t5. t5 :- not s5.
    :- s1, s2, s3, s4, s5.
    #minimize{9@1:s1; 1@1:s2; 1@1:s3; 1@1:s4; 9@1:s5}.
";

fn main() {
    let program = parse_program(PROGRAM).expect("the program parses");
    for k in [1usize, 3, 8] {
        let out = smart_enumerate(&program, k, &SearchConfig::default()).expect("enumeration runs");
        println!("k = {k}:");
        for ranked in &out.models {
            let on: Vec<&str> = ranked
                .model
                .names(&program)
                .into_iter()
                .filter(|n| n.starts_with('s'))
                .collect();
            println!("  {} {{{}}}", ranked.cost, on.join(", "));
        }
        println!(
            "  visited {} models, added {} pruning nogoods, {} conflicts\n",
            out.summary.models, out.summary.nogoods_added, out.summary.conflicts
        );
    }
}
