//! The generated worst-case family: 2^(2n-1) answer sets spread evenly
//! over 2^n objective values, so ranked enumeration has to work through
//! exponentially many value classes. Prints the value histogram for a
//! small n and times weight vs smart enumeration on a bigger one.
//!
//! ```sh
//! cargo run --release --example worst_case_family
//! ```

use std::collections::BTreeMap;
use std::time::Instant;

use aseo::generate::pn_program;
use aseo::solver::SearchConfig;
use aseo::{parse_program, smart_enumerate, weight_enumerate};

fn main() {
    let n = 3u32;
    let program = parse_program(&pn_program(n).unwrap()).unwrap();
    let mut histogram: BTreeMap<u64, usize> = BTreeMap::new();
    weight_enumerate(&program, None, &SearchConfig::default(), |ranked| {
        *histogram.entry(ranked.cost.values()[0]).or_default() += 1;
    })
    .unwrap();
    println!("n = {n}: {} answer sets over {} values", 1 << (2 * n - 1), histogram.len());
    for (value, count) in &histogram {
        println!("  value {value}: {count} answer sets {}", "#".repeat(*count));
    }

    let n = 7u32;
    let k = 10usize;
    let program = parse_program(&pn_program(n).unwrap()).unwrap();
    let config = SearchConfig::default();

    let start = Instant::now();
    let mut emitted = 0usize;
    weight_enumerate(&program, Some(k), &config, |_| emitted += 1).unwrap();
    let weight_time = start.elapsed();

    let start = Instant::now();
    let smart = smart_enumerate(&program, k, &config).unwrap();
    let smart_time = start.elapsed();

    println!("\nn = {n}, best {k} models:");
    println!("  weight enumeration: {emitted} models in {weight_time:?}");
    println!(
        "  smart enumeration:  {} models in {smart_time:?} (visited {} in total)",
        smart.models.len(),
        smart.summary.models
    );
    println!("  the family favors weight enumeration: optimal classes are easy to pin down,");
    println!("  while the window has to sift an exponential model population");
}
