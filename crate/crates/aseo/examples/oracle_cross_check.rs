//! Cross-check the three strategies against the brute-force oracle on a
//! seeded random instance: same answer sets, same cost-vector sequence.
//!
//! ```sh
//! cargo run --example oracle_cross_check [seed]
//! ```

use aseo::generate::random_program;
use aseo::solver::SearchConfig;
use aseo::{brute_force_aseo, naive_enumerate, parse_program, smart_enumerate, weight_enumerate};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let text = random_program(9, 11, 2, seed);
    println!("seed {seed} generated:\n{text}");
    let program = parse_program(&text).unwrap();
    let config = SearchConfig::default();

    let oracle = brute_force_aseo(&program).unwrap();
    let expected: Vec<String> = oracle.iter().map(|r| r.cost.to_string()).collect();
    println!("oracle: {} answer sets, costs [{}]", oracle.len(), expected.join(" "));

    let naive = naive_enumerate(&program, None, &config).unwrap();
    let got: Vec<String> = naive.models.iter().map(|r| r.cost.to_string()).collect();
    assert_eq!(got, expected);
    println!("naive agrees");

    let mut got = Vec::new();
    weight_enumerate(&program, None, &config, |r| got.push(r.cost.to_string())).unwrap();
    assert_eq!(got, expected);
    println!("weight agrees");

    if !oracle.is_empty() {
        let smart = smart_enumerate(&program, oracle.len(), &config).unwrap();
        let got: Vec<String> = smart.models.iter().map(|r| r.cost.to_string()).collect();
        assert_eq!(got, expected);
        println!("smart agrees");
    }
}
