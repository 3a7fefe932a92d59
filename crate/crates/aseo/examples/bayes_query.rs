//! Approximate a posterior on a small Bayesian network from its most
//! probable assignments: the network is pruned to the query-relevant
//! part, compiled to a weighted program, and the top-k assignments of
//! each query branch are turned into a mass ratio. With k large enough
//! the estimate is exact up to integer rounding of the log-weights.
//!
//! ```sh
//! cargo run --example bayes_query
//! ```

use std::collections::BTreeMap;

use aseo::bayes::{approximate_query, encode_map, load_network, relevant_subnetwork, QuerySpec};

fn main() {
    let path = format!("{}/fixtures/chain.json", env!("CARGO_MANIFEST_DIR"));
    let source = std::fs::read_to_string(path).expect("fixture exists");
    let net = load_network(&source).expect("network loads");
    println!("network: {} variables ({})", net.len(), net.variable_names().collect::<Vec<_>>().join(" -> "));

    let spec = QuerySpec::new("z", BTreeMap::from([("x".to_string(), true)]));
    let sub = relevant_subnetwork(&net, &spec).expect("pruning runs");
    println!("relevant to z given x: {} of {} variables", sub.len(), net.len());

    let encoding = encode_map(&sub, &spec.evidence, 1_000_000).expect("encoding builds");
    println!(
        "encoding: {} atoms, {} rules, {} zero-probability rows hardened",
        encoding.program.atom_count(),
        encoding.program.rules.len(),
        encoding.forbidden_rows
    );

    for k in [1usize, 2, 4, 8] {
        let est = approximate_query(&sub, &spec.restricted_to(&sub), k, 1_000_000)
            .expect("estimation runs");
        println!(
            "k = {k}: P(z | x=true) ~ {:.6}  (mass {:.4e} vs {:.4e}, {}+{} assignments)",
            est.posterior, est.mass_true, est.mass_false, est.assignments_true, est.assignments_false
        );
    }
    println!("exact by hand: P(z|x) = 0.9*0.7 + 0.1*0.3 = 0.660000");

    // Pruning in the other direction: given y, the downstream z cannot
    // influence x and is dropped before anything is solved.
    let spec = QuerySpec::new("x", BTreeMap::from([("y".to_string(), true)]));
    let sub = relevant_subnetwork(&net, &spec).expect("pruning runs");
    println!(
        "\nrelevant to x given y: {} of {} variables ({} dropped)",
        sub.len(),
        net.len(),
        net.variable_names().filter(|n| sub.index_of(n).is_none()).collect::<Vec<_>>().join(", ")
    );
    let est = approximate_query(&sub, &spec.restricted_to(&sub), 4, 1_000_000).expect("estimation runs");
    println!("P(x | y=true) ~ {:.6}", est.posterior);
}
