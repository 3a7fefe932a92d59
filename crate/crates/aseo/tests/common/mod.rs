//! Shared helpers for the integration suites: the five-set pruning
//! fixture, seeded random Bayesian networks, and an exact posterior by
//! direct summation that stays independent of the solving path.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use aseo::bayes::{BayesNet, QuerySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// The five target sets of the pruning fixture, as indices into l1..l5.
pub const FIVE_SET_TARGETS: [&[usize]; 5] =
    [&[1, 2, 3], &[1, 3, 5], &[2, 3, 5], &[1, 2, 4], &[1, 4, 5]];

/// Weights of l1..l5 in the pruning fixture's single objective.
pub const FIVE_SET_WEIGHTS: [u64; 5] = [5, 1, 2, 2, 6];

/// A program over complementary pairs l1/nl1 .. l5/nl5 whose answer sets
/// restrict to exactly the five target subsets of {l1..l5}; `order` gives
/// the interning (and thus branching) order of the pairs.
pub fn five_set_program(order: &[usize]) -> String {
    let mut text = String::new();
    for &i in order {
        text.push_str(&format!("l{i} :- not nl{i}. nl{i} :- not l{i}.\n"));
    }
    for mask in 0u32..32 {
        let subset: Vec<usize> = (1..=5).filter(|i| (mask >> (i - 1)) & 1 == 1).collect();
        if FIVE_SET_TARGETS.contains(&subset.as_slice()) {
            continue;
        }
        let body: Vec<String> = (1..=5)
            .map(|i| if subset.contains(&i) { format!("l{i}") } else { format!("nl{i}") })
            .collect();
        text.push_str(&format!(":- {}.\n", body.join(", ")));
    }
    let terms: Vec<String> =
        (1..=5).map(|i| format!("{}@1:l{i}", FIVE_SET_WEIGHTS[i - 1])).collect();
    text.push_str(&format!("#minimize{{{}}}.\n", terms.join("; ")));
    text
}

/// The subset of {1..5} whose l-atoms a model contains.
pub fn l_pattern(program: &aseo::Program, model: &aseo::AnswerSet) -> Vec<usize> {
    (1..=5)
        .filter(|i| {
            program
                .signature
                .lookup(&format!("l{i}"))
                .is_some_and(|atom| model.contains(atom))
        })
        .collect()
}

/// A random Boolean network with up to five variables, dense-ish parents,
/// and probabilities bounded away from 0 and 1.
pub fn random_net_json(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=5usize);
    let mut variables = Vec::new();
    for v in 0..n {
        let mut parents: Vec<usize> = Vec::new();
        for p in 0..v {
            if rng.gen_bool(0.45) {
                parents.push(p);
            }
        }
        let rows: Vec<String> = (0..(1usize << parents.len()))
            .map(|combo| {
                let given: Vec<String> =
                    (0..parents.len()).map(|j| ((combo >> j) & 1 == 1).to_string()).collect();
                let p: f64 = rng.gen_range(0.05..=0.95);
                format!(r#"{{"given": [{}], "p_true": {p}}}"#, given.join(", "))
            })
            .collect();
        let parent_names: Vec<String> = parents.iter().map(|p| format!(r#""v{p}""#)).collect();
        variables.push(format!(
            r#"{{"name": "v{v}", "parents": [{}], "cpt": [{}]}}"#,
            parent_names.join(", "),
            rows.join(", ")
        ));
    }
    format!(r#"{{"variables": [{}]}}"#, variables.join(", "))
}

/// A random query spec over the net: one query variable and evidence on up
/// to two others.
pub fn random_query(net: &BayesNet, seed: u64) -> QuerySpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let q = rng.gen_range(0..net.len());
    let mut evidence = BTreeMap::new();
    for v in 0..net.len() {
        if v != q && rng.gen_bool(0.35) && evidence.len() < 2 {
            evidence.insert(net.name(v).to_string(), rng.gen_bool(0.5));
        }
    }
    QuerySpec::new(net.name(q).to_string(), evidence)
}

/// Exact posterior P(query = true | evidence) by summation over every full
/// assignment, straight from the CPTs.
pub fn posterior_by_summation(net: &BayesNet, spec: &QuerySpec) -> f64 {
    let n = net.len();
    let q = net.index_of(&spec.query).expect("query variable");
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    'assignments: for mask in 0..(1usize << n) {
        let value = |v: usize| (mask >> v) & 1 == 1;
        for (name, &b) in &spec.evidence {
            if value(net.index_of(name).expect("evidence variable")) != b {
                continue 'assignments;
            }
        }
        let joint = joint_probability(net, &|v| value(v));
        denominator += joint;
        if value(q) {
            numerator += joint;
        }
    }
    numerator / denominator
}

/// The joint probability of one full assignment.
pub fn joint_probability(net: &BayesNet, value: &dyn Fn(usize) -> bool) -> f64 {
    let mut joint = 1.0;
    for v in 0..net.len() {
        let combo = net
            .parents(v)
            .iter()
            .enumerate()
            .fold(0usize, |acc, (j, &p)| acc | ((value(p) as usize) << j));
        let p = net.p_true(v, combo);
        joint *= if value(v) { p } else { 1.0 - p };
    }
    joint
}

/// Independent reference for the truncated estimator: rank each branch's
/// evidence-consistent assignments by exact joint probability, keep the
/// best `k` per branch, and take the mass ratio. No solving involved.
pub fn reference_topk_estimate(net: &BayesNet, spec: &QuerySpec, k: usize) -> f64 {
    let n = net.len();
    let q = net.index_of(&spec.query).expect("query variable");
    let branch = |qv: bool| -> f64 {
        let mut masses: Vec<f64> = Vec::new();
        'assignments: for mask in 0..(1usize << n) {
            let value = |v: usize| (mask >> v) & 1 == 1;
            if value(q) != qv {
                continue;
            }
            for (name, &b) in &spec.evidence {
                if value(net.index_of(name).expect("evidence variable")) != b {
                    continue 'assignments;
                }
            }
            masses.push(joint_probability(net, &|v| value(v)));
        }
        masses.sort_by(|a, b| b.partial_cmp(a).expect("probabilities are comparable"));
        masses.iter().take(k).sum()
    };
    let t = branch(true);
    let f = branch(false);
    t / (t + f)
}
