//! Program generators: the worst-case `P_n` family and seeded random
//! instances for the oracle test harness.

use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("n must be at least 1")]
    ZeroSize,
    #[error("2^(n-1) overflows the 64-bit weight type for n = {n}")]
    WeightOverflow { n: u32 },
}

/// The family with `2^(2n-1)` answer sets spread evenly over the objective
/// values `0..2^n`: choices for `a_i`/`b_i` with complements, a chain of
/// `lt_i` comparisons over the suffix bits, and two constraints that admit
/// exactly half of the `b` assignments for every fixed `a` assignment.
/// The objective reads the `a` bits as a binary number.
pub fn pn_program(n: u32) -> Result<String, GenError> {
    if n == 0 {
        return Err(GenError::ZeroSize);
    }
    if n > 64 {
        return Err(GenError::WeightOverflow { n });
    }
    let mut out = String::new();
    for i in 1..=n {
        writeln!(out, "a{i} :- not na{i}. na{i} :- not a{i}.").unwrap();
        writeln!(out, "b{i} :- not nb{i}. nb{i} :- not b{i}.").unwrap();
    }
    for i in 1..=n {
        writeln!(out, "lt{i} :- na{i}, b{i}.").unwrap();
        if i < n {
            let j = i + 1;
            writeln!(out, "lt{i} :- a{i}, b{i}, lt{j}.").unwrap();
            writeln!(out, "lt{i} :- na{i}, nb{i}, lt{j}.").unwrap();
        }
    }
    writeln!(out, ":- b1, lt2.").unwrap();
    writeln!(out, ":- nb1, not lt2.").unwrap();
    let terms: Vec<String> = (1..=n).map(|i| format!("{}@1:a{i}", 1u64 << (i - 1))).collect();
    writeln!(out, "#minimize{{{}}}.", terms.join("; ")).unwrap();
    Ok(out)
}

/// A seeded random instance: complementary choice pairs over roughly half
/// the rule budget, random rules and constraints for the rest, and random
/// non-negative objective terms on every requested level. The same seed
/// always yields the same text.
pub fn random_program(atoms: usize, rules: usize, levels: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    if atoms == 0 {
        return out;
    }
    let name = |i: usize| format!("x{}", i + 1);

    let pairs = (atoms / 2).min(rules / 2);
    for j in 0..pairs {
        let a = name(2 * j);
        let b = name(2 * j + 1);
        writeln!(out, "{a} :- not {b}. {b} :- not {a}.").unwrap();
    }
    let remaining = rules - 2 * pairs;
    for _ in 0..remaining {
        let constraint = rng.gen_bool(0.2);
        let body_len = rng.gen_range(if constraint { 1 } else { 0 }..=3usize);
        let mut body: Vec<String> = Vec::with_capacity(body_len);
        for _ in 0..body_len {
            let atom = name(rng.gen_range(0..atoms));
            if rng.gen_bool(0.4) {
                body.push(format!("not {atom}"));
            } else {
                body.push(atom);
            }
        }
        if constraint {
            writeln!(out, ":- {}.", body.join(", ")).unwrap();
        } else {
            let head = name(rng.gen_range(0..atoms));
            if body.is_empty() {
                writeln!(out, "{head}.").unwrap();
            } else {
                writeln!(out, "{head} :- {}.", body.join(", ")).unwrap();
            }
        }
    }
    for level in 1..=levels {
        let mut terms: Vec<String> = Vec::new();
        for i in 0..atoms {
            if rng.gen_bool(0.6) {
                let weight: u64 = rng.gen_range(0..=9);
                let lit = if rng.gen_bool(0.25) {
                    format!("not {}", name(i))
                } else {
                    name(i)
                };
                terms.push(format!("{weight}@{level}:{lit}"));
            }
        }
        if terms.is_empty() {
            terms.push(format!("1@{level}:{}", name(0)));
        }
        writeln!(out, "#minimize{{{}}}.", terms.join("; ")).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;
    use crate::program::brute_force_aseo;

    #[test]
    fn pn_counts() {
        for n in 1..=3u32 {
            let p = parse_program(&pn_program(n).unwrap()).unwrap();
            let ranked = brute_force_aseo(&p).unwrap();
            assert_eq!(ranked.len(), 1usize << (2 * n - 1), "n = {n}");
        }
    }

    #[test]
    fn pn_one_keeps_b1() {
        let p = parse_program(&pn_program(1).unwrap()).unwrap();
        let b1 = p.signature.lookup("b1").unwrap();
        for r in brute_force_aseo(&p).unwrap() {
            assert!(r.model.contains(b1));
        }
    }

    #[test]
    fn pn_two_value_multiset() {
        let p = parse_program(&pn_program(2).unwrap()).unwrap();
        let values: Vec<u64> =
            brute_force_aseo(&p).unwrap().iter().map(|r| r.cost.values()[0]).collect();
        assert_eq!(values, vec![0, 0, 1, 1, 2, 2, 3, 3]);
    }

    #[test]
    fn pn_rejects_bad_sizes() {
        assert_eq!(pn_program(0), Err(GenError::ZeroSize));
        assert!(matches!(pn_program(65), Err(GenError::WeightOverflow { .. })));
    }

    #[test]
    fn random_is_deterministic() {
        assert_eq!(random_program(10, 12, 2, 42), random_program(10, 12, 2, 42));
        assert_ne!(random_program(10, 12, 2, 42), random_program(10, 12, 2, 43));
    }

    #[test]
    fn random_with_no_rules_has_the_empty_answer_set() {
        let text = random_program(6, 0, 1, 5);
        let p = parse_program(&text).unwrap();
        let ranked = brute_force_aseo(&p).unwrap();
        assert_eq!(ranked.len(), 1);
        assert!(ranked[0].model.is_empty());
    }

    #[test]
    fn random_always_parses() {
        for seed in 0..50u64 {
            let text = random_program(10, 12, 2, seed);
            parse_program(&text).unwrap();
        }
    }
}
