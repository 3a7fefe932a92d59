//! Enumeration of answer sets in the order given by prioritized
//! pseudo-Boolean objectives (ASEO), for ground normal logic programs.
//!
//! The crate is organized bottom-up:
//!
//! - [`program`]: the data model (atoms, rules, sum conditions, objectives)
//!   and the reference semantics: reduct, least model, answer-set check,
//!   cost evaluation, and a brute-force ranking oracle.
//! - [`parse`]: a parser and printer for the crate's ground `.lp` dialect.
//! - [`solver`]: a native enumeration engine with a partial-assignment hook
//!   and runtime nogood injection.
//! - [`enumerate`](mod@enumerate): the three ranking strategies, naive (enumerate and
//!   sort), weight enumeration (iterated optimization with equality and
//!   strict-bound constraints), and smart enumeration (top-k window with
//!   threshold pruning), plus the constraint builders they share.
//! - [`bayes`]: Boolean Bayesian networks, relevance pruning, a weighted MAP
//!   encoding, and ranked-assignment query approximation.
//! - [`generate`]: program generators for the worst-case family and seeded
//!   random instances.
//! - [`cli`]: the `aseo` command-line surface wrapping all of the above.
//!
//! See the crate examples for one runnable walk-through per capability.

pub mod bayes;
pub mod cli;
pub mod enumerate;
pub mod generate;
pub mod parse;
pub mod program;
pub mod solver;

pub use enumerate::{
    build_constraint_eq, build_constraint_gt, naive_enumerate, smart_enumerate, weight_enumerate,
    TopKWindow,
};
pub use parse::{parse_program, render_program, ParseError};
pub use program::{
    brute_force_aseo, compare_lex, eval_cost, eval_objective, is_answer_set, least_model, reduct,
    AnswerSet, Atom, CostVector, Literal, ObjectiveFunction, Program, RankedModel, Relation, Rule,
    SumCondition,
};
pub use solver::{enumerate, optimize, solve_one, Nogood, SearchConfig, Trail};
