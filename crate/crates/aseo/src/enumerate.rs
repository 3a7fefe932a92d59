//! Ranked enumeration: answer sets in non-decreasing lexicographic cost
//! order, by three strategies with one shared contract: the multiset of
//! emitted cost vectors is the same for all of them.
//!
//! * [`naive_enumerate`] finds every answer set, then sorts. Memory grows
//!   with the number of answer sets; fine when that number is small.
//! * [`weight_enumerate`] interleaves optimization with equality and
//!   strict-bound constraints layered over the pristine input, emitting
//!   one equal-cost class at a time and never holding more than one model
//!   in memory. The working program stays within `p` constraints of the
//!   input.
//! * [`smart_enumerate`] runs one enumeration pass while keeping the best
//!   `k` models in a window; partial assignments whose cost already
//!   exceeds the window threshold are cut off with a nogood.

use crate::program::{
    compare_lex, eval_cost, AnswerSet, CostError, CostVector, ObjectiveFunction, Program,
    Relation, Rule, SumCondition,
};
use crate::solver::{
    enumerate, optimize_with_stats, Flow, Nogood, SearchConfig, SearchHooks, SolveError, Summary,
    Trail,
};

pub use crate::program::RankedModel;

/// Constraint that discards every answer set whose value at this objective
/// is at most `bound`; survivors have a value strictly greater.
pub fn build_constraint_gt(objective: &ObjectiveFunction, bound: u64) -> Rule {
    Rule::constraint(
        Vec::new(),
        Vec::new(),
        Some(SumCondition::from_weights(objective.terms.clone(), Relation::Le, bound as i128)),
    )
}

/// Constraint that discards every answer set whose value at this objective
/// differs from `value`; survivors match it exactly.
pub fn build_constraint_eq(objective: &ObjectiveFunction, value: u64) -> Rule {
    Rule::constraint(
        Vec::new(),
        Vec::new(),
        Some(SumCondition::from_weights(objective.terms.clone(), Relation::Ne, value as i128)),
    )
}

/// The best `k` models seen so far, sorted by cost with discovery order
/// breaking ties. Once full, the cost of the k-th entry is the pruning
/// threshold; before that the threshold is unbounded.
#[derive(Clone, Debug)]
pub struct TopKWindow {
    k: usize,
    entries: Vec<RankedModel>,
    discoveries: usize,
}

impl TopKWindow {
    pub fn new(k: usize) -> TopKWindow {
        assert!(k >= 1, "a top-k window needs room for at least one model");
        TopKWindow { k, entries: Vec::new(), discoveries: 0 }
    }

    /// Insertion sort by (cost, discovery); when the window overflows the
    /// entry at position k+1 is dropped.
    pub fn insert(&mut self, model: AnswerSet, cost: CostVector) {
        let index = self.discoveries;
        self.discoveries += 1;
        let pos = self.entries.partition_point(|e| e.cost <= cost);
        self.entries.insert(pos, RankedModel { model, cost, index });
        if self.entries.len() > self.k {
            self.entries.truncate(self.k);
        }
    }

    /// The k-th best cost once the window is full; `None` plays the role
    /// of an infinite threshold.
    pub fn threshold(&self) -> Option<&CostVector> {
        (self.entries.len() == self.k).then(|| &self.entries[self.k - 1].cost)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[RankedModel] {
        &self.entries
    }

    /// Final output: entries in window order, re-indexed by emission
    /// position.
    pub fn into_ranked(self) -> Vec<RankedModel> {
        self.entries
            .into_iter()
            .enumerate()
            .map(|(index, mut r)| {
                r.index = index;
                r
            })
            .collect()
    }
}

/// Per-level cost of a partial assignment: the weights of objective
/// literals currently on the trail. Along any extension of the trail this
/// only grows, because weights are non-negative and assignments are only
/// added.
pub fn partial_cost(program: &Program, trail: &Trail) -> Result<CostVector, CostError> {
    let mut values = Vec::with_capacity(program.levels());
    for objective in &program.objectives {
        let mut sum: u64 = 0;
        for &(w, lit) in &objective.terms {
            if trail.literal_true(lit) {
                sum = sum.checked_add(w).ok_or(CostError::Overflow)?;
            }
        }
        values.push(sum);
    }
    Ok(CostVector::new(values))
}

/// The smart-enumeration pruning rule: if the partial cost already exceeds
/// the window threshold lexicographically, every completion does too, so
/// the whole subtree is excluded by a nogood over the current trail.
pub fn prune_above_threshold(
    program: &Program,
    window: &TopKWindow,
    trail: &Trail,
) -> Result<Option<Nogood>, CostError> {
    let Some(threshold) = window.threshold() else {
        return Ok(None);
    };
    let cost = partial_cost(program, trail)?;
    if compare_lex(&cost, threshold)? == std::cmp::Ordering::Greater {
        Ok(Some(Nogood::from_trail(trail)))
    } else {
        Ok(None)
    }
}

/// Result of [`naive_enumerate`] or [`smart_enumerate`]: ranked models in
/// emission order plus the solver totals behind them.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub models: Vec<RankedModel>,
    pub summary: Summary,
}

struct CollectCosts<'p> {
    program: &'p Program,
    found: Vec<(CostVector, usize, AnswerSet)>,
    error: Option<CostError>,
}

impl SearchHooks for CollectCosts<'_> {
    fn on_model(&mut self, model: &AnswerSet) -> Flow {
        match eval_cost(self.program, model) {
            Ok(cost) => {
                self.found.push((cost, self.found.len(), model.clone()));
                Flow::Continue
            }
            Err(e) => {
                self.error = Some(e);
                Flow::Stop
            }
        }
    }
}

/// Enumerates every answer set, then sorts stably by cost (discovery order
/// breaks ties) and keeps the first `k` (`None` keeps all).
pub fn naive_enumerate(
    program: &Program,
    k: Option<usize>,
    config: &SearchConfig,
) -> Result<Enumeration, SolveError> {
    let mut hooks = CollectCosts { program, found: Vec::new(), error: None };
    let summary = enumerate(program, config, &mut hooks);
    if let Some(e) = hooks.error {
        return Err(SolveError::Cost(e));
    }
    let mut found = hooks.found;
    found.sort();
    if let Some(k) = k {
        found.truncate(k);
    }
    let models = found
        .into_iter()
        .enumerate()
        .map(|(index, (cost, _, model))| RankedModel { model, cost, index })
        .collect();
    Ok(Enumeration { models, summary })
}

/// One snapshot of the constraints layered over the pristine program by
/// weight enumeration: equalities fixing level values plus at most one
/// strict lower bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintFrame {
    pub eqs: Vec<(u32, u64)>,
    pub gt: Option<(u32, u64)>,
}

/// Outcome of [`weight_enumerate`]. `frames` records every rebuild of the
/// working program, in order; `unsat_at_start` distinguishes an
/// inconsistent input from an exhausted enumeration.
#[derive(Clone, Debug, Default)]
pub struct WeightOutcome {
    pub emitted: usize,
    pub unsat_at_start: bool,
    pub frames: Vec<ConstraintFrame>,
    pub optimize_calls: usize,
    pub decisions: u64,
    pub conflicts: u64,
    pub timed_out: bool,
}

struct ClassSink<'a, F: FnMut(RankedModel)> {
    sink: &'a mut F,
    cost: &'a CostVector,
    emitted: &'a mut usize,
    k: Option<usize>,
}

impl<F: FnMut(RankedModel)> SearchHooks for ClassSink<'_, F> {
    fn on_model(&mut self, model: &AnswerSet) -> Flow {
        (self.sink)(RankedModel {
            model: model.clone(),
            cost: self.cost.clone(),
            index: *self.emitted,
        });
        *self.emitted += 1;
        match self.k {
            Some(k) if *self.emitted >= k => Flow::Stop,
            _ => Flow::Continue,
        }
    }
}

/// Streams answer sets to `sink` in non-decreasing cost order until `k`
/// models were emitted (`None` for all of them) or the program is
/// exhausted. Each round optimizes the constrained program, enumerates the
/// resulting equal-cost class, then demands a strictly greater value at
/// the deepest level; when that is unsatisfiable the bound moves up one
/// level, keeping equalities below it. A deadline in `config` aborts with
/// `timed_out` set and the emission so far intact.
pub fn weight_enumerate<F: FnMut(RankedModel)>(
    program: &Program,
    k: Option<usize>,
    config: &SearchConfig,
    mut sink: F,
) -> Result<WeightOutcome, SolveError> {
    let mut outcome = WeightOutcome::default();
    if k == Some(0) {
        return Ok(outcome);
    }
    let p = program.levels();

    if p == 0 {
        // Every answer set is optimal; emit in plain enumeration order.
        let empty = CostVector::default();
        let mut hooks =
            ClassSink { sink: &mut sink, cost: &empty, emitted: &mut outcome.emitted, k };
        let summary = enumerate(program, config, &mut hooks);
        outcome.decisions = summary.decisions;
        outcome.conflicts = summary.conflicts;
        outcome.timed_out = summary.timed_out;
        return Ok(outcome);
    }

    // C[i] of the last enumerated class, and the constraints currently
    // layered over the input (at most p of them at any point).
    let mut class_values: Vec<u64> = Vec::new();
    let mut extra: Vec<Rule> = Vec::new();
    let mut level = p; // p'
    let mut first_call = true;

    loop {
        let working = program.with_rules(extra.iter().cloned());
        outcome.optimize_calls += 1;
        let (best, stats) = match optimize_with_stats(&working, config) {
            Ok(r) => r,
            Err(SolveError::Timeout) => {
                outcome.timed_out = true;
                return Ok(outcome);
            }
            Err(e) => return Err(e),
        };
        outcome.decisions += stats.decisions;
        outcome.conflicts += stats.conflicts;
        match best {
            None => {
                if first_call {
                    outcome.unsat_at_start = true;
                    return Ok(outcome);
                }
                if level <= 1 {
                    return Ok(outcome);
                }
                level -= 1;
                extra = program.objectives[..level - 1]
                    .iter()
                    .zip(&class_values)
                    .map(|(obj, &v)| build_constraint_eq(obj, v))
                    .collect();
                extra.push(build_constraint_gt(&program.objectives[level - 1], class_values[level - 1]));
                outcome.frames.push(ConstraintFrame {
                    eqs: (1..level as u32).zip(class_values.iter().copied()).collect(),
                    gt: Some((level as u32, class_values[level - 1])),
                });
            }
            Some((_, cost)) => {
                first_call = false;
                class_values = cost.values().to_vec();
                let class_rules: Vec<Rule> = program
                    .objectives
                    .iter()
                    .zip(&class_values)
                    .map(|(obj, &v)| build_constraint_eq(obj, v))
                    .collect();
                outcome.frames.push(ConstraintFrame {
                    eqs: (1..=p as u32).zip(class_values.iter().copied()).collect(),
                    gt: None,
                });
                let class_program = program.with_rules(class_rules);
                let mut hooks =
                    ClassSink { sink: &mut sink, cost: &cost, emitted: &mut outcome.emitted, k };
                let stats = enumerate(&class_program, config, &mut hooks);
                outcome.decisions += stats.decisions;
                outcome.conflicts += stats.conflicts;
                if stats.timed_out {
                    outcome.timed_out = true;
                    return Ok(outcome);
                }
                if matches!(k, Some(k) if outcome.emitted >= k) {
                    return Ok(outcome);
                }
                level = p;
                extra = program.objectives[..p - 1]
                    .iter()
                    .zip(&class_values)
                    .map(|(obj, &v)| build_constraint_eq(obj, v))
                    .collect();
                extra.push(build_constraint_gt(&program.objectives[p - 1], class_values[p - 1]));
                outcome.frames.push(ConstraintFrame {
                    eqs: (1..p as u32).zip(class_values.iter().copied()).collect(),
                    gt: Some((p as u32, class_values[p - 1])),
                });
            }
        }
    }
}

struct SmartHooks<'p> {
    program: &'p Program,
    window: TopKWindow,
    error: Option<CostError>,
}

impl SearchHooks for SmartHooks<'_> {
    fn on_partial(&mut self, trail: &Trail) -> Option<Nogood> {
        match prune_above_threshold(self.program, &self.window, trail) {
            Ok(nogood) => nogood,
            Err(e) => {
                self.error = Some(e);
                None
            }
        }
    }

    fn on_model(&mut self, model: &AnswerSet) -> Flow {
        match eval_cost(self.program, model) {
            Ok(cost) => {
                self.window.insert(model.clone(), cost);
                Flow::Continue
            }
            Err(e) => {
                self.error = Some(e);
                Flow::Stop
            }
        }
    }
}

/// Window-based top-k enumeration: one pass over the answer sets, keeping
/// the best `k` in memory and pruning partial assignments that are already
/// strictly worse than the k-th best. `k` must be finite and at least 1;
/// the window and its threshold are undefined otherwise.
pub fn smart_enumerate(
    program: &Program,
    k: usize,
    config: &SearchConfig,
) -> Result<Enumeration, SolveError> {
    if k == 0 {
        return Err(SolveError::ZeroWindow);
    }
    let mut hooks = SmartHooks { program, window: TopKWindow::new(k), error: None };
    let summary = enumerate(program, config, &mut hooks);
    if let Some(e) = hooks.error {
        return Err(SolveError::Cost(e));
    }
    Ok(Enumeration { models: hooks.window.into_ranked(), summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_program;
    use crate::program::{brute_force_aseo, is_answer_set};

    const EXAMPLE1: &str = "\
        s1 :- not s2, not s3. s2 :- not s1, not s3. s3 :- not s1, not s2.\n\
        #minimize{1@1:s1; 1@1:s2; 1@1:s3}.\n\
        #minimize{4@2:s1; 4@2:s2; 7@2:s3}.\n\
        #minimize{1@3:s1; 7@3:s2; 4@3:s3}.";

    fn costs(models: &[RankedModel]) -> Vec<Vec<u64>> {
        models.iter().map(|r| r.cost.values().to_vec()).collect()
    }

    #[test]
    fn gt_constraint_keeps_strictly_greater() {
        let p = parse_program(EXAMPLE1).unwrap();
        let constrained = p.with_rules([build_constraint_gt(&p.objectives[2], 1)]);
        let ranked = brute_force_aseo(&constrained).unwrap();
        let values: Vec<u64> = ranked.iter().map(|r| r.cost.values()[2]).collect();
        assert_eq!(values, vec![7, 4]); // survivors <1,4,7> and <1,7,4>, in cost order

        // bound at the total weight eliminates everything
        let total: u64 = p.objectives[2].terms.iter().map(|(w, _)| w).sum();
        let none = p.with_rules([build_constraint_gt(&p.objectives[2], total)]);
        assert!(brute_force_aseo(&none).unwrap().is_empty());
    }

    #[test]
    fn eq_constraint_keeps_exact_value() {
        let p = parse_program(EXAMPLE1).unwrap();
        let all = p.with_rules([build_constraint_eq(&p.objectives[0], 1)]);
        assert_eq!(brute_force_aseo(&all).unwrap().len(), 3);

        let none = p.with_rules([build_constraint_eq(&p.objectives[0], 99)]);
        assert!(brute_force_aseo(&none).unwrap().is_empty());

        let one = p.with_rules([build_constraint_eq(&p.objectives[1], 7)]);
        assert_eq!(brute_force_aseo(&one).unwrap().len(), 1);
    }

    #[test]
    fn naive_orders_example1() {
        let p = parse_program(EXAMPLE1).unwrap();
        let out = naive_enumerate(&p, None, &SearchConfig::default()).unwrap();
        assert_eq!(costs(&out.models), vec![vec![1, 4, 1], vec![1, 4, 7], vec![1, 7, 4]]);
        for (i, r) in out.models.iter().enumerate() {
            assert_eq!(r.index, i);
            assert!(is_answer_set(&p, &r.model));
        }
    }

    #[test]
    fn naive_truncates_to_k() {
        let p = parse_program(EXAMPLE1).unwrap();
        let out = naive_enumerate(&p, Some(1), &SearchConfig::default()).unwrap();
        assert_eq!(costs(&out.models), vec![vec![1, 4, 1]]);
        // the whole space was still enumerated before sorting
        assert_eq!(out.summary.models, 3);
    }

    #[test]
    fn smart_without_objectives_keeps_first_k() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        let out = smart_enumerate(&p, 1, &SearchConfig::default()).unwrap();
        assert_eq!(out.models.len(), 1);
        assert!(out.models[0].cost.is_empty());
    }

    #[test]
    fn naive_on_inconsistent_program() {
        let p = parse_program("a :- not a. #minimize{1@1:a}.").unwrap();
        let out = naive_enumerate(&p, None, &SearchConfig::default()).unwrap();
        assert!(out.models.is_empty());
    }

    #[test]
    fn weight_replays_example1_constraint_evolution() {
        let p = parse_program(EXAMPLE1).unwrap();
        let mut emitted = Vec::new();
        let out = weight_enumerate(&p, Some(3), &SearchConfig::default(), |r| emitted.push(r))
            .unwrap();
        assert_eq!(out.emitted, 3);
        assert_eq!(
            emitted.iter().map(|r| r.cost.values().to_vec()).collect::<Vec<_>>(),
            vec![vec![1, 4, 1], vec![1, 4, 7], vec![1, 7, 4]]
        );
        // the run returns as soon as the third model is emitted, so the
        // last bound rebuild never happens under k = 3
        let bounds: Vec<(u32, u64)> = out.frames.iter().filter_map(|f| f.gt).collect();
        assert_eq!(bounds, vec![(3, 1), (3, 7), (2, 4)]);
    }

    #[test]
    fn weight_runs_to_exhaustion() {
        let p = parse_program(EXAMPLE1).unwrap();
        let mut emitted = Vec::new();
        let out =
            weight_enumerate(&p, None, &SearchConfig::default(), |r| emitted.push(r)).unwrap();
        assert_eq!(out.emitted, 3);
        // after the last class: gt at level 3, then drops through 2 and 1
        let bounds: Vec<(u32, u64)> = out.frames.iter().filter_map(|f| f.gt).collect();
        assert_eq!(bounds, vec![(3, 1), (3, 7), (2, 4), (3, 4), (2, 7), (1, 1)]);
        assert!(!out.unsat_at_start);
    }

    #[test]
    fn weight_reports_unsat_at_start() {
        let p = parse_program("a :- not a. #minimize{1@1:a}.").unwrap();
        let mut emitted = Vec::new();
        let out =
            weight_enumerate(&p, None, &SearchConfig::default(), |r| emitted.push(r)).unwrap();
        assert!(out.unsat_at_start);
        assert!(emitted.is_empty());
    }

    #[test]
    fn weight_without_objectives_degenerates_to_enumeration() {
        let p = parse_program("a :- not b. b :- not a.").unwrap();
        let mut emitted = Vec::new();
        let out =
            weight_enumerate(&p, None, &SearchConfig::default(), |r| emitted.push(r)).unwrap();
        assert_eq!(out.emitted, 2);
        assert!(emitted.iter().all(|r| r.cost.is_empty()));
    }

    #[test]
    fn window_keeps_best_k_with_tie_order() {
        let mut w = TopKWindow::new(2);
        assert!(w.threshold().is_none());
        w.insert(AnswerSet::empty(), CostVector::new(vec![9]));
        assert!(w.threshold().is_none());
        w.insert(AnswerSet::empty(), CostVector::new(vec![8]));
        assert_eq!(w.threshold().unwrap().values(), &[9]);
        w.insert(AnswerSet::empty(), CostVector::new(vec![8]));
        assert_eq!(w.threshold().unwrap().values(), &[8]);
        // the first cost-8 discovery outranks the second
        let ranked = w.into_ranked();
        assert_eq!(ranked.len(), 2);
        assert!(ranked[0].cost == ranked[1].cost);
    }

    #[test]
    fn smart_with_large_window_equals_naive() {
        let p = parse_program(EXAMPLE1).unwrap();
        let smart = smart_enumerate(&p, 10, &SearchConfig::default()).unwrap();
        let naive = naive_enumerate(&p, None, &SearchConfig::default()).unwrap();
        assert_eq!(costs(&smart.models), costs(&naive.models));
    }

    #[test]
    fn smart_rejects_empty_window() {
        let p = parse_program(EXAMPLE1).unwrap();
        assert!(matches!(
            smart_enumerate(&p, 0, &SearchConfig::default()),
            Err(SolveError::ZeroWindow)
        ));
    }

    #[test]
    fn strategies_agree_on_random_programs() {
        use crate::generate::random_program;
        for seed in 0..15u64 {
            let text = random_program(8, 10, 2, seed);
            let p = parse_program(&text).unwrap();
            let oracle: Vec<Vec<u64>> = brute_force_aseo(&p)
                .unwrap()
                .iter()
                .map(|r| r.cost.values().to_vec())
                .collect();
            let naive = naive_enumerate(&p, None, &SearchConfig::default()).unwrap();
            assert_eq!(costs(&naive.models), oracle, "seed {seed} naive");
            let mut streamed = Vec::new();
            weight_enumerate(&p, None, &SearchConfig::default(), |r| streamed.push(r)).unwrap();
            assert_eq!(
                streamed.iter().map(|r| r.cost.values().to_vec()).collect::<Vec<_>>(),
                oracle,
                "seed {seed} weight"
            );
            if !oracle.is_empty() {
                let smart = smart_enumerate(&p, oracle.len(), &SearchConfig::default()).unwrap();
                assert_eq!(costs(&smart.models), oracle, "seed {seed} smart");
            }
        }
    }
}
