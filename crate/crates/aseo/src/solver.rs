//! Native enumeration and optimization engine.
//!
//! The engine walks the binary tree of atom decisions with chronological
//! backtracking. After every propagation fixpoint it hands the current
//! [`Trail`] to a caller hook, which may inject a [`Nogood`]; the nogood is
//! kept for the rest of the run and the subtree it falsifies is abandoned.
//! Propagation is deliberately lightweight: unit propagation over rule
//! bodies and constraints, bound propagation for sum conditions inside
//! constraints, and support propagation ("every rule for an atom is
//! blocked, so the atom is false"). Stability is enforced by a reduct
//! check on each total assignment rather than by loop-formula learning, so
//! propagation only ever has to be sound, never complete.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::program::{
    eval_objective, is_answer_set, oracle_limit, AnswerSet, Atom, CostError, CostVector, Literal,
    ObjectiveFunction, Program, Relation, Rule, SumCondition,
};

/// Why a literal is on the trail.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reason {
    Decision,
    Propagated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrailEntry {
    pub literal: Literal,
    pub level: u32,
    pub reason: Reason,
}

/// The growing partial assignment: an append-only sequence of literals with
/// decision levels, plus a per-atom value index. Entries are only removed
/// by backtracking whole levels.
#[derive(Clone, Debug)]
pub struct Trail {
    values: Vec<Option<bool>>,
    entries: Vec<TrailEntry>,
}

impl Trail {
    pub fn new(atom_count: usize) -> Trail {
        Trail { values: vec![None; atom_count], entries: Vec::new() }
    }

    pub fn atom_count(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, atom: Atom) -> Option<bool> {
        self.values[atom.index()]
    }

    /// Whether the literal currently holds.
    pub fn literal_true(&self, lit: Literal) -> bool {
        self.value(lit.atom) == Some(lit.positive)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TrailEntry] {
        &self.entries
    }

    pub fn literals(&self) -> impl Iterator<Item = Literal> + '_ {
        self.entries.iter().map(|e| e.literal)
    }

    pub fn current_level(&self) -> u32 {
        self.entries.last().map_or(0, |e| e.level)
    }

    /// Appends a decision literal at a fresh level. Intended for building
    /// standalone trails when exercising hooks outside the engine; panics
    /// if the atom is already assigned.
    pub fn assume(&mut self, lit: Literal) {
        assert!(
            self.value(lit.atom).is_none(),
            "atom {} is already assigned",
            lit.atom.0
        );
        let level = self.current_level() + 1;
        self.values[lit.atom.index()] = Some(lit.positive);
        self.entries.push(TrailEntry { literal: lit, level, reason: Reason::Decision });
    }

    /// True if newly assigned, false if already assigned with this
    /// polarity; `Err` on the opposite polarity.
    fn assign(&mut self, lit: Literal, level: u32, reason: Reason) -> Result<bool, Conflict> {
        match self.value(lit.atom) {
            Some(v) if v == lit.positive => Ok(false),
            Some(_) => Err(Conflict),
            None => {
                self.values[lit.atom.index()] = Some(lit.positive);
                self.entries.push(TrailEntry { literal: lit, level, reason });
                Ok(true)
            }
        }
    }

    fn pop_to(&mut self, mark: usize) {
        while self.entries.len() > mark {
            let entry = self.entries.pop().unwrap();
            self.values[entry.literal.atom.index()] = None;
        }
    }
}

/// A set of literals that no model may jointly contain.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Nogood {
    literals: Vec<Literal>,
}

impl Nogood {
    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Nogood {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort_unstable();
        literals.dedup();
        Nogood { literals }
    }

    /// The nogood over everything currently assigned: excludes all
    /// extensions of the trail.
    pub fn from_trail(trail: &Trail) -> Nogood {
        Nogood::new(trail.literals())
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

/// Branching order of the engine. The default is the fixed atom-id order
/// with the positive polarity tried first; the shuffled variant permutes
/// the atom order deterministically from a seed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Branching {
    #[default]
    Fixed,
    Shuffled {
        seed: u64,
    },
}

/// Engine configuration. Identical config and input give an identical
/// enumeration order and summary.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchConfig {
    pub branching: Branching,
    /// Re-check every emitted model against the reference answer-set
    /// definition. `None` means on for signatures up to the oracle limit.
    pub oracle_verify: Option<bool>,
    pub deadline: Option<Instant>,
}

/// Flow control returned by the model hook.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Caller hooks driving enumeration. `on_partial` runs after every
/// propagation fixpoint; returning a nogood prunes the current subtree and
/// keeps the nogood for the rest of the search. `on_model` runs exactly
/// once per answer set.
pub trait SearchHooks {
    fn on_partial(&mut self, _trail: &Trail) -> Option<Nogood> {
        None
    }

    fn on_model(&mut self, _model: &AnswerSet) -> Flow {
        Flow::Continue
    }
}

/// Hook-free enumeration.
pub struct NoHooks;

impl SearchHooks for NoHooks {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Summary {
    pub models: u64,
    pub decisions: u64,
    pub conflicts: u64,
    pub nogoods_added: u64,
    pub stopped: bool,
    pub timed_out: bool,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("search aborted by deadline")]
    Timeout,
    #[error("top-k enumeration requires a window of at least one model")]
    ZeroWindow,
}

#[derive(Debug)]
struct Conflict;

enum SumView {
    True,
    False,
    Open { sat: u128, pot: u128 },
}

fn definitely(relation: Relation, bound: i128, lo: u128, hi: u128) -> bool {
    let lo = lo as i128;
    let hi = hi as i128;
    match relation {
        Relation::Le => hi <= bound,
        Relation::Lt => hi < bound,
        Relation::Ge => lo >= bound,
        Relation::Gt => lo > bound,
        Relation::Eq => lo == bound && hi == bound,
        Relation::Ne => hi < bound || lo > bound,
    }
}

fn negate(relation: Relation) -> Relation {
    match relation {
        Relation::Le => Relation::Gt,
        Relation::Lt => Relation::Ge,
        Relation::Ge => Relation::Lt,
        Relation::Gt => Relation::Le,
        Relation::Eq => Relation::Ne,
        Relation::Ne => Relation::Eq,
    }
}

struct Frame {
    atom: Atom,
    mark: usize,
    flipped: bool,
}

struct Engine<'p> {
    program: &'p Program,
    /// Rule indices by head atom, for support propagation.
    heads: Vec<Vec<usize>>,
    order: Vec<Atom>,
    trail: Trail,
    frames: Vec<Frame>,
    nogoods: Vec<Nogood>,
    nogood_index: BTreeSet<Vec<Literal>>,
    verify: bool,
    /// Scratch buffer for the stability fixpoint.
    closure: Vec<bool>,
}

impl<'p> Engine<'p> {
    fn new(program: &'p Program, config: &SearchConfig) -> Engine<'p> {
        let n = program.atom_count();
        let mut heads = vec![Vec::new(); n];
        for (i, rule) in program.rules.iter().enumerate() {
            if let Some(h) = rule.head {
                heads[h.index()].push(i);
            }
        }
        let mut order: Vec<Atom> = (0..n as u32).map(Atom).collect();
        if let Branching::Shuffled { seed } = config.branching {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
        }
        let verify = config.oracle_verify.unwrap_or(n <= oracle_limit());
        Engine {
            program,
            heads,
            order,
            trail: Trail::new(n),
            frames: Vec::new(),
            nogoods: Vec::new(),
            nogood_index: BTreeSet::new(),
            verify,
            closure: vec![false; n],
        }
    }

    fn level(&self) -> u32 {
        self.frames.len() as u32
    }

    fn sum_view(&self, sum: &SumCondition) -> SumView {
        let mut sat: u128 = 0;
        let mut pot: u128 = 0;
        for &(w, lit) in &sum.terms {
            match self.trail.value(lit.atom) {
                Some(v) if v == lit.positive => sat += w as u128,
                None => pot += w as u128,
                _ => {}
            }
        }
        if definitely(sum.relation, sum.bound, sat, sat + pot) {
            SumView::True
        } else if definitely(negate(sum.relation), sum.bound, sat, sat + pot) {
            SumView::False
        } else {
            SumView::Open { sat, pot }
        }
    }

    fn body_falsified(&self, rule: &Rule) -> bool {
        if rule.pos_body.iter().any(|&a| self.trail.value(a) == Some(false)) {
            return true;
        }
        if rule.neg_body.iter().any(|&a| self.trail.value(a) == Some(true)) {
            return true;
        }
        match &rule.sum_body {
            Some(sum) => matches!(self.sum_view(sum), SumView::False),
            None => false,
        }
    }

    fn assign(&mut self, lit: Literal) -> Result<bool, Conflict> {
        self.trail.assign(lit, self.level(), Reason::Propagated)
    }

    /// One pass over all rules; returns whether anything was assigned.
    fn scan_rules(&mut self) -> Result<bool, Conflict> {
        let mut progress = false;
        for idx in 0..self.program.rules.len() {
            let rule = &self.program.rules[idx];
            let mut falsified = false;
            let mut unassigned = 0usize;
            let mut pending: Option<Literal> = None;
            for &a in &rule.pos_body {
                match self.trail.value(a) {
                    Some(false) => {
                        falsified = true;
                        break;
                    }
                    None => {
                        unassigned += 1;
                        pending = Some(Literal::pos(a));
                    }
                    _ => {}
                }
            }
            if !falsified {
                for &a in &rule.neg_body {
                    match self.trail.value(a) {
                        Some(true) => {
                            falsified = true;
                            break;
                        }
                        None => {
                            unassigned += 1;
                            pending = Some(Literal::neg(a));
                        }
                        _ => {}
                    }
                }
            }
            if falsified {
                continue;
            }
            let sum_view = match &rule.sum_body {
                Some(sum) => self.sum_view(sum),
                None => SumView::True,
            };
            if matches!(sum_view, SumView::False) {
                continue;
            }
            let sum_settled = matches!(sum_view, SumView::True);
            match rule.head {
                Some(head) => {
                    if unassigned == 0 && sum_settled {
                        // body satisfied: the head must hold
                        progress |= self.assign(Literal::pos(head))?;
                    } else if self.trail.value(head) == Some(false)
                        && unassigned == 1
                        && sum_settled
                    {
                        // blocked head: the last open body element must fail
                        progress |= self.assign(pending.unwrap().complement())?;
                    }
                }
                None => {
                    if unassigned == 0 && sum_settled {
                        return Err(Conflict);
                    } else if unassigned == 1 && sum_settled {
                        progress |= self.assign(pending.unwrap().complement())?;
                    } else if unassigned == 0 {
                        if let (SumView::Open { sat, pot }, Some(sum)) = (sum_view, &rule.sum_body)
                        {
                            progress |= self.propagate_sum(sum, sat, pot)?;
                        }
                    }
                }
            }
        }
        Ok(progress)
    }

    /// Bound propagation inside a constraint's sum condition once the rest
    /// of the body holds: any unassigned literal whose fixing would make
    /// the condition definitive forces the opposite fixing.
    fn propagate_sum(&mut self, sum: &SumCondition, sat: u128, pot: u128) -> Result<bool, Conflict> {
        let mut progress = false;
        let mut forced: Vec<Literal> = Vec::new();
        for &(w, lit) in &sum.terms {
            if self.trail.value(lit.atom).is_some() {
                continue;
            }
            let w = w as u128;
            let fires_if_true = definitely(sum.relation, sum.bound, sat + w, sat + pot);
            let fires_if_false = definitely(sum.relation, sum.bound, sat, sat + pot - w);
            match (fires_if_true, fires_if_false) {
                (true, true) => return Err(Conflict),
                (true, false) => forced.push(lit.complement()),
                (false, true) => forced.push(lit),
                (false, false) => {}
            }
        }
        for lit in forced {
            progress |= self.assign(lit)?;
        }
        Ok(progress)
    }

    /// Support propagation: an atom with every defining rule falsified
    /// cannot be in any answer set extending the trail.
    fn scan_support(&mut self) -> Result<bool, Conflict> {
        let mut progress = false;
        for i in 0..self.heads.len() {
            let atom = Atom(i as u32);
            if self.trail.value(atom) == Some(false) {
                continue;
            }
            let supported = self.heads[i]
                .iter()
                .any(|&ri| !self.body_falsified(&self.program.rules[ri]));
            if !supported {
                progress |= self.assign(Literal::neg(atom))?;
            }
        }
        Ok(progress)
    }

    fn scan_nogoods(&mut self) -> Result<bool, Conflict> {
        let mut progress = false;
        for idx in 0..self.nogoods.len() {
            let mut unassigned = 0usize;
            let mut pending: Option<Literal> = None;
            let mut dead = false;
            for &lit in self.nogoods[idx].literals() {
                match self.trail.value(lit.atom) {
                    Some(v) if v == lit.positive => {}
                    Some(_) => {
                        dead = true;
                        break;
                    }
                    None => {
                        unassigned += 1;
                        pending = Some(lit);
                    }
                }
            }
            if dead {
                continue;
            }
            match unassigned {
                0 => return Err(Conflict),
                1 => progress |= self.assign(pending.unwrap().complement())?,
                _ => {}
            }
        }
        Ok(progress)
    }

    /// Runs all propagators to fixpoint. Returns whether the trail grew.
    fn propagate(&mut self) -> Result<bool, Conflict> {
        let mut progressed = false;
        loop {
            let mut round = false;
            round |= self.scan_rules()?;
            round |= self.scan_support()?;
            round |= self.scan_nogoods()?;
            if !round {
                return Ok(progressed);
            }
            progressed = true;
        }
    }

    fn all_assigned(&self) -> bool {
        self.trail.len() == self.trail.atom_count()
    }

    fn decide(&mut self) {
        let atom = self
            .order
            .iter()
            .copied()
            .find(|&a| self.trail.value(a).is_none())
            .expect("decide called with a total assignment");
        self.frames.push(Frame { atom, mark: self.trail.len(), flipped: false });
        let level = self.level();
        self.trail
            .assign(Literal::pos(atom), level, Reason::Decision)
            .expect("decision atom was unassigned");
    }

    /// Chronological backtracking: undo to the deepest unflipped decision
    /// and try its other polarity. False once the tree is exhausted.
    fn backtrack(&mut self) -> bool {
        while let Some(mut frame) = self.frames.pop() {
            self.trail.pop_to(frame.mark);
            if !frame.flipped {
                frame.flipped = true;
                let atom = frame.atom;
                self.frames.push(frame);
                let level = self.level();
                self.trail
                    .assign(Literal::neg(atom), level, Reason::Decision)
                    .expect("flipped atom was unassigned");
                return true;
            }
        }
        false
    }

    fn add_nogood(&mut self, nogood: Nogood) -> bool {
        if self.nogood_index.contains(nogood.literals()) {
            return false;
        }
        self.nogood_index.insert(nogood.literals().to_vec());
        self.nogoods.push(nogood);
        true
    }

    /// Stability check on a conflict-free total assignment: the positive
    /// part must equal the least model of its reduct. Constraints were
    /// already enforced by propagation.
    fn stable_model(&mut self) -> Option<AnswerSet> {
        debug_assert!(self.all_assigned());
        let model_true: Vec<bool> = (0..self.trail.atom_count())
            .map(|i| self.trail.value(Atom(i as u32)) == Some(true))
            .collect();
        self.closure.iter_mut().for_each(|v| *v = false);
        loop {
            let mut changed = false;
            for rule in &self.program.rules {
                let Some(head) = rule.head else { continue };
                if self.closure[head.index()] {
                    continue;
                }
                if rule.neg_body.iter().any(|&a| model_true[a.index()]) {
                    continue;
                }
                if let Some(sum) = &rule.sum_body {
                    let total: u128 = sum
                        .terms
                        .iter()
                        .filter(|&&(_, lit)| model_true[lit.atom.index()] == lit.positive)
                        .map(|&(w, _)| w as u128)
                        .sum();
                    if !sum.relation.holds(total, sum.bound) {
                        continue;
                    }
                }
                if rule.pos_body.iter().all(|&a| self.closure[a.index()]) {
                    self.closure[head.index()] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let stable = self.closure.iter().zip(&model_true).all(|(c, m)| c == m);
        let model: AnswerSet = model_true
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| Atom(i as u32))
            .collect();
        if self.verify {
            assert_eq!(
                stable,
                is_answer_set(self.program, &model),
                "engine stability check disagrees with the reference definition"
            );
        }
        stable.then_some(model)
    }
}

/// Enumerates every answer set of the program, invoking the hooks as
/// described on [`SearchHooks`]. Inconsistent programs yield zero model
/// calls. Under a fixed config the emission order is deterministic.
pub fn enumerate<H: SearchHooks>(program: &Program, config: &SearchConfig, hooks: &mut H) -> Summary {
    let mut engine = Engine::new(program, config);
    let mut summary = Summary::default();
    let mut hook_pending = true;
    loop {
        if let Some(deadline) = config.deadline {
            if Instant::now() >= deadline {
                summary.timed_out = true;
                break;
            }
        }
        match engine.propagate() {
            Err(Conflict) => {
                summary.conflicts += 1;
                if !engine.backtrack() {
                    break;
                }
                hook_pending = true;
            }
            Ok(progressed) => {
                if progressed {
                    hook_pending = true;
                }
                if hook_pending {
                    hook_pending = false;
                    if let Some(nogood) = hooks.on_partial(&engine.trail) {
                        if engine.add_nogood(nogood) {
                            summary.nogoods_added += 1;
                            continue;
                        }
                    }
                }
                if engine.all_assigned() {
                    if let Some(model) = engine.stable_model() {
                        summary.models += 1;
                        if hooks.on_model(&model) == Flow::Stop {
                            summary.stopped = true;
                            break;
                        }
                    }
                    if !engine.backtrack() {
                        break;
                    }
                    hook_pending = true;
                } else {
                    engine.decide();
                    summary.decisions += 1;
                    hook_pending = true;
                }
            }
        }
    }
    summary
}

struct FirstModel {
    found: Option<AnswerSet>,
}

impl SearchHooks for FirstModel {
    fn on_model(&mut self, model: &AnswerSet) -> Flow {
        self.found = Some(model.clone());
        Flow::Stop
    }
}

/// The first answer set in enumeration order, if any.
pub fn solve_one(program: &Program, config: &SearchConfig) -> (Option<AnswerSet>, Summary) {
    let mut hooks = FirstModel { found: None };
    let summary = enumerate(program, config, &mut hooks);
    (hooks.found, summary)
}

fn fix_value(objective: &ObjectiveFunction, value: u64) -> Rule {
    Rule::constraint(
        Vec::new(),
        Vec::new(),
        Some(SumCondition::from_weights(objective.terms.clone(), Relation::Ne, value as i128)),
    )
}

fn strictly_below(objective: &ObjectiveFunction, value: u64) -> Rule {
    Rule::constraint(
        Vec::new(),
        Vec::new(),
        Some(SumCondition::from_weights(objective.terms.clone(), Relation::Ge, value as i128)),
    )
}

/// Like [`optimize`], additionally returning the solver totals accumulated
/// across all probes.
pub fn optimize_with_stats(
    program: &Program,
    config: &SearchConfig,
) -> Result<(Option<(AnswerSet, CostVector)>, Summary), SolveError> {
    let mut totals = Summary::default();
    let accumulate = |totals: &mut Summary, s: Summary| {
        totals.decisions += s.decisions;
        totals.conflicts += s.conflicts;
    };
    let (first, summary) = solve_one(program, config);
    accumulate(&mut totals, summary);
    if summary.timed_out {
        return Err(SolveError::Timeout);
    }
    let Some(mut best) = first else {
        return Ok((None, totals));
    };
    let mut fixed: Vec<u64> = Vec::with_capacity(program.levels());
    for objective in &program.objectives {
        let mut value = eval_objective(objective, &best).map_err(SolveError::Cost)?;
        while value > 0 {
            let mut extra: Vec<Rule> = program
                .objectives
                .iter()
                .zip(&fixed)
                .map(|(prev, &v)| fix_value(prev, v))
                .collect();
            extra.push(strictly_below(objective, value));
            let probe = program.with_rules(extra);
            let (better, summary) = solve_one(&probe, config);
            accumulate(&mut totals, summary);
            if summary.timed_out {
                return Err(SolveError::Timeout);
            }
            match better {
                Some(model) => {
                    value = eval_objective(objective, &model).map_err(SolveError::Cost)?;
                    best = model;
                }
                None => break,
            }
        }
        fixed.push(value);
    }
    totals.models = 1;
    Ok((Some((best, CostVector::new(fixed))), totals))
}

/// A lexicographically optimal answer set, or `None` for an inconsistent
/// program. Works level by level: repeatedly demand a strict decrease at
/// the current level (holding earlier levels fixed by equality) until the
/// demand is unsatisfiable, then fix the level and move on.
pub fn optimize(
    program: &Program,
    config: &SearchConfig,
) -> Result<Option<(AnswerSet, CostVector)>, SolveError> {
    optimize_with_stats(program, config).map(|(best, _)| best)
}
