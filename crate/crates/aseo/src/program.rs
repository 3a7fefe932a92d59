//! Ground normal programs with prioritized pseudo-Boolean objectives.
//!
//! This module is the reference layer everything else is checked against:
//! the data model, the reduct / least-model / answer-set definitions, cost
//! evaluation with lexicographic comparison, objective normalization, and a
//! brute-force oracle that ranks every answer set of a small program.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Dense atom handle. Ids are contiguous from 0 within one [`Program`];
/// the name ↔ id mapping lives in [`Signature`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(pub u32);

impl Atom {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An atom or its negation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal { atom, positive: false }
    }

    pub fn complement(self) -> Literal {
        Literal { atom: self.atom, positive: !self.positive }
    }

    /// Standard satisfaction: a positive literal holds iff its atom is in
    /// the model, a negative literal iff it is not.
    pub fn satisfied_by(self, model: &AnswerSet) -> bool {
        model.contains(self.atom) == self.positive
    }
}

/// Interned atom names. Ids are handed out in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    names: Vec<String>,
    index: HashMap<String, Atom>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn intern(&mut self, name: &str) -> Atom {
        if let Some(&atom) = self.index.get(name) {
            return atom;
        }
        let atom = Atom(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), atom);
        atom
    }

    pub fn lookup(&self, name: &str) -> Option<Atom> {
        self.index.get(name).copied()
    }

    pub fn name(&self, atom: Atom) -> &str {
        &self.names[atom.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        (0..self.names.len() as u32).map(Atom)
    }
}

/// Comparison relation of a sum condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl Relation {
    pub fn holds(self, sum: u128, bound: i128) -> bool {
        let sum = sum as i128;
        match self {
            Relation::Le => sum <= bound,
            Relation::Lt => sum < bound,
            Relation::Ge => sum >= bound,
            Relation::Gt => sum > bound,
            Relation::Eq => sum == bound,
            Relation::Ne => sum != bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Ge => ">=",
            Relation::Gt => ">",
            Relation::Eq => "=",
            Relation::Ne => "!=",
        }
    }
}

/// A weighted sum over literals compared against a bound, e.g.
/// `#sum{5:l1; 1:l2} <= 4`. Weights are non-negative; negative input
/// weights are folded away by complementing their literal and shifting
/// the bound.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumCondition {
    pub terms: Vec<(u64, Literal)>,
    pub relation: Relation,
    pub bound: i128,
}

impl SumCondition {
    /// Builds a condition from possibly-negative weights. A term `(w, l)`
    /// with `w < 0` contributes `w` exactly when `l` holds, which equals
    /// `w` minus `-w` when the complement holds; so it is replaced by
    /// `(-w, not l)` and the bound is lowered by `w`.
    pub fn new(terms: Vec<(i64, Literal)>, relation: Relation, bound: i128) -> SumCondition {
        let mut bound = bound;
        let mut normalized = Vec::with_capacity(terms.len());
        for (w, lit) in terms {
            if w < 0 {
                bound -= w as i128;
                normalized.push((w.unsigned_abs(), lit.complement()));
            } else {
                normalized.push((w as u64, lit));
            }
        }
        SumCondition { terms: normalized, relation, bound }
    }

    pub fn from_weights(terms: Vec<(u64, Literal)>, relation: Relation, bound: i128) -> SumCondition {
        SumCondition { terms, relation, bound }
    }

    /// Evaluates the condition under a total assignment given as a model.
    pub fn eval(&self, model: &AnswerSet) -> bool {
        let sum: u128 = self
            .terms
            .iter()
            .filter(|(_, lit)| lit.satisfied_by(model))
            .map(|(w, _)| *w as u128)
            .sum();
        self.relation.holds(sum, self.bound)
    }
}

/// One ground rule `head :- pos_body, not neg_body, sum_body.`
/// A missing head makes it a constraint. The positive and negative body
/// may share atoms; such rules simply never fire under a consistent total
/// assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub head: Option<Atom>,
    pub pos_body: Vec<Atom>,
    pub neg_body: Vec<Atom>,
    pub sum_body: Option<SumCondition>,
}

impl Rule {
    pub fn new(
        head: Option<Atom>,
        mut pos_body: Vec<Atom>,
        mut neg_body: Vec<Atom>,
        sum_body: Option<SumCondition>,
    ) -> Rule {
        pos_body.sort_unstable();
        pos_body.dedup();
        neg_body.sort_unstable();
        neg_body.dedup();
        Rule { head, pos_body, neg_body, sum_body }
    }

    pub fn fact(head: Atom) -> Rule {
        Rule::new(Some(head), Vec::new(), Vec::new(), None)
    }

    pub fn constraint(pos_body: Vec<Atom>, neg_body: Vec<Atom>, sum_body: Option<SumCondition>) -> Rule {
        Rule::new(None, pos_body, neg_body, sum_body)
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    /// Whether the whole body holds under a total assignment.
    pub fn body_satisfied(&self, model: &AnswerSet) -> bool {
        self.pos_body.iter().all(|&a| model.contains(a))
            && self.neg_body.iter().all(|&a| !model.contains(a))
            && self.sum_body.as_ref().is_none_or(|s| s.eval(model))
    }
}

/// One minimization objective at a priority level (level 1 is the most
/// significant). Weights are non-negative after normalization; `offset`
/// records what normalization folded away and is reported, not optimized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectiveFunction {
    pub level: u32,
    pub terms: Vec<(u64, Literal)>,
    pub offset: i64,
}

impl ObjectiveFunction {
    pub fn new(level: u32, terms: Vec<(u64, Literal)>) -> ObjectiveFunction {
        ObjectiveFunction { level, terms, offset: 0 }
    }

    /// Normalizes raw objective terms to the non-negative minimization
    /// form. A maximize objective is negated first; every negative term
    /// `(w, l)` then becomes `(-w, not l)` with the offset adjusted by `w`,
    /// which preserves the ordering of answer sets by objective value.
    pub fn normalized(level: u32, maximize: bool, raw: &[(i64, Literal)]) -> Result<ObjectiveFunction, ProgramError> {
        let mut terms = Vec::with_capacity(raw.len());
        let mut offset: i64 = 0;
        for &(w, lit) in raw {
            let w = if maximize {
                w.checked_neg().ok_or(ProgramError::WeightOverflow { level })?
            } else {
                w
            };
            if w < 0 {
                offset = offset.checked_add(w).ok_or(ProgramError::WeightOverflow { level })?;
                terms.push((w.unsigned_abs(), lit.complement()));
            } else {
                terms.push((w as u64, lit));
            }
        }
        Ok(ObjectiveFunction { level, terms, offset })
    }

    /// The maximum value this objective can reach, used to reject programs
    /// whose costs could not be evaluated in 64 bits.
    fn total_weight(&self) -> u128 {
        self.terms.iter().map(|(w, _)| *w as u128).sum()
    }
}

/// A ground normal program: an interned signature, rules (including
/// constraints), and objectives sorted by level with levels contiguous
/// from 1.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub signature: Signature,
    pub rules: Vec<Rule>,
    pub objectives: Vec<ObjectiveFunction>,
}

impl Program {
    pub fn atom_count(&self) -> usize {
        self.signature.len()
    }

    /// Number of priority levels `p`; zero is legal and makes every
    /// answer set optimal.
    pub fn levels(&self) -> usize {
        self.objectives.len()
    }

    /// A copy of this program with extra rules appended; the signature and
    /// objectives are shared unchanged. This is how the enumeration
    /// strategies layer constraints over a pristine input.
    pub fn with_rules(&self, extra: impl IntoIterator<Item = Rule>) -> Program {
        let mut out = self.clone();
        out.rules.extend(extra);
        out
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let n = self.signature.len() as u32;
        let check_atom = |a: Atom| -> Result<(), ProgramError> {
            if a.0 < n {
                Ok(())
            } else {
                Err(ProgramError::UnknownAtom { id: a.0 })
            }
        };
        for rule in &self.rules {
            if let Some(h) = rule.head {
                check_atom(h)?;
            }
            for &a in rule.pos_body.iter().chain(rule.neg_body.iter()) {
                check_atom(a)?;
            }
            if let Some(sum) = &rule.sum_body {
                for &(_, lit) in &sum.terms {
                    check_atom(lit.atom)?;
                }
            }
        }
        for (i, obj) in self.objectives.iter().enumerate() {
            if obj.level as usize != i + 1 {
                return Err(ProgramError::BadLevels);
            }
            for &(_, lit) in &obj.terms {
                check_atom(lit.atom)?;
            }
            if obj.total_weight() > u64::MAX as u128 {
                return Err(ProgramError::WeightOverflow { level: obj.level });
            }
        }
        Ok(())
    }
}

/// One objective as collected before normalization: level, maximize
/// flag, and signed weighted literals.
type RawObjective = (u32, bool, Vec<(i64, Literal)>);

/// Incremental construction of a [`Program`] with automatic interning.
/// Objectives may be supplied with signed weights and a maximize flag;
/// `finish` normalizes them and checks the level structure.
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    signature: Signature,
    rules: Vec<Rule>,
    objectives: Vec<RawObjective>,
}

impl ProgramBuilder {
    pub fn new() -> ProgramBuilder {
        ProgramBuilder::default()
    }

    pub fn atom(&mut self, name: &str) -> Atom {
        self.signature.intern(name)
    }

    pub fn rule(&mut self, rule: Rule) -> &mut Self {
        self.rules.push(rule);
        self
    }

    /// Starts (or extends) the objective at `level`. The maximize flag must
    /// be consistent across all terms of one level.
    pub fn objective(&mut self, level: u32, maximize: bool) -> Result<&mut Vec<(i64, Literal)>, ProgramError> {
        if level == 0 {
            return Err(ProgramError::BadLevels);
        }
        if let Some(pos) = self.objectives.iter().position(|(l, _, _)| *l == level) {
            if self.objectives[pos].1 != maximize {
                return Err(ProgramError::DuplicateLevel { level });
            }
            return Ok(&mut self.objectives[pos].2);
        }
        self.objectives.push((level, maximize, Vec::new()));
        Ok(&mut self.objectives.last_mut().unwrap().2)
    }

    pub fn finish(self) -> Result<Program, ProgramError> {
        let mut raw = self.objectives;
        raw.sort_by_key(|(level, _, _)| *level);
        for (i, (level, _, _)) in raw.iter().enumerate() {
            if *level as usize != i + 1 {
                return Err(ProgramError::BadLevels);
            }
        }
        let mut objectives = Vec::with_capacity(raw.len());
        for (level, maximize, terms) in raw {
            objectives.push(ObjectiveFunction::normalized(level, maximize, &terms)?);
        }
        let program = Program { signature: self.signature, rules: self.rules, objectives };
        program.validate()?;
        Ok(program)
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProgramError {
    #[error("atom id {id} is not in the signature")]
    UnknownAtom { id: u32 },
    #[error("objective levels must be distinct and contiguous from 1")]
    BadLevels,
    #[error("conflicting objective statements at level {level}")]
    DuplicateLevel { level: u32 },
    #[error("objective weights at level {level} overflow 64-bit cost arithmetic")]
    WeightOverflow { level: u32 },
}

/// A set of atoms, kept sorted and deduplicated. The derived ordering is
/// the canonical one used to break cost ties deterministically: sorted id
/// sequences compared lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AnswerSet(Vec<Atom>);

impl AnswerSet {
    pub fn empty() -> AnswerSet {
        AnswerSet(Vec::new())
    }

    pub fn contains(&self, atom: Atom) -> bool {
        self.0.binary_search(&atom).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Atom> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Atom] {
        &self.0
    }

    /// Atom names in sorted name order, for display and reports.
    pub fn names<'p>(&self, program: &'p Program) -> Vec<&'p str> {
        let mut names: Vec<&str> = self.iter().map(|a| program.signature.name(a)).collect();
        names.sort_unstable();
        names
    }
}

impl FromIterator<Atom> for AnswerSet {
    fn from_iter<T: IntoIterator<Item = Atom>>(iter: T) -> AnswerSet {
        let mut atoms: Vec<Atom> = iter.into_iter().collect();
        atoms.sort_unstable();
        atoms.dedup();
        AnswerSet(atoms)
    }
}

/// Per-level objective values, level 1 first. The derived ordering is
/// lexicographic; [`compare_lex`] additionally rejects length mismatches.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CostVector(Vec<u64>);

impl CostVector {
    pub fn new(values: Vec<u64>) -> CostVector {
        CostVector(values)
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for CostVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ">")
    }
}

/// An answer set paired with its cost and its 0-based position in the
/// emission order of whichever strategy produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedModel {
    pub model: AnswerSet,
    pub cost: CostVector,
    pub index: usize,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("objective sum overflows 64-bit cost arithmetic")]
    Overflow,
    #[error("cost vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
}

/// Lexicographic comparison with level 1 most significant. Fails on
/// vectors of different lengths, which can only pair costs from
/// different programs.
pub fn compare_lex(a: &CostVector, b: &CostVector) -> Result<Ordering, CostError> {
    if a.len() != b.len() {
        return Err(CostError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(a.cmp(b))
}

/// The value of one objective at a model: the sum of weights of satisfied
/// literals.
pub fn eval_objective(objective: &ObjectiveFunction, model: &AnswerSet) -> Result<u64, CostError> {
    let mut sum: u64 = 0;
    for &(w, lit) in &objective.terms {
        if lit.satisfied_by(model) {
            sum = sum.checked_add(w).ok_or(CostError::Overflow)?;
        }
    }
    Ok(sum)
}

/// All objective values at a model, level 1 first.
pub fn eval_cost(program: &Program, model: &AnswerSet) -> Result<CostVector, CostError> {
    let mut values = Vec::with_capacity(program.objectives.len());
    for obj in &program.objectives {
        values.push(eval_objective(obj, model)?);
    }
    Ok(CostVector(values))
}

/// The reduct of `program` with respect to `candidate`: constraints are
/// dropped, rules whose negative body meets the candidate are dropped,
/// rules with a sum condition are kept exactly when the condition holds
/// under the candidate, and surviving rules lose their negative body.
pub fn reduct(program: &Program, candidate: &AnswerSet) -> Program {
    let mut rules = Vec::new();
    for rule in &program.rules {
        let Some(head) = rule.head else { continue };
        if rule.neg_body.iter().any(|&a| candidate.contains(a)) {
            continue;
        }
        if let Some(sum) = &rule.sum_body {
            if !sum.eval(candidate) {
                continue;
            }
        }
        rules.push(Rule {
            head: Some(head),
            pos_body: rule.pos_body.clone(),
            neg_body: Vec::new(),
            sum_body: None,
        });
    }
    Program { signature: program.signature.clone(), rules, objectives: Vec::new() }
}

/// The unique subset-minimal set closed under a positive program, by
/// fixpoint iteration from the empty set. The input must have no
/// constraints, negative bodies, or sum conditions.
pub fn least_model(positive: &Program) -> AnswerSet {
    debug_assert!(positive
        .rules
        .iter()
        .all(|r| r.head.is_some() && r.neg_body.is_empty() && r.sum_body.is_none()));
    let mut truth = vec![false; positive.atom_count()];
    loop {
        let mut changed = false;
        for rule in &positive.rules {
            let head = rule.head.expect("positive program");
            if !truth[head.index()] && rule.pos_body.iter().all(|a| truth[a.index()]) {
                truth[head.index()] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    truth
        .iter()
        .enumerate()
        .filter(|(_, &t)| t)
        .map(|(i, _)| Atom(i as u32))
        .collect()
}

/// The stable-model check: no constraint fires under the candidate and the
/// candidate equals the least model of its own reduct.
pub fn is_answer_set(program: &Program, candidate: &AnswerSet) -> bool {
    for rule in &program.rules {
        if rule.is_constraint() && rule.body_satisfied(candidate) {
            return false;
        }
    }
    least_model(&reduct(program, candidate)) == *candidate
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("signature has {atoms} atoms, above the brute-force limit of {limit}")]
    TooLarge { atoms: usize, limit: usize },
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// The brute-force cap on signature size, overridable through the
/// `ASEO_ORACLE_LIMIT` environment variable (hard ceiling 32).
pub fn oracle_limit() -> usize {
    let configured = std::env::var("ASEO_ORACLE_LIMIT")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(22);
    configured.min(32)
}

struct MaskRule {
    head: Option<u32>,
    pos: u64,
    neg: u64,
    sum: Option<MaskSum>,
}

struct MaskSum {
    terms: Vec<(u64, u32, bool)>,
    relation: Relation,
    bound: i128,
}

impl MaskSum {
    fn holds(&self, mask: u64) -> bool {
        let sum: u128 = self
            .terms
            .iter()
            .filter(|&&(_, idx, positive)| (mask >> idx) & 1 == positive as u64)
            .map(|&(w, _, _)| w as u128)
            .sum();
        self.relation.holds(sum, self.bound)
    }
}

fn mask_rules(program: &Program) -> Vec<MaskRule> {
    program
        .rules
        .iter()
        .map(|rule| MaskRule {
            head: rule.head.map(|a| a.0),
            pos: rule.pos_body.iter().fold(0u64, |m, a| m | (1 << a.0)),
            neg: rule.neg_body.iter().fold(0u64, |m, a| m | (1 << a.0)),
            sum: rule.sum_body.as_ref().map(|s| MaskSum {
                terms: s.terms.iter().map(|&(w, l)| (w, l.atom.0, l.positive)).collect(),
                relation: s.relation,
                bound: s.bound,
            }),
        })
        .collect()
}

/// Enumerates every subset of the signature, keeps the stable models, and
/// returns them ranked by cost with ties broken by the canonical atom-set
/// order. Ground truth for everything else in the crate; subsets are
/// evaluated bit-parallel so that 20-atom programs stay affordable.
pub fn brute_force_aseo(program: &Program) -> Result<Vec<RankedModel>, OracleError> {
    let n = program.atom_count();
    let limit = oracle_limit();
    if n > limit {
        return Err(OracleError::TooLarge { atoms: n, limit });
    }
    let rules = mask_rules(program);
    let mut found: Vec<(CostVector, AnswerSet)> = Vec::new();
    for mask in 0u64..(1u64 << n) {
        if !stable_mask(&rules, mask) {
            continue;
        }
        let model: AnswerSet = (0..n as u32).filter(|i| (mask >> i) & 1 == 1).map(Atom).collect();
        let cost = eval_cost(program, &model)?;
        found.push((cost, model));
    }
    found.sort();
    Ok(found
        .into_iter()
        .enumerate()
        .map(|(index, (cost, model))| RankedModel { model, cost, index })
        .collect())
}

fn stable_mask(rules: &[MaskRule], mask: u64) -> bool {
    // Constraint violation.
    for rule in rules {
        if rule.head.is_none()
            && rule.pos & mask == rule.pos
            && rule.neg & mask == 0
            && rule.sum.as_ref().is_none_or(|s| s.holds(mask))
        {
            return false;
        }
    }
    // Least model of the reduct.
    let mut acc: u64 = 0;
    loop {
        let mut next = acc;
        for rule in rules {
            let Some(head) = rule.head else { continue };
            if rule.neg & mask != 0 {
                continue;
            }
            if let Some(sum) = &rule.sum {
                if !sum.holds(mask) {
                    continue;
                }
            }
            if rule.pos & acc == rule.pos {
                next |= 1 << head;
            }
        }
        if next == acc {
            break;
        }
        acc = next;
    }
    acc == mask
}
