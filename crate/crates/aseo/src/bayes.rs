//! Boolean Bayesian networks: loading, relevance pruning, a weighted MAP
//! encoding into a logic program, and approximate query answering from the
//! ranked assignments.
//!
//! A network is compiled so that its answer sets are exactly the
//! evidence-consistent full assignments that avoid zero-probability CPT
//! rows, and the single objective level carries `round(-ln(p) * scale)`
//! per selected row. Lexicographic cost order then equals descending joint
//! probability up to rounding, so ranked enumeration yields the most
//! probable assignments first and a query posterior can be estimated from
//! the top `k` of each branch.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::enumerate::weight_enumerate;
use crate::program::{Atom, Literal, Program, ProgramBuilder, Rule};
use crate::solver::{SearchConfig, SolveError};

const MAX_PARENTS: usize = 16;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid network JSON: {0}")]
    Json(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{var}` lists unknown parent `{parent}`")]
    UnknownParent { var: String, parent: String },
    #[error("variable `{var}` has {got} parents; at most {max} are supported")]
    TooManyParents { var: String, got: usize, max: usize },
    #[error("variable `{var}` has {got} CPT rows, expected {want}")]
    WrongRowCount { var: String, got: usize, want: usize },
    #[error("variable `{var}` CPT row {row} has {got} parent values, expected {want}")]
    WrongRowArity { var: String, row: usize, got: usize, want: usize },
    #[error("variable `{var}` is missing the CPT row for parents {pattern:?}")]
    MissingRow { var: String, pattern: Vec<bool> },
    #[error("variable `{var}` repeats the CPT row for parents {pattern:?}")]
    DuplicateRow { var: String, pattern: Vec<bool> },
    #[error("variable `{var}` has probability {p} outside [0, 1]")]
    BadProbability { var: String, p: f64 },
    #[error("the parent graph has a cycle through `{0}`")]
    Cycle(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("query variable `{0}` also appears in the evidence")]
    QueryInEvidence(String),
    #[error("scale must be positive")]
    BadScale,
    #[error("k must be at least 1")]
    BadK,
    #[error("a CPT weight overflows 64-bit arithmetic at this scale")]
    WeightOverflow,
    #[error("the evidence has probability zero; the posterior is undefined")]
    ZeroProbabilityEvidence,
    #[error(transparent)]
    Build(#[from] crate::program::ProgramError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone)]
struct Variable {
    name: String,
    parents: Vec<usize>,
    /// P(var = true | parents), indexed by the parent combination where
    /// bit j carries the value of `parents[j]`.
    p_true: Vec<f64>,
}

/// A directed acyclic network of Boolean variables with full conditional
/// probability tables.
#[derive(Debug, Clone)]
pub struct BayesNet {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
}

impl BayesNet {
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, var: usize) -> &str {
        &self.variables[var].name
    }

    pub fn parents(&self, var: usize) -> &[usize] {
        &self.variables[var].parents
    }

    pub fn p_true(&self, var: usize, parent_combo: usize) -> f64 {
        self.variables[var].p_true[parent_combo]
    }

    pub fn variable_names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }
}

#[derive(Deserialize)]
struct RawNet {
    variables: Vec<RawVariable>,
}

#[derive(Deserialize)]
struct RawVariable {
    name: String,
    #[serde(default)]
    parents: Vec<String>,
    cpt: Vec<RawRow>,
}

#[derive(Deserialize)]
struct RawRow {
    #[serde(default)]
    given: Vec<bool>,
    p_true: f64,
}

/// Loads and validates a network from its JSON form:
/// `{"variables": [{"name", "parents": [..], "cpt": [{"given": [..], "p_true"}..]}..]}`.
pub fn load_network(source: &str) -> Result<BayesNet, NetError> {
    let raw: RawNet = serde_json::from_str(source).map_err(|e| NetError::Json(e.to_string()))?;
    let mut index: HashMap<String, usize> = HashMap::new();
    for (i, v) in raw.variables.iter().enumerate() {
        if index.insert(v.name.clone(), i).is_some() {
            return Err(NetError::DuplicateVariable(v.name.clone()));
        }
    }
    let mut variables = Vec::with_capacity(raw.variables.len());
    for v in &raw.variables {
        let mut parents = Vec::with_capacity(v.parents.len());
        for p in &v.parents {
            let &pi = index
                .get(p)
                .ok_or_else(|| NetError::UnknownParent { var: v.name.clone(), parent: p.clone() })?;
            parents.push(pi);
        }
        if parents.len() > MAX_PARENTS {
            return Err(NetError::TooManyParents {
                var: v.name.clone(),
                got: parents.len(),
                max: MAX_PARENTS,
            });
        }
        let rows = 1usize << parents.len();
        if v.cpt.len() != rows {
            return Err(NetError::WrongRowCount { var: v.name.clone(), got: v.cpt.len(), want: rows });
        }
        let mut p_true: Vec<Option<f64>> = vec![None; rows];
        for (ri, row) in v.cpt.iter().enumerate() {
            if row.given.len() != parents.len() {
                return Err(NetError::WrongRowArity {
                    var: v.name.clone(),
                    row: ri,
                    got: row.given.len(),
                    want: parents.len(),
                });
            }
            if !(0.0..=1.0).contains(&row.p_true) {
                return Err(NetError::BadProbability { var: v.name.clone(), p: row.p_true });
            }
            let combo = row.given.iter().enumerate().fold(0usize, |acc, (j, &b)| acc | ((b as usize) << j));
            if p_true[combo].replace(row.p_true).is_some() {
                return Err(NetError::DuplicateRow { var: v.name.clone(), pattern: row.given.clone() });
            }
        }
        let p_true: Vec<f64> = p_true
            .into_iter()
            .enumerate()
            .map(|(combo, p)| {
                p.ok_or_else(|| NetError::MissingRow {
                    var: v.name.clone(),
                    pattern: (0..parents.len()).map(|j| (combo >> j) & 1 == 1).collect(),
                })
            })
            .collect::<Result<_, _>>()?;
        variables.push(Variable { name: v.name.clone(), parents, p_true });
    }
    let net = BayesNet { variables, index };
    check_acyclic(&net)?;
    Ok(net)
}

fn check_acyclic(net: &BayesNet) -> Result<(), NetError> {
    // Kahn's algorithm over parent -> child edges.
    let n = net.len();
    let mut indegree: Vec<usize> = (0..n).map(|v| net.parents(v).len()).collect();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        for &p in net.parents(v) {
            children[p].push(v);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0usize;
    while let Some(v) = ready.pop() {
        seen += 1;
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if seen == n {
        Ok(())
    } else {
        let culprit = (0..n).find(|&v| indegree[v] > 0).unwrap();
        Err(NetError::Cycle(net.name(culprit).to_string()))
    }
}

/// A query variable and an evidence assignment over distinct variables.
#[derive(Debug, Clone)]
pub struct QuerySpec {
    pub query: String,
    pub evidence: BTreeMap<String, bool>,
}

impl QuerySpec {
    pub fn new(query: impl Into<String>, evidence: BTreeMap<String, bool>) -> QuerySpec {
        QuerySpec { query: query.into(), evidence }
    }

    pub fn validate(&self, net: &BayesNet) -> Result<(), NetError> {
        if net.index_of(&self.query).is_none() {
            return Err(NetError::UnknownVariable(self.query.clone()));
        }
        for name in self.evidence.keys() {
            if net.index_of(name).is_none() {
                return Err(NetError::UnknownVariable(name.clone()));
            }
            if *name == self.query {
                return Err(NetError::QueryInEvidence(name.clone()));
            }
        }
        Ok(())
    }

    /// This query restricted to variables present in `net`, for use with
    /// a pruned sub-network.
    pub fn restricted_to(&self, net: &BayesNet) -> QuerySpec {
        QuerySpec {
            query: self.query.clone(),
            evidence: self
                .evidence
                .iter()
                .filter(|(name, _)| net.index_of(name).is_some())
                .map(|(name, &b)| (name.clone(), b))
                .collect(),
        }
    }
}

/// Drops every variable that cannot influence the query given the
/// evidence: take the ancestral closure of the query and evidence
/// variables, moralize it, and keep the connected component containing the
/// query. The exact posterior is unchanged on the result.
pub fn relevant_subnetwork(net: &BayesNet, spec: &QuerySpec) -> Result<BayesNet, NetError> {
    spec.validate(net)?;
    let n = net.len();
    let mut in_closure = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    stack.push(net.index_of(&spec.query).unwrap());
    for name in spec.evidence.keys() {
        stack.push(net.index_of(name).unwrap());
    }
    while let Some(v) = stack.pop() {
        if in_closure[v] {
            continue;
        }
        in_closure[v] = true;
        stack.extend(net.parents(v).iter().copied());
    }
    // Moral edges within the closure: parent-child plus co-parents.
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    let connect = |a: usize, b: usize, adjacency: &mut Vec<Vec<usize>>| {
        adjacency[a].push(b);
        adjacency[b].push(a);
    };
    for (v, _) in in_closure.iter().enumerate().filter(|(_, &inside)| inside) {
        let parents = net.parents(v);
        for &p in parents {
            connect(v, p, &mut adjacency);
        }
        for (i, &p1) in parents.iter().enumerate() {
            for &p2 in &parents[i + 1..] {
                connect(p1, p2, &mut adjacency);
            }
        }
    }
    let mut keep = vec![false; n];
    let mut stack = vec![net.index_of(&spec.query).unwrap()];
    while let Some(v) = stack.pop() {
        if keep[v] {
            continue;
        }
        keep[v] = true;
        stack.extend(adjacency[v].iter().copied());
    }
    // Rebuild over the kept variables; parents of kept variables are
    // always kept, so tables carry over unchanged.
    let mut remap = vec![usize::MAX; n];
    let mut variables = Vec::new();
    let mut index = HashMap::new();
    for v in 0..n {
        if !keep[v] {
            continue;
        }
        remap[v] = variables.len();
        index.insert(net.name(v).to_string(), variables.len());
        variables.push(Variable {
            name: net.name(v).to_string(),
            parents: net.parents(v).iter().map(|&p| remap[p]).collect(),
            p_true: net.variables[v].p_true.clone(),
        });
    }
    Ok(BayesNet { variables, index })
}

/// A network compiled to a weighted program. Each variable `v` owns a
/// complementary atom pair `t(v)` / `f(v)`; every answer set picks exactly
/// one of each pair, and its level-1 cost is the sum of the scaled
/// negative-log probabilities of the CPT rows it selects.
#[derive(Debug, Clone)]
pub struct WeightedEncoding {
    pub program: Program,
    pub scale: u64,
    /// Per variable: (name, true-atom, false-atom).
    pub atom_map: Vec<(String, Atom, Atom)>,
    /// Zero-probability rows turned into hard constraints.
    pub forbidden_rows: usize,
}

/// Compiles the network and evidence into a weighted program at the given
/// scale. Rows with probability 0 become hard constraints, rows with
/// probability 1 cost nothing, and each remaining row gets an indicator
/// atom defined by the row's value pattern and weighted
/// `round(-ln(p) * scale)`.
pub fn encode_map(
    net: &BayesNet,
    evidence: &BTreeMap<String, bool>,
    scale: u64,
) -> Result<WeightedEncoding, NetError> {
    if scale == 0 {
        return Err(NetError::BadScale);
    }
    for name in evidence.keys() {
        if net.index_of(name).is_none() {
            return Err(NetError::UnknownVariable(name.clone()));
        }
    }
    let mut builder = ProgramBuilder::new();
    let mut atom_map: Vec<(String, Atom, Atom)> = Vec::with_capacity(net.len());
    for v in 0..net.len() {
        let name = net.name(v);
        let t = builder.atom(&format!("t({name})"));
        let f = builder.atom(&format!("f({name})"));
        builder.rule(Rule::new(Some(t), vec![], vec![f], None));
        builder.rule(Rule::new(Some(f), vec![], vec![t], None));
        atom_map.push((name.to_string(), t, f));
    }
    for (name, &value) in evidence {
        let v = net.index_of(name).unwrap();
        let (_, t, f) = atom_map[v];
        let opposite = if value { f } else { t };
        builder.rule(Rule::constraint(vec![opposite], vec![], None));
    }
    let mut forbidden_rows = 0usize;
    let mut terms: Vec<(i64, Literal)> = Vec::new();
    for v in 0..net.len() {
        let parents: Vec<usize> = net.parents(v).to_vec();
        for combo in 0..(1usize << parents.len()) {
            let pattern: Vec<Atom> = parents
                .iter()
                .enumerate()
                .map(|(j, &p)| {
                    let (_, t, f) = atom_map[p];
                    if (combo >> j) & 1 == 1 {
                        t
                    } else {
                        f
                    }
                })
                .collect();
            let p = net.p_true(v, combo);
            for (value, prob) in [(true, p), (false, 1.0 - p)] {
                let (_, t, f) = atom_map[v];
                let value_atom = if value { t } else { f };
                let mut row_pattern = pattern.clone();
                row_pattern.push(value_atom);
                if prob == 0.0 {
                    builder.rule(Rule::constraint(row_pattern, vec![], None));
                    forbidden_rows += 1;
                } else if prob < 1.0 {
                    let weight = (-prob.ln() * scale as f64).round();
                    if !(0.0..=(i64::MAX as f64)).contains(&weight) {
                        return Err(NetError::WeightOverflow);
                    }
                    let tag = if value { "t" } else { "f" };
                    let indicator = builder.atom(&format!("w({},{combo},{tag})", net.name(v)));
                    builder.rule(Rule::new(Some(indicator), row_pattern, vec![], None));
                    terms.push((weight as i64, Literal::pos(indicator)));
                }
            }
        }
    }
    builder.objective(1, false)?.extend(terms);
    let program = builder.finish()?;
    Ok(WeightedEncoding { program, scale, atom_map, forbidden_rows })
}

/// The approximation record for one query. The two masses are
/// unnormalized joint sums over the ranked assignments of each branch;
/// their shared normalizer cancels in `posterior`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Estimate {
    pub posterior: f64,
    pub k: usize,
    pub scale: u64,
    pub mass_true: f64,
    pub mass_false: f64,
    pub assignments_true: usize,
    pub assignments_false: usize,
}

fn branch_mass(
    net: &BayesNet,
    evidence: &BTreeMap<String, bool>,
    k: usize,
    scale: u64,
) -> Result<(f64, usize), NetError> {
    let encoding = encode_map(net, evidence, scale)?;
    let mut mass = 0.0f64;
    let mut count = 0usize;
    weight_enumerate(&encoding.program, Some(k), &SearchConfig::default(), |ranked| {
        let cost = ranked.cost.values().first().copied().unwrap_or(0);
        mass += (-(cost as f64) / scale as f64).exp();
        count += 1;
    })?;
    Ok((mass, count))
}

/// Estimates `P(query = true | evidence)` from the `k` most probable
/// assignments of each query branch. Masses are unnormalized joints
/// reconstructed as `exp(-cost / scale)`; the shared normalizer cancels in
/// the ratio. With `k` at least the number of evidence-consistent
/// assignments the estimate is exact up to scale rounding. The two
/// branches are enumerated concurrently.
pub fn approximate_query(
    net: &BayesNet,
    spec: &QuerySpec,
    k: usize,
    scale: u64,
) -> Result<Estimate, NetError> {
    if k == 0 {
        return Err(NetError::BadK);
    }
    spec.validate(net)?;
    let mut with_q = spec.evidence.clone();
    with_q.insert(spec.query.clone(), true);
    let mut with_not_q = spec.evidence.clone();
    with_not_q.insert(spec.query.clone(), false);

    let (true_branch, false_branch) = std::thread::scope(|scope| {
        let t = scope.spawn(|| branch_mass(net, &with_q, k, scale));
        let f = scope.spawn(|| branch_mass(net, &with_not_q, k, scale));
        (t.join().expect("branch thread"), f.join().expect("branch thread"))
    });
    let (mass_true, assignments_true) = true_branch?;
    let (mass_false, assignments_false) = false_branch?;
    if assignments_true + assignments_false == 0 {
        return Err(NetError::ZeroProbabilityEvidence);
    }
    Ok(Estimate {
        posterior: mass_true / (mass_true + mass_false),
        k,
        scale,
        mass_true,
        mass_false,
        assignments_true,
        assignments_false,
    })
}
