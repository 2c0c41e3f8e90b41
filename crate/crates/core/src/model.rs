//! Discrete causal graphical models.
//!
//! A [`CausalModel`] is a set of finite-domain variables, a DAG over them and
//! one conditional probability table per variable. The joint distribution is
//! the product of each variable's conditional given its parents, and every
//! query in this crate is answered by exact enumeration of that product.
//!
//! Models are built from the serde-facing [`RawModel`] through
//! [`validate_model`], which rejects cycles, unknown names, and malformed
//! tables. A validated model is immutable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Row-sum tolerance for probability vectors.
pub const PROB_TOLERANCE: f64 = 1e-9;

// ── raw (file) representation ─────────────────────────────────────────

/// Model file contents before validation.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawModel {
    pub variables: Vec<RawVariable>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    pub cpts: Vec<RawCpt>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawVariable {
    pub name: String,
    pub domain: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawCpt {
    pub variable: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub rows: Vec<RawRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRow {
    #[serde(default)]
    pub given: BTreeMap<String, String>,
    pub p: Vec<Probability>,
}

/// A probability as written in a model file.
///
/// Reads either a JSON number or a decimal string; always writes the
/// shortest round-trip decimal string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Probability(pub f64);

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{}", self.0))
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Decimal(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(x) => Ok(Probability(x)),
            Repr::Decimal(s) => s
                .trim()
                .parse::<f64>()
                .map(Probability)
                .map_err(|_| serde::de::Error::custom(format!("invalid probability `{s}`"))),
        }
    }
}

impl RawModel {
    /// Canonical serialization: object keys sorted, probabilities as decimal
    /// strings, compact layout.
    pub fn to_canonical_json(&self) -> String {
        // serde_json::Map is a BTreeMap here, so going through Value sorts keys.
        let value = serde_json::to_value(self).expect("raw model is always serializable");
        serde_json::to_string(&value).expect("json value is always serializable")
    }
}

// ── validated representation ──────────────────────────────────────────

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSpec {
    name: String,
    domain: Vec<String>,
}

impl VariableSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn cardinality(&self) -> usize {
        self.domain.len()
    }

    pub fn value_index(&self, label: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == label)
    }
}

/// Parent sets plus a stored topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    /// Sorted parent indices per node.
    parents: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    fn from_parents(parents: Vec<Vec<usize>>) -> std::result::Result<Self, Vec<usize>> {
        let n = parents.len();
        let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (child, ps) in parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        // Kahn's algorithm, always releasing the lowest declared index first.
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            topo.push(v);
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() == n {
            return Ok(Dag { parents, topo });
        }
        // Every leftover node has a leftover parent; walking parents must revisit.
        let leftover: BTreeSet<usize> = (0..n).filter(|&v| indegree[v] > 0).collect();
        let mut path = Vec::new();
        let mut seen = BTreeMap::new();
        let mut v = *leftover.iter().next().unwrap();
        while !seen.contains_key(&v) {
            seen.insert(v, path.len());
            path.push(v);
            v = *parents[v].iter().find(|p| leftover.contains(p)).unwrap();
        }
        let mut cycle = path.split_off(seen[&v]);
        cycle.reverse();
        Err(cycle)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn is_exogenous(&self, node: usize) -> bool {
        self.parents[node].is_empty()
    }

    /// Edges as `(parent, child)`, ordered by child then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
            .collect()
    }

    /// All ancestors of `nodes`, including the nodes themselves.
    pub fn ancestral_closure(&self, nodes: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut keep = vec![false; self.len()];
        let mut stack: Vec<usize> = nodes.into_iter().collect();
        while let Some(v) = stack.pop() {
            if !keep[v] {
                keep[v] = true;
                stack.extend_from_slice(&self.parents[v]);
            }
        }
        keep
    }
}

/// Conditional probability table. Rows are indexed in mixed radix over the
/// parents in their declared order, first parent most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct Cpt {
    parents: Vec<usize>,
    strides: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

impl Cpt {
    fn new(parents: Vec<usize>, cards: &[usize], rows: Vec<Vec<f64>>) -> Self {
        let mut strides = vec![1; parents.len()];
        for k in (0..parents.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * cards[parents[k + 1]];
        }
        Cpt {
            parents,
            strides,
            rows,
        }
    }

    fn point_mass(card: usize, value: usize) -> Self {
        let mut row = vec![0.0; card];
        row[value] = 1.0;
        Cpt {
            parents: Vec::new(),
            strides: Vec::new(),
            rows: vec![row],
        }
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Row selected by the parent values inside a full index assignment.
    pub fn row_for(&self, values: &[usize]) -> &[f64] {
        let idx: usize = self
            .parents
            .iter()
            .zip(&self.strides)
            .map(|(&p, &s)| values[p] * s)
            .sum();
        &self.rows[idx]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CausalModel {
    variables: Vec<VariableSpec>,
    dag: Dag,
    cpts: Vec<Cpt>,
}

impl CausalModel {
    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpt(&self, var: usize) -> &Cpt {
        &self.cpts[var]
    }

    pub fn variable(&self, name: &str) -> Option<&VariableSpec> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn value_index(&self, var: usize, label: &str) -> Result<usize> {
        let spec = &self.variables[var];
        spec.value_index(label).ok_or_else(|| Error::UnknownValue {
            variable: spec.name.clone(),
            value: label.to_string(),
        })
    }

    /// `(variable index, value index)` for a named pair.
    pub fn resolve(&self, name: &str, label: &str) -> Result<(usize, usize)> {
        let var = self.index_of(name)?;
        Ok((var, self.value_index(var, label)?))
    }

    /// True when both models declare the same variables with the same domains
    /// in the same order.
    pub fn same_signature(&self, other: &CausalModel) -> bool {
        self.variables == other.variables
    }

    pub fn encode_partial(&self, assignment: &Assignment) -> Result<Vec<Option<usize>>> {
        let mut out = vec![None; self.len()];
        for (name, label) in assignment.iter() {
            let (var, val) = self.resolve(name, label)?;
            out[var] = Some(val);
        }
        Ok(out)
    }

    pub fn encode_full(&self, assignment: &Assignment) -> Result<Vec<usize>> {
        let partial = self.encode_partial(assignment)?;
        partial
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| Error::IncompleteAssignment(self.variables[i].name.clone()))
            })
            .collect()
    }

    pub fn decode(&self, values: &[usize]) -> Assignment {
        self.variables
            .iter()
            .zip(values)
            .map(|(spec, &v)| (spec.name.clone(), spec.domain[v].clone()))
            .collect()
    }

    /// Product of conditionals for a full index assignment.
    pub fn joint_probability_of(&self, values: &[usize]) -> f64 {
        self.cpts
            .iter()
            .enumerate()
            .map(|(var, cpt)| cpt.row_for(values)[values[var]])
            .product()
    }

    /// Unnormalized marginal of `target` restricted to the evidence event.
    ///
    /// Entry `k` is `P(target = k, evidence)`, so the sum is `P(evidence)`.
    /// Only the ancestral closure of the target and evidence is enumerated;
    /// every other variable sums out to one.
    pub(crate) fn marginal_with_evidence(
        &self,
        evidence: &[Option<usize>],
        target: usize,
    ) -> Vec<f64> {
        let relevant = self.dag.ancestral_closure(
            std::iter::once(target).chain(
                evidence
                    .iter()
                    .enumerate()
                    .filter_map(|(i, e)| e.map(|_| i)),
            ),
        );
        let order: Vec<usize> = self
            .dag
            .topo
            .iter()
            .copied()
            .filter(|&v| relevant[v])
            .collect();
        let mut acc = vec![0.0; self.variables[target].cardinality()];
        let mut values = vec![0usize; self.len()];
        self.enumerate_from(&order, 0, 1.0, evidence, target, &mut values, &mut acc);
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate_from(
        &self,
        order: &[usize],
        depth: usize,
        weight: f64,
        evidence: &[Option<usize>],
        target: usize,
        values: &mut [usize],
        acc: &mut [f64],
    ) {
        let Some(&var) = order.get(depth) else {
            acc[values[target]] += weight;
            return;
        };
        let row = self.cpts[var].row_for(values);
        let visit = |val: usize, values: &mut [usize], acc: &mut [f64]| {
            let p = row[val];
            if p > 0.0 {
                values[var] = val;
                self.enumerate_from(order, depth + 1, weight * p, evidence, target, values, acc);
            }
        };
        match evidence[var] {
            Some(val) => visit(val, values, acc),
            None => {
                for val in 0..row.len() {
                    visit(val, values, acc);
                }
            }
        }
    }

    /// Ancestral sample drawn from `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut values = vec![0usize; self.len()];
        for &var in &self.dag.topo {
            values[var] = sample_index(self.cpts[var].row_for(&values), rng.gen::<f64>());
        }
        values
    }

    /// Converts back to file form; `validate_model(&m.to_raw())` reproduces `m`.
    pub fn to_raw(&self) -> RawModel {
        let variables = self
            .variables
            .iter()
            .map(|v| RawVariable {
                name: v.name.clone(),
                domain: v.domain.clone(),
            })
            .collect();
        let mut edges = Vec::new();
        let mut cpts = Vec::new();
        for (var, cpt) in self.cpts.iter().enumerate() {
            let name = &self.variables[var].name;
            for &p in &cpt.parents {
                edges.push((self.variables[p].name.clone(), name.clone()));
            }
            let cards: Vec<usize> = cpt
                .parents
                .iter()
                .map(|&p| self.variables[p].cardinality())
                .collect();
            let rows = cpt
                .rows
                .iter()
                .enumerate()
                .map(|(idx, probs)| {
                    let combo = unrank(idx, &cards);
                    let given = cpt
                        .parents
                        .iter()
                        .zip(combo)
                        .map(|(&p, v)| {
                            (
                                self.variables[p].name.clone(),
                                self.variables[p].domain[v].clone(),
                            )
                        })
                        .collect();
                    RawRow {
                        given,
                        p: probs.iter().map(|&x| Probability(x)).collect(),
                    }
                })
                .collect();
            cpts.push(RawCpt {
                variable: name.clone(),
                parents: cpt
                    .parents
                    .iter()
                    .map(|&p| self.variables[p].name.clone())
                    .collect(),
                rows,
            });
        }
        RawModel {
            variables,
            edges,
            cpts,
        }
    }

    /// Copy with the listed variables forced: incoming edges removed and
    /// point-mass tables installed. Other tables and edges are untouched.
    pub(crate) fn with_forced(&self, forced: &[(usize, usize)]) -> CausalModel {
        let mut parents = self.dag.parents.clone();
        let mut cpts = self.cpts.clone();
        for &(var, val) in forced {
            parents[var].clear();
            cpts[var] = Cpt::point_mass(self.variables[var].cardinality(), val);
        }
        let dag = Dag::from_parents(parents).expect("removing edges cannot create a cycle");
        CausalModel {
            variables: self.variables.clone(),
            dag,
            cpts,
        }
    }
}

/// Inverse-CDF draw; falls back to the last positive entry on round-off.
pub(crate) fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Mixed-radix decomposition, first digit most significant.
pub(crate) fn unrank(mut idx: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for k in (0..cards.len()).rev() {
        out[k] = idx % cards[k];
        idx /= cards[k];
    }
    out
}

// ── assignments ───────────────────────────────────────────────────────

/// Variable name to value label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, variable: impl Into<String>, value: impl Into<String>) -> Self {
        self.0.insert(variable.into(), value.into());
        self
    }

    pub fn insert(
        &mut self,
        variable: impl Into<String>,
        value: impl Into<String>,
    ) -> Option<String> {
        self.0.insert(variable.into(), value.into())
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Builds from `(variable, value)` pairs, rejecting repeated variables.
    pub fn from_pairs<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let mut out = Assignment::new();
        for (k, v) in pairs {
            let k = k.into();
            if out.0.contains_key(&k) {
                return Err(Error::DuplicateAssignment(k));
            }
            out.0.insert(k, v.into());
        }
        Ok(out)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Assignment(
            iter.into_iter()
                .map(|(k, v)| (k.into(), v.into()))
                .collect(),
        )
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

// ── operations ────────────────────────────────────────────────────────

/// Every violation found in `raw`. Later stages are skipped when an earlier
/// stage fails (CPTs are not checked against a cyclic graph).
pub fn check_model(raw: &RawModel) -> Vec<Error> {
    match build(raw) {
        Ok(_) => Vec::new(),
        Err(errors) => errors,
    }
}

/// Validates a raw description and returns the model, or the first violation.
pub fn validate_model(raw: &RawModel) -> Result<CausalModel> {
    build(raw).map_err(|mut errors| errors.swap_remove(0))
}

fn build(raw: &RawModel) -> std::result::Result<CausalModel, Vec<Error>> {
    let mut errors = Vec::new();

    if raw.variables.is_empty() {
        return Err(vec![Error::EmptyModel]);
    }
    let mut index = BTreeMap::new();
    for (i, v) in raw.variables.iter().enumerate() {
        if index.insert(v.name.as_str(), i).is_some() {
            errors.push(Error::DuplicateName(v.name.clone()));
        }
        if v.domain.is_empty() {
            errors.push(Error::EmptyDomain(v.name.clone()));
        }
        let mut labels = BTreeSet::new();
        for label in &v.domain {
            if !labels.insert(label) {
                errors.push(Error::DuplicateName(format!("{}={}", v.name, label)));
            }
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let variables: Vec<VariableSpec> = raw
        .variables
        .iter()
        .map(|v| VariableSpec {
            name: v.name.clone(),
            domain: v.domain.clone(),
        })
        .collect();
    let cards: Vec<usize> = variables.iter().map(VariableSpec::cardinality).collect();
    let lookup = |name: &str| index.get(name).copied();

    let mut parents = vec![BTreeSet::new(); variables.len()];
    for (p, c) in &raw.edges {
        let (Some(pi), Some(ci)) = (lookup(p), lookup(c)) else {
            for name in [p, c] {
                if lookup(name).is_none() {
                    errors.push(Error::UnknownVariable(name.clone()));
                }
            }
            continue;
        };
        if pi == ci {
            errors.push(Error::CyclicGraph(vec![p.clone()]));
        } else if !parents[ci].insert(pi) {
            errors.push(Error::DuplicateEdge {
                parent: p.clone(),
                child: c.clone(),
            });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let dag = match Dag::from_parents(
        parents
            .into_iter()
            .map(|s| s.into_iter().collect())
            .collect(),
    ) {
        Ok(dag) => dag,
        Err(cycle) => {
            return Err(vec![Error::CyclicGraph(
                cycle
                    .into_iter()
                    .map(|i| variables[i].name.clone())
                    .collect(),
            )]);
        }
    };

    let mut cpts: Vec<Option<Cpt>> = vec![None; variables.len()];
    for raw_cpt in &raw.cpts {
        let Some(var) = lookup(&raw_cpt.variable) else {
            errors.push(Error::UnknownVariable(raw_cpt.variable.clone()));
            continue;
        };
        if cpts[var].is_some() {
            errors.push(invalid_cpt(&raw_cpt.variable, "more than one table"));
            continue;
        }
        match build_cpt(raw_cpt, var, &variables, &cards, &dag, &lookup) {
            Ok(cpt) => cpts[var] = Some(cpt),
            Err(e) => errors.extend(e),
        }
    }
    for (var, cpt) in cpts.iter().enumerate() {
        if cpt.is_none()
            && !errors
                .iter()
                .any(|e| mentions_cpt_of(e, &variables[var].name))
        {
            errors.push(invalid_cpt(&variables[var].name, "missing table"));
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let cpts = cpts.into_iter().map(Option::unwrap).collect();
    Ok(CausalModel {
        variables,
        dag,
        cpts,
    })
}

fn mentions_cpt_of(e: &Error, name: &str) -> bool {
    matches!(e, Error::InvalidCpt { variable, .. } if variable == name)
}

fn invalid_cpt(variable: &str, reason: impl Into<String>) -> Error {
    Error::InvalidCpt {
        variable: variable.to_string(),
        reason: reason.into(),
    }
}

fn build_cpt(
    raw: &RawCpt,
    var: usize,
    variables: &[VariableSpec],
    cards: &[usize],
    dag: &Dag,
    lookup: &dyn Fn(&str) -> Option<usize>,
) -> std::result::Result<Cpt, Vec<Error>> {
    let name = raw.variable.as_str();
    let mut errors = Vec::new();
    let mut parent_idx = Vec::with_capacity(raw.parents.len());
    for p in &raw.parents {
        match lookup(p) {
            Some(i) if parent_idx.contains(&i) => {
                errors.push(invalid_cpt(name, format!("parent `{p}` listed twice")))
            }
            Some(i) => parent_idx.push(i),
            None => errors.push(Error::UnknownVariable(p.clone())),
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let mut sorted = parent_idx.clone();
    sorted.sort_unstable();
    if sorted != dag.parents(var) {
        let graph: Vec<&str> = dag
            .parents(var)
            .iter()
            .map(|&p| variables[p].name())
            .collect();
        return Err(vec![invalid_cpt(
            name,
            format!(
                "parents {:?} do not match graph parents {:?}",
                raw.parents, graph
            ),
        )]);
    }

    let cpt_cards: Vec<usize> = parent_idx.iter().map(|&p| cards[p]).collect();
    let n_rows: usize = cpt_cards.iter().product();
    let card = cards[var];
    let mut rows: Vec<Option<Vec<f64>>> = vec![None; n_rows];
    for row in &raw.rows {
        let mut idx = 0usize;
        let mut ok = true;
        if row.given.len() != parent_idx.len() || row.given.keys().any(|k| !raw.parents.contains(k))
        {
            errors.push(invalid_cpt(
                name,
                format!("row given {:?} must assign exactly the parents", row.given),
            ));
            continue;
        }
        for (k, &p) in parent_idx.iter().enumerate() {
            let label = &row.given[&raw.parents[k]];
            match variables[p].value_index(label) {
                Some(v) => idx = idx * cpt_cards[k] + v,
                None => {
                    errors.push(Error::UnknownValue {
                        variable: raw.parents[k].clone(),
                        value: label.clone(),
                    });
                    ok = false;
                }
            }
        }
        if !ok {
            continue;
        }
        if row.p.len() != card {
            errors.push(invalid_cpt(
                name,
                format!(
                    "row {:?} has {} entries, domain has {}",
                    row.given,
                    row.p.len(),
                    card
                ),
            ));
            continue;
        }
        let probs: Vec<f64> = row.p.iter().map(|p| p.0).collect();
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            errors.push(invalid_cpt(
                name,
                format!("row {:?} has entries outside [0, 1]", row.given),
            ));
            continue;
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            errors.push(invalid_cpt(
                name,
                format!("row {:?} sums to {sum}", row.given),
            ));
            continue;
        }
        if rows[idx].is_some() {
            errors.push(invalid_cpt(
                name,
                format!("row {:?} given twice", row.given),
            ));
            continue;
        }
        // Rows already at rounding distance from 1 are kept as given, so
        // validating a validated model changes nothing.
        let slack = 4.0 * f64::EPSILON * card as f64;
        rows[idx] = Some(if (sum - 1.0).abs() <= slack {
            probs
        } else {
            probs.iter().map(|p| p / sum).collect()
        });
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    if let Some(missing) = rows.iter().position(Option::is_none) {
        let combo = unrank(missing, &cpt_cards);
        let given: BTreeMap<&str, &str> = parent_idx
            .iter()
            .zip(combo)
            .map(|(&p, v)| (variables[p].name(), variables[p].domain[v].as_str()))
            .collect();
        return Err(vec![invalid_cpt(
            name,
            format!("missing row for {given:?}"),
        )]);
    }
    Ok(Cpt::new(
        parent_idx,
        cards,
        rows.into_iter().map(Option::unwrap).collect(),
    ))
}

/// Product of conditionals at a full assignment.
pub fn joint_probability(model: &CausalModel, full: &Assignment) -> Result<f64> {
    Ok(model.joint_probability_of(&model.encode_full(full)?))
}

/// One ancestral sample from a stream seeded by `seed`.
pub fn sample_assignment(model: &CausalModel, seed: u64) -> Assignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    model.decode(&model.sample_with(&mut rng))
}

/// `n` consecutive ancestral samples from one stream seeded by `seed`.
pub fn sample_assignments(model: &CausalModel, seed: u64, n: usize) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| model.decode(&model.sample_with(&mut rng)))
        .collect()
}
