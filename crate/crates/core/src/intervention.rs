//! The do-operator and exact queries.
//!
//! [`mutilate`] performs graph surgery: each intervened variable loses its
//! incoming edges and gets a point-mass table at the forced value. The
//! post-intervention joint is therefore the truncated product of the
//! remaining conditionals, and [`interventional_distribution`] reads a
//! marginal off it by enumeration. [`observational_distribution`] conditions
//! the untouched joint instead, which is where the two differ whenever a
//! back-door path exists.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Assignment, CausalModel, PROB_TOLERANCE};

/// Hard intervention: variables forced to fixed values.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Intervention(BTreeMap<String, String>);

impl Intervention {
    /// Rejects an empty list and repeated variables.
    pub fn new<I, K, V>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: Into<String>,
        V: Into<String>,
    {
        let assignment = Assignment::from_pairs(pairs)?;
        if assignment.is_empty() {
            return Err(Error::EmptyIntervention);
        }
        Ok(Intervention(
            assignment
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        ))
    }

    pub fn single(variable: impl Into<String>, value: impl Into<String>) -> Self {
        Intervention(BTreeMap::from([(variable.into(), value.into())]))
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

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.0.get(variable).map(String::as_str)
    }

    /// Index pairs against `model`.
    pub fn resolve(&self, model: &CausalModel) -> Result<Vec<(usize, usize)>> {
        self.iter().map(|(k, v)| model.resolve(k, v)).collect()
    }
}

impl fmt::Display for Intervention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("do(")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

/// A probability vector over one variable's domain, in declared order.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    variable: String,
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl Distribution {
    pub(crate) fn new(variable: &str, labels: &[String], probs: Vec<f64>) -> Self {
        debug_assert_eq!(labels.len(), probs.len());
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= PROB_TOLERANCE);
        Distribution {
            variable: variable.to_string(),
            labels: labels.to_vec(),
            probs,
        }
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of `label`, or `None` when it is not in the domain.
    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.probs.iter().copied())
    }
}

/// Graph surgery for `do(iv)`.
pub fn mutilate(model: &CausalModel, iv: &Intervention) -> Result<CausalModel> {
    Ok(model.with_forced(&iv.resolve(model)?))
}

/// `P(target | do(iv))` by enumeration of the mutilated joint.
pub fn interventional_distribution(
    model: &CausalModel,
    iv: &Intervention,
    target: &str,
) -> Result<Distribution> {
    let target_idx = model.index_of(target)?;
    let mutilated = mutilate(model, iv)?;
    let probs = mutilated.marginal_with_evidence(&vec![None; model.len()], target_idx);
    Ok(Distribution::new(
        target,
        model.variables()[target_idx].domain(),
        probs,
    ))
}

/// `P(target | evidence)` on the untouched joint.
pub fn observational_distribution(
    model: &CausalModel,
    evidence: &Assignment,
    target: &str,
) -> Result<Distribution> {
    let target_idx = model.index_of(target)?;
    let encoded = model.encode_partial(evidence)?;
    let joint = model.marginal_with_evidence(&encoded, target_idx);
    let total: f64 = joint.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroProbabilityEvidence);
    }
    let probs = joint.into_iter().map(|p| p / total).collect();
    Ok(Distribution::new(
        target,
        model.variables()[target_idx].domain(),
        probs,
    ))
}

/// `P(target | evidence, do(iv))`: conditioning inside the mutilated model.
pub fn conditional_interventional_distribution(
    model: &CausalModel,
    iv: &Intervention,
    evidence: &Assignment,
    target: &str,
) -> Result<Distribution> {
    observational_distribution(&mutilate(model, iv)?, evidence, target)
}
