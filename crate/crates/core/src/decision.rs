//! Expected-utility choice under a known causal model and under beliefs over
//! a family of causal models.
//!
//! With a known model the value of an action `a` is
//! `Σ_c P(c | do(a)) · u(c)`. With a belief `w` over models `g` it is
//! `Σ_c u(c) · Σ_g P_g(c | do(a)) · w_g`. Both pick the maximizing value of
//! the action variable; ties go to the earliest value in domain order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::belief::{mixture_interventional, BeliefState};
use crate::error::{Error, Result};
use crate::intervention::{interventional_distribution, Intervention};
use crate::model::CausalModel;

/// Two values closer than this (relative to `max(1, |v|)`) count as a tie.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// Utility per outcome label.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct UtilityFunction(BTreeMap<String, f64>);

impl UtilityFunction {
    pub fn new<I, K>(entries: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        UtilityFunction(entries.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.0.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `u ↦ alpha·u + beta`.
    pub fn affine(&self, alpha: f64, beta: f64) -> Self {
        UtilityFunction(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), alpha * v + beta))
                .collect(),
        )
    }

    /// Utilities aligned with `domain`; must be total over it and finite.
    pub fn aligned(&self, variable: &str, domain: &[String]) -> Result<Vec<f64>> {
        if let Some(extra) = self.0.keys().find(|k| !domain.contains(k)) {
            return Err(Error::UnknownValue {
                variable: variable.to_string(),
                value: extra.clone(),
            });
        }
        domain
            .iter()
            .map(|label| match self.0.get(label) {
                Some(v) if v.is_finite() => Ok(*v),
                Some(v) => Err(Error::InvalidProblem(format!(
                    "utility of {variable}={label} is {v}"
                ))),
                None => Err(Error::InvalidProblem(format!(
                    "no utility for {variable}={label}"
                ))),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionProblem {
    pub action_variable: String,
    pub outcome_variable: String,
    pub utility: UtilityFunction,
}

/// A problem checked against one model signature.
#[derive(Clone, Debug)]
pub(crate) struct BoundProblem {
    pub actions: Vec<String>,
    pub utility: Vec<f64>,
}

impl DecisionProblem {
    pub fn new(
        action_variable: impl Into<String>,
        outcome_variable: impl Into<String>,
        utility: UtilityFunction,
    ) -> Self {
        DecisionProblem {
            action_variable: action_variable.into(),
            outcome_variable: outcome_variable.into(),
            utility,
        }
    }

    pub fn with_utility(&self, utility: UtilityFunction) -> Self {
        DecisionProblem {
            utility,
            ..self.clone()
        }
    }

    pub(crate) fn bind(&self, model: &CausalModel) -> Result<BoundProblem> {
        if self.action_variable == self.outcome_variable {
            return Err(Error::InvalidProblem(format!(
                "action and outcome are both `{}`",
                self.action_variable
            )));
        }
        let action = model.index_of(&self.action_variable)?;
        let outcome = model.index_of(&self.outcome_variable)?;
        let utility = self
            .utility
            .aligned(&self.outcome_variable, model.variables()[outcome].domain())?;
        Ok(BoundProblem {
            actions: model.variables()[action].domain().to_vec(),
            utility,
        })
    }

    fn do_action(&self, action: &str) -> Intervention {
        Intervention::single(&self.action_variable, action)
    }

    fn check_action(&self, bound: &BoundProblem, action: &str) -> Result<()> {
        if bound.actions.iter().any(|a| a == action) {
            Ok(())
        } else {
            Err(Error::UnknownValue {
                variable: self.action_variable.clone(),
                value: action.to_string(),
            })
        }
    }
}

/// An optimal action and its expected utility.
#[derive(Clone, Debug, PartialEq)]
pub struct Choice {
    pub action: String,
    pub expected_utility: f64,
}

/// Index of the first maximal value, treating near-equal values as ties.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if !strictly_greater(v, values[b]) => {}
            _ => best = Some(i),
        }
    }
    best
}

/// `a > b` beyond [`TIE_TOLERANCE`].
pub fn strictly_greater(a: f64, b: f64) -> bool {
    a - b > TIE_TOLERANCE * b.abs().max(1.0)
}

fn dot(utility: &[f64], probs: &[f64]) -> f64 {
    utility.iter().zip(probs).map(|(u, p)| u * p).sum()
}

fn choose(actions: Vec<String>, values: Vec<f64>) -> Choice {
    let best = argmax_first(&values).expect("action domains are never empty");
    Choice {
        action: actions[best].clone(),
        expected_utility: values[best],
    }
}

pub fn pearl_expected_utility(
    model: &CausalModel,
    problem: &DecisionProblem,
    action: &str,
) -> Result<f64> {
    let bound = problem.bind(model)?;
    problem.check_action(&bound, action)?;
    let d =
        interventional_distribution(model, &problem.do_action(action), &problem.outcome_variable)?;
    Ok(dot(&bound.utility, d.probs()))
}

/// Expected utility of every action, in domain order.
pub fn pearl_action_values(
    model: &CausalModel,
    problem: &DecisionProblem,
) -> Result<Vec<(String, f64)>> {
    let bound = problem.bind(model)?;
    bound
        .actions
        .iter()
        .map(|a| {
            let d = interventional_distribution(
                model,
                &problem.do_action(a),
                &problem.outcome_variable,
            )?;
            Ok((a.clone(), dot(&bound.utility, d.probs())))
        })
        .collect()
}

pub fn pearl_optimal_action(model: &CausalModel, problem: &DecisionProblem) -> Result<Choice> {
    let (actions, values) = pearl_action_values(model, problem)?.into_iter().unzip();
    Ok(choose(actions, values))
}

pub fn savage_expected_utility(
    belief: &BeliefState,
    problem: &DecisionProblem,
    action: &str,
) -> Result<f64> {
    let bound = problem.bind(belief.family().signature())?;
    problem.check_action(&bound, action)?;
    let mixed = mixture_interventional(
        belief,
        &problem.do_action(action),
        &problem.outcome_variable,
    )?;
    Ok(dot(&bound.utility, mixed.probs()))
}

/// Subjective expected utility of every action, in domain order.
pub fn savage_action_values(
    belief: &BeliefState,
    problem: &DecisionProblem,
) -> Result<Vec<(String, f64)>> {
    let bound = problem.bind(belief.family().signature())?;
    bound
        .actions
        .iter()
        .map(|a| {
            let mixed =
                mixture_interventional(belief, &problem.do_action(a), &problem.outcome_variable)?;
            Ok((a.clone(), dot(&bound.utility, mixed.probs())))
        })
        .collect()
}

pub fn savage_optimal_action(belief: &BeliefState, problem: &DecisionProblem) -> Result<Choice> {
    let (actions, values) = savage_action_values(belief, problem)?.into_iter().unzip();
    Ok(choose(actions, values))
}
