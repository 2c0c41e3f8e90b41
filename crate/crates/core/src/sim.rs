//! Sequential experiments against a hidden true model.
//!
//! Each round the agent picks an action by policy, the true model produces
//! an outcome from `P(outcome | do(action))`, and the agent's belief over its
//! model family is updated by Bayes rule. Regret is pseudo-regret: the gap in
//! *expected* utility under the true model between the oracle action and the
//! action actually played.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::belief::{update_belief, BeliefState, ModelFamily};
use crate::decision::{
    pearl_action_values, pearl_optimal_action, savage_optimal_action, DecisionProblem,
};
use crate::error::{Error, Result};
use crate::format_number;
use crate::intervention::{interventional_distribution, Intervention};
use crate::model::{sample_index, CausalModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Subjective expected-utility argmax under the current belief.
    Savage,
    /// Uniform over the action domain.
    Random,
    /// Expected-utility argmax under the true model.
    Oracle,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Savage, Policy::Random, Policy::Oracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Savage => "savage",
            Policy::Random => "random",
            Policy::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Policy::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown policy `{s}` (expected savage, random or oracle)"))
    }
}

#[derive(Clone, Debug)]
pub struct EpisodeConfig {
    pub true_model: Arc<CausalModel>,
    pub agent_family: Arc<ModelFamily>,
    pub agent_prior: Vec<f64>,
    pub problem: DecisionProblem,
    pub policy: Policy,
    pub horizon: usize,
    pub seed: u64,
}

impl EpisodeConfig {
    fn prior(&self) -> Result<BeliefState> {
        BeliefState::new(self.agent_family.clone(), self.agent_prior.clone())
            .map_err(|e| Error::InvalidConfig(format!("agent prior: {e}")))
    }

    fn check(&self) -> Result<()> {
        let true_actions = pearl_action_values(&self.true_model, &self.problem)?;
        let signature = self.agent_family.signature();
        pearl_action_values(signature, &self.problem)?;
        for var in [
            &self.problem.action_variable,
            &self.problem.outcome_variable,
        ] {
            let a = self.true_model.variable(var).map(|v| v.domain());
            let b = signature.variable(var).map(|v| v.domain());
            if a != b {
                return Err(Error::InvalidConfig(format!(
                    "`{var}` has different domains in the true model and the family"
                )));
            }
        }
        debug_assert!(!true_actions.is_empty());
        Ok(())
    }

    /// Index of the true model inside the agent's family, if present.
    pub fn true_model_position(&self) -> Option<usize> {
        self.agent_family.position_of(&self.true_model)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub action: String,
    pub outcome: String,
    pub utility: f64,
    /// Belief after this round's update.
    pub posterior: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub policy: Policy,
    pub rounds: Vec<RoundRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn final_posterior(&self) -> Option<&[f64]> {
        self.rounds.last().map(|r| r.posterior.as_slice())
    }
}

/// Runs one episode; fully determined by the config and its seed.
///
/// Savage and random agents update their belief every round. The oracle
/// never consults its belief and keeps the prior.
pub fn run_episode(config: &EpisodeConfig) -> Result<Trace> {
    config.check()?;
    let mut belief = config.prior()?;
    let problem = &config.problem;
    let outcome_var = config.true_model.index_of(&problem.outcome_variable)?;
    let outcome_domain = config.true_model.variables()[outcome_var].domain();
    let utility = problem
        .utility
        .aligned(&problem.outcome_variable, outcome_domain)?;
    let actions: Vec<String> = pearl_action_values(&config.true_model, problem)?
        .into_iter()
        .map(|(a, _)| a)
        .collect();
    let oracle_action = pearl_optimal_action(&config.true_model, problem)?.action;
    let outcome_dists = actions
        .iter()
        .map(|a| {
            interventional_distribution(
                &config.true_model,
                &do_action(problem, a),
                &problem.outcome_variable,
            )
            .map(|d| d.probs().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut rounds = Vec::with_capacity(config.horizon);
    for round in 1..=config.horizon {
        let fail = |e: Error| Error::EpisodeFailed {
            round,
            source: Box::new(e),
        };
        let action = match config.policy {
            Policy::Savage => {
                savage_optimal_action(&belief, problem)
                    .map_err(fail)?
                    .action
            }
            Policy::Random => actions[rng.gen_range(0..actions.len())].clone(),
            Policy::Oracle => oracle_action.clone(),
        };
        let a = actions
            .iter()
            .position(|x| *x == action)
            .expect("policies pick from the action domain");
        let o = sample_index(&outcome_dists[a], rng.gen::<f64>());
        let outcome = outcome_domain[o].clone();
        if config.policy != Policy::Oracle {
            belief = update_belief(
                &belief,
                &do_action(problem, &action),
                &problem.outcome_variable,
                &outcome,
            )
            .map_err(fail)?;
        }
        rounds.push(RoundRecord {
            round,
            action,
            outcome,
            utility: utility[o],
            posterior: belief.weights().to_vec(),
        });
    }
    Ok(Trace {
        policy: config.policy,
        rounds,
    })
}

fn do_action(problem: &DecisionProblem, action: &str) -> Intervention {
    Intervention::single(&problem.action_variable, action)
}

/// Running sum of the per-round expected-utility gap to the oracle action.
pub fn cumulative_regret(
    trace: &Trace,
    true_model: &CausalModel,
    problem: &DecisionProblem,
) -> Result<Vec<f64>> {
    let values = pearl_action_values(true_model, problem)?;
    let best = pearl_optimal_action(true_model, problem)?.expected_utility;
    let mut total = 0.0;
    trace
        .rounds
        .iter()
        .map(|r| {
            let (_, v) =
                values
                    .iter()
                    .find(|(a, _)| *a == r.action)
                    .ok_or_else(|| Error::UnknownValue {
                        variable: problem.action_variable.clone(),
                        value: r.action.clone(),
                    })?;
            // Clamped: the oracle may sit a tie-tolerance below the exact max.
            total += (best - v).max(0.0);
            Ok(total)
        })
        .collect()
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub policy: Policy,
    pub replica: usize,
    pub round: usize,
    pub action: String,
    pub outcome: String,
    pub utility: f64,
    pub regret: f64,
    pub weight_true_model: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySummary {
    pub policy: Policy,
    pub replicas: usize,
    pub mean_final_regret: f64,
    pub min_final_regret: f64,
    pub max_final_regret: f64,
    /// `None` when the true model is not in the agent's family.
    pub mean_final_weight_true_model: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub summaries: Vec<PolicySummary>,
}

pub const CSV_HEADER: [&str; 8] = [
    "policy",
    "replica",
    "round",
    "action",
    "outcome",
    "utility",
    "regret",
    "weight_true_model",
];

impl Report {
    /// Per-round CSV with the fixed header.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.policy.as_str().to_string(),
                r.replica.to_string(),
                r.round.to_string(),
                r.action.clone(),
                r.outcome.clone(),
                format_number(r.utility),
                format_number(r.regret),
                r.weight_true_model.map(format_number).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    /// One line per policy.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "policy",
            "replicas",
            "mean_final_regret",
            "min_final_regret",
            "max_final_regret",
            "mean_final_weight_true_model",
        ])?;
        for s in &self.summaries {
            w.write_record([
                s.policy.as_str().to_string(),
                s.replicas.to_string(),
                format_number(s.mean_final_regret),
                format_number(s.min_final_regret),
                format_number(s.max_final_regret),
                s.mean_final_weight_true_model
                    .map(format_number)
                    .unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    pub fn summary(&self, policy: Policy) -> Option<&PolicySummary> {
        self.summaries.iter().find(|s| s.policy == policy)
    }
}

/// Runs every config for `replicas` replicas (replica `r` uses `seed + r`)
/// and aggregates final regret and final weight on the true model.
pub fn compare_policies(configs: &[EpisodeConfig], replicas: usize) -> Result<Report> {
    if replicas == 0 {
        return Err(Error::InvalidConfig("replicas must be at least 1".into()));
    }
    let Some(first) = configs.first() else {
        return Ok(Report {
            rows: Vec::new(),
            summaries: Vec::new(),
        });
    };
    for c in configs {
        if c.true_model != first.true_model || c.problem != first.problem {
            return Err(Error::InvalidConfig(
                "compared configs must share the true model and problem".into(),
            ));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..configs.len())
        .flat_map(|c| (0..replicas).map(move |r| (c, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(c, r)| {
            let config = EpisodeConfig {
                seed: configs[c].seed.wrapping_add(r as u64),
                ..configs[c].clone()
            };
            let trace = run_episode(&config)?;
            let regret = cumulative_regret(&trace, &config.true_model, &config.problem)?;
            Ok((trace, regret))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (c, config) in configs.iter().enumerate() {
        let truth = config.true_model_position();
        let prior = config.prior()?;
        let mut finals = Vec::with_capacity(replicas);
        let mut weights = Vec::with_capacity(replicas);
        for (r, (trace, regret)) in results[c * replicas..(c + 1) * replicas].iter().enumerate() {
            for (rec, reg) in trace.rounds.iter().zip(regret) {
                rows.push(ReportRow {
                    policy: config.policy,
                    replica: r,
                    round: rec.round,
                    action: rec.action.clone(),
                    outcome: rec.outcome.clone(),
                    utility: rec.utility,
                    regret: *reg,
                    weight_true_model: truth.map(|t| rec.posterior[t]),
                });
            }
            finals.push(regret.last().copied().unwrap_or(0.0));
            let last = trace.final_posterior().unwrap_or(prior.weights());
            weights.push(truth.map(|t| last[t]));
        }
        let n = replicas as f64;
        summaries.push(PolicySummary {
            policy: config.policy,
            replicas,
            mean_final_regret: finals.iter().sum::<f64>() / n,
            min_final_regret: finals.iter().copied().fold(f64::INFINITY, f64::min),
            max_final_regret: finals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_final_weight_true_model: truth
                .map(|_| weights.iter().map(|w| w.unwrap()).sum::<f64>() / n),
        });
    }
    Ok(Report { rows, summaries })
}
