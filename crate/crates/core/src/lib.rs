//! Causal decision making over discrete causal graphical models.
//!
//! - [`model`]: finite-domain causal models, exact joints, ancestral sampling.
//! - [`intervention`]: the do-operator by graph surgery; interventional and
//!   observational queries by enumeration.
//! - [`decision`]: expected-utility choice with a known model and with
//!   beliefs over a family of models.
//! - [`belief`]: weights over model families and Bayesian updating from
//!   interventional data.
//! - [`games`]: causal Bayesian games, payoffs under joint interventions and
//!   pure equilibrium search.
//! - [`sim`]: seeded sequential experiments and pseudo-regret reports.
//! - [`files`] and [`cli`]: JSON formats and the `causal` command.

pub mod belief;
pub mod cli;
pub mod decision;
pub mod error;
pub mod files;
pub mod games;
pub mod intervention;
pub mod model;
pub mod sim;

pub use belief::{
    likelihoods, mixture_interventional, normalize_belief, update_belief, update_belief_batch,
    BeliefState, ModelFamily, Observation,
};
pub use decision::{
    pearl_expected_utility, pearl_optimal_action, savage_expected_utility, savage_optimal_action,
    Choice, DecisionProblem, UtilityFunction,
};
pub use error::{Error, Result};
pub use games::{
    causal_payoff, enumerate_equilibria, induced_star_game, posterior_given_signal,
    verify_equilibrium, ActionProfile, CausalGame, StrategicGame,
};
pub use intervention::{
    interventional_distribution, mutilate, observational_distribution, Distribution, Intervention,
};
pub use model::{
    check_model, joint_probability, sample_assignment, sample_assignments, validate_model,
    Assignment, CausalModel, RawModel,
};
pub use sim::{
    compare_policies, cumulative_regret, run_episode, EpisodeConfig, Policy, Report, Trace,
};

/// Rounds to 10 significant digits and prints the shortest decimal that
/// reads back as the rounded value (`0.7000000000000001` prints as `0.7`).
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    format!("{rounded}")
}
