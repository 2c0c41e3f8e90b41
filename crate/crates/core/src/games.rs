//! Bayesian strategic games whose states of nature are causal models.
//!
//! Every player's action is an intervention on that player's action
//! variable. A profile is evaluated by applying all players' actions as one
//! joint intervention in every state model, mixing the resulting outcome
//! distributions with the player's belief over states and taking expected
//! utility. A profile is a causal Nash equilibrium when no player can raise
//! that value by a unilateral change of action.
//!
//! Only pure strategies are considered; action sets are finite, so
//! equilibria are found by exhaustive search.

use std::fmt;
use std::sync::Arc;

use crate::belief::{mixture_interventional, BeliefState, ModelFamily};
use crate::decision::{strictly_greater, UtilityFunction};
use crate::error::{Error, Result};
use crate::intervention::{interventional_distribution, Intervention};
use crate::model::unrank;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalCell {
    pub label: String,
    pub states: Vec<usize>,
}

/// Labeled partition of state indices: the level sets of a signal function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalPartition {
    cells: Vec<SignalCell>,
    cell_of: Vec<usize>,
}

impl SignalPartition {
    /// One cell holding every state.
    pub fn trivial(n_states: usize) -> Self {
        SignalPartition {
            cells: vec![SignalCell {
                label: "*".to_string(),
                states: (0..n_states).collect(),
            }],
            cell_of: vec![0; n_states],
        }
    }

    /// One cell per state, labeled by the state index.
    pub fn revealing(n_states: usize) -> Self {
        SignalPartition {
            cells: (0..n_states)
                .map(|s| SignalCell {
                    label: s.to_string(),
                    states: vec![s],
                })
                .collect(),
            cell_of: (0..n_states).collect(),
        }
    }

    pub fn new(cells: Vec<SignalCell>, n_states: usize) -> Result<Self> {
        let mut cell_of = vec![usize::MAX; n_states];
        for (k, cell) in cells.iter().enumerate() {
            if cells[..k].iter().any(|c| c.label == cell.label) {
                return Err(Error::InvalidGame(format!(
                    "signal `{}` appears twice",
                    cell.label
                )));
            }
            if cell.states.is_empty() {
                return Err(Error::InvalidGame(format!(
                    "signal `{}` has no states",
                    cell.label
                )));
            }
            for &s in &cell.states {
                if s >= n_states {
                    return Err(Error::InvalidGame(format!(
                        "signal `{}` names state {s} of {n_states}",
                        cell.label
                    )));
                }
                if cell_of[s] != usize::MAX {
                    return Err(Error::InvalidGame(format!(
                        "state {s} is in more than one signal cell"
                    )));
                }
                cell_of[s] = k;
            }
        }
        if let Some(s) = cell_of.iter().position(|&c| c == usize::MAX) {
            return Err(Error::InvalidGame(format!(
                "state {s} is in no signal cell"
            )));
        }
        Ok(SignalPartition { cells, cell_of })
    }

    pub fn cells(&self) -> &[SignalCell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Index of the cell containing `state`.
    pub fn signal_of(&self, state: usize) -> usize {
        self.cell_of[state]
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.label == label)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Player {
    pub name: String,
    pub action_variable: String,
    pub utility: UtilityFunction,
    pub prior: Vec<f64>,
    pub signals: SignalPartition,
}

#[derive(Clone, Debug)]
pub struct CausalGame {
    players: Vec<Player>,
    outcome_variable: String,
    states: Arc<ModelFamily>,
    actions: Vec<Vec<String>>,
    utilities: Vec<Vec<f64>>,
    priors: Vec<BeliefState>,
}

impl CausalGame {
    pub fn new(
        players: Vec<Player>,
        outcome_variable: impl Into<String>,
        states: Arc<ModelFamily>,
    ) -> Result<Self> {
        let outcome_variable = outcome_variable.into();
        if players.is_empty() {
            return Err(Error::InvalidGame(
                "a game needs at least one player".into(),
            ));
        }
        let signature = states.signature();
        let outcome = signature.index_of(&outcome_variable)?;
        let outcome_domain = signature.variables()[outcome].domain();
        let mut actions = Vec::with_capacity(players.len());
        let mut utilities = Vec::with_capacity(players.len());
        let mut priors = Vec::with_capacity(players.len());
        for (i, p) in players.iter().enumerate() {
            if players[..i].iter().any(|q| q.name == p.name) {
                return Err(Error::DuplicateName(p.name.clone()));
            }
            if players[..i]
                .iter()
                .any(|q| q.action_variable == p.action_variable)
            {
                return Err(Error::InvalidGame(format!(
                    "action variable `{}` is shared",
                    p.action_variable
                )));
            }
            if p.action_variable == outcome_variable {
                return Err(Error::InvalidGame(format!(
                    "`{}` is both an action and the outcome",
                    p.action_variable
                )));
            }
            let var = signature.index_of(&p.action_variable)?;
            actions.push(signature.variables()[var].domain().to_vec());
            utilities.push(p.utility.aligned(&outcome_variable, outcome_domain)?);
            let prior = BeliefState::new(states.clone(), p.prior.clone())
                .map_err(|e| Error::InvalidGame(format!("prior of `{}`: {e}", p.name)))?;
            if p.signals.cell_of.len() != states.len() {
                return Err(Error::InvalidGame(format!(
                    "signal partition of `{}` covers {} states, game has {}",
                    p.name,
                    p.signals.cell_of.len(),
                    states.len()
                )));
            }
            for cell in p.signals.cells() {
                let mass: f64 = cell.states.iter().map(|&s| prior.weight(s)).sum();
                if mass <= 0.0 {
                    return Err(Error::InvalidGame(format!(
                        "signal `{}` of `{}` has zero prior mass",
                        cell.label, p.name
                    )));
                }
            }
            priors.push(prior);
        }
        Ok(CausalGame {
            players,
            outcome_variable,
            states,
            actions,
            utilities,
            priors,
        })
    }

    pub fn players(&self) -> &[Player] {
        &self.players
    }

    pub fn outcome_variable(&self) -> &str {
        &self.outcome_variable
    }

    pub fn states(&self) -> &Arc<ModelFamily> {
        &self.states
    }

    pub fn actions(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn prior(&self, player: usize) -> &BeliefState {
        &self.priors[player]
    }

    pub fn player_index(&self, name: &str) -> Result<usize> {
        self.players
            .iter()
            .position(|p| p.name == name)
            .ok_or_else(|| Error::UnknownPlayer(name.to_string()))
    }

    /// Copy with one player's utility replaced.
    pub fn with_utility(&self, player: usize, utility: UtilityFunction) -> Result<Self> {
        let mut players = self.players.clone();
        players[player].utility = utility;
        CausalGame::new(players, self.outcome_variable.clone(), self.states.clone())
    }

    fn encode(&self, profile: &ActionProfile) -> Result<Vec<usize>> {
        if profile.0.len() != self.players.len() {
            return Err(Error::InvalidProfile(format!(
                "{} actions for {} players",
                profile.0.len(),
                self.players.len()
            )));
        }
        profile
            .0
            .iter()
            .enumerate()
            .map(|(i, a)| {
                self.actions[i].iter().position(|x| x == a).ok_or_else(|| {
                    Error::InvalidProfile(format!(
                        "`{a}` is not an action of `{}`",
                        self.players[i].name
                    ))
                })
            })
            .collect()
    }

    fn decode(&self, idx: &[usize]) -> ActionProfile {
        ActionProfile(
            idx.iter()
                .enumerate()
                .map(|(i, &a)| self.actions[i][a].clone())
                .collect(),
        )
    }

    fn joint_intervention(&self, idx: &[usize]) -> Intervention {
        Intervention::new(
            self.players
                .iter()
                .zip(idx)
                .enumerate()
                .map(|(i, (p, &a))| (p.action_variable.clone(), self.actions[i][a].clone())),
        )
        .expect("action variables are distinct and non-empty")
    }

    fn check_belief(&self, belief: &BeliefState) -> Result<()> {
        if Arc::ptr_eq(belief.family(), &self.states) || **belief.family() == *self.states {
            Ok(())
        } else {
            Err(Error::InvalidGame(
                "belief is not over the game's states".into(),
            ))
        }
    }

    fn check_beliefs(&self, beliefs: &[BeliefState]) -> Result<()> {
        if beliefs.len() != self.players.len() {
            return Err(Error::LengthMismatch {
                expected: self.players.len(),
                found: beliefs.len(),
            });
        }
        beliefs.iter().try_for_each(|b| self.check_belief(b))
    }

    fn profile_count(&self) -> usize {
        self.actions.iter().map(Vec::len).product()
    }

    fn cards(&self) -> Vec<usize> {
        self.actions.iter().map(Vec::len).collect()
    }

    /// `P^ω(outcome | do(profile))` for every profile (lexicographic) and state.
    fn outcome_table(&self) -> Result<Vec<Vec<Vec<f64>>>> {
        let cards = self.cards();
        (0..self.profile_count())
            .map(|k| {
                let iv = self.joint_intervention(&unrank(k, &cards));
                self.states
                    .members()
                    .iter()
                    .map(|m| {
                        Ok(
                            interventional_distribution(&m.model, &iv, &self.outcome_variable)?
                                .probs()
                                .to_vec(),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Profile name list such as `p1=1,p2=0`.
    pub fn describe(&self, profile: &ActionProfile) -> String {
        self.players
            .iter()
            .zip(&profile.0)
            .map(|(p, a)| format!("{}={a}", p.name))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// One action per player, in player order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionProfile(pub Vec<String>);

impl ActionProfile {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(actions: I) -> Self {
        ActionProfile(actions.into_iter().map(Into::into).collect())
    }

    pub fn actions(&self) -> &[String] {
        &self.0
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.join(","))
    }
}

/// Posterior of `player` after seeing `signal`: prior restricted to the
/// signal's cell and renormalized.
pub fn posterior_given_signal(
    game: &CausalGame,
    player: usize,
    signal: &str,
) -> Result<BeliefState> {
    let p = &game.players[player];
    let cell = p
        .signals
        .position(signal)
        .ok_or_else(|| Error::UnknownSignal {
            player: p.name.clone(),
            signal: signal.to_string(),
        })?;
    Ok(posterior_for_cell(game, player, cell))
}

fn posterior_for_cell(game: &CausalGame, player: usize, cell: usize) -> BeliefState {
    let prior = &game.priors[player];
    let signals = &game.players[player].signals;
    let mass: f64 = signals.cells[cell]
        .states
        .iter()
        .map(|&s| prior.weight(s))
        .sum();
    let weights = (0..game.states.len())
        .map(|s| {
            if signals.signal_of(s) == cell {
                prior.weight(s) / mass
            } else {
                0.0
            }
        })
        .collect();
    BeliefState::new(game.states.clone(), weights)
        .expect("posterior of a positive-mass cell is normalized")
}

/// `Σ_c u_i(c) · Σ_ω P^ω(c | do(profile)) · w(ω)`.
pub fn causal_payoff(
    game: &CausalGame,
    profile: &ActionProfile,
    player: usize,
    belief: &BeliefState,
) -> Result<f64> {
    if player >= game.players.len() {
        return Err(Error::UnknownPlayer(player.to_string()));
    }
    game.check_belief(belief)?;
    let idx = game.encode(profile)?;
    let mixed = mixture_interventional(
        belief,
        &game.joint_intervention(&idx),
        &game.outcome_variable,
    )?;
    Ok(game.utilities[player]
        .iter()
        .zip(mixed.probs())
        .map(|(u, p)| u * p)
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Deviation {
    pub player: usize,
    pub current_payoff: f64,
    /// Best alternative action, `None` when the player has a single action.
    pub best_action: Option<String>,
    pub best_payoff: f64,
    /// `best_payoff - current_payoff`.
    pub gain: f64,
}

impl Deviation {
    pub fn is_profitable(&self) -> bool {
        self.best_action.is_some() && strictly_greater(self.best_payoff, self.current_payoff)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumCheck {
    pub is_equilibrium: bool,
    /// One entry per player.
    pub deviations: Vec<Deviation>,
}

impl EquilibriumCheck {
    /// The largest profitable deviation, if any.
    pub fn certificate(&self) -> Option<&Deviation> {
        self.deviations.iter().filter(|d| d.is_profitable()).fold(
            None,
            |best: Option<&Deviation>, d| match best {
                Some(b) if b.gain >= d.gain => Some(b),
                _ => Some(d),
            },
        )
    }
}

/// Checks the profile using every player's prior.
pub fn verify_equilibrium(game: &CausalGame, profile: &ActionProfile) -> Result<EquilibriumCheck> {
    verify_equilibrium_with(game, profile, &game.priors)
}

/// Checks the profile with one supplied belief per player.
pub fn verify_equilibrium_with(
    game: &CausalGame,
    profile: &ActionProfile,
    beliefs: &[BeliefState],
) -> Result<EquilibriumCheck> {
    game.check_beliefs(beliefs)?;
    game.encode(profile)?;
    let mut deviations = Vec::with_capacity(game.players.len());
    for (i, belief) in beliefs.iter().enumerate() {
        let current_payoff = causal_payoff(game, profile, i, belief)?;
        let mut best: Option<(String, f64)> = None;
        for alt in &game.actions[i] {
            if *alt == profile.0[i] {
                continue;
            }
            let mut deviated = profile.clone();
            deviated.0[i] = alt.clone();
            let v = causal_payoff(game, &deviated, i, belief)?;
            if best.as_ref().is_none_or(|(_, b)| strictly_greater(v, *b)) {
                best = Some((alt.clone(), v));
            }
        }
        let (best_action, best_payoff) = match best {
            Some((a, v)) => (Some(a), v),
            None => (None, current_payoff),
        };
        deviations.push(Deviation {
            player: i,
            current_payoff,
            best_action,
            best_payoff,
            gain: best_payoff - current_payoff,
        });
    }
    let is_equilibrium = deviations.iter().all(|d| !d.is_profitable());
    Ok(EquilibriumCheck {
        is_equilibrium,
        deviations,
    })
}

/// All pure equilibria under the players' priors, in lexicographic order.
pub fn enumerate_equilibria(game: &CausalGame) -> Result<Vec<ActionProfile>> {
    enumerate_equilibria_with(game, &game.priors)
}

pub fn enumerate_equilibria_with(
    game: &CausalGame,
    beliefs: &[BeliefState],
) -> Result<Vec<ActionProfile>> {
    let table = payoff_table_with(game, beliefs)?;
    Ok(table
        .pure_equilibria()
        .into_iter()
        .map(|idx| game.decode(&idx))
        .collect())
}

/// The normal-form game of causal payoffs under the players' priors.
pub fn payoff_table(game: &CausalGame) -> Result<StrategicGame> {
    payoff_table_with(game, &game.priors)
}

pub fn payoff_table_with(game: &CausalGame, beliefs: &[BeliefState]) -> Result<StrategicGame> {
    game.check_beliefs(beliefs)?;
    let outcomes = game.outcome_table()?;
    let payoffs = outcomes
        .iter()
        .map(|per_state| {
            beliefs
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let mix = mix(per_state.iter().map(Vec::as_slice), b.weights());
                    game.utilities[i].iter().zip(&mix).map(|(u, p)| u * p).sum()
                })
                .collect()
        })
        .collect();
    Ok(StrategicGame {
        players: game
            .players
            .iter()
            .enumerate()
            .map(|(i, p)| StrategicPlayer {
                player: i,
                name: p.name.clone(),
                signal: None,
            })
            .collect(),
        actions: game.actions.clone(),
        payoffs,
    })
}

/// `Σ_ω w_ω · dist_ω`, accumulated in state order.
fn mix<'a>(dists: impl Iterator<Item = &'a [f64]>, weights: &[f64]) -> Vec<f64> {
    let mut acc: Vec<f64> = Vec::new();
    for (d, &w) in dists.zip(weights) {
        if acc.is_empty() {
            acc = vec![0.0; d.len()];
        }
        for (a, p) in acc.iter_mut().zip(d) {
            *a += w * p;
        }
    }
    acc
}

/// The auxiliary game whose players are `(player, signal)` pairs.
///
/// At a profile `b` of this game, state `ω` induces the base profile where
/// each player `j` plays `b[(j, τ_j(ω))]`. Player `(i, t)` is paid the
/// expected utility of the outcome mixture over `ω` under `i`'s posterior
/// given `t`.
pub fn induced_star_game(game: &CausalGame) -> Result<StrategicGame> {
    let mut players = Vec::new();
    let mut first_slot = Vec::with_capacity(game.players.len());
    for (i, p) in game.players.iter().enumerate() {
        first_slot.push(players.len());
        for cell in p.signals.cells() {
            players.push(StrategicPlayer {
                player: i,
                name: p.name.clone(),
                signal: Some(cell.label.clone()),
            });
        }
    }
    let actions: Vec<Vec<String>> = players
        .iter()
        .map(|sp| game.actions[sp.player].clone())
        .collect();
    let posteriors: Vec<BeliefState> = players
        .iter()
        .map(|sp| {
            posterior_for_cell(
                game,
                sp.player,
                game.players[sp.player]
                    .signals
                    .position(sp.signal.as_deref().unwrap())
                    .unwrap(),
            )
        })
        .collect();

    let outcomes = game.outcome_table()?;
    let base_cards = game.cards();
    let star_cards: Vec<usize> = actions.iter().map(Vec::len).collect();
    let n_star: usize = star_cards.iter().product();
    let mut payoffs = Vec::with_capacity(n_star);
    for k in 0..n_star {
        let star = unrank(k, &star_cards);
        // Base profile realized in each state.
        let base_index: Vec<usize> = (0..game.states.len())
            .map(|s| {
                game.players.iter().enumerate().fold(0, |acc, (j, p)| {
                    acc * base_cards[j] + star[first_slot[j] + p.signals.signal_of(s)]
                })
            })
            .collect();
        let row = players
            .iter()
            .zip(&posteriors)
            .map(|(sp, post)| {
                let mix = mix(
                    (0..game.states.len()).map(|s| outcomes[base_index[s]][s].as_slice()),
                    post.weights(),
                );
                game.utilities[sp.player]
                    .iter()
                    .zip(&mix)
                    .map(|(u, p)| u * p)
                    .sum()
            })
            .collect();
        payoffs.push(row);
    }
    Ok(StrategicGame {
        players,
        actions,
        payoffs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategicPlayer {
    /// Index of the underlying game player.
    pub player: usize,
    pub name: String,
    pub signal: Option<String>,
}

impl fmt::Display for StrategicPlayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.signal {
            Some(t) => write!(f, "{}@{t}", self.name),
            None => f.write_str(&self.name),
        }
    }
}

/// Finite normal-form game. Profiles are indexed lexicographically, first
/// player most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct StrategicGame {
    players: Vec<StrategicPlayer>,
    actions: Vec<Vec<String>>,
    payoffs: Vec<Vec<f64>>,
}

impl StrategicGame {
    pub fn players(&self) -> &[StrategicPlayer] {
        &self.players
    }

    pub fn actions(&self, player: usize) -> &[String] {
        &self.actions[player]
    }

    pub fn profile_count(&self) -> usize {
        self.payoffs.len()
    }

    pub fn profile_at(&self, index: usize) -> Vec<usize> {
        unrank(
            index,
            &self.actions.iter().map(Vec::len).collect::<Vec<_>>(),
        )
    }

    pub fn index_of(&self, profile: &[usize]) -> usize {
        profile
            .iter()
            .zip(&self.actions)
            .fold(0, |acc, (&a, acts)| acc * acts.len() + a)
    }

    pub fn payoff(&self, profile: &[usize], player: usize) -> f64 {
        self.payoffs[self.index_of(profile)][player]
    }

    pub fn labels(&self, profile: &[usize]) -> Vec<String> {
        profile
            .iter()
            .enumerate()
            .map(|(i, &a)| self.actions[i][a].clone())
            .collect()
    }

    /// Every profile where no player has a strictly better unilateral move.
    pub fn pure_equilibria(&self) -> Vec<Vec<usize>> {
        (0..self.profile_count())
            .map(|k| self.profile_at(k))
            .filter(|profile| {
                let row = &self.payoffs[self.index_of(profile)];
                (0..self.players.len()).all(|i| {
                    (0..self.actions[i].len()).all(|alt| {
                        let mut dev = profile.clone();
                        dev[i] = alt;
                        !strictly_greater(self.payoffs[self.index_of(&dev)][i], row[i])
                    })
                })
            })
            .collect()
    }
}
