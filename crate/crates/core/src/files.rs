//! JSON file formats.
//!
//! Wherever a file embeds another document (a family's models, a game's
//! states, a simulation's model and problem) it may either inline the
//! object or give a path string, resolved relative to the referencing file.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::belief::{normalize_belief, BeliefState, ModelFamily};
use crate::decision::{DecisionProblem, UtilityFunction};
use crate::error::{Error, Result};
use crate::games::{CausalGame, Player, SignalCell, SignalPartition};
use crate::model::{validate_model, CausalModel, RawModel};
use crate::sim::{EpisodeConfig, Policy};

/// An inline document or a path to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Ref<T> {
    Path(String),
    Inline(T),
}

impl<T: DeserializeOwned> Ref<T> {
    /// The document and the directory its own references resolve against.
    fn resolve(self, base: &Path) -> Result<(T, PathBuf)> {
        match self {
            Ref::Inline(t) => Ok((t, base.to_path_buf())),
            Ref::Path(p) => {
                let path = base.join(p);
                let value = read_json(&path)?;
                Ok((value, parent_dir(&path)))
            }
        }
    }

    fn stem(&self) -> Option<String> {
        match self {
            Ref::Path(p) => Path::new(p)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned()),
            Ref::Inline(_) => None,
        }
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?, &path.display().to_string())
}

fn parse_json<T: DeserializeOwned>(text: &str, context: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|source| Error::Json {
        context: context.to_string(),
        source,
    })
}

pub fn read_raw_model(path: impl AsRef<Path>) -> Result<RawModel> {
    read_json(path.as_ref())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<CausalModel> {
    validate_model(&read_raw_model(path)?)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<DecisionProblem> {
    read_json(path.as_ref())
}

// ── families ──────────────────────────────────────────────────────────

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub models: Vec<Ref<RawModel>>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub names: Option<Vec<String>>,
}

/// A family plus the weights stored with it (uniform when absent).
#[derive(Clone, Debug)]
pub struct LoadedFamily {
    pub family: Arc<ModelFamily>,
    pub weights: Vec<f64>,
}

impl LoadedFamily {
    pub fn belief(&self) -> Result<BeliefState> {
        normalize_belief(self.family.clone(), &self.weights)
    }
}

impl FamilyFile {
    pub fn load(self, base: &Path) -> Result<LoadedFamily> {
        if let Some(names) = &self.names {
            if names.len() != self.models.len() {
                return Err(Error::LengthMismatch {
                    expected: self.models.len(),
                    found: names.len(),
                });
            }
        }
        let mut members = Vec::with_capacity(self.models.len());
        for (i, r) in self.models.into_iter().enumerate() {
            let name = match &self.names {
                Some(names) => names[i].clone(),
                None => r.stem().unwrap_or_else(|| format!("model{i}")),
            };
            let (raw, _) = r.resolve(base)?;
            members.push((name, validate_model(&raw)?));
        }
        let family = Arc::new(ModelFamily::new(members)?);
        let weights = self.weights.unwrap_or_else(|| vec![1.0; family.len()]);
        // Validate eagerly so a bad file fails at load time.
        normalize_belief(family.clone(), &weights)?;
        Ok(LoadedFamily { family, weights })
    }
}

pub fn load_family(path: impl AsRef<Path>) -> Result<LoadedFamily> {
    let path = path.as_ref();
    let file: FamilyFile = read_json(path)?;
    file.load(&parent_dir(path))
}

/// True when the JSON document at `path` is a family file rather than a model.
pub fn is_family_file(path: impl AsRef<Path>) -> Result<bool> {
    let path = path.as_ref();
    let value: serde_json::Value = read_json(path)?;
    Ok(value.get("models").is_some())
}

// ── games ─────────────────────────────────────────────────────────────

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: Vec<PlayerFile>,
    pub outcome_variable: String,
    pub states: Ref<FamilyFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerFile {
    pub name: String,
    pub action_variable: String,
    pub utility: UtilityFunction,
    /// Defaults to the states file's weights.
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    /// Defaults to a single uninformative signal.
    #[serde(default)]
    pub signal_partition: Option<Vec<CellFile>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellFile {
    pub label: String,
    pub states: Vec<StateRef>,
}

/// A state by family index or by member name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(usize),
    Name(String),
}

impl GameFile {
    pub fn load(self, base: &Path) -> Result<CausalGame> {
        let (states, states_base) = self.states.resolve(base)?;
        let loaded = states.load(&states_base)?;
        let family = loaded.family.clone();
        let default_prior = loaded.belief()?.weights().to_vec();
        let players = self
            .players
            .into_iter()
            .map(|p| {
                let signals = match p.signal_partition {
                    None => SignalPartition::trivial(family.len()),
                    Some(cells) => {
                        let cells = cells
                            .into_iter()
                            .map(|c| {
                                let states = c
                                    .states
                                    .iter()
                                    .map(|s| match s {
                                        StateRef::Index(i) => Ok(*i),
                                        StateRef::Name(n) => family.position(n).ok_or_else(|| {
                                            Error::InvalidGame(format!(
                                                "signal `{}` names unknown state `{n}`",
                                                c.label
                                            ))
                                        }),
                                    })
                                    .collect::<Result<Vec<_>>>()?;
                                Ok(SignalCell {
                                    label: c.label,
                                    states,
                                })
                            })
                            .collect::<Result<Vec<_>>>()?;
                        SignalPartition::new(cells, family.len())?
                    }
                };
                Ok(Player {
                    name: p.name,
                    action_variable: p.action_variable,
                    utility: p.utility,
                    prior: p.prior.unwrap_or_else(|| default_prior.clone()),
                    signals,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CausalGame::new(players, self.outcome_variable, family)
    }
}

pub fn load_game(path: impl AsRef<Path>) -> Result<CausalGame> {
    let path = path.as_ref();
    let file: GameFile = read_json(path)?;
    file.load(&parent_dir(path))
}

// ── simulations ───────────────────────────────────────────────────────

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationFile {
    pub true_model: Ref<RawModel>,
    pub family: Ref<FamilyFile>,
    pub problem: Ref<DecisionProblem>,
    /// Defaults to the family file's weights.
    #[serde(default)]
    pub prior: Option<Vec<f64>>,
    #[serde(default = "default_policies")]
    pub policies: Vec<Policy>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

fn default_policies() -> Vec<Policy> {
    Policy::ALL.to_vec()
}

fn default_replicas() -> usize {
    1
}

/// A parsed simulation: one config per policy, plus the replica count.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub configs: Vec<EpisodeConfig>,
    pub replicas: usize,
}

impl SimulationFile {
    pub fn load(self, base: &Path) -> Result<Simulation> {
        let (raw, _) = self.true_model.resolve(base)?;
        let true_model = Arc::new(validate_model(&raw)?);
        let (family_file, family_base) = self.family.resolve(base)?;
        let loaded = family_file.load(&family_base)?;
        let prior = match self.prior {
            Some(p) => normalize_belief(loaded.family.clone(), &p)?,
            None => loaded.belief()?,
        };
        let (problem, _) = self.problem.resolve(base)?;
        if self.policies.is_empty() {
            return Err(Error::InvalidConfig("no policies given".into()));
        }
        let configs = self
            .policies
            .iter()
            .map(|&policy| EpisodeConfig {
                true_model: true_model.clone(),
                agent_family: loaded.family.clone(),
                agent_prior: prior.weights().to_vec(),
                problem: problem.clone(),
                policy,
                horizon: self.horizon,
                seed: self.seed,
            })
            .collect();
        Ok(Simulation {
            configs,
            replicas: self.replicas,
        })
    }
}

pub fn load_simulation(path: impl AsRef<Path>) -> Result<Simulation> {
    let path = path.as_ref();
    let file: SimulationFile = read_json(path)?;
    file.load(&parent_dir(path))
}
