//! Test-only fixtures and oracles.
//!
//! `GenModel` keeps its own copy of every conditional table, keyed by parent
//! values, so the brute-force oracles below never touch the library's table
//! layout, surgery or enumeration code.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use causal_decision::decision::UtilityFunction;
use causal_decision::games::{CausalGame, Player, SignalPartition};
use causal_decision::model::{Probability, RawCpt, RawModel, RawRow, RawVariable};
use causal_decision::{validate_model, CausalModel, ModelFamily};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

pub fn data_str(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

pub fn load(name: &str) -> CausalModel {
    causal_decision::files::load_model(data(name)).unwrap()
}

pub fn chain() -> CausalModel {
    load("chain.json")
}

pub fn rev() -> CausalModel {
    load("rev.json")
}

pub fn confound() -> CausalModel {
    load("confound.json")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent description of a random model.
#[derive(Clone, Debug)]
pub struct GenModel {
    pub names: Vec<String>,
    pub cards: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub tables: Vec<HashMap<Vec<usize>, Vec<f64>>>,
}

fn label(v: usize) -> String {
    v.to_string()
}

fn random_row<R: Rng>(rng: &mut R, card: usize) -> Vec<f64> {
    match rng.gen_range(0..6) {
        // Occasional point mass and occasional zero entry.
        0 => {
            let mut row = vec![0.0; card];
            row[rng.gen_range(0..card)] = 1.0;
            row
        }
        1 if card > 1 => {
            let mut row: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
            row[rng.gen_range(0..card)] = 0.0;
            let s: f64 = row.iter().sum();
            row.iter().map(|x| x / s).collect()
        }
        _ => {
            let row: Vec<f64> = (0..card).map(|_| rng.gen_range(0.05..1.0)).collect();
            let s: f64 = row.iter().sum();
            row.iter().map(|x| x / s).collect()
        }
    }
}

/// All tuples over `cards`, first coordinate most significant.
pub fn product(cards: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &c in cards {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..c).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

impl GenModel {
    /// Random DAG over `n` variables (hidden random order, edge density
    /// `density`) with random tables. Variable `i` is named `X{i}`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, max_card: usize, density: f64) -> Self {
        let cards = (0..n)
            .map(|_| rng.gen_range(2..=max_card))
            .collect::<Vec<_>>();
        Self::random_with_cards(rng, cards, density)
    }

    /// Random graph and tables over fixed domain sizes.
    pub fn random_with_cards<R: Rng>(rng: &mut R, cards: Vec<usize>, density: f64) -> Self {
        let n = cards.len();
        let names = (0..n).map(|i| format!("X{i}")).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut parents = vec![Vec::new(); n];
        for j in 0..n {
            for i in 0..j {
                if rng.gen_bool(density) {
                    parents[order[j]].push(order[i]);
                }
            }
            parents[order[j]].shuffle(rng);
        }
        let mut g = GenModel {
            names,
            cards,
            parents,
            tables: Vec::new(),
        };
        g.tables = (0..n).map(|v| g.random_table(rng, v)).collect();
        g
    }

    pub fn random_table<R: Rng>(&self, rng: &mut R, v: usize) -> HashMap<Vec<usize>, Vec<f64>> {
        let pcards: Vec<usize> = self.parents[v].iter().map(|&p| self.cards[p]).collect();
        product(&pcards)
            .into_iter()
            .map(|combo| (combo, random_row(rng, self.cards[v])))
            .collect()
    }

    /// Same graph, fresh tables.
    pub fn reparameterize<R: Rng>(&self, rng: &mut R) -> Self {
        let mut g = self.clone();
        g.tables = (0..g.names.len()).map(|v| g.random_table(rng, v)).collect();
        g
    }

    pub fn to_raw(&self) -> RawModel {
        let variables = self
            .names
            .iter()
            .zip(&self.cards)
            .map(|(n, &c)| RawVariable {
                name: n.clone(),
                domain: (0..c).map(label).collect(),
            })
            .collect();
        let mut edges = Vec::new();
        let mut cpts = Vec::new();
        for v in 0..self.names.len() {
            for &p in &self.parents[v] {
                edges.push((self.names[p].clone(), self.names[v].clone()));
            }
            let mut rows: Vec<RawRow> = self.tables[v]
                .iter()
                .map(|(combo, probs)| RawRow {
                    given: self.parents[v]
                        .iter()
                        .zip(combo)
                        .map(|(&p, &x)| (self.names[p].clone(), label(x)))
                        .collect::<BTreeMap<_, _>>(),
                    p: probs.iter().map(|&x| Probability(x)).collect(),
                })
                .collect();
            rows.sort_by(|a, b| a.given.cmp(&b.given));
            cpts.push(RawCpt {
                variable: self.names[v].clone(),
                parents: self.parents[v]
                    .iter()
                    .map(|&p| self.names[p].clone())
                    .collect(),
                rows,
            });
        }
        edges.reverse();
        RawModel {
            variables,
            edges,
            cpts,
        }
    }

    pub fn build(&self) -> CausalModel {
        validate_model(&self.to_raw()).expect("generated model is valid")
    }

    fn cond(&self, v: usize, full: &[usize]) -> f64 {
        let combo: Vec<usize> = self.parents[v].iter().map(|&p| full[p]).collect();
        self.tables[v][&combo][full[v]]
    }

    /// Joint of a full assignment with `forced` variables replaced by
    /// indicators: the truncated product, enumerated directly.
    pub fn truncated_joint(&self, full: &[usize], forced: &[(usize, usize)]) -> f64 {
        (0..self.names.len())
            .map(|v| match forced.iter().find(|(f, _)| *f == v) {
                Some(&(_, val)) => {
                    if full[v] == val {
                        1.0
                    } else {
                        0.0
                    }
                }
                None => self.cond(v, full),
            })
            .product()
    }

    /// Brute-force `P(target | do(forced))` over every full assignment.
    pub fn brute_interventional(&self, forced: &[(usize, usize)], target: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.cards[target]];
        for full in product(&self.cards) {
            out[full[target]] += self.truncated_joint(&full, forced);
        }
        out
    }

    /// Brute-force `P(target | evidence)`.
    pub fn brute_conditional(
        &self,
        evidence: &[(usize, usize)],
        target: usize,
    ) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.cards[target]];
        for full in product(&self.cards) {
            if evidence.iter().all(|&(v, x)| full[v] == x) {
                out[full[target]] += self.truncated_joint(&full, &[]);
            }
        }
        let total: f64 = out.iter().sum();
        (total > 0.0).then(|| out.iter().map(|p| p / total).collect())
    }
}

pub fn random_utility<R: Rng>(rng: &mut R, card: usize) -> UtilityFunction {
    UtilityFunction::new((0..card).map(|c| (label(c), rng.gen_range(-5.0..5.0))))
}

pub fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Strictly-better test for the oracle; the same relative tolerance as the
/// library's documented tie rule.
pub fn oracle_better(a: f64, b: f64) -> bool {
    a - b > 1e-10 * b.abs().max(1.0)
}

/// Classical pure Nash equilibria of a normal-form game by exhaustion.
pub fn brute_nash(cards: &[usize], payoff: &dyn Fn(&[usize], usize) -> f64) -> Vec<Vec<usize>> {
    product(cards)
        .into_iter()
        .filter(|profile| {
            (0..cards.len()).all(|i| {
                let here = payoff(profile, i);
                (0..cards[i]).all(|alt| {
                    let mut dev = profile.clone();
                    dev[i] = alt;
                    !oracle_better(payoff(&dev, i), here)
                })
            })
        })
        .collect()
}

/// A random causal game with its independent payoff oracle.
pub struct GenGame {
    pub game: CausalGame,
    pub states: Vec<GenModel>,
    pub action_vars: Vec<usize>,
    pub outcome: usize,
    pub priors: Vec<Vec<f64>>,
    pub utilities: Vec<Vec<f64>>,
}

impl GenGame {
    /// `n_players` exogenous action variables `A{i}`, optional noise `U`,
    /// outcome `C` caused by every action (and the noise), `n_states`
    /// reparameterizations of the same graph. `deterministic` makes every
    /// outcome row a point mass.
    pub fn random<R: Rng>(
        rng: &mut R,
        n_players: usize,
        n_states: usize,
        deterministic: bool,
    ) -> Self {
        let mut names: Vec<String> = (0..n_players).map(|i| format!("A{i}")).collect();
        let mut cards: Vec<usize> = (0..n_players).map(|_| rng.gen_range(2..=3)).collect();
        let noise = !deterministic && rng.gen_bool(0.5);
        if noise {
            names.push("U".into());
            cards.push(2);
        }
        names.push("C".into());
        cards.push(rng.gen_range(2..=3));
        let outcome = names.len() - 1;
        let mut parents = vec![Vec::new(); names.len()];
        parents[outcome] = (0..outcome).collect();
        let template = GenModel {
            names,
            cards,
            parents,
            tables: Vec::new(),
        };
        let states: Vec<GenModel> = (0..n_states)
            .map(|_| {
                let mut g = template.clone();
                g.tables = (0..g.names.len())
                    .map(|v| {
                        let mut t = g.random_table(rng, v);
                        if deterministic && v == outcome {
                            for row in t.values_mut() {
                                let hit = rng.gen_range(0..row.len());
                                row.iter_mut()
                                    .enumerate()
                                    .for_each(|(k, p)| *p = if k == hit { 1.0 } else { 0.0 });
                            }
                        }
                        t
                    })
                    .collect();
                g
            })
            .collect();
        let family = Arc::new(
            ModelFamily::new(
                states
                    .iter()
                    .enumerate()
                    .map(|(k, g)| (format!("w{k}"), g.build())),
            )
            .unwrap(),
        );
        let out_card = template.cards[outcome];
        let priors: Vec<Vec<f64>> = (0..n_players)
            .map(|_| random_weights(rng, n_states))
            .collect();
        let utilities: Vec<Vec<f64>> = (0..n_players)
            .map(|_| (0..out_card).map(|_| rng.gen_range(-5.0..5.0)).collect())
            .collect();
        let players = (0..n_players)
            .map(|i| Player {
                name: format!("p{i}"),
                action_variable: format!("A{i}"),
                utility: UtilityFunction::new(
                    utilities[i].iter().enumerate().map(|(c, &u)| (label(c), u)),
                ),
                prior: priors[i].clone(),
                signals: SignalPartition::trivial(n_states),
            })
            .collect();
        let game = CausalGame::new(players, "C", family).unwrap();
        GenGame {
            game,
            states,
            action_vars: (0..n_players).collect(),
            outcome,
            priors,
            utilities,
        }
    }

    pub fn cards(&self) -> Vec<usize> {
        self.action_vars
            .iter()
            .map(|&v| self.states[0].cards[v])
            .collect()
    }

    /// `Σ_ω prior_i(ω) Σ_c u_i(c) P^ω(c | do(profile))` by brute force.
    pub fn oracle_payoff(&self, profile: &[usize], player: usize) -> f64 {
        let forced: Vec<(usize, usize)> = self
            .action_vars
            .iter()
            .copied()
            .zip(profile.iter().copied())
            .collect();
        self.states
            .iter()
            .zip(&self.priors[player])
            .map(|(g, w)| {
                let d = g.brute_interventional(&forced, self.outcome);
                w * d
                    .iter()
                    .zip(&self.utilities[player])
                    .map(|(p, u)| p * u)
                    .sum::<f64>()
            })
            .sum()
    }
}
