//! The `causal` command.
//!
//! Exit codes: 0 success, 1 domain error (invalid model, impossible
//! evidence, zero likelihood, unreadable file), 2 usage error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::belief::{normalize_belief, update_belief};
use crate::decision::{pearl_optimal_action, savage_optimal_action};
use crate::error::{Error, Result};
use crate::files::{
    is_family_file, load_family, load_game, load_model, load_problem, load_simulation,
    read_raw_model,
};
use crate::format_number;
use crate::games::{enumerate_equilibria, induced_star_game};
use crate::intervention::{conditional_interventional_distribution, Distribution, Intervention};
use crate::model::{check_model, validate_model, Assignment};
use crate::sim::{compare_policies, Policy};

#[derive(Debug, Parser)]
#[command(
    name = "causal",
    version,
    about = "Causal decision making over discrete causal models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model file; prints OK or the violations.
    Validate {
        model: PathBuf,
        /// Print the canonical serialization instead of OK.
        #[arg(long)]
        canonical: bool,
    },
    /// Distribution of a target under interventions and/or evidence.
    Query {
        model: PathBuf,
        #[command(flatten)]
        interventions: DoArgs,
        /// Condition on VAR=value (repeatable).
        #[arg(long = "given", value_name = "VAR=value", value_parser = parse_pair)]
        given: Vec<(String, String)>,
        #[arg(long, value_name = "VAR")]
        target: String,
    },
    /// Optimal action for a model (known-model criterion) or a family (belief criterion).
    Decide {
        /// A model file or a family file.
        model_or_family: PathBuf,
        problem: PathBuf,
        #[arg(long, value_name = "w1,w2,...", value_parser = parse_weights)]
        weights: Option<Weights>,
    },
    /// Posterior family weights after one interventional observation.
    Update {
        family: PathBuf,
        #[arg(long, value_name = "w1,w2,...", value_parser = parse_weights)]
        weights: Option<Weights>,
        #[command(flatten)]
        interventions: DoArgs,
        #[arg(long, value_name = "VAR=value", value_parser = parse_pair)]
        observed: (String, String),
    },
    /// Pure causal Nash equilibria, one profile per line.
    Equilibrium {
        game: PathBuf,
        /// Solve the induced (player, signal) game instead.
        #[arg(long)]
        induced: bool,
    },
    /// Run a simulation config and emit the per-round CSV.
    Simulate {
        config: PathBuf,
        /// Restrict to these policies (repeatable).
        #[arg(long = "policy", value_parser = clap::value_parser!(Policy))]
        policies: Vec<Policy>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicas: Option<usize>,
        /// Write the CSV here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Also write the per-policy summary CSV.
        #[arg(long, value_name = "FILE")]
        summary: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct DoArgs {
    /// Intervene: force VAR=value (repeatable).
    #[arg(long = "do", value_name = "VAR=value", value_parser = parse_pair)]
    pairs: Vec<(String, String)>,
}

impl DoArgs {
    fn intervention(&self) -> Result<Option<Intervention>> {
        if self.pairs.is_empty() {
            Ok(None)
        } else {
            Intervention::new(self.pairs.iter().cloned()).map(Some)
        }
    }
}

impl clap::builder::ValueParserFactory for Policy {
    type Parser = clap::builder::ValueParser;

    fn value_parser() -> Self::Parser {
        clap::builder::ValueParser::new(|s: &str| s.parse::<Policy>())
    }
}

fn parse_pair(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() && !v.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected VAR=value, got `{s}`")),
    }
}

/// A comma-separated weight list; a newtype so clap reads it as one value.
#[derive(Clone, Debug)]
struct Weights(Vec<f64>);

fn parse_weights(s: &str) -> std::result::Result<Weights, String> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid weight `{w}`"))
        })
        .collect::<std::result::Result<_, _>>()
        .map(Weights)
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn write_distribution(out: &mut dyn Write, d: &Distribution) -> Result<()> {
    for (label, p) in d.iter() {
        writeln!(out, "{}={}:{}", d.variable(), label, format_number(p)).map_err(stdout_error)?;
    }
    Ok(())
}

fn stdout_error(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<u8> {
    match command {
        Command::Validate { model, canonical } => {
            let raw = read_raw_model(&model)?;
            let violations = check_model(&raw);
            if !violations.is_empty() {
                for v in &violations {
                    let _ = writeln!(err, "{}: {v}", model.display());
                }
                return Ok(1);
            }
            if canonical {
                let m = validate_model(&raw)?;
                writeln!(out, "{}", m.to_raw().to_canonical_json()).map_err(stdout_error)?;
            } else {
                writeln!(out, "OK").map_err(stdout_error)?;
            }
        }
        Command::Query {
            model,
            interventions,
            given,
            target,
        } => {
            let m = load_model(&model)?;
            let evidence = Assignment::from_pairs(given)?;
            let d = match interventions.intervention()? {
                Some(iv) => conditional_interventional_distribution(&m, &iv, &evidence, &target)?,
                None => crate::intervention::observational_distribution(&m, &evidence, &target)?,
            };
            write_distribution(out, &d)?;
        }
        Command::Decide {
            model_or_family,
            problem,
            weights,
        } => {
            let problem = load_problem(&problem)?;
            let choice = if is_family_file(&model_or_family)? {
                let loaded = load_family(&model_or_family)?;
                let belief = normalize_belief(
                    loaded.family.clone(),
                    weights.as_ref().map_or(&loaded.weights, |w| &w.0),
                )?;
                savage_optimal_action(&belief, &problem)?
            } else {
                if weights.is_some() {
                    let _ = writeln!(err, "warning: --weights ignored for a single model");
                }
                pearl_optimal_action(&load_model(&model_or_family)?, &problem)?
            };
            writeln!(out, "action: {}={}", problem.action_variable, choice.action)
                .map_err(stdout_error)?;
            writeln!(
                out,
                "expected_utility: {}",
                format_number(choice.expected_utility)
            )
            .map_err(stdout_error)?;
        }
        Command::Update {
            family,
            weights,
            interventions,
            observed,
        } => {
            let loaded = load_family(&family)?;
            let belief = normalize_belief(
                loaded.family.clone(),
                weights.as_ref().map_or(&loaded.weights, |w| &w.0),
            )?;
            let Some(iv) = interventions.intervention()? else {
                let _ = writeln!(err, "error: update needs at least one --do VAR=value");
                return Ok(2);
            };
            let post = update_belief(&belief, &iv, &observed.0, &observed.1)?;
            for (member, w) in post.iter() {
                writeln!(out, "{}:{}", member.name, format_number(w)).map_err(stdout_error)?;
            }
        }
        Command::Equilibrium { game, induced } => {
            let g = load_game(&game)?;
            let lines: Vec<String> = if induced {
                let star = induced_star_game(&g)?;
                star.pure_equilibria()
                    .iter()
                    .map(|p| {
                        star.players()
                            .iter()
                            .zip(star.labels(p))
                            .map(|(sp, a)| format!("{sp}={a}"))
                            .collect::<Vec<_>>()
                            .join(",")
                    })
                    .collect()
            } else {
                enumerate_equilibria(&g)?
                    .iter()
                    .map(|p| g.describe(p))
                    .collect()
            };
            if lines.is_empty() {
                writeln!(out, "none").map_err(stdout_error)?;
            }
            for line in lines {
                writeln!(out, "{line}").map_err(stdout_error)?;
            }
        }
        Command::Simulate {
            config,
            policies,
            horizon,
            seed,
            replicas,
            out: out_path,
            summary,
        } => {
            let mut sim = load_simulation(&config)?;
            if !policies.is_empty() {
                let template = sim.configs[0].clone();
                sim.configs = policies
                    .iter()
                    .map(|&policy| crate::sim::EpisodeConfig {
                        policy,
                        ..template.clone()
                    })
                    .collect();
            }
            for c in &mut sim.configs {
                if let Some(h) = horizon {
                    c.horizon = h;
                }
                if let Some(s) = seed {
                    c.seed = s;
                }
            }
            let report = compare_policies(&sim.configs, replicas.unwrap_or(sim.replicas))?;
            match out_path {
                Some(path) => {
                    let file = File::create(&path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    report.write_csv(BufWriter::new(file))?;
                }
                None => report.write_csv(&mut *out)?,
            }
            if let Some(path) = summary {
                let file = File::create(&path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                report.write_summary_csv(BufWriter::new(file))?;
            }
        }
    }
    Ok(0)
}
