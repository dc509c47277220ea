//! Command-line front end: scenario loading, command dispatch and output.
//!
//! Exit codes: 0 success, 2 unreadable or schema-violating scenario, 3
//! semantically invalid scenario or flags, 4 bad trajectory text, 5 planner
//! cap exceeded, 1 anything else. Data goes to `out`, diagnostics to `err`.

mod notation;
mod output;
mod scenario;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

pub use notation::{parse_actions, render_actions, ActionParts};
pub use output::{fmt_num, fmt_trimmed, Format, Table};
pub use scenario::{load_scenario, parse_document, parse_gamma_sigma, resolve, Scenario, ScenarioDoc, SCHEMA_VERSION};

use crate::aggregation::aggregate_trajectory_value;
use crate::error::Error;
use crate::intertemporal::{simulate_generations, simulate_with, IntertemporalConfig, DEFAULT_GENERATIONS};
use crate::planning::{
    impossibility_check, plan_expectimax, plan_prefix_tail, ImpossibilityInstance, PlanConfig, Planner, Verdict,
};
use crate::trajectory::{TrajectoryParts, TrajectorySpec};

/// A failure with its process exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    pub fn schema(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    pub fn semantic(message: impl Into<String>) -> Self {
        Self::new(3, message)
    }

    pub fn semantic_from(e: Error) -> Self {
        Self::semantic(e.to_string())
    }

    pub fn token(message: impl Into<String>) -> Self {
        Self::new(4, message)
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self::new(1, message)
    }

    /// Library errors raised while running a command.
    pub fn from_run(e: Error) -> Self {
        match e {
            Error::CapExceeded { .. } => Self::new(5, e.to_string()),
            Error::StochasticDynamics | Error::InvalidArgument(_) | Error::InvalidInstance(_) => {
                Self::semantic(e.to_string())
            }
            _ => Self::other(e.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(name = "timepref", version, about = "Plan and value under several discount rates at once")]
struct Cli {
    /// Decimals in numeric output.
    #[arg(long, global = true, default_value_t = 3)]
    digits: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load and check a scenario.
    Validate { scenario: PathBuf },
    /// Per-objective and aggregate returns of one trajectory.
    Value {
        scenario: PathBuf,
        /// e.g. `p,w*` or `p5,(w9,p)*`.
        #[arg(long)]
        trajectory: String,
    },
    /// Optimal plan from the start state.
    Plan {
        scenario: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        /// Score with one aggregate discount instead of per-objective ones.
        #[arg(long)]
        markovian: bool,
    },
    /// Replan every step and report the realized run.
    Simulate {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GENERATIONS)]
        steps: usize,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Historical-mixing simulation for several mixing rates.
    SweepEta {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.3, 0.5, 0.9, 0.95, 0.98, 1.0])]
        values: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_GENERATIONS)]
        steps: usize,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Whether one aggregate discount can rank the two-objective lotteries.
    Impossibility {
        #[arg(long)]
        gamma1: f64,
        #[arg(long)]
        gamma2: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Plan with the current generation's weights every step.
    Myopic,
    /// Carry the consistent weight update forward.
    Consistent,
    Historical,
    Nstep,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(_) => 1,
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let digits = cli.digits;
    match &cli.command {
        Command::Validate { scenario } => {
            let sc = load_scenario(scenario)?;
            let lifted = match sc.lift {
                Some(_) => format!(" ({} lifted)", sc.objectives.n_states()),
                None => String::new(),
            };
            Ok(format!(
                "ok: {} states{lifted}, {} actions, objectives {}\n",
                sc.state_names.len(),
                sc.action_names.len(),
                sc.objective_names().join(", ")
            ))
        }
        Command::Value { scenario, trajectory } => {
            let sc = load_scenario(scenario)?;
            let (prefix, cycle) = parse_actions(trajectory, &sc.action_names)?;
            let traj = TrajectorySpec::from_actions(sc.objectives.dynamics(), sc.start, &prefix, &cycle)
                .map_err(CliError::from_run)?;
            let returns = sc.objectives.returns(&traj).map_err(CliError::from_run)?;
            let total = aggregate_trajectory_value(&sc.objectives, &sc.weights, &traj).map_err(CliError::from_run)?;
            let mut table = Table::new(&["objective", "return"]);
            for (name, v) in sc.objective_names().into_iter().zip(&returns) {
                table.push(vec![name.to_string(), fmt_num(*v, digits)]);
            }
            table.push(vec!["aggregate".into(), fmt_num(total, digits)]);
            table.render(cli.format)
        }
        Command::Plan { scenario, horizon, markovian } => {
            let sc = load_scenario(scenario)?;
            let cfg = with_horizon(&sc.plan, *horizon);
            if !sc.objectives.dynamics().is_deterministic() {
                if *markovian {
                    return Err(CliError::semantic("--markovian needs deterministic dynamics"));
                }
                let tree = plan_expectimax(&sc.objectives, &sc.weights, sc.start, &cfg).map_err(CliError::from_run)?;
                let first = &sc.action_names[tree.tree.first_action(sc.start)];
                let mut table = Table::new(&["first_action", "depth", "value"]);
                table.push(vec![first.clone(), tree.tree.depth().to_string(), fmt_num(tree.value, digits)]);
                return table.render(cli.format);
            }
            let plan = plan_prefix_tail(&sc.objectives, &sc.weights, sc.start, &cfg, !*markovian)
                .map_err(CliError::from_run)?;
            let value = aggregate_trajectory_value(&sc.objectives, &sc.weights, &plan.trajectory)
                .map_err(CliError::from_run)?;
            let mut table = Table::new(&["trajectory", "value"]);
            table.push(vec![render(&sc, &plan.trajectory), fmt_num(value, digits)]);
            table.render(cli.format)
        }
        Command::Simulate { scenario, mode, eta, n, steps, horizon } => {
            let sc = load_scenario(scenario)?;
            let cfg = with_horizon(&sc.plan, *horizon);
            let (rule, label) = simulation_rule(&sc, *mode, *eta, *n)?;
            rule.validate().map_err(|e| CliError::semantic(e.to_string()))?;
            let run = simulate_generations(&sc.objectives, &sc.schedule, rule, sc.gamma_sigma, *steps, &cfg, sc.start)
                .map_err(CliError::from_run)?;
            let mut table = Table::new(&["mode", "trajectory", "v1"]);
            table.push(vec![label, render(&sc, &run.trajectory), fmt_num(run.v1, digits)]);
            Ok(metadata(cli.format, &cfg, *steps) + &table.render(cli.format)?)
        }
        Command::SweepEta { scenario, values, steps, horizon } => {
            let sc = load_scenario(scenario)?;
            let cfg = with_horizon(&sc.plan, *horizon);
            for &eta in values {
                IntertemporalConfig::Historical(eta).validate().map_err(|e| CliError::semantic(e.to_string()))?;
            }
            if *steps == 0 {
                return Err(CliError::semantic("--steps must be at least 1"));
            }
            let planner = Planner::new(&sc.objectives, &cfg).map_err(CliError::from_run)?;
            let runs = values
                .par_iter()
                .map(|&eta| {
                    simulate_with(&planner, &sc.schedule, IntertemporalConfig::Historical(eta), *steps, sc.start)
                })
                .collect::<Result<Vec<_>, Error>>()
                .map_err(CliError::from_run)?;
            let mut table = Table::new(&["eta", "trajectory", "v1"]);
            for (eta, run) in values.iter().zip(&runs) {
                table.push(vec![fmt_trimmed(*eta, digits), render(&sc, &run.trajectory), fmt_num(run.v1, digits)]);
            }
            Ok(metadata(cli.format, &cfg, *steps) + &table.render(cli.format)?)
        }
        Command::Impossibility { gamma1, gamma2 } => {
            let inst = ImpossibilityInstance::with_discounts(*gamma1, *gamma2).map_err(CliError::from_run)?;
            let report = impossibility_check(&inst).map_err(CliError::from_run)?;
            let num = |q: &num_rational::BigRational| fmt_trimmed(rational_to_f64(q), digits);
            match cli.format {
                Format::Table => Ok(match &report.verdict {
                    Verdict::Consistent { gamma_sigma } => format!("consistent, gamma_sigma={}\n", num(gamma_sigma)),
                    Verdict::Contradiction { at_beta1, at_beta2 } => format!(
                        "contradiction, gamma_sigma(beta1={})={} but gamma_sigma(beta2={})={}\n",
                        num(&report.beta1),
                        num(at_beta1),
                        num(&report.beta2),
                        num(at_beta2)
                    ),
                }),
                Format::Csv => {
                    let mut table = Table::new(&["verdict", "gamma_sigma_beta1", "gamma_sigma_beta2"]);
                    let row = match &report.verdict {
                        Verdict::Consistent { gamma_sigma } => {
                            vec!["consistent".into(), num(gamma_sigma), num(gamma_sigma)]
                        }
                        Verdict::Contradiction { at_beta1, at_beta2 } => {
                            vec!["contradiction".into(), num(at_beta1), num(at_beta2)]
                        }
                    };
                    table.push(row);
                    table.render(Format::Csv)
                }
            }
        }
    }
}

fn with_horizon(cfg: &PlanConfig, horizon: Option<usize>) -> PlanConfig {
    PlanConfig { horizon: horizon.unwrap_or(cfg.horizon), ..cfg.clone() }
}

/// Update rule for `simulate`; flags override the scenario's own settings.
fn simulation_rule(
    sc: &Scenario,
    mode: Mode,
    eta: Option<f64>,
    n: Option<usize>,
) -> Result<(IntertemporalConfig, String), CliError> {
    Ok(match mode {
        Mode::Myopic => (IntertemporalConfig::Historical(0.0), "myopic".into()),
        Mode::Consistent => (IntertemporalConfig::None, "consistent".into()),
        Mode::Historical => {
            let eta = match (eta, sc.intertemporal) {
                (Some(e), _) => e,
                (None, IntertemporalConfig::Historical(e)) => e,
                _ => return Err(CliError::semantic("historical mode needs --eta or a historical scenario")),
            };
            (IntertemporalConfig::Historical(eta), format!("historical:{eta}"))
        }
        Mode::Nstep => {
            let n = match (n, sc.intertemporal) {
                (Some(n), _) => n,
                (None, IntertemporalConfig::NStep(n)) => n,
                _ => return Err(CliError::semantic("nstep mode needs --n or an nstep scenario")),
            };
            (IntertemporalConfig::NStep(n), format!("nstep:{n}"))
        }
    })
}

fn render(sc: &Scenario, traj: &TrajectorySpec) -> String {
    let parts = TrajectoryParts::actions_of(traj);
    render_actions(&parts.prefix, &parts.cycle, &sc.action_names)
}

fn metadata(format: Format, cfg: &PlanConfig, steps: usize) -> String {
    match format {
        Format::Table => format!(
            "# gamma_sigma={} horizon={} max_cycle_period={} steps={steps}\n",
            cfg.gamma_sigma.label(),
            cfg.horizon,
            cfg.max_cycle_period
        ),
        Format::Csv => String::new(),
    }
}

fn rational_to_f64(q: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}
