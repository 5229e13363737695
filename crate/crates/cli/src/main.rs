//! `paratwin`: simulate target systems, train a parameter-aware twin, run it
//! at shifted parameters, scan bifurcations and locate transitions.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical
//! failure (divergence, singular fit).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use paratwin::config::{parse_grid, RunConfig};
use paratwin::diagram::BifurcationDiagram;
use paratwin::dynsys::{integrate, oracle_bifurcation_scan, Simulator, SystemSpec, Trajectory};
use paratwin::files::write_atomic;
use paratwin::twin::{
    assemble_training_data, detect_and_refine, detect_transition, predict_at_parameter, scan_bifurcation, train_twin, TrainedTwin,
    TransitionInput,
};
use paratwin::Error;
use serde::Serialize;

/// Output directory used when neither `--out` nor `[io] out` is given.
const OUT_ENV: &str = "PARATWIN_OUT";
const DEFAULT_OUT: &str = "paratwin-out";

#[derive(Parser)]
#[command(name = "paratwin", version, about = "Parameter-aware reservoir-computing digital twins")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides `[io] seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides `[io] out` and $PARATWIN_OUT).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Configuration override, `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured system and write its trajectory.
    Simulate {
        /// Bifurcation parameter (overrides `[system] param`).
        #[arg(long, allow_hyphen_values = true)]
        param: Option<f64>,
        /// Recorded span in time units (overrides `[system] duration`).
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Collect training data at the configured parameters and fit a twin.
    Train,
    /// Run a trained twin at the present parameter plus `--dp`.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dp: f64,
        #[arg(long)]
        horizon: Option<usize>,
        /// Warm-up series at the present parameter; defaults to `warm.csv`
        /// next to the model.
        #[arg(long)]
        warm: Option<PathBuf>,
    },
    /// Bifurcation diagram from the twin, or from direct simulation with `--oracle`.
    Scan {
        #[arg(long, required_unless_present = "oracle")]
        model: Option<PathBuf>,
        /// `lo:hi:n` (overrides `[twin] grid`).
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        warm: Option<PathBuf>,
    },
    /// Locate a transition in a diagram CSV or a trajectory CSV.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Twin used to refine a diagram bracket by bisection.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Bisection steps (overrides `[twin] bisection`).
        #[arg(long)]
        bisect: Option<usize>,
        #[arg(long)]
        warm: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}

struct Ctx {
    config: RunConfig,
    out: PathBuf,
}

impl Ctx {
    fn new(common: &Common) -> Outcome<Self> {
        let text = match &common.config {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        let mut config = RunConfig::parse(&text, &common.overrides)?;
        if let Some(seed) = common.seed {
            config.io.seed = Some(seed);
        }
        let out = common
            .out
            .clone()
            .or_else(|| config.io.out.clone())
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        config.io.out = Some(out.clone());
        Ok(Ctx { config, out })
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Outcome<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| Failure::Usage(format!("{}: {e}", self.out.display())))?;
        let path = self.out.join(name);
        write_atomic(&path, bytes)?;
        Ok(path)
    }

    /// Writes the effective configuration. Without a system name only the
    /// given keys can be echoed.
    fn echo_config(&self) -> Outcome {
        let text = match self.config.resolve() {
            Ok(full) => full.to_toml(),
            Err(_) => self.config.to_toml(),
        };
        self.write("config.toml", text.as_bytes())?;
        Ok(())
    }

    fn seed(&self) -> Outcome<u64> {
        Ok(self.config.seed()?)
    }
}

fn run(cli: Cli) -> Outcome {
    let ctx = Ctx::new(&cli.common)?;
    match cli.command {
        Command::Simulate { param, duration } => simulate(ctx, param, duration),
        Command::Train => train(ctx),
        Command::Predict { model, dp, horizon, warm } => predict(ctx, &model, dp, horizon, warm),
        Command::Scan { model, grid, oracle, warm } => scan(ctx, model.as_deref(), grid, oracle, warm),
        Command::Detect { input, model, bisect, warm } => detect(ctx, &input, model.as_deref(), bisect, warm),
    }
}

fn simulate(mut ctx: Ctx, param: Option<f64>, duration: Option<f64>) -> Outcome {
    if param.is_some() {
        ctx.config.system.param = param;
    }
    if duration.is_some() {
        ctx.config.system.duration = duration;
    }
    let spec = ctx.config.system_spec()?;
    let p = spec.model.parameter();
    let initial = ctx.config.initial(&spec);
    let transient = ctx.config.system.transient.unwrap_or(0.0);
    let start = if transient > 0.0 {
        let mut sim = Simulator::new(&spec, &initial, p, spec.step)?;
        let steps = (transient / spec.sampling_interval).round() as usize;
        sim.skip(steps)?;
        sim.state().to_vec()
    } else {
        initial
    };
    let traj = integrate(&spec, &start, p, ctx.config.duration(), spec.step)?;
    let path = ctx.write("trajectory.csv", traj.to_csv().as_bytes())?;
    ctx.echo_config()?;
    println!("wrote {} ({} samples at {} = {p})", path.display(), traj.len(), spec.model.parameter_name());
    Ok(())
}

#[derive(Serialize)]
struct TrainingReport<'a> {
    system: &'a str,
    parameter: &'a str,
    train_params: &'a [f64],
    present_param: f64,
    samples_per_param: usize,
    sampling_interval: f64,
    /// RMS one-step error in normalized units.
    residual: f64,
    warnings: Vec<String>,
    reservoir: &'a paratwin::reservoir::ReservoirConfig,
}

fn train(ctx: Ctx) -> Outcome {
    let seed = ctx.seed()?;
    let spec = ctx.config.system_spec()?;
    let plan = ctx.config.training_plan(&spec)?;
    let res = ctx.config.reservoir_config(&spec, seed)?;
    let mut data = assemble_training_data(&plan)?;
    let twin = train_twin(&data, &res)?;
    // The warm series is the observation at the present parameter; keep only
    // what a rollout consumes.
    let present = match data.trajectories.iter().position(|t| t.param == plan.present_param) {
        Some(i) => data.trajectories.swap_remove(i),
        None => simulate_present(&plan.system, &ctx.config.initial(&spec), plan.present_param, plan.transient, res.warmup)?,
    };
    let warm = present.skip(present.len().saturating_sub(res.warmup));
    let model = ctx.out.join("model.ptw");
    std::fs::create_dir_all(&ctx.out).map_err(|e| Failure::Usage(format!("{}: {e}", ctx.out.display())))?;
    twin.save(&model)?;
    ctx.write("warm.csv", warm.to_csv().as_bytes())?;
    let report = TrainingReport {
        system: spec.model.name(),
        parameter: spec.model.parameter_name(),
        train_params: &twin.train_params,
        present_param: plan.present_param,
        samples_per_param: plan.samples_per_param,
        sampling_interval: spec.sampling_interval,
        residual: twin.residual,
        warnings: res.warnings(),
        reservoir: &twin.config,
    };
    ctx.write("training-report.toml", toml::to_string(&report).expect("plain data").as_bytes())?;
    ctx.echo_config()?;
    println!(
        "trained on {} = {:?}; residual {:.3e}; wrote {}",
        spec.model.parameter_name(),
        twin.train_params,
        twin.residual,
        model.display()
    );
    Ok(())
}

fn simulate_present(spec: &SystemSpec, initial: &[f64], p: f64, transient: f64, samples: usize) -> Outcome<Trajectory> {
    let mut sim = Simulator::new(spec, initial, p, spec.step)?;
    sim.skip((transient / spec.sampling_interval).round() as usize)?;
    Ok(sim.record(samples.max(1))?)
}

fn load_model(ctx: &Ctx, path: &Path) -> Outcome<TrainedTwin> {
    let twin = TrainedTwin::load(path)?;
    let seed = ctx.seed()?;
    if twin.config.seed != seed {
        return Err(Failure::Usage(format!("{} was trained with seed {}, not {seed}", path.display(), twin.config.seed)));
    }
    Ok(twin)
}

fn load_warm(model: &Path, warm: Option<PathBuf>) -> Outcome<Trajectory> {
    let path = warm.unwrap_or_else(|| model.with_file_name("warm.csv"));
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(Trajectory::from_csv(&text)?)
}

#[derive(Serialize)]
struct ForecastSummary<'a> {
    status: String,
    p: f64,
    dp: f64,
    present_param: f64,
    steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

fn predict(ctx: Ctx, model: &Path, dp: f64, horizon: Option<usize>, warm: Option<PathBuf>) -> Outcome {
    let twin = load_model(&ctx, model)?;
    let warm = load_warm(model, warm)?;
    if !dp.is_finite() {
        return Err(Failure::Usage("--dp must be finite".into()));
    }
    let p = warm.param + dp;
    let horizon = horizon.unwrap_or_else(|| ctx.config.horizon());
    let f = predict_at_parameter(&twin, p, &warm, horizon)?;
    ctx.write("forecast.csv", f.trajectory.to_csv().as_bytes())?;
    let summary = ForecastSummary {
        status: f.status.to_string(),
        p,
        dp,
        present_param: warm.param,
        steps: f.trajectory.len(),
        note: f.note.as_deref(),
    };
    ctx.write("forecast.toml", toml::to_string(&summary).expect("plain data").as_bytes())?;
    ctx.echo_config()?;
    match &f.note {
        Some(n) => println!("status={} p={p} steps={} note=\"{n}\"", f.status, f.trajectory.len()),
        None => println!("status={} p={p} steps={}", f.status, f.trajectory.len()),
    }
    Ok(())
}

fn scan(ctx: Ctx, model: Option<&Path>, grid: Option<String>, oracle: bool, warm: Option<PathBuf>) -> Outcome {
    ctx.seed()?;
    let twin = model.map(|m| load_model(&ctx, m)).transpose()?;
    let spec = match (&ctx.config.system.name, &twin) {
        (Some(_), _) => Some(ctx.config.system_spec()?),
        (None, Some(t)) => t.system,
        (None, None) => None,
    };
    let grid = match (grid, &ctx.config.twin.grid, spec) {
        (Some(g), _, _) => parse_grid(&g)?,
        (None, Some(g), _) => parse_grid(g)?,
        (None, None, Some(s)) => ctx.config.grid(&s)?,
        (None, None, None) => return Err(Failure::Usage("no grid: pass --grid lo:hi:n".into())),
    };
    let settings = ctx.config.scan_settings();
    let (diagram, name) = if oracle {
        let spec = spec.ok_or_else(|| Failure::Usage("--oracle needs a system ([system] name or a model that records one)".into()))?;
        (oracle_bifurcation_scan(&spec, &grid, &settings)?, "oracle-diagram.csv")
    } else {
        let twin = twin.ok_or_else(|| Failure::Usage("--model is required for a twin scan".into()))?;
        let warm = load_warm(model.expect("twin implies model"), warm)?;
        (scan_bifurcation(&twin, &grid, &warm, &settings)?, "diagram.csv")
    };
    let path = ctx.write(name, diagram.to_csv().as_bytes())?;
    ctx.echo_config()?;
    let flags: String = diagram
        .entries
        .iter()
        .map(|e| {
            if e.summary.diverged {
                'D'
            } else if e.summary.collapsed {
                'C'
            } else {
                'S'
            }
        })
        .collect();
    println!("wrote {} ({} points: {flags})", path.display(), diagram.entries.len());
    Ok(())
}

fn detect(ctx: Ctx, input: &Path, model: Option<&Path>, bisect: Option<usize>, warm: Option<PathBuf>) -> Outcome {
    let text = std::fs::read_to_string(input).map_err(|e| Failure::Usage(format!("{}: {e}", input.display())))?;
    let twin = model.map(TrainedTwin::load).transpose()?;
    let header = text.lines().next().unwrap_or_default();
    let report = if header.starts_with("source,") {
        let diagram = BifurcationDiagram::from_csv(&text)?;
        let steps = bisect.or(ctx.config.twin.bisection).unwrap_or(0);
        match (&twin, steps) {
            (Some(t), n) if n > 0 => {
                let warm = load_warm(model.expect("twin implies model"), warm)?;
                detect_and_refine(t, &diagram, &warm, &ctx.config.scan_settings(), n)?
            }
            (None, n) if n > 0 => return Err(Failure::Usage("bisection needs --model".into())),
            _ => detect_transition(TransitionInput::Diagram(&diagram)),
        }
    } else {
        let traj = Trajectory::from_csv(&text)?;
        let spec = if ctx.config.system.name.is_some() { Some(ctx.config.system_spec()?) } else { twin.as_ref().and_then(|t| t.system) };
        let (kind, criterion, note) = match spec {
            Some(s) if s.dimension() == traj.dim() => (s.kind(), s.model.default_collapse(), None),
            Some(s) => return Err(Error::DimensionMismatch { expected: s.dimension(), got: traj.dim() }.into()),
            None => {
                let guess = match traj.dim() {
                    2 => SystemSpec::ikeda(Default::default()),
                    3 => SystemSpec::food_chain(Default::default()),
                    d => return Err(Failure::Usage(format!("cannot infer a collapse rule for {d} variables; set [system] name"))),
                };
                (
                    guess.kind(),
                    guess.model.default_collapse(),
                    Some(format!("collapse rule of {} assumed from the column count", guess.model.name())),
                )
            }
        };
        let mut r = detect_transition(TransitionInput::Trajectory { trajectory: &traj, kind, criterion });
        r.notes.extend(note);
        r
    };
    ctx.write("report.csv", report.to_csv().as_bytes())?;
    ctx.write("report.toml", report.to_text().as_bytes())?;
    ctx.echo_config()?;
    let bracket = report.bracket.map(|(a, b)| format!(" bracket=[{a}, {b}]")).unwrap_or_default();
    let onset = report.onset.map(|t| format!(" onset={t}")).unwrap_or_default();
    println!("kind={}{bracket}{onset}", report.kind.as_str());
    for n in &report.notes {
        println!("note: {n}");
    }
    Ok(())
}
