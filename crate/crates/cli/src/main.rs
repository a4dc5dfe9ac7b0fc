use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use btom::analysis::{self, KindSelection};
use btom::inference::{BeliefPrior, EvalAt, DEFAULT_BETA, DEFAULT_HYPOTHESIS_CAP};
use btom::judgments::{self, ModelKind, RunConfig};
use btom::output::{self, OutputFormat};
use btom::planner::PlannerMode;
use btom::scenario::{load_scenario, scenario_paths, Scenario};

#[derive(Parser)]
#[command(name = "btom", version, about = "Goal and belief inference in Doors, Keys & Gems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate goals and statements at each scenario's judgment points.
    Infer(InferArgs),
    /// Correlate model outputs with human ratings.
    Correlate(CorrelateArgs),
    /// Per-step probability series for plotting.
    Series(SeriesArgs),
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    Btom,
    Heuristic,
    Nonmental,
    Omniscient,
    Ignorant,
}

#[derive(Copy, Clone, ValueEnum)]
enum PriorArg {
    /// Uniform over statements (normalized likelihood).
    Statements,
    /// Uniform over initial states (posterior expectation).
    States,
}

#[derive(Copy, Clone, ValueEnum)]
enum EvalAtArg {
    Initial,
    Current,
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum KindArg {
    Goal,
    Statement,
    Both,
}

#[derive(Args)]
struct ModelOpts {
    /// Scenario file or directory of `*.toml` scenarios.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value = "btom")]
    model: ModelArg,
    #[arg(long, value_enum, default_value = "statements")]
    prior: PriorArg,
    #[arg(long, default_value_t = DEFAULT_BETA)]
    beta: f64,
    /// Rationality assumed by the heuristic observer (defaults to --beta).
    #[arg(long)]
    heuristic_beta: Option<f64>,
    #[arg(long, value_enum, default_value = "initial")]
    eval_at: EvalAtArg,
    /// Use bounded real-time search with this many expansions per call
    /// instead of exact planning.
    #[arg(long)]
    rths_budget: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_HYPOTHESIS_CAP)]
    max_hypotheses: usize,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    opts: ModelOpts,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct CorrelateArgs {
    /// CSV written by `btom infer`.
    #[arg(long)]
    model_out: PathBuf,
    /// Human ratings: scenario_id,judgment_step,kind,target_id,participant_id,rating
    #[arg(long)]
    human: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    kind: KindArg,
    #[arg(long, default_value_t = analysis::DEFAULT_BOOTSTRAP)]
    boot: usize,
    /// Bootstrap seed; defaults to $BTOM_SEED, then 17.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    opts: ModelOpts,
    /// Output CSV for a single scenario, or a directory receiving
    /// `<scenario id>.csv` per scenario.
    #[arg(long)]
    out: PathBuf,
}

impl ModelOpts {
    fn config(&self) -> Result<RunConfig> {
        if !(self.beta.is_finite() && self.beta > 0.0) {
            bail!("--beta must be a positive number");
        }
        Ok(RunConfig {
            model: match self.model {
                ModelArg::Btom => ModelKind::Btom,
                ModelArg::Heuristic => ModelKind::Heuristic,
                ModelArg::Nonmental => ModelKind::Nonmental,
                ModelArg::Omniscient => ModelKind::Omniscient,
                ModelArg::Ignorant => ModelKind::Ignorant,
            },
            prior: match self.prior {
                PriorArg::Statements => BeliefPrior::UniformStatement,
                PriorArg::States => BeliefPrior::UniformStates,
            },
            beta: self.beta,
            heuristic_beta: self.heuristic_beta,
            eval_at: match self.eval_at {
                EvalAtArg::Initial => EvalAt::Initial,
                EvalAtArg::Current => EvalAt::Current,
            },
            planner_mode: match self.rths_budget {
                None => PlannerMode::Exact,
                Some(expansion_budget) => PlannerMode::RealTime { expansion_budget },
            },
            cap: self.max_hypotheses,
        })
    }

    fn scenarios(&self) -> Result<Vec<Scenario>> {
        let paths = scenario_paths(&self.scenario)?;
        if paths.is_empty() {
            bail!("no scenario files found in {}", self.scenario.display());
        }
        paths
            .iter()
            .map(|p| load_scenario(p).map_err(anyhow::Error::from))
            .collect()
    }
}

fn infer(args: &InferArgs) -> Result<()> {
    let config = args.opts.config()?;
    let mut outputs = Vec::new();
    for s in args.opts.scenarios()? {
        let out = judgments::run_scenario(&s, &config)
            .with_context(|| format!("scenario '{}'", s.id))?;
        outputs.extend(out);
    }
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    };
    output::write_outputs(&outputs, &args.out, format)?;
    Ok(())
}

fn series(args: &SeriesArgs) -> Result<()> {
    let config = args.opts.config()?;
    let scenarios = args.opts.scenarios()?;
    let to_dir = scenarios.len() > 1 || args.out.is_dir();
    if to_dir {
        std::fs::create_dir_all(&args.out)
            .with_context(|| format!("creating {}", args.out.display()))?;
    }
    for s in &scenarios {
        let rows = judgments::run_series(s, &config)
            .with_context(|| format!("scenario '{}'", s.id))?;
        let path = if to_dir {
            args.out.join(format!("{}.csv", s.id))
        } else {
            args.out.clone()
        };
        write(&path, &judgments::series_csv(s, &config, &rows))?;
    }
    Ok(())
}

fn correlate(args: &CorrelateArgs) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => match std::env::var("BTOM_SEED") {
            Ok(v) => v
                .trim()
                .parse()
                .with_context(|| format!("BTOM_SEED='{v}' is not an unsigned integer"))?,
            Err(_) => analysis::DEFAULT_SEED,
        },
    };
    let model = output::read_output_rows(&args.model_out)?;
    let human = analysis::read_human_ratings(&args.human)?;
    let kinds = match args.kind {
        KindArg::Goal => KindSelection::Goal,
        KindArg::Statement => KindSelection::Statement,
        KindArg::Both => KindSelection::Both,
    };
    let report = analysis::correlation_report(&model, &human, kinds, args.boot, seed)?;
    if report.is_empty() {
        bail!("no model rows of the selected kind match the human ratings");
    }
    print!("{}", analysis::format_report(&report));
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Infer(a) => infer(a),
        Command::Correlate(a) => correlate(a),
        Command::Series(a) => series(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
