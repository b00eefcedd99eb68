use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use l1_active::cli::{
    cmd_experiment, cmd_gen, cmd_solve, cmd_weights, exit_code, SolveMode, SolveOptions,
    WeightsKindArg,
};
use l1_active::harness::{InstanceSpec, ReductionSpec};
use l1_active::instances::{OutlierConfig, ReductionConstants};
use l1_active::lewis::Regime;

#[derive(Parser)]
#[command(name = "l1-active", version, about = "Active l1 regression by Lewis-weight sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lewis weights or leverage scores of a CSV matrix.
    Weights {
        x: PathBuf,
        #[arg(long, value_enum, default_value = "lewis")]
        kind: KindArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve a LAD problem on all rows or on a sample.
    Solve {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, value_enum, default_value = "constant")]
        regime: RegimeArg,
        /// Number of draws; defaults to the recommended budget.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo experiment described by a JSON spec.
    Experiment {
        spec: PathBuf,
        /// Report path (overrides the spec); the curve is written as .csv next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an instance as X.csv, y.txt and instance.json.
    Gen(GenArgs),
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    d: usize,
    #[arg(long, default_value_t = 1e6)]
    magnitude: f64,
    #[arg(long, default_value_t = 1)]
    outliers: usize,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Scale of the isolated row (isolated family).
    #[arg(long, default_value_t = 1.0)]
    isolated_scale: f64,
    #[arg(long, default_value_t = 0.2)]
    bias: f64,
    /// Two-coin sign.
    #[arg(long)]
    negative: bool,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    reduction_eps: f64,
    #[arg(long, default_value_t = 0.1)]
    reduction_delta: f64,
    /// Use the smaller sample-count constants.
    #[arg(long)]
    statement_constants: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Lewis,
    Leverage,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    SketchKnownY,
    Active,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Constant,
    High,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Outlier,
    Isolated,
    BiasedHypercube,
    TwoCoin,
    HiddenCoordinate,
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn instance_spec(g: &GenArgs) -> InstanceSpec {
    let reduction = ReductionSpec {
        reduction_eps: g.reduction_eps,
        reduction_delta: g.reduction_delta,
        constants: if g.statement_constants {
            ReductionConstants::Statement
        } else {
            ReductionConstants::Proof
        },
    };
    let outlier = OutlierConfig {
        outliers: g.outliers,
        noise_scale: g.noise,
        ..OutlierConfig::new(g.n, g.d, g.magnitude)
    };
    match g.family {
        FamilyArg::Outlier => InstanceSpec::Outlier(outlier),
        FamilyArg::Isolated => InstanceSpec::Outlier(OutlierConfig {
            isolated_scale: Some(g.isolated_scale),
            ..outlier
        }),
        FamilyArg::BiasedHypercube => InstanceSpec::BiasedHypercube {
            bias: g.bias,
            beta_star: None,
            d: Some(g.d),
            reduction,
        },
        FamilyArg::TwoCoin => InstanceSpec::TwoCoin {
            d: g.d,
            bias: g.bias,
            positive: !g.negative,
            reduction,
        },
        FamilyArg::HiddenCoordinate => InstanceSpec::HiddenCoordinate {
            d: g.d,
            hidden: g.hidden,
            reduction,
        },
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Weights { x, kind, tol, out } => {
            let kind = match kind {
                KindArg::Lewis => WeightsKindArg::Lewis,
                KindArg::Leverage => WeightsKindArg::Leverage,
            };
            emit(&cmd_weights(&x, kind, tol)?, out.as_deref())
        }
        Command::Solve {
            x,
            y,
            mode,
            eps,
            delta,
            regime,
            budget,
            seed,
            out,
        } => {
            let opts = SolveOptions {
                mode: match mode {
                    ModeArg::Full => SolveMode::Full,
                    ModeArg::SketchKnownY => SolveMode::SketchKnownY,
                    ModeArg::Active => SolveMode::Active,
                },
                eps,
                delta,
                regime: match regime {
                    RegimeArg::Constant => Regime::ConstantProb,
                    RegimeArg::High => Regime::HighProb,
                },
                budget,
                seed,
            };
            let sol = cmd_solve(&x, &y, &opts)?;
            emit(&serde_json::to_string_pretty(&sol)?, out.as_deref())
        }
        Command::Experiment { spec, out } => {
            let report = cmd_experiment(&spec, out.as_deref())?;
            for a in &report.aggregates {
                eprintln!(
                    "{:<22} N={:<6} success {:.3} [{:.3}, {:.3}]",
                    a.method.name(),
                    a.budget,
                    a.success_rate,
                    a.ci_low,
                    a.ci_high
                );
            }
            if out.is_none() && report.spec.output.is_none() {
                println!("{}", report.to_json()?);
            }
            Ok(())
        }
        Command::Gen(g) => {
            let meta = cmd_gen(&instance_spec(&g), g.seed, &g.out_dir)?;
            eprintln!(
                "wrote {}x{} instance to {} (opt {})",
                meta.n,
                meta.d,
                g.out_dir.display(),
                meta.opt
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<l1_active::Error>()
                .map(exit_code)
                .unwrap_or(2);
            ExitCode::from(code as u8)
        }
    }
}
