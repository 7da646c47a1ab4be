use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qaoa_lab::experiment::{
    cross_product, emit, landscape, landscape_csv, registry, run_configs, run_experiment,
    standard_suite, ExperimentConfig, InstanceSelector, OptimizerSpec, OutputFormat,
};
use qaoa_lab::{AnsatzModel, Backend, EsConfig, IlsConfig};

#[derive(Parser)]
#[command(
    name = "qaoa-lab",
    version,
    about = "QAOA parameter-search experiments on small Max-Cut and Ising instances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize one instance with one model and one optimizer
    Run(RunArgs),
    /// Run the standard suite rows, or a custom cross product
    Suite(SuiteArgs),
    /// Print the brute-force optimum and every optimal assignment
    Oracle {
        #[arg(long)]
        instance: String,
    },
    /// Dump the 2p EEV over a γ × β grid as CSV
    Landscape {
        #[arg(long)]
        instance: String,
        #[arg(long, default_value_t = 64)]
        points_per_dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerKind {
    Es,
    Ils,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Table => OutputFormat::Table,
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    /// Grid resolution for exhaustive search (default depends on the model)
    #[arg(long)]
    points_per_dim: Option<usize>,
    /// ILS seed; also seeds the sampled backend
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Optimize on shot-sampled EEV instead of the exact value
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    outer_iterations: Option<usize>,
    #[arg(long)]
    shc_steps: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SearchArgs {
    fn optimizer(&self, kind: OptimizerKind) -> Result<OptimizerSpec> {
        Ok(match kind {
            OptimizerKind::Es => {
                if self.points_per_dim == Some(0) {
                    bail!("--points-per-dim must be at least 1");
                }
                OptimizerSpec::Es(self.points_per_dim.map(EsConfig::new))
            }
            OptimizerKind::Ils => {
                let d = IlsConfig::default();
                OptimizerSpec::Ils(IlsConfig {
                    restarts: self.restarts.unwrap_or(d.restarts),
                    outer_iterations: self.outer_iterations.unwrap_or(d.outer_iterations),
                    shc_steps_per_iteration: self.shc_steps.unwrap_or(d.shc_steps_per_iteration),
                    seed: self.seed,
                    ..d
                })
            }
        })
    }

    fn backend(&self) -> Result<Backend> {
        match self.shots {
            None => Ok(Backend::Exact),
            Some(0) => bail!("--shots must be at least 1"),
            Some(shots) => Ok(Backend::Sampled {
                shots,
                seed: self.seed,
            }),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Registry name (e.g. maxcut-4-cyclic) or path to an instance file
    #[arg(long)]
    instance: String,
    #[arg(long, default_value = "2p")]
    model: AnsatzModel,
    #[arg(long, value_enum, default_value_t = OptimizerKind::Es)]
    optimizer: OptimizerKind,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct SuiteArgs {
    /// Restrict to these instances (cross product with --model)
    #[arg(long)]
    instance: Vec<String>,
    #[arg(long)]
    model: Vec<AnsatzModel>,
    /// Optimizers to run; both when omitted
    #[arg(long, value_enum)]
    optimizer: Vec<OptimizerKind>,
    #[command(flatten)]
    search: SearchArgs,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = ExperimentConfig {
                instance: InstanceSelector::parse(&args.instance),
                model: args.model,
                optimizer: args.search.optimizer(args.optimizer)?,
                backend: args.search.backend()?,
            };
            let row = run_experiment(&cfg)
                .with_context(|| format!("experiment on `{}` failed", args.instance))?;
            emit(
                &[row],
                &[],
                args.search.format.into(),
                args.search.out.as_deref(),
            )?;
        }
        Command::Suite(args) => {
            let kinds = if args.optimizer.is_empty() {
                vec![OptimizerKind::Es, OptimizerKind::Ils]
            } else {
                args.optimizer.clone()
            };
            let optimizers = kinds
                .iter()
                .map(|&k| args.search.optimizer(k))
                .collect::<Result<Vec<_>>>()?;
            let backend = args.search.backend()?;
            let report = if args.instance.is_empty() && args.model.is_empty() {
                let configs: Vec<ExperimentConfig> = optimizers
                    .iter()
                    .flat_map(|&opt| standard_suite(opt))
                    .map(|cfg| ExperimentConfig { backend, ..cfg })
                    .collect();
                run_configs(&configs)?
            } else {
                let instances: Vec<InstanceSelector> = if args.instance.is_empty() {
                    registry()?
                        .iter()
                        .map(|e| InstanceSelector::Named(e.name.to_string()))
                        .collect()
                } else {
                    args.instance
                        .iter()
                        .map(|s| InstanceSelector::parse(s))
                        .collect()
                };
                let models = if args.model.is_empty() {
                    AnsatzModel::ALL.to_vec()
                } else {
                    args.model.clone()
                };
                run_configs(&cross_product(&instances, &models, &optimizers, backend))?
            };
            emit(
                &report.rows,
                &report.averages,
                args.search.format.into(),
                args.search.out.as_deref(),
            )?;
        }
        Command::Oracle { instance } => {
            let inst = InstanceSelector::parse(&instance).resolve()?;
            let oracle = inst.oracle_optimum();
            println!("instance: {instance}");
            println!("family: {}", inst.family());
            println!("optimum: {}", oracle.value);
            println!("argopt: {}", oracle.argopt.join(" "));
        }
        Command::Landscape {
            instance,
            points_per_dim,
            out,
        } => {
            let inst = InstanceSelector::parse(&instance).resolve()?;
            let text = landscape_csv(&landscape(&inst, points_per_dim)?);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("cannot write {}", path.display()))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}
