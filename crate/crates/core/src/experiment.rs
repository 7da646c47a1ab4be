//! Built-in problem instances, single-run and batch experiment drivers, and
//! CSV / console-table output.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::engine::{opt_gap, AnsatzModel, QaoaEvaluator};
use crate::error::{Error, Result};
use crate::optimize::{
    exhaustive_search, iterated_local_search, Backend, EevObjective, EsConfig, IlsConfig, OptResult,
};
use crate::problem::{Family, ProblemInstance, Topology, TopologyKind};

pub const CSV_HEADER: &str = "instance,model,optimizer,eev,optimum,gap,evaluations,seed,params";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedInstance {
    pub name: &'static str,
    pub instance: ProblemInstance,
}

/// The six shipped instances. Ising runs use J = 1 and per-node fields chosen
/// so that the ground-state energies are -3.5, -5.9 and -10.9.
pub fn registry() -> Result<Vec<NamedInstance>> {
    let topo = Topology::new;
    let entries = vec![
        NamedInstance {
            name: "maxcut-3-linear",
            instance: ProblemInstance::maxcut(topo(TopologyKind::Linear, 3)?)
                .with_declared_optimum(2.0),
        },
        NamedInstance {
            name: "maxcut-4-cyclic",
            instance: ProblemInstance::maxcut(topo(TopologyKind::Cyclic, 4)?)
                .with_declared_optimum(4.0),
        },
        NamedInstance {
            name: "maxcut-5-complete",
            instance: ProblemInstance::maxcut(topo(TopologyKind::Complete, 5)?)
                .with_declared_optimum(6.0),
        },
        NamedInstance {
            name: "ism-3-linear",
            instance: ProblemInstance::ising(topo(TopologyKind::Linear, 3)?, vec![0.5; 3])?
                .with_declared_optimum(-3.5),
        },
        NamedInstance {
            name: "ism-4-cyclic",
            instance: ProblemInstance::ising(
                topo(TopologyKind::Cyclic, 4)?,
                vec![0.5, 0.5, 0.5, 0.4],
            )?
            .with_declared_optimum(-5.9),
        },
        NamedInstance {
            name: "ism-5-complete",
            instance: ProblemInstance::ising(topo(TopologyKind::Complete, 5)?, vec![0.18; 5])?
                .with_declared_optimum(-10.9),
        },
    ];
    for entry in &entries {
        entry
            .instance
            .verify_declared_optimum()
            .map_err(|e| Error::Integrity(format!("registry instance `{}`: {e}", entry.name)))?;
    }
    Ok(entries)
}

pub fn lookup(name: &str) -> Result<ProblemInstance> {
    registry()?
        .into_iter()
        .find(|e| e.name == name)
        .map(|e| e.instance)
        .ok_or_else(|| Error::Lookup(name.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSelector {
    Named(String),
    File(PathBuf),
}

impl InstanceSelector {
    /// Registry names resolve first; anything else is treated as a file path.
    pub fn parse(s: &str) -> Self {
        let known = registry()
            .map(|r| r.iter().any(|e| e.name == s))
            .unwrap_or(false);
        if known || !Path::new(s).exists() && !s.contains(['/', '.']) {
            Self::Named(s.to_string())
        } else {
            Self::File(PathBuf::from(s))
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Named(name) => name.clone(),
            Self::File(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }

    /// Loads the instance and requires a declared optimum confirmed by the oracle.
    pub fn resolve(&self) -> Result<ProblemInstance> {
        let instance = match self {
            Self::Named(name) => lookup(name)?,
            Self::File(path) => ProblemInstance::from_file(path)?,
        };
        instance.verify_declared_optimum()?;
        if instance.declared_optimum().is_some() {
            Ok(instance)
        } else {
            let optimum = instance.oracle_optimum().value;
            Ok(instance.with_declared_optimum(optimum))
        }
    }
}

impl fmt::Display for InstanceSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerSpec {
    /// Exhaustive search; `None` picks the per-dimension default resolution.
    Es(Option<EsConfig>),
    Ils(IlsConfig),
}

impl OptimizerSpec {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Es(_) => "es",
            Self::Ils(_) => "ils",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Self::Es(_) => None,
            Self::Ils(cfg) => Some(cfg.seed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Table,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "table" => Ok(Self::Table),
            other => Err(Error::Argument(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub instance: InstanceSelector,
    pub model: AnsatzModel,
    pub optimizer: OptimizerSpec,
    pub backend: Backend,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub instance: String,
    pub model: AnsatzModel,
    pub optimizer: String,
    pub eev: f64,
    pub optimum: f64,
    pub gap: f64,
    pub best_params: Vec<f64>,
    pub evaluations: u64,
    pub seed: Option<u64>,
}

/// Runs one optimization and reports the exact EEV at the best parameters,
/// even when the search itself used the sampled backend.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRow> {
    let instance = cfg.instance.resolve()?;
    let optimum = instance
        .declared_optimum()
        .expect("resolve() always sets the optimum");
    let evaluator = QaoaEvaluator::new(instance, cfg.model);
    let objective = EevObjective::new(evaluator, cfg.backend)?;
    let result: OptResult = match cfg.optimizer {
        OptimizerSpec::Es(es) => {
            let es =
                es.unwrap_or_else(|| EsConfig::default_for_dimension(cfg.model.parameter_count()));
            exhaustive_search(&objective, &es)?
        }
        OptimizerSpec::Ils(ils) => iterated_local_search(&objective, &ils, false)?,
    };
    let eev = objective.evaluator().exact(result.best_params.values())?;
    let seed = match cfg.backend {
        Backend::Sampled { seed, .. } => cfg.optimizer.seed().or(Some(seed)),
        Backend::Exact => cfg.optimizer.seed(),
    };
    Ok(ResultRow {
        instance: cfg.instance.label(),
        model: cfg.model,
        optimizer: cfg.optimizer.label().to_string(),
        eev,
        optimum,
        gap: opt_gap(eev, optimum),
        best_params: result.best_params.values().to_vec(),
        evaluations: result.evaluations,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AverageRow {
    pub family: Family,
    pub optimizer: String,
    pub mean_gap: f64,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub rows: Vec<ResultRow>,
    pub averages: Vec<AverageRow>,
}

fn family_of(row: &ResultRow) -> Family {
    // the gap sign mirrors the direction: optimum >= eev for Max-Cut, <= for Ising
    match lookup(&row.instance) {
        Ok(inst) => inst.family(),
        Err(_) if row.optimum >= row.eev => Family::MaxCut,
        Err(_) => Family::Ising,
    }
}

/// Per-(family, optimizer) mean gap, in order of first appearance.
pub fn family_averages(rows: &[ResultRow]) -> Vec<AverageRow> {
    let mut groups: Vec<(Family, String, f64, usize)> = Vec::new();
    for row in rows {
        let family = family_of(row);
        match groups
            .iter_mut()
            .find(|(f, o, _, _)| *f == family && *o == row.optimizer)
        {
            Some(g) => {
                g.2 += row.gap;
                g.3 += 1;
            }
            None => groups.push((family, row.optimizer.clone(), row.gap, 1)),
        }
    }
    groups
        .into_iter()
        .map(|(family, optimizer, sum, n)| AverageRow {
            family,
            optimizer,
            mean_gap: sum / n as f64,
            rows: n,
        })
        .collect()
}

/// Runs a list of configurations concurrently; rows keep the input order.
pub fn run_configs(configs: &[ExperimentConfig]) -> Result<SuiteReport> {
    if configs.is_empty() {
        return Err(Error::Argument("suite has no experiments".into()));
    }
    let rows = configs
        .par_iter()
        .map(run_experiment)
        .collect::<Result<Vec<_>>>()?;
    let averages = family_averages(&rows);
    Ok(SuiteReport { rows, averages })
}

/// Configurations for `instances × models × optimizers`, in that nesting order.
pub fn cross_product(
    instances: &[InstanceSelector],
    models: &[AnsatzModel],
    optimizers: &[OptimizerSpec],
    backend: Backend,
) -> Vec<ExperimentConfig> {
    let mut configs = Vec::new();
    for instance in instances {
        for &model in models {
            for &optimizer in optimizers {
                configs.push(ExperimentConfig {
                    instance: instance.clone(),
                    model,
                    optimizer,
                    backend,
                });
            }
        }
    }
    configs
}

/// Runs the exact-backend cross product and appends per-family average gaps.
pub fn run_suite(
    instances: &[InstanceSelector],
    models: &[AnsatzModel],
    optimizers: &[OptimizerSpec],
) -> Result<SuiteReport> {
    if instances.is_empty() || models.is_empty() || optimizers.is_empty() {
        return Err(Error::Argument(
            "suite needs at least one instance, model and optimizer".into(),
        ));
    }
    run_configs(&cross_product(
        instances,
        models,
        optimizers,
        Backend::Exact,
    ))
}

/// The default (instance, model) rows of the standard suite. Exhaustive
/// search has no 4p row for the four-particle Ising case; ILS does.
pub fn standard_rows(optimizer: &OptimizerSpec) -> Vec<(&'static str, AnsatzModel)> {
    use AnsatzModel::*;
    let mut rows = vec![
        ("ism-3-linear", P2),
        ("ism-4-cyclic", P2),
        ("ism-4-cyclic", P3),
    ];
    if matches!(optimizer, OptimizerSpec::Ils(_)) {
        rows.push(("ism-4-cyclic", P4));
    }
    rows.extend([
        ("ism-5-complete", P2),
        ("ism-5-complete", P3),
        ("ism-5-complete", P4),
        ("maxcut-3-linear", P2),
        ("maxcut-4-cyclic", P2),
        ("maxcut-4-cyclic", P3),
        ("maxcut-4-cyclic", P4),
        ("maxcut-5-complete", P2),
        ("maxcut-5-complete", P3),
        ("maxcut-5-complete", P4),
    ]);
    rows
}

pub fn standard_suite(optimizer: OptimizerSpec) -> Vec<ExperimentConfig> {
    standard_rows(&optimizer)
        .into_iter()
        .map(|(name, model)| ExperimentConfig {
            instance: InstanceSelector::Named(name.to_string()),
            model,
            optimizer,
            backend: Backend::Exact,
        })
        .collect()
}

fn format_params(params: &[f64]) -> String {
    params
        .iter()
        .map(|p| format!("{p:.6}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn write_csv<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.instance,
            r.model,
            r.optimizer,
            r.eev,
            r.optimum,
            r.gap,
            r.evaluations,
            r.seed.map(|s| s.to_string()).unwrap_or_default(),
            format_params(&r.best_params)
        )?;
    }
    Ok(())
}

pub fn to_csv(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is UTF-8")
}

/// Parses CSV produced by [`write_csv`]. Parameters come back rounded to 6 decimals.
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `{CSV_HEADER}`"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            let err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(err(format!("expected 9 columns, got {}", fields.len())));
            }
            let real = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(format!("`{s}` is not a number")))
            };
            let params = if fields[8].is_empty() {
                Vec::new()
            } else {
                fields[8].split(';').map(real).collect::<Result<Vec<_>>>()?
            };
            Ok(ResultRow {
                instance: fields[0].to_string(),
                model: fields[1].parse().map_err(|e: Error| err(e.to_string()))?,
                optimizer: fields[2].to_string(),
                eev: real(fields[3])?,
                optimum: real(fields[4])?,
                gap: real(fields[5])?,
                evaluations: fields[6]
                    .parse()
                    .map_err(|_| err(format!("`{}` is not a count", fields[6])))?,
                seed: if fields[7].is_empty() {
                    None
                } else {
                    Some(
                        fields[7]
                            .parse()
                            .map_err(|_| err(format!("`{}` is not a seed", fields[7])))?,
                    )
                },
                best_params: params,
            })
        })
        .collect()
}

/// Console layout: one block per instance,
/// one line per model.
pub fn render_table(rows: &[ResultRow], averages: &[AverageRow]) -> String {
    let mut out = String::new();
    let mut current: Option<(&str, &str)> = None;
    for r in rows {
        let key = (r.instance.as_str(), r.optimizer.as_str());
        if current != Some(key) {
            current = Some(key);
            let _ = writeln!(out, "\n[{}] {}", r.optimizer.to_uppercase(), r.instance);
            let _ = writeln!(
                out,
                "{:<4} {:>12} {:>10} {:>10}   params",
                "", "EEV Local", "Optimum", "Opt-Loc"
            );
        }
        let _ = writeln!(
            out,
            "{:<4} {:>12.4} {:>10} {:>10.4}   [{}]",
            r.model,
            r.eev,
            r.optimum,
            r.gap,
            format_params(&r.best_params).replace(';', ", ")
        );
    }
    if !averages.is_empty() {
        let _ = writeln!(out, "\nAverage Opt-Loc");
        for a in averages {
            let _ = writeln!(
                out,
                "  {:<4} {:<8} {:>10.4}  ({} rows)",
                a.optimizer.to_uppercase(),
                a.family,
                a.mean_gap,
                a.rows
            );
        }
    }
    out
}

/// Writes rows to `path`, or to stdout when `path` is `None`.
pub fn emit(
    rows: &[ResultRow],
    averages: &[AverageRow],
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Table => render_table(rows, averages),
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapePoint {
    pub gamma: f64,
    pub beta: f64,
    pub eev: f64,
}

/// Exact 2p EEV on the `points_per_dim × points_per_dim` lattice, γ-major.
pub fn landscape(instance: &ProblemInstance, points_per_dim: usize) -> Result<Vec<LandscapePoint>> {
    if points_per_dim == 0 {
        return Err(Error::Argument("points_per_dim must be at least 1".into()));
    }
    let grid = EsConfig::new(points_per_dim);
    let evaluator = QaoaEvaluator::new(instance.clone(), AnsatzModel::P2);
    (0..points_per_dim * points_per_dim)
        .into_par_iter()
        .map(|idx| {
            let gamma = grid.grid_value(idx / points_per_dim);
            let beta = grid.grid_value(idx % points_per_dim);
            let eev = evaluator.exact(&[gamma, beta])?;
            Ok(LandscapePoint { gamma, beta, eev })
        })
        .collect()
}

pub fn landscape_csv(points: &[LandscapePoint]) -> String {
    let mut out = String::from("gamma,beta,eev\n");
    for p in points {
        let _ = writeln!(out, "{:.6},{:.6},{}", p.gamma, p.beta, p.eev);
    }
    out
}
