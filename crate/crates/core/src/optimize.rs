//! Parameter search on the torus [0, 2π)^d: exhaustive lattice search and
//! iterated local search built from stochastic hill climbing.

use std::f64::consts::TAU;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::engine::{wrap_angle, AnsatzModel, ParameterPoint, QaoaEvaluator};
use crate::error::{Error, Result};
use crate::problem::Direction;

/// A black-box function over angle vectors.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;
    fn direction(&self) -> Direction;
    fn evaluate(&self, params: &[f64]) -> f64;
}

/// Adapts a closure into an [`Objective`].
pub struct FnObjective<F> {
    dimension: usize,
    direction: Direction,
    f: F,
}

impl<F> FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(dimension: usize, direction: Direction, f: F) -> Self {
        Self {
            dimension,
            direction,
            f,
        }
    }
}

impl<F> Objective for FnObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn direction(&self) -> Direction {
        self.direction
    }

    fn evaluate(&self, params: &[f64]) -> f64 {
        (self.f)(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Exact,
    /// Shot-sampled EEV. Each call derives its sampling seed from `seed` and
    /// the parameter bits, so evaluation stays a pure function of the input.
    Sampled {
        shots: u64,
        seed: u64,
    },
}

/// The QAOA expectation value as an objective, optimized in the instance's direction.
pub struct EevObjective {
    evaluator: QaoaEvaluator,
    backend: Backend,
}

impl EevObjective {
    pub fn new(evaluator: QaoaEvaluator, backend: Backend) -> Result<Self> {
        if let Backend::Sampled { shots: 0, .. } = backend {
            return Err(Error::Argument(
                "sampled backend needs at least 1 shot".into(),
            ));
        }
        Ok(Self { evaluator, backend })
    }

    pub fn evaluator(&self) -> &QaoaEvaluator {
        &self.evaluator
    }

    pub fn model(&self) -> AnsatzModel {
        self.evaluator.model()
    }
}

impl Objective for EevObjective {
    fn dimension(&self) -> usize {
        self.evaluator.model().parameter_count()
    }

    fn direction(&self) -> Direction {
        self.evaluator.direction()
    }

    fn evaluate(&self, params: &[f64]) -> f64 {
        let result = match self.backend {
            Backend::Exact => self.evaluator.exact(params),
            Backend::Sampled { shots, seed } => {
                let call_seed = params
                    .iter()
                    .fold(splitmix64(seed), |acc, x| splitmix64(acc ^ x.to_bits()));
                self.evaluator
                    .sampled(params, shots, call_seed)
                    .map(|r| r.eev)
            }
        };
        // optimizers always pass `dimension()` finite angles
        result.expect("optimizer supplied a malformed parameter vector")
    }
}

/// Counts objective calls; shared across worker threads.
struct Counted<'a, O: ?Sized> {
    inner: &'a O,
    calls: AtomicU64,
}

impl<'a, O: Objective + ?Sized> Counted<'a, O> {
    fn new(inner: &'a O) -> Self {
        Self {
            inner,
            calls: AtomicU64::new(0),
        }
    }

    fn eval(&self, params: &[f64]) -> f64 {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(params)
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub best_params: ParameterPoint,
    pub best_value: f64,
    pub evaluations: u64,
    /// Successive incumbents, when tracing was requested.
    pub trace: Option<Vec<TracePoint>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EsConfig {
    pub points_per_dim: usize,
    pub max_evaluations: u64,
}

impl EsConfig {
    pub const DEFAULT_MAX_EVALUATIONS: u64 = 10_000_000;

    pub fn new(points_per_dim: usize) -> Self {
        Self {
            points_per_dim,
            max_evaluations: Self::DEFAULT_MAX_EVALUATIONS,
        }
    }

    /// 64 points per axis for 2 parameters, 32 for 3, 16 for 4 or more.
    pub fn default_for_dimension(dimension: usize) -> Self {
        Self::new(match dimension {
            0..=2 => 64,
            3 => 32,
            _ => 16,
        })
    }

    /// Grid coordinate k maps to 2πk/points_per_dim. The fraction is reduced
    /// first, so a point shared by a coarse grid and its refinement maps to
    /// the same `f64` in both.
    pub fn grid_value(&self, k: usize) -> f64 {
        let g = gcd(k, self.points_per_dim).max(1);
        TAU * (k / g) as f64 / (self.points_per_dim / g) as f64
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Evaluates every point of the uniform lattice `{2πk/m}^d` and keeps the best.
///
/// Ties resolve to the lexicographically smallest parameter tuple, so the
/// result does not depend on the order in which worker threads finish.
pub fn exhaustive_search<O: Objective + ?Sized>(obj: &O, cfg: &EsConfig) -> Result<OptResult> {
    let dim = obj.dimension();
    if dim == 0 {
        return Err(Error::Argument(
            "objective dimension must be at least 1".into(),
        ));
    }
    if cfg.points_per_dim == 0 {
        return Err(Error::Argument("points_per_dim must be at least 1".into()));
    }
    let total = (cfg.points_per_dim as u128).checked_pow(dim as u32);
    let total = match total {
        Some(t) if t <= u128::from(cfg.max_evaluations) => t as u64,
        Some(t) => {
            return Err(Error::Budget {
                requested: t,
                cap: cfg.max_evaluations,
            })
        }
        None => {
            return Err(Error::Budget {
                requested: u128::MAX,
                cap: cfg.max_evaluations,
            })
        }
    };

    let m = cfg.points_per_dim as u64;
    // lattice index -> tuple, first coordinate most significant
    let decode = |mut idx: u64| {
        let mut p = vec![0.0; dim];
        for slot in p.iter_mut().rev() {
            *slot = cfg.grid_value((idx % m) as usize);
            idx /= m;
        }
        p
    };

    let direction = obj.direction();
    let counted = Counted::new(obj);
    let pick = |a: (u64, f64), b: (u64, f64)| {
        if direction.is_better(b.1, a.1) || (!direction.is_better(a.1, b.1) && b.0 < a.0) {
            b
        } else {
            a
        }
    };
    let (best_idx, best_value) = (0..total)
        .into_par_iter()
        .map(|idx| (idx, counted.eval(&decode(idx))))
        .reduce(|| (u64::MAX, f64::NAN), pick);

    Ok(OptResult {
        best_params: ParameterPoint::new(decode(best_idx))?,
        best_value,
        evaluations: counted.calls(),
        trace: None,
    })
}

fn perturb(x: &[f64], noise: &Normal<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    x.iter()
        .map(|&v| wrap_angle(v + noise.sample(rng)))
        .collect()
}

fn normal(sigma: f64, what: &str) -> Result<Normal<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Argument(format!(
            "{what} must be positive and finite, got {sigma}"
        )));
    }
    Normal::new(0.0, sigma).map_err(|e| Error::Argument(format!("{what}: {e}")))
}

struct Climb {
    params: Vec<f64>,
    value: f64,
}

fn climb<O: Objective + ?Sized>(
    obj: &Counted<'_, O>,
    start: Vec<f64>,
    steps: usize,
    noise: &Normal<f64>,
    rng: &mut ChaCha8Rng,
    trace: &mut Option<Vec<TracePoint>>,
) -> Climb {
    let direction = obj.inner.direction();
    let value = obj.eval(&start);
    let mut best = Climb {
        params: start,
        value,
    };
    if let Some(t) = trace.as_mut() {
        t.push(TracePoint {
            params: best.params.clone(),
            value: best.value,
        });
    }
    for _ in 0..steps {
        let candidate = perturb(&best.params, noise, rng);
        let value = obj.eval(&candidate);
        if direction.is_better(value, best.value) {
            best = Climb {
                params: candidate,
                value,
            };
            if let Some(t) = trace.as_mut() {
                t.push(TracePoint {
                    params: best.params.clone(),
                    value,
                });
            }
        }
    }
    best
}

fn check_start<O: Objective + ?Sized>(obj: &O, start: &[f64]) -> Result<()> {
    if start.len() != obj.dimension() {
        return Err(Error::Argument(format!(
            "start point has {} coordinates, objective has {}",
            start.len(),
            obj.dimension()
        )));
    }
    if let Some(bad) = start.iter().find(|v| !v.is_finite()) {
        return Err(Error::Argument(format!(
            "non-finite start coordinate {bad}"
        )));
    }
    Ok(())
}

/// Gaussian-proposal hill climbing with strict-improvement acceptance.
///
/// Evaluates `start` once and then makes `steps` proposals, so the call count
/// is always `steps + 1`.
pub fn stochastic_hill_climb<O: Objective + ?Sized>(
    obj: &O,
    start: &[f64],
    steps: usize,
    sigma: f64,
    seed: u64,
    record_trace: bool,
) -> Result<OptResult> {
    check_start(obj, start)?;
    let noise = normal(sigma, "sigma")?;
    let counted = Counted::new(obj);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = record_trace.then(Vec::new);
    let start = start.iter().copied().map(wrap_angle).collect();
    let best = climb(&counted, start, steps, &noise, &mut rng, &mut trace);
    Ok(OptResult {
        best_params: ParameterPoint::new(best.params)?,
        best_value: best.value,
        evaluations: counted.calls(),
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlsConfig {
    pub outer_iterations: usize,
    pub shc_steps_per_iteration: usize,
    pub initial_step_sigma: f64,
    pub sigma_decay: f64,
    pub kick_sigma: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for IlsConfig {
    fn default() -> Self {
        Self {
            outer_iterations: 30,
            shc_steps_per_iteration: 50,
            initial_step_sigma: 0.4,
            sigma_decay: 0.92,
            kick_sigma: 1.0,
            restarts: 4,
            seed: 0,
        }
    }
}

impl IlsConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    /// Objective calls made by one run: `restarts · (outer + 1) · (steps + 1)`.
    pub fn evaluation_budget(&self) -> u64 {
        (self.restarts as u64)
            * (self.outer_iterations as u64 + 1)
            * (self.shc_steps_per_iteration as u64 + 1)
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma_decay > 0.0 && self.sigma_decay <= 1.0) {
            return Err(Error::Argument(format!(
                "sigma_decay must lie in (0, 1], got {}",
                self.sigma_decay
            )));
        }
        normal(self.initial_step_sigma, "initial_step_sigma")?;
        normal(self.kick_sigma, "kick_sigma")?;
        Ok(())
    }
}

/// Independent per-stream seed, so restarts can run on any thread.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Iterated local search: per restart, hill-climb from a uniform random start,
/// then repeatedly kick the incumbent, hill-climb the kicked point with a
/// shrinking step size and keep it if strictly better.
pub fn iterated_local_search<O: Objective + ?Sized>(
    obj: &O,
    cfg: &IlsConfig,
    record_trace: bool,
) -> Result<OptResult> {
    cfg.validate()?;
    if cfg.restarts == 0 {
        return Err(Error::Argument("restarts must be at least 1".into()));
    }
    let dim = obj.dimension();
    if dim == 0 {
        return Err(Error::Argument(
            "objective dimension must be at least 1".into(),
        ));
    }
    let direction = obj.direction();
    let counted = Counted::new(obj);
    let kick = normal(cfg.kick_sigma, "kick_sigma")?;

    let runs: Vec<(Climb, Option<Vec<TracePoint>>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|restart| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, restart as u64));
            let mut trace = record_trace.then(Vec::new);
            let mut sigma = cfg.initial_step_sigma;
            let start: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
            let step = normal(sigma, "sigma").expect("validated");
            let mut incumbent = climb(
                &counted,
                start,
                cfg.shc_steps_per_iteration,
                &step,
                &mut rng,
                &mut trace,
            );
            for _ in 0..cfg.outer_iterations {
                let kicked = perturb(&incumbent.params, &kick, &mut rng);
                let step = normal(sigma, "sigma").expect("sigma stays positive");
                let candidate = climb(
                    &counted,
                    kicked,
                    cfg.shc_steps_per_iteration,
                    &step,
                    &mut rng,
                    &mut trace,
                );
                if direction.is_better(candidate.value, incumbent.value) {
                    incumbent = candidate;
                }
                sigma *= cfg.sigma_decay;
            }
            (incumbent, trace)
        })
        .collect();

    let mut trace = record_trace.then(Vec::new);
    let mut best: Option<Climb> = None;
    for (run, run_trace) in runs {
        if let (Some(all), Some(part)) = (trace.as_mut(), run_trace) {
            all.extend(part);
        }
        let replace = match &best {
            None => true,
            Some(b) => direction.is_better(run.value, b.value),
        };
        if replace {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(OptResult {
        best_params: ParameterPoint::new(best.params)?,
        best_value: best.value,
        evaluations: counted.calls(),
        trace,
    })
}
