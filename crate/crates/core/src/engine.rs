//! QAOA state preparation and expectation values.
//!
//! The phase operator is `e^{-iγ·H}` with `H = Σ J_ij Z_i Z_j + Σ h_i Z_i`, the
//! mixing operator is `Π_j e^{+iβ X_j}`. Expectation values are taken against
//! the problem's cost diagonal (cut size or Ising energy), which for Max-Cut
//! is an affine function of `H` and for Ising is `-H`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::problem::{Direction, ProblemInstance};
use crate::state::{GateAngle, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    /// Phase operator driven by the parameter at this index.
    Phase(usize),
    /// Mixing operator driven by the parameter at this index.
    Mix(usize),
}

/// The three fixed ansatz schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AnsatzModel {
    /// Phase(γ), Mix(β).
    P2,
    /// Phase(γ), Mix(β₁), Mix(β₂).
    P3,
    /// Phase(γ₁), Mix(β₁), Phase(γ₂), Mix(β₂).
    P4,
}

impl AnsatzModel {
    pub const ALL: [AnsatzModel; 3] = [Self::P2, Self::P3, Self::P4];

    /// Layers in execution order, parameters indexed as in `ParameterPoint`.
    pub fn schedule(self) -> &'static [Layer] {
        use Layer::*;
        match self {
            Self::P2 => &[Phase(0), Mix(1)],
            Self::P3 => &[Phase(0), Mix(1), Mix(2)],
            Self::P4 => &[Phase(0), Mix(1), Phase(2), Mix(3)],
        }
    }

    pub fn parameter_count(self) -> usize {
        self.schedule().len()
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::P2 => "2p",
            Self::P3 => "3p",
            Self::P4 => "4p",
        }
    }
}

impl fmt::Display for AnsatzModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AnsatzModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2p" | "p2" => Ok(Self::P2),
            "3p" | "p3" => Ok(Self::P3),
            "4p" | "p4" => Ok(Self::P4),
            other => Err(Error::Argument(format!("unknown ansatz model `{other}`"))),
        }
    }
}

/// Wraps an angle onto [0, 2π).
#[inline]
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly TAU
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Angles for one ansatz evaluation, stored on the canonical range [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint(Vec<f64>);

impl ParameterPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite parameter {bad}")));
        }
        Ok(Self(values.into_iter().map(wrap_angle).collect()))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EevReport {
    pub eev: f64,
    pub method: EstimateMethod,
}

impl EevReport {
    pub fn shots(&self) -> Option<u64> {
        match self.method {
            EstimateMethod::Sampled { shots, .. } => Some(shots),
            EstimateMethod::Exact => None,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.method {
            EstimateMethod::Sampled { seed, .. } => Some(seed),
            EstimateMethod::Exact => None,
        }
    }
}

/// How the phase operator is realised on the statevector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// One diagonal multiply with precomputed phases.
    #[default]
    Fused,
    /// CNOT·RZ·CNOT per edge, then RZ per node for Ising fields.
    Gates,
}

fn check_register(sv: &Statevector, instance: &ProblemInstance) -> Result<()> {
    if sv.n_qubits() != instance.n_nodes() {
        return Err(Error::Size(format!(
            "state has {} qubits, instance has {} nodes",
            sv.n_qubits(),
            instance.n_nodes()
        )));
    }
    Ok(())
}

fn apply_phase_fused(sv: &mut Statevector, phase_diag: &[f64], gamma: f64) -> Result<()> {
    let phases: Vec<f64> = phase_diag.iter().map(|h| -gamma * h).collect();
    sv.apply_diagonal_phase(&phases)
}

fn apply_phase_gates(sv: &mut Statevector, instance: &ProblemInstance, gamma: f64) -> Result<()> {
    for (&(i, j), &w) in instance.topology().edges().iter().zip(instance.couplings()) {
        sv.apply_cnot(i, j)?;
        sv.apply_rz(j, GateAngle::new(2.0 * w * gamma)?)?;
        sv.apply_cnot(i, j)?;
    }
    for (i, &h) in instance.fields().iter().enumerate() {
        sv.apply_rz(i, GateAngle::new(2.0 * h * gamma)?)?;
    }
    Ok(())
}

/// Applies `U(C, γ) = e^{-iγ·H}` for the instance's phase Hamiltonian.
pub fn apply_phase_operator(
    sv: &mut Statevector,
    instance: &ProblemInstance,
    gamma: GateAngle,
    mode: PhaseMode,
) -> Result<()> {
    check_register(sv, instance)?;
    match mode {
        PhaseMode::Fused => apply_phase_fused(sv, &instance.phase_diagonal(), gamma.radians()),
        PhaseMode::Gates => apply_phase_gates(sv, instance, gamma.radians()),
    }
}

/// Applies RX(β) = e^{+iβX} to every qubit.
pub fn apply_mixing_operator(sv: &mut Statevector, beta: GateAngle) -> Result<()> {
    for q in 0..sv.n_qubits() {
        sv.apply_rx(q, beta)?;
    }
    Ok(())
}

/// Mean cost over a sampled set of basis states.
pub fn estimate_from_state(
    sv: &Statevector,
    cost_diag: &[f64],
    shots: u64,
    seed: u64,
) -> Result<EevReport> {
    if cost_diag.len() != sv.dim() {
        return Err(Error::Size(format!(
            "cost diagonal has {} entries, state dimension is {}",
            cost_diag.len(),
            sv.dim()
        )));
    }
    let counts = sv.sample(shots, seed)?;
    let total: f64 = counts.iter().map(|(&z, &n)| cost_diag[z] * n as f64).sum();
    Ok(EevReport {
        eev: total / shots as f64,
        method: EstimateMethod::Sampled { shots, seed },
    })
}

/// Instance-bound evaluator that caches both diagonals across many parameter points.
#[derive(Debug, Clone)]
pub struct QaoaEvaluator {
    instance: ProblemInstance,
    model: AnsatzModel,
    phase_diag: Vec<f64>,
    cost_diag: Vec<f64>,
}

impl QaoaEvaluator {
    pub fn new(instance: ProblemInstance, model: AnsatzModel) -> Self {
        let phase_diag = instance.phase_diagonal();
        let cost_diag = instance.cost_diagonal();
        Self {
            instance,
            model,
            phase_diag,
            cost_diag,
        }
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn model(&self) -> AnsatzModel {
        self.model
    }

    pub fn direction(&self) -> Direction {
        self.instance.direction()
    }

    pub fn cost_diagonal(&self) -> &[f64] {
        &self.cost_diag
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.model.parameter_count() {
            return Err(Error::Argument(format!(
                "model {} takes {} parameters, got {}",
                self.model,
                self.model.parameter_count(),
                params.len()
            )));
        }
        if let Some(bad) = params.iter().find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite parameter {bad}")));
        }
        Ok(())
    }

    /// Uniform superposition followed by the model's layers in execution order.
    ///
    /// Angles are first reduced to [0, 2π). Fields that are not half-integers
    /// make the phase operator aperiodic in γ, so the landscape is defined on
    /// the canonical representative.
    pub fn prepare(&self, params: &[f64], mode: PhaseMode) -> Result<Statevector> {
        self.check_params(params)?;
        let params: Vec<f64> = params.iter().copied().map(wrap_angle).collect();
        let mut sv = Statevector::new_uniform(self.instance.n_nodes())?;
        for layer in self.model.schedule() {
            match *layer {
                Layer::Phase(k) => match mode {
                    PhaseMode::Fused => apply_phase_fused(&mut sv, &self.phase_diag, params[k])?,
                    PhaseMode::Gates => apply_phase_gates(&mut sv, &self.instance, params[k])?,
                },
                Layer::Mix(k) => apply_mixing_operator(&mut sv, GateAngle::from_finite(params[k]))?,
            }
        }
        Ok(sv)
    }

    /// Σ_z p(z)·C(z) over the exact output distribution.
    pub fn exact(&self, params: &[f64]) -> Result<f64> {
        let sv = self.prepare(params, PhaseMode::Fused)?;
        Ok(sv
            .amplitudes()
            .iter()
            .zip(&self.cost_diag)
            .map(|(a, c)| a.norm_sqr() * c)
            .sum())
    }

    pub fn sampled(&self, params: &[f64], shots: u64, seed: u64) -> Result<EevReport> {
        let sv = self.prepare(params, PhaseMode::Fused)?;
        estimate_from_state(&sv, &self.cost_diag, shots, seed)
    }
}

pub fn prepare_state(
    instance: &ProblemInstance,
    model: AnsatzModel,
    params: &ParameterPoint,
) -> Result<Statevector> {
    QaoaEvaluator::new(instance.clone(), model).prepare(params.values(), PhaseMode::Fused)
}

pub fn exact_expectation(
    instance: &ProblemInstance,
    model: AnsatzModel,
    params: &ParameterPoint,
) -> Result<EevReport> {
    let eev = QaoaEvaluator::new(instance.clone(), model).exact(params.values())?;
    Ok(EevReport {
        eev,
        method: EstimateMethod::Exact,
    })
}

pub fn sampled_expectation(
    instance: &ProblemInstance,
    model: AnsatzModel,
    params: &ParameterPoint,
    shots: u64,
    seed: u64,
) -> Result<EevReport> {
    QaoaEvaluator::new(instance.clone(), model).sampled(params.values(), shots, seed)
}

/// Distance to the optimum as `optimum - eev`: positive for maximization
/// problems, negative for minimization problems.
#[inline]
pub fn opt_gap(eev: f64, optimum: f64) -> f64 {
    optimum - eev
}
