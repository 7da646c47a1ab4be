//! Dense statevector simulation.
//!
//! Qubit `q` is bit `q` of the basis-state index (little-endian), so qubit 0 is
//! the least-significant bit. Display bitstrings are written qubit-0-leftmost:
//! `"010"` on three qubits is the basis index `0b010 = 2` and `"0101"` on four
//! qubits is index `0b1010 = 10`.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_QUBITS: usize = 24;

/// A rotation angle in radians. Any finite real is accepted; gates are periodic.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GateAngle(f64);

impl GateAngle {
    pub fn new(radians: f64) -> Result<Self> {
        if radians.is_finite() {
            Ok(Self(radians))
        } else {
            Err(Error::Argument(format!(
                "gate angle must be finite, got {radians}"
            )))
        }
    }

    pub(crate) fn from_finite(radians: f64) -> Self {
        debug_assert!(radians.is_finite());
        Self(radians)
    }

    #[inline]
    pub fn radians(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for GateAngle {
    type Error = Error;

    fn try_from(radians: f64) -> Result<Self> {
        Self::new(radians)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_register_size(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::Size(format!(
            "register must have between 1 and {MAX_QUBITS} qubits, got {n_qubits}"
        )))
    }
}

impl Statevector {
    /// The all-zeros basis state |0…0⟩.
    pub fn new_zero(n_qubits: usize) -> Result<Self> {
        check_register_size(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// The uniform superposition H⊗ⁿ|0…0⟩.
    pub fn new_uniform(n_qubits: usize) -> Result<Self> {
        check_register_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        let amp = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            n_qubits,
            amplitudes: vec![amp; dim],
        })
    }

    /// A computational basis state given by its index.
    pub fn new_basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut sv = Self::new_zero(n_qubits)?;
        if index >= sv.dim() {
            return Err(Error::Index(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        sv.amplitudes[0] = Complex64::new(0.0, 0.0);
        sv.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(sv)
    }

    /// Wraps raw amplitudes. The length must be a power of two; no normalization is applied.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() || len < 2 {
            return Err(Error::Size(format!(
                "amplitude count must be a power of two >= 2, got {len}"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_register_size(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    #[inline]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q < self.n_qubits {
            Ok(())
        } else {
            Err(Error::Index(format!(
                "qubit {q} out of range for a {}-qubit register",
                self.n_qubits
            )))
        }
    }

    /// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1usize << q;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = m[0][0] * x0 + m[0][1] * x1;
                *a1 = m[1][0] * x0 + m[1][1] * x1;
            }
        }
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let stride = 1usize << q;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = (x0 + x1) * FRAC_1_SQRT_2;
                *a1 = (x0 - x1) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// RX(β) = e^{+iβX} = [[cos β, i sin β], [i sin β, cos β]].
    ///
    /// Full-angle, positive-exponent convention; note this is not the
    /// half-angle e^{-iθX/2} found in most gate libraries.
    pub fn apply_rx(&mut self, q: usize, beta: GateAngle) -> Result<()> {
        self.check_qubit(q)?;
        let (s, c) = beta.radians().sin_cos();
        let diag = Complex64::new(c, 0.0);
        let off = Complex64::new(0.0, s);
        self.apply_single(q, [[diag, off], [off, diag]]);
        Ok(())
    }

    /// RZ(θ) = diag(e^{-iθ/2}, e^{+iθ/2}).
    pub fn apply_rz(&mut self, q: usize, theta: GateAngle) -> Result<()> {
        self.check_qubit(q)?;
        let half = 0.5 * theta.radians();
        let p0 = Complex64::from_polar(1.0, -half);
        let p1 = Complex64::from_polar(1.0, half);
        let stride = 1usize << q;
        for block in self.amplitudes.chunks_exact_mut(stride << 1) {
            let (lo, hi) = block.split_at_mut(stride);
            lo.iter_mut().for_each(|a| *a *= p0);
            hi.iter_mut().for_each(|a| *a *= p1);
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::Index(format!(
                "CNOT control and target must differ (both {control})"
            )));
        }
        let cmask = 1usize << control;
        let tmask = 1usize << target;
        for i in 0..self.dim() {
            // visit each swapped pair once, from its target-0 member
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
        Ok(())
    }

    /// Multiplies amplitude `z` by `e^{i·phases[z]}`.
    pub fn apply_diagonal_phase(&mut self, phases: &[f64]) -> Result<()> {
        if phases.len() != self.dim() {
            return Err(Error::Size(format!(
                "phase array has {} entries, state dimension is {}",
                phases.len(),
                self.dim()
            )));
        }
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::Argument(format!("non-finite phase {bad}")));
        }
        for (a, &phi) in self.amplitudes.iter_mut().zip(phases) {
            *a *= Complex64::from_polar(1.0, phi);
        }
        Ok(())
    }

    /// Born-rule probabilities |a_z|².
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Draws `shots` computational-basis measurements. Deterministic for a fixed seed.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return Err(Error::Argument("shots must be at least 1".into()));
        }
        let cumulative: Vec<f64> = self
            .probabilities()
            .into_iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        let total = *cumulative
            .last()
            .expect("state has at least two amplitudes");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = BTreeMap::new();
        for _ in 0..shots {
            let r = rng.random::<f64>() * total;
            let idx = cumulative
                .partition_point(|&c| c <= r)
                .min(cumulative.len() - 1);
            *counts.entry(idx).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// L∞ distance after removing the global phase.
    ///
    /// Both states are rotated so that the first amplitude of `self` with
    /// magnitude above 1e-12 becomes positive real, then compared entrywise.
    pub fn distance_up_to_global_phase(&self, other: &Statevector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Size(format!(
                "cannot compare states of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        let pivot = self.amplitudes.iter().position(|a| a.norm() > 1e-12);
        let Some(pivot) = pivot else {
            return Ok(other
                .amplitudes
                .iter()
                .map(|a| a.norm())
                .fold(0.0, f64::max));
        };
        let unphase = |a: Complex64| {
            if a.norm() > 1e-12 {
                a.conj() / a.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        };
        let ra = unphase(self.amplitudes[pivot]);
        let rb = unphase(other.amplitudes[pivot]);
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a * ra - b * rb).norm())
            .fold(0.0, f64::max))
    }
}

/// Parses a qubit-0-leftmost display string such as `"010"` into a basis index.
pub fn index_from_bitstring(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(Error::Size(format!(
            "bitstring length must be 1..={MAX_QUBITS}, got {}",
            bits.len()
        )));
    }
    bits.chars()
        .enumerate()
        .try_fold(0usize, |acc, (q, ch)| match ch {
            '0' => Ok(acc),
            '1' => Ok(acc | (1 << q)),
            other => Err(Error::Argument(format!(
                "bitstring `{bits}` contains invalid character `{other}`"
            ))),
        })
}

/// Renders a basis index as an `n_qubits`-character string, qubit 0 leftmost.
pub fn bitstring_from_index(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}
