//! Graph topologies, Max-Cut and Ising cost functions, and the brute-force oracle.
//!
//! A bit value of 0 on node `i` is spin `z_i = +1`, a bit value of 1 is
//! `z_i = -1`. Node `i` is qubit `i` (see [`crate::state`] for the index
//! layout).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::state::{bitstring_from_index, index_from_bitstring, MAX_QUBITS};

/// Absolute tolerance used when comparing floating-point optima.
pub const OPTIMUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TopologyKind {
    Linear,
    Cyclic,
    Complete,
}

impl TopologyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Cyclic => "cyclic",
            Self::Complete => "complete",
        }
    }

    fn min_nodes(self) -> usize {
        match self {
            Self::Linear => 2,
            Self::Cyclic | Self::Complete => 3,
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "cyclic" => Ok(Self::Cyclic),
            "complete" | "full" => Ok(Self::Complete),
            other => Err(Error::Argument(format!("unknown topology `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    kind: TopologyKind,
    n_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    /// Builds the edge list for `kind` on `n_nodes` nodes. Edges are stored as
    /// `(i, j)` with `i < j`, sorted lexicographically.
    pub fn new(kind: TopologyKind, n_nodes: usize) -> Result<Self> {
        if n_nodes < kind.min_nodes() {
            return Err(Error::Argument(format!(
                "{kind} topology needs at least {} nodes, got {n_nodes}",
                kind.min_nodes()
            )));
        }
        if n_nodes > MAX_QUBITS {
            return Err(Error::Size(format!(
                "at most {MAX_QUBITS} nodes are supported, got {n_nodes}"
            )));
        }
        let mut edges: Vec<(usize, usize)> = match kind {
            TopologyKind::Linear => (0..n_nodes - 1).map(|k| (k, k + 1)).collect(),
            TopologyKind::Cyclic => (0..n_nodes - 1)
                .map(|k| (k, k + 1))
                .chain(std::iter::once((0, n_nodes - 1)))
                .collect(),
            TopologyKind::Complete => (0..n_nodes)
                .flat_map(|i| (i + 1..n_nodes).map(move |j| (i, j)))
                .collect(),
        };
        edges.sort_unstable();
        Ok(Self {
            kind,
            n_nodes,
            edges,
        })
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn edge_position(&self, i: usize, j: usize) -> Option<usize> {
        let key = (i.min(j), i.max(j));
        self.edges.binary_search(&key).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    MaxCut,
    Ising,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MaxCut => "maxcut",
            Self::Ising => "ising",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Self::MaxCut => Direction::Maximize,
            Self::Ising => Direction::Minimize,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maxcut" => Ok(Self::MaxCut),
            "ising" | "ism" => Ok(Self::Ising),
            other => Err(Error::Argument(format!("unknown problem family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// Strict improvement of `candidate` over `incumbent`. NaN is never better
    /// than anything, and anything finite beats NaN.
    #[inline]
    pub fn is_better(self, candidate: f64, incumbent: f64) -> bool {
        if candidate.is_nan() {
            return false;
        }
        if incumbent.is_nan() {
            return true;
        }
        match self {
            Self::Maximize => candidate > incumbent,
            Self::Minimize => candidate < incumbent,
        }
    }
}

/// A spin configuration stored as bits; bit 0 is spin +1, bit 1 is spin -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinAssignment {
    index: usize,
    n_nodes: usize,
}

impl SpinAssignment {
    pub fn from_index(index: usize, n_nodes: usize) -> Result<Self> {
        if n_nodes == 0 || n_nodes > MAX_QUBITS || index >> n_nodes != 0 {
            return Err(Error::Argument(format!(
                "index {index} is not a valid {n_nodes}-node assignment"
            )));
        }
        Ok(Self { index, n_nodes })
    }

    /// Parses a node-0-leftmost bitstring such as `"010"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let index = index_from_bitstring(bits)?;
        Ok(Self {
            index,
            n_nodes: bits.len(),
        })
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn n_nodes(self) -> usize {
        self.n_nodes
    }

    #[inline]
    pub fn bit(self, node: usize) -> u8 {
        (self.index >> node & 1) as u8
    }

    /// z = 1 - 2·bit.
    #[inline]
    pub fn spin(self, node: usize) -> f64 {
        1.0 - 2.0 * f64::from(self.bit(node))
    }

    pub fn complement(self) -> Self {
        Self {
            index: !self.index & ((1 << self.n_nodes) - 1),
            n_nodes: self.n_nodes,
        }
    }

    pub fn to_bits(self) -> String {
        bitstring_from_index(self.index, self.n_nodes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    topology: Topology,
    family: Family,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    declared_optimum: Option<f64>,
}

impl ProblemInstance {
    /// Unit-weight Max-Cut on `topology`.
    pub fn maxcut(topology: Topology) -> Self {
        let couplings = vec![1.0; topology.edges().len()];
        Self {
            topology,
            family: Family::MaxCut,
            couplings,
            fields: Vec::new(),
            declared_optimum: None,
        }
    }

    /// Ising model with unit couplings and the given per-node fields.
    pub fn ising(topology: Topology, fields: Vec<f64>) -> Result<Self> {
        if fields.len() != topology.n_nodes() {
            return Err(Error::Argument(format!(
                "ising instance needs {} fields, got {}",
                topology.n_nodes(),
                fields.len()
            )));
        }
        if let Some(bad) = fields.iter().find(|h| !h.is_finite()) {
            return Err(Error::Argument(format!("non-finite field {bad}")));
        }
        let couplings = vec![1.0; topology.edges().len()];
        Ok(Self {
            topology,
            family: Family::Ising,
            couplings,
            fields,
            declared_optimum: None,
        })
    }

    /// Sets the same coupling on every edge.
    pub fn with_uniform_coupling(mut self, j: f64) -> Result<Self> {
        if !j.is_finite() {
            return Err(Error::Argument(format!("non-finite coupling {j}")));
        }
        self.couplings.iter_mut().for_each(|c| *c = j);
        Ok(self)
    }

    /// Sets the coupling of one existing edge.
    pub fn with_edge_coupling(mut self, i: usize, j: usize, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Argument(format!("non-finite coupling {value}")));
        }
        let pos = self
            .topology
            .edge_position(i, j)
            .ok_or_else(|| Error::Argument(format!("({i},{j}) is not an edge of the topology")))?;
        self.couplings[pos] = value;
        Ok(self)
    }

    pub fn with_declared_optimum(mut self, optimum: f64) -> Self {
        self.declared_optimum = Some(optimum);
        self
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn n_nodes(&self) -> usize {
        self.topology.n_nodes()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn direction(&self) -> Direction {
        self.family.direction()
    }

    /// One coupling per edge, aligned with `topology().edges()`.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Per-node fields; empty for Max-Cut.
    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn declared_optimum(&self) -> Option<f64> {
        self.declared_optimum
    }

    fn weighted_edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.topology
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|(&(i, j), &w)| (i, j, w))
    }

    fn check_assignment(&self, z: SpinAssignment, family: Family) -> Result<()> {
        if self.family != family {
            return Err(Error::Usage(format!(
                "{family} evaluation requested on a {} instance",
                self.family
            )));
        }
        if z.n_nodes() != self.n_nodes() {
            return Err(Error::Argument(format!(
                "assignment has {} nodes, instance has {}",
                z.n_nodes(),
                self.n_nodes()
            )));
        }
        Ok(())
    }

    /// Weighted count of edges whose endpoints carry different bits.
    pub fn cut_value(&self, z: SpinAssignment) -> Result<f64> {
        self.check_assignment(z, Family::MaxCut)?;
        Ok(self.cut_unchecked(z.index()))
    }

    /// E(z) = -Σ J_ij z_i z_j - Σ h_i z_i.
    pub fn ising_energy(&self, z: SpinAssignment) -> Result<f64> {
        self.check_assignment(z, Family::Ising)?;
        Ok(self.energy_unchecked(z.index()))
    }

    fn cut_unchecked(&self, index: usize) -> f64 {
        self.weighted_edges()
            .filter(|&(i, j, _)| (index >> i ^ index >> j) & 1 == 1)
            .map(|(_, _, w)| w)
            .sum()
    }

    fn energy_unchecked(&self, index: usize) -> f64 {
        let spin = |k: usize| 1.0 - 2.0 * (index >> k & 1) as f64;
        let coupling: f64 = self
            .weighted_edges()
            .map(|(i, j, w)| w * spin(i) * spin(j))
            .sum();
        let field: f64 = self
            .fields
            .iter()
            .enumerate()
            .map(|(k, h)| h * spin(k))
            .sum();
        -coupling - field
    }

    /// The objective value of every basis state: cut size for Max-Cut, energy for Ising.
    pub fn cost_diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n_nodes();
        match self.family {
            Family::MaxCut => (0..dim).map(|z| self.cut_unchecked(z)).collect(),
            Family::Ising => (0..dim).map(|z| self.energy_unchecked(z)).collect(),
        }
    }

    /// The diagonal the phase operator exponentiates: Σ J_ij z_i z_j + Σ h_i z_i.
    ///
    /// This is the Hamiltonian realised by one CNOT·RZ(2Jγ)·CNOT block per edge
    /// plus RZ(2hγ) per node, so `e^{-iγ·phase_diagonal}` equals the gate-level
    /// circuit exactly. For Max-Cut it is an affine map of the cut size.
    pub fn phase_diagonal(&self) -> Vec<f64> {
        let dim = 1usize << self.n_nodes();
        (0..dim).map(|z| -self.energy_unchecked(z)).collect()
    }

    /// Brute-force optimum over all 2^n assignments.
    pub fn oracle_optimum(&self) -> OracleResult {
        let diag = self.cost_diagonal();
        let direction = self.direction();
        let value = diag.iter().copied().fold(f64::NAN, |best, v| {
            if direction.is_better(v, best) {
                v
            } else {
                best
            }
        });
        let mut argopt: Vec<String> = diag
            .iter()
            .enumerate()
            .filter(|(_, &v)| (v - value).abs() <= OPTIMUM_TOLERANCE)
            .map(|(z, _)| bitstring_from_index(z, self.n_nodes()))
            .collect();
        argopt.sort_unstable();
        OracleResult { value, argopt }
    }

    /// Fails when a declared optimum disagrees with the oracle.
    pub fn verify_declared_optimum(&self) -> Result<()> {
        if let Some(declared) = self.declared_optimum {
            let oracle = self.oracle_optimum().value;
            if (declared - oracle).abs() > OPTIMUM_TOLERANCE {
                return Err(Error::Integrity(format!(
                    "declared optimum {declared} disagrees with oracle optimum {oracle}"
                )));
            }
        }
        Ok(())
    }

    /// Parses the line-oriented instance format and checks the declared optimum.
    ///
    /// ```text
    /// family=ising
    /// topology=cyclic
    /// n=4
    /// j=1.0
    /// h=0.5,0.5,0.5,0.4
    /// optimum=-5.9
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut family = None;
        let mut kind = None;
        let mut n = None;
        let mut uniform_j = None;
        let mut edge_js: Vec<(usize, usize, usize, f64)> = Vec::new();
        let mut fields: Option<(usize, Vec<f64>)> = None;
        let mut optimum = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line_no = lineno + 1;
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let real = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{s}` is not a finite number")))
            };
            match key {
                "family" => family = Some(value.parse::<Family>().map_err(|e| err(e.to_string()))?),
                "topology" => {
                    kind = Some(
                        value
                            .parse::<TopologyKind>()
                            .map_err(|e| err(e.to_string()))?,
                    )
                }
                "n" => {
                    n = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| err(format!("`{value}` is not a node count")))?,
                    )
                }
                "j" => uniform_j = Some(real(value)?),
                "j_edges" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 3 {
                        return Err(err(format!("j_edges expects i,j,value, got `{value}`")));
                    }
                    let node = |s: &str| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| err(format!("`{s}` is not a node index")))
                    };
                    edge_js.push((line_no, node(parts[0])?, node(parts[1])?, real(parts[2])?));
                }
                "h" => {
                    let hs = value.split(',').map(real).collect::<Result<Vec<_>>>()?;
                    fields = Some((line_no, hs));
                }
                "optimum" => optimum = Some((line_no, real(value)?)),
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }

        let missing = |what: &str| Error::Parse {
            line: text.lines().count().max(1),
            message: format!("missing required key `{what}`"),
        };
        let family = family.ok_or_else(|| missing("family"))?;
        let kind = kind.ok_or_else(|| missing("topology"))?;
        let n = n.ok_or_else(|| missing("n"))?;
        let topology = Topology::new(kind, n).map_err(|e| Error::Parse {
            line: text
                .lines()
                .position(|l| l.trim_start().starts_with("n="))
                .unwrap_or(0)
                + 1,
            message: e.to_string(),
        })?;

        let mut instance = match (family, fields) {
            (Family::MaxCut, None) => Self::maxcut(topology),
            (Family::MaxCut, Some((line, _))) => {
                return Err(Error::Parse {
                    line,
                    message: "maxcut instances take no fields".into(),
                })
            }
            (Family::Ising, Some((line, hs))) => {
                Self::ising(topology, hs).map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?
            }
            (Family::Ising, None) => return Err(missing("h")),
        };
        if let Some(j) = uniform_j {
            instance = instance.with_uniform_coupling(j)?;
        }
        for (line, i, j, value) in edge_js {
            instance = instance
                .with_edge_coupling(i, j, value)
                .map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
        }
        if let Some((line, opt)) = optimum {
            instance = instance.with_declared_optimum(opt);
            instance
                .verify_declared_optimum()
                .map_err(|e| Error::Parse {
                    line,
                    message: e.to_string(),
                })?;
        }
        Ok(instance)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Serializes to the instance file format. `parse(to_file_string())` reproduces `self`.
    pub fn to_file_string(&self) -> String {
        let mut out = format!(
            "family={}\ntopology={}\nn={}\n",
            self.family,
            self.topology.kind(),
            self.n_nodes()
        );
        let first = self.couplings.first().copied().unwrap_or(1.0);
        if self.couplings.iter().all(|&c| c == first) {
            out.push_str(&format!("j={first}\n"));
        } else {
            for (i, j, w) in self.weighted_edges() {
                out.push_str(&format!("j_edges={i},{j},{w}\n"));
            }
        }
        if self.family == Family::Ising {
            let hs: Vec<String> = self.fields.iter().map(f64::to_string).collect();
            out.push_str(&format!("h={}\n", hs.join(",")));
        }
        if let Some(opt) = self.declared_optimum {
            out.push_str(&format!("optimum={opt}\n"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Every optimal assignment as a node-0-leftmost bitstring, sorted.
    pub argopt: Vec<String>,
}
