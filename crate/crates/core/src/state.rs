//! Pure and mixed quantum states over `n` qubits.

use nalgebra::DMatrix;

use crate::error::{QseaError, Result};
use crate::gate::{check_targets, Gate, GateOp};
use crate::{kernel, C64, PSD_TOL, STATE_TOL};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Unit-norm amplitude vector of length `2^n_qubits`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Rescales `amps` to unit L2 norm.
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || amps.len() != 1usize << n_qubits {
            return Err(QseaError::Dimension(format!(
                "{n_qubits} qubits need {} amplitudes, got {}",
                1usize.checked_shl(n_qubits as u32).unwrap_or(0),
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(QseaError::DegenerateInput("amplitudes are all zero or non-finite".into()));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn from_real(n_qubits: usize, values: &[f64]) -> Result<Self> {
        Self::new(n_qubits, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || index >= dim {
            return Err(QseaError::Index(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0).expect("n_qubits must be positive")
    }

    /// `|+>^{⊗n}`
    pub fn plus(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = C64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self { n_qubits, amps: vec![a; dim] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, targets)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate, targets: &[usize]) -> Result<()> {
        check_targets(targets, self.n_qubits)?;
        if gate.arity() != targets.len() {
            return Err(QseaError::Dimension(format!(
                "{} acts on {} qubits but {} targets given",
                gate.name(),
                gate.arity(),
                targets.len()
            )));
        }
        self.apply_unchecked(gate, targets);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &Gate, targets: &[usize]) {
        if gate.is_diagonal() {
            kernel::apply_diagonal(&mut self.amps, self.n_qubits, &gate.diagonal_entries(), targets);
        } else {
            kernel::apply_matrix(&mut self.amps, self.n_qubits, gate.matrix(), targets);
        }
    }

    pub fn apply_ops(&self, ops: &[GateOp]) -> Result<Self> {
        let mut out = self.clone();
        for op in ops {
            out.apply_gate_mut(&op.gate, &op.targets)?;
        }
        Ok(out)
    }

    /// Kronecker product with `self` as the most significant register.
    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        StateVector { n_qubits: self.n_qubits + other.n_qubits, amps }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.n_qubits != other.n_qubits {
            return Err(QseaError::Dimension(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let mut rho = Vec::with_capacity(d * d);
        for a in &self.amps {
            rho.extend(self.amps.iter().map(|b| a * b.conj()));
        }
        DensityMatrix { n_qubits: self.n_qubits, rho }
    }

    /// Outcome probabilities of measuring `register`, marginalised over the
    /// remaining qubits. Entry `j` reads the register bits with `register[0]`
    /// most significant.
    pub fn measure_probs(&self, register: &[usize]) -> Result<Vec<f64>> {
        check_targets(register, self.n_qubits)?;
        let pos: Vec<usize> = register.iter().map(|&q| self.n_qubits - 1 - q).collect();
        let mut probs = vec![0.0; 1 << register.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let j = pos.iter().fold(0usize, |acc, &p| (acc << 1) | ((i >> p) & 1));
            probs[j] += a.norm_sqr();
        }
        Ok(probs)
    }
}

/// `2^n x 2^n` density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    rho: Vec<C64>,
}

impl DensityMatrix {
    /// Validates trace, Hermiticity and positivity.
    pub fn new(n_qubits: usize, rho: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if n_qubits == 0 || rho.len() != dim * dim {
            return Err(QseaError::Dimension(format!(
                "{n_qubits}-qubit density matrix needs {} entries, got {}",
                dim * dim,
                rho.len()
            )));
        }
        let m = Self { n_qubits, rho };
        let tr = m.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(QseaError::DegenerateInput(format!("trace is {tr}, expected 1")));
        }
        if m.hermiticity_deviation() > STATE_TOL {
            return Err(QseaError::DegenerateInput("matrix is not Hermitian".into()));
        }
        if m.min_eigenvalue() < -PSD_TOL {
            return Err(QseaError::DegenerateInput("matrix is not positive semidefinite".into()));
        }
        Ok(m)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut rho = vec![ZERO; dim * dim];
        for i in 0..dim {
            rho[i * dim + i] = C64::new(1.0 / dim as f64, 0.0);
        }
        Self { n_qubits, rho }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.rho
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.rho
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.rho[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.rho[i * d + i]).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.rho[i * d + j] - self.rho[j * d + i].conj()).norm());
            }
        }
        worst
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_row_slice(d, d, &self.rho)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Spectral decomposition `ρ = Σ λ_i |e_i><e_i|`, skipping eigenvalues
    /// at or below `cutoff`.
    pub fn eigen_decomposition(&self, cutoff: f64) -> Vec<(f64, StateVector)> {
        let eig = self.to_nalgebra().symmetric_eigen();
        let d = self.dim();
        eig.eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > cutoff)
            .map(|(k, &l)| {
                let col: Vec<C64> = (0..d).map(|r| eig.eigenvectors[(r, k)]).collect();
                let v = StateVector::new(self.n_qubits, col).expect("eigenvector is nonzero");
                (l, v)
            })
            .collect()
    }

    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<a|ρ|a>`, real part.
    pub fn expectation(&self, a: &StateVector) -> Result<f64> {
        if a.n_qubits() != self.n_qubits {
            return Err(QseaError::Dimension(format!(
                "{}-qubit state against {}-qubit density matrix",
                a.n_qubits(),
                self.n_qubits
            )));
        }
        let d = self.dim();
        let amps = a.amps();
        let mut acc = ZERO;
        for (i, ai) in amps.iter().enumerate() {
            let row = &self.rho[i * d..(i + 1) * d];
            let r: C64 = row.iter().zip(amps).map(|(x, b)| x * b).sum();
            acc += ai.conj() * r;
        }
        Ok(acc.re)
    }

    /// `Tr(ρσ)` for Hermitian operands.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if other.n_qubits != self.n_qubits {
            return Err(QseaError::Dimension(format!(
                "overlap of {}- and {}-qubit density matrices",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self.rho.iter().zip(&other.rho).map(|(a, b)| (a * b.conj()).re).sum())
    }

    /// `self ⊗ other`, with `self` the most significant register.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da, db) = (self.dim(), other.dim());
        let d = da * db;
        let mut rho = vec![ZERO; d * d];
        for i in 0..da {
            for j in 0..da {
                let a = self.rho[i * da + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..db {
                    for l in 0..db {
                        rho[(i * db + k) * d + j * db + l] = a * other.rho[k * db + l];
                    }
                }
            }
        }
        DensityMatrix { n_qubits: self.n_qubits + other.n_qubits, rho }
    }

    /// Reduced state on `keep`; the kept qubits appear in the listed order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        check_targets(keep, self.n_qubits)?;
        let n = self.n_qubits;
        let d = self.dim();
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let spread = |bits: usize, qubits: &[usize]| -> usize {
            let k = qubits.len();
            qubits
                .iter()
                .enumerate()
                .filter(|(j, _)| (bits >> (k - 1 - j)) & 1 == 1)
                .fold(0usize, |acc, (_, &q)| acc | (1 << (n - 1 - q)))
        };
        let kept_idx: Vec<usize> = (0..1usize << keep.len()).map(|b| spread(b, keep)).collect();
        let traced_idx: Vec<usize> = (0..1usize << traced.len()).map(|b| spread(b, &traced)).collect();
        let dk = kept_idx.len();
        let mut out = vec![ZERO; dk * dk];
        for (i, &gi) in kept_idx.iter().enumerate() {
            for (j, &gj) in kept_idx.iter().enumerate() {
                out[i * dk + j] = traced_idx.iter().map(|&t| self.rho[(gi | t) * d + (gj | t)]).sum();
            }
        }
        Ok(DensityMatrix { n_qubits: keep.len(), rho: out })
    }

    /// `ρ -> U ρ U†`
    pub fn apply_gate(&self, gate: &Gate, targets: &[usize]) -> Result<Self> {
        let mut out = self.clone();
        out.apply_gate_mut(gate, targets)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate, targets: &[usize]) -> Result<()> {
        check_targets(targets, self.n_qubits)?;
        if gate.arity() != targets.len() {
            return Err(QseaError::Dimension(format!(
                "{} acts on {} qubits but {} targets given",
                gate.name(),
                gate.arity(),
                targets.len()
            )));
        }
        let n = self.n_qubits;
        let col_targets: Vec<usize> = targets.iter().map(|t| t + n).collect();
        if gate.is_diagonal() {
            let diag = gate.diagonal_entries();
            let conj: Vec<C64> = diag.iter().map(|c| c.conj()).collect();
            kernel::apply_diagonal(&mut self.rho, 2 * n, &diag, targets);
            kernel::apply_diagonal(&mut self.rho, 2 * n, &conj, &col_targets);
        } else {
            let conj: Vec<C64> = gate.matrix().iter().map(|c| c.conj()).collect();
            kernel::apply_matrix(&mut self.rho, 2 * n, gate.matrix(), targets);
            kernel::apply_matrix(&mut self.rho, 2 * n, &conj, &col_targets);
        }
        Ok(())
    }

    pub fn apply_ops(&self, ops: &[GateOp]) -> Result<Self> {
        let mut out = self.clone();
        for op in ops {
            out.apply_gate_mut(&op.gate, &op.targets)?;
        }
        Ok(out)
    }

    /// Largest entrywise distance to another density matrix.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.rho.iter().zip(&other.rho).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}
