//! Exact fidelities and shot-based overlap estimators.
//!
//! Two measurement circuits are provided. The swap test puts an ancilla in
//! `|+>`, swaps the two registers under its control, and reads
//! `P(0) = (1 + Tr(ρσ)) / 2`. Compute–uncompute prepares one state,
//! applies the inverse preparation of the other, and reads the all-zeros
//! probability `|<b|a>|²`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{QseaError, Result};
use crate::gate::{inverse, Gate, GateOp};
use crate::{DensityMatrix, StateVector, ARITH_TOL};

/// How fidelities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityMode {
    #[default]
    Exact,
    /// Swap-test estimate; per-pair seeds are `seed ^ pair_index`.
    Shots { shots: u64, seed: u64 },
}

/// Seed for the `index`-th independent estimate under a root seed.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    root ^ index
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityEstimate {
    pub value: f64,
    /// Zero for exact values.
    pub shots: u64,
    pub std_err: f64,
}

impl FidelityEstimate {
    pub fn exact(value: f64) -> Self {
        Self { value: value.clamp(0.0, 1.0), shots: 0, std_err: 0.0 }
    }
}

/// `|<a|b>|²`
pub fn exact_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// `<a|ρ|a>`
pub fn pure_mixed_fidelity(a: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    Ok(rho.expectation(a)?.clamp(0.0, 1.0))
}

/// Second register of a swap test.
#[derive(Debug, Clone, Copy)]
pub enum SwapOperand<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for SwapOperand<'a> {
    fn from(s: &'a StateVector) -> Self {
        SwapOperand::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for SwapOperand<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        SwapOperand::Mixed(r)
    }
}

impl SwapOperand<'_> {
    fn n_qubits(&self) -> usize {
        match self {
            SwapOperand::Pure(s) => s.n_qubits(),
            SwapOperand::Mixed(r) => r.n_qubits(),
        }
    }
}

/// Swap-test circuit on `2n + 1` qubits: ancilla 0, registers `1..=n` and
/// `n+1..=2n`.
pub fn swap_test_circuit(n: usize) -> Vec<GateOp> {
    let mut ops = vec![GateOp::new(Gate::h(), [0])];
    ops.extend((0..n).map(|i| GateOp::new(Gate::cswap(), [0, 1 + i, 1 + n + i])));
    ops.push(GateOp::new(Gate::h(), [0]));
    ops
}

/// Ancilla zero-outcome probability of the swap test, by simulating the
/// circuit. A mixed operand is handled through its spectral decomposition.
pub fn swap_test_p0<'a>(a: &StateVector, b: impl Into<SwapOperand<'a>>) -> Result<f64> {
    let b = b.into();
    let n = a.n_qubits();
    if b.n_qubits() != n {
        return Err(QseaError::Dimension(format!(
            "swap test between {n}- and {}-qubit registers",
            b.n_qubits()
        )));
    }
    let circuit = swap_test_circuit(n);
    let pure_p0 = |b: &StateVector| -> Result<f64> {
        let out = StateVector::zero(1).tensor(a).tensor(b).apply_ops(&circuit)?;
        Ok(out.measure_probs(&[0])?[0])
    };
    match b {
        SwapOperand::Pure(s) => pure_p0(s),
        SwapOperand::Mixed(rho) => rho
            .eigen_decomposition(ARITH_TOL)
            .iter()
            .map(|(w, v)| pure_p0(v).map(|p| w * p))
            .sum(),
    }
}

fn sample_zeros(p0: f64, shots: u64, seed: u64) -> Result<u64> {
    if shots == 0 {
        return Err(QseaError::Parameter("shots must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Binomial::new(shots, p0.clamp(0.0, 1.0)).map_err(|e| QseaError::Parameter(e.to_string()))?;
    Ok(dist.sample(&mut rng))
}

/// Swap-test fidelity estimate `2·zeros/shots − 1`, clamped to `[0, 1]`.
///
/// The standard error is that of `2p̂ − 1`, i.e. `sqrt((1 − v²)/shots)`,
/// floored at `1/shots`.
pub fn swap_test_estimate<'a>(
    a: &StateVector,
    b: impl Into<SwapOperand<'a>>,
    shots: u64,
    seed: u64,
) -> Result<FidelityEstimate> {
    let p0 = swap_test_p0(a, b)?;
    let zeros = sample_zeros(p0, shots, seed)?;
    let value = (2.0 * zeros as f64 / shots as f64 - 1.0).clamp(0.0, 1.0);
    let std_err = ((1.0 - value * value) / shots as f64).sqrt().max(1.0 / shots as f64);
    Ok(FidelityEstimate { value, shots, std_err })
}

/// Runs `prep_a` then `prep_b†` from `|0…0>` and reports the all-zeros
/// frequency.
pub fn compute_uncompute_estimate(
    prep_a: &[GateOp],
    prep_b: &[GateOp],
    n: usize,
    shots: u64,
    seed: u64,
) -> Result<FidelityEstimate> {
    let p0 = compute_uncompute_p0(prep_a, prep_b, n)?;
    let zeros = sample_zeros(p0, shots, seed)?;
    let value = (zeros as f64 / shots as f64).clamp(0.0, 1.0);
    let std_err = (value * (1.0 - value) / shots as f64).sqrt().max(1.0 / shots as f64);
    Ok(FidelityEstimate { value, shots, std_err })
}

/// Exact all-zeros probability of the compute–uncompute circuit.
pub fn compute_uncompute_p0(prep_a: &[GateOp], prep_b: &[GateOp], n: usize) -> Result<f64> {
    let mut ops = prep_a.to_vec();
    ops.extend(inverse(prep_b));
    let out = StateVector::zero(n).apply_ops(&ops)?;
    Ok(out.amps()[0].norm_sqr())
}

/// Fidelity between two pure states under `mode`; `pair` selects the
/// derived seed in shot mode.
pub fn fidelity_with_mode(a: &StateVector, b: &StateVector, mode: FidelityMode, pair: u64) -> Result<f64> {
    match mode {
        FidelityMode::Exact => exact_fidelity(a, b),
        FidelityMode::Shots { shots, seed } => Ok(swap_test_estimate(a, b, shots, derive_seed(seed, pair))?.value),
    }
}
