//! Entanglement-based augmentation.
//!
//! An ancilla prepared with H is appended as the least significant qubit
//! of the data register, then `L` layers act on all `n + 1` qubits:
//!
//! 1. `RY(θ) RZ(θ)` on every qubit, data qubits first, ancilla last;
//! 2. ancilla-controlled `RY(θ)` onto each data qubit in order;
//! 3. a CZ ring over adjacent data qubits (one CZ for two data qubits,
//!    none for one).
//!
//! Parameters are consumed in exactly that order, `3n + 2` per layer.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;

use crate::circuit::{ParamCircuit, ParamKind};
use crate::error::{QseaError, Result};
use crate::gate::{Gate, GateOp};
use crate::{DensityMatrix, StateVector, C64};

/// Upper end of the allowed augmentation angle range.
pub const THETA_MAX: f64 = FRAC_PI_2;

#[derive(Debug, Clone, PartialEq)]
pub struct EaParams {
    n_data: usize,
    layers: usize,
    theta: Vec<f64>,
}

impl EaParams {
    pub fn param_count(n_data: usize, layers: usize) -> usize {
        layers * (3 * n_data + 2)
    }

    pub fn new(n_data: usize, layers: usize, theta: Vec<f64>) -> Result<Self> {
        if n_data == 0 || layers == 0 {
            return Err(QseaError::Parameter("need at least one data qubit and one layer".into()));
        }
        let expected = Self::param_count(n_data, layers);
        if theta.len() != expected {
            return Err(QseaError::Parameter(format!(
                "{n_data} data qubits x {layers} layers need {expected} angles, got {}",
                theta.len()
            )));
        }
        if let Some(bad) = theta.iter().find(|t| !(0.0..=THETA_MAX).contains(*t)) {
            return Err(QseaError::Parameter(format!("angle {bad} outside [0, π/2]")));
        }
        Ok(Self { n_data, layers, theta })
    }

    pub fn zeros(n_data: usize, layers: usize) -> Result<Self> {
        Self::new(n_data, layers, vec![0.0; Self::param_count(n_data, layers)])
    }

    /// Angles drawn uniformly from `[0, π/2]`.
    pub fn random<R: Rng + ?Sized>(n_data: usize, layers: usize, rng: &mut R) -> Result<Self> {
        let theta = (0..Self::param_count(n_data, layers)).map(|_| rng.random_range(0.0..=THETA_MAX)).collect();
        Self::new(n_data, layers, theta)
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Replaces the angles, clamping each into `[0, π/2]`.
    pub fn set_projected(&mut self, theta: &[f64]) {
        debug_assert_eq!(theta.len(), self.theta.len());
        for (dst, &t) in self.theta.iter_mut().zip(theta) {
            *dst = t.clamp(0.0, THETA_MAX);
        }
    }
}

/// Parameter-free description of the augmentation ansatz over `n_data + 1`
/// qubits.
pub fn ea_ansatz(n_data: usize, layers: usize) -> ParamCircuit {
    let anc = n_data;
    let mut c = ParamCircuit::new(n_data + 1);
    let built: Result<()> = (|| {
        c.push_fixed(Gate::h(), &[anc])?;
        for _ in 0..layers {
            for q in 0..=n_data {
                c.push_param(ParamKind::Ry, &[q])?;
                c.push_param(ParamKind::Rz, &[q])?;
            }
            for q in 0..n_data {
                c.push_param(ParamKind::Cry, &[anc, q])?;
            }
            for (a, b) in ring_pairs(n_data) {
                c.push_fixed(Gate::cz(), &[a, b])?;
            }
        }
        Ok(())
    })();
    built.expect("ansatz indices are in range by construction");
    c
}

fn ring_pairs(n: usize) -> Vec<(usize, usize)> {
    match n {
        0 | 1 => Vec::new(),
        2 => vec![(0, 1)],
        _ => (0..n).map(|k| (k, (k + 1) % n)).collect(),
    }
}

/// Bound augmentation circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct EaCircuit {
    n_data: usize,
    ops: Vec<GateOp>,
}

impl EaCircuit {
    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn ancilla(&self) -> usize {
        self.n_data
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }
}

pub fn build_ea_circuit(p: &EaParams) -> Result<EaCircuit> {
    let ops = ea_ansatz(p.n_data, p.layers).bind(&p.theta)?;
    Ok(EaCircuit { n_data: p.n_data, ops })
}

/// `U_aug(θ) (|ψ_A> ⊗ |0>)`.
pub fn augment_state(psi_a: &StateVector, p: &EaParams) -> Result<StateVector> {
    augment_with_angles(psi_a, p.layers, &p.theta)
}

/// Like [`augment_state`] but with unconstrained angles, for shifted
/// evaluations outside `[0, π/2]`.
pub fn augment_with_angles(psi_a: &StateVector, layers: usize, theta: &[f64]) -> Result<StateVector> {
    let n = psi_a.n_qubits();
    if theta.len() != EaParams::param_count(n, layers) {
        return Err(QseaError::Dimension(format!(
            "{n}-qubit anchor does not match {} angles over {layers} layers",
            theta.len()
        )));
    }
    ea_ansatz(n, layers).run(theta, &psi_a.tensor(&StateVector::zero(1)))
}

/// Data-register reduced state `Tr_anc |ψ_P><ψ_P|`.
pub fn positive_reduced(psi_p: &StateVector, n_data: usize) -> Result<DensityMatrix> {
    if psi_p.n_qubits() != n_data + 1 {
        return Err(QseaError::Dimension(format!(
            "expected {} qubits (data + ancilla), got {}",
            n_data + 1,
            psi_p.n_qubits()
        )));
    }
    let keep: Vec<usize> = (0..n_data).collect();
    psi_p.to_density().partial_trace(&keep)
}

/// `<ψ_A| Tr_anc |ψ_P><ψ_P| |ψ_A>` without forming the density matrix.
pub fn anchor_overlap(psi_a: &StateVector, psi_p: &StateVector) -> f64 {
    let a = psi_a.amps();
    let p = psi_p.amps();
    debug_assert_eq!(2 * a.len(), p.len());
    let mut acc = [C64::new(0.0, 0.0); 2];
    for (i, ai) in a.iter().enumerate() {
        let c = ai.conj();
        acc[0] += c * p[2 * i];
        acc[1] += c * p[2 * i + 1];
    }
    (acc[0].norm_sqr() + acc[1].norm_sqr()).min(1.0)
}

/// Positive-pair fidelity `F(ψ_A, ψ_P)` under the reduced-state convention.
pub fn positive_fidelity(psi_a: &StateVector, p: &EaParams) -> Result<f64> {
    Ok(anchor_overlap(psi_a, &augment_state(psi_a, p)?))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_1_SQRT_2;

    use super::*;

    #[test]
    fn gate_counts() {
        let one = build_ea_circuit(&EaParams::zeros(1, 1).unwrap()).unwrap();
        assert_eq!(one.ops().len(), 6);
        let two = build_ea_circuit(&EaParams::zeros(2, 1).unwrap()).unwrap();
        assert_eq!(two.ops().len(), 10);
        assert_eq!(two.ops().iter().filter(|o| o.gate.name() == "CZ").count(), 1);
        let three = build_ea_circuit(&EaParams::zeros(3, 2).unwrap()).unwrap();
        assert_eq!(three.ops().iter().filter(|o| o.gate.name() == "CZ").count(), 6);
        assert_eq!(three.ops()[0].gate.name(), "H");
        assert_eq!(three.ops()[0].targets, vec![3]);
    }

    #[test]
    fn param_errors() {
        assert!(EaParams::new(2, 1, vec![0.0; 7]).is_err());
        assert!(EaParams::new(2, 1, vec![0.0; 8]).is_ok());
        let mut t = vec![0.0; 8];
        t[3] = 2.0;
        assert!(EaParams::new(2, 1, t).is_err());
    }

    #[test]
    fn zero_angles_only_prepare_ancilla() {
        let psi = StateVector::zero(2);
        let out = augment_state(&psi, &EaParams::zeros(2, 2).unwrap()).unwrap();
        let expected = psi.tensor(&StateVector::plus(1));
        assert!(out.amps().iter().zip(expected.amps()).all(|(a, b)| (a - b).norm() < 1e-15));
        let rho = positive_reduced(&out, 2).unwrap();
        assert!(rho.max_abs_diff(&psi.to_density()) < 1e-15);
    }

    #[test]
    fn controlled_ry_example() {
        // single data qubit, only the controlled-RY angle (index 4) set to π/2
        let mut theta = vec![0.0; 5];
        theta[4] = FRAC_PI_2;
        let p = EaParams::new(1, 1, theta).unwrap();
        let out = augment_state(&StateVector::zero(1), &p).unwrap();
        // brute force: (|0>|0> + (cos π/4 |0> + sin π/4 |1>)|1>) / √2
        let c = FRAC_1_SQRT_2;
        let expected = [c, c * c, 0.0, c * c];
        for (a, e) in out.amps().iter().zip(expected) {
            assert!((a - C64::new(e, 0.0)).norm() < 1e-15);
        }
        let rho = positive_reduced(&out, 1).unwrap();
        assert!((rho.get(0, 0).re - 0.75).abs() < 1e-15);
        assert!((positive_fidelity(&StateVector::zero(1), &p).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn bell_pair_reduces_to_mixed() {
        let bell = StateVector::from_real(2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let rho = positive_reduced(&bell, 1).unwrap();
        assert!(rho.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < 1e-15);
        assert!(positive_reduced(&bell, 2).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let p = EaParams::zeros(2, 1).unwrap();
        assert!(matches!(augment_state(&StateVector::zero(3), &p), Err(QseaError::Dimension(_))));
    }

    #[test]
    fn projection_clamps() {
        let mut p = EaParams::zeros(1, 1).unwrap();
        p.set_projected(&[-0.1, 0.3, 2.0, 1.0, 0.0]);
        assert_eq!(p.theta(), &[0.0, 0.3, THETA_MAX, 1.0, 0.0]);
    }
}
