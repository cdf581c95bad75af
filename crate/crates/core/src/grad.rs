//! Gradients of circuit expectation values.

use crate::augment::{anchor_overlap, ea_ansatz};
use crate::circuit::{CircuitOp, ParamCircuit, ShiftRule};
use crate::error::{QseaError, Result};
use crate::gate::Gate;
use crate::{StateVector, C64};

/// Parameter-shift gradient of `f`, an expectation value of `circuit`.
///
/// Shifted points are evaluated as given, even outside any constraint box
/// the caller enforces on the iterate.
pub fn parameter_shift_grad<F>(circuit: &ParamCircuit, theta: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if theta.len() != circuit.n_params() {
        return Err(QseaError::Parameter(format!(
            "circuit has {} parameters, got {}",
            circuit.n_params(),
            theta.len()
        )));
    }
    let rules = circuit.shift_rules()?;
    let mut shifted = theta.to_vec();
    Ok(rules
        .iter()
        .enumerate()
        .map(|(k, rule)| {
            let g = rule
                .terms()
                .into_iter()
                .map(|(s, c)| {
                    shifted[k] = theta[k] + s;
                    c * f(&shifted)
                })
                .sum();
            shifted[k] = theta[k];
            g
        })
        .collect())
}

/// Central differences `[f(θ + h e_k) - f(θ - h e_k)] / 2h`.
pub fn finite_diff_grad<F>(f: F, theta: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(&[f64]) -> f64,
{
    assert!(h > 0.0, "step must be positive");
    let mut x = theta.to_vec();
    (0..theta.len())
        .map(|k| {
            x[k] = theta[k] + h;
            let up = f(&x);
            x[k] = theta[k] - h;
            let down = f(&x);
            x[k] = theta[k];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Positive-pair fidelity and its parameter-shift gradient for one anchor.
///
/// Produces the same shifted evaluations as [`parameter_shift_grad`] over
/// the augmentation ansatz, but shares work between them: the forward pass
/// caches the state entering every parameterized gate, and a backward pass
/// carries the two bra vectors `U_{>k}† (|ψ_A> ⊗ |a>)`, so each shifted
/// fidelity costs one gate application and two inner products.
pub struct EaGradient {
    circuit: ParamCircuit,
    rules: Vec<ShiftRule>,
}

impl EaGradient {
    pub fn new(n_data: usize, layers: usize) -> Self {
        let circuit = ea_ansatz(n_data, layers);
        let rules = circuit.shift_rules().expect("ansatz gates all admit shift rules");
        Self { circuit, rules }
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.circuit
    }

    /// Returns `(F, ∂F/∂θ)`.
    pub fn fidelity_and_grad(&self, psi_a: &StateVector, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n_data = self.circuit.n_qubits() - 1;
        if psi_a.n_qubits() != n_data {
            return Err(QseaError::Dimension(format!(
                "{}-qubit anchor for a {n_data}-qubit augmentation",
                psi_a.n_qubits()
            )));
        }
        let ops = self.circuit.bind(theta)?;
        let mut state = psi_a.tensor(&StateVector::zero(1));
        let mut prefixes: Vec<Option<StateVector>> = Vec::with_capacity(ops.len());
        for (op, raw) in ops.iter().zip(self.circuit.ops()) {
            let is_param = matches!(raw, CircuitOp::Param { .. });
            prefixes.push(is_param.then(|| state.clone()));
            state.apply_unchecked(&op.gate, &op.targets);
        }
        let value = anchor_overlap(psi_a, &state);

        let mut bras = [psi_a.tensor(&StateVector::zero(1)), psi_a.tensor(&StateVector::basis(1, 1)?)];
        let mut grad = vec![0.0; theta.len()];
        for ((op, raw), prefix) in ops.iter().zip(self.circuit.ops()).zip(&prefixes).rev() {
            if let (CircuitOp::Param { kind, targets, index }, Some(prefix)) = (raw, prefix) {
                grad[*index] = self.rules[*index]
                    .terms()
                    .into_iter()
                    .map(|(s, c)| c * shifted_overlap(&bras, &kind.gate(theta[*index] + s), targets, prefix))
                    .sum();
            }
            let adj = op.gate.adjoint();
            for b in &mut bras {
                b.apply_unchecked(&adj, &op.targets);
            }
        }
        Ok((value, grad))
    }
}

fn shifted_overlap(bras: &[StateVector; 2], gate: &Gate, targets: &[usize], prefix: &StateVector) -> f64 {
    let mut s = prefix.clone();
    s.apply_unchecked(gate, targets);
    bras.iter()
        .map(|b| b.amps().iter().zip(s.amps()).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr())
        .sum()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::augment::augment_with_angles;
    use crate::circuit::ParamKind;

    fn ry_overlap(theta: &[f64]) -> f64 {
        let s = StateVector::zero(1).apply_gate(&Gate::ry(theta[0]), &[0]).unwrap();
        s.amps()[0].norm_sqr()
    }

    #[test]
    fn cos_squared_examples() {
        let mut c = ParamCircuit::new(1);
        c.push_param(ParamKind::Ry, &[0]).unwrap();
        let g = parameter_shift_grad(&c, &[FRAC_PI_2], ry_overlap).unwrap();
        // analytic: d/dθ cos²(θ/2) = -sin(θ)/2
        assert!((g[0] + 0.5).abs() < 1e-14);
        let fd = finite_diff_grad(ry_overlap, &[FRAC_PI_2], 1e-5);
        assert!((fd[0] + 0.5).abs() < 1e-9);
        let g0 = parameter_shift_grad(&c, &[0.0], ry_overlap).unwrap();
        assert!(g0[0].abs() < 1e-15);
    }

    #[test]
    fn finite_diff_examples() {
        let g = finite_diff_grad(|_| 3.0, &[0.1, 0.2], 1e-4);
        assert_eq!(g, vec![0.0, 0.0]);
        let c = [1.5, -2.0, 0.25];
        let lin = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>();
        let g = finite_diff_grad(lin, &[0.3, 0.1, -0.7], 1e-3);
        assert!(g.iter().zip(&c).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn unsupported_gate_is_rejected() {
        fn build(t: f64) -> Gate {
            Gate::ry(t * t)
        }
        let mut c = ParamCircuit::new(1);
        c.push_param(ParamKind::Custom { name: "RY(θ²)", arity: 1, build }, &[0]).unwrap();
        assert!(matches!(parameter_shift_grad(&c, &[0.3], ry_overlap), Err(QseaError::UnsupportedGate(_))));
    }

    #[test]
    fn cached_gradient_matches_generic_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, layers) in [(1, 1), (2, 2), (3, 1)] {
            let eg = EaGradient::new(n, layers);
            let amps: Vec<C64> = (0..1 << n).map(|_| C64::new(rng.random(), rng.random())).collect();
            let psi = StateVector::new(n, amps).unwrap();
            let theta: Vec<f64> = (0..eg.circuit().n_params()).map(|_| rng.random_range(0.0..FRAC_PI_2)).collect();
            let f = |t: &[f64]| anchor_overlap(&psi, &augment_with_angles(&psi, layers, t).unwrap());
            let (value, cached) = eg.fidelity_and_grad(&psi, &theta).unwrap();
            let generic = parameter_shift_grad(eg.circuit(), &theta, f).unwrap();
            assert!((value - f(&theta)).abs() < 1e-13);
            for (a, b) in cached.iter().zip(&generic) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }
}
