#![allow(dead_code)]

use std::f64::consts::PI;

use qsea::circuit::{ParamCircuit, ParamKind};
use qsea::{DensityMatrix, Gate, GateOp, StateVector, C64};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_state<R: Rng>(n: usize, rng: &mut R) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    StateVector::new(n, amps).unwrap()
}

/// Mixture of `rank` random pure states with random weights.
pub fn random_density<R: Rng>(n: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1usize << n;
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
    for w in weights {
        let psi = random_state(n, rng);
        let a = psi.amps();
        for i in 0..dim {
            for j in 0..dim {
                rho[i * dim + j] += a[i] * a[j].conj() * (w / total);
            }
        }
    }
    DensityMatrix::new(n, rho).unwrap()
}

/// Product of random rotations: a generic-looking single-qubit unitary.
pub fn random_1q<R: Rng>(rng: &mut R) -> Gate {
    let mut m = Gate::rz(rng.random_range(0.0..2.0 * PI)).matrix().to_vec();
    for g in [Gate::ry(rng.random_range(0.0..PI)), Gate::rz(rng.random_range(0.0..2.0 * PI))] {
        let b = g.matrix();
        m = vec![
            b[0] * m[0] + b[1] * m[2],
            b[0] * m[1] + b[1] * m[3],
            b[2] * m[0] + b[3] * m[2],
            b[2] * m[1] + b[3] * m[3],
        ];
    }
    Gate::new("U", 1, m).unwrap()
}

fn distinct<R: Rng>(n: usize, k: usize, rng: &mut R) -> Vec<usize> {
    let mut q: Vec<usize> = (0..n).collect();
    q.shuffle(rng);
    q.truncate(k);
    q
}

/// Random gate from the library (or a random 1-qubit unitary) on random
/// distinct targets.
pub fn random_op<R: Rng>(n: usize, rng: &mut R) -> GateOp {
    let t = rng.random_range(0.0..2.0 * PI);
    let choice = rng.random_range(0..if n >= 3 { 11 } else if n == 2 { 10 } else { 6 });
    let gate = match choice {
        0 => Gate::h(),
        1 => Gate::rx(t),
        2 => Gate::ry(t),
        3 => Gate::rz(t),
        4 => Gate::y(),
        5 => random_1q(rng),
        6 => Gate::cnot(),
        7 => Gate::cz(),
        8 => Gate::cry(t),
        9 => Gate::swap(),
        _ => Gate::cswap(),
    };
    let targets = distinct(n, gate.arity(), rng);
    GateOp::new(gate, targets)
}

pub fn random_circuit<R: Rng>(n: usize, depth: usize, rng: &mut R) -> Vec<GateOp> {
    (0..depth).map(|_| random_op(n, rng)).collect()
}

/// Random parameterized circuit with shift-rule-compatible gates and some
/// fixed entanglers.
pub fn random_param_circuit<R: Rng>(n: usize, n_params: usize, rng: &mut R) -> ParamCircuit {
    let mut c = ParamCircuit::new(n);
    for _ in 0..n_params {
        if n >= 2 && rng.random_bool(0.3) {
            c.push_fixed(Gate::cnot(), &distinct(n, 2, rng)).unwrap();
        }
        let kind = match rng.random_range(0..if n >= 2 { 4 } else { 3 }) {
            0 => ParamKind::Rx,
            1 => ParamKind::Ry,
            2 => ParamKind::Rz,
            _ => ParamKind::Cry,
        };
        let targets = distinct(n, kind.arity(), rng);
        c.push_param(kind, &targets).unwrap();
    }
    c
}
