//! Parameterized circuits where every parameter feeds exactly one gate.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::error::{QseaError, Result};
use crate::gate::{check_targets, Gate, GateOp};
use crate::StateVector;

/// Rotation family of a parameterized gate.
#[derive(Debug, Clone, Copy)]
pub enum ParamKind {
    Rx,
    Ry,
    Rz,
    /// Controlled RY, control first.
    Cry,
    /// Arbitrary one-parameter family with no declared generator spectrum.
    Custom { name: &'static str, arity: usize, build: fn(f64) -> Gate },
}

/// Exact parameter-shift recipe: `∂f = Σ c · f(θ + s)` over `(s, c)` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftRule {
    /// Generators with eigenvalues ±1/2.
    TwoTerm,
    /// Generators with eigenvalues {0, ±1/2}, e.g. controlled rotations.
    FourTerm,
}

impl ShiftRule {
    pub fn terms(self) -> Vec<(f64, f64)> {
        match self {
            ShiftRule::TwoTerm => vec![(FRAC_PI_2, 0.5), (-FRAC_PI_2, -0.5)],
            ShiftRule::FourTerm => {
                let dp = (SQRT_2 + 1.0) / (4.0 * SQRT_2);
                let dm = (SQRT_2 - 1.0) / (4.0 * SQRT_2);
                vec![
                    (FRAC_PI_2, dp),
                    (-FRAC_PI_2, -dp),
                    (3.0 * FRAC_PI_2, -dm),
                    (-3.0 * FRAC_PI_2, dm),
                ]
            }
        }
    }
}

impl PartialEq for ParamKind {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ParamKind::Custom { name: a, arity: n, .. }, ParamKind::Custom { name: b, arity: m, .. }) => {
                a == b && n == m
            }
            _ => std::mem::discriminant(self) == std::mem::discriminant(other),
        }
    }
}

impl ParamKind {
    pub fn arity(&self) -> usize {
        match self {
            ParamKind::Rx | ParamKind::Ry | ParamKind::Rz => 1,
            ParamKind::Cry => 2,
            ParamKind::Custom { arity, .. } => *arity,
        }
    }

    pub fn gate(&self, theta: f64) -> Gate {
        match self {
            ParamKind::Rx => Gate::rx(theta),
            ParamKind::Ry => Gate::ry(theta),
            ParamKind::Rz => Gate::rz(theta),
            ParamKind::Cry => Gate::cry(theta),
            ParamKind::Custom { build, .. } => build(theta),
        }
    }

    pub fn shift_rule(&self) -> Result<ShiftRule> {
        match self {
            ParamKind::Rx | ParamKind::Ry | ParamKind::Rz => Ok(ShiftRule::TwoTerm),
            ParamKind::Cry => Ok(ShiftRule::FourTerm),
            ParamKind::Custom { name, .. } => Err(QseaError::UnsupportedGate(name.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOp {
    Fixed(GateOp),
    Param { kind: ParamKind, targets: Vec<usize>, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    n_qubits: usize,
    n_params: usize,
    ops: Vec<CircuitOp>,
}

impl ParamCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, n_params: 0, ops: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn push_fixed(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        self.check(gate.arity(), targets)?;
        self.ops.push(CircuitOp::Fixed(GateOp::new(gate, targets)));
        Ok(())
    }

    /// Appends a gate driven by a fresh parameter; returns its index.
    pub fn push_param(&mut self, kind: ParamKind, targets: &[usize]) -> Result<usize> {
        self.check(kind.arity(), targets)?;
        let index = self.n_params;
        self.n_params += 1;
        self.ops.push(CircuitOp::Param { kind, targets: targets.to_vec(), index });
        Ok(index)
    }

    fn check(&self, arity: usize, targets: &[usize]) -> Result<()> {
        check_targets(targets, self.n_qubits)?;
        if arity != targets.len() {
            return Err(QseaError::Dimension(format!("{arity}-qubit gate given {} targets", targets.len())));
        }
        Ok(())
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(QseaError::Parameter(format!(
                "circuit has {} parameters, got {}",
                self.n_params,
                theta.len()
            )));
        }
        Ok(())
    }

    pub fn bind(&self, theta: &[f64]) -> Result<Vec<GateOp>> {
        self.check_theta(theta)?;
        Ok(self
            .ops
            .iter()
            .map(|op| match op {
                CircuitOp::Fixed(g) => g.clone(),
                CircuitOp::Param { kind, targets, index } => GateOp::new(kind.gate(theta[*index]), targets.clone()),
            })
            .collect())
    }

    pub fn run(&self, theta: &[f64], input: &StateVector) -> Result<StateVector> {
        if input.n_qubits() != self.n_qubits {
            return Err(QseaError::Dimension(format!(
                "{}-qubit circuit applied to {}-qubit state",
                self.n_qubits,
                input.n_qubits()
            )));
        }
        self.check_theta(theta)?;
        let mut s = input.clone();
        for op in &self.ops {
            match op {
                CircuitOp::Fixed(g) => s.apply_unchecked(&g.gate, &g.targets),
                CircuitOp::Param { kind, targets, index } => s.apply_unchecked(&kind.gate(theta[*index]), targets),
            }
        }
        Ok(s)
    }

    /// Shift rule for each parameter index.
    pub fn shift_rules(&self) -> Result<Vec<ShiftRule>> {
        let mut rules = vec![ShiftRule::TwoTerm; self.n_params];
        for op in &self.ops {
            if let CircuitOp::Param { kind, index, .. } = op {
                rules[*index] = kind.shift_rule()?;
            }
        }
        Ok(rules)
    }
}
