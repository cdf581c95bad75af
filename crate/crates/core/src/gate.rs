use std::borrow::Cow;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{QseaError, Result};
use crate::{C64, STATE_TOL};

/// A unitary on `arity` qubits, stored as a row-major `2^k x 2^k` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    name: Cow<'static, str>,
    arity: usize,
    matrix: Vec<C64>,
    diagonal: bool,
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Gate {
    /// Builds a gate from an arbitrary matrix, checking unitarity.
    pub fn new(name: impl Into<Cow<'static, str>>, arity: usize, matrix: Vec<C64>) -> Result<Self> {
        let gate = Self::unchecked(name, arity, matrix)?;
        let dev = gate.unitarity_deviation();
        if dev > STATE_TOL {
            return Err(QseaError::Parameter(format!(
                "gate {} is not unitary (max |U†U - I| = {dev:e})",
                gate.name
            )));
        }
        Ok(gate)
    }

    fn unchecked(name: impl Into<Cow<'static, str>>, arity: usize, matrix: Vec<C64>) -> Result<Self> {
        let dim = 1usize << arity;
        if arity == 0 || matrix.len() != dim * dim {
            return Err(QseaError::Dimension(format!(
                "a {arity}-qubit gate needs {} matrix entries, got {}",
                dim * dim,
                matrix.len()
            )));
        }
        let diagonal = (0..dim).all(|r| (0..dim).all(|c| r == c || matrix[r * dim + c] == ZERO));
        Ok(Self { name: name.into(), arity, matrix, diagonal })
    }

    fn fixed(name: &'static str, arity: usize, matrix: Vec<C64>) -> Self {
        Self::unchecked(name, arity, matrix).expect("built-in gate has a well-formed matrix")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        1 << self.arity
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub(crate) fn diagonal_entries(&self) -> Vec<C64> {
        let d = self.dim();
        (0..d).map(|i| self.matrix[i * d + i]).collect()
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let s: C64 = (0..d).map(|k| m[k * d + i].conj() * m[k * d + j]).sum();
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        let mut m = vec![ZERO; d * d];
        for r in 0..d {
            for c in 0..d {
                m[c * d + r] = self.matrix[r * d + c].conj();
            }
        }
        let name = if let Some(base) = self.name.strip_suffix('†') {
            Cow::Owned(base.to_string())
        } else {
            Cow::Owned(format!("{}†", self.name))
        };
        Self { name, arity: self.arity, matrix: m, diagonal: self.diagonal }
    }

    pub fn identity() -> Self {
        Self::fixed("I", 1, vec![ONE, ZERO, ZERO, ONE])
    }

    pub fn h() -> Self {
        let s = re(FRAC_1_SQRT_2);
        Self::fixed("H", 1, vec![s, s, s, -s])
    }

    pub fn x() -> Self {
        Self::fixed("X", 1, vec![ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> Self {
        let i = C64::new(0.0, 1.0);
        Self::fixed("Y", 1, vec![ZERO, -i, i, ZERO])
    }

    pub fn z() -> Self {
        Self::fixed("Z", 1, vec![ONE, ZERO, ZERO, -ONE])
    }

    pub fn rx(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let mis = C64::new(0.0, -s);
        Self::fixed("RX", 1, vec![re(c), mis, mis, re(c)])
    }

    /// `RY(θ) = [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]]`
    pub fn ry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        Self::fixed("RY", 1, vec![re(c), re(-s), re(s), re(c)])
    }

    /// `RZ(θ) = diag(e^{-iθ/2}, e^{iθ/2})`
    pub fn rz(theta: f64) -> Self {
        let half = theta / 2.0;
        Self::fixed("RZ", 1, vec![C64::from_polar(1.0, -half), ZERO, ZERO, C64::from_polar(1.0, half)])
    }

    pub fn cz() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[5] = ONE;
        m[10] = ONE;
        m[15] = -ONE;
        Self::fixed("CZ", 2, m)
    }

    /// Control is the first target.
    pub fn cnot() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[5] = ONE;
        m[11] = ONE;
        m[14] = ONE;
        Self::fixed("CNOT", 2, m)
    }

    /// Controlled RY; control is the first target.
    pub fn cry(theta: f64) -> Self {
        let (s, c) = (theta / 2.0).sin_cos();
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[5] = ONE;
        m[10] = re(c);
        m[11] = re(-s);
        m[14] = re(s);
        m[15] = re(c);
        Self::fixed("CRY", 2, m)
    }

    pub fn swap() -> Self {
        let mut m = vec![ZERO; 16];
        m[0] = ONE;
        m[6] = ONE;
        m[9] = ONE;
        m[15] = ONE;
        Self::fixed("SWAP", 2, m)
    }

    /// Fredkin gate; control is the first target.
    pub fn cswap() -> Self {
        let mut m = vec![ZERO; 64];
        for i in 0..8usize {
            let j = match i {
                5 => 6,
                6 => 5,
                _ => i,
            };
            m[i * 8 + j] = ONE;
        }
        Self::fixed("CSWAP", 3, m)
    }
}

/// A gate bound to concrete target qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl GateOp {
    pub fn new(gate: Gate, targets: impl Into<Vec<usize>>) -> Self {
        Self { gate, targets: targets.into() }
    }

    pub fn adjoint(&self) -> Self {
        Self { gate: self.gate.adjoint(), targets: self.targets.clone() }
    }
}

/// Reverses a gate list and takes the adjoint of each element.
pub fn inverse(ops: &[GateOp]) -> Vec<GateOp> {
    ops.iter().rev().map(GateOp::adjoint).collect()
}

pub(crate) fn check_targets(targets: &[usize], n_qubits: usize) -> Result<()> {
    if targets.is_empty() {
        return Err(QseaError::Index("empty target list".into()));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(QseaError::Index(format!("qubit {t} out of range for {n_qubits} qubits")));
        }
        if targets[..i].contains(&t) {
            return Err(QseaError::Index(format!("duplicate qubit {t}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_are_unitary() {
        let gates = [
            Gate::identity(),
            Gate::h(),
            Gate::x(),
            Gate::y(),
            Gate::z(),
            Gate::rx(0.3),
            Gate::ry(1.1),
            Gate::rz(-2.0),
            Gate::cz(),
            Gate::cnot(),
            Gate::cry(0.7),
            Gate::swap(),
            Gate::cswap(),
        ];
        for g in gates {
            assert!(g.unitarity_deviation() < 1e-12, "{}", g.name());
        }
    }

    #[test]
    fn rejects_non_unitary() {
        let m = vec![ONE, ONE, ZERO, ONE];
        assert!(matches!(Gate::new("bad", 1, m), Err(QseaError::Parameter(_))));
        assert!(matches!(Gate::new("short", 1, vec![ONE]), Err(QseaError::Dimension(_))));
    }

    #[test]
    fn adjoint_round_trips() {
        let g = Gate::ry(0.4);
        let a = g.adjoint();
        assert_eq!(a.name(), "RY†");
        assert_eq!(a.adjoint(), g);
        assert!(Gate::cz().is_diagonal());
        assert!(Gate::rz(0.2).is_diagonal());
        assert!(!Gate::cry(0.2).is_diagonal());
    }

    #[test]
    fn target_validation() {
        assert!(check_targets(&[0, 1], 2).is_ok());
        assert!(check_targets(&[2], 2).is_err());
        assert!(check_targets(&[1, 1], 2).is_err());
        assert!(check_targets(&[], 2).is_err());
    }
}
