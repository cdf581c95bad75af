//! Single-qubit Kraus channels and noisy density-matrix execution.

use std::fmt;
use std::str::FromStr;

use crate::error::{QseaError, Result};
use crate::gate::{check_targets, GateOp};
use crate::{kernel, DensityMatrix, C64};

type Mat2 = [C64; 4];
type Mat4 = [C64; 16];

const ZERO: C64 = C64::new(0.0, 0.0);

fn scaled(m: [C64; 4], s: f64) -> Mat2 {
    m.map(|x| x * s)
}

const I2: Mat2 = [C64::new(1.0, 0.0), ZERO, ZERO, C64::new(1.0, 0.0)];
const X2: Mat2 = [ZERO, C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO];
const Y2: Mat2 = [ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO];
const Z2: Mat2 = [C64::new(1.0, 0.0), ZERO, ZERO, C64::new(-1.0, 0.0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelKind {
    BitFlip,
    PhaseFlip,
    Depolarizing,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::PhaseFlip => "phase_flip",
            ChannelKind::Depolarizing => "depolarizing",
        }
    }
}

impl FromStr for ChannelKind {
    type Err = QseaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit_flip" => Ok(ChannelKind::BitFlip),
            "phase_flip" => Ok(ChannelKind::PhaseFlip),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            other => Err(QseaError::Config(format!("unknown channel {other:?}"))),
        }
    }
}

/// `ρ -> Σ_k K_k ρ K_k†` on one qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    kind: ChannelKind,
    p: f64,
    kraus: Vec<Mat2>,
}

fn check_prob(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QseaError::Range(format!("channel probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl KrausChannel {
    fn from_terms(kind: ChannelKind, p: f64, terms: &[(f64, Mat2)]) -> Result<Self> {
        check_prob(p)?;
        let kraus = terms.iter().filter(|(w, _)| *w > 0.0).map(|&(w, m)| scaled(m, w.sqrt())).collect();
        Ok(Self { kind, p, kraus })
    }

    /// `{√(1−p) I, √p X}`
    pub fn bit_flip(p: f64) -> Result<Self> {
        Self::from_terms(ChannelKind::BitFlip, p, &[(1.0 - p, I2), (p, X2)])
    }

    /// `{√(1−p) I, √p Z}`
    pub fn phase_flip(p: f64) -> Result<Self> {
        Self::from_terms(ChannelKind::PhaseFlip, p, &[(1.0 - p, I2), (p, Z2)])
    }

    /// `ρ -> (1−p) ρ + p I/2`, as `{√(1−3p/4) I, √(p/4) X, √(p/4) Y, √(p/4) Z}`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        let q = p / 4.0;
        Self::from_terms(ChannelKind::Depolarizing, p, &[(1.0 - 3.0 * q, I2), (q, X2), (q, Y2), (q, Z2)])
    }

    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        match kind {
            ChannelKind::BitFlip => Self::bit_flip(p),
            ChannelKind::PhaseFlip => Self::phase_flip(p),
            ChannelKind::Depolarizing => Self::depolarizing(p),
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    pub fn kraus_ops(&self) -> &[Mat2] {
        &self.kraus
    }

    /// Largest entrywise deviation of `Σ K†K` from the identity.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = [ZERO; 4];
        for k in &self.kraus {
            for i in 0..2 {
                for j in 0..2 {
                    sum[2 * i + j] += k[i].conj() * k[j] + k[2 + i].conj() * k[2 + j];
                }
            }
        }
        sum.iter().zip(I2.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `Σ K ⊗ conj(K)`, acting on the (row bit, column bit) pair of ρ.
    pub fn superoperator(&self) -> Mat4 {
        let mut s = [ZERO; 16];
        for k in &self.kraus {
            for (r, entry) in s.iter_mut().enumerate() {
                let (i, j) = (r / 4, r % 4);
                *entry += k[(i >> 1) * 2 + (j >> 1)] * k[(i & 1) * 2 + (j & 1)].conj();
            }
        }
        s
    }
}

fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            out[4 * i + j] = (0..4).map(|k| a[4 * i + k] * b[4 * k + j]).sum();
        }
    }
    out
}

/// Real coefficients when `s` only mixes (00, 11) and (01, 10), as every
/// Pauli channel does.
fn pauli_blocks(s: &Mat4) -> Option<[f64; 8]> {
    const KEEP: [usize; 8] = [0, 3, 12, 15, 5, 6, 9, 10];
    let structured = (0..16).all(|i| KEEP.contains(&i) || s[i] == ZERO) && KEEP.iter().all(|&i| s[i].im == 0.0);
    structured.then(|| KEEP.map(|i| s[i].re))
}

fn apply_superop(rho: &mut DensityMatrix, s: &Mat4, qubit: usize) {
    let n = rho.n_qubits();
    match pauli_blocks(s) {
        Some(c) => apply_pauli_blocks(rho.data_mut(), n, &c, qubit),
        None => kernel::apply_matrix(rho.data_mut(), 2 * n, s, &[qubit, n + qubit]),
    }
}

fn apply_pauli_blocks(data: &mut [C64], n: usize, c: &[f64; 8], qubit: usize) {
    let [s00, s03, s30, s33, s11, s12, s21, s22] = *c;
    let dim = 1usize << n;
    let m = 1usize << (n - 1 - qubit);
    // rows come in (r, r | m) pairs, m rows apart
    for block in data.chunks_exact_mut(2 * m * dim) {
        let (top, bottom) = block.split_at_mut(m * dim);
        for (row0, row1) in top.chunks_exact_mut(dim).zip(bottom.chunks_exact_mut(dim)) {
            for (r0, r1) in row0.chunks_exact_mut(2 * m).zip(row1.chunks_exact_mut(2 * m)) {
                let (a, b) = r0.split_at_mut(m);
                let (cc, d) = r1.split_at_mut(m);
                for j in 0..m {
                    let (va, vb, vc, vd) = (a[j], b[j], cc[j], d[j]);
                    a[j] = va * s00 + vd * s03;
                    d[j] = va * s30 + vd * s33;
                    b[j] = vb * s11 + vc * s12;
                    cc[j] = vb * s21 + vc * s22;
                }
            }
        }
    }
}

pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, qubit: usize) -> Result<DensityMatrix> {
    check_targets(&[qubit], rho.n_qubits())?;
    let mut out = rho.clone();
    apply_superop(&mut out, &ch.superoperator(), qubit);
    Ok(out)
}

/// Channels applied, in order, to every qubit a gate touches, right after
/// the gate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NoiseModel {
    channels: Vec<KrausChannel>,
}

impl NoiseModel {
    pub fn new(channels: Vec<KrausChannel>) -> Self {
        Self { channels }
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    /// Bit flip, phase flip and depolarizing, each with probability `p`.
    pub fn composite(p: f64) -> Result<Self> {
        Ok(Self::new(vec![
            KrausChannel::bit_flip(p)?,
            KrausChannel::phase_flip(p)?,
            KrausChannel::depolarizing(p)?,
        ]))
    }

    pub fn channels(&self) -> &[KrausChannel] {
        &self.channels
    }

    pub fn is_noiseless(&self) -> bool {
        self.channels.iter().all(|c| c.probability() == 0.0)
    }

    /// Same channel list with every probability replaced by `p`.
    pub fn with_probability(&self, p: f64) -> Result<Self> {
        self.channels.iter().map(|c| KrausChannel::new(c.kind(), p)).collect::<Result<_>>().map(Self::new)
    }

    /// Composition of all channels as a single superoperator.
    fn fused(&self) -> Option<Mat4> {
        self.channels
            .iter()
            .filter(|c| c.probability() > 0.0)
            .map(KrausChannel::superoperator)
            .reduce(|acc, s| mat4_mul(&s, &acc))
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.channels.is_empty() {
            return f.write_str("none");
        }
        let parts: Vec<String> = self.channels.iter().map(|c| format!("{}:{}", c.name(), c.probability())).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for NoiseModel {
    type Err = QseaError;

    /// `none`, or comma-separated `channel:probability` entries.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "none" {
            return Ok(Self::noiseless());
        }
        s.split(',')
            .map(|part| {
                let (name, p) = part
                    .split_once(':')
                    .ok_or_else(|| QseaError::Config(format!("noise entry {part:?} is not channel:probability")))?;
                let p: f64 = p
                    .trim()
                    .parse()
                    .map_err(|_| QseaError::Config(format!("bad probability in {part:?}")))?;
                KrausChannel::new(name.trim().parse()?, p)
            })
            .collect::<Result<_>>()
            .map(Self::new)
    }
}

/// Runs `circuit` on `rho_in`, following each gate with the model's
/// channels on every touched qubit.
pub fn noisy_execute(circuit: &[GateOp], rho_in: &DensityMatrix, model: &NoiseModel) -> Result<DensityMatrix> {
    let fused = model.fused();
    let mut rho = rho_in.clone();
    for op in circuit {
        rho.apply_gate_mut(&op.gate, &op.targets)?;
        if let Some(s) = &fused {
            for &q in &op.targets {
                apply_superop(&mut rho, s, q);
            }
        }
    }
    Ok(rho)
}
