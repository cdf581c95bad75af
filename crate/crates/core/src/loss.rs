//! Fidelity contrast loss over (anchor, positive, negative) triplets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::augment::{positive_fidelity, EaParams};
use crate::error::{QseaError, Result};
use crate::fidelity::{fidelity_with_mode, FidelityMode};
use crate::StateVector;

/// Anchor and negative sample indices; the positive is the anchor's
/// augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triplet {
    pub anchor: usize,
    pub negative: usize,
}

/// Draws anchors uniformly and negatives uniformly among the other indices.
/// Never looks at labels.
pub fn sample_triplets(dataset_size: usize, batch: usize, seed: u64) -> Result<Vec<Triplet>> {
    if dataset_size < 2 {
        return Err(QseaError::InsufficientData(format!(
            "triplets need at least 2 samples, got {dataset_size}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..batch)
        .map(|_| {
            let anchor = rng.random_range(0..dataset_size);
            let r = rng.random_range(0..dataset_size - 1);
            let negative = if r >= anchor { r + 1 } else { r };
            Triplet { anchor, negative }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    /// Guard added to `1 − F` in the positive term.
    pub eps: f64,
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64, eps: f64) -> Result<Self> {
        if !(alpha >= 0.0 && beta >= 0.0) || (alpha == 0.0 && beta == 0.0) {
            return Err(QseaError::Parameter(format!(
                "weights must be non-negative and not both zero (alpha={alpha}, beta={beta})"
            )));
        }
        if eps.is_nan() || eps < 0.0 {
            return Err(QseaError::Parameter(format!("eps must be non-negative, got {eps}")));
        }
        Ok(Self { alpha, beta, eps })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 0.5, beta: 1.0, eps: 1e-6 }
    }
}

/// `(1/N) Σ 1 / (1 − F_i + eps)`
pub fn loss_f1(fidelities_p: &[f64], eps: f64) -> Result<f64> {
    if fidelities_p.is_empty() {
        return Err(QseaError::Arity("positive fidelity batch is empty".into()));
    }
    Ok(fidelities_p.iter().map(|f| 1.0 / (1.0 - f + eps)).sum::<f64>() / fidelities_p.len() as f64)
}

/// `(1/N) Σ F_i`
pub fn loss_f2(fidelities_n: &[f64]) -> Result<f64> {
    if fidelities_n.is_empty() {
        return Err(QseaError::Arity("negative fidelity batch is empty".into()));
    }
    Ok(fidelities_n.iter().sum::<f64>() / fidelities_n.len() as f64)
}

/// `β L_F2 − α L_F1`
pub fn total_loss(l_f1: f64, l_f2: f64, w: &LossWeights) -> f64 {
    w.beta * l_f2 - w.alpha * l_f1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub total: f64,
    pub f1: f64,
    pub f2: f64,
}

impl LossBreakdown {
    pub fn from_fidelities(fp: &[f64], fneg: &[f64], w: &LossWeights) -> Result<Self> {
        let f1 = loss_f1(fp, w.eps)?;
        let f2 = loss_f2(fneg)?;
        Ok(Self { total: total_loss(f1, f2, w), f1, f2 })
    }
}

/// Positive fidelities come from the reduced augmented state; negatives
/// use `mode`, with the triplet position as the seed index.
pub fn batch_loss(
    samples: &[StateVector],
    triplets: &[Triplet],
    p: &EaParams,
    w: &LossWeights,
    mode: FidelityMode,
) -> Result<LossBreakdown> {
    let get = |i: usize| {
        samples
            .get(i)
            .ok_or_else(|| QseaError::Index(format!("sample {i} out of range for {} samples", samples.len())))
    };
    let mut fp = Vec::with_capacity(triplets.len());
    let mut fneg = Vec::with_capacity(triplets.len());
    for (pos, t) in triplets.iter().enumerate() {
        let anchor = get(t.anchor)?;
        fp.push(positive_fidelity(anchor, p)?);
        fneg.push(fidelity_with_mode(anchor, get(t.negative)?, mode, pos as u64)?);
    }
    LossBreakdown::from_fidelities(&fp, &fneg, w)
}
