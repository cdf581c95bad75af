//! Optimisation of the augmentation angles against the contrast loss.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::augment::EaParams;
use crate::config::RunConfig;
use crate::error::{QseaError, Result};
use crate::fidelity::{fidelity_with_mode, FidelityMode};
use crate::grad::EaGradient;
use crate::loss::{sample_triplets, LossBreakdown, LossWeights};
use crate::metrics::{EpochLosses, RunMetrics};
use crate::optim::Adam;
use crate::StateVector;

/// Everything that evolves during training.
pub struct TrainState {
    params: EaParams,
    adam: Adam,
    rng: ChaCha8Rng,
    epoch: usize,
    grad: EaGradient,
    weights: LossWeights,
    batch: usize,
    mode: FidelityMode,
}

impl TrainState {
    /// Angles start uniform in `[0, π/2]`, drawn from `config.seed`.
    pub fn new(n_data: usize, config: &RunConfig) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = EaParams::random(n_data, config.layers, &mut rng)?;
        let adam = Adam::new(params.theta().len(), config.learning_rate);
        Ok(Self {
            params,
            adam,
            rng,
            epoch: 0,
            grad: EaGradient::new(n_data, config.layers),
            weights: config.weights()?,
            batch: config.batch,
            mode: config.fidelity_mode(),
        })
    }

    pub fn params(&self) -> &EaParams {
        &self.params
    }

    pub fn optimizer(&self) -> &Adam {
        &self.adam
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// One optimizer step on a fresh triplet batch; returns the loss at the
    /// pre-step angles.
    pub fn step(&mut self, dataset: &[StateVector]) -> Result<LossBreakdown> {
        let batch_seed: u64 = self.rng.random();
        let triplets = sample_triplets(dataset.len(), self.batch, batch_seed)?;
        let theta = self.params.theta().to_vec();
        let mode = match self.mode {
            FidelityMode::Exact => FidelityMode::Exact,
            FidelityMode::Shots { shots, .. } => FidelityMode::Shots { shots, seed: batch_seed },
        };
        let per_triplet: Vec<(f64, Vec<f64>, f64)> = triplets
            .par_iter()
            .enumerate()
            .map(|(pos, t)| {
                let anchor = &dataset[t.anchor];
                let (fp, dfp) = self.grad.fidelity_and_grad(anchor, &theta)?;
                let fneg = fidelity_with_mode(anchor, &dataset[t.negative], mode, pos as u64)?;
                Ok((fp, dfp, fneg))
            })
            .collect::<Result<_>>()?;

        let fp: Vec<f64> = per_triplet.iter().map(|t| t.0).collect();
        let fneg: Vec<f64> = per_triplet.iter().map(|t| t.2).collect();
        let loss = LossBreakdown::from_fidelities(&fp, &fneg, &self.weights)?;

        // dL/dθ = -α/N Σ (1 - F + eps)^-2 ∂F/∂θ; the negative term has no θ
        let n = per_triplet.len() as f64;
        let mut grad = vec![0.0; theta.len()];
        for (f, dfp, _) in &per_triplet {
            let scale = -self.weights.alpha / (n * (1.0 - f + self.weights.eps).powi(2));
            for (g, d) in grad.iter_mut().zip(dfp) {
                *g += scale * d;
            }
        }
        let mut next = theta;
        self.adam.step(&mut next, &grad);
        self.params.set_projected(&next);
        Ok(loss)
    }

    /// `ceil(N / batch)` steps; returns their mean losses.
    pub fn run_epoch(&mut self, dataset: &[StateVector]) -> Result<EpochLosses> {
        let steps = dataset.len().div_ceil(self.batch);
        let (mut total, mut f1, mut f2) = (0.0, 0.0, 0.0);
        for _ in 0..steps {
            let l = self.step(dataset)?;
            total += l.total;
            f1 += l.f1;
            f2 += l.f2;
        }
        let s = steps as f64;
        let out = EpochLosses { epoch: self.epoch, total: total / s, f1: f1 / s, f2: f2 / s };
        self.epoch += 1;
        Ok(out)
    }
}

/// Trains the augmentation angles on unlabeled states.
pub fn train(dataset: &[StateVector], config: &RunConfig) -> Result<(EaParams, RunMetrics)> {
    let start = Instant::now();
    if dataset.len() < 2 {
        return Err(QseaError::InsufficientData(format!(
            "training needs at least 2 samples, got {}",
            dataset.len()
        )));
    }
    let n_data = dataset[0].n_qubits();
    if let Some(s) = dataset.iter().find(|s| s.n_qubits() != n_data) {
        return Err(QseaError::Dimension(format!(
            "mixed register sizes in dataset ({n_data} and {})",
            s.n_qubits()
        )));
    }
    let mut state = TrainState::new(n_data, config)?;
    let losses = (0..config.epochs).map(|_| state.run_epoch(dataset)).collect::<Result<Vec<_>>>()?;
    let metrics = RunMetrics { seed: config.seed, losses, accuracy: None, wall_s: start.elapsed().as_secs_f64() };
    Ok((state.params, metrics))
}
