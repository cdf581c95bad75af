//! End-to-end runs: data selection, training, evaluation, repeats,
//! ablations and noise sweeps.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::augment::{build_ea_circuit, EaParams};
use crate::classify::{accuracy, centroid_by_similarity, knn_by_similarity};
use crate::config::{ClassifierKind, DatasetSource, RunConfig};
use crate::data::{load_cifar, load_idx, make_synthetic, stratified_split, subset, Dataset};
use crate::encoder::Encoder;
use crate::error::{QseaError, Result};
use crate::fidelity::{derive_seed, fidelity_with_mode, FidelityMode};
use crate::metrics::{RepeatSummary, RunMetrics};
use crate::noise::{noisy_execute, NoiseModel};
use crate::report::CsvRow;
use crate::train::train;
use crate::{DensityMatrix, StateVector};

const SUBSET_STREAM: u64 = 0x5eed_0001;
const SPLIT_STREAM: u64 = 0x5eed_0002;
const SHOTS_STREAM: u64 = 0x5eed_0003;

/// Builds the rayon pool from `QSEA_THREADS` (unset or 0 = one worker per
/// core). Only the first call in a process has an effect.
pub fn configure_threads() -> Result<usize> {
    let n = match std::env::var("QSEA_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| QseaError::Config(format!("QSEA_THREADS must be a non-negative integer, got {v:?}")))?,
        _ => 0,
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(rayon::current_num_threads())
}

/// Loads the image pool named by the config. Synthetic pools depend on
/// the seed and are regenerated per run instead.
pub fn load_pool(config: &RunConfig) -> Result<Option<Dataset>> {
    match &config.dataset {
        DatasetSource::Synthetic { .. } => Ok(None),
        DatasetSource::Idx { images, labels } => load_idx(images, labels).map(Some),
        DatasetSource::Cifar { batches } => load_cifar(batches).map(Some),
    }
}

/// Encoded train/test states for one run.
#[derive(Debug, Clone)]
pub struct Split {
    pub train_states: Vec<StateVector>,
    pub train_labels: Vec<u8>,
    pub test_states: Vec<StateVector>,
    pub test_labels: Vec<u8>,
}

pub fn prepare(config: &RunConfig, pool: Option<&Dataset>) -> Result<Split> {
    config.validate()?;
    let generated;
    let pool = match (&config.dataset, pool) {
        (DatasetSource::Synthetic { image_size, band, noise }, _) => {
            let n_classes = *config.classes.iter().max().unwrap_or(&0) as usize + 1;
            generated =
                make_synthetic(n_classes.max(2), config.samples_per_class, *image_size, *band, *noise, config.seed)?;
            &generated
        }
        (_, Some(p)) => p,
        (_, None) => {
            generated = load_pool(config)?.expect("file-backed source");
            &generated
        }
    };
    let ds = subset(pool, &config.classes, config.samples_per_class, derive_seed(config.seed, SUBSET_STREAM))?;
    let labels = ds.labels().to_vec();
    let (train_idx, test_idx) = stratified_split(&labels, derive_seed(config.seed, SPLIT_STREAM))?;
    let states = ds.encode(&Encoder::new(config.n_qubits))?;
    let pick = |idx: &[usize]| -> (Vec<StateVector>, Vec<u8>) {
        (idx.iter().map(|&i| states[i].clone()).collect(), idx.iter().map(|&i| labels[i]).collect())
    };
    let (train_states, train_labels) = pick(&train_idx);
    let (test_states, test_labels) = pick(&test_idx);
    if train_states.len() < config.k {
        return Err(QseaError::InsufficientData(format!(
            "k = {} exceeds the {} training samples",
            config.k,
            train_states.len()
        )));
    }
    Ok(Split { train_states, train_labels, test_states, test_labels })
}

fn predict(config: &RunConfig, sims: &[f64], labels: &[u8]) -> Result<u8> {
    match config.classifier {
        ClassifierKind::Knn => knn_by_similarity(sims, labels, config.k),
        ClassifierKind::Centroid => centroid_by_similarity(sims, labels),
    }
}

/// Noisy execution of the augmentation circuit on `|ψ><ψ| ⊗ |0><0|`.
pub fn noisy_representation(psi: &StateVector, trained: &EaParams, model: &NoiseModel) -> Result<DensityMatrix> {
    let circuit = build_ea_circuit(trained)?;
    noisy_execute(circuit.ops(), &psi.tensor(&StateVector::zero(1)).to_density(), model)
}

/// Test accuracy under `model`. Without noise, similarities are state
/// fidelities (the augmentation is unitary and leaves them unchanged);
/// with noise, each sample is represented by its noisy augmented state and
/// compared through `Tr(ρσ)`.
pub fn evaluate_with(config: &RunConfig, trained: &EaParams, split: &Split, model: &NoiseModel) -> Result<f64> {
    let sims: Vec<Vec<f64>> = if model.is_noiseless() {
        let mode = config.fidelity_mode();
        split
            .test_states
            .par_iter()
            .enumerate()
            .map(|(q, query)| {
                let mode = match mode {
                    FidelityMode::Exact => FidelityMode::Exact,
                    FidelityMode::Shots { shots, seed } => FidelityMode::Shots {
                        shots,
                        seed: derive_seed(derive_seed(seed, SHOTS_STREAM), (q as u64) << 32),
                    },
                };
                split
                    .train_states
                    .iter()
                    .enumerate()
                    .map(|(i, t)| fidelity_with_mode(query, t, mode, i as u64))
                    .collect()
            })
            .collect::<Result<_>>()?
    } else {
        let rep = |states: &[StateVector]| -> Result<Vec<DensityMatrix>> {
            states.par_iter().map(|s| noisy_representation(s, trained, model)).collect()
        };
        let train_rho = rep(&split.train_states)?;
        let test_rho = rep(&split.test_states)?;
        test_rho
            .par_iter()
            .map(|q| train_rho.iter().map(|t| q.overlap(t)).collect())
            .collect::<Result<_>>()?
    };
    let predicted = sims
        .iter()
        .map(|s| predict(config, s, &split.train_labels))
        .collect::<Result<Vec<_>>>()?;
    accuracy(&predicted, &split.test_labels)
}

/// Test accuracy under the configured noise model.
pub fn evaluate(config: &RunConfig, trained: &EaParams, split: &Split) -> Result<f64> {
    evaluate_with(config, trained, split, &config.noise)
}

/// Train on the unlabeled training split, then evaluate.
pub fn run_with_pool(config: &RunConfig, pool: Option<&Dataset>) -> Result<(EaParams, RunMetrics)> {
    let start = Instant::now();
    let split = prepare(config, pool)?;
    let (params, mut metrics) = train(&split.train_states, config)?;
    metrics.accuracy = Some(evaluate(config, &params, &split)?);
    metrics.wall_s = start.elapsed().as_secs_f64();
    Ok((params, metrics))
}

pub fn run_experiment(config: &RunConfig) -> Result<RunMetrics> {
    let pool = load_pool(config)?;
    Ok(run_with_pool(config, pool.as_ref())?.1)
}

/// Config for repeat `r`: same settings, seed `root ^ r`.
pub fn repeat_config(config: &RunConfig, r: usize) -> RunConfig {
    RunConfig { seed: derive_seed(config.seed, r as u64), ..config.clone() }
}

pub fn run_repeats_with_pool(config: &RunConfig, repeats: usize, pool: Option<&Dataset>) -> Result<RepeatSummary> {
    if repeats == 0 {
        return Err(QseaError::Config("repeats must be positive".into()));
    }
    let runs = (0..repeats)
        .into_par_iter()
        .map(|r| run_with_pool(&repeat_config(config, r), pool).map(|(_, m)| m))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepeatSummary::from_runs(runs))
}

pub fn run_repeats(config: &RunConfig, repeats: usize) -> Result<RepeatSummary> {
    let pool = load_pool(config)?;
    run_repeats_with_pool(config, repeats, pool.as_ref())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AblationAxis {
    /// Value `v` selects classes `0..v`.
    Classes,
    Qubits,
    /// Samples per class.
    Samples,
}

impl AblationAxis {
    pub fn name(self) -> &'static str {
        match self {
            AblationAxis::Classes => "classes",
            AblationAxis::Qubits => "qubits",
            AblationAxis::Samples => "samples",
        }
    }

    pub fn apply(self, config: &RunConfig, value: usize) -> Result<RunConfig> {
        let mut c = config.clone();
        match self {
            AblationAxis::Classes => {
                if !(2..=256).contains(&value) {
                    return Err(QseaError::Config(format!("class count {value} outside [2, 256]")));
                }
                c.classes = (0..value).map(|v| v as u8).collect();
            }
            AblationAxis::Qubits => c.n_qubits = value,
            AblationAxis::Samples => c.samples_per_class = value,
        }
        c.validate()?;
        Ok(c)
    }
}

impl fmt::Display for AblationAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AblationAxis {
    type Err = QseaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "classes" => Ok(AblationAxis::Classes),
            "qubits" => Ok(AblationAxis::Qubits),
            "samples" => Ok(AblationAxis::Samples),
            other => Err(QseaError::Config(format!("unknown ablation axis {other:?}"))),
        }
    }
}

/// One summary row per (value, repeat), ordered by value then repeat.
pub fn run_ablation(config: &RunConfig, axis: AblationAxis, values: &[usize], repeats: usize) -> Result<Vec<CsvRow>> {
    let cells = values.iter().map(|&v| axis.apply(config, v).map(|c| (v, c))).collect::<Result<Vec<_>>>()?;
    let pool = load_pool(config)?;
    let mut rows = Vec::with_capacity(values.len() * repeats);
    for (v, c) in cells {
        let summary = run_repeats_with_pool(&c, repeats, pool.as_ref())?;
        for m in &summary.runs {
            rows.push(CsvRow::summary(rows.len(), axis.name(), &v.to_string(), m));
        }
    }
    Ok(rows)
}

/// Noise model at strength `p`: the configured channel list, or the
/// default composite model when none is configured.
pub fn model_at(config: &RunConfig, p: f64) -> Result<NoiseModel> {
    if config.noise.is_noiseless() {
        NoiseModel::composite(p)
    } else {
        config.noise.with_probability(p)
    }
}

/// Trains once per repeat and evaluates the same parameters at every
/// noise strength. Rows are ordered by repeat then strength.
pub fn noise_sweep(config: &RunConfig, probabilities: &[f64], repeats: usize) -> Result<Vec<CsvRow>> {
    let models = probabilities.iter().map(|&p| model_at(config, p)).collect::<Result<Vec<_>>>()?;
    let pool = load_pool(config)?;
    let per_repeat = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let start = Instant::now();
            let c = repeat_config(config, r);
            let split = prepare(&c, pool.as_ref())?;
            let (params, metrics) = train(&split.train_states, &c)?;
            let train_s = start.elapsed().as_secs_f64();
            models
                .iter()
                .map(|m| {
                    let t = Instant::now();
                    let acc = evaluate_with(&c, &params, &split, m)?;
                    Ok(RunMetrics { accuracy: Some(acc), wall_s: train_s + t.elapsed().as_secs_f64(), ..metrics.clone() })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for runs in per_repeat {
        for (m, p) in runs.iter().zip(probabilities) {
            rows.push(CsvRow::summary(rows.len(), "noise", &p.to_string(), m));
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n_qubits: 4,
            layers: 1,
            samples_per_class: 10,
            epochs: 2,
            batch: 8,
            k: 3,
            dataset: DatasetSource::Synthetic { image_size: 8, band: 200.0, noise: 0.0 },
            ..RunConfig::default()
        }
    }

    #[test]
    fn noiseless_synthetic_is_separable() {
        let m = run_experiment(&small()).unwrap();
        assert_eq!(m.accuracy, Some(1.0));
        assert_eq!(m.losses.len(), 2);
    }

    #[test]
    fn deterministic_metrics() {
        let a = run_experiment(&small()).unwrap();
        let b = run_experiment(&small()).unwrap();
        assert_eq!(a.losses, b.losses);
        assert_eq!(a.accuracy, b.accuracy);
    }

    #[test]
    fn split_sizes_follow_rule() {
        let s = prepare(&small(), None).unwrap();
        assert_eq!((s.train_states.len(), s.test_states.len()), (16, 4));
    }

    #[test]
    fn ablation_row_count() {
        let rows = run_ablation(&RunConfig { epochs: 0, ..small() }, AblationAxis::Qubits, &[2, 3, 4], 2).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.axis == "qubits" && r.acc.is_some()));
        assert!("depth".parse::<AblationAxis>().is_err());
    }

    #[test]
    fn noise_sweep_zero_matches_noiseless() {
        let c = RunConfig { epochs: 1, ..small() };
        let rows = noise_sweep(&c, &[0.0, 0.01], 1).unwrap();
        assert_eq!(rows.len(), 2);
        let direct = run_experiment(&c).unwrap();
        assert_eq!(rows[0].acc, direct.accuracy);
    }
}
