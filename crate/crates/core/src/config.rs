//! Run configuration and its flat text format.
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines are
//! ignored. Every key is optional and falls back to [`RunConfig::default`].
//!
//! ```text
//! # MNIST 0 vs 1
//! dataset = idx
//! idx_images = data/mnist5k/images-idx3-ubyte.gz
//! idx_labels = data/mnist5k/labels-idx1-ubyte.gz
//! classes = 0,1
//! noise = bit_flip:0.01,phase_flip:0.01,depolarizing:0.01
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{QseaError, Result};
use crate::fidelity::FidelityMode;
use crate::loss::LossWeights;
use crate::noise::NoiseModel;

/// Largest register the dense simulator is allowed to handle.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    /// Generated by `data::make_synthetic`.
    Synthetic { image_size: usize, band: f64, noise: f64 },
    Idx { images: PathBuf, labels: PathBuf },
    Cifar { batches: Vec<PathBuf> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Knn,
    Centroid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_qubits: usize,
    pub layers: usize,
    pub samples_per_class: usize,
    pub classes: Vec<u8>,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// 0 means exact fidelities.
    pub fidelity_shots: u64,
    pub noise: NoiseModel,
    pub dataset: DatasetSource,
    pub k: usize,
    pub classifier: ClassifierKind,
    pub repeats: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_qubits: 8,
            layers: 2,
            samples_per_class: 50,
            classes: vec![0, 1],
            alpha: 0.5,
            beta: 1.0,
            eps: 1e-6,
            epochs: 30,
            batch: 16,
            learning_rate: 0.01,
            seed: 0,
            fidelity_shots: 0,
            noise: NoiseModel::noiseless(),
            dataset: DatasetSource::Synthetic { image_size: 32, band: 15.0, noise: 255.0 },
            k: 5,
            classifier: ClassifierKind::Knn,
            repeats: 1,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| QseaError::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(QseaError::Config(msg));
        if !(1..=MAX_QUBITS).contains(&self.n_qubits) {
            return bad(format!("n_qubits must be in [1, {MAX_QUBITS}], got {}", self.n_qubits));
        }
        if self.samples_per_class == 0 {
            return bad("samples_per_class must be at least 1".into());
        }
        if self.k.is_multiple_of(2) {
            return bad(format!("k must be odd, got {}", self.k));
        }
        if self.classes.is_empty() {
            return bad("at least one class is required".into());
        }
        if self.layers == 0 || self.batch == 0 || self.repeats == 0 {
            return bad("layers, batch and repeats must be positive".into());
        }
        self.weights()?;
        Ok(())
    }

    pub fn weights(&self) -> Result<LossWeights> {
        LossWeights::new(self.alpha, self.beta, self.eps)
    }

    pub fn fidelity_mode(&self) -> FidelityMode {
        match self.fidelity_shots {
            0 => FidelityMode::Exact,
            shots => FidelityMode::Shots { shots, seed: self.seed },
        }
    }

    /// Reads a config file; relative data paths resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut self.dataset {
            DatasetSource::Idx { images, labels } => {
                fix(images);
                fix(labels);
            }
            DatasetSource::Cifar { batches } => batches.iter_mut().for_each(fix),
            DatasetSource::Synthetic { .. } => {}
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut kind = String::from("synthetic");
        let (mut image_size, mut band, mut syn_noise) = (32usize, 15.0f64, 255.0f64);
        let (mut idx_images, mut idx_labels) = (None, None);
        let mut cifar = Vec::new();
        if let DatasetSource::Synthetic { image_size: s, band: b, noise } = cfg.dataset {
            image_size = s;
            band = b;
            syn_noise = noise;
        }
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| QseaError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n_qubits" => cfg.n_qubits = parse_num(key, value)?,
                "layers" => cfg.layers = parse_num(key, value)?,
                "samples_per_class" => cfg.samples_per_class = parse_num(key, value)?,
                "classes" => {
                    cfg.classes = value
                        .split(',')
                        .map(|c| parse_num(key, c.trim()))
                        .collect::<Result<_>>()?
                }
                "alpha" => cfg.alpha = parse_num(key, value)?,
                "beta" => cfg.beta = parse_num(key, value)?,
                "eps" => cfg.eps = parse_num(key, value)?,
                "epochs" => cfg.epochs = parse_num(key, value)?,
                "batch" => cfg.batch = parse_num(key, value)?,
                "learning_rate" => cfg.learning_rate = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "fidelity_mode" => {
                    cfg.fidelity_shots = match value {
                        "exact" => 0,
                        v => match v.strip_prefix("shots:") {
                            Some(n) => parse_num(key, n)?,
                            None => return Err(QseaError::Config(format!("{key}: expected exact or shots:N"))),
                        },
                    }
                }
                "noise" => cfg.noise = value.parse()?,
                "noise_placement" => {
                    if value != "after_gate" {
                        return Err(QseaError::Config(format!("{key}: only after_gate is supported")));
                    }
                }
                "dataset" => kind = value.to_string(),
                "synthetic_image_size" => image_size = parse_num(key, value)?,
                "synthetic_band" => band = parse_num(key, value)?,
                "synthetic_noise" => syn_noise = parse_num(key, value)?,
                "idx_images" => idx_images = Some(PathBuf::from(value)),
                "idx_labels" => idx_labels = Some(PathBuf::from(value)),
                "cifar_batches" => cifar = value.split(',').map(|p| PathBuf::from(p.trim())).collect(),
                "k" => cfg.k = parse_num(key, value)?,
                "classifier" => {
                    cfg.classifier = match value {
                        "knn" => ClassifierKind::Knn,
                        "centroid" => ClassifierKind::Centroid,
                        _ => return Err(QseaError::Config(format!("{key}: expected knn or centroid"))),
                    }
                }
                "repeats" => cfg.repeats = parse_num(key, value)?,
                _ => return Err(QseaError::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
            }
        }
        cfg.dataset = match kind.as_str() {
            "synthetic" => DatasetSource::Synthetic { image_size, band, noise: syn_noise },
            "idx" => DatasetSource::Idx {
                images: idx_images.ok_or_else(|| QseaError::Config("dataset = idx needs idx_images".into()))?,
                labels: idx_labels.ok_or_else(|| QseaError::Config("dataset = idx needs idx_labels".into()))?,
            },
            "cifar" if !cifar.is_empty() => DatasetSource::Cifar { batches: cifar },
            "cifar" => return Err(QseaError::Config("dataset = cifar needs cifar_batches".into())),
            other => return Err(QseaError::Config(format!("unknown dataset {other:?}"))),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialises every field; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let classes: Vec<String> = self.classes.iter().map(u8::to_string).collect();
        let _ = writeln!(s, "n_qubits = {}", self.n_qubits);
        let _ = writeln!(s, "layers = {}", self.layers);
        let _ = writeln!(s, "samples_per_class = {}", self.samples_per_class);
        let _ = writeln!(s, "classes = {}", classes.join(","));
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "eps = {:?}", self.eps);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "batch = {}", self.batch);
        let _ = writeln!(s, "learning_rate = {:?}", self.learning_rate);
        let _ = writeln!(s, "seed = {}", self.seed);
        match self.fidelity_shots {
            0 => s.push_str("fidelity_mode = exact\n"),
            n => {
                let _ = writeln!(s, "fidelity_mode = shots:{n}");
            }
        }
        let _ = writeln!(s, "noise = {}", self.noise);
        s.push_str("noise_placement = after_gate\n");
        match &self.dataset {
            DatasetSource::Synthetic { image_size, band, noise } => {
                let _ = writeln!(
                    s,
                    "dataset = synthetic\nsynthetic_image_size = {image_size}\nsynthetic_band = {band:?}\nsynthetic_noise = {noise:?}"
                );
            }
            DatasetSource::Idx { images, labels } => {
                let _ = writeln!(s, "dataset = idx\nidx_images = {}\nidx_labels = {}", images.display(), labels.display());
            }
            DatasetSource::Cifar { batches } => {
                let b: Vec<String> = batches.iter().map(|p| p.display().to_string()).collect();
                let _ = writeln!(s, "dataset = cifar\ncifar_batches = {}", b.join(","));
            }
        }
        let _ = writeln!(s, "k = {}", self.k);
        let classifier = match self.classifier {
            ClassifierKind::Knn => "knn",
            ClassifierKind::Centroid => "centroid",
        };
        let _ = writeln!(s, "classifier = {classifier}");
        let _ = writeln!(s, "repeats = {}", self.repeats);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.fidelity_mode(), FidelityMode::Exact);
        assert_eq!(RunConfig::parse("").unwrap(), cfg);
    }

    #[test]
    fn parses_comments_and_values() {
        let text = "# header\n n_qubits = 6  # trailing\n\nclasses = 0, 3,7\nfidelity_mode = shots:256\nseed=9\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.n_qubits, 6);
        assert_eq!(cfg.classes, vec![0, 3, 7]);
        assert_eq!(cfg.fidelity_mode(), FidelityMode::Shots { shots: 256, seed: 9 });
    }

    #[test]
    fn text_round_trip() {
        let cfg = RunConfig {
            noise: NoiseModel::composite(0.01).unwrap(),
            dataset: DatasetSource::Idx { images: "a/img.gz".into(), labels: "a/lab.gz".into() },
            classifier: ClassifierKind::Centroid,
            fidelity_shots: 128,
            alpha: 0.1 + 0.2,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_invalid() {
        assert!(RunConfig::parse("n_qubits = 13").is_err());
        assert!(RunConfig::parse("n_qubits = 0").is_err());
        assert!(RunConfig::parse("k = 4").is_err());
        assert!(RunConfig::parse("samples_per_class = 0").is_err());
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("n_qubits 3").is_err());
        assert!(RunConfig::parse("dataset = idx").is_err());
        assert!(RunConfig::parse("alpha = 0\nbeta = 0").is_err());
    }
}
