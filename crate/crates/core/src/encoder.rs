//! Classical images to amplitude-encoded states.
//!
//! Pixels are scaled to `[0, 1]`, reduced to `2^n` features by a
//! [`FeatureReducer`] (block-average pooling by default), then normalised
//! into the amplitudes of an `n`-qubit state.

use crate::error::{QseaError, Result};
use crate::StateVector;

/// Grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawImage {
    height: usize,
    width: usize,
    pixels: Vec<u8>,
}

impl RawImage {
    pub fn new(height: usize, width: usize, pixels: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 || pixels.len() != height * width {
            return Err(QseaError::Dimension(format!(
                "{height}x{width} image with {} pixels",
                pixels.len()
            )));
        }
        Ok(Self { height, width, pixels })
    }

    /// Averages three colour planes into one grayscale plane, rounding to the
    /// nearest integer.
    pub fn from_rgb_planes(height: usize, width: usize, r: &[u8], g: &[u8], b: &[u8]) -> Result<Self> {
        let n = height * width;
        if r.len() != n || g.len() != n || b.len() != n {
            return Err(QseaError::Dimension(format!("colour planes must hold {n} pixels each")));
        }
        let pixels = (0..n)
            .map(|i| ((r[i] as u32 + g[i] as u32 + b[i] as u32 + 1) / 3) as u8)
            .collect();
        Self::new(height, width, pixels)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Real feature vector, optionally remembering the 2-D grid it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    shape: Option<(usize, usize)>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, shape: None }
    }

    pub fn with_shape(values: Vec<f64>, height: usize, width: usize) -> Result<Self> {
        if values.len() != height * width {
            return Err(QseaError::Dimension(format!(
                "{} values do not fill a {height}x{width} grid",
                values.len()
            )));
        }
        Ok(Self { values, shape: Some((height, width)) })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }
}

/// `x / 255` for every pixel.
pub fn normalize_pixels(img: &RawImage) -> FeatureVector {
    let values = img.pixels.iter().map(|&p| p as f64 / 255.0).collect();
    FeatureVector { values, shape: Some((img.height, img.width)) }
}

/// Maps a feature vector to `target_dim` features.
pub trait FeatureReducer: Send + Sync {
    fn reduce(&self, f: &FeatureVector, target_dim: usize) -> Result<FeatureVector>;
}

/// Block-average pooling onto a `2^a x 2^b` grid, as square as possible
/// with rows >= cols (256 -> 16x16, 128 -> 16x8).
#[derive(Debug, Clone, Copy, Default)]
pub struct BlockPooling;

impl FeatureReducer for BlockPooling {
    fn reduce(&self, f: &FeatureVector, target_dim: usize) -> Result<FeatureVector> {
        if target_dim == 0 || !target_dim.is_power_of_two() {
            return Err(QseaError::Reduction(format!("target dimension {target_dim} is not a power of two")));
        }
        if target_dim > f.dim() {
            return Err(QseaError::Reduction(format!(
                "cannot pool {} features up to {target_dim}",
                f.dim()
            )));
        }
        let Some((h, w)) = f.shape else {
            let values = pool_1d(&f.values, target_dim);
            return Ok(FeatureVector::new(values));
        };
        let (rows, cols) = pooling_grid(target_dim, h, w).ok_or_else(|| {
            QseaError::Reduction(format!("no 2^a x 2^b grid of {target_dim} cells fits a {h}x{w} image"))
        })?;
        let row_edges = bin_edges(h, rows);
        let col_edges = bin_edges(w, cols);
        let mut values = Vec::with_capacity(target_dim);
        for r in 0..rows {
            for c in 0..cols {
                let mut sum = 0.0;
                for y in row_edges[r]..row_edges[r + 1] {
                    sum += f.values[y * w + col_edges[c]..y * w + col_edges[c + 1]].iter().sum::<f64>();
                }
                let count = (row_edges[r + 1] - row_edges[r]) * (col_edges[c + 1] - col_edges[c]);
                values.push(sum / count as f64);
            }
        }
        FeatureVector::with_shape(values, rows, cols)
    }
}

/// Preferred grid for `target_dim` cells that fits inside `h x w`.
fn pooling_grid(target_dim: usize, h: usize, w: usize) -> Option<(usize, usize)> {
    let n = target_dim.trailing_zeros() as usize;
    let mut best: Option<(usize, usize)> = None;
    for a in 0..=n {
        let (rows, cols) = (1usize << a, 1usize << (n - a));
        if rows > h || cols > w {
            continue;
        }
        let skew = |(r, c): (usize, usize)| (r.max(c) / r.min(c), c > r);
        if best.is_none_or(|b| skew((rows, cols)) < skew(b)) {
            best = Some((rows, cols));
        }
    }
    best
}

fn bin_edges(len: usize, bins: usize) -> Vec<usize> {
    (0..=bins).map(|i| i * len / bins).collect()
}

fn pool_1d(values: &[f64], bins: usize) -> Vec<f64> {
    let edges = bin_edges(values.len(), bins);
    edges
        .windows(2)
        .map(|e| values[e[0]..e[1]].iter().sum::<f64>() / (e[1] - e[0]) as f64)
        .collect()
}

/// Block-average pooling to `target_dim` features.
pub fn reduce_features(f: &FeatureVector, target_dim: usize) -> Result<FeatureVector> {
    BlockPooling.reduce(f, target_dim)
}

/// `|ψ> = Σ_i v_i / ‖v‖ |i>`
pub fn amplitude_encode(f: &FeatureVector) -> Result<StateVector> {
    let dim = f.dim();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(QseaError::Dimension(format!("feature dimension {dim} is not a power of two >= 2")));
    }
    if f.values.iter().all(|&v| v == 0.0) {
        return Err(QseaError::DegenerateInput("all-zero feature vector has no amplitude encoding".into()));
    }
    StateVector::from_real(dim.trailing_zeros() as usize, &f.values)
}

/// Full image-to-state pipeline for a fixed qubit count.
pub struct Encoder {
    n_qubits: usize,
    reducer: Box<dyn FeatureReducer>,
}

impl Encoder {
    pub fn new(n_qubits: usize) -> Self {
        Self::with_reducer(n_qubits, Box::new(BlockPooling))
    }

    pub fn with_reducer(n_qubits: usize, reducer: Box<dyn FeatureReducer>) -> Self {
        Self { n_qubits, reducer }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn encode(&self, img: &RawImage) -> Result<StateVector> {
        let f = normalize_pixels(img);
        let reduced = self.reducer.reduce(&f, 1 << self.n_qubits)?;
        amplitude_encode(&reduced)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let img = RawImage::new(1, 3, vec![255, 0, 51]).unwrap();
        let f = normalize_pixels(&img);
        assert_eq!(f.values(), &[1.0, 0.0, 0.2]);
        assert_eq!(f.shape(), Some((1, 3)));
    }

    #[test]
    fn reduce_examples() {
        let f = FeatureVector::with_shape(vec![1.0, 1.0, 0.0, 0.0], 2, 2).unwrap();
        assert_eq!(reduce_features(&f, 2).unwrap().values(), &[1.0, 0.0]);

        let f = FeatureVector::with_shape(vec![0.3; 28 * 28], 28, 28).unwrap();
        let r = reduce_features(&f, 256).unwrap();
        assert_eq!(r.dim(), 256);
        assert!(r.values().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn reduce_errors() {
        let f = FeatureVector::with_shape(vec![1.0; 4], 2, 2).unwrap();
        assert!(matches!(reduce_features(&f, 8), Err(QseaError::Reduction(_))));
        assert!(matches!(reduce_features(&f, 3), Err(QseaError::Reduction(_))));
        // 4 cells cannot be laid out inside a 1x4 strip as 2x2, falls back to 1x4
        let strip = FeatureVector::with_shape(vec![1.0, 2.0, 3.0, 4.0], 1, 4).unwrap();
        assert_eq!(reduce_features(&strip, 4).unwrap().shape(), Some((1, 4)));
    }

    #[test]
    fn grid_choice() {
        assert_eq!(pooling_grid(256, 28, 28), Some((16, 16)));
        assert_eq!(pooling_grid(128, 28, 28), Some((16, 8)));
        assert_eq!(pooling_grid(2, 2, 2), Some((2, 1)));
        assert_eq!(pooling_grid(1024, 28, 28), None);
    }

    #[test]
    fn encode_examples() {
        let s = amplitude_encode(&FeatureVector::new(vec![1.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(s, StateVector::zero(2));
        let s = amplitude_encode(&FeatureVector::new(vec![3.0, 4.0])).unwrap();
        assert!((s.amps()[0].re - 0.6).abs() < 1e-15 && (s.amps()[1].re - 0.8).abs() < 1e-15);
        let s = amplitude_encode(&FeatureVector::new(vec![1.0; 4])).unwrap();
        assert!(s.amps().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
    }

    #[test]
    fn encode_errors() {
        assert!(matches!(amplitude_encode(&FeatureVector::new(vec![0.0; 4])), Err(QseaError::DegenerateInput(_))));
        assert!(matches!(amplitude_encode(&FeatureVector::new(vec![1.0; 3])), Err(QseaError::Dimension(_))));
    }

    #[test]
    fn rgb_average() {
        let img = RawImage::from_rgb_planes(1, 2, &[255, 0], &[255, 1], &[254, 1]).unwrap();
        assert_eq!(img.pixels(), &[255, 1]);
    }
}
