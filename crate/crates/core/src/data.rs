//! Labelled image collections: IDX and CIFAR-style binary loaders, a
//! synthetic generator, class subsets and stratified splits.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::encoder::{Encoder, RawImage};
use crate::error::{QseaError, Result};
use crate::StateVector;

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const CIFAR_SIDE: usize = 32;
const CIFAR_RECORD: usize = 1 + 3 * CIFAR_SIDE * CIFAR_SIDE;

/// Images with their class labels. Label reads are counted so callers can
/// check that a code path never touched them.
#[derive(Debug)]
pub struct Dataset {
    name: String,
    images: Vec<RawImage>,
    labels: Vec<u8>,
    label_reads: AtomicUsize,
}

impl Clone for Dataset {
    fn clone(&self) -> Self {
        Self {
            name: self.name.clone(),
            images: self.images.clone(),
            labels: self.labels.clone(),
            label_reads: AtomicUsize::new(0),
        }
    }
}

impl Dataset {
    pub fn new(name: impl Into<String>, images: Vec<RawImage>, labels: Vec<u8>) -> Result<Self> {
        if images.len() != labels.len() {
            return Err(QseaError::Consistency(format!(
                "{} images but {} labels",
                images.len(),
                labels.len()
            )));
        }
        Ok(Self { name: name.into(), images, labels, label_reads: AtomicUsize::new(0) })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[RawImage] {
        &self.images
    }

    pub fn labels(&self) -> &[u8] {
        self.label_reads.fetch_add(1, Ordering::Relaxed);
        &self.labels
    }

    /// Number of [`Dataset::labels`] calls so far.
    pub fn label_reads(&self) -> usize {
        self.label_reads.load(Ordering::Relaxed)
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<u8> {
        let mut c = self.labels().to_vec();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Encodes every image in order.
    pub fn encode(&self, encoder: &Encoder) -> Result<Vec<StateVector>> {
        self.images.par_iter().map(|img| encoder.encode(img)).collect()
    }
}

fn open_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut raw)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(buf: &[u8], at: usize, what: &str) -> Result<u32> {
    buf.get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| QseaError::Format(format!("{what}: header truncated")))
}

/// Parses IDX image and label buffers (already decompressed).
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<(Vec<RawImage>, Vec<u8>)> {
    if images.is_empty() || labels.is_empty() {
        return Err(QseaError::Format("empty IDX file".into()));
    }
    let magic = be_u32(images, 0, "images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(QseaError::Format(format!("bad image magic {magic:#010x}")));
    }
    let magic = be_u32(labels, 0, "labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(QseaError::Format(format!("bad label magic {magic:#010x}")));
    }
    let n = be_u32(images, 4, "images")? as usize;
    let rows = be_u32(images, 8, "images")? as usize;
    let cols = be_u32(images, 12, "images")? as usize;
    let n_labels = be_u32(labels, 4, "labels")? as usize;
    if n != n_labels {
        return Err(QseaError::Consistency(format!("{n} images but {n_labels} labels")));
    }
    let px = rows * cols;
    let body = &images[16..];
    if body.len() < n * px {
        return Err(QseaError::Length(format!(
            "image payload holds {} bytes, header promises {}",
            body.len(),
            n * px
        )));
    }
    let lbl = &labels[8..];
    if lbl.len() < n {
        return Err(QseaError::Length(format!("label payload holds {} bytes, header promises {n}", lbl.len())));
    }
    let imgs = body[..n * px]
        .chunks_exact(px)
        .map(|c| RawImage::new(rows, cols, c.to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Ok((imgs, lbl[..n].to_vec()))
}

/// Loads an IDX image/label pair; gzip is detected from the file contents.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let (imgs, labels) = parse_idx(&open_maybe_gz(images_path)?, &open_maybe_gz(labels_path)?)?;
    let name = images_path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Dataset::new(name, imgs, labels)
}

/// Parses 3073-byte records (label, then 32×32 red, green, blue planes),
/// averaging channels to grayscale.
pub fn parse_cifar(buf: &[u8]) -> Result<(Vec<RawImage>, Vec<u8>)> {
    if buf.is_empty() {
        return Err(QseaError::Format("empty CIFAR batch".into()));
    }
    if !buf.len().is_multiple_of(CIFAR_RECORD) {
        return Err(QseaError::Length(format!(
            "batch of {} bytes is not a multiple of the {CIFAR_RECORD}-byte record",
            buf.len()
        )));
    }
    let plane = CIFAR_SIDE * CIFAR_SIDE;
    let mut imgs = Vec::with_capacity(buf.len() / CIFAR_RECORD);
    let mut labels = Vec::with_capacity(imgs.capacity());
    for rec in buf.chunks_exact(CIFAR_RECORD) {
        labels.push(rec[0]);
        let px = &rec[1..];
        imgs.push(RawImage::from_rgb_planes(
            CIFAR_SIDE,
            CIFAR_SIDE,
            &px[..plane],
            &px[plane..2 * plane],
            &px[2 * plane..],
        )?);
    }
    Ok((imgs, labels))
}

pub fn load_cifar(batches: &[impl AsRef<Path>]) -> Result<Dataset> {
    let mut imgs = Vec::new();
    let mut labels = Vec::new();
    for b in batches {
        let (i, l) = parse_cifar(&open_maybe_gz(b.as_ref())?)?;
        imgs.extend(i);
        labels.extend(l);
    }
    Dataset::new("cifar", imgs, labels)
}

/// Class `c` adds `band` to row block `c` of `n_classes`, over uniform
/// pixel noise in `[0, noise_amp]`; pixels clamp at 255.
pub fn make_synthetic(
    n_classes: usize,
    per_class: usize,
    image_size: usize,
    band: f64,
    noise_amp: f64,
    seed: u64,
) -> Result<Dataset> {
    if n_classes < 2 || n_classes > image_size || n_classes > 256 {
        return Err(QseaError::Parameter(format!(
            "cannot draw {n_classes} distinct bands on a {image_size}-pixel image"
        )));
    }
    if !(0.0..=255.0).contains(&noise_amp) || !(0.0..=255.0).contains(&band) {
        return Err(QseaError::Parameter(format!("band {band} or noise amplitude {noise_amp} outside [0, 255]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut imgs = Vec::with_capacity(n_classes * per_class);
    let mut labels = Vec::with_capacity(n_classes * per_class);
    for _ in 0..per_class {
        for c in 0..n_classes {
            let lo = c * image_size / n_classes;
            let hi = (c + 1) * image_size / n_classes;
            let mut px = Vec::with_capacity(image_size * image_size);
            for r in 0..image_size {
                let base = if (lo..hi).contains(&r) { band } else { 0.0 };
                for _ in 0..image_size {
                    let v: f64 = base + rng.random_range(0.0..=noise_amp);
                    px.push(v.round().min(255.0) as u8);
                }
            }
            imgs.push(RawImage::new(image_size, image_size, px)?);
            labels.push(c as u8);
        }
    }
    Dataset::new("synthetic", imgs, labels)
}

/// `per_class` random samples of each listed class, grouped by class in
/// the order given.
pub fn subset(ds: &Dataset, classes: &[u8], per_class: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = ds.labels();
    let mut imgs = Vec::with_capacity(classes.len() * per_class);
    let mut out_labels = Vec::with_capacity(imgs.capacity());
    for &c in classes {
        let mut idx: Vec<usize> = (0..ds.len()).filter(|&i| labels[i] == c).collect();
        if idx.len() < per_class {
            return Err(QseaError::InsufficientData(format!(
                "class {c} has {} samples, {per_class} requested",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for &i in &idx[..per_class] {
            imgs.push(ds.images[i].clone());
            out_labels.push(c);
        }
    }
    Dataset::new(ds.name.clone(), imgs, out_labels)
}

/// Per class with `m` samples, `max(1, round(m/5))` go to the test side.
/// Returns sorted (train, test) index lists.
pub fn stratified_split(labels: &[u8], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        let m = idx.len();
        if m < 2 {
            return Err(QseaError::InsufficientData(format!("class {c} has {m} sample(s), a split needs 2")));
        }
        let n_test = ((0.2 * m as f64).round() as usize).max(1);
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx_bytes(n: u32, rows: u32, cols: u32, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
        let mut im = Vec::new();
        for v in [IDX_IMAGES_MAGIC, n, rows, cols] {
            im.extend_from_slice(&v.to_be_bytes());
        }
        im.extend((0..n * rows * cols).map(|i| (i % 251) as u8));
        let mut lb = Vec::new();
        for v in [IDX_LABELS_MAGIC, labels.len() as u32] {
            lb.extend_from_slice(&v.to_be_bytes());
        }
        lb.extend_from_slice(labels);
        (im, lb)
    }

    #[test]
    fn idx_round_trip() {
        let (im, lb) = idx_bytes(3, 2, 2, &[7, 1, 7]);
        let (imgs, labels) = parse_idx(&im, &lb).unwrap();
        assert_eq!(labels, vec![7, 1, 7]);
        assert_eq!(imgs[1].pixels(), &[4, 5, 6, 7]);
    }

    #[test]
    fn idx_errors() {
        let (im, lb) = idx_bytes(3, 2, 2, &[7, 1, 7]);
        let mut bad = im.clone();
        bad[3] = 0x01;
        assert!(matches!(parse_idx(&bad, &lb), Err(QseaError::Format(_))));
        assert!(matches!(parse_idx(&im[..im.len() - 1], &lb), Err(QseaError::Length(_))));
        let (_, lb2) = idx_bytes(3, 2, 2, &[7, 1]);
        assert!(matches!(parse_idx(&im, &lb2), Err(QseaError::Consistency(_))));
        assert!(matches!(parse_idx(&[], &lb), Err(QseaError::Format(_))));
    }

    #[test]
    fn cifar_record() {
        let mut rec = vec![3u8];
        rec.extend(std::iter::repeat_n(30, 1024));
        rec.extend(std::iter::repeat_n(60, 1024));
        rec.extend(std::iter::repeat_n(91, 1024));
        let (imgs, labels) = parse_cifar(&rec).unwrap();
        assert_eq!(labels, vec![3]);
        assert!(imgs[0].pixels().iter().all(|&p| p == 60));
        assert!(matches!(parse_cifar(&rec[..100]), Err(QseaError::Length(_))));
    }

    #[test]
    fn synthetic_is_seeded_and_balanced() {
        let a = make_synthetic(3, 4, 16, 200.0, 50.0, 1).unwrap();
        let b = make_synthetic(3, 4, 16, 200.0, 50.0, 1).unwrap();
        assert_eq!(a.images(), b.images());
        assert_eq!(a.len(), 12);
        assert_eq!(a.classes(), vec![0, 1, 2]);
        assert!(make_synthetic(20, 1, 16, 200.0, 50.0, 1).is_err());
        assert!(make_synthetic(1, 1, 16, 200.0, 50.0, 1).is_err());
    }

    #[test]
    fn subset_counts_and_shortfall() {
        let ds = make_synthetic(4, 5, 8, 200.0, 10.0, 0).unwrap();
        let s = subset(&ds, &[2, 0], 3, 9).unwrap();
        assert_eq!(s.labels(), &[2, 2, 2, 0, 0, 0]);
        assert!(matches!(subset(&ds, &[1], 6, 0), Err(QseaError::InsufficientData(_))));
    }

    #[test]
    fn split_sizes() {
        let labels: Vec<u8> = [0u8; 50].iter().chain([1u8; 7].iter()).copied().collect();
        let (tr, te) = stratified_split(&labels, 4).unwrap();
        assert_eq!(te.iter().filter(|&&i| labels[i] == 0).count(), 10);
        assert_eq!(te.iter().filter(|&&i| labels[i] == 1).count(), 1);
        assert_eq!(tr.len() + te.len(), labels.len());
        assert!(matches!(stratified_split(&[0, 0, 1], 0), Err(QseaError::InsufficientData(_))));
    }

    #[test]
    fn label_reads_are_counted() {
        let ds = make_synthetic(2, 2, 4, 200.0, 0.0, 0).unwrap();
        assert_eq!(ds.label_reads(), 0);
        let _ = ds.labels();
        assert_eq!(ds.label_reads(), 1);
    }
}
