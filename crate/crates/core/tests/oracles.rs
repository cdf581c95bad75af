mod common;

use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::io::Write;

use flate2::write::GzEncoder;
use flate2::Compression;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qsea::circuit::{ParamCircuit, ParamKind};
use qsea::classify::knn_classify;
use qsea::data::{load_idx, make_synthetic};
use qsea::encoder::Encoder;
use qsea::experiment::prepare;
use qsea::fidelity::{swap_test_p0, FidelityMode};
use qsea::grad::parameter_shift_grad;
use qsea::loss::sample_triplets;
use qsea::train::train;
use qsea::{DatasetSource, DensityMatrix, QseaError, RunConfig, StateVector, C64};

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Reference partial trace by explicit index sums.
fn brute_partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Vec<C64> {
    let n = rho.n_qubits();
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let bit = |x: usize, q: usize| (x >> (n - 1 - q)) & 1;
    let mut out = vec![C64::new(0.0, 0.0); 1 << (2 * k)];
    for i in 0..rho.dim() {
        for j in 0..rho.dim() {
            if traced.iter().any(|&q| bit(i, q) != bit(j, q)) {
                continue;
            }
            let li = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(i, q));
            let lj = keep.iter().fold(0, |acc, &q| (acc << 1) | bit(j, q));
            out[li * (1 << k) + lj] += rho.get(i, j);
        }
    }
    out
}

#[test]
fn partial_trace_matches_index_sums() {
    let mut r = rng(11);
    for keep in [vec![0], vec![2], vec![0, 2], vec![1, 3], vec![0, 1, 3]] {
        let rho = random_density(4, 3, &mut r);
        let got = rho.partial_trace(&keep).unwrap();
        let want = brute_partial_trace(&rho, &keep);
        let diff = got.data().iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "keep {keep:?}: {diff}");
    }
}

#[test]
fn partial_trace_of_kronecker_product() {
    let mut r = rng(5);
    let a = random_density(2, 2, &mut r);
    let b = random_density(1, 2, &mut r);
    let ab = a.tensor(&b);
    assert!(ab.partial_trace(&[0, 1]).unwrap().max_abs_diff(&a) < 1e-12);
    assert!(ab.partial_trace(&[2]).unwrap().max_abs_diff(&b) < 1e-12);
}

#[test]
fn born_marginals_match_brute_force() {
    let mut r = rng(3);
    let psi = random_state(4, &mut r);
    let probs = psi.measure_probs(&[3, 1]).unwrap();
    let mut want = [0.0; 4];
    for (i, a) in psi.amps().iter().enumerate() {
        let (b3, b1) = (i & 1, (i >> 2) & 1);
        want[(b3 << 1) | b1] += a.norm_sqr();
    }
    for (p, w) in probs.iter().zip(want) {
        assert!((p - w).abs() < 1e-12);
    }
}

#[test]
fn swap_test_with_mixed_operand() {
    let mut r = rng(8);
    let a = random_state(2, &mut r);
    let sigma = random_density(2, 3, &mut r);
    let p0 = swap_test_p0(&a, &sigma).unwrap();
    let overlap = sigma.expectation(&a).unwrap();
    assert!((p0 - (1.0 + overlap) / 2.0).abs() < 1e-10);
}

#[test]
fn shift_rule_on_cos_squared() {
    // F(θ) = |<0|RY(θ)|0>|² = cos²(θ/2), dF/dθ = -sin(θ)/2
    let mut c = ParamCircuit::new(1);
    c.push_param(ParamKind::Ry, &[0]).unwrap();
    let f = |t: &[f64]| c.run(t, &StateVector::zero(1)).unwrap().amps()[0].norm_sqr();
    for theta in [0.0, 0.3, FRAC_PI_2, 2.0] {
        let g = parameter_shift_grad(&c, &[theta], f).unwrap()[0];
        assert!((g + theta.sin() / 2.0).abs() < 1e-12, "θ = {theta}");
    }
}

#[test]
fn negative_sampling_is_uniform() {
    // negatives given anchor 0 over {1..5}, anchors over {0..5}
    let size = 6;
    let ts = sample_triplets(size, 60_000, 21).unwrap();
    let mut anchors = vec![0f64; size];
    let mut negatives = vec![0f64; size];
    for t in &ts {
        anchors[t.anchor] += 1.0;
        if t.anchor == 0 {
            negatives[t.negative] += 1.0;
        }
    }
    let chi2 = |counts: &[f64]| {
        let total: f64 = counts.iter().sum();
        let e = total / counts.len() as f64;
        let stat: f64 = counts.iter().map(|c| (c - e).powi(2) / e).sum();
        1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
    };
    assert_eq!(negatives[0], 0.0);
    assert!(chi2(&anchors) > 1e-3);
    assert!(chi2(&negatives[1..]) > 1e-3);
}

fn idx_files(n: usize, rows: usize, cols: usize, labels: &[u8]) -> (Vec<u8>, Vec<u8>) {
    let mut im = Vec::new();
    for v in [0x803u32, n as u32, rows as u32, cols as u32] {
        im.extend_from_slice(&v.to_be_bytes());
    }
    im.extend((0..n * rows * cols).map(|i| (i * 7 % 256) as u8));
    let mut lb = Vec::new();
    for v in [0x801u32, labels.len() as u32] {
        lb.extend_from_slice(&v.to_be_bytes());
    }
    lb.extend_from_slice(labels);
    (im, lb)
}

#[test]
fn idx_ten_record_file_plain_and_gzip() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<u8> = (0..10).collect();
    let (im, lb) = idx_files(10, 28, 28, &labels);
    fs::write(dir.path().join("im"), &im).unwrap();
    fs::write(dir.path().join("lb"), &lb).unwrap();
    for (name, data) in [("im.gz", &im), ("lb.gz", &lb)] {
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(data).unwrap();
        fs::write(dir.path().join(name), enc.finish().unwrap()).unwrap();
    }
    let plain = load_idx(&dir.path().join("im"), &dir.path().join("lb")).unwrap();
    let gz = load_idx(&dir.path().join("im.gz"), &dir.path().join("lb.gz")).unwrap();
    assert_eq!(plain.len(), 10);
    assert_eq!(plain.images(), gz.images());
    assert_eq!(gz.labels(), labels.as_slice());
    assert_eq!((plain.images()[3].height(), plain.images()[3].width()), (28, 28));
    assert_eq!(plain.images()[1].pixels()[0], (784 * 7 % 256) as u8);

    fs::write(dir.path().join("empty"), b"").unwrap();
    assert!(matches!(load_idx(&dir.path().join("empty"), &dir.path().join("lb")), Err(QseaError::Format(_))));
    fs::write(dir.path().join("short"), &im[..im.len() - 10]).unwrap();
    assert!(matches!(load_idx(&dir.path().join("short"), &dir.path().join("lb")), Err(QseaError::Length(_))));
}

#[test]
fn vendored_mnist_subset_loads() {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist5k");
    let ds = load_idx(
        format!("{root}/images-idx3-ubyte.gz").as_ref(),
        format!("{root}/labels-idx1-ubyte.gz").as_ref(),
    )
    .unwrap();
    assert_eq!(ds.len(), 5000);
    let labels = ds.labels();
    for c in 0..10u8 {
        assert_eq!(labels.iter().filter(|&&l| l == c).count(), 500);
    }
    assert_eq!((ds.images()[0].height(), ds.images()[0].width()), (28, 28));
}

#[test]
fn knn_on_noise_free_templates_for_every_k() {
    // brute-force table: every query is a template copy, so fidelity 1 to
    // its own class and < 1 to the other
    let ds = make_synthetic(2, 6, 16, 200.0, 0.0, 4).unwrap();
    let states = ds.encode(&Encoder::new(4)).unwrap();
    let labels = ds.labels().to_vec();
    for k in [1, 3, 5, 7, 9, 11] {
        for (q, query) in states.iter().enumerate() {
            assert_eq!(knn_classify(&states, &labels, query, k, FidelityMode::Exact).unwrap(), labels[q], "k={k}");
        }
    }
    let orth = qsea::fidelity::exact_fidelity(&states[0], &states[1]).unwrap();
    assert!(orth < 1.0);
}

#[test]
fn templates_are_orthogonal_without_noise() {
    let ds = make_synthetic(4, 1, 16, 200.0, 0.0, 0).unwrap();
    let imgs = ds.images();
    for i in 0..4 {
        for j in i + 1..4 {
            let dot: u64 = imgs[i].pixels().iter().zip(imgs[j].pixels()).map(|(&a, &b)| a as u64 * b as u64).sum();
            assert_eq!(dot, 0);
        }
    }
}

#[test]
fn training_never_reads_labels() {
    let ds = make_synthetic(2, 10, 8, 200.0, 60.0, 2).unwrap();
    let states = ds.encode(&Encoder::new(3)).unwrap();
    let cfg = RunConfig { n_qubits: 3, layers: 1, epochs: 3, batch: 4, ..RunConfig::default() };
    let before = ds.label_reads();
    train(&states, &cfg).unwrap();
    assert_eq!(ds.label_reads(), before);
}

#[test]
fn config_file_with_relative_idx_paths() {
    let dir = tempfile::tempdir().unwrap();
    let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
    let (im, lb) = idx_files(20, 4, 4, &labels);
    fs::create_dir(dir.path().join("d")).unwrap();
    fs::write(dir.path().join("d/im"), im).unwrap();
    fs::write(dir.path().join("d/lb"), lb).unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(
        &cfg_path,
        "# tiny idx run\nn_qubits = 2\nlayers = 1\nsamples_per_class = 10\nk = 3\ndataset = idx\nidx_images = d/im\nidx_labels = d/lb\n",
    )
    .unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    assert!(matches!(&cfg.dataset, DatasetSource::Idx { images, .. } if images.is_absolute()));
    let split = prepare(&cfg, None).unwrap();
    assert_eq!((split.train_states.len(), split.test_states.len()), (16, 4));
    assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
}
