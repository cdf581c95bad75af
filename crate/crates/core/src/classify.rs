//! Label-based classifiers over precomputed similarities.

use crate::error::{QseaError, Result};
use crate::fidelity::{fidelity_with_mode, FidelityMode};
use crate::StateVector;

fn check_train(n_sims: usize, n_labels: usize) -> Result<()> {
    if n_sims == 0 {
        return Err(QseaError::InsufficientData("empty training set".into()));
    }
    if n_sims != n_labels {
        return Err(QseaError::Consistency(format!("{n_sims} similarities but {n_labels} labels")));
    }
    Ok(())
}

/// Majority label among the `k` most similar training items. Equal
/// similarities rank by training index; equal votes go to the smaller class.
pub fn knn_by_similarity(sims: &[f64], labels: &[u8], k: usize) -> Result<u8> {
    check_train(sims.len(), labels.len())?;
    if k == 0 || k > sims.len() {
        return Err(QseaError::Parameter(format!("k = {k} with {} training samples", sims.len())));
    }
    let mut order: Vec<usize> = (0..sims.len()).collect();
    order.sort_by(|&a, &b| sims[b].total_cmp(&sims[a]).then(a.cmp(&b)));
    let mut votes = [0usize; 256];
    for &i in &order[..k] {
        votes[labels[i] as usize] += 1;
    }
    // max_by_key keeps the last maximum, so scan classes from the top down
    let best = (0..256).rev().max_by_key(|&c| votes[c]).unwrap_or(0);
    Ok(best as u8)
}

/// Class with the highest mean similarity; ties go to the smaller class.
pub fn centroid_by_similarity(sims: &[f64], labels: &[u8]) -> Result<u8> {
    check_train(sims.len(), labels.len())?;
    let mut sum = [0.0f64; 256];
    let mut count = [0usize; 256];
    for (&s, &l) in sims.iter().zip(labels) {
        sum[l as usize] += s;
        count[l as usize] += 1;
    }
    let mut best: Option<(usize, f64)> = None;
    for c in 0..256 {
        if count[c] == 0 {
            continue;
        }
        let mean = sum[c] / count[c] as f64;
        if best.is_none_or(|(_, m)| mean > m) {
            best = Some((c, mean));
        }
    }
    Ok(best.map(|(c, _)| c as u8).unwrap_or(0))
}

/// Fidelity k-NN; in shot mode training index `i` uses derived seed `i`.
pub fn knn_classify(
    train_states: &[StateVector],
    train_labels: &[u8],
    query: &StateVector,
    k: usize,
    mode: FidelityMode,
) -> Result<u8> {
    let sims = train_states
        .iter()
        .enumerate()
        .map(|(i, s)| fidelity_with_mode(query, s, mode, i as u64))
        .collect::<Result<Vec<_>>>()?;
    knn_by_similarity(&sims, train_labels, k)
}

/// `N_correct / N_total`.
pub fn accuracy(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(QseaError::Consistency(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(QseaError::InsufficientData("no test samples".into()));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(correct as f64 / truth.len() as f64)
}
