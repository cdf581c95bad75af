use serde::{Deserialize, Serialize};

/// Mean losses over one epoch's optimizer steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLosses {
    pub epoch: usize,
    pub total: f64,
    pub f1: f64,
    pub f2: f64,
}

/// Outcome of one training (and optionally evaluation) run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMetrics {
    pub seed: u64,
    pub losses: Vec<EpochLosses>,
    /// `N_correct / N_total` on the held-out split, when evaluated.
    pub accuracy: Option<f64>,
    pub wall_s: f64,
}

/// Accuracy statistics over repeated runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatSummary {
    pub runs: Vec<RunMetrics>,
    pub max_accuracy: f64,
    pub avg_accuracy: f64,
}

impl RepeatSummary {
    /// Runs without an accuracy are ignored in the statistics.
    pub fn from_runs(runs: Vec<RunMetrics>) -> Self {
        let accs: Vec<f64> = runs.iter().filter_map(|r| r.accuracy).collect();
        let max_accuracy = accs.iter().copied().fold(f64::NAN, f64::max);
        let avg_accuracy = if accs.is_empty() { f64::NAN } else { accs.iter().sum::<f64>() / accs.len() as f64 };
        Self { runs, max_accuracy, avg_accuracy }
    }

    pub fn median_accuracy(&self) -> f64 {
        let mut accs: Vec<f64> = self.runs.iter().filter_map(|r| r.accuracy).collect();
        accs.sort_by(f64::total_cmp);
        match accs.len() {
            0 => f64::NAN,
            n if n % 2 == 1 => accs[n / 2],
            n => 0.5 * (accs[n / 2 - 1] + accs[n / 2]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(acc: f64) -> RunMetrics {
        RunMetrics { accuracy: Some(acc), ..Default::default() }
    }

    #[test]
    fn single_run_aggregate() {
        let s = RepeatSummary::from_runs(vec![run(0.9)]);
        assert_eq!((s.max_accuracy, s.avg_accuracy, s.median_accuracy()), (0.9, 0.9, 0.9));
    }

    #[test]
    fn max_at_least_average() {
        let s = RepeatSummary::from_runs(vec![run(0.5), run(1.0), run(0.75), run(0.8)]);
        assert!(s.max_accuracy >= s.avg_accuracy);
        assert_eq!(s.median_accuracy(), 0.775);
    }
}
