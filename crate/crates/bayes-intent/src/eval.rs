//! Evaluation harness: per-frame predictions, confusion matrix, weighted
//! metrics, latency statistics, and the single-modality ablations.

use serde::{Deserialize, Serialize};

use crate::dataset::Trajectory;
use crate::error::{Error, Result};
use crate::inference::{Cpt, Predictor, PredictorConfig};
use crate::scalar::{cast, Scalar};

pub use crate::evidence::{restrict_modality, BaselineKind, ProjectedEvidence};

/// Row = ground truth, column = prediction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(n: usize) -> Self {
        ConfusionMatrix {
            n,
            counts: vec![0; n * n],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth * self.n + predicted] += 1;
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth * self.n + predicted]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Per-class frame support (row sum).
    pub fn support(&self, class: usize) -> u64 {
        (0..self.n).map(|j| self.get(class, j)).sum()
    }

    pub fn column_sum(&self, class: usize) -> u64 {
        (0..self.n).map(|i| self.get(i, class)).sum()
    }

    pub fn off_diagonal_total(&self) -> u64 {
        self.total() - self.trace()
    }

    /// Associative merge of partial matrices.
    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.n, other.n, "class count mismatch");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }

    /// Comma-separated matrix with class names on both axes.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let mut out = String::from("truth\\pred");
        for name in class_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.n {
            out.push_str(&class_names[i]);
            for j in 0..self.n {
                out.push(',');
                out.push_str(&self.get(i, j).to_string());
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<S> {
    pub precision: S,
    pub recall: S,
    pub f1: S,
    pub support: u64,
}

/// Support-weighted classification metrics plus latency statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport<S> {
    pub weighted_accuracy: S,
    pub weighted_precision: S,
    pub weighted_f1: S,
    pub per_class: Vec<ClassMetrics<S>>,
    pub mean_latency_s: f64,
    pub p95_latency_s: f64,
    pub frames: usize,
}

/// Which frames count toward the confusion matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMode {
    /// Every frame after the first contributes a prediction.
    FrameLevel,
    /// Only the final frame of each trajectory contributes.
    FinalFrame,
}

/// Metrics from a filled confusion matrix. Zero-denominator precision and
/// recall fall back to zero, the usual convention for unpredicted
/// classes.
pub fn metrics_from_confusion<S: Scalar>(cm: &ConfusionMatrix) -> MetricsReport<S> {
    let total = cm.total();
    let total_s: S = cast(total as f64);
    let mut per_class = Vec::with_capacity(cm.n_classes());
    let mut weighted_precision = S::zero();
    let mut weighted_f1 = S::zero();
    for class in 0..cm.n_classes() {
        let tp: S = cast(cm.get(class, class) as f64);
        let support = cm.support(class);
        let col: S = cast(cm.column_sum(class) as f64);
        let row: S = cast(support as f64);
        let precision = if col > S::zero() { tp / col } else { S::zero() };
        let recall = if row > S::zero() { tp / row } else { S::zero() };
        let f1 = if precision + recall > S::zero() {
            cast::<S>(2.0) * precision * recall / (precision + recall)
        } else {
            S::zero()
        };
        let weight = if total > 0 { row / total_s } else { S::zero() };
        weighted_precision = weighted_precision + weight * precision;
        weighted_f1 = weighted_f1 + weight * f1;
        per_class.push(ClassMetrics {
            precision,
            recall,
            f1,
            support,
        });
    }
    let weighted_accuracy = if total > 0 {
        cast::<S>(cm.trace() as f64) / total_s
    } else {
        S::zero()
    };
    MetricsReport {
        weighted_accuracy,
        weighted_precision,
        weighted_f1,
        per_class,
        mean_latency_s: 0.0,
        p95_latency_s: 0.0,
        frames: total as usize,
    }
}

/// Replays trajectories through a predictor restricted to one modality
/// subset and accumulates the confusion matrix and weighted metrics.
///
/// The table must come from a disjoint training split; this function only
/// sees the evaluation trajectories.
pub fn run_eval<S: Scalar>(
    cpt: &Cpt<S>,
    trajectories: &[Trajectory<S>],
    baseline: BaselineKind,
    config: &PredictorConfig<S>,
    mode: EvalMode,
) -> Result<(ConfusionMatrix, MetricsReport<S>)> {
    if trajectories.is_empty() {
        return Err(Error::EmptyEvalSet);
    }
    let restricted = cpt.restrict(baseline)?;
    let n = restricted.n_objects();
    let mut cm = ConfusionMatrix::new(n);
    let mut latencies = Vec::new();
    for traj in trajectories {
        if traj.scene.len() != n {
            return Err(Error::CptMismatch {
                cpt: n,
                scene: traj.scene.len(),
            });
        }
        let mut predictor = Predictor::new(&restricted, traj.scene.clone(), config)?;
        let last_idx = traj.frames.len().saturating_sub(1);
        for (idx, obs) in traj.frames.iter().enumerate() {
            let out = predictor.step(obs)?;
            latencies.push(out.latency_s);
            let counted = match mode {
                EvalMode::FrameLevel => idx >= 1,
                EvalMode::FinalFrame => idx == last_idx,
            };
            if counted {
                cm.record(traj.label, out.predicted);
            }
        }
    }
    let mut report = metrics_from_confusion::<S>(&cm);
    let stats = LatencyStats::from_samples(&latencies);
    report.mean_latency_s = stats.mean_s;
    report.p95_latency_s = stats.p95_s;
    Ok((cm, report))
}

/// Wall-clock per-frame cost of the full prediction chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_s: f64,
    pub p95_s: f64,
    pub frames: usize,
}

impl LatencyStats {
    pub fn from_samples(samples: &[f64]) -> LatencyStats {
        if samples.is_empty() {
            return LatencyStats {
                mean_s: 0.0,
                p95_s: 0.0,
                frames: 0,
            };
        }
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("latencies are finite"));
        let rank = ((0.95 * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
        LatencyStats {
            mean_s: mean,
            p95_s: sorted[rank - 1],
            frames: samples.len(),
        }
    }
}

/// Replays one trajectory `repetitions` times (plus a discarded warm-up
/// pass) and aggregates per-frame step latency.
pub fn measure_latency<S: Scalar>(
    cpt: &Cpt<S>,
    trajectory: &Trajectory<S>,
    config: &PredictorConfig<S>,
    repetitions: usize,
) -> Result<LatencyStats> {
    if repetitions < 1 {
        return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
    }
    let mut samples = Vec::with_capacity(repetitions * trajectory.frames.len());
    for rep in 0..=repetitions {
        let mut predictor = Predictor::new(cpt, trajectory.scene.clone(), config)?;
        for obs in &trajectory.frames {
            let out = predictor.step(obs)?;
            if rep > 0 {
                samples.push(out.latency_s);
            }
        }
    }
    Ok(LatencyStats::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{default_scene, generate, generate_corpus, CorpusOptions, GenSpec};
    use crate::inference::learn_cpt;

    const TOL: f64 = 1e-9;

    #[test]
    fn weighted_metrics_hand_computed() {
        // [[2,0],[1,1]]: equal supports, precisions (2/3, 1), recalls
        // (1, 1/2), F1s (0.8, 2/3).
        let mut cm = ConfusionMatrix::new(2);
        cm.record(0, 0);
        cm.record(0, 0);
        cm.record(1, 0);
        cm.record(1, 1);
        let m = metrics_from_confusion::<f64>(&cm);
        assert!((m.weighted_f1 - (0.5 * 0.8 + 0.5 * (2.0 / 3.0))).abs() < TOL);
        assert!((m.weighted_accuracy - 0.75).abs() < TOL);
        assert!((m.per_class[0].precision - 2.0 / 3.0).abs() < TOL);
        assert!((m.per_class[1].recall - 0.5).abs() < TOL);
    }

    #[test]
    fn perfect_predictor_metrics_are_one() {
        let mut cm = ConfusionMatrix::new(3);
        for c in 0..3 {
            for _ in 0..5 {
                cm.record(c, c);
            }
        }
        let m = metrics_from_confusion::<f64>(&cm);
        assert!((m.weighted_accuracy - 1.0).abs() < TOL);
        assert!((m.weighted_precision - 1.0).abs() < TOL);
        assert!((m.weighted_f1 - 1.0).abs() < TOL);
    }

    #[test]
    fn constant_predictor_on_balanced_data() {
        let mut cm = ConfusionMatrix::new(3);
        for truth in 0..3 {
            for _ in 0..4 {
                cm.record(truth, 0);
            }
        }
        let m = metrics_from_confusion::<f64>(&cm);
        assert!((m.weighted_accuracy - 1.0 / 3.0).abs() < TOL);
    }

    #[test]
    fn accuracy_equals_trace_over_total() {
        let mut cm = ConfusionMatrix::new(3);
        let data = [(0, 1, 3), (1, 1, 7), (2, 0, 2), (2, 2, 5), (0, 0, 4)];
        for (t, p, k) in data {
            for _ in 0..k {
                cm.record(t, p);
            }
        }
        let m = metrics_from_confusion::<f64>(&cm);
        assert!(
            (m.weighted_accuracy - cm.trace() as f64 / cm.total() as f64).abs() < TOL
        );
    }

    #[test]
    fn confusion_row_sums_match_supports() {
        let mut cm = ConfusionMatrix::new(2);
        cm.record(0, 1);
        cm.record(0, 0);
        cm.record(1, 1);
        assert_eq!(cm.support(0), 2);
        assert_eq!(cm.support(1), 1);
        assert_eq!(cm.total(), 3);
    }

    #[test]
    fn merge_is_associative_with_accumulation() {
        let mut a = ConfusionMatrix::new(2);
        a.record(0, 0);
        let mut b = ConfusionMatrix::new(2);
        b.record(1, 0);
        b.record(1, 1);
        let mut merged = a.clone();
        merged.merge(&b);
        assert_eq!(merged.total(), 3);
        assert_eq!(merged.get(1, 0), 1);
    }

    #[test]
    fn csv_has_header_row_and_column() {
        let mut cm = ConfusionMatrix::new(2);
        cm.record(0, 1);
        let names = vec!["a".to_string(), "b".to_string()];
        let csv = cm.to_csv(&names);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "truth\\pred,a,b");
        assert_eq!(lines[1], "a,0,1");
        assert_eq!(lines[2], "b,0,0");
    }

    #[test]
    fn run_eval_smoke_and_baseline_restriction() {
        let template = GenSpec::for_target(default_scene::<f64>(), 0, 0).unwrap();
        let corpus = generate_corpus(&template, &CorpusOptions::new(3, 21)).unwrap();
        let config = PredictorConfig::default();
        let cpt = learn_cpt(&corpus, &config).unwrap();
        for kind in BaselineKind::ALL {
            let (cm, report) =
                run_eval(&cpt, &corpus, kind, &config, EvalMode::FrameLevel).unwrap();
            // 9 trajectories x 60 counted frames.
            assert_eq!(cm.total(), 9 * 60);
            assert!(report.weighted_accuracy >= 0.0 && report.weighted_accuracy <= 1.0);
            assert!(report.mean_latency_s > 0.0);
        }
    }

    #[test]
    fn final_frame_mode_counts_once_per_trajectory() {
        let template = GenSpec::for_target(default_scene::<f64>(), 0, 0).unwrap();
        let corpus = generate_corpus(&template, &CorpusOptions::new(2, 5)).unwrap();
        let config = PredictorConfig::default();
        let cpt = learn_cpt(&corpus, &config).unwrap();
        let (cm, _) = run_eval(
            &cpt,
            &corpus,
            BaselineKind::FullBI,
            &config,
            EvalMode::FinalFrame,
        )
        .unwrap();
        assert_eq!(cm.total(), 6);
    }

    #[test]
    fn empty_eval_set_is_an_error() {
        let config = PredictorConfig::<f64>::default();
        let template = GenSpec::for_target(default_scene::<f64>(), 0, 0).unwrap();
        let corpus = generate_corpus(&template, &CorpusOptions::new(1, 5)).unwrap();
        let cpt = learn_cpt(&corpus, &config).unwrap();
        let empty: Vec<Trajectory<f64>> = Vec::new();
        assert!(matches!(
            run_eval(&cpt, &empty, BaselineKind::FullBI, &config, EvalMode::FrameLevel),
            Err(Error::EmptyEvalSet)
        ));
    }

    #[test]
    fn latency_measurement_is_positive_and_stable() {
        let template = GenSpec::for_target(default_scene::<f64>(), 1, 8).unwrap();
        let traj = generate(&template).unwrap();
        let config = PredictorConfig::default();
        let cpt = learn_cpt(&[traj.clone()], &config).unwrap();
        let lo = measure_latency(&cpt, &traj, &config, 4).unwrap();
        let hi = measure_latency(&cpt, &traj, &config, 8).unwrap();
        assert!(lo.mean_s > 0.0 && lo.mean_s.is_finite());
        assert!(lo.p95_s >= lo.mean_s * 0.1);
        // Doubling repetitions shouldn't move the mean much.
        let rel = (hi.mean_s - lo.mean_s).abs() / lo.mean_s;
        assert!(rel < 0.2, "latency mean unstable: {} vs {}", lo.mean_s, hi.mean_s);
    }

    #[test]
    fn metrics_permutation_equivariance() {
        let mut cm = ConfusionMatrix::new(3);
        let data = [(0, 1, 3), (1, 1, 7), (2, 0, 2), (2, 2, 5), (0, 0, 4)];
        for (t, p, k) in data {
            for _ in 0..k {
                cm.record(t, p);
            }
        }
        // Relabel classes by the cycle 0->1->2->0.
        let perm = [1, 2, 0];
        let mut pm = ConfusionMatrix::new(3);
        for (t, p, k) in data {
            for _ in 0..k {
                pm.record(perm[t], perm[p]);
            }
        }
        let m = metrics_from_confusion::<f64>(&cm);
        let mp = metrics_from_confusion::<f64>(&pm);
        assert!((m.weighted_accuracy - mp.weighted_accuracy).abs() < TOL);
        assert!((m.weighted_precision - mp.weighted_precision).abs() < TOL);
        assert!((m.weighted_f1 - mp.weighted_f1).abs() < TOL);
        for c in 0..3 {
            assert!((m.per_class[c].f1 - mp.per_class[perm[c]].f1).abs() < TOL);
        }
    }
}
