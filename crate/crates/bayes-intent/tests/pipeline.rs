//! End-to-end flows: generator output through learning and prediction.

use bayes_intent::dataset::{
    default_scene, generate, generate_corpus, CorpusOptions, GenSpec,
};
use bayes_intent::evidence::{BaselineKind, DiscreteEvidence, HandState};
use bayes_intent::geometry::Affordance;
use bayes_intent::inference::{learn_cpt, Predictor, PredictorConfig};

/// Clean straight reaches are perfectly classifiable once the head sweep
/// has begun.
#[test]
fn noise_free_corpus_classifies_after_onset() {
    let mut template = GenSpec::for_target(default_scene::<f64>(), 0, 0).unwrap();
    template.sigma_pos = 0.0;
    template.sigma_head = 0.0;
    let mut opts = CorpusOptions::new(10, 77);
    opts.base_curve_sigma = 0.0;
    opts.variant_stride = 0;
    let corpus = generate_corpus(&template, &opts).unwrap();
    let config = PredictorConfig::default();
    let cpt = learn_cpt(&corpus, &config).unwrap();

    let mut correct = 0usize;
    let mut total = 0usize;
    for traj in &corpus {
        let mut predictor = Predictor::new(&cpt, traj.scene.clone(), &config).unwrap();
        let duration = traj.duration();
        for obs in &traj.frames {
            let out = predictor.step(obs).unwrap();
            if obs.t / duration > template.head_onset {
                total += 1;
                correct += usize::from(out.predicted == traj.label);
            }
        }
    }
    let accuracy = correct as f64 / total as f64;
    assert!(
        accuracy >= 0.95,
        "post-onset accuracy {accuracy} below 0.95 ({correct}/{total})"
    );
}

/// After training, the likelihood column of an evidence combination where
/// every modality points at one object peaks at that object.
#[test]
fn aligned_evidence_columns_argmax_to_their_target() {
    let scene = default_scene::<f64>();
    let template = GenSpec::for_target(scene.clone(), 0, 0).unwrap();
    let corpus = generate_corpus(&template, &CorpusOptions::new(10, 13)).unwrap();
    let config = PredictorConfig::default();
    let cpt = learn_cpt(&corpus, &config).unwrap();
    for target in 0..3 {
        let hand_state = match scene.objects[target].affordance {
            Affordance::SideGrasp => HandState::Neutral,
            _ => HandState::Flexion,
        };
        let aligned = DiscreteEvidence {
            head_target: target,
            motion_target: Some(target),
            hand_state,
        };
        let best = (0..3)
            .max_by(|&a, &b| {
                cpt.likelihood_for(&aligned, a)
                    .partial_cmp(&cpt.likelihood_for(&aligned, b))
                    .unwrap()
            })
            .unwrap();
        assert_eq!(
            best, target,
            "aligned evidence for object {target} favors object {best}"
        );
    }
}

/// On a clean reach the prediction settles on the true target within the
/// first half of the trajectory and stays there.
#[test]
fn prediction_settles_before_half_duration() {
    let scene = default_scene::<f64>();
    let template = GenSpec::for_target(scene.clone(), 0, 0).unwrap();
    let corpus = generate_corpus(&template, &CorpusOptions::new(10, 55)).unwrap();
    let config = PredictorConfig::default();
    let cpt = learn_cpt(&corpus, &config).unwrap();

    for target in 0..3 {
        let mut spec = GenSpec::for_target(scene.clone(), target, 7777 + target as u64).unwrap();
        spec.sigma_pos = 0.0;
        spec.sigma_head = 0.0;
        let traj = generate(&spec).unwrap();
        let duration = traj.duration();
        let mut predictor = Predictor::new(&cpt, traj.scene.clone(), &config).unwrap();
        let mut settled_at: Option<f64> = None;
        for obs in &traj.frames {
            let out = predictor.step(obs).unwrap();
            if out.predicted == traj.label {
                settled_at.get_or_insert(obs.t / duration);
            } else {
                settled_at = None;
            }
        }
        let settle = settled_at.expect("prediction never settled");
        assert!(
            settle <= 0.5,
            "target {target} settled at {settle} of the reach"
        );
    }
}

/// The learning/prediction chain restricted per baseline matches training
/// on the projected evidence directly.
#[test]
fn baseline_restriction_equals_direct_projection() {
    let template = GenSpec::for_target(default_scene::<f64>(), 0, 0).unwrap();
    let corpus = generate_corpus(&template, &CorpusOptions::new(4, 3)).unwrap();
    let config = PredictorConfig::default();
    let full = learn_cpt(&corpus, &config).unwrap();
    for kind in [
        BaselineKind::HeadOnly,
        BaselineKind::HandOrientationOnly,
        BaselineKind::HandVelocityOnly,
    ] {
        let restricted = full.restrict(kind).unwrap();
        assert_eq!(restricted.modality(), kind);
        let totals_full: u64 = full.target_totals().iter().sum();
        let totals_restricted: u64 = restricted.target_totals().iter().sum();
        assert_eq!(totals_full, totals_restricted);
        for target in 0..3 {
            let row_sum: f64 = restricted.target_row(target).iter().sum();
            assert!((row_sum - 1.0).abs() < 1e-9);
        }
    }
}

/// The whole pipeline is generic over the scalar type.
#[test]
fn pipeline_runs_in_f32() {
    let template = GenSpec::for_target(default_scene::<f32>(), 0, 0).unwrap();
    let corpus = generate_corpus(&template, &CorpusOptions::new(2, 9)).unwrap();
    let config = PredictorConfig::<f32>::default();
    let cpt = learn_cpt(&corpus, &config).unwrap();
    let mut predictor = Predictor::new(&cpt, corpus[0].scene.clone(), &config).unwrap();
    let mut last = 0usize;
    for obs in &corpus[0].frames {
        let out = predictor.step(obs).unwrap();
        assert!((out.belief.sum() - 1.0).abs() < 1e-5);
        last = out.predicted;
    }
    assert!(last < 3);
}
