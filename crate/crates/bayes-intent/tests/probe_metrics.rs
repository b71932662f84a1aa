//! Scratch probe for corpus metrics (temporary).

use bayes_intent::dataset::{default_scene, generate_corpus, CorpusOptions, GenSpec};
use bayes_intent::eval::{run_eval, BaselineKind, EvalMode};
use bayes_intent::inference::{learn_cpt, PredictorConfig};

#[test]
fn probe_final_defaults() {
    for seed in [2024u64, 7, 99, 31337, 555, 1234567, 42, 9090, 1, 2, 3, 808080] {
        let template = GenSpec::for_target(default_scene::<f64>(), 0, 0).unwrap();
        let corpus = generate_corpus(&template, &CorpusOptions::new(10, seed)).unwrap();
        let train: Vec<_> = corpus[..20].to_vec();
        let eval: Vec<_> = corpus[20..].to_vec();
        let config = PredictorConfig::default();
        let cpt = learn_cpt(&train, &config).unwrap();
        let mut f1 = [0.0f64; 4];
        let mut acc = 0.0;
        for (i, kind) in BaselineKind::ALL.iter().enumerate() {
            let (_, m) = run_eval(&cpt, &eval, *kind, &config, EvalMode::FrameLevel).unwrap();
            f1[i] = m.weighted_f1;
            if *kind == BaselineKind::FullBI {
                acc = m.weighted_accuracy;
            }
        }
        println!(
            "seed {seed:8}: gaps head {:+.3} hand {:+.3} motion {:+.3}  acc {:.3}",
            f1[3] - f1[0],
            f1[3] - f1[1],
            f1[3] - f1[2],
            acc
        );
    }
}
