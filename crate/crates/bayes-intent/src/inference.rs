//! Conditional-probability-table learning and the online recursive filter.
//!
//! The table stores integer counts of (evidence combination, labeled
//! target) pairs plus the Laplace-smoothed likelihoods derived from them.
//! Counts are retained so tables can be retrained incrementally and so
//! serialization round-trips exactly. The filter multiplies the previous
//! posterior by the evidence likelihood and renormalizes each frame.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use crate::dataset::Trajectory;
use crate::error::{Error, Result};
use crate::evidence::{
    BaselineKind, DiscreteEvidence, FeatureConfig, FeatureExtractor, HandState,
};
use crate::geometry::{Observation, Scene};
use crate::scalar::{cast, Scalar};

/// Filter and policy knobs bundled with the feature thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorConfig<S> {
    pub features: FeatureConfig<S>,
    /// Laplace smoothing constant used when learning the table.
    pub alpha: S,
    /// Prior forgetting mix-in: each step the prior is
    /// `(1 - lambda) * posterior + lambda / n`. Zero keeps the pure
    /// posterior-as-prior recursion.
    pub lambda: S,
    /// Consecutive identical predictions required before committing.
    pub hysteresis_k: usize,
    /// Posterior mass required on the streak's target before committing.
    /// Values above 1 are unreachable and disable commits.
    pub commit_threshold: S,
}

impl<S: Scalar> Default for PredictorConfig<S> {
    fn default() -> Self {
        PredictorConfig {
            features: FeatureConfig::default(),
            alpha: S::one(),
            lambda: S::zero(),
            hysteresis_k: 5,
            commit_threshold: cast(0.7),
        }
    }
}

impl<S: Scalar> PredictorConfig<S> {
    pub fn validate(&self, n_objects: usize) -> Result<()> {
        self.features.validate()?;
        if !(self.alpha >= S::zero()) || !self.alpha.is_finite() {
            return Err(Error::InvalidConfig("alpha must be >= 0".into()));
        }
        if !(self.lambda >= S::zero() && self.lambda <= S::one()) {
            return Err(Error::InvalidConfig("lambda must be in [0, 1]".into()));
        }
        if self.hysteresis_k < 1 {
            return Err(Error::InvalidConfig("hysteresis_k must be >= 1".into()));
        }
        if n_objects > 0 {
            let floor = S::one() / cast(n_objects as f64);
            if !(self.commit_threshold > floor) {
                return Err(Error::InvalidConfig(format!(
                    "commit_threshold must exceed the uniform mass 1/{n_objects}"
                )));
            }
        }
        Ok(())
    }
}

/// Learned likelihood table: `P(evidence combination | target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt<S> {
    n_objects: usize,
    modality: BaselineKind,
    alpha: S,
    features: FeatureConfig<S>,
    /// Flat `[target * combo_count + combo]` observation counts.
    counts: Vec<u64>,
    /// Same layout; rows (fixed target) sum to 1 after smoothing.
    likelihood: Vec<S>,
}

impl<S: Scalar> Cpt<S> {
    /// An empty table; use [`ingest`](Self::ingest) or [`learn_cpt`] to
    /// fill it.
    pub fn empty(
        n_objects: usize,
        modality: BaselineKind,
        alpha: S,
        features: FeatureConfig<S>,
    ) -> Result<Self> {
        if n_objects == 0 {
            return Err(Error::EmptyScene);
        }
        if !(alpha >= S::zero()) || !alpha.is_finite() {
            return Err(Error::InvalidConfig("alpha must be >= 0".into()));
        }
        let cells = n_objects * modality.combo_count(n_objects);
        let mut cpt = Cpt {
            n_objects,
            modality,
            alpha,
            features,
            counts: vec![0; cells],
            likelihood: vec![S::zero(); cells],
        };
        cpt.recompute_likelihood();
        Ok(cpt)
    }

    /// Builds a table directly from likelihood rows (`rows[target][combo]`).
    ///
    /// Entries must be non-negative and finite. Rows are not forced to sum
    /// to one: the filter normalizes the posterior, so only the relative
    /// values within an evidence column matter.
    pub fn from_likelihood(
        n_objects: usize,
        modality: BaselineKind,
        features: FeatureConfig<S>,
        rows: Vec<Vec<S>>,
    ) -> Result<Self> {
        if n_objects == 0 {
            return Err(Error::EmptyScene);
        }
        if rows.len() != n_objects {
            return Err(Error::InvalidConfig(format!(
                "expected {} likelihood rows, got {}",
                n_objects,
                rows.len()
            )));
        }
        let combos = modality.combo_count(n_objects);
        let mut likelihood = Vec::with_capacity(n_objects * combos);
        for row in &rows {
            if row.len() != combos {
                return Err(Error::InvalidConfig(format!(
                    "expected {combos} combinations per row, got {}",
                    row.len()
                )));
            }
            for &p in row {
                if !(p >= S::zero()) || !p.is_finite() {
                    return Err(Error::InvalidConfig(
                        "likelihood entries must be non-negative and finite".into(),
                    ));
                }
                likelihood.push(p);
            }
        }
        Ok(Cpt {
            n_objects,
            modality,
            alpha: S::zero(),
            features,
            counts: vec![0; n_objects * combos],
            likelihood,
        })
    }

    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    pub fn modality(&self) -> BaselineKind {
        self.modality
    }

    pub fn alpha(&self) -> S {
        self.alpha
    }

    pub fn features(&self) -> &FeatureConfig<S> {
        &self.features
    }

    pub fn combo_count(&self) -> usize {
        self.modality.combo_count(self.n_objects)
    }

    fn cell(&self, target: usize, combo: usize) -> usize {
        target * self.combo_count() + combo
    }

    pub fn count_at(&self, target: usize, combo: usize) -> u64 {
        self.counts[self.cell(target, combo)]
    }

    pub fn likelihood_at(&self, target: usize, combo: usize) -> S {
        self.likelihood[self.cell(target, combo)]
    }

    /// Likelihood of an evidence assignment under the given target,
    /// projecting onto this table's modality subset.
    pub fn likelihood_for(&self, e: &DiscreteEvidence, target: usize) -> S {
        self.likelihood_at(target, self.modality.combo_index(e, self.n_objects))
    }

    /// Smoothed likelihood row for one target, indexed by combination.
    pub fn target_row(&self, target: usize) -> &[S] {
        let c = self.combo_count();
        &self.likelihood[target * c..(target + 1) * c]
    }

    /// Total observed frames per target.
    pub fn target_totals(&self) -> Vec<u64> {
        (0..self.n_objects)
            .map(|t| (0..self.combo_count()).map(|c| self.count_at(t, c)).sum())
            .collect()
    }

    /// Fraction of evidence combinations seen at least once.
    pub fn coverage(&self) -> f64 {
        let seen = self.counts.iter().filter(|&&c| c > 0).count();
        seen as f64 / self.counts.len() as f64
    }

    /// Adds labeled evidence observations and refreshes the likelihoods.
    pub fn ingest<I>(&mut self, pairs: I) -> Result<()>
    where
        I: IntoIterator<Item = (DiscreteEvidence, usize)>,
    {
        for (e, target) in pairs {
            if target >= self.n_objects {
                return Err(Error::InvalidConfig(format!(
                    "label {target} out of range for {} objects",
                    self.n_objects
                )));
            }
            let combo = self.modality.combo_index(&e, self.n_objects);
            let cell = self.cell(target, combo);
            self.counts[cell] += 1;
        }
        self.recompute_likelihood();
        Ok(())
    }

    /// `(count + alpha) / (total + alpha * combos)` per cell. A target
    /// with no data and no smoothing falls back to a uniform row.
    fn recompute_likelihood(&mut self) {
        let combos = self.combo_count();
        let combos_s: S = cast(combos as f64);
        for target in 0..self.n_objects {
            let total: u64 = (0..combos).map(|c| self.count_at(target, c)).sum();
            let denom = S::from_u64(total).expect("count fits scalar") + self.alpha * combos_s;
            for combo in 0..combos {
                let cell = self.cell(target, combo);
                self.likelihood[cell] = if denom > S::zero() {
                    (S::from_u64(self.counts[cell]).expect("count fits scalar") + self.alpha)
                        / denom
                } else {
                    S::one() / combos_s
                };
            }
        }
    }

    /// Marginalizes the full table's counts onto a modality subset.
    ///
    /// Because counts are integers, this equals learning the subset's
    /// table directly from the projected evidence stream.
    pub fn restrict(&self, kind: BaselineKind) -> Result<Cpt<S>> {
        if kind == self.modality {
            return Ok(self.clone());
        }
        if self.modality != BaselineKind::FullBI {
            return Err(Error::InvalidConfig(format!(
                "cannot restrict a {} table to {}",
                self.modality.as_str(),
                kind.as_str()
            )));
        }
        let n = self.n_objects;
        let mut out = Cpt::empty(n, kind, self.alpha, self.features)?;
        for (full_idx, fields) in self.modality.combos(n).iter().enumerate() {
            let e = DiscreteEvidence {
                head_target: fields.head.unwrap_or(0),
                motion_target: fields.motion.unwrap_or(None),
                hand_state: fields.hand.unwrap_or(HandState::Flexion),
            };
            let sub_idx = kind.combo_index(&e, n);
            let sub_combos = out.combo_count();
            for target in 0..n {
                let c = self.counts[target * self.combo_count() + full_idx];
                out.counts[target * sub_combos + sub_idx] += c;
            }
        }
        out.recompute_likelihood();
        Ok(out)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file =
            File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = BufWriter::new(file);
        self.write_text(&mut w)
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Cpt::read_text(BufReader::new(file))
    }

    /// Writes the self-describing text form: a key-value header followed
    /// by one record per (evidence combination, target).
    pub fn write_text<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "bayes-intent-cpt v1")?;
        writeln!(w, "n_objects {}", self.n_objects)?;
        writeln!(w, "modality {}", self.modality.as_str())?;
        writeln!(w, "alpha {:?}", self.alpha)?;
        writeln!(w, "gamma_h {:?}", self.features.gamma_h)?;
        writeln!(w, "gamma_v {:?}", self.features.gamma_v)?;
        writeln!(w, "v_min {:?}", self.features.v_min)?;
        writeln!(w, "alpha_v {:?}", self.features.alpha_v)?;
        writeln!(w, "records {}", self.counts.len())?;
        writeln!(w, "# head motion hand target count p")?;
        for (combo, fields) in self.modality.combos(self.n_objects).iter().enumerate() {
            let head = fields
                .head
                .map(|h| h.to_string())
                .unwrap_or_else(|| "-".into());
            let motion = match fields.motion {
                None => "-".to_string(),
                Some(None) => "none".to_string(),
                Some(Some(i)) => i.to_string(),
            };
            let hand = fields
                .hand
                .map(|h| h.as_str().to_string())
                .unwrap_or_else(|| "-".into());
            for target in 0..self.n_objects {
                writeln!(
                    w,
                    "{head} {motion} {hand} {target} {} {:?}",
                    self.count_at(target, combo),
                    self.likelihood_at(target, combo),
                )?;
            }
        }
        Ok(())
    }

    /// Parses the text form. Counts round-trip bit-exactly; likelihoods
    /// are recomputed from the counts and verified against the stored
    /// values.
    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next_line = || -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(line))) => Ok((i + 1, line)),
                Some((i, Err(e))) => Err(Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    msg: "unexpected end of file".into(),
                }),
            }
        };

        let (line_no, magic) = next_line()?;
        if magic.trim() != "bayes-intent-cpt v1" {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("bad magic line: {magic:?}"),
            });
        }

        let mut n_objects: Option<usize> = None;
        let mut modality: Option<BaselineKind> = None;
        let mut alpha: Option<S> = None;
        let mut gamma_h: Option<S> = None;
        let mut gamma_v: Option<S> = None;
        let mut v_min: Option<S> = None;
        let mut alpha_v: Option<S> = None;
        let records;

        fn parse_scalar<S: Scalar>(line: usize, v: &str) -> Result<S> {
            v.parse::<S>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad scalar {v:?}"),
            })
        }

        loop {
            let (line_no, line) = next_line()?;
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let value = parts.next().unwrap_or_default();
            match key {
                "n_objects" => {
                    n_objects = Some(value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad n_objects {value:?}"),
                    })?)
                }
                "modality" => {
                    modality = Some(BaselineKind::parse(value).ok_or_else(|| Error::Parse {
                        line: line_no,
                        msg: format!("unknown modality {value:?}"),
                    })?)
                }
                "alpha" => alpha = Some(parse_scalar(line_no, value)?),
                "gamma_h" => gamma_h = Some(parse_scalar(line_no, value)?),
                "gamma_v" => gamma_v = Some(parse_scalar(line_no, value)?),
                "v_min" => v_min = Some(parse_scalar(line_no, value)?),
                "alpha_v" => alpha_v = Some(parse_scalar(line_no, value)?),
                "records" => {
                    records = value.parse::<usize>().map_err(|_| Error::Parse {
                        line: line_no,
                        msg: format!("bad record count {value:?}"),
                    })?;
                    break;
                }
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown header key {other:?}"),
                    })
                }
            }
        }

        let missing = |what: &str| Error::Parse {
            line: 0,
            msg: format!("missing header key {what}"),
        };
        let n = n_objects.ok_or_else(|| missing("n_objects"))?;
        let modality = modality.ok_or_else(|| missing("modality"))?;
        let features = FeatureConfig {
            gamma_h: gamma_h.ok_or_else(|| missing("gamma_h"))?,
            gamma_v: gamma_v.ok_or_else(|| missing("gamma_v"))?,
            v_min: v_min.ok_or_else(|| missing("v_min"))?,
            alpha_v: alpha_v.ok_or_else(|| missing("alpha_v"))?,
        };
        let mut cpt = Cpt::empty(n, modality, alpha.ok_or_else(|| missing("alpha"))?, features)?;
        if records != cpt.counts.len() {
            return Err(Error::Parse {
                line: 0,
                msg: format!(
                    "record count {records} does not match {} x {} table",
                    n,
                    cpt.combo_count()
                ),
            });
        }

        let mut stored_p = vec![S::zero(); cpt.counts.len()];
        let mut seen = 0usize;
        while seen < records {
            let (line_no, line) = next_line()?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if fields.len() != 6 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 6 fields, got {}", fields.len()),
                });
            }
            let head = match fields[0] {
                "-" => None,
                v => Some(v.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad head field {v:?}"),
                })?),
            };
            let motion = match fields[1] {
                "-" => None,
                "none" => Some(None),
                v => Some(Some(v.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("bad motion field {v:?}"),
                })?)),
            };
            let hand = match fields[2] {
                "-" => None,
                v => Some(HandState::parse(v).ok_or_else(|| Error::Parse {
                    line: line_no,
                    msg: format!("bad hand field {v:?}"),
                })?),
            };
            let target: usize = fields[3].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad target field {:?}", fields[3]),
            })?;
            let count: u64 = fields[4].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("bad count field {:?}", fields[4]),
            })?;
            let p: S = parse_scalar(line_no, fields[5])?;

            if target >= n {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("target {target} out of range"),
                });
            }
            let e = DiscreteEvidence {
                head_target: head.unwrap_or(0),
                motion_target: motion.unwrap_or(None),
                hand_state: hand.unwrap_or(HandState::Flexion),
            };
            let combo = modality.combo_index(&e, n);
            let cell = target * cpt.combo_count() + combo;
            cpt.counts[cell] = count;
            stored_p[cell] = p;
            seen += 1;
        }

        cpt.recompute_likelihood();
        for (cell, &p) in stored_p.iter().enumerate() {
            let diff = (cpt.likelihood[cell] - p).abs();
            if diff > cast(1e-12) {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!(
                        "stored probability disagrees with counts at cell {cell} (diff {diff:?})"
                    ),
                });
            }
        }
        Ok(cpt)
    }
}

/// Learns the full-modality table from labeled trajectories.
///
/// Each frame contributes one (evidence combination, label) count; the
/// velocity state resets between trajectories.
pub fn learn_cpt<S: Scalar>(
    trajectories: &[Trajectory<S>],
    config: &PredictorConfig<S>,
) -> Result<Cpt<S>> {
    let first = trajectories.first().ok_or(Error::EmptyDataset)?;
    let n = first.scene.len();
    config.validate(n)?;
    let mut cpt = Cpt::empty(n, BaselineKind::FullBI, config.alpha, config.features)?;
    let mut pairs = Vec::new();
    for traj in trajectories {
        if traj.scene.len() != n {
            return Err(Error::InconsistentSceneSize {
                expected: n,
                got: traj.scene.len(),
            });
        }
        if traj.label >= n {
            return Err(Error::InvalidConfig(format!(
                "trajectory label {} out of range for {n} objects",
                traj.label
            )));
        }
        let mut extractor = FeatureExtractor::new(config.features);
        for obs in &traj.frames {
            let e = extractor.extract_discrete(obs, &traj.scene)?;
            pairs.push((e, traj.label));
        }
    }
    cpt.ingest(pairs)?;
    Ok(cpt)
}

/// Posterior over candidate targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief<S> {
    pub probs: Vec<S>,
    /// Number of updates applied.
    pub t: u64,
}

impl<S: Scalar> Belief<S> {
    pub fn sum(&self) -> S {
        self.probs.iter().fold(S::zero(), |acc, &p| acc + p)
    }
}

/// Uniform initial belief over `n` targets.
pub fn init_belief<S: Scalar>(n: usize) -> Result<Belief<S>> {
    if n == 0 {
        return Err(Error::EmptyScene);
    }
    let p = S::one() / cast(n as f64);
    Ok(Belief {
        probs: vec![p; n],
        t: 0,
    })
}

/// One Bayes step: mixes the prior toward uniform by `lambda`, multiplies
/// by the evidence likelihood, and renormalizes.
///
/// With `lambda = 0` this is the plain posterior-as-prior recursion. An
/// absent motion target is a real likelihood column, not a skipped
/// update.
pub fn update<S: Scalar>(
    belief: &Belief<S>,
    e: &DiscreteEvidence,
    cpt: &Cpt<S>,
    lambda: S,
) -> Result<Belief<S>> {
    let n = belief.probs.len();
    if n != cpt.n_objects() {
        return Err(Error::CptMismatch {
            cpt: cpt.n_objects(),
            scene: n,
        });
    }
    let uniform = S::one() / cast(n as f64);
    let mut probs = Vec::with_capacity(n);
    let mut total = S::zero();
    for (i, &prev) in belief.probs.iter().enumerate() {
        let prior = (S::one() - lambda) * prev + lambda * uniform;
        let p = cpt.likelihood_for(e, i) * prior;
        total = total + p;
        probs.push(p);
    }
    if !(total > S::zero()) || !total.is_finite() {
        return Err(Error::ZeroEvidence);
    }
    for p in &mut probs {
        *p = *p / total;
    }
    Ok(Belief {
        probs,
        t: belief.t + 1,
    })
}

/// Most probable target; ties go to the lowest index.
pub fn predict<S: Scalar>(belief: &Belief<S>) -> usize {
    let mut best = 0;
    for (i, &p) in belief.probs.iter().enumerate().skip(1) {
        if p > belief.probs[best] {
            best = i;
        }
    }
    best
}

/// Output of one predictor step.
#[derive(Debug, Clone)]
pub struct StepOutput<S> {
    pub belief: Belief<S>,
    pub predicted: usize,
    pub evidence: DiscreteEvidence,
    /// Wall-clock seconds for the full extract-update-predict chain.
    pub latency_s: f64,
}

/// Online predictor: feature extraction plus the recursive filter over
/// one observation stream.
///
/// Evidence thresholds travel with the table (they were fixed at training
/// time); the config supplies the filter knobs.
#[derive(Debug, Clone)]
pub struct Predictor<'a, S: Scalar> {
    cpt: &'a Cpt<S>,
    scene: Scene<S>,
    lambda: S,
    extractor: FeatureExtractor<S>,
    belief: Belief<S>,
}

impl<'a, S: Scalar> Predictor<'a, S> {
    pub fn new(cpt: &'a Cpt<S>, scene: Scene<S>, config: &PredictorConfig<S>) -> Result<Self> {
        scene.validate()?;
        if scene.len() != cpt.n_objects() {
            return Err(Error::CptMismatch {
                cpt: cpt.n_objects(),
                scene: scene.len(),
            });
        }
        config.validate(scene.len())?;
        let belief = init_belief(scene.len())?;
        Ok(Predictor {
            cpt,
            scene,
            lambda: config.lambda,
            extractor: FeatureExtractor::new(*cpt.features()),
            belief,
        })
    }

    pub fn belief(&self) -> &Belief<S> {
        &self.belief
    }

    pub fn scene(&self) -> &Scene<S> {
        &self.scene
    }

    /// Returns the belief to uniform, e.g. after a commit is consumed.
    /// Velocity state is kept: the hand does not teleport.
    pub fn reset_belief(&mut self) {
        self.belief = init_belief(self.scene.len()).expect("scene validated non-empty");
    }

    /// Full reset for a new trajectory.
    pub fn reset(&mut self) {
        self.reset_belief();
        self.extractor.reset();
    }

    /// Runs geometry, discretization, the Bayes update, and the argmax
    /// for one frame, timing the whole chain.
    pub fn step(&mut self, obs: &Observation<S>) -> Result<StepOutput<S>> {
        let started = Instant::now();
        let evidence = self.extractor.extract_discrete(obs, &self.scene)?;
        self.belief = update(&self.belief, &evidence, self.cpt, self.lambda)?;
        let predicted = predict(&self.belief);
        let latency_s = started.elapsed().as_secs_f64();
        Ok(StepOutput {
            belief: self.belief.clone(),
            predicted,
            evidence,
            latency_s,
        })
    }
}
