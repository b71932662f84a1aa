//! Continuous evidence assembly and its discretization into the network's
//! parent-node assignment.
//!
//! Each frame yields one head angle per object, one motion angle per
//! object (absent below the minimum speed), and a single hand angle.
//! Discretization maps those onto three parent nodes: the object each
//! directional modality singles out (argmin), and the hand state. The
//! joint assignment indexes the conditional probability table, so the
//! discrete evidence space has `n * (n + 1) * 3` combinations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hand_orientation_angle, head_angles, motion_angles, Observation, Scene, Vec3};
use crate::scalar::{cast, Scalar};

/// Hand orientation state derived from the palm-normal angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HandState {
    /// Palm roughly horizontal: top-down grasp.
    Flexion,
    /// Palm tilted past the flexion threshold: side grasp.
    Neutral,
    /// Neither flexion nor neutral.
    Other,
}

impl HandState {
    pub const ALL: [HandState; 3] = [HandState::Flexion, HandState::Neutral, HandState::Other];

    pub fn index(self) -> usize {
        match self {
            HandState::Flexion => 0,
            HandState::Neutral => 1,
            HandState::Other => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<HandState> {
        HandState::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HandState::Flexion => "flexion",
            HandState::Neutral => "neutral",
            HandState::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<HandState> {
        match s {
            "flexion" => Some(HandState::Flexion),
            "neutral" => Some(HandState::Neutral),
            "other" => Some(HandState::Other),
            _ => None,
        }
    }
}

/// Continuous per-frame evidence: one head angle per object, optional
/// motion angles, and the hand angle.
#[derive(Debug, Clone, PartialEq)]
pub struct EvidenceVector<S> {
    pub theta: Vec<S>,
    /// Absent when the smoothed hand speed is below the minimum.
    pub beta: Option<Vec<S>>,
    pub gamma: S,
}

/// Discrete parent-node assignment: the target each modality singles out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteEvidence {
    pub head_target: usize,
    /// `None` when the hand is too slow for a meaningful direction.
    pub motion_target: Option<usize>,
    pub hand_state: HandState,
}

/// Classifies the hand angle against the flexion and neutral thresholds.
pub fn classify_hand<S: Scalar>(gamma: S, gamma_h: S, gamma_v: S) -> Result<HandState> {
    if !(gamma_h < gamma_v) || gamma_h < S::zero() || gamma_v > S::PI() {
        return Err(Error::InvalidThresholds {
            gamma_h: gamma_h.to_f64().unwrap_or(f64::NAN),
            gamma_v: gamma_v.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(if gamma < gamma_h {
        HandState::Flexion
    } else if gamma < gamma_v {
        HandState::Neutral
    } else {
        HandState::Other
    })
}

fn argmin<S: Scalar>(values: &[S]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Maps continuous evidence onto the discrete parent-node assignment.
/// Ties in the argmin go to the lowest object index.
pub fn discretize<S: Scalar>(
    ev: &EvidenceVector<S>,
    gamma_h: S,
    gamma_v: S,
) -> Result<DiscreteEvidence> {
    if ev.theta.is_empty() {
        return Err(Error::EmptyScene);
    }
    if let Some(beta) = &ev.beta {
        if beta.len() != ev.theta.len() {
            return Err(Error::InvalidConfig(format!(
                "evidence arity mismatch: {} head angles vs {} motion angles",
                ev.theta.len(),
                beta.len()
            )));
        }
    }
    Ok(DiscreteEvidence {
        head_target: argmin(&ev.theta),
        motion_target: ev.beta.as_ref().map(|b| argmin(b)),
        hand_state: classify_hand(ev.gamma, gamma_h, gamma_v)?,
    })
}

/// Thresholds and smoothing for the feature-extraction chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig<S> {
    /// Flexion threshold on the hand angle, radians.
    pub gamma_h: S,
    /// Neutral threshold on the hand angle, radians.
    pub gamma_v: S,
    /// Minimum smoothed speed (m/s) for motion evidence to be present.
    pub v_min: S,
    /// Exponential-moving-average factor on velocity; 1 keeps the raw
    /// two-frame estimate.
    pub alpha_v: S,
}

impl<S: Scalar> Default for FeatureConfig<S> {
    fn default() -> Self {
        FeatureConfig {
            gamma_h: cast::<S>(30.0).to_radians(),
            gamma_v: cast::<S>(60.0).to_radians(),
            v_min: cast(0.02),
            alpha_v: cast(0.5),
        }
    }
}

impl<S: Scalar> FeatureConfig<S> {
    pub fn validate(&self) -> Result<()> {
        classify_hand(S::zero(), self.gamma_h, self.gamma_v)?;
        if !(self.v_min > S::zero()) || !self.v_min.is_finite() {
            return Err(Error::InvalidConfig("v_min must be positive".into()));
        }
        if !(self.alpha_v > S::zero() && self.alpha_v <= S::one()) {
            return Err(Error::InvalidConfig("alpha_v must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Stateful extractor running geometry and discretization per frame.
///
/// Holds the previous observation and the velocity moving average, so the
/// same chain serves both table learning and online prediction.
#[derive(Debug, Clone)]
pub struct FeatureExtractor<S> {
    config: FeatureConfig<S>,
    prev: Option<(S, Vec3<S>)>,
    v_ema: Option<Vec3<S>>,
}

impl<S: Scalar> FeatureExtractor<S> {
    pub fn new(config: FeatureConfig<S>) -> Self {
        FeatureExtractor {
            config,
            prev: None,
            v_ema: None,
        }
    }

    pub fn config(&self) -> &FeatureConfig<S> {
        &self.config
    }

    /// Drops velocity state, e.g. between trajectories.
    pub fn reset(&mut self) {
        self.prev = None;
        self.v_ema = None;
    }

    /// Current smoothed velocity, if at least two frames have been seen.
    pub fn velocity(&self) -> Option<Vec3<S>> {
        self.v_ema
    }

    /// Extracts the continuous evidence for one frame and advances the
    /// velocity state. The first frame yields no motion evidence.
    pub fn extract(&mut self, obs: &Observation<S>, scene: &Scene<S>) -> Result<EvidenceVector<S>> {
        let theta = head_angles(obs, scene)?;
        let gamma = hand_orientation_angle(obs)?;

        if let Some((prev_t, prev_wrist)) = self.prev {
            let dt = obs.t - prev_t;
            if dt <= S::zero() {
                return Err(Error::NonMonotoneTime {
                    prev: prev_t.to_f64().unwrap_or(f64::NAN),
                    cur: obs.t.to_f64().unwrap_or(f64::NAN),
                });
            }
            let raw = (obs.wrist - prev_wrist).scale(S::one() / dt);
            let a = self.config.alpha_v;
            let smoothed = match self.v_ema {
                Some(prev_v) => raw.scale(a) + prev_v.scale(S::one() - a),
                None => raw,
            };
            self.v_ema = Some(smoothed);
        }
        self.prev = Some((obs.t, obs.wrist));

        let beta = match self.v_ema {
            Some(v) if v.norm() >= self.config.v_min => Some(motion_angles(v, obs.wrist, scene)?),
            _ => None,
        };

        Ok(EvidenceVector { theta, beta, gamma })
    }

    /// [`extract`](Self::extract) followed by [`discretize`].
    pub fn extract_discrete(
        &mut self,
        obs: &Observation<S>,
        scene: &Scene<S>,
    ) -> Result<DiscreteEvidence> {
        let ev = self.extract(obs, scene)?;
        discretize(&ev, self.config.gamma_h, self.config.gamma_v)
    }
}

/// Which modality subset a predictor consumes. The single-modality
/// variants are the ablation baselines; `FullBI` is the fused model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    HeadOnly,
    HandOrientationOnly,
    HandVelocityOnly,
    FullBI,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 4] = [
        BaselineKind::HeadOnly,
        BaselineKind::HandOrientationOnly,
        BaselineKind::HandVelocityOnly,
        BaselineKind::FullBI,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BaselineKind::HeadOnly => "head",
            BaselineKind::HandOrientationOnly => "hand",
            BaselineKind::HandVelocityOnly => "motion",
            BaselineKind::FullBI => "full",
        }
    }

    pub fn parse(s: &str) -> Option<BaselineKind> {
        match s {
            "head" => Some(BaselineKind::HeadOnly),
            "hand" => Some(BaselineKind::HandOrientationOnly),
            "motion" => Some(BaselineKind::HandVelocityOnly),
            "full" => Some(BaselineKind::FullBI),
            _ => None,
        }
    }

    /// Size of this modality subset's discrete evidence space for `n`
    /// objects: `n`, `3`, `n + 1`, or the full `n * (n + 1) * 3`.
    pub fn combo_count(self, n: usize) -> usize {
        match self {
            BaselineKind::HeadOnly => n,
            BaselineKind::HandOrientationOnly => 3,
            BaselineKind::HandVelocityOnly => n + 1,
            BaselineKind::FullBI => n * (n + 1) * 3,
        }
    }

    /// Flat index of an evidence assignment within this subset's space.
    pub fn combo_index(self, e: &DiscreteEvidence, n: usize) -> usize {
        let motion_idx = match e.motion_target {
            None => 0,
            Some(i) => i + 1,
        };
        match self {
            BaselineKind::HeadOnly => e.head_target,
            BaselineKind::HandOrientationOnly => e.hand_state.index(),
            BaselineKind::HandVelocityOnly => motion_idx,
            BaselineKind::FullBI => (e.head_target * (n + 1) + motion_idx) * 3 + e.hand_state.index(),
        }
    }

    /// Enumerates the evidence assignments of this subset's space in flat
    /// index order. Fields a modality does not observe are `None`.
    pub fn combos(self, n: usize) -> Vec<ComboFields> {
        let mut out = Vec::with_capacity(self.combo_count(n));
        match self {
            BaselineKind::HeadOnly => {
                for head in 0..n {
                    out.push(ComboFields {
                        head: Some(head),
                        motion: None,
                        hand: None,
                    });
                }
            }
            BaselineKind::HandOrientationOnly => {
                for hand in HandState::ALL {
                    out.push(ComboFields {
                        head: None,
                        motion: None,
                        hand: Some(hand),
                    });
                }
            }
            BaselineKind::HandVelocityOnly => {
                for m in 0..=n {
                    out.push(ComboFields {
                        head: None,
                        motion: Some(if m == 0 { None } else { Some(m - 1) }),
                        hand: None,
                    });
                }
            }
            BaselineKind::FullBI => {
                for head in 0..n {
                    for m in 0..=n {
                        for hand in HandState::ALL {
                            out.push(ComboFields {
                                head: Some(head),
                                motion: Some(if m == 0 { None } else { Some(m - 1) }),
                                hand: Some(hand),
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One evidence assignment spelled out per node; used by the table
/// serializer. Outer `None` means the node is not part of the modality
/// subset; inner `None` on motion is the below-speed value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComboFields {
    pub head: Option<usize>,
    pub motion: Option<Option<usize>>,
    pub hand: Option<HandState>,
}

/// Evidence as seen through one modality subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectedEvidence {
    Full(DiscreteEvidence),
    Head(usize),
    Hand(HandState),
    Motion(Option<usize>),
}

/// Projects full evidence onto a modality subset.
pub fn restrict_modality(e: &DiscreteEvidence, kind: BaselineKind) -> ProjectedEvidence {
    match kind {
        BaselineKind::FullBI => ProjectedEvidence::Full(*e),
        BaselineKind::HeadOnly => ProjectedEvidence::Head(e.head_target),
        BaselineKind::HandOrientationOnly => ProjectedEvidence::Hand(e.hand_state),
        BaselineKind::HandVelocityOnly => ProjectedEvidence::Motion(e.motion_target),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(d: f64) -> f64 {
        d.to_radians()
    }

    #[test]
    fn classify_hand_default_bands() {
        let (h, v) = (deg(30.0), deg(60.0));
        assert_eq!(classify_hand(deg(20.0), h, v).unwrap(), HandState::Flexion);
        assert_eq!(classify_hand(deg(45.0), h, v).unwrap(), HandState::Neutral);
        assert_eq!(classify_hand(deg(80.0), h, v).unwrap(), HandState::Other);
    }

    #[test]
    fn classify_hand_boundaries_are_half_open() {
        let (h, v) = (deg(30.0), deg(60.0));
        assert_eq!(classify_hand(h, h, v).unwrap(), HandState::Neutral);
        assert_eq!(classify_hand(v, h, v).unwrap(), HandState::Other);
    }

    #[test]
    fn classify_hand_rejects_inverted_thresholds() {
        assert!(matches!(
            classify_hand(0.5, deg(60.0), deg(30.0)),
            Err(Error::InvalidThresholds { .. })
        ));
    }

    #[test]
    fn discretize_argmin_and_absent_motion() {
        let ev = EvidenceVector {
            theta: vec![0.2, 0.8, 1.0],
            beta: None,
            gamma: 0.1,
        };
        let d = discretize(&ev, deg(30.0), deg(60.0)).unwrap();
        assert_eq!(d.head_target, 0);
        assert_eq!(d.motion_target, None);
        assert_eq!(d.hand_state, HandState::Flexion);
    }

    #[test]
    fn discretize_tie_breaks_to_lowest_index() {
        let ev = EvidenceVector {
            theta: vec![0.5, 0.5],
            beta: Some(vec![1.2, 0.3]),
            gamma: 1.0,
        };
        let d = discretize(&ev, deg(30.0), deg(60.0)).unwrap();
        assert_eq!(d.head_target, 0);
        assert_eq!(d.motion_target, Some(1));
        assert_eq!(d.hand_state, HandState::Neutral);
    }

    #[test]
    fn discretize_single_object() {
        let ev = EvidenceVector {
            theta: vec![2.3],
            beta: Some(vec![1.7]),
            gamma: 0.0,
        };
        let d = discretize(&ev, deg(30.0), deg(60.0)).unwrap();
        assert_eq!(d.head_target, 0);
        assert_eq!(d.motion_target, Some(0));
    }

    #[test]
    fn discretize_invariant_under_monotone_transform() {
        let theta = vec![0.9, 0.3, 0.7, 0.31];
        let ev = EvidenceVector {
            theta: theta.clone(),
            beta: None,
            gamma: 0.1,
        };
        let transformed = EvidenceVector {
            theta: theta.iter().map(|t| t * t + 1.0).collect(),
            beta: None,
            gamma: 0.1,
        };
        let a = discretize(&ev, deg(30.0), deg(60.0)).unwrap();
        let b = discretize(&transformed, deg(30.0), deg(60.0)).unwrap();
        assert_eq!(a.head_target, b.head_target);
    }

    #[test]
    fn combo_indexing_is_a_bijection() {
        let n = 3;
        for kind in BaselineKind::ALL {
            let combos = kind.combos(n);
            assert_eq!(combos.len(), kind.combo_count(n));
            for (idx, c) in combos.iter().enumerate() {
                let e = DiscreteEvidence {
                    head_target: c.head.unwrap_or(0),
                    motion_target: c.motion.unwrap_or(None),
                    hand_state: c.hand.unwrap_or(HandState::Flexion),
                };
                assert_eq!(kind.combo_index(&e, n), idx);
            }
        }
    }

    #[test]
    fn full_space_size_matches_formula() {
        for n in 1..5 {
            assert_eq!(BaselineKind::FullBI.combo_count(n), n * (n + 1) * 3);
        }
    }

    #[test]
    fn restrict_modality_projects_single_nodes() {
        let e = DiscreteEvidence {
            head_target: 1,
            motion_target: Some(2),
            hand_state: HandState::Flexion,
        };
        assert_eq!(
            restrict_modality(&e, BaselineKind::HeadOnly),
            ProjectedEvidence::Head(1)
        );
        assert_eq!(
            restrict_modality(&e, BaselineKind::HandOrientationOnly),
            ProjectedEvidence::Hand(HandState::Flexion)
        );
        assert_eq!(
            restrict_modality(&e, BaselineKind::HandVelocityOnly),
            ProjectedEvidence::Motion(Some(2))
        );
        assert_eq!(
            restrict_modality(&e, BaselineKind::FullBI),
            ProjectedEvidence::Full(e)
        );
    }
}
