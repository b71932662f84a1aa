//! Trajectory files and the synthetic reach generator.
//!
//! A trajectory file is line-delimited JSON: a header record naming the
//! scene, label, and capture metadata, then one frame record per line.
//! Floats serialize as the shortest decimal that round-trips exactly. A
//! corpus is a directory of trajectory files plus a manifest carrying the
//! train/eval split.
//!
//! The generator reaches with a minimum-jerk wrist profile, sweeps the
//! head onto the target after an onset delay, and synthesizes hand
//! keypoints matching a scheduled palm angle. Optional curved and
//! inattentive variants reproduce the confusion modes seen in real
//! reaches. Everything is deterministic given the seed.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{slerp, Affordance, Observation, Scene, SceneObject, Vec3};
use crate::scalar::{cast, Scalar};

pub const SCHEMA_VERSION: u32 = 1;

/// Distance between index-base / pinky-base and the wrist, meters.
const HAND_SPAN: f64 = 0.09;

/// How the trajectory was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Recorded,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta<S> {
    pub fps: S,
    pub subject: String,
    pub source: Source,
    pub seed: Option<u64>,
}

/// A labeled observation stream over a fixed scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub scene: Scene<S>,
    pub frames: Vec<Observation<S>>,
    /// Ground-truth target object index.
    pub label: usize,
    pub meta: TrajectoryMeta<S>,
}

impl<S: Scalar> Trajectory<S> {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        if self.label >= self.scene.len() {
            return Err(Error::InvalidConfig(format!(
                "label {} out of range for {} objects",
                self.label,
                self.scene.len()
            )));
        }
        if self.frames.len() < 2 {
            return Err(Error::InvalidConfig(
                "a trajectory needs at least 2 frames".into(),
            ));
        }
        let nominal_dt = S::one() / self.meta.fps;
        let tolerance = nominal_dt * cast(0.1);
        for (i, pair) in self.frames.windows(2).enumerate() {
            let dt = pair[1].t - pair[0].t;
            if dt <= S::zero() {
                return Err(Error::SchemaViolation {
                    line: i + 3,
                    msg: "timestamps must be strictly increasing".into(),
                });
            }
            if (dt - nominal_dt).abs() > tolerance {
                return Err(Error::SchemaViolation {
                    line: i + 3,
                    msg: format!("frame spacing {dt} inconsistent with fps {}", self.meta.fps),
                });
            }
        }
        for (i, obs) in self.frames.iter().enumerate() {
            obs.validate().map_err(|e| Error::SchemaViolation {
                line: i + 2,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn duration(&self) -> S {
        match (self.frames.first(), self.frames.last()) {
            (Some(first), Some(last)) => last.t - first.t,
            _ => S::zero(),
        }
    }
}

/// First line of a trajectory file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryHeader<S> {
    pub schema_version: u32,
    pub scene: Scene<S>,
    /// Absent in pure prediction streams.
    pub label: Option<usize>,
    pub fps: S,
    pub source: Source,
    pub seed: Option<u64>,
    pub subject: String,
}

pub fn parse_header_line<S: Scalar + DeserializeOwned>(
    line: &str,
    line_no: usize,
) -> Result<TrajectoryHeader<S>> {
    let header: TrajectoryHeader<S> = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        msg: e.to_string(),
    })?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaViolation {
            line: line_no,
            msg: format!("unsupported schema version {}", header.schema_version),
        });
    }
    header.scene.validate().map_err(|e| Error::SchemaViolation {
        line: line_no,
        msg: e.to_string(),
    })?;
    Ok(header)
}

pub fn parse_frame_line<S: Scalar + DeserializeOwned>(
    line: &str,
    line_no: usize,
) -> Result<Observation<S>> {
    let obs: Observation<S> = serde_json::from_str(line).map_err(|e| Error::Parse {
        line: line_no,
        msg: e.to_string(),
    })?;
    obs.validate().map_err(|e| Error::SchemaViolation {
        line: line_no,
        msg: e.to_string(),
    })?;
    Ok(obs)
}

pub fn write_trajectory<S, W>(traj: &Trajectory<S>, w: &mut W) -> Result<()>
where
    S: Scalar + Serialize,
    W: Write,
{
    traj.validate()?;
    let header = TrajectoryHeader {
        schema_version: SCHEMA_VERSION,
        scene: traj.scene.clone(),
        label: Some(traj.label),
        fps: traj.meta.fps,
        source: traj.meta.source,
        seed: traj.meta.seed,
        subject: traj.meta.subject.clone(),
    };
    let io_err = |e: serde_json::Error| Error::InvalidConfig(format!("serialization: {e}"));
    let mut emit = |line: String| -> Result<()> {
        writeln!(w, "{line}").map_err(|e| Error::io("<writer>", e))
    };
    emit(serde_json::to_string(&header).map_err(io_err)?)?;
    for obs in &traj.frames {
        emit(serde_json::to_string(obs).map_err(io_err)?)?;
    }
    Ok(())
}

pub fn read_trajectory<S, R>(r: R) -> Result<Trajectory<S>>
where
    S: Scalar + DeserializeOwned,
    R: BufRead,
{
    let mut header: Option<TrajectoryHeader<S>> = None;
    let mut frames = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        if header.is_none() {
            header = Some(parse_header_line(&line, line_no)?);
        } else {
            frames.push(parse_frame_line(&line, line_no)?);
        }
    }
    let header = header.ok_or(Error::Parse {
        line: 1,
        msg: "missing header record".into(),
    })?;
    let label = header.label.ok_or(Error::SchemaViolation {
        line: 1,
        msg: "trajectory file missing ground-truth label".into(),
    })?;
    let traj = Trajectory {
        scene: header.scene,
        frames,
        label,
        meta: TrajectoryMeta {
            fps: header.fps,
            subject: header.subject,
            source: header.source,
            seed: header.seed,
        },
    };
    traj.validate().map_err(|e| match e {
        Error::SchemaViolation { line, msg } => Error::SchemaViolation { line, msg },
        other => Error::SchemaViolation {
            line: 1,
            msg: other.to_string(),
        },
    })?;
    Ok(traj)
}

pub fn save_trajectory<S: Scalar + Serialize>(
    traj: &Trajectory<S>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    write_trajectory(traj, &mut w)
}

pub fn load_trajectory<S: Scalar + DeserializeOwned>(
    path: impl AsRef<Path>,
) -> Result<Trajectory<S>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    read_trajectory(BufReader::new(file))
}

/// Loads one trajectory file, or every trajectory listed in a corpus
/// directory's manifest.
pub fn load_trajectories<S: Scalar + DeserializeOwned>(
    path: impl AsRef<Path>,
) -> Result<Vec<Trajectory<S>>> {
    let path = path.as_ref();
    if path.is_dir() {
        Ok(load_corpus(path)?
            .into_iter()
            .map(|(traj, _)| traj)
            .collect())
    } else {
        Ok(vec![load_trajectory(path)?])
    }
}

// ---------------------------------------------------------------------------
// Corpus manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub file: String,
    pub label: usize,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes trajectories plus a manifest into `dir`. The first
/// `round(total * train_fraction)` trajectories (in corpus order) form
/// the train split.
pub fn save_corpus<S: Scalar + Serialize>(
    trajectories: &[Trajectory<S>],
    dir: impl AsRef<Path>,
    train_fraction: f64,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(Error::InvalidConfig(
            "train_fraction must be in [0, 1]".into(),
        ));
    }
    let train_count = (trajectories.len() as f64 * train_fraction).round() as usize;
    let mut entries = Vec::with_capacity(trajectories.len());
    for (i, traj) in trajectories.iter().enumerate() {
        let file = format!("traj_{i:03}_t{}.jsonl", traj.label);
        save_trajectory(traj, dir.join(&file))?;
        entries.push(ManifestEntry {
            file,
            label: traj.label,
            split: if i < train_count {
                Split::Train
            } else {
                Split::Eval
            },
        });
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        entries,
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::InvalidConfig(format!("serialization: {e}")))?;
    fs::write(&manifest_path, json + "\n")
        .map_err(|e| Error::io(manifest_path.display().to_string(), e))?;
    Ok(manifest)
}

pub fn load_manifest(dir: impl AsRef<Path>) -> Result<Manifest> {
    let path = dir.as_ref().join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })?;
    if manifest.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaViolation {
            line: 0,
            msg: format!("unsupported manifest version {}", manifest.schema_version),
        });
    }
    Ok(manifest)
}

/// Loads every manifest entry with its split, preserving corpus order.
pub fn load_corpus<S: Scalar + DeserializeOwned>(
    dir: impl AsRef<Path>,
) -> Result<Vec<(Trajectory<S>, Split)>> {
    let dir = dir.as_ref();
    let manifest = load_manifest(dir)?;
    let mut out = Vec::with_capacity(manifest.entries.len());
    for entry in &manifest.entries {
        let traj = load_trajectory(dir.join(&entry.file))?;
        if traj.label != entry.label {
            return Err(Error::SchemaViolation {
                line: 0,
                msg: format!(
                    "{}: label {} disagrees with manifest label {}",
                    entry.file, traj.label, entry.label
                ),
            });
        }
        out.push((traj, entry.split));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Synthetic generation
// ---------------------------------------------------------------------------

/// The tabletop scene used throughout: three objects 12 in apart, the
/// dual-affordance cereal box left, the banana center, the milk right.
pub fn default_scene<S: Scalar>() -> Scene<S> {
    let spacing = 0.3048;
    let y = 0.55;
    let z = 0.10;
    Scene {
        objects: vec![
            SceneObject {
                id: 0,
                name: "cereal".into(),
                position: Vec3::new(cast(-spacing), cast(y), cast(z)),
                affordance: Affordance::Both,
            },
            SceneObject {
                id: 1,
                name: "banana".into(),
                position: Vec3::new(S::zero(), cast(y), cast(z)),
                affordance: Affordance::TopGrasp,
            },
            SceneObject {
                id: 2,
                name: "milk".into(),
                position: Vec3::new(cast(spacing), cast(y), cast(z)),
                affordance: Affordance::SideGrasp,
            },
        ],
    }
}

/// Subject pose at the start of a reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StartPose<S> {
    pub nose: Vec3<S>,
    pub head_dir: Vec3<S>,
    pub wrist: Vec3<S>,
}

impl<S: Scalar> Default for StartPose<S> {
    fn default() -> Self {
        StartPose {
            nose: Vec3::new(S::zero(), cast(-0.25), cast(0.45)),
            head_dir: Vec3::new(S::zero(), cast(0.9), cast(-0.3))
                .normalized()
                .expect("non-zero"),
            wrist: Vec3::new(S::zero(), cast(-0.30), cast(0.12)),
        }
    }
}

/// Palm-angle schedule: linear ramp from `start_gamma` to `goal_gamma`
/// over the first `settle` fraction of the reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HandSchedule<S> {
    pub start_gamma: S,
    pub goal_gamma: S,
    pub settle: S,
}

impl<S: Scalar> Default for HandSchedule<S> {
    fn default() -> Self {
        HandSchedule {
            start_gamma: cast::<S>(20.0).to_radians(),
            goal_gamma: cast::<S>(15.0).to_radians(),
            settle: cast(0.3),
        }
    }
}

/// Horizontal detour direction, viewed from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcDirection {
    Clockwise,
    Counterclockwise,
}

/// Wrist path shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CurveKind<S> {
    Straight,
    /// Horizontal bulge of `amplitude` meters, peaking mid-reach.
    Arc { amplitude: S, direction: ArcDirection },
}

/// Everything the generator needs for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec<S> {
    pub scene: Scene<S>,
    pub target: usize,
    /// Reach duration, seconds.
    pub duration: S,
    pub fps: S,
    /// Keypoint position noise, meters (std dev per axis).
    pub sigma_pos: S,
    /// Head direction noise, radians (std dev per tangent axis).
    pub sigma_head: S,
    /// Fraction of the duration before the head starts sweeping. Values
    /// >= 1 model an inattentive subject whose head never sweeps.
    pub head_onset: S,
    /// Fraction of the duration the sweep takes to finish.
    pub head_sweep: S,
    pub hand: HandSchedule<S>,
    pub curve: CurveKind<S>,
    pub start: StartPose<S>,
    pub subject: String,
    pub seed: u64,
}

impl<S: Scalar> GenSpec<S> {
    /// Defaults: 2 s reach at 30 FPS, 5 mm position noise, 3 degrees of
    /// head noise, sweep onset at 15% of the reach. The hand goal follows
    /// the target's affordance (top-grasp for `Both`).
    pub fn for_target(scene: Scene<S>, target: usize, seed: u64) -> Result<Self> {
        scene.validate()?;
        let affordance = scene
            .objects
            .get(target)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "target {target} out of range for {} objects",
                    scene.len()
                ))
            })?
            .affordance;
        let mut hand = HandSchedule::default();
        hand.goal_gamma = match affordance {
            Affordance::TopGrasp | Affordance::Both => cast::<S>(15.0).to_radians(),
            Affordance::SideGrasp => cast::<S>(45.0).to_radians(),
        };
        Ok(GenSpec {
            scene,
            target,
            duration: cast(2.0),
            fps: cast(30.0),
            sigma_pos: cast(0.005),
            sigma_head: cast::<S>(3.0).to_radians(),
            head_onset: cast(0.15),
            head_sweep: cast(0.3),
            hand,
            curve: CurveKind::Straight,
            start: StartPose::default(),
            subject: "synthetic".into(),
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        if self.target >= self.scene.len() {
            return Err(Error::InvalidConfig(format!(
                "target {} out of range for {} objects",
                self.target,
                self.scene.len()
            )));
        }
        if !(self.duration > S::zero()) || !(self.fps > S::zero()) {
            return Err(Error::InvalidConfig(
                "duration and fps must be positive".into(),
            ));
        }
        if self.duration * self.fps < S::one() {
            return Err(Error::InvalidConfig(
                "duration * fps must yield at least 2 frames".into(),
            ));
        }
        if self.sigma_pos < S::zero() || self.sigma_head < S::zero() {
            return Err(Error::InvalidConfig("noise sigmas must be >= 0".into()));
        }
        if !(self.head_sweep > S::zero()) {
            return Err(Error::InvalidConfig("head_sweep must be positive".into()));
        }
        if !(self.hand.settle > S::zero() && self.hand.settle <= S::one()) {
            return Err(Error::InvalidConfig("hand settle must be in (0, 1]".into()));
        }
        if let CurveKind::Arc { amplitude, .. } = self.curve {
            if amplitude < S::zero() {
                return Err(Error::InvalidConfig(
                    "arc amplitude must be >= 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Minimum-jerk position blend `10 t^3 - 15 t^4 + 6 t^5` on `[0, 1]`.
pub fn min_jerk_blend<S: Scalar>(tau: S) -> S {
    let t = tau.min(S::one()).max(S::zero());
    let t3 = t * t * t;
    t3 * (cast::<S>(10.0) - cast::<S>(15.0) * t + cast::<S>(6.0) * t * t)
}

struct NoiseSource<'r> {
    rng: &'r mut ChaCha8Rng,
}

impl NoiseSource<'_> {
    fn normal(&mut self) -> f64 {
        StandardNormal.sample(self.rng)
    }

    fn vec3<S: Scalar>(&mut self, sigma: f64) -> Vec3<S> {
        let (a, b, c) = (self.normal(), self.normal(), self.normal());
        Vec3::new(cast(a * sigma), cast(b * sigma), cast(c * sigma))
    }
}

/// Unit tangent pair orthogonal to `v`.
fn tangent_basis<S: Scalar>(v: Vec3<S>) -> (Vec3<S>, Vec3<S>) {
    let reference = if v.dot(Vec3::unit_z()).abs() > cast(0.99) {
        Vec3::new(S::one(), S::zero(), S::zero())
    } else {
        Vec3::unit_z()
    };
    let t1 = v
        .cross(reference)
        .normalized()
        .expect("reference not parallel");
    let t2 = v.cross(t1);
    (t1, t2)
}

/// Hand keypoints whose palm-plane normal makes angle `gamma` with the
/// vertical.
fn hand_points_for_gamma<S: Scalar>(wrist: Vec3<S>, gamma: S) -> (Vec3<S>, Vec3<S>) {
    let normal = Vec3::new(gamma.sin(), S::zero(), gamma.cos());
    let e1 = normal
        .cross(Vec3::unit_z())
        .normalized()
        .unwrap_or_else(|| Vec3::new(S::zero(), -S::one(), S::zero()));
    let e2 = normal.cross(e1);
    let span: S = cast(HAND_SPAN);
    (wrist + e1.scale(span), wrist + e2.scale(span))
}

/// Generates one synthetic reach. Deterministic given the spec.
pub fn generate<S: Scalar>(spec: &GenSpec<S>) -> Result<Trajectory<S>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut noise = NoiseSource { rng: &mut rng };
    let sigma_pos = spec.sigma_pos.to_f64().unwrap_or(0.0);
    let sigma_head = spec.sigma_head.to_f64().unwrap_or(0.0);

    let target_pos = spec.scene.objects[spec.target].position;
    let reach = target_pos - spec.start.wrist;
    let head_goal = (target_pos - spec.start.nose)
        .normalized()
        .ok_or(Error::DegenerateVector)?;

    // Horizontal unit vector perpendicular to the reach for arc detours.
    let horizontal = Vec3::new(reach.x, reach.y, S::zero());
    let perp = match spec.curve {
        CurveKind::Straight => Vec3::zero(),
        CurveKind::Arc { direction, .. } => {
            let h = horizontal.normalized().ok_or(Error::DegenerateVector)?;
            match direction {
                // Viewed from above (+z), clockwise turns (x, y) into (y, -x).
                ArcDirection::Clockwise => Vec3::new(h.y, -h.x, S::zero()),
                ArcDirection::Counterclockwise => Vec3::new(-h.y, h.x, S::zero()),
            }
        }
    };

    let frame_count = (spec.duration * spec.fps)
        .round()
        .to_usize()
        .unwrap_or(1)
        + 1;
    let mut frames = Vec::with_capacity(frame_count);
    for k in 0..frame_count {
        let t = cast::<S>(k as f64) / spec.fps;
        let tau = (t / spec.duration).min(S::one());
        let s = min_jerk_blend(tau);
        let last = k + 1 == frame_count;

        // Wrist along the (possibly curved) reach; the final frame lands
        // on the target exactly in the noise-free limit.
        let base_wrist = if last {
            target_pos
        } else {
            let mut p = spec.start.wrist + reach.scale(s);
            if let CurveKind::Arc { amplitude, .. } = spec.curve {
                let bulge = amplitude * (S::PI() * s).sin();
                p = p + perp.scale(bulge);
            }
            p
        };

        // Head sweeps from the resting direction onto the target.
        let u = ((tau - spec.head_onset) / spec.head_sweep)
            .max(S::zero())
            .min(S::one());
        let head_clean = if u >= S::one() {
            head_goal
        } else {
            slerp(spec.start.head_dir, head_goal, u)
        };

        let gamma_ramp = (tau / spec.hand.settle).min(S::one());
        let gamma = spec.hand.start_gamma
            + (spec.hand.goal_gamma - spec.hand.start_gamma) * gamma_ramp;

        // Fixed draw order per frame: nose, head tangents, wrist, p1, p2.
        let nose = spec.start.nose + noise.vec3(sigma_pos);
        let (t1, t2) = tangent_basis(head_clean);
        let (h1, h2) = (noise.normal() * sigma_head, noise.normal() * sigma_head);
        let head_dir = (head_clean + t1.scale(cast(h1)) + t2.scale(cast(h2)))
            .normalized()
            .unwrap_or(head_clean);
        let wrist = base_wrist + noise.vec3(sigma_pos);
        let (clean_p1, clean_p2) = hand_points_for_gamma(wrist, gamma);
        let p1 = clean_p1 + noise.vec3(sigma_pos);
        let p2 = clean_p2 + noise.vec3(sigma_pos);

        frames.push(Observation {
            t,
            nose,
            head_dir,
            wrist,
            hand_points: [wrist, p1, p2],
        });
    }

    let traj = Trajectory {
        scene: spec.scene.clone(),
        frames,
        label: spec.target,
        meta: TrajectoryMeta {
            fps: spec.fps,
            subject: spec.subject.clone(),
            source: Source::Synthetic,
            seed: Some(spec.seed),
        },
    };
    traj.validate()?;
    Ok(traj)
}

/// Corpus-level knobs on top of a template [`GenSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusOptions<S> {
    pub per_target: usize,
    pub base_seed: u64,
    /// Every `variant_stride`-th round per target becomes a detour or
    /// inattentive variant (5 gives the 20% rate); 0 disables variants.
    pub variant_stride: usize,
    /// Detour bulge of the curved variants, meters.
    pub curve_amplitude: S,
    /// Std dev of the mild lateral curvature every ordinary reach gets;
    /// 0 makes non-variant reaches perfectly straight.
    pub base_curve_sigma: S,
    /// Hand goal above a top-grasp object, radians.
    pub hand_goal_top: S,
    /// Hand goal beside a side-grasp object, radians.
    pub hand_goal_side: S,
}

impl<S: Scalar> CorpusOptions<S> {
    pub fn new(per_target: usize, base_seed: u64) -> Self {
        CorpusOptions {
            per_target,
            base_seed,
            variant_stride: 5,
            curve_amplitude: cast(0.15),
            base_curve_sigma: cast(0.06),
            hand_goal_top: cast::<S>(15.0).to_radians(),
            hand_goal_side: cast::<S>(45.0).to_radians(),
        }
    }
}

/// Detour direction whose bulge points from the reach line toward the
/// scene centroid; `None` when the reach already passes through it.
fn inward_direction<S: Scalar>(
    scene: &Scene<S>,
    start_wrist: Vec3<S>,
    target: usize,
) -> Option<ArcDirection> {
    let n: S = cast(scene.len() as f64);
    let centroid = scene
        .objects
        .iter()
        .fold(Vec3::zero(), |acc, o| acc + o.position)
        .scale(S::one() / n);
    let target_pos = scene.objects[target].position;
    let mid = (start_wrist + target_pos).scale(cast(0.5));
    let h = Vec3::new(
        target_pos.x - start_wrist.x,
        target_pos.y - start_wrist.y,
        S::zero(),
    )
    .normalized()?;
    let cw_perp = Vec3::new(h.y, -h.x, S::zero());
    let to_center = Vec3::new(centroid.x - mid.x, centroid.y - mid.y, S::zero());
    let alignment = cw_perp.dot(to_center);
    if alignment > cast(1e-6) {
        Some(ArcDirection::Clockwise)
    } else if alignment < cast(-1e-6) {
        Some(ArcDirection::Counterclockwise)
    } else {
        None
    }
}

/// Generates `per_target` trajectories per object, interleaved round by
/// round so split prefixes stay label-balanced.
///
/// Ordinary reaches curve mildly (seeded amplitude and side); every
/// `variant_stride`-th round cycles through the harder variants: a wide
/// detour bulging toward the scene center, then an inattentive reach
/// whose head never sweeps. Dual-affordance objects flip a seeded coin
/// between grasp styles per trajectory.
pub fn generate_corpus<S: Scalar>(
    template: &GenSpec<S>,
    opts: &CorpusOptions<S>,
) -> Result<Vec<Trajectory<S>>> {
    if opts.per_target < 1 {
        return Err(Error::InvalidConfig("per_target must be >= 1".into()));
    }
    template.scene.validate()?;
    let n = template.scene.len();
    let mut corpus_rng = ChaCha8Rng::seed_from_u64(opts.base_seed);
    let mut out = Vec::with_capacity(n * opts.per_target);
    let mut variant_counter = 0usize;
    let base_sigma = opts.base_curve_sigma.to_f64().unwrap_or(0.0);
    for round in 0..opts.per_target {
        for target in 0..n {
            // Fixed per-trajectory draw order keeps corpora reproducible.
            let seed = corpus_rng.random::<u64>();
            let top_style = match template.scene.objects[target].affordance {
                Affordance::TopGrasp => true,
                Affordance::SideGrasp => false,
                Affordance::Both => corpus_rng.random_bool(0.5),
            };
            let base_amp: f64 = <StandardNormal as Distribution<f64>>::sample(
                &StandardNormal,
                &mut corpus_rng,
            );
            let base_side = corpus_rng.random_bool(0.5);

            let mut spec = template.clone();
            spec.target = target;
            spec.seed = seed;
            spec.hand.goal_gamma = if top_style {
                opts.hand_goal_top
            } else {
                opts.hand_goal_side
            };
            spec.curve = if base_sigma > 0.0 {
                CurveKind::Arc {
                    amplitude: cast((base_amp * base_sigma).abs()),
                    direction: if base_side {
                        ArcDirection::Clockwise
                    } else {
                        ArcDirection::Counterclockwise
                    },
                }
            } else {
                CurveKind::Straight
            };
            spec.head_onset = template.head_onset;

            let is_variant = opts.variant_stride > 0 && (round + 1) % opts.variant_stride == 0;
            if is_variant {
                match variant_counter % 3 {
                    0 | 1 => {
                        let inward = inward_direction(&template.scene, template.start.wrist, target)
                            .unwrap_or(if variant_counter % 2 == 0 {
                                ArcDirection::Clockwise
                            } else {
                                ArcDirection::Counterclockwise
                            });
                        spec.curve = CurveKind::Arc {
                            amplitude: opts.curve_amplitude,
                            direction: inward,
                        };
                    }
                    _ => spec.head_onset = cast(2.0),
                }
                variant_counter += 1;
            }
            out.push(generate(&spec)?);
        }
    }
    Ok(out)
}
