//! Replay simulation: a human observation stream drives the predictor,
//! commits drive task replanning and the virtual obstacle.
//!
//! Per frame the simulator steps the filter, applies the debounce policy,
//! and on a fresh commit removes the matching subtask, rebuilds the
//! obstacle from the current wrist, and checks the robot's straight-line
//! path to the committed object against it. The belief resets to uniform
//! once a commit is consumed, modeling the human moving on to their next
//! object. The robot completes one pending subtask per fixed interval.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Scene, Observation, Vec3};
use crate::inference::{Cpt, Predictor, PredictorConfig};
use crate::obstacle::{build_ellipsoid, VirtualEllipsoid};
use crate::scalar::{cast, Scalar};
use crate::taskplan::{
    adapt_sequence, check_path, commit_intent, straight_path, CommitPolicy, PlanEvent,
    PlanEventKind, Subtask, TaskSequence,
};

/// Geometry and policy knobs for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams<S> {
    pub policy: CommitPolicy<S>,
    /// Ellipsoid shape ratios.
    pub r_b: S,
    pub r_c: S,
    /// Obstacle inflation margin for path checks, meters.
    pub margin: S,
    /// Where robot reach paths start.
    pub robot_home: Vec3<S>,
    /// Waypoints sampled per straight-line path.
    pub path_waypoints: usize,
    /// Seconds the robot takes per subtask.
    pub robot_subtask_duration: S,
    /// Record per-frame latency (off keeps logs byte-stable).
    pub record_latency: bool,
}

impl<S: Scalar> Default for SimParams<S> {
    fn default() -> Self {
        SimParams {
            policy: CommitPolicy {
                hysteresis_k: 5,
                commit_threshold: cast(0.7),
            },
            r_b: cast(crate::obstacle::DEFAULT_R_B),
            r_c: cast(crate::obstacle::DEFAULT_R_C),
            margin: cast(0.05),
            robot_home: Vec3::new(S::zero(), cast(1.1), cast(0.35)),
            path_waypoints: 25,
            robot_subtask_duration: cast(5.0),
            record_latency: false,
        }
    }
}

/// One frame of the simulation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRecord<S> {
    pub t: S,
    pub belief: Vec<S>,
    pub predicted: usize,
    /// Active committed target, if any.
    pub committed: Option<usize>,
    /// Current obstacle while a commit is active.
    pub ellipsoid: Option<VirtualEllipsoid<S>>,
    pub events: Vec<PlanEvent<S>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub latency_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimLog<S> {
    pub records: Vec<SimRecord<S>>,
    pub final_pending: Vec<Subtask>,
    pub final_completed: Vec<Subtask>,
}

impl<S: Scalar + Serialize> SimLog<S> {
    /// All events across records, in order.
    pub fn events(&self) -> impl Iterator<Item = &PlanEvent<S>> {
        self.records.iter().flat_map(|r| r.events.iter())
    }

    /// Line-delimited JSON: one record per line.
    pub fn write_jsonl<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        for record in &self.records {
            let line = serde_json::to_string(record).map_err(std::io::Error::other)?;
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Runs the full replanning loop over one observation stream.
pub fn run_simulation<S: Scalar>(
    cpt: &Cpt<S>,
    scene: &Scene<S>,
    frames: &[Observation<S>],
    mut sequence: TaskSequence,
    config: &PredictorConfig<S>,
    params: &SimParams<S>,
) -> Result<SimLog<S>> {
    let mut predictor = Predictor::new(cpt, scene.clone(), config)?;
    let mut history: Vec<(usize, S)> = Vec::new();
    let mut active_commit: Option<usize> = None;
    let mut next_complete_t =
        frames.first().map(|f| f.t + params.robot_subtask_duration);
    let mut records = Vec::with_capacity(frames.len());

    for obs in frames {
        let out = predictor.step(obs)?;
        history.push((out.predicted, out.belief.probs[out.predicted]));
        let mut events: Vec<PlanEvent<S>> = Vec::new();

        // Robot progress on its own clock.
        if let Some(due) = next_complete_t {
            if obs.t >= due {
                if let Some(done) = sequence.complete_current() {
                    events.push(PlanEvent {
                        t: obs.t,
                        kind: PlanEventKind::SubtaskCompleted { subtask: done },
                    });
                }
                next_complete_t = Some(due + params.robot_subtask_duration);
            }
        }

        // Debounced commit of the current prediction.
        if let Some(target) = commit_intent(&history, &params.policy) {
            if active_commit != Some(target) {
                active_commit = Some(target);
                if let Some(removal) = adapt_sequence(&mut sequence, target, obs.t) {
                    events.push(removal);
                }
                let target_pos = scene.objects[target].position;
                if let Ok(ellipsoid) =
                    build_ellipsoid(obs.wrist, target_pos, params.r_b, params.r_c)
                {
                    events.push(PlanEvent {
                        t: obs.t,
                        kind: PlanEventKind::ObstacleUpdated {
                            ellipsoid,
                            spheres: ellipsoid.to_spheres(),
                        },
                    });
                    let path =
                        straight_path(params.robot_home, target_pos, params.path_waypoints);
                    if let Some(waypoint) = check_path(&path, &ellipsoid, params.margin) {
                        events.push(PlanEvent {
                            t: obs.t,
                            kind: PlanEventKind::PathBlocked {
                                object: target,
                                waypoint,
                            },
                        });
                    }
                }
                predictor.reset_belief();
                history.clear();
            }
        }

        // Obstacle tracks the wrist while a commit is active.
        let ellipsoid = active_commit.and_then(|target| {
            build_ellipsoid(
                obs.wrist,
                scene.objects[target].position,
                params.r_b,
                params.r_c,
            )
            .ok()
        });

        records.push(SimRecord {
            t: obs.t,
            belief: out.belief.probs.clone(),
            predicted: out.predicted,
            committed: active_commit,
            ellipsoid,
            events,
            latency_s: params.record_latency.then_some(out.latency_s),
        });
    }

    Ok(SimLog {
        records,
        final_pending: sequence.pending().to_vec(),
        final_completed: sequence.completed().to_vec(),
    })
}
