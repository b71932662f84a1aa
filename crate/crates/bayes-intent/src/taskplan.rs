//! Robot subtask sequence and its adaptation to committed human intent.
//!
//! Predictions commit only after a debounce: the last k frames must agree
//! and the posterior must clear a threshold. A committed target removes
//! the matching pending subtask, and candidate robot paths are checked
//! against the inflated virtual obstacle waypoint by waypoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::obstacle::{SphereSet, VirtualEllipsoid};
use crate::scalar::Scalar;

/// One robot subtask bound to a scene object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub id: String,
    pub object: usize,
}

/// Ordered subtask list with a cursor at the next subtask to execute.
/// Entries at or past the cursor are pending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSequence {
    subtasks: Vec<Subtask>,
    cursor: usize,
}

impl TaskSequence {
    pub fn new(subtasks: Vec<Subtask>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &subtasks {
            if !seen.insert(s.object) {
                return Err(Error::InvalidConfig(format!(
                    "object {} appears in more than one subtask",
                    s.object
                )));
            }
        }
        Ok(TaskSequence {
            subtasks,
            cursor: 0,
        })
    }

    pub fn pending(&self) -> &[Subtask] {
        &self.subtasks[self.cursor.min(self.subtasks.len())..]
    }

    pub fn current(&self) -> Option<&Subtask> {
        self.subtasks.get(self.cursor)
    }

    pub fn is_done(&self) -> bool {
        self.cursor >= self.subtasks.len()
    }

    pub fn completed(&self) -> &[Subtask] {
        &self.subtasks[..self.cursor.min(self.subtasks.len())]
    }

    /// Marks the current subtask finished and advances the cursor.
    pub fn complete_current(&mut self) -> Option<Subtask> {
        let done = self.subtasks.get(self.cursor).cloned();
        if done.is_some() {
            self.cursor += 1;
        }
        done
    }

    /// Removes the pending subtask bound to `object`, if any.
    pub fn remove_pending_for(&mut self, object: usize) -> Option<Subtask> {
        let idx = self.subtasks[self.cursor..]
            .iter()
            .position(|s| s.object == object)?
            + self.cursor;
        Some(self.subtasks.remove(idx))
    }
}

/// Debounce policy gating when a prediction becomes a commitment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommitPolicy<S> {
    /// Consecutive identical predictions required.
    pub hysteresis_k: usize,
    /// Posterior mass required on the streak's target. A value above 1
    /// can never be met and disables commits.
    pub commit_threshold: S,
}

/// Returns the streak target when the last `hysteresis_k` predictions all
/// agree and the latest posterior clears the threshold.
pub fn commit_intent<S: Scalar>(
    history: &[(usize, S)],
    policy: &CommitPolicy<S>,
) -> Option<usize> {
    if policy.hysteresis_k == 0 || history.len() < policy.hysteresis_k {
        return None;
    }
    let tail = &history[history.len() - policy.hysteresis_k..];
    let (target, _) = tail[0];
    if !tail.iter().all(|&(p, _)| p == target) {
        return None;
    }
    let (_, latest_posterior) = *history.last().expect("history non-empty");
    if latest_posterior >= policy.commit_threshold {
        Some(target)
    } else {
        None
    }
}

/// Replanning event payloads, ordered by timestamp within a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanEventKind<S> {
    SubtaskRemoved {
        subtask: Subtask,
    },
    ObstacleUpdated {
        ellipsoid: VirtualEllipsoid<S>,
        spheres: SphereSet<S>,
    },
    PathBlocked {
        /// Object the blocked path was heading for.
        object: usize,
        /// Index of the first waypoint inside the inflated obstacle.
        waypoint: usize,
    },
    SubtaskCompleted {
        subtask: Subtask,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEvent<S> {
    /// Seconds, matching the observation stream.
    pub t: S,
    #[serde(flatten)]
    pub kind: PlanEventKind<S>,
}

/// Removes the pending subtask for a committed target and reports the
/// removal. Repeated commits of the same target are no-ops.
pub fn adapt_sequence<S: Scalar>(
    seq: &mut TaskSequence,
    committed: usize,
    t: S,
) -> Option<PlanEvent<S>> {
    let removed = seq.remove_pending_for(committed)?;
    Some(PlanEvent {
        t,
        kind: PlanEventKind::SubtaskRemoved { subtask: removed },
    })
}

/// First waypoint inside the obstacle inflated by `margin`, or `None`
/// when the path is clear.
pub fn check_path<S: Scalar>(
    waypoints: &[Vec3<S>],
    obstacle: &VirtualEllipsoid<S>,
    margin: S,
) -> Option<usize> {
    let inflated = obstacle.inflated(margin);
    waypoints.iter().position(|&p| inflated.contains(p))
}

/// Evenly spaced waypoints on the segment from `from` to `to`, endpoints
/// included.
pub fn straight_path<S: Scalar>(from: Vec3<S>, to: Vec3<S>, count: usize) -> Vec<Vec3<S>> {
    let count = count.max(2);
    let denom = crate::scalar::cast::<S>((count - 1) as f64);
    (0..count)
        .map(|i| {
            let u = crate::scalar::cast::<S>(i as f64) / denom;
            from + (to - from).scale(u)
        })
        .collect()
}
