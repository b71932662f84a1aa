//! Multi-modal Bayesian prediction of human grasp intent.
//!
//! A recursive Bayesian filter fuses three per-frame features extracted
//! from world-frame keypoints — head orientation, hand orientation, and
//! hand motion — into a posterior over which scene object a person is
//! reaching for. The committed prediction drives a virtual ellipsoid
//! obstacle between wrist and target and task-sequence replanning for a
//! collaborating robot arm.
//!
//! The numeric core is generic over the scalar type (`f32`/`f64`);
//! concrete `f64` aliases are exported at the crate root.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod evidence;
pub mod geometry;
pub mod inference;
pub mod obstacle;
pub mod scalar;
pub mod sim;
pub mod taskplan;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the generic core types.
pub type Vec3 = geometry::Vec3<f64>;
pub type Mat3 = geometry::Mat3<f64>;
pub type Observation = geometry::Observation<f64>;
pub type SceneObject = geometry::SceneObject<f64>;
pub type Scene = geometry::Scene<f64>;
pub type EvidenceVector = evidence::EvidenceVector<f64>;
pub type FeatureConfig = evidence::FeatureConfig<f64>;
pub type FeatureExtractor = evidence::FeatureExtractor<f64>;
pub type Cpt = inference::Cpt<f64>;
pub type Belief = inference::Belief<f64>;
pub type PredictorConfig = inference::PredictorConfig<f64>;
pub type Predictor<'a> = inference::Predictor<'a, f64>;
pub type VirtualEllipsoid = obstacle::VirtualEllipsoid<f64>;
pub type SphereSet = obstacle::SphereSet<f64>;
pub type CommitPolicy = taskplan::CommitPolicy<f64>;
pub type PlanEvent = taskplan::PlanEvent<f64>;
pub type Trajectory = dataset::Trajectory<f64>;
pub type GenSpec = dataset::GenSpec<f64>;
pub type CorpusOptions = dataset::CorpusOptions<f64>;
pub type MetricsReport = eval::MetricsReport<f64>;
pub type SimParams = sim::SimParams<f64>;
pub type SimLog = sim::SimLog<f64>;
