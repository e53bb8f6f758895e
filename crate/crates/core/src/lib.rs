//! Tube-based video synopsis engine.
//!
//! Tracked objects become *tubes* (per-frame bounding boxes over a
//! contiguous frame range). Tubes are grouped by spatio-temporal and
//! chronological proximity, each group gets one rigid temporal shift to
//! pack the activity into a shorter timeline, and candidate synopses are
//! scored with a pairwise energy model. An online phase (background
//! subtraction plus Kalman tracking) produces tubes from raw frames, and
//! a gradient-domain blender renders the result.
//!
//! Core math is generic over the scalar type via [`num::Real`]; the
//! aliases at the crate root pin everything to `f64`.

pub mod energy;
pub mod error;
pub mod grouping;
pub mod io;
pub mod num;
pub mod render;
pub mod scheduler;
pub mod tracker;
pub mod tube;

pub use error::{Error, Result};
pub use num::Real;
pub use tube::{
    BoundingBox, FrameIndex, FrameSpan, Fps, Group, GroupingMode, Mapping, SigmaMode, Tube,
    TubeDatabase, TubeId,
};

/// Default scalar for all energies, thresholds, and solvers.
pub type Scalar = f64;

pub type Params = tube::Params<Scalar>;
pub type EnergyBreakdown = tube::EnergyBreakdown<Scalar>;
pub type PairEnergy = tube::PairEnergy<Scalar>;
pub type GroupingResult = grouping::GroupingResult<Scalar>;
pub type SynopsisSchedule = scheduler::SynopsisSchedule<Scalar>;
pub type SweepPoint = scheduler::SweepPoint<Scalar>;
pub type TrackerConfig = tracker::TrackerConfig<Scalar>;
pub type SolverOptions = render::SolverOptions<Scalar>;
pub type DistanceCache = energy::DistanceCache<Scalar>;
