//! Density system on the heat frame: free boundaries, the density map and
//! its fixed points, the a-priori constants, and restarts past the horizon.

pub mod constants;
pub mod extend;
pub mod paths;
pub mod potential;
pub mod solve;

pub use constants::{compute_constants, ConstantsLedger, Inequality};
pub use extend::{extend_solution, Extended, ExtensionFailure, ExtensionPlan, Segment, SegmentHorizon};
pub use paths::{free_boundaries, Paths};
pub use potential::{Field, Pos, Source};
pub use solve::{DensityState, JumpRule, Solver, SolverOptions};
