//! Characteristic geometry of the acoustic metric along a computed trajectory.

pub mod foliation;
pub mod frame;
pub mod geodesic;
pub mod metric;
pub mod torus;

pub use foliation::{
    build_foliation, build_foliation_lattice, foliation_functional, graph_norm, r_lattice, FoliationGraph, FoliationOptions,
    ThetaDirection, ThetaLattice,
};
pub use frame::{build_null_frame, second_fundamental_form, ConnectionCoefficients, FramePoint, NullFrame};
pub use geodesic::{trace_null_geodesic, GeodesicRay, RayOptions, RaySample};
pub use metric::{MetricSample, SpacetimeMetric};
pub use torus::Torus;

use eulerbench_core::CoreError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("time {time} outside the stack range [{start}, {end}]")]
    LeftDomain { time: f64, start: f64, end: f64 },
    #[error("null constraint drifted to {drift:e} at t = {time}")]
    ConstraintDrift { time: f64, drift: f64 },
    #[error("rays cross (caustic) at t = {time}")]
    FoldDetected { time: f64 },
    #[error("Gram-Schmidt pivot {pivot:e} below tolerance")]
    DegenerateFrame { pivot: f64 },
    #[error("step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },
    #[error("invalid geometry parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, GeometryError>;
