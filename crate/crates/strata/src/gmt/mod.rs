//! Geometry of parametrized patches: matrices, area and coarea factors,
//! charts, and the built-in chart family.

pub mod builtins;
mod chart;
mod factors;
mod matrix;

pub use builtins::{
    arc, circle, closed_form_measure, gallery, graph, helix, planar_patch, point, segment,
    sphere_patch, GraphFn,
};
pub(crate) use chart::dist;
pub use chart::{
    Chart, JacFn, LipschitzEstimate, MapFn, NumericJacobian, ParamDomain, Point, COLLISION_TOL,
    DEFAULT_FD_STEP,
};
pub use factors::{area_factor, coarea_factor};
pub use matrix::Matrix;
