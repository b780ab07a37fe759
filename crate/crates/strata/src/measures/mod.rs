//! Densities on charts and the stratified mixtures built from them.

mod component;
mod density;
mod stratified;

pub use component::{product_measure_residual, RectifiableComponent};
pub use density::{DensityFamily, ParamDensity};
pub use stratified::{Sample, StratifiedEntropy, StratifiedMeasure, Stratum};
