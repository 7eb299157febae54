//! File formats: Touchstone, CSV and SVG plots.

pub mod csv;
pub mod svg;
pub mod touchstone;
