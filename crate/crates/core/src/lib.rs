//! Leaf size estimation from 3D point-cloud scans.
//!
//! A scan comes in as an organized PLY cloud plus one PGM instance mask
//! per leaf. Each leaf's points are pulled out through the pixel grid, a
//! plane is fit to them by RANSAC (with or without a total-least-squares
//! refit), the points are projected onto that plane, and the leaf's length
//! and width are read off as principal-axis extents of the 2D projection.
//! The `eval` module scores measurements against a ground-truth table;
//! `synth` generates leaves and calibration cubes with exact ground truth.
//!
//! Geometry and metrics are generic over the scalar type ([`Real`], f32 or
//! f64); the pipeline aliases below fix f64.

pub mod calibrate;
pub mod cli;
pub mod cloud;
pub mod error;
pub mod eval;
pub mod manifest;
pub mod mask;
pub mod measure;
pub mod plane;
pub mod ply;
pub mod scalar;
pub mod svg;
pub mod synth;
pub mod vec3;

pub use error::{Error, Result};
pub use scalar::Real;

/// Pipeline-default concrete types.
pub type PointCloud = cloud::PointCloud<f64>;
pub type PointCloudF32 = cloud::PointCloud<f32>;
pub type PlaneModel = plane::PlaneModel<f64>;
pub type PlaneBasis = plane::PlaneBasis<f64>;
pub type RansacConfig = plane::RansacConfig<f64>;
pub type LeafMeasurement = measure::LeafMeasurement<f64>;
pub type ExtentConfig = measure::ExtentConfig<f64>;
