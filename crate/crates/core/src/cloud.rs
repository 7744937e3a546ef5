//! Point cloud and leaf mask domain types, plus the mask-to-cloud mapping.
//!
//! Clouds coming off a structured-light sensor are *organized*: every point
//! corresponds to a pixel of the sensor grid, row-major, so a 2D instance
//! mask indexes straight into the point array.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Pixel dimensions of an organized cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridDims {
    pub width: u32,
    pub height: u32,
}

/// A set of 3D points in millimetres, with optional per-point color and
/// optional organized-grid metadata. Invalid points (any non-finite
/// coordinate) are kept in place so grid indexing stays intact; `validity`
/// marks them.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<S: Real> {
    points: Vec<Vec3<S>>,
    colors: Option<Vec<[u8; 3]>>,
    grid: Option<GridDims>,
    validity: Vec<bool>,
}

impl<S: Real> PointCloud<S> {
    pub fn new(points: Vec<Vec3<S>>) -> Self {
        let validity = points
            .iter()
            .map(|p| p.iter().all(|c| c.is_finite()))
            .collect();
        Self {
            points,
            colors: None,
            grid: None,
            validity,
        }
    }

    pub fn with_colors(mut self, colors: Vec<[u8; 3]>) -> Self {
        assert_eq!(colors.len(), self.points.len(), "one color per point");
        self.colors = Some(colors);
        self
    }

    pub fn with_grid(mut self, width: u32, height: u32) -> Self {
        assert_eq!(
            (width as usize) * (height as usize),
            self.points.len(),
            "grid must cover every point"
        );
        self.grid = Some(GridDims { width, height });
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3<S>] {
        &self.points
    }

    pub fn colors(&self) -> Option<&[[u8; 3]]> {
        self.colors.as_deref()
    }

    pub fn grid(&self) -> Option<GridDims> {
        self.grid
    }

    pub fn validity(&self) -> &[bool] {
        &self.validity
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.validity[i]
    }

    pub fn valid_count(&self) -> usize {
        self.validity.iter().filter(|v| **v).count()
    }

    /// Indices of valid points, ascending.
    pub fn valid_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.validity[i]).collect()
    }

    /// Iterator over valid points in storage order.
    pub fn valid_points(&self) -> impl Iterator<Item = Vec3<S>> + '_ {
        self.points
            .iter()
            .zip(&self.validity)
            .filter(|(_, v)| **v)
            .map(|(p, _)| *p)
    }
}

/// Binary instance mask for one leaf, aligned with an organized cloud's
/// pixel grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafMask {
    pub width: u32,
    pub height: u32,
    /// (row, col) pairs, sorted row-major, deduplicated, non-empty.
    pixels: Vec<(u32, u32)>,
    pub leaf_id: String,
}

impl LeafMask {
    pub fn new(width: u32, height: u32, mut pixels: Vec<(u32, u32)>, leaf_id: String) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::EmptyMask(leaf_id));
        }
        for &(r, c) in &pixels {
            if r >= height || c >= width {
                return Err(Error::PgmParse(format!(
                    "pixel ({r}, {c}) outside {width}x{height} mask '{leaf_id}'"
                )));
            }
        }
        pixels.sort_unstable();
        pixels.dedup();
        Ok(Self {
            width,
            height,
            pixels,
            leaf_id,
        })
    }

    pub fn pixels(&self) -> &[(u32, u32)] {
        &self.pixels
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }
}

/// Pull the 3D points under a leaf mask out of an organized cloud.
///
/// Output is an unorganized cloud in row-major pixel order; invalid points
/// under the mask are dropped. Fewer than 3 surviving points is an error
/// because nothing downstream can fit a plane to them.
pub fn extract_leaf_points<S: Real>(cloud: &PointCloud<S>, mask: &LeafMask) -> Result<PointCloud<S>> {
    let grid = cloud.grid().ok_or(Error::MissingGrid)?;
    if grid.width != mask.width || grid.height != mask.height {
        return Err(Error::GridMismatch {
            cloud_w: grid.width,
            cloud_h: grid.height,
            mask_w: mask.width,
            mask_h: mask.height,
        });
    }
    let mut points = Vec::new();
    let mut colors = cloud.colors().map(|_| Vec::new());
    for &(r, c) in mask.pixels() {
        let i = r as usize * grid.width as usize + c as usize;
        if cloud.is_valid(i) {
            points.push(cloud.points()[i]);
            if let (Some(out), Some(src)) = (colors.as_mut(), cloud.colors()) {
                out.push(src[i]);
            }
        }
    }
    if points.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: points.len(),
        });
    }
    let mut out = PointCloud::new(points);
    if let Some(colors) = colors {
        out = out.with_colors(colors);
    }
    Ok(out)
}
