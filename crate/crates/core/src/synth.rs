//! Synthetic test data with exact ground truth: elliptical leaves (flat or
//! cylindrically bent, with noise and gross outliers) and cube face scans
//! for the stitching-error calibration methodology.

use rand::distributions::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Euler-angle rigid transform (degrees, applied as Rz * Ry * Rx, then
/// translation).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct RigidTransform {
    #[serde(default)]
    pub rotation_deg: [f64; 3],
    #[serde(default)]
    pub translation: [f64; 3],
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self {
            rotation_deg: [0.0; 3],
            translation: [0.0; 3],
        }
    }
}

impl RigidTransform {
    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let [rx, ry, rz] = self.rotation_deg.map(f64::to_radians);
        let (sx, cx) = rx.sin_cos();
        let (sy, cy) = ry.sin_cos();
        let (sz, cz) = rz.sin_cos();
        // Rz * Ry * Rx
        [
            [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
            [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
            [-sy, cy * sx, cy * cx],
        ]
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let m = self.rotation_matrix();
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = m[i][0] * p[0] + m[i][1] * p[1] + m[i][2] * p[2] + self.translation[i];
        }
        out
    }
}

fn default_point_spacing() -> f64 {
    0.5
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LeafSpec {
    /// Major-axis size of the flat outline, mm.
    pub length: f64,
    /// Minor-axis size of the flat outline, mm.
    pub width: f64,
    #[serde(default = "default_point_spacing")]
    pub point_spacing: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub outlier_fraction: f64,
    /// Cylinder radius for bending about the minor axis; absent means flat.
    #[serde(default)]
    pub bend_radius: Option<f64>,
    #[serde(default)]
    pub pose: RigidTransform,
    #[serde(default)]
    pub seed: u64,
}

impl LeafSpec {
    pub fn flat(length: f64, width: f64) -> Self {
        Self {
            length,
            width,
            point_spacing: default_point_spacing(),
            noise_sigma: 0.0,
            outlier_fraction: 0.0,
            bend_radius: None,
            pose: RigidTransform::default(),
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.length >= self.width) {
            return Err(Error::InvalidSpec(format!(
                "need length >= width > 0, got length {} width {}",
                self.length, self.width
            )));
        }
        if self.point_spacing <= 0.0 {
            return Err(Error::InvalidSpec("point_spacing must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return Err(Error::InvalidSpec("outlier_fraction must be in [0, 1)".into()));
        }
        if let Some(r) = self.bend_radius {
            if r <= 0.0 {
                return Err(Error::InvalidSpec("bend_radius must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Grid-sampled leaf kept in pixel layout, so the same generator feeds both
/// unorganized clouds and organized synthetic scans.
#[derive(Debug, Clone)]
pub struct LeafPatch {
    pub cols: u32,
    pub rows: u32,
    /// Row-major; `None` where the pixel is outside the leaf outline.
    pub cells: Vec<Option<[f64; 3]>>,
    pub truth: (f64, f64),
}

impl LeafPatch {
    pub fn point_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }
}

/// How far outliers sit from the leaf surface, mm. Keeps them safely
/// outside any sensible RANSAC threshold.
const OUTLIER_MIN_OFFSET: f64 = 10.0;

pub fn generate_leaf_patch(spec: &LeafSpec) -> Result<LeafPatch> {
    spec.validate()?;
    let s = spec.point_spacing;
    let a = spec.length / 2.0;
    let b = spec.width / 2.0;
    let nx = (a / s).floor() as i64;
    let ny = (b / s).floor() as i64;
    let cols = (2 * nx + 1) as u32;
    let rows = (2 * ny + 1) as u32;

    let mut cells: Vec<Option<[f64; 3]>> = Vec::with_capacity((cols * rows) as usize);
    for j in -ny..=ny {
        for i in -nx..=nx {
            let x = i as f64 * s;
            let y = j as f64 * s;
            let inside = (x / a).powi(2) + (y / b).powi(2) <= 1.0 + 1e-12;
            if !inside {
                cells.push(None);
                continue;
            }
            // bend wraps arc length x onto a cylinder about the minor axis
            let p = match spec.bend_radius {
                Some(r) => [r * (x / r).sin(), y, r * (1.0 - (x / r).cos())],
                None => [x, y, 0.0],
            };
            cells.push(Some(p));
        }
    }

    let present = cells.iter().filter(|c| c.is_some()).count();
    if present < 3 {
        return Err(Error::InvalidSpec(format!(
            "leaf sampling yields only {present} points; need at least 3"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    if spec.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.noise_sigma).expect("sigma validated");
        for cell in cells.iter_mut().flatten() {
            for c in cell.iter_mut() {
                *c += normal.sample(&mut rng);
            }
        }
    }

    if spec.outlier_fraction > 0.0 {
        let k = (spec.outlier_fraction * present as f64).floor() as usize;
        if k > 0 {
            let mut lo = [f64::INFINITY; 3];
            let mut hi = [f64::NEG_INFINITY; 3];
            for cell in cells.iter().flatten() {
                for c in 0..3 {
                    lo[c] = lo[c].min(cell[c]);
                    hi[c] = hi[c].max(cell[c]);
                }
            }
            let center = [0, 1, 2].map(|c| 0.5 * (lo[c] + hi[c]));
            let half_span = [0, 1, 2].map(|c| 0.5 * (hi[c] - lo[c]));
            let present_idx: Vec<usize> = cells
                .iter()
                .enumerate()
                .filter(|(_, c)| c.is_some())
                .map(|(i, _)| i)
                .collect();
            let picks = rand::seq::index::sample(&mut rng, present_idx.len(), k);
            let mut chosen: Vec<usize> = picks.iter().map(|p| present_idx[p]).collect();
            chosen.sort_unstable();
            for idx in chosen {
                // in-plane coordinates uniform in a 3x bounding box; the
                // out-of-plane coordinate is pushed at least
                // OUTLIER_MIN_OFFSET away from the surface
                let x = center[0] + rng.gen_range(-3.0..3.0) * half_span[0].max(1e-9);
                let y = center[1] + rng.gen_range(-3.0..3.0) * half_span[1].max(1e-9);
                let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let z = center[2]
                    + sign
                        * (OUTLIER_MIN_OFFSET
                            + half_span[2]
                            + rng.gen_range(0.0..OUTLIER_MIN_OFFSET));
                cells[idx] = Some([x, y, z]);
            }
        }
    }

    for cell in cells.iter_mut().flatten() {
        *cell = spec.pose.apply(*cell);
    }

    Ok(LeafPatch {
        cols,
        rows,
        cells,
        truth: (spec.length, spec.width),
    })
}

/// Unorganized leaf cloud plus its exact flat-outline (length, width).
pub fn generate_leaf(spec: &LeafSpec) -> Result<(PointCloud<f64>, (f64, f64))> {
    let patch = generate_leaf_patch(spec)?;
    let points: Vec<[f64; 3]> = patch.cells.iter().flatten().copied().collect();
    Ok((PointCloud::new(points), patch.truth))
}

fn default_edge() -> f64 {
    50.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CubeSpec {
    #[serde(default = "default_edge")]
    pub edge: f64,
    pub camera_distance: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed: u64,
}

/// Sample density falls off with camera distance at this angular pitch
/// (radians per sample), modeling a fixed sensor resolution.
pub const ANGULAR_PITCH_RAD: f64 = 0.002;

/// Scan of the three camera-facing faces of an axis-aligned cube centered
/// at the origin, viewed from `camera_distance` along the (1,1,1) diagonal.
/// Returns the cloud and the true edge length.
pub fn generate_cube_face_scan(spec: &CubeSpec) -> Result<(PointCloud<f64>, f64)> {
    if spec.edge <= 0.0 {
        return Err(Error::InvalidSpec("cube edge must be positive".into()));
    }
    if spec.camera_distance <= 0.0 {
        return Err(Error::InvalidSpec("camera_distance must be positive".into()));
    }
    let nominal = spec.camera_distance * ANGULAR_PITCH_RAD;
    let h = spec.edge / 2.0;
    // samples sit at pixel centers, so the scan misses half a pitch at each
    // silhouette edge; the pitch is snapped so a whole number covers the face
    let m = ((spec.edge / nominal).round() as i64).max(2);
    let spacing = spec.edge / m as f64;

    let mut points = Vec::new();
    // faces +x, +y, +z: the ones facing a camera on the (1,1,1) diagonal
    for face in 0..3 {
        for i in 0..m {
            for j in 0..m {
                let a = -h + (i as f64 + 0.5) * spacing;
                let b = -h + (j as f64 + 0.5) * spacing;
                let p = match face {
                    0 => [h, a, b],
                    1 => [a, h, b],
                    _ => [a, b, h],
                };
                points.push(p);
            }
        }
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.noise_sigma).expect("sigma checked");
        for p in &mut points {
            for c in p.iter_mut() {
                *c += normal.sample(&mut rng);
            }
        }
    }

    Ok((PointCloud::new(points), spec.edge))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::fit_plane_tls;
    use crate::vec3;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_leaf_extent_matches_truth_up_to_spacing() {
        let spec = LeafSpec::flat(60.0, 35.0);
        let (cloud, truth) = generate_leaf(&spec).unwrap();
        assert_eq!(truth, (60.0, 35.0));
        let xs: Vec<f64> = cloud.points().iter().map(|p| p[0]).collect();
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(60.0 - (max - min) < 2.0 * spec.point_spacing);
    }

    #[test]
    fn flat_leaf_is_exactly_coplanar() {
        let spec = LeafSpec {
            pose: RigidTransform {
                rotation_deg: [20.0, -35.0, 110.0],
                translation: [5.0, -3.0, 12.0],
            },
            ..LeafSpec::flat(50.0, 30.0)
        };
        let (cloud, _) = generate_leaf(&spec).unwrap();
        let idx: Vec<usize> = (0..cloud.len()).collect();
        let (n, d) = fit_plane_tls(cloud.points(), &idx);
        let worst = cloud
            .points()
            .iter()
            .map(|&p| (vec3::dot(n, p) - d).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-9, "max residual {worst}");
    }

    #[test]
    fn bent_leaf_chord_is_shorter_than_arc() {
        let r = 40.0;
        let spec = LeafSpec {
            bend_radius: Some(r),
            ..LeafSpec::flat(60.0, 35.0)
        };
        let (cloud, _) = generate_leaf(&spec).unwrap();
        let xs: Vec<f64> = cloud.points().iter().map(|p| p[0]).collect();
        let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let chord = max - min;
        // closed form: chord of a 60mm arc on a 40mm cylinder
        let expected = 2.0 * r * (30.0 / r).sin();
        assert!(chord < 60.0);
        assert_abs_diff_eq!(chord, expected, epsilon = 2.0 * spec.point_spacing);
    }

    #[test]
    fn degenerate_spec_below_three_points_errors() {
        let spec = LeafSpec {
            point_spacing: 100.0,
            ..LeafSpec::flat(60.0, 35.0)
        };
        assert!(matches!(
            generate_leaf(&spec),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn generation_is_deterministic_per_seed() {
        let spec = LeafSpec {
            noise_sigma: 1.0,
            outlier_fraction: 0.1,
            seed: 42,
            ..LeafSpec::flat(60.0, 35.0)
        };
        let (a, _) = generate_leaf(&spec).unwrap();
        let (b, _) = generate_leaf(&spec).unwrap();
        assert_eq!(a.points(), b.points());
        let (c, _) = generate_leaf(&LeafSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn outliers_sit_at_least_10mm_off_the_plane() {
        let spec = LeafSpec {
            outlier_fraction: 0.1,
            seed: 5,
            ..LeafSpec::flat(60.0, 35.0)
        };
        let (cloud, _) = generate_leaf(&spec).unwrap();
        let far = cloud
            .points()
            .iter()
            .filter(|p| p[2].abs() >= OUTLIER_MIN_OFFSET - 1e-9)
            .count();
        let expected = (0.1 * generate_leaf_patch(&LeafSpec::flat(60.0, 35.0))
            .unwrap()
            .point_count() as f64)
            .floor() as usize;
        assert_eq!(far, expected);
    }

    #[test]
    fn cube_faces_are_mutually_orthogonal() {
        let spec = CubeSpec {
            edge: 50.0,
            camera_distance: 400.0,
            noise_sigma: 0.0,
            seed: 0,
        };
        let (cloud, edge) = generate_cube_face_scan(&spec).unwrap();
        assert_eq!(edge, 50.0);
        // noiseless faces are exact planes at +edge/2
        let pts = cloud.points();
        let per_face = pts.len() / 3;
        for (face, axis) in [(0usize, 0usize), (1, 1), (2, 2)] {
            for p in &pts[face * per_face..(face + 1) * per_face] {
                assert_abs_diff_eq!(p[axis], 25.0, epsilon = 1e-12);
            }
        }
    }
}
