//! Cube calibration: fit the three visible faces of a reference cube,
//! estimate its edge length, and report the error against the known edge.
//! This reproduces the stitching-error methodology used to characterize
//! the sensor at several camera distances.

use serde::Serialize;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::plane::{fit_plane_ransac, fit_plane_tls, point_plane_distance, PlaneModel, RansacConfig};
use crate::vec3;

#[derive(Debug, Clone, Serialize)]
pub struct FaceFit {
    pub normal: [f64; 3],
    pub rms_distance: f64,
    pub inlier_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeCalibration {
    pub edge_mm: f64,
    pub faces: Vec<FaceFit>,
    /// Fraction of valid points claimed by the three face planes.
    pub coverage: f64,
}

impl CubeCalibration {
    pub fn error_percentage(&self, true_edge: f64) -> f64 {
        100.0 * (self.edge_mm - true_edge).abs() / true_edge
    }
}

/// Trimmed extent of samples along a direction, corrected for the trimmed
/// quantile span so a uniform strip of length E reports E.
const EDGE_TRIM: f64 = 0.08;

fn trimmed_reach(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    let k = ((EDGE_TRIM * n as f64) as usize).min(n / 2);
    // the (n-k)-th order statistic of n uniform samples over [0, E]
    // sits at ~E(1 - k/n)
    values[n - 1 - k] / (1.0 - k as f64 / n as f64)
}

/// Sequentially fit three mutually orthogonal face planes and estimate the
/// cube edge from point extents along face-intersection directions.
pub fn estimate_cube_edge(
    cloud: &PointCloud<f64>,
    config: &RansacConfig<f64>,
) -> Result<CubeCalibration> {
    let valid_total = cloud.valid_count();
    if valid_total < 3 * config.min_inliers {
        return Err(Error::TooFewPoints {
            needed: 3 * config.min_inliers,
            got: valid_total,
        });
    }

    let all_points: Vec<[f64; 3]> = cloud.valid_points().collect();
    let mut remaining: Vec<[f64; 3]> = all_points.clone();
    let mut planes: Vec<PlaneModel<f64>> = Vec::new();

    for stage in 0..3 {
        let sub = PointCloud::new(remaining.clone());
        let cfg = RansacConfig {
            seed: config.seed.wrapping_add(stage),
            ..*config
        };
        let plane = fit_plane_ransac(&sub, &cfg)
            .map_err(|e| Error::Calibration(format!("face {} fit failed: {e}", stage + 1)))?;
        let inlier_set: std::collections::HashSet<usize> = plane.inliers.iter().copied().collect();
        remaining = remaining
            .iter()
            .enumerate()
            .filter(|(i, _)| !inlier_set.contains(i))
            .map(|(_, p)| *p)
            .collect();
        planes.push(plane);
    }

    for i in 0..3 {
        for j in (i + 1)..3 {
            let d = vec3::dot(planes[i].normal, planes[j].normal).abs();
            if d > 0.1 {
                return Err(Error::Calibration(format!(
                    "face planes {} and {} are not orthogonal (|cos| = {d:.3})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }

    // sequential removal steals edge strips from later faces, so points are
    // reassigned to their nearest plane (and the planes refit on the clean
    // assignments) before measuring extents
    let assign = |planes: &[PlaneModel<f64>]| -> Vec<Vec<[f64; 3]>> {
        let mut face_points: Vec<Vec<[f64; 3]>> = vec![Vec::new(), Vec::new(), Vec::new()];
        for &p in &all_points {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (k, plane) in planes.iter().enumerate() {
                let d = point_plane_distance(p, plane);
                if d < best_d {
                    best = k;
                    best_d = d;
                }
            }
            if best_d <= config.distance_threshold {
                face_points[best].push(p);
            }
        }
        face_points
    };

    let mut face_points = assign(&planes);
    for _ in 0..8 {
        for (plane, pts) in planes.iter_mut().zip(&face_points) {
            if pts.len() < 3 {
                continue;
            }
            let idx: Vec<usize> = (0..pts.len()).collect();
            let (normal, offset) = fit_plane_tls(pts, &idx);
            plane.normal = normal;
            plane.offset = offset;
        }
        let next = assign(&planes);
        let stable = next == face_points;
        face_points = next;
        if stable {
            break;
        }
    }
    for pts in &face_points {
        if pts.len() < config.min_inliers {
            return Err(Error::Calibration(format!(
                "a face plane holds only {} points after reassignment",
                pts.len()
            )));
        }
    }

    let claimed: usize = face_points.iter().map(|f| f.len()).sum();
    let coverage = claimed as f64 / valid_total as f64;
    if coverage < 0.8 {
        return Err(Error::Calibration(format!(
            "face planes cover only {:.0}% of the cloud; not a cube scan",
            100.0 * coverage
        )));
    }

    // each face meets its two neighbors along cube edges, which lie exactly
    // on the neighbor planes; a face's reach away from a neighbor plane out
    // to the silhouette boundary therefore estimates the edge length
    let mut estimates = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if i == j {
                continue;
            }
            let reach: Vec<f64> = face_points[i]
                .iter()
                .map(|&p| point_plane_distance(p, &planes[j]))
                .collect();
            estimates.push(trimmed_reach(reach));
        }
    }
    let edge_mm = estimates.iter().sum::<f64>() / estimates.len() as f64;

    let faces = planes
        .iter()
        .zip(&face_points)
        .map(|(plane, pts)| {
            let rms = (pts
                .iter()
                .map(|&p| point_plane_distance(p, plane).powi(2))
                .sum::<f64>()
                / pts.len() as f64)
                .sqrt();
            FaceFit {
                normal: plane.normal,
                rms_distance: rms,
                inlier_count: pts.len(),
            }
        })
        .collect();

    Ok(CubeCalibration {
        edge_mm,
        faces,
        coverage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_cube_face_scan, CubeSpec};

    fn config() -> RansacConfig<f64> {
        RansacConfig {
            iterations: 400,
            distance_threshold: 2.0,
            min_inliers: 12,
            seed: 3,
            refine: true,
        }
    }

    #[test]
    fn exact_cube_edge_recovered() {
        let (cloud, edge) = generate_cube_face_scan(&CubeSpec {
            edge: 50.0,
            camera_distance: 400.0,
            noise_sigma: 0.0,
            seed: 0,
        })
        .unwrap();
        let cal = estimate_cube_edge(&cloud, &config()).unwrap();
        assert_eq!(cal.faces.len(), 3);
        assert!(cal.coverage > 0.99);
        // pixel-center sampling misses about one pitch at each face boundary
        assert!(cal.error_percentage(edge) < 3.0 * 400.0 * crate::synth::ANGULAR_PITCH_RAD);
        for f in &cal.faces {
            assert!(f.rms_distance < 1e-9);
        }
    }

    #[test]
    fn sphere_cloud_is_rejected() {
        let mut pts = Vec::new();
        let r = 30.0;
        let n = 60;
        for i in 0..n {
            for j in 0..(2 * n) {
                let theta = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                let phi = std::f64::consts::PI * j as f64 / n as f64;
                pts.push([
                    r * theta.sin() * phi.cos(),
                    r * theta.sin() * phi.sin(),
                    r * theta.cos(),
                ]);
            }
        }
        let cloud = PointCloud::new(pts);
        assert!(matches!(
            estimate_cube_edge(&cloud, &config()),
            Err(Error::Calibration(_))
        ));
    }
}
