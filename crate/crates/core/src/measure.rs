//! Leaf length/width measurement: plane fit, projection, principal-axis
//! extents.
//!
//! Four estimators share the machinery. `plain` keeps the minimal-sample
//! RANSAC plane, `refined` adds the total-least-squares refit, `combined`
//! averages the two measurements, and `selected` takes length from the
//! plain variant and width from the refined one. All valid leaf points are
//! projected regardless of which points were fit inliers, so the variants
//! differ only through plane orientation.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{extract_leaf_points, PointCloud};
use crate::error::{Error, Result};
use crate::manifest::ScanManifest;
use crate::plane::{fit_plane_ransac, plane_basis, project_to_plane, RansacConfig};
use crate::scalar::{lit, Real};
use crate::{mask, ply};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Plain,
    Refined,
    Combined,
    Selected,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Plain => "plain",
            Method::Refined => "refined",
            Method::Combined => "combined",
            Method::Selected => "selected",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(Method::Plain),
            "refined" => Ok(Method::Refined),
            "combined" => Ok(Method::Combined),
            "selected" => Ok(Method::Selected),
            other => Err(format!(
                "unknown method '{other}' (expected plain, refined, combined or selected)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafMeasurement<S: Real> {
    pub leaf_id: String,
    /// Extent along the major principal axis, mm.
    pub length: S,
    /// Extent along the minor principal axis, mm.
    pub width: S,
    pub method: Method,
    /// Fit inliers over valid leaf points, in (0, 1].
    pub inlier_fraction: S,
    /// RMS point-to-plane distance of the fit inliers, mm.
    pub plane_rms: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtentConfig<S: Real> {
    /// Quantile trimmed off each end of the axis coordinate before taking
    /// the extent; 0 means plain min-max. Real masks leak background
    /// pixels, so a small trim is often needed on sensor data.
    pub trim_percentile: S,
    pub ransac: RansacConfig<S>,
}

impl<S: Real> Default for ExtentConfig<S> {
    fn default() -> Self {
        Self {
            trim_percentile: S::zero(),
            ransac: RansacConfig::default(),
        }
    }
}

/// Quantile with linear interpolation between order statistics of a sorted
/// slice.
fn quantile_sorted<S: Real>(sorted: &[S], q: S) -> S {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * lit::<S>((n - 1) as f64);
    let lo = pos.floor().to_f64_lossy() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lit::<S>(lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn extent<S: Real>(values: &mut [S], trim: S) -> S {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    if trim == S::zero() {
        return *values.last().unwrap() - values[0];
    }
    quantile_sorted(values, S::one() - trim) - quantile_sorted(values, trim)
}

/// Principal axes of 2D points about their centroid, then trimmed extents
/// along them. Returns (major extent, minor extent), swapped if needed so
/// the first is the larger.
fn principal_extents<S: Real>(coords: &[(S, S)], trim: S) -> Result<(S, S)> {
    // need at least 3 distinct projected points
    let mut distinct: Vec<(S, S)> = coords.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::DegenerateProjection);
    }

    let n = lit::<S>(coords.len() as f64);
    let mut cx = S::zero();
    let mut cy = S::zero();
    for &(a, b) in coords {
        cx = cx + a;
        cy = cy + b;
    }
    cx = cx / n;
    cy = cy / n;

    let mut sxx = S::zero();
    let mut sxy = S::zero();
    let mut syy = S::zero();
    for &(a, b) in coords {
        let dx = a - cx;
        let dy = b - cy;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }

    let half = lit::<S>(0.5);
    let mean = (sxx + syy) * half;
    let diff = (sxx - syy) * half;
    let disc = (diff * diff + sxy * sxy).sqrt();
    let l1 = mean + disc;
    let l2 = mean - disc;

    // near-circular scatter: axes are ill-defined, fall back to the plane
    // basis directions (u maps to (1,0) here) for determinism
    let scale = l1.abs().max(S::one());
    let major = if (l1 - l2).abs() < lit::<S>(1e-9) * scale {
        (S::one(), S::zero())
    } else if sxy.abs() > lit::<S>(1e-300) {
        // eigenvector of the larger eigenvalue; pick the better-conditioned form
        let v1 = (l1 - syy, sxy);
        let v2 = (sxy, l1 - sxx);
        let pick = if v1.0.abs() + v1.1.abs() >= v2.0.abs() + v2.1.abs() {
            v1
        } else {
            v2
        };
        let nn = (pick.0 * pick.0 + pick.1 * pick.1).sqrt();
        (pick.0 / nn, pick.1 / nn)
    } else if sxx >= syy {
        (S::one(), S::zero())
    } else {
        (S::zero(), S::one())
    };
    // sign convention: first nonzero component positive
    let major = if major.0 < S::zero() || (major.0 == S::zero() && major.1 < S::zero()) {
        (-major.0, -major.1)
    } else {
        major
    };
    let minor = (-major.1, major.0);
    let minor = if minor.0 < S::zero() || (minor.0 == S::zero() && minor.1 < S::zero()) {
        (-minor.0, -minor.1)
    } else {
        minor
    };

    let mut along_major: Vec<S> = coords
        .iter()
        .map(|&(a, b)| a * major.0 + b * major.1)
        .collect();
    let mut along_minor: Vec<S> = coords
        .iter()
        .map(|&(a, b)| a * minor.0 + b * minor.1)
        .collect();
    let e1 = extent(&mut along_major, trim);
    let e2 = extent(&mut along_minor, trim);
    if e2 > e1 {
        Ok((e2, e1))
    } else {
        Ok((e1, e2))
    }
}

fn measure_one_variant<S: Real>(
    leaf_id: &str,
    points: &PointCloud<S>,
    config: &ExtentConfig<S>,
    refine: bool,
    method: Method,
) -> Result<LeafMeasurement<S>> {
    let ransac = RansacConfig {
        refine,
        ..config.ransac
    };
    let plane = fit_plane_ransac(points, &ransac)?;
    let basis = plane_basis(&plane, points);
    let coords = project_to_plane(points, &basis);
    let (length, width) = principal_extents(&coords, config.trim_percentile)?;
    let inlier_fraction =
        lit::<S>(plane.inliers.len() as f64) / lit::<S>(points.valid_count() as f64);
    Ok(LeafMeasurement {
        leaf_id: leaf_id.to_string(),
        length,
        width,
        method,
        inlier_fraction,
        plane_rms: plane.rms_distance,
    })
}

/// Measure a single leaf's length and width from its 3D points.
pub fn measure_leaf<S: Real>(
    leaf_id: &str,
    leaf_points: &PointCloud<S>,
    config: &ExtentConfig<S>,
    method: Method,
) -> Result<LeafMeasurement<S>> {
    match method {
        Method::Plain => measure_one_variant(leaf_id, leaf_points, config, false, Method::Plain),
        Method::Refined => {
            measure_one_variant(leaf_id, leaf_points, config, true, Method::Refined)
        }
        Method::Combined => {
            let a = measure_one_variant(leaf_id, leaf_points, config, false, Method::Plain)?;
            let b = measure_one_variant(leaf_id, leaf_points, config, true, Method::Refined)?;
            combined_estimate(&a, &b)
        }
        Method::Selected => {
            let a = measure_one_variant(leaf_id, leaf_points, config, false, Method::Plain)?;
            let b = measure_one_variant(leaf_id, leaf_points, config, true, Method::Refined)?;
            let half = lit::<S>(0.5);
            let (mut length, mut width) = (a.length, b.width);
            if width > length {
                std::mem::swap(&mut length, &mut width);
            }
            Ok(LeafMeasurement {
                leaf_id: a.leaf_id,
                length,
                width,
                method: Method::Selected,
                inlier_fraction: (a.inlier_fraction + b.inlier_fraction) * half,
                plane_rms: (a.plane_rms + b.plane_rms) * half,
            })
        }
    }
}

/// Average a plain and a refined measurement of the same leaf.
pub fn combined_estimate<S: Real>(
    a: &LeafMeasurement<S>,
    b: &LeafMeasurement<S>,
) -> Result<LeafMeasurement<S>> {
    if a.method != Method::Plain {
        return Err(Error::MethodMismatch {
            expected: "plain".into(),
            got: a.method.to_string(),
        });
    }
    if b.method != Method::Refined {
        return Err(Error::MethodMismatch {
            expected: "refined".into(),
            got: b.method.to_string(),
        });
    }
    if a.leaf_id != b.leaf_id {
        return Err(Error::LeafIdMismatch {
            a: a.leaf_id.clone(),
            b: b.leaf_id.clone(),
        });
    }
    let half = lit::<S>(0.5);
    Ok(LeafMeasurement {
        leaf_id: a.leaf_id.clone(),
        length: (a.length + b.length) * half,
        width: (a.width + b.width) * half,
        method: Method::Combined,
        inlier_fraction: (a.inlier_fraction + b.inlier_fraction) * half,
        plane_rms: (a.plane_rms + b.plane_rms) * half,
    })
}

/// A leaf that could not be measured, with the reason.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SkipRecord {
    pub leaf_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult<S: Real> {
    pub measurements: Vec<LeafMeasurement<S>>,
    pub skips: Vec<SkipRecord>,
}

/// Measure every leaf in a scan manifest. Cloud load failures abort;
/// per-leaf parse and geometry failures become skip records. Output order
/// follows the manifest regardless of parallel execution.
pub fn measure_scan<S: Real>(
    manifest: &ScanManifest,
    base_dir: &Path,
    config: &ExtentConfig<S>,
    method: Method,
) -> Result<ScanResult<S>> {
    let cloud_path = ScanManifest::resolve(base_dir, &manifest.cloud);
    let cloud_bytes = std::fs::read(&cloud_path)?;
    let cloud: PointCloud<S> = ply::parse_ply(&cloud_bytes)?;
    if cloud.grid().is_none() {
        return Err(Error::MissingGrid);
    }

    let mask_bytes: Vec<Vec<u8>> = manifest
        .masks
        .iter()
        .map(|entry| std::fs::read(ScanManifest::resolve(base_dir, &entry.path)))
        .collect::<std::io::Result<_>>()?;

    let results: Vec<std::result::Result<LeafMeasurement<S>, SkipRecord>> = manifest
        .masks
        .par_iter()
        .zip(mask_bytes.par_iter())
        .map(|(entry, bytes)| {
            let run = || -> Result<LeafMeasurement<S>> {
                let mask = mask::parse_mask(bytes, &entry.leaf_id)?;
                let points = extract_leaf_points(&cloud, &mask)?;
                measure_leaf(&entry.leaf_id, &points, config, method)
            };
            run().map_err(|e| SkipRecord {
                leaf_id: entry.leaf_id.clone(),
                error: e.to_string(),
            })
        })
        .collect();

    let mut out = ScanResult {
        measurements: Vec::new(),
        skips: Vec::new(),
    };
    for r in results {
        match r {
            Ok(m) => out.measurements.push(m),
            Err(s) => out.skips.push(s),
        }
    }
    Ok(out)
}

/// CSV with header `leaf_id,method,length_mm,width_mm,inlier_fraction,plane_rms`.
pub fn measurements_to_csv<S: Real>(measurements: &[LeafMeasurement<S>]) -> String {
    let mut out = String::from("leaf_id,method,length_mm,width_mm,inlier_fraction,plane_rms\n");
    for m in measurements {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            m.leaf_id, m.method, m.length, m.width, m.inlier_fraction, m.plane_rms
        ));
    }
    out
}

pub fn measurements_from_csv(text: &str) -> Result<Vec<LeafMeasurement<f64>>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::Csv("empty file".into()))?;
    let expected = "leaf_id,method,length_mm,width_mm,inlier_fraction,plane_rms";
    if header.trim() != expected {
        return Err(Error::Csv(format!(
            "bad header '{header}', expected '{expected}'"
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(Error::Csv(format!(
                "row {}: expected 6 fields, found {}",
                i + 2,
                fields.len()
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| Error::Csv(format!("row {}: bad {what} '{s}'", i + 2)))
        };
        out.push(LeafMeasurement {
            leaf_id: fields[0].trim().to_string(),
            method: fields[1]
                .trim()
                .parse()
                .map_err(|e: String| Error::Csv(format!("row {}: {e}", i + 2)))?,
            length: num(fields[2], "length")?,
            width: num(fields[3], "width")?,
            inlier_fraction: num(fields[4], "inlier_fraction")?,
            plane_rms: num(fields[5], "plane_rms")?,
        });
    }
    Ok(out)
}
