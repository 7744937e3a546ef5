//! Robust plane estimation and planar projection.
//!
//! Two RANSAC variants are exposed through `RansacConfig::refine`:
//! `false` keeps the winning minimal-sample plane as-is, `true` refits it
//! by total least squares on the winning inlier set and re-scores once.
//! The random sample schedule is generated up-front from the seed, so
//! results are bit-identical whether iterations run sequentially or in
//! parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::vec3::{self, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneModel<S: Real> {
    /// Unit normal, oriented so its largest-magnitude component is positive.
    pub normal: Vec3<S>,
    /// Signed offset: normal . p = offset for points p on the plane.
    pub offset: S,
    /// Indices into the input cloud of points within the fit threshold.
    pub inliers: Vec<usize>,
    /// Root-mean-square point-to-plane distance over the inliers.
    pub rms_distance: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaneBasis<S: Real> {
    /// Centroid of the input points' projections onto the plane.
    pub origin: Vec3<S>,
    pub u: Vec3<S>,
    pub v: Vec3<S>,
    pub normal: Vec3<S>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RansacConfig<S: Real> {
    pub iterations: usize,
    pub distance_threshold: S,
    pub min_inliers: usize,
    pub seed: u64,
    pub refine: bool,
}

impl<S: Real> Default for RansacConfig<S> {
    fn default() -> Self {
        Self {
            iterations: 1000,
            distance_threshold: lit(2.0),
            min_inliers: 12,
            seed: 0,
            refine: false,
        }
    }
}

pub fn point_plane_distance<S: Real>(p: Vec3<S>, plane: &PlaneModel<S>) -> S {
    (vec3::dot(plane.normal, p) - plane.offset).abs()
}

struct Candidate<S: Real> {
    normal: Vec3<S>,
    offset: S,
    count: usize,
    sum_sq: S,
}

fn score_plane<S: Real>(
    normal: Vec3<S>,
    offset: S,
    points: &[Vec3<S>],
    valid: &[usize],
    threshold: S,
) -> (usize, S) {
    let mut count = 0usize;
    let mut sum_sq = S::zero();
    for &i in valid {
        let d = (vec3::dot(normal, points[i]) - offset).abs();
        if d <= threshold {
            count += 1;
            sum_sq = sum_sq + d * d;
        }
    }
    (count, sum_sq)
}

fn collect_inliers<S: Real>(
    normal: Vec3<S>,
    offset: S,
    points: &[Vec3<S>],
    valid: &[usize],
    threshold: S,
) -> (Vec<usize>, S) {
    let mut inliers = Vec::new();
    let mut sum_sq = S::zero();
    for &i in valid {
        let d = (vec3::dot(normal, points[i]) - offset).abs();
        if d <= threshold {
            inliers.push(i);
            sum_sq = sum_sq + d * d;
        }
    }
    let rms = if inliers.is_empty() {
        S::zero()
    } else {
        (sum_sq / lit(inliers.len() as f64)).sqrt()
    };
    (inliers, rms)
}

/// Total-least-squares plane through a point set: passes through the
/// centroid, normal is the scatter matrix's smallest-eigenvalue eigenvector.
/// Accumulation runs in f64 regardless of the scalar type.
pub fn fit_plane_tls<S: Real>(points: &[Vec3<S>], indices: &[usize]) -> (Vec3<S>, S) {
    let n = indices.len() as f64;
    let mut c = [0.0f64; 3];
    for &i in indices {
        for k in 0..3 {
            c[k] += points[i][k].to_f64_lossy();
        }
    }
    for v in &mut c {
        *v /= n;
    }
    let mut m = [[0.0f64; 3]; 3];
    for &i in indices {
        let d = [
            points[i][0].to_f64_lossy() - c[0],
            points[i][1].to_f64_lossy() - c[1],
            points[i][2].to_f64_lossy() - c[2],
        ];
        for a in 0..3 {
            for b in 0..3 {
                m[a][b] += d[a] * d[b];
            }
        }
    }
    let n64 = smallest_eigenvector(m);
    let normal = vec3::orient_largest_positive([
        S::from_f64_lossy(n64[0]),
        S::from_f64_lossy(n64[1]),
        S::from_f64_lossy(n64[2]),
    ]);
    let offset = vec3::dot(
        normal,
        [
            S::from_f64_lossy(c[0]),
            S::from_f64_lossy(c[1]),
            S::from_f64_lossy(c[2]),
        ],
    );
    (normal, offset)
}

/// Unit eigenvector of the smallest eigenvalue of a symmetric 3x3 matrix,
/// via the trigonometric eigenvalue formula plus row cross products.
fn smallest_eigenvector(a: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let lambda_min = if p1 < 1e-300 {
        // already diagonal
        let mut k = 0;
        for i in 1..3 {
            if a[i][i] < a[k][k] {
                k = i;
            }
        }
        let mut e = [0.0; 3];
        e[k] = 1.0;
        return e;
    } else {
        let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
        let p2 = (a[0][0] - q).powi(2)
            + (a[1][1] - q).powi(2)
            + (a[2][2] - q).powi(2)
            + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        let mut b = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i][j] = (a[i][j] - if i == j { q } else { 0.0 }) / p;
            }
        }
        let det_b = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1])
            - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
            + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
        let r = (det_b / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
    };

    let m = [
        [a[0][0] - lambda_min, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - lambda_min, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - lambda_min],
    ];
    let cands = [
        cross64(m[0], m[1]),
        cross64(m[0], m[2]),
        cross64(m[1], m[2]),
    ];
    let mut best = cands[0];
    let mut best_n = norm64(best);
    for c in &cands[1..] {
        let n = norm64(*c);
        if n > best_n {
            best = *c;
            best_n = n;
        }
    }
    if best_n < 1e-300 {
        return [0.0, 0.0, 1.0];
    }
    [best[0] / best_n, best[1] / best_n, best[2] / best_n]
}

fn cross64(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm64(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

pub fn fit_plane_ransac<S: Real>(
    cloud: &PointCloud<S>,
    config: &RansacConfig<S>,
) -> Result<PlaneModel<S>> {
    assert!(config.iterations >= 1, "iterations must be >= 1");
    assert!(
        config.distance_threshold > S::zero(),
        "distance_threshold must be positive"
    );
    assert!(config.min_inliers >= 3, "min_inliers must be >= 3");

    let valid = cloud.valid_indices();
    if valid.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: valid.len(),
        });
    }
    let points = cloud.points();

    // full sample schedule up-front, so parallel evaluation stays
    // bit-identical to sequential
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let schedule: Vec<[usize; 3]> = (0..config.iterations)
        .map(|_| {
            let picks = rand::seq::index::sample(&mut rng, valid.len(), 3);
            [valid[picks.index(0)], valid[picks.index(1)], valid[picks.index(2)]]
        })
        .collect();

    let threshold = config.distance_threshold;
    let candidates: Vec<Option<Candidate<S>>> = schedule
        .par_iter()
        .map(|&[i, j, k]| {
            let e1 = vec3::sub(points[j], points[i]);
            let e2 = vec3::sub(points[k], points[i]);
            let n = vec3::cross(e1, e2);
            let nn = vec3::norm(n);
            // collinear triple: consumes the iteration
            if nn < lit::<S>(1e-12) * vec3::norm(e1) * vec3::norm(e2) {
                return None;
            }
            let normal = vec3::orient_largest_positive(vec3::scale(n, S::one() / nn));
            let offset = vec3::dot(normal, points[i]);
            let (count, sum_sq) = score_plane(normal, offset, points, &valid, threshold);
            Some(Candidate {
                normal,
                offset,
                count,
                sum_sq,
            })
        })
        .collect();

    let mut best: Option<&Candidate<S>> = None;
    for cand in candidates.iter().flatten() {
        let better = match best {
            None => true,
            Some(b) => {
                cand.count > b.count
                    || (cand.count == b.count
                        && cand.count > 0
                        && cand.sum_sq < b.sum_sq)
            }
        };
        if better {
            best = Some(cand);
        }
    }
    let best = best.ok_or(Error::DegenerateSamples(config.iterations))?;
    if best.count < config.min_inliers {
        return Err(Error::BelowMinInliers {
            best: best.count,
            min: config.min_inliers,
        });
    }

    let (mut normal, mut offset) = (best.normal, best.offset);
    let (mut inliers, mut rms) = collect_inliers(normal, offset, points, &valid, threshold);
    if config.refine {
        let (n2, d2) = fit_plane_tls(points, &inliers);
        normal = n2;
        offset = d2;
        let (in2, rms2) = collect_inliers(normal, offset, points, &valid, threshold);
        inliers = in2;
        rms = rms2;
    }

    Ok(PlaneModel {
        normal,
        offset,
        inliers,
        rms_distance: rms,
    })
}

/// Orthonormal in-plane frame. `u` is the projection of the global axis
/// least parallel to the normal; `v = normal x u`, so (u, v, normal) is
/// right-handed. Origin is the centroid of the valid points' projections.
pub fn plane_basis<S: Real>(plane: &PlaneModel<S>, cloud: &PointCloud<S>) -> PlaneBasis<S> {
    let n = plane.normal;
    let mut k = 0;
    for i in 1..3 {
        if n[i].abs() < n[k].abs() {
            k = i;
        }
    }
    let mut e = [S::zero(); 3];
    e[k] = S::one();
    let u = vec3::normalize(vec3::sub(e, vec3::scale(n, vec3::dot(e, n))));
    let v = vec3::cross(n, u);

    let count = cloud.valid_count();
    let mut c = [S::zero(); 3];
    for p in cloud.valid_points() {
        c = vec3::add(c, p);
    }
    let c = vec3::scale(c, S::one() / lit(count as f64));
    let origin = vec3::sub(c, vec3::scale(n, vec3::dot(n, c) - plane.offset));

    PlaneBasis {
        origin,
        u,
        v,
        normal: n,
    }
}

/// 2D plane coordinates of each valid point, input order preserved.
pub fn project_to_plane<S: Real>(cloud: &PointCloud<S>, basis: &PlaneBasis<S>) -> Vec<(S, S)> {
    cloud
        .valid_points()
        .map(|p| {
            let d = vec3::sub(p, basis.origin);
            (vec3::dot(d, basis.u), vec3::dot(d, basis.v))
        })
        .collect()
}
