//! Property tests for the structural invariants: serialization identity,
//! grid correspondence, projection isometry, metric symmetries.

use proptest::prelude::*;

use leafmetric::cloud::{extract_leaf_points, LeafMask, PointCloud};
use leafmetric::eval::{error_percentage, r_squared, rmse};
use leafmetric::measure::{measure_leaf, ExtentConfig, Method};
use leafmetric::plane::{fit_plane_ransac, plane_basis, project_to_plane, RansacConfig};
use leafmetric::ply::{parse_ply, write_ply, PlyFormat};

fn finite_coord() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        -1.0..1.0f64,
        Just(0.0),
        Just(-0.0),
        Just(1e-300),
    ]
}

fn point() -> impl Strategy<Value = [f64; 3]> {
    [finite_coord(), finite_coord(), finite_coord()]
}

fn ransac_config(seed: u64) -> RansacConfig<f64> {
    RansacConfig {
        iterations: 100,
        distance_threshold: 2.0,
        min_inliers: 3,
        seed,
        refine: false,
    }
}

proptest! {
    #[test]
    fn ply_write_parse_identity(
        pts in prop::collection::vec(point(), 1..60),
        binary in any::<bool>(),
        with_colors in any::<bool>(),
    ) {
        let mut cloud = PointCloud::new(pts.clone());
        if with_colors {
            let colors: Vec<[u8; 3]> = (0..pts.len())
                .map(|i| [(i % 256) as u8, (i * 7 % 256) as u8, (i * 13 % 256) as u8])
                .collect();
            cloud = cloud.with_colors(colors);
        }
        let format = if binary { PlyFormat::BinaryLittleEndian } else { PlyFormat::Ascii };
        let back: PointCloud<f64> = parse_ply(&write_ply(&cloud, format)).unwrap();
        prop_assert_eq!(back.points(), cloud.points());
        prop_assert_eq!(back.colors(), cloud.colors());
    }

    #[test]
    fn extracted_points_follow_the_grid_formula(
        w in 1u32..12,
        h in 1u32..12,
        pix_seed in any::<u64>(),
    ) {
        let n = (w * h) as usize;
        // deterministic pseudo-cloud with some NaN holes
        let pts: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                if (i as u64).wrapping_mul(pix_seed | 1) % 5 == 0 {
                    [f64::NAN; 3]
                } else {
                    [i as f64, (i * 2) as f64, (i * 3) as f64]
                }
            })
            .collect();
        let cloud = PointCloud::new(pts.clone()).with_grid(w, h);
        let pixels: Vec<(u32, u32)> = (0..n)
            .filter(|i| (*i as u64).wrapping_mul(3) % 2 == 0)
            .map(|i| (i as u32 / w, i as u32 % w))
            .collect();
        prop_assume!(!pixels.is_empty());
        let mask = LeafMask::new(w, h, pixels.clone(), "p".into()).unwrap();

        let expected: Vec<[f64; 3]> = pixels
            .iter()
            .map(|&(r, c)| pts[(r * w + c) as usize])
            .filter(|p| p.iter().all(|v| v.is_finite()))
            .collect();
        match extract_leaf_points(&cloud, &mask) {
            Ok(leaf) => {
                prop_assert_eq!(leaf.points(), expected.as_slice());
                prop_assert!(leaf.len() <= mask.pixels().len());
            }
            Err(_) => prop_assert!(expected.len() < 3),
        }
    }

    #[test]
    fn plane_projection_is_isometric(
        coords in prop::collection::vec((-50.0..50.0f64, -50.0..50.0f64), 4..30),
        nx in -1.0..1.0f64,
        ny in -1.0..1.0f64,
        seed in any::<u64>(),
    ) {
        // coplanar points on an arbitrary plane
        let nz = 1.0;
        let norm = (nx * nx + ny * ny + nz * nz).sqrt();
        let n = [nx / norm, ny / norm, nz / norm];
        let a = [1.0, 0.0, 0.0];
        let un = {
            let c = [
                n[1] * a[2] - n[2] * a[1],
                n[2] * a[0] - n[0] * a[2],
                n[0] * a[1] - n[1] * a[0],
            ];
            let m = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            [c[0] / m, c[1] / m, c[2] / m]
        };
        let vn = [
            n[1] * un[2] - n[2] * un[1],
            n[2] * un[0] - n[0] * un[2],
            n[0] * un[1] - n[1] * un[0],
        ];
        let pts: Vec<[f64; 3]> = coords
            .iter()
            .map(|&(s, t)| {
                [
                    7.0 * n[0] + s * un[0] + t * vn[0],
                    7.0 * n[1] + s * un[1] + t * vn[1],
                    7.0 * n[2] + s * un[2] + t * vn[2],
                ]
            })
            .collect();
        let mut dedup = pts.clone();
        dedup.sort_by(|p, q| p.partial_cmp(q).unwrap());
        dedup.dedup_by(|p, q| {
            p.iter().zip(q.iter()).all(|(x, y)| (x - y).abs() < 1e-9)
        });
        prop_assume!(dedup.len() >= 3);

        let cloud = PointCloud::new(pts.clone());
        let plane = fit_plane_ransac(&cloud, &ransac_config(seed)).unwrap();
        let basis = plane_basis(&plane, &cloud);
        let proj = project_to_plane(&cloud, &basis);
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d3 = ((pts[i][0] - pts[j][0]).powi(2)
                    + (pts[i][1] - pts[j][1]).powi(2)
                    + (pts[i][2] - pts[j][2]).powi(2))
                .sqrt();
                let d2 = ((proj[i].0 - proj[j].0).powi(2) + (proj[i].1 - proj[j].1).powi(2)).sqrt();
                prop_assert!((d3 - d2).abs() < 1e-7 * (1.0 + d3), "pair {i},{j}: {d3} vs {d2}");
            }
        }
    }

    #[test]
    fn metrics_are_jointly_permutation_invariant(
        pairs in prop::collection::vec((1.0..100.0f64, 1.0..100.0f64), 3..20),
        shuffle_seed in any::<u64>(),
    ) {
        let pred: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        // deterministic permutation from the seed
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.sort_by_key(|&i| (i as u64).wrapping_mul(shuffle_seed | 1).rotate_left(17));
        let pred_p: Vec<f64> = order.iter().map(|&i| pred[i]).collect();
        let truth_p: Vec<f64> = order.iter().map(|&i| truth[i]).collect();

        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs());
        prop_assert!(close(rmse(&pred, &truth).unwrap(), rmse(&pred_p, &truth_p).unwrap()));
        prop_assert!(close(
            error_percentage(&pred, &truth).unwrap(),
            error_percentage(&pred_p, &truth_p).unwrap()
        ));
        match (r_squared(&pred, &truth), r_squared(&pred_p, &truth_p)) {
            (Ok(a), Ok(b)) => prop_assert!(close(a, b)),
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "r_squared disagreed on error"),
        }
    }

    #[test]
    fn rmse_squared_is_ss_res_over_n(
        pairs in prop::collection::vec((1.0..100.0f64, 1.0..100.0f64), 2..20),
    ) {
        let pred: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let r = rmse(&pred, &truth).unwrap();
        let ss_res: f64 = pred.iter().zip(&truth).map(|(p, t)| (p - t) * (p - t)).sum();
        prop_assert!((r * r * pred.len() as f64 - ss_res).abs() <= 1e-12 * (1.0 + ss_res));
    }

    #[test]
    fn scaling_about_centroid_scales_extents(
        scale in 0.1..5.0f64,
        seed in 0u64..50,
    ) {
        let spec = leafmetric::synth::LeafSpec {
            seed,
            ..leafmetric::synth::LeafSpec::flat(60.0, 35.0)
        };
        let (cloud, _) = leafmetric::synth::generate_leaf(&spec).unwrap();
        let pts = cloud.points();
        let n = pts.len() as f64;
        let mut c = [0.0; 3];
        for p in pts {
            for k in 0..3 {
                c[k] += p[k] / n;
            }
        }
        let scaled: Vec<[f64; 3]> = pts
            .iter()
            .map(|p| [0, 1, 2].map(|k| c[k] + scale * (p[k] - c[k])))
            .collect();
        let config = ExtentConfig {
            trim_percentile: 0.0,
            ransac: ransac_config(1),
        };
        let m0 = measure_leaf("x", &cloud, &config, Method::Plain).unwrap();
        let m1 = measure_leaf("x", &PointCloud::new(scaled), &config, Method::Plain).unwrap();
        prop_assert!((m1.length - scale * m0.length).abs() < 1e-9 * (1.0 + m0.length));
        prop_assert!((m1.width - scale * m0.width).abs() < 1e-9 * (1.0 + m0.width));
        prop_assert!(m1.length >= m1.width);
    }
}
