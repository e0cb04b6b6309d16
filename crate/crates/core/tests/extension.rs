use std::sync::Arc;

use fracmin_core::extension::{
    calibrate_samples, constrained_extension_solve, form_energy, kernel_constant, poisson_extension, weighted_energy,
    z_levels, CalibrationParams, ExtensionField, ExtensionMesh,
};
use fracmin_core::grid::{Domain, Exterior, IndicatorSet};
use fracmin_core::FracError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

fn dom(n: usize, h: f64) -> Arc<Domain> {
    Arc::new(Domain::ball(n, 1.0, h, 2.0).unwrap())
}

fn half_space(d: &Arc<Domain>) -> IndicatorSet {
    IndicatorSet::from_exterior(d.clone(), Exterior::half_space([1.0, 0.0], 0.0))
}

fn mesh(d: &Arc<Domain>, sigma: f64, sub: usize) -> Arc<ExtensionMesh> {
    Arc::new(ExtensionMesh::new(d.clone(), sigma, sub).unwrap())
}

/// `∫ sign(y) P(x − y, z) dy` with `y − x = z sinh t`, which turns the
/// integrand into `c̃ cosh(t)^{−σ}`; midpoint rule with 10⁶ points split
/// at the sign change.
fn half_line_oracle(x: f64, z: f64, sigma: f64) -> f64 {
    let c = gamma(0.5 * (1.0 + sigma)) / (std::f64::consts::PI.sqrt() * gamma(0.5 * sigma));
    let t0 = (-x / z).asinh();
    let midpoint = |a: f64, b: f64| {
        let m = 500_000;
        let dt = (b - a) / m as f64;
        (0..m).map(|i| (a + (i as f64 + 0.5) * dt).cosh().powf(-sigma)).sum::<f64>() * dt
    };
    c * (midpoint(t0, 120.0) - midpoint(-120.0, t0))
}

#[test]
fn half_space_is_odd_in_x() {
    for n in [1, 2] {
        let d = dom(n, 0.125);
        let m = mesh(&d, 0.5, 2);
        let u = poisson_extension(&half_space(&d), &m).unwrap();
        let nx = m.nx();
        for k in 0..m.z().len() {
            for iy in 0..m.ny() {
                for ix in 0..nx {
                    let a = u.get(ix, iy, k);
                    let b = u.get(nx - 1 - ix, iy, k);
                    assert!((a + b).abs() < 1e-7, "n={n} k={k}: {a} {b}");
                }
            }
        }
    }
}

#[test]
fn all_inside_gives_one() {
    for n in [1, 2] {
        let d = dom(n, 0.125);
        let m = mesh(&d, 0.4, 1);
        let e = IndicatorSet::from_exterior(d.clone(), Exterior::AllInside);
        let u = poisson_extension(&e, &m).unwrap();
        for &v in u.values() {
            assert!((v - 1.0).abs() < 1e-8, "n={n}: {v}");
        }
    }
}

#[test]
fn one_dimensional_profile_matches_quadrature() {
    let sigma = 0.5;
    let d = dom(1, 1.0 / 16.0);
    let m = mesh(&d, sigma, 4);
    let u = poisson_extension(&half_space(&d), &m).unwrap();
    let ix = (0..m.nx()).min_by(|&a, &b| (m.coord(a) - 0.5).abs().total_cmp(&(m.coord(b) - 0.5).abs())).unwrap();
    let k = (0..m.z().len()).min_by(|&a, &b| (m.z()[a] - 0.5).abs().total_cmp(&(m.z()[b] - 0.5).abs())).unwrap();
    let (x, z) = (m.coord(ix), m.z()[k]);
    assert!((x - 0.5).abs() < 0.01 && (z - 0.5).abs() < 0.06);
    let oracle = half_line_oracle(x, z, sigma);
    let got = u.get(ix, 0, k);
    assert!((got - oracle).abs() < 1e-7, "{got} vs {oracle}");
}

#[test]
fn one_dimensional_profile_is_monotone() {
    let d = dom(1, 1.0 / 16.0);
    let m = mesh(&d, 0.3, 2);
    let u = poisson_extension(&half_space(&d), &m).unwrap();
    for k in 1..m.z().len() {
        for ix in 1..m.nx() {
            assert!(u.get(ix, 0, k) > u.get(ix - 1, 0, k), "k={k} ix={ix}");
        }
    }
}

#[test]
fn maximum_principle_on_random_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [1, 2] {
        let d = dom(n, 0.125);
        let m = mesh(&d, 0.6, 1);
        let mut e = IndicatorSet::from_exterior(d.clone(), Exterior::AllOutside);
        for &c in d.omega() {
            e.set_phase(c, if rng.gen_bool(0.5) { 1 } else { -1 }).unwrap();
        }
        let u = poisson_extension(&e, &m).unwrap();
        for (idx, &v) in u.values().iter().enumerate() {
            let (_, _, k) = m.node(idx);
            if k == 0 {
                assert!(v == 1.0 || v == -1.0);
            } else {
                assert!(v.abs() < 1.0, "n={n}: {v}");
            }
        }
    }
}

#[test]
fn trace_is_approached_away_from_the_interface() {
    let d = dom(1, 1.0 / 16.0);
    let e = half_space(&d);
    let mut gaps = Vec::new();
    for z_min in [1.0 / 64.0, 1.0 / 256.0, 1.0 / 1024.0] {
        let levels = z_levels(z_min, 1.2, 4.0).unwrap();
        let m = Arc::new(ExtensionMesh::with_levels(d.clone(), 0.5, 1, levels).unwrap());
        let u = poisson_extension(&e, &m).unwrap();
        let gap = (0..m.nx())
            .filter(|&ix| m.coord(ix).abs() >= 2.0 * d.h())
            .map(|ix| (u.get(ix, 0, 1) - u.get(ix, 0, 0)).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    // The gap closes like z_min^σ.
    for w in gaps.windows(2) {
        assert!((w[1] / w[0] - 0.25f64.powf(0.5)).abs() < 0.05, "{gaps:?}");
    }
}

#[test]
fn constant_field_has_zero_energy() {
    let d = dom(2, 0.125);
    let m = mesh(&d, 0.5, 1);
    let u = ExtensionField::constant(m, 0.7);
    assert_eq!(weighted_energy(&u, 1.0).unwrap(), 0.0);
    assert_eq!(form_energy(&u, 1.0).unwrap(), 0.0);
}

#[test]
fn region_larger_than_mesh_is_rejected() {
    let d = dom(1, 0.125);
    let u = ExtensionField::constant(mesh(&d, 0.5, 1), 0.0);
    assert!(matches!(weighted_energy(&u, 1.5), Err(FracError::RegionTooLarge(_))));
    assert!(matches!(weighted_energy(&u, 0.0), Err(FracError::RegionTooLarge(_))));
}

#[test]
fn invalid_kernel_parameters_are_rejected() {
    assert!(kernel_constant(1, 1.0).is_err());
    assert!(kernel_constant(3, 0.5).is_err());
    let c = kernel_constant(1, 0.5).unwrap();
    let expected = gamma(0.75) / (std::f64::consts::PI.sqrt() * gamma(0.25));
    assert!((c - expected).abs() < 1e-9 * expected);
}

#[test]
fn energy_is_stable_under_z_refinement() {
    let d = dom(1, 1.0 / 16.0);
    let e = half_space(&d);
    let he = d.h() / 4.0;
    let energy = |z_min: f64, ratio: f64| {
        let levels = z_levels(z_min, ratio, 4.0).unwrap();
        let m = Arc::new(ExtensionMesh::with_levels(d.clone(), 0.5, 4, levels).unwrap());
        weighted_energy(&poisson_extension(&e, &m).unwrap(), 1.0).unwrap()
    };
    let coarse = energy(he / 4.0, 1.2);
    let fine = energy(he / 8.0, 1.2f64.sqrt());
    assert!(((fine - coarse) / fine).abs() < 0.02, "{coarse} vs {fine}");
}

#[test]
fn half_space_energy_scales_homogeneously() {
    for (n, h, sub) in [(1, 1.0 / 32.0, 16), (2, 1.0 / 8.0, 2)] {
        let sigma = 0.5;
        let d = dom(n, h);
        let u = poisson_extension(&half_space(&d), &mesh(&d, sigma, sub)).unwrap();
        let e_half = weighted_energy(&u, 0.5).unwrap();
        let e_one = weighted_energy(&u, 1.0).unwrap();
        let slope = (e_one / e_half).ln() / 2f64.ln();
        let target = n as f64 - sigma;
        assert!(((slope - target) / target).abs() < 0.05, "n={n}: slope {slope}");
    }
}

#[test]
fn constrained_solve_is_minimal_and_idempotent() {
    let d = dom(1, 1.0 / 16.0);
    let m = mesh(&d, 0.5, 4);
    let e = half_space(&d);
    let u = poisson_extension(&e, &m).unwrap();
    let v = constrained_extension_solve(&e, &u, 1.0).unwrap();
    let ev = form_energy(&v, 1.0).unwrap();
    assert!(ev <= form_energy(&u, 1.0).unwrap() + 1e-9);
    let w = constrained_extension_solve(&e, &v, 1.0).unwrap();
    let drift = v.values().iter().zip(w.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-7, "{drift}");
    // The discrete minimizer stays close to the continuous extension.
    let gap = u.values().iter().zip(v.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap < 0.1, "{gap}");

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut comp = v.clone();
        for (idx, x) in comp.values_mut().iter_mut().enumerate() {
            let (ix, _, k) = m.node(idx);
            let r = m.coord(ix).hypot(m.z()[k]);
            if k > 0 && r < 1.0 {
                *x += 0.05 * (rng.gen::<f64>() - 0.5);
            }
        }
        assert!(form_energy(&comp, 1.0).unwrap() >= ev);
    }
}

#[test]
fn flipping_a_trace_cell_raises_the_energy() {
    for n in [1, 2] {
        let d = dom(n, 0.125);
        let m = mesh(&d, 0.5, 2);
        let e = half_space(&d);
        let u = poisson_extension(&e, &m).unwrap();
        let base = form_energy(&constrained_extension_solve(&e, &u, 1.0).unwrap(), 1.0).unwrap();
        let mut f = e.clone();
        f.set_phase(d.cell_at([-0.3, 0.1]), 1).unwrap();
        let flipped = form_energy(&constrained_extension_solve(&f, &u, 1.0).unwrap(), 1.0).unwrap();
        assert!(flipped > base, "n={n}: {flipped} vs {base}");
    }
}

#[test]
fn calibration_is_positive_and_deterministic() {
    let params = CalibrationParams {
        h: 1.0 / 16.0,
        sub: 4,
        radii: vec![1.0],
    };
    let a = calibrate_samples(1, 0.5, &params).unwrap();
    let b = calibrate_samples(1, 0.5, &params).unwrap();
    assert!(a.c_hat > 0.0);
    assert!(a.samples.iter().all(|s| s.delta_per > 0.0 && s.delta_energy > 0.0));
    assert_eq!(a.c_hat.to_bits(), b.c_hat.to_bits());
    assert_eq!(a, b);
}

#[test]
fn csv_export_lists_every_node() {
    for n in [1, 2] {
        let d = dom(n, 0.25);
        let m = mesh(&d, 0.5, 1);
        let u = ExtensionField::constant(m.clone(), 0.0);
        let csv = u.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), if n == 1 { "x,z,U" } else { "x,y,z,U" });
        assert_eq!(lines.count(), m.len());
    }
}
