use num_complex::Complex64;
use proptest::prelude::*;

use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Direct power series for `J_n`; only trustworthy for small `|z|`.
fn j_series(n: usize, z: Complex64) -> Complex64 {
    let half = z / 2.0;
    let mut term = Complex64::new(1.0, 0.0);
    for k in 1..=n {
        term *= half / k as f64;
    }
    let mut sum = term;
    let q = -half * half;
    for k in 1..200 {
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    sum
}

fn j0_root_by_bisection() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if j_series(0, c(lo, 0.0)).re * j_series(0, c(mid, 0.0)).re <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

#[test]
fn j_at_origin() {
    assert_eq!(bessel_j(0, c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
    assert_eq!(bessel_j(1, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
}

#[test]
fn j0_vanishes_at_first_root() {
    let root = j0_root_by_bisection();
    assert!((root - 2.404825557695773).abs() < 1e-14);
    assert!(bessel_j(0, c(2.404825557695773, 0.0)).unwrap().norm() < 1e-10);
}

#[test]
fn j_matches_power_series_for_small_arguments() {
    for &z in &[c(0.5, 0.2), c(-1.3, 0.7), c(2.2, -1.9), c(0.01, 0.0), c(-2.9, -0.4)] {
        for n in [0usize, 1, 2, 7, 20, 45] {
            let got = bessel_j(n, z).unwrap();
            let want = j_series(n, z);
            assert!(rel(got, want) < 1e-12, "n={n} z={z}: {got} vs {want}");
        }
    }
}

#[test]
fn cut_is_continuous_across_negative_real_axis() {
    let up = hankel1_cut(0, c(-5.0, 1e-8)).unwrap();
    let down = hankel1_cut(0, c(-5.0, -1e-8)).unwrap();
    assert!((up - down).norm() <= 1e-6, "{up} vs {down}");
    // the principal branch would jump by 2 J_0(5) here
    assert!(2.0 * bessel_j(0, c(5.0, 0.0)).unwrap().norm() > 0.1);
}

#[test]
fn cut_derivative_is_continuous() {
    for &x in &[-3.0, -7.0] {
        for n in 0..=5 {
            let h = 1e-5;
            let d_up = (hankel1_cut(n, c(x + h, 1e-9)).unwrap()
                - hankel1_cut(n, c(x - h, 1e-9)).unwrap())
                / (2.0 * h);
            let d_down = (hankel1_cut(n, c(x + h, -1e-9)).unwrap()
                - hankel1_cut(n, c(x - h, -1e-9)).unwrap())
                / (2.0 * h);
            assert!((d_up - d_down).norm() < 1e-6, "x={x} n={n}");
            let exact = hankel1_cut_deriv(n, c(x, -1e-9)).unwrap();
            assert!((d_down - exact).norm() < 1e-6);
        }
    }
}

#[test]
fn wronskian_holds_on_every_sheet() {
    for &z in &[c(3.0, 0.5), c(-3.0, -0.5), c(3.0, -0.5), c(-40.0, -2.0), c(0.02, -0.01)] {
        for n in [0usize, 1, 5, 300] {
            let t = CylinderTable::new(n, z).unwrap();
            let w = (t.h(n) * t.dj(n)).sub(t.dh(n) * t.j(n)).to_complex().unwrap();
            let want = -2.0 * Complex64::i() / (std::f64::consts::PI * z);
            assert!(rel(w, want) < 1e-10, "n={n} z={z}: {w}");
        }
    }
}

#[test]
fn first_quadrant_is_principal() {
    // H_0(i) = (2 / (i pi)) K_0(1), K_0(1) = 0.42102443824070833
    let h = hankel1_cut(0, c(0.0, 1.0)).unwrap();
    let want = 2.0 / (Complex64::i() * std::f64::consts::PI) * 0.421_024_438_240_708_3;
    assert!(rel(h, want) < 1e-13, "{h}");
}

#[test]
fn cut_and_origin_are_rejected() {
    assert!(matches!(hankel1_cut(0, c(0.0, -2.0)), Err(crate::Error::OnBranchCut { .. })));
    assert!(hankel1_cut(3, c(0.0, 0.0)).is_err());
    assert!(hj_product(HJKind::MOp, 1, c(0.0, 0.0), 1.0).is_err());
}

#[derive(serde::Deserialize)]
struct OracleRow {
    n: usize,
    z: [f64; 2],
    j: (f64, f64, i64),
    h: (f64, f64, i64),
    hj: [f64; 2],
    h_dj: [f64; 2],
    dh_j: [f64; 2],
    dh_dj: [f64; 2],
}

#[derive(serde::Deserialize)]
struct Oracle {
    rows: Vec<OracleRow>,
}

/// Relative distance between a scaled value and `mant * 10^exp10`.
fn scaled_rel(ours: Scaled, (re, im, e10): (f64, f64, i64)) -> f64 {
    let want = c(re, im);
    if ours.is_zero() {
        return if want.norm() == 0.0 { 0.0 } else { 1.0 };
    }
    let shift = ours.exponent() as f64 * std::f64::consts::LN_2 - e10 as f64 * std::f64::consts::LN_10;
    (ours.mantissa() * shift.exp() / want - 1.0).norm()
}

#[test]
fn agrees_with_high_precision_oracle() {
    let oracle: Oracle =
        serde_json::from_str(include_str!("../../tests/fixtures/bessel_oracle.json")).unwrap();
    assert!(oracle.rows.len() > 100);
    for row in &oracle.rows {
        let z = c(row.z[0], row.z[1]);
        let t = CylinderTable::new(row.n, z).unwrap();
        let ej = scaled_rel(t.j(row.n), row.j);
        let eh = scaled_rel(t.h(row.n), row.h);
        // Neumann-series Hankel values lose about exp(2 Im z) to cancellation
        let htol = 1e-12 * (2.0 * z.im.abs()).exp().max(1.0) * 10.0;
        assert!(ej < 1e-11, "J_{}({z}): rel {ej:e}", row.n);
        assert!(eh < htol.max(1e-11), "H_{}({z}): rel {eh:e}", row.n);
        let p = ModeProducts::new(row.n, z).unwrap();
        for (got, want, what) in [
            (p.hj[row.n], row.hj, "HJ"),
            (p.h_dj[row.n], row.h_dj, "HJ'"),
            (p.dh_j[row.n], row.dh_j, "H'J"),
            (p.dh_dj[row.n], row.dh_dj, "H'J'"),
        ] {
            let want = c(want[0], want[1]);
            let tol = htol.max(1e-11);
            assert!(rel(got, want) < tol, "{what} n={} z={z}: {got} vs {want}", row.n);
        }
    }
}

#[test]
fn m_symbol_matches_direct_evaluation_at_low_order() {
    let omega = c(0.3, 0.1);
    let got = hj_product(HJKind::MOp, 1, omega, 1.0).unwrap();
    let h0 = hankel1_cut(0, omega).unwrap();
    let h1 = hankel1_cut(1, omega).unwrap();
    let j0 = bessel_j(0, omega).unwrap();
    let j1 = bessel_j(1, omega).unwrap();
    let dh = h0 - h1 / omega;
    let dj = j0 - j1 / omega;
    let direct = -(omega * omega) * dh * dj / (Complex64::i() * omega);
    assert!(got.is_finite());
    assert!(rel(got, direct) < 1e-12, "{got} vs {direct}");
}

#[test]
fn s_symbol_vanishes_at_j0_zero() {
    let v = hj_product(HJKind::S, 0, c(2.404825557695773, 0.0), 1.0).unwrap();
    assert!(v.norm() < 1e-9);
}

#[test]
fn large_order_products_stay_finite() {
    for &k in &[c(1e-3, -1e-4), c(0.4, 0.0), c(9000.0, -2.0), c(-50.0, -1.0)] {
        let p = ModeProducts::new(2000, k).unwrap();
        for n in [0, 500, 2000] {
            for v in [p.hj[n], p.h_dj[n], p.dh_j[n], p.dh_dj[n]] {
                assert!(v.is_finite(), "n={n} k={k}");
            }
        }
    }
}

#[test]
fn phi_hat_examples() {
    let dt = 2.0 * std::f64::consts::PI / 100.0;
    assert_eq!(phi_hat(c(0.0, 0.0), dt), c(dt, 0.0));
    let w = 2.0 * std::f64::consts::PI / dt;
    assert!(phi_hat(c(w, 0.0), dt).norm() < 1e-15);
    let half = std::f64::consts::PI / dt;
    let want = 4.0 * dt / std::f64::consts::PI.powi(2);
    assert!((phi_hat(c(half, 0.0), dt) - want).norm() < 1e-15);
}

#[test]
fn phi_hat_tends_to_dt() {
    let omega = c(3.0, -0.4);
    let errs: Vec<f64> = [1e-2, 1e-4, 1e-6]
        .iter()
        .map(|&dt| (phi_hat(omega, dt) / dt - 1.0).norm())
        .collect();
    assert!(errs[1] < errs[0] * 1e-3 && errs[2] < errs[1] * 1e-3 + 1e-15, "{errs:?}");
}

#[test]
fn phi_hat_series_branch_is_continuous() {
    let dt = 0.1;
    let below = phi_hat(c(0.99e-2, 0.0), dt);
    let above = phi_hat(c(1.01e-2, 0.0), dt);
    assert!((below - above).norm() < 1e-9);
}

proptest! {
    #[test]
    fn sdot_is_minus_i_omega_times_s(re in 0.05f64..50.0, im in -2.0f64..2.0, n in 0usize..40) {
        let omega = c(re, im);
        let s = hj_product(HJKind::S, n, omega, 0.7).unwrap();
        let sd = hj_product(HJKind::SDot, n, omega, 0.7).unwrap();
        prop_assert_eq!(sd, -Complex64::i() * omega * s);
    }

    #[test]
    fn shifted_phi_hat_matches_direct(re in 0.1f64..49.0, im in -2.0f64..2.0, m in -50i64..50) {
        let dt = 2.0 * std::f64::consts::PI / 100.0;
        let omega = c(re, im);
        let direct = phi_hat(lattice_shift(omega, m, dt), dt);
        let shared = phi_hat_shifted(omega, m, dt);
        // the direct form loses digits to the large argument of sin
        prop_assert!((direct - shared).norm() <= 1e-10 * direct.norm().max(1e-12));
    }

    #[test]
    fn j_reflection_symmetry(re in -30.0f64..30.0, im in -5.0f64..5.0, n in 0usize..60) {
        let z = c(re, im);
        let a = bessel_j(n, z).unwrap();
        let b = bessel_j(n, -z).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - sign * b).norm() <= 1e-12 * a.norm().max(1e-300));
        prop_assert!((bessel_j(n, z.conj()).unwrap() - a.conj()).norm() <= 1e-12 * a.norm().max(1e-300));
    }
}
