use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use super::*;
use crate::marching::{Formulation, Materials, TermKind};
use crate::specfun::{lattice_shift, phi_hat_shifted, CylinderTable, HJKind};
use crate::tdkernels::{PotentialKind, Trace};

const DT: f64 = TAU / 100.0;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Small frequency off the cut, approaching zero along the diagonal.
fn near_zero(eps: f64) -> Complex64 {
    c(eps, eps) / 2f64.sqrt()
}

#[test]
fn sdot_series_vanishes_at_zero_for_all_orders() {
    let ctrl = SeriesControl::default();
    let sums = LatticeSums::compute(near_zero(1e-9), 1.0, DT, 60, ctrl).unwrap();
    for n in 0..=60 {
        assert!(zero_limit(HJKind::SDot, n, DT).is_zero(0.0));
        assert!(sums.get(HJKind::SDot, n).norm() < 1e-8, "n={n}");
    }
}

#[test]
fn d_plus_series_vanishes_at_zero_only_for_order_zero() {
    let ctrl = SeriesControl::default();
    let sums = LatticeSums::compute(near_zero(1e-9), 1.0, DT, 3, ctrl).unwrap();
    assert!(sums.get(HJKind::DPlusDtMinus, 0).norm() < 1e-8);
    for n in 1..=3 {
        let v = sums.get(HJKind::DPlusDtMinus, n);
        let ZeroLimit::Finite(lim) = zero_limit(HJKind::DPlusDtMinus, n, DT) else {
            panic!("finite limit expected")
        };
        assert!((v - lim).norm() < 1e-7, "n={n}: {v} vs {lim}");
        assert!(v.norm() > 1e-3);
    }
}

#[test]
fn zero_limits_match_small_frequency_evaluation() {
    let sums = LatticeSums::compute(near_zero(1e-7), 0.7, DT, 6, SeriesControl::default()).unwrap();
    let coarse = LatticeSums::compute(near_zero(1e-3), 0.7, DT, 6, SeriesControl::default()).unwrap();
    for kind in HJKind::ALL {
        for n in 0..=6 {
            let v = sums.get(kind, n);
            match zero_limit(kind, n, DT) {
                ZeroLimit::Finite(lim) => assert!((v - lim).norm() < 1e-5, "{kind} n={n}: {v} vs {lim}"),
                // logarithmic divergence at least
                ZeroLimit::Divergent => assert!(v.norm() > 1.8 * coarse.get(kind, n).norm(), "{kind} n={n}: {v}"),
            }
        }
    }
}

#[test]
fn bm_series_zero_limits() {
    assert!(bm_zero_limit(0, 1.0, DT, None).is_zero(0.0));
    for n in 1..=3 {
        assert!(!bm_zero_limit(n, 1.0, DT, None).is_zero(1e-8));
    }
    for n in 0..=1 {
        assert!(!bm_zero_limit(n, 1.0, DT, Some(1.0)).is_zero(1e-8));
    }
    let v = bm_series(0, near_zero(1e-9), 1.0, DT, SeriesControl::default()).unwrap();
    assert!(v.norm() < 1e-8);
    let v = augmented_bm_series(0, near_zero(1e-9), 1.0, DT, 1.0, SeriesControl::default()).unwrap();
    assert!(v.norm() > 1e-3);
}

#[test]
fn bm_series_matches_direct_bessel_sum() {
    let omega = c(13.7, -0.6);
    let cw = 0.8;
    let n = 4;
    let mut direct = Complex64::new(0.0, 0.0);
    for m in -50i64..=50 {
        let w = lattice_shift(omega, m, DT);
        let k = w / cw;
        let t = CylinderTable::new(n, k).unwrap();
        let h = t.h(n).to_complex().unwrap();
        let j = t.j(n).to_complex().unwrap();
        let dj = t.dj(n).to_complex().unwrap();
        direct += h * k * (dj - Complex64::i() * j) * phi_hat_shifted(omega, m, DT);
    }
    let got = bm_series(n, omega, cw, DT, SeriesControl::default()).unwrap();
    assert!((got - direct).norm() < 1e-12 * direct.norm(), "{got} vs {direct}");
}

#[test]
fn truncation_at_100_terms_is_converged() {
    let omega = c(10.0, -0.5);
    let a = mode_series(HJKind::S, 5, omega, 1.0, DT, SeriesControl::Fixed(100)).unwrap();
    let b = mode_series(HJKind::S, 5, omega, 1.0, DT, SeriesControl::Fixed(1000)).unwrap();
    assert!((a - b).norm() < 1e-6 * b.norm(), "{a} vs {b}");
}

#[test]
fn tail_tolerance_agrees_with_long_fixed_sum() {
    let omega = c(22.0, 0.3);
    let a = mode_series(HJKind::S, 3, omega, 1.0, DT, SeriesControl::TailTol(1e-10)).unwrap();
    let b = mode_series(HJKind::S, 3, omega, 1.0, DT, SeriesControl::Fixed(4000)).unwrap();
    assert!((a - b).norm() < 1e-7 * b.norm(), "{a} vs {b}");
    // the D symbols decay only like m^-2, so increments understate the tail
    let a = mode_series(HJKind::DPlusDtMinus, 3, omega, 1.0, DT, SeriesControl::TailTol(1e-9)).unwrap();
    let b = mode_series(HJKind::DPlusDtMinus, 3, omega, 1.0, DT, SeriesControl::Fixed(4000)).unwrap();
    assert!((a - b).norm() < 1e-4 * b.norm(), "{a} vs {b}");
}

#[test]
fn phi_sum_is_dt() {
    // sum over all m of phi_hat(omega_m) equals dt; the truncated sum is close
    let sums = LatticeSums::compute(c(17.0, -1.0), 1.0, DT, 0, SeriesControl::Fixed(2000)).unwrap();
    assert!((sums.phi_sum - DT).norm() < 1e-4 * DT);
}

#[test]
fn trace_jumps_equal_the_scaled_identity() {
    let sums = LatticeSums::compute(c(8.0, 0.4), 0.6, DT, 9, SeriesControl::default()).unwrap();
    for n in 0..=9 {
        let dp = term_symbol(TermKind::Potential(PotentialKind::D(Trace::Plus)), &sums, n).unwrap();
        let dm = term_symbol(TermKind::Potential(PotentialKind::D(Trace::Minus)), &sums, n).unwrap();
        let tp = term_symbol(TermKind::Potential(PotentialKind::DT(Trace::Plus)), &sums, n).unwrap();
        let tm = term_symbol(TermKind::Potential(PotentialKind::DT(Trace::Minus)), &sums, n).unwrap();
        let one = sums.constant(1.0);
        assert!((dp - dm - one).norm() < 1e-12 * one.norm(), "n={n}");
        assert!((tp - tm + one).norm() < 1e-12 * one.norm(), "n={n}");
    }
}

#[test]
fn modified_pmchwt_matches_displayed_matrix() {
    let mat = Materials::default_transmission();
    let (c1, c2) = (mat.speed(0), mat.speed(1));
    let (s1, s2) = (mat.s[0], mat.s[1]);
    let omega = c(12.0, -0.3);
    let n = 3;
    let ctrl = SeriesControl::default();
    let f = |kind, cw| mode_series(kind, n, omega, cw, DT, ctrl).unwrap();
    let (f1, f2, f3, f4) = (HJKind::SDot, HJKind::DPlusDtMinus, HJKind::DMinusDtPlus, HJKind::MOp);
    let want = DMatrix::from_row_slice(
        2,
        2,
        &[
            -(f(f3, c1) + f(f2, c2)),
            f(f1, c1) / s1 + f(f1, c2) / s2,
            -(s1 * f(f4, c1) + s2 * f(f4, c2)),
            f(f2, c1) + f(f3, c2),
        ],
    );
    let got = transmission_matrix(Formulation::PmchwtMod, n, omega, &mat, DT, ctrl).unwrap();
    assert!((&got - &want).norm() < 1e-12 * want.norm(), "{got} vs {want}");
}

/// `log2 |e(2 omega) / e(omega)|` for each entry.
fn entry_exponents(f: Formulation, n: usize, omega: Complex64) -> [f64; 4] {
    let mat = Materials::default_transmission();
    let a = transmission_matrix(f, n, omega, &mat, DT, SeriesControl::default()).unwrap();
    let b = transmission_matrix(f, n, 2.0 * omega, &mat, DT, SeriesControl::default()).unwrap();
    std::array::from_fn(|i| (b[(i / 2, i % 2)].norm() / a[(i / 2, i % 2)].norm()).log2())
}

#[test]
fn modified_pmchwt_small_frequency_scaling() {
    for n in 1..=3 {
        let p = entry_exponents(Formulation::PmchwtMod, n, c(0.01, -0.001));
        assert!(p[0] >= 1.2, "n={n} {p:?}");
        assert!((p[1] - 1.0).abs() <= 0.2, "n={n} {p:?}");
        assert!((p[2] + 1.0).abs() <= 0.2, "n={n} {p:?}");
        assert!(p[3] >= 1.2, "n={n} {p:?}");
    }
}

#[test]
fn modified_mueller_small_frequency_scaling() {
    let mat = Materials::default_transmission();
    for n in 1..=3 {
        let omega = c(0.01, -0.001);
        let a = transmission_matrix(Formulation::MuellerMod, n, omega, &mat, DT, SeriesControl::default()).unwrap();
        let p = entry_exponents(Formulation::MuellerMod, n, omega);
        assert!(p[0].abs() <= 0.2 && p[3].abs() <= 0.2, "n={n} {p:?}");
        assert!(a[(0, 1)].norm() < 0.1 * a[(0, 0)].norm(), "{a}");
        assert!(a[(1, 0)].norm() < 0.1 * a[(1, 1)].norm(), "{a}");
    }
}

#[test]
fn cut_proximity_is_rejected() {
    let err = mode_series(HJKind::S, 0, c(0.0, -0.5), 1.0, DT, SeriesControl::default());
    assert!(matches!(err, Err(crate::Error::CutProximity { .. })));
    let period = TAU / DT;
    let err = mode_series(HJKind::S, 0, c(period, -0.5), 1.0, DT, SeriesControl::default());
    assert!(err.is_err());
    // the right edge of the strip is not a cut
    assert!(mode_series(HJKind::S, 0, c(PI / DT, -0.5), 1.0, DT, SeriesControl::default()).is_ok());
}

#[test]
fn ordinary_hypersingular_formulations_have_no_series() {
    assert!(CircleModes::new(Formulation::Pmchwt, Materials::default_transmission(), DT, 5, SeriesControl::default()).is_err());
    assert!(CircleModes::new(Formulation::Bm, Materials::default_transmission(), DT, 5, SeriesControl::default()).is_err());
    assert!(CircleModes::new(Formulation::Standard, Materials::default_transmission(), DT, 5, SeriesControl::default()).is_ok());
}

#[test]
fn discrete_coefficients() {
    for p in 0..8 {
        assert!((v_coefficient(0, p, 8) - 1.0 / 8.0).norm() < 1e-16);
        assert_eq!(u_coefficient(p, 0, 8), Complex64::new(1.0, 0.0));
    }
    // V_l^p equals a direct midpoint-rule integral
    let (l, p, n) = (7i64, 3usize, 16usize);
    let h = TAU / n as f64;
    let start = h * (p + 1) as f64;
    let steps = 20000;
    let quad: Complex64 = (0..steps)
        .map(|i| {
            let psi = start + h * (i as f64 + 0.5) / steps as f64;
            (-Complex64::i() * l as f64 * psi).exp()
        })
        .sum::<Complex64>()
        * (h / steps as f64)
        / TAU;
    assert!((quad - v_coefficient(l, p, n)).norm() < 1e-10);
}

#[test]
fn discrete_operator_is_circulant_with_residue_eigenvalues() {
    let n = 100;
    let fam = DiscreteCircle::new(Formulation::Out2, Materials::unit(), DT, n, default_truncation(n), SeriesControl::default()).unwrap();
    let omega = c(9.0, -0.4);
    let a = fam.dense(omega).unwrap();
    for i in 0..n {
        for j in 0..n {
            let d = a[(i, j)] - a[((i + 1) % n, (j + 1) % n)];
            assert!(d.norm() < 1e-10 * a[(0, 0)].norm());
        }
    }
    let blocks = fam.eval_all(omega).unwrap();
    let h = TAU / n as f64;
    for q in [0usize, 1, 7, 50] {
        let v = nalgebra::DVector::from_fn(n, |p, _| (Complex64::i() * q as f64 * h * (p as f64 + 1.5)).exp());
        let av = &a * &v;
        let lambda = blocks[q][(0, 0)];
        assert!((&av - &v * lambda).norm() < 1e-8 * av.norm().max(lambda.norm()), "q={q}");
    }
    // dense eigenvalues through a Schur decomposition
    let eig = a.clone().schur().eigenvalues().unwrap();
    for q in 0..=n / 2 {
        let lambda = blocks[q][(0, 0)];
        let best = eig.iter().map(|e| (e - lambda).norm()).fold(f64::INFINITY, f64::min);
        assert!(best < 1e-8 * lambda.norm().max(1e-3), "q={q}");
    }
}

#[test]
fn discrete_transmission_blocks_match_dense_operator() {
    let n = 16;
    let fam = DiscreteCircle::new(
        Formulation::MuellerMod,
        Materials::default_transmission(),
        DT,
        n,
        default_truncation(n),
        SeriesControl::default(),
    )
    .unwrap();
    let omega = c(6.0, -0.2);
    let a = fam.dense(omega).unwrap();
    let blocks = fam.eval_all(omega).unwrap();
    let h = TAU / n as f64;
    for q in [0usize, 3, 8] {
        let e = nalgebra::DVector::from_fn(n, |p, _| (Complex64::i() * q as f64 * h * (p as f64 + 1.5)).exp());
        for col in 0..2 {
            let mut x = nalgebra::DVector::zeros(2 * n);
            x.rows_mut(col * n, n).copy_from(&e);
            let y = &a * &x;
            for row in 0..2 {
                let want = &e * blocks[q][(row, col)];
                assert!((y.rows(row * n, n) - want).norm() < 1e-8 * y.norm().max(1e-12));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn reflection_about_imaginary_axis(re in 0.2f64..49.0, im in -2.0f64..2.0, n in 0usize..30) {
        let omega = c(re, im);
        let mirror = c(-re, im);
        let a = LatticeSums::compute(omega, 0.735, DT, n, SeriesControl::default()).unwrap();
        let b = LatticeSums::compute(mirror, 0.735, DT, n, SeriesControl::default()).unwrap();
        for kind in HJKind::ALL {
            let (x, y) = (a.get(kind, n), b.get(kind, n));
            prop_assert!((x.norm() - y.norm()).abs() <= 1e-9 * x.norm().max(1e-300), "{} {} {}", kind, x, y);
        }
    }
}
