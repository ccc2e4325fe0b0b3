use nalgebra::DMatrix;
use num_complex::Complex64;

use super::*;
use crate::charfun::{CircleModes, FamilyMember, SeriesControl};
use crate::error::Result;
use crate::marching::{Formulation, Materials};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn scalar(f: impl Fn(Complex64) -> Complex64 + Sync) -> (usize, impl Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync) {
    (1, move |z| Ok(DMatrix::from_element(1, 1, f(z))))
}

/// Root of `J_0` by bisection on its power series.
fn j0_root_oracle() -> f64 {
    let j0 = |x: f64| {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..40 {
            term *= -(x * x / 4.0) / (k * k) as f64;
            sum += term;
        }
        sum
    };
    let (mut a, mut b) = (2.0, 3.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if j0(a) * j0(m) <= 0.0 {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[test]
fn quadratic_roots() {
    let f = scalar(|z| z * z - 1.0);
    let roots = ssm_solve(&f, &ContourBox::circle(c(0.0, 0.0), 2.0, 64), &SsmConfig::default()).unwrap();
    assert_eq!(roots.len(), 2);
    assert!((roots[0].omega - c(-1.0, 0.0)).norm() < 1e-10);
    assert!((roots[1].omega - c(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn diagonal_roots_and_vectors() {
    let f = (2, |z: Complex64| -> Result<DMatrix<Complex64>> {
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![z - 0.5, z + c(0.0, 0.3)])))
    });
    let roots = ssm_solve(&f, &ContourBox::circle(c(0.0, 0.0), 1.0, 64), &SsmConfig::default()).unwrap();
    assert_eq!(roots.len(), 2);
    let by = |target: Complex64| roots.iter().find(|r| (r.omega - target).norm() < 1e-10).expect("root found");
    let a = by(c(0.5, 0.0));
    let b = by(c(0.0, -0.3));
    assert!((a.vector[0].norm() - 1.0).abs() < 1e-10 && a.vector[1].norm() < 1e-10);
    assert!((b.vector[1].norm() - 1.0).abs() < 1e-10 && b.vector[0].norm() < 1e-10);
}

#[test]
fn bessel_product_root() {
    let oracle = j0_root_oracle();
    assert!((oracle - 2.404825557695773).abs() < 1e-14);
    let family = CircleModes::new(Formulation::Out1, Materials::unit(), 0.1, 0, SeriesControl::FrequencyDomain).unwrap();
    let member = FamilyMember {
        family: &family,
        index: 0,
    };
    let roots = ssm_solve(&member, &ContourBox::circle(c(2.4, 0.0), 0.5, 64), &SsmConfig::default()).unwrap();
    assert_eq!(roots.len(), 1);
    assert!((roots[0].omega - c(oracle, 0.0)).norm() < 1e-8);
}

#[test]
fn roots_near_the_contour_are_not_lost_or_invented() {
    // roots straddling the contour: only those inside are reported
    let f = scalar(|z| (z - 0.95) * (z - 1.05) * (z + c(0.0, 0.5)));
    let roots = ssm_solve(&f, &ContourBox::circle(c(0.0, 0.0), 1.0, 64), &SsmConfig::default()).unwrap();
    let got: Vec<Complex64> = roots.iter().map(|r| r.omega).collect();
    assert_eq!(got.len(), 2, "{got:?}");
    assert!(got.iter().any(|z| (z - 0.95).norm() < 1e-10));
    assert!(got.iter().any(|z| (z + c(0.0, 0.5)).norm() < 1e-10));
}

#[test]
fn double_root_is_counted_twice() {
    let f = scalar(|z| (z - 0.2) * (z - 0.2) * (z + 0.4));
    let roots = ssm_solve(&f, &ContourBox::circle(c(0.0, 0.0), 1.0, 64), &SsmConfig::default()).unwrap();
    let double = roots.iter().find(|r| (r.omega - 0.2).norm() < 1e-6).expect("double root");
    assert_eq!(double.multiplicity, 2);
    assert_eq!(roots.iter().map(|r| r.multiplicity).sum::<usize>(), 3);
}

#[test]
fn winding_number_counts_zeros() {
    let ell = ContourBox {
        center: c(0.1, -0.2),
        a: 1.5,
        b: 0.7,
        nodes: 64,
    };
    let f = |z: Complex64| -> Result<Vec<Complex64>> { Ok(vec![(z - 0.5) * (z + 1.0) * (z - c(0.0, 2.0)), z.exp()]) };
    assert_eq!(winding_numbers(&ell, &f, 32, 12).unwrap(), vec![2, 0]);
}

#[test]
fn cut_avoidance() {
    let rect = Rect {
        re0: 0.0,
        re1: 1.0,
        im0: -1.0,
        im1: 0.0,
    };
    assert!(!ContourBox::around(&rect, 0.2, 64).avoids_cuts(&[0.0], 1e-9));
    let away = Rect {
        re0: 2.0,
        re1: 3.0,
        im0: -1.0,
        im1: 0.0,
    };
    assert!(ContourBox::around(&away, 0.2, 64).avoids_cuts(&[0.0], 1e-9));
    // above the cut, a contour may straddle the line
    let above = Rect {
        re0: -0.5,
        re1: 0.5,
        im0: 2.0,
        im1: 3.0,
    };
    assert!(ContourBox::around(&above, 0.2, 64).avoids_cuts(&[0.0], 1e-9));
}

#[test]
fn dedup_keeps_the_better_residual() {
    let r = |re: f64, n: usize, residual: f64| Root {
        re_omega: re,
        im_omega: -0.1,
        n,
        residual,
        multiplicity: 1,
    };
    let out = dedup(vec![r(1.0, 0, 1e-9), r(1.0 + 1e-8, 0, 1e-12), r(1.0, 1, 1e-10), r(2.0, 0, 1e-9)]);
    assert_eq!(out.len(), 3);
    assert_eq!(out[0].residual, 1e-12);
}

#[test]
fn scan_of_a_synthetic_family_finds_every_root() {
    struct Poly;
    impl crate::charfun::ModeFamily for Poly {
        fn name(&self) -> String {
            "poly".into()
        }
        fn dim(&self) -> usize {
            1
        }
        fn modes(&self) -> Vec<usize> {
            vec![0, 1]
        }
        fn eval_all(&self, z: Complex64) -> Result<Vec<DMatrix<Complex64>>> {
            Ok(vec![self.eval_mode(0, z)?, self.eval_mode(1, z)?])
        }
        fn eval_mode(&self, k: usize, z: Complex64) -> Result<DMatrix<Complex64>> {
            let v = if k == 0 {
                (z - c(3.0, -1.0)) * (z - c(7.5, 0.5))
            } else {
                z - c(1.5, 1.2)
            };
            Ok(DMatrix::from_element(1, 1, v))
        }
    }
    let region = Rect {
        re0: 0.0,
        re1: 10.0,
        im0: -2.0,
        im1: 2.0,
    };
    let cfg = ScanConfig {
        grid: (4, 2),
        max_depth: 2,
        ..Default::default()
    };
    let set = scan_strip(&Poly, region, std::f64::consts::PI / 10.0, &cfg).unwrap();
    assert!(set.failures.is_empty(), "{:?}", set.failures);
    let found: Vec<(usize, Complex64)> = set.roots.iter().map(|r| (r.n, r.omega())).collect();
    assert_eq!(found.len(), 3, "{found:?}");
    assert_eq!(set.verdict, StabilityVerdict::Unstable);
    assert!(!set.uncovered.is_empty());
    assert!(set.uncovered.iter().all(|r| r.re0 == 0.0 && r.im0 < 0.5));
}
