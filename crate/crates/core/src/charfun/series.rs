//! Lattice sums `sum_m symbol(omega_m) * phi_hat(omega_m)` for every order at once.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{lattice_shift, phi_hat_shifted, HJKind, ModeProducts};

/// Truncation of the lattice sums.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeriesControl {
    /// `|m| <= count / 2`
    Fixed(usize),
    /// grow `|m|` until three consecutive pair increments fall below `eps` relative
    TailTol(f64),
    /// the `m = 0` term only: the frequency-domain symbol times `phi_hat`
    FrequencyDomain,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl::Fixed(100)
    }
}

impl SeriesControl {
    pub fn validate(&self) -> Result<()> {
        match self {
            SeriesControl::Fixed(n) if *n < 10 => Err(Error::Config(format!(
                "lattice sums need at least 10 terms, got {n}"
            ))),
            SeriesControl::TailTol(e) if !(*e > 0.0) => {
                Err(Error::Config(format!("tail tolerance must be positive, got {e}")))
            }
            _ => Ok(()),
        }
    }
}

/// Minimum distance from `omega_m` to the shifted cut that is tolerated.
pub const CUT_MARGIN: f64 = 1e-9;

fn cut_distance(w: Complex64) -> f64 {
    if w.im <= 0.0 {
        w.re.abs()
    } else {
        w.norm()
    }
}

/// Rejects frequencies that put some lattice image on the relocated cut.
pub fn check_cut(omega: Complex64, dt: f64, half: i64) -> Result<()> {
    if !(omega.re.is_finite() && omega.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite frequency {omega}")));
    }
    // the image nearest to the imaginary axis decides
    let period = 2.0 * std::f64::consts::PI / dt;
    let m = (omega.re / period).round().clamp(-(half as f64), half as f64) as i64;
    for cand in [m - 1, m, m + 1] {
        if cand.abs() <= half && cut_distance(lattice_shift(omega, cand, dt)) < CUT_MARGIN {
            return Err(Error::CutProximity {
                omega,
                margin: CUT_MARGIN,
            });
        }
    }
    Ok(())
}

/// Per-order lattice sums of the five operator symbols at one frequency and wave speed.
#[derive(Clone, Debug)]
pub struct LatticeSums {
    pub omega: Complex64,
    pub c: f64,
    pub dt: f64,
    /// largest `|m|` included
    pub half: i64,
    s: Vec<Complex64>,
    sdot: Vec<Complex64>,
    d_minus: Vec<Complex64>,
    d_plus: Vec<Complex64>,
    m_op: Vec<Complex64>,
    /// `sum_m phi_hat(omega_m)` over the same terms
    pub phi_sum: Complex64,
}

struct Term {
    vals: [Vec<Complex64>; 5],
    phi: Complex64,
}

fn lattice_term(omega: Complex64, m: i64, c: f64, dt: f64, n_max: usize) -> Result<Term> {
    let w = lattice_shift(omega, m, dt);
    let phi = phi_hat_shifted(omega, m, dt);
    let p = ModeProducts::new(n_max, w / c)?;
    let mut vals: [Vec<Complex64>; 5] = Default::default();
    for (slot, kind) in vals.iter_mut().zip(HJKind::ALL) {
        *slot = (0..=n_max).map(|n| p.symbol(kind, n, w) * phi).collect();
    }
    Ok(Term { vals, phi })
}

fn add_into(acc: &mut [Vec<Complex64>; 5], t: &Term, scale: f64) {
    for (a, v) in acc.iter_mut().zip(&t.vals) {
        for (x, y) in a.iter_mut().zip(v) {
            *x += y * scale;
        }
    }
}

impl LatticeSums {
    /// Sums for orders `0..=n_max`.
    pub fn compute(omega: Complex64, c: f64, dt: f64, n_max: usize, ctrl: SeriesControl) -> Result<Self> {
        ctrl.validate()?;
        if !(dt > 0.0) || !(c > 0.0) {
            return Err(Error::Domain(format!("need dt > 0 and c > 0, got dt = {dt}, c = {c}")));
        }
        match ctrl {
            SeriesControl::Fixed(count) => Self::fixed(omega, c, dt, n_max, (count / 2) as i64),
            SeriesControl::FrequencyDomain => Self::fixed(omega, c, dt, n_max, 0),
            SeriesControl::TailTol(eps) => Self::adaptive(omega, c, dt, n_max, eps),
        }
    }

    fn fixed(omega: Complex64, c: f64, dt: f64, n_max: usize, half: i64) -> Result<Self> {
        check_cut(omega, dt, half)?;
        let terms: Vec<Term> = (-half..=half)
            .into_par_iter()
            .map(|m| lattice_term(omega, m, c, dt, n_max))
            .collect::<Result<_>>()?;
        let zero = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut acc: [Vec<Complex64>; 5] = std::array::from_fn(|_| zero.clone());
        let mut phi_sum = Complex64::new(0.0, 0.0);
        // pairs (m, -m), smallest terms first
        for k in (1..=half).rev() {
            let (a, b) = (&terms[(half - k) as usize], &terms[(half + k) as usize]);
            for ((acc_kind, va), vb) in acc.iter_mut().zip(&a.vals).zip(&b.vals) {
                for ((x, y), z) in acc_kind.iter_mut().zip(va).zip(vb) {
                    *x += y + z;
                }
            }
            phi_sum += a.phi + b.phi;
        }
        let centre = &terms[half as usize];
        add_into(&mut acc, centre, 1.0);
        phi_sum += centre.phi;
        Ok(Self::from_parts(omega, c, dt, half, acc, phi_sum))
    }

    fn adaptive(omega: Complex64, c: f64, dt: f64, n_max: usize, eps: f64) -> Result<Self> {
        const MAX_HALF: i64 = 100_000;
        let period = 2.0 * std::f64::consts::PI / dt;
        let min_half = (omega.norm() / period).ceil() as i64 + 5;
        let centre = lattice_term(omega, 0, c, dt, n_max)?;
        check_cut(omega, dt, 0)?;
        let mut running = centre.vals.clone();
        let mut pairs: Vec<([Vec<Complex64>; 5], Complex64)> = Vec::new();
        let mut quiet = 0;
        let mut k = 0i64;
        while quiet < 3 {
            k += 1;
            if k > MAX_HALF {
                return Err(Error::Domain(format!(
                    "lattice sum at {omega} did not reach tolerance {eps} within {MAX_HALF} pairs"
                )));
            }
            check_cut(lattice_shift(omega, k, dt), dt, 0)?;
            check_cut(lattice_shift(omega, -k, dt), dt, 0)?;
            let a = lattice_term(omega, k, c, dt, n_max)?;
            let b = lattice_term(omega, -k, c, dt, n_max)?;
            let pair: [Vec<Complex64>; 5] = std::array::from_fn(|i| {
                a.vals[i].iter().zip(&b.vals[i]).map(|(x, y)| x + y).collect()
            });
            let mut worst: f64 = 0.0;
            for (r, p) in running.iter_mut().zip(&pair) {
                for (x, y) in r.iter_mut().zip(p) {
                    *x += y;
                    if x.norm() > 0.0 {
                        worst = worst.max(y.norm() / x.norm());
                    }
                }
            }
            quiet = if worst < eps && k >= min_half { quiet + 1 } else { 0 };
            pairs.push((pair, a.phi + b.phi));
        }
        let zero = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut acc: [Vec<Complex64>; 5] = std::array::from_fn(|_| zero.clone());
        let mut phi_sum = Complex64::new(0.0, 0.0);
        for (pair, phi) in pairs.iter().rev() {
            for (a, p) in acc.iter_mut().zip(pair) {
                for (x, y) in a.iter_mut().zip(p) {
                    *x += y;
                }
            }
            phi_sum += phi;
        }
        add_into(&mut acc, &centre, 1.0);
        phi_sum += centre.phi;
        Ok(Self::from_parts(omega, c, dt, k, acc, phi_sum))
    }

    fn from_parts(
        omega: Complex64,
        c: f64,
        dt: f64,
        half: i64,
        acc: [Vec<Complex64>; 5],
        phi_sum: Complex64,
    ) -> Self {
        let [s, sdot, d_minus, d_plus, m_op] = acc;
        LatticeSums {
            omega,
            c,
            dt,
            half,
            s,
            sdot,
            d_minus,
            d_plus,
            m_op,
            phi_sum,
        }
    }

    pub fn n_max(&self) -> usize {
        self.s.len() - 1
    }

    /// Lattice sum of `kind` at order `n`.
    pub fn get(&self, kind: HJKind, n: usize) -> Complex64 {
        match kind {
            HJKind::S => self.s[n],
            HJKind::SDot => self.sdot[n],
            HJKind::DMinusDtPlus => self.d_minus[n],
            HJKind::DPlusDtMinus => self.d_plus[n],
            HJKind::MOp => self.m_op[n],
        }
    }

    /// A multiple of the identity in the same units as the symbols
    /// (the dropped `i pi / 2` prefactor divided out).
    pub fn constant(&self, value: f64) -> Complex64 {
        2.0 * value / (Complex64::i() * std::f64::consts::PI) * self.phi_sum
    }
}

/// Lattice series of one operator symbol.
pub fn mode_series(
    kind: HJKind,
    n: usize,
    omega: Complex64,
    c: f64,
    dt: f64,
    ctrl: SeriesControl,
) -> Result<Complex64> {
    Ok(LatticeSums::compute(omega, c, dt, n, ctrl)?.get(kind, n))
}

/// Series whose zeros are the roots of the time-domain Burton-Miller equation,
/// `sum H (omega_m / c) (J' - i J) phi_hat`.
pub fn bm_series(n: usize, omega: Complex64, c: f64, dt: f64, ctrl: SeriesControl) -> Result<Complex64> {
    let sums = LatticeSums::compute(omega, c, dt, n, ctrl)?;
    Ok(sums.get(HJKind::DPlusDtMinus, n) + sums.get(HJKind::SDot, n) / c)
}

/// Burton-Miller series with the extra coupling `alpha * S`.
pub fn augmented_bm_series(
    n: usize,
    omega: Complex64,
    c: f64,
    dt: f64,
    alpha: f64,
    ctrl: SeriesControl,
) -> Result<Complex64> {
    let sums = LatticeSums::compute(omega, c, dt, n, ctrl)?;
    Ok(sums.get(HJKind::DPlusDtMinus, n) + sums.get(HJKind::SDot, n) / c + alpha * sums.get(HJKind::S, n))
}

/// Behaviour of a series as `omega -> 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ZeroLimit {
    Finite(Complex64),
    Divergent,
}

impl ZeroLimit {
    pub fn is_zero(&self, tol: f64) -> bool {
        matches!(self, ZeroLimit::Finite(v) if v.norm() <= tol)
    }

    fn plus(self, other: ZeroLimit) -> ZeroLimit {
        match (self, other) {
            (ZeroLimit::Finite(a), ZeroLimit::Finite(b)) => ZeroLimit::Finite(a + b),
            _ => ZeroLimit::Divergent,
        }
    }

    fn times(self, s: f64) -> ZeroLimit {
        match self {
            ZeroLimit::Finite(a) => ZeroLimit::Finite(a * s),
            d => d,
        }
    }
}

/// Limit of `mode_series(kind, n, omega, ...)` as `omega -> 0`.
///
/// Only the `m = 0` term survives (every other `phi_hat(omega_m)` vanishes
/// like `omega^2`), and `phi_hat(0) = dt`; the small-argument forms of
/// `H_n` and `J_n` then give the values below.
pub fn zero_limit(kind: HJKind, n: usize, dt: f64) -> ZeroLimit {
    use std::f64::consts::PI;
    let i = Complex64::i();
    let nf = n as f64;
    match (kind, n) {
        (HJKind::S, 0) => ZeroLimit::Divergent,
        (HJKind::S, _) => ZeroLimit::Finite(-i * dt / (nf * PI)),
        (HJKind::SDot, _) => ZeroLimit::Finite(Complex64::new(0.0, 0.0)),
        (HJKind::DPlusDtMinus, 0) => ZeroLimit::Finite(Complex64::new(0.0, 0.0)),
        (HJKind::DPlusDtMinus, _) => ZeroLimit::Finite(-i * dt / PI),
        (HJKind::DMinusDtPlus, 0) => ZeroLimit::Finite(2.0 * i * dt / PI),
        (HJKind::DMinusDtPlus, _) => ZeroLimit::Finite(i * dt / PI),
        (HJKind::MOp, 0) => ZeroLimit::Finite(Complex64::new(0.0, 0.0)),
        (HJKind::MOp, _) => ZeroLimit::Divergent,
    }
}

/// Zero limit of [`bm_series`], or of [`augmented_bm_series`] when `alpha` is given.
pub fn bm_zero_limit(n: usize, c: f64, dt: f64, alpha: Option<f64>) -> ZeroLimit {
    let base = zero_limit(HJKind::DPlusDtMinus, n, dt).plus(zero_limit(HJKind::SDot, n, dt).times(1.0 / c));
    match alpha {
        Some(a) if a != 0.0 => base.plus(zero_limit(HJKind::S, n, dt).times(a)),
        _ => base,
    }
}
