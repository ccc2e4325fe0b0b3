//! Hankel-Bessel products that make up the characteristic series, and the
//! Fourier symbol of the piecewise-linear time basis.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::CylinderTable;
use super::scaled::Scaled;
use crate::error::{Error, Result};

/// The five operator symbols, with `k = omega / c` and the common
/// `i*pi/2` prefactor dropped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HJKind {
    /// `H_n(k) J_n(k)`
    S,
    /// `-i omega H_n J_n`
    SDot,
    /// `k H_n' J_n`, the symbol of `D^-` and `D^T+`
    DMinusDtPlus,
    /// `k H_n J_n'`, the symbol of `D^+` and `D^T-`
    DPlusDtMinus,
    /// `-k^2 H_n' J_n' / (i omega)`
    MOp,
}

impl HJKind {
    pub const ALL: [HJKind; 5] = [
        HJKind::S,
        HJKind::SDot,
        HJKind::DMinusDtPlus,
        HJKind::DPlusDtMinus,
        HJKind::MOp,
    ];
}

impl fmt::Display for HJKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            HJKind::S => "S",
            HJKind::SDot => "SDOT",
            HJKind::DMinusDtPlus => "D_MINUS_DT_PLUS",
            HJKind::DPlusDtMinus => "D_PLUS_DT_MINUS",
            HJKind::MOp => "M_OP",
        };
        f.write_str(s)
    }
}

/// `H J`, `H J'`, `H' J`, `H' J'` at `k` for orders `0..=n_max`.
#[derive(Clone, Debug)]
pub struct ModeProducts {
    pub k: Complex64,
    pub hj: Vec<Complex64>,
    pub h_dj: Vec<Complex64>,
    pub dh_j: Vec<Complex64>,
    pub dh_dj: Vec<Complex64>,
}

fn product(a: Scaled, b: Scaled) -> Result<Complex64> {
    (a * b).to_complex().ok_or_else(|| {
        Error::ScaledBreakdown("Hankel-Bessel product overflows double precision".into())
    })
}

impl ModeProducts {
    pub fn new(n_max: usize, k: Complex64) -> Result<Self> {
        let t = CylinderTable::new(n_max, k)?;
        let len = n_max + 1;
        let mut out = ModeProducts {
            k,
            hj: Vec::with_capacity(len),
            h_dj: Vec::with_capacity(len),
            dh_j: Vec::with_capacity(len),
            dh_dj: Vec::with_capacity(len),
        };
        for n in 0..len {
            let (h, j, dh, dj) = (t.h(n), t.j(n), t.dh(n), t.dj(n));
            out.hj.push(product(h, j)?);
            out.h_dj.push(product(h, dj)?);
            out.dh_j.push(product(dh, j)?);
            out.dh_dj.push(product(dh, dj)?);
        }
        Ok(out)
    }

    /// Symbol of `kind` at order `n`; `omega = c * k` is passed explicitly
    /// so that it is not reconstructed with rounding.
    pub fn symbol(&self, kind: HJKind, n: usize, omega: Complex64) -> Complex64 {
        let k = self.k;
        let i = Complex64::i();
        match kind {
            HJKind::S => self.hj[n],
            HJKind::SDot => -i * omega * self.hj[n],
            HJKind::DMinusDtPlus => k * self.dh_j[n],
            HJKind::DPlusDtMinus => k * self.h_dj[n],
            HJKind::MOp => -(k * k) * self.dh_dj[n] / (i * omega),
        }
    }
}

/// Operator symbol `kind` at order `n`, frequency `omega`, wave speed `c`.
pub fn hj_product(kind: HJKind, n: usize, omega: Complex64, c: f64) -> Result<Complex64> {
    if !(c > 0.0) {
        return Err(Error::Domain(format!("wave speed must be positive, got {c}")));
    }
    if kind == HJKind::MOp && omega == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("M symbol is undefined at omega = 0".into()));
    }
    let p = ModeProducts::new(n, omega / c)?;
    Ok(p.symbol(kind, n, omega))
}

/// Fourier symbol of the piecewise-linear hat of width `2 dt`:
/// `2 (1 - cos(omega dt)) / (omega^2 dt)`.
pub fn phi_hat(omega: Complex64, dt: f64) -> Complex64 {
    let x = omega * dt;
    if x.norm() < 1e-3 {
        let x2 = x * x;
        return dt * (1.0 - x2 / 12.0 + x2 * x2 / 360.0);
    }
    let s = (x / 2.0).sin();
    4.0 * s * s / (omega * omega * dt)
}

/// `phi_hat` at the shifted frequency `omega - 2 pi m / dt`, using
/// `sin^2` of the unshifted argument so that every term shares one numerator.
pub fn phi_hat_shifted(omega: Complex64, m: i64, dt: f64) -> Complex64 {
    if m == 0 {
        return phi_hat(omega, dt);
    }
    let shifted = lattice_shift(omega, m, dt);
    let s = (omega * dt / 2.0).sin();
    4.0 * s * s / (shifted * shifted * dt)
}

/// `omega - 2 pi m / dt`, formed directly from its inputs.
pub fn lattice_shift(omega: Complex64, m: i64, dt: f64) -> Complex64 {
    omega - 2.0 * std::f64::consts::PI * m as f64 / dt
}
