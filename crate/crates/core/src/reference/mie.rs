//! Separation-of-variables solutions for a plane wave `e^{ikx}` hitting the unit circle.
//!
//! Coefficients are returned for orders `n >= 0`; the incident direction makes
//! the `-n` coefficient equal to the `n` one.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::marching::Materials;
use crate::specfun::{CylinderTable, Scaled};

/// Mode amplitudes of the boundary traces for one frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModePair {
    /// trace of the total field
    pub u: Complex64,
    /// exterior flux `s1 du/dn`
    pub q: Complex64,
}

fn i_pow(n: usize) -> Complex64 {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, -1.0),
    ][n % 4]
}

fn check_k(k: Complex64) -> Result<()> {
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("wavenumber 0 has no mode expansion; use the static limit".into()));
    }
    if !(k.re.is_finite() && k.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite wavenumber {k}")));
    }
    Ok(())
}

fn ratio(v: Complex64) -> Result<Complex64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Reference(format!("cylinder function ratio overflowed ({v})")))
    }
}

/// `1 / h` without intermediate overflow; underflows to zero.
fn reciprocal(h: Scaled) -> Result<Complex64> {
    if h.is_zero() {
        return Err(Error::Reference("Hankel function vanished".into()));
    }
    Scaled::from_complex(Complex64::new(1.0, 0.0))
        .div(h)
        .to_complex()
        .ok_or_else(|| Error::Reference("reciprocal Hankel value overflowed".into()))
}

/// Number of orders past which the coefficients at `|k|` are below roundoff.
pub fn mode_count(k: Complex64) -> usize {
    k.norm().ceil() as usize + 40
}

/// Coefficients of `du/dr` at `r = 1` for the sound-soft circle, orders `0..=n_modes`.
///
/// The Wronskian `J H' - J' H = 2i / (pi k)` reduces each coefficient to
/// `-(2i/pi) i^n / H_n(k)`.
pub fn mie_dirichlet_q(k: Complex64, n_modes: usize) -> Result<Vec<Complex64>> {
    check_k(k)?;
    let table = CylinderTable::new(n_modes, k)?;
    let pre = Complex64::new(0.0, -2.0 / std::f64::consts::PI);
    (0..=n_modes)
        .map(|n| Ok(pre * i_pow(n) * reciprocal(table.h(n))?))
        .collect()
}

/// Per-mode traces for the penetrable circle: exterior wavenumber `k1`,
/// interior `k1 c1 / c2`, with `u` and `s du/dn` continuous across the boundary.
pub fn mie_transmission(k1: Complex64, materials: &Materials, n_modes: usize) -> Result<Vec<ModePair>> {
    check_k(k1)?;
    let (s1, s2) = (materials.s[0], materials.s[1]);
    let k2 = k1 * materials.speed(0) / materials.speed(1);
    let outer = CylinderTable::new(n_modes + 1, k1)?;
    let inner = CylinderTable::new(n_modes + 1, k2)?;
    let two_i_over_pi = Complex64::new(0.0, 2.0 / std::f64::consts::PI);
    (0..=n_modes)
        .map(|n| {
            let jn2 = inner.j(n);
            if jn2.is_zero() {
                return Err(Error::Reference(format!("interior J_{n} vanishes at {k2}")));
            }
            let rho_h = ratio(outer.dh(n).div(outer.h(n)).to_complex().unwrap_or(Complex64::new(f64::NAN, 0.0)))?;
            let rho_j = ratio(inner.dj(n).div(jn2).to_complex().unwrap_or(Complex64::new(f64::NAN, 0.0)))?;
            let det = s1 * k1 * rho_h - s2 * k2 * rho_j;
            if det.norm() == 0.0 || !det.is_finite() {
                return Err(Error::Reference(format!("singular mode system for n = {n} at k1 = {k1}")));
            }
            let u = s1 * i_pow(n) * two_i_over_pi * reciprocal(outer.h(n))? / det;
            Ok(ModePair {
                u,
                q: s2 * k2 * rho_j * u,
            })
        })
        .collect()
}

/// Mode values at zero frequency: a uniform static field and no flux.
pub fn static_limit(n_modes: usize) -> Vec<ModePair> {
    (0..=n_modes)
        .map(|n| ModePair {
            u: Complex64::new(if n == 0 { 1.0 } else { 0.0 }, 0.0),
            q: Complex64::new(0.0, 0.0),
        })
        .collect()
}
