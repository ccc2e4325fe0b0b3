//! Integer-order Bessel and Hankel functions of complex argument.
//!
//! All orders `0..=n` at one argument are produced together as a
//! [`CylinderTable`], since every caller needs a whole range of orders.
//! Hankel functions use the relocated branch cut along the negative
//! imaginary axis.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use super::scaled::{ldexp, Scaled};
use crate::error::{Error, Result};

/// Largest order accepted by the public entry points.
pub const MAX_ORDER: usize = 6000;

const ASYMPTOTIC_RADIUS: f64 = 17.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const RESCALE_BITS: i64 = 600;

/// Replaces signed zeros by `+0.0` so that branch choices are deterministic.
pub(crate) fn clean(z: Complex64) -> Complex64 {
    Complex64::new(
        if z.re == 0.0 { 0.0 } else { z.re },
        if z.im == 0.0 { 0.0 } else { z.im },
    )
}

fn rescale_threshold() -> f64 {
    ldexp(1.0, RESCALE_BITS)
}

/// Principal `H^(1)_0`, `H^(1)_1` from the large-argument expansion.
fn hankel01_asymptotic(z: Complex64) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let pref = (2.0 / PI).sqrt() / z.sqrt();
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (nu, slot) in out.iter_mut().enumerate() {
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut prev = f64::INFINITY;
        for k in 1..80 {
            let odd = (2 * k - 1) as f64;
            term *= i * ((mu - odd * odd) / (8.0 * k as f64)) / z;
            let size = term.norm();
            if size > prev {
                break;
            }
            sum += term;
            prev = size;
            if size < 1e-17 * sum.norm() {
                break;
            }
        }
        let phase = z - (nu as f64) * FRAC_PI_2 - FRAC_PI_4;
        *slot = pref * (i * phase).exp() * sum;
    }
    (out[0], out[1])
}

/// Backward recurrence for `J_0..=n_top` at `z` in the closed first quadrant.
/// Returns the unnormalised values and the final-frame sum
/// `f_0 + 2 sum (-i)^k f_k`, as scaled numbers.
fn miller_raw(n_top: usize, z: Complex64, keep: usize) -> (Vec<Scaled>, Scaled) {
    let x = z.norm();
    let start = ((n_top as f64).max(x) + 12.0 * x.cbrt() + 30.0).ceil() as usize;
    let keep = keep.max(n_top).min(start);
    let inv = 1.0 / z;
    let big = rescale_threshold();
    let down = ldexp(1.0, -RESCALE_BITS);
    let mut vals = vec![Scaled::ZERO; keep + 1];
    let mut upper = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    let mut frame = 0i64;
    let rot = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut k = start;
    loop {
        if k <= keep {
            vals[k] = Scaled::new(cur, frame);
        }
        sum += if k == 0 { cur } else { 2.0 * rot[k % 4] * cur };
        if k == 0 {
            break;
        }
        let lower = (2.0 * k as f64) * inv * cur - upper;
        upper = cur;
        cur = lower;
        k -= 1;
        if cur.norm() > big {
            cur *= down;
            upper *= down;
            sum *= down;
            frame += RESCALE_BITS;
        }
    }
    (vals, Scaled::new(sum, frame))
}

/// `J_0..=n_top` at `z` with `Re z >= 0`, `Im z >= 0`.
fn j_first_quadrant(n_top: usize, z: Complex64) -> Vec<Scaled> {
    let x = z.norm();
    if x == 0.0 {
        let mut v = vec![Scaled::ZERO; n_top + 1];
        v[0] = Scaled::from_complex(Complex64::new(1.0, 0.0));
        return v;
    }
    if x >= ASYMPTOTIC_RADIUS && (n_top as f64) + 6.0 * x.cbrt() + 10.0 <= x {
        // forward recurrence is safe below the turning point
        let (a0, a1) = hankel01_asymptotic(z);
        let (b0, b1) = hankel01_asymptotic(z.conj());
        let mut prev = 0.5 * (a0 + b0.conj());
        let mut cur = 0.5 * (a1 + b1.conj());
        let mut out = Vec::with_capacity(n_top + 1);
        out.push(Scaled::from_complex(prev));
        if n_top >= 1 {
            out.push(Scaled::from_complex(cur));
        }
        let inv = 1.0 / z;
        for k in 1..n_top {
            let next = (2.0 * k as f64) * inv * cur - prev;
            prev = cur;
            cur = next;
            out.push(Scaled::from_complex(cur));
        }
        return out;
    }
    let (raw, sum) = miller_raw(n_top.max(1), z, n_top.max(1));
    let norm = if x < ASYMPTOTIC_RADIUS {
        Scaled::from_complex((-Complex64::i() * z).exp()).div(sum)
    } else {
        let (h0, h1) = hankel01_asymptotic(z);
        let w = raw[1].scale(h0).sub(raw[0].scale(h1));
        Scaled::from_complex(2.0 * Complex64::i() / (PI * z)).div(w)
    };
    raw.into_iter().take(n_top + 1).map(|f| f * norm).collect()
}

/// `J_0..=n_top` at an arbitrary `z`.
pub(crate) fn j_table(n_top: usize, z: Complex64) -> Vec<Scaled> {
    let z = clean(z);
    let negate = z.re < 0.0;
    let mut w = if negate { clean(-z) } else { z };
    let conj = w.im < 0.0;
    if conj {
        w = w.conj();
    }
    let mut out = j_first_quadrant(n_top, w);
    for (n, v) in out.iter_mut().enumerate() {
        if conj {
            *v = v.conj();
        }
        if negate && n % 2 == 1 {
            *v = -*v;
        }
    }
    out
}

/// Principal `H^(1)_0`, `H^(1)_1` for `Im z >= 0`, `z != 0`.
fn hankel01_upper(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() >= ASYMPTOTIC_RADIUS {
        return hankel01_asymptotic(z);
    }
    // Neumann series for Y_0 and Y_1; the needed J range is what Miller keeps
    let x = z.norm();
    let terms = ((x + 12.0 * x.cbrt() + 30.0).ceil() as usize) + 2;
    let j: Vec<Complex64> = j_table(terms, z)
        .into_iter()
        .map(|v| v.to_complex().unwrap_or_default())
        .collect();
    let log_term = (z / 2.0).ln() + EULER_GAMMA;
    let mut s0 = Complex64::new(0.0, 0.0);
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = (2.0 / PI) * log_term * j[0] - (4.0 / PI) * s0;
    let y1 = -(2.0 / PI) * j[0] / z + (2.0 / PI) * log_term * j[1] + (2.0 / PI) * s1;
    let i = Complex64::i();
    (j[0] + i * y0, j[1] + i * y1)
}

/// Forward recurrence for principal `H^(1)_0..=n_top` with `Im z >= 0`.
fn hankel_upper_table(n_top: usize, z: Complex64) -> Vec<Scaled> {
    let (h0, h1) = hankel01_upper(z);
    let inv = 1.0 / z;
    let big = rescale_threshold();
    let down = ldexp(1.0, -RESCALE_BITS);
    let mut out = Vec::with_capacity(n_top + 1);
    out.push(Scaled::from_complex(h0));
    if n_top >= 1 {
        out.push(Scaled::from_complex(h1));
    }
    let (mut prev, mut cur, mut frame) = (h0, h1, 0i64);
    for k in 1..n_top {
        let next = (2.0 * k as f64) * inv * cur - prev;
        prev = cur;
        cur = next;
        if cur.norm() > big {
            cur *= down;
            prev *= down;
            frame += RESCALE_BITS;
        }
        out.push(Scaled::new(cur, frame));
    }
    out
}

/// Bessel `J_n` and relocated-cut Hankel `H~^(1)_n` for all orders at one argument.
#[derive(Clone, Debug)]
pub struct CylinderTable {
    z: Complex64,
    j: Vec<Scaled>,
    h: Vec<Scaled>,
}

impl CylinderTable {
    /// Tables for orders `0..=n_max` (derivatives included).
    pub fn new(n_max: usize, z: Complex64) -> Result<Self> {
        if n_max > MAX_ORDER {
            return Err(Error::OrderTooLarge {
                order: n_max,
                max: MAX_ORDER,
            });
        }
        let z = clean(z);
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Domain(format!("non-finite argument {z}")));
        }
        if z.re == 0.0 && z.im <= 0.0 {
            return Err(Error::OnBranchCut { z });
        }
        let top = n_max.max(1);
        let j = j_table(top, z);
        let h = if z.im >= 0.0 {
            hankel_upper_table(top, z)
        } else if z.re > 0.0 {
            // principal branch below the real axis: H1 = 2J - conj(H1(conj z))
            let mirror = hankel_upper_table(top, z.conj());
            j.iter()
                .zip(mirror)
                .map(|(jv, hv)| jv.add(*jv).sub(hv.conj()))
                .collect()
        } else {
            // third quadrant: continuation across the negative real axis
            let upper = hankel_upper_table(top, clean(-z));
            j.iter()
                .zip(upper)
                .enumerate()
                .map(|(n, (jv, hv))| {
                    let hv = if n % 2 == 1 { -hv } else { hv };
                    hv.sub(jv.add(*jv))
                })
                .collect()
        };
        if j.iter().chain(h.iter()).any(|v| !v.is_finite()) {
            return Err(Error::ScaledBreakdown(format!(
                "non-finite cylinder function at z = {z}"
            )));
        }
        Ok(CylinderTable { z, j, h })
    }

    pub fn argument(&self) -> Complex64 {
        self.z
    }

    pub fn max_order(&self) -> usize {
        self.j.len() - 1
    }

    pub fn j(&self, n: usize) -> Scaled {
        self.j[n]
    }

    pub fn h(&self, n: usize) -> Scaled {
        self.h[n]
    }

    pub fn dj(&self, n: usize) -> Scaled {
        derivative(&self.j, n, self.z)
    }

    pub fn dh(&self, n: usize) -> Scaled {
        derivative(&self.h, n, self.z)
    }
}

fn derivative(vals: &[Scaled], n: usize, z: Complex64) -> Scaled {
    if n == 0 {
        -vals[1]
    } else {
        vals[n - 1].sub(vals[n].scale(n as f64 / z))
    }
}

fn to_value(v: Scaled, what: &str) -> Result<Complex64> {
    v.to_complex()
        .ok_or_else(|| Error::ScaledBreakdown(format!("{what} overflows double precision")))
}

/// `J_n(z)`.
pub fn bessel_j(n: usize, z: Complex64) -> Result<Complex64> {
    if n > MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            max: MAX_ORDER,
        });
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument {z}")));
    }
    to_value(j_table(n.max(1), z)[n], "J_n")
}

/// `H~^(1)_n(z)`: principal Hankel function of the first kind except in the
/// third quadrant, where it is continued across the negative real axis.
pub fn hankel1_cut(n: usize, z: Complex64) -> Result<Complex64> {
    to_value(CylinderTable::new(n, z)?.h(n), "H_n")
}

/// Derivative of [`hankel1_cut`].
pub fn hankel1_cut_deriv(n: usize, z: Complex64) -> Result<Complex64> {
    to_value(CylinderTable::new(n, z)?.dh(n), "H_n'")
}

/// Derivative of [`bessel_j`].
pub fn bessel_j_deriv(n: usize, z: Complex64) -> Result<Complex64> {
    let t = j_table(n + 1, z);
    to_value(derivative(&t, n, clean(z)), "J_n'")
}
