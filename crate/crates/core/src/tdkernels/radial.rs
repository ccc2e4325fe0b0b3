//! Radial time primitives of the 2D retarded Green's function and their
//! second differences on the time grid.
//!
//! With `W = sqrt(c^2 t^2 - r^2)` and `A = acosh(c t / r)`, the repeated time
//! integrals of `G = c / (2 pi W)` from the arrival time `r / c` are
//! `A / 2pi` and `(t A - W / c) / 2pi`. Convolving a kernel against the
//! piecewise-linear hat reduces to `(1/dt)` times the second difference of
//! its second time-antiderivative, so every influence coefficient is a
//! spatial integral of one of the functions below.
//!
//! First differences are formed analytically so that late lags, where the
//! second difference is many orders smaller than the primitive, keep their
//! digits.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Radial {
    /// `(t A - W/c) / 2pi`
    PhiS,
    /// `A / 2pi`
    F0,
    /// `c / (2 pi W)`
    Green,
    /// `-W / (2 pi c r)`, the radial derivative of `PhiS`
    DrPhiS,
    /// `((r/c^2) A - t W / (c r)) / 4pi`, the radial derivative of the third antiderivative
    DrPsi3,
    /// `W`
    Front,
    /// `t / W`
    TOverFront,
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    t: f64,
    w: f64,
    a: f64,
    inside: bool,
}

/// `w2` is `c^2 t^2 - r^2`, supplied by the caller so that it can be formed
/// without cancellation next to a wavefront.
#[inline]
fn sample(r: f64, c: f64, t: f64, w2: f64) -> Sample {
    if t > 0.0 && w2 > 0.0 {
        let ct = c * t;
        let w = w2.sqrt();
        // acosh(ct/r) with ct - r = w2 / (ct + r)
        let a = if r > 0.0 { ((w2 / (ct + r) + w) / r).ln_1p() } else { f64::INFINITY };
        Sample { t, w, a, inside: true }
    } else {
        Sample { t, w: 0.0, a: 0.0, inside: false }
    }
}

/// `c^2 t^2 - r^2` at the three hat times, negative outside the light cone.
#[inline]
pub(crate) fn front_squares(r: f64, c: f64, dt: f64, lag: usize) -> [f64; 3] {
    let t0 = lag as f64 * dt;
    [t0 - dt, t0, t0 + dt].map(|t| if t > 0.0 { (c * t - r) * (c * t + r) } else { -1.0 })
}

/// `W(t2) - W(t1)` and `A(t2) - A(t1)`.
#[inline]
fn deltas(c: f64, s1: &Sample, s2: &Sample) -> (f64, f64) {
    if !s2.inside {
        return (0.0, 0.0);
    }
    if !s1.inside {
        return (s2.w, s2.a);
    }
    let dt = s2.t - s1.t;
    let dw = c * c * dt * (s2.t + s1.t) / (s1.w + s2.w);
    let da = ((c * dt + dw) / (c * s1.t + s1.w)).ln_1p();
    (dw, da)
}

#[inline]
fn first_difference(f: Radial, r: f64, c: f64, s1: &Sample, s2: &Sample) -> f64 {
    if !s2.inside {
        return 0.0;
    }
    let (dw, da) = deltas(c, s1, s2);
    let step = s2.t - s1.t;
    match f {
        Radial::PhiS => (s2.t * da + step * s1.a - dw / c) / (2.0 * PI),
        Radial::F0 => da / (2.0 * PI),
        Radial::Green => {
            if !s1.inside {
                c / (2.0 * PI * s2.w)
            } else {
                -c * dw / (2.0 * PI * s1.w * s2.w)
            }
        }
        Radial::DrPhiS => -dw / (2.0 * PI * c * r),
        Radial::DrPsi3 => (r / (c * c) * da - (s2.t * dw + step * s1.w) / (c * r)) / (4.0 * PI),
        Radial::Front => dw,
        Radial::TOverFront => {
            if !s1.inside {
                s2.t / s2.w
            } else {
                (step * s1.w - s1.t * dw) / (s1.w * s2.w)
            }
        }
    }
}

/// `h(u+d) - 2 h(u) + h(u-d)`, used only on small remainders.
#[inline]
fn d2<H: Fn(f64) -> f64>(h: H, u: f64, d: f64) -> f64 {
    (h(u + d) - h(u)) - (h(u) - h(u - d))
}

/// Second difference once all three samples are well inside the light cone.
///
/// With `u = c t` and `g = 1/(u + W)`, each primitive is split into a
/// leading term in `u` alone, whose second difference is formed exactly, and
/// a remainder of relative size `(r/u)^2` that is differenced directly.
fn far_second_difference(f: Radial, r: f64, c: f64, dt: f64, lag: usize) -> f64 {
    let u0 = c * lag as f64 * dt;
    let du = c * dt;
    let r2 = r * r;
    let front = |u: f64| ((u - r) * (u + r)).sqrt();
    let g = |u: f64| 1.0 / (u + front(u));
    let x = du / u0;
    // second differences of 1/u and 1/(2u^2)
    let d2_inv = 2.0 * du * du / (u0 * (u0 * u0 - du * du));
    let d2_inv_sq_half = (3.0 * u0 * u0 * du * du - du.powi(4)) / (u0 * u0 * (u0 * u0 - du * du).powi(2));
    let d2_g = 0.5 * d2_inv + d2(|u| r2 * g(u) * g(u) / (2.0 * u), u0, du);
    let log_tail = |u: f64| (-r2 * g(u) / (2.0 * u)).ln_1p();
    let d2_front = -r2 * d2_g;
    let d2_acosh = (-x * x).ln_1p() + d2(log_tail, u0, du);
    match f {
        Radial::Front => d2_front,
        Radial::F0 => d2_acosh / (2.0 * PI),
        Radial::Green => c / (2.0 * PI) * (d2_inv + d2(|u| r2 * g(u) / (u * front(u)), u0, du)),
        Radial::PhiS => {
            let lead = u0 * (-x * x).ln_1p() + du * (x.ln_1p() - (-x).ln_1p());
            (lead + d2(|u| u * log_tail(u), u0, du) - d2_front) / (2.0 * PI * c)
        }
        Radial::DrPhiS => -d2_front / (2.0 * PI * c * r),
        Radial::DrPsi3 => {
            let d2_uw = 2.0 * du * du - 0.5 * r2 * r2 * d2(|u| g(u) * g(u), u0, du);
            (r / (c * c) * d2_acosh - d2_uw / (c * c * r)) / (4.0 * PI)
        }
        Radial::TOverFront => {
            let q = |u: f64| {
                let gu = g(u);
                r2 * (1.0 + u * gu) * gu / (2.0 * u * u * front(u))
            };
            r2 * (d2_inv_sq_half + d2(q, u0, du)) / c
        }
    }
}

/// `g(t+) - 2 g(t0) + g(t-)` for `t = (lag - 1, lag, lag + 1) dt`.
#[inline]
pub(crate) fn second_difference(f: Radial, r: f64, c: f64, dt: f64, lag: usize) -> f64 {
    second_difference_with(f, r, front_squares(r, c, dt, lag), c, dt, lag)
}

/// As [`second_difference`] with caller-supplied `c^2 t^2 - r^2` values.
#[inline]
pub(crate) fn second_difference_with(f: Radial, r: f64, w2: [f64; 3], c: f64, dt: f64, lag: usize) -> f64 {
    if lag >= 2 && r > 0.0 && 2.0 * r <= c * (lag as f64 - 1.0) * dt {
        return far_second_difference(f, r, c, dt, lag);
    }
    let t0 = lag as f64 * dt;
    let lo = sample(r, c, t0 - dt, w2[0]);
    let mid = sample(r, c, t0, w2[1]);
    let hi = sample(r, c, t0 + dt, w2[2]);
    first_difference(f, r, c, &mid, &hi) - first_difference(f, r, c, &lo, &mid)
}

/// Direct value of the primitive, used by tests as an unsimplified oracle.
#[cfg(test)]
pub(crate) fn value(f: Radial, r: f64, c: f64, t: f64) -> f64 {
    let s = sample(r, c, t, (c * t - r) * (c * t + r));
    if !s.inside {
        return 0.0;
    }
    match f {
        Radial::PhiS => (t * s.a - s.w / c) / (2.0 * PI),
        Radial::F0 => s.a / (2.0 * PI),
        Radial::Green => c / (2.0 * PI * s.w),
        Radial::DrPhiS => -s.w / (2.0 * PI * c * r),
        Radial::DrPsi3 => (r / (c * c) * s.a - t * s.w / (c * r)) / (4.0 * PI),
        Radial::Front => s.w,
        Radial::TOverFront => t / s.w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [Radial; 7] = [
        Radial::PhiS,
        Radial::F0,
        Radial::Green,
        Radial::DrPhiS,
        Radial::DrPsi3,
        Radial::Front,
        Radial::TOverFront,
    ];

    #[test]
    fn stable_differences_match_direct_ones() {
        let (c, dt) = (1.3, 0.05);
        for f in ALL {
            for &r in &[0.01, 0.3, 1.7] {
                for lag in 0..200 {
                    let t0 = lag as f64 * dt;
                    let direct = value(f, r, c, t0 + dt) - 2.0 * value(f, r, c, t0) + value(f, r, c, t0 - dt);
                    let stable = second_difference(f, r, c, dt, lag);
                    let scale = value(f, r, c, t0 + dt).abs().max(1e-300);
                    assert!(
                        (direct - stable).abs() <= 1e-11 * scale + 1e-13 * stable.abs(),
                        "{f:?} r={r} lag={lag}: {direct} vs {stable}"
                    );
                }
            }
        }
    }

    #[test]
    fn primitives_integrate_each_other() {
        // d/dt PhiS = F0 and d/dt F0 = Green, checked by central differences
        let (c, r, t, h) = (0.8, 0.4, 2.0, 1e-5);
        let d = |f, t: f64| (value(f, r, c, t + h) - value(f, r, c, t - h)) / (2.0 * h);
        assert!((d(Radial::PhiS, t) - value(Radial::F0, r, c, t)).abs() < 1e-9);
        assert!((d(Radial::F0, t) - value(Radial::Green, r, c, t)).abs() < 1e-9);
        // radial derivatives
        let dr = |f, r: f64| value(f, r, c, t);
        let drphi = (dr(Radial::PhiS, r + h) - dr(Radial::PhiS, r - h)) / (2.0 * h);
        assert!((drphi - value(Radial::DrPhiS, r, c, t)).abs() < 1e-9);
    }

    #[test]
    fn late_lags_match_high_precision_differences() {
        // (function, r, c, dt, lag, second difference at 50 digits)
        let table = [
            (Radial::PhiS, 0.3, 1.0, 0.0628, 1000, 9.995046138206537e-6),
            (Radial::PhiS, 1.7, 0.7, 0.05, 200, 4.1016889526268665e-5),
            (Radial::PhiS, 0.05, 2.0, 0.1, 30, 0.00053063320661830047),
            (Radial::PhiS, 1.2, 1.0, 0.1, 25, 0.00072604904890387568),
            (Radial::F0, 0.3, 1.0, 0.0628, 1000, -1.5916047080272206e-7),
            (Radial::F0, 1.7, 0.7, 0.05, 200, -4.3588131254464823e-6),
            (Radial::F0, 0.05, 2.0, 0.1, 30, -0.00017695559876553006),
            (Radial::F0, 1.2, 1.0, 0.1, 25, -0.00037786226655002477),
            (Radial::Green, 0.3, 1.0, 0.0628, 1000, 5.06898084962093e-9),
            (Radial::Green, 1.7, 0.7, 0.05, 200, 9.5373695262525922e-7),
            (Radial::Green, 0.05, 2.0, 0.1, 30, 0.00011804832039905343),
            (Radial::Green, 1.2, 1.0, 0.1, 25, 0.00043906136406472975),
            (Radial::DrPhiS, 0.3, 1.0, 0.0628, 1000, 7.6032110056452172e-10),
            (Radial::DrPhiS, 1.7, 0.7, 0.05, 200, 1.5122613766866771e-6),
            (Radial::DrPhiS, 0.05, 2.0, 0.1, 30, 7.377250224897716e-7),
            (Radial::DrPhiS, 1.2, 1.0, 0.1, 25, 0.00018156288152730133),
            (Radial::DrPsi3, 0.3, 1.0, 0.0628, 1000, -0.0020922959762071415),
            (Radial::DrPsi3, 1.7, 0.7, 0.05, 200, -0.00024127475240948955),
            (Radial::DrPsi3, 0.05, 2.0, 0.1, 30, -0.031832094533193173),
            (Radial::DrPsi3, 1.2, 1.0, 0.1, 25, -0.0015120775679640148),
            (Radial::Front, 0.3, 1.0, 0.0628, 1000, -1.4331715103416847e-9),
            (Radial::Front, 1.7, 0.7, 0.05, 200, -1.1307163970509355e-5),
            (Radial::Front, 0.05, 2.0, 0.1, 30, -4.6352630220464629e-7),
            (Radial::Front, 1.2, 1.0, 0.1, 25, -0.0013689518754498332),
            (Radial::TOverFront, 0.3, 1.0, 0.0628, 1000, 6.8465215231511394e-11),
            (Radial::TOverFront, 1.7, 0.7, 0.05, 200, 7.3567961105911091e-6),
            (Radial::TOverFront, 0.05, 2.0, 0.1, 30, 1.1597558402117083e-7),
            (Radial::TOverFront, 1.2, 1.0, 0.1, 25, 0.002139735822841529),
        ];
        for (f, r, c, dt, lag, expect) in table {
            let got = second_difference(f, r, c, dt, lag);
            assert!((got / expect - 1.0).abs() < 1e-11, "{f:?} r={r} lag={lag}: {got} vs {expect}");
        }
    }

    #[test]
    fn causal_and_late_lags_are_small_but_finite() {
        assert_eq!(second_difference(Radial::PhiS, 2.0, 1.0, 0.1, 5), 0.0);
        let late = second_difference(Radial::PhiS, 0.5, 1.0, 0.0628, 1000);
        // dt^2 G(t) at t = 62.8
        let expect = 0.0628f64.powi(2) / (2.0 * PI * (62.8f64.powi(2) - 0.25).sqrt());
        assert!((late / expect - 1.0).abs() < 1e-3, "{late} vs {expect}");
    }
}
