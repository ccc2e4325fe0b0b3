use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

/// Plane waves travelling in the `+x1` direction in the exterior medium.
///
/// Both are functions of `psi = c1 t - x1 - t0` and vanish for `psi <= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum IncidentWave {
    /// `psi^2 / 2`
    Quadratic { t0: f64, c1: f64 },
    /// `psi^2 / (psi + 4 dt)`, asymptotically linear
    SmoothedLinear { t0: f64, c1: f64, dt: f64 },
    /// identically zero
    Zero,
}

/// Default arrival delay `1 + 2 dt`.
pub fn default_t0(dt: f64) -> f64 {
    1.0 + 2.0 * dt
}

impl IncidentWave {
    pub fn quadratic(c1: f64, dt: f64) -> Self {
        IncidentWave::Quadratic { t0: default_t0(dt), c1 }
    }

    pub fn smoothed_linear(c1: f64, dt: f64) -> Self {
        IncidentWave::SmoothedLinear {
            t0: default_t0(dt),
            c1,
            dt,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            IncidentWave::Quadratic { .. } => "quadratic",
            IncidentWave::SmoothedLinear { .. } => "smoothed-linear",
            IncidentWave::Zero => "zero",
        }
    }

    pub fn t0(&self) -> f64 {
        match self {
            IncidentWave::Quadratic { t0, .. } | IncidentWave::SmoothedLinear { t0, .. } => *t0,
            IncidentWave::Zero => 0.0,
        }
    }

    pub fn speed(&self) -> f64 {
        match self {
            IncidentWave::Quadratic { c1, .. } | IncidentWave::SmoothedLinear { c1, .. } => *c1,
            IncidentWave::Zero => 1.0,
        }
    }

    /// Profile `g(psi)` and its derivative.
    pub fn profile(&self, psi: f64) -> (f64, f64) {
        if psi <= 0.0 {
            return (0.0, 0.0);
        }
        match self {
            IncidentWave::Quadratic { .. } => (psi * psi / 2.0, psi),
            IncidentWave::SmoothedLinear { dt, .. } => {
                let e = 4.0 * dt;
                let d = psi + e;
                (psi * psi / d, psi * (psi + 2.0 * e) / (d * d))
            }
            IncidentWave::Zero => (0.0, 0.0),
        }
    }
}

/// `(u, du/dt, du/dn)` of the incident wave at `point` with unit `normal`.
pub fn incident_trace(wave: &IncidentWave, point: Vector2<f64>, normal: Vector2<f64>, t: f64) -> (f64, f64, f64) {
    let c1 = wave.speed();
    let psi = c1 * t - point.x - wave.t0();
    let (g, dg) = wave.profile(psi);
    (g, c1 * dg, -dg * normal.x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_values() {
        let w = IncidentWave::Quadratic { t0: 1.0, c1: 0.5 };
        let n = Vector2::new(0.6, 0.8);
        // psi = 0.5 * 8 - 1 - 1 = 2
        let (u, ut, un) = incident_trace(&w, Vector2::new(1.0, 3.0), n, 8.0);
        assert_eq!((u, ut, un), (2.0, 1.0, -1.2));
    }

    #[test]
    fn silent_at_time_zero() {
        let dt = 0.0628;
        for w in [IncidentWave::quadratic(1.0, dt), IncidentWave::smoothed_linear(1.0, dt)] {
            for th in 0..16 {
                let a = th as f64 * 0.4;
                let p = Vector2::new(a.cos(), a.sin());
                assert_eq!(incident_trace(&w, p, p, 0.0), (0.0, 0.0, 0.0));
            }
        }
    }

    #[test]
    fn smoothed_linear_becomes_linear() {
        let w = IncidentWave::smoothed_linear(1.0, 0.05);
        let x = Vector2::new(0.3, 0.0);
        let r = |t: f64| incident_trace(&w, x, x, t).0 / t;
        assert!((r(1e6) - 1.0).abs() < 1e-5);
        assert!((r(1e8) - 1.0).abs() < 1e-7);
    }

    proptest! {
        // the profile is a function of c1 t - x1, so u_t = -c1 u_x1 and the
        // wave equation holds with u_tt = c1^2 u_x1x1
        #[test]
        fn rate_matches_finite_difference(psi in 0.01f64..5.0, dtp in 0.01f64..0.2) {
            for w in [IncidentWave::Quadratic { t0: 0.0, c1: 1.3 }, IncidentWave::SmoothedLinear { t0: 0.0, c1: 1.3, dt: dtp }] {
                let h = 1e-6;
                let (g1, _) = w.profile(psi + h);
                let (g0, _) = w.profile(psi - h);
                let (_, dg) = w.profile(psi);
                prop_assert!(((g1 - g0) / (2.0 * h) - dg).abs() < 1e-6 * (1.0 + dg.abs()));
            }
        }
    }
}
