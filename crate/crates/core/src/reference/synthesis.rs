//! Time histories on the unit circle by FFT synthesis of the mode solutions.
//!
//! The pulse is sampled on a grid `h = dt / oversample`, tapered to zero over
//! the last part of the run, damped by `e^{-sigma t}` and zero-padded. Damping
//! moves every frequency sample to `omega + i sigma`, which keeps the synthesis
//! off `omega = 0` and shrinks the wrapped-around tail by `e^{-sigma L}`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::mie::{mie_dirichlet_q, mie_transmission, mode_count, static_limit};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryMesh, Shape};
use crate::marching::{incident_trace, Formulation, IncidentWave, Materials, SolutionHistory};

/// Wrapped-around tail tolerated relative to the peak response.
pub const WRAPAROUND_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseOptions {
    /// FFT window length as a multiple of the run duration
    pub padding: usize,
    /// time samples per marching step
    pub oversample: usize,
    /// fraction of the run over which the pulse is tapered to zero
    pub taper: f64,
    /// `sigma`; by default `ln(1e10) / (4 T)` for a run of duration `T`, so the
    /// wrapped tail shrinks by `1e-10` at the default padding and more beyond it
    pub damping: Option<f64>,
}

impl Default for PulseOptions {
    fn default() -> Self {
        PulseOptions {
            padding: 4,
            oversample: 2,
            taper: 0.05,
            damping: None,
        }
    }
}

/// Spectrum of the windowed incident pulse at the origin, `s(t) = g(c1 t - t0)`.
#[derive(Clone, Debug)]
pub struct SpectralPulse {
    pub wave: IncidentWave,
    pub dt: f64,
    pub steps: usize,
    /// time sample spacing
    pub h: f64,
    /// FFT length
    pub len: usize,
    /// run duration `steps * dt`
    pub window: f64,
    pub padding: usize,
    pub taper: f64,
    pub damping: f64,
    /// damped, tapered samples `s(t_j) e^{-sigma t_j}`
    pub samples: Vec<f64>,
    /// `h sum_j samples_j e^{i omega_k t_j}` for `k = 0..=len/2`
    pub spectrum: Vec<Complex64>,
}

fn taper_weight(t: f64, window: f64, fraction: f64) -> f64 {
    let start = (1.0 - fraction) * window;
    if t <= start {
        1.0
    } else if t >= window {
        0.0
    } else {
        let x = (t - start) / (window - start);
        (std::f64::consts::FRAC_PI_2 * x).cos().powi(2)
    }
}

impl SpectralPulse {
    pub fn new(wave: IncidentWave, steps: usize, dt: f64, opts: PulseOptions) -> Result<Self> {
        if steps == 0 || !(dt > 0.0) {
            return Err(Error::Config(format!("need steps > 0 and dt > 0, got {steps}, {dt}")));
        }
        if opts.padding < 2 || opts.oversample == 0 || !(0.0..1.0).contains(&opts.taper) {
            return Err(Error::Config(format!("invalid pulse options {opts:?}")));
        }
        let h = dt / opts.oversample as f64;
        let len = (opts.padding * steps * opts.oversample).next_multiple_of(2);
        let window = steps as f64 * dt;
        let damping = opts.damping.unwrap_or((1e10f64).ln() / (4.0 * window));
        if !(damping >= 0.0) {
            return Err(Error::Config(format!("damping must be non-negative, got {damping}")));
        }
        let (c1, t0) = (wave.speed(), wave.t0());
        let samples: Vec<f64> = (0..len)
            .map(|j| {
                let t = j as f64 * h;
                let w = taper_weight(t, window, opts.taper);
                if w == 0.0 {
                    0.0
                } else {
                    wave.profile(c1 * t - t0).0 * w * (-damping * t).exp()
                }
            })
            .collect();
        let mut buf: Vec<Complex64> = samples.iter().map(|s| Complex64::new(*s, 0.0)).collect();
        // the unnormalised inverse transform carries e^{+2 pi i jk / len} = e^{i omega_k t_j}
        FftPlanner::new().plan_fft_inverse(len).process(&mut buf);
        let spectrum = buf[..=len / 2].iter().map(|v| v * h).collect();
        Ok(SpectralPulse {
            wave,
            dt,
            steps,
            h,
            len,
            window,
            padding: opts.padding,
            taper: opts.taper,
            damping,
            samples,
            spectrum,
        })
    }

    pub fn omega(&self, k: usize) -> f64 {
        std::f64::consts::TAU * k as f64 / (self.len as f64 * self.h)
    }

    /// Frequency step against the resolution the run needs.
    pub fn resolves_run(&self) -> bool {
        self.omega(1) <= std::f64::consts::TAU / (self.padding as f64 * self.window) * (1.0 + 1e-12)
    }

    /// All `len` spectral samples, the upper half filled by conjugate symmetry.
    pub fn full_spectrum(&self) -> Vec<Complex64> {
        hermitian(&self.spectrum, self.len)
    }
}

fn hermitian(half: &[Complex64], len: usize) -> Vec<Complex64> {
    let mut full = vec![Complex64::new(0.0, 0.0); len];
    full[..half.len()].copy_from_slice(half);
    full[0].im = 0.0;
    full[len / 2].im = 0.0;
    for k in 1..len / 2 {
        full[len - k] = half[k].conj();
    }
    full
}

/// Which boundary unknowns the reference produces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceProblem {
    /// sound-soft circle; the unknown is `du/dn`
    Dirichlet,
    /// penetrable circle; unknowns `(u, q)`, or `(du/dt, q)` when `rate` is set
    Transmission { materials: Materials, rate: bool },
}

impl ReferenceProblem {
    /// The reference matching the unknowns of `formulation`.
    pub fn for_formulation(formulation: Formulation, materials: Materials) -> Self {
        if formulation.is_transmission() {
            ReferenceProblem::Transmission {
                materials,
                rate: formulation.is_modified(),
            }
        } else {
            ReferenceProblem::Dirichlet
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceProblem::Dirichlet => "dirichlet",
            ReferenceProblem::Transmission { .. } => "transmission",
        }
    }

    pub fn unknowns(&self) -> &'static [&'static str] {
        match self {
            ReferenceProblem::Dirichlet => &["q"],
            ReferenceProblem::Transmission { rate: false, .. } => &["u", "q"],
            ReferenceProblem::Transmission { rate: true, .. } => &["udot", "q"],
        }
    }

    /// Mode coefficients per unknown at complex frequency `z`, orders `0..`.
    fn transfer(&self, z: Complex64, c1: f64) -> Result<Vec<Vec<Complex64>>> {
        let zero = z == Complex64::new(0.0, 0.0);
        match self {
            ReferenceProblem::Dirichlet => {
                if zero {
                    return Ok(vec![vec![Complex64::new(0.0, 0.0)]]);
                }
                let k = z / c1;
                Ok(vec![mie_dirichlet_q(k, mode_count(k))?])
            }
            ReferenceProblem::Transmission { materials, rate } => {
                let k1 = z / materials.speed(0);
                let pairs = if zero {
                    static_limit(0)
                } else {
                    let kmax = k1.norm().max(k1.norm() * materials.speed(0) / materials.speed(1));
                    mie_transmission(k1, materials, mode_count(Complex64::new(kmax, 0.0)))?
                };
                let dtime = if *rate { -Complex64::i() * z } else { Complex64::new(1.0, 0.0) };
                Ok(vec![
                    pairs.iter().map(|p| p.u * dtime).collect(),
                    pairs.iter().map(|p| p.q).collect(),
                ])
            }
        }
    }
}

/// A reference history with the quantities used to judge it.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub history: SolutionHistory,
    /// largest response before the incident front reaches the circle, relative to the peak, before the causal window
    pub precursor: f64,
    /// estimated wrapped-around tail relative to the peak
    pub wraparound: f64,
}

/// Collocation angles of a unit-circle mesh.
fn collocation_angles(mesh: &BoundaryMesh) -> Result<Vec<f64>> {
    match mesh.shape {
        Shape::Circle { radius } if (radius - 1.0).abs() < 1e-14 => {
            Ok(mesh.midpoints.iter().map(|p| p.y.atan2(p.x)).collect())
        }
        _ => Err(Error::Reference(format!(
            "closed-form reference needs the unit circle, got {}",
            mesh.shape.name()
        ))),
    }
}

fn check_grid(pulse: &SpectralPulse, steps: usize, dt: f64) -> Result<()> {
    if (pulse.dt - dt).abs() > 1e-14 * dt || steps > pulse.steps || !pulse.resolves_run() {
        return Err(Error::Config(format!(
            "pulse grid (dt {}, {} steps) does not cover {steps} steps of {dt}",
            pulse.dt, pulse.steps
        )));
    }
    Ok(())
}

/// Reference history; see [`synthesise`] for the diagnostics.
pub fn exact_time_history(
    pulse: &SpectralPulse,
    problem: ReferenceProblem,
    mesh: &BoundaryMesh,
    steps: usize,
    dt: f64,
) -> Result<SolutionHistory> {
    Ok(synthesise(pulse, problem, mesh, steps, dt)?.history)
}

/// Multiplies the mode transfer by the pulse spectrum, inverse-transforms at
/// every collocation angle and samples the result at the marching steps.
pub fn synthesise(
    pulse: &SpectralPulse,
    problem: ReferenceProblem,
    mesh: &BoundaryMesh,
    steps: usize,
    dt: f64,
) -> Result<ReferenceRun> {
    check_grid(pulse, steps, dt)?;
    let angles = collocation_angles(mesh)?;
    let n = angles.len();
    let unknowns = problem.unknowns();
    let c1 = pulse.wave.speed();
    let sigma = pulse.damping;
    let half = pulse.len / 2;
    // per frequency: [unknown][point]
    let columns: Vec<Vec<Complex64>> = (0..=half)
        .into_par_iter()
        .map(|k| {
            let s = pulse.spectrum[k];
            if s == Complex64::new(0.0, 0.0) {
                return Ok(vec![Complex64::new(0.0, 0.0); unknowns.len() * n]);
            }
            let coeffs = problem.transfer(Complex64::new(pulse.omega(k), sigma), c1)?;
            let mut out = Vec::with_capacity(unknowns.len() * n);
            for c in &coeffs {
                for th in &angles {
                    let mut acc = c[0];
                    for (m, cm) in c.iter().enumerate().skip(1) {
                        acc += 2.0 * cm * (m as f64 * th).cos();
                    }
                    out.push(acc * s);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let fft = FftPlanner::new().plan_fft_forward(pulse.len);
    let scale = 1.0 / (pulse.len as f64 * pulse.h);
    let o = (pulse.dt / pulse.h).round() as usize;
    let run_samples = steps * o;
    // the late response in the padding zone, unwrapped to undamped size, shows
    // what wraps back one window later; ringing from before t = 0 sits past 0.9 len
    let tail_zone = pulse.len / 2..pulse.len * 9 / 10;
    let window_len = pulse.len as f64 * pulse.h;
    let arrival = (pulse.wave.t0() - 1.0) / c1;
    let mut traces = vec![vec![0.0; steps]; unknowns.len() * n];
    let mut peak: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let mut precursor: f64 = 0.0;
    for (slot, trace) in traces.iter_mut().enumerate() {
        let half_spec: Vec<Complex64> = columns.iter().map(|col| col[slot]).collect();
        let mut buf = hermitian(&half_spec, pulse.len);
        fft.process(&mut buf);
        for j in 0..=run_samples.min(pulse.len - 1) {
            let t = j as f64 * pulse.h;
            let v = buf[j].re * scale * (sigma * t).exp();
            peak = peak.max(v.abs());
            if t < arrival - 1e-12 {
                precursor = precursor.max(v.abs());
            }
        }
        for j in tail_zone.clone() {
            let t = j as f64 * pulse.h;
            tail = tail.max(buf[j].re.abs() * scale * (-sigma * (window_len - t)).exp());
        }
        for (l, out) in trace.iter_mut().enumerate() {
            let t = (l + 1) as f64 * dt;
            let j = (l + 1) * o;
            // causal window: nothing can respond before the front arrives
            *out = if t < arrival - 1e-12 {
                0.0
            } else {
                buf[j].re * scale * (sigma * t).exp()
            };
        }
    }
    let wraparound = if peak > 0.0 {
        tail / peak
    } else {
        0.0
    };
    if wraparound > WRAPAROUND_TOL {
        return Err(Error::Reference(format!(
            "wrapped-around tail is {wraparound:.2e} of the peak; increase the padding"
        )));
    }

    let mut history = SolutionHistory::new(
        problem.name().to_string(),
        unknowns.iter().map(|s| s.to_string()).collect(),
        n,
        dt,
        steps,
    );
    history.source = "reference".into();
    for l in 0..steps {
        let values: Vec<f64> = traces.iter().map(|tr| tr[l]).collect();
        let t = (l + 1) as f64 * dt;
        history.push(values, incident_scale(&pulse.wave, mesh, unknowns, t));
    }
    history.finish();
    Ok(ReferenceRun {
        history,
        precursor: if peak > 0.0 { precursor / peak } else { 0.0 },
        wraparound,
    })
}

fn incident_scale(wave: &IncidentWave, mesh: &BoundaryMesh, unknowns: &[&str], t: f64) -> Vec<f64> {
    let mut m = [0.0f64; 3];
    for (p, nrm) in mesh.midpoints.iter().zip(&mesh.normals) {
        let (u, ut, un) = incident_trace(wave, *p, *nrm, t);
        m[0] = m[0].max(u.abs());
        m[1] = m[1].max(ut.abs());
        m[2] = m[2].max(un.abs());
    }
    unknowns
        .iter()
        .map(|u| match *u {
            "u" => m[0],
            "udot" => m[1],
            _ => m[2],
        })
        .collect()
}
