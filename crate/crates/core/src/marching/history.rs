//! Solution histories, the growth diagnostic and the history CSV format.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates above this (per step) count as growth.
pub const GROWTH_THRESHOLD: f64 = 1e-3;
/// Width of the max-amplitude windows fitted by the diagnostic.
pub const GROWTH_WINDOW: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Bounded,
    Growing,
    Overflowed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Bounded => "bounded",
            Verdict::Growing => "growing",
            Verdict::Overflowed => "overflowed",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthDiagnostic {
    pub verdict: Verdict,
    /// fitted exponential rate of the normalised amplitude, per step
    pub rate: f64,
    /// max normalised amplitude over the last tenth of the run divided by
    /// the max over the second quarter
    pub late_ratio: f64,
}

/// Per-step nodal vectors of the unknowns, unknown-major within a step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionHistory {
    pub formulation: String,
    pub unknowns: Vec<String>,
    pub n: usize,
    pub dt: f64,
    pub requested_steps: usize,
    /// `values[l - 1]` holds step `l`
    pub values: Vec<Vec<f64>>,
    /// incident magnitude per unknown and step; empty means unit scale
    pub scale: Vec<Vec<f64>>,
    pub overflowed: bool,
    pub source: String,
    pub growth: Option<GrowthDiagnostic>,
}

impl SolutionHistory {
    pub fn new(formulation: String, unknowns: Vec<String>, n: usize, dt: f64, requested_steps: usize) -> Self {
        SolutionHistory {
            formulation,
            unknowns,
            n,
            dt,
            requested_steps,
            values: Vec::with_capacity(requested_steps),
            scale: Vec::new(),
            overflowed: false,
            source: "marching".into(),
            growth: None,
        }
    }

    pub fn push(&mut self, values: Vec<f64>, scale: Vec<f64>) {
        self.values.push(values);
        self.scale.push(scale);
    }

    /// Attach the growth diagnostic.
    pub fn finish(&mut self) {
        self.growth = Some(growth_diagnostic(self));
    }

    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self, l: usize) -> &[f64] {
        &self.values[l - 1]
    }

    /// Nodal values of unknown `k` at step `l`.
    pub fn unknown(&self, l: usize, k: usize) -> &[f64] {
        &self.values[l - 1][k * self.n..(k + 1) * self.n]
    }

    pub fn unknown_index(&self, name: &str) -> Option<usize> {
        self.unknowns.iter().position(|u| u == name)
    }

    pub fn all_finite(&self) -> bool {
        !self.overflowed && self.values.iter().flatten().all(|v| v.is_finite())
    }

    /// Trapezoidal time integral of unknown `k` from a silent start.
    pub fn integrated(&self, k: usize) -> Vec<Vec<f64>> {
        let mut acc = vec![0.0; self.n];
        let mut prev = vec![0.0; self.n];
        let mut out = Vec::with_capacity(self.steps());
        for l in 1..=self.steps() {
            let cur = self.unknown(l, k);
            for ((a, p), c) in acc.iter_mut().zip(&prev).zip(cur) {
                *a += 0.5 * self.dt * (p + c);
            }
            prev.copy_from_slice(cur);
            out.push(acc.clone());
        }
        out
    }

    /// Writes `step,node,value[,value2]`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["step".to_string(), "node".to_string(), "value".to_string()];
        for k in 1..self.unknowns.len() {
            header.push(format!("value{}", k + 1));
        }
        wr.write_record(&header)?;
        for l in 1..=self.steps() {
            for i in 0..self.n {
                let mut rec = vec![l.to_string(), i.to_string()];
                for k in 0..self.unknowns.len() {
                    rec.push(format!("{:e}", self.unknown(l, k)[i]));
                }
                wr.write_record(&rec)?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`SolutionHistory::write_csv`]; rows must be
    /// sorted by step then node with no gaps.
    pub fn read_csv<R: Read>(r: R, dt: f64) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.clone();
        let width = header.len();
        if width < 3 || &header[0] != "step" || &header[1] != "node" || &header[2] != "value" {
            return Err(Error::Parse("history CSV needs columns step,node,value[,value2]".into()));
        }
        let count = width - 2;
        let mut rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != width {
                return Err(Error::Parse(format!("row has {} fields, expected {width}", rec.len())));
            }
            let int = |s: &str| s.trim().parse::<usize>().map_err(|_| Error::Parse(format!("bad index `{s}`")));
            let vals = (2..width)
                .map(|k| rec[k].trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad value `{}`", &rec[k]))))
                .collect::<Result<Vec<_>>>()?;
            rows.push((int(&rec[0])?, int(&rec[1])?, vals));
        }
        let n = rows.iter().take_while(|r| r.0 == 1).count();
        if n == 0 || rows.len() % n != 0 {
            return Err(Error::Parse("history CSV is empty or ragged".into()));
        }
        let steps = rows.len() / n;
        let mut hist = SolutionHistory::new(
            "unknown".into(),
            (0..count).map(|k| format!("value{}", k + 1)).collect(),
            n,
            dt,
            steps,
        );
        hist.source = "csv".into();
        for l in 1..=steps {
            let mut v = vec![0.0; count * n];
            for i in 0..n {
                let (s, node, vals) = &rows[(l - 1) * n + i];
                if *s != l || *node != i {
                    return Err(Error::Parse(format!("expected step {l} node {i}, found step {s} node {node}")));
                }
                for k in 0..count {
                    v[k * n + i] = vals[k];
                }
            }
            hist.values.push(v);
        }
        Ok(hist)
    }
}

/// Fits `log` of the windowed maximum of the normalised amplitude over the last
/// half of the run against the step index.
pub fn growth_diagnostic(history: &SolutionHistory) -> GrowthDiagnostic {
    let steps = history.steps();
    let amp: Vec<f64> = (1..=steps)
        .map(|l| {
            let mut a = 0.0f64;
            for k in 0..history.unknowns.len() {
                let s = history.scale.get(l - 1).map_or(1.0, |s| s[k]);
                let m = history.unknown(l, k).iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if m > 0.0 && s > 0.0 {
                    a = a.max(m / s);
                }
            }
            a
        })
        .collect();
    let window_max = |a: usize, b: usize| amp[a.min(steps)..b.min(steps)].iter().cloned().fold(0.0, f64::max);
    let late_ratio = {
        let late = window_max(steps - steps / 10, steps);
        let mid = window_max(steps / 4, steps / 2);
        if mid > 0.0 {
            late / mid
        } else if late > 0.0 {
            f64::INFINITY
        } else {
            1.0
        }
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut start = steps / 2;
    while start + GROWTH_WINDOW <= steps {
        let m = window_max(start, start + GROWTH_WINDOW);
        if m > 0.0 && m.is_finite() {
            xs.push((start + GROWTH_WINDOW / 2) as f64);
            ys.push(m.ln());
        }
        start += GROWTH_WINDOW;
    }
    let rate = if xs.len() >= 2 {
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        sxy / sxx
    } else {
        0.0
    };
    let verdict = if !history.all_finite() {
        Verdict::Overflowed
    } else if rate > GROWTH_THRESHOLD {
        Verdict::Growing
    } else {
        Verdict::Bounded
    };
    GrowthDiagnostic {
        verdict,
        rate,
        late_ratio,
    }
}

/// Root-mean-square of the spatial Fourier content with `|mode| > min_mode`
/// of unknown `k` at every step.
pub fn high_mode_rms(history: &SolutionHistory, k: usize, min_mode: usize) -> Vec<f64> {
    let n = history.n;
    let fft = rustfft::FftPlanner::<f64>::new().plan_fft_forward(n);
    (1..=history.steps())
        .map(|l| {
            let mut buf: Vec<Complex64> = history.unknown(l, k).iter().map(|v| Complex64::new(*v, 0.0)).collect();
            fft.process(&mut buf);
            let power: f64 = buf
                .iter()
                .enumerate()
                .filter(|(m, _)| (*m).min(n - *m) > min_mode)
                .map(|(_, c)| c.norm_sqr())
                .sum();
            (power / (n * n) as f64).sqrt()
        })
        .collect()
}

/// High-mode content of one unknown in two windows of a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevels {
    /// windowed RMS over the `window` steps starting at mid-run
    pub mid: f64,
    /// windowed RMS over the last `window` steps
    pub late: f64,
    /// RMS of the full nodal vector over the last window
    pub solution: f64,
}

impl NoiseLevels {
    /// `late / mid`, the persistence ratio.
    pub fn ratio(&self) -> f64 {
        if self.mid > 0.0 {
            self.late / self.mid
        } else if self.late > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    /// Whether both windows are at rounding level relative to the solution.
    pub fn at_rounding_level(&self, rel: f64) -> bool {
        self.mid.max(self.late) <= rel * self.solution
    }
}

pub fn noise_levels(history: &SolutionHistory, k: usize, min_mode: usize, window: usize) -> NoiseLevels {
    let rms = high_mode_rms(history, k, min_mode);
    let steps = rms.len();
    let window_rms = |a: usize, b: usize, f: &dyn Fn(usize) -> f64| {
        let (a, b) = (a.min(steps), b.min(steps));
        ((a..b).map(|i| f(i).powi(2)).sum::<f64>() / (b - a).max(1) as f64).sqrt()
    };
    let late_start = steps.saturating_sub(window);
    let full = |i: usize| {
        let v = history.unknown(i + 1, k);
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    };
    NoiseLevels {
        mid: window_rms(steps / 2, steps / 2 + window, &|i| rms[i]),
        late: window_rms(late_start, steps, &|i| rms[i]),
        solution: window_rms(late_start, steps, &full),
    }
}
