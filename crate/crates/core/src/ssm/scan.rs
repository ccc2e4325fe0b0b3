//! Strip scans over a family of mode problems.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::contour::{determinant, ContourBox, Rect};
use super::solver::{solve_sampled, NodeSamples, SsmConfig};
use crate::charfun::{FamilyMember, ModeFamily, CUT_MARGIN};
use crate::error::Result;

/// Roots with `Im > VERDICT_TOL` are growing modes.
pub const VERDICT_TOL: f64 = 1e-6;
/// Roots closer than this (same mode) are merged.
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub ssm: SsmConfig,
    /// tiles along the real and imaginary axes
    pub grid: (usize, usize),
    /// fractional growth of each tile before fitting its ellipse
    pub overlap: f64,
    /// quartering depth for tiles that touch a cut or fail
    pub max_depth: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            ssm: SsmConfig::default(),
            grid: (10, 4),
            overlap: 0.2,
            max_depth: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityVerdict {
    Stable,
    Marginal,
    Unstable,
}

impl std::fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StabilityVerdict::Stable => "stable",
            StabilityVerdict::Marginal => "marginal",
            StabilityVerdict::Unstable => "unstable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub re_omega: f64,
    pub im_omega: f64,
    pub n: usize,
    pub residual: f64,
    pub multiplicity: usize,
}

impl Root {
    pub fn omega(&self) -> Complex64 {
        Complex64::new(self.re_omega, self.im_omega)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub formulation: String,
    pub region: Rect,
    pub roots: Vec<Root>,
    /// modes for which `Omega = 0` is a root
    pub zero_modes: Vec<usize>,
    pub verdict: StabilityVerdict,
    /// per-tile failures, as messages
    pub failures: Vec<String>,
    /// parts of the region no contour could cover
    pub uncovered: Vec<Rect>,
    pub config: ScanConfig,
}

impl RootSet {
    pub fn max_im(&self) -> Option<f64> {
        let zero = (!self.zero_modes.is_empty()).then_some(0.0);
        self.roots.iter().map(|r| r.im_omega).chain(zero).reduce(f64::max)
    }

    /// Writes `formulation,n,re_omega,im_omega,residual`; zero roots included.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["formulation", "n", "re_omega", "im_omega", "residual"])?;
        let mut rows: Vec<(usize, f64, f64, f64)> = self.zero_modes.iter().map(|n| (*n, 0.0, 0.0, 0.0)).collect();
        rows.extend(self.roots.iter().map(|r| (r.n, r.re_omega, r.im_omega, r.residual)));
        for (n, re, im, res) in rows {
            wr.write_record([
                self.formulation.clone(),
                n.to_string(),
                format!("{re:.15e}"),
                format!("{im:.15e}"),
                format!("{res:.3e}"),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn verdict(max_im: Option<f64>) -> StabilityVerdict {
    match max_im {
        Some(m) if m > VERDICT_TOL => StabilityVerdict::Unstable,
        Some(m) if m >= -VERDICT_TOL => StabilityVerdict::Marginal,
        _ => StabilityVerdict::Stable,
    }
}

/// The default search region `[0, pi/dt] x [-2, 2]`.
pub fn default_region(dt: f64) -> Rect {
    Rect {
        re0: 0.0,
        re1: std::f64::consts::PI / dt,
        im0: -2.0,
        im1: 2.0,
    }
}

/// Real parts of the lattice-shifted cuts that a contour around `region` could meet.
pub fn cut_lines(region: &Rect, dt: f64) -> Vec<f64> {
    let period = TAU / dt;
    let pad = region.width().max(region.height());
    let lo = ((region.re0 - pad) / period).floor() as i64;
    let hi = ((region.re1 + pad) / period).ceil() as i64;
    (lo..=hi).map(|m| m as f64 * period).collect()
}

struct TileOutcome {
    roots: Vec<Root>,
    failures: Vec<String>,
    uncovered: Vec<Rect>,
}

/// Samples every mode of the family at once on the contour nodes.
fn sample_family(family: &dyn ModeFamily, contour: &ContourBox, shift: f64) -> Result<Vec<Vec<DMatrix<Complex64>>>> {
    let per_node: Vec<Vec<DMatrix<Complex64>>> = contour
        .angles(shift)
        .into_iter()
        .map(|th| family.eval_all(contour.point(th)))
        .collect::<Result<_>>()?;
    let modes = per_node[0].len();
    let mut per_mode = vec![Vec::with_capacity(per_node.len()); modes];
    for node in per_node {
        for (k, m) in node.into_iter().enumerate() {
            per_mode[k].push(m);
        }
    }
    Ok(per_mode)
}

fn tile(
    family: &dyn ModeFamily,
    rect: Rect,
    modes: &[usize],
    region: &Rect,
    cuts: &[f64],
    cfg: &ScanConfig,
    depth: usize,
) -> TileOutcome {
    let mut out = TileOutcome {
        roots: Vec::new(),
        failures: Vec::new(),
        uncovered: Vec::new(),
    };
    let q = cfg.ssm.nodes;
    let contour = [ContourBox::around(&rect, cfg.overlap, q), ContourBox::tall_around(&rect, cfg.overlap, q)]
        .into_iter()
        .find(|c| c.avoids_cuts(cuts, 10.0 * CUT_MARGIN));
    let split = |out: &mut TileOutcome, modes: &[usize], why: Option<String>| {
        if depth >= cfg.max_depth {
            match why {
                Some(msg) => out.failures.push(msg),
                None => out.uncovered.push(rect),
            }
            return;
        }
        for sub in rect.split() {
            let o = tile(family, sub, modes, region, cuts, cfg, depth + 1);
            out.roots.extend(o.roots);
            out.failures.extend(o.failures);
            out.uncovered.extend(o.uncovered);
        }
    };
    let Some(contour) = contour else {
        split(&mut out, modes, None);
        return out;
    };
    let sampled = sample_family(family, &contour, 0.0).or_else(|_| sample_family(family, &contour, 0.25));
    let per_mode = match sampled {
        Ok(p) => p,
        Err(e) => {
            split(&mut out, modes, Some(format!("tile {rect:?}: {e}")));
            return out;
        }
    };
    let mut retry = Vec::new();
    for &k in modes {
        let member = FamilyMember { family, index: k };
        let samples = NodeSamples {
            contour,
            shift: 0.0,
            values: per_mode[k].clone(),
        };
        match solve_sampled(&member, &samples, &cfg.ssm) {
            Ok(pairs) => {
                let labels = family.modes();
                out.roots.extend(
                    pairs
                        .into_iter()
                        .filter(|p| region.contains(p.omega))
                        .map(|p| Root {
                            re_omega: p.omega.re,
                            im_omega: p.omega.im,
                            n: labels[k],
                            residual: p.residual,
                            multiplicity: p.multiplicity,
                        }),
                );
            }
            Err(e) => retry.push((k, e.to_string())),
        }
    }
    if !retry.is_empty() {
        let ks: Vec<usize> = retry.iter().map(|r| r.0).collect();
        let msg = retry
            .iter()
            .map(|(k, e)| format!("mode index {k}: {e}"))
            .collect::<Vec<_>>()
            .join("; ");
        split(&mut out, &ks, Some(format!("tile {rect:?}: {msg}")));
    }
    out
}

/// `|det F(i eps)| / |det F(i)|` per mode.
fn origin_ratio(family: &dyn ModeFamily, eps: f64) -> Result<Vec<f64>> {
    let near = family.eval_all(Complex64::new(0.0, eps))?;
    let reference = family.eval_all(Complex64::new(0.0, 1.0))?;
    Ok(near
        .iter()
        .zip(&reference)
        .map(|(m, r)| determinant(m).norm() / determinant(r).norm())
        .collect())
}

/// Modes whose characteristic determinant vanishes as `Omega -> 0` along the
/// positive imaginary axis (the origin itself sits on the cut).
///
/// A row that diverges there does not count: its determinant stays finite.
pub fn zero_root_modes(family: &dyn ModeFamily) -> Result<Vec<usize>> {
    let far = origin_ratio(family, 1e-7)?;
    let near = origin_ratio(family, 1e-8)?;
    let labels = family.modes();
    Ok(near
        .iter()
        .zip(&far)
        .enumerate()
        .filter(|(_, (a, b))| **a < 1e-5 && **a < 0.3 * **b)
        .map(|(k, _)| labels[k])
        .collect())
}

/// Tiles `region`, solves every mode on every tile and merges the results.
pub fn scan_strip(family: &dyn ModeFamily, region: Rect, dt: f64, cfg: &ScanConfig) -> Result<RootSet> {
    cfg.ssm.validate()?;
    let cuts = cut_lines(&region, dt);
    let (nx, ny) = cfg.grid;
    let (w, h) = (region.width() / nx as f64, region.height() / ny as f64);
    let tiles: Vec<Rect> = (0..ny)
        .flat_map(|j| {
            (0..nx).map(move |i| Rect {
                re0: region.re0 + i as f64 * w,
                re1: region.re0 + (i + 1) as f64 * w,
                im0: region.im0 + j as f64 * h,
                im1: region.im0 + (j + 1) as f64 * h,
            })
        })
        .collect();
    let all: Vec<usize> = (0..family.modes().len()).collect();
    let outcomes: Vec<TileOutcome> = tiles
        .par_iter()
        .map(|t| tile(family, *t, &all, &region, &cuts, cfg, 0))
        .collect();
    let mut roots = Vec::new();
    let mut failures = Vec::new();
    let mut uncovered = Vec::new();
    for o in outcomes {
        roots.extend(o.roots);
        failures.extend(o.failures);
        uncovered.extend(o.uncovered);
    }
    let roots = dedup(roots);
    let zero_modes = if region.contains(Complex64::new(0.0, 0.0)) {
        zero_root_modes(family)?
    } else {
        Vec::new()
    };
    let mut set = RootSet {
        formulation: family.name(),
        region,
        roots,
        zero_modes,
        verdict: StabilityVerdict::Stable,
        failures,
        uncovered,
        config: *cfg,
    };
    set.verdict = verdict(set.max_im());
    Ok(set)
}

/// Merges roots of the same mode closer than [`DEDUP_TOL`], keeping the smaller residual.
pub fn dedup(mut roots: Vec<Root>) -> Vec<Root> {
    roots.sort_by(|a, b| {
        a.n.cmp(&b.n)
            .then(a.re_omega.total_cmp(&b.re_omega))
            .then(a.im_omega.total_cmp(&b.im_omega))
    });
    let mut out: Vec<Root> = Vec::new();
    for r in roots {
        // sorted by real part, so a duplicate sits among the last few kept roots
        let dup = out
            .iter_mut()
            .rev()
            .take_while(|q| q.n == r.n && r.re_omega - q.re_omega < DEDUP_TOL)
            .find(|q| (q.omega() - r.omega()).norm() < DEDUP_TOL);
        match dup {
            Some(q) => {
                if r.residual < q.residual {
                    *q = r;
                }
            }
            None => out.push(r),
        }
    }
    out
}
