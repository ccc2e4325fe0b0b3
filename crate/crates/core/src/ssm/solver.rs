//! Block-Hankel contour-integral eigensolver with Newton polishing.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::contour::ContourBox;
use crate::charfun::CharProblem;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SsmConfig {
    /// trapezoidal nodes on the contour
    pub nodes: usize,
    /// moments for matrix problems
    pub moments: usize,
    /// moments for 1x1 problems, which have a single probe column
    pub scalar_moments: usize,
    /// upper bound on the probe width; the width used is `min(probes, dim)`
    pub probes: usize,
    /// singular values of the Hankel matrix below this (relative) are dropped
    pub rank_tol: f64,
    /// accepted roots satisfy `sigma_min(F) / scale <= residual_tol`
    pub residual_tol: f64,
    pub newton_iters: usize,
    pub seed: u64,
}

impl Default for SsmConfig {
    fn default() -> Self {
        SsmConfig {
            nodes: 64,
            moments: 8,
            scalar_moments: 16,
            probes: 4,
            rank_tol: 1e-11,
            residual_tol: 1e-8,
            newton_iters: 40,
            seed: 0x5eed_2d_b1e,
        }
    }
}

impl SsmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 32 || self.moments == 0 || self.scalar_moments == 0 || self.probes == 0 {
            return Err(Error::Config(format!("invalid eigensolver settings {self:?}")));
        }
        Ok(())
    }
}

/// A certified eigenpair.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair {
    pub omega: Complex64,
    /// unit right null vector of `F(omega)`
    pub vector: DVector<Complex64>,
    pub residual: f64,
    /// Hankel eigenvalues that converged to this root
    pub multiplicity: usize,
}

/// Problem values on the contour nodes, shared by several probe draws.
pub struct NodeSamples {
    pub contour: ContourBox,
    pub shift: f64,
    pub values: Vec<DMatrix<Complex64>>,
}

impl NodeSamples {
    /// Median spectral norm over the nodes; the residual scale.
    pub fn scale(&self) -> f64 {
        let mut norms: Vec<f64> = self.values.iter().map(|m| m.norm()).collect();
        norms.sort_by(|a, b| a.total_cmp(b));
        norms[norms.len() / 2]
    }
}

/// Samples `f` on the contour, retrying once with shifted nodes if a node
/// lands on a numerically singular point.
pub fn sample(f: &dyn CharProblem, contour: &ContourBox) -> Result<NodeSamples> {
    let attempt = |shift: f64| -> Result<Option<NodeSamples>> {
        let mut values = Vec::with_capacity(contour.nodes);
        for th in contour.angles(shift) {
            let m = f.eval(contour.point(th))?;
            if !usable(&m) {
                return Ok(None);
            }
            values.push(m);
        }
        Ok(Some(NodeSamples {
            contour: *contour,
            shift,
            values,
        }))
    };
    match attempt(0.0)? {
        Some(s) => Ok(s),
        None => attempt(0.25)?.ok_or_else(|| {
            Error::Eigensolver(format!("problem singular at contour nodes around {}", contour.center))
        }),
    }
}

fn usable(m: &DMatrix<Complex64>) -> bool {
    if m.iter().any(|z| !z.is_finite()) {
        return false;
    }
    let sv = m.singular_values();
    let (lo, hi) = (sv.min(), sv.max());
    hi > 0.0 && lo > 1e-14 * hi
}

fn gaussian_block(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im)
    })
}

/// Raw Hankel-pencil eigenvalues inside the contour for one probe draw.
pub fn hankel_candidates(samples: &NodeSamples, cfg: &SsmConfig, seed: u64) -> Result<Vec<Complex64>> {
    let contour = &samples.contour;
    let dim = samples.values[0].nrows();
    let width = cfg.probes.min(dim);
    let kmom = if dim == 1 { cfg.scalar_moments } else { cfg.moments };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let left = gaussian_block(dim, width, &mut rng);
    let right = gaussian_block(dim, width, &mut rng);
    let rho = contour.a.max(contour.b);
    let q = contour.nodes as f64;
    let i = Complex64::i();
    let mut moments = vec![DMatrix::<Complex64>::zeros(width, width); 2 * kmom];
    // size of the integrand; moments far below it are quadrature noise
    let mut mass = 0.0;
    for (th, m) in contour.angles(samples.shift).into_iter().zip(&samples.values) {
        let z = contour.point(th);
        let dz = Complex64::new(-contour.a * th.sin(), contour.b * th.cos());
        let solved = m
            .clone()
            .lu()
            .solve(&right)
            .ok_or_else(|| Error::Eigensolver(format!("singular node at {z}")))?;
        let proj = left.adjoint() * solved;
        // (1 / 2 pi i) * integral in zeta = (z - c) / rho, weight 2 pi / Q
        let w = dz / (i * q * rho);
        let zeta = (z - contour.center) / rho;
        mass += proj.norm() * w.norm();
        let mut p = w;
        for mk in moments.iter_mut() {
            *mk += &proj * p;
            p *= zeta;
        }
    }
    let n = kmom * width;
    let mut h0 = DMatrix::<Complex64>::zeros(n, n);
    let mut h1 = DMatrix::<Complex64>::zeros(n, n);
    for r in 0..kmom {
        for c in 0..kmom {
            h0.view_mut((r * width, c * width), (width, width)).copy_from(&moments[r + c]);
            if r + c + 1 < 2 * kmom {
                h1.view_mut((r * width, c * width), (width, width)).copy_from(&moments[r + c + 1]);
            }
        }
    }
    let svd = h0.svd(true, true);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return Ok(Vec::new());
    }
    let floor = cfg.rank_tol * smax.max(mass);
    let rank = svd.singular_values.iter().filter(|s| **s > floor).count();
    if rank == 0 {
        return Ok(Vec::new());
    }
    if rank == n {
        return Err(Error::Eigensolver(format!(
            "Hankel matrix has full rank {n} around {}; subdivide the contour",
            contour.center
        )));
    }
    let u = svd.u.as_ref().expect("requested").columns(0, rank).into_owned();
    let vt = svd.v_t.as_ref().expect("requested").rows(0, rank).into_owned();
    let sinv = DMatrix::from_diagonal(&svd.singular_values.rows(0, rank).map(|s| Complex64::new(1.0 / s, 0.0)));
    let reduced = u.adjoint() * h1 * vt.adjoint() * sinv;
    let eig = reduced.eigenvalues().unwrap_or_else(|| reduced.clone().schur().eigenvalues().expect("complex Schur"));
    Ok(eig
        .iter()
        .map(|zeta| contour.center + zeta * rho)
        .filter(|z| z.is_finite() && contour.level(*z) < 1.2)
        .collect())
}

/// Newton iteration on the smallest singular triplet of `F`.
pub fn polish(f: &dyn CharProblem, start: Complex64, scale: f64, cfg: &SsmConfig) -> Result<Eigenpair> {
    let mut z = start;
    let mut best: Option<(Complex64, f64, DVector<Complex64>)> = None;
    for _ in 0..cfg.newton_iters {
        let m = f.eval(z)?;
        let (sigma, x, y) = smallest_triplet(&m);
        let res = sigma / scale;
        if best.as_ref().map_or(true, |b| res < b.1) {
            best = Some((z, res, x.clone()));
        }
        if res < 1e-15 {
            break;
        }
        let h = 1e-6 * (1.0 + z.norm());
        let dm = (f.eval(z + h)? - f.eval(z - h)?) / Complex64::new(2.0 * h, 0.0);
        let num = (y.adjoint() * &m * &x)[(0, 0)];
        let den = (y.adjoint() * dm * &x)[(0, 0)];
        if den.norm() == 0.0 {
            break;
        }
        let step = num / den;
        z -= step;
        if !z.is_finite() || step.norm() < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    let (omega, residual, vector) = best.expect("at least one iteration");
    Ok(Eigenpair {
        omega,
        vector,
        residual,
        multiplicity: 1,
    })
}

/// `(sigma_min, right vector, left vector)`.
fn smallest_triplet(m: &DMatrix<Complex64>) -> (f64, DVector<Complex64>, DVector<Complex64>) {
    if m.nrows() == 1 {
        let one = DVector::from_element(1, Complex64::new(1.0, 0.0));
        return (m[(0, 0)].norm(), one.clone(), one);
    }
    let svd = m.clone().svd(true, true);
    let k = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty");
    let u = svd.u.expect("requested").column(k).into_owned();
    let v = svd.v_t.expect("requested").row(k).adjoint();
    (svd.singular_values[k], v, u)
}

/// Polish, certify and merge raw candidates; keeps roots strictly inside the contour.
pub fn certify(
    f: &dyn CharProblem,
    samples: &NodeSamples,
    raw: &[Complex64],
    cfg: &SsmConfig,
) -> Result<Vec<Eigenpair>> {
    let scale = samples.scale();
    let mut out: Vec<Eigenpair> = Vec::new();
    for z in raw {
        let p = polish(f, *z, scale, cfg)?;
        if p.residual > cfg.residual_tol || !samples.contour.contains(p.omega) {
            continue;
        }
        if let Some(q) = out.iter_mut().find(|q| (q.omega - p.omega).norm() < 1e-6) {
            q.multiplicity += 1;
            if p.residual < q.residual {
                let m = q.multiplicity;
                *q = Eigenpair { multiplicity: m, ..p };
            }
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

/// Eigenvalues of `f` inside `contour`, certified by residual.
///
/// With fewer probe columns than the problem size, two independent draws are
/// run and their certified roots merged.
pub fn ssm_solve(f: &dyn CharProblem, contour: &ContourBox, cfg: &SsmConfig) -> Result<Vec<Eigenpair>> {
    cfg.validate()?;
    let samples = sample(f, contour)?;
    solve_sampled(f, &samples, cfg)
}

pub fn solve_sampled(f: &dyn CharProblem, samples: &NodeSamples, cfg: &SsmConfig) -> Result<Vec<Eigenpair>> {
    let dim = samples.values[0].nrows();
    let draws = if cfg.probes.min(dim) < dim { 2 } else { 1 };
    let mut raw = Vec::new();
    for d in 0..draws {
        raw.extend(hankel_candidates(samples, cfg, cfg.seed.wrapping_add(d as u64))?);
    }
    let mut roots = certify(f, samples, &raw, cfg)?;
    if draws == 2 {
        for r in roots.iter_mut() {
            r.multiplicity = r.multiplicity.div_ceil(2);
        }
    }
    roots.sort_by(|a, b| a.omega.re.total_cmp(&b.omega.re).then(a.omega.im.total_cmp(&b.omega.im)));
    Ok(roots)
}
