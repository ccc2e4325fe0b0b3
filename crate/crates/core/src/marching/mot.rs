//! Marching-on-in-time: per-lag system blocks and the time loop.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use nalgebra::{DMatrix, DVector, Vector2};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::formulation::{Formulation, Materials, Recipe, TermKind};
use super::history::SolutionHistory;
use super::incident::{incident_trace, IncidentWave};
use crate::error::{Error, Result};
use crate::geometry::BoundaryMesh;
use crate::tdkernels::{assemble_history, KernelCache, KernelHistory, PotentialKind};

/// Environment variable naming the on-disk kernel cache directory.
pub const CACHE_ENV: &str = "TDBIE_CACHE_DIR";

/// Values beyond this are treated as overflow.
const OVERFLOW: f64 = 1e150;

/// Kernel histories shared between operators, in memory and optionally on disk.
#[derive(Default)]
pub struct KernelStore {
    cache: Option<KernelCache>,
    memo: Mutex<HashMap<String, Arc<KernelHistory>>>,
}

impl KernelStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_cache_dir(dir: impl Into<PathBuf>) -> Result<Self> {
        Ok(KernelStore {
            cache: Some(KernelCache::new(dir)?),
            memo: Mutex::default(),
        })
    }

    /// Uses the directory in [`CACHE_ENV`] when set.
    pub fn from_env() -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(dir) if !dir.is_empty() => Self::with_cache_dir(PathBuf::from(dir)),
            _ => Ok(Self::in_memory()),
        }
    }

    pub fn get(&self, kind: PotentialKind, mesh: &BoundaryMesh, c: f64, dt: f64, max_lag: usize) -> Result<Arc<KernelHistory>> {
        let key = format!(
            "{}-{}-{}-{:x}-{:x}-{max_lag}",
            mesh.fingerprint(),
            mesh.len(),
            kind.tag(),
            c.to_bits(),
            dt.to_bits()
        );
        if let Some(h) = self.memo.lock().expect("kernel memo poisoned").get(&key) {
            return Ok(h.clone());
        }
        let hist = match &self.cache {
            Some(cache) => cache.get_or_assemble(kind, mesh, c, dt, max_lag)?,
            None => assemble_history(kind, mesh, c, dt, max_lag)?,
        };
        let hist = Arc::new(hist);
        self.memo.lock().expect("kernel memo poisoned").insert(key, hist.clone());
        Ok(hist)
    }

    pub fn clear(&self) {
        self.memo.lock().expect("kernel memo poisoned").clear();
    }
}

enum Storage {
    /// Circulant blocks: per-lag first rows and their per-mode symbols.
    Fourier {
        /// `[lag][row][col][m]`
        first_rows: Vec<f64>,
        /// `[lag][mode][row][col]`
        symbols: Vec<Complex64>,
        lu0: Vec<nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>>,
    },
    Dense {
        blocks: Vec<DMatrix<f64>>,
        lu0: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    },
}

/// The per-lag system blocks of one formulation on one mesh.
pub struct MotOperator {
    pub recipe: Recipe,
    pub materials: Materials,
    pub dt: f64,
    pub max_lag: usize,
    mesh: BoundaryMesh,
    storage: Storage,
}

pub fn assemble_mot(
    formulation: Formulation,
    mesh: &BoundaryMesh,
    materials: &Materials,
    dt: f64,
    max_lag: usize,
) -> Result<MotOperator> {
    assemble_mot_with(&KernelStore::from_env()?, formulation, mesh, materials, dt, max_lag)
}

pub fn assemble_mot_with(
    store: &KernelStore,
    formulation: Formulation,
    mesh: &BoundaryMesh,
    materials: &Materials,
    dt: f64,
    max_lag: usize,
) -> Result<MotOperator> {
    if !(dt > 0.0 && dt.is_finite()) || max_lag == 0 {
        return Err(Error::Config(format!("need dt > 0 and max_lag >= 1, got dt = {dt}, max_lag = {max_lag}")));
    }
    let recipe = formulation.recipe(materials).expanded();
    let n = mesh.len();
    let size = recipe.size();
    let mut kernels = Vec::new();
    for t in &recipe.terms {
        if let TermKind::Potential(k) = t.kind {
            kernels.push(Some(store.get(k, mesh, materials.speed(t.domain), dt, max_lag)?));
        } else {
            kernels.push(None);
        }
    }
    // scalar weight an identity-like term puts on a given lag
    let identity_weight = |kind: TermKind, lag: usize| match (kind, lag) {
        (TermKind::Identity, 0) => 1.0,
        (TermKind::IdentityRate, 0) => 1.0 / dt,
        (TermKind::IdentityRate, 1) => -1.0 / dt,
        _ => 0.0,
    };
    let lags = max_lag + 1;
    let storage = if mesh.is_uniform_circle() {
        let mut first_rows = vec![0.0; lags * size * size * n];
        first_rows.par_chunks_mut(size * size * n).enumerate().for_each(|(lag, chunk)| {
            for (t, k) in recipe.terms.iter().zip(&kernels) {
                let row = &mut chunk[(t.row * size + t.col) * n..][..n];
                match k {
                    Some(h) => {
                        let src = h.first_row(lag).expect("circle kernels are circulant");
                        for (d, s) in row.iter_mut().zip(src) {
                            *d += t.coeff * s;
                        }
                    }
                    None => row[0] += t.coeff * identity_weight(t.kind, lag),
                }
            }
        });
        let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);
        let mut symbols = vec![Complex64::new(0.0, 0.0); lags * n * size * size];
        symbols.par_chunks_mut(n * size * size).enumerate().for_each(|(lag, out)| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for rc in 0..size * size {
                let src = &first_rows[(lag * size * size + rc) * n..][..n];
                for (b, s) in buf.iter_mut().zip(src) {
                    *b = Complex64::new(*s, 0.0);
                }
                // eigenvalue of mode k is sum_m a_m exp(+2 pi i k m / n)
                ifft.process(&mut buf);
                for (k, v) in buf.iter().enumerate() {
                    out[k * size * size + rc] = *v;
                }
            }
        });
        let lu0 = (0..n)
            .map(|k| {
                let m = DMatrix::from_row_slice(size, size, &symbols[k * size * size..(k + 1) * size * size]);
                let lu = m.lu();
                check_pivots(lu.u().diagonal().iter().map(|z| z.norm()), formulation)?;
                Ok(lu)
            })
            .collect::<Result<Vec<_>>>()?;
        Storage::Fourier {
            first_rows,
            symbols,
            lu0,
        }
    } else {
        let dim = size * n;
        let blocks: Vec<DMatrix<f64>> = (0..lags)
            .into_par_iter()
            .map(|lag| {
                let mut block = DMatrix::zeros(dim, dim);
                for (t, k) in recipe.terms.iter().zip(&kernels) {
                    for j in 0..n {
                        for i in 0..n {
                            let w = match k {
                                Some(h) => h.entry(lag, i, j),
                                None if i == j => identity_weight(t.kind, lag),
                                None => 0.0,
                            };
                            block[(t.row * n + i, t.col * n + j)] += t.coeff * w;
                        }
                    }
                }
                block
            })
            .collect();
        let lu0 = blocks[0].clone().lu();
        check_pivots(lu0.u().diagonal().iter().map(|v| v.abs()), formulation)?;
        Storage::Dense { blocks, lu0 }
    };
    Ok(MotOperator {
        recipe,
        materials: *materials,
        dt,
        max_lag,
        mesh: mesh.clone(),
        storage,
    })
}

fn check_pivots(pivots: impl Iterator<Item = f64>, formulation: Formulation) -> Result<()> {
    let p: Vec<f64> = pivots.collect();
    let big = p.iter().cloned().fold(0.0, f64::max);
    let small = p.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(big > 0.0 && small > 1e-13 * big) {
        return Err(Error::SingularSystem(formulation.to_string()));
    }
    Ok(())
}

impl MotOperator {
    pub fn formulation(&self) -> Formulation {
        self.recipe.formulation
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn n(&self) -> usize {
        self.mesh.len()
    }

    pub fn size(&self) -> usize {
        self.recipe.size()
    }

    pub fn is_circulant(&self) -> bool {
        matches!(self.storage, Storage::Fourier { .. })
    }

    /// The full system block at `lag`, unknown-major.
    pub fn block(&self, lag: usize) -> DMatrix<f64> {
        let (n, size) = (self.n(), self.size());
        let dim = n * size;
        match &self.storage {
            Storage::Dense { blocks, .. } => blocks[lag].clone(),
            Storage::Fourier { first_rows, .. } => DMatrix::from_fn(dim, dim, |i, j| {
                let (r, a) = (i / n, i % n);
                let (c, b) = (j / n, j % n);
                first_rows[(lag * size * size + r * size + c) * n + (b + n - a) % n]
            }),
        }
    }

    /// The same operator with dense blocks, marched without the Fourier splitting.
    pub fn densified(&self) -> Result<MotOperator> {
        let blocks: Vec<DMatrix<f64>> = (0..=self.max_lag).map(|lag| self.block(lag)).collect();
        let lu0 = blocks[0].clone().lu();
        check_pivots(lu0.u().diagonal().iter().map(|v| v.abs()), self.formulation())?;
        Ok(MotOperator {
            recipe: self.recipe.clone(),
            materials: self.materials,
            dt: self.dt,
            max_lag: self.max_lag,
            mesh: self.mesh.clone(),
            storage: Storage::Dense { blocks, lu0 },
        })
    }

    /// Per-mode symbols of a circulant block, `None` for general meshes.
    pub fn mode_symbols(&self, lag: usize) -> Option<Vec<DMatrix<Complex64>>> {
        let (n, size) = (self.n(), self.size());
        match &self.storage {
            Storage::Fourier { symbols, .. } => Some(
                (0..n)
                    .map(|k| DMatrix::from_row_slice(size, size, &symbols[(lag * n + k) * size * size..][..size * size]))
                    .collect(),
            ),
            Storage::Dense { .. } => None,
        }
    }

    /// Incident data `f_l` at time `t`, unknown-major.
    pub fn right_side(&self, wave: &IncidentWave, t: f64) -> DVector<f64> {
        let n = self.n();
        let mut f = DVector::zeros(self.size() * n);
        for i in 0..n {
            let (u, ut, un) = incident_trace(wave, self.mesh.midpoints[i], self.mesh.normals[i], t);
            for (row, r) in self.recipe.rhs.iter().enumerate() {
                f[row * n + i] = r.u * u + r.udot * ut + r.dudn * un;
            }
        }
        f
    }

    /// Incident magnitude scale per unknown at time `t`, used to normalise growth.
    pub fn incident_scale(&self, wave: &IncidentWave, t: f64) -> Vec<f64> {
        let mut m = [0.0f64; 3];
        for i in 0..self.n() {
            let (u, ut, un) = incident_trace(wave, self.mesh.midpoints[i], self.mesh.normals[i], t);
            m[0] = m[0].max(u.abs());
            m[1] = m[1].max(ut.abs());
            m[2] = m[2].max(un.abs());
        }
        self.recipe
            .formulation
            .unknowns()
            .iter()
            .map(|u| match *u {
                "u" => m[0],
                "udot" => m[1],
                _ => m[2],
            })
            .collect()
    }
}

/// March `steps` steps from a silent initial state.
pub fn march(op: &MotOperator, wave: &IncidentWave, steps: usize) -> Result<SolutionHistory> {
    if steps == 0 {
        return Err(Error::Config("need at least one step".into()));
    }
    if steps > op.max_lag + 1 {
        return Err(Error::Config(format!(
            "{steps} steps need kernels up to lag {}, operator has {}",
            steps - 1,
            op.max_lag
        )));
    }
    let (n, size) = (op.n(), op.size());
    let dim = n * size;
    let dt = op.dt;
    let mut hist = SolutionHistory::new(
        op.formulation().to_string(),
        op.formulation().unknowns().iter().map(|s| s.to_string()).collect(),
        n,
        dt,
        steps,
    );
    match &op.storage {
        Storage::Dense { blocks, lu0 } => {
            let mut past: Vec<DVector<f64>> = Vec::with_capacity(steps);
            let mut first = 1;
            'chunks: while first <= steps {
                let last = (first + HISTORY_CHUNK - 1).min(steps);
                let far = far_history(blocks, &past, first, last);
                for l in first..=last {
                    let f = op.right_side(wave, l as f64 * dt);
                    let mut h = far.column(l - first).into_owned();
                    for j in 1..=l - first {
                        h.gemv(1.0, &blocks[j], &past[l - j - 1], 1.0);
                    }
                    let v = lu0.solve(&(f - h)).ok_or_else(|| Error::SingularSystem(op.formulation().to_string()))?;
                    if !accept(&v) {
                        hist.overflowed = true;
                        break 'chunks;
                    }
                    hist.push(v.as_slice().to_vec(), op.incident_scale(wave, l as f64 * dt));
                    past.push(v);
                }
                first = last + 1;
            }
        }
        Storage::Fourier { symbols, lu0, .. } => {
            let mut planner = FftPlanner::<f64>::new();
            let fft = planner.plan_fft_forward(n);
            let ifft = planner.plan_fft_inverse(n);
            // past[l-1][k * size + unknown]
            let mut past: Vec<Vec<Complex64>> = Vec::with_capacity(steps);
            for l in 1..=steps {
                let f = op.right_side(wave, l as f64 * dt);
                let mut fhat = vec![Complex64::new(0.0, 0.0); n * size];
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                for r in 0..size {
                    for (b, v) in buf.iter_mut().zip(&f.as_slice()[r * n..(r + 1) * n]) {
                        *b = Complex64::new(*v, 0.0);
                    }
                    fft.process(&mut buf);
                    for k in 0..n {
                        fhat[k * size + r] = buf[k];
                    }
                }
                let vhat: Vec<Complex64> = (0..n)
                    .into_par_iter()
                    .flat_map_iter(|k| {
                        let mut rhs = DVector::from_column_slice(&fhat[k * size..(k + 1) * size]);
                        for j in 1..l {
                            let s = &symbols[(j * n + k) * size * size..][..size * size];
                            let v = &past[l - j - 1][k * size..(k + 1) * size];
                            for r in 0..size {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for c in 0..size {
                                    acc += s[r * size + c] * v[c];
                                }
                                rhs[r] -= acc;
                            }
                        }
                        let x = lu0[k].solve(&rhs).unwrap_or_else(|| DVector::from_element(size, Complex64::new(f64::NAN, 0.0)));
                        x.iter().copied().collect::<Vec<_>>()
                    })
                    .collect();
                let mut v = DVector::zeros(dim);
                for r in 0..size {
                    for k in 0..n {
                        buf[k] = vhat[k * size + r];
                    }
                    ifft.process(&mut buf);
                    for k in 0..n {
                        v[r * n + k] = buf[k].re / n as f64;
                    }
                }
                if !accept(&v) {
                    hist.overflowed = true;
                    break;
                }
                hist.push(v.as_slice().to_vec(), op.incident_scale(wave, l as f64 * dt));
                past.push(vhat);
            }
        }
    }
    hist.finish();
    Ok(hist)
}

/// Steps whose history from earlier chunks is formed together.
const HISTORY_CHUNK: usize = 32;
/// Rows per parallel band of the chunked history product.
const ROW_BAND: usize = 64;

/// Column `b` holds `sum_j B_j v_{first + b - j}` over the solved steps
/// `1..first`, for `first + b` in `first..=last`. Each block is read once per
/// chunk; bands of rows are independent and each keeps a fixed summation order.
fn far_history(blocks: &[DMatrix<f64>], past: &[DVector<f64>], first: usize, last: usize) -> DMatrix<f64> {
    let dim = blocks[0].nrows();
    let width = last - first + 1;
    let mut far = DMatrix::zeros(dim, width);
    if first == 1 {
        return far;
    }
    let bands: Vec<(usize, DMatrix<f64>)> = (0..dim)
        .step_by(ROW_BAND)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|r0| {
            let rows = ROW_BAND.min(dim - r0);
            let mut out = DMatrix::zeros(rows, width);
            for j in 1..last {
                // step m = first + b - j must lie in 1..first
                let b_lo = (j + 1).saturating_sub(first);
                let b_hi = (j - 1).min(width - 1);
                if b_lo > b_hi {
                    continue;
                }
                let cols = b_hi - b_lo + 1;
                let x = DMatrix::from_fn(dim, cols, |i, c| past[first + b_lo + c - j - 1][i]);
                out.columns_mut(b_lo, cols).gemm(1.0, &blocks[j].rows(r0, rows), &x, 1.0);
            }
            (r0, out)
        })
        .collect();
    for (r0, band) in bands {
        far.rows_mut(r0, band.nrows()).copy_from(&band);
    }
    far
}

fn accept(v: &DVector<f64>) -> bool {
    v.iter().all(|x| x.is_finite() && x.abs() < OVERFLOW)
}

/// Single-layer potential `S q` at a point off the boundary at time `step * dt`,
/// with `q` the history of the unknown at `column`.
pub fn single_layer_at(
    mesh: &BoundaryMesh,
    history: &SolutionHistory,
    column: usize,
    c: f64,
    point: Vector2<f64>,
    step: usize,
) -> Result<f64> {
    let n = mesh.len();
    let mut acc = 0.0;
    for l in 1..=step.min(history.steps()) {
        let lag = step - l;
        let v = &history.step(l)[column * n..(column + 1) * n];
        for (e, q) in v.iter().enumerate() {
            if *q != 0.0 {
                acc += q * crate::tdkernels::influence_at(PotentialKind::S, mesh, c, history.dt, lag, point, e)?;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_mesh, Shape};

    fn dt() -> f64 {
        std::f64::consts::TAU / 100.0
    }

    fn circle_op(f: Formulation, n: usize, lags: usize) -> MotOperator {
        let mat = if f.is_transmission() {
            Materials::default_transmission()
        } else {
            Materials::unit()
        };
        let mesh = build_mesh(&Shape::unit_circle(), n).unwrap();
        assemble_mot_with(&KernelStore::in_memory(), f, &mesh, &mat, dt(), lags).unwrap()
    }

    #[test]
    fn zero_wave_gives_zero_history() {
        let op = circle_op(Formulation::Out2, 16, 40);
        let h = march(&op, &IncidentWave::Zero, 41).unwrap();
        assert_eq!(h.steps(), 41);
        assert!(h.values.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn circulant_symbols_are_block_eigenvalues() {
        let n = 12;
        let op = circle_op(Formulation::Out1, n, 5);
        for lag in [0, 3] {
            let b = op.block(lag);
            let sym = op.mode_symbols(lag).unwrap();
            for k in 0..n {
                let v = DVector::from_fn(n, |c, _| {
                    Complex64::from_polar(1.0, std::f64::consts::TAU * (k * c) as f64 / n as f64)
                });
                let bv = b.map(|x| Complex64::new(x, 0.0)) * &v;
                let want = &v * sym[k][(0, 0)];
                assert!((bv - want).norm() < 1e-12 * (1.0 + sym[k][(0, 0)].norm()), "lag {lag}, mode {k}");
            }
        }
    }

    #[test]
    fn dense_and_fourier_marches_agree() {
        for f in [Formulation::Out4 { alpha: 1.0 }, Formulation::MuellerMod, Formulation::Bm] {
            let op = circle_op(f, 16, 80);
            let dense = op.densified().unwrap();
            assert!(op.is_circulant() && !dense.is_circulant());
            let wave = IncidentWave::quadratic(op.materials.speed(0), dt());
            let a = march(&op, &wave, 81).unwrap();
            let b = march(&dense, &wave, 81).unwrap();
            for l in 1..=81 {
                let scale = a.step(l).iter().fold(1e-300f64, |m, v| m.max(v.abs()));
                for (x, y) in a.step(l).iter().zip(b.step(l)) {
                    assert!((x - y).abs() < 1e-10 * scale, "{f} step {l}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn marching_past_the_kernels_is_rejected() {
        let op = circle_op(Formulation::Out2, 8, 10);
        assert!(march(&op, &IncidentWave::Zero, 12).is_err());
        assert!(march(&op, &IncidentWave::Zero, 0).is_err());
    }
}
