//! Characteristic problems of the space-discretised operator on a uniform circle mesh.
//!
//! With piecewise-constant elements and midpoint collocation the operator is
//! `U diag(D_l) V`, where `D_l` is the order-`|l|` symbol. The matrix is
//! circulant, so it splits into one small block per residue `q mod N`.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::problems::{check_recipe, domain_sums, recipe_matrix, ModeFamily};
use super::series::SeriesControl;
use crate::error::{Error, Result};
use crate::marching::{Formulation, Materials, Recipe};

/// Default Fourier truncation `10 N + N / 2`.
pub fn default_truncation(n_elems: usize) -> usize {
    10 * n_elems + n_elems / 2
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `V_l^p = (1 / 2 pi) * integral of exp(-i l psi)` over element `p`,
/// where element `p` spans `[2 pi (p + 1) / N, 2 pi (p + 2) / N]` for `p = 0..N`.
pub fn v_coefficient(l: i64, p: usize, n_elems: usize) -> Complex64 {
    let h = TAU / n_elems as f64;
    if l == 0 {
        return Complex64::new(1.0 / n_elems as f64, 0.0);
    }
    let start = h * (p + 1) as f64;
    let lf = l as f64;
    let i = Complex64::i();
    (-i * lf * start).exp() * (1.0 - (-i * lf * h).exp()) / (TAU * i * lf)
}

/// `U_{n l} = exp(i l Theta_n)` with `Theta_n` the midpoint angle of element `n`.
pub fn u_coefficient(row: usize, l: i64, n_elems: usize) -> Complex64 {
    let h = TAU / n_elems as f64;
    let theta = h * (row as f64 + 1.5);
    (Complex64::i() * (l as f64) * theta).exp()
}

/// Residue-block problems of the discretised operator; mode labels are residues `0..=N/2`.
#[derive(Clone, Debug)]
pub struct DiscreteCircle {
    pub recipe: Recipe,
    pub materials: Materials,
    pub dt: f64,
    pub n_elems: usize,
    pub truncation: usize,
    pub ctrl: SeriesControl,
}

impl DiscreteCircle {
    pub fn new(
        formulation: Formulation,
        materials: Materials,
        dt: f64,
        n_elems: usize,
        truncation: usize,
        ctrl: SeriesControl,
    ) -> Result<Self> {
        let recipe = formulation.recipe(&materials);
        Self::from_recipe(recipe, materials, dt, n_elems, truncation, ctrl)
    }

    pub fn from_recipe(
        recipe: Recipe,
        materials: Materials,
        dt: f64,
        n_elems: usize,
        truncation: usize,
        ctrl: SeriesControl,
    ) -> Result<Self> {
        check_recipe(&recipe)?;
        ctrl.validate()?;
        if n_elems < 4 || truncation < n_elems {
            return Err(Error::Config(format!(
                "need N >= 4 and truncation >= N, got N = {n_elems}, M = {truncation}"
            )));
        }
        Ok(DiscreteCircle {
            recipe,
            materials,
            dt,
            n_elems,
            truncation,
            ctrl,
        })
    }

    fn symbols(&self, omega: Complex64) -> Result<Vec<DMatrix<Complex64>>> {
        let sums = domain_sums(&self.recipe, &self.materials, omega, self.dt, self.truncation, self.ctrl)?;
        (0..=self.truncation).map(|n| recipe_matrix(&self.recipe, &sums, n)).collect()
    }

    fn residue_block(&self, symbols: &[DMatrix<Complex64>], q: usize) -> DMatrix<Complex64> {
        let n = self.n_elems as i64;
        let m = self.truncation as i64;
        let size = self.recipe.size();
        let mut block = DMatrix::zeros(size, size);
        // l = q + j N over |l| <= M
        let lo = (-m - q as i64).div_euclid(n) - 1;
        let hi = (m - q as i64).div_euclid(n) + 1;
        for j in lo..=hi {
            let l = q as i64 + j * n;
            if l.abs() > m {
                continue;
            }
            let w = sinc(PI * l as f64 / n as f64);
            block += &symbols[l.unsigned_abs() as usize] * Complex64::new(w, 0.0);
        }
        block
    }

    /// The full `U D V` matrix, unknown-major (`[u block; q block]`), for cross-checks.
    pub fn dense(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let symbols = self.symbols(omega)?;
        let n = self.n_elems;
        let m = self.truncation as i64;
        let size = self.recipe.size();
        let ls: Vec<i64> = (-m..=m).collect();
        let u = DMatrix::from_fn(n, ls.len(), |r, c| u_coefficient(r, ls[c], n));
        let v = DMatrix::from_fn(ls.len(), n, |r, c| v_coefficient(ls[r], c, n));
        let mut out = DMatrix::zeros(size * n, size * n);
        for a in 0..size {
            for b in 0..size {
                let d: Vec<Complex64> = ls.iter().map(|l| symbols[l.unsigned_abs() as usize][(a, b)]).collect();
                let mut scaled = v.clone();
                for (r, dl) in d.iter().enumerate() {
                    for x in scaled.row_mut(r).iter_mut() {
                        *x *= *dl;
                    }
                }
                let blk = &u * scaled;
                out.view_mut((a * n, b * n), (n, n)).copy_from(&blk);
            }
        }
        Ok(out)
    }
}

impl ModeFamily for DiscreteCircle {
    fn name(&self) -> String {
        format!("{}[N={}]", self.recipe.formulation, self.n_elems)
    }

    fn dim(&self) -> usize {
        self.recipe.size()
    }

    fn modes(&self) -> Vec<usize> {
        (0..=self.n_elems / 2).collect()
    }

    fn eval_all(&self, omega: Complex64) -> Result<Vec<DMatrix<Complex64>>> {
        let symbols = self.symbols(omega)?;
        Ok(self.modes().into_iter().map(|q| self.residue_block(&symbols, q)).collect())
    }

    fn eval_mode(&self, index: usize, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let symbols = self.symbols(omega)?;
        Ok(self.residue_block(&symbols, index))
    }
}
