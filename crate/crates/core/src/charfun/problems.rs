//! Characteristic matrices built from formulation recipes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::series::{LatticeSums, SeriesControl};
use crate::error::{Error, Result};
use crate::marching::{Formulation, Materials, Recipe, TermKind};
use crate::specfun::HJKind;
use crate::tdkernels::{PotentialKind, Trace};

/// A matrix-valued analytic function of the complex frequency.
pub trait CharProblem: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, omega: Complex64) -> Result<DMatrix<Complex64>>;
}

impl<F> CharProblem for (usize, F)
where
    F: Fn(Complex64) -> Result<DMatrix<Complex64>> + Sync,
{
    fn dim(&self) -> usize {
        self.0
    }
    fn eval(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        (self.1)(omega)
    }
}

/// A family of problems sharing expensive per-frequency work, one per mode.
pub trait ModeFamily: Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    /// Mode labels, indexed like the output of [`ModeFamily::eval_all`].
    fn modes(&self) -> Vec<usize>;
    fn eval_all(&self, omega: Complex64) -> Result<Vec<DMatrix<Complex64>>>;
    fn eval_mode(&self, index: usize, omega: Complex64) -> Result<DMatrix<Complex64>>;
}

/// One member of a [`ModeFamily`] seen as a single problem.
pub struct FamilyMember<'a, F: ModeFamily + ?Sized> {
    pub family: &'a F,
    pub index: usize,
}

impl<F: ModeFamily + ?Sized> CharProblem for FamilyMember<'_, F> {
    fn dim(&self) -> usize {
        self.family.dim()
    }
    fn eval(&self, omega: Complex64) -> Result<DMatrix<Complex64>> {
        self.family.eval_mode(self.index, omega)
    }
}

/// Lattice-sum symbol of one recipe term at order `n`, without its coefficient.
pub fn term_symbol(kind: TermKind, sums: &LatticeSums, n: usize) -> Result<Complex64> {
    let avg = |s: &LatticeSums| (s.get(HJKind::DPlusDtMinus, n) + s.get(HJKind::DMinusDtPlus, n)) / 2.0;
    Ok(match kind {
        TermKind::Identity => sums.constant(1.0),
        TermKind::IdentityRate => {
            return Err(Error::Domain(
                "a time-differentiated identity has no characteristic series".into(),
            ))
        }
        TermKind::Potential(p) => match p {
            PotentialKind::S => sums.get(HJKind::S, n),
            PotentialKind::SDot => sums.get(HJKind::SDot, n),
            PotentialKind::D(Trace::Plus) | PotentialKind::DT(Trace::Minus) => {
                sums.get(HJKind::DPlusDtMinus, n)
            }
            PotentialKind::D(Trace::Minus) | PotentialKind::DT(Trace::Plus) => {
                sums.get(HJKind::DMinusDtPlus, n)
            }
            PotentialKind::D(Trace::Average) | PotentialKind::DT(Trace::Average) => avg(sums),
            PotentialKind::M => sums.get(HJKind::MOp, n),
            PotentialKind::N | PotentialKind::DDot => {
                return Err(Error::Domain(format!(
                    "{p} has no absolutely convergent characteristic series"
                )))
            }
        },
    })
}

/// Checks that every term of a recipe has a characteristic series.
pub fn check_recipe(recipe: &Recipe) -> Result<()> {
    for t in &recipe.terms {
        match t.kind {
            TermKind::IdentityRate
            | TermKind::Potential(PotentialKind::N)
            | TermKind::Potential(PotentialKind::DDot) => {
                return Err(Error::Config(format!(
                    "formulation {} contains operators without a characteristic series",
                    recipe.formulation
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

pub(crate) fn domains_used(recipe: &Recipe) -> [bool; 2] {
    let mut used = [false; 2];
    used[0] = true;
    for t in &recipe.terms {
        if matches!(t.kind, TermKind::Potential(_)) {
            used[t.domain] = true;
        }
    }
    used
}

pub(crate) fn domain_sums(
    recipe: &Recipe,
    mat: &Materials,
    omega: Complex64,
    dt: f64,
    n_max: usize,
    ctrl: SeriesControl,
) -> Result<[Option<LatticeSums>; 2]> {
    let used = domains_used(recipe);
    let mut out: [Option<LatticeSums>; 2] = [None, None];
    for d in 0..2 {
        if used[d] {
            out[d] = Some(LatticeSums::compute(omega, mat.speed(d), dt, n_max, ctrl)?);
        }
    }
    Ok(out)
}

/// Symbol matrix of a recipe at order `n` from precomputed sums.
pub(crate) fn recipe_matrix(recipe: &Recipe, sums: &[Option<LatticeSums>; 2], n: usize) -> Result<DMatrix<Complex64>> {
    let size = recipe.size();
    let mut a = DMatrix::zeros(size, size);
    for t in &recipe.terms {
        let s = sums[t.domain]
            .as_ref()
            .or(sums[0].as_ref())
            .expect("exterior sums are always computed");
        a[(t.row, t.col)] += t.coeff * term_symbol(t.kind, s, n)?;
    }
    Ok(a)
}

/// Continuum (no space discretisation) characteristic problems of a formulation,
/// one per Fourier mode `n = 0..=n_max` of the unit circle.
#[derive(Clone, Debug)]
pub struct CircleModes {
    pub recipe: Recipe,
    pub materials: Materials,
    pub dt: f64,
    pub n_max: usize,
    pub ctrl: SeriesControl,
}

impl CircleModes {
    pub fn new(formulation: Formulation, materials: Materials, dt: f64, n_max: usize, ctrl: SeriesControl) -> Result<Self> {
        let recipe = formulation.recipe(&materials);
        check_recipe(&recipe)?;
        ctrl.validate()?;
        Ok(CircleModes {
            recipe,
            materials,
            dt,
            n_max,
            ctrl,
        })
    }
}

impl ModeFamily for CircleModes {
    fn name(&self) -> String {
        self.recipe.formulation.to_string()
    }

    fn dim(&self) -> usize {
        self.recipe.size()
    }

    fn modes(&self) -> Vec<usize> {
        (0..=self.n_max).collect()
    }

    fn eval_all(&self, omega: Complex64) -> Result<Vec<DMatrix<Complex64>>> {
        let sums = domain_sums(&self.recipe, &self.materials, omega, self.dt, self.n_max, self.ctrl)?;
        (0..=self.n_max).map(|n| recipe_matrix(&self.recipe, &sums, n)).collect()
    }

    fn eval_mode(&self, index: usize, omega: Complex64) -> Result<DMatrix<Complex64>> {
        let sums = domain_sums(&self.recipe, &self.materials, omega, self.dt, index, self.ctrl)?;
        recipe_matrix(&self.recipe, &sums, index)
    }
}

/// The 2x2 characteristic matrix of a modified transmission formulation.
pub fn transmission_matrix(
    formulation: Formulation,
    n: usize,
    omega: Complex64,
    materials: &Materials,
    dt: f64,
    ctrl: SeriesControl,
) -> Result<DMatrix<Complex64>> {
    if !formulation.is_transmission() {
        return Err(Error::Config(format!("{formulation} is not a transmission formulation")));
    }
    CircleModes::new(formulation, *materials, dt, n, ctrl)?.eval_mode(n, omega)
}
