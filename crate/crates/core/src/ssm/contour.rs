//! Elliptic contours, trapezoidal nodes and argument-principle counting.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// `z(theta) = center + a cos(theta) + i b sin(theta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourBox {
    pub center: Complex64,
    pub a: f64,
    pub b: f64,
    pub nodes: usize,
}

/// Axis-aligned rectangle `[re0, re1] x [im0, im1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
}

impl Rect {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re0 && z.re <= self.re1 && z.im >= self.im0 && z.im <= self.im1
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))
    }

    pub fn width(&self) -> f64 {
        self.re1 - self.re0
    }

    pub fn height(&self) -> f64 {
        self.im1 - self.im0
    }

    /// The four quarters.
    pub fn split(&self) -> [Rect; 4] {
        let (xm, ym) = (0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1));
        [
            Rect { re0: self.re0, re1: xm, im0: self.im0, im1: ym },
            Rect { re0: xm, re1: self.re1, im0: self.im0, im1: ym },
            Rect { re0: self.re0, re1: xm, im0: ym, im1: self.im1 },
            Rect { re0: xm, re1: self.re1, im0: ym, im1: self.im1 },
        ]
    }
}

impl ContourBox {
    pub fn circle(center: Complex64, radius: f64, nodes: usize) -> Self {
        ContourBox {
            center,
            a: radius,
            b: radius,
            nodes,
        }
    }

    /// Ellipse through the corners of `rect` grown by `overlap` on each side.
    pub fn around(rect: &Rect, overlap: f64, nodes: usize) -> Self {
        let hw = 0.5 * rect.width() * (1.0 + overlap);
        let hh = 0.5 * rect.height() * (1.0 + overlap);
        ContourBox {
            center: rect.center(),
            a: hw * std::f64::consts::SQRT_2,
            b: hh * std::f64::consts::SQRT_2,
            nodes,
        }
    }

    /// Narrow ellipse covering the grown `rect` with little horizontal excess.
    pub fn tall_around(rect: &Rect, overlap: f64, nodes: usize) -> Self {
        let hw = 0.5 * rect.width() * (1.0 + overlap);
        let hh = 0.5 * rect.height() * (1.0 + overlap);
        let a = hw * 1.05;
        let b = hh / (1.0 - (hw / a).powi(2)).sqrt();
        ContourBox {
            center: rect.center(),
            a,
            b,
            nodes,
        }
    }

    pub fn point(&self, theta: f64) -> Complex64 {
        self.center + Complex64::new(self.a * theta.cos(), self.b * theta.sin())
    }

    /// Node angles, offset by half a step so that no node sits on an axis.
    pub fn angles(&self, shift: f64) -> Vec<f64> {
        (0..self.nodes)
            .map(|j| TAU * (j as f64 + 0.5 + shift) / self.nodes as f64)
            .collect()
    }

    /// Normalised coordinate `(z - center) / a`, so the contour is `cos + i (b/a) sin`.
    pub fn normalise(&self, z: Complex64) -> Complex64 {
        (z - self.center) / self.a
    }

    pub fn denormalise(&self, zeta: Complex64) -> Complex64 {
        self.center + zeta * self.a
    }

    /// `(x / a)^2 + (y / b)^2` relative to the centre; below 1 inside.
    pub fn level(&self, z: Complex64) -> f64 {
        let d = z - self.center;
        (d.re / self.a).powi(2) + (d.im / self.b).powi(2)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.level(z) < 1.0
    }

    /// Whether the closed ellipse stays at least `margin` away from the cut
    /// half-lines `{Re z = x, Im z <= 0}` for every `x` in `cut_lines`.
    pub fn avoids_cuts(&self, cut_lines: &[f64], margin: f64) -> bool {
        cut_lines.iter().all(|&x| {
            let dx = (x - self.center.re).abs();
            if dx >= self.a + margin {
                return true;
            }
            // lowest point of the ellipse over the band |Re z - x| <= margin
            let near = (dx - margin).max(0.0);
            if near >= self.a {
                return true;
            }
            let low = self.center.im - self.b * (1.0 - (near / self.a).powi(2)).sqrt();
            low > margin
        })
    }
}

/// Winding numbers of several scalar functions around the contour, by
/// adaptive phase tracking. `f` returns one value per function (for example
/// one determinant per mode).
pub fn winding_numbers(
    contour: &ContourBox,
    f: &dyn Fn(Complex64) -> Result<Vec<Complex64>>,
    base_samples: usize,
    max_depth: usize,
) -> Result<Vec<i64>> {
    let n = base_samples.max(16);
    let thetas: Vec<f64> = (0..=n).map(|j| TAU * j as f64 / n as f64).collect();
    let first = f(contour.point(thetas[0]))?;
    let mut total = vec![0.0f64; first.len()];
    let mut prev = first.clone();
    for w in thetas.windows(2) {
        let end = if (w[1] - TAU).abs() < 1e-15 { first.clone() } else { f(contour.point(w[1]))? };
        accumulate(contour, f, w[0], w[1], &prev, &end, max_depth, &mut total)?;
        prev = end;
    }
    Ok(total.iter().map(|t| (t / TAU).round() as i64).collect())
}

#[allow(clippy::too_many_arguments)]
fn accumulate(
    contour: &ContourBox,
    f: &dyn Fn(Complex64) -> Result<Vec<Complex64>>,
    t0: f64,
    t1: f64,
    v0: &[Complex64],
    v1: &[Complex64],
    depth: usize,
    total: &mut [f64],
) -> Result<()> {
    let jumps: Vec<f64> = v0.iter().zip(v1).map(|(a, b)| (b / a).arg()).collect();
    let rough = jumps.iter().any(|j| j.abs() > std::f64::consts::FRAC_PI_4 || !j.is_finite());
    if rough && depth > 0 {
        let tm = 0.5 * (t0 + t1);
        let vm = f(contour.point(tm))?;
        accumulate(contour, f, t0, tm, v0, &vm, depth - 1, total)?;
        accumulate(contour, f, tm, t1, &vm, v1, depth - 1, total)?;
    } else {
        for (t, j) in total.iter_mut().zip(jumps) {
            *t += j;
        }
    }
    Ok(())
}

/// Determinant by LU; used for winding numbers of matrix problems.
pub fn determinant(m: &DMatrix<Complex64>) -> Complex64 {
    if m.nrows() == 1 {
        return m[(0, 0)];
    }
    m.clone().lu().determinant()
}
