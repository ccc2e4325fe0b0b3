//! Influence coefficients of straight, piecewise-constant elements against
//! the piecewise-linear time hat.

use std::f64::consts::PI;

use nalgebra::Vector2;

use super::quad;
use super::radial::{second_difference, second_difference_with, Radial};
use super::PotentialKind;
use crate::error::{Error, Result};
use crate::geometry::BoundaryMesh;

pub const QUAD_REL_TOL: f64 = 1e-10;
const MAX_INTERVALS: usize = 400;

/// Collocation point and element seen from it.
struct Pair {
    x: Vector2<f64>,
    n_x: Vector2<f64>,
    t_x: Vector2<f64>,
    start: Vector2<f64>,
    end: Vector2<f64>,
    t_y: Vector2<f64>,
    n_y: Vector2<f64>,
    len: f64,
    /// position of the foot of the perpendicular along the element
    foot: f64,
    /// distance from x to the element's line
    dist: f64,
}

impl Pair {
    fn new(mesh: &BoundaryMesh, row: usize, col: usize) -> Self {
        let x = mesh.midpoints[row];
        let start = mesh.vertices[col];
        let t_y = mesh.tangents[col];
        let rel = x - start;
        let foot = rel.dot(&t_y);
        let dist = if row == col { 0.0 } else { (rel - t_y * foot).norm() };
        Pair {
            x,
            n_x: mesh.normals[row],
            t_x: mesh.tangents[row],
            start,
            end: mesh.element_end(col),
            t_y,
            n_y: mesh.normals[col],
            len: mesh.lengths[col],
            foot,
            dist,
        }
    }

    fn point(&self, s: f64) -> Vector2<f64> {
        self.start + self.t_y * s
    }
}

fn quad_error(kind: PotentialKind, row: usize, col: usize, lag: usize) -> Error {
    Error::Quadrature {
        kind: kind.tag().to_string(),
        row,
        col,
        lag,
    }
}

/// A point where the element is split.
#[derive(Clone, Copy, Debug)]
struct Cut {
    s: f64,
    /// the integrand has an inverse square root or log singularity here
    singular: bool,
    /// wavefront of hat time `k` passing through at offset `u` from the foot
    front: Option<(usize, f64)>,
}

/// Integral over the element of `f(y, r, w2)`, where `w2[k]` is
/// `c^2 t_k^2 - r^2` for the three hat times and `f` vanishes outside the
/// outermost light cone. The element is split at the foot of the
/// perpendicular and at every wavefront crossing; next to a crossing,
/// `w2` is formed from the exact distance to it.
fn integrate_element<F: Fn(Vector2<f64>, f64, [f64; 3]) -> f64>(
    pair: &Pair,
    c: f64,
    dt: f64,
    lag: usize,
    f: F,
) -> Option<f64> {
    let d = pair.dist;
    let radii: [f64; 3] = [-1.0, 0.0, 1.0].map(|k| {
        let ct = c * (lag as f64 + k) * dt;
        if ct > d {
            ((ct - d) * (ct + d)).sqrt()
        } else {
            -1.0
        }
    });
    let reach = radii[2];
    if reach <= 0.0 {
        return Some(0.0);
    }
    let lo = (pair.foot - reach).max(0.0);
    let hi = (pair.foot + reach).min(pair.len);
    if lo >= hi {
        return Some(0.0);
    }
    let edge = |s: f64, inner: bool, u: f64| Cut {
        s,
        singular: inner,
        front: inner.then_some((2, u)),
    };
    let mut cuts = vec![edge(lo, lo > 0.0, -reach), edge(hi, hi < pair.len, reach)];
    let on_line = d <= 1e-12 * pair.len;
    if pair.foot > lo && pair.foot < hi {
        cuts.push(Cut {
            s: pair.foot,
            singular: on_line,
            front: None,
        });
    }
    for k in 0..2 {
        if radii[k] > 0.0 {
            for u in [-radii[k], radii[k]] {
                let s = pair.foot + u;
                if s > lo && s < hi {
                    cuts.push(Cut {
                        s,
                        singular: true,
                        front: Some((k, u)),
                    });
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.s.total_cmp(&b.s));
    cuts.dedup_by(|a, b| {
        if (a.s - b.s).abs() <= 1e-14 * pair.len {
            b.singular |= a.singular;
            b.front = b.front.or(a.front);
            true
        } else {
            false
        }
    });
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (ca, cb) = (w[0], w[1]);
        let (a, b) = (ca.s, cb.s);
        if b - a <= 0.0 {
            continue;
        }
        // integrand in terms of the exact distances from both piece ends
        let g = |from_a: f64, from_b: f64| {
            let s = if from_a <= from_b { a + from_a } else { b - from_b };
            let u = s - pair.foot;
            let r = (d * d + u * u).sqrt();
            if r == 0.0 {
                return 0.0;
            }
            let mut w2 = [0.0; 3];
            for k in 0..3 {
                w2[k] = match (ca.front, cb.front) {
                    (Some((ka, ua)), _) if ka == k => -from_a * (2.0 * ua + from_a),
                    (_, Some((kb, ub))) if kb == k => from_b * (2.0 * ub - from_b),
                    _ if radii[k] > 0.0 => (radii[k] - u.abs()) * (radii[k] + u.abs()),
                    _ => -1.0,
                };
            }
            f(pair.point(s), r, w2)
        };
        // square-root and cosine substitutions absorb inverse square roots
        let len = b - a;
        let est = match (ca.singular, cb.singular) {
            (false, false) => quad::adaptive(|s: f64| g(s - a, b - s), a, b, QUAD_REL_TOL, MAX_INTERVALS),
            (true, false) => quad::adaptive(
                |v: f64| {
                    let e = len * v * v;
                    2.0 * len * v * g(e, len - e)
                },
                0.0,
                1.0,
                QUAD_REL_TOL,
                MAX_INTERVALS,
            ),
            (false, true) => quad::adaptive(
                |v: f64| {
                    let e = len * v * v;
                    2.0 * len * v * g(len - e, e)
                },
                0.0,
                1.0,
                QUAD_REL_TOL,
                MAX_INTERVALS,
            ),
            (true, true) => quad::adaptive(
                |th: f64| {
                    let (sh, ch) = (0.5 * th).sin_cos();
                    0.5 * len * th.sin() * g(len * sh * sh, len * ch * ch)
                },
                0.0,
                std::f64::consts::PI,
                QUAD_REL_TOL,
                MAX_INTERVALS,
            ),
        };
        total += est?.value;
    }
    Some(total)
}

/// Influence of the unit density on element `col`, held by the time hat
/// centred `lag` steps earlier, on the potential at collocation point `row`.
///
/// The lag-0 coefficient of a trace includes its jump term.
pub fn influence(
    kind: PotentialKind,
    mesh: &BoundaryMesh,
    c: f64,
    dt: f64,
    lag: usize,
    row: usize,
    col: usize,
) -> Result<f64> {
    if !(dt > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and c > 0, got dt = {dt}, c = {c}")));
    }
    let pair = Pair::new(mesh, row, col);
    let fail = || quad_error(kind, row, col, lag);
    let mut value = element_integral(kind, &pair, row == col, c, dt, lag).ok_or_else(fail)? / dt;
    if lag == 0 && row == col {
        value += kind.jump();
    }
    if !value.is_finite() {
        return Err(fail());
    }
    Ok(value)
}

/// Coefficient of element `col` at an arbitrary point off the boundary, for the
/// potentials that need no normal at the evaluation point (S, SDOT, D, DDOT).
pub fn influence_at(
    kind: PotentialKind,
    mesh: &BoundaryMesh,
    c: f64,
    dt: f64,
    lag: usize,
    point: Vector2<f64>,
    col: usize,
) -> Result<f64> {
    if !(dt > 0.0 && c > 0.0) {
        return Err(Error::Domain(format!("need dt > 0 and c > 0, got dt = {dt}, c = {c}")));
    }
    if !matches!(kind, PotentialKind::S | PotentialKind::SDot | PotentialKind::D(_) | PotentialKind::DDot) {
        return Err(Error::Config(format!("{kind} needs a normal at the evaluation point")));
    }
    let mut pair = Pair::new(mesh, 0, col);
    pair.x = point;
    pair.foot = (point - pair.start).dot(&pair.t_y);
    pair.dist = (point - pair.start - pair.t_y * pair.foot).norm();
    if pair.dist == 0.0 && (0.0..=pair.len).contains(&pair.foot) {
        return Err(Error::Domain("evaluation point lies on the element".into()));
    }
    let value = element_integral(kind, &pair, false, c, dt, lag).ok_or_else(|| quad_error(kind, usize::MAX, col, lag))? / dt;
    if !value.is_finite() {
        return Err(quad_error(kind, usize::MAX, col, lag));
    }
    Ok(value)
}

fn element_integral(kind: PotentialKind, pair: &Pair, same: bool, c: f64, dt: f64, lag: usize) -> Option<f64> {
    let twopi_c = 2.0 * PI * c;
    match kind {
        PotentialKind::S => integrate_element(pair, c, dt, lag, |_, r, w2| second_difference_with(Radial::PhiS, r, w2, c, dt, lag)),
        PotentialKind::SDot => integrate_element(pair, c, dt, lag, |_, r, w2| second_difference_with(Radial::F0, r, w2, c, dt, lag)),
        PotentialKind::D(_) | PotentialKind::DDot if same => Some(0.0),
        PotentialKind::D(_) => {
            let dn = (pair.x - pair.start).dot(&pair.n_y);
            integrate_element(pair, c, dt, lag, |_, r, w2| {
                dn / (twopi_c * r * r) * second_difference_with(Radial::Front, r, w2, c, dt, lag)
            })
        }
        PotentialKind::DDot => {
            let dn = (pair.x - pair.start).dot(&pair.n_y);
            integrate_element(pair, c, dt, lag, |_, r, w2| {
                c * dn / (2.0 * PI * r * r) * second_difference_with(Radial::TOverFront, r, w2, c, dt, lag)
            })
        }
        PotentialKind::DT(_) if same => Some(0.0),
        PotentialKind::DT(_) => integrate_element(pair, c, dt, lag, |y, r, w2| {
            -(pair.x - y).dot(&pair.n_x) / (twopi_c * r * r) * second_difference_with(Radial::Front, r, w2, c, dt, lag)
        }),
        PotentialKind::N | PotentialKind::M => {
            let (volume, edge) = if kind == PotentialKind::N {
                (Radial::Green, Radial::DrPhiS)
            } else {
                (Radial::F0, Radial::DrPsi3)
            };
            let nn = pair.n_x.dot(&pair.n_y) / (c * c);
            let body = integrate_element(pair, c, dt, lag, |_, r, w2| -nn * second_difference_with(volume, r, w2, c, dt, lag));
            body.map(|v| {
                let ends = |y: Vector2<f64>| {
                    let d = pair.x - y;
                    let r = d.norm();
                    second_difference(edge, r, c, dt, lag) * d.dot(&pair.t_x) / r
                };
                v + ends(pair.start) - ends(pair.end)
            })
        }
    }
}

/// Whether the coefficient is zero by causality: the element lies entirely
/// outside the light cone of the hat's latest time.
pub fn outside_light_cone(mesh: &BoundaryMesh, c: f64, dt: f64, lag: usize, row: usize, col: usize) -> bool {
    let pair = Pair::new(mesh, row, col);
    let nearest = pair.foot.clamp(0.0, pair.len);
    let dmin = (pair.x - pair.point(nearest)).norm();
    dmin >= c * (lag as f64 + 1.0) * dt
}
