//! Closed parametric boundaries and their straight-element meshes.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::{DMatrix, DVector, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A 2π-periodic cubic spline through `(theta, x, y)` samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomCurve {
    theta: Vec<f64>,
    x: Vec<f64>,
    y: Vec<f64>,
    // second derivatives at the knots
    x2: Vec<f64>,
    y2: Vec<f64>,
}

fn periodic_second_derivatives(theta: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = theta.len();
    let h = |i: usize| -> f64 {
        if i + 1 < n {
            theta[i + 1] - theta[i]
        } else {
            theta[0] + TAU - theta[n - 1]
        }
    };
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        let (hp, hi) = (h(prev), h(i));
        a[(i, prev)] += hp / 6.0;
        a[(i, i)] += (hp + hi) / 3.0;
        a[(i, next)] += hi / 6.0;
        rhs[i] = (v[next] - v[i]) / hi - (v[i] - v[prev]) / hp;
    }
    a.lu()
        .solve(&rhs)
        .map(|s| s.iter().copied().collect())
        .ok_or_else(|| Error::Geometry("spline system is singular".into()))
}

impl CustomCurve {
    /// Builds the spline. `theta` must be strictly increasing within `[0, 2π)`.
    pub fn new(theta: Vec<f64>, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = theta.len();
        if n < 4 || x.len() != n || y.len() != n {
            return Err(Error::Geometry(
                "custom curve needs at least 4 samples of (theta, x, y)".into(),
            ));
        }
        if theta.iter().any(|t| !t.is_finite()) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Geometry("custom curve samples must be finite".into()));
        }
        if theta.windows(2).any(|w| w[1] <= w[0]) || theta[0] < 0.0 || theta[n - 1] >= TAU {
            return Err(Error::Geometry(
                "theta samples must increase strictly within [0, 2pi)".into(),
            ));
        }
        let x2 = periodic_second_derivatives(&theta, &x)?;
        let y2 = periodic_second_derivatives(&theta, &y)?;
        Ok(CustomCurve { theta, x, y, x2, y2 })
    }

    /// Reads a CSV table with header `theta,x,y`.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            theta: f64,
            x: f64,
            y: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "x", "y"] {
            return Err(Error::Parse(format!(
                "expected header `theta,x,y`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut t, mut x, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for row in rdr.deserialize::<Row>() {
            let row = row?;
            t.push(row.theta);
            x.push(row.x);
            y.push(row.y);
        }
        Self::new(t, x, y)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    fn eval(&self, theta: f64) -> (Vector2<f64>, Vector2<f64>) {
        let n = self.theta.len();
        let t = theta.rem_euclid(TAU);
        // interval [theta_i, theta_{i+1}) with wrap-around
        let idx = self.theta.partition_point(|&s| s <= t);
        let (i, lo) = if idx == 0 {
            (n - 1, self.theta[n - 1] - TAU)
        } else {
            (idx - 1, self.theta[idx - 1])
        };
        let next = (i + 1) % n;
        let hi = if next == 0 { self.theta[0] + TAU } else { self.theta[next] };
        let h = hi - lo;
        let a = (hi - t) / h;
        let b = (t - lo) / h;
        let piece = |v: &[f64], v2: &[f64]| -> (f64, f64) {
            let val = a * v[i] + b * v[next]
                + ((a * a * a - a) * v2[i] + (b * b * b - b) * v2[next]) * h * h / 6.0;
            let der = (v[next] - v[i]) / h
                + (-(3.0 * a * a - 1.0) * v2[i] + (3.0 * b * b - 1.0) * v2[next]) * h / 6.0;
            (val, der)
        };
        let (x, dx) = piece(&self.x, &self.x2);
        let (y, dy) = piece(&self.y, &self.y2);
        (Vector2::new(x, y), Vector2::new(dx, dy))
    }
}

/// Closed boundary curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Circle { radius: f64 },
    Star,
    Kite,
    Custom(CustomCurve),
}

impl Shape {
    pub fn unit_circle() -> Self {
        Shape::Circle { radius: 1.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Circle { .. } => "circle",
            Shape::Star => "star",
            Shape::Kite => "kite",
            Shape::Custom(_) => "custom",
        }
    }
}

/// Position and `d/dtheta` tangent of the curve at `theta`.
pub fn shape_point(shape: &Shape, theta: f64) -> (Vector2<f64>, Vector2<f64>) {
    let (s, c) = theta.sin_cos();
    match shape {
        Shape::Circle { radius } => (Vector2::new(radius * c, radius * s), Vector2::new(-radius * s, radius * c)),
        Shape::Star => {
            let r = (1.0 + 0.3 * (5.0 * theta).cos()) / 1.3;
            let dr = -1.5 * (5.0 * theta).sin() / 1.3;
            (Vector2::new(r * c, r * s), Vector2::new(dr * c - r * s, dr * s + r * c))
        }
        Shape::Kite => {
            let x = 0.18 * (c + 2.0 * ((2.0 * theta).cos() - 1.0));
            let dx = 0.18 * (-s - 4.0 * (2.0 * theta).sin());
            (Vector2::new(x, 0.72 * s), Vector2::new(dx, 0.72 * c))
        }
        Shape::Custom(curve) => curve.eval(theta),
    }
}

/// Straight-element discretisation of a closed curve, vertices at `theta_p = 2 pi p / N`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMesh {
    /// vertex `p` starts element `p`; element `p` runs to vertex `p + 1 mod N`
    pub vertices: Vec<Vector2<f64>>,
    pub vertex_angles: Vec<f64>,
    pub midpoints: Vec<Vector2<f64>>,
    /// unit tangents along increasing `theta`
    pub tangents: Vec<Vector2<f64>>,
    /// unit normals into the exterior domain
    pub normals: Vec<Vector2<f64>>,
    pub lengths: Vec<f64>,
    /// `+1` when increasing `theta` runs counter-clockwise
    pub orientation: f64,
    pub shape: Shape,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn element_end(&self, p: usize) -> Vector2<f64> {
        self.vertices[(p + 1) % self.len()]
    }

    pub fn perimeter(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn signed_area(&self) -> f64 {
        polygon_signed_area(&self.vertices)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// True for a uniform circle mesh, where influence matrices are circulant.
    pub fn is_uniform_circle(&self) -> bool {
        matches!(self.shape, Shape::Circle { .. })
    }

    /// Stable content hash of the vertex coordinates.
    pub fn fingerprint(&self) -> String {
        // FNV-1a over the raw coordinate bits
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.vertices {
            for b in v.x.to_bits().to_le_bytes().iter().chain(v.y.to_bits().to_le_bytes().iter()) {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        format!("{h:016x}")
    }
}

pub fn polygon_signed_area(v: &[Vector2<f64>]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        / 2.0
}

/// Meshes `shape` into `n_elems` straight elements, uniform in the parameter.
pub fn build_mesh(shape: &Shape, n_elems: usize) -> Result<BoundaryMesh> {
    if n_elems < 4 {
        return Err(Error::Geometry(format!("need at least 4 elements, got {n_elems}")));
    }
    if let Shape::Circle { radius } = shape {
        if !(*radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!("circle radius must be positive, got {radius}")));
        }
    }
    let vertex_angles: Vec<f64> = (1..=n_elems).map(|p| TAU * p as f64 / n_elems as f64).collect();
    let vertices: Vec<Vector2<f64>> = vertex_angles.iter().map(|&t| shape_point(shape, t).0).collect();
    let orientation = if polygon_signed_area(&vertices) >= 0.0 { 1.0 } else { -1.0 };
    let mut midpoints = Vec::with_capacity(n_elems);
    let mut tangents = Vec::with_capacity(n_elems);
    let mut normals = Vec::with_capacity(n_elems);
    let mut lengths = Vec::with_capacity(n_elems);
    for p in 0..n_elems {
        let a = vertices[p];
        let b = vertices[(p + 1) % n_elems];
        let d = b - a;
        let len = d.norm();
        if !(len > 1e-14) {
            return Err(Error::Geometry(format!("element {p} has zero length")));
        }
        let t = d / len;
        midpoints.push((a + b) / 2.0);
        tangents.push(t);
        normals.push(Vector2::new(t.y, -t.x) * orientation);
        lengths.push(len);
    }
    Ok(BoundaryMesh {
        vertices,
        vertex_angles,
        midpoints,
        tangents,
        normals,
        lengths,
        orientation,
        shape: shape.clone(),
    })
}
