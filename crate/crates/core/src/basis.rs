//! Sieve bases on the unit interval.
//!
//! Three families are supported: the cosine system `√2·cos(πjx)`, clamped
//! B-splines on uniform knots, and orthonormal shifted Legendre polynomials.
//! Each family comes with its design matrix, a weighted Gram matrix computed
//! by composite Gauss–Legendre quadrature, and the sup-norm growth bound
//! `ζ(J)` used by the dimension-selection rule.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nodes per Gauss–Legendre panel.
pub const GL_NODES_PER_PANEL: usize = 10;

/// Minimum number of quadrature panels on [0, 1].
pub const MIN_PANELS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    Cosine,
    /// Clamped B-splines of the given order (degree + 1) on uniform knots.
    BSpline { order: usize },
    Legendre,
}

impl BasisFamily {
    pub const CUBIC_BSPLINE: BasisFamily = BasisFamily::BSpline { order: 4 };

    /// Parses `cosine`, `bspline` (cubic), `bspline<k>` or `legendre`.
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        match lower.as_str() {
            "cosine" => Ok(BasisFamily::Cosine),
            "bspline" => Ok(BasisFamily::CUBIC_BSPLINE),
            "legendre" => Ok(BasisFamily::Legendre),
            other => {
                if let Some(order) = other.strip_prefix("bspline") {
                    let order: usize = order
                        .parse()
                        .map_err(|_| Error::invalid(format!("unknown basis family `{name}`")))?;
                    if order < 2 {
                        return Err(Error::invalid("B-spline order must be at least 2"));
                    }
                    Ok(BasisFamily::BSpline { order })
                } else {
                    Err(Error::invalid(format!("unknown basis family `{name}`")))
                }
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            BasisFamily::Cosine => "cosine".to_string(),
            BasisFamily::BSpline { order: 4 } => "bspline".to_string(),
            BasisFamily::BSpline { order } => format!("bspline{order}"),
            BasisFamily::Legendre => "legendre".to_string(),
        }
    }
}

/// A basis family together with its dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub dim: usize,
}

impl BasisSpec {
    pub fn new(family: BasisFamily, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("basis dimension must be at least 1"));
        }
        if let BasisFamily::BSpline { order } = family {
            if order < 2 {
                return Err(Error::invalid("B-spline order must be at least 2"));
            }
            if dim < order {
                return Err(Error::invalid(format!(
                    "B-spline of order {order} needs dimension >= {order}, got {dim}"
                )));
            }
        }
        Ok(Self { family, dim })
    }

    pub fn cosine(dim: usize) -> Result<Self> {
        Self::new(BasisFamily::Cosine, dim)
    }

    /// Evaluates `(φ_1(x), …, φ_J(x))`.
    pub fn eval(&self, x: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out)?;
        Ok(out)
    }

    /// Like [`eval`](Self::eval) but writes into a caller buffer of length `J`.
    pub fn eval_into(&self, x: f64, out: &mut [f64]) -> Result<()> {
        check_unit(x, "x")?;
        debug_assert_eq!(out.len(), self.dim);
        match self.family {
            BasisFamily::Cosine => cosine_into(x, out),
            BasisFamily::BSpline { order } => bspline_into(order, x, out),
            BasisFamily::Legendre => legendre_into(x, out),
        }
        Ok(())
    }

    /// Row `i` is the basis evaluated at `points[i]`.
    pub fn design_matrix(&self, points: &[f64]) -> Result<DMatrix<f64>> {
        if points.is_empty() {
            return Err(Error::invalid("design matrix needs at least one point"));
        }
        let mut m = DMatrix::zeros(points.len(), self.dim);
        let mut row = vec![0.0; self.dim];
        for (i, &x) in points.iter().enumerate() {
            self.eval_into(x, &mut row)?;
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        Ok(m)
    }

    /// Default panel count: `max(2J, 32)`, rounded up to a multiple of the
    /// knot spans for B-splines so every panel sees a single polynomial piece.
    pub fn default_panels(&self) -> usize {
        let base = (2 * self.dim).max(MIN_PANELS);
        match self.family {
            BasisFamily::BSpline { order } => {
                let spans = self.dim - order + 1;
                base.div_ceil(spans) * spans
            }
            _ => base,
        }
    }

    /// `G_μ = ∫ ψ(x)ψ(x)' μ(x) dx` over `panels` Gauss–Legendre panels.
    pub fn gram_matrix_with(&self, mu: &WeightFn, panels: usize) -> Result<DMatrix<f64>> {
        if panels < 2 * self.dim {
            return Err(Error::invalid(format!(
                "quadrature resolution {panels} below 2J = {}",
                2 * self.dim
            )));
        }
        let rule = QuadratureRule::for_weight(panels, mu);
        let mut g = DMatrix::zeros(self.dim, self.dim);
        let mut row = vec![0.0; self.dim];
        for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
            self.eval_into(x, &mut row)?;
            let scale = wt * mu.eval(x);
            for a in 0..self.dim {
                let ra = row[a] * scale;
                if ra == 0.0 {
                    continue;
                }
                for b in a..self.dim {
                    g[(a, b)] += ra * row[b];
                }
            }
        }
        for a in 0..self.dim {
            for b in 0..a {
                g[(a, b)] = g[(b, a)];
            }
        }
        check_conditioning(&g)?;
        Ok(g)
    }

    pub fn gram_matrix(&self, mu: &WeightFn) -> Result<DMatrix<f64>> {
        self.gram_matrix_with(mu, self.default_panels())
    }

    /// Sup-norm growth `ζ(J)`: `√J` for cosine and spline sieves, `J` for
    /// orthogonal polynomials.
    pub fn zeta_growth(&self) -> f64 {
        let j = self.dim as f64;
        match self.family {
            BasisFamily::Cosine | BasisFamily::BSpline { .. } => j.sqrt(),
            BasisFamily::Legendre => j,
        }
    }
}

fn check_unit(x: f64, what: &'static str) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain { what, value: x });
    }
    Ok(())
}

fn check_conditioning(g: &DMatrix<f64>) -> Result<()> {
    let eig = g.clone().symmetric_eigenvalues();
    let max_eig = eig.max();
    let min_eig = eig.min();
    if !(max_eig > 0.0) || min_eig < 1e-12 * max_eig {
        return Err(Error::Conditioning { min_eig, max_eig });
    }
    Ok(())
}

fn cosine_into(x: f64, out: &mut [f64]) {
    // Chebyshev recurrence cos(jθ) = 2cosθ·cos((j-1)θ) - cos((j-2)θ).
    let c1 = (PI * x).cos();
    let two_c1 = 2.0 * c1;
    let mut prev = 1.0;
    let mut cur = c1;
    for v in out.iter_mut() {
        *v = SQRT_2 * cur;
        let next = two_c1 * cur - prev;
        prev = cur;
        cur = next;
    }
}

fn legendre_into(x: f64, out: &mut [f64]) {
    let t = 2.0 * x - 1.0;
    let mut prev = 1.0;
    let mut cur = t;
    for (j, v) in out.iter_mut().enumerate() {
        let pj = match j {
            0 => 1.0,
            1 => t,
            _ => {
                let k = (j - 1) as f64;
                let next = ((2.0 * k + 1.0) * t * cur - k * prev) / (k + 1.0);
                prev = cur;
                cur = next;
                cur
            }
        };
        *v = (2.0 * j as f64 + 1.0).sqrt() * pj;
    }
}

/// Clamped knot vector with `dim - order` uniform interior knots.
pub(crate) fn clamped_knots(order: usize, dim: usize) -> Vec<f64> {
    let interior = dim - order;
    let mut knots = Vec::with_capacity(dim + order);
    knots.extend(std::iter::repeat_n(0.0, order));
    for i in 1..=interior {
        knots.push(i as f64 / (interior + 1) as f64);
    }
    knots.extend(std::iter::repeat_n(1.0, order));
    knots
}

fn bspline_into(order: usize, x: f64, out: &mut [f64]) {
    let dim = out.len();
    let degree = order - 1;
    let knots = clamped_knots(order, dim);
    out.fill(0.0);

    // Knot span index with t[span] <= x < t[span+1]; the right endpoint
    // belongs to the last span.
    let span = if x >= 1.0 {
        dim - 1
    } else {
        let interior = dim - order;
        let s = (x * (interior + 1) as f64).floor() as usize;
        degree + s.min(interior)
    };

    // Cox–de Boor triangle for the `order` nonzero functions on this span.
    let mut n = vec![0.0; order];
    let mut left = vec![0.0; order];
    let mut right = vec![0.0; order];
    n[0] = 1.0;
    for j in 1..=degree {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    for (r, v) in n.iter().enumerate() {
        out[span - degree + r] = *v;
    }
}

/// Piecewise-linear interpolated weight on [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum WeightFn {
    Uniform,
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
}

impl WeightFn {
    /// `grid` must start at 0, end at 1 and increase strictly; `values` must
    /// be strictly positive.
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::invalid(
                "tabulated weight needs at least two (x, value) pairs",
            ));
        }
        if grid[0] != 0.0 || *grid.last().unwrap() != 1.0 {
            return Err(Error::invalid("tabulated weight grid must span [0, 1]"));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "tabulated weight grid must be strictly increasing",
            ));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::invalid(format!(
                "tabulated weight values must be positive, found {v}"
            )));
        }
        Ok(WeightFn::Tabulated { grid, values })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightFn::Uniform => 1.0,
            WeightFn::Tabulated { grid, values } => {
                let x = x.clamp(0.0, 1.0);
                let idx = grid.partition_point(|&g| g <= x);
                if idx == 0 {
                    return values[0];
                }
                if idx >= grid.len() {
                    return *values.last().unwrap();
                }
                let (x0, x1) = (grid[idx - 1], grid[idx]);
                let t = (x - x0) / (x1 - x0);
                values[idx - 1] + t * (values[idx] - values[idx - 1])
            }
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, WeightFn::Uniform)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on [0, 1].
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn composite(panels: usize) -> Self {
        let edges: Vec<f64> = (0..=panels).map(|p| p as f64 / panels as f64).collect();
        Self::from_edges(&edges)
    }

    /// `panels` uniform panels, further split at every point of `breaks`
    /// inside (0, 1).
    pub fn with_breaks(panels: usize, breaks: &[f64]) -> Self {
        let mut edges: Vec<f64> = (0..=panels).map(|p| p as f64 / panels as f64).collect();
        edges.extend(breaks.iter().copied().filter(|b| *b > 0.0 && *b < 1.0));
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        Self::from_edges(&edges)
    }

    /// Composite rule adapted to `mu`: tabulated weights have kinks at their
    /// grid points, so panels are split there.
    pub fn for_weight(panels: usize, mu: &WeightFn) -> Self {
        match mu {
            WeightFn::Uniform => Self::composite(panels),
            WeightFn::Tabulated { grid, .. } => Self::with_breaks(panels, grid),
        }
    }

    fn from_edges(edges: &[f64]) -> Self {
        let (ref_nodes, ref_weights) = gauss_legendre(GL_NODES_PER_PANEL);
        let cap = edges.len().saturating_sub(1) * GL_NODES_PER_PANEL;
        let mut nodes = Vec::with_capacity(cap);
        let mut weights = Vec::with_capacity(cap);
        for pair in edges.windows(2) {
            let (a, h) = (pair[0], pair[1] - pair[0]);
            for (z, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(a + 0.5 * h * (z + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}
