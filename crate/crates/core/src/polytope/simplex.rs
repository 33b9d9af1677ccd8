use super::{check_dims, distance_to_hull, halfspaces_from_points, GeometryError, Halfspace};
use crate::config::TOL;
use crate::linalg::{self, Lu, Matrix};
use crate::lp::{solve_lp, LpProblem, LpStatus};

/// A d-simplex given by d+1 vertices in R^d, possibly degenerate.
#[derive(Clone, Debug)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
    lu: Option<Lu>,
    det: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self, GeometryError> {
        let d = check_dims(&vertices)?;
        if vertices.len() != d + 1 {
            return Err(GeometryError::VertexCount { expected: d + 1, got: vertices.len() });
        }
        let mut m = Matrix::zeros(d + 1, d + 1);
        for (j, v) in vertices.iter().enumerate() {
            for k in 0..d {
                m[(k, j)] = v[k];
            }
            m[(d, j)] = 1.0;
        }
        let (lu, det) = match Lu::factor(&m) {
            Ok(lu) => {
                let det = lu.determinant();
                if det.abs() < TOL.degeneracy {
                    (None, det)
                } else {
                    (Some(lu), det)
                }
            }
            Err(_) => (None, 0.0),
        };
        Ok(Self { vertices, lu, det })
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn is_degenerate(&self) -> bool {
        self.lu.is_none()
    }

    pub fn determinant(&self) -> f64 {
        self.det
    }

    pub fn centroid(&self) -> Vec<f64> {
        linalg::mean(&self.vertices)
    }

    /// Unique barycentric coordinates; errors on a degenerate simplex.
    pub fn barycentric(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let lu = self.lu.as_ref().ok_or(GeometryError::Degenerate { det: self.det })?;
        let mut rhs = x.to_vec();
        rhs.push(1.0);
        Ok(lu.solve(&rhs))
    }

    /// Linear part of the barycentric map: coordinates change by this when
    /// `x` moves by `v`.
    pub fn barycentric_direction(&self, v: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let lu = self.lu.as_ref().ok_or(GeometryError::Degenerate { det: self.det })?;
        let mut rhs = v.to_vec();
        rhs.push(0.0);
        Ok(lu.solve(&rhs))
    }

    /// Barycentric test when nondegenerate, Euclidean distance otherwise.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match self.barycentric(x) {
            Ok(l) => l.iter().all(|&li| li >= -tol),
            Err(_) => distance_to_hull(x, &self.vertices) <= tol,
        }
    }

    pub fn halfspaces(&self) -> Result<Vec<Halfspace>, GeometryError> {
        let Some(lu) = &self.lu else {
            return halfspaces_from_points(&self.vertices);
        };
        let d = self.dim();
        let mut out = Vec::with_capacity(d + 1);
        for i in 0..=d {
            let mut e = vec![0.0; d + 1];
            e[i] = 1.0;
            let w = lu.solve_transpose(&e);
            // λ_i(x) = w[..d]·x + w[d] ≥ 0
            let n: Vec<f64> = w[..d].iter().map(|c| -c).collect();
            out.push(Halfspace::new(n, w[d])?);
        }
        Ok(out)
    }

    /// Convex weights reproducing `x`: barycentric coordinates when
    /// nondegenerate, the lexicographically largest weights otherwise.
    pub fn convex_weights(&self, x: &[f64]) -> Result<Vec<f64>, GeometryError> {
        if let Ok(l) = self.barycentric(x) {
            return Ok(l);
        }
        lexicographic_weights(&self.vertices, x)
    }
}

/// Among all `λ ≥ 0, Σλ = 1, Σλ_i v_i = x`, picks the lexicographic maximum
/// of `λ`. Falls back to the nearest point of the hull when `x` sits
/// slightly outside.
pub(super) fn lexicographic_weights(vertices: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let n = vertices.len();
    let d = x.len();
    let target = match base_problem(vertices, x, n, d) {
        Some(_) => x.to_vec(),
        None => super::min_norm_point(
            &vertices.iter().map(|v| linalg::sub(v, x)).collect::<Vec<_>>(),
        )
        .0
        .iter()
        .zip(x)
        .map(|(a, b)| a + b)
        .collect(),
    };
    let mut fixed: Vec<(usize, f64)> = Vec::new();
    let mut last = None;
    for i in 0..n {
        let mut p = build(vertices, &target, n, d);
        for &(j, val) in &fixed {
            p.bound(j, val, f64::INFINITY);
        }
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        let p = p.maximize(c);
        let out = solve_lp(&p)?;
        if out.status != LpStatus::Optimal {
            break;
        }
        fixed.push((i, (out.x[i] - 1e-12).max(0.0)));
        last = Some(out.x);
    }
    let mut w = last.ok_or(GeometryError::OutsideSource)?;
    for wi in &mut w {
        *wi = wi.max(0.0);
    }
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|wi| wi / s).collect())
}

fn build(vertices: &[Vec<f64>], x: &[f64], n: usize, d: usize) -> LpProblem {
    let mut p = LpProblem::new(n);
    p.equals(vec![1.0; n], 1.0);
    for k in 0..d {
        p.equals(vertices.iter().map(|v| v[k]).collect(), x[k]);
    }
    p
}

fn base_problem(vertices: &[Vec<f64>], x: &[f64], n: usize, d: usize) -> Option<()> {
    let out = solve_lp(&build(vertices, x, n, d)).ok()?;
    (out.status == LpStatus::Optimal).then_some(())
}

/// Vertex-to-vertex map sending `source.vertices[i]` to `target[i]`,
/// extended affinely through barycentric coordinates.
#[derive(Clone, Copy, Debug)]
pub struct AffineTracingMap<'a> {
    source: &'a Simplex,
    target: &'a [Vec<f64>],
}

impl<'a> AffineTracingMap<'a> {
    pub fn new(source: &'a Simplex, target: &'a [Vec<f64>]) -> Self {
        Self { source, target }
    }

    pub fn apply(&self, e: &[f64]) -> Result<Vec<f64>, GeometryError> {
        let w = self.source.convex_weights(e)?;
        let d = self.target[0].len();
        let mut out = vec![0.0; d];
        for (wi, t) in w.iter().zip(self.target) {
            linalg::axpy(*wi, t, &mut out);
        }
        Ok(out)
    }
}
