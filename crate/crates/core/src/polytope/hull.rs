use super::{dedup_points, GeometryError, Halfspace};
use crate::config::TOL;
use crate::linalg::{self, Lu, Matrix};
use crate::lp::{solve_lp, LpProblem, LpStatus};

/// Largest affine dimension handled by the vertex-to-halfspace conversion.
pub const MAX_HULL_DIM: usize = 3;

/// Halfspace description of `conv(points)`, computed inside the affine hull
/// and lifted back with ± complement normals for the flat directions.
pub fn halfspaces_from_points(points: &[Vec<f64>]) -> Result<Vec<Halfspace>, GeometryError> {
    let d = super::check_dims(points)?;
    let p0 = &points[0];
    let diffs: Vec<Vec<f64>> = points.iter().map(|p| linalg::sub(p, p0)).collect();
    let scale = diffs.iter().map(|v| linalg::norm(v)).fold(0.0, f64::max);
    let basis = linalg::orthonormal_basis(&diffs, 1e-9 * scale.max(1e-300));
    let k = basis.len();
    if k > MAX_HULL_DIM {
        return Err(GeometryError::UnsupportedDimension { max: MAX_HULL_DIM, got: k });
    }
    let coords: Vec<Vec<f64>> = diffs.iter().map(|v| basis.iter().map(|b| linalg::dot(b, v)).collect()).collect();
    let local = match k {
        0 => vec![],
        1 => facets_1d(&coords),
        2 => facets_2d(&coords),
        _ => facets_3d(&coords, scale),
    };
    let mut out = Vec::with_capacity(local.len() + 2 * (d - k));
    for (nk, off) in local {
        let mut n = vec![0.0; d];
        for (c, b) in nk.iter().zip(&basis) {
            linalg::axpy(*c, b, &mut n);
        }
        let o = linalg::dot(&n, p0) + off;
        out.push(Halfspace::new(n, o)?);
    }
    for w in linalg::orthogonal_complement(&basis, d) {
        let o = linalg::dot(&w, p0);
        out.push(Halfspace::new(linalg::scale(&w, -1.0), -o)?);
        out.push(Halfspace::new(w, o)?);
    }
    Ok(out)
}

fn facets_1d(c: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    let hi = c.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    let lo = c.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    vec![(vec![1.0], hi), (vec![-1.0], -lo)]
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise hull by the monotone chain.
fn hull_2d(c: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts = c.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let scale = pts.iter().map(|p| linalg::norm(p)).fold(1.0, f64::max);
    let eps = 1e-12 * scale * scale;
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= eps {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= eps {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn facets_2d(c: &[Vec<f64>]) -> Vec<(Vec<f64>, f64)> {
    let h = hull_2d(c);
    let m = h.len();
    (0..m)
        .map(|i| {
            let a = &h[i];
            let b = &h[(i + 1) % m];
            // outward normal of a counter-clockwise edge
            let n = vec![b[1] - a[1], a[0] - b[0]];
            let off = n[0] * a[0] + n[1] * a[1];
            (n, off)
        })
        .collect()
}

fn facets_3d(c: &[Vec<f64>], scale: f64) -> Vec<(Vec<f64>, f64)> {
    let pts = dedup_points(c.to_vec(), 1e-12 * scale.max(1.0));
    let m = pts.len();
    let tol = 1e-9 * scale.max(1e-300);
    let mut out: Vec<(Vec<f64>, f64)> = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let u = linalg::sub(&pts[j], &pts[i]);
                let v = linalg::sub(&pts[k], &pts[i]);
                let n = vec![u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
                let nn = linalg::norm(&n);
                if nn <= 1e-12 * scale * scale {
                    continue;
                }
                let n = linalg::scale(&n, 1.0 / nn);
                let off = linalg::dot(&n, &pts[i]);
                let mut above = false;
                let mut below = false;
                for p in &pts {
                    let s = linalg::dot(&n, p) - off;
                    above |= s > tol;
                    below |= s < -tol;
                }
                let (n, off) = match (above, below) {
                    (false, _) => (n, off),
                    (true, false) => (linalg::scale(&n, -1.0), -off),
                    _ => continue,
                };
                if !out.iter().any(|(m2, o2)| linalg::max_abs_diff(m2, &n) <= 1e-9 && (o2 - off).abs() <= tol) {
                    out.push((n, off));
                }
            }
        }
    }
    out
}

/// Vertices of `{x : n_i·x ≤ b_i}` by solving every d-subset of tight
/// constraints.
pub fn enumerate_vertices(halfspaces: &[Halfspace], d: usize) -> Result<Vec<Vec<f64>>, GeometryError> {
    let m = halfspaces.len();
    if d == 0 {
        return Ok(vec![vec![]]);
    }
    let scale = halfspaces.iter().map(|h| h.offset.abs()).fold(1.0, f64::max);
    let tol = TOL.feasibility * scale;
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut idx: Vec<usize> = (0..d).collect();
    if m < d {
        return Ok(out);
    }
    loop {
        let rows: Vec<Vec<f64>> = idx.iter().map(|&i| halfspaces[i].normal.clone()).collect();
        if let Ok(lu) = Lu::factor(&Matrix::from_rows(&rows)) {
            let b: Vec<f64> = idx.iter().map(|&i| halfspaces[i].offset).collect();
            let x = lu.solve(&b);
            if x.iter().all(|v| v.is_finite())
                && halfspaces.iter().all(|h| h.slack(&x) >= -tol)
                && !out.iter().any(|q| linalg::max_abs_diff(q, &x) <= TOL.dedup * scale)
            {
                out.push(x);
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if idx[i] < m - d + i {
                idx[i] += 1;
                for j in i + 1..d {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Errors unless every coordinate is bounded above and below.
pub(super) fn check_bounded(halfspaces: &[Halfspace], d: usize) -> Result<(), GeometryError> {
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; d];
            c[k] = sign;
            let mut p = LpProblem::new(d).maximize(c);
            for j in 0..d {
                p.free(j);
            }
            for h in halfspaces {
                p.le(h.normal.clone(), h.offset);
            }
            match solve_lp(&p)?.status {
                LpStatus::Optimal => {}
                LpStatus::Unbounded => return Err(GeometryError::Unbounded),
                LpStatus::Infeasible => return Err(GeometryError::EmptyIntersection),
            }
        }
    }
    Ok(())
}
