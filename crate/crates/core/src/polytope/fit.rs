use super::{enumerate_vertices, GeometryError, HPolytope, Polytope, Simplex, VPolytope, MAX_HULL_DIM};
use crate::linalg;
use crate::lp::{solve_lp, LpProblem, LpStatus};

/// Slack on barycentric nonnegativity absorbing roundoff at the boundary.
const BARY_SLACK: f64 = 1e-10;

/// The set of `ℓ ≥ 0` with `x + ℓ y ∈ S`, as a closed interval.
pub fn ray_interval(x: &[f64], y: &[f64], s: &Simplex) -> Result<Option<(f64, f64)>, GeometryError> {
    if let (Ok(a), Ok(b)) = (s.barycentric(x), s.barycentric_direction(y)) {
        let mut lo: f64 = 0.0;
        let mut hi = f64::INFINITY;
        for (ai, bi) in a.iter().zip(&b) {
            // ai + ℓ bi ≥ −slack
            let rhs = -BARY_SLACK - ai;
            if bi.abs() <= 1e-15 {
                if rhs > 0.0 {
                    return Ok(None);
                }
            } else if *bi > 0.0 {
                lo = lo.max(rhs / bi);
            } else {
                hi = hi.min(rhs / bi);
            }
        }
        return Ok((lo <= hi).then_some((lo, hi)));
    }
    let lo = ray_lp(x, y, s, -1.0)?;
    let Some(lo) = lo else { return Ok(None) };
    let hi = ray_lp(x, y, s, 1.0)?.unwrap_or(f64::INFINITY);
    Ok(Some((lo, hi)))
}

/// Optimizes `sign · ℓ` over `x + ℓ y = Σ λ_i v_i` with convex `λ`.
fn ray_lp(x: &[f64], y: &[f64], s: &Simplex, sign: f64) -> Result<Option<f64>, GeometryError> {
    let n = s.vertices().len();
    let d = x.len();
    let mut c = vec![0.0; n + 1];
    c[n] = sign;
    let mut p = LpProblem::new(n + 1).maximize(c);
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    p.equals(ones, 1.0);
    for k in 0..d {
        let mut row: Vec<f64> = s.vertices().iter().map(|v| v[k]).collect();
        row.push(-y[k]);
        p.equals(row, x[k]);
    }
    let out = solve_lp(&p)?;
    Ok(match out.status {
        LpStatus::Optimal => Some(out.x[n]),
        LpStatus::Unbounded => Some(f64::INFINITY),
        LpStatus::Infeasible => None,
    })
}

/// Whether the segment from `x` to `v` meets `S`.
pub fn segment_intersects_simplex(x: &[f64], v: &[f64], s: &Simplex) -> bool {
    let y = linalg::sub(v, x);
    matches!(ray_interval(x, &y, s), Ok(Some((lo, _))) if lo <= 1.0 + 1e-12)
}

/// Largest `r ∈ [0, r_max]` with some `ℓ ≥ 0` placing `x + ℓ y + r·shape`
/// inside `target`, then the smallest such `ℓ`.
pub fn max_shrink_then_min_shift(
    shape: &VPolytope,
    x: &[f64],
    y: &[f64],
    target: &Simplex,
    r_max: f64,
) -> Result<(f64, f64), GeometryError> {
    let r_max = r_max.clamp(0.0, 1.0);
    if !target.is_degenerate() {
        fit_nondegenerate(shape, x, y, target, r_max)
    } else {
        fit_degenerate(shape, x, y, target, r_max)
    }
}

fn fit_nondegenerate(
    shape: &VPolytope,
    x: &[f64],
    y: &[f64],
    target: &Simplex,
    r_max: f64,
) -> Result<(f64, f64), GeometryError> {
    let a = target.barycentric(x)?;
    let b = target.barycentric_direction(y)?;
    let mut m = vec![f64::INFINITY; a.len()];
    for w in shape.vertices() {
        let c = target.barycentric_direction(w)?;
        for (mi, ci) in m.iter_mut().zip(&c) {
            *mi = mi.min(*ci);
        }
    }
    // vars (r, ℓ): a_i + ℓ b_i + r m_i ≥ 0
    let mut p1 = LpProblem::new(2).maximize(vec![1.0, 0.0]);
    p1.bound(0, 0.0, r_max);
    for i in 0..a.len() {
        p1.le(vec![-m[i], -b[i]], a[i] + BARY_SLACK);
    }
    let o1 = solve_lp(&p1)?;
    if o1.status != LpStatus::Optimal {
        return Err(GeometryError::RayMissesTarget);
    }
    let r = o1.x[0];
    let mut p2 = LpProblem::new(1).maximize(vec![-1.0]);
    for i in 0..a.len() {
        p2.le(vec![-b[i]], a[i] + r * m[i] + BARY_SLACK);
    }
    let o2 = solve_lp(&p2)?;
    let l = if o2.status == LpStatus::Optimal { o2.x[0] } else { o1.x[1] };
    Ok((r, l))
}

/// Degenerate targets: one block of convex weights per shape vertex, with a
/// shared residual `t` so points a hair off a flat target still fit.
fn fit_degenerate(
    shape: &VPolytope,
    x: &[f64],
    y: &[f64],
    target: &Simplex,
    r_max: f64,
) -> Result<(f64, f64), GeometryError> {
    let nv = target.vertices().len();
    let k = shape.vertices().len();
    let nvar = 3 + k * nv;
    let build = |c: Vec<f64>, r_bounds: (f64, f64), t_max: f64| {
        let mut p = LpProblem::new(nvar).maximize(c);
        p.bound(0, r_bounds.0, r_bounds.1);
        p.bound(2, 0.0, t_max);
        for (j, w) in shape.vertices().iter().enumerate() {
            let off = 3 + j * nv;
            let mut ones = vec![0.0; nvar];
            ones[off..off + nv].iter_mut().for_each(|v| *v = 1.0);
            p.equals(ones, 1.0);
            for kk in 0..x.len() {
                // |Σ λ v − r w − ℓ y − x| ≤ t
                let mut row = vec![0.0; nvar];
                row[0] = -w[kk];
                row[1] = -y[kk];
                for (i, v) in target.vertices().iter().enumerate() {
                    row[off + i] = v[kk];
                }
                let mut lo = row.clone();
                row[2] = -1.0;
                p.le(row, x[kk]);
                lo[2] = 1.0;
                p.ge(lo, x[kk]);
            }
        }
        p
    };
    let scale = target.vertices().iter().chain(std::iter::once(&x.to_vec())).map(|v| linalg::max_abs(v)).fold(1.0, f64::max);
    let mut c0 = vec![0.0; nvar];
    c0[2] = -1.0;
    let o0 = solve_lp(&build(c0, (0.0, r_max), f64::INFINITY))?;
    if o0.status != LpStatus::Optimal || o0.x[2] > 1e-8 * scale {
        return Err(GeometryError::RayMissesTarget);
    }
    let t_max = o0.x[2].max(0.0) * (1.0 + 1e-6) + 1e-12 * scale;
    let mut c1 = vec![0.0; nvar];
    c1[0] = 1.0;
    let o1 = solve_lp(&build(c1, (0.0, r_max), t_max))?;
    if o1.status != LpStatus::Optimal {
        return Err(GeometryError::RayMissesTarget);
    }
    let r = o1.x[0];
    let mut c2 = vec![0.0; nvar];
    c2[1] = -1.0;
    let o2 = solve_lp(&build(c2, (r, r), t_max))?;
    let l = if o2.status == LpStatus::Optimal { o2.x[1] } else { o1.x[1] };
    Ok((r, l))
}

/// `P ∩ S` by uniting halfspace lists and re-enumerating vertices.
pub fn clip_to_simplex(p: &Polytope, s: &Simplex) -> Result<Polytope, GeometryError> {
    let d = p.dim();
    if d > MAX_HULL_DIM {
        return Err(GeometryError::UnsupportedDimension { max: MAX_HULL_DIM, got: d });
    }
    let mut hs = p.halfspaces().to_vec();
    hs.extend(s.halfspaces()?);
    let verts = enumerate_vertices(&hs, d)?;
    if verts.is_empty() {
        return Err(GeometryError::EmptyIntersection);
    }
    let hs = super::prune_halfspaces(hs, &verts);
    Ok(Polytope::from_parts(VPolytope::new(verts)?, HPolytope::new(hs)))
}
