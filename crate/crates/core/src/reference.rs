//! Reference policies and the simplices spanned by their values.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::lp::{solve_lp, LpError, LpProblem, LpStatus};
use crate::mdp::{DepthInfo, Environment, PurePolicy};
use crate::polytope::{GeometryError, Polytope, Simplex};
use crate::values::{greedy_direction_policy, q_from_v, state_values};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("need {expected} reference policies, got {got}")]
    PolicyCount { expected: usize, got: usize },
    #[error("anchor has dimension {got}, environment has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("anchor not in the hull of reference values after {iterations} iterations")]
    NotInHull { iterations: usize },
    #[error("no nondegenerate simplex among the candidate points")]
    Degenerate,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `d + 1` pure policies with their state values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFrame {
    pub d: usize,
    pub policies: Vec<PurePolicy>,
    /// Per policy, flat `V` with stride `d`.
    pub values: Vec<Vec<f64>>,
    /// The anchor point the frame was built around.
    pub anchor: Vec<f64>,
}

impl ReferenceFrame {
    pub fn n_vertices(&self) -> usize {
        self.policies.len()
    }

    pub fn policy(&self, i: usize) -> &PurePolicy {
        &self.policies[i]
    }

    /// `V^{π_i}(s)`.
    pub fn vertex(&self, i: usize, s: usize) -> &[f64] {
        &self.values[i][s * self.d..(s + 1) * self.d]
    }

    pub fn vr_vertices(&self, s: usize) -> Vec<Vec<f64>> {
        (0..self.n_vertices()).map(|i| self.vertex(i, s).to_vec()).collect()
    }

    /// `Q^{π_i}(s, a)` for every `i`.
    pub fn qr_vertices(&self, env: &Environment, s: usize, a: usize) -> Vec<Vec<f64>> {
        (0..self.n_vertices())
            .map(|i| {
                let mut q = vec![0.0; self.d];
                q_from_v(env, &self.values[i], s, a, &mut q);
                q
            })
            .collect()
    }

    pub fn vr(&self, s: usize) -> Simplex {
        Simplex::new(self.vr_vertices(s)).expect("frame has d + 1 vertices")
    }

    pub fn qr(&self, env: &Environment, s: usize, a: usize) -> Simplex {
        Simplex::new(self.qr_vertices(env, s, a)).expect("frame has d + 1 vertices")
    }

    /// Reachable non-terminal states whose `V^R(s)` or some `Q^R(s, a)` is
    /// degenerate, with the offending action (`None` for `V^R`).
    pub fn degenerate_simplices(&self, env: &Environment, depth: &DepthInfo) -> Vec<(usize, Option<usize>)> {
        let mut out = Vec::new();
        for s in 0..env.n_states() {
            if env.is_terminal(s) || depth.rho[s] == u32::MAX {
                continue;
            }
            if self.vr(s).is_degenerate() {
                out.push((s, None));
            }
            for a in 0..env.n_actions() {
                if self.qr(env, s, a).is_degenerate() {
                    out.push((s, Some(a)));
                }
            }
        }
        out
    }
}

/// Evaluates `d + 1` given policies into a frame.
pub fn build_reference_simplices(
    env: &Environment,
    depth: &DepthInfo,
    policies: Vec<PurePolicy>,
    anchor: Vec<f64>,
) -> Result<ReferenceFrame, ReferenceError> {
    let d = env.dim();
    if policies.len() != d + 1 {
        return Err(ReferenceError::PolicyCount { expected: d + 1, got: policies.len() });
    }
    if anchor.len() != d {
        return Err(ReferenceError::DimensionMismatch { expected: d, got: anchor.len() });
    }
    let values = policies.iter().map(|p| state_values(env, depth, p)).collect();
    Ok(ReferenceFrame { d, policies, values, anchor })
}

/// Minimizing and maximizing policies; for `d = 1` their simplices are the
/// exact feasibility intervals.
pub fn min_max_frame(env: &Environment, depth: &DepthInfo, anchor: Vec<f64>) -> Result<ReferenceFrame, ReferenceError> {
    if env.dim() != 1 {
        return Err(ReferenceError::PolicyCount { expected: 2, got: env.dim() + 1 });
    }
    let (lo, vlo) = extreme_policy(env, depth, -1.0);
    let (hi, vhi) = extreme_policy(env, depth, 1.0);
    Ok(ReferenceFrame { d: 1, policies: vec![lo, hi], values: vec![vlo, vhi], anchor })
}

/// Backward induction maximizing `sign · Q` in the scalar case.
fn extreme_policy(env: &Environment, depth: &DepthInfo, sign: f64) -> (PurePolicy, Vec<f64>) {
    let mut v = vec![0.0; env.n_states()];
    let mut actions = vec![0u32; env.n_states()];
    let mut q = [0.0];
    for &s in depth.order.iter().rev() {
        if env.is_terminal(s) {
            continue;
        }
        let mut best = f64::NEG_INFINITY;
        for a in 0..env.n_actions() {
            q_from_v(env, &v, s, a, &mut q);
            if sign * q[0] > best {
                best = sign * q[0];
                actions[s] = a as u32;
                v[s] = q[0];
            }
        }
    }
    (PurePolicy { actions }, v)
}

/// Indices of `d + 1` affinely independent points whose simplex contains
/// `x`, built from a basic solution of the hull-membership LP. `None` when
/// `x` is outside the hull.
pub fn hull_membership_basic(points: &[Vec<f64>], x: &[f64]) -> Result<Option<Vec<usize>>, ReferenceError> {
    let Some(support) = hull_support(points, x)? else { return Ok(None) };
    pad_affinely(points, support, x.len()).map(Some)
}

/// Basic points of a convex combination reaching `x`, unpadded.
pub fn hull_support(points: &[Vec<f64>], x: &[f64]) -> Result<Option<Vec<usize>>, ReferenceError> {
    let n = points.len();
    if n == 0 {
        return Ok(None);
    }
    let mut p = LpProblem::new(n);
    p.equals(vec![1.0; n], 1.0);
    for (k, xk) in x.iter().enumerate() {
        p.equals(points.iter().map(|v| v[k]).collect(), *xk);
    }
    let out = solve_lp(&p)?;
    if out.status != LpStatus::Optimal {
        return Ok(None);
    }
    let mut support: Vec<usize> = out.basis.iter().copied().filter(|&j| j < n).collect();
    for (j, &l) in out.x.iter().enumerate() {
        if l > 1e-12 && !support.contains(&j) {
            support.push(j);
        }
    }
    support.sort_unstable();
    Ok(Some(support))
}

/// Keeps the support and greedily adds the point farthest from the current
/// affine hull.
fn pad_affinely(points: &[Vec<f64>], support: Vec<usize>, d: usize) -> Result<Vec<usize>, ReferenceError> {
    let origin = points[support[0]].clone();
    let residual = |basis: &[Vec<f64>], p: &[f64]| {
        let mut r = linalg::sub(p, &origin);
        for b in basis {
            let c = linalg::dot(b, &r);
            linalg::axpy(-c, b, &mut r);
        }
        r
    };
    let mut chosen = vec![support[0]];
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let add = |chosen: &mut Vec<usize>, basis: &mut Vec<Vec<f64>>, j: usize| {
        let r = residual(basis, &points[j]);
        let n = linalg::norm(&r);
        if n > 1e-9 {
            basis.push(linalg::scale(&r, 1.0 / n));
            chosen.push(j);
        }
    };
    for &j in &support[1..] {
        add(&mut chosen, &mut basis, j);
    }
    while chosen.len() < d + 1 {
        let best = (0..points.len())
            .filter(|j| !chosen.contains(j))
            .map(|j| (j, linalg::norm(&residual(&basis, &points[j]))))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, n)) if n > 1e-9 => add(&mut chosen, &mut basis, j),
            _ => return Err(ReferenceError::Degenerate),
        }
    }
    if chosen.len() > d + 1 {
        return Err(ReferenceError::Degenerate);
    }
    let s = Simplex::new(chosen.iter().map(|&j| points[j].clone()).collect())?;
    if s.is_degenerate() {
        return Err(ReferenceError::Degenerate);
    }
    Ok(chosen)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SearchOptions {
    pub max_iter: usize,
}

impl SearchOptions {
    pub fn for_dim(d: usize) -> Self {
        Self { max_iter: 20 * (d + 1) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub frame: ReferenceFrame,
    /// Iterations until the anchor entered the hull of the collected values.
    pub iterations: usize,
    /// Distinct values `V^{π_k}(s0)` collected.
    pub values: Vec<Vec<f64>>,
    /// Whether no nondegenerate simplex around the anchor was found.
    pub degenerate: bool,
}

/// Greedy directional search for `d + 1` policies whose values at the
/// initial state span a simplex containing `x`.
pub fn find_reference_policies<R: Rng + ?Sized>(
    env: &Environment,
    depth: &DepthInfo,
    x: &[f64],
    opts: SearchOptions,
    rng: &mut R,
) -> Result<SearchResult, ReferenceError> {
    search(env, depth, x, opts, rng)?.map_err(|_| ReferenceError::NotInHull { iterations: opts.max_iter })
}

/// Like [`find_reference_policies`], but when `x` stays outside the hull of
/// the collected values the anchor moves to a point of `region` inside that
/// hull, if there is one.
pub fn find_reference_policies_within<R: Rng + ?Sized>(
    env: &Environment,
    depth: &DepthInfo,
    x: &[f64],
    region: &Polytope,
    opts: SearchOptions,
    rng: &mut R,
) -> Result<SearchResult, ReferenceError> {
    let c = match search(env, depth, x, opts, rng)? {
        Ok(res) => return Ok(res),
        Err(c) => c,
    };
    let not_in_hull = ReferenceError::NotInHull { iterations: opts.max_iter };
    let Some(anchor) = point_in_hull_and_region(&c.points, region)? else { return Err(not_in_hull) };
    let Some(support) = hull_support(&c.points, &anchor)? else { return Err(not_in_hull) };
    let (idx, degenerate) = match pad_affinely(&c.points, support.clone(), env.dim()) {
        Ok(idx) => (idx, false),
        Err(ReferenceError::Degenerate) => (repeat_to(support, env.dim() + 1), true),
        Err(e) => return Err(e),
    };
    let frame = ReferenceFrame {
        d: env.dim(),
        policies: idx.iter().map(|&j| c.pols[j].clone()).collect(),
        values: idx.iter().map(|&j| c.vals[j].clone()).collect(),
        anchor,
    };
    Ok(SearchResult { frame, iterations: opts.max_iter, values: c.points, degenerate })
}

/// Convex weights over `points` whose combination lies in `region`, with the
/// largest margin to the region's facets.
fn point_in_hull_and_region(points: &[Vec<f64>], region: &Polytope) -> Result<Option<Vec<f64>>, ReferenceError> {
    let n = points.len();
    if n == 0 {
        return Ok(None);
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut p = LpProblem::new(n + 1).maximize(c);
    let mut ones = vec![1.0; n + 1];
    ones[n] = 0.0;
    p.equals(ones, 1.0);
    for h in region.halfspaces() {
        let mut row: Vec<f64> = points.iter().map(|v| linalg::dot(&h.normal, v)).collect();
        row.push(linalg::norm(&h.normal));
        p.le(row, h.offset + 1e-9 * (1.0 + h.offset.abs()));
    }
    let out = solve_lp(&p)?;
    if out.status != LpStatus::Optimal {
        return Ok(None);
    }
    let mut x = vec![0.0; region.dim()];
    for (l, v) in out.x[..n].iter().zip(points) {
        linalg::axpy(l.max(0.0), v, &mut x);
    }
    Ok(Some(x))
}

fn repeat_to(mut support: Vec<usize>, len: usize) -> Vec<usize> {
    while support.len() < len {
        support.push(support[support.len() - 1]);
    }
    support.truncate(len);
    support
}

/// Values collected by a search that never enclosed its anchor.
struct Collected {
    pols: Vec<PurePolicy>,
    vals: Vec<Vec<f64>>,
    points: Vec<Vec<f64>>,
}

fn search<R: Rng + ?Sized>(
    env: &Environment,
    depth: &DepthInfo,
    x: &[f64],
    opts: SearchOptions,
    rng: &mut R,
) -> Result<Result<SearchResult, Collected>, ReferenceError> {
    let d = env.dim();
    if x.len() != d {
        return Err(ReferenceError::DimensionMismatch { expected: d, got: x.len() });
    }
    let s0 = env.initial();
    let gaussian = |rng: &mut R| loop {
        let y: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = linalg::norm(&y);
        if n > 1e-12 {
            break linalg::scale(&y, 1.0 / n);
        }
    };
    let mut y = gaussian(rng);
    let mut pols: Vec<PurePolicy> = Vec::new();
    let mut vals: Vec<Vec<f64>> = Vec::new();
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut esum = vec![0.0; d];
    let mut degenerate_hit: Option<(usize, Vec<usize>)> = None;
    for k in 1..=opts.max_iter {
        let (pi, v) = greedy_direction_policy(env, depth, &y, x);
        let vk = v[s0 * d..(s0 + 1) * d].to_vec();
        if !points.iter().any(|p| linalg::max_abs_diff(p, &vk) <= 1e-9) {
            points.push(vk.clone());
            pols.push(pi);
            vals.push(v);
        }
        let e = linalg::sub(x, &vk);
        let n = linalg::norm(&e);
        if n > 1e-12 {
            linalg::axpy(1.0 / n, &e, &mut esum);
        }
        if k > d {
            match hull_membership_basic(&points, x) {
                Ok(Some(idx)) => {
                    let frame = ReferenceFrame {
                        d,
                        policies: idx.iter().map(|&j| pols[j].clone()).collect(),
                        values: idx.iter().map(|&j| vals[j].clone()).collect(),
                        anchor: x.to_vec(),
                    };
                    return Ok(Ok(SearchResult { frame, iterations: k, values: points, degenerate: false }));
                }
                Ok(None) => {}
                Err(ReferenceError::Degenerate) => {
                    if degenerate_hit.is_none() {
                        let support = hull_support(&points, x)?.unwrap_or_default();
                        degenerate_hit = Some((k, support));
                    }
                }
                Err(e) => return Err(e),
            }
        }
        let ny = linalg::norm(&esum);
        y = if ny > 1e-12 { linalg::scale(&esum, 1.0 / ny) } else { gaussian(rng) };
    }
    if degenerate_hit.is_none() {
        if let Some(support) = hull_support(&points, x)? {
            degenerate_hit = Some((opts.max_iter, support));
        }
    }
    match degenerate_hit {
        Some((k, support)) if !support.is_empty() => {
            // every simplex of this frame is flat
            let support = repeat_to(support, d + 1);
            let frame = ReferenceFrame {
                d,
                policies: support.iter().map(|&j| pols[j].clone()).collect(),
                values: support.iter().map(|&j| vals[j].clone()).collect(),
                anchor: x.to_vec(),
            };
            Ok(Ok(SearchResult { frame, iterations: k, values: points, degenerate: true }))
        }
        _ => Ok(Err(Collected { pols, vals, points })),
    }
}
