//! Policy evaluation by backward induction and the occupancy-measure
//! feasibility LP.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;
use crate::lp::{solve_lp, FarkasCertificate, LpError, LpProblem, LpStatus};
use crate::mdp::{DepthInfo, Environment, Policy, PurePolicy};
use crate::polytope::Polytope;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValuesError {
    #[error("aspiration has dimension {got}, environment has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("occupancy LP with {rows} rows and {cols} columns exceeds the size budget")]
    TooLarge { rows: usize, cols: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `V` per state and `Q` per state-action pair, both flat with stride `d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTables {
    pub d: usize,
    pub n_actions: usize,
    pub v: Vec<f64>,
    pub q: Vec<f64>,
}

impl ValueTables {
    pub fn v(&self, s: usize) -> &[f64] {
        &self.v[s * self.d..(s + 1) * self.d]
    }

    pub fn q(&self, s: usize, a: usize) -> &[f64] {
        let k = s * self.n_actions + a;
        &self.q[k * self.d..(k + 1) * self.d]
    }
}

/// `Q(s, a) = E[f + V(s')]` into `out`.
pub fn q_from_v(env: &Environment, v: &[f64], s: usize, a: usize, out: &mut [f64]) {
    let d = env.dim();
    out.iter_mut().for_each(|x| *x = 0.0);
    for (t, p, f) in env.outcomes(s, a).iter() {
        let vt = &v[t * d..(t + 1) * d];
        for k in 0..d {
            out[k] += p * (f[k] + vt[k]);
        }
    }
}

/// State values of a (possibly stochastic) Markov policy.
pub fn state_values(env: &Environment, depth: &DepthInfo, policy: &dyn Policy) -> Vec<f64> {
    let d = env.dim();
    let mut v = vec![0.0; env.n_states() * d];
    let mut q = vec![0.0; d];
    for &s in depth.order.iter().rev() {
        if env.is_terminal(s) {
            continue;
        }
        let mut acc = vec![0.0; d];
        policy.for_each_action(s, &mut |a, p| {
            q_from_v(env, &v, s, a, &mut q);
            linalg::axpy(p, &q, &mut acc);
        });
        v[s * d..(s + 1) * d].copy_from_slice(&acc);
    }
    v
}

pub fn evaluate_policy(env: &Environment, depth: &DepthInfo, policy: &dyn Policy) -> ValueTables {
    let d = env.dim();
    let na = env.n_actions();
    let v = state_values(env, depth, policy);
    let mut q = vec![0.0; env.n_states() * na * d];
    for s in 0..env.n_states() {
        if env.is_terminal(s) {
            continue;
        }
        for a in 0..na {
            let k = s * na + a;
            q_from_v(env, &v, s, a, &mut q[k * d..(k + 1) * d]);
        }
    }
    ValueTables { d, n_actions: na, v, q }
}

/// Greedy pure policy maximizing the cosine between `y` and
/// `Q(s, a) − ℓ(s)/(ρ(s)+ℓ(s))·x`, ties to the lowest action. Returns the
/// policy with its state values.
pub fn greedy_direction_policy(env: &Environment, depth: &DepthInfo, y: &[f64], x: &[f64]) -> (PurePolicy, Vec<f64>) {
    let d = env.dim();
    let mut v = vec![0.0; env.n_states() * d];
    let mut actions = vec![0u32; env.n_states()];
    let mut q = vec![0.0; d];
    let mut best_q = vec![0.0; d];
    for &s in depth.order.iter().rev() {
        if env.is_terminal(s) {
            continue;
        }
        let (rho, ell) = (depth.rho[s], depth.ell[s]);
        let c = if rho == u32::MAX { 0.0 } else { ell as f64 / (rho as f64 + ell as f64) };
        let mut best = f64::NEG_INFINITY;
        for a in 0..env.n_actions() {
            q_from_v(env, &v, s, a, &mut q);
            let mut zy = 0.0;
            let mut zz = 0.0;
            for k in 0..d {
                let z = q[k] - c * x[k];
                zy += z * y[k];
                zz += z * z;
            }
            let n = zz.sqrt();
            let score = if n <= 1e-12 { 0.0 } else { zy / n };
            if score > best {
                best = score;
                actions[s] = a as u32;
                best_q.copy_from_slice(&q);
            }
        }
        v[s * d..(s + 1) * d].copy_from_slice(&best_q);
    }
    (PurePolicy { actions }, v)
}

/// Result of the occupancy-measure feasibility LP.
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// A point of `E0 ∩ V(s0)` with its largest inscribed-ball margin.
    Feasible { x: Vec<f64>, margin: f64 },
    /// `E0 ∩ V(s0)` is empty; the certificate refers to `problem`.
    Infeasible { certificate: FarkasCertificate, problem: Box<LpProblem> },
}

/// Default cap on dense tableau entries.
pub const OCCUPANCY_LP_BUDGET: usize = 4_000_000;

/// Finds a point of `E0` realizable by some policy, maximizing its margin to
/// the facets of `E0`, via an LP over occupancy measures.
pub fn feasible_point_lp(env: &Environment, depth: &DepthInfo, e0: &Polytope) -> Result<Feasibility, ValuesError> {
    feasible_point_lp_with_budget(env, depth, e0, OCCUPANCY_LP_BUDGET)
}

pub fn feasible_point_lp_with_budget(
    env: &Environment,
    depth: &DepthInfo,
    e0: &Polytope,
    budget: usize,
) -> Result<Feasibility, ValuesError> {
    let d = env.dim();
    if e0.dim() != d {
        return Err(ValuesError::DimensionMismatch { expected: d, got: e0.dim() });
    }
    let s0 = env.initial();
    let na = env.n_actions();
    let inner: Vec<usize> =
        depth.order.iter().copied().filter(|&s| !env.is_terminal(s) && depth.rho[s] != u32::MAX).collect();
    let mut row_of = vec![usize::MAX; env.n_states()];
    for (i, &s) in inner.iter().enumerate() {
        row_of[s] = i;
    }
    let nvar = inner.len() * na + 1;
    let rows = inner.len() + e0.halfspaces().len();
    if rows * nvar > budget {
        return Err(ValuesError::TooLarge { rows, cols: nvar });
    }
    let t = nvar - 1;
    let mut p = LpProblem::new(nvar).maximize({
        let mut c = vec![0.0; nvar];
        c[t] = 1.0;
        c
    });
    let mut flow = vec![vec![0.0; nvar]; inner.len()];
    let mut gain = vec![vec![0.0; nvar]; d];
    for (i, &s) in inner.iter().enumerate() {
        for a in 0..na {
            let col = i * na + a;
            flow[i][col] += 1.0;
            for (t2, pr, f) in env.outcomes(s, a).iter() {
                if row_of[t2] != usize::MAX {
                    flow[row_of[t2]][col] -= pr;
                }
                for k in 0..d {
                    gain[k][col] += pr * f[k];
                }
            }
        }
    }
    for (i, row) in flow.into_iter().enumerate() {
        p.equals(row, if inner[i] == s0 { 1.0 } else { 0.0 });
    }
    for h in e0.halfspaces() {
        let mut row = vec![0.0; nvar];
        for (k, nk) in h.normal.iter().enumerate() {
            linalg::axpy(*nk, &gain[k], &mut row);
        }
        row[t] = 1.0;
        p.le(row, h.offset);
    }
    if inner.is_empty() {
        // terminal start: the only Total is zero
        let zero = vec![0.0; d];
        return Ok(if e0.hpolytope().contains(&zero, crate::config::TOL.containment) {
            Feasibility::Feasible { margin: e0.hpolytope().min_slack(&zero).max(0.0), x: zero }
        } else {
            let out = solve_lp(&p)?;
            Feasibility::Infeasible { certificate: out.farkas.unwrap_or_default(), problem: Box::new(p) }
        });
    }
    let out = solve_lp(&p)?;
    match out.status {
        LpStatus::Optimal => {
            let x: Vec<f64> = gain.iter().map(|g| linalg::dot(g, &out.x)).collect();
            Ok(Feasibility::Feasible { x, margin: out.x[t] })
        }
        LpStatus::Infeasible => Ok(Feasibility::Infeasible {
            certificate: out.farkas.unwrap_or_default(),
            problem: Box::new(p),
        }),
        LpStatus::Unbounded => Err(ValuesError::Lp(LpError::IterationLimit { limit: 0 })),
    }
}
