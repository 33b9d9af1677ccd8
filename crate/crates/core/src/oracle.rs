//! Brute-force ground truth for small instances.

use std::collections::HashMap;

use thiserror::Error;

use crate::aspiration::{fingerprint, initial_aspiration, local_policy, propagate_to_state, PlanContext, PlanError};
use crate::linalg;
use crate::mdp::{DepthInfo, Environment, Policy, PurePolicy};
use crate::polytope::{dedup_points, min_norm_point, GeometryError, Polytope, VPolytope, MAX_HULL_DIM};
use crate::values::state_values;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{what}: {needed} exceeds the budget of {budget}")]
    Budget { what: &'static str, needed: f64, budget: usize },
    #[error("budget must be positive")]
    ZeroBudget,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumBudget {
    pub max_policies: usize,
    pub max_trajectories: usize,
    pub max_pairs: usize,
}

impl Default for EnumBudget {
    fn default() -> Self {
        Self { max_policies: 100_000, max_trajectories: 1_000_000, max_pairs: 1_000_000 }
    }
}

impl EnumBudget {
    fn check(&self) -> Result<(), OracleError> {
        if self.max_policies == 0 || self.max_trajectories == 0 || self.max_pairs == 0 {
            return Err(OracleError::ZeroBudget);
        }
        Ok(())
    }
}

/// Odometer over action choices at a fixed list of states.
pub struct PurePolicies {
    n_states: usize,
    n_actions: usize,
    states: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for PurePolicies {
    type Item = PurePolicy;

    fn next(&mut self) -> Option<PurePolicy> {
        if self.done {
            return None;
        }
        let mut actions = vec![0u32; self.n_states];
        for (k, &s) in self.states.iter().enumerate() {
            actions[s] = self.digits[k] as u32;
        }
        self.done = true;
        for digit in self.digits.iter_mut() {
            *digit += 1;
            if *digit < self.n_actions {
                self.done = false;
                break;
            }
            *digit = 0;
        }
        Some(PurePolicy { actions })
    }
}

fn policies_over(env: &Environment, states: Vec<usize>, budget: &EnumBudget) -> Result<PurePolicies, OracleError> {
    budget.check()?;
    let needed = (env.n_actions() as f64).powi(states.len() as i32);
    if needed > budget.max_policies as f64 {
        return Err(OracleError::Budget { what: "pure policies", needed, budget: budget.max_policies });
    }
    let digits = vec![0; states.len()];
    Ok(PurePolicies { n_states: env.n_states(), n_actions: env.n_actions(), states, digits, done: false })
}

/// Every pure policy, distinct on non-terminal states.
pub fn enumerate_pure_policies(env: &Environment, budget: &EnumBudget) -> Result<PurePolicies, OracleError> {
    let states = (0..env.n_states()).filter(|&s| !env.is_terminal(s)).collect();
    policies_over(env, states, budget)
}

fn reachable_from(env: &Environment, s: usize) -> Vec<bool> {
    let mut seen = vec![false; env.n_states()];
    let mut stack = vec![s];
    seen[s] = true;
    while let Some(u) = stack.pop() {
        if env.is_terminal(u) {
            continue;
        }
        for a in 0..env.n_actions() {
            for (t, _, _) in env.outcomes(u, a).iter() {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
    }
    seen
}

/// Extreme points of `points` when the dimension allows, else the
/// distinct points.
pub fn hull_of(points: Vec<Vec<f64>>) -> Result<VPolytope, OracleError> {
    let points = dedup_points(points, 1e-12);
    if points.len() > 1 && points[0].len() <= MAX_HULL_DIM {
        Ok(Polytope::from_vertices(points)?.vpolytope().clone())
    } else {
        Ok(VPolytope::new(points)?)
    }
}

#[derive(Clone, Debug)]
pub struct FeasibilityHull {
    pub hull: VPolytope,
    /// `witnesses[k]` achieves `hull.vertices()[k]`.
    pub witnesses: Vec<PurePolicy>,
    /// Every distinct pure-policy value.
    pub values: Vec<Vec<f64>>,
}

/// Hull of `V^π(s)` over pure policies that differ on states reachable
/// from `s`.
pub fn exact_feasibility_hull(
    env: &Environment,
    depth: &DepthInfo,
    s: usize,
    budget: &EnumBudget,
) -> Result<FeasibilityHull, OracleError> {
    let d = env.dim();
    let reach = reachable_from(env, s);
    let states = (0..env.n_states()).filter(|&u| reach[u] && !env.is_terminal(u)).collect();
    let mut values: Vec<(Vec<f64>, PurePolicy)> = Vec::new();
    for pi in policies_over(env, states, budget)? {
        let v = state_values(env, depth, &pi);
        let x = v[s * d..(s + 1) * d].to_vec();
        if !values.iter().any(|(y, _)| linalg::max_abs_diff(y, &x) <= 1e-12) {
            values.push((x, pi));
        }
    }
    let hull = hull_of(values.iter().map(|(x, _)| x.clone()).collect())?;
    let witnesses = hull
        .vertices()
        .iter()
        .map(|v| {
            values
                .iter()
                .min_by(|a, b| linalg::max_abs_diff(&a.0, v).total_cmp(&linalg::max_abs_diff(&b.0, v)))
                .expect("nonempty")
                .1
                .clone()
        })
        .collect();
    Ok(FeasibilityHull { hull, witnesses, values: values.into_iter().map(|(x, _)| x).collect() })
}

/// `E_{s'}[f + V(s')]` as a Minkowski combination of successor hulls.
pub fn action_hull(env: &Environment, state_hulls: &[VPolytope], s: usize, a: usize) -> Result<VPolytope, OracleError> {
    let d = env.dim();
    let mut acc = vec![vec![0.0; d]];
    for (t, p, f) in env.outcomes(s, a).iter() {
        let mut next = Vec::with_capacity(acc.len() * state_hulls[t].vertices().len());
        for x in &acc {
            for v in state_hulls[t].vertices() {
                next.push((0..d).map(|k| x[k] + p * (f[k] + v[k])).collect());
            }
        }
        acc = hull_of(next)?.into_vertices();
    }
    hull_of(acc)
}

/// Feasibility hulls of every state by the backward recursion over
/// Minkowski sums and unions.
pub fn recursive_feasibility_hulls(env: &Environment, depth: &DepthInfo) -> Result<Vec<VPolytope>, OracleError> {
    let d = env.dim();
    let mut hulls = vec![VPolytope::point(vec![0.0; d]); env.n_states()];
    for &s in depth.order.iter().rev() {
        if env.is_terminal(s) {
            continue;
        }
        let mut pts = Vec::new();
        for a in 0..env.n_actions() {
            pts.extend(action_hull(env, &hulls, s, a)?.into_vertices());
        }
        hulls[s] = hull_of(pts)?;
    }
    Ok(hulls)
}

/// Euclidean distance between `conv(points)` and `e`, via the minimum-norm
/// point of their Minkowski difference.
pub fn hull_distance(points: &[Vec<f64>], e: &Polytope) -> f64 {
    let diff: Vec<Vec<f64>> =
        points.iter().flat_map(|p| e.vertices().iter().map(move |q| linalg::sub(p, q))).collect();
    linalg::norm(&min_norm_point(&diff).0)
}

/// Exact `E τ` of the aspiration-carrying policy with all-successor
/// propagation, memoized over `(state, aspiration)` pairs.
pub fn exact_policy_expectation(
    ctx: &PlanContext<'_>,
    e0: &Polytope,
    budget: &EnumBudget,
) -> Result<Vec<f64>, OracleError> {
    budget.check()?;
    let s0 = ctx.env.initial();
    if ctx.env.is_terminal(s0) {
        return Ok(vec![0.0; ctx.dim()]);
    }
    let e = initial_aspiration(ctx, e0)?;
    let mut memo = HashMap::new();
    expectation_rec(ctx, s0, &e, budget.max_pairs, &mut memo)
}

fn expectation_rec(
    ctx: &PlanContext<'_>,
    s: usize,
    e: &Polytope,
    max_pairs: usize,
    memo: &mut HashMap<(usize, Vec<i64>), Vec<f64>>,
) -> Result<Vec<f64>, OracleError> {
    let d = ctx.dim();
    if ctx.env.is_terminal(s) {
        return Ok(vec![0.0; d]);
    }
    let key = (s, fingerprint(e));
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let mut out = vec![0.0; d];
    for (a, ea, w) in local_policy(ctx, s, e)?.merged() {
        for (t, p, f) in ctx.env.outcomes(s, a).iter() {
            if p <= 0.0 {
                continue;
            }
            let e2 = propagate_to_state(ctx, s, a, &ea, t)?;
            let v = expectation_rec(ctx, t, &e2, max_pairs, memo)?;
            for k in 0..d {
                out[k] += w * p * (f[k] + v[k]);
            }
        }
    }
    if memo.len() >= max_pairs {
        return Err(OracleError::Budget { what: "state-aspiration pairs", needed: memo.len() as f64 + 1.0, budget: max_pairs });
    }
    memo.insert(key, out.clone());
    Ok(out)
}

/// One leaf of the planner's computation tree.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannerPath {
    pub prob: f64,
    pub total: Vec<f64>,
    /// `(state, action, π(s, E)(a))` per step.
    pub steps: Vec<(usize, usize, f64)>,
}

/// Every path of the planner's computation tree, without memoization.
pub fn enumerate_planner_paths(
    ctx: &PlanContext<'_>,
    e0: &Polytope,
    budget: &EnumBudget,
) -> Result<Vec<PlannerPath>, OracleError> {
    budget.check()?;
    let s0 = ctx.env.initial();
    let start = PlannerPath { prob: 1.0, total: vec![0.0; ctx.dim()], steps: Vec::new() };
    if ctx.env.is_terminal(s0) {
        return Ok(vec![start]);
    }
    let e = initial_aspiration(ctx, e0)?;
    enumerate_paths_from(ctx, s0, &e, budget)
}

/// Paths of the computation tree below `(s, E)`, with totals counted from `s`.
pub fn enumerate_paths_from(
    ctx: &PlanContext<'_>,
    s: usize,
    e: &Polytope,
    budget: &EnumBudget,
) -> Result<Vec<PlannerPath>, OracleError> {
    budget.check()?;
    let start = PlannerPath { prob: 1.0, total: vec![0.0; ctx.dim()], steps: Vec::new() };
    let mut out = Vec::new();
    paths_rec(ctx, s, e, start, budget.max_trajectories, &mut out)?;
    Ok(out)
}

fn paths_rec(
    ctx: &PlanContext<'_>,
    s: usize,
    e: &Polytope,
    prefix: PlannerPath,
    max: usize,
    out: &mut Vec<PlannerPath>,
) -> Result<(), OracleError> {
    if ctx.env.is_terminal(s) {
        if out.len() >= max {
            return Err(OracleError::Budget { what: "trajectories", needed: out.len() as f64 + 1.0, budget: max });
        }
        out.push(prefix);
        return Ok(());
    }
    let lp = local_policy(ctx, s, e)?;
    let marg = lp.action_marginals(ctx.env.n_actions());
    for (a, ea, w) in lp.merged() {
        for (t, p, f) in ctx.env.outcomes(s, a).iter() {
            if p <= 0.0 {
                continue;
            }
            let e2 = propagate_to_state(ctx, s, a, &ea, t)?;
            let mut next = prefix.clone();
            next.prob *= w * p;
            linalg::axpy(1.0, f, &mut next.total);
            next.steps.push((s, a, marg[a]));
            paths_rec(ctx, t, &e2, next, max, out)?;
        }
    }
    Ok(())
}

/// Shannon entropy (nats) of the state trajectory from the initial state,
/// with actions marginalized out.
pub fn exact_trajectory_entropy(env: &Environment, policy: &dyn Policy, budget: &EnumBudget) -> Result<f64, OracleError> {
    budget.check()?;
    let mut dist: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut branches = 0usize;
    let mut stack = vec![(vec![env.initial() as u32], 1.0)];
    while let Some((path, prob)) = stack.pop() {
        let s = *path.last().expect("nonempty") as usize;
        if env.is_terminal(s) {
            *dist.entry(path).or_insert(0.0) += prob;
            continue;
        }
        branches += 1;
        if branches > budget.max_trajectories {
            return Err(OracleError::Budget { what: "trajectories", needed: branches as f64, budget: budget.max_trajectories });
        }
        policy.for_each_action(s, &mut |a, pa| {
            for (t, p, _) in env.outcomes(s, a).iter() {
                if p > 0.0 {
                    let mut next = path.clone();
                    next.push(t as u32);
                    stack.push((next, prob * pa * p));
                }
            }
        });
    }
    Ok(dist.values().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{random_dag, RandomDagSpec};
    use crate::mdp::{EnvBuilder, MarkovPolicy};

    fn fork(d: usize, deltas: [f64; 2]) -> Environment {
        let mut b = EnvBuilder::new(d, 2);
        let s0 = b.add_state(false);
        let t = b.add_state(true);
        b.add_outcome(s0, 0, t, 1.0, &vec![deltas[0]; d]).unwrap();
        b.add_outcome(s0, 1, t, 1.0, &vec![deltas[1]; d]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn counts_policies() {
        let env = fork(1, [0.0, 1.0]);
        assert_eq!(enumerate_pure_policies(&env, &EnumBudget::default()).unwrap().count(), 2);
        let mut b = EnvBuilder::new(1, 2);
        let s: Vec<usize> = (0..4).map(|k| b.add_state(k == 3)).collect();
        for a in 0..2 {
            b.add_outcome(s[0], a, s[1], 1.0, &[0.0]).unwrap();
            b.add_outcome(s[1], a, s[2], 1.0, &[0.0]).unwrap();
            b.add_outcome(s[2], a, s[3], 1.0, &[0.0]).unwrap();
        }
        let env = b.build().unwrap();
        let all: Vec<PurePolicy> = enumerate_pure_policies(&env, &EnumBudget::default()).unwrap().collect();
        assert_eq!(all.len(), 8);
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 8);
        let tight = EnumBudget { max_policies: 7, ..Default::default() };
        assert!(matches!(enumerate_pure_policies(&env, &tight), Err(OracleError::Budget { .. })));
    }

    #[test]
    fn terminal_and_interval_hulls() {
        let env = fork(1, [-1.0, 2.0]);
        let depth = DepthInfo::new(&env).unwrap();
        let h = exact_feasibility_hull(&env, &depth, 1, &EnumBudget::default()).unwrap();
        assert_eq!(h.hull.vertices(), &[vec![0.0]]);
        let h = exact_feasibility_hull(&env, &depth, 0, &EnumBudget::default()).unwrap();
        let mut v: Vec<f64> = h.hull.vertices().iter().map(|x| x[0]).collect();
        v.sort_by(f64::total_cmp);
        assert_eq!(v, vec![-1.0, 2.0]);
    }

    #[test]
    fn witnesses_and_recursion_agree() {
        for seed in 0..6 {
            let spec = RandomDagSpec { steps: 3, width: 2, d: 2, ..Default::default() };
            let env = random_dag(&spec, seed).unwrap();
            let depth = DepthInfo::new(&env).unwrap();
            let h = exact_feasibility_hull(&env, &depth, env.initial(), &EnumBudget::default()).unwrap();
            let d = env.dim();
            for (v, w) in h.hull.vertices().iter().zip(&h.witnesses) {
                let vals = state_values(&env, &depth, w);
                assert!(linalg::max_abs_diff(&vals[env.initial() * d..(env.initial() + 1) * d], v) < 1e-12);
            }
            let rec = recursive_feasibility_hulls(&env, &depth).unwrap();
            let r = &rec[env.initial()];
            assert_eq!(r.vertices().len(), h.hull.vertices().len());
            for v in r.vertices() {
                assert!(h.hull.vertices().iter().any(|w| linalg::max_abs_diff(v, w) < 1e-9));
            }
        }
    }

    #[test]
    fn entropy_oracle_basics() {
        let env = fork(1, [0.0, 1.0]);
        let pi = PurePolicy::constant(env.n_states(), 0);
        assert_eq!(exact_trajectory_entropy(&env, &pi, &EnumBudget::default()).unwrap(), 0.0);
        // both actions reach the same successor, so the state trajectory is certain
        let u = MarkovPolicy::uniform(env.n_states(), 2);
        assert_eq!(exact_trajectory_entropy(&env, &u, &EnumBudget::default()).unwrap(), 0.0);
        let b = EnumBudget { max_trajectories: 0, ..Default::default() };
        assert!(exact_trajectory_entropy(&env, &u, &b).is_err());

        let mut bld = EnvBuilder::new(1, 1);
        let s0 = bld.add_state(false);
        let t1 = bld.add_state(true);
        let t2 = bld.add_state(true);
        bld.add_outcome(s0, 0, t1, 0.5, &[0.0]).unwrap();
        bld.add_outcome(s0, 0, t2, 0.5, &[0.0]).unwrap();
        let env = bld.build().unwrap();
        let h = exact_trajectory_entropy(&env, &PurePolicy::constant(3, 0), &EnumBudget::default()).unwrap();
        assert!((h - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hull_distance_basics() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let b = Polytope::aabb(&[2.0, -1.0], &[3.0, 1.0]).unwrap();
        assert!((hull_distance(&pts, &b) - 1.0).abs() < 1e-12);
        let b = Polytope::aabb(&[0.5, -1.0], &[3.0, 1.0]).unwrap();
        assert!(hull_distance(&pts, &b) < 1e-12);
    }
}
