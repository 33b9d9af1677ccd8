use rand::Rng;

use super::trace::{Candidate, StepTrace};
use super::{fingerprint, PlanContext, PlanError, Schedule, Variant};
use crate::config::TOL;
use crate::linalg;
use crate::lp::{solve_lp, LpProblem, LpStatus};
use crate::polytope::{
    clip_to_simplex, distance_to_hull, max_shrink_then_min_shift, ray_interval, segment_intersects_simplex, GeometryError, Polytope,
    Simplex,
};

/// What a selector sees when choosing among the actions of one direction.
pub struct CandidateQuery<'q> {
    pub state: usize,
    pub aspiration: &'q Polytope,
    pub direction: usize,
    pub actions: &'q [usize],
    /// Parallel to `actions`; empty unless the selector asked for them.
    pub action_aspirations: &'q [Polytope],
}

/// Distribution over the candidate actions of one direction.
pub trait CandidateSelector: Send + Sync {
    fn needs_aspirations(&self) -> bool {
        false
    }

    fn weights(&self, ctx: &PlanContext<'_>, q: &CandidateQuery<'_>) -> Result<Vec<f64>, PlanError>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UniformSelector;

impl CandidateSelector for UniformSelector {
    fn weights(&self, _: &PlanContext<'_>, q: &CandidateQuery<'_>) -> Result<Vec<f64>, PlanError> {
        Ok(vec![1.0 / q.actions.len() as f64; q.actions.len()])
    }
}

/// Always the lowest-indexed candidate.
#[derive(Clone, Copy, Debug, Default)]
pub struct FirstSelector;

impl CandidateSelector for FirstSelector {
    fn weights(&self, _: &PlanContext<'_>, q: &CandidateQuery<'_>) -> Result<Vec<f64>, PlanError> {
        let mut w = vec![0.0; q.actions.len()];
        w[0] = 1.0;
        Ok(w)
    }
}

pub fn schedule_r_max(ctx: &PlanContext<'_>, s: usize) -> f64 {
    match ctx.config.schedule {
        Schedule::None => 1.0,
        Schedule::LinearVolume => {
            let t = ctx.depth.horizon[s].max(1) as f64;
            (1.0 - 1.0 / t).powf(1.0 / ctx.dim() as f64)
        }
    }
}

/// Reference simplices at one state.
pub(super) struct StateGeometry {
    pub s: usize,
    pub qr: Vec<Simplex>,
}

impl StateGeometry {
    pub fn new(ctx: &PlanContext<'_>, s: usize) -> Self {
        Self { s, qr: (0..ctx.env.n_actions()).map(|a| ctx.frame.qr(ctx.env, s, a)).collect() }
    }
}

fn directional(ctx: &PlanContext<'_>, g: &StateGeometry, x: &[f64], i: usize) -> Vec<usize> {
    let n = ctx.env.n_actions();
    if i == 0 {
        return (0..n).collect();
    }
    let v = ctx.frame.vertex(i - 1, g.s);
    let own = ctx.frame.policy(i - 1).action(g.s);
    (0..n).filter(|&a| a == own || segment_intersects_simplex(x, v, &g.qr[a])).collect()
}

/// Actions whose reference simplex meets the segment from `x` to reference
/// vertex `i` (all actions for `i = 0`).
pub fn directional_action_set(ctx: &PlanContext<'_>, s: usize, x: &[f64], i: usize) -> Vec<usize> {
    directional(ctx, &StateGeometry::new(ctx, s), x, i)
}

fn action_aspiration(
    ctx: &PlanContext<'_>,
    g: &StateGeometry,
    e: &Polytope,
    x: &[f64],
    a: usize,
    i: usize,
) -> Result<Polytope, PlanError> {
    let qr = &g.qr[a];
    let target = if i > 0 { ctx.frame.vertex(i - 1, g.s).to_vec() } else { qr.centroid() };
    let y = linalg::sub(&target, x);
    match ctx.config.variant {
        Variant::Shrink | Variant::TraceInterval => {
            let shape = e.vpolytope().map_points(|p| linalg::sub(p, x));
            let (r, l) = max_shrink_then_min_shift(&shape, x, &y, qr, schedule_r_max(ctx, g.s))?;
            let mut to = x.to_vec();
            linalg::axpy(l, &y, &mut to);
            Ok(e.homothety(x, r, &to))
        }
        Variant::Clip => {
            if linalg::norm(&y) <= 1e-15 {
                return Ok(clip_to_simplex(e, qr)?);
            }
            // how far E extends behind x along −y
            let mut back = f64::INFINITY;
            for h in e.halfspaces() {
                let ny = linalg::dot(&h.normal, &y);
                if ny < 0.0 {
                    back = back.min((h.slack(x) / -ny).max(0.0));
                }
            }
            let (l, l_out) = ray_interval(x, &y, qr)?.ok_or(GeometryError::RayMissesTarget)?;
            let z = linalg::scale(&y, (back + l).min(l_out));
            match clip_to_simplex(&e.translate(&z), qr) {
                // a flat target can lose a thin intersection to roundoff
                Err(GeometryError::EmptyIntersection) => {
                    let mut entry = x.to_vec();
                    linalg::axpy(l, &y, &mut entry);
                    Ok(Polytope::point(entry))
                }
                other => Ok(other?),
            }
        }
    }
}

/// The action-aspiration for action `a` in direction `i`.
pub fn make_action_aspiration(
    ctx: &PlanContext<'_>,
    s: usize,
    a: usize,
    e: &Polytope,
    i: usize,
) -> Result<Polytope, PlanError> {
    action_aspiration(ctx, &StateGeometry::new(ctx, s), e, &e.centroid(), a, i)
}

/// Lexicographically maximal `p` (first `p_0`, then `p_1`, ...) subject to
/// `Σ_i p_i h_i(c) ≤ b` for every halfspace `(c, b)` of `E`, where
/// `support[i][j]` is the support value of part `i` along halfspace `j`.
fn mixture_lp(e: &Polytope, support: &[Vec<f64>]) -> Result<Option<Vec<f64>>, PlanError> {
    let n = support.len();
    let mut base = LpProblem::new(n);
    base.equals(vec![1.0; n], 1.0);
    for (j, h) in e.halfspaces().iter().enumerate() {
        let scale = 1.0 + h.offset.abs();
        base.le(support.iter().map(|sv| sv[j]).collect(), h.offset + TOL.feasibility * scale);
    }
    let mut fixed = base;
    let mut p = vec![0.0; n];
    for k in 0..n {
        let mut c = vec![0.0; n];
        c[k] = 1.0;
        let prob = fixed.clone().maximize(c);
        let out = solve_lp(&prob)?;
        if out.status != LpStatus::Optimal {
            if k == 0 {
                return Ok(None);
            }
            break;
        }
        p = out.x;
        let assigned: f64 = p[..=k].iter().sum();
        if assigned >= 1.0 - 1e-12 {
            break;
        }
        let mut row = vec![0.0; n];
        row[k] = 1.0;
        fixed.ge(row, (p[k] - 1e-12).max(0.0));
    }
    p.iter_mut().for_each(|v| *v = v.max(0.0));
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    Ok(Some(p))
}

/// Mixture weights over `parts` keeping the mixture inside `e`, maximizing
/// the weight of the first part.
pub fn mixture_distribution(e: &Polytope, parts: &[Polytope]) -> Result<Vec<f64>, PlanError> {
    let support: Vec<Vec<f64>> =
        parts.iter().map(|p| e.halfspaces().iter().map(|h| p.support_value(&h.normal)).collect()).collect();
    mixture_lp(e, &support)?.ok_or_else(|| PlanError::MixtureInfeasible { state: String::from("?") })
}

fn sample_index<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    for (k, wk) in w.iter().enumerate() {
        acc += wk / total;
        if u < acc {
            return k;
        }
    }
    w.iter().rposition(|&x| x > 0.0).unwrap_or(w.len() - 1)
}

fn check_weights(w: &[f64], n: usize) -> Result<(), PlanError> {
    if w.len() != n || w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
        return Err(PlanError::SelectorWeights { expected: n, got: w.len() });
    }
    Ok(())
}

/// Containment up to roundoff: barycentric slack is scale-free but blows up
/// on thin simplices, so a small Euclidean distance also passes.
pub(super) fn within_simplex(sx: &Simplex, p: &Polytope) -> bool {
    let scale = 1.0 + sx.vertices().iter().map(|v| linalg::max_abs(v)).fold(0.0, f64::max);
    p.vertices()
        .iter()
        .all(|v| sx.contains(v, TOL.containment) || distance_to_hull(v, sx.vertices()) <= TOL.containment * scale)
}

fn check_action_aspiration(ctx: &PlanContext<'_>, g: &StateGeometry, a: usize, ea: &Polytope) -> Result<(), PlanError> {
    if !ctx.config.check_invariants {
        return Ok(());
    }
    let qr = &g.qr[a];
    if !within_simplex(qr, ea) {
        let gap = ea.vertices().iter().map(|v| distance_to_hull(v, qr.vertices())).fold(0.0, f64::max);
        return Err(PlanError::Invariant {
            state: ctx.state_name(g.s),
            what: format!(
                "action-aspiration of {} leaves its reference simplex by {gap:.2e}",
                ctx.env.action_name(a)
            ),
        });
    }
    Ok(())
}

/// A chosen action with its aspiration and the step's candidate record.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub action: usize,
    pub aspiration: Polytope,
    pub candidates: Vec<Candidate>,
    pub p: Vec<f64>,
    pub chosen: usize,
}

/// One candidate per direction, then a direction drawn from the mixture.
pub fn select_action<R: Rng + ?Sized>(
    ctx: &PlanContext<'_>,
    s: usize,
    e: &Polytope,
    rng: &mut R,
) -> Result<Selection, PlanError> {
    let g = StateGeometry::new(ctx, s);
    let x = e.centroid();
    let d = ctx.dim();
    let mut picks = Vec::with_capacity(d + 2);
    let mut parts = Vec::with_capacity(d + 2);
    for i in 0..=d + 1 {
        let actions = directional(ctx, &g, &x, i);
        let (a, ea) = if ctx.selector.needs_aspirations() {
            let asps =
                actions.iter().map(|&a| action_aspiration(ctx, &g, e, &x, a, i)).collect::<Result<Vec<_>, _>>()?;
            let q = CandidateQuery { state: s, aspiration: e, direction: i, actions: &actions, action_aspirations: &asps };
            let w = ctx.selector.weights(ctx, &q)?;
            check_weights(&w, actions.len())?;
            let k = sample_index(&w, rng);
            (actions[k], asps.into_iter().nth(k).expect("index in range"))
        } else {
            let q = CandidateQuery { state: s, aspiration: e, direction: i, actions: &actions, action_aspirations: &[] };
            let w = ctx.selector.weights(ctx, &q)?;
            check_weights(&w, actions.len())?;
            let a = actions[sample_index(&w, rng)];
            (a, action_aspiration(ctx, &g, e, &x, a, i)?)
        };
        check_action_aspiration(ctx, &g, a, &ea)?;
        picks.push(a);
        parts.push(ea);
    }
    let p = mixture_distribution(e, &parts).map_err(|err| match err {
        PlanError::MixtureInfeasible { .. } => PlanError::MixtureInfeasible { state: ctx.state_name(s) },
        other => other,
    })?;
    let chosen = sample_index(&p, rng);
    let candidates = (0..=d + 1)
        .map(|i| Candidate { direction: i, action: picks[i], aspiration: parts[i].vertices().to_vec() })
        .collect();
    Ok(Selection { action: picks[chosen], aspiration: parts.swap_remove(chosen), candidates, p, chosen })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalEntry {
    pub direction: usize,
    pub action: usize,
    pub aspiration: Polytope,
    pub prob: f64,
}

/// Distribution over `(action, action-aspiration)` pairs at one state.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalPolicy {
    pub direction_probs: Vec<f64>,
    /// Positive-probability entries, one per direction and candidate.
    pub entries: Vec<LocalEntry>,
}

impl LocalPolicy {
    /// Entries with equal action and aspiration combined.
    pub fn merged(&self) -> Vec<(usize, Polytope, f64)> {
        let mut out: Vec<(usize, Polytope, f64, Vec<i64>)> = Vec::new();
        for en in &self.entries {
            let fp = fingerprint(&en.aspiration);
            match out.iter_mut().find(|o| o.0 == en.action && o.3 == fp) {
                Some(o) => o.2 += en.prob,
                None => out.push((en.action, en.aspiration.clone(), en.prob, fp)),
            }
        }
        out.into_iter().map(|(a, p, w, _)| (a, p, w)).collect()
    }

    pub fn action_marginals(&self, n_actions: usize) -> Vec<f64> {
        let mut m = vec![0.0; n_actions];
        for en in &self.entries {
            m[en.action] += en.prob;
        }
        m
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.entries.iter().map(|e| e.prob).collect::<Vec<_>>(), rng)
    }
}

/// The averaged action distribution: one LP over candidate distributions
/// instead of sampled candidates.
pub fn local_policy(ctx: &PlanContext<'_>, s: usize, e: &Polytope) -> Result<LocalPolicy, PlanError> {
    let g = StateGeometry::new(ctx, s);
    let x = e.centroid();
    let d = ctx.dim();
    let mut per_dir = Vec::with_capacity(d + 2);
    let mut support = Vec::with_capacity(d + 2);
    for i in 0..=d + 1 {
        let actions = directional(ctx, &g, &x, i);
        let asps = actions.iter().map(|&a| action_aspiration(ctx, &g, e, &x, a, i)).collect::<Result<Vec<_>, _>>()?;
        for (&a, ea) in actions.iter().zip(&asps) {
            check_action_aspiration(ctx, &g, a, ea)?;
        }
        let q = CandidateQuery {
            state: s,
            aspiration: e,
            direction: i,
            actions: &actions,
            action_aspirations: if ctx.selector.needs_aspirations() { &asps } else { &[] },
        };
        let mut w = ctx.selector.weights(ctx, &q)?;
        check_weights(&w, actions.len())?;
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        let sv: Vec<f64> = e
            .halfspaces()
            .iter()
            .map(|h| w.iter().zip(&asps).map(|(wk, ea)| wk * ea.support_value(&h.normal)).sum())
            .collect();
        support.push(sv);
        per_dir.push((actions, asps, w));
    }
    let p = mixture_lp(e, &support)?.ok_or_else(|| PlanError::MixtureInfeasible { state: ctx.state_name(s) })?;
    let mut entries = Vec::new();
    for (i, (actions, asps, w)) in per_dir.into_iter().enumerate() {
        for ((a, ea), wk) in actions.into_iter().zip(asps).zip(w) {
            let prob = p[i] * wk;
            if prob > 0.0 {
                entries.push(LocalEntry { direction: i, action: a, aspiration: ea, prob });
            }
        }
    }
    let total: f64 = entries.iter().map(|e| e.prob).sum();
    entries.iter_mut().for_each(|e| e.prob /= total);
    Ok(LocalPolicy { direction_probs: p, entries })
}

/// Builds a [`StepTrace`] skeleton from a selection.
pub(super) fn selection_trace(t: usize, s: usize, e: &Polytope, sel: &Selection) -> StepTrace {
    StepTrace {
        t,
        state: s,
        aspiration: e.vertices().to_vec(),
        candidates: sel.candidates.clone(),
        p: sel.p.clone(),
        chosen: sel.chosen,
        action: sel.action,
        action_aspiration: sel.aspiration.vertices().to_vec(),
        delta: Vec::new(),
        successor: usize::MAX,
        successor_aspiration: Vec::new(),
    }
}
