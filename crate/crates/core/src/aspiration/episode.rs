use rand::Rng;

use super::select::selection_trace;
use super::trace::{Candidate, StepTrace};
use super::{local_policy, propagate_to_state, select_action, PlanContext, PlanError, StepMode};
use crate::config::TOL;
use crate::linalg;
use crate::mdp::{sample_successor, Step, Trajectory};
use crate::polytope::{max_shrink_then_min_shift, Polytope};

/// `E0` itself when it fits the initial reference simplex; otherwise the
/// largest homothetic copy about the frame's anchor that fits.
pub fn initial_aspiration(ctx: &PlanContext<'_>, e0: &Polytope) -> Result<Polytope, PlanError> {
    let d = ctx.dim();
    if e0.dim() != d {
        return Err(PlanError::Infeasible(format!("aspiration has dimension {}, environment has {d}", e0.dim())));
    }
    let s0 = ctx.env.initial();
    if ctx.env.is_terminal(s0) {
        let zero = vec![0.0; d];
        return if e0.hpolytope().contains(&zero, TOL.containment) {
            Ok(Polytope::point(zero))
        } else {
            Err(PlanError::Infeasible("the only achievable Total is 0".into()))
        };
    }
    let vr = ctx.frame.vr(s0);
    if e0.vertices().iter().all(|v| vr.contains(v, TOL.feasibility)) {
        return Ok(e0.clone());
    }
    let x = &ctx.frame.anchor;
    if !e0.hpolytope().contains(x, TOL.containment) {
        return Err(PlanError::Infeasible("anchor point lies outside the aspiration".into()));
    }
    if !vr.contains(x, TOL.containment) {
        return Err(PlanError::Infeasible("anchor point lies outside the initial reference simplex".into()));
    }
    let shape = e0.vpolytope().map_points(|p| linalg::sub(p, x));
    let (r, _) = max_shrink_then_min_shift(&shape, x, &vec![0.0; d], &vr, 1.0)?;
    Ok(e0.homothety(x, r, x))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Episode {
    pub trajectory: Trajectory,
    pub steps: Vec<StepTrace>,
}

/// Acts until a terminal state, carrying the aspiration as memory.
pub fn run_episode<R: Rng + ?Sized>(
    ctx: &PlanContext<'_>,
    e0: &Polytope,
    seed: u64,
    rng: &mut R,
) -> Result<Episode, PlanError> {
    let env = ctx.env;
    let mut e = initial_aspiration(ctx, e0)?;
    let mut s = env.initial();
    let mut steps = Vec::new();
    let mut traj = Vec::new();
    while !env.is_terminal(s) {
        let (mut st, ea) = match ctx.config.mode {
            StepMode::Sampled => {
                let sel = select_action(ctx, s, &e, rng)?;
                (selection_trace(steps.len(), s, &e, &sel), sel.aspiration)
            }
            StepMode::Local => {
                let lp = local_policy(ctx, s, &e)?;
                let k = lp.sample(rng);
                let st = StepTrace {
                    t: steps.len(),
                    state: s,
                    aspiration: e.vertices().to_vec(),
                    candidates: lp
                        .entries
                        .iter()
                        .map(|en| Candidate {
                            direction: en.direction,
                            action: en.action,
                            aspiration: en.aspiration.vertices().to_vec(),
                        })
                        .collect(),
                    p: lp.entries.iter().map(|en| en.prob).collect(),
                    chosen: k,
                    action: lp.entries[k].action,
                    action_aspiration: lp.entries[k].aspiration.vertices().to_vec(),
                    delta: Vec::new(),
                    successor: usize::MAX,
                    successor_aspiration: Vec::new(),
                };
                let ea = lp.entries.into_iter().nth(k).expect("sampled index").aspiration;
                (st, ea)
            }
        };
        let a = st.action;
        let (s2, delta) = sample_successor(env, s, a, rng)?;
        let e2 = propagate_to_state(ctx, s, a, &ea, s2)?;
        st.delta = delta.to_vec();
        st.successor = s2;
        st.successor_aspiration = e2.vertices().to_vec();
        traj.push(Step { state: s, action: a, successor: s2, delta: delta.to_vec() });
        steps.push(st);
        s = s2;
        e = e2;
    }
    Ok(Episode { trajectory: Trajectory { d: ctx.dim(), seed, steps: traj }, steps })
}
