//! Criteria for choosing among candidate actions, combined by softmin.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::aspiration::{
    fingerprint, local_policy, propagate_to_state, CandidateQuery, CandidateSelector, PlanContext, PlanError,
    UniformSelector,
};
use crate::linalg;
use crate::mdp::{DepthInfo, Environment, MarkovPolicy};
use crate::polytope::{hausdorff_distance, Polytope};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// `d_H(E_a, E)`.
    Hausdorff,
    /// Variance of the future Total.
    Variance,
    /// Disordering potential `H(s, a)`.
    Entropy,
    /// Expected total divergence from a default policy.
    Kl,
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hausdorff" => Ok(Criterion::Hausdorff),
            "variance" => Ok(Criterion::Variance),
            "entropy" => Ok(Criterion::Entropy),
            "kl" => Ok(Criterion::Kl),
            other => Err(format!("unknown criterion `{other}`")),
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Hausdorff => "hausdorff",
            Criterion::Variance => "variance",
            Criterion::Entropy => "entropy",
            Criterion::Kl => "kl",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionWeights {
    pub weights: Vec<(Criterion, f64)>,
    pub beta: f64,
}

impl CriterionWeights {
    /// Parses `name=weight,...`.
    pub fn parse(spec: &str, beta: f64) -> Result<Self, String> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(format!("beta must be finite and nonnegative, got {beta}"));
        }
        let mut weights = Vec::new();
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, w) = part.split_once('=').ok_or_else(|| format!("expected name=weight, got `{part}`"))?;
            let w: f64 = w.trim().parse().map_err(|_| format!("bad weight in `{part}`"))?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(format!("weight must be finite and nonnegative in `{part}`"));
            }
            weights.push((name.trim().parse()?, w));
        }
        Ok(Self { weights, beta })
    }

    pub fn uses(&self, c: Criterion) -> bool {
        self.weights.iter().any(|(k, w)| *k == c && *w > 0.0)
    }
}

/// `H(s)` and `H(s, a)` in nats.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyTables {
    pub n_actions: usize,
    pub h_s: Vec<f64>,
    pub h_sa: Vec<f64>,
}

impl EntropyTables {
    pub fn h_sa(&self, s: usize, a: usize) -> f64 {
        self.h_sa[s * self.n_actions + a]
    }

    /// `π(s)(a) = exp(H(s, a) − H(s))`.
    pub fn softmax_policy(&self, env: &Environment) -> MarkovPolicy {
        let na = self.n_actions;
        let mut probs = vec![1.0 / na as f64; env.n_states() * na];
        for s in 0..env.n_states() {
            if env.is_terminal(s) {
                continue;
            }
            for a in 0..na {
                probs[s * na + a] = (self.h_sa(s, a) - self.h_s[s]).exp();
            }
        }
        MarkovPolicy { n_actions: na, probs }
    }
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Maximal achievable entropy of the future state trajectory.
pub fn disordering_potential(env: &Environment, depth: &DepthInfo) -> EntropyTables {
    let na = env.n_actions();
    let mut h_s = vec![0.0; env.n_states()];
    let mut h_sa = vec![0.0; env.n_states() * na];
    for &s in depth.order.iter().rev() {
        if env.is_terminal(s) {
            continue;
        }
        for a in 0..na {
            h_sa[s * na + a] = env
                .outcomes(s, a)
                .iter()
                .filter(|(_, p, _)| *p > 0.0)
                .map(|(t, p, _)| p * (-p.ln() + h_s[t]))
                .sum();
        }
        h_s[s] = log_sum_exp(h_sa[s * na..(s + 1) * na].iter().copied());
    }
    EntropyTables { n_actions: na, h_s, h_sa }
}

/// Expected Total, raw second moment and divergence of the future.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub mean: Vec<f64>,
    pub second: f64,
    pub kl: f64,
}

impl Moments {
    pub fn variance(&self) -> f64 {
        self.second - linalg::norm_sq(&self.mean)
    }
}

/// Memoized recursion over `(state, aspiration)` pairs for the
/// aspiration-carrying policy with uniform candidate selection.
pub struct FarsightedEvaluator {
    default_policy: Option<MarkovPolicy>,
    max_pairs: usize,
    memo: Mutex<HashMap<(usize, Vec<i64>), Moments>>,
}

impl FarsightedEvaluator {
    pub fn new(default_policy: Option<MarkovPolicy>, max_pairs: usize) -> Self {
        Self { default_policy, max_pairs, memo: Mutex::new(HashMap::new()) }
    }

    pub fn pairs(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }

    fn log_default(&self, ctx: &PlanContext<'_>, s: usize, a: usize) -> Result<f64, PlanError> {
        let Some(pi0) = &self.default_policy else { return Ok(0.0) };
        let q = pi0.row(s)[a];
        if q <= 0.0 {
            return Err(PlanError::Invariant {
                state: ctx.env.state_name(s).into_owned(),
                what: format!("default policy gives action {} zero probability", ctx.env.action_name(a)),
            });
        }
        Ok(q.ln())
    }

    /// Moments of the future from `(s, E)`.
    pub fn state(&self, ctx: &PlanContext<'_>, s: usize, e: &Polytope) -> Result<Moments, PlanError> {
        let d = ctx.dim();
        if ctx.env.is_terminal(s) {
            return Ok(Moments { mean: vec![0.0; d], second: 0.0, kl: 0.0 });
        }
        let key = (s, fingerprint(e));
        if let Some(m) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(m.clone());
        }
        let uniform = UniformSelector;
        let cctx = ctx.with_selector(&uniform);
        let lp = local_policy(&cctx, s, e)?;
        let marg = lp.action_marginals(ctx.env.n_actions());
        let mut out = Moments { mean: vec![0.0; d], second: 0.0, kl: 0.0 };
        for (a, ea, w) in lp.merged() {
            let m = self.action_with(&cctx, s, a, &ea, marg[a])?;
            linalg::axpy(w, &m.mean, &mut out.mean);
            out.second += w * m.second;
            out.kl += w * m.kl;
        }
        let mut memo = self.memo.lock().expect("memo lock");
        if memo.len() >= self.max_pairs {
            return Err(PlanError::BudgetExceeded { what: "state-aspiration pairs", budget: self.max_pairs });
        }
        memo.insert(key, out.clone());
        Ok(out)
    }

    /// Moments after taking `a` with aspiration `E_a`, charging `log(p̂ / π0(a))`.
    pub fn action_with(
        &self,
        ctx: &PlanContext<'_>,
        s: usize,
        a: usize,
        ea: &Polytope,
        p_hat: f64,
    ) -> Result<Moments, PlanError> {
        let d = ctx.dim();
        let mut out = Moments { mean: vec![0.0; d], second: 0.0, kl: 0.0 };
        for (t, p, f) in ctx.env.outcomes(s, a).iter() {
            if p <= 0.0 {
                continue;
            }
            let e2 = propagate_to_state(ctx, s, a, ea, t)?;
            let m = self.state(ctx, t, &e2)?;
            for ((o, fk), mk) in out.mean.iter_mut().zip(f).zip(&m.mean) {
                *o += p * (fk + mk);
            }
            out.second += p * (linalg::norm_sq(f) + 2.0 * linalg::dot(f, &m.mean) + m.second);
            out.kl += p * m.kl;
        }
        if self.default_policy.is_some() {
            out.kl += p_hat.ln() - self.log_default(ctx, s, a)?;
        }
        Ok(out)
    }
}

/// `Var` of the future Total after `a` with aspiration `E_a`.
pub fn total_variance(
    ctx: &PlanContext<'_>,
    eval: &FarsightedEvaluator,
    s: usize,
    a: usize,
    ea: &Polytope,
) -> Result<f64, PlanError> {
    let uniform = UniformSelector;
    Ok(eval.action_with(&ctx.with_selector(&uniform), s, a, ea, 1.0)?.variance())
}

/// Expected total divergence from `π0` of the policy started at `(s, E)`.
/// With `p_hat`, the first step's action probabilities are replaced by it.
pub fn kl_to_default(
    ctx: &PlanContext<'_>,
    pi0: &MarkovPolicy,
    s: usize,
    e: &Polytope,
    p_hat: Option<f64>,
) -> Result<f64, PlanError> {
    let eval = FarsightedEvaluator::new(Some(pi0.clone()), usize::MAX);
    match p_hat {
        None => Ok(eval.state(ctx, s, e)?.kl),
        Some(ph) => {
            if ctx.env.is_terminal(s) {
                return Ok(0.0);
            }
            let uniform = UniformSelector;
            let cctx = ctx.with_selector(&uniform);
            let lp = local_policy(&cctx, s, e)?;
            let mut out = 0.0;
            for (a, ea, w) in lp.merged() {
                out += w * eval.action_with(&cctx, s, a, &ea, ph)?.kl;
            }
            Ok(out)
        }
    }
}

/// `π_i(a) ∝ exp(−β Σ_j α_j g_j(a))`.
pub fn softmin(losses: &[f64], beta: f64) -> Vec<f64> {
    let m = losses.iter().map(|l| beta * l).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = losses
        .iter()
        .map(|l| {
            let z = beta * l - m;
            if z.is_nan() {
                0.0
            } else {
                (-z).exp()
            }
        })
        .collect();
    let sum: f64 = w.iter().sum();
    if sum.is_nan() || sum <= 0.0 || !sum.is_finite() {
        return vec![1.0 / losses.len() as f64; losses.len()];
    }
    w.into_iter().map(|x| x / sum).collect()
}

/// Candidate selector scoring actions by weighted criteria.
pub struct SoftminSelector {
    weights: CriterionWeights,
    entropy: Option<EntropyTables>,
    evaluator: FarsightedEvaluator,
}

impl SoftminSelector {
    pub fn new(
        env: &Environment,
        depth: &DepthInfo,
        weights: CriterionWeights,
        default_policy: Option<MarkovPolicy>,
        max_pairs: usize,
    ) -> Self {
        let entropy = weights.uses(Criterion::Entropy).then(|| disordering_potential(env, depth));
        let default_policy = if weights.uses(Criterion::Kl) {
            Some(default_policy.unwrap_or_else(|| MarkovPolicy::uniform(env.n_states(), env.n_actions())))
        } else {
            None
        };
        Self { weights, entropy, evaluator: FarsightedEvaluator::new(default_policy, max_pairs) }
    }

    pub fn weights(&self) -> &CriterionWeights {
        &self.weights
    }

    /// Weighted loss of each candidate.
    pub fn losses(&self, ctx: &PlanContext<'_>, q: &CandidateQuery<'_>) -> Result<Vec<f64>, PlanError> {
        let p_hat = 1.0 / (ctx.dim() as f64 + 2.0);
        let uniform = UniformSelector;
        let cctx = ctx.with_selector(&uniform);
        let mut out = vec![0.0; q.actions.len()];
        for (k, &a) in q.actions.iter().enumerate() {
            let ea = &q.action_aspirations[k];
            let farsighted = if self.weights.uses(Criterion::Variance) || self.weights.uses(Criterion::Kl) {
                Some(self.evaluator.action_with(&cctx, q.state, a, ea, p_hat)?)
            } else {
                None
            };
            for &(c, w) in &self.weights.weights {
                if w == 0.0 {
                    continue;
                }
                let g = match c {
                    Criterion::Hausdorff => hausdorff_distance(ea, q.aspiration),
                    Criterion::Variance => farsighted.as_ref().expect("computed").variance(),
                    Criterion::Kl => farsighted.as_ref().expect("computed").kl,
                    Criterion::Entropy => self.entropy.as_ref().expect("computed").h_sa(q.state, a),
                };
                out[k] += w * g;
            }
        }
        Ok(out)
    }
}

impl CandidateSelector for SoftminSelector {
    fn needs_aspirations(&self) -> bool {
        true
    }

    fn weights(&self, ctx: &PlanContext<'_>, q: &CandidateQuery<'_>) -> Result<Vec<f64>, PlanError> {
        if self.weights.beta == 0.0 || self.weights.weights.iter().all(|(_, w)| *w == 0.0) {
            return Ok(vec![1.0 / q.actions.len() as f64; q.actions.len()]);
        }
        Ok(softmin(&self.losses(ctx, q)?, self.weights.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::EnvBuilder;

    #[test]
    fn softmin_arithmetic() {
        let p = softmin(&[0.0, 3f64.ln()], 1.0);
        assert!((p[0] - 0.75).abs() < 1e-15 && (p[1] - 0.25).abs() < 1e-15);
        assert_eq!(softmin(&[1.0, 5.0, 2.0], 0.0), vec![1.0 / 3.0; 3]);
        let sharp = softmin(&[-1e6, 1e6], 1.0);
        assert!(sharp[0] > 1.0 - 1e-12);
    }

    #[test]
    fn weights_parse() {
        let w = CriterionWeights::parse("hausdorff=1, variance=0.5", 2.0).unwrap();
        assert_eq!(w.weights, vec![(Criterion::Hausdorff, 1.0), (Criterion::Variance, 0.5)]);
        assert!(CriterionWeights::parse("speed=1", 1.0).is_err());
        assert!(CriterionWeights::parse("kl=-1", 1.0).is_err());
        assert!(CriterionWeights::parse("kl=1", f64::NAN).is_err());
    }

    #[test]
    fn two_way_fork_entropy() {
        let mut b = EnvBuilder::new(1, 2);
        let s0 = b.add_state(false);
        let t1 = b.add_state(true);
        let t2 = b.add_state(true);
        b.add_outcome(s0, 0, t1, 1.0, &[0.0]).unwrap();
        b.add_outcome(s0, 1, t2, 1.0, &[0.0]).unwrap();
        let env = b.build().unwrap();
        let tables = disordering_potential(&env, &DepthInfo::new(&env).unwrap());
        assert_eq!(tables.h_sa(0, 0), 0.0);
        assert!((tables.h_s[0] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(tables.h_s[1], 0.0);
        assert_eq!(tables.softmax_policy(&env).row(0), &[0.5, 0.5]);
    }

    #[test]
    fn entropy_identities_hold() {
        let env = crate::envs::random_dag(&crate::envs::RandomDagSpec { steps: 4, ..Default::default() }, 2).unwrap();
        let t = disordering_potential(&env, &DepthInfo::new(&env).unwrap());
        for s in 0..env.n_states() {
            if env.is_terminal(s) {
                assert_eq!(t.h_s[s], 0.0);
                continue;
            }
            let z: f64 = (0..env.n_actions()).map(|a| t.h_sa(s, a).exp()).sum();
            assert!((t.h_s[s] - z.ln()).abs() < 1e-9);
        }
    }

    use crate::aspiration::{initial_aspiration, PlanConfig, StepMode};
    use crate::envs::{random_tree, RandomTreeSpec};
    use crate::oracle::{enumerate_planner_paths, exact_trajectory_entropy, EnumBudget};
    use crate::reference::{find_reference_policies, min_max_frame, ReferenceFrame, SearchOptions};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coin_flip() -> (Environment, DepthInfo, ReferenceFrame) {
        let mut b = EnvBuilder::new(1, 1);
        let s0 = b.add_state(false);
        let t = b.add_state(true);
        b.add_outcome(s0, 0, t, 0.5, &[0.0]).unwrap();
        b.add_outcome(s0, 0, t, 0.5, &[2.0]).unwrap();
        let env = b.build().unwrap();
        let depth = DepthInfo::new(&env).unwrap();
        let frame = min_max_frame(&env, &depth, vec![1.0]).unwrap();
        (env, depth, frame)
    }

    #[test]
    fn single_step_variance() {
        let (env, depth, frame) = coin_flip();
        let ctx = PlanContext::new(&env, &depth, &frame, PlanConfig::default(), &UniformSelector).unwrap();
        let eval = FarsightedEvaluator::new(None, 1000);
        let v = total_variance(&ctx, &eval, 0, 0, &Polytope::point(vec![1.0])).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    fn tree_setup(seed: u64, steps: usize) -> Option<(Environment, DepthInfo, ReferenceFrame)> {
        let spec = RandomTreeSpec { max_steps: steps, actions: 2, max_successors: 2, d: 1, stop: 0.0 };
        let env = random_tree(&spec, seed).unwrap();
        let depth = DepthInfo::new(&env).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frame = min_max_frame(&env, &depth, vec![0.0]).ok()?;
        let lo = frame.vertex(0, env.initial())[0];
        let hi = frame.vertex(1, env.initial())[0];
        if hi - lo < 1e-6 {
            return None;
        }
        let x = vec![lo + rng.random::<f64>() * (hi - lo)];
        let frame = find_reference_policies(&env, &depth, &x, SearchOptions::for_dim(1), &mut rng).ok()?.frame;
        Some((env, depth, frame))
    }

    #[test]
    fn variance_matches_enumeration() {
        let mut checked = 0;
        for seed in 0..40 {
            let Some((env, depth, frame)) = tree_setup(seed, 3) else { continue };
            let cfg = PlanConfig { mode: StepMode::Local, ..Default::default() };
            let ctx = PlanContext::new(&env, &depth, &frame, cfg, &UniformSelector).unwrap();
            let x = frame.anchor[0];
            let e0 = Polytope::aabb(&[x - 0.05], &[x + 0.05]).unwrap();
            let e = initial_aspiration(&ctx, &e0).unwrap();
            let paths = enumerate_planner_paths(&ctx, &e0, &EnumBudget::default()).unwrap();
            let mean: f64 = paths.iter().map(|p| p.prob * p.total[0]).sum();
            let second: f64 = paths.iter().map(|p| p.prob * p.total[0] * p.total[0]).sum();
            let eval = FarsightedEvaluator::new(None, 1_000_000);
            let m = eval.state(&ctx, env.initial(), &e).unwrap();
            assert!((m.mean[0] - mean).abs() < 1e-9);
            assert!((m.variance() - (second - mean * mean)).abs() < 1e-9);
            checked += 1;
        }
        assert!(checked >= 10);
    }

    #[test]
    fn kl_matches_enumeration_and_vanishes_on_self() {
        let mut checked = 0;
        for seed in 0..40 {
            let Some((env, depth, frame)) = tree_setup(seed, 2) else { continue };
            let ctx = PlanContext::new(&env, &depth, &frame, PlanConfig::default(), &UniformSelector).unwrap();
            let x = frame.anchor[0];
            let e0 = Polytope::aabb(&[x - 0.05], &[x + 0.05]).unwrap();
            let e = initial_aspiration(&ctx, &e0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let na = env.n_actions();
            let mut probs = vec![0.0; env.n_states() * na];
            for s in 0..env.n_states() {
                let w: Vec<f64> = (0..na).map(|_| 0.1 + rng.random::<f64>()).collect();
                let sum: f64 = w.iter().sum();
                for a in 0..na {
                    probs[s * na + a] = w[a] / sum;
                }
            }
            let pi0 = MarkovPolicy { n_actions: na, probs };
            let paths = enumerate_planner_paths(&ctx, &e0, &EnumBudget::default()).unwrap();
            let brute: f64 = paths
                .iter()
                .map(|p| p.prob * p.steps.iter().map(|&(s, a, m)| (m / pi0.row(s)[a]).ln()).sum::<f64>())
                .sum();
            let kl = kl_to_default(&ctx, &pi0, env.initial(), &e, None).unwrap();
            assert!((kl - brute).abs() < 1e-9, "{kl} vs {brute}");
            assert!(kl >= -1e-12);

            checked += 1;
        }
        assert!(checked >= 10);
    }

    #[test]
    fn kl_is_zero_for_self_and_rejects_zero_default() {
        let (env, depth, frame) = coin_flip();
        let ctx = PlanContext::new(&env, &depth, &frame, PlanConfig::default(), &UniformSelector).unwrap();
        let e = Polytope::point(vec![1.0]);
        let pi0 = MarkovPolicy { n_actions: 1, probs: vec![1.0, 1.0] };
        assert!(kl_to_default(&ctx, &pi0, 0, &e, None).unwrap().abs() < 1e-15);
        assert!(kl_to_default(&ctx, &pi0, 0, &e, Some(1.0)).unwrap().abs() < 1e-15);
        let zero = MarkovPolicy { n_actions: 1, probs: vec![0.0, 1.0] };
        assert!(kl_to_default(&ctx, &zero, 0, &e, None).is_err());
    }

    #[test]
    fn entropy_bounds_and_softmax_equality() {
        for seed in 0..5 {
            let spec = RandomTreeSpec { max_steps: 3, actions: 2, max_successors: 3, d: 1, stop: 0.1 };
            let env = random_tree(&spec, seed).unwrap();
            let depth = DepthInfo::new(&env).unwrap();
            let t = disordering_potential(&env, &depth);
            let h0 = t.h_s[env.initial()];
            let soft = exact_trajectory_entropy(&env, &t.softmax_policy(&env), &EnumBudget::default()).unwrap();
            assert!((soft - h0).abs() < 1e-9, "{soft} vs {h0}");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..200 {
                let na = env.n_actions();
                let mut probs = vec![0.0; env.n_states() * na];
                for s in 0..env.n_states() {
                    let w: Vec<f64> = (0..na).map(|_| rng.random::<f64>()).collect();
                    let sum: f64 = w.iter().sum();
                    for a in 0..na {
                        probs[s * na + a] = w[a] / sum;
                    }
                }
                let h = exact_trajectory_entropy(&env, &MarkovPolicy { n_actions: na, probs }, &EnumBudget::default()).unwrap();
                assert!(h <= h0 + 1e-12);
            }
        }
    }

    #[test]
    fn softmin_selector_prefers_low_loss() {
        let env = crate::envs::random_dag(&crate::envs::RandomDagSpec { d: 1, ..Default::default() }, 4).unwrap();
        let depth = DepthInfo::new(&env).unwrap();
        let frame = min_max_frame(&env, &depth, vec![0.0]).unwrap();
        let x = 0.5 * (frame.vertex(0, env.initial())[0] + frame.vertex(1, env.initial())[0]);
        let frame = ReferenceFrame { anchor: vec![x], ..frame };
        let w = CriterionWeights::parse("hausdorff=1,variance=1,entropy=1,kl=1", 3.0).unwrap();
        let sel = SoftminSelector::new(&env, &depth, w, None, 100_000);
        let ctx = PlanContext::new(&env, &depth, &frame, PlanConfig::default(), &sel).unwrap();
        let e = Polytope::aabb(&[x - 0.01], &[x + 0.01]).unwrap();
        let lp = local_policy(&ctx, env.initial(), &e).unwrap();
        assert!((lp.entries.iter().map(|en| en.prob).sum::<f64>() - 1.0).abs() < 1e-12);
        let ep = crate::aspiration::run_episode(&ctx, &e, 0, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(!ep.steps.is_empty());
    }
}
