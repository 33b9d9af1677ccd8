//! Finite acyclic MDPs with a d-dimensional Delta on every transition.

mod file;
mod validate;

pub use file::{EnvFile, EnvFileError, OutcomeRecord, TransitionRecord};
pub use validate::{validate_environment, Issue, ValidationReport};

use std::borrow::Cow;
use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("environment must have d ≥ 1")]
    ZeroDimension,
    #[error("environment has no states")]
    NoStates,
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("action index {0} out of range")]
    ActionOutOfRange(usize),
    #[error("delta has dimension {got}, expected {expected}")]
    DeltaDimension { expected: usize, got: usize },
    #[error("cycle through state {state}")]
    Cycle { state: String },
    #[error("state {state} is terminal")]
    Terminal { state: String },
    #[error("environment is invalid: {0}")]
    Invalid(ValidationReport),
}

/// One `(s, a)` block of the transition table.
#[derive(Clone, Copy, Debug)]
pub struct Outcomes<'a> {
    succ: &'a [u32],
    prob: &'a [f64],
    delta: &'a [f64],
    d: usize,
}

impl<'a> Outcomes<'a> {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    pub fn successor(&self, k: usize) -> usize {
        self.succ[k] as usize
    }

    pub fn prob(&self, k: usize) -> f64 {
        self.prob[k]
    }

    pub fn delta(&self, k: usize) -> &'a [f64] {
        &self.delta[k * self.d..(k + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64, &'a [f64])> + '_ {
        let d = self.d;
        let delta = self.delta;
        self.succ
            .iter()
            .zip(self.prob)
            .enumerate()
            .map(move |(k, (s, p))| (*s as usize, *p, &delta[k * d..(k + 1) * d]))
    }
}

/// Transition table stored flat, indexed by `s * n_actions + a`.
#[derive(Clone, Debug, PartialEq)]
pub struct Environment {
    d: usize,
    n_actions: usize,
    initial: usize,
    terminal: Vec<bool>,
    offsets: Vec<usize>,
    succ: Vec<u32>,
    prob: Vec<f64>,
    delta: Vec<f64>,
    state_names: Option<Vec<String>>,
    action_names: Option<Vec<String>>,
}

impl Environment {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn n_states(&self) -> usize {
        self.terminal.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn n_transitions(&self) -> usize {
        self.succ.len()
    }

    pub fn outcomes(&self, s: usize, a: usize) -> Outcomes<'_> {
        let k = s * self.n_actions + a;
        let (lo, hi) = (self.offsets[k], self.offsets[k + 1]);
        Outcomes { succ: &self.succ[lo..hi], prob: &self.prob[lo..hi], delta: &self.delta[lo * self.d..hi * self.d], d: self.d }
    }

    /// `E_{s'}[f(s, a, s')]`.
    pub fn expected_delta(&self, s: usize, a: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (_, p, f) in self.outcomes(s, a).iter() {
            for (o, fi) in out.iter_mut().zip(f) {
                *o += p * fi;
            }
        }
        out
    }

    pub fn state_name(&self, s: usize) -> Cow<'_, str> {
        match &self.state_names {
            Some(n) => Cow::Borrowed(&n[s]),
            None => Cow::Owned(format!("s{s}")),
        }
    }

    pub fn action_name(&self, a: usize) -> Cow<'_, str> {
        match &self.action_names {
            Some(n) => Cow::Borrowed(&n[a]),
            None => Cow::Owned(format!("a{a}")),
        }
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        match &self.state_names {
            Some(n) => n.iter().position(|x| x == name),
            None => name.strip_prefix('s')?.parse().ok().filter(|&s| s < self.n_states()),
        }
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        match &self.action_names {
            Some(n) => n.iter().position(|x| x == name),
            None => name.strip_prefix('a')?.parse().ok().filter(|&a| a < self.n_actions),
        }
    }

    /// Rescales every `(s, a)` block to sum to exactly one.
    pub fn normalize_probabilities(&mut self) {
        for k in 0..self.offsets.len() - 1 {
            let (lo, hi) = (self.offsets[k], self.offsets[k + 1]);
            let sum: f64 = self.prob[lo..hi].iter().sum();
            if sum > 0.0 {
                self.prob[lo..hi].iter_mut().for_each(|p| *p /= sum);
            }
        }
    }

    /// Same structure with every Delta rewritten by `f(s, a, s', delta)`.
    pub fn map_deltas(&self, mut f: impl FnMut(usize, usize, usize, &[f64]) -> Vec<f64>) -> Result<Environment, EnvError> {
        let mut out = self.clone();
        let d = self.d;
        for s in 0..self.n_states() {
            for a in 0..self.n_actions {
                let k = s * self.n_actions + a;
                for j in self.offsets[k]..self.offsets[k + 1] {
                    let new = f(s, a, self.succ[j] as usize, &self.delta[j * d..(j + 1) * d]);
                    if new.len() != d {
                        return Err(EnvError::DeltaDimension { expected: d, got: new.len() });
                    }
                    out.delta[j * d..(j + 1) * d].copy_from_slice(&new);
                }
            }
        }
        Ok(out)
    }
}

/// Incremental construction; outcomes may be added in any order.
#[derive(Clone, Debug)]
pub struct EnvBuilder {
    d: usize,
    n_actions: usize,
    initial: usize,
    terminal: Vec<bool>,
    entries: Vec<(u32, u32, u32, f64)>,
    deltas: Vec<f64>,
    state_names: Option<Vec<String>>,
    action_names: Option<Vec<String>>,
}

impl EnvBuilder {
    pub fn new(d: usize, n_actions: usize) -> Self {
        Self {
            d,
            n_actions,
            initial: 0,
            terminal: Vec::new(),
            entries: Vec::new(),
            deltas: Vec::new(),
            state_names: None,
            action_names: None,
        }
    }

    pub fn with_capacity(mut self, states: usize, outcomes: usize) -> Self {
        self.terminal.reserve(states);
        self.entries.reserve(outcomes);
        self.deltas.reserve(outcomes * self.d);
        self
    }

    pub fn add_state(&mut self, terminal: bool) -> usize {
        self.terminal.push(terminal);
        if let Some(n) = &mut self.state_names {
            n.push(format!("s{}", self.terminal.len() - 1));
        }
        self.terminal.len() - 1
    }

    pub fn add_named_state(&mut self, name: impl Into<String>, terminal: bool) -> usize {
        let names = self
            .state_names
            .get_or_insert_with(|| (0..self.terminal.len()).map(|s| format!("s{s}")).collect());
        names.push(name.into());
        self.terminal.push(terminal);
        self.terminal.len() - 1
    }

    pub fn action_names(&mut self, names: Vec<String>) -> &mut Self {
        self.action_names = Some(names);
        self
    }

    pub fn initial(&mut self, s: usize) -> &mut Self {
        self.initial = s;
        self
    }

    pub fn n_states(&self) -> usize {
        self.terminal.len()
    }

    pub fn add_outcome(&mut self, s: usize, a: usize, to: usize, p: f64, delta: &[f64]) -> Result<(), EnvError> {
        if delta.len() != self.d {
            return Err(EnvError::DeltaDimension { expected: self.d, got: delta.len() });
        }
        self.entries.push((s as u32, a as u32, to as u32, p));
        self.deltas.extend_from_slice(delta);
        Ok(())
    }

    pub fn build(self) -> Result<Environment, EnvError> {
        if self.d == 0 {
            return Err(EnvError::ZeroDimension);
        }
        let n = self.terminal.len();
        if n == 0 {
            return Err(EnvError::NoStates);
        }
        if self.initial >= n {
            return Err(EnvError::StateOutOfRange(self.initial));
        }
        if let Some(names) = &self.action_names {
            if names.len() != self.n_actions {
                return Err(EnvError::ActionOutOfRange(names.len()));
            }
        }
        for &(s, a, to, _) in &self.entries {
            if s as usize >= n {
                return Err(EnvError::StateOutOfRange(s as usize));
            }
            if to as usize >= n {
                return Err(EnvError::StateOutOfRange(to as usize));
            }
            if a as usize >= self.n_actions {
                return Err(EnvError::ActionOutOfRange(a as usize));
            }
        }
        let na = self.n_actions;
        let key = |e: &(u32, u32, u32, f64)| e.0 as usize * na + e.1 as usize;
        let sorted = self.entries.windows(2).all(|w| key(&w[0]) <= key(&w[1]));
        let d = self.d;
        let (entries, deltas) = if sorted {
            (self.entries, self.deltas)
        } else {
            let mut idx: Vec<usize> = (0..self.entries.len()).collect();
            idx.sort_by_key(|&i| key(&self.entries[i]));
            let entries = idx.iter().map(|&i| self.entries[i]).collect();
            let mut deltas = Vec::with_capacity(self.deltas.len());
            for &i in &idx {
                deltas.extend_from_slice(&self.deltas[i * d..(i + 1) * d]);
            }
            (entries, deltas)
        };
        let mut offsets = vec![0usize; n * na + 1];
        for e in &entries {
            offsets[key(e) + 1] += 1;
        }
        for k in 0..n * na {
            offsets[k + 1] += offsets[k];
        }
        Ok(Environment {
            d,
            n_actions: na,
            initial: self.initial,
            terminal: self.terminal,
            offsets,
            succ: entries.iter().map(|e| e.2).collect(),
            prob: entries.iter().map(|e| e.3).collect(),
            delta: deltas,
            state_names: self.state_names,
            action_names: self.action_names,
        })
    }
}

/// Kahn's algorithm with a FIFO queue seeded in index order.
pub fn topological_order(env: &Environment) -> Result<Vec<usize>, EnvError> {
    let n = env.n_states();
    let mut indeg = vec![0u32; n];
    for s in 0..n {
        for a in 0..env.n_actions() {
            for k in 0..env.outcomes(s, a).len() {
                indeg[env.outcomes(s, a).successor(k)] += 1;
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&s| indeg[s] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for a in 0..env.n_actions() {
            let o = env.outcomes(s, a);
            for k in 0..o.len() {
                let t = o.successor(k);
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
    }
    if order.len() < n {
        let cyc = validate::find_cycle(env).expect("unsorted states contain a cycle");
        return Err(EnvError::Cycle { state: cyc[0].clone() });
    }
    Ok(order)
}

/// Depth statistics: minimal steps from the initial state and maximal steps
/// until termination.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthInfo {
    /// `u32::MAX` for states unreachable from the initial state.
    pub rho: Vec<u32>,
    pub ell: Vec<u32>,
    /// Remaining steps used by shrinking schedules; equals `ell`.
    pub horizon: Vec<u32>,
    pub order: Vec<usize>,
}

impl DepthInfo {
    pub fn new(env: &Environment) -> Result<Self, EnvError> {
        let order = topological_order(env)?;
        Ok(depth_info(env, order))
    }
}

pub fn depth_info(env: &Environment, order: Vec<usize>) -> DepthInfo {
    let n = env.n_states();
    let mut rho = vec![u32::MAX; n];
    rho[env.initial()] = 0;
    for &s in &order {
        if rho[s] == u32::MAX {
            continue;
        }
        for a in 0..env.n_actions() {
            let o = env.outcomes(s, a);
            for k in 0..o.len() {
                let t = o.successor(k);
                rho[t] = rho[t].min(rho[s] + 1);
            }
        }
    }
    let mut ell = vec![0u32; n];
    for &s in order.iter().rev() {
        if env.is_terminal(s) {
            continue;
        }
        let mut m = 0;
        for a in 0..env.n_actions() {
            let o = env.outcomes(s, a);
            for k in 0..o.len() {
                m = m.max(ell[o.successor(k)] + 1);
            }
        }
        ell[s] = m;
    }
    DepthInfo { rho, horizon: ell.clone(), ell, order }
}

/// Draws a successor with the declared probabilities.
pub fn sample_successor<'a, R: Rng + ?Sized>(
    env: &'a Environment,
    s: usize,
    a: usize,
    rng: &mut R,
) -> Result<(usize, &'a [f64]), EnvError> {
    if env.is_terminal(s) {
        return Err(EnvError::Terminal { state: env.state_name(s).into_owned() });
    }
    let o = env.outcomes(s, a);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for k in 0..o.len() {
        acc += o.prob(k);
        if u < acc {
            return Ok((o.successor(k), o.delta(k)));
        }
    }
    // roundoff: fall back to the last outcome with positive mass
    let k = (0..o.len()).rev().find(|&k| o.prob(k) > 0.0).unwrap_or(o.len() - 1);
    Ok((o.successor(k), o.delta(k)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub successor: usize,
    pub delta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub d: usize,
    pub seed: u64,
    pub steps: Vec<Step>,
}

impl Trajectory {
    pub fn total(&self) -> Vec<f64> {
        trajectory_total(self)
    }
}

pub fn trajectory_total(traj: &Trajectory) -> Vec<f64> {
    let mut out = vec![0.0; traj.d];
    for st in &traj.steps {
        for (o, x) in out.iter_mut().zip(&st.delta) {
            *o += x;
        }
    }
    out
}

/// Something assigning action probabilities at non-terminal states.
pub trait Policy {
    fn for_each_action(&self, s: usize, f: &mut dyn FnMut(usize, f64));
}

/// One action per state; entries of terminal states are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PurePolicy {
    pub actions: Vec<u32>,
}

impl PurePolicy {
    pub fn constant(n_states: usize, a: usize) -> Self {
        Self { actions: vec![a as u32; n_states] }
    }

    pub fn action(&self, s: usize) -> usize {
        self.actions[s] as usize
    }
}

impl Policy for PurePolicy {
    fn for_each_action(&self, s: usize, f: &mut dyn FnMut(usize, f64)) {
        f(self.actions[s] as usize, 1.0);
    }
}

/// Stochastic Markov policy, row-major `n_states × n_actions`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovPolicy {
    pub n_actions: usize,
    pub probs: Vec<f64>,
}

impl MarkovPolicy {
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self { n_actions, probs: vec![1.0 / n_actions as f64; n_states * n_actions] }
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }
}

impl Policy for MarkovPolicy {
    fn for_each_action(&self, s: usize, f: &mut dyn FnMut(usize, f64)) {
        for (a, &p) in self.row(s).iter().enumerate() {
            if p > 0.0 {
                f(a, p);
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// s0 -> s1 -> t with Deltas (1,0) then (0,2).
    pub(crate) fn chain() -> Environment {
        let mut b = EnvBuilder::new(2, 1);
        let s0 = b.add_state(false);
        let s1 = b.add_state(false);
        let t = b.add_state(true);
        b.add_outcome(s0, 0, s1, 1.0, &[1.0, 0.0]).unwrap();
        b.add_outcome(s1, 0, t, 1.0, &[0.0, 2.0]).unwrap();
        b.build().unwrap()
    }

    fn diamond() -> Environment {
        let mut b = EnvBuilder::new(1, 1);
        let s0 = b.add_state(false);
        let t = b.add_state(true);
        let l = b.add_state(false);
        let r = b.add_state(false);
        b.add_outcome(s0, 0, l, 0.5, &[0.0]).unwrap();
        b.add_outcome(s0, 0, r, 0.5, &[0.0]).unwrap();
        b.add_outcome(l, 0, t, 1.0, &[1.0]).unwrap();
        b.add_outcome(r, 0, t, 1.0, &[2.0]).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn chain_order_and_depth() {
        let env = chain();
        assert_eq!(topological_order(&env).unwrap(), vec![0, 1, 2]);
        let di = DepthInfo::new(&env).unwrap();
        assert_eq!(di.rho, vec![0, 1, 2]);
        assert_eq!(di.ell, vec![2, 1, 0]);
        assert_eq!(di.horizon, di.ell);
    }

    #[test]
    fn diamond_endpoints() {
        let order = topological_order(&diamond()).unwrap();
        assert_eq!(order[0], 0);
        assert_eq!(*order.last().unwrap(), 1);
    }

    #[test]
    fn cycle_is_an_error() {
        let mut b = EnvBuilder::new(1, 1);
        let s0 = b.add_state(false);
        let s1 = b.add_state(false);
        b.add_outcome(s0, 0, s1, 1.0, &[0.0]).unwrap();
        b.add_outcome(s1, 0, s1, 1.0, &[0.0]).unwrap();
        let env = b.build().unwrap();
        assert_eq!(topological_order(&env), Err(EnvError::Cycle { state: "s1".into() }));
    }

    #[test]
    fn unsorted_outcomes_are_grouped() {
        let mut b = EnvBuilder::new(1, 2);
        let s0 = b.add_state(false);
        let t = b.add_state(true);
        b.add_outcome(s0, 1, t, 1.0, &[2.0]).unwrap();
        b.add_outcome(s0, 0, t, 1.0, &[1.0]).unwrap();
        let env = b.build().unwrap();
        assert_eq!(env.outcomes(0, 0).delta(0), &[1.0]);
        assert_eq!(env.outcomes(0, 1).delta(0), &[2.0]);
    }

    #[test]
    fn delta_dimension_is_checked() {
        let mut b = EnvBuilder::new(2, 1);
        b.add_state(false);
        assert_eq!(b.add_outcome(0, 0, 0, 1.0, &[1.0]), Err(EnvError::DeltaDimension { expected: 2, got: 1 }));
    }

    #[test]
    fn deterministic_sampling() {
        let env = chain();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(sample_successor(&env, 0, 0, &mut rng).unwrap().0, 1);
        }
        assert!(matches!(sample_successor(&env, 2, 0, &mut rng), Err(EnvError::Terminal { .. })));
    }

    #[test]
    fn fair_coin_frequency() {
        let env = diamond();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 100_000;
        let hits = (0..n).filter(|_| sample_successor(&env, 0, 0, &mut rng).unwrap().0 == 2).count();
        // 6σ of a Binomial(1e5, 0.5) is about 0.0095
        assert!((hits as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn trajectory_totals() {
        let empty = Trajectory { d: 2, seed: 0, steps: vec![] };
        assert_eq!(empty.total(), vec![0.0, 0.0]);
        let t = Trajectory {
            d: 2,
            seed: 0,
            steps: vec![
                Step { state: 0, action: 0, successor: 1, delta: vec![1.0, 0.0] },
                Step { state: 1, action: 0, successor: 2, delta: vec![0.0, 2.0] },
            ],
        };
        assert_eq!(t.total(), vec![1.0, 2.0]);
    }

    #[test]
    fn names_fall_back_to_indices() {
        let env = chain();
        assert_eq!(env.state_name(1), "s1");
        assert_eq!(env.state_index("s2"), Some(2));
        assert_eq!(env.state_index("s9"), None);
        assert_eq!(env.action_index("a0"), Some(0));
    }
}
