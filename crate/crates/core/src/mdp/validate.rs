use std::fmt;

use serde::{Deserialize, Serialize};

use super::Environment;
use crate::config::TOL;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    ProbabilitySum { state: String, action: String, sum: f64 },
    NegativeProbability { state: String, action: String, successor: String, prob: f64 },
    NonFiniteDelta { state: String, action: String, successor: String },
    DuplicateSuccessor { state: String, action: String, successor: String },
    MissingTransition { state: String, action: String },
    TerminalHasTransitions { state: String },
    InitialIsSuccessor { state: String, action: String },
    Cycle { states: Vec<String> },
    NoTerminal,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::ProbabilitySum { state, action, sum } => {
                write!(f, "probabilities of ({state}, {action}) sum to {sum}")
            }
            Issue::NegativeProbability { state, action, successor, prob } => {
                write!(f, "negative probability {prob} for ({state}, {action}) -> {successor}")
            }
            Issue::NonFiniteDelta { state, action, successor } => {
                write!(f, "non-finite Delta on ({state}, {action}) -> {successor}")
            }
            Issue::DuplicateSuccessor { state, action, successor } => {
                write!(f, "successor {successor} listed twice for ({state}, {action})")
            }
            Issue::MissingTransition { state, action } => write!(f, "no transitions for ({state}, {action})"),
            Issue::TerminalHasTransitions { state } => write!(f, "terminal state {state} has transitions"),
            Issue::InitialIsSuccessor { state, action } => {
                write!(f, "initial state is a successor of ({state}, {action})")
            }
            Issue::Cycle { states } => write!(f, "cycle: {}", states.join(" -> ")),
            Issue::NoTerminal => write!(f, "no terminal states"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Lists every violated structural invariant.
pub fn validate_environment(env: &Environment) -> ValidationReport {
    let mut issues = Vec::new();
    let n = env.n_states();
    let name = |s: usize| env.state_name(s).into_owned();
    let act = |a: usize| env.action_name(a).into_owned();
    if !(0..n).any(|s| env.is_terminal(s)) {
        issues.push(Issue::NoTerminal);
    }
    for s in 0..n {
        for a in 0..env.n_actions() {
            let o = env.outcomes(s, a);
            if env.is_terminal(s) {
                if !o.is_empty() {
                    issues.push(Issue::TerminalHasTransitions { state: name(s) });
                    break;
                }
                continue;
            }
            if o.is_empty() {
                issues.push(Issue::MissingTransition { state: name(s), action: act(a) });
                continue;
            }
            let mut sum = 0.0;
            for k in 0..o.len() {
                let t = o.successor(k);
                let p = o.prob(k);
                if p < 0.0 || !p.is_finite() {
                    issues.push(Issue::NegativeProbability { state: name(s), action: act(a), successor: name(t), prob: p });
                }
                sum += p;
                if o.delta(k).iter().any(|x| !x.is_finite()) {
                    issues.push(Issue::NonFiniteDelta { state: name(s), action: act(a), successor: name(t) });
                }
                if (0..k).any(|j| o.successor(j) == t) {
                    issues.push(Issue::DuplicateSuccessor { state: name(s), action: act(a), successor: name(t) });
                }
                if t == env.initial() {
                    issues.push(Issue::InitialIsSuccessor { state: name(s), action: act(a) });
                }
            }
            if sum.is_nan() || (sum - 1.0).abs() > TOL.probability {
                issues.push(Issue::ProbabilitySum { state: name(s), action: act(a), sum });
            }
        }
    }
    if let Err(super::EnvError::Cycle { .. }) = super::topological_order(env) {
        issues.push(Issue::Cycle { states: find_cycle(env).unwrap_or_default() });
    }
    ValidationReport { issues }
}

/// Names of the states on some cycle, first state repeated at the end.
pub(super) fn find_cycle(env: &Environment) -> Option<Vec<String>> {
    let n = env.n_states();
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut color = vec![0u8; n];
    let mut parent = vec![usize::MAX; n];
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some(&mut (s, ref mut next)) = stack.last_mut() {
            let succ = successors(env, s);
            if *next < succ.len() {
                let t = succ[*next];
                *next += 1;
                if color[t] == 1 {
                    let mut cyc = vec![t];
                    let mut u = s;
                    while u != t {
                        cyc.push(u);
                        u = parent[u];
                    }
                    cyc.push(t);
                    cyc.reverse();
                    return Some(cyc.into_iter().map(|s| env.state_name(s).into_owned()).collect());
                }
                if color[t] == 0 {
                    color[t] = 1;
                    parent[t] = s;
                    stack.push((t, 0));
                }
            } else {
                color[s] = 2;
                stack.pop();
            }
        }
    }
    None
}

fn successors(env: &Environment, s: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for a in 0..env.n_actions() {
        let o = env.outcomes(s, a);
        out.extend((0..o.len()).map(|k| o.successor(k)));
    }
    out
}
