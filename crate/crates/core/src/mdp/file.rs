use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_environment, EnvBuilder, EnvError, Environment, ValidationReport};

#[derive(Debug, Error)]
pub enum EnvFileError {
    #[error("malformed environment JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("transition {index}: Delta has dimension {got}, expected {expected}")]
    Dimension { index: usize, expected: usize, got: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("{0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeRecord {
    pub state: String,
    pub prob: f64,
    pub delta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionRecord {
    pub from: String,
    pub action: String,
    pub to: Vec<OutcomeRecord>,
}

/// On-disk environment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    pub d: usize,
    pub states: Vec<String>,
    pub initial: String,
    pub terminal: Vec<String>,
    pub actions: Vec<String>,
    pub transitions: Vec<TransitionRecord>,
}

impl EnvFile {
    pub fn parse(json: &str) -> Result<Self, EnvFileError> {
        Ok(serde_json::from_str(json)?)
    }

    /// Builds without validating; structural errors (names, dimensions) fail here.
    pub fn build(&self) -> Result<Environment, EnvFileError> {
        let mut states = HashMap::new();
        for (i, s) in self.states.iter().enumerate() {
            if states.insert(s.as_str(), i).is_some() {
                return Err(EnvFileError::DuplicateName(s.clone()));
            }
        }
        let mut actions = HashMap::new();
        for (i, a) in self.actions.iter().enumerate() {
            if actions.insert(a.as_str(), i).is_some() {
                return Err(EnvFileError::DuplicateName(a.clone()));
            }
        }
        let st = |n: &str| states.get(n).copied().ok_or_else(|| EnvFileError::UnknownState(n.to_string()));
        let mut terminal = vec![false; self.states.len()];
        for t in &self.terminal {
            terminal[st(t)?] = true;
        }
        let mut b = EnvBuilder::new(self.d, self.actions.len());
        for (name, &term) in self.states.iter().zip(&terminal) {
            b.add_named_state(name.clone(), term);
        }
        b.action_names(self.actions.clone());
        b.initial(st(&self.initial)?);
        for (index, tr) in self.transitions.iter().enumerate() {
            let s = st(&tr.from)?;
            let a = actions.get(tr.action.as_str()).copied().ok_or_else(|| EnvFileError::UnknownAction(tr.action.clone()))?;
            for o in &tr.to {
                if o.delta.len() != self.d {
                    return Err(EnvFileError::Dimension { index, expected: self.d, got: o.delta.len() });
                }
                b.add_outcome(s, a, st(&o.state)?, o.prob, &o.delta)?;
            }
        }
        Ok(b.build()?)
    }

    /// Builds, validates, and renormalizes probabilities.
    pub fn load(json: &str) -> Result<Environment, EnvFileError> {
        let mut env = Self::parse(json)?.build()?;
        let report = validate_environment(&env);
        if !report.is_valid() {
            return Err(EnvFileError::Invalid(report));
        }
        env.normalize_probabilities();
        Ok(env)
    }

    pub fn from_environment(env: &Environment) -> Self {
        let mut transitions = Vec::new();
        for s in 0..env.n_states() {
            for a in 0..env.n_actions() {
                let o = env.outcomes(s, a);
                if o.is_empty() {
                    continue;
                }
                transitions.push(TransitionRecord {
                    from: env.state_name(s).into_owned(),
                    action: env.action_name(a).into_owned(),
                    to: o
                        .iter()
                        .map(|(t, p, f)| OutcomeRecord { state: env.state_name(t).into_owned(), prob: p, delta: f.to_vec() })
                        .collect(),
                });
            }
        }
        EnvFile {
            d: env.dim(),
            states: (0..env.n_states()).map(|s| env.state_name(s).into_owned()).collect(),
            initial: env.state_name(env.initial()).into_owned(),
            terminal: (0..env.n_states()).filter(|&s| env.is_terminal(s)).map(|s| env.state_name(s).into_owned()).collect(),
            actions: (0..env.n_actions()).map(|a| env.action_name(a).into_owned()).collect(),
            transitions,
        }
    }
}
