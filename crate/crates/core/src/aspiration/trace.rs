use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::Environment;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("unknown state `{0}` in trace")]
    UnknownState(String),
    #[error("unknown action `{0}` in trace")]
    UnknownAction(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub direction: usize,
    pub action: usize,
    pub aspiration: Vec<Vec<f64>>,
}

/// Everything decided in one step, by index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepTrace {
    pub t: usize,
    pub state: usize,
    pub aspiration: Vec<Vec<f64>>,
    pub candidates: Vec<Candidate>,
    pub p: Vec<f64>,
    pub chosen: usize,
    pub action: usize,
    pub action_aspiration: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub successor: usize,
    pub successor_aspiration: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub direction: usize,
    pub action: String,
    pub aspiration_vertices: Vec<Vec<f64>>,
}

/// One line of the exported trace stream, by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceRecord {
    pub t: usize,
    pub state: String,
    pub state_aspiration_vertices: Vec<Vec<f64>>,
    pub candidates: Vec<CandidateRecord>,
    pub p: Vec<f64>,
    pub chosen: usize,
    pub action: String,
    pub action_aspiration_vertices: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub successor: String,
    pub successor_aspiration_vertices: Vec<Vec<f64>>,
}

impl TraceRecord {
    pub fn from_step(env: &Environment, st: &StepTrace) -> Self {
        TraceRecord {
            t: st.t,
            state: env.state_name(st.state).into_owned(),
            state_aspiration_vertices: st.aspiration.clone(),
            candidates: st
                .candidates
                .iter()
                .map(|c| CandidateRecord {
                    direction: c.direction,
                    action: env.action_name(c.action).into_owned(),
                    aspiration_vertices: c.aspiration.clone(),
                })
                .collect(),
            p: st.p.clone(),
            chosen: st.chosen,
            action: env.action_name(st.action).into_owned(),
            action_aspiration_vertices: st.action_aspiration.clone(),
            delta: st.delta.clone(),
            successor: env.state_name(st.successor).into_owned(),
            successor_aspiration_vertices: st.successor_aspiration.clone(),
        }
    }

    pub fn to_step(&self, env: &Environment) -> Result<StepTrace, TraceError> {
        let state = |n: &str| env.state_index(n).ok_or_else(|| TraceError::UnknownState(n.to_string()));
        let action = |n: &str| env.action_index(n).ok_or_else(|| TraceError::UnknownAction(n.to_string()));
        Ok(StepTrace {
            t: self.t,
            state: state(&self.state)?,
            aspiration: self.state_aspiration_vertices.clone(),
            candidates: self
                .candidates
                .iter()
                .map(|c| {
                    Ok(Candidate { direction: c.direction, action: action(&c.action)?, aspiration: c.aspiration_vertices.clone() })
                })
                .collect::<Result<_, TraceError>>()?,
            p: self.p.clone(),
            chosen: self.chosen,
            action: action(&self.action)?,
            action_aspiration: self.action_aspiration_vertices.clone(),
            delta: self.delta.clone(),
            successor: state(&self.successor)?,
            successor_aspiration: self.successor_aspiration_vertices.clone(),
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace records serialize")
    }

    pub fn parse_line(line: &str) -> Result<Self, TraceError> {
        Ok(serde_json::from_str(line)?)
    }
}
