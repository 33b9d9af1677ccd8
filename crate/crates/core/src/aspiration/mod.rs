//! Aspiration propagation: action selection, action-aspirations, and
//! state-aspirations for successors.

mod episode;
mod propagate;
mod select;
mod setup;
mod trace;


pub use episode::{initial_aspiration, run_episode, Episode};
pub use propagate::propagate_to_state;
pub use select::{
    directional_action_set, local_policy, make_action_aspiration, mixture_distribution, schedule_r_max,
    select_action, CandidateQuery, CandidateSelector, FirstSelector, LocalEntry, LocalPolicy, Selection,
    UniformSelector,
};
pub use setup::{prepare_frame, AnchorSource, PreparedFrame, SetupError};
pub use trace::{Candidate, StepTrace, TraceError, TraceRecord};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::LpError;
use crate::mdp::{DepthInfo, EnvError, Environment};
use crate::polytope::{GeometryError, Polytope, MAX_HULL_DIM};
use crate::reference::ReferenceFrame;

/// How action-aspirations and successor aspirations are fitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Shrink,
    Clip,
    /// Successor aspiration is the traced image of the action-aspiration;
    /// scalar criteria only.
    TraceInterval,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "shrink" => Ok(Variant::Shrink),
            "clip" => Ok(Variant::Clip),
            "trace-interval" => Ok(Variant::TraceInterval),
            other => Err(format!("unknown variant `{other}`")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Shrink => "shrink",
            Variant::Clip => "clip",
            Variant::TraceInterval => "trace-interval",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    None,
    /// `r_max(s) = (1 − 1/T(s))^{1/d}`.
    LinearVolume,
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Schedule::None),
            "linear-volume" => Ok(Schedule::LinearVolume),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::None => "none",
            Schedule::LinearVolume => "linear-volume",
        })
    }
}

/// Whether an episode step samples candidates per direction and then a
/// direction, or samples once from the averaged local policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    Sampled,
    Local,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanConfig {
    pub variant: Variant,
    pub schedule: Schedule,
    pub mode: StepMode,
    /// Check containment invariants after every step.
    pub check_invariants: bool,
}

impl Default for PlanConfig {
    fn default() -> Self {
        Self { variant: Variant::Shrink, schedule: Schedule::None, mode: StepMode::Sampled, check_invariants: true }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("variant {variant} needs d {requirement}, got {d}")]
    UnsupportedVariant { variant: Variant, requirement: &'static str, d: usize },
    #[error("aspiration is infeasible: {0}")]
    Infeasible(String),
    #[error("mixture LP infeasible at state {state}")]
    MixtureInfeasible { state: String },
    #[error("invariant violated at state {state}: {what}")]
    Invariant { state: String, what: String },
    #[error("selector returned {got} weights for {expected} candidates")]
    SelectorWeights { expected: usize, got: usize },
    #[error("enumeration budget of {budget} {what} exceeded")]
    BudgetExceeded { what: &'static str, budget: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl PlanError {
    /// Errors that indicate a bug rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, PlanError::MixtureInfeasible { .. } | PlanError::Invariant { .. })
    }
}

/// Everything a planning step reads.
#[derive(Clone, Copy)]
pub struct PlanContext<'a> {
    pub env: &'a Environment,
    pub depth: &'a DepthInfo,
    pub frame: &'a ReferenceFrame,
    pub config: PlanConfig,
    pub selector: &'a dyn CandidateSelector,
}

impl<'a> PlanContext<'a> {
    pub fn new(
        env: &'a Environment,
        depth: &'a DepthInfo,
        frame: &'a ReferenceFrame,
        config: PlanConfig,
        selector: &'a dyn CandidateSelector,
    ) -> Result<Self, PlanError> {
        let d = env.dim();
        match config.variant {
            Variant::Clip if d > MAX_HULL_DIM => {
                return Err(PlanError::UnsupportedVariant { variant: config.variant, requirement: "≤ 3", d })
            }
            Variant::TraceInterval if d != 1 => {
                return Err(PlanError::UnsupportedVariant { variant: config.variant, requirement: "= 1", d })
            }
            _ => {}
        }
        Ok(Self { env, depth, frame, config, selector })
    }

    pub fn with_selector<'b>(&self, selector: &'b dyn CandidateSelector) -> PlanContext<'b>
    where
        'a: 'b,
    {
        PlanContext { env: self.env, depth: self.depth, frame: self.frame, config: self.config, selector }
    }

    pub fn dim(&self) -> usize {
        self.env.dim()
    }

    fn state_name(&self, s: usize) -> String {
        self.env.state_name(s).into_owned()
    }
}

/// Hashable identity of a polytope: the bit patterns of its vertices, sorted.
pub fn fingerprint(p: &Polytope) -> Vec<i64> {
    let mut rows: Vec<Vec<i64>> =
        p.vertices().iter().map(|v| v.iter().map(|x| (x + 0.0).to_bits() as i64).collect()).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut out = Vec::with_capacity(1 + rows.len() * p.dim());
    out.push(rows.len() as i64);
    for r in rows {
        out.extend(r);
    }
    out
}
