//! Aspiration-based planning for finite acyclic MDPs with vector-valued
//! rewards: instead of maximizing, an agent steers the expected Total into
//! a convex target set.

pub mod aspiration;
pub mod config;
pub mod criteria;
pub mod envs;
pub mod linalg;
pub mod lp;
pub mod mdp;
pub mod oracle;
pub mod polytope;
pub mod reference;
pub mod values;

pub use aspiration::{
    initial_aspiration, local_policy, propagate_to_state, run_episode, select_action, Episode, PlanConfig,
    PlanContext, PlanError, Schedule, StepMode, TraceRecord, Variant,
};
pub use config::{Tolerances, TOL};
pub use criteria::{Criterion, CriterionWeights, SoftminSelector};
pub use mdp::{DepthInfo, EnvBuilder, EnvError, EnvFile, Environment, MarkovPolicy, Policy, PurePolicy, Trajectory};
pub use oracle::{EnumBudget, OracleError};
pub use polytope::{AspirationFile, GeometryError, Polytope, Simplex};
pub use reference::{find_reference_policies, find_reference_policies_within, ReferenceFrame, SearchOptions};
pub use values::{evaluate_policy, feasible_point_lp, Feasibility};
