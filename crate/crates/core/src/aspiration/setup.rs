use rand::Rng;
use thiserror::Error;

use super::Variant;
use crate::lp::{FarkasCertificate, LpProblem};
use crate::mdp::{DepthInfo, Environment, PurePolicy};
use crate::polytope::Polytope;
use crate::reference::{
    build_reference_simplices, find_reference_policies_within, min_max_frame, ReferenceError, ReferenceFrame, SearchOptions,
};
use crate::values::{feasible_point_lp, Feasibility, ValuesError};

const SEARCH_RESTARTS: usize = 5;

#[derive(Debug, Error)]
pub enum SetupError {
    #[error("aspiration does not meet the feasibility set (certificate gap {gap:.3e})")]
    Infeasible { certificate: FarkasCertificate, problem: Box<LpProblem>, gap: f64 },
    #[error(transparent)]
    Values(#[from] ValuesError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
}

/// Where the frame's anchor came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnchorSource {
    /// Maximal-margin point of the occupancy LP.
    OccupancyLp,
    /// The LP was over budget; the aspiration's centroid is used unchecked.
    Centroid,
    /// Terminal initial state.
    Terminal,
    /// The search never enclosed the first anchor; moved to a point of the
    /// aspiration inside the hull of the collected values.
    Hull,
}

#[derive(Clone, Debug)]
pub struct PreparedFrame {
    pub frame: ReferenceFrame,
    pub anchor_source: AnchorSource,
    /// Greedy iterations of the successful search (0 for the min/max frame).
    pub iterations: usize,
    pub degenerate: bool,
}

/// Checks feasibility of `e0` and builds a reference frame around a feasible
/// anchor in it.
pub fn prepare_frame<R: Rng + ?Sized>(
    env: &Environment,
    depth: &DepthInfo,
    e0: &Polytope,
    variant: Variant,
    rng: &mut R,
) -> Result<PreparedFrame, SetupError> {
    let d = env.dim();
    if env.is_terminal(env.initial()) {
        let pols = vec![PurePolicy::constant(env.n_states(), 0); d + 1];
        let frame = build_reference_simplices(env, depth, pols, vec![0.0; d])?;
        return Ok(PreparedFrame { frame, anchor_source: AnchorSource::Terminal, iterations: 0, degenerate: true });
    }
    let (x, anchor_source) = match feasible_point_lp(env, depth, e0) {
        Ok(Feasibility::Feasible { x, .. }) => (x, AnchorSource::OccupancyLp),
        Ok(Feasibility::Infeasible { certificate, problem }) => {
            let gap = certificate.gap(&problem).unwrap_or(f64::NAN);
            return Err(SetupError::Infeasible { certificate, problem, gap });
        }
        Err(ValuesError::TooLarge { .. }) => (e0.centroid(), AnchorSource::Centroid),
        Err(e) => return Err(e.into()),
    };
    if variant == Variant::TraceInterval {
        let frame = min_max_frame(env, depth, x)?;
        return Ok(PreparedFrame { frame, anchor_source, iterations: 0, degenerate: false });
    }
    let mut last = None;
    for _ in 0..SEARCH_RESTARTS {
        match find_reference_policies_within(env, depth, &x, e0, SearchOptions::for_dim(d), rng) {
            Ok(res) => {
                let moved = res.frame.anchor != x;
                return Ok(PreparedFrame {
                    frame: res.frame,
                    anchor_source: if moved { AnchorSource::Hull } else { anchor_source },
                    iterations: res.iterations,
                    degenerate: res.degenerate,
                })
            }
            Err(e @ ReferenceError::NotInHull { .. }) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.expect("at least one attempt").into())
}
