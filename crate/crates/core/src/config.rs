//! Numerical tolerances shared by every module.

/// The single tolerance record the solver, geometry and planner read from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Constraint violation accepted as feasible by the LP solver.
    pub feasibility: f64,
    /// Smallest pivot element the solvers will divide by.
    pub pivot: f64,
    /// Reduced-cost threshold for optimality.
    pub optimality: f64,
    /// Minimum |det| of the barycentric matrix of a nondegenerate simplex.
    pub degeneracy: f64,
    /// Vertices closer than this (max-norm) are merged.
    pub dedup: f64,
    /// Slack allowed when checking aspiration containment invariants.
    pub containment: f64,
    /// Tolerance on transition probability sums.
    pub probability: f64,
}

pub const TOL: Tolerances = Tolerances {
    feasibility: 1e-9,
    pivot: 1e-9,
    optimality: 1e-9,
    degeneracy: 1e-9,
    dedup: 1e-9,
    containment: 1e-7,
    probability: 1e-12,
};
