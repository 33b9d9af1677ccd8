//! Dense two-phase simplex solver.
//!
//! Problems are stated as `maximize c·x` subject to `A_ub x ≤ b_ub`,
//! `A_eq x = b_eq` and per-variable bounds (either side may be infinite).
//! Internally every variable is shifted/mirrored/split to be nonnegative,
//! finite upper bounds become extra rows, and a full tableau is pivoted.
//! Dantzig's rule is used until `2·(rows + cols)` iterations have passed,
//! after which Bland's rule takes over to rule out cycling.
//!
//! Optimal outcomes carry row duals; infeasible outcomes carry a Farkas
//! certificate that can be checked independently with
//! [`FarkasCertificate::verify`].

use thiserror::Error;

use crate::config::TOL;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("variable {var} has empty bound interval [{lower}, {upper}]")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("simplex iteration limit {limit} reached")]
    IterationLimit { limit: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub ineq: Vec<Constraint>,
    pub eq: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LpProblem {
    /// A problem in `n` variables, all bounded to `[0, ∞)`, with zero objective.
    pub fn new(n: usize) -> Self {
        Self {
            objective: vec![0.0; n],
            ineq: Vec::new(),
            eq: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn maximize(mut self, c: Vec<f64>) -> Self {
        self.objective = c;
        self
    }

    pub fn le(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq.push(Constraint { coeffs, rhs });
        self
    }

    pub fn ge(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.ineq.push(Constraint { coeffs: coeffs.iter().map(|c| -c).collect(), rhs: -rhs });
        self
    }

    pub fn equals(&mut self, coeffs: Vec<f64>, rhs: f64) -> &mut Self {
        self.eq.push(Constraint { coeffs, rhs });
        self
    }

    pub fn bound(&mut self, var: usize, lower: f64, upper: f64) -> &mut Self {
        self.bounds[var] = (lower, upper);
        self
    }

    pub fn free(&mut self, var: usize) -> &mut Self {
        self.bound(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch { what: "bounds", expected: n, got: self.bounds.len() });
        }
        for c in self.ineq.iter().chain(&self.eq) {
            if c.coeffs.len() != n {
                return Err(LpError::DimensionMismatch { what: "constraint row", expected: n, got: c.coeffs.len() });
            }
        }
        for (var, &(lower, upper)) in self.bounds.iter().enumerate() {
            if lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY || lower.is_nan() || upper.is_nan() {
                return Err(LpError::InvalidBounds { var, lower, upper });
            }
        }
        Ok(())
    }

    /// Largest constraint violation of `x` (rows and bounds).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut v: f64 = 0.0;
        for c in &self.ineq {
            v = v.max(crate::linalg::dot(&c.coeffs, x) - c.rhs);
        }
        for c in &self.eq {
            v = v.max((crate::linalg::dot(&c.coeffs, x) - c.rhs).abs());
        }
        for (xi, &(l, u)) in x.iter().zip(&self.bounds) {
            v = v.max(l - xi).max(xi - u);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Multipliers proving `{A_ub x ≤ b_ub, A_eq x = b_eq, l ≤ x ≤ u}` is empty:
/// `y_ub ≥ 0` and `min_{l≤x≤u} (A^T y)·x > y·b`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FarkasCertificate {
    pub ineq: Vec<f64>,
    pub eq: Vec<f64>,
}

impl FarkasCertificate {
    /// The gap `min_box (A^T y)·x − y·b`; positive means the certificate proves
    /// infeasibility. Returns `None` if the multipliers have the wrong sign or
    /// the box minimum is unbounded.
    pub fn gap(&self, p: &LpProblem) -> Option<f64> {
        let n = p.num_vars();
        let mut g = vec![0.0; n];
        let mut yb = 0.0;
        let mut scale: f64 = 1.0;
        for (c, &y) in p.ineq.iter().zip(&self.ineq) {
            if y < -1e-12 {
                return None;
            }
            crate::linalg::axpy(y, &c.coeffs, &mut g);
            yb += y * c.rhs;
            scale = scale.max((y * c.rhs).abs());
        }
        for (c, &y) in p.eq.iter().zip(&self.eq) {
            crate::linalg::axpy(y, &c.coeffs, &mut g);
            yb += y * c.rhs;
            scale = scale.max((y * c.rhs).abs());
        }
        let mut box_min = 0.0;
        for (gj, &(l, u)) in g.iter().zip(&p.bounds) {
            let gscale = 1e-9 * scale;
            if gj.abs() <= gscale && (l.is_infinite() || u.is_infinite()) {
                continue;
            }
            let term = if *gj >= 0.0 { gj * l } else { gj * u };
            if !term.is_finite() {
                return None;
            }
            box_min += term;
        }
        Some(box_min - yb)
    }

    pub fn verify(&self, p: &LpProblem) -> bool {
        self.gap(p).is_some_and(|g| g > 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Primal solution (meaningful when optimal).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Original variables that are basic at the final vertex.
    pub basis: Vec<usize>,
    /// Row duals, inequality rows first then equality rows (when optimal).
    pub duals: Vec<f64>,
    pub farkas: Option<FarkasCertificate>,
    pub iterations: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = shift + x'
    Shift { col: usize, shift: f64 },
    /// x = shift - x'
    Mirror { col: usize, shift: f64 },
    /// x = x⁺ - x⁻
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    width: usize,
    t: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    eligible: Vec<bool>,
    iterations: usize,
    bland_after: usize,
    limit: usize,
    pivot_tol: f64,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn ncols(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.t[r * w + c];
        for j in 0..w {
            self.t[r * w + j] /= p;
        }
        self.t[r * w + c] = 1.0;
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, &pr) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pr;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (x, &pr) in self.obj.iter_mut().zip(prow.iter()) {
                *x -= f * pr;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the current objective row. Returns `false`
    /// if the problem is unbounded.
    fn optimize(&mut self) -> Result<bool, LpError> {
        let n = self.ncols();
        let mut local = 0usize;
        loop {
            if self.iterations >= self.limit {
                return Err(LpError::IterationLimit { limit: self.limit });
            }
            let bland = local >= self.bland_after;
            let mut enter = None;
            let mut best = TOL.optimality;
            for j in 0..n {
                if !self.eligible[j] {
                    continue;
                }
                let r = self.obj[j];
                if r > TOL.optimality {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if r > best {
                        best = r;
                        enter = Some(j);
                    }
                }
            }
            let Some(c) = enter else { return Ok(true) };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            let mut best_piv = 0.0;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > self.pivot_tol {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                    let better = match leave {
                        None => true,
                        Some(l) if tie => {
                            if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                a > best_piv
                            }
                        }
                        Some(_) => ratio < best_ratio,
                    };
                    if better {
                        leave = Some(i);
                        best_ratio = ratio;
                        best_piv = a;
                    }
                }
            }
            let Some(r) = leave else { return Ok(false) };
            self.pivot(r, c);
            self.iterations += 1;
            local += 1;
        }
    }
}

/// Solves the LP.
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome, LpError> {
    p.check()?;
    let out = solve_with(p, TOL.pivot)?;
    if out.status != LpStatus::Optimal {
        return Ok(out);
    }
    // an ill-conditioned tableau can drift off its own constraints
    let scale = 1.0 + p.ineq.iter().chain(&p.eq).map(|c| c.rhs.abs()).fold(0.0, f64::max);
    let drift = p.max_violation(&out.x);
    if drift <= 1e-7 * scale {
        return Ok(out);
    }
    match solve_with(p, 1e-6) {
        Ok(retry) if retry.status == LpStatus::Optimal && p.max_violation(&retry.x) < drift => Ok(retry),
        _ => Ok(out),
    }
}

fn solve_with(p: &LpProblem, pivot_tol: f64) -> Result<LpOutcome, LpError> {
    let n = p.num_vars();

    // Variable transformation.
    let mut maps = Vec::with_capacity(n);
    let mut ncols_struct = 0usize;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for &(l, u) in &p.bounds {
        let m = if l.is_finite() {
            let col = ncols_struct;
            ncols_struct += 1;
            if u.is_finite() {
                bound_rows.push((col, u - l));
            }
            VarMap::Shift { col, shift: l }
        } else if u.is_finite() {
            let col = ncols_struct;
            ncols_struct += 1;
            VarMap::Mirror { col, shift: u }
        } else {
            let pos = ncols_struct;
            ncols_struct += 2;
            VarMap::Split { pos, neg: pos + 1 }
        };
        maps.push(m);
    }

    // Internal rows: (coeffs over structural cols, rhs, is_eq)
    let n_user = p.ineq.len() + p.eq.len();
    let m = n_user + bound_rows.len();
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::with_capacity(m);
    let transform = |c: &Constraint| -> (Vec<f64>, f64) {
        let mut a = vec![0.0; ncols_struct];
        let mut rhs = c.rhs;
        for (j, &coef) in c.coeffs.iter().enumerate() {
            if coef == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, shift } => {
                    a[col] += coef;
                    rhs -= coef * shift;
                }
                VarMap::Mirror { col, shift } => {
                    a[col] -= coef;
                    rhs -= coef * shift;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        (a, rhs)
    };
    for c in &p.ineq {
        let (a, b) = transform(c);
        rows.push((a, b, false));
    }
    for c in &p.eq {
        let (a, b) = transform(c);
        rows.push((a, b, true));
    }
    for &(col, w) in &bound_rows {
        let mut a = vec![0.0; ncols_struct];
        a[col] = 1.0;
        rows.push((a, w, false));
    }

    // Column layout: structural | slack per inequality row | artificial per row needing one.
    let n_slack = rows.iter().filter(|r| !r.2).count();
    let mut sign = vec![1.0; m];
    let mut slack_col = vec![usize::MAX; m];
    let mut art_col = vec![usize::MAX; m];
    let mut next = ncols_struct;
    for (i, r) in rows.iter().enumerate() {
        if !r.2 {
            slack_col[i] = next;
            next += 1;
        }
    }
    debug_assert_eq!(next, ncols_struct + n_slack);
    for (i, r) in rows.iter().enumerate() {
        if r.1 < 0.0 {
            sign[i] = -1.0;
        }
        if r.2 || r.1 < 0.0 {
            art_col[i] = next;
            next += 1;
        }
    }
    let ncols = next;
    let width = ncols + 1;
    let mut t = vec![0.0; m * width];
    let mut basis = vec![0usize; m];
    let mut unit_col = vec![0usize; m];
    for (i, (a, b, _)) in rows.iter().enumerate() {
        let s = sign[i];
        let row = &mut t[i * width..(i + 1) * width];
        for (j, &v) in a.iter().enumerate() {
            row[j] = s * v;
        }
        if slack_col[i] != usize::MAX {
            row[slack_col[i]] = s;
        }
        row[ncols] = s * b;
        if art_col[i] != usize::MAX {
            row[art_col[i]] = 1.0;
            basis[i] = art_col[i];
            unit_col[i] = art_col[i];
        } else {
            basis[i] = slack_col[i];
            unit_col[i] = slack_col[i];
        }
    }
    let is_art = |j: usize| j >= ncols_struct + n_slack;

    let limit = 50 * (m + ncols) + 1000;
    let mut tab = Tableau {
        m,
        width,
        t,
        obj: vec![0.0; width],
        basis,
        eligible: vec![true; ncols],
        iterations: 0,
        bland_after: 2 * (m + ncols),
        limit,
        pivot_tol,
    };

    // Phase 1: maximize -Σ artificials.
    let has_art = art_col.iter().any(|&c| c != usize::MAX);
    if has_art {
        for j in 0..ncols {
            if is_art(j) {
                tab.obj[j] = -1.0;
            }
        }
        for i in 0..m {
            if is_art(tab.basis[i]) {
                for j in 0..width {
                    tab.obj[j] += tab.t[i * width + j];
                }
            }
        }
        tab.optimize()?;
        let infeas: f64 = (0..m).filter(|&i| is_art(tab.basis[i])).map(|i| tab.rhs(i).max(0.0)).sum();
        let bscale = 1.0 + rows.iter().map(|r| r.1.abs()).fold(0.0, f64::max);
        if infeas > TOL.feasibility * bscale {
            // π_i = c_{u_i} - r_{u_i}; original-row multiplier y_i = sign_i π_i.
            let y: Vec<f64> = (0..m)
                .map(|i| {
                    let u = unit_col[i];
                    let c = if is_art(u) { -1.0 } else { 0.0 };
                    sign[i] * (c - tab.obj[u])
                })
                .collect();
            let cert = FarkasCertificate {
                ineq: y[..p.ineq.len()].iter().map(|v| v.max(0.0)).collect(),
                eq: y[p.ineq.len()..n_user].to_vec(),
            };
            return Ok(LpOutcome {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NEG_INFINITY,
                basis: Vec::new(),
                duals: Vec::new(),
                farkas: Some(cert),
                iterations: tab.iterations,
            });
        }
        // Drive zero-level artificials out of the basis where possible.
        for i in 0..m {
            if is_art(tab.basis[i]) {
                let mut best = None;
                let mut bv = tab.pivot_tol;
                for j in 0..ncols_struct + n_slack {
                    let a = tab.at(i, j).abs();
                    if a > bv {
                        bv = a;
                        best = Some(j);
                    }
                }
                if let Some(j) = best {
                    tab.pivot(i, j);
                }
            }
        }
        for j in 0..ncols {
            if is_art(j) {
                tab.eligible[j] = false;
            }
        }
    }

    // Phase 2.
    let mut c_int = vec![0.0; ncols];
    for (j, &cj) in p.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, .. } => {
                c_int[col] += cj;
            }
            VarMap::Mirror { col, .. } => {
                c_int[col] -= cj;
            }
            VarMap::Split { pos, neg } => {
                c_int[pos] += cj;
                c_int[neg] -= cj;
            }
        }
    }
    tab.obj = vec![0.0; width];
    tab.obj[..ncols].copy_from_slice(&c_int);
    for i in 0..m {
        let cb = c_int[tab.basis[i]];
        if cb != 0.0 {
            for j in 0..width {
                tab.obj[j] -= cb * tab.t[i * width + j];
            }
        }
    }
    let bounded = tab.optimize()?;

    let mut xint = vec![0.0; ncols];
    for i in 0..m {
        xint[tab.basis[i]] = tab.rhs(i);
    }
    let mut x = vec![0.0; n];
    let mut basic = Vec::new();
    let is_basic = |col: usize| tab.basis.contains(&col);
    for (j, mp) in maps.iter().enumerate() {
        let (val, b) = match *mp {
            VarMap::Shift { col, shift } => (shift + xint[col], is_basic(col)),
            VarMap::Mirror { col, shift } => (shift - xint[col], is_basic(col)),
            VarMap::Split { pos, neg } => (xint[pos] - xint[neg], is_basic(pos) || is_basic(neg)),
        };
        x[j] = val;
        if b {
            basic.push(j);
        }
    }
    if !bounded {
        return Ok(LpOutcome {
            status: LpStatus::Unbounded,
            x,
            objective: f64::INFINITY,
            basis: basic,
            duals: Vec::new(),
            farkas: None,
            iterations: tab.iterations,
        });
    }
    let objective = crate::linalg::dot(&p.objective, &x);
    let duals: Vec<f64> = (0..n_user)
        .map(|i| {
            let u = unit_col[i];
            // Phase-2 cost of slack/artificial columns is zero.
            sign[i] * (-tab.obj[u])
        })
        .collect();
    Ok(LpOutcome {
        status: LpStatus::Optimal,
        x,
        objective,
        basis: basic,
        duals,
        farkas: None,
        iterations: tab.iterations,
    })
}
