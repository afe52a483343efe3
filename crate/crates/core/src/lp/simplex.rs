//! Dense-tableau bounded-variable simplex for `max c·x` subject to
//! `a_i·x <= b_i` and finite bounds `l <= x <= u`.
//!
//! Every row gets a slack `s_i >= 0`. The solver starts from the slack basis
//! with each structural variable at whichever bound its objective coefficient
//! prefers; that basis is dual feasible, so the dual simplex drives it to
//! primal feasibility. Rows can be appended after a solve and the next solve
//! continues from the current basis, which is what a cutting-plane loop
//! needs. A primal pass afterwards repairs reduced costs that drifted past
//! tolerance.

use serde::{Deserialize, Serialize};

use super::LpError;

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
/// Degenerate pivots tolerated before switching to smallest-index rules.
const STALL_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Solves `p` from scratch.
pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    let mut s = DualSimplex::new(&p.objective, &p.lower, &p.upper)?;
    for row in &p.rows {
        s.add_row(row)?;
    }
    s.solve()?;
    Ok(LpSolution { values: s.values(), objective: s.objective() })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    /// Basic in tableau row `i`.
    Basic(usize),
    /// Nonbasic in column slot `k`, at its lower bound.
    AtLower(usize),
    AtUpper(usize),
    /// Slack of a row that has been removed.
    Dropped,
}

#[derive(Debug, Clone)]
pub struct DualSimplex {
    n_struct: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    status: Vec<Status>,
    value: Vec<f64>,
    /// Variable basic in each tableau row.
    basis: Vec<usize>,
    /// Variable nonbasic in each column slot; always `n_struct` slots.
    nonbasic: Vec<usize>,
    /// Row `i` reads `x[basis[i]] + Σ_k tab[i][k] x[nonbasic[k]] = const`.
    tab: Vec<Vec<f64>>,
    /// Objective coefficient of each nonbasic slot.
    reduced: Vec<f64>,
    /// Active rows with their slack variables.
    rows: Vec<(usize, LpRow)>,
    max_iters: usize,
    solve_pivots: usize,
    /// Pivots performed over the lifetime of this tableau.
    pub pivots: usize,
}

impl DualSimplex {
    pub fn new(objective: &[f64], lower: &[f64], upper: &[f64]) -> Result<Self, LpError> {
        let n = objective.len();
        if lower.len() != n || upper.len() != n {
            return Err(LpError::Malformed("bound vectors do not match the objective length".into()));
        }
        let mut status = Vec::with_capacity(n);
        let mut value = Vec::with_capacity(n);
        for j in 0..n {
            let (c, l, u) = (objective[j], lower[j], upper[j]);
            if !c.is_finite() || l.is_nan() || u.is_nan() || l > u {
                return Err(LpError::Malformed(format!("variable {j}: bad cost or bounds")));
            }
            // only boxed variables: the preferred bound must be finite
            if (c > 0.0 && u == f64::INFINITY) || (c < 0.0 && l == f64::NEG_INFINITY) {
                return Err(LpError::Unbounded);
            }
            if !l.is_finite() && !u.is_finite() {
                return Err(LpError::Malformed(format!("variable {j} is free")));
            }
            let at_upper = c > 0.0 || !l.is_finite();
            status.push(if at_upper { Status::AtUpper(j) } else { Status::AtLower(j) });
            value.push(if at_upper { u } else { l });
        }
        Ok(DualSimplex {
            n_struct: n,
            cost: objective.to_vec(),
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            status,
            value,
            basis: Vec::new(),
            nonbasic: (0..n).collect(),
            tab: Vec::new(),
            reduced: objective.to_vec(),
            rows: Vec::new(),
            max_iters: 200_000,
            solve_pivots: 0,
            pivots: 0,
        })
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Active rows in insertion order.
    pub fn rows(&self) -> Vec<LpRow> {
        self.rows.iter().map(|(_, r)| r.clone()).collect()
    }

    /// Appends `coeffs·x <= rhs`, expressed in the current basis.
    pub fn add_row(&mut self, row: &LpRow) -> Result<(), LpError> {
        if !row.rhs.is_finite() || row.coeffs.iter().any(|&(j, a)| j >= self.n_struct || !a.is_finite()) {
            return Err(LpError::Malformed("row references an unknown variable or is non-finite".into()));
        }
        let slack = self.cost.len();
        self.cost.push(0.0);
        self.lower.push(0.0);
        self.upper.push(f64::INFINITY);

        let mut new_row = vec![0.0; self.n_struct];
        let mut activity = 0.0;
        for &(j, a) in &row.coeffs {
            activity += a * self.value[j];
            match self.status[j] {
                Status::Basic(i) => {
                    for (dst, src) in new_row.iter_mut().zip(&self.tab[i]) {
                        *dst -= a * src;
                    }
                }
                Status::AtLower(k) | Status::AtUpper(k) => new_row[k] += a,
                Status::Dropped => unreachable!("structural variables are never dropped"),
            }
        }
        let r = self.tab.len();
        self.tab.push(new_row);
        self.basis.push(slack);
        self.status.push(Status::Basic(r));
        self.value.push(row.rhs - activity);
        self.rows.push((slack, row.clone()));
        Ok(())
    }

    /// Removes rows whose slack is basic and exceeds `min_slack`; they are
    /// not binding, so the current basis stays optimal. Returns them.
    pub fn drop_slack_rows(&mut self, min_slack: f64) -> Vec<LpRow> {
        let mut dropped = Vec::new();
        let mut kept = Vec::with_capacity(self.rows.len());
        for (slack, row) in std::mem::take(&mut self.rows) {
            match self.status[slack] {
                Status::Basic(i) if self.value[slack] > min_slack => {
                    self.tab.swap_remove(i);
                    self.basis.swap_remove(i);
                    if let Some(&moved) = self.basis.get(i) {
                        self.status[moved] = Status::Basic(i);
                    }
                    self.status[slack] = Status::Dropped;
                    dropped.push(row);
                }
                _ => kept.push((slack, row)),
            }
        }
        self.rows = kept;
        dropped
    }

    pub fn values(&self) -> Vec<f64> {
        self.value[..self.n_struct].to_vec()
    }

    pub fn objective(&self) -> f64 {
        self.cost[..self.n_struct]
            .iter()
            .zip(&self.value)
            .map(|(c, x)| c * x)
            .sum()
    }

    fn infeasibility(&self, col: usize) -> f64 {
        let x = self.value[col];
        if x < self.lower[col] - PRIMAL_TOL {
            self.lower[col] - x
        } else if x > self.upper[col] + PRIMAL_TOL {
            x - self.upper[col]
        } else {
            0.0
        }
    }

    /// Runs dual then primal simplex until optimal.
    pub fn solve(&mut self) -> Result<(), LpError> {
        self.solve_pivots = 0;
        self.dual_phase()?;
        self.primal_phase()?;
        // a primal repair can only improve on a primal feasible basis; if it
        // disturbed feasibility through round-off, go around once more
        if self.basis.iter().any(|&c| self.infeasibility(c) > 0.0) {
            self.dual_phase()?;
        }
        Ok(())
    }

    /// `+1` if nonbasic `j` can only increase, `-1` if only decrease, `None`
    /// if it is fixed.
    fn direction(&self, j: usize) -> Option<f64> {
        if self.lower[j] == self.upper[j] {
            return None;
        }
        match self.status[j] {
            Status::AtLower(_) => Some(1.0),
            Status::AtUpper(_) => Some(-1.0),
            _ => None,
        }
    }

    fn dual_phase(&mut self) -> Result<(), LpError> {
        let mut stall = 0usize;
        let mut last_obj = f64::INFINITY;
        loop {
            self.tick()?;
            let bland = stall > STALL_LIMIT;

            let mut leave: Option<(usize, f64)> = None;
            for (i, &col) in self.basis.iter().enumerate() {
                let inf = self.infeasibility(col);
                if inf <= 0.0 {
                    continue;
                }
                let better = match leave {
                    None => true,
                    Some((li, linf)) => {
                        if bland {
                            col < self.basis[li]
                        } else {
                            inf > linf
                        }
                    }
                };
                if better {
                    leave = Some((i, inf));
                }
            }
            let Some((r, _)) = leave else { return Ok(()) };
            let col_r = self.basis[r];
            let to_upper = self.value[col_r] > self.upper[col_r];
            let target = if to_upper { self.upper[col_r] } else { self.lower[col_r] };
            let increase = target > self.value[col_r];

            // x_r changes by -a_rk * dx_k
            let mut enter: Option<(usize, f64, f64)> = None;
            for (k, &a) in self.tab[r].iter().enumerate() {
                if a.abs() < PIVOT_TOL {
                    continue;
                }
                let j = self.nonbasic[k];
                let Some(dir) = self.direction(j) else { continue };
                let moves_up = -a * dir > 0.0;
                if moves_up != increase {
                    continue;
                }
                let ratio = self.reduced[k].abs() / a.abs();
                let better = match enter {
                    None => true,
                    Some((ek, er, ea)) => {
                        if ratio < er - 1e-12 {
                            true
                        } else if ratio <= er + 1e-12 {
                            if bland {
                                j < self.nonbasic[ek]
                            } else {
                                a.abs() > ea
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    enter = Some((k, ratio, a.abs()));
                }
            }
            let Some((k, _, _)) = enter else { return Err(LpError::Infeasible) };

            let delta = (target - self.value[col_r]) / -self.tab[r][k];
            self.shift_entering(k, delta);
            self.value[col_r] = target;
            self.pivot(r, k, to_upper);

            let obj = self.objective();
            if (obj - last_obj).abs() <= 1e-12 {
                stall += 1;
            } else {
                stall = 0;
            }
            last_obj = obj;
        }
    }

    fn primal_phase(&mut self) -> Result<(), LpError> {
        let mut stall = 0usize;
        loop {
            self.tick()?;
            let bland = stall > STALL_LIMIT;

            let mut enter: Option<(usize, f64)> = None;
            for (k, &d) in self.reduced.iter().enumerate() {
                let j = self.nonbasic[k];
                let Some(dir) = self.direction(j) else { continue };
                let score = d * dir;
                if score <= DUAL_TOL {
                    continue;
                }
                let better = match enter {
                    None => true,
                    Some((ek, s)) => {
                        if bland {
                            j < self.nonbasic[ek]
                        } else {
                            score > s
                        }
                    }
                };
                if better {
                    enter = Some((k, score));
                }
            }
            let Some((k, _)) = enter else { return Ok(()) };
            let j = self.nonbasic[k];
            let dir = self.direction(j).expect("entering variable can move");

            // step length t >= 0 for dx_j = dir * t
            let mut best_t = self.upper[j] - self.lower[j];
            let mut leave: Option<usize> = None;
            for (i, &col) in self.basis.iter().enumerate() {
                let rate = -self.tab[i][k] * dir;
                if rate.abs() < PIVOT_TOL {
                    continue;
                }
                let room = if rate > 0.0 {
                    self.upper[col] - self.value[col]
                } else {
                    self.lower[col] - self.value[col]
                };
                let t = (room / rate).max(0.0);
                let better = t < best_t - 1e-12
                    || (t <= best_t + 1e-12 && leave.is_some_and(|l| bland && col < self.basis[l]));
                if better {
                    best_t = t;
                    leave = Some(i);
                }
            }
            if !best_t.is_finite() {
                return Err(LpError::Unbounded);
            }
            stall = if best_t <= 1e-12 { stall + 1 } else { 0 };

            self.shift_entering(k, dir * best_t);
            match leave {
                None => {
                    // bound flip
                    let up = dir > 0.0;
                    self.status[j] = if up { Status::AtUpper(k) } else { Status::AtLower(k) };
                    self.value[j] = if up { self.upper[j] } else { self.lower[j] };
                }
                Some(r) => {
                    let col_r = self.basis[r];
                    let to_upper = -self.tab[r][k] * dir > 0.0;
                    self.value[col_r] = if to_upper { self.upper[col_r] } else { self.lower[col_r] };
                    self.pivot(r, k, to_upper);
                }
            }
        }
    }

    fn tick(&mut self) -> Result<(), LpError> {
        self.pivots += 1;
        self.solve_pivots += 1;
        if self.solve_pivots > self.max_iters {
            Err(LpError::IterationLimit)
        } else {
            Ok(())
        }
    }

    /// Moves the variable in slot `k` by `delta`, updating every basic value.
    fn shift_entering(&mut self, k: usize, delta: f64) {
        for (row, &col) in self.tab.iter().zip(&self.basis) {
            let a = row[k];
            if a != 0.0 {
                self.value[col] -= a * delta;
            }
        }
        self.value[self.nonbasic[k]] += delta;
    }

    /// Exchanges the basic variable of row `r` with the nonbasic one in slot
    /// `k`; the leaving variable takes slot `k` at the indicated bound.
    fn pivot(&mut self, r: usize, k: usize, leaving_at_upper: bool) {
        let mut pivot_row = std::mem::take(&mut self.tab[r]);
        let p = pivot_row[k];
        pivot_row[k] = 1.0;
        for v in &mut pivot_row {
            *v /= p;
        }
        for row in &mut self.tab {
            if row.is_empty() {
                continue;
            }
            let f = row[k];
            if f != 0.0 {
                row[k] = 0.0;
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst -= f * src;
                }
            }
        }
        let f = self.reduced[k];
        if f != 0.0 {
            self.reduced[k] = 0.0;
            for (dst, src) in self.reduced.iter_mut().zip(&pivot_row) {
                *dst -= f * src;
            }
        }
        self.tab[r] = pivot_row;

        let entering = self.nonbasic[k];
        let leaving = self.basis[r];
        self.basis[r] = entering;
        self.status[entering] = Status::Basic(r);
        self.nonbasic[k] = leaving;
        self.status[leaving] = if leaving_at_upper { Status::AtUpper(k) } else { Status::AtLower(k) };
    }
}
