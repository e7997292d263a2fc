//! Dense two-phase tableau simplex with Bland's rule.
//!
//! Every outcome carries a verified witness: optimal solutions pass a residual
//! audit, infeasibility carries a Farkas vector `w` with
//!
//! * `w'b > eps`
//! * `(w'A)_j <= 0` for nonnegative variables, `(w'A)_j = 0` for free ones
//! * `w_i <= 0` on every `<=` row
//!
//! where `A`, `b` stack the equality rows first and the `<=` rows second.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("dimension mismatch in {0}")]
    DimensionMismatch(&'static str),
    #[error("non-finite coefficient in {0}")]
    NonFinite(&'static str),
    #[error("Farkas certificate failed re-verification (violation {0:e})")]
    CertificateRejected(f64),
    #[error("solution audit failed: {0}")]
    AuditFailed(String),
    #[error("pivot limit reached")]
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Free,
    Nonnegative,
}

/// `minimize c'z` subject to `A_eq z = b_eq`, `A_le z <= b_le`, sign restrictions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub a_eq: Vec<Vec<f64>>,
    pub b_eq: Vec<f64>,
    pub a_le: Vec<Vec<f64>>,
    pub b_le: Vec<f64>,
    pub signs: Vec<Sign>,
}

impl LinearProgram {
    /// Pure feasibility problem (zero objective) over equality rows.
    pub fn feasibility(a_eq: Vec<Vec<f64>>, b_eq: Vec<f64>, signs: Vec<Sign>) -> Self {
        LinearProgram {
            c: vec![0.0; signs.len()],
            a_eq,
            b_eq,
            a_le: Vec::new(),
            b_le: Vec::new(),
            signs,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.signs.len()
    }

    fn validate(&self) -> Result<(), LpError> {
        let nv = self.signs.len();
        if self.c.len() != nv {
            return Err(LpError::DimensionMismatch("objective"));
        }
        if self.a_eq.len() != self.b_eq.len() || self.a_eq.iter().any(|r| r.len() != nv) {
            return Err(LpError::DimensionMismatch("equality rows"));
        }
        if self.a_le.len() != self.b_le.len() || self.a_le.iter().any(|r| r.len() != nv) {
            return Err(LpError::DimensionMismatch("inequality rows"));
        }
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.c) {
            return Err(LpError::NonFinite("objective"));
        }
        if !finite(&self.b_eq) || !self.a_eq.iter().all(|r| finite(r)) {
            return Err(LpError::NonFinite("equality rows"));
        }
        if !finite(&self.b_le) || !self.a_le.iter().all(|r| finite(r)) {
            return Err(LpError::NonFinite("inequality rows"));
        }
        Ok(())
    }

    fn row(&self, i: usize) -> (&[f64], f64) {
        if i < self.a_eq.len() {
            (&self.a_eq[i], self.b_eq[i])
        } else {
            let k = i - self.a_eq.len();
            (&self.a_le[k], self.b_le[k])
        }
    }

    fn num_rows(&self) -> usize {
        self.a_eq.len() + self.a_le.len()
    }

    fn max_abs(&self) -> (f64, f64) {
        let amax = self
            .a_eq
            .iter()
            .chain(&self.a_le)
            .flatten()
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        let bmax = self
            .b_eq
            .iter()
            .chain(&self.b_le)
            .fold(0.0_f64, |m, v| m.max(v.abs()));
        (amax, bmax)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Primal point: optimal, or the last feasible basis when unbounded. Empty when infeasible.
    pub x: Vec<f64>,
    pub objective: f64,
    /// Farkas vector over the stacked rows, present iff infeasible.
    pub certificate: Option<Vec<f64>>,
    pub pivots: usize,
}

impl LpOutcome {
    pub fn is_feasible(&self) -> bool {
        self.status != LpStatus::Infeasible
    }
}

const MAX_PIVOTS: usize = 100_000;

struct Tableau {
    rows: Vec<Vec<f64>>, // each row: columns then rhs
    obj: Vec<f64>,       // reduced costs then -objective value
    basis: Vec<usize>,
    ncols: usize,
    eps: f64,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.ncols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Bland's rule iterations over columns allowed by `allowed`.
    /// Returns `Ok(None)` at optimality or `Ok(Some(col))` for an unbounded column.
    fn run(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<Option<usize>, LpError> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::IterationLimit);
            }
            let Some(enter) = (0..self.ncols).find(|&j| allowed(j) && self.obj[j] < -self.eps)
            else {
                return Ok(None);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > self.eps {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - self.eps
                                || (ratio <= lr + self.eps && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return Ok(Some(enter)),
                Some((r, _)) => self.pivot(r, enter),
            }
        }
    }
}

/// Column layout of the standard form.
struct Layout {
    /// (first column, optional negative-part column) per original variable
    var_cols: Vec<(usize, Option<usize>)>,
    row_sign: Vec<f64>,
}

/// Solves `lp` with pivot tolerance `eps`.
pub fn lp_solve(lp: &LinearProgram, eps: f64) -> Result<LpOutcome, LpError> {
    lp.validate()?;
    let m = lp.num_rows();
    let m_eq = lp.a_eq.len();

    // standard form columns
    let mut var_cols = Vec::with_capacity(lp.num_vars());
    let mut col = 0;
    for s in &lp.signs {
        match s {
            Sign::Nonnegative => {
                var_cols.push((col, None));
                col += 1;
            }
            Sign::Free => {
                var_cols.push((col, Some(col + 1)));
                col += 2;
            }
        }
    }
    let slack0 = col;
    let n_struct = col + lp.a_le.len();
    let ncols = n_struct + m;
    let mut rows = Vec::with_capacity(m);
    let mut row_sign = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b) = lp.row(i);
        let mut r = vec![0.0; ncols + 1];
        for (j, &(p, neg)) in var_cols.iter().enumerate() {
            r[p] = a[j];
            if let Some(q) = neg {
                r[q] = -a[j];
            }
        }
        if i >= m_eq {
            r[slack0 + i - m_eq] = 1.0;
        }
        r[ncols] = b;
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        if sign < 0.0 {
            for v in r.iter_mut() {
                *v = -*v;
            }
        }
        r[n_struct + i] = 1.0;
        rows.push(r);
        row_sign.push(sign);
    }
    let layout = Layout {
        var_cols,
        row_sign,
    };

    // phase 1: minimize the sum of artificials
    let mut obj = vec![0.0; ncols + 1];
    for r in &rows {
        for j in 0..n_struct {
            obj[j] -= r[j];
        }
        obj[ncols] -= r[ncols];
    }
    let mut t = Tableau {
        rows,
        obj,
        basis: (n_struct..n_struct + m).collect(),
        ncols,
        eps,
        pivots: 0,
    };
    t.run(&|_| true)?;
    let (amax, bmax) = lp.max_abs();
    let phase1 = -t.obj[ncols];
    if phase1 > eps * (1.0 + bmax) {
        let y: Vec<f64> = (0..m).map(|i| 1.0 - t.obj[n_struct + i]).collect();
        let w: Vec<f64> = y.iter().zip(&layout.row_sign).map(|(a, s)| a * s).collect();
        let w = verify_farkas(lp, w, eps, amax)?;
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            x: Vec::new(),
            objective: f64::NAN,
            certificate: Some(w),
            pivots: t.pivots,
        });
    }

    // drive artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n_struct {
            let replacement = (0..n_struct).find(|&j| t.rows[i][j].abs() > eps);
            match replacement {
                Some(j) => {
                    t.pivot(i, j);
                    i += 1;
                }
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                }
            }
        } else {
            i += 1;
        }
    }

    // phase 2
    let mut cost = vec![0.0; ncols];
    for (j, &(p, neg)) in layout.var_cols.iter().enumerate() {
        cost[p] = lp.c[j];
        if let Some(q) = neg {
            cost[q] = -lp.c[j];
        }
    }
    let mut obj = vec![0.0; ncols + 1];
    obj[..ncols].copy_from_slice(&cost);
    for (r, &b) in t.rows.iter().zip(&t.basis) {
        let cb = cost[b];
        if cb != 0.0 {
            for (o, v) in obj.iter_mut().zip(r) {
                *o -= cb * v;
            }
        }
    }
    t.obj = obj;
    let unbounded = t.run(&|j| j < n_struct)?;

    let mut z = vec![0.0; ncols];
    for (i, &b) in t.basis.iter().enumerate() {
        z[b] = t.rhs(i);
    }
    let x: Vec<f64> = layout
        .var_cols
        .iter()
        .map(|&(p, neg)| z[p] - neg.map_or(0.0, |q| z[q]))
        .collect();
    let objective: f64 = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
    audit_primal(lp, &x, eps, amax, bmax)?;
    let tableau_obj = -t.obj[ncols];
    if unbounded.is_none() {
        let scale = 1.0 + tableau_obj.abs().max(objective.abs());
        if (tableau_obj - objective).abs() > eps * scale * 1e3 {
            return Err(LpError::AuditFailed(format!(
                "objective {objective} disagrees with tableau value {tableau_obj}"
            )));
        }
    }
    Ok(LpOutcome {
        status: if unbounded.is_some() {
            LpStatus::Unbounded
        } else {
            LpStatus::Optimal
        },
        x,
        objective,
        certificate: None,
        pivots: t.pivots,
    })
}

/// Feasibility of `A_eq z = b_eq` under sign restrictions.
pub fn linear_feasibility(
    a_eq: Vec<Vec<f64>>,
    b_eq: Vec<f64>,
    signs: Vec<Sign>,
    eps: f64,
) -> Result<LpOutcome, LpError> {
    lp_solve(&LinearProgram::feasibility(a_eq, b_eq, signs), eps)
}

fn audit_primal(lp: &LinearProgram, x: &[f64], eps: f64, amax: f64, bmax: f64) -> Result<(), LpError> {
    let xmax = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = eps * (1.0 + bmax + amax * xmax) * 10.0;
    for (j, s) in lp.signs.iter().enumerate() {
        if *s == Sign::Nonnegative && x[j] < -tol {
            return Err(LpError::AuditFailed(format!("x[{j}] = {} < 0", x[j])));
        }
    }
    for i in 0..lp.num_rows() {
        let (a, b) = lp.row(i);
        let ax: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
        let bad = if i < lp.a_eq.len() {
            (ax - b).abs() > tol
        } else {
            ax - b > tol
        };
        if bad {
            return Err(LpError::AuditFailed(format!(
                "row {i}: residual {:e} exceeds {tol:e}",
                ax - b
            )));
        }
    }
    Ok(())
}

/// Re-verifies a Farkas vector by direct multiplication; returns it normalized to max-abs 1.
fn verify_farkas(lp: &LinearProgram, w: Vec<f64>, eps: f64, amax: f64) -> Result<Vec<f64>, LpError> {
    let wmax = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if wmax == 0.0 {
        return Err(LpError::CertificateRejected(f64::INFINITY));
    }
    let w: Vec<f64> = w.iter().map(|v| v / wmax).collect();
    let tol = eps * (1.0 + amax) * (lp.num_rows().max(1) as f64);
    let (worst, wb) = farkas_violation(lp, &w);
    if worst > tol || wb <= eps {
        return Err(LpError::CertificateRejected(worst.max(eps - wb)));
    }
    Ok(w)
}

/// Largest sign violation of a Farkas vector and its value `w'b`.
pub fn farkas_violation(lp: &LinearProgram, w: &[f64]) -> (f64, f64) {
    let mut wb = 0.0;
    let mut wa = vec![0.0; lp.num_vars()];
    for (i, &wi) in w.iter().enumerate() {
        let (a, b) = lp.row(i);
        wb += wi * b;
        for (acc, v) in wa.iter_mut().zip(a) {
            *acc += wi * v;
        }
    }
    let mut worst: f64 = w.iter().skip(lp.a_eq.len()).fold(0.0_f64, |m, &v| m.max(v));
    for (j, s) in lp.signs.iter().enumerate() {
        worst = worst.max(match s {
            Sign::Nonnegative => wa[j],
            Sign::Free => wa[j].abs(),
        });
    }
    (worst, wb)
}
