//! Augmented Lagrangian with gradient-descent inner loop, on the support coordinates.

use nalgebra::{DMatrix, DVector};

use super::{ReducedSolution, ReducedStatus, SolveMethod};
use crate::indices::Indices;
use crate::linalg::{dot, norm2, norm_inf};
use crate::model::{constraint_violation, Problem};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Armijo sufficient-decrease constant
    pub armijo: f64,
    /// target for the reduced KKT residual
    pub kkt_tol: f64,
    pub rho0: f64,
    pub rho_max: f64,
}

impl Default for AlOptions {
    fn default() -> Self {
        AlOptions {
            max_outer: 50,
            max_inner: 500,
            armijo: 1e-4,
            kkt_tol: 1e-6,
            rho0: 10.0,
            rho_max: 1e12,
        }
    }
}

const MULT_BOUND: f64 = 1e8;
const INNER_TOL: f64 = 1e-9;

struct Reduced<'a> {
    p: &'a Problem,
    support: &'a [usize],
}

impl Reduced<'_> {
    fn embed(&self, v: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.p.n];
        for (slot, &i) in self.support.iter().enumerate() {
            x[i] = v[slot];
        }
        x
    }

    fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.support.iter().map(|&i| full[i]).collect()
    }

    /// Augmented Lagrangian value and gradient at `v`.
    fn lagrangian(&self, v: &[f64], lam: &[f64], mu: &[f64], rho: f64) -> (f64, Vec<f64>) {
        let x = self.embed(v);
        let (mut val, mut grad) = self.p.objective.eval_grad(&x);
        for (h, &l) in self.p.h.iter().zip(lam) {
            let (hv, hg) = h.eval_grad(&x);
            val += l * hv + 0.5 * rho * hv * hv;
            let w = l + rho * hv;
            for (gi, hi) in grad.iter_mut().zip(hg) {
                *gi += w * hi;
            }
        }
        for (g, &m) in self.p.g.iter().zip(mu) {
            let gv = g.eval(&x);
            let s = (m + rho * gv).max(0.0);
            val += (s * s - m * m) / (2.0 * rho);
            if s > 0.0 {
                for (gi, dg) in grad.iter_mut().zip(g.grad(&x)) {
                    *gi += s * dg;
                }
            }
        }
        (val, self.restrict(&grad))
    }

    fn violation(&self, v: &[f64]) -> f64 {
        constraint_violation(self.p, &self.embed(v))
    }

    /// `max(||grad_S L||, violation, |mu_i g_i|)` for the ordinary Lagrangian.
    fn kkt_residual(&self, v: &[f64], lam: &[f64], mu: &[f64]) -> f64 {
        let x = self.embed(v);
        let mut grad = self.p.objective.grad(&x);
        let mut comp: f64 = 0.0;
        for (h, &l) in self.p.h.iter().zip(lam) {
            for (gi, hi) in grad.iter_mut().zip(h.grad(&x)) {
                *gi += l * hi;
            }
        }
        for (g, &m) in self.p.g.iter().zip(mu) {
            for (gi, dg) in grad.iter_mut().zip(g.grad(&x)) {
                *gi += m * dg;
            }
            comp = comp.max((m * g.eval(&x)).abs());
        }
        norm_inf(&self.restrict(&grad))
            .max(constraint_violation(self.p, &x))
            .max(comp)
    }

    /// Gradient descent with Barzilai-Borwein trial steps and Armijo backtracking.
    fn minimize(&self, v: &mut Vec<f64>, lam: &[f64], mu: &[f64], rho: f64, opts: &AlOptions) {
        let (mut val, mut grad) = self.lagrangian(v, lam, mu, rho);
        let mut step = 1.0 / norm_inf(&grad).max(1.0);
        let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
        for _ in 0..opts.max_inner {
            let gnorm = norm_inf(&grad);
            if gnorm <= INNER_TOL {
                break;
            }
            if let Some((pv, pg)) = &prev {
                let s: Vec<f64> = v.iter().zip(pv).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = grad.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 0.0 {
                    step = (dot(&s, &s) / sy).clamp(1e-12, 1e6);
                } else {
                    step = (step * 2.0).min(1e6);
                }
            }
            let g2 = dot(&grad, &grad);
            let mut t = step;
            let mut accepted = None;
            for _ in 0..60 {
                let trial: Vec<f64> = v.iter().zip(&grad).map(|(a, b)| a - t * b).collect();
                let (tv, tg) = self.lagrangian(&trial, lam, mu, rho);
                if tv.is_finite() && tv <= val - opts.armijo * t * g2 {
                    accepted = Some((trial, tv, tg));
                    break;
                }
                t *= 0.5;
            }
            let Some((trial, tv, tg)) = accepted else {
                break;
            };
            prev = Some((std::mem::replace(v, trial), std::mem::replace(&mut grad, tg)));
            step = t;
            if (val - tv).abs() <= 1e-16 * (1.0 + val.abs()) {
                break;
            }
            val = tv;
        }
    }

    /// Minimum-norm Gauss-Newton steps onto the violated constraints, continued while the
    /// violation keeps shrinking.
    fn restore(&self, v: &mut Vec<f64>) {
        let k = v.len();
        if k == 0 {
            return;
        }
        let mut best = (self.violation(v), v.clone());
        for _ in 0..200 {
            let x = self.embed(v);
            let mut rows: Vec<Vec<f64>> = Vec::new();
            let mut vals: Vec<f64> = Vec::new();
            for g in &self.p.g {
                let gv = g.eval(&x);
                if gv > 0.0 {
                    push_unit(&mut rows, &mut vals, self.restrict(&g.grad(&x)), gv);
                }
            }
            for h in &self.p.h {
                let hv = h.eval(&x);
                if hv != 0.0 {
                    push_unit(&mut rows, &mut vals, self.restrict(&h.grad(&x)), hv);
                }
            }
            if rows.is_empty() {
                break;
            }
            let m = rows.len();
            let j = DMatrix::from_fn(m, k, |r, c| rows[r][c]);
            // rows have unit norm, so the regularization is relative per constraint
            let a = &j * j.transpose() + DMatrix::identity(m, m) * 1e-12;
            let Some(sol) = a.lu().solve(&DVector::from_column_slice(&vals)) else {
                break;
            };
            let delta = j.transpose() * sol;
            for (vi, di) in v.iter_mut().zip(delta.iter()) {
                *vi -= di;
            }
            let viol = self.violation(v);
            if viol < best.0 {
                let stalled = viol > 0.95 * best.0;
                best = (viol, v.clone());
                if stalled {
                    break;
                }
            } else {
                break;
            }
        }
        *v = best.1;
    }
}

/// Appends `row / |row|` and `val / |row|`; a zero row cannot be moved along and is skipped.
fn push_unit(rows: &mut Vec<Vec<f64>>, vals: &mut Vec<f64>, row: Vec<f64>, val: f64) {
    let norm = norm2(&row);
    if norm > 0.0 {
        rows.push(row.iter().map(|v| v / norm).collect());
        vals.push(val / norm);
    }
}

/// Solves `min f s.t. g <= 0, h = 0, x_i = 0 off support` from `start` (full length, zeros
/// off support).
pub fn solve_reduced(
    p: &Problem,
    support: &Indices,
    start: &[f64],
    opts: &AlOptions,
    tol: &Tolerances,
) -> ReducedSolution {
    let red = Reduced {
        p,
        support: support.as_slice(),
    };
    let mut v = red.restrict(start);
    let mut lam = vec![0.0; p.h.len()];
    let mut mu = vec![0.0; p.g.len()];
    let mut rho = opts.rho0;
    let mut prev_viol = f64::INFINITY;
    let mut status = ReducedStatus::NotConverged;
    let mut residual = f64::INFINITY;

    if p.g.is_empty() && p.h.is_empty() {
        red.minimize(&mut v, &lam, &mu, rho, opts);
        residual = red.kkt_residual(&v, &lam, &mu);
        if residual > opts.kkt_tol {
            // keep descending while progress is possible
            for _ in 0..opts.max_outer {
                red.minimize(&mut v, &lam, &mu, rho, opts);
                residual = red.kkt_residual(&v, &lam, &mu);
                if residual <= opts.kkt_tol {
                    break;
                }
            }
        }
        if residual <= opts.kkt_tol {
            status = ReducedStatus::Converged;
        }
    } else {
        let mut stalls = 0;
        for _ in 0..opts.max_outer {
            let before = v.clone();
            red.minimize(&mut v, &lam, &mu, rho, opts);
            let x = red.embed(&v);
            for (l, h) in lam.iter_mut().zip(&p.h) {
                *l = (*l + rho * h.eval(&x)).clamp(-MULT_BOUND, MULT_BOUND);
            }
            for (m, g) in mu.iter_mut().zip(&p.g) {
                *m = (*m + rho * g.eval(&x)).clamp(0.0, MULT_BOUND);
            }
            let viol = red.violation(&v);
            residual = red.kkt_residual(&v, &lam, &mu);
            if residual <= opts.kkt_tol {
                status = ReducedStatus::Converged;
                break;
            }
            if viol > 1e-4 && rho >= 1e8 && viol > 0.9 * prev_viol {
                status = ReducedStatus::Infeasible;
                break;
            }
            // feasible and either no longer moving or unable to raise the penalty further
            let moved = v
                .iter()
                .zip(&before)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let capped = rho >= opts.rho_max;
            if viol <= tol.feas && (capped || moved <= 1e-10 * (1.0 + norm_inf(&v))) {
                stalls += 1;
                if stalls >= 3 {
                    break;
                }
            } else {
                stalls = 0;
            }
            if viol > 0.25 * prev_viol {
                rho = (rho * 10.0).min(opts.rho_max);
            }
            prev_viol = viol;
        }
    }

    if status != ReducedStatus::Infeasible {
        red.restore(&mut v);
    }
    let x = red.embed(&v);
    let violation = constraint_violation(p, &x);
    if status != ReducedStatus::Converged {
        residual = red.kkt_residual(&v, &lam, &mu).min(residual);
    }
    if violation > tol.feas && status != ReducedStatus::Infeasible && rho >= 1e8 {
        status = ReducedStatus::Infeasible;
    }
    ReducedSolution {
        objective: p.objective.eval(&x),
        x,
        violation,
        kkt_residual: residual,
        status,
        method: SolveMethod::AugmentedLagrangian,
        starts_used: 1,
    }
}
