//! Exact path for reduced problems with a quadratic objective and affine constraints.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{ReducedSolution, ReducedStatus, SolveMethod};
use crate::error::Result;
use crate::indices::Indices;
use crate::linalg::{dot, lstsq, norm_inf, null_space, rank};
use crate::lp::{lp_solve, LinearProgram, LpStatus, Sign};
use crate::model::{constraint_violation, Problem};
use crate::tol::Tolerances;

const MAX_ITER: usize = 500;

/// `min 0.5 v'Hv + c'v + d  s.t.  A v <= b,  E v = e` over the support coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedQp {
    pub hessian: Vec<Vec<f64>>,
    pub linear: Vec<f64>,
    pub constant: f64,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub e: Vec<Vec<f64>>,
    pub e_rhs: Vec<f64>,
    /// a constraint that is constant on the support and violated
    pub trivially_infeasible: bool,
}

/// Extracts the reduced QP when `f` restricted to `support` is at most quadratic and
/// every `g`, `h` restricted to it is affine.
pub fn reduced_qp(p: &Problem, support: &Indices, tol: &Tolerances) -> Option<ReducedQp> {
    let k = support.len();
    let keep = |v: usize| support.contains(v);
    let slot = |v: usize| support.as_slice().binary_search(&v).expect("support variable");
    let fpoly = p.objective.to_polynomial(&keep, 2)?;
    let (hessian, linear, constant) = fpoly.quadratic_part(k, &slot)?;
    let mut qp = ReducedQp {
        hessian,
        linear,
        constant,
        a: Vec::new(),
        b: Vec::new(),
        e: Vec::new(),
        e_rhs: Vec::new(),
        trivially_infeasible: false,
    };
    for (rows, rhs, exprs, is_eq) in [
        (&mut qp.a, &mut qp.b, &p.g, false),
        (&mut qp.e, &mut qp.e_rhs, &p.h, true),
    ] {
        for ex in exprs {
            let poly = ex.to_polynomial(&keep, 1)?;
            let (full, c0) = poly.linear_part(p.n)?;
            let row: Vec<f64> = support.iter().map(|v| full[v]).collect();
            if row.iter().all(|&v| v == 0.0) {
                let bad = if is_eq { c0.abs() > tol.feas } else { c0 > tol.feas };
                qp.trivially_infeasible |= bad;
                continue;
            }
            rows.push(row);
            rhs.push(-c0);
        }
    }
    Some(qp)
}

impl ReducedQp {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        self.hessian
            .iter()
            .zip(&self.linear)
            .map(|(row, c)| dot(row, v) + c)
            .collect()
    }

    pub fn value(&self, v: &[f64]) -> f64 {
        let hv: Vec<f64> = self.hessian.iter().map(|row| dot(row, v)).collect();
        0.5 * dot(v, &hv) + dot(&self.linear, v) + self.constant
    }
}

/// Outcome of the active-set method on the reduced coordinates.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct QpOutcome {
    pub v: Vec<f64>,
    pub status: ReducedStatus,
    pub residual: f64,
}

/// Primal active-set method started from an LP vertex.
pub(crate) fn active_set(qp: &ReducedQp, tol: &Tolerances) -> Result<QpOutcome> {
    let k = qp.dim();
    let fail = |status| QpOutcome {
        v: vec![0.0; k],
        status,
        residual: f64::INFINITY,
    };
    if qp.trivially_infeasible {
        return Ok(fail(ReducedStatus::Infeasible));
    }
    let start = lp_solve(
        &LinearProgram {
            c: vec![0.0; k],
            a_eq: qp.e.clone(),
            b_eq: qp.e_rhs.clone(),
            a_le: qp.a.clone(),
            b_le: qp.b.clone(),
            signs: vec![Sign::Free; k],
        },
        tol.lp,
    )?;
    if start.status == LpStatus::Infeasible {
        return Ok(fail(ReducedStatus::Infeasible));
    }
    let mut v = start.x;
    if !convex_on_equalities(qp) {
        return Ok(QpOutcome {
            v,
            status: ReducedStatus::Indefinite,
            residual: f64::INFINITY,
        });
    }
    let act_tol = |i: usize| tol.feas.max(1e-12 * (1.0 + qp.b[i].abs()));

    let mut working: Vec<usize> = Vec::new();
    let mut cur_rank = rank(&qp.e, k, 1e-10);
    for i in 0..qp.a.len() {
        if dot(&qp.a[i], &v) - qp.b[i] >= -act_tol(i) {
            let mut rows = working_rows(qp, &working);
            rows.push(qp.a[i].clone());
            let r = rank(&rows, k, 1e-10);
            if r > cur_rank {
                working.push(i);
                cur_rank = r;
            }
        }
    }

    for _ in 0..MAX_ITER {
        let w = working_rows(qp, &working);
        let z = null_space(&w, k, 1e-10);
        let g = qp.gradient(&v);
        let scale = 1.0 + norm_inf(&g);
        let mut step = vec![0.0; k];
        let mut ray = false;
        if !z.is_empty() {
            let r = z.len();
            let zm = DMatrix::from_fn(k, r, |i, j| z[j][i]);
            let hm = DMatrix::from_fn(k, k, |i, j| qp.hessian[i][j]);
            let reduced = zm.transpose() * &hm * &zm;
            let rg = zm.transpose() * DVector::from_column_slice(&g);
            let eig = SymmetricEigen::new(reduced);
            let emax = eig.eigenvalues.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let etol = 1e-10 * (1.0 + emax);
            if eig.eigenvalues.iter().any(|&l| l < -etol) {
                return Ok(QpOutcome {
                    v,
                    status: ReducedStatus::Indefinite,
                    residual: f64::INFINITY,
                });
            }
            let mut p_red = DVector::zeros(r);
            for j in 0..r {
                let u = eig.eigenvectors.column(j);
                let ug = u.dot(&rg);
                let lam = eig.eigenvalues[j];
                if lam <= etol {
                    if ug.abs() > 1e-12 * scale {
                        p_red = -u * ug.signum();
                        ray = true;
                        break;
                    }
                } else {
                    p_red -= u * (ug / lam);
                }
            }
            let p = zm * p_red;
            step = p.iter().copied().collect();
        }

        let small = norm_inf(&step) <= 1e-12 * (1.0 + norm_inf(&v));
        if small && !ray {
            // multipliers on the working set
            let neq = qp.e.len();
            let cols: Vec<Vec<f64>> = w.clone();
            let at: Vec<Vec<f64>> = (0..k).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
            let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
            let mult = lstsq(&at, cols.len(), &neg_g);
            let worst = (0..working.len())
                .map(|j| (j, mult[neq + j]))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((j, m)) if m < -1e-9 * scale => {
                    working.remove(j);
                    continue;
                }
                _ => {
                    let mut res = g.clone();
                    for (c, m) in cols.iter().zip(&mult) {
                        for (ri, ci) in res.iter_mut().zip(c) {
                            *ri += m * ci;
                        }
                    }
                    return Ok(QpOutcome {
                        v,
                        status: ReducedStatus::Converged,
                        residual: norm_inf(&res),
                    });
                }
            }
        }

        // ratio test over inequalities outside the working set
        let mut alpha = if ray { f64::INFINITY } else { 1.0 };
        let mut blocking = None;
        for i in 0..qp.a.len() {
            if working.contains(&i) {
                continue;
            }
            let ap = dot(&qp.a[i], &step);
            if ap > 1e-14 * (1.0 + norm_inf(&qp.a[i])) {
                let t = ((qp.b[i] - dot(&qp.a[i], &v)) / ap).max(0.0);
                if t < alpha {
                    alpha = t;
                    blocking = Some(i);
                }
            }
        }
        if alpha.is_infinite() {
            return Ok(QpOutcome {
                v,
                status: ReducedStatus::Unbounded,
                residual: f64::INFINITY,
            });
        }
        for (vi, si) in v.iter_mut().zip(&step) {
            *vi += alpha * si;
        }
        if let Some(i) = blocking {
            working.push(i);
        }
    }
    Ok(QpOutcome {
        v,
        status: ReducedStatus::NotConverged,
        residual: f64::INFINITY,
    })
}

/// Positive semidefiniteness of the Hessian on the null space of the equality rows.
fn convex_on_equalities(qp: &ReducedQp) -> bool {
    let k = qp.dim();
    let z = null_space(&qp.e, k, 1e-10);
    if z.is_empty() {
        return true;
    }
    let zm = DMatrix::from_fn(k, z.len(), |i, j| z[j][i]);
    let hm = DMatrix::from_fn(k, k, |i, j| qp.hessian[i][j]);
    let eig = SymmetricEigen::new(zm.transpose() * &hm * &zm);
    let emax = eig.eigenvalues.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    eig.eigenvalues.iter().all(|&l| l >= -1e-10 * (1.0 + emax))
}

fn working_rows(qp: &ReducedQp, working: &[usize]) -> Vec<Vec<f64>> {
    qp.e.iter()
        .cloned()
        .chain(working.iter().map(|&i| qp.a[i].clone()))
        .collect()
}

/// Exact solve of the reduced problem on `support`. Returns `None` when the problem is
/// outside the quadratic-objective, affine-constraint class.
pub fn solve_qp_affine(
    p: &Problem,
    support: &Indices,
    tol: &Tolerances,
) -> Result<Option<ReducedSolution>> {
    let Some(qp) = reduced_qp(p, support, tol) else {
        return Ok(None);
    };
    let out = active_set(&qp, tol)?;
    let mut x = vec![0.0; p.n];
    for (slot, i) in support.iter().enumerate() {
        x[i] = out.v[slot];
    }
    let feasible = matches!(
        out.status,
        ReducedStatus::Converged | ReducedStatus::Unbounded
    );
    Ok(Some(ReducedSolution {
        objective: if out.status == ReducedStatus::Unbounded {
            f64::NEG_INFINITY
        } else {
            p.objective.eval(&x)
        },
        violation: if feasible {
            constraint_violation(p, &x)
        } else {
            f64::INFINITY
        },
        x,
        kkt_residual: out.residual,
        status: out.status,
        method: SolveMethod::Exact,
        starts_used: 0,
    }))
}
