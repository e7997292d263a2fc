//! Tangent and linearized cones of complementarity sets, and LICQ / MFCQ / ACQ / GCQ.

use serde::Serialize;

use super::{cones_equal, union_equals_cone, ConeUnion, Generators, Method, PolyhedralCone};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::indices::Indices;
use crate::linalg::{norm2, rank};
use crate::lp::{lp_solve, LinearProgram, LpStatus, Sign};
use crate::model::{build_relaxed, index_sets, relaxed_violation, ConstraintKind, PairPoint, Problem};
use crate::stationarity::Verdict;
use crate::tol::Tolerances;

/// `a'z + c`, compared against zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineRow {
    pub a: Vec<f64>,
    pub c: f64,
}

impl AffineRow {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.a.iter().zip(z).map(|(p, q)| p * q).sum::<f64>() + self.c
    }

    fn from_expr(e: &Expr, dim: usize, what: &str) -> Result<Self> {
        e.to_polynomial(&|_| true, 1)
            .and_then(|p| p.linear_part(dim))
            .map(|(a, c)| AffineRow { a, c })
            .ok_or_else(|| Error::NonlinearConstraint(format!("{what} is not affine")))
    }
}

/// `{(x, y) : ineq <= 0, eq = 0, x_i y_i = 0}` with affine rows over `z = (x, y)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairSet {
    pub name: String,
    pub n: usize,
    pub ineq: Vec<AffineRow>,
    pub eq: Vec<AffineRow>,
}

impl PairSet {
    /// Rows given as expressions over `2n` variables (`y_i` is variable `n + i`).
    pub fn from_exprs(name: impl Into<String>, n: usize, ineq: &[Expr], eq: &[Expr]) -> Result<Self> {
        let dim = 2 * n;
        let ineq = ineq
            .iter()
            .enumerate()
            .map(|(k, e)| AffineRow::from_expr(e, dim, &format!("inequality {}", k + 1)))
            .collect::<Result<_>>()?;
        let eq = eq
            .iter()
            .enumerate()
            .map(|(k, e)| AffineRow::from_expr(e, dim, &format!("equality {}", k + 1)))
            .collect::<Result<_>>()?;
        Ok(PairSet {
            name: name.into(),
            n,
            ineq,
            eq,
        })
    }

    /// Feasible set of the relaxed problem; refuses nonlinear `g` or `h`.
    pub fn from_problem(p: &Problem) -> Result<Self> {
        let rp = build_relaxed(p);
        let dim = rp.num_vars();
        let mut ineq = Vec::new();
        let mut eq = Vec::new();
        for c in &rp.inequalities {
            ineq.push(AffineRow::from_expr(&c.expr, dim, &c.kind.label())?);
        }
        for c in &rp.equalities {
            if !matches!(c.kind, ConstraintKind::Xi(_)) {
                eq.push(AffineRow::from_expr(&c.expr, dim, &c.kind.label())?);
            }
        }
        Ok(PairSet {
            name: p.name.clone(),
            n: p.n,
            ineq,
            eq,
        })
    }

    pub fn violation(&self, pt: &PairPoint) -> Result<f64> {
        let z = pt.stacked()?;
        if z.len() != 2 * self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: pt.x.len(),
            });
        }
        let mut worst: f64 = 0.0;
        for r in &self.ineq {
            worst = worst.max(r.eval(&z));
        }
        for r in &self.eq {
            worst = worst.max(r.eval(&z).abs());
        }
        for i in 0..self.n {
            worst = worst.max((z[i] * z[self.n + i]).abs());
        }
        Ok(worst)
    }

    fn check_feasible(&self, pt: &PairPoint, tol: &Tolerances) -> Result<Vec<f64>> {
        let v = self.violation(pt)?;
        if v > tol.feas {
            return Err(Error::InfeasiblePoint(format!(
                "constraint violation {v:e} exceeds {:e}",
                tol.feas
            )));
        }
        pt.stacked()
    }

    /// Active gradients, including `grad(x_i y_i) = y_i e_i + x_i e_{n+i}`.
    pub fn active_gradients(&self, pt: &PairPoint, tol: &Tolerances) -> Result<ActiveGradients> {
        let z = self.check_feasible(pt, tol)?;
        let n = self.n;
        let mut ag = ActiveGradients {
            dim: 2 * n,
            ..Default::default()
        };
        for (k, r) in self.ineq.iter().enumerate() {
            if r.eval(&z) >= -tol.feas {
                ag.ineq.push(r.a.clone());
                ag.ineq_labels.push(format!("ineq{}", k + 1));
            }
        }
        for (k, r) in self.eq.iter().enumerate() {
            ag.eq.push(r.a.clone());
            ag.eq_labels.push(format!("eq{}", k + 1));
        }
        for i in 0..n {
            let mut g = vec![0.0; 2 * n];
            g[i] = z[n + i];
            g[n + i] = z[i];
            ag.eq.push(g);
            ag.eq_labels.push(format!("xi{}", i + 1));
        }
        Ok(ag)
    }
}

/// Gradients of the active constraints at a point.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ActiveGradients {
    pub dim: usize,
    pub ineq: Vec<Vec<f64>>,
    pub ineq_labels: Vec<String>,
    pub eq: Vec<Vec<f64>>,
    pub eq_labels: Vec<String>,
}

/// Active gradients of the relaxed problem (any smooth `g`, `h`).
pub fn active_gradients_relaxed(
    p: &Problem,
    pt: &PairPoint,
    tol: &Tolerances,
) -> Result<ActiveGradients> {
    let viol = relaxed_violation(p, pt)?;
    if viol > tol.feas {
        return Err(Error::InfeasiblePoint(format!(
            "relaxed constraint violation {viol:e} exceeds {:e}",
            tol.feas
        )));
    }
    let rp = build_relaxed(p);
    let z = pt.stacked()?;
    let mut ag = ActiveGradients {
        dim: rp.num_vars(),
        ..Default::default()
    };
    for c in &rp.inequalities {
        if c.expr.eval(&z) >= -tol.feas {
            ag.ineq.push(c.expr.grad(&z));
            ag.ineq_labels.push(c.kind.label());
        }
    }
    for c in &rp.equalities {
        ag.eq.push(c.expr.grad(&z));
        ag.eq_labels.push(c.kind.label());
    }
    Ok(ag)
}

/// `{d : grad c_eq' d = 0, grad c_active' d <= 0}`.
pub fn linearized_cone(ag: &ActiveGradients) -> Result<PolyhedralCone> {
    PolyhedralCone::new(ag.dim, ag.eq.clone(), ag.ineq.clone())
}

/// Which `I_00` indices a tangent piece pins on the `x` side and on the `y` side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieceLabel {
    pub x_zero: Indices,
    pub y_zero: Indices,
}

/// Tangent cone of an affine complementarity set as a union over partitions of `I_00`.
pub fn tangent_cone_pieces(
    set: &PairSet,
    pt: &PairPoint,
    tol: &Tolerances,
) -> Result<ConeUnion<PieceLabel>> {
    let z = set.check_feasible(pt, tol)?;
    let n = set.n;
    let sets = index_sets(pt, tol.zero)?;
    if sets.i00.len() > super::DIM_CAP {
        return Err(Error::CapExceeded {
            what: "|I_00|",
            size: sets.i00.len(),
            cap: super::DIM_CAP,
        });
    }
    let base_eq: Vec<Vec<f64>> = set.eq.iter().map(|r| r.a.clone()).collect();
    let base_ineq: Vec<Vec<f64>> = set
        .ineq
        .iter()
        .filter(|r| r.eval(&z) >= -tol.feas)
        .map(|r| r.a.clone())
        .collect();
    let unit = |k: usize| {
        let mut e = vec![0.0; 2 * n];
        e[k] = 1.0;
        e
    };
    let mut pieces = Vec::new();
    for zx in sets.i00.subsets_by_size() {
        let zy = sets.i00.difference(&zx);
        let mut eq = base_eq.clone();
        for i in sets.i0pm.union(&zx).iter() {
            eq.push(unit(i));
        }
        for i in sets.i_pm0.union(&zy).iter() {
            eq.push(unit(n + i));
        }
        let cone = PolyhedralCone::new(2 * n, eq, base_ineq.clone())?;
        pieces.push((
            PieceLabel {
                x_zero: zx,
                y_zero: zy,
            },
            cone,
        ));
    }
    Ok(ConeUnion { dim: 2 * n, pieces })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Cq {
    Licq,
    Mfcq,
    Acq,
    Gcq,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeSummary {
    pub eq: Vec<Vec<f64>>,
    pub ineq: Vec<Vec<f64>>,
    pub generators: Generators,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PieceSummary {
    pub label: PieceLabel,
    pub generators: Generators,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CqReport {
    pub which: Cq,
    pub verdict: Verdict,
    pub method: Method,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linearized: Option<ConeSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<PieceSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<f64>>,
}

fn verdict(b: bool) -> Verdict {
    if b {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

/// Linear independence of all active gradients.
pub fn check_licq(ag: &ActiveGradients, tol: &Tolerances) -> CqReport {
    let rows: Vec<Vec<f64>> = ag.ineq.iter().chain(&ag.eq).cloned().collect();
    let r = rank(&rows, ag.dim, tol.rank);
    CqReport {
        which: Cq::Licq,
        verdict: verdict(r == rows.len()),
        method: Method::Exact,
        detail: format!("rank {r} of {} active gradients", rows.len()),
        linearized: None,
        pieces: Vec::new(),
        witness: None,
    }
}

/// Independent equality gradients and a direction strictly decreasing every active inequality.
pub fn check_mfcq(ag: &ActiveGradients, tol: &Tolerances) -> Result<CqReport> {
    let r = rank(&ag.eq, ag.dim, tol.rank);
    let report = |holds: bool, detail: String, witness: Option<Vec<f64>>| CqReport {
        which: Cq::Mfcq,
        verdict: verdict(holds),
        method: Method::Exact,
        detail,
        linearized: None,
        pieces: Vec::new(),
        witness,
    };
    if r < ag.eq.len() {
        return Ok(report(
            false,
            format!("equality gradients have rank {r} < {}", ag.eq.len()),
            None,
        ));
    }
    // variables (d, s): maximize s subject to E d = 0, A d + s |a| <= 0, s <= 1
    let dim = ag.dim;
    let mut lp = LinearProgram {
        c: vec![0.0; dim + 1],
        signs: vec![Sign::Free; dim + 1],
        ..Default::default()
    };
    lp.c[dim] = -1.0;
    for e in &ag.eq {
        let mut row = e.clone();
        row.push(0.0);
        lp.a_eq.push(row);
        lp.b_eq.push(0.0);
    }
    for a in &ag.ineq {
        let nrm = norm2(a);
        let mut row: Vec<f64> = if nrm > 0.0 {
            a.iter().map(|v| v / nrm).collect()
        } else {
            a.clone()
        };
        row.push(1.0);
        lp.a_le.push(row);
        lp.b_le.push(0.0);
    }
    let mut cap = vec![0.0; dim + 1];
    cap[dim] = 1.0;
    lp.a_le.push(cap);
    lp.b_le.push(1.0);
    let out = lp_solve(&lp, tol.lp)?;
    if out.status != LpStatus::Optimal {
        return Err(Error::Internal(format!(
            "margin program ended with status {:?}",
            out.status
        )));
    }
    let s = out.x[dim];
    let holds = s > tol.lp;
    Ok(report(
        holds,
        format!("best margin s* = {s}"),
        holds.then(|| out.x[..dim].to_vec()),
    ))
}

fn summaries(
    d: &PolyhedralCone,
    t: &ConeUnion<PieceLabel>,
    tol: &Tolerances,
) -> Result<(ConeSummary, Vec<PieceSummary>)> {
    let gens = t.generators(tol.cone)?;
    let pieces = t
        .pieces
        .iter()
        .zip(gens)
        .map(|((l, _), g)| PieceSummary {
            label: l.clone(),
            generators: g.clone(),
        })
        .collect();
    let lin = ConeSummary {
        eq: d.eq.clone(),
        ineq: d.ineq.clone(),
        generators: d.generators(tol.cone)?.clone(),
    };
    Ok((lin, pieces))
}

fn cones_at(
    set: &PairSet,
    pt: &PairPoint,
    tol: &Tolerances,
) -> Result<(PolyhedralCone, ConeUnion<PieceLabel>)> {
    let dim = 2 * set.n;
    if dim > super::DIM_CAP {
        return Err(Error::CapExceeded {
            what: "2n",
            size: dim,
            cap: super::DIM_CAP,
        });
    }
    let d = linearized_cone(&set.active_gradients(pt, tol)?)?;
    let t = tangent_cone_pieces(set, pt, tol)?;
    Ok((d, t))
}

/// ACQ: the tangent cone (a union of polyhedral pieces) equals the linearized cone.
pub fn check_acq(set: &PairSet, pt: &PairPoint, tol: &Tolerances) -> Result<CqReport> {
    let (d, t) = cones_at(set, pt, tol)?;
    let cmp = union_equals_cone(&t, &d, tol.cone)?;
    if !cmp.equal {
        if let Some(w) = &cmp.witness {
            if !d.contains(w, tol.cone) {
                return Err(Error::Internal(
                    "a tangent direction escapes the linearized cone".into(),
                ));
            }
        }
    }
    let (lin, pieces) = summaries(&d, &t, tol)?;
    Ok(CqReport {
        which: Cq::Acq,
        verdict: verdict(cmp.equal),
        method: cmp.method,
        detail: format!("{} tangent piece(s)", t.pieces.len()),
        linearized: Some(lin),
        pieces,
        witness: cmp.witness,
    })
}

/// GCQ: the polar of the tangent cone equals the polar of the linearized cone.
pub fn check_gcq(set: &PairSet, pt: &PairPoint, tol: &Tolerances) -> Result<CqReport> {
    let (d, t) = cones_at(set, pt, tol)?;
    let tp = t.polar(tol.cone)?;
    let dp = d.polar(tol.cone)?;
    let equal = cones_equal(&tp, &dp, tol.cone)?;
    let witness = if equal {
        None
    } else {
        // a generator of the tangent polar outside the linearized polar
        tp.generators(tol.cone)?
            .conic_spanning_set()
            .into_iter()
            .find(|v| !dp.contains(v, tol.cone))
    };
    let (lin, pieces) = summaries(&d, &t, tol)?;
    Ok(CqReport {
        which: Cq::Gcq,
        verdict: verdict(equal),
        method: Method::Exact,
        detail: format!("{} tangent piece(s)", t.pieces.len()),
        linearized: Some(lin),
        pieces,
        witness,
    })
}
