//! W_I-stationarity certificates and the relaxed-problem KKT check.
//!
//! The reduced system for `W(I)` lives in the original variables only:
//!
//! ```text
//! grad f + sum lambda_g grad g + sum lambda_h grad h + sum_{i in I} gamma_i e_i = 0
//! ```
//!
//! with `lambda_g >= 0` on active `g` and `lambda_g = 0` on inactive ones.
//! S-stationarity is `W(I_min)`, M-stationarity is `W(I_max)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::Indices;
use crate::linalg::norm_inf;
use crate::lp::{linear_feasibility, Sign};
use crate::model::{
    build_relaxed, build_tightened, index_sets, relaxed_violation, ConstraintKind, IndexSets,
    PairPoint, Problem, ReformulatedProblem,
};
use crate::tol::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    W,
    S,
    M,
    #[serde(rename = "KKT")]
    KktRelaxed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
}

impl Verdict {
    pub fn holds(self) -> bool {
        self == Verdict::Holds
    }
}

/// Multipliers of the I-tightened problem, all indexed `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullMultipliers {
    pub lambda_theta: f64,
    /// on `H_i = -y_i`
    #[serde(rename = "lambda_H")]
    pub lambda_lower: Vec<f64>,
    /// on `H~_i = y_i - 1`
    #[serde(rename = "lambda_Htilde")]
    pub lambda_upper: Vec<f64>,
    /// on `G_i = x_i`, zero outside `I`
    #[serde(rename = "lambda_G")]
    pub lambda_zero: Vec<f64>,
    pub residuals: KktResiduals,
}

/// Multipliers of the relaxed problem's own KKT system.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelaxedKktMultipliers {
    pub lambda_g: Vec<f64>,
    pub lambda_h: Vec<f64>,
    pub lambda_theta: f64,
    pub mu: Vec<f64>,
    #[serde(rename = "lambda_Htilde")]
    pub lambda_upper: Vec<f64>,
    pub lambda_xi: Vec<f64>,
    pub residuals: KktResiduals,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct KktResiduals {
    /// `||grad_x L||_inf`
    pub stationarity_x: f64,
    /// `||grad_y L||_inf`
    pub stationarity_y: f64,
    /// most negative inequality multiplier, reported as a nonnegative number
    pub sign: f64,
    /// `max |mult * c(z)|` over inequality rows
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity_x
            .max(self.stationarity_y)
            .max(self.sign)
            .max(self.complementarity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityCertificate {
    pub condition: Condition,
    pub verdict: Verdict,
    #[serde(rename = "I")]
    pub i: Indices,
    pub lambda_g: Vec<f64>,
    pub lambda_h: Vec<f64>,
    /// length `n`, zero outside `I`
    pub gamma: Vec<f64>,
    pub stationarity_residual: f64,
    pub complementarity_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub full: Option<FullMultipliers>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kkt: Option<RelaxedKktMultipliers>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub farkas: Option<Vec<f64>>,
}

fn checked_sets(p: &Problem, pt: &PairPoint, tol: &Tolerances) -> Result<IndexSets> {
    if pt.x.len() != p.n {
        return Err(Error::Dimension {
            expected: p.n,
            got: pt.x.len(),
        });
    }
    let viol = relaxed_violation(p, pt)?;
    if viol > tol.feas {
        return Err(Error::InfeasiblePoint(format!(
            "relaxed constraint violation {viol:e} exceeds {:e}",
            tol.feas
        )));
    }
    index_sets(pt, tol.zero)
}

/// Decides `W(I)` at `pt` through the reduced multiplier system.
pub fn check_w_stationary(
    p: &Problem,
    pt: &PairPoint,
    i_set: &Indices,
    tol: &Tolerances,
) -> Result<StationarityCertificate> {
    let sets = checked_sets(p, pt, tol)?;
    sets.check_admissible(i_set)?;
    w_certificate(p, pt, i_set, Condition::W, tol)
}

/// `W(I_0+ ∪ I_01)`.
pub fn check_s_stationary(
    p: &Problem,
    pt: &PairPoint,
    tol: &Tolerances,
) -> Result<StationarityCertificate> {
    let sets = checked_sets(p, pt, tol)?;
    w_certificate(p, pt, &sets.i_min(), Condition::S, tol)
}

/// `W(I_0)`.
pub fn check_m_stationary(
    p: &Problem,
    pt: &PairPoint,
    tol: &Tolerances,
) -> Result<StationarityCertificate> {
    let sets = checked_sets(p, pt, tol)?;
    w_certificate(p, pt, &sets.i_max(), Condition::M, tol)
}

fn w_certificate(
    p: &Problem,
    pt: &PairPoint,
    i_set: &Indices,
    condition: Condition,
    tol: &Tolerances,
) -> Result<StationarityCertificate> {
    let n = p.n;
    let x = &pt.x;
    let grad_f = p.objective.grad(x);
    let g_vals: Vec<f64> = p.g.iter().map(|g| g.eval(x)).collect();
    let active: Vec<usize> = (0..p.g.len()).filter(|&k| g_vals[k] >= -tol.feas).collect();

    // columns: active lambda_g, lambda_h, gamma_I
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut signs = Vec::new();
    for &k in &active {
        cols.push(p.g[k].grad(x));
        signs.push(Sign::Nonnegative);
    }
    for h in &p.h {
        cols.push(h.grad(x));
        signs.push(Sign::Free);
    }
    for i in i_set.iter() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        cols.push(e);
        signs.push(Sign::Free);
    }
    let a: Vec<Vec<f64>> = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let b: Vec<f64> = grad_f.iter().map(|v| -v).collect();
    let out = linear_feasibility(a, b, signs, tol.lp)?;

    let mut lambda_g = vec![0.0; p.g.len()];
    let mut lambda_h = vec![0.0; p.h.len()];
    let mut gamma = vec![0.0; n];
    if !out.is_feasible() {
        return Ok(StationarityCertificate {
            condition,
            verdict: Verdict::Fails,
            i: i_set.clone(),
            lambda_g,
            lambda_h,
            gamma,
            stationarity_residual: f64::NAN,
            complementarity_residual: f64::NAN,
            full: None,
            kkt: None,
            farkas: out.certificate,
        });
    }
    let mut col = 0;
    for &k in &active {
        lambda_g[k] = out.x[col];
        col += 1;
    }
    for v in lambda_h.iter_mut() {
        *v = out.x[col];
        col += 1;
    }
    for i in i_set.iter() {
        gamma[i] = out.x[col];
        col += 1;
    }
    let (stat, comp) = reduced_residuals(p, x, &lambda_g, &lambda_h, &gamma);
    let min_lambda = lambda_g.iter().fold(0.0_f64, |m, &v| m.min(v));
    if stat > tol.cert || comp > tol.cert || min_lambda < -tol.cert {
        return Err(Error::Internal(format!(
            "multiplier system reported feasible but residuals are {stat:e} / {comp:e}"
        )));
    }
    Ok(StationarityCertificate {
        condition,
        verdict: Verdict::Holds,
        i: i_set.clone(),
        lambda_g,
        lambda_h,
        gamma,
        stationarity_residual: stat,
        complementarity_residual: comp,
        full: None,
        kkt: None,
        farkas: None,
    })
}

/// `(||reduced gradient||_inf, |lambda_g' g(x)|)`.
pub fn reduced_residuals(
    p: &Problem,
    x: &[f64],
    lambda_g: &[f64],
    lambda_h: &[f64],
    gamma: &[f64],
) -> (f64, f64) {
    let mut r = p.objective.grad(x);
    let mut comp = 0.0;
    for (g, &l) in p.g.iter().zip(lambda_g) {
        if l != 0.0 {
            for (ri, gi) in r.iter_mut().zip(g.grad(x)) {
                *ri += l * gi;
            }
            comp += l * g.eval(x);
        }
    }
    for (h, &l) in p.h.iter().zip(lambda_h) {
        if l != 0.0 {
            for (ri, gi) in r.iter_mut().zip(h.grad(x)) {
                *ri += l * gi;
            }
        }
    }
    for (ri, gi) in r.iter_mut().zip(gamma) {
        *ri += gi;
    }
    (norm_inf(&r), f64::abs(comp))
}

/// Outcome of the KKT system of a reformulated problem at `z`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReformulatedKkt {
    pub holds: bool,
    /// one entry per inequality row, zero on inactive rows
    pub ineq: Vec<f64>,
    /// one entry per equality row
    pub eq: Vec<f64>,
    pub residuals: KktResiduals,
    pub farkas: Option<Vec<f64>>,
}

/// Solves the KKT multiplier system of `rp` at `z` as a linear feasibility problem.
pub fn kkt_at(rp: &ReformulatedProblem, z: &[f64], tol: &Tolerances) -> Result<ReformulatedKkt> {
    let dim = rp.num_vars();
    if z.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: z.len(),
        });
    }
    let active: Vec<usize> = (0..rp.inequalities.len())
        .filter(|&k| rp.inequalities[k].expr.eval(z) >= -tol.feas)
        .collect();
    let mut cols = Vec::new();
    let mut signs = Vec::new();
    for &k in &active {
        cols.push(rp.inequalities[k].expr.grad(z));
        signs.push(Sign::Nonnegative);
    }
    for c in &rp.equalities {
        cols.push(c.expr.grad(z));
        signs.push(Sign::Free);
    }
    let a: Vec<Vec<f64>> = (0..dim).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    let b: Vec<f64> = rp.objective.grad(z).iter().map(|v| -v).collect();
    let out = linear_feasibility(a, b, signs, tol.lp)?;
    let mut ineq = vec![0.0; rp.inequalities.len()];
    let mut eq = vec![0.0; rp.equalities.len()];
    if !out.is_feasible() {
        return Ok(ReformulatedKkt {
            holds: false,
            ineq,
            eq,
            residuals: KktResiduals::default(),
            farkas: out.certificate,
        });
    }
    for (c, &k) in active.iter().enumerate() {
        ineq[k] = out.x[c];
    }
    eq.copy_from_slice(&out.x[active.len()..]);
    let residuals = kkt_residuals(rp, z, &ineq, &eq);
    if residuals.max() > tol.cert {
        return Err(Error::Internal(format!(
            "KKT system reported feasible but residual is {:e}",
            residuals.max()
        )));
    }
    Ok(ReformulatedKkt {
        holds: true,
        ineq,
        eq,
        residuals,
        farkas: None,
    })
}

/// Residuals of the KKT conditions of `rp` at `z` for given multipliers.
pub fn kkt_residuals(rp: &ReformulatedProblem, z: &[f64], ineq: &[f64], eq: &[f64]) -> KktResiduals {
    let n = rp.n;
    let mut r = rp.objective.grad(z);
    let mut sign: f64 = 0.0;
    let mut comp: f64 = 0.0;
    for (c, &l) in rp.inequalities.iter().zip(ineq) {
        if l != 0.0 {
            for (ri, gi) in r.iter_mut().zip(c.expr.grad(z)) {
                *ri += l * gi;
            }
        }
        sign = sign.max(-l);
        comp = comp.max((l * c.expr.eval(z)).abs());
    }
    for (c, &l) in rp.equalities.iter().zip(eq) {
        if l != 0.0 {
            for (ri, gi) in r.iter_mut().zip(c.expr.grad(z)) {
                *ri += l * gi;
            }
        }
    }
    KktResiduals {
        stationarity_x: norm_inf(&r[..n]),
        stationarity_y: norm_inf(&r[n..]),
        sign,
        complementarity: comp,
    }
}

/// KKT of the relaxed problem, decided twice: directly over `(x, y)` and through
/// S-stationarity. The two verdicts must agree.
pub fn check_kkt_relaxed(
    p: &Problem,
    pt: &PairPoint,
    tol: &Tolerances,
) -> Result<StationarityCertificate> {
    let s = check_s_stationary(p, pt, tol)?;
    let rp = build_relaxed(p);
    let z = pt.stacked()?;
    let direct = kkt_at(&rp, &z, tol)?;
    if direct.holds != s.verdict.holds() {
        return Err(Error::Internal(format!(
            "relaxed KKT verdict ({}) disagrees with S-stationarity ({})",
            direct.holds,
            s.verdict.holds()
        )));
    }
    let n = p.n;
    let kkt = direct.holds.then(|| {
        let mut m = RelaxedKktMultipliers {
            lambda_g: vec![0.0; p.g.len()],
            lambda_h: vec![0.0; p.h.len()],
            lambda_theta: 0.0,
            mu: vec![0.0; n],
            lambda_upper: vec![0.0; n],
            lambda_xi: vec![0.0; n],
            residuals: direct.residuals,
        };
        for (c, &l) in rp.inequalities.iter().zip(&direct.ineq) {
            match c.kind {
                ConstraintKind::G(k) => m.lambda_g[k] = l,
                ConstraintKind::Theta => m.lambda_theta = l,
                ConstraintKind::Lower(i) => m.mu[i] = l,
                ConstraintKind::Upper(i) => m.lambda_upper[i] = l,
                _ => {}
            }
        }
        for (c, &l) in rp.equalities.iter().zip(&direct.eq) {
            match c.kind {
                ConstraintKind::Eq(k) => m.lambda_h[k] = l,
                ConstraintKind::Xi(i) => m.lambda_xi[i] = l,
                _ => {}
            }
        }
        m
    });
    Ok(StationarityCertificate {
        condition: Condition::KktRelaxed,
        verdict: s.verdict,
        farkas: if direct.holds { None } else { direct.farkas },
        kkt,
        ..s
    })
}

/// Lifts a reduced holds-certificate to the tightened problem's multipliers
/// (`lambda_G = gamma`, everything on `theta`, `H`, `H~` zero) and verifies them
/// against the tightened KKT system.
pub fn recover_full_multipliers(
    p: &Problem,
    pt: &PairPoint,
    cert: &StationarityCertificate,
    tol: &Tolerances,
) -> Result<StationarityCertificate> {
    if !cert.verdict.holds() {
        return Err(Error::InvalidProblem(
            "full multipliers exist only for a certificate that holds".into(),
        ));
    }
    let n = p.n;
    let rp = build_tightened(p, pt, &cert.i, tol)?;
    let z = pt.stacked()?;
    let mut full = FullMultipliers {
        lambda_theta: 0.0,
        lambda_lower: vec![0.0; n],
        lambda_upper: vec![0.0; n],
        lambda_zero: cert.gamma.clone(),
        residuals: KktResiduals::default(),
    };
    let pick = |kind: ConstraintKind| -> f64 {
        match kind {
            ConstraintKind::G(k) => cert.lambda_g[k],
            ConstraintKind::Eq(k) => cert.lambda_h[k],
            ConstraintKind::Theta => full.lambda_theta,
            ConstraintKind::Lower(i) => full.lambda_lower[i],
            ConstraintKind::Upper(i) => full.lambda_upper[i],
            ConstraintKind::Zero(i) => full.lambda_zero[i],
            ConstraintKind::Xi(_) => 0.0,
        }
    };
    let ineq: Vec<f64> = rp.inequalities.iter().map(|c| pick(c.kind)).collect();
    let eq: Vec<f64> = rp.equalities.iter().map(|c| pick(c.kind)).collect();
    let residuals = kkt_residuals(&rp, &z, &ineq, &eq);
    if residuals.max() > tol.cert {
        return Err(Error::Internal(format!(
            "recovered multipliers violate the tightened KKT system (residual {:e})",
            residuals.max()
        )));
    }
    full.residuals = residuals;
    Ok(StationarityCertificate {
        full: Some(full),
        ..cert.clone()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileEntry {
    #[serde(rename = "I")]
    pub i: Indices,
    pub verdict: Verdict,
}

/// `W(I)` verdicts over every admissible `I`, in size-then-lex order of `I \ I_min`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationarityProfile {
    pub i_min: Indices,
    pub i_max: Indices,
    pub entries: Vec<ProfileEntry>,
    pub minimal: Vec<Indices>,
}

impl StationarityProfile {
    pub fn verdict(&self, i: &Indices) -> Option<Verdict> {
        self.entries.iter().find(|e| &e.i == i).map(|e| e.verdict)
    }
}

pub const DEFAULT_PROFILE_CAP: usize = 12;

pub fn stationarity_profile(
    p: &Problem,
    pt: &PairPoint,
    cap: usize,
    tol: &Tolerances,
) -> Result<StationarityProfile> {
    let sets = checked_sets(p, pt, tol)?;
    let k = sets.i00.len();
    if k > cap {
        return Err(Error::CapExceeded {
            what: "|I_00|",
            size: k,
            cap,
        });
    }
    let i_min = sets.i_min();
    let free = sets.i00.clone();
    let subsets = free.subsets_by_size();
    let verdicts: Vec<Verdict> = subsets
        .par_iter()
        .map(|z| {
            let i = i_min.union(z);
            w_certificate(p, pt, &i, Condition::W, tol).map(|c| c.verdict)
        })
        .collect::<Result<Vec<_>>>()?;

    // masks over positions in `free`
    let pos = |z: &Indices| -> usize {
        z.iter()
            .map(|i| 1usize << free.as_slice().binary_search(&i).unwrap())
            .sum()
    };
    let mut by_mask = vec![Verdict::Fails; 1 << k];
    for (z, v) in subsets.iter().zip(&verdicts) {
        by_mask[pos(z)] = *v;
    }
    for mask in 0..(1usize << k) {
        if by_mask[mask].holds() {
            for b in 0..k {
                if by_mask[mask | (1 << b)] == Verdict::Fails {
                    return Err(Error::Internal(format!(
                        "stationarity profile is not up-closed at I = {}",
                        i_min.union(&subsets.iter().find(|z| pos(z) == mask).unwrap().clone())
                    )));
                }
            }
        }
    }
    let mut entries = Vec::with_capacity(subsets.len());
    let mut minimal = Vec::new();
    for (z, v) in subsets.iter().zip(&verdicts) {
        let i = i_min.union(z);
        let mask = pos(z);
        if v.holds() && (0..k).all(|b| mask & (1 << b) == 0 || !by_mask[mask & !(1 << b)].holds()) {
            minimal.push(i.clone());
        }
        entries.push(ProfileEntry { i, verdict: *v });
    }
    Ok(StationarityProfile {
        i_min,
        i_max: sets.i_max(),
        entries,
        minimal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    /// min x1 + x2 s.t. -x1 + x2^2 <= 0, ||x||_0 <= 1
    fn counterexample() -> (Problem, PairPoint) {
        let p = Problem::new(
            "counterexample",
            2,
            1,
            parse_expr("(+ x1 x2)", 2).unwrap(),
            vec![parse_expr("(+ (neg x1) (^ x2 2))", 2).unwrap()],
            vec![],
        )
        .unwrap();
        let pt = PairPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        (p, pt)
    }

    /// min sum x_i s.t. g_i = -x_i + x_n^2 <= 0 (i < n), ||x||_0 <= n - 1
    fn family(n: usize) -> (Problem, PairPoint) {
        let f = Expr::affine(vec![1.0; n], 0.0);
        let g = (0..n - 1)
            .map(|i| {
                Expr::sum(vec![
                    Expr::neg(Expr::var(i)),
                    Expr::pow(Expr::var(n - 1), 2),
                ])
            })
            .collect();
        let p = Problem::new(format!("family{n}"), n, n - 1, f, g, vec![]).unwrap();
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        (p, PairPoint::new(vec![0.0; n], y).unwrap())
    }

    use crate::expr::Expr;

    #[test]
    fn counterexample_ladder() {
        let (p, pt) = counterexample();
        assert!(!check_kkt_relaxed(&p, &pt, &tol()).unwrap().verdict.holds());
        assert!(!check_s_stationary(&p, &pt, &tol()).unwrap().verdict.holds());
        let m = check_m_stationary(&p, &pt, &tol()).unwrap();
        assert!(m.verdict.holds());
        assert!(m.stationarity_residual <= 1e-7);
        let prof = stationarity_profile(&p, &pt, 12, &tol()).unwrap();
        assert_eq!(prof.minimal, vec![Indices::new(vec![0, 1])]);
        assert_eq!(prof.entries.len(), 2);
    }

    #[test]
    fn failing_certificate_carries_farkas() {
        let (p, pt) = counterexample();
        let s = check_s_stationary(&p, &pt, &tol()).unwrap();
        let w = s.farkas.expect("certificate");
        // w' (-grad f) > 0 and w' A <= 0 on the lambda_g column, = 0 on gamma_1
        let grad_f = [1.0, 1.0];
        assert!(-(w[0] * grad_f[0] + w[1] * grad_f[1]) > 0.0);
        assert!(-w[0] <= 1e-12);
        assert!(w[0].abs() <= 1e-12);
    }

    #[test]
    fn family_needs_last_index() {
        let (p, pt) = family(3);
        let c = check_w_stationary(&p, &pt, &Indices::new(vec![0, 2]), &tol()).unwrap();
        assert!(c.verdict.holds());
        assert_eq!(c.lambda_g, vec![1.0, 1.0]);
        assert_eq!(c.gamma, vec![0.0, 0.0, -1.0]);
        let c = check_w_stationary(&p, &pt, &Indices::new(vec![0, 1]), &tol()).unwrap();
        assert!(!c.verdict.holds());
        let prof = stationarity_profile(&p, &pt, 12, &tol()).unwrap();
        assert_eq!(prof.minimal, vec![Indices::new(vec![0, 2])]);
    }

    #[test]
    fn full_multipliers_verify() {
        let (p, pt) = family(4);
        let c = check_m_stationary(&p, &pt, &tol()).unwrap();
        let full = recover_full_multipliers(&p, &pt, &c, &tol()).unwrap();
        let fm = full.full.unwrap();
        assert_eq!(fm.lambda_theta, 0.0);
        assert!(fm.lambda_lower.iter().all(|&v| v == 0.0));
        assert_eq!(fm.lambda_zero, c.gamma);
        assert!(fm.residuals.max() <= 1e-7);
        let (p, pt) = counterexample();
        let s = check_s_stationary(&p, &pt, &tol()).unwrap();
        assert!(recover_full_multipliers(&p, &pt, &s, &tol()).is_err());
    }

    #[test]
    fn unconstrained_zero_gradient() {
        let p = Problem::new(
            "bowl",
            2,
            1,
            parse_expr("(+ (^ x1 2) (^ x2 2))", 2).unwrap(),
            vec![],
            vec![],
        )
        .unwrap();
        let pt = PairPoint::new(vec![0.0, 0.0], vec![0.5, 0.5]).unwrap();
        let k = check_kkt_relaxed(&p, &pt, &tol()).unwrap();
        assert!(k.verdict.holds());
        assert!(k.lambda_g.is_empty() && k.gamma.iter().all(|&v| v == 0.0));
        let km = k.kkt.unwrap();
        assert_eq!(km.lambda_theta, 0.0);
    }

    #[test]
    fn free_space_gamma_is_negative_gradient() {
        // f = 3 x1 - 2 x2 + x3^2, X = R^3, pt x = 0, y = (1, 1, 0): I = {1, 2, 3}
        let p = Problem::new(
            "free",
            3,
            2,
            parse_expr("(+ (* 3 x1) (neg (* 2 x2)) (^ x3 2))", 3).unwrap(),
            vec![],
            vec![],
        )
        .unwrap();
        let pt = PairPoint::new(vec![0.0; 3], vec![1.0, 1.0, 0.0]).unwrap();
        let c = check_m_stationary(&p, &pt, &tol()).unwrap();
        assert!(c.verdict.holds());
        assert_eq!(c.gamma, vec![-3.0, 2.0, 0.0]);
    }

    #[test]
    fn range_and_feasibility_errors() {
        let (p, pt) = counterexample();
        assert!(matches!(
            check_w_stationary(&p, &pt, &Indices::new(vec![1]), &tol()),
            Err(Error::IndexRange { .. })
        ));
        let bad = PairPoint::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            check_s_stationary(&p, &bad, &tol()),
            Err(Error::InfeasiblePoint(_))
        ));
    }

    #[test]
    fn certificate_json_field_names() {
        let (p, pt) = family(3);
        let c = check_w_stationary(&p, &pt, &Indices::new(vec![0, 2]), &tol()).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        for key in ["condition", "verdict", "I", "lambda_g", "lambda_h", "gamma"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["I"], serde_json::json!([1, 3]));
        assert_eq!(v["verdict"], "holds");
    }
}
