//! Problem representation, index-set classification and the three reformulations.
//!
//! A reformulated problem lives on `2n` variables: `x` occupies indices `0..n`
//! and `y_i` is variable `n + i`. All constraint functions are ordinary
//! [`Expr`] trees so evaluation and gradients are shared with the original
//! problem data.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::indices::Indices;
use crate::tol::Tolerances;

/// An MPCaC instance: minimize `f(x)` over `g(x) <= 0`, `h(x) = 0`, `||x||_0 <= alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub name: String,
    pub n: usize,
    pub alpha: usize,
    pub objective: Expr,
    pub g: Vec<Expr>,
    pub h: Vec<Expr>,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        alpha: usize,
        objective: Expr,
        g: Vec<Expr>,
        h: Vec<Expr>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidProblem("n must be positive".into()));
        }
        if alpha == 0 {
            return Err(Error::InvalidProblem("alpha must be a positive integer".into()));
        }
        if alpha >= n {
            return Err(Error::InvalidProblem(format!(
                "alpha = {alpha} must be strictly smaller than n = {n} (otherwise the cardinality constraint has no effect)"
            )));
        }
        let check = |e: &Expr, what: String| -> Result<()> {
            match e.max_var() {
                Some(v) if v >= n => Err(Error::InvalidProblem(format!(
                    "{what} references x{} but n = {n}",
                    v + 1
                ))),
                _ => Ok(()),
            }
        };
        check(&objective, "objective".into())?;
        for (i, e) in g.iter().enumerate() {
            check(e, format!("g{}", i + 1))?;
        }
        for (i, e) in h.iter().enumerate() {
            check(e, format!("h{}", i + 1))?;
        }
        Ok(Problem {
            name: name.into(),
            n,
            alpha,
            objective,
            g,
            h,
        })
    }

    /// True when every `g` and `h` is affine.
    pub fn has_affine_constraints(&self) -> bool {
        self.g.iter().chain(&self.h).all(Expr::is_affine)
    }

    /// Every expression of the instance, objective first.
    pub fn expressions(&self) -> impl Iterator<Item = &Expr> {
        std::iter::once(&self.objective).chain(&self.g).chain(&self.h)
    }

    /// Same constraints, objective replaced.
    pub fn with_objective(&self, objective: Expr) -> Problem {
        Problem {
            objective,
            ..self.clone()
        }
    }
}

/// Candidate point: `x` alone for the original problem, `(x, y)` for the reformulations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairPoint {
    pub x: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
}

impl PairPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: y.len(),
            });
        }
        Ok(PairPoint { x, y: Some(y) })
    }

    pub fn x_only(x: Vec<f64>) -> Self {
        PairPoint { x, y: None }
    }

    pub fn y(&self) -> Result<&[f64]> {
        self.y.as_deref().ok_or(Error::MissingY)
    }

    /// `(x, y)` concatenated, the variable vector of a reformulated problem.
    pub fn stacked(&self) -> Result<Vec<f64>> {
        let y = self.y()?;
        let mut z = self.x.clone();
        z.extend_from_slice(y);
        Ok(z)
    }
}

/// Sign-pattern classification of `(x_i, y_i)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IndexSets {
    pub i00: Indices,
    pub i_pm0: Indices,
    pub i0pm: Indices,
    pub i0plus: Indices,
    pub i0gt: Indices,
    pub i01: Indices,
    pub i0: Indices,
}

impl IndexSets {
    /// Smallest admissible tightening set, `I_0+ ∪ I_01`.
    pub fn i_min(&self) -> Indices {
        self.i0plus.union(&self.i01)
    }

    /// Largest admissible tightening set, `I_0`.
    pub fn i_max(&self) -> Indices {
        self.i0.clone()
    }

    pub fn strict_complementarity(&self) -> bool {
        self.i00.is_empty()
    }

    /// Checks `I_min ⊆ i ⊆ I_max`.
    pub fn check_admissible(&self, i: &Indices) -> Result<()> {
        let (min, max) = (self.i_min(), self.i_max());
        if min.is_subset(i) && i.is_subset(&max) {
            Ok(())
        } else {
            Err(Error::IndexRange {
                given: i.clone(),
                min,
                max,
            })
        }
    }
}

/// Classifies every index of a pair point with zero tolerance `tau`.
pub fn index_sets(pt: &PairPoint, tau: f64) -> Result<IndexSets> {
    let y = pt.y()?;
    let mut s = IndexSets::default();
    let (mut i00, mut i_pm0, mut i0pm, mut i0plus, mut i0gt, mut i01) =
        (vec![], vec![], vec![], vec![], vec![], vec![]);
    for (i, (&xi, &yi)) in pt.x.iter().zip(y).enumerate() {
        let zx = xi.abs() <= tau;
        let zy = yi.abs() <= tau;
        match (zx, zy) {
            (true, true) => i00.push(i),
            (false, true) => i_pm0.push(i),
            (true, false) => {
                i0pm.push(i);
                if yi > 0.0 {
                    i0gt.push(i);
                    if (yi - 1.0).abs() <= tau {
                        i01.push(i);
                    } else if yi < 1.0 {
                        i0plus.push(i);
                    }
                }
            }
            (false, false) => return Err(Error::NotComplementary { index: i + 1 }),
        }
    }
    s.i00 = Indices::new(i00);
    s.i_pm0 = Indices::new(i_pm0);
    s.i0pm = Indices::new(i0pm);
    s.i0plus = Indices::new(i0plus);
    s.i0gt = Indices::new(i0gt);
    s.i01 = Indices::new(i01);
    s.i0 = s.i00.union(&s.i0pm);
    Ok(s)
}

/// `(I_min, I_max)` of admissible tightening sets at `pt`.
pub fn admissible_i_range(pt: &PairPoint, tau: f64) -> Result<(Indices, Indices)> {
    let s = index_sets(pt, tau)?;
    Ok((s.i_min(), s.i_max()))
}

/// Number of components with `|x_i| > tau`.
pub fn cardinality(x: &[f64], tau: f64) -> usize {
    x.iter().filter(|v| v.abs() > tau).count()
}

/// Canonical binary `y` for `x` (`y_i = 1` iff `x_i = 0`) and whether it is the only
/// feasible choice, which happens exactly when `||x||_0 = alpha`.
pub fn companion_y(x: &[f64], alpha: usize, tau: f64) -> Result<(Vec<f64>, bool)> {
    let count = cardinality(x, tau);
    if count > alpha {
        return Err(Error::Cardinality { count, alpha });
    }
    let y = x
        .iter()
        .map(|v| if v.abs() <= tau { 1.0 } else { 0.0 })
        .collect();
    Ok((y, count == alpha))
}

/// Largest constraint violation of `x` for the original problem (cardinality excluded).
pub fn constraint_violation(p: &Problem, x: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for g in &p.g {
        worst = worst.max(g.eval(x));
    }
    for h in &p.h {
        worst = worst.max(h.eval(x).abs());
    }
    worst
}

pub fn is_feasible_mpcac(p: &Problem, x: &[f64], tol: &Tolerances) -> bool {
    x.len() == p.n
        && constraint_violation(p, x) <= tol.feas
        && cardinality(x, tol.zero) <= p.alpha
}

/// Largest violation of the relaxed constraints at `pt`.
pub fn relaxed_violation(p: &Problem, pt: &PairPoint) -> Result<f64> {
    let y = pt.y()?;
    if pt.x.len() != p.n || y.len() != p.n {
        return Err(Error::Dimension {
            expected: p.n,
            got: pt.x.len().min(y.len()),
        });
    }
    let mut worst = constraint_violation(p, &pt.x);
    let theta = (p.n - p.alpha) as f64 - y.iter().sum::<f64>();
    worst = worst.max(theta);
    for (xi, yi) in pt.x.iter().zip(y) {
        worst = worst.max(-yi).max(yi - 1.0).max((xi * yi).abs());
    }
    Ok(worst)
}

pub fn is_feasible_relaxed(p: &Problem, pt: &PairPoint, tol: &Tolerances) -> bool {
    matches!(relaxed_violation(p, pt), Ok(v) if v <= tol.feas)
}

/// Which function a reformulated constraint row represents. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum ConstraintKind {
    /// original inequality `g_i`
    G(usize),
    /// original equality `h_i`
    Eq(usize),
    /// `n - alpha - e'y`
    Theta,
    /// `-y_i`
    Lower(usize),
    /// `y_i - 1`
    Upper(usize),
    /// `x_i y_i`
    Xi(usize),
    /// `x_i`
    Zero(usize),
}

impl ConstraintKind {
    pub fn label(&self) -> String {
        match self {
            ConstraintKind::G(i) => format!("g{}", i + 1),
            ConstraintKind::Eq(i) => format!("h{}", i + 1),
            ConstraintKind::Theta => "theta".into(),
            ConstraintKind::Lower(i) => format!("H{}", i + 1),
            ConstraintKind::Upper(i) => format!("Htilde{}", i + 1),
            ConstraintKind::Xi(i) => format!("xi{}", i + 1),
            ConstraintKind::Zero(i) => format!("G{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReformulationKind {
    Relaxed,
    MixedInteger,
    Tightened { point: PairPoint, i: Indices },
}

/// A reformulation materialized over `2n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct ReformulatedProblem {
    pub kind: ReformulationKind,
    pub name: String,
    pub n: usize,
    pub alpha: usize,
    pub objective: Expr,
    /// rows `c(z) <= 0`
    pub inequalities: Vec<Constraint>,
    /// rows `c(z) = 0`
    pub equalities: Vec<Constraint>,
    /// integrality flag per variable
    pub binary: Vec<bool>,
}

impl ReformulatedProblem {
    pub fn num_vars(&self) -> usize {
        2 * self.n
    }

    /// Largest constraint violation (integrality ignored).
    pub fn violation(&self, z: &[f64]) -> f64 {
        let ineq = self
            .inequalities
            .iter()
            .map(|c| c.expr.eval(z))
            .fold(0.0_f64, f64::max);
        self.equalities
            .iter()
            .map(|c| c.expr.eval(z).abs())
            .fold(ineq, f64::max)
    }

    /// Drops integrality flags, leaving the constraint lists untouched.
    pub fn relax_binaries(&self) -> ReformulatedProblem {
        let mut out = self.clone();
        out.binary = vec![false; out.num_vars()];
        if out.kind == ReformulationKind::MixedInteger {
            out.kind = ReformulationKind::Relaxed;
        }
        out
    }

    pub fn var_name(&self, v: usize) -> String {
        if v < self.n {
            format!("x{}", v + 1)
        } else {
            format!("y{}", v - self.n + 1)
        }
    }

    fn render_constraint(&self, c: &Constraint, equality: bool) -> String {
        let n = self.n;
        let name = |v: usize| self.var_name(v);
        match c.kind {
            ConstraintKind::Theta => {
                let ys: Vec<String> = (0..n).map(|i| format!("y{}", i + 1)).collect();
                format!("{} >= {}", ys.join(" + "), n - self.alpha)
            }
            ConstraintKind::Lower(i) if equality => format!("y{} = 0", i + 1),
            ConstraintKind::Lower(i) => format!("y{} >= 0", i + 1),
            ConstraintKind::Upper(i) => format!("y{} <= 1", i + 1),
            ConstraintKind::Xi(i) => format!("x{}*y{} = 0", i + 1, i + 1),
            ConstraintKind::Zero(i) => format!("x{} = 0", i + 1),
            _ => format!(
                "{} {} 0",
                c.expr.infix(&name),
                if equality { "=" } else { "<=" }
            ),
        }
    }
}

impl fmt::Display for ReformulatedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let title = match &self.kind {
            ReformulationKind::Relaxed => "relaxed problem".to_string(),
            ReformulationKind::MixedInteger => "mixed-integer problem".to_string(),
            ReformulationKind::Tightened { i, .. } => format!("I-tightened problem, I = {i}"),
        };
        writeln!(f, "{title} for {} (n = {}, alpha = {})", self.name, self.n, self.alpha)?;
        writeln!(f, "minimize_(x,y)  {}", self.objective.infix(&|v| self.var_name(v)))?;
        writeln!(f, "subject to")?;
        for c in &self.inequalities {
            writeln!(f, "  {:<8} {}", c.kind.label(), self.render_constraint(c, false))?;
        }
        for c in &self.equalities {
            writeln!(f, "  {:<8} {}", c.kind.label(), self.render_constraint(c, true))?;
        }
        for (v, &b) in self.binary.iter().enumerate() {
            if b {
                writeln!(f, "  {:<8} {} in {{0,1}}", "", self.var_name(v))?;
            }
        }
        Ok(())
    }
}

fn unit_affine(dim: usize, at: usize, coeff: f64, offset: f64) -> Expr {
    let mut c = vec![0.0; dim];
    c[at] = coeff;
    Expr::affine(c, offset)
}

fn theta_expr(n: usize, alpha: usize) -> Expr {
    let mut c = vec![0.0; 2 * n];
    for v in c.iter_mut().skip(n) {
        *v = -1.0;
    }
    Expr::affine(c, (n - alpha) as f64)
}

fn lower(n: usize, i: usize) -> Expr {
    unit_affine(2 * n, n + i, -1.0, 0.0)
}

fn upper(n: usize, i: usize) -> Expr {
    unit_affine(2 * n, n + i, 1.0, -1.0)
}

fn base_rows(p: &Problem) -> (Vec<Constraint>, Vec<Constraint>) {
    let ineq = p
        .g
        .iter()
        .enumerate()
        .map(|(i, e)| Constraint {
            kind: ConstraintKind::G(i),
            expr: e.clone(),
        })
        .collect();
    let eq = p
        .h
        .iter()
        .enumerate()
        .map(|(i, e)| Constraint {
            kind: ConstraintKind::Eq(i),
            expr: e.clone(),
        })
        .collect();
    (ineq, eq)
}

/// Continuous reformulation with `0 <= y <= e`, `e'y >= n - alpha`, `x_i y_i = 0`.
pub fn build_relaxed(p: &Problem) -> ReformulatedProblem {
    let n = p.n;
    let (mut ineq, mut eq) = base_rows(p);
    ineq.push(Constraint {
        kind: ConstraintKind::Theta,
        expr: theta_expr(n, p.alpha),
    });
    for i in 0..n {
        ineq.push(Constraint {
            kind: ConstraintKind::Lower(i),
            expr: lower(n, i),
        });
    }
    for i in 0..n {
        ineq.push(Constraint {
            kind: ConstraintKind::Upper(i),
            expr: upper(n, i),
        });
    }
    for i in 0..n {
        eq.push(Constraint {
            kind: ConstraintKind::Xi(i),
            expr: Expr::product(vec![Expr::var(i), Expr::var(n + i)]),
        });
    }
    ReformulatedProblem {
        kind: ReformulationKind::Relaxed,
        name: p.name.clone(),
        n,
        alpha: p.alpha,
        objective: p.objective.clone(),
        inequalities: ineq,
        equalities: eq,
        binary: vec![false; 2 * n],
    }
}

/// The relaxed constraint lists with every `y_i` flagged binary.
pub fn build_mixed_integer(p: &Problem) -> ReformulatedProblem {
    let mut r = build_relaxed(p);
    r.kind = ReformulationKind::MixedInteger;
    for b in r.binary.iter_mut().skip(p.n) {
        *b = true;
    }
    r
}

/// The I-tightened problem at a relaxed-feasible point.
pub fn build_tightened(
    p: &Problem,
    pt: &PairPoint,
    i_set: &Indices,
    tol: &Tolerances,
) -> Result<ReformulatedProblem> {
    let viol = relaxed_violation(p, pt)?;
    if viol > tol.feas {
        return Err(Error::InfeasiblePoint(format!(
            "relaxed constraint violation {viol:e} exceeds {:e}",
            tol.feas
        )));
    }
    let sets = index_sets(pt, tol.zero)?;
    sets.check_admissible(i_set)?;
    let n = p.n;
    let (mut ineq, mut eq) = base_rows(p);
    ineq.push(Constraint {
        kind: ConstraintKind::Theta,
        expr: theta_expr(n, p.alpha),
    });
    for i in 0..n {
        ineq.push(Constraint {
            kind: ConstraintKind::Upper(i),
            expr: upper(n, i),
        });
    }
    for i in sets.i_min().iter() {
        ineq.push(Constraint {
            kind: ConstraintKind::Lower(i),
            expr: lower(n, i),
        });
    }
    for i in sets.i00.union(&sets.i_pm0).iter() {
        eq.push(Constraint {
            kind: ConstraintKind::Lower(i),
            expr: lower(n, i),
        });
    }
    for i in i_set.iter() {
        eq.push(Constraint {
            kind: ConstraintKind::Zero(i),
            expr: Expr::var(i),
        });
    }
    Ok(ReformulatedProblem {
        kind: ReformulationKind::Tightened {
            point: pt.clone(),
            i: i_set.clone(),
        },
        name: p.name.clone(),
        n,
        alpha: p.alpha,
        objective: p.objective.clone(),
        inequalities: ineq,
        equalities: eq,
        binary: vec![false; 2 * n],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn ex41() -> Problem {
        Problem::new(
            "ex4.1",
            2,
            1,
            parse_expr("(+ x1 x2)", 2).unwrap(),
            vec![parse_expr("(+ (neg x1) (^ x2 2))", 2).unwrap()],
            vec![],
        )
        .unwrap()
    }

    fn free(n: usize, alpha: usize) -> Problem {
        Problem::new("free", n, alpha, Expr::constant(0.0), vec![], vec![]).unwrap()
    }

    #[test]
    fn alpha_must_be_below_n() {
        let e = Problem::new("bad", 2, 2, Expr::constant(0.0), vec![], vec![]).unwrap_err();
        assert!(e.to_string().contains("strictly smaller than n"));
        assert!(Problem::new("bad", 2, 0, Expr::constant(0.0), vec![], vec![]).is_err());
        assert!(Problem::new("bad", 2, 1, Expr::var(2), vec![], vec![]).is_err());
    }

    #[test]
    fn index_sets_examples() {
        let tau = 1e-9;
        let s = index_sets(&PairPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(), tau).unwrap();
        assert_eq!(s.i01, Indices::new(vec![0]));
        assert_eq!(s.i00, Indices::new(vec![1]));
        assert!(s.i0plus.is_empty() && s.i_pm0.is_empty());
        assert_eq!(s.i0, Indices::new(vec![0, 1]));

        let n = 5;
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        let s = index_sets(&PairPoint::new(vec![0.0; n], y).unwrap(), tau).unwrap();
        assert_eq!(s.i0, (0..n).collect());
        assert_eq!(s.i01, Indices::new(vec![0]));
        assert_eq!(s.i00, (1..n).collect());
        assert!(s.i0plus.is_empty());

        let s = index_sets(&PairPoint::new(vec![1.0, 1.0], vec![0.0, 0.0]).unwrap(), tau).unwrap();
        assert_eq!(s.i_pm0, Indices::new(vec![0, 1]));
        assert!(s.i0.is_empty() && s.i00.is_empty() && s.i0pm.is_empty());

        assert!(matches!(
            index_sets(&PairPoint::x_only(vec![0.0]), tau),
            Err(Error::MissingY)
        ));
        assert!(matches!(
            index_sets(&PairPoint::new(vec![1.0], vec![0.5]).unwrap(), tau),
            Err(Error::NotComplementary { index: 1 })
        ));
    }

    #[test]
    fn index_sets_fractional_and_tolerance() {
        let pt = PairPoint::new(vec![0.0, 1e-12, 2.0], vec![0.5, 1.0 - 1e-12, 0.0]).unwrap();
        let s = index_sets(&pt, 1e-9).unwrap();
        assert_eq!(s.i0plus, Indices::new(vec![0]));
        assert_eq!(s.i01, Indices::new(vec![1]));
        assert_eq!(s.i0gt, Indices::new(vec![0, 1]));
        assert_eq!(s.i_pm0, Indices::new(vec![2]));
    }

    fn count_binary_companions(x: &[f64], alpha: usize) -> usize {
        let n = x.len();
        (0u32..1 << n)
            .filter(|mask| {
                let y: Vec<f64> = (0..n).map(|i| f64::from((mask >> i) & 1)).collect();
                let sum: f64 = y.iter().sum();
                sum >= (n - alpha) as f64 && x.iter().zip(&y).all(|(a, b)| a * b == 0.0)
            })
            .count()
    }

    #[test]
    fn companion_y_examples() {
        let (y, unique) = companion_y(&[0.0, 1.0, 0.0], 2, 1e-9).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 1.0]);
        assert!(!unique);
        assert_eq!(count_binary_companions(&[0.0, 1.0, 0.0], 2), 3);

        let (y, unique) = companion_y(&[3.0, 0.0], 1, 1e-9).unwrap();
        assert_eq!(y, vec![0.0, 1.0]);
        assert!(unique);
        assert_eq!(count_binary_companions(&[3.0, 0.0], 1), 1);

        assert!(matches!(
            companion_y(&[1.0, 1.0], 1, 1e-9),
            Err(Error::Cardinality { count: 2, alpha: 1 })
        ));
    }

    #[test]
    fn relaxed_structure() {
        let r = build_relaxed(&ex41());
        assert_eq!(r.num_vars(), 4);
        let text = r.to_string();
        for needle in [
            "minimize_(x,y)  x1 + x2",
            "-x1 + x2^2 <= 0",
            "y1 + y2 >= 1",
            "x1*y1 = 0",
            "x2*y2 = 0",
            "y1 >= 0",
            "y2 <= 1",
        ] {
            assert!(text.contains(needle), "missing {needle:?} in\n{text}");
        }

        let r3 = build_relaxed(&free(3, 2));
        let theta = &r3.inequalities[0];
        assert_eq!(theta.kind, ConstraintKind::Theta);
        assert_eq!(theta.expr.eval(&[0.0, 0.0, 0.0, 0.2, 0.3, 0.1]), 1.0 - 0.6);
        assert_eq!(r3.inequalities.len(), 1 + 6);
        assert_eq!(r3.equalities.len(), 3);
    }

    #[test]
    fn mixed_integer_relaxes_to_relaxed() {
        let p = ex41();
        let m = build_mixed_integer(&p);
        assert_eq!(m.binary, vec![false, false, true, true]);
        assert!(m.to_string().contains("y1 in {0,1}"));
        assert_eq!(m.relax_binaries(), build_relaxed(&p));
        assert!(m.to_string().contains("y1 + y2 >= 1"));
    }

    #[test]
    fn tightened_structure() {
        let p = ex41();
        let tol = Tolerances::default();
        let pt = PairPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let t = build_tightened(&p, &pt, &Indices::new(vec![0, 1]), &tol).unwrap();
        let ineq: Vec<String> = t.inequalities.iter().map(|c| c.kind.label()).collect();
        let eq: Vec<String> = t.equalities.iter().map(|c| c.kind.label()).collect();
        assert_eq!(ineq, ["g1", "theta", "Htilde1", "Htilde2", "H1"]);
        assert_eq!(eq, ["H2", "G1", "G2"]);

        let e = build_tightened(&p, &pt, &Indices::new(vec![1]), &tol).unwrap_err();
        assert!(matches!(e, Error::IndexRange { .. }));

        let bad = PairPoint::new(vec![1.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(build_tightened(&p, &bad, &Indices::new(vec![1]), &tol).is_err());
    }

    #[test]
    fn tightened_without_i00() {
        let p = free(3, 1);
        let tol = Tolerances::default();
        let pt = PairPoint::new(vec![2.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]).unwrap();
        let s = index_sets(&pt, tol.zero).unwrap();
        assert!(s.i00.is_empty());
        let t = build_tightened(&p, &pt, &s.i_max(), &tol).unwrap();
        let lower_eq: Vec<_> = t
            .equalities
            .iter()
            .filter(|c| matches!(c.kind, ConstraintKind::Lower(_)))
            .map(|c| c.kind)
            .collect();
        assert_eq!(lower_eq, vec![ConstraintKind::Lower(0)]);
    }

    #[test]
    fn admissible_range_examples() {
        let tau = 1e-9;
        let (lo, hi) =
            admissible_i_range(&PairPoint::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap(), tau)
                .unwrap();
        assert_eq!((lo, hi), (Indices::new(vec![0]), Indices::new(vec![0, 1])));
        let (lo, hi) = admissible_i_range(
            &PairPoint::new(vec![0.0; 4], vec![1.0, 0.0, 0.0, 0.0]).unwrap(),
            tau,
        )
        .unwrap();
        assert_eq!((lo, hi), (Indices::new(vec![0]), (0..4).collect()));
        let (lo, hi) =
            admissible_i_range(&PairPoint::new(vec![0.0, 3.0], vec![0.4, 0.0]).unwrap(), tau)
                .unwrap();
        assert_eq!(lo, hi);
    }

    #[test]
    fn feasibility_checks() {
        let tol = Tolerances::default();
        let f = parse_expr("(+ (^ (+ x1 -1) 2) (^ (+ x2 -1) 2) (^ x3 2))", 3).unwrap();
        let g = vec![parse_expr("x1", 3).unwrap()];
        let p21 = Problem::new("ex2.1", 3, 2, f, g.clone(), vec![]).unwrap();
        let t = 0.5;
        let pt = PairPoint::new(vec![0.0, 1.0, 0.0], vec![1.0 - t, 0.0, t]).unwrap();
        assert!(is_feasible_relaxed(&p21, &pt, &tol));
        assert!(is_feasible_mpcac(&p21, &[0.0, 1.0, 0.0], &tol));
        assert!(!is_feasible_mpcac(&p21, &[-1.0, 1.0, 1.0], &tol));
        assert!(!is_feasible_mpcac(&p21, &[1.0, 1.0, 0.0], &tol));

        let p3 = free(3, 2);
        assert!(!is_feasible_mpcac(&p3, &[1.0, 1.0, 1.0], &tol));
        assert!(!is_feasible_relaxed(&p3, &PairPoint::x_only(vec![0.0; 3]), &tol));
    }
}
