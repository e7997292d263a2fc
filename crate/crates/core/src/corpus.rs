//! Built-in worked instances with expected facts, and a runner that checks every fact.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cones::{
    active_gradients_relaxed, check_acq, check_gcq, check_licq, check_mfcq, linearized_cone,
    tangent_cone_pieces, union_equals_cone, Cq, PairSet, PolyhedralCone,
};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::files::{PointDoc, ProblemDoc, FORMAT, REPORT_FORMAT};
use crate::indices::Indices;
use crate::model::{
    build_mixed_integer, build_relaxed, companion_y, index_sets, is_feasible_mpcac,
    is_feasible_relaxed, PairPoint, Problem,
};
use crate::solver::{solve_brute, SolveOptions, SolveReport};
use crate::stationarity::{
    check_kkt_relaxed, check_m_stationary, check_s_stationary, check_w_stationary,
    stationarity_profile, Verdict, DEFAULT_PROFILE_CAP,
};
use crate::tol::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Problem(Problem),
    PairSet(PairSet),
}

/// Which stationarity test a verdict fact refers to.
#[derive(Clone, Debug, PartialEq)]
pub enum Check {
    Kkt,
    S,
    M,
    W(Indices),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Fact {
    RelaxedFeasible { point: usize, expected: bool },
    MixedIntegerFeasible { point: usize, expected: bool },
    MpcacFeasible { point: usize, expected: bool },
    /// uniqueness flag of the companion `y` of the point's `x`
    CompanionUnique { point: usize, expected: bool },
    Range { point: usize, i_min: Indices, i_max: Indices, i00: Indices },
    Stationarity { point: usize, check: Check, expected: Verdict },
    /// `W(I)` holds exactly for the admissible `I` containing `index`
    WIffContains { point: usize, index: usize },
    MinimalSets { point: usize, expected: Vec<Indices> },
    Optimum { x: Vec<f64>, objective: f64 },
    /// the point attains the global optimal value and is relaxed-feasible
    GlobalAtPoint { point: usize },
    /// a global minimizer that is not KKT, so GCQ must fail there
    MinimizerNotKkt { point: usize },
    Cq { point: usize, which: Cq, expected: Verdict },
    TangentEquals { point: usize, eq: Vec<Vec<f64>>, ineq: Vec<Vec<f64>> },
    LinearizedEquals { point: usize, eq: Vec<Vec<f64>>, ineq: Vec<Vec<f64>> },
    /// extreme rays of the tangent union and of the linearized cone, up to positive scaling
    ConeRays { point: usize, tangent: Vec<Vec<f64>>, linearized: Vec<Vec<f64>> },
    /// lines that must appear in the printed relaxed reformulation
    RelaxedText { lines: Vec<String> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusCase {
    pub id: String,
    pub citation: String,
    pub model: Model,
    pub points: Vec<(String, PairPoint)>,
    pub facts: Vec<Fact>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactResult {
    pub fact: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub citation: String,
    pub results: Vec<FactResult>,
    pub passed: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusReport {
    pub format: &'static str,
    pub tolerances: Tolerances,
    pub cases: Vec<CaseReport>,
    pub passed: usize,
    pub failed: usize,
}

impl CorpusReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// One line per fact, grouped by case.
    pub fn table_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            out.push_str(&format!("{}  ({})\n", c.id, c.citation));
            for r in &c.results {
                out.push_str(&format!(
                    "  {}  {}: expected {}, observed {}\n",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.fact,
                    r.expected,
                    r.observed
                ));
            }
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }
}

fn e(text: &str, n: usize) -> Expr {
    parse_expr(text, n).expect("built-in expression parses")
}

fn idx(one_based: &[usize]) -> Indices {
    Indices::from_one_based(one_based).expect("1-based labels")
}

fn pt(x: &[f64], y: &[f64]) -> PairPoint {
    PairPoint::new(x.to_vec(), y.to_vec()).expect("matching lengths")
}

fn problem(name: &str, n: usize, alpha: usize, f: &str, g: &[&str]) -> Problem {
    let g = g.iter().map(|s| e(s, n)).collect();
    Problem::new(name, n, alpha, e(f, n), g, vec![]).expect("built-in problem is valid")
}

fn pair_set(name: &str, ineq: &[&str], eq: &[&str]) -> PairSet {
    let ineq: Vec<Expr> = ineq.iter().map(|s| e(s, 2)).collect();
    let eq: Vec<Expr> = eq.iter().map(|s| e(s, 2)).collect();
    PairSet::from_exprs(name, 1, &ineq, &eq).expect("built-in pair set is affine")
}

/// The counterexample in two variables: `min x1 + x2` s.t. `x2^2 <= x1`, `||x||_0 <= 1`.
pub fn counterexample() -> Problem {
    problem("ex4.1", 2, 1, "(+ x1 x2)", &["(+ (neg x1) (^ x2 2))"])
}

/// `min e'x` s.t. `x_n^2 <= x_i` for `i < n`, `||x||_0 <= n - 1`.
pub fn family(n: usize) -> Problem {
    let f = format!("(+ {})", (1..=n).map(|i| format!("x{i}")).collect::<Vec<_>>().join(" "));
    let g: Vec<String> = (1..n).map(|i| format!("(+ (neg x{i}) (^ x{n} 2))")).collect();
    let g: Vec<&str> = g.iter().map(String::as_str).collect();
    problem(&format!("ex4.3-n{n}"), n, n - 1, &f, &g)
}

pub fn separable_relaxed_pair() -> Problem {
    problem(
        "ex2.1",
        3,
        2,
        "(+ (^ (+ x1 -1) 2) (^ (+ x2 -1) 2) (^ x3 2))",
        &["x1"],
    )
}

pub fn local_pair() -> Problem {
    problem(
        "ex2.2",
        3,
        2,
        "(+ (^ x1 2) (^ (+ x2 -1) 2) (^ (+ x3 -1) 2))",
        &["x1"],
    )
}

/// Every built-in case, in a fixed order.
pub fn cases() -> Vec<CorpusCase> {
    let mut out = vec![
        CorpusCase {
            id: "ex2.1".into(),
            citation: "Example 2.1: (x*,y*) with x*=(0,1,0), y*=(1-t,0,t) is a global solution of the relaxed problem but not mixed-integer feasible for t in (0,1)".into(),
            model: Model::Problem(separable_relaxed_pair()),
            points: vec![
                ("t=0.5".into(), pt(&[0.0, 1.0, 0.0], &[0.5, 0.0, 0.5])),
                ("t=0".into(), pt(&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0])),
            ],
            facts: vec![
                Fact::RelaxedFeasible { point: 0, expected: true },
                Fact::MixedIntegerFeasible { point: 0, expected: false },
                Fact::MixedIntegerFeasible { point: 1, expected: true },
                Fact::MpcacFeasible { point: 0, expected: true },
                Fact::Optimum { x: vec![0.0, 1.0, 0.0], objective: 1.0 },
                Fact::GlobalAtPoint { point: 0 },
                Fact::CompanionUnique { point: 0, expected: false },
                Fact::Cq { point: 0, which: Cq::Gcq, expected: Verdict::Holds },
            ],
        },
        CorpusCase {
            id: "ex2.2".into(),
            citation: "Example 2.2: x*=(0,1,0) with y*=(1-t,0,t) is feasible for the relaxed problem; the cardinality problem with alpha=2 is solved by (0,1,1)".into(),
            model: Model::Problem(local_pair()),
            points: vec![("t=0.5".into(), pt(&[0.0, 1.0, 0.0], &[0.5, 0.0, 0.5]))],
            facts: vec![
                Fact::RelaxedFeasible { point: 0, expected: true },
                Fact::MpcacFeasible { point: 0, expected: true },
                Fact::CompanionUnique { point: 0, expected: false },
                Fact::Optimum { x: vec![0.0, 1.0, 1.0], objective: 0.0 },
            ],
        },
        CorpusCase {
            id: "ex3.1".into(),
            citation: "Example 3.1: x>=0, y>=0, -x+y<=0, xy=0 at the origin has T={d1>=0, d2=0}, D={0<=d2<=d1}, so the polars differ".into(),
            model: Model::PairSet(pair_set("ex3.1", &["(neg x1)", "(neg x2)", "(+ (neg x1) x2)"], &[])),
            points: vec![("origin".into(), pt(&[0.0], &[0.0]))],
            facts: vec![
                Fact::TangentEquals { point: 0, eq: vec![vec![0.0, 1.0]], ineq: vec![vec![-1.0, 0.0]] },
                Fact::LinearizedEquals {
                    point: 0,
                    eq: vec![],
                    ineq: vec![vec![0.0, -1.0], vec![-1.0, 1.0]],
                },
                Fact::ConeRays {
                    point: 0,
                    tangent: vec![vec![1.0, 0.0]],
                    linearized: vec![vec![1.0, 0.0], vec![1.0, 1.0]],
                },
                Fact::Cq { point: 0, which: Cq::Gcq, expected: Verdict::Fails },
                Fact::Cq { point: 0, which: Cq::Acq, expected: Verdict::Fails },
            ],
        },
        CorpusCase {
            id: "remark3.1a".into(),
            citation: "Remark 3.1: ACQ holds at (0,0) for {x=0, 0<=y<=1, xy=0}".into(),
            model: Model::PairSet(pair_set("remark3.1a", &["(neg x2)", "(+ x2 -1)"], &["x1"])),
            points: vec![("origin".into(), pt(&[0.0], &[0.0]))],
            facts: vec![Fact::Cq { point: 0, which: Cq::Acq, expected: Verdict::Holds }],
        },
        CorpusCase {
            id: "remark3.1b".into(),
            citation: "Remark 3.1: ACQ fails at (0,0) for {0<=x<=1, 0<=y<=1, xy=0}; GCQ holds since the constraints are separable and linear".into(),
            model: Model::PairSet(pair_set(
                "remark3.1b",
                &["(neg x1)", "(+ x1 -1)", "(neg x2)", "(+ x2 -1)"],
                &[],
            )),
            points: vec![("origin".into(), pt(&[0.0], &[0.0]))],
            facts: vec![
                Fact::Cq { point: 0, which: Cq::Acq, expected: Verdict::Fails },
                Fact::Cq { point: 0, which: Cq::Gcq, expected: Verdict::Holds },
            ],
        },
        CorpusCase {
            id: "ex4.1".into(),
            citation: "Example 4.1: x*=(0,0) is the unique global solution; with y*=(1,0) the pair is a global solution of the relaxed problem that is not KKT, so GCQ fails".into(),
            model: Model::Problem(counterexample()),
            points: vec![("x*=(0,0), y*=(1,0)".into(), pt(&[0.0, 0.0], &[1.0, 0.0]))],
            facts: vec![
                Fact::RelaxedText {
                    lines: vec![
                        "minimize_(x,y)  x1 + x2".into(),
                        "-x1 + x2^2 <= 0".into(),
                        "y1 + y2 >= 1".into(),
                        "x1*y1 = 0".into(),
                        "x2*y2 = 0".into(),
                    ],
                },
                Fact::Optimum { x: vec![0.0, 0.0], objective: 0.0 },
                Fact::GlobalAtPoint { point: 0 },
                Fact::Stationarity { point: 0, check: Check::Kkt, expected: Verdict::Fails },
                Fact::MinimizerNotKkt { point: 0 },
                Fact::Cq { point: 0, which: Cq::Licq, expected: Verdict::Fails },
                Fact::Cq { point: 0, which: Cq::Mfcq, expected: Verdict::Fails },
            ],
        },
        CorpusCase {
            id: "ex4.2".into(),
            citation: "Example 4.2: for I=I_0(x*)={1,2} the pair is W_I-stationary (M-stationary) though not KKT".into(),
            model: Model::Problem(counterexample()),
            points: vec![("x*=(0,0), y*=(1,0)".into(), pt(&[0.0, 0.0], &[1.0, 0.0]))],
            facts: vec![
                Fact::Range { point: 0, i_min: idx(&[1]), i_max: idx(&[1, 2]), i00: idx(&[2]) },
                Fact::Stationarity { point: 0, check: Check::M, expected: Verdict::Holds },
                Fact::Stationarity { point: 0, check: Check::S, expected: Verdict::Fails },
                Fact::Stationarity {
                    point: 0,
                    check: Check::W(idx(&[1, 2])),
                    expected: Verdict::Holds,
                },
                Fact::MinimalSets { point: 0, expected: vec![idx(&[1, 2])] },
            ],
        },
    ];
    for n in 3..=6 {
        let mut y = vec![0.0; n];
        y[0] = 1.0;
        let all: Vec<usize> = (1..=n).collect();
        out.push(CorpusCase {
            id: format!("ex4.3-n{n}"),
            citation: "Example 4.3: x*=0, y*=e1 is W_I-stationary if and only if n is in I".into(),
            model: Model::Problem(family(n)),
            points: vec![("x*=0, y*=e1".into(), pt(&vec![0.0; n], &y))],
            facts: vec![
                Fact::Range {
                    point: 0,
                    i_min: idx(&[1]),
                    i_max: idx(&all),
                    i00: idx(&all[1..]),
                },
                Fact::WIffContains { point: 0, index: n },
                Fact::Stationarity {
                    point: 0,
                    check: Check::W(idx(&[1, n])),
                    expected: Verdict::Holds,
                },
                Fact::Stationarity { point: 0, check: Check::S, expected: Verdict::Fails },
                Fact::Stationarity { point: 0, check: Check::M, expected: Verdict::Holds },
                Fact::MinimalSets { point: 0, expected: vec![idx(&[1, n])] },
                Fact::Optimum { x: vec![0.0; n], objective: 0.0 },
                Fact::GlobalAtPoint { point: 0 },
            ],
        });
    }
    out
}

/// Cases whose id equals `filter` or extends it with `-...`.
pub fn select(filter: Option<&str>) -> Vec<CorpusCase> {
    cases()
        .into_iter()
        .filter(|c| match filter {
            None => true,
            Some(f) => c.id == f || c.id.strip_prefix(f).is_some_and(|r| r.starts_with('-')),
        })
        .collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| fmt_num(*x)).collect();
    format!("({})", parts.join(","))
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn fmt_sets(v: &[Indices]) -> String {
    let parts: Vec<String> = v.iter().map(Indices::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn verdict_str(v: Verdict) -> String {
    match v {
        Verdict::Holds => "holds".into(),
        Verdict::Fails => "fails".into(),
    }
}

fn rows_str(rows: &[Vec<f64>]) -> String {
    let parts: Vec<String> = rows.iter().map(|r| fmt_vec(r)).collect();
    format!("[{}]", parts.join(","))
}

fn same_rays(got: &[Vec<f64>], want: &[Vec<f64>], eps: f64) -> bool {
    let scaled = |v: &[f64]| {
        let m = v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        v.iter().map(|x| x / m).collect::<Vec<f64>>()
    };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| (p - q).abs() <= eps);
    got.len() == want.len()
        && want.iter().all(|w| {
            let w = scaled(w);
            got.iter().any(|g| close(&scaled(g), &w))
        })
}

struct Runner<'a> {
    case: &'a CorpusCase,
    tol: &'a Tolerances,
    opts: &'a SolveOptions,
    solve: Option<Result<SolveReport>>,
}

impl Runner<'_> {
    fn problem(&self) -> Result<&Problem> {
        match &self.case.model {
            Model::Problem(p) => Ok(p),
            Model::PairSet(_) => Err(Error::Internal("fact needs a problem".into())),
        }
    }

    fn pair_set(&self) -> Result<PairSet> {
        match &self.case.model {
            Model::Problem(p) => PairSet::from_problem(p),
            Model::PairSet(s) => Ok(s.clone()),
        }
    }

    fn point(&self, k: usize) -> Result<&PairPoint> {
        self.case
            .points
            .get(k)
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Internal(format!("no point {k}")))
    }

    fn solved(&mut self) -> Result<&SolveReport> {
        if self.solve.is_none() {
            let r = self.problem().and_then(|p| solve_brute(p, self.opts, self.tol));
            self.solve = Some(r);
        }
        match self.solve.as_ref().expect("just filled") {
            Ok(r) => Ok(r),
            Err(e) => Err(Error::Internal(format!("solve failed: {e}"))),
        }
    }

    fn optimum(&mut self) -> Result<(Vec<f64>, f64)> {
        let r = self.solved()?;
        match (&r.x, r.objective) {
            (Some(x), Some(f)) => Ok((x.clone(), f)),
            _ => Err(Error::Internal("no feasible support".into())),
        }
    }

    fn label(&self, k: usize) -> String {
        self.case.points.get(k).map(|(l, _)| l.clone()).unwrap_or_default()
    }

    /// `(description, expected, observed, pass)`
    fn check(&mut self, fact: &Fact) -> Result<(String, String, String, bool)> {
        let tol = *self.tol;
        let b = |v: bool| if v { "true" } else { "false" }.to_string();
        Ok(match fact {
            Fact::RelaxedFeasible { point, expected } => {
                let got = is_feasible_relaxed(self.problem()?, self.point(*point)?, &tol);
                (format!("relaxed-feasible at {}", self.label(*point)), b(*expected), b(got), got == *expected)
            }
            Fact::MixedIntegerFeasible { point, expected } => {
                let mi = build_mixed_integer(self.problem()?);
                let z = self.point(*point)?.stacked()?;
                let binary = z
                    .iter()
                    .zip(&mi.binary)
                    .all(|(v, &is_bin)| !is_bin || v.abs() <= tol.zero || (v - 1.0).abs() <= tol.zero);
                let got = binary && mi.violation(&z) <= tol.feas;
                (format!("mixed-integer-feasible at {}", self.label(*point)), b(*expected), b(got), got == *expected)
            }
            Fact::MpcacFeasible { point, expected } => {
                let got = is_feasible_mpcac(self.problem()?, &self.point(*point)?.x, &tol);
                (format!("feasible for the cardinality problem at {}", self.label(*point)), b(*expected), b(got), got == *expected)
            }
            Fact::CompanionUnique { point, expected } => {
                let p = self.problem()?;
                let (_, got) = companion_y(&self.point(*point)?.x, p.alpha, tol.zero)?;
                (format!("companion y unique at {}", self.label(*point)), b(*expected), b(got), got == *expected)
            }
            Fact::Range { point, i_min, i_max, i00 } => {
                let s = index_sets(self.point(*point)?, tol.zero)?;
                let want = format!("I_min={i_min} I_max={i_max} I_00={i00}");
                let got = format!("I_min={} I_max={} I_00={}", s.i_min(), s.i_max(), s.i00);
                let pass = want == got;
                (format!("index range at {}", self.label(*point)), want, got, pass)
            }
            Fact::Stationarity { point, check, expected } => {
                let p = self.problem()?;
                let x = self.point(*point)?;
                let (name, cert) = match check {
                    Check::Kkt => ("KKT".to_string(), check_kkt_relaxed(p, x, &tol)?),
                    Check::S => ("S".to_string(), check_s_stationary(p, x, &tol)?),
                    Check::M => ("M".to_string(), check_m_stationary(p, x, &tol)?),
                    Check::W(i) => (format!("W({i})"), check_w_stationary(p, x, i, &tol)?),
                };
                let ok_residual = !cert.verdict.holds() || cert.stationarity_residual <= tol.cert;
                (
                    format!("{name} at {}", self.label(*point)),
                    verdict_str(*expected),
                    verdict_str(cert.verdict),
                    cert.verdict == *expected && ok_residual,
                )
            }
            Fact::WIffContains { point, index } => {
                let prof = stationarity_profile(self.problem()?, self.point(*point)?, DEFAULT_PROFILE_CAP, &tol)?;
                let bad: Vec<String> = prof
                    .entries
                    .iter()
                    .filter(|en| en.verdict.holds() != en.i.contains(index - 1))
                    .map(|en| en.i.to_string())
                    .collect();
                (
                    format!("W(I) holds iff {index} in I, over {} admissible I at {}", prof.entries.len(), self.label(*point)),
                    "no exceptions".into(),
                    if bad.is_empty() { "no exceptions".into() } else { format!("exceptions {}", bad.join(" ")) },
                    bad.is_empty(),
                )
            }
            Fact::MinimalSets { point, expected } => {
                let prof = stationarity_profile(self.problem()?, self.point(*point)?, DEFAULT_PROFILE_CAP, &tol)?;
                let pass = &prof.minimal == expected;
                (
                    format!("minimal stationary index sets at {}", self.label(*point)),
                    fmt_sets(expected),
                    fmt_sets(&prof.minimal),
                    pass,
                )
            }
            Fact::Optimum { x, objective } => {
                let (gx, gf) = self.optimum()?;
                let pass = (gf - objective).abs() <= 1e-6
                    && gx.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-6);
                (
                    "global solution".into(),
                    format!("x*={} f*={}", fmt_vec(x), fmt_num(*objective)),
                    format!("x*={} f*={}", fmt_vec(&gx), fmt_num(gf)),
                    pass,
                )
            }
            Fact::GlobalAtPoint { point } => {
                let (_, gf) = self.optimum()?;
                let p = self.problem()?;
                let x = self.point(*point)?;
                let fx = p.objective.eval(&x.x);
                let feasible = is_feasible_relaxed(p, x, &tol);
                (
                    format!("relaxed global solution at {}", self.label(*point)),
                    format!("feasible, f={}", fmt_num(gf)),
                    format!("{}, f={}", if feasible { "feasible" } else { "infeasible" }, fmt_num(fx)),
                    feasible && (fx - gf).abs() <= 1e-6,
                )
            }
            Fact::MinimizerNotKkt { point } => {
                let (_, gf) = self.optimum()?;
                let p = self.problem()?;
                let x = self.point(*point)?;
                let at_min = (p.objective.eval(&x.x) - gf).abs() <= 1e-6;
                let kkt = check_kkt_relaxed(p, x, &tol)?.verdict;
                (
                    format!("GCQ fails at {}: global minimizer without KKT multipliers", self.label(*point)),
                    "minimizer, KKT fails".into(),
                    format!("{}, KKT {}", if at_min { "minimizer" } else { "not a minimizer" }, verdict_str(kkt)),
                    at_min && !kkt.holds(),
                )
            }
            Fact::Cq { point, which, expected } => {
                let x = self.point(*point)?;
                let got = match which {
                    Cq::Licq | Cq::Mfcq => {
                        let ag = match &self.case.model {
                            Model::Problem(p) => active_gradients_relaxed(p, x, &tol)?,
                            Model::PairSet(s) => s.active_gradients(x, &tol)?,
                        };
                        if *which == Cq::Licq {
                            check_licq(&ag, &tol).verdict
                        } else {
                            check_mfcq(&ag, &tol)?.verdict
                        }
                    }
                    Cq::Acq => check_acq(&self.pair_set()?, x, &tol)?.verdict,
                    Cq::Gcq => check_gcq(&self.pair_set()?, x, &tol)?.verdict,
                };
                let name = serde_json::to_value(which)?.as_str().unwrap_or_default().to_uppercase();
                (
                    format!("{name} at {}", self.label(*point)),
                    verdict_str(*expected),
                    verdict_str(got),
                    got == *expected,
                )
            }
            Fact::TangentEquals { point, eq, ineq } => {
                let set = self.pair_set()?;
                let t = tangent_cone_pieces(&set, self.point(*point)?, &tol)?;
                let want = PolyhedralCone::new(2 * set.n, eq.clone(), ineq.clone())?;
                let cmp = union_equals_cone(&t, &want, tol.cone)?;
                (
                    format!("tangent cone at {} ({} pieces)", self.label(*point), t.pieces.len()),
                    format!("eq {} ineq {}", rows_str(eq), rows_str(ineq)),
                    if cmp.equal { "equal".into() } else { format!("differs along {}", fmt_vec(cmp.witness.as_deref().unwrap_or(&[]))) },
                    cmp.equal,
                )
            }
            Fact::LinearizedEquals { point, eq, ineq } => {
                let set = self.pair_set()?;
                let d = linearized_cone(&set.active_gradients(self.point(*point)?, &tol)?)?;
                let want = PolyhedralCone::new(2 * set.n, eq.clone(), ineq.clone())?;
                let pass = crate::cones::cones_equal(&d, &want, tol.cone)?;
                (
                    format!("linearized cone at {}", self.label(*point)),
                    format!("eq {} ineq {}", rows_str(eq), rows_str(ineq)),
                    if pass { "equal".into() } else { "differs".into() },
                    pass,
                )
            }
            Fact::ConeRays { point, tangent, linearized } => {
                let set = self.pair_set()?;
                let x = self.point(*point)?;
                let t = tangent_cone_pieces(&set, x, &tol)?;
                let mut trays: Vec<Vec<f64>> = Vec::new();
                for g in t.generators(tol.cone)? {
                    for r in g.conic_spanning_set() {
                        if !trays.iter().any(|q| same_rays(std::slice::from_ref(q), std::slice::from_ref(&r), 1e-9)) {
                            trays.push(r);
                        }
                    }
                }
                let d = linearized_cone(&set.active_gradients(x, &tol)?)?;
                let drays = d.generators(tol.cone)?.conic_spanning_set();
                let pass = same_rays(&trays, tangent, 1e-9) && same_rays(&drays, linearized, 1e-9);
                (
                    format!("cone generators at {}", self.label(*point)),
                    format!("T {} D {}", rows_str(tangent), rows_str(linearized)),
                    format!("T {} D {}", rows_str(&trays), rows_str(&drays)),
                    pass,
                )
            }
            Fact::RelaxedText { lines } => {
                let text = build_relaxed(self.problem()?).to_string();
                let missing: Vec<&String> = lines.iter().filter(|l| !text.contains(l.as_str())).collect();
                (
                    "printed relaxed problem".into(),
                    format!("{} expected lines", lines.len()),
                    if missing.is_empty() {
                        "all present".into()
                    } else {
                        format!("missing {}", missing.iter().map(|s| format!("`{s}`")).collect::<Vec<_>>().join(", "))
                    },
                    missing.is_empty(),
                )
            }
        })
    }
}

/// Checks every fact of `case`; an error while checking counts as a failure.
pub fn run_case(case: &CorpusCase, tol: &Tolerances, opts: &SolveOptions) -> CaseReport {
    let mut runner = Runner { case, tol, opts, solve: None };
    let results: Vec<FactResult> = case
        .facts
        .iter()
        .map(|f| match runner.check(f) {
            Ok((fact, expected, observed, pass)) => FactResult { fact, expected, observed, pass },
            Err(err) => FactResult {
                fact: format!("{f:?}"),
                expected: "a verdict".into(),
                observed: format!("error: {err}"),
                pass: false,
            },
        })
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    CaseReport {
        id: case.id.clone(),
        citation: case.citation.clone(),
        failed: results.len() - passed,
        passed,
        results,
    }
}

pub fn run_corpus(cases: &[CorpusCase], tol: &Tolerances, opts: &SolveOptions) -> CorpusReport {
    let reports: Vec<CaseReport> = cases.iter().map(|c| run_case(c, tol, opts)).collect();
    CorpusReport {
        format: REPORT_FORMAT,
        tolerances: *tol,
        passed: reports.iter().map(|r| r.passed).sum(),
        failed: reports.iter().map(|r| r.failed).sum(),
        cases: reports,
    }
}

#[derive(Serialize)]
struct PointsDoc<'a> {
    format: &'static str,
    points: Vec<LabeledPoint<'a>>,
}

#[derive(Serialize)]
struct LabeledPoint<'a> {
    label: &'a str,
    #[serde(flatten)]
    point: PointDoc,
}

#[derive(Serialize)]
struct PairSetOut<'a> {
    format: &'static str,
    kind: &'static str,
    name: &'a str,
    n: usize,
    ineq: Vec<String>,
    eq: Vec<String>,
}

fn row_expr(a: &[f64], c: f64) -> String {
    Expr::affine(a.to_vec(), c).to_string()
}

/// Writes `<id>.json` (model) and `<id>.points.json` for every case; returns the paths written.
pub fn export(cases: &[CorpusCase], dir: &Path) -> Result<Vec<PathBuf>> {
    let io = |e: std::io::Error| Error::Format(format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut written = Vec::new();
    for c in cases {
        let model = match &c.model {
            Model::Problem(p) => serde_json::to_string_pretty(&ProblemDoc::from_problem(p))?,
            Model::PairSet(s) => serde_json::to_string_pretty(&PairSetOut {
                format: FORMAT,
                kind: "pair-set",
                name: &s.name,
                n: s.n,
                ineq: s.ineq.iter().map(|r| row_expr(&r.a, r.c)).collect(),
                eq: s.eq.iter().map(|r| row_expr(&r.a, r.c)).collect(),
            })?,
        };
        let points = serde_json::to_string_pretty(&PointsDoc {
            format: FORMAT,
            points: c
                .points
                .iter()
                .map(|(l, p)| LabeledPoint { label: l, point: PointDoc::from_point(p) })
                .collect(),
        })?;
        for (suffix, body) in [("json", model), ("points.json", points)] {
            let path = dir.join(format!("{}.{suffix}", c.id));
            std::fs::write(&path, body + "\n").map_err(io)?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::files::load_document;

    #[test]
    fn all_cases_pass() {
        let report = run_corpus(&cases(), &Tolerances::default(), &SolveOptions::default());
        assert!(report.all_passed(), "{}", report.table_text());
    }

    #[test]
    fn filter_matches_family() {
        let ids: Vec<String> = select(Some("ex4.3")).into_iter().map(|c| c.id).collect();
        assert_eq!(ids, ["ex4.3-n3", "ex4.3-n4", "ex4.3-n5", "ex4.3-n6"]);
        assert_eq!(select(Some("ex4.1")).len(), 1);
        assert!(select(Some("ex4")).is_empty());
    }

    #[test]
    fn export_round_trips() {
        let dir = std::env::temp_dir().join(format!("mpcac-corpus-{}", std::process::id()));
        let all = cases();
        let paths = export(&all, &dir).unwrap();
        assert_eq!(paths.len(), 2 * all.len());
        for c in &all {
            let text = std::fs::read_to_string(dir.join(format!("{}.json", c.id))).unwrap();
            match (load_document(&text).unwrap(), &c.model) {
                (crate::files::Document::Problem(p), Model::Problem(q)) => {
                    assert_eq!((p.n, p.alpha), (q.n, q.alpha));
                    let z = vec![0.3; p.n];
                    assert!((p.objective.eval(&z) - q.objective.eval(&z)).abs() < 1e-12);
                }
                (crate::files::Document::PairSet(s), Model::PairSet(t)) => assert_eq!(&s, t),
                _ => panic!("kind changed for {}", c.id),
            }
        }
        std::fs::remove_dir_all(&dir).ok();
    }
}
