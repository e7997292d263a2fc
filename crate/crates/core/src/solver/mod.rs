//! Global solution by enumerating size-alpha supports.

mod al;
mod qp;
mod report;

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indices::Indices;
use crate::model::{companion_y, Problem};
use crate::tol::Tolerances;

pub use al::{solve_reduced, AlOptions};
pub use qp::{reduced_qp, solve_qp_affine, ReducedQp};
pub use report::{kkt_residual_mpcac_report, CqEntry, Diagnosis};

/// Largest number of supports enumerated.
pub const SUPPORT_CAP: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReducedStatus {
    Converged,
    NotConverged,
    Infeasible,
    Unbounded,
    /// reduced Hessian not positive semidefinite on the exact path
    Indefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Exact,
    AugmentedLagrangian,
    /// exact path refused (indefinite), augmented Lagrangian used instead
    Fallback,
}

/// Result of one reduced problem. `x` has full length with exact zeros off support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub violation: f64,
    pub kkt_residual: f64,
    pub status: ReducedStatus,
    pub method: SolveMethod,
    pub starts_used: usize,
}

impl ReducedSolution {
    pub fn is_feasible(&self, tol: &Tolerances) -> bool {
        self.status != ReducedStatus::Infeasible && self.violation <= tol.feas
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub starts: usize,
    pub al: AlOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            starts: 8,
            al: AlOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportEntry {
    pub support: Indices,
    pub feasible: bool,
    #[serde(flatten)]
    pub solution: ReducedSolution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub problem: String,
    pub n: usize,
    pub alpha: usize,
    /// "global" when every support went through the exact path, "best found" otherwise
    pub label: &'static str,
    pub x: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub support: Option<Indices>,
    pub y: Option<Vec<f64>>,
    pub y_unique: Option<bool>,
    pub ties: Vec<Indices>,
    pub table: Vec<SupportEntry>,
}

/// Start points on the support: origin, +-0.5, then seeded uniform draws in [-1, 1].
pub fn start_points(n: usize, support: &Indices, starts: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(starts);
    let embed = |vals: &dyn Fn(usize) -> f64| {
        let mut x = vec![0.0; n];
        for (k, i) in support.iter().enumerate() {
            x[i] = vals(k);
        }
        x
    };
    for s in 0..starts {
        let x = match s {
            0 => vec![0.0; n],
            1 => embed(&|_| 0.5),
            2 => embed(&|_| -0.5),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64((s - 2) as u64);
                let draws: Vec<f64> = (0..support.len()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                embed(&|k| draws[k])
            }
        };
        out.push(x);
    }
    out
}

/// Best of `starts` augmented-Lagrangian runs on one support; earliest start wins ties.
pub fn solve_multistart(
    p: &Problem,
    support: &Indices,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> ReducedSolution {
    let starts = start_points(p.n, support, opts.starts.max(1));
    let runs: Vec<ReducedSolution> = starts
        .par_iter()
        .map(|x0| solve_reduced(p, support, x0, &opts.al, tol))
        .collect();
    let mut best: Option<ReducedSolution> = None;
    for sol in runs {
        best = Some(match best {
            None => sol,
            Some(b) => {
                let better = match (sol.is_feasible(tol), b.is_feasible(tol)) {
                    (true, false) => true,
                    (true, true) => sol.objective < b.objective - tol.tie,
                    (false, false) => sol.violation < b.violation,
                    (false, true) => false,
                };
                if better {
                    sol
                } else {
                    b
                }
            }
        });
    }
    let mut b = best.expect("at least one start");
    b.starts_used = starts.len();
    b
}

/// One reduced problem: exact path when eligible, augmented Lagrangian otherwise.
pub fn solve_support(
    p: &Problem,
    support: &Indices,
    opts: &SolveOptions,
    tol: &Tolerances,
) -> Result<ReducedSolution> {
    if let Some(sol) = solve_qp_affine(p, support, tol)? {
        match sol.status {
            ReducedStatus::Indefinite | ReducedStatus::NotConverged => {
                let mut s = solve_multistart(p, support, opts, tol);
                s.method = SolveMethod::Fallback;
                return Ok(s);
            }
            _ => return Ok(sol),
        }
    }
    Ok(solve_multistart(p, support, opts, tol))
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All size-`k` subsets of `0..n` in lexicographic order.
pub fn supports(n: usize, k: usize) -> Vec<Indices> {
    let mut out = Vec::new();
    let mut pick: Vec<usize> = (0..k).collect();
    loop {
        out.push(Indices::new(pick.clone()));
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if pick[pos] < n - k + pos {
                pick[pos] += 1;
                for q in pos + 1..k {
                    pick[q] = pick[q - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Enumerates every size-alpha support and keeps the best feasible reduced solution.
pub fn solve_brute(p: &Problem, opts: &SolveOptions, tol: &Tolerances) -> Result<SolveReport> {
    let count = binomial(p.n, p.alpha);
    if count > SUPPORT_CAP {
        return Err(Error::CapExceeded {
            what: "C(n, alpha)",
            size: count,
            cap: SUPPORT_CAP,
        });
    }
    let sups = supports(p.n, p.alpha);
    let sols: Vec<ReducedSolution> = sups
        .par_iter()
        .map(|s| solve_support(p, s, opts, tol))
        .collect::<Result<_>>()?;
    let table: Vec<SupportEntry> = sups
        .into_iter()
        .zip(sols)
        .map(|(support, solution)| SupportEntry {
            support,
            feasible: solution.is_feasible(tol),
            solution,
        })
        .collect();

    let mut best: Option<usize> = None;
    for (k, e) in table.iter().enumerate() {
        if !e.feasible {
            continue;
        }
        match best {
            None => best = Some(k),
            Some(b) if e.solution.objective < table[b].solution.objective - tol.tie => {
                best = Some(k)
            }
            _ => {}
        }
    }
    let certified = table.iter().all(|e| e.solution.method == SolveMethod::Exact);
    let mut report = SolveReport {
        problem: p.name.clone(),
        n: p.n,
        alpha: p.alpha,
        label: if certified { "global" } else { "best found" },
        x: None,
        objective: None,
        support: None,
        y: None,
        y_unique: None,
        ties: Vec::new(),
        table,
    };
    if let Some(b) = best {
        let w = &report.table[b];
        let fbest = w.solution.objective;
        let x = w.solution.x.clone();
        let (y, unique) = companion_y(&x, p.alpha, tol.zero)?;
        report.ties = report
            .table
            .iter()
            .filter(|e| e.feasible && e.solution.objective <= fbest + tol.tie)
            .map(|e| e.support.clone())
            .collect();
        report.support = Some(w.support.clone());
        report.objective = Some(fbest);
        report.x = Some(x);
        report.y = Some(y);
        report.y_unique = Some(unique);
    }
    Ok(report)
}

impl SolveReport {
    /// Plain-text rendering of the per-support table.
    pub fn table_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<14} {:<20} {:<13} {:>14} {:>11} {:>11} {:>6}  x",
            "support", "method", "status", "objective", "violation", "kkt_res", "starts"
        );
        for e in &self.table {
            let r = &e.solution;
            let method = serde_json::to_value(r.method).unwrap();
            let status = serde_json::to_value(r.status).unwrap();
            let xs: Vec<String> = r.x.iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(
                s,
                "{:<14} {:<20} {:<13} {:>14.8} {:>11.2e} {:>11.2e} {:>6}  ({})",
                e.support.to_string(),
                method.as_str().unwrap_or(""),
                status.as_str().unwrap_or(""),
                r.objective,
                r.violation,
                r.kkt_residual,
                r.starts_used,
                xs.join(", ")
            );
        }
        match (&self.support, self.objective) {
            (Some(sup), Some(f)) => {
                let _ = writeln!(s, "winner: support {sup}, objective {f:.10} ({})", self.label);
            }
            _ => {
                let _ = writeln!(s, "no feasible support");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn problem(n: usize, alpha: usize, f: &str, g: &[&str], h: &[&str]) -> Problem {
        Problem::new(
            "t",
            n,
            alpha,
            parse_expr(f, n).unwrap(),
            g.iter().map(|s| parse_expr(s, n).unwrap()).collect(),
            h.iter().map(|s| parse_expr(s, n).unwrap()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn lexicographic_supports() {
        let s: Vec<String> = supports(4, 2).iter().map(|s| s.to_string()).collect();
        assert_eq!(s, ["{1,2}", "{1,3}", "{1,4}", "{2,3}", "{2,4}", "{3,4}"]);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }

    #[test]
    fn scalar_quadratic_reduced() {
        let p = problem(2, 1, "(^ (+ x2 -1) 2)", &[], &[]);
        let sol = solve_reduced(&p, &Indices::new(vec![1]), &[0.0, 0.0], &AlOptions::default(), &tol());
        assert!((sol.x[1] - 1.0).abs() < 1e-6);
        assert!(sol.kkt_residual <= 1e-6);
        assert_eq!(sol.x[0].to_bits(), 0.0_f64.to_bits());
    }

    #[test]
    fn boundary_optimum_reduced() {
        let p = problem(2, 1, "(+ x1 x2)", &["(+ (neg x1) (^ x2 2))"], &[]);
        let sol = solve_reduced(&p, &Indices::new(vec![0]), &[0.5, 0.0], &AlOptions::default(), &tol());
        assert!(sol.x[0].abs() < 1e-6, "{:?}", sol);
        assert!(sol.violation <= 1e-8);
    }

    #[test]
    fn off_support_equality_is_infeasible() {
        let p = problem(2, 1, "(^ x2 2)", &[], &["(+ x1 -1)"]);
        let sol = solve_reduced(&p, &Indices::new(vec![1]), &[0.0, 0.0], &AlOptions::default(), &tol());
        assert_eq!(sol.status, ReducedStatus::Infeasible);
        let qp = solve_qp_affine(&p, &Indices::new(vec![1]), &tol()).unwrap().unwrap();
        assert_eq!(qp.status, ReducedStatus::Infeasible);
    }

    #[test]
    fn exact_path_with_binding_row() {
        // min (x1 - 2)^2 + (x2 - 2)^2  s.t.  x1 + x2 <= 1, support {1, 2}
        let p = problem(3, 2, "(+ (^ (+ x1 -2) 2) (^ (+ x2 -2) 2))", &["(+ x1 x2 -1)"], &[]);
        let s = Indices::new(vec![0, 1]);
        let qp = solve_qp_affine(&p, &s, &tol()).unwrap().unwrap();
        assert_eq!(qp.status, ReducedStatus::Converged);
        assert!((qp.x[0] - 0.5).abs() < 1e-12 && (qp.x[1] - 0.5).abs() < 1e-12);
        let al = solve_multistart(&p, &s, &SolveOptions::default(), &tol());
        assert!((al.objective - qp.objective).abs() < 1e-6);
    }

    #[test]
    fn unbounded_and_indefinite() {
        let p = problem(2, 1, "(neg x1)", &[], &[]);
        let qp = solve_qp_affine(&p, &Indices::new(vec![0]), &tol()).unwrap().unwrap();
        assert_eq!(qp.status, ReducedStatus::Unbounded);
        let p = problem(2, 1, "(neg (^ x1 2))", &["(+ x1 -1)", "(+ (neg x1) -1)"], &[]);
        let qp = solve_qp_affine(&p, &Indices::new(vec![0]), &tol()).unwrap().unwrap();
        assert_eq!(qp.status, ReducedStatus::Indefinite);
        let s = solve_support(&p, &Indices::new(vec![0]), &SolveOptions::default(), &tol()).unwrap();
        assert_eq!(s.method, SolveMethod::Fallback);
        assert!((s.objective + 1.0).abs() < 1e-6);
    }

    #[test]
    fn brute_counterexample() {
        let p = problem(2, 1, "(+ x1 x2)", &["(+ (neg x1) (^ x2 2))"], &[]);
        let r = solve_brute(&p, &SolveOptions::default(), &tol()).unwrap();
        let x = r.x.unwrap();
        assert!(x[0].abs() < 1e-6 && x[1].abs() < 1e-6, "{x:?}");
        assert!(r.objective.unwrap().abs() < 1e-6);
        assert_eq!(r.label, "best found");
    }

    #[test]
    fn brute_separable_quadratic() {
        let p = problem(
            3,
            2,
            "(+ (^ (+ x1 -1) 2) (^ (+ x2 -1) 2) (^ (+ x3 -1) 2))",
            &["x1"],
            &[],
        );
        let r = solve_brute(&p, &SolveOptions::default(), &tol()).unwrap();
        assert_eq!(r.label, "global");
        assert_eq!(r.x.as_ref().unwrap(), &vec![0.0, 1.0, 1.0]);
        assert_eq!(r.support.as_ref().unwrap(), &Indices::new(vec![1, 2]));
        assert!(r.table_text().contains("winner: support {2,3}"));
    }

    #[test]
    fn start_points_are_deterministic() {
        let s = Indices::new(vec![0, 2]);
        let a = start_points(3, &s, 8);
        assert_eq!(a, start_points(3, &s, 8));
        assert_eq!(a.len(), 8);
        assert!(a.iter().all(|x| x[1] == 0.0));
        assert_eq!(a[1], vec![0.5, 0.0, 0.5]);
    }
}
