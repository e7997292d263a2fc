mod common;

use common::corpus_problems;
use mpcac_core::corpus::{counterexample, family};
use mpcac_core::solver::{
    kkt_residual_mpcac_report, solve_brute, solve_qp_affine, solve_reduced, start_points, supports,
    AlOptions, ReducedStatus, SolveOptions,
};
use mpcac_core::stationarity::Verdict;
use mpcac_core::{Indices, Tolerances};

#[test]
fn exact_path_agrees_with_augmented_lagrangian_on_corpus_supports() {
    let tol = Tolerances::default();
    let mut compared = 0;
    for p in corpus_problems() {
        for s in supports(p.n, p.alpha) {
            let Some(exact) = solve_qp_affine(&p, &s, &tol).unwrap() else {
                continue;
            };
            if exact.status != ReducedStatus::Converged {
                continue;
            }
            let best = start_points(p.n, &s, 8)
                .iter()
                .map(|st| solve_reduced(&p, &s, st, &AlOptions::default(), &tol))
                .filter(|r| r.is_feasible(&tol))
                .map(|r| r.objective)
                .fold(f64::INFINITY, f64::min);
            assert!(
                (best - exact.objective).abs() <= 1e-5,
                "{} on {s}: exact {} vs iterative {best}",
                p.name,
                exact.objective
            );
            compared += 1;
        }
    }
    assert!(compared >= 6, "only {compared} supports on the exact path");
}

#[test]
fn off_support_entries_are_exact_zeros() {
    let tol = Tolerances::default();
    for p in corpus_problems() {
        let rep = solve_brute(&p, &SolveOptions::default(), &tol).unwrap();
        for e in &rep.table {
            for i in (0..p.n).filter(|&i| !e.support.contains(i)) {
                assert_eq!(e.solution.x[i].to_bits(), 0, "{} on {}", p.name, e.support);
            }
        }
    }
}

#[test]
fn diagnosis_of_solver_winners() {
    let tol = Tolerances::default();
    let opts = SolveOptions::default();

    let p = counterexample();
    let x = solve_brute(&p, &opts, &tol).unwrap().x.unwrap();
    let d = kkt_residual_mpcac_report(&p, &x, Some(&[1.0, 0.0]), &tol).unwrap();
    assert_eq!((d.s, d.m, d.kkt), (Verdict::Fails, Verdict::Holds, Verdict::Fails));

    let p = family(3);
    let x = solve_brute(&p, &opts, &tol).unwrap().x.unwrap();
    let d = kkt_residual_mpcac_report(&p, &x, Some(&[1.0, 0.0, 0.0]), &tol).unwrap();
    assert_eq!(d.profile.minimal, vec![Indices::new(vec![0, 2])], "x={x:?} {:?}", d.profile);
}
