mod common;

use common::*;
use mpcac_core::cones::{linearized_cone, tangent_cone_pieces, PairSet, PolyhedralCone, cones_equal};
use mpcac_core::lp::{farkas_violation, lp_solve, LinearProgram, LpStatus, Sign};
use mpcac_core::model::{
    build_relaxed, build_tightened, companion_y, index_sets, is_feasible_relaxed,
};
use mpcac_core::solver::{solve_qp_affine, solve_reduced, start_points, AlOptions, ReducedStatus};
use mpcac_core::stationarity::{stationarity_profile, DEFAULT_PROFILE_CAP};
use mpcac_core::{parse_expr, Expr, Indices, PairPoint, Problem, Tolerances};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

const N: usize = 3;

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i32..=3).prop_map(|c| Expr::constant(c as f64 * 0.5)),
        (0..N).prop_map(Expr::var),
        (prop::collection::vec(-2.0..2.0f64, N), -1.0..1.0f64)
            .prop_map(|(c, o)| Expr::affine(c, o)),
    ];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..4).prop_map(Expr::sum),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Expr::product),
            (inner.clone(), 1u32..=3).prop_map(|(b, k)| Expr::pow(b, k)),
            inner.prop_map(Expr::neg),
        ]
    })
}

fn rng(seed: u64) -> Rng8 {
    Rng8::seed_from_u64(seed)
}

fn tol() -> Tolerances {
    Tolerances::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_expressions_parse_back(e in expr_strategy(), x in prop::collection::vec(-1.5..1.5f64, N)) {
        let back = parse_expr(&e.to_string(), N).unwrap();
        let (a, b) = (e.eval(&x), back.eval(&x));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{e}: {a} vs {b}");
    }

    #[test]
    fn gradients_match_differences(e in expr_strategy(), x in prop::collection::vec(-1.5..1.5f64, N)) {
        let scale = e.grad(&x).iter().fold(e.eval(&x).abs(), |m, v| m.max(v.abs()));
        prop_assert!(e.grad_check(&x, 1e-6) <= 1e-6 * (1.0 + scale));
    }

    #[test]
    fn index_sets_partition(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let alpha = r.gen_range(1..n);
        let pt = random_point(&mut r, &unconstrained(n, alpha), &tol());
        let s = index_sets(&pt, tol().zero).unwrap();
        let mut all: Vec<usize> = s.i00.iter().chain(s.i_pm0.iter()).chain(s.i0pm.iter()).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(s.i_min().is_subset(&s.i_max()));
        prop_assert_eq!(s.i0.len(), s.i00.len() + s.i0pm.len());
    }

    #[test]
    fn companion_is_relaxed_feasible(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let alpha = r.gen_range(1..n);
        let p = unconstrained(n, alpha);
        let k = r.gen_range(0..=alpha);
        let mut x = vec![0.0; n];
        for i in rand::seq::index::sample(&mut r, n, k) {
            x[i] = r.gen_range(0.5..2.0);
        }
        let (y, unique) = companion_y(&x, alpha, tol().zero).unwrap();
        prop_assert_eq!(unique, k == alpha);
        prop_assert!(is_feasible_relaxed(&p, &PairPoint::new(x, y).unwrap(), &tol()));
    }

    #[test]
    fn lp_outcomes_carry_valid_witnesses(seed in any::<u64>(), m in 1usize..5, n in 1usize..6) {
        let mut r = rng(seed);
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
        let b: Vec<f64> = (0..m).map(|_| r.gen_range(-2.0..2.0)).collect();
        let lp = LinearProgram::feasibility(a.clone(), b.clone(), vec![Sign::Nonnegative; n]);
        let out = lp_solve(&lp, 1e-9).unwrap();
        match out.status {
            LpStatus::Infeasible => {
                let w = out.certificate.unwrap();
                let (worst, wb) = farkas_violation(&lp, &w);
                prop_assert!(worst <= 1e-7 && wb > 1e-9, "worst {worst}, w'b {wb}");
            }
            _ => {
                prop_assert!(out.x.iter().all(|&v| v >= -1e-9));
                for (row, bi) in a.iter().zip(&b) {
                    let ax: f64 = row.iter().zip(&out.x).map(|(p, q)| p * q).sum();
                    prop_assert!((ax - bi).abs() <= 1e-7);
                }
            }
        }
    }

    #[test]
    fn planted_systems_are_feasible(seed in any::<u64>(), m in 1usize..5, n in 1usize..6) {
        let mut r = rng(seed);
        let a: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| r.gen_range(-2.0..2.0)).collect()).collect();
        let x0: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let b = a.iter().map(|row| row.iter().zip(&x0).map(|(p, q)| p * q).sum()).collect();
        let lp = LinearProgram::feasibility(a, b, vec![Sign::Nonnegative; n]);
        prop_assert!(lp_solve(&lp, 1e-9).unwrap().is_feasible());
    }

    #[test]
    fn double_polar_is_identity(seed in any::<u64>(), dim in 2usize..5, rows in 1usize..6) {
        let mut r = rng(seed);
        let ineq: Vec<Vec<f64>> = (0..rows).map(|_| (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let eq: Vec<Vec<f64>> = if r.gen_bool(0.3) {
            vec![(0..dim).map(|_| r.gen_range(-1.0..1.0)).collect()]
        } else {
            vec![]
        };
        let c = PolyhedralCone::new(dim, eq, ineq).unwrap();
        let pp = c.polar(1e-9).unwrap().polar(1e-9).unwrap();
        prop_assert!(cones_equal(&c, &pp, 1e-7).unwrap());
    }

    #[test]
    fn tangent_pieces_lie_in_linearized_cone(seed in any::<u64>()) {
        let t = tol();
        let mut r = rng(seed);
        let n = r.gen_range(1..=4);
        let alpha = r.gen_range(1..=n.max(2) - 1);
        let n = n.max(2);
        let pt = random_point(&mut r, &unconstrained(n, alpha), &t);
        let ng = r.gen_range(0..=3);
        let g = affine_rows_at(&mut r, &pt.x, ng, false);
        let p = Problem::new("t", n, alpha, Expr::constant(0.0), g, vec![]).unwrap();
        let set = PairSet::from_problem(&p).unwrap();
        let d = linearized_cone(&set.active_gradients(&pt, &t).unwrap()).unwrap();
        let pieces = tangent_cone_pieces(&set, &pt, &t).unwrap();
        for (_, piece) in &pieces.pieces {
            prop_assert!(piece.is_subset_of(&d, t.cone).unwrap());
        }
    }

    #[test]
    fn stationarity_profile_is_up_closed(seed in any::<u64>()) {
        let t = tol();
        let mut r = rng(seed);
        let problems = corpus_problems();
        let p = problems.choose(&mut r).unwrap();
        let pt = random_point(&mut r, p, &t);
        let p = if r.gen_bool(0.7) {
            let j = random_admissible(&mut r, &pt, &t);
            plant(&mut r, p, &pt, &j, &t)
        } else {
            p.clone()
        };
        let prof = stationarity_profile(&p, &pt, DEFAULT_PROFILE_CAP, &t).unwrap();
        for a in &prof.entries {
            for b in &prof.entries {
                if a.verdict.holds() && a.i.is_subset(&b.i) {
                    prop_assert!(b.verdict.holds(), "W({}) holds but W({}) fails", a.i, b.i);
                }
            }
        }
        for m in &prof.minimal {
            prop_assert_eq!(prof.verdict(m).map(|v| v.holds()), Some(true));
        }
    }

    #[test]
    fn tightened_feasible_implies_relaxed_feasible(seed in any::<u64>()) {
        let t = tol();
        let mut r = rng(seed);
        let problems = corpus_problems();
        let p = problems.choose(&mut r).unwrap();
        let pt = random_point(&mut r, p, &t);
        let i = random_admissible(&mut r, &pt, &t);
        let tight = build_tightened(p, &pt, &i, &t).unwrap();
        let relaxed = build_relaxed(p);
        prop_assert!(tight.violation(&pt.stacked().unwrap()) <= t.feas);
        for _ in 0..20 {
            let other = random_point(&mut r, p, &t);
            let z = other.stacked().unwrap();
            if tight.violation(&z) <= t.feas {
                prop_assert!(relaxed.violation(&z) <= t.feas);
            }
        }
    }

    #[test]
    fn exact_and_iterative_reduced_solves_agree(seed in any::<u64>()) {
        let t = tol();
        let mut r = rng(seed);
        let n = r.gen_range(2..=4);
        let alpha = r.gen_range(1..n);
        // convex separable quadratic plus an affine constraint through a random point
        let f = Expr::sum(
            (0..n)
                .map(|i| {
                    let w = r.gen_range(0.5..2.0);
                    let c = r.gen_range(-1.0..1.0);
                    Expr::product(vec![Expr::constant(w), Expr::pow(Expr::affine(unit(n, i), -c), 2)])
                })
                .collect(),
        );
        let x0: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let ng = r.gen_range(0..=2);
        let g = affine_rows_at(&mut r, &x0, ng, false);
        let p = Problem::new("qp", n, alpha, f, g, vec![]).unwrap();
        let support = Indices::new(rand::seq::index::sample(&mut r, n, alpha).into_vec());
        let exact = solve_qp_affine(&p, &support, &t).unwrap().expect("quadratic class");
        if exact.status == ReducedStatus::Converged {
            let best = start_points(n, &support, 8)
                .iter()
                .map(|s| solve_reduced(&p, &support, s, &AlOptions::default(), &t))
                .filter(|s| s.is_feasible(&t))
                .map(|s| s.objective)
                .fold(f64::INFINITY, f64::min);
            prop_assert!((best - exact.objective).abs() <= 1e-6 * (1.0 + exact.objective.abs()),
                "exact {} vs iterative {best}", exact.objective);
        }
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}
