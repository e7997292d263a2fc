//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use mpcac_core::corpus::{cases, Model};
use mpcac_core::model::{constraint_violation, index_sets};
use mpcac_core::{Expr, Indices, PairPoint, Problem, Tolerances};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

/// Distinct built-in problems (pair-set cases excluded).
pub fn corpus_problems() -> Vec<Problem> {
    let mut out: Vec<Problem> = Vec::new();
    for c in cases() {
        if let Model::Problem(p) = c.model {
            if !out.iter().any(|q| q.objective == p.objective && q.g == p.g && q.n == p.n) {
                out.push(p);
            }
        }
    }
    out
}

/// Every problem point stored in the corpus.
pub fn corpus_points() -> Vec<(Problem, PairPoint)> {
    let mut out = Vec::new();
    for c in cases() {
        if let Model::Problem(p) = &c.model {
            for (_, pt) in &c.points {
                out.push((p.clone(), pt.clone()));
            }
        }
    }
    out
}

pub fn unconstrained(n: usize, alpha: usize) -> Problem {
    Problem::new("free", n, alpha, Expr::constant(0.0), vec![], vec![]).unwrap()
}

fn nonzero(rng: &mut Rng8) -> f64 {
    let v: f64 = rng.gen_range(0.1..1.5);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

/// `y` complementary to `x` with `e'y >= n - alpha`, mixing zeros, ones and interior values.
pub fn random_y(rng: &mut Rng8, x: &[f64], alpha: usize) -> Vec<f64> {
    let need = (x.len() - alpha) as f64;
    for _ in 0..200 {
        let y: Vec<f64> = x
            .iter()
            .map(|&v| {
                if v != 0.0 {
                    return 0.0;
                }
                match rng.gen_range(0..10) {
                    0..=2 => 0.0,
                    3..=6 => 1.0,
                    _ => rng.gen_range(0.05..0.95),
                }
            })
            .collect();
        if y.iter().sum::<f64>() >= need {
            return y;
        }
    }
    x.iter().map(|&v| if v == 0.0 { 1.0 } else { 0.0 }).collect()
}

/// A relaxed-feasible point of `p`, by rejection on the `x` part.
pub fn random_point(rng: &mut Rng8, p: &Problem, tol: &Tolerances) -> PairPoint {
    let idx: Vec<usize> = (0..p.n).collect();
    for _ in 0..20_000 {
        let k = rng.gen_range(0..=p.alpha);
        let mut x = vec![0.0; p.n];
        for &i in idx.choose_multiple(rng, k) {
            x[i] = nonzero(rng);
        }
        if constraint_violation(p, &x) <= tol.feas {
            let y = random_y(rng, &x, p.alpha);
            return PairPoint::new(x, y).unwrap();
        }
    }
    panic!("no feasible point found for {}", p.name);
}

/// `I_min` plus a random part of `I_00`.
pub fn random_admissible(rng: &mut Rng8, pt: &PairPoint, tol: &Tolerances) -> Indices {
    let s = index_sets(pt, tol.zero).unwrap();
    let extra: Vec<usize> = s.i00.iter().filter(|_| rng.gen_bool(0.5)).collect();
    s.i_min().union(&Indices::new(extra))
}

/// Adds a linear term to `f` so that `W(i_set)` holds at `pt` with random multipliers.
pub fn plant(rng: &mut Rng8, p: &Problem, pt: &PairPoint, i_set: &Indices, tol: &Tolerances) -> Problem {
    let x = &pt.x;
    let mut r = p.objective.grad(x);
    let add = |r: &mut Vec<f64>, g: Vec<f64>, l: f64| {
        for (ri, gi) in r.iter_mut().zip(g) {
            *ri += l * gi;
        }
    };
    for g in &p.g {
        if g.eval(x) >= -tol.feas {
            add(&mut r, g.grad(x), rng.gen_range(0.0..2.0));
        }
    }
    for h in &p.h {
        add(&mut r, h.grad(x), rng.gen_range(-2.0..2.0));
    }
    for i in i_set.iter() {
        r[i] += rng.gen_range(-2.0..2.0);
    }
    let c: Vec<f64> = r.iter().map(|v| -v).collect();
    p.with_objective(Expr::sum(vec![p.objective.clone(), Expr::affine(c, 0.0)]))
}

/// Affine rows `a'x + c` through a given point: active ones vanish there, the rest are slack.
pub fn affine_rows_at(rng: &mut Rng8, x: &[f64], count: usize, equality: bool) -> Vec<Expr> {
    (0..count)
        .map(|_| {
            let a: Vec<f64> = x.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let ax: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            let slack = if equality || rng.gen_bool(0.5) {
                0.0
            } else {
                rng.gen_range(0.1..1.0)
            };
            Expr::affine(a, -ax - slack)
        })
        .collect()
}
