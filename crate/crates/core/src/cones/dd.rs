//! Double description: halfspace form to generators.

use serde::Serialize;

use crate::linalg::{dot, norm2, orthonormalize};

/// Extreme rays plus an orthonormal lineality basis.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Generators {
    pub rays: Vec<Vec<f64>>,
    pub lineality: Vec<Vec<f64>>,
}

impl Generators {
    pub fn is_trivial(&self) -> bool {
        self.rays.is_empty() && self.lineality.is_empty()
    }

    /// Rays followed by both signs of each lineality vector.
    pub fn conic_spanning_set(&self) -> Vec<Vec<f64>> {
        let mut out = self.rays.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(l.iter().map(|v| -v).collect());
        }
        out
    }
}

fn scale_max_abs(v: &mut [f64]) -> bool {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if m == 0.0 {
        return false;
    }
    for x in v.iter_mut() {
        *x /= m;
    }
    true
}

struct Row<'a> {
    a: &'a [f64],
    eq: bool,
}

/// Generators of `{d : E d = 0, A d <= 0}`. Rows are assumed scaled to max-abs 1.
pub(crate) fn double_description(
    dim: usize,
    eq: &[Vec<f64>],
    ineq: &[Vec<f64>],
    tol: f64,
) -> Generators {
    let rows: Vec<Row> = eq
        .iter()
        .map(|a| Row { a, eq: true })
        .chain(ineq.iter().map(|a| Row { a, eq: false }))
        .collect();
    let mut lin: Vec<Vec<f64>> = (0..dim)
        .map(|j| (0..dim).map(|k| if k == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut rays: Vec<Vec<f64>> = Vec::new();

    for (t, row) in rows.iter().enumerate() {
        let a = row.a;
        // pivot on the lineality vector with the largest product
        let best = lin
            .iter()
            .enumerate()
            .map(|(k, l)| (k, dot(a, l)))
            .filter(|(_, v)| v.abs() > tol)
            .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()));
        if let Some((k, ap)) = best {
            let pivot = lin.remove(k);
            for l in lin.iter_mut() {
                let c = dot(a, l) / ap;
                for (li, pi) in l.iter_mut().zip(&pivot) {
                    *li -= c * pi;
                }
            }
            for r in rays.iter_mut() {
                let c = dot(a, r) / ap;
                for (ri, pi) in r.iter_mut().zip(&pivot) {
                    *ri -= c * pi;
                }
                scale_max_abs(r);
            }
            if !row.eq {
                let s = if ap > 0.0 { -1.0 } else { 1.0 };
                let mut q: Vec<f64> = pivot.iter().map(|v| s * v).collect();
                scale_max_abs(&mut q);
                rays.push(q);
            }
            continue;
        }

        let vals: Vec<f64> = rays.iter().map(|r| dot(a, r)).collect();
        let zero_sets: Vec<Vec<bool>> = rays
            .iter()
            .map(|r| rows[..t].iter().map(|q| dot(q.a, r).abs() <= tol).collect())
            .collect();
        let plus: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > tol).collect();
        let minus: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -tol).collect();
        if plus.is_empty() && (!row.eq || minus.is_empty()) {
            continue;
        }
        let mut next: Vec<Vec<f64>> = Vec::new();
        for k in 0..rays.len() {
            let keep = if row.eq {
                vals[k].abs() <= tol
            } else {
                vals[k] <= tol
            };
            if keep {
                next.push(rays[k].clone());
            }
        }
        let needed = dim.saturating_sub(lin.len() + 2);
        for &p in &plus {
            for &m in &minus {
                let common: Vec<bool> = zero_sets[p]
                    .iter()
                    .zip(&zero_sets[m])
                    .map(|(x, y)| *x && *y)
                    .collect();
                if common.iter().filter(|&&b| b).count() < needed {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|r| {
                    r == p
                        || r == m
                        || common
                            .iter()
                            .zip(&zero_sets[r])
                            .any(|(&c, &z)| c && !z)
                });
                if !adjacent {
                    continue;
                }
                let mut v: Vec<f64> = rays[m]
                    .iter()
                    .zip(&rays[p])
                    .map(|(rm, rp)| vals[p] * rm - vals[m] * rp)
                    .collect();
                if scale_max_abs(&mut v) {
                    next.push(v);
                }
            }
        }
        rays = dedup(next, tol);
    }

    let lineality = orthonormalize(&lin, 1e-10);
    let mut out_rays = Vec::new();
    for mut r in rays {
        for l in &lineality {
            let c = dot(&r, l);
            for (ri, li) in r.iter_mut().zip(l) {
                *ri -= c * li;
            }
        }
        if norm2(&r) > tol && scale_max_abs(&mut r) {
            for v in r.iter_mut() {
                if v.abs() <= 1e-14 {
                    *v = 0.0;
                }
            }
            out_rays.push(r);
        }
    }
    let mut out_rays = dedup(out_rays, tol);
    out_rays.sort_by(|x, y| {
        for (a, b) in x.iter().zip(y) {
            match b.total_cmp(a) {
                std::cmp::Ordering::Equal => continue,
                o => return o,
            }
        }
        std::cmp::Ordering::Equal
    });
    Generators {
        rays: out_rays,
        lineality,
    }
}

fn dedup(vs: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let dup = out
            .iter()
            .any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= tol.max(1e-12) * 10.0));
        if !dup {
            out.push(v);
        }
    }
    out
}
