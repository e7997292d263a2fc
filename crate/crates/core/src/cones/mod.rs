//! Polyhedral cones, finite unions of them, and constraint qualifications.

mod cq;
mod dd;

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2};

pub use cq::{
    active_gradients_relaxed, check_acq, check_gcq, check_licq, check_mfcq, linearized_cone,
    tangent_cone_pieces, ActiveGradients, AffineRow, Cq, CqReport, PairSet, PieceLabel,
};
pub use dd::Generators;

/// Largest ambient dimension for generator enumeration.
pub const DIM_CAP: usize = 12;
/// Random conic combinations tried when union inclusion cannot be decided by rays alone.
pub const UNION_SAMPLES: usize = 1000;

/// `{d : E d = 0, A d <= 0}`.
#[derive(Debug, Serialize)]
pub struct PolyhedralCone {
    pub dim: usize,
    pub eq: Vec<Vec<f64>>,
    pub ineq: Vec<Vec<f64>>,
    #[serde(skip)]
    cache: OnceLock<Generators>,
}

impl Clone for PolyhedralCone {
    fn clone(&self) -> Self {
        let cache = OnceLock::new();
        if let Some(g) = self.cache.get() {
            let _ = cache.set(g.clone());
        }
        PolyhedralCone {
            dim: self.dim,
            eq: self.eq.clone(),
            ineq: self.ineq.clone(),
            cache,
        }
    }
}

impl PartialEq for PolyhedralCone {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.eq == other.eq && self.ineq == other.ineq
    }
}

fn normalized(rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut r in rows {
        let m = r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if m == 0.0 {
            continue;
        }
        for v in r.iter_mut() {
            *v /= m;
        }
        if !out.iter().any(|w| w.iter().zip(&r).all(|(a, b)| (a - b).abs() <= 1e-12)) {
            out.push(r);
        }
    }
    out
}

impl PolyhedralCone {
    /// Zero rows are dropped and the rest scaled to max-abs 1.
    pub fn new(dim: usize, eq: Vec<Vec<f64>>, ineq: Vec<Vec<f64>>) -> Result<Self> {
        if eq.iter().chain(&ineq).any(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: eq.iter().chain(&ineq).map(Vec::len).find(|&l| l != dim).unwrap_or(0),
            });
        }
        Ok(PolyhedralCone {
            dim,
            eq: normalized(eq),
            ineq: normalized(ineq),
            cache: OnceLock::new(),
        })
    }

    pub fn full_space(dim: usize) -> Self {
        PolyhedralCone {
            dim,
            eq: Vec::new(),
            ineq: Vec::new(),
            cache: OnceLock::new(),
        }
    }

    /// Halfspace membership with tolerance scaled by `|d|`.
    pub fn contains(&self, d: &[f64], eps: f64) -> bool {
        let t = eps * norm2(d).max(1.0);
        self.eq.iter().all(|a| dot(a, d).abs() <= t) && self.ineq.iter().all(|a| dot(a, d) <= t)
    }

    /// Extreme rays and lineality basis, computed once and cached.
    pub fn generators(&self, eps: f64) -> Result<&Generators> {
        if self.dim > DIM_CAP {
            return Err(Error::CapExceeded {
                what: "cone dimension",
                size: self.dim,
                cap: DIM_CAP,
            });
        }
        if let Some(g) = self.cache.get() {
            return Ok(g);
        }
        let g = dd::double_description(self.dim, &self.eq, &self.ineq, eps);
        for v in g.conic_spanning_set() {
            if !self.contains(&v, eps * 1e2) {
                return Err(Error::Internal(format!(
                    "generator {v:?} escapes its cone"
                )));
            }
        }
        Ok(self.cache.get_or_init(|| g))
    }

    /// `{p : p'd <= 0 for all d in self}`: rays become inequality rows, lineality equality rows.
    pub fn polar(&self, eps: f64) -> Result<PolyhedralCone> {
        let g = self.generators(eps)?;
        PolyhedralCone::new(self.dim, g.lineality.clone(), g.rays.clone())
    }

    /// True when every generator of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &PolyhedralCone, eps: f64) -> Result<bool> {
        Ok(self
            .generators(eps)?
            .conic_spanning_set()
            .iter()
            .all(|v| other.contains(v, eps)))
    }
}

/// Mutual inclusion of generator sets.
pub fn cones_equal(a: &PolyhedralCone, b: &PolyhedralCone, eps: f64) -> Result<bool> {
    Ok(a.is_subset_of(b, eps)? && b.is_subset_of(a, eps)?)
}

/// Finite union of cones, each piece labeled by where it came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeUnion<L> {
    pub dim: usize,
    pub pieces: Vec<(L, PolyhedralCone)>,
}

impl<L: Sync> ConeUnion<L> {
    pub fn contains(&self, d: &[f64], eps: f64) -> bool {
        self.pieces.iter().any(|(_, c)| c.contains(d, eps))
    }

    /// Fills every piece's generator cache, in parallel.
    pub fn generators(&self, eps: f64) -> Result<Vec<&Generators>> {
        self.pieces
            .par_iter()
            .map(|(_, c)| c.generators(eps))
            .collect()
    }

    /// Polar of the union: the intersection of the piece polars.
    pub fn polar(&self, eps: f64) -> Result<PolyhedralCone> {
        let mut eq = Vec::new();
        let mut ineq = Vec::new();
        for g in self.generators(eps)? {
            eq.extend(g.lineality.iter().cloned());
            ineq.extend(g.rays.iter().cloned());
        }
        PolyhedralCone::new(self.dim, eq, ineq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UnionComparison {
    pub equal: bool,
    pub method: Method,
    /// a direction in one side but not the other, when unequal
    pub witness: Option<Vec<f64>>,
}

/// Decides whether the union equals `c`: every piece inside `c`, and `c` inside the union.
pub fn union_equals_cone<L: Sync>(
    u: &ConeUnion<L>,
    c: &PolyhedralCone,
    eps: f64,
) -> Result<UnionComparison> {
    for g in u.generators(eps)? {
        if let Some(v) = g.conic_spanning_set().into_iter().find(|v| !c.contains(v, eps)) {
            return Ok(UnionComparison {
                equal: false,
                method: Method::Exact,
                witness: Some(v),
            });
        }
    }
    let spanning = c.generators(eps)?.conic_spanning_set();
    let mut homes: Vec<Vec<usize>> = Vec::with_capacity(spanning.len());
    for v in &spanning {
        let h: Vec<usize> = (0..u.pieces.len())
            .filter(|&k| u.pieces[k].1.contains(v, eps))
            .collect();
        if h.is_empty() {
            return Ok(UnionComparison {
                equal: false,
                method: Method::Exact,
                witness: Some(v.clone()),
            });
        }
        homes.push(h);
    }
    let one_piece = (0..u.pieces.len()).any(|k| homes.iter().all(|h| h.contains(&k)));
    if one_piece || spanning.is_empty() {
        return Ok(UnionComparison {
            equal: true,
            method: Method::Exact,
            witness: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..UNION_SAMPLES {
        let mut d = vec![0.0; c.dim];
        for v in &spanning {
            let w: f64 = rng.gen_range(0.0..1.0);
            for (di, vi) in d.iter_mut().zip(v) {
                *di += w * vi;
            }
        }
        if !u.contains(&d, eps) {
            return Ok(UnionComparison {
                equal: false,
                method: Method::Exact,
                witness: Some(d),
            });
        }
    }
    Ok(UnionComparison {
        equal: true,
        method: Method::Sampled,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-9;

    fn wedge() -> PolyhedralCone {
        // 0 <= d2 <= d1
        PolyhedralCone::new(2, vec![], vec![vec![0.0, -1.0], vec![-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn wedge_generators() {
        let g = wedge().generators(EPS).unwrap().clone();
        assert!(g.lineality.is_empty());
        assert_eq!(g.rays.len(), 2);
        assert!(g.rays.contains(&vec![1.0, 0.0]));
        assert!(g.rays.contains(&vec![1.0, 1.0]));
    }

    #[test]
    fn full_space_and_origin() {
        let g = PolyhedralCone::full_space(2).generators(EPS).unwrap().clone();
        assert_eq!(g.lineality.len(), 2);
        assert!(g.rays.is_empty());
        let z = PolyhedralCone::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![]).unwrap();
        assert!(z.generators(EPS).unwrap().is_trivial());
        let p = PolyhedralCone::full_space(2).polar(EPS).unwrap();
        assert!(p.generators(EPS).unwrap().is_trivial());
    }

    #[test]
    fn half_line_polar() {
        // {d1 >= 0, d2 = 0}
        let c = PolyhedralCone::new(2, vec![vec![0.0, 1.0]], vec![vec![-1.0, 0.0]]).unwrap();
        let p = c.polar(EPS).unwrap();
        let expected = PolyhedralCone::new(2, vec![], vec![vec![1.0, 0.0]]).unwrap();
        assert!(cones_equal(&p, &expected, EPS).unwrap());
        assert!(!cones_equal(&p, &wedge().polar(EPS).unwrap(), EPS).unwrap());
    }

    #[test]
    fn axes_union_is_not_the_quadrant() {
        let quadrant =
            PolyhedralCone::new(2, vec![], vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        let axes = ConeUnion {
            dim: 2,
            pieces: vec![
                ("x", PolyhedralCone::new(2, vec![vec![1.0, 0.0]], vec![vec![0.0, -1.0]]).unwrap()),
                ("y", PolyhedralCone::new(2, vec![vec![0.0, 1.0]], vec![vec![-1.0, 0.0]]).unwrap()),
            ],
        };
        let cmp = union_equals_cone(&axes, &quadrant, EPS).unwrap();
        assert!(!cmp.equal);
        assert_eq!(cmp.method, Method::Exact);
        // the polars agree: both are the nonpositive quadrant
        assert!(cones_equal(&axes.polar(EPS).unwrap(), &quadrant.polar(EPS).unwrap(), EPS).unwrap());
    }

    #[test]
    fn dimension_cap() {
        let c = PolyhedralCone::full_space(13);
        assert!(matches!(c.generators(EPS), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn pointed_three_dimensional_cone() {
        // d >= 0 in R^3 intersected with d1 + d2 - d3 <= 0 (not simplicial)
        let c = PolyhedralCone::new(
            3,
            vec![],
            vec![
                vec![-1.0, 0.0, 0.0],
                vec![0.0, -1.0, 0.0],
                vec![0.0, 0.0, -1.0],
                vec![1.0, 1.0, -1.0],
            ],
        )
        .unwrap();
        let g = c.generators(EPS).unwrap();
        assert_eq!(g.rays.len(), 3);
        for r in [vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]] {
            assert!(g.rays.contains(&r), "{r:?}");
        }
    }
}
