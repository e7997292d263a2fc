use std::collections::BTreeMap;

use super::Expr;

/// Sorted list of `(variable, exponent)` pairs; the empty monomial is the constant term.
pub type Monomial = Vec<(usize, u32)>;

/// Sparse polynomial with deterministic (ordered) term storage.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

fn mono_degree(m: &Monomial) -> u32 {
    m.iter().map(|&(_, e)| e).sum()
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        let mut p = Self::default();
        p.add_term(Vec::new(), c);
        p
    }

    fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&m);
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(mono_degree).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn constant_term(&self) -> f64 {
        self.terms.get(&Vec::new()).copied().unwrap_or(0.0)
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    fn scale(&self, s: f64) -> Self {
        let mut out = Self::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * s);
        }
        out
    }

    fn mul(&self, other: &Self, max_degree: u32) -> Option<Self> {
        let mut out = Self::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = mono_mul(ma, mb);
                out.add_term(m, ca * cb);
            }
        }
        (out.degree() <= max_degree).then_some(out)
    }

    /// Linear coefficients over `dim` variables (constant term excluded).
    /// Returns `None` if the polynomial has degree above one.
    pub fn linear_part(&self, dim: usize) -> Option<(Vec<f64>, f64)> {
        if self.degree() > 1 {
            return None;
        }
        let mut coeffs = vec![0.0; dim];
        for (m, c) in &self.terms {
            if let [(v, 1)] = m.as_slice() {
                coeffs[*v] += c;
            }
        }
        Some((coeffs, self.constant_term()))
    }

    /// `(H, c, d)` with `p(x) = 0.5 x'Hx + c'x + d`, indices mapped through `slot`.
    /// Returns `None` above degree two.
    pub fn quadratic_part(
        &self,
        dim: usize,
        slot: &dyn Fn(usize) -> usize,
    ) -> Option<(Vec<Vec<f64>>, Vec<f64>, f64)> {
        if self.degree() > 2 {
            return None;
        }
        let mut h = vec![vec![0.0; dim]; dim];
        let mut lin = vec![0.0; dim];
        let mut d = 0.0;
        for (m, c) in &self.terms {
            match m.as_slice() {
                [] => d += c,
                [(v, 1)] => lin[slot(*v)] += c,
                [(v, 2)] => h[slot(*v)][slot(*v)] += 2.0 * c,
                [(a, 1), (b, 1)] => {
                    h[slot(*a)][slot(*b)] += c;
                    h[slot(*b)][slot(*a)] += c;
                }
                _ => unreachable!("degree already checked"),
            }
        }
        Some((h, lin, d))
    }
}

pub(super) fn expand(e: &Expr, keep: &dyn Fn(usize) -> bool, max_degree: u32) -> Option<Polynomial> {
    let p = match e {
        Expr::Const(c) => Polynomial::constant(*c),
        Expr::Var(i) => {
            let mut p = Polynomial::default();
            if keep(*i) {
                p.add_term(vec![(*i, 1)], 1.0);
            }
            p
        }
        Expr::Sum(cs) => {
            let mut acc = Polynomial::default();
            for c in cs {
                acc = acc.add(&expand(c, keep, max_degree)?);
            }
            acc
        }
        Expr::Product(cs) => {
            let mut acc = Polynomial::constant(1.0);
            for c in cs {
                acc = acc.mul(&expand(c, keep, max_degree)?, max_degree)?;
            }
            acc
        }
        Expr::Pow(b, k) => {
            let base = expand(b, keep, max_degree)?;
            let mut acc = Polynomial::constant(1.0);
            for _ in 0..*k {
                acc = acc.mul(&base, max_degree)?;
            }
            acc
        }
        Expr::Neg(c) => expand(c, keep, max_degree)?.scale(-1.0),
        Expr::Affine { coeffs, offset } => {
            let mut p = Polynomial::constant(*offset);
            for (j, &c) in coeffs.iter().enumerate() {
                if keep(j) {
                    p.add_term(vec![(j, 1)], c);
                }
            }
            p
        }
    };
    (p.degree() <= max_degree).then_some(p)
}

#[cfg(test)]
mod tests {
    use crate::expr::parse_expr;

    #[test]
    fn restriction_drops_off_support_monomials() {
        let g = parse_expr("(+ (neg x1) (^ x2 2))", 2).unwrap();
        let full = g.to_polynomial(&|_| true, 8).unwrap();
        assert_eq!(full.degree(), 2);
        let on1 = g.to_polynomial(&|v| v == 0, 8).unwrap();
        assert_eq!(on1.linear_part(2), Some((vec![-1.0, 0.0], 0.0)));
        assert!(g.to_polynomial(&|_| true, 1).is_none());
    }

    #[test]
    fn quadratic_extraction() {
        let f = parse_expr("(+ (^ (+ x1 -1) 2) (* 3 x1 x2) x2)", 2).unwrap();
        let p = f.to_polynomial(&|_| true, 2).unwrap();
        let (h, c, d) = p.quadratic_part(2, &|v| v).unwrap();
        assert_eq!(h, vec![vec![2.0, 3.0], vec![3.0, 0.0]]);
        assert_eq!(c, vec![-2.0, 1.0]);
        assert_eq!(d, 1.0);
    }
}
