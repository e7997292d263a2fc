//! Polynomial scalar expressions over `n` real variables.
//!
//! Expressions are immutable trees. Evaluation and differentiation are exact
//! and structural; there is no tape and no numerical differencing on the main
//! path. The canonical text form is a prefix grammar:
//!
//! ```text
//! expr := number | var | "(" op expr+ ")"
//! var  := "x" digits        (1-based)
//! op   := "+" | "*" | "neg" | "^"
//! ```
//!
//! `(^ e k)` takes an integer literal `k >= 1` as its second operand.

mod parse;
mod poly;

use std::fmt;

pub use parse::{parse_expr, ParseError};
pub use poly::{Monomial, Polynomial};

/// Expression node. Variable indices are stored 0-based; the text form is 1-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    /// `offset + sum_j coeffs[j] * x_j`.
    Affine { coeffs: Vec<f64>, offset: f64 },
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Expr::Const(c)
    }

    /// Variable with 0-based index.
    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    pub fn sum(children: Vec<Expr>) -> Self {
        Expr::Sum(children)
    }

    pub fn product(children: Vec<Expr>) -> Self {
        Expr::Product(children)
    }

    pub fn pow(base: Expr, exponent: u32) -> Self {
        assert!(exponent >= 1, "exponent must be >= 1");
        Expr::Pow(Box::new(base), exponent)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(child: Expr) -> Self {
        Expr::Neg(Box::new(child))
    }

    pub fn affine(coeffs: Vec<f64>, offset: f64) -> Self {
        Expr::Affine { coeffs, offset }
    }

    /// Largest 0-based variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Sum(cs) | Expr::Product(cs) => cs.iter().filter_map(Expr::max_var).max(),
            Expr::Pow(b, _) => b.max_var(),
            Expr::Neg(c) => c.max_var(),
            Expr::Affine { coeffs, .. } => coeffs.iter().rposition(|&c| c != 0.0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Sum(cs) => cs.iter().fold(0.0, |acc, c| acc + c.eval(x)),
            Expr::Product(cs) => cs.iter().fold(1.0, |acc, c| acc * c.eval(x)),
            Expr::Pow(b, k) => b.eval(x).powi(*k as i32),
            Expr::Neg(c) => -c.eval(x),
            Expr::Affine { coeffs, offset } => {
                let mut acc = 0.0;
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0.0 {
                        acc += c * x[j];
                    }
                }
                if *offset != 0.0 {
                    acc += *offset;
                }
                acc
            }
        }
    }

    /// Exact gradient at `x`; the result has length `x.len()`.
    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.accumulate_grad(x, 1.0, &mut out);
        out
    }

    /// Value and gradient in one pass.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        (self.eval(x), self.grad(x))
    }

    // Adds `scale * d(self)/dx` into `out`.
    fn accumulate_grad(&self, x: &[f64], scale: f64, out: &mut [f64]) {
        if scale == 0.0 {
            return;
        }
        match self {
            Expr::Const(_) => {}
            Expr::Var(i) => out[*i] += scale,
            Expr::Sum(cs) => {
                for c in cs {
                    c.accumulate_grad(x, scale, out);
                }
            }
            Expr::Product(cs) => {
                let vals: Vec<f64> = cs.iter().map(|c| c.eval(x)).collect();
                for (j, c) in cs.iter().enumerate() {
                    let others = vals
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .fold(1.0, |acc, (_, v)| acc * v);
                    c.accumulate_grad(x, scale * others, out);
                }
            }
            Expr::Pow(b, k) => {
                let db = if *k == 1 {
                    1.0
                } else {
                    f64::from(*k) * b.eval(x).powi(*k as i32 - 1)
                };
                b.accumulate_grad(x, scale * db, out);
            }
            Expr::Neg(c) => c.accumulate_grad(x, -scale, out),
            Expr::Affine { coeffs, .. } => {
                for (j, &c) in coeffs.iter().enumerate() {
                    if c != 0.0 {
                        out[j] += scale * c;
                    }
                }
            }
        }
    }

    /// Max-abs deviation between the exact gradient and central differences with step `h`.
    pub fn grad_check(&self, x: &[f64], h: f64) -> f64 {
        assert!(h > 0.0, "finite-difference step must be positive");
        let exact = self.grad(x);
        let mut probe = x.to_vec();
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let up = self.eval(&probe);
            probe[i] = x[i] - h;
            let down = self.eval(&probe);
            probe[i] = x[i];
            let fd = (up - down) / (2.0 * h);
            worst = worst.max((exact[i] - fd).abs());
        }
        worst
    }

    /// Expands into a polynomial, substituting zero for every variable rejected by `keep`.
    /// Returns `None` if an intermediate or final degree exceeds `max_degree`.
    pub fn to_polynomial(
        &self,
        keep: &dyn Fn(usize) -> bool,
        max_degree: u32,
    ) -> Option<Polynomial> {
        poly::expand(self, keep, max_degree)
    }

    /// Total degree after expansion (capped search at 64).
    pub fn degree(&self) -> Option<u32> {
        self.to_polynomial(&|_| true, 64).map(|p| p.degree())
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.degree(), Some(d) if d <= 1)
    }

    /// Infix rendering for human-readable reports.
    pub fn infix(&self, name: &dyn Fn(usize) -> String) -> String {
        let mut s = String::new();
        self.write_infix(name, &mut s, 0);
        s
    }

    // prec: 0 = sum context, 1 = product context, 2 = power base
    fn write_infix(&self, name: &dyn Fn(usize) -> String, out: &mut String, prec: u8) {
        match self {
            Expr::Const(c) => {
                if *c < 0.0 && prec > 0 {
                    out.push_str(&format!("({c})"));
                } else {
                    out.push_str(&format!("{c}"));
                }
            }
            Expr::Var(i) => out.push_str(&name(*i)),
            Expr::Sum(cs) => {
                if prec > 0 {
                    out.push('(');
                }
                for (k, c) in cs.iter().enumerate() {
                    match c {
                        Expr::Neg(inner) if k > 0 => {
                            out.push_str(" - ");
                            inner.write_infix(name, out, 1);
                        }
                        Expr::Const(v) if k > 0 && *v < 0.0 => {
                            out.push_str(&format!(" - {}", -v));
                        }
                        _ => {
                            if k > 0 {
                                out.push_str(" + ");
                            }
                            c.write_infix(name, out, 0);
                        }
                    }
                }
                if prec > 0 {
                    out.push(')');
                }
            }
            Expr::Product(cs) => {
                if prec > 1 {
                    out.push('(');
                }
                for (k, c) in cs.iter().enumerate() {
                    if k > 0 {
                        out.push('*');
                    }
                    c.write_infix(name, out, 1);
                }
                if prec > 1 {
                    out.push(')');
                }
            }
            Expr::Pow(b, k) => {
                b.write_infix(name, out, 2);
                out.push_str(&format!("^{k}"));
            }
            Expr::Neg(c) => {
                if prec > 0 {
                    out.push('(');
                }
                out.push('-');
                c.write_infix(name, out, 1);
                if prec > 0 {
                    out.push(')');
                }
            }
            Expr::Affine { coeffs, offset } => {
                let mut body = String::new();
                let mut count = 0;
                for (j, &c) in coeffs.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    let sign = match (count, c < 0.0) {
                        (0, true) => "-",
                        (0, false) => "",
                        (_, true) => " - ",
                        (_, false) => " + ",
                    };
                    body.push_str(sign);
                    if c.abs() != 1.0 {
                        body.push_str(&format!("{}*", c.abs()));
                    }
                    body.push_str(&name(j));
                    count += 1;
                }
                if count == 0 {
                    body.push_str(&format!("{offset}"));
                } else if *offset != 0.0 {
                    body.push_str(if *offset < 0.0 { " - " } else { " + " });
                    body.push_str(&format!("{}", offset.abs()));
                    count += 1;
                }
                if prec > 0 && count > 1 {
                    out.push('(');
                    out.push_str(&body);
                    out.push(')');
                } else {
                    out.push_str(&body);
                }
            }
        }
    }
}

/// Canonical prefix form, one space between tokens. Round-trips through [`parse_expr`].
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Sum(cs) => write_op(f, "+", cs),
            Expr::Product(cs) => write_op(f, "*", cs),
            Expr::Pow(b, k) => write!(f, "(^ {b} {k})"),
            Expr::Neg(c) => write!(f, "(neg {c})"),
            Expr::Affine { coeffs, offset } => {
                let nz: Vec<(usize, f64)> = coeffs
                    .iter()
                    .copied()
                    .enumerate()
                    .filter(|&(_, c)| c != 0.0)
                    .collect();
                if nz.is_empty() {
                    return write!(f, "{offset}");
                }
                write!(f, "(+")?;
                for (j, c) in nz {
                    write!(f, " (* {c} x{})", j + 1)?;
                }
                if *offset != 0.0 {
                    write!(f, " {offset}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn write_op(f: &mut fmt::Formatter<'_>, op: &str, cs: &[Expr]) -> fmt::Result {
    write!(f, "({op}")?;
    for c in cs {
        write!(f, " {c}")?;
    }
    write!(f, ")")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str, n: usize) -> Expr {
        parse_expr(s, n).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("(+ x1 x2)", 2).eval(&[0.0, 0.0]), 0.0);
        let f = p("(+ (^ (+ x1 -1) 2) (^ (+ x2 -1) 2) (^ x3 2))", 3);
        assert_eq!(f.eval(&[0.0, 1.0, 0.0]), 1.0);
        assert_eq!(Expr::constant(5.0).eval(&[3.0, -2.0]), 5.0);
        assert_eq!(p("(^ x1 1)", 1).eval(&[-3.25]), -3.25);
    }

    #[test]
    fn grad_examples() {
        let g = p("(+ (neg x1) (^ x2 2))", 2);
        assert_eq!(g.grad(&[0.0, 0.0]), vec![-1.0, 0.0]);
        assert_eq!(p("(+ x1 x2)", 2).grad(&[0.3, -7.0]), vec![1.0, 1.0]);
        // g_i = -x_i + x_n^2 at 0 is -e_i
        let gi = p("(+ (neg x2) (^ x4 2))", 4);
        assert_eq!(gi.grad(&[0.0; 4]), vec![0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn grad_check_examples() {
        let aff = Expr::affine(vec![2.0, -3.0, 0.5], 1.0);
        assert!(aff.grad_check(&[0.1, 0.7, -1.3], 1e-6) <= 1e-9);
        let sq = p("(^ x2 2)", 2);
        assert!(sq.grad_check(&[0.0, 1.0], 1e-6) <= 1e-6);
        assert_eq!(sq.grad(&[0.0, 1.0]), vec![0.0, 2.0]);
        let bil = p("(* x1 x2)", 2);
        assert_eq!(bil.grad(&[3.0, 5.0]), vec![5.0, 3.0]);
        assert!(bil.grad_check(&[3.0, 5.0], 1e-6) <= 1e-5);
    }

    #[test]
    fn affine_prints_and_reparses_to_same_values() {
        let a = Expr::affine(vec![0.0, -1.0, 2.5], 3.0);
        let s = a.to_string();
        assert_eq!(s, "(+ (* -1 x2) (* 2.5 x3) 3)");
        let b = p(&s, 3);
        for x in [[0.1, 0.2, 0.3], [-1.0, 4.0, 1e-3]] {
            assert_eq!(a.eval(&x), b.eval(&x));
        }
        assert_eq!(Expr::affine(vec![0.0, 0.0], 0.0).to_string(), "0");
    }

    #[test]
    fn infix_is_readable() {
        let g = p("(+ (neg x1) (^ x2 2))", 2);
        let names = |i: usize| format!("x{}", i + 1);
        assert_eq!(g.infix(&names), "-x1 + x2^2");
        let t = Expr::affine(vec![0.0, 0.0, -1.0, -1.0], 1.0);
        assert_eq!(t.infix(&names), "-x3 - x4 + 1");
    }

    #[test]
    fn affinity_detection() {
        assert!(p("(+ (* 2 x1) (neg x2) 4)", 2).is_affine());
        assert!(!p("(+ (neg x1) (^ x2 2))", 2).is_affine());
        // cancels to degree 1 after expansion
        assert!(p("(+ (* x1 x1) (neg (^ x1 2)) x2)", 2).is_affine());
    }
}
