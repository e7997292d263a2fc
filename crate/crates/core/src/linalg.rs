//! Small dense helpers over nalgebra, all on row-list matrices.

use nalgebra::{DMatrix, DVector};

pub(crate) fn to_matrix(rows: &[Vec<f64>], ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j])
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Numerical rank with threshold `rel * (largest row norm)`.
pub fn rank(rows: &[Vec<f64>], ncols: usize, rel: f64) -> usize {
    if rows.is_empty() || ncols == 0 {
        return 0;
    }
    let scale = rows.iter().map(|r| norm2(r)).fold(0.0_f64, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let sv = to_matrix(rows, ncols).singular_values();
    sv.iter().filter(|&&s| s > rel * scale).count()
}

/// Orthonormal basis of `{d : rows d = 0}`.
pub fn null_space(rows: &[Vec<f64>], ncols: usize, rel: f64) -> Vec<Vec<f64>> {
    if ncols == 0 {
        return Vec::new();
    }
    if rows.is_empty() {
        return (0..ncols)
            .map(|j| (0..ncols).map(|k| if k == j { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    let scale = rows.iter().map(|r| norm2(r)).fold(0.0_f64, f64::max);
    // pad to a square-or-taller matrix so that V is full
    let mut padded = rows.to_vec();
    while padded.len() < ncols {
        padded.push(vec![0.0; ncols]);
    }
    let svd = to_matrix(&padded, ncols).svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut out = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= rel * scale.max(f64::MIN_POSITIVE) {
            out.push(vt.row(k).iter().copied().collect());
        }
    }
    out
}

/// Least-squares solution of `A z = b` (minimum norm).
pub fn lstsq(rows: &[Vec<f64>], ncols: usize, b: &[f64]) -> Vec<f64> {
    if rows.is_empty() || ncols == 0 {
        return vec![0.0; ncols];
    }
    let a = to_matrix(rows, ncols);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * 1e-12 * (rows.len().max(ncols) as f64);
    let rhs = DVector::from_column_slice(b);
    match svd.solve(&rhs, eps) {
        Ok(z) => z.iter().copied().collect(),
        Err(_) => vec![0.0; ncols],
    }
}

/// Gram-Schmidt with re-orthogonalization; drops vectors that fall below `tol`.
pub fn orthonormalize(vs: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let nrm = norm2(&w);
        if nrm > tol {
            basis.push(w.iter().map(|x| x / nrm).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_null_space() {
        let rows = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]];
        assert_eq!(rank(&rows, 3, 1e-8), 1);
        let ns = null_space(&rows, 3, 1e-8);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(v, &rows[0]).abs() < 1e-12);
            assert!((norm2(v) - 1.0).abs() < 1e-12);
        }
        assert_eq!(null_space(&[], 2, 1e-8).len(), 2);
        assert!(null_space(&[vec![1.0, 0.0], vec![0.0, 1.0]], 2, 1e-8).is_empty());
    }

    #[test]
    fn least_squares_min_norm() {
        let z = lstsq(&[vec![1.0, 1.0]], 2, &[2.0]);
        assert!((z[0] - 1.0).abs() < 1e-12 && (z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_drops_dependent() {
        let b = orthonormalize(&[vec![1.0, 0.0], vec![2.0, 0.0], vec![1.0, 1.0]], 1e-10);
        assert_eq!(b.len(), 2);
        assert!((b[1][1] - 1.0).abs() < 1e-12);
    }
}
