//! Fixtures shared by the benchmarks.

use mpcac_core::lp::{LinearProgram, Sign};
use mpcac_core::PairPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A feasible `A x = b, x >= 0` system with `m` rows and `n` columns.
pub fn feasibility_lp(m: usize, n: usize, seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let b = a
        .iter()
        .map(|row| row.iter().zip(&x).map(|(p, q)| p * q).sum())
        .collect();
    LinearProgram::feasibility(a, b, vec![Sign::Nonnegative; n])
}

/// Random inequality rows through the origin in `dim` dimensions.
pub fn cone_rows(rows: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rows)
        .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect()
}

/// `x = 0`, `y = e_1`: the degenerate point of the stationarity family.
pub fn family_point(n: usize) -> PairPoint {
    let mut y = vec![0.0; n];
    y[0] = 1.0;
    PairPoint::new(vec![0.0; n], y).expect("matching lengths")
}
