use serde::{Deserialize, Serialize};

/// Numerical tolerances used throughout. Every report embeds the values it ran with.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Threshold under which a coordinate counts as zero (index sets, cardinality).
    pub zero: f64,
    /// Constraint-residual tolerance for feasibility.
    pub feas: f64,
    /// Simplex pivot / feasibility tolerance.
    pub lp: f64,
    /// Residual acceptance for stationarity certificates.
    pub cert: f64,
    /// Cone membership tolerance.
    pub cone: f64,
    /// Relative rank tolerance (scaled by the largest row norm).
    pub rank: f64,
    /// Objective tie tolerance in the global solver.
    pub tie: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero: 1e-9,
            feas: 1e-8,
            lp: 1e-9,
            cert: 1e-7,
            cone: 1e-9,
            rank: 1e-8,
            tie: 1e-8,
        }
    }
}
