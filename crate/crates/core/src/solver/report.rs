//! Full stationarity and CQ diagnostic at a candidate solution.

use serde::Serialize;

use crate::cones::{
    active_gradients_relaxed, check_acq, check_gcq, check_licq, check_mfcq, Cq, Method, PairSet,
    DIM_CAP,
};
use crate::error::{Error, Result};
use crate::indices::Indices;
use crate::model::{
    companion_y, constraint_violation, index_sets, is_feasible_relaxed, IndexSets, PairPoint,
    Problem,
};
use crate::stationarity::{
    check_kkt_relaxed, check_m_stationary, check_s_stationary, stationarity_profile,
    StationarityProfile, Verdict, DEFAULT_PROFILE_CAP,
};
use crate::tol::Tolerances;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CqEntry {
    pub which: Cq,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnosis {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// "given" or "companion"
    pub y_source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_unique: Option<bool>,
    pub index_sets: IndexSets,
    pub i_min: Indices,
    pub i_max: Indices,
    pub kkt: Verdict,
    pub s: Verdict,
    pub m: Verdict,
    pub profile: StationarityProfile,
    pub cq: Vec<CqEntry>,
}

/// Diagnoses an MPCaC-feasible `x`, paired with `y` when given and with the companion
/// `y` otherwise.
pub fn kkt_residual_mpcac_report(
    p: &Problem,
    x: &[f64],
    y: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<Diagnosis> {
    if x.len() != p.n {
        return Err(Error::Dimension {
            expected: p.n,
            got: x.len(),
        });
    }
    let viol = constraint_violation(p, x);
    if viol > tol.feas {
        return Err(Error::InfeasiblePoint(format!(
            "constraint violation {viol:e} exceeds {:e}",
            tol.feas
        )));
    }
    let (y, source, unique) = match y {
        Some(y) => (y.to_vec(), "given", None),
        None => {
            let (y, u) = companion_y(x, p.alpha, tol.zero)?;
            (y, "companion", Some(u))
        }
    };
    let pt = PairPoint::new(x.to_vec(), y.clone())?;
    if !is_feasible_relaxed(p, &pt, tol) {
        return Err(Error::InfeasiblePoint(
            "the pair (x, y) is not feasible for the relaxed problem".into(),
        ));
    }
    let sets = index_sets(&pt, tol.zero)?;
    let kkt = check_kkt_relaxed(p, &pt, tol)?.verdict;
    let s = check_s_stationary(p, &pt, tol)?.verdict;
    let m = check_m_stationary(p, &pt, tol)?.verdict;
    let profile = stationarity_profile(p, &pt, DEFAULT_PROFILE_CAP, tol)?;

    let mut cq = Vec::new();
    let ag = active_gradients_relaxed(p, &pt, tol)?;
    let licq = check_licq(&ag, tol);
    cq.push(CqEntry {
        which: Cq::Licq,
        verdict: Some(licq.verdict),
        method: Some(licq.method),
        detail: licq.detail,
    });
    let mfcq = check_mfcq(&ag, tol)?;
    cq.push(CqEntry {
        which: Cq::Mfcq,
        verdict: Some(mfcq.verdict),
        method: Some(mfcq.method),
        detail: mfcq.detail,
    });
    let refusal = if !p.has_affine_constraints() {
        Some("out of certified range: nonlinear constraints".to_string())
    } else if 2 * p.n > DIM_CAP {
        Some(format!("out of certified range: 2n = {} > {DIM_CAP}", 2 * p.n))
    } else {
        None
    };
    match refusal {
        Some(msg) => {
            for which in [Cq::Acq, Cq::Gcq] {
                cq.push(CqEntry {
                    which,
                    verdict: None,
                    method: None,
                    detail: msg.clone(),
                });
            }
        }
        None => {
            let set = PairSet::from_problem(p)?;
            for r in [check_acq(&set, &pt, tol)?, check_gcq(&set, &pt, tol)?] {
                cq.push(CqEntry {
                    which: r.which,
                    verdict: Some(r.verdict),
                    method: Some(r.method),
                    detail: r.detail,
                });
            }
        }
    }
    Ok(Diagnosis {
        x: x.to_vec(),
        y,
        y_source: source,
        y_unique: unique,
        i_min: sets.i_min(),
        i_max: sets.i_max(),
        index_sets: sets,
        kkt,
        s,
        m,
        profile,
        cq,
    })
}
