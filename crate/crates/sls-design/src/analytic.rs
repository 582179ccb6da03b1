//! Closed-form design measures, optimality ranges and oracle expressions.
//!
//! On the binary space several measures are optimal in closed form over an
//! explicit range of the asymmetry parameter t:
//!
//! * q = 2: the uniform measure on the three points is D-optimal for every
//!   t, while the A-optimal measure puts mass 1 - xi on each unit vector and
//!   2 xi - 1 on (1,1), where xi is the unique root of a quartic in
//!   (1/2, 1/sqrt(2)).
//! * even q = 2m >= 4: uniform mass on the union of the two central weight
//!   classes is D-optimal iff t <= t1(q) = (q+1)/(q+2); uniform mass on the
//!   central class alone is A-optimal iff t <= t2(q).
//! * odd q = 2m+1 >= 3: uniform mass on the class of weight m+1 is both D-
//!   and A-optimal iff t <= t0(q) = q/(q+1).
//!
//! The per-class psi values of these measures, and the inverses of their
//! information matrices, also have closed forms; they serve as independent
//! oracles against the generic matrix route.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::information::Criterion;
use crate::matrix::SymMatrix;
use crate::space::{DesignMeasure, DesignSpace};

/// Absolute accuracy of the quartic root bisection.
pub const XI_ROOT_TOL: f64 = 1e-12;

/// The quartic `1 - 2 t xi - (3 - 2t) xi^2 + 4 t xi^3 - 2 t^2 xi^4`.
///
/// For each t in [0, 1) it is strictly decreasing on [1/2, 1/sqrt(2)], with
/// value (2 - t^2)/8 > 0 at 1/2 and -(1-t)^2/2 < 0 at 1/sqrt(2), so it has
/// exactly one root in between; that root fixes the A-optimal mass split at
/// q = 2.
pub fn xi_quartic(xi: f64, t: f64) -> f64 {
    1.0 - 2.0 * t * xi - (3.0 - 2.0 * t) * xi * xi + 4.0 * t * xi.powi(3) - 2.0 * t * t * xi.powi(4)
}

/// The unique root of the quartic in (1/2, 1/sqrt(2)), by bisection.
pub fn xi_root(t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "asymmetry parameter t={t} not in [0, 1)"
        )));
    }
    let mut lo = 0.5f64;
    let mut hi = std::f64::consts::FRAC_1_SQRT_2;
    debug_assert!(xi_quartic(lo, t) > 0.0 && xi_quartic(hi, t) < 0.0);
    for _ in 0..100 {
        if hi - lo <= XI_ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if xi_quartic(mid, t) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The t-ranges over which the closed-form measures stay optimal.
///
/// `t0` is set for odd q >= 3, `t1` and `t2` for even q >= 4; q = 2 has no
/// class thresholds (its two measures are handled by `xi_t`, attachable via
/// [`ThresholdSet::with_split_root`]).
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSet {
    pub q: usize,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub xi_t: Option<f64>,
}

/// Threshold values for dimension q.
pub fn thresholds(q: usize) -> Result<ThresholdSet> {
    if q < 2 {
        return Err(Error::Domain(format!(
            "design dimension q={q} must be at least 2"
        )));
    }
    let qf = q as f64;
    let (t0, t1, t2) = if !q.is_multiple_of(2) {
        (Some(qf / (qf + 1.0)), None, None)
    } else if q >= 4 {
        let t1 = (qf + 1.0) / (qf + 2.0);
        let qm1sq = (qf - 1.0) * (qf - 1.0);
        let t2 = 1.0 - 0.5 / qm1sq * (qf + (4.0 * qm1sq + qf * qf).sqrt());
        (None, Some(t1), Some(t2))
    } else {
        (None, None, None)
    };
    Ok(ThresholdSet {
        q,
        t0,
        t1,
        t2,
        xi_t: None,
    })
}

impl ThresholdSet {
    /// Attach the quartic root for the given t; only meaningful at q = 2.
    pub fn with_split_root(mut self, t: f64) -> Result<Self> {
        if self.q != 2 {
            return Err(Error::Domain(
                "the mass-split root applies only to q = 2".into(),
            ));
        }
        self.xi_t = Some(xi_root(t)?);
        Ok(self)
    }
}

/// The closed-form measure families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MeasureFamily {
    /// q = 2: uniform mass 1/3 on all three points (D-optimal for every t).
    TwoFactorD,
    /// q = 2: masses (1 - xi, 1 - xi, 2 xi - 1), t-dependent (A-optimal).
    TwoFactorA,
    /// Even q >= 4: uniform mass on the two central weight classes.
    EvenPair,
    /// Even q >= 4: uniform mass on the central weight class.
    EvenCentral,
    /// Odd q >= 3: uniform mass on the class of weight (q+1)/2.
    OddCentral,
}

impl std::fmt::Display for MeasureFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            MeasureFamily::TwoFactorD => "two-factor-d",
            MeasureFamily::TwoFactorA => "two-factor-a",
            MeasureFamily::EvenPair => "even-pair",
            MeasureFamily::EvenCentral => "even-central",
            MeasureFamily::OddCentral => "odd-central",
        };
        write!(f, "{name}")
    }
}

fn require_even(family: MeasureFamily, q: usize) -> Result<usize> {
    if !q.is_multiple_of(2) || q < 4 {
        return Err(Error::Domain(format!(
            "{family} requires even q >= 4, got q={q}"
        )));
    }
    Ok(q / 2)
}

fn require_odd(family: MeasureFamily, q: usize) -> Result<usize> {
    if q.is_multiple_of(2) || q < 3 {
        return Err(Error::Domain(format!(
            "{family} requires odd q >= 3, got q={q}"
        )));
    }
    Ok((q - 1) / 2)
}

/// Class masses of a family on dimension q. `t` is required only by
/// `TwoFactorA`.
pub fn family_class_masses(family: MeasureFamily, q: usize, t: Option<f64>) -> Result<Vec<f64>> {
    match family {
        MeasureFamily::TwoFactorD => {
            if q != 2 {
                return Err(Error::Domain(format!("{family} requires q = 2, got q={q}")));
            }
            Ok(vec![1.0 / 3.0, 1.0 / 3.0])
        }
        MeasureFamily::TwoFactorA => {
            if q != 2 {
                return Err(Error::Domain(format!("{family} requires q = 2, got q={q}")));
            }
            let t =
                t.ok_or_else(|| Error::Domain("the two-factor A-optimal measure needs t".into()))?;
            let xi = xi_root(t)?;
            Ok(vec![1.0 - xi, 2.0 * xi - 1.0])
        }
        MeasureFamily::EvenPair => {
            let m = require_even(family, q)?;
            let (nm, nm1) = (binomial(q, m), binomial(q, m + 1));
            let mass = 1.0 / (nm + nm1) as f64;
            let mut pi = vec![0.0; q];
            pi[m - 1] = mass;
            pi[m] = mass;
            Ok(pi)
        }
        MeasureFamily::EvenCentral => {
            let m = require_even(family, q)?;
            let mut pi = vec![0.0; q];
            pi[m - 1] = 1.0 / binomial(q, m) as f64;
            Ok(pi)
        }
        MeasureFamily::OddCentral => {
            let m = require_odd(family, q)?;
            let mut pi = vec![0.0; q];
            pi[m] = 1.0 / binomial(q, m + 1) as f64;
            Ok(pi)
        }
    }
}

/// Build the family's measure on an existing binary space.
pub fn analytic_measure_on(
    space: &Arc<DesignSpace>,
    family: MeasureFamily,
    t: Option<f64>,
) -> Result<DesignMeasure> {
    if !space.is_binary() {
        return Err(Error::Domain(
            "closed-form families live on binary spaces".into(),
        ));
    }
    let pi = family_class_masses(family, space.q(), t)?;
    DesignMeasure::from_class_masses(space, &pi)
}

/// Build the family's measure, enumerating the binary space of dimension q.
pub fn analytic_measure(family: MeasureFamily, q: usize, t: Option<f64>) -> Result<DesignMeasure> {
    let space = DesignSpace::binary(q)?;
    analytic_measure_on(&space, family, t)
}

/// Closed-form inverse of the information matrix for the class families.
///
/// All three inverses are combinations of the idempotents I - J/q and J/q:
///
/// ```text
///   even pair:    [2(2m+1)/(m+1)] { (I - J/q) + (2m+1)/(1+4m(m+1)(1-t)) (J/q) }
///   even central: [2(2m-1)/m] (I - J/q) + [2/(m(1-t))] (J/q)
///   odd central:  [2(2m+1)/(m+1)] { (I - J/q) + 1/(2(m+1)(1-t)) (J/q) }
/// ```
pub fn closed_form_inverse(family: MeasureFamily, q: usize, t: f64) -> Result<SymMatrix> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "asymmetry parameter t={t} not in [0, 1)"
        )));
    }
    let (gamma, eta) = match family {
        MeasureFamily::EvenPair => {
            let m = require_even(family, q)? as f64;
            let gamma = 2.0 * (2.0 * m + 1.0) / (m + 1.0);
            let eta = gamma * (2.0 * m + 1.0) / (1.0 + 4.0 * m * (m + 1.0) * (1.0 - t));
            (gamma, eta)
        }
        MeasureFamily::EvenCentral => {
            let m = require_even(family, q)? as f64;
            (2.0 * (2.0 * m - 1.0) / m, 2.0 / (m * (1.0 - t)))
        }
        MeasureFamily::OddCentral => {
            let m = require_odd(family, q)? as f64;
            let gamma = 2.0 * (2.0 * m + 1.0) / (m + 1.0);
            (gamma, gamma / (2.0 * (m + 1.0) * (1.0 - t)))
        }
        other => {
            return Err(Error::Domain(format!(
                "no class-form inverse for the {other} family"
            )))
        }
    };
    Ok(SymMatrix::compound_symmetric(
        q,
        gamma,
        (eta - gamma) / q as f64,
    ))
}

/// Closed-form psi value on weight class j for a class family under the
/// given criterion. Only four combinations have closed forms:
/// (even pair, D), (even central, A), (odd central, D), (odd central, A).
///
/// The expressions come from pushing the class quadratic-form identities
/// `x^T (I - J/q) x = j(q-j)/q` and `x^T (J/q) x = j^2/q` through the
/// closed-form inverses above.
pub fn class_psi_oracle(
    family: MeasureFamily,
    criterion: Criterion,
    q: usize,
    j: usize,
    t: f64,
) -> Result<f64> {
    if !(1..=q).contains(&j) {
        return Err(Error::Domain(format!("weight class j={j} outside 1..={q}")));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "asymmetry parameter t={t} not in [0, 1)"
        )));
    }
    let qf = q as f64;
    let jf = j as f64;
    match (family, criterion) {
        (MeasureFamily::EvenPair, Criterion::D) => {
            let m = require_even(family, q)? as f64;
            let coeff = 2.0 * (2.0 * m + 1.0) * (qf + 1.0 - (qf + 2.0) * t)
                / ((m + 1.0) * (1.0 + 4.0 * m * (m + 1.0) * (1.0 - t)));
            Ok(qf - coeff * (jf - m) * (jf - m - 1.0))
        }
        (MeasureFamily::EvenCentral, Criterion::A) => {
            let m = require_even(family, q)? as f64;
            let inv_sq = 1.0 / ((1.0 - t) * (1.0 - t));
            Ok(4.0 / (m * m * qf)
                * ((2.0 * m - 1.0).powi(2) * jf * (qf - jf)
                    + inv_sq * ((1.0 - t) * jf * jf + t * (jf - m) * (jf - m))))
        }
        (MeasureFamily::OddCentral, Criterion::D) => {
            let m = require_odd(family, q)? as f64;
            let corr = (qf - (qf + 1.0) * t) * (jf - m - 1.0).powi(2)
                / ((m + 1.0) * (m + 1.0) * (1.0 - t));
            Ok(qf - corr)
        }
        (MeasureFamily::OddCentral, Criterion::A) => {
            let m = require_odd(family, q)? as f64;
            let inner = ((1.0 - t) * jf * jf + t * (jf - m - 1.0).powi(2))
                / (4.0 * (m + 1.0).powi(2) * (1.0 - t) * (1.0 - t));
            Ok(4.0 * qf / ((m + 1.0) * (m + 1.0)) * (jf * (qf - jf) + inner))
        }
        (family, criterion) => Err(Error::Domain(format!(
            "no closed-form psi for the {family} family under the {criterion} criterion"
        ))),
    }
}

/// `l(j, t) = ((q-1)^2 (1-t)^2 - 1)(j - m)^2 - q (1-t)(j - m)` for even
/// q = 2m. Nonnegative over all classes exactly when t <= t2(q), which is
/// how the A-optimality range of the even central family is located.
pub fn l_function(q: usize, j: usize, t: f64) -> Result<f64> {
    if !q.is_multiple_of(2) || q < 4 {
        return Err(Error::Domain(format!(
            "l(j, t) requires even q >= 4, got q={q}"
        )));
    }
    if !(1..=q).contains(&j) {
        return Err(Error::Domain(format!("weight class j={j} outside 1..={q}")));
    }
    let qf = q as f64;
    let d = j as f64 - qf / 2.0;
    let shrink = (qf - 1.0) * (qf - 1.0) * (1.0 - t) * (1.0 - t) - 1.0;
    Ok(shrink * d * d - qf * (1.0 - t) * d)
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 1..=k {
        acc = acc * (n - k + i) as u64 / i as u64;
    }
    acc
}
