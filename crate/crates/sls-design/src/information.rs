//! Information objects under second-order least squares estimation.
//!
//! For a design measure p on points x_1..x_n and an asymmetry parameter
//! t in [0, 1), the moment objects are
//!
//! ```text
//!   G(p) = sum_i p_i x_i x_i^T      (second moment matrix)
//!   g(p) = sum_i p_i x_i            (mean vector)
//!   H(p) = G(p) - t g(p) g(p)^T     (information matrix)
//! ```
//!
//! The asymptotic covariance of the estimator is proportional to H(p)^{-1},
//! so the D-criterion maximizes log det H(p) and the A-criterion minimizes
//! tr H(p)^{-1}. Optimality is characterized pointwise: with
//!
//! ```text
//!   psi_D(x) = (1-t) x^T H^{-1} x + t (x-g)^T H^{-1} (x-g)
//!   psi_A(x) = (1-t) x^T H^{-2} x + t (x-g)^T H^{-2} (x-g)
//! ```
//!
//! a measure with nonsingular H is D-optimal iff psi_D(x) <= q for every
//! point of the space, and A-optimal iff psi_A(x) <= tr H^{-1}. A uniform
//! violation bounded by delta certifies the criterion value to within delta
//! of the optimum, which is what the multiplicative solver's stopping rule
//! leans on.
//!
//! Because H depends on p through both G and g, it is nonlinear in p for
//! t > 0; the criteria are nevertheless concave, and the psi functions above
//! are exactly their one-sided directional derivatives (up to centering).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;
use crate::space::{same_space, DesignMeasure, DesignSpace};

/// H is declared singular when its smallest eigenvalue, after explicit
/// symmetrization, falls below `SINGULARITY_RTOL * (1 + largest eigenvalue)`.
pub const SINGULARITY_RTOL: f64 = 1e-12;

/// Default tolerance on the psi gap for optimality verdicts.
pub const DEFAULT_OPTIMALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Criterion {
    D,
    A,
}

impl std::fmt::Display for Criterion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Criterion::D => write!(f, "D"),
            Criterion::A => write!(f, "A"),
        }
    }
}

/// Central moments of the error distribution and the derived asymmetry
/// parameter t = mu3^2 / (mu2 (mu4 - mu2^2)).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorMomentProfile {
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub t: f64,
}

impl ErrorMomentProfile {
    pub fn new(mu2: f64, mu3: f64, mu4: f64) -> Result<Self> {
        let t = moments_to_t(mu2, mu3, mu4)?;
        Ok(ErrorMomentProfile { mu2, mu3, mu4, t })
    }
}

/// t = mu3^2 / (mu2 (mu4 - mu2^2)). Symmetric errors give t = 0; t grows
/// with asymmetry and is strictly below 1 for any nondegenerate distribution.
pub fn moments_to_t(mu2: f64, mu3: f64, mu4: f64) -> Result<f64> {
    if !mu2.is_finite() || mu2 <= 0.0 {
        return Err(Error::Domain(format!(
            "second central moment must be positive, got {mu2}"
        )));
    }
    let spread = mu4 - mu2 * mu2;
    if !spread.is_finite() || spread <= 0.0 {
        return Err(Error::Domain(format!(
            "mu4 - mu2^2 must be positive, got {spread}"
        )));
    }
    let t = mu3 * mu3 / (mu2 * spread);
    if t >= 1.0 {
        return Err(Error::DegenerateMoments { t });
    }
    Ok(t)
}

fn check_t(t: f64) -> Result<()> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "asymmetry parameter t={t} not in [0, 1)"
        )));
    }
    Ok(())
}

/// The assembled moment objects of a measure, with singularity resolved and,
/// when nonsingular, the inverse and log-determinant of H.
#[derive(Debug, Clone, Serialize)]
pub struct InformationSummary {
    pub t: f64,
    /// g(p).
    pub mean_vector: Vec<f64>,
    /// G(p).
    pub moment_matrix: SymMatrix,
    /// H(p) = G(p) - t g(p) g(p)^T.
    pub information_matrix: SymMatrix,
    pub singular: bool,
    pub inverse: Option<SymMatrix>,
    pub log_det: Option<f64>,
}

impl InformationSummary {
    fn from_parts(mean: Vec<f64>, moment: SymMatrix, t: f64) -> Self {
        let mut h = moment.clone();
        h.add_scaled_outer(&mean, -t);
        let hs = h.symmetrized();
        let (lo, hi) = hs.eigenvalue_range();
        let singular = lo < SINGULARITY_RTOL * (1.0 + hi);
        let (inverse, log_det) = if singular {
            (None, None)
        } else {
            // Nonsingular H is positive definite here: it is a nonnegative
            // definite Gram-type matrix, so the factorization cannot fail.
            let chol = hs
                .cholesky()
                .expect("spectrally nonsingular information matrix must factor");
            (Some(chol.inverse()), Some(chol.log_det()))
        };
        InformationSummary {
            t,
            mean_vector: mean,
            moment_matrix: moment,
            information_matrix: h,
            singular,
            inverse,
            log_det,
        }
    }
}

/// Assemble G, g and H for a measure by direct summation over the space.
///
/// Singularity is a state, not an error; `t` must lie in [0, 1).
pub fn information(measure: &DesignMeasure, t: f64) -> InformationSummary {
    information_from_slice(measure.space(), measure.masses(), t)
}

pub(crate) fn information_from_slice(
    space: &DesignSpace,
    masses: &[f64],
    t: f64,
) -> InformationSummary {
    assert!(
        (0.0..1.0).contains(&t),
        "asymmetry parameter t={t} not in [0, 1)"
    );
    debug_assert_eq!(masses.len(), space.num_points());
    let q = space.q();
    let mut moment = SymMatrix::zeros(q);
    let mut mean = vec![0.0f64; q];
    let mut coords = vec![0.0f64; q];
    for (point, &p) in space.points().iter().zip(masses) {
        if p == 0.0 {
            continue;
        }
        for (c, &v) in coords.iter_mut().zip(point.coords()) {
            *c = v as f64;
        }
        for i in 0..q {
            mean[i] += p * coords[i];
        }
        moment.add_scaled_outer(&coords, p);
    }
    InformationSummary::from_parts(mean, moment, t)
}

/// Class-symmetric moments on the binary space, without enumerating it.
///
/// Over the weight class of all binary vectors with j ones, coordinates are
/// exchangeable, so the class sums collapse to
///
/// ```text
///   sum_{x in class j} x     = (j n_j / q) 1
///   sum_{x in class j} x x^T = [j n_j / (q(q-1))] ((q-j) I + (j-1) J)
/// ```
///
/// which makes G a compound-symmetric matrix and g a constant vector.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ClassInfo {
    pub q: usize,
    pub t: f64,
    /// Coefficient of I in G.
    pub g_ident: f64,
    /// Coefficient of J in G.
    pub g_ones: f64,
    /// Every entry of the mean vector.
    pub mean: f64,
}

impl ClassInfo {
    pub fn new(q: usize, pi: &[f64], class_sizes: &[usize], t: f64) -> Self {
        let qf = q as f64;
        let mut g_ident = 0.0;
        let mut g_ones = 0.0;
        let mut mean = 0.0;
        for (jm1, (&p, &n)) in pi.iter().zip(class_sizes).enumerate() {
            let j = (jm1 + 1) as f64;
            let w = p * j * n as f64;
            g_ident += w * (qf - j);
            g_ones += w * (j - 1.0);
            mean += w;
        }
        let denom = qf * (qf - 1.0);
        ClassInfo {
            q,
            t,
            g_ident: g_ident / denom,
            g_ones: g_ones / denom,
            mean: mean / qf,
        }
    }

    /// Coefficient of J in H = G - t g g^T.
    pub fn h_ones(&self) -> f64 {
        self.g_ones - self.t * self.mean * self.mean
    }

    /// Eigenvalues of H: `g_ident` with multiplicity q-1 and the all-ones
    /// direction eigenvalue.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let bulk = self.g_ident;
        let ones_dir = self.g_ident + self.q as f64 * self.h_ones();
        (bulk.min(ones_dir), bulk.max(ones_dir))
    }

    pub fn singular(&self) -> bool {
        let (lo, hi) = self.eigenvalues();
        lo < SINGULARITY_RTOL * (1.0 + hi)
    }

    /// H^{-1} = gamma (I - J/q) + eta (J/q); returns (gamma, eta).
    pub fn inverse_coeffs(&self) -> (f64, f64) {
        let gamma = 1.0 / self.g_ident;
        let eta = 1.0 / (self.g_ident + self.q as f64 * self.h_ones());
        (gamma, eta)
    }

    pub fn log_det(&self) -> f64 {
        let (q, a) = (self.q as f64, self.g_ident);
        (q - 1.0) * a.ln() + (a + q * self.h_ones()).ln()
    }

    pub fn trace_inverse(&self) -> f64 {
        let (gamma, eta) = self.inverse_coeffs();
        (self.q as f64 - 1.0) * gamma + eta
    }

    /// psi at any point of weight class j, via the quadratic-form split
    /// x^T (I - J/q) x = j(q-j)/q and x^T (J/q) x = j^2/q (and the centered
    /// analogues with (j - mean*q)^2).
    pub fn psi(&self, j: usize, criterion: Criterion) -> f64 {
        let qf = self.q as f64;
        let jf = j as f64;
        let (gamma, eta) = self.inverse_coeffs();
        let split = jf * (qf - jf) / qf;
        let ones_part = ((1.0 - self.t) * jf * jf + self.t * (jf - self.mean * qf).powi(2)) / qf;
        match criterion {
            Criterion::D => gamma * split + eta * ones_part,
            Criterion::A => gamma * gamma * split + eta * eta * ones_part,
        }
    }

    pub fn bound(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::D => self.q as f64,
            Criterion::A => self.trace_inverse(),
        }
    }

    pub fn phi(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::D => self.log_det(),
            Criterion::A => -self.trace_inverse(),
        }
    }
}

fn validate_class_masses(q: usize, pi: &[f64], class_sizes: &[usize]) -> Result<f64> {
    if pi.len() != q {
        return Err(Error::InvalidMeasure(format!(
            "expected {q} class masses, got {}",
            pi.len()
        )));
    }
    if let Some(bad) = pi.iter().find(|&&p| !p.is_finite() || p < 0.0) {
        return Err(Error::InvalidMeasure(format!(
            "negative or non-finite class mass {bad}"
        )));
    }
    let total: f64 = pi
        .iter()
        .zip(class_sizes)
        .map(|(&p, &n)| p * n as f64)
        .sum();
    if (total - 1.0).abs() > crate::space::CLASS_MASS_TOL {
        return Err(Error::InvalidMeasure(format!(
            "class masses weight to {total}, not 1"
        )));
    }
    Ok(total)
}

/// Assemble the information summary of a class-symmetric binary measure
/// directly from its class masses, in O(q) instead of O(2^q).
pub fn information_from_classes(q: usize, pi: &[f64], t: f64) -> Result<InformationSummary> {
    check_t(t)?;
    if q < 2 {
        return Err(Error::Domain(format!(
            "binary design dimension q={q} must be at least 2"
        )));
    }
    let class_sizes: Vec<usize> = {
        let mut sizes = Vec::with_capacity(q);
        let mut c = 1u64;
        for j in 1..=q {
            c = c * (q as u64 - j as u64 + 1) / j as u64;
            sizes.push(c as usize);
        }
        sizes
    };
    let total = validate_class_masses(q, pi, &class_sizes)?;
    let pi: Vec<f64> = pi.iter().map(|p| p / total).collect();
    let info = ClassInfo::new(q, &pi, &class_sizes, t);

    let mean = vec![info.mean; q];
    let moment = SymMatrix::compound_symmetric(q, info.g_ident, info.g_ones);
    let mut h = moment.clone();
    h.add_scaled_outer(&mean, -t);
    let singular = info.singular();
    let (inverse, log_det) = if singular {
        (None, None)
    } else {
        let (gamma, eta) = info.inverse_coeffs();
        let inv = SymMatrix::compound_symmetric(q, gamma, (eta - gamma) / q as f64);
        (Some(inv), Some(info.log_det()))
    };
    Ok(InformationSummary {
        t,
        mean_vector: mean,
        moment_matrix: moment,
        information_matrix: h,
        singular,
        inverse,
        log_det,
    })
}

/// Criterion value: log det H for D, -tr H^{-1} for A, negative infinity
/// when H is singular.
pub fn phi(summary: &InformationSummary, criterion: Criterion) -> f64 {
    if summary.singular {
        return f64::NEG_INFINITY;
    }
    match criterion {
        Criterion::D => summary.log_det.unwrap(),
        Criterion::A => -summary.inverse.as_ref().unwrap().trace(),
    }
}

/// Per-point psi values against the criterion bound, with the certificate
/// that a gap of delta implies the criterion value is within delta of the
/// optimum.
#[derive(Debug, Clone, Serialize)]
pub struct OptimalityReport {
    pub criterion: Criterion,
    /// q for D, tr H^{-1} for A.
    pub bound: f64,
    /// max_i psi_i - bound; nonpositive at an optimal measure.
    pub max_gap: f64,
    pub phi: f64,
    /// phi >= optimal phi - delta_certificate; zero when already optimal.
    pub delta_certificate: f64,
    pub psi: Vec<f64>,
}

/// Evaluate psi at every point of the space (not only support points; the
/// optimality conditions quantify over the whole space).
pub fn psi_values(
    measure: &DesignMeasure,
    summary: &InformationSummary,
    criterion: Criterion,
) -> Result<OptimalityReport> {
    psi_over_space(measure.space(), summary, criterion)
}

pub(crate) fn psi_over_space(
    space: &DesignSpace,
    summary: &InformationSummary,
    criterion: Criterion,
) -> Result<OptimalityReport> {
    if summary.singular {
        return Err(Error::SingularInformation);
    }
    let q = space.q();
    let inv = summary.inverse.as_ref().unwrap();
    let weight_matrix = match criterion {
        Criterion::D => inv.clone(),
        Criterion::A => inv.square(),
    };
    let bound = match criterion {
        Criterion::D => q as f64,
        Criterion::A => inv.trace(),
    };
    let t = summary.t;
    let g = &summary.mean_vector;
    let mut psi = Vec::with_capacity(space.num_points());
    let mut raw = vec![0.0f64; q];
    let mut centered = vec![0.0f64; q];
    for point in space.points() {
        for ((r, c), (&coord, &mean)) in raw
            .iter_mut()
            .zip(centered.iter_mut())
            .zip(point.coords().iter().zip(g.iter()))
        {
            *r = coord as f64;
            *c = *r - mean;
        }
        let value = (1.0 - t) * weight_matrix.quadratic_form(&raw)
            + t * weight_matrix.quadratic_form(&centered);
        psi.push(value);
    }
    let max_gap = psi.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - bound;
    Ok(OptimalityReport {
        criterion,
        bound,
        max_gap,
        phi: phi(summary, criterion),
        delta_certificate: max_gap.max(0.0),
        psi,
    })
}

/// Optimality verdict: true iff H is nonsingular and the psi gap stays
/// within `tol`. The report is `None` exactly when H is singular.
pub fn check_optimal(
    measure: &DesignMeasure,
    t: f64,
    criterion: Criterion,
    tol: f64,
) -> (bool, Option<OptimalityReport>) {
    let summary = information(measure, t);
    if summary.singular {
        return (false, None);
    }
    let report =
        psi_values(measure, &summary, criterion).expect("nonsingular summary must yield a report");
    let ok = report.max_gap <= tol;
    (ok, Some(report))
}

/// One-sided derivative of phi along (1-eps) p + eps p_tilde at eps = 0+,
/// equal to `sum_i p_tilde_i psi_i(p) - bound`. Zero at p_tilde = p and
/// nonpositive for every p_tilde when p is optimal.
pub fn directional_derivative(
    p: &DesignMeasure,
    p_tilde: &DesignMeasure,
    t: f64,
    criterion: Criterion,
) -> Result<f64> {
    if !same_space(p.space(), p_tilde.space()) {
        return Err(Error::Domain(
            "measures live on different design spaces".into(),
        ));
    }
    check_t(t)?;
    let summary = information(p, t);
    let report = psi_values(p, &summary, criterion)?;
    let weighted: f64 = p_tilde
        .masses()
        .iter()
        .zip(report.psi.iter())
        .map(|(&m, &v)| m * v)
        .sum();
    Ok(weighted - report.bound)
}

/// Convex mixture (1-eps) a + eps b of two measures on the same space.
pub fn mix(a: &DesignMeasure, b: &DesignMeasure, eps: f64) -> Result<DesignMeasure> {
    if !same_space(a.space(), b.space()) {
        return Err(Error::Domain(
            "measures live on different design spaces".into(),
        ));
    }
    let masses = a
        .masses()
        .iter()
        .zip(b.masses())
        .map(|(&x, &y)| (1.0 - eps) * x + eps * y)
        .collect();
    DesignMeasure::from_masses(a.space(), masses)
}
