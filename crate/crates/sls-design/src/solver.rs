//! Multiplicative weight algorithms for D- and A-optimal measures.
//!
//! Both algorithms start from the uniform measure and rescale each mass by
//! its psi value over the criterion bound:
//!
//! ```text
//!   D:  p_i <- p_i * psi_D_i / q
//!   A:  p_i <- p_i * psi_A_i / tr H^{-1}
//! ```
//!
//! The mass-weighted mean of each multiplier is one, so total mass is
//! conserved up to rounding; a per-step renormalization cancels the drift.
//! Iteration stops once max_i psi_i - bound <= delta, at which point the
//! terminal criterion value is certifiably within delta of the optimum. The
//! default delta of 1e-10 certifies nine decimal places.
//!
//! On binary spaces the uniform start and the update rule both respect
//! coordinate permutations, so the iterates stay constant on weight classes.
//! The class-symmetric mode exploits this: it iterates on the q class masses
//! with closed-form per-class psi values, turning an O(2^q) sweep into O(q).

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::information::{
    information, information_from_slice, psi_over_space, psi_values, ClassInfo, Criterion,
};
use crate::space::{same_space, DesignMeasure, DesignSpace};

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig {
    /// Stopping threshold on max_i psi_i - bound.
    pub delta: f64,
    pub max_iterations: usize,
    /// Divide by the mass sum each step to cancel floating-point drift.
    pub renormalize_each_step: bool,
    /// Iterate on class masses when the space is binary.
    pub use_class_symmetry: bool,
    /// Lower clamp applied to masses after each update; zero leaves the
    /// update untouched (excluded classes are meant to decay to zero).
    pub mass_floor: f64,
    /// Record a trace sample every this many iterations (0: final only).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            delta: 1e-10,
            max_iterations: 1_000_000,
            renormalize_each_step: true,
            use_class_symmetry: true,
            mass_floor: 0.0,
            trace_every: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub phi: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverResult {
    pub measure: DesignMeasure,
    /// Number of multiplicative updates performed.
    pub iterations: usize,
    /// max_i psi_i - bound at termination.
    pub final_gap: f64,
    pub phi: f64,
    /// True iff final_gap <= delta within the iteration budget.
    pub converged: bool,
    pub trace: Vec<TracePoint>,
}

/// Run the multiplicative algorithm from the uniform measure.
///
/// Non-convergence within the iteration budget is reported through
/// `converged = false`, not as an error; a singular information matrix at
/// the uniform start is an error.
pub fn solve(
    space: &Arc<DesignSpace>,
    t: f64,
    criterion: Criterion,
    config: &SolverConfig,
) -> Result<SolverResult> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::Domain(format!(
            "asymmetry parameter t={t} not in [0, 1)"
        )));
    }
    if config.delta <= 0.0 || config.max_iterations == 0 {
        return Err(Error::Domain(
            "solver needs delta > 0 and at least one iteration".into(),
        ));
    }
    if config.use_class_symmetry && space.is_binary() {
        solve_classes(space, t, criterion, config)
    } else {
        solve_full(space, t, criterion, config)
    }
}

fn solve_classes(
    space: &Arc<DesignSpace>,
    t: f64,
    criterion: Criterion,
    config: &SolverConfig,
) -> Result<SolverResult> {
    let q = space.q();
    let class_sizes = space.class_sizes().to_vec();
    let n = space.num_points() as f64;
    let mut pi = vec![1.0 / n; q];
    let mut psi = vec![0.0f64; q];
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let (final_gap, phi_value, converged) = loop {
        let info = ClassInfo::new(q, &pi, &class_sizes, t);
        if info.singular() {
            return Err(Error::SingularInformation);
        }
        let bound = info.bound(criterion);
        let mut max_psi = f64::NEG_INFINITY;
        for (jm1, slot) in psi.iter_mut().enumerate() {
            let v = info.psi(jm1 + 1, criterion);
            *slot = v;
            max_psi = max_psi.max(v);
        }
        let gap = max_psi - bound;
        let phi_value = info.phi(criterion);
        if config.trace_every > 0 && iterations.is_multiple_of(config.trace_every) {
            trace.push(TracePoint {
                iteration: iterations,
                phi: phi_value,
                gap,
            });
        }
        if gap <= config.delta {
            break (gap, phi_value, true);
        }
        if iterations >= config.max_iterations {
            break (gap, phi_value, false);
        }
        for (p, &v) in pi.iter_mut().zip(&psi) {
            *p = (*p * v / bound).max(config.mass_floor);
        }
        if config.renormalize_each_step {
            let total: f64 = pi
                .iter()
                .zip(&class_sizes)
                .map(|(&p, &nj)| p * nj as f64)
                .sum();
            for p in pi.iter_mut() {
                *p /= total;
            }
        }
        iterations += 1;
    };
    push_final_trace(&mut trace, config, iterations, phi_value, final_gap);
    let measure = DesignMeasure::from_class_masses(space, &pi)?;
    Ok(SolverResult {
        measure,
        iterations,
        final_gap,
        phi: phi_value,
        converged,
        trace,
    })
}

fn solve_full(
    space: &Arc<DesignSpace>,
    t: f64,
    criterion: Criterion,
    config: &SolverConfig,
) -> Result<SolverResult> {
    let n = space.num_points();
    let mut masses = vec![1.0 / n as f64; n];
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let (final_gap, phi_value, converged) = loop {
        let summary = information_from_slice(space, &masses, t);
        if summary.singular {
            return Err(Error::SingularInformation);
        }
        let report = psi_over_space(space, &summary, criterion)?;
        let gap = report.max_gap;
        let phi_value = report.phi;
        if config.trace_every > 0 && iterations.is_multiple_of(config.trace_every) {
            trace.push(TracePoint {
                iteration: iterations,
                phi: phi_value,
                gap,
            });
        }
        if gap <= config.delta {
            break (gap, phi_value, true);
        }
        if iterations >= config.max_iterations {
            break (gap, phi_value, false);
        }
        for (p, &v) in masses.iter_mut().zip(&report.psi) {
            *p = (*p * v / report.bound).max(config.mass_floor);
        }
        if config.renormalize_each_step {
            let total: f64 = masses.iter().sum();
            for m in masses.iter_mut() {
                *m /= total;
            }
        }
        iterations += 1;
    };
    push_final_trace(&mut trace, config, iterations, phi_value, final_gap);
    // The terminal mass sum sits within rounding of one whether or not the
    // per-step renormalization ran; the constructor normalizes it away.
    let total: f64 = masses.iter().sum();
    for m in masses.iter_mut() {
        *m /= total;
    }
    let measure = DesignMeasure::from_masses(space, masses)?;
    Ok(SolverResult {
        measure,
        iterations,
        final_gap,
        phi: phi_value,
        converged,
        trace,
    })
}

fn push_final_trace(
    trace: &mut Vec<TracePoint>,
    config: &SolverConfig,
    iterations: usize,
    phi: f64,
    gap: f64,
) {
    let already = config.trace_every > 0
        && iterations.is_multiple_of(config.trace_every)
        && trace.last().map(|p| p.iteration) == Some(iterations);
    if !already {
        trace.push(TracePoint {
            iteration: iterations,
            phi,
            gap,
        });
    }
}

/// One unnormalized multiplicative update. Exposed so the analytic mass
/// conservation of the update (the mass-weighted mean multiplier is one)
/// can be observed directly.
pub fn multiplicative_step(
    measure: &DesignMeasure,
    t: f64,
    criterion: Criterion,
) -> Result<Vec<f64>> {
    let summary = information(measure, t);
    let report = psi_values(measure, &summary, criterion)?;
    Ok(measure
        .masses()
        .iter()
        .zip(&report.psi)
        .map(|(&p, &v)| p * v / report.bound)
        .collect())
}

/// Efficiency of a candidate measure against a reference optimum:
/// `(det H(cand) / det H(ref))^(1/q)` for D, `tr H(ref)^{-1} / tr
/// H(cand)^{-1}` for A. Values lie in (0, 1] when the reference is optimal.
pub fn efficiency(
    candidate: &DesignMeasure,
    reference_optimal: &DesignMeasure,
    t: f64,
    criterion: Criterion,
) -> Result<f64> {
    if !same_space(candidate.space(), reference_optimal.space()) {
        return Err(Error::Domain(
            "measures live on different design spaces".into(),
        ));
    }
    let sc = information(candidate, t);
    let sr = information(reference_optimal, t);
    if sc.singular || sr.singular {
        return Err(Error::SingularInformation);
    }
    match criterion {
        Criterion::D => {
            let q = candidate.space().q() as f64;
            Ok(((sc.log_det.unwrap() - sr.log_det.unwrap()) / q).exp())
        }
        Criterion::A => {
            let tc = sc.inverse.as_ref().unwrap().trace();
            let tr = sr.inverse.as_ref().unwrap().trace();
            Ok(tr / tc)
        }
    }
}

/// `(det H(p1) / det H(p2))^(1/q)`, via log-determinants.
pub fn relative_d_efficiency(p1: &DesignMeasure, p2: &DesignMeasure, t: f64) -> Result<f64> {
    if !same_space(p1.space(), p2.space()) {
        return Err(Error::Domain(
            "measures live on different design spaces".into(),
        ));
    }
    let s1 = information(p1, t);
    let s2 = information(p2, t);
    if s1.singular || s2.singular {
        return Err(Error::SingularInformation);
    }
    let q = p1.space().q() as f64;
    Ok(((s1.log_det.unwrap() - s2.log_det.unwrap()) / q).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{analytic_measure_on, MeasureFamily};
    use crate::information::phi;
    use crate::space::DesignSpace;

    fn masses_4dp(result: &SolverResult) -> Vec<f64> {
        result
            .measure
            .class_masses()
            .unwrap()
            .iter()
            .map(|m| (m * 1e4).round() / 1e4)
            .collect()
    }

    #[test]
    fn d_solution_q4_high_asymmetry() {
        let space = DesignSpace::binary(4).unwrap();
        let result = solve(&space, 0.9, Criterion::D, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        assert_eq!(masses_4dp(&result), vec![0.0444, 0.0778, 0.0778, 0.0444]);
    }

    #[test]
    fn a_solution_q4_mid_asymmetry() {
        let space = DesignSpace::binary(4).unwrap();
        let result = solve(&space, 0.5, Criterion::A, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        assert_eq!(masses_4dp(&result), vec![0.0, 0.1535, 0.0197, 0.0]);
    }

    #[test]
    fn d_and_a_agree_at_q3_high_asymmetry() {
        let space = DesignSpace::binary(3).unwrap();
        let d = solve(&space, 0.9, Criterion::D, &SolverConfig::default()).unwrap();
        let a = solve(&space, 0.9, Criterion::A, &SolverConfig::default()).unwrap();
        assert_eq!(masses_4dp(&d), vec![0.1667, 0.1111, 0.1667]);
        assert_eq!(masses_4dp(&a), vec![0.1667, 0.1111, 0.1667]);
        for (x, y) in d
            .measure
            .class_masses()
            .unwrap()
            .iter()
            .zip(a.measure.class_masses().unwrap())
        {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn efficiency_reference_values() {
        let space = DesignSpace::binary(4).unwrap();
        let pair = analytic_measure_on(&space, MeasureFamily::EvenPair, None).unwrap();
        let central = analytic_measure_on(&space, MeasureFamily::EvenCentral, None).unwrap();

        let d_opt = solve(&space, 0.9, Criterion::D, &SolverConfig::default()).unwrap();
        let eff_d = efficiency(&pair, &d_opt.measure, 0.9, Criterion::D).unwrap();
        assert!((eff_d - 0.9807).abs() < 1e-4, "eff_d = {eff_d}");

        let a_opt = solve(&space, 0.8, Criterion::A, &SolverConfig::default()).unwrap();
        let eff_a = efficiency(&central, &a_opt.measure, 0.8, Criterion::A).unwrap();
        assert!((eff_a - 0.9190).abs() < 1e-4, "eff_a = {eff_a}");

        // A measure against itself scores exactly one.
        assert_eq!(efficiency(&pair, &pair, 0.3, Criterion::D).unwrap(), 1.0);
        assert_eq!(
            efficiency(&central, &central, 0.3, Criterion::A).unwrap(),
            1.0
        );
    }

    #[test]
    fn relative_d_efficiency_is_one_on_equal_inputs() {
        let space = DesignSpace::binary(6).unwrap();
        let pair = analytic_measure_on(&space, MeasureFamily::EvenPair, None).unwrap();
        assert_eq!(relative_d_efficiency(&pair, &pair, 0.4).unwrap(), 1.0);
    }

    #[test]
    fn efficiency_rejects_singular_inputs() {
        let space = DesignSpace::binary(2).unwrap();
        let sound = DesignMeasure::uniform(&space);
        // A one-point measure has rank-one G, hence singular H.
        let singular = DesignMeasure::from_masses(&space, vec![0.0, 0.0, 1.0]).unwrap();
        for criterion in [Criterion::D, Criterion::A] {
            assert!(matches!(
                efficiency(&singular, &sound, 0.3, criterion),
                Err(Error::SingularInformation)
            ));
            assert!(matches!(
                efficiency(&sound, &singular, 0.3, criterion),
                Err(Error::SingularInformation)
            ));
        }
        assert!(matches!(
            relative_d_efficiency(&sound, &singular, 0.3),
            Err(Error::SingularInformation)
        ));
    }

    #[test]
    fn single_step_conserves_mass() {
        let space = DesignSpace::binary(3).unwrap();
        let m = DesignMeasure::from_masses(&space, vec![0.2, 0.1, 0.15, 0.05, 0.25, 0.05, 0.2])
            .unwrap();
        for criterion in [Criterion::D, Criterion::A] {
            let updated = multiplicative_step(&m, 0.6, criterion).unwrap();
            let sum: f64 = updated.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12, "{criterion}: {sum}");
        }
    }

    #[test]
    fn phi_is_monotone_along_the_trace() {
        let space = DesignSpace::binary(5).unwrap();
        let mut config = SolverConfig {
            trace_every: 1,
            ..SolverConfig::default()
        };
        config.max_iterations = 20_000;
        for criterion in [Criterion::D, Criterion::A] {
            for t in [0.0, 0.3, 0.9] {
                let result = solve(&space, t, criterion, &config).unwrap();
                for pair in result.trace.windows(2) {
                    assert!(
                        pair[1].phi >= pair[0].phi - 1e-12,
                        "{criterion} t={t}: {} -> {}",
                        pair[0].phi,
                        pair[1].phi
                    );
                }
            }
        }
    }

    #[test]
    fn gap_certificate_holds_along_the_trace() {
        // At every iterate, the best criterion value found (the terminal
        // one) exceeds phi(h) by at most the psi gap at h: the gap is a
        // live bound on the remaining suboptimality.
        let space = DesignSpace::binary(4).unwrap();
        let config = SolverConfig {
            trace_every: 1,
            ..SolverConfig::default()
        };
        for criterion in [Criterion::D, Criterion::A] {
            for t in [0.2, 0.9] {
                let result = solve(&space, t, criterion, &config).unwrap();
                assert!(result.converged);
                for point in &result.trace {
                    assert!(
                        result.phi - point.phi <= point.gap + 1e-12,
                        "{criterion} t={t} h={}: phi deficit {} vs gap {}",
                        point.iteration,
                        result.phi - point.phi,
                        point.gap
                    );
                }
            }
        }
    }

    #[test]
    fn full_space_solution_collapses_to_classes() {
        let space = DesignSpace::binary(4).unwrap();
        let config = SolverConfig {
            use_class_symmetry: false,
            delta: 1e-9,
            ..SolverConfig::default()
        };
        let result = solve(&space, 0.6, Criterion::D, &config).unwrap();
        assert!(result.converged);
        let pi = result.measure.collapse_to_classes(1e-6);
        assert!(pi.is_some(), "terminal measure lost class symmetry");
        // And it matches the class-symmetric run.
        let class_run = solve(&space, 0.6, Criterion::D, &SolverConfig::default()).unwrap();
        for (a, b) in pi
            .unwrap()
            .iter()
            .zip(class_run.measure.class_masses().unwrap())
        {
            assert!((a - b).abs() < 1e-5, "{a} vs {b}");
        }
    }

    #[test]
    fn ols_case_matches_even_pair_family() {
        // At t = 0 the D-optimal measure is the even-pair family; the
        // solver's terminal criterion value agrees to the certificate level.
        let space = DesignSpace::binary(4).unwrap();
        let result = solve(&space, 0.0, Criterion::D, &SolverConfig::default()).unwrap();
        assert!(result.converged);
        let pair = analytic_measure_on(&space, MeasureFamily::EvenPair, None).unwrap();
        let phi_pair = phi(&information(&pair, 0.0), Criterion::D);
        assert!(result.phi <= phi_pair + 1e-10);
        assert!(result.phi >= phi_pair - result.final_gap - 1e-12);
    }

    #[test]
    fn nonconvergence_is_a_state() {
        let space = DesignSpace::binary(4).unwrap();
        let config = SolverConfig {
            max_iterations: 3,
            ..SolverConfig::default()
        };
        let result = solve(&space, 0.9, Criterion::D, &config).unwrap();
        assert!(!result.converged);
        assert_eq!(result.iterations, 3);
        assert!(result.final_gap > config.delta);
    }

    #[test]
    fn trace_sampling_respects_interval() {
        let space = DesignSpace::binary(3).unwrap();
        let config = SolverConfig {
            trace_every: 50,
            ..SolverConfig::default()
        };
        let result = solve(&space, 0.8, Criterion::A, &config).unwrap();
        for point in &result.trace[..result.trace.len() - 1] {
            assert_eq!(point.iteration % 50, 0);
        }
        assert_eq!(result.trace.last().unwrap().iteration, result.iterations);
    }

    #[test]
    fn invalid_inputs_error() {
        let space = DesignSpace::binary(3).unwrap();
        assert!(solve(&space, 1.0, Criterion::D, &SolverConfig::default()).is_err());
        let bad = SolverConfig {
            delta: 0.0,
            ..SolverConfig::default()
        };
        assert!(solve(&space, 0.5, Criterion::D, &bad).is_err());
    }
}
