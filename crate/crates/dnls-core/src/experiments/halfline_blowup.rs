//! Half-line blow-up: the negative-energy certificate, the quadratic bound
//! on I(t) = ∫x²|v|², the Cauchy-Schwarz rate inequality, the guard trip
//! before 1.1·t*, and the C/√(T-t) rate fit over the final decade.

use serde::{Deserialize, Serialize};

use super::{Check, ExperimentOutput, Verdict};
use crate::diagnostics::{self, BlowupCertificate};
use crate::error::Result;
use crate::evolve::{self, Equation, EvolutionProblem, SolverStatus, TrajectoryFrame};
use crate::fixtures;
use crate::gauge::{self, GaugeParameter};
use crate::grid::{self, GridSpec};
use crate::output;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct HalflineBlowupParams {
    pub half_width: f64,
    pub n_points: usize,
    /// Target E(v₀) < 0 for the fixture A x e^{-x²}.
    pub energy: f64,
    pub dt0: f64,
    pub tolerance: f64,
    pub frame_stride: usize,
    pub guard_factor: f64,
    /// Relative tolerance of the pointwise quadratic-bound check.
    pub bound_rel_tol: f64,
    /// Allowed t_stop / t_star_bound.
    pub stop_ratio_tol: f64,
}

impl Default for HalflineBlowupParams {
    fn default() -> Self {
        Self {
            half_width: 15.0,
            n_points: 4096,
            energy: -1.0,
            dt0: 1e-3,
            tolerance: 1e-8,
            frame_stride: 50,
            guard_factor: 50.0,
            bound_rel_tol: 1e-6,
            stop_ratio_tol: 1.1,
        }
    }
}

/// Least-squares estimate of the blow-up time from the tail of the
/// trajectory: 1/‖vₓ‖² is asymptotically linear in t with negative slope,
/// vanishing at T*.
fn estimate_blowup_time(frames: &[TrajectoryFrame]) -> Option<f64> {
    let tail_len = (frames.len() / 3).max(8).min(frames.len());
    let tail = &frames[frames.len() - tail_len..];
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|f| f.diagnostics.grad_norm > 0.0)
        .map(|f| (f.t, 1.0 / (f.diagnostics.grad_norm * f.diagnostics.grad_norm)))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    if slope >= 0.0 {
        return None;
    }
    Some(-intercept / slope)
}

pub fn run(p: &HalflineBlowupParams) -> Result<ExperimentOutput> {
    let name = "halfline-blowup";
    let g = match GridSpec::dirichlet_half_line(p.half_width, p.n_points) {
        Ok(g) => g,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("grid: {e}")),
                artifacts: Vec::new(),
            })
        }
    };
    let v0 = match fixtures::halfline_negative_energy(g, p.energy) {
        Ok(v) => v,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("construction: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    // certificate from v₀ by quadrature alone
    let cert: BlowupCertificate =
        match diagnostics::certificate_from_v_frame(&v0, &grid::derivative(&v0)) {
            Ok(c) => c,
            Err(e) => {
                return Ok(ExperimentOutput {
                    verdict: Verdict::failure(name, format!("certificate: {e}")),
                    artifacts: Vec::new(),
                })
            }
        };

    let mut checks = vec![
        Check::info("cert_a2", cert.a2),
        Check::info("cert_a1", cert.a1),
        Check::info("cert_a0", cert.a0),
        Check::info("cert_t_star_bound", cert.t_star_bound),
        Check::info("cert_mass0", cert.mass0),
    ];
    let mut notes = String::new();

    // u-frame certificate consistency (finite-difference limited)
    let u0 = gauge::gauge_transform(GaugeParameter::V_TO_U, &v0);
    match diagnostics::blowup_certificate(&u0) {
        Ok(uc) => {
            checks.push(Check::gated(
                "u_frame_certificate_rel_dev",
                (uc.t_star_bound - cert.t_star_bound).abs() / cert.t_star_bound,
                1e-3,
            ));
        }
        Err(e) => notes.push_str(&format!("u-frame certificate failed: {e}; ")),
    }

    // positive-energy control: the chirped profile never reaches E < 0 and
    // must be refused
    let control = fixtures::halfline_xgaussian(g, 2.0, 3.0);
    let refused = diagnostics::blowup_certificate(&control).is_err();
    checks.push(Check::gated(
        "positive_control_not_refused",
        if refused { 0.0 } else { 1.0 },
        0.0,
    ));

    let g0 = grid::l2_norm(&grid::derivative(&v0));
    let problem = EvolutionProblem::with_guard(
        Equation::DnlsGauged,
        v0,
        p.stop_ratio_tol * cert.t_star_bound * 1.05,
        p.dt0,
        Some(p.tolerance),
        p.frame_stride,
        p.guard_factor * g0,
    )?;
    let outcome = match evolve::evolve(&problem) {
        Ok(o) => o,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("solver: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    // (i) quadratic bound pointwise
    let mut bound_violation = f64::NEG_INFINITY;
    // (ii) rate inequality 2√I ‖vₓ‖ ≥ mass0 - 1e-8
    let mut rate_violation = f64::NEG_INFINITY;
    for f in &outcome.frames {
        let i_t = f.diagnostics.virial_i;
        let bound = cert.quadratic_bound(f.t);
        bound_violation = bound_violation.max((i_t - bound) / (1.0 + i_t.abs()));
        rate_violation =
            rate_violation.max(cert.mass0 - 2.0 * i_t.max(0.0).sqrt() * f.diagnostics.grad_norm);
    }
    checks.push(Check::gated(
        "quadratic_bound_violation_rel",
        bound_violation,
        p.bound_rel_tol,
    ));
    checks.push(Check::gated("rate_inequality_violation", rate_violation, 1e-8));

    // (iii) guard trip before 1.1 t*
    let tripped = matches!(outcome.status, SolverStatus::BlowupStop);
    checks.push(Check::gated("guard_missed", if tripped { 0.0 } else { 1.0 }, 0.0));
    checks.push(Check::gated(
        "t_stop_over_t_star",
        outcome.t_final / cert.t_star_bound,
        p.stop_ratio_tol,
    ));
    checks.push(Check::info("t_stop", outcome.t_final));
    checks.push(Check::info(
        "boundary_leak",
        if outcome.boundary_leak { 1.0 } else { 0.0 },
    ));

    // (iv) rate fit over the final decade: C = min ‖vₓ‖·√(t_est - t) > 0
    match estimate_blowup_time(&outcome.frames) {
        Some(t_est) if t_est > outcome.t_final => {
            let horizon = t_est - outcome.t_final;
            let decade: Vec<&TrajectoryFrame> = outcome
                .frames
                .iter()
                .filter(|f| t_est - f.t <= 10.0 * horizon && t_est - f.t > 0.0)
                .collect();
            let c_fit = decade
                .iter()
                .map(|f| f.diagnostics.grad_norm * (t_est - f.t).sqrt())
                .fold(f64::INFINITY, f64::min);
            checks.push(Check::info("t_blowup_estimate", t_est));
            checks.push(Check::info("rate_fit_c", c_fit));
            checks.push(Check::info("rate_fit_frames", decade.len() as f64));
            checks.push(Check::gated(
                "rate_fit_c_nonpositive",
                if c_fit > 0.0 && c_fit.is_finite() { 0.0 } else { 1.0 },
                0.0,
            ));
        }
        _ => {
            notes.push_str("blow-up time estimate failed; ");
            checks.push(Check::gated("rate_fit_c_nonpositive", 1.0, 0.0));
        }
    }

    let artifacts = vec![(
        "diagnostics.csv".to_string(),
        output::diagnostics_csv(outcome.frames.iter().map(|f| &f.diagnostics)),
    )];
    Ok(ExperimentOutput {
        verdict: Verdict::from_checks(name, &checks, notes),
        artifacts,
    })
}
