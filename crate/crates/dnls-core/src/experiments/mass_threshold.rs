//! Mass-threshold run: data with mass slightly above 2π and negative energy
//! stays bounded under DNLS (the momentum mechanism), while the quintic NLS
//! control with comparable data blows past the gradient guard.

use serde::{Deserialize, Serialize};

use super::{Check, ExperimentOutput, Verdict};
use crate::diagnostics;
use crate::error::Result;
use crate::evolve::{self, Equation, EvolutionProblem, SolverStatus};
use crate::fixtures;
use crate::grid::{self, GridSpec};
use crate::output;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MassThresholdParams {
    pub half_width: f64,
    pub n_points: usize,
    /// Mass excess δ: mass(v₀) = 2π + δ.
    pub mass_excess: f64,
    pub bump_amplitude: f64,
    pub t_end: f64,
    pub dt0: f64,
    pub tolerance: f64,
    pub frame_stride: usize,
    /// Allowed overshoot of the momentum-derived gradient bound.
    pub bound_slack: f64,
    /// Run the quintic-NLS negative-energy control.
    pub run_control: bool,
    pub control_t_end: f64,
    /// Guard factor for the control run (blow-up trips it well before the
    /// concentrating core falls under the grid scale).
    pub control_guard_factor: f64,
}

impl Default for MassThresholdParams {
    fn default() -> Self {
        Self {
            half_width: 30.0,
            n_points: 2048,
            mass_excess: 0.01 * std::f64::consts::TAU,
            bump_amplitude: 0.05,
            t_end: 20.0,
            dt0: 1e-3,
            tolerance: 1e-8,
            frame_stride: 20,
            bound_slack: 0.10,
            run_control: true,
            control_t_end: 8.0,
            control_guard_factor: 20.0,
        }
    }
}

pub fn run(p: &MassThresholdParams) -> Result<ExperimentOutput> {
    let name = "mass-threshold";
    let g = match GridSpec::periodic(p.half_width, p.n_points) {
        Ok(g) => g,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("grid: {e}")),
                artifacts: Vec::new(),
            })
        }
    };
    let v0 = match fixtures::perturbed_ground_state(g, p.mass_excess, p.bump_amplitude) {
        Ok(v) => v,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("construction: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    let mass0 = diagnostics::mass(&v0);
    let energy0 = diagnostics::energy_e(&v0);
    let momentum0 = diagnostics::momentum_p(&v0);
    // ‖vₓ‖ ≤ 8 P(v₀) ‖Qₓ‖/‖Q‖₄⁴ = P(v₀)·√π/2
    let gradient_bound = momentum0 * std::f64::consts::PI.sqrt() / 2.0;

    let mut checks = vec![
        Check::info("mass0", mass0),
        Check::gated(
            "mass_matches_target",
            (mass0 - (std::f64::consts::TAU + p.mass_excess)).abs(),
            1e-9,
        ),
        Check::gated("energy0_nonnegative", if energy0 < 0.0 { 0.0 } else { 1.0 }, 0.0),
        Check::info("energy0", energy0),
        Check::info("momentum0", momentum0),
        Check::info("gradient_bound", gradient_bound),
    ];
    let mut artifacts = Vec::new();
    let mut notes = String::new();

    let problem = EvolutionProblem::new(
        Equation::DnlsGauged,
        v0.clone(),
        p.t_end,
        p.dt0,
        Some(p.tolerance),
        p.frame_stride,
    )?;
    match evolve::evolve(&problem) {
        Ok(outcome) => {
            let tripped = matches!(outcome.status, SolverStatus::BlowupStop);
            checks.push(Check::gated("guard_tripped", if tripped { 1.0 } else { 0.0 }, 0.0));
            let sup_grad = outcome
                .frames
                .iter()
                .map(|f| f.diagnostics.grad_norm)
                .fold(0.0, f64::max);
            checks.push(Check::info("sup_grad_norm", sup_grad));
            checks.push(Check::gated(
                "grad_over_momentum_bound",
                sup_grad / gradient_bound,
                1.0 + p.bound_slack,
            ));
            checks.push(Check::info("t_final", outcome.t_final));
            artifacts.push((
                "diagnostics_dnls.csv".to_string(),
                output::diagnostics_csv(outcome.frames.iter().map(|f| &f.diagnostics)),
            ));
        }
        Err(e) => {
            notes.push_str(&format!("dnls run failed: {e}; "));
            checks.push(Check::gated("dnls_solver_failed", 1.0, 0.0));
        }
    }

    if p.run_control {
        let g0 = grid::l2_norm(&grid::derivative(&v0));
        let control = EvolutionProblem::with_guard(
            Equation::Nls5,
            v0,
            p.control_t_end,
            p.dt0,
            Some(p.tolerance),
            p.frame_stride,
            p.control_guard_factor * g0,
        )?;
        match evolve::evolve(&control) {
            Ok(outcome) => {
                let tripped = matches!(outcome.status, SolverStatus::BlowupStop);
                checks.push(Check::gated(
                    "control_guard_missed",
                    if tripped { 0.0 } else { 1.0 },
                    0.0,
                ));
                checks.push(Check::info("control_t_stop", outcome.t_final));
                artifacts.push((
                    "diagnostics_nls5_control.csv".to_string(),
                    output::diagnostics_csv(outcome.frames.iter().map(|f| &f.diagnostics)),
                ));
            }
            Err(e) => {
                notes.push_str(&format!("control run failed: {e}; "));
                checks.push(Check::gated("control_solver_failed", 1.0, 0.0));
            }
        }
    }

    Ok(ExperimentOutput {
        verdict: Verdict::from_checks(name, &checks, notes),
        artifacts,
    })
}
