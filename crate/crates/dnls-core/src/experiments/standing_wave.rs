//! Standing-wave orbit check: evolve Q and compare against e^{it}Q.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Check, ExperimentOutput, Verdict};
use crate::error::Result;
use crate::evolve::{self, Equation, EvolutionProblem};
use crate::grid::{self, ComplexField, GridSpec};
use crate::ground_state::{self, WaveFrame};
use crate::output;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct StandingWaveParams {
    pub equation: Equation,
    pub half_width: f64,
    pub n_points: usize,
    pub t_end: f64,
    pub dt0: f64,
    pub tolerance: f64,
    pub frame_stride: usize,
    /// Orbit-error gate; by default 1e-4 for t_end ≤ 1 and 1e-3 beyond,
    /// matching the measured error accumulation under refinement.
    pub orbit_error_tol: Option<f64>,
}

impl Default for StandingWaveParams {
    fn default() -> Self {
        Self {
            equation: Equation::DnlsGauged,
            half_width: 30.0,
            n_points: 1024,
            t_end: 1.0,
            dt0: 1e-3,
            tolerance: 1e-9,
            frame_stride: 20,
            orbit_error_tol: None,
        }
    }
}

pub fn run(p: &StandingWaveParams) -> Result<ExperimentOutput> {
    let name = "standing-wave";
    let orbit_tol = p
        .orbit_error_tol
        .unwrap_or(if p.t_end <= 1.0 + 1e-12 { 1e-4 } else { 1e-3 });

    let setup = || -> Result<(GridSpec, EvolutionProblem)> {
        let g = GridSpec::periodic(p.half_width, p.n_points)?;
        let q = ground_state::ground_state(g)?;
        let problem = EvolutionProblem::new(
            p.equation,
            q.q().clone(),
            p.t_end,
            p.dt0,
            Some(p.tolerance),
            p.frame_stride,
        )?;
        Ok((g, problem))
    };
    let (g, problem) = match setup() {
        Ok(v) => v,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("setup failed: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    let outcome = match evolve::evolve(&problem) {
        Ok(o) => o,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("solver failed: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    let mut checks = Vec::new();
    let reached = matches!(outcome.status, evolve::SolverStatus::ReachedTEnd);
    checks.push(Check::gated("stopped_early", if reached { 0.0 } else { 1.0 }, 0.0));

    let exact = ground_state::standing_wave(outcome.t_final, g, WaveFrame::VFrame)?;
    let last = &outcome.frames.last().expect("frames").state;
    let diff = ComplexField::new(
        g,
        last.values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| a - b)
            .collect::<Vec<Complex64>>(),
    )?;
    let orbit_error = grid::l2_norm(&diff) / grid::l2_norm(&exact);
    checks.push(Check::gated("orbit_error_l2_rel", orbit_error, orbit_tol));

    let first = outcome.frames.first().expect("frames").diagnostics;
    let mut mass_drift = 0.0_f64;
    let mut energy_drift = 0.0_f64;
    let mut momentum_drift = 0.0_f64;
    for f in &outcome.frames {
        let d = f.diagnostics;
        mass_drift = mass_drift.max((d.mass - first.mass).abs() / first.mass);
        energy_drift = energy_drift.max((d.energy_e - first.energy_e).abs());
        momentum_drift = momentum_drift.max((d.momentum_p - first.momentum_p).abs());
    }
    checks.push(Check::gated("mass_drift_rel", mass_drift, 1e-10));
    checks.push(Check::gated(
        "energy_drift_abs",
        energy_drift,
        1e-6 * first.energy_e.abs().max(1.0),
    ));
    checks.push(Check::gated(
        "momentum_drift_abs",
        momentum_drift,
        1e-6 * first.momentum_p.abs().max(1.0),
    ));
    checks.push(Check::info("t_final", outcome.t_final));
    checks.push(Check::info("frames", outcome.frames.len() as f64));

    let artifacts = vec![(
        "diagnostics.csv".to_string(),
        output::diagnostics_csv(outcome.frames.iter().map(|f| &f.diagnostics)),
    )];

    Ok(ExperimentOutput {
        verdict: Verdict::from_checks(name, &checks, ""),
        artifacts,
    })
}
