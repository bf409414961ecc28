//! Full gauge-identity suite on seeded fixture fields, plus the
//! (φ, ψ)-system residual convergence along a short trajectory.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Check, ExperimentOutput, Verdict};
use crate::error::Result;
use crate::evolve::{self, Equation, EvolutionProblem, SolverStatus};
use crate::fixtures;
use crate::gauge::{self, GaugeParameter};
use crate::grid::{self, ComplexField, GridSpec};
use crate::ground_state;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GaugeValidationParams {
    pub half_width: f64,
    pub n_points: usize,
    pub n_fields: usize,
    /// Trajectory used for the (φ, ψ) residual convergence.
    pub system_t_end: f64,
    pub system_dt: f64,
}

impl Default for GaugeValidationParams {
    fn default() -> Self {
        Self {
            half_width: 30.0,
            n_points: 1024,
            n_fields: 50,
            system_t_end: 0.064,
            system_dt: 5e-4,
        }
    }
}

fn max_pointwise(a: &ComplexField, b: &ComplexField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Max residuals of iφₜ+φₓₓ+iφ²conj(ψ) and iψₜ+ψₓₓ−ψ²conj(φ) with φₜ, ψₜ
/// by centered differences over frames spaced `stride` apart.
fn system_residuals(
    frames: &[(f64, ComplexField)],
    center: usize,
    stride: usize,
) -> (f64, f64) {
    let h = frames[center + stride].0 - frames[center].0;
    let pairs: Vec<(ComplexField, ComplexField)> = [
        center - stride,
        center,
        center + stride,
    ]
    .iter()
    .map(|&j| {
        let u = gauge::gauge_transform(GaugeParameter::V_TO_U, &frames[j].1);
        gauge::to_phi_psi(&u)
    })
    .collect();
    let i = Complex64::new(0.0, 1.0);
    let mut res_phi = 0.0_f64;
    let mut res_psi = 0.0_f64;
    let phi_xx = grid::derivative(&grid::derivative(&pairs[1].0));
    let psi_xx = grid::derivative(&grid::derivative(&pairs[1].1));
    let n = phi_xx.grid().n_points();
    for j in 0..n {
        let phi_t = (pairs[2].0.values()[j] - pairs[0].0.values()[j]) / (2.0 * h);
        let psi_t = (pairs[2].1.values()[j] - pairs[0].1.values()[j]) / (2.0 * h);
        let phi = pairs[1].0.values()[j];
        let psi = pairs[1].1.values()[j];
        let r1 = i * phi_t + phi_xx.values()[j] + i * phi * phi * psi.conj();
        let r2 = i * psi_t + psi_xx.values()[j] - psi * psi * phi.conj();
        res_phi = res_phi.max(r1.norm());
        res_psi = res_psi.max(r2.norm());
    }
    (res_phi, res_psi)
}

pub fn run(p: &GaugeValidationParams, seed: u64) -> Result<ExperimentOutput> {
    let name = "gauge-validation";
    let g = match GridSpec::periodic(p.half_width, p.n_points) {
        Ok(g) => g,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("grid: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    let mut inverse_err = 0.0_f64;
    let mut composition_err = 0.0_f64;
    let mut mass_err = 0.0_f64;
    let mut lemma21_spread = 0.0_f64;
    let mut lemma22_kinetic = 0.0_f64;
    let mut lemma22_current = 0.0_f64;
    let mut grad_two_path = 0.0_f64;
    let mut seam_jump_max = 0.0_f64;

    for idx in 0..p.n_fields {
        let f = fixtures::random_smooth_periodic(g, seed.wrapping_add(idx as u64), 1.4);

        let back = gauge::gauge_transform(0.6, &gauge::gauge_transform(-0.6, &f));
        inverse_err = inverse_err.max(max_pointwise(&back, &f));

        let lhs = gauge::gauge_transform(0.45, &gauge::gauge_transform(-0.95, &f));
        let rhs = gauge::gauge_transform(-0.5, &f);
        composition_err = composition_err.max(max_pointwise(&lhs, &rhs));

        let gauged = gauge::gauge_transform(-0.75, &f);
        mass_err = mass_err.max((grid::l2_norm_sq(&gauged) - grid::l2_norm_sq(&f)).abs());

        let reference = gauge::energy_ed_via_gauge(0.0, &f);
        for a in [-1.0, -0.75, -0.5] {
            lemma21_spread = lemma21_spread
                .max((gauge::energy_ed_via_gauge(a, &f) - reference).abs() / reference.abs().max(1.0));
        }

        let (kin, cur) = gauge::lemma22_pointwise_residuals(&f)?;
        lemma22_kinetic = lemma22_kinetic.max(kin);
        lemma22_current = lemma22_current.max(cur);

        // u-frame/v-frame gradient relation as a two-path check
        let analytic = gauge::gauge_derivative(0.75, &f);
        let spectral = grid::derivative(&gauge::gauge_transform(0.75, &f));
        grad_two_path = grad_two_path.max(max_pointwise(&analytic, &spectral));

        seam_jump_max = seam_jump_max.max(gauge::seam_phase_jump(0.75, &f));
    }

    // two-path derivative for the decayed ground state
    let q = ground_state::ground_state(g)?;
    let q_analytic = gauge::gauge_derivative(-0.75, q.q());
    let q_spectral = grid::derivative(&gauge::gauge_transform(-0.75, q.q()));
    let q_two_path = max_pointwise(&q_analytic, &q_spectral);

    let mut checks = vec![
        Check::gated("inverse_identity_max", inverse_err, 1e-12),
        Check::gated("composition_max", composition_err, 1e-12),
        Check::gated("mass_invariance_max", mass_err, 1e-12),
        Check::gated("lemma21_a_independence_rel", lemma21_spread, 1e-8),
        Check::gated("lemma22_kinetic_identity_max", lemma22_kinetic, 1e-8),
        Check::gated("lemma22_current_identity_max", lemma22_current, 1e-8),
        Check::gated("gauge_derivative_two_path_q", q_two_path, 1e-8),
        Check::gated("u_v_gradient_two_path_max", grad_two_path, 1e-8),
        Check::info("seam_phase_jump_max", seam_jump_max),
        Check::info("fields_checked", p.n_fields as f64),
    ];
    let mut notes = String::new();

    // (φ, ψ) system residuals: O(dt²) convergence under halving the
    // differencing step along a short, densely sampled trajectory
    let v0 = q.q().scale(Complex64::new(0.9, 0.0));
    let problem = EvolutionProblem::new(
        Equation::DnlsGauged,
        v0,
        p.system_t_end,
        p.system_dt,
        None,
        1,
    )?;
    match evolve::evolve(&problem) {
        Ok(out) if out.status == SolverStatus::ReachedTEnd => {
            let frames: Vec<(f64, ComplexField)> =
                out.frames.iter().map(|f| (f.t, f.state.clone())).collect();
            let center = frames.len() / 2;
            let coarse = frames.len() / 4;
            let (phi_c, psi_c) = system_residuals(&frames, center, coarse);
            let (phi_f, psi_f) = system_residuals(&frames, center, coarse / 2);
            let phi_order = (phi_c / phi_f).log2();
            let psi_order = (psi_c / psi_f).log2();
            checks.push(Check::info("phi_residual_coarse", phi_c));
            checks.push(Check::info("psi_residual_coarse", psi_c));
            checks.push(Check::gated(
                "phi_residual_order_dev",
                (phi_order - 2.0).abs(),
                0.5,
            ));
            checks.push(Check::gated(
                "psi_residual_order_dev",
                (psi_order - 2.0).abs(),
                0.5,
            ));
        }
        Ok(_) => notes.push_str("system trajectory stopped early; "),
        Err(e) => notes.push_str(&format!("system trajectory failed: {e}; ")),
    }

    Ok(ExperimentOutput {
        verdict: Verdict::from_checks(name, &checks, notes),
        artifacts: Vec::new(),
    })
}
