//! Variance-convexity contrast between the quintic NLS and DNLS.
//!
//! For NLS-5, d²/dt² ∫x²|u|² = 8E(u₀) exactly, so the variance is a
//! parabola in t; for the gauge-reduced DNLS the same second derivative is
//! 8E(v₀) − d/dt ∫x|v|⁴, and the surplus term breaks the convexity. Both
//! runs use the same negative-energy chirped Gaussian and fixed dt so the
//! frame grid is uniform for differencing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Check, ExperimentOutput, Verdict};
use crate::diagnostics::{self, VirialWeight};
use crate::error::{DnlsError, Result};
use crate::evolve::{self, Equation, EvolutionProblem, SolverStatus, TrajectoryFrame};
use crate::grid::{ComplexField, GridSpec};
use crate::output;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Nls5VarianceParams {
    pub half_width: f64,
    pub n_points: usize,
    /// Target E(u₀) < 0 for the Gaussian amplitude.
    pub energy: f64,
    pub chirp: f64,
    pub width: f64,
    pub t_end: f64,
    pub dt: f64,
    pub frame_stride: usize,
    /// NLS-5: |FD²(V) − 8E| / |8E| gate.
    pub nls5_rel_tol: f64,
    /// DNLS: |(FD²(V) − 8E) − (−dS/dt)| / |dS/dt| gate.
    pub dnls_match_rel_tol: f64,
    /// DNLS violation must exceed this multiple of the NLS-5 deviation.
    pub separation_factor: f64,
}

impl Default for Nls5VarianceParams {
    fn default() -> Self {
        Self {
            half_width: 30.0,
            n_points: 2048,
            energy: -3.0,
            chirp: 1.0,
            width: 1.0,
            t_end: 0.3,
            dt: 1.5e-4,
            frame_stride: 20,
            nls5_rel_tol: 0.02,
            dnls_match_rel_tol: 0.05,
            separation_factor: 5.0,
        }
    }
}

/// Gaussian A e^{-(x/w)² + i k x} with A bisected so that
/// E = ‖∂ₓu‖² − (1/16)‖u‖₆⁶ hits the negative target.
fn negative_energy_gaussian(
    g: GridSpec,
    energy_target: f64,
    width: f64,
    chirp: f64,
) -> Result<ComplexField> {
    if energy_target >= 0.0 {
        return Err(DnlsError::Construction(
            "variance fixture needs a negative energy target".into(),
        ));
    }
    let shape = |a: f64| {
        ComplexField::from_fn(g, |x| {
            Complex64::from_polar(a * (-(x / width).powi(2)).exp(), chirp * x)
        })
    };
    let energy = |a: f64| diagnostics::energy_e(&shape(a));
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while energy(hi) > energy_target {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(DnlsError::Construction(
                "energy bisection for the Gaussian diverged".into(),
            ));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if energy(mid) > energy_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(shape(0.5 * (lo + hi)))
}

struct Series {
    h: f64,
    variance: Vec<f64>,
    surplus: Vec<f64>,
}

/// V(t) = ∫x²|v|² and S(t) = ∫x|v|⁴ on the uniform frame grid.
fn series_from(frames: &[TrajectoryFrame]) -> Result<Series> {
    if frames.len() < 5 {
        return Err(DnlsError::Construction("too few frames for differencing".into()));
    }
    let h = frames[1].t - frames[0].t;
    for w in frames.windows(2) {
        if ((w[1].t - w[0].t) - h).abs() > 1e-9 * h.max(1.0) {
            return Err(DnlsError::Construction(
                "frame grid is not uniform; use fixed-dt runs for differencing".into(),
            ));
        }
    }
    let g = frames[0].state.grid();
    let wx2 = VirialWeight::x_squared(g);
    let wx = VirialWeight::x(g);
    let variance = frames
        .iter()
        .map(|f| diagnostics::virial_i(&f.state, &wx2))
        .collect();
    let surplus = frames
        .iter()
        .map(|f| diagnostics::weighted_quartic(&f.state, &wx))
        .collect();
    Ok(Series {
        h,
        variance,
        surplus,
    })
}

fn second_difference(series: &[f64], j: usize, h: f64) -> f64 {
    (series[j + 1] - 2.0 * series[j] + series[j - 1]) / (h * h)
}

fn first_difference(series: &[f64], j: usize, h: f64) -> f64 {
    (series[j + 1] - series[j - 1]) / (2.0 * h)
}

pub fn run(p: &Nls5VarianceParams) -> Result<ExperimentOutput> {
    let name = "nls5-variance";
    let setup = || -> Result<(ComplexField, f64)> {
        let g = GridSpec::periodic(p.half_width, p.n_points)?;
        let u0 = negative_energy_gaussian(g, p.energy, p.width, p.chirp)?;
        let e0 = diagnostics::energy_e(&u0);
        Ok((u0, e0))
    };
    let (u0, e0) = match setup() {
        Ok(v) => v,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("setup: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    let run_equation = |eq: Equation| -> Result<Vec<TrajectoryFrame>> {
        let problem = EvolutionProblem::new(eq, u0.clone(), p.t_end, p.dt, None, p.frame_stride)?;
        let out = evolve::evolve(&problem)?;
        if out.status != SolverStatus::ReachedTEnd {
            return Err(DnlsError::StepFailure(format!(
                "{eq:?} run stopped early at t = {}",
                out.t_final
            )));
        }
        Ok(out.frames)
    };

    let mut checks = vec![Check::info("energy0", e0)];
    let mut artifacts = Vec::new();
    let eight_e = 8.0 * e0;

    let nls5_frames = match run_equation(Equation::Nls5) {
        Ok(f) => f,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("nls5 run: {e}")),
                artifacts: Vec::new(),
            })
        }
    };
    let dnls_frames = match run_equation(Equation::DnlsGauged) {
        Ok(f) => f,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("dnls run: {e}")),
                artifacts: Vec::new(),
            })
        }
    };

    // NLS-5: FD²(V) = 8E at every interior frame (V is exactly quadratic)
    let nls5 = series_from(&nls5_frames)?;
    let mut nls5_dev = 0.0_f64;
    for j in 1..nls5.variance.len() - 1 {
        let fd2 = second_difference(&nls5.variance, j, nls5.h);
        nls5_dev = nls5_dev.max((fd2 - eight_e).abs());
    }
    checks.push(Check::gated(
        "nls5_variance_rel_dev",
        nls5_dev / eight_e.abs(),
        p.nls5_rel_tol,
    ));
    checks.push(Check::info("nls5_variance_abs_dev", nls5_dev));

    // DNLS: the violation FD²(V) − 8E matches −dS/dt, S = ∫x|v|⁴
    let dnls = series_from(&dnls_frames)?;
    let mut best_j = 1usize;
    let mut best_target = 0.0_f64;
    for j in 1..dnls.variance.len() - 1 {
        let target = -first_difference(&dnls.surplus, j, dnls.h);
        if target.abs() > best_target.abs() {
            best_target = target;
            best_j = j;
        }
    }
    let violation = second_difference(&dnls.variance, best_j, dnls.h) - eight_e;
    checks.push(Check::info("dnls_violation", violation));
    checks.push(Check::info("dnls_surplus_rate", best_target));
    checks.push(Check::gated(
        "dnls_violation_match_rel",
        (violation - best_target).abs() / best_target.abs().max(1e-12),
        p.dnls_match_rel_tol,
    ));
    checks.push(Check::gated(
        "dnls_separation_shortfall",
        p.separation_factor * nls5_dev / violation.abs().max(1e-300),
        1.0,
    ));

    artifacts.push((
        "diagnostics_nls5.csv".to_string(),
        output::diagnostics_csv(nls5_frames.iter().map(|f| &f.diagnostics)),
    ));
    artifacts.push((
        "diagnostics_dnls.csv".to_string(),
        output::diagnostics_csv(dnls_frames.iter().map(|f| &f.diagnostics)),
    ));

    Ok(ExperimentOutput {
        verdict: Verdict::from_checks(name, &checks, ""),
        artifacts,
    })
}
