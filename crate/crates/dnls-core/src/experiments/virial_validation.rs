//! Virial-rate validation: centered time differences of I(t) and J(t)
//! along a trajectory converge to the exact rate formulas at second order
//! as the differencing step is refined.

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
pub struct VirialValidationParams {
    pub half_width: f64,
    pub n_points: usize,
    pub t_end: f64,
    /// Fixed solver step; differencing happens on multiples of
    /// dt·frame_stride.
    pub dt: f64,
    pub frame_stride: usize,
    /// Sub-strides applied to the saved frames, coarse to fine.
    pub fd_strides: Vec<usize>,
    /// |observed order − 2| gate.
    pub order_tol: f64,
}

impl Default for VirialValidationParams {
    fn default() -> Self {
        Self {
            half_width: 30.0,
            n_points: 1024,
            t_end: 0.4,
            dt: 2e-4,
            frame_stride: 10,
            fd_strides: vec![20, 10, 5],
            order_tol: 0.2,
        }
    }
}

struct RateSeries {
    values: Vec<f64>,
    rates: Vec<f64>,
}

fn fd_error(series: &RateSeries, stride: usize, h_dense: f64) -> f64 {
    let n = series.values.len();
    let mut max = 0.0_f64;
    for j in stride..n - stride {
        let fd = (series.values[j + stride] - series.values[j - stride])
            / (2.0 * stride as f64 * h_dense);
        max = max.max((fd - series.rates[j]).abs());
    }
    max
}

pub fn run(p: &VirialValidationParams) -> Result<ExperimentOutput> {
    let name = "virial-validation";
    if p.fd_strides.len() < 2 {
        return Err(DnlsError::Config(
            "need at least two differencing strides".into(),
        ));
    }
    let g = match GridSpec::periodic(p.half_width, p.n_points) {
        Ok(g) => g,
        Err(e) => {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, format!("grid: {e}")),
                artifacts: Vec::new(),
            })
        }
    };
    // generic decaying field with a moving phase so every rate is nonzero
    let v0 = ComplexField::from_fn(g, |x| {
        Complex64::from_polar(1.2 * (-((x + 3.0) / 1.5).powi(2)).exp(), 0.8 * x)
    });

    let problem = EvolutionProblem::new(
        Equation::DnlsGauged,
        v0,
        p.t_end,
        p.dt,
        None,
        p.frame_stride,
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
    if outcome.status != SolverStatus::ReachedTEnd {
        return Ok(ExperimentOutput {
            verdict: Verdict::failure(name, "trajectory stopped early".to_string()),
            artifacts: Vec::new(),
        });
    }
    let frames: &[TrajectoryFrame] = &outcome.frames;
    let h_dense = frames[1].t - frames[0].t;
    for w in frames.windows(2) {
        if ((w[1].t - w[0].t) - h_dense).abs() > 1e-9 {
            return Ok(ExperimentOutput {
                verdict: Verdict::failure(name, "frame grid is not uniform".to_string()),
                artifacts: Vec::new(),
            });
        }
    }

    let wx = VirialWeight::x(g);
    let wx2 = VirialWeight::x_squared(g);
    let quantities: Vec<(&str, RateSeries)> = vec![
        (
            "i_rate_psi_x",
            RateSeries {
                values: frames
                    .iter()
                    .map(|f| diagnostics::virial_i(&f.state, &wx))
                    .collect(),
                rates: frames
                    .iter()
                    .map(|f| diagnostics::virial_i_rate(&f.state, &wx))
                    .collect(),
            },
        ),
        (
            "i_rate_psi_x2",
            RateSeries {
                values: frames
                    .iter()
                    .map(|f| diagnostics::virial_i(&f.state, &wx2))
                    .collect(),
                rates: frames
                    .iter()
                    .map(|f| diagnostics::virial_i_rate(&f.state, &wx2))
                    .collect(),
            },
        ),
        (
            "j_rate_psi_x",
            RateSeries {
                values: frames
                    .iter()
                    .map(|f| diagnostics::virial_j(&f.state, &wx))
                    .collect(),
                rates: frames
                    .iter()
                    .map(|f| diagnostics::virial_j_rate(&f.state, &wx))
                    .collect(),
            },
        ),
        (
            "j_rate_psi_x2",
            RateSeries {
                values: frames
                    .iter()
                    .map(|f| diagnostics::virial_j(&f.state, &wx2))
                    .collect(),
                rates: frames
                    .iter()
                    .map(|f| diagnostics::virial_j_rate(&f.state, &wx2))
                    .collect(),
            },
        ),
    ];

    let mut checks = Vec::new();
    for (label, series) in &quantities {
        let errors: Vec<f64> = p
            .fd_strides
            .iter()
            .map(|&s| fd_error(series, s, h_dense))
            .collect();
        let mut slopes = Vec::new();
        for (w, pair) in errors.windows(2).enumerate() {
            let ratio = p.fd_strides[w] as f64 / p.fd_strides[w + 1] as f64;
            slopes.push((pair[0] / pair[1]).ln() / ratio.ln());
        }
        let order = slopes.iter().sum::<f64>() / slopes.len() as f64;
        checks.push(Check::gated(
            &format!("{label}_order_dev"),
            (order - 2.0).abs(),
            p.order_tol,
        ));
        checks.push(Check::info(&format!("{label}_order"), order));
        checks.push(Check::info(&format!("{label}_err_finest"), *errors.last().unwrap()));
    }

    let artifacts = vec![(
        "diagnostics.csv".to_string(),
        output::diagnostics_csv(frames.iter().map(|f| &f.diagnostics)),
    )];
    Ok(ExperimentOutput {
        verdict: Verdict::from_checks(name, &checks, ""),
        artifacts,
    })
}
