//! Method-of-lines integrator on the Dirichlet half-line.
//!
//! Strang split per step: half a Heun (SSP-RK2) substep for the nonlinear
//! terms, a full Crank-Nicolson step for i v_xx with Dirichlet rows at both
//! ends, then the second nonlinear half. The Cayley form of CN is unitary,
//! so the linear part conserves the discrete mass exactly; the nonlinear
//! subflow is a pointwise phase rotation in exact arithmetic.

use num_complex::Complex64;

use super::{EvolutionProblem, SolverOutcome, SolverStatus, TrajectoryFrame};
use crate::diagnostics;
use crate::error::{DnlsError, Result};
use crate::grid::{ComplexField, GridKind};

const MIN_DT: f64 = 1e-14;
const LEAK_THRESHOLD: f64 = 1e-6;

struct HalflineSolver {
    problem: EvolutionProblem,
    n: usize,
    dx: f64,
    leak_from: usize,
    // Thomas scratch
    cp: Vec<Complex64>,
    dp: Vec<Complex64>,
    rhs: Vec<Complex64>,
    // Heun scratch
    deriv: Vec<Complex64>,
    k1: Vec<Complex64>,
    predictor: Vec<Complex64>,
}

impl HalflineSolver {
    fn new(problem: EvolutionProblem) -> Self {
        let g = problem.grid();
        let n = g.n_points();
        let leak_from = (0.9 * (n - 1) as f64).floor() as usize;
        Self {
            problem,
            n,
            dx: g.dx(),
            leak_from,
            cp: vec![Complex64::new(0.0, 0.0); n],
            dp: vec![Complex64::new(0.0, 0.0); n],
            rhs: vec![Complex64::new(0.0, 0.0); n],
            deriv: vec![Complex64::new(0.0, 0.0); n],
            k1: vec![Complex64::new(0.0, 0.0); n],
            predictor: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Fourth-order one-sided/centered first derivative into `out`.
    fn differentiate(v: &[Complex64], dx: f64, out: &mut [Complex64]) {
        let n = v.len();
        let h12 = 1.0 / (12.0 * dx);
        out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) * h12;
        out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) * h12;
        for j in 2..n - 2 {
            out[j] = (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) * h12;
        }
        out[n - 2] =
            (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4] - v[n - 5]) * h12;
        out[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4]
            + 3.0 * v[n - 5])
            * h12;
    }

    /// Heun substep of vₜ = N(v) over h; Dirichlet ends pinned to zero.
    fn nonlinear_substep(&mut self, v: &mut [Complex64], h: f64) {
        let eq = self.problem.equation;
        Self::differentiate(v, self.dx, &mut self.deriv);
        for j in 0..self.n {
            self.k1[j] = eq.nonlinear_point(v[j], self.deriv[j]);
            self.predictor[j] = v[j] + h * self.k1[j];
        }
        self.predictor[0] = Complex64::new(0.0, 0.0);
        self.predictor[self.n - 1] = Complex64::new(0.0, 0.0);
        Self::differentiate(&self.predictor, self.dx, &mut self.deriv);
        for j in 0..self.n {
            let k2 = eq.nonlinear_point(self.predictor[j], self.deriv[j]);
            v[j] += 0.5 * h * (self.k1[j] + k2);
        }
        v[0] = Complex64::new(0.0, 0.0);
        v[self.n - 1] = Complex64::new(0.0, 0.0);
    }

    /// Crank-Nicolson step for vₜ = i v_xx with identity rows at both ends.
    /// Interior rows: -α v⁺_{j-1} + (1+2α) v⁺_j - α v⁺_{j+1} =
    ///                 α v_{j-1} + (1-2α) v_j + α v_{j+1},  α = i dt / (2 dx²).
    fn linear_step(&mut self, v: &mut [Complex64], dt: f64) {
        let n = self.n;
        let alpha = Complex64::new(0.0, dt / (2.0 * self.dx * self.dx));
        let diag = Complex64::new(1.0, 0.0) + 2.0 * alpha;
        self.rhs[0] = Complex64::new(0.0, 0.0);
        self.rhs[n - 1] = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            self.rhs[j] =
                alpha * v[j - 1] + (Complex64::new(1.0, 0.0) - 2.0 * alpha) * v[j] + alpha * v[j + 1];
        }
        // Thomas elimination on the tridiagonal (identity, interior, identity)
        self.cp[0] = Complex64::new(0.0, 0.0);
        self.dp[0] = Complex64::new(0.0, 0.0);
        for j in 1..n - 1 {
            let denom = diag + alpha * self.cp[j - 1];
            self.cp[j] = -alpha / denom;
            self.dp[j] = (self.rhs[j] + alpha * self.dp[j - 1]) / denom;
        }
        v[n - 1] = Complex64::new(0.0, 0.0);
        for j in (1..n - 1).rev() {
            v[j] = self.dp[j] - self.cp[j] * v[j + 1];
        }
        v[0] = Complex64::new(0.0, 0.0);
    }

    /// One Strang step over dt.
    fn step(&mut self, v: &mut [Complex64], dt: f64) {
        self.nonlinear_substep(v, 0.5 * dt);
        self.linear_step(v, dt);
        self.nonlinear_substep(v, 0.5 * dt);
    }

    fn grad_norm(&mut self, v: &[Complex64]) -> f64 {
        Self::differentiate(v, self.dx, &mut self.deriv);
        let sq: Vec<f64> = self.deriv.iter().map(|z| z.norm_sqr()).collect();
        self.problem.grid().integrate(&sq).sqrt()
    }

    fn leaking(&self, v: &[Complex64]) -> bool {
        v[self.leak_from..]
            .iter()
            .any(|z| z.norm() > LEAK_THRESHOLD)
    }
}

fn relative_l2_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in a.iter().zip(b) {
        num += (x - y).norm_sqr();
        den += y.norm_sqr();
    }
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (num / den).sqrt()
    }
}

pub fn evolve_halfline(p: &EvolutionProblem) -> Result<SolverOutcome> {
    let g = p.grid();
    if g.kind() != GridKind::DirichletHalfLine {
        return Err(DnlsError::InvalidGrid(
            "evolve_halfline requires a Dirichlet half-line grid".into(),
        ));
    }
    let n = g.n_points();
    let peak = p.initial.max_abs();
    if p.initial.values()[0].norm() > 1e-12 * peak.max(1.0) {
        return Err(DnlsError::Construction(
            "half-line initial data must vanish at x = 0".into(),
        ));
    }
    if peak > 0.0 {
        let far = p
            .initial
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| g.x(*j) >= 0.5 * g.half_width())
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        if far > 1e-8 * peak.max(1.0) {
            return Err(DnlsError::Construction(format!(
                "half-line initial data must decay below 1e-8 before x = L/2; found {far:.2e}"
            )));
        }
    }

    let mut solver = HalflineSolver::new(p.clone());
    let mut v = p.initial.values().to_vec();
    let mut t = 0.0_f64;
    let mut dt = p.dt0.min(p.t_end);
    let mut accepted: usize = 0;
    let mut leak = false;
    let mut frames: Vec<TrajectoryFrame> = Vec::new();

    let push_frame = |frames: &mut Vec<TrajectoryFrame>, t: f64, v: &[Complex64], dt: f64| {
        let state = ComplexField::new(g, v.to_vec()).expect("grid unchanged");
        let diagnostics = diagnostics::record(t, &state, dt);
        frames.push(TrajectoryFrame {
            t,
            state,
            diagnostics,
        });
    };
    push_frame(&mut frames, 0.0, &v, 0.0);

    let mut y_full = vec![Complex64::new(0.0, 0.0); n];
    let mut y_half = vec![Complex64::new(0.0, 0.0); n];

    if p.tolerance.is_none() {
        let steps = (p.t_end / dt).round().max(1.0) as usize;
        let dt_exact = p.t_end / steps as f64;
        for s in 0..steps {
            solver.step(&mut v, dt_exact);
            t = dt_exact * (s + 1) as f64;
            accepted += 1;
            let gn = solver.grad_norm(&v);
            if !gn.is_finite() {
                return Err(DnlsError::StepFailure(format!(
                    "non-finite state at t = {t} under fixed dt = {dt_exact}"
                )));
            }
            leak = leak || solver.leaking(&v);
            if gn >= p.stop_grad_norm {
                push_frame(&mut frames, t, &v, dt_exact);
                return Ok(SolverOutcome {
                    status: SolverStatus::BlowupStop,
                    frames,
                    t_final: t,
                    boundary_leak: leak,
                });
            }
            if accepted % p.frame_stride == 0 || s + 1 == steps {
                push_frame(&mut frames, t, &v, dt_exact);
            }
        }
        return Ok(SolverOutcome {
            status: SolverStatus::ReachedTEnd,
            frames,
            t_final: t,
            boundary_leak: leak,
        });
    }

    let tol = p.tolerance.expect("adaptive branch");
    while t < p.t_end - 1e-13 {
        let dt_step = dt.min(p.t_end - t);
        if dt_step < MIN_DT {
            push_frame(&mut frames, t, &v, dt_step);
            return Ok(SolverOutcome {
                status: SolverStatus::StepFailure,
                frames,
                t_final: t,
                boundary_leak: leak,
            });
        }
        y_full.copy_from_slice(&v);
        solver.step(&mut y_full, dt_step);
        y_half.copy_from_slice(&v);
        solver.step(&mut y_half, 0.5 * dt_step);
        solver.step(&mut y_half, 0.5 * dt_step);

        let err = relative_l2_diff(&y_full, &y_half);
        if !err.is_finite() {
            dt = dt_step * 0.1;
            continue;
        }
        if err <= tol {
            v.copy_from_slice(&y_half);
            t += dt_step;
            accepted += 1;
            // second-order scheme: local error ~ dt³, so the exponent is 1/3
            let factor = if err == 0.0 {
                2.0
            } else {
                (0.9 * (tol / err).powf(1.0 / 3.0)).min(2.0)
            };
            dt = dt_step * factor.max(0.1);

            let gn = solver.grad_norm(&v);
            leak = leak || solver.leaking(&v);
            if gn >= p.stop_grad_norm {
                push_frame(&mut frames, t, &v, dt_step);
                return Ok(SolverOutcome {
                    status: SolverStatus::BlowupStop,
                    frames,
                    t_final: t,
                    boundary_leak: leak,
                });
            }
            if accepted % p.frame_stride == 0 {
                push_frame(&mut frames, t, &v, dt_step);
            }
        } else {
            dt = dt_step * (0.9 * (tol / err).powf(1.0 / 3.0)).max(0.1);
        }
    }

    if frames.last().map(|f| f.t) != Some(t) {
        push_frame(&mut frames, t, &v, dt);
    }
    Ok(SolverOutcome {
        status: SolverStatus::ReachedTEnd,
        frames,
        t_final: t,
        boundary_leak: leak,
    })
}
