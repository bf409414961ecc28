//! ETDRK4 pseudospectral integrator on the periodic line.
//!
//! The linear factor e^{-ik²t} is applied exactly per mode; the nonlinearity
//! is evaluated in physical space and dealiased by the 2/3 rule after every
//! transform back. The ETDRK4 φ-weights are evaluated by a 32-point contour
//! mean on the unit circle around each h·λ, which is exact for entire
//! functions and free of the small-z cancellation of the closed forms.

use num_complex::Complex64;

use super::{EvolutionProblem, SolverOutcome, SolverStatus, TrajectoryFrame};
use crate::diagnostics;
use crate::error::{DnlsError, Result};
use crate::grid::{self, ComplexField, GridKind};

const CONTOUR_POINTS: usize = 32;
const MIN_DT: f64 = 1e-14;
/// Tables are rebuilt only when dt moves by more than this factor.
const DT_REBUILD_TOL: f64 = 0.02;

struct Tables {
    dt: f64,
    e_full: Vec<Complex64>,
    e_half: Vec<Complex64>,
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
}

fn build_tables(dt: f64, lambda: &[Complex64]) -> Tables {
    let n = lambda.len();
    let mut t = Tables {
        dt,
        e_full: vec![Complex64::new(0.0, 0.0); n],
        e_half: vec![Complex64::new(0.0, 0.0); n],
        q: vec![Complex64::new(0.0, 0.0); n],
        f1: vec![Complex64::new(0.0, 0.0); n],
        f2: vec![Complex64::new(0.0, 0.0); n],
        f3: vec![Complex64::new(0.0, 0.0); n],
    };
    let m = CONTOUR_POINTS;
    let contour: Vec<Complex64> = (0..m)
        .map(|j| {
            Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64,
            )
        })
        .collect();
    for (i, &lam) in lambda.iter().enumerate() {
        let z0 = lam * dt;
        t.e_full[i] = z0.exp();
        t.e_half[i] = (z0 / 2.0).exp();
        let mut q = Complex64::new(0.0, 0.0);
        let mut f1 = Complex64::new(0.0, 0.0);
        let mut f2 = Complex64::new(0.0, 0.0);
        let mut f3 = Complex64::new(0.0, 0.0);
        for &c in &contour {
            let z = z0 + c;
            let ez = z.exp();
            let z2 = z * z;
            let z3 = z2 * z;
            q += ((z / 2.0).exp() - 1.0) / z;
            f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z2)) / z3;
            f2 += (2.0 + z + ez * (-2.0 + z)) / z3;
            f3 += (-4.0 - 3.0 * z - z2 + ez * (4.0 - z)) / z3;
        }
        let scale = dt / m as f64;
        t.q[i] = q * scale;
        t.f1[i] = f1 * scale;
        t.f2[i] = f2 * scale;
        t.f3[i] = f3 * scale;
    }
    t
}

struct LineSolver {
    problem: EvolutionProblem,
    lambda: Vec<Complex64>,
    ik: Vec<Complex64>,
    keep: Vec<bool>,
    // scratch
    phys_v: Vec<Complex64>,
    phys_vx: Vec<Complex64>,
    stage_a: Vec<Complex64>,
    stage_b: Vec<Complex64>,
    stage_c: Vec<Complex64>,
    n_v: Vec<Complex64>,
    n_a: Vec<Complex64>,
    n_b: Vec<Complex64>,
    n_c: Vec<Complex64>,
}

impl LineSolver {
    fn new(problem: EvolutionProblem) -> Self {
        let g = problem.grid();
        let n = g.n_points();
        let ksq = grid::wavenumbers_sq(&g);
        let k = grid::wavenumbers(&g);
        Self {
            problem,
            lambda: ksq.iter().map(|&k2| Complex64::new(0.0, -k2)).collect(),
            ik: k.iter().map(|&km| Complex64::new(0.0, km)).collect(),
            keep: grid::dealias_keep(&g),
            phys_v: vec![Complex64::new(0.0, 0.0); n],
            phys_vx: vec![Complex64::new(0.0, 0.0); n],
            stage_a: vec![Complex64::new(0.0, 0.0); n],
            stage_b: vec![Complex64::new(0.0, 0.0); n],
            stage_c: vec![Complex64::new(0.0, 0.0); n],
            n_v: vec![Complex64::new(0.0, 0.0); n],
            n_a: vec![Complex64::new(0.0, 0.0); n],
            n_b: vec![Complex64::new(0.0, 0.0); n],
            n_c: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Dealiased transform of N(v) from the spectral state.
    fn nonlinear(&mut self, vhat: &[Complex64], out: &mut [Complex64]) {
        let n = vhat.len();
        let inv_n = 1.0 / n as f64;
        self.phys_v.copy_from_slice(vhat);
        grid::fft_inverse(&mut self.phys_v);
        for (j, z) in self.phys_vx.iter_mut().enumerate() {
            *z = vhat[j] * self.ik[j];
        }
        grid::fft_inverse(&mut self.phys_vx);
        let eq = self.problem.equation;
        for j in 0..n {
            let v = self.phys_v[j] * inv_n;
            let vx = self.phys_vx[j] * inv_n;
            out[j] = eq.nonlinear_point(v, vx);
        }
        grid::fft_forward(out);
        for (j, z) in out.iter_mut().enumerate() {
            if !self.keep[j] {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// One ETDRK4 step in spectral space; `vhat` is advanced in place.
    fn step(&mut self, tables: &Tables, vhat: &mut [Complex64]) {
        let n = vhat.len();
        let mut n_v = std::mem::take(&mut self.n_v);
        let mut n_a = std::mem::take(&mut self.n_a);
        let mut n_b = std::mem::take(&mut self.n_b);
        let mut n_c = std::mem::take(&mut self.n_c);
        let mut a = std::mem::take(&mut self.stage_a);
        let mut b = std::mem::take(&mut self.stage_b);
        let mut c = std::mem::take(&mut self.stage_c);

        self.nonlinear(vhat, &mut n_v);
        for j in 0..n {
            a[j] = tables.e_half[j] * vhat[j] + tables.q[j] * n_v[j];
        }
        self.nonlinear(&a, &mut n_a);
        for j in 0..n {
            b[j] = tables.e_half[j] * vhat[j] + tables.q[j] * n_a[j];
        }
        self.nonlinear(&b, &mut n_b);
        for j in 0..n {
            c[j] = tables.e_half[j] * a[j] + tables.q[j] * (2.0 * n_b[j] - n_v[j]);
        }
        self.nonlinear(&c, &mut n_c);
        for j in 0..n {
            vhat[j] = tables.e_full[j] * vhat[j]
                + tables.f1[j] * n_v[j]
                + 2.0 * tables.f2[j] * (n_a[j] + n_b[j])
                + tables.f3[j] * n_c[j];
        }

        self.n_v = n_v;
        self.n_a = n_a;
        self.n_b = n_b;
        self.n_c = n_c;
        self.stage_a = a;
        self.stage_b = b;
        self.stage_c = c;
    }

    fn grad_norm(&self, vhat: &[Complex64]) -> f64 {
        let g = self.problem.grid();
        let n = g.n_points() as f64;
        let sum: f64 = vhat
            .iter()
            .zip(&self.ik)
            .map(|(z, ik)| (z * ik).norm_sqr())
            .sum();
        (sum * g.dx() / n).sqrt()
    }

    fn field_from_spectral(&self, vhat: &[Complex64]) -> ComplexField {
        let n = vhat.len();
        let mut phys = vhat.to_vec();
        grid::fft_inverse(&mut phys);
        let inv_n = 1.0 / n as f64;
        ComplexField::new(
            self.problem.grid(),
            phys.into_iter().map(|z| z * inv_n).collect(),
        )
        .expect("grid unchanged")
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

pub fn evolve_line(p: &EvolutionProblem) -> Result<SolverOutcome> {
    let g = p.grid();
    if g.kind() != GridKind::PeriodicLine {
        return Err(DnlsError::InvalidGrid(
            "evolve_line requires a periodic grid".into(),
        ));
    }
    let n = g.n_points();

    let mut vhat = p.initial.values().to_vec();
    grid::fft_forward(&mut vhat);

    // spectral-tail precondition: the dealiased band must carry the field
    let peak = vhat.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak > 0.0 {
        let keep = grid::dealias_keep(&g);
        let tail = vhat
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| !k)
            .map(|(z, _)| z.norm())
            .fold(0.0, f64::max);
        if tail > 1e-8 * peak {
            return Err(DnlsError::Construction(format!(
                "initial data under-resolved: spectral tail {:.2e} of peak",
                tail / peak
            )));
        }
    }

    let mut solver = LineSolver::new(p.clone());
    let mut frames = Vec::new();
    let mut t = 0.0_f64;
    let mut dt = p.dt0.min(p.t_end);
    let mut accepted: usize = 0;

    let push_frame =
        |frames: &mut Vec<TrajectoryFrame>, solver: &LineSolver, t: f64, vhat: &[Complex64], dt: f64| {
            let state = solver.field_from_spectral(vhat);
            let diagnostics = diagnostics::record(t, &state, dt);
            frames.push(TrajectoryFrame {
                t,
                state,
                diagnostics,
            });
        };
    push_frame(&mut frames, &solver, 0.0, &vhat, 0.0);

    let fixed = p.tolerance.is_none();
    let mut tables_full = build_tables(dt, &solver.lambda);
    let mut tables_half = build_tables(dt / 2.0, &solver.lambda);

    let mut y_full = vec![Complex64::new(0.0, 0.0); n];
    let mut y_half = vec![Complex64::new(0.0, 0.0); n];

    if fixed {
        let steps = (p.t_end / dt).round().max(1.0) as usize;
        let dt_exact = p.t_end / steps as f64;
        let tables = build_tables(dt_exact, &solver.lambda);
        for s in 0..steps {
            solver.step(&tables, &mut vhat);
            t = dt_exact * (s + 1) as f64;
            accepted += 1;
            let gn = solver.grad_norm(&vhat);
            if !gn.is_finite() {
                return Err(DnlsError::StepFailure(format!(
                    "non-finite state at t = {t} under fixed dt = {dt_exact}"
                )));
            }
            if gn >= p.stop_grad_norm {
                push_frame(&mut frames, &solver, t, &vhat, dt_exact);
                return Ok(SolverOutcome {
                    status: SolverStatus::BlowupStop,
                    frames,
                    t_final: t,
                    boundary_leak: false,
                });
            }
            if accepted % p.frame_stride == 0 || s + 1 == steps {
                push_frame(&mut frames, &solver, t, &vhat, dt_exact);
            }
        }
        return Ok(SolverOutcome {
            status: SolverStatus::ReachedTEnd,
            frames,
            t_final: t,
        boundary_leak: false,
        });
    }

    let tol = p.tolerance.expect("adaptive branch");
    while t < p.t_end - 1e-13 {
        let dt_step = dt.min(p.t_end - t);
        if dt_step < MIN_DT {
            push_frame(&mut frames, &solver, t, &vhat, dt_step);
            return Ok(SolverOutcome {
                status: SolverStatus::StepFailure,
                frames,
                t_final: t,
                boundary_leak: false,
            });
        }
        if (tables_full.dt - dt_step).abs() > DT_REBUILD_TOL * dt_step {
            tables_full = build_tables(dt_step, &solver.lambda);
            tables_half = build_tables(dt_step / 2.0, &solver.lambda);
        }
        let dt_eff = tables_full.dt;

        // one full step vs two half steps
        y_full.copy_from_slice(&vhat);
        solver.step(&tables_full, &mut y_full);
        y_half.copy_from_slice(&vhat);
        solver.step(&tables_half, &mut y_half);
        solver.step(&tables_half, &mut y_half);

        let err = relative_l2_diff(&y_full, &y_half);
        if !err.is_finite() {
            // blow-up overwhelmed the step: shrink hard
            dt = dt_eff * 0.1;
            continue;
        }
        if err <= tol {
            vhat.copy_from_slice(&y_half);
            t += dt_eff;
            accepted += 1;
            let factor = if err == 0.0 {
                2.0
            } else {
                (0.9 * (tol / err).powf(0.2)).min(2.0)
            };
            dt = dt_eff * factor.max(0.1);

            let gn = solver.grad_norm(&vhat);
            if gn >= p.stop_grad_norm {
                push_frame(&mut frames, &solver, t, &vhat, dt_eff);
                return Ok(SolverOutcome {
                    status: SolverStatus::BlowupStop,
                    frames,
                    t_final: t,
                    boundary_leak: false,
                });
            }
            if accepted % p.frame_stride == 0 {
                push_frame(&mut frames, &solver, t, &vhat, dt_eff);
            }
        } else {
            dt = dt_eff * (0.9 * (tol / err).powf(0.2)).max(0.1);
        }
    }

    if frames.last().map(|f| f.t) != Some(t) {
        push_frame(&mut frames, &solver, t, &vhat, dt);
    }
    Ok(SolverOutcome {
        status: SolverStatus::ReachedTEnd,
        frames,
        t_final: t,
        boundary_leak: false,
    })
}
