//! The ground state Q, the standing wave, and the sharp Gagliardo-Nirenberg
//! functional.
//!
//! Q is the positive even solution of -Q'' + Q - (3/16) Q^5 = 0, in closed
//! form Q(x) = 2 sech^{1/2}(2x). Its mass is 2π, ‖Qₓ‖₂² = π, ‖Q‖₄⁴ = 16,
//! ‖Q‖₆⁶ = 16π, so the energy ‖Qₓ‖₂² − (1/16)‖Q‖₆⁶ vanishes and Q attains
//! the sharp constant 4/π² of ‖f‖₆⁶ ≤ (4/π²)‖f‖₂⁴‖fₓ‖₂².

use num_complex::Complex64;

use crate::error::{DnlsError, Result};
use crate::gauge;
use crate::grid::{self, ComplexField, GridKind, GridSpec};

/// Frame in which a standing-wave sample is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveFrame {
    /// The gauge-reduced unknown v; the standing wave is e^{it} Q.
    VFrame,
    /// The original unknown u; the standing wave carries the extra gauge phase.
    UFrame,
}

/// Sampled ground state together with its first derivative.
#[derive(Debug, Clone)]
pub struct GroundState {
    grid: GridSpec,
    q: ComplexField,
    q_deriv: ComplexField,
}

/// Closed-form profile 2 sech^{1/2}(2x).
pub fn q_profile(x: f64) -> f64 {
    2.0 / (2.0 * x).cosh().sqrt()
}

/// Closed-form derivative -2 sech^{1/2}(2x) tanh(2x).
pub fn q_profile_deriv(x: f64) -> f64 {
    -2.0 / (2.0 * x).cosh().sqrt() * (2.0 * x).tanh()
}

impl GroundState {
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Q as a (real-valued) complex field.
    pub fn q(&self) -> &ComplexField {
        &self.q
    }

    /// Analytic Qₓ sampled on the grid.
    pub fn q_deriv(&self) -> &ComplexField {
        &self.q_deriv
    }

    /// Max-norm residual of -Q'' + Q - (3/16) Q^5 on interior grid points.
    pub fn elliptic_residual(&self) -> f64 {
        let qxx = grid::derivative(&grid::derivative(&self.q));
        let n = self.grid.n_points();
        let mut max = 0.0_f64;
        for j in 1..n - 1 {
            let q = self.q.values()[j].re;
            let r = -qxx.values()[j].re + q - 3.0 / 16.0 * q.powi(5);
            max = max.max(r.abs());
        }
        max
    }
}

/// Sample the ground state on a periodic grid with L >= 15.
pub fn ground_state(grid: GridSpec) -> Result<GroundState> {
    if grid.kind() != GridKind::PeriodicLine {
        return Err(DnlsError::GroundStateDomain);
    }
    if grid.half_width() < 15.0 {
        return Err(DnlsError::InvalidGrid(format!(
            "ground state needs half_width >= 15 so the tail is below truncation, got {}",
            grid.half_width()
        )));
    }
    let q = ComplexField::from_fn(grid, |x| Complex64::new(q_profile(x), 0.0));
    let q_deriv = ComplexField::from_fn(grid, |x| Complex64::new(q_profile_deriv(x), 0.0));
    Ok(GroundState { grid, q, q_deriv })
}

/// Standing wave at time t: e^{it} Q in the v-frame, or its gauge image
/// G_{3/4}(e^{it} Q) in the u-frame.
pub fn standing_wave(t: f64, grid: GridSpec, frame: WaveFrame) -> Result<ComplexField> {
    let gs = ground_state(grid)?;
    let phase = Complex64::from_polar(1.0, t);
    let v = gs.q().scale(phase);
    match frame {
        WaveFrame::VFrame => Ok(v),
        WaveFrame::UFrame => Ok(gauge::gauge_transform(0.75, &v)),
    }
}

/// Weinstein functional ‖f‖₆⁶ / (‖f‖₂⁴ ‖fₓ‖₂²); equals 4/π² exactly on the
/// orbit of Q and is strictly smaller elsewhere.
pub fn gn_functional(f: &ComplexField) -> Result<f64> {
    let mass = grid::l2_norm_sq(f);
    let grad = grid::l2_norm_sq(&grid::derivative(f));
    if mass == 0.0 || grad == 0.0 {
        return Err(DnlsError::ZeroField);
    }
    Ok(grid::lp_norm_pow(f, 6) / (mass * mass * grad))
}

/// Directional derivative d/ds E((1+s)f) at s = 0, i.e.
/// 2‖fₓ‖₂² − (6/16)‖f‖₆⁶. For f = Q this equals −4π.
pub fn energy_directional_derivative(f: &ComplexField) -> f64 {
    let grad = grid::l2_norm_sq(&grid::derivative(f));
    2.0 * grad - 6.0 / 16.0 * grid::lp_norm_pow(f, 6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn default_grid() -> GridSpec {
        GridSpec::periodic(30.0, 1024).unwrap()
    }

    /// Independent oracle: shoot on q0 for the decaying even solution of
    /// -Q'' + Q - (3/16)Q^5 = 0 with RK4, classifying trajectories by whether
    /// they cross zero (q0 too high) or turn back upward (q0 too low).
    fn shooting_q0() -> f64 {
        fn classify(q0: f64) -> i32 {
            let mut q = q0;
            let mut p = 0.0_f64;
            let h = 1e-4;
            let f = |q: f64, p: f64| (p, q - 3.0 / 16.0 * q.powi(5));
            let mut x = 0.0;
            while x < 14.0 {
                let (k1q, k1p) = f(q, p);
                let (k2q, k2p) = f(q + 0.5 * h * k1q, p + 0.5 * h * k1p);
                let (k3q, k3p) = f(q + 0.5 * h * k2q, p + 0.5 * h * k2p);
                let (k4q, k4p) = f(q + h * k3q, p + h * k3p);
                q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
                p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
                x += h;
                if q <= 0.0 {
                    return 1; // crossed zero: unbounded branch
                }
                if p >= 0.0 && x > h {
                    return -1; // turned around: oscillatory branch
                }
            }
            0
        }
        let (mut lo, mut hi) = (1.0_f64, 3.0_f64);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if classify(mid) <= 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn closed_form_matches_shooting_oracle() {
        let q0 = shooting_q0();
        assert!(
            (q0 - 2.0).abs() < 1e-6,
            "shooting oracle found Q(0) = {q0}, closed form gives 2"
        );
        assert_eq!(q_profile(0.0), 2.0);
    }

    #[test]
    fn rejects_halfline_and_narrow_grids() {
        let hl = GridSpec::dirichlet_half_line(15.0, 64).unwrap();
        assert!(ground_state(hl).is_err());
        let narrow = GridSpec::periodic(10.0, 64).unwrap();
        assert!(ground_state(narrow).is_err());
    }

    #[test]
    fn mass_and_norm_identities() {
        let gs = ground_state(default_grid()).unwrap();
        let mass = grid::l2_norm_sq(gs.q());
        let l4 = grid::lp_norm_pow(gs.q(), 4);
        let l6 = grid::lp_norm_pow(gs.q(), 6);
        let grad = grid::l2_norm_sq(&grid::derivative(gs.q()));
        assert!((mass - 2.0 * PI).abs() < 1e-10, "mass {mass}");
        assert!((l4 - 16.0).abs() < 1e-10, "l4 {l4}");
        assert!((l6 - 16.0 * PI).abs() < 1e-9, "l6 {l6}");
        assert!((grad - PI).abs() < 1e-10, "grad {grad}");
        // E(Q) = 0 is forced by the last two
        assert!((grad - l6 / 16.0).abs() < 1e-9);
    }

    #[test]
    fn elliptic_residual_small() {
        let gs = ground_state(default_grid()).unwrap();
        assert!(gs.elliptic_residual() < 1e-8, "{}", gs.elliptic_residual());
    }

    #[test]
    fn analytic_derivative_matches_spectral() {
        let gs = ground_state(default_grid()).unwrap();
        let spectral = grid::derivative(gs.q());
        for (a, b) in gs.q_deriv().values().iter().zip(spectral.values()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn h1_norm_of_q() {
        let gs = ground_state(default_grid()).unwrap();
        let h1 = grid::sobolev_h1_norm(gs.q());
        assert!((h1 - (3.0 * PI).sqrt()).abs() < 1e-8, "h1 {h1}");
    }

    #[test]
    fn standing_wave_phases() {
        let g = default_grid();
        let q = ground_state(g).unwrap();
        let v0 = standing_wave(0.0, g, WaveFrame::VFrame).unwrap();
        assert_eq!(&v0, q.q());
        let vpi = standing_wave(PI, g, WaveFrame::VFrame).unwrap();
        for (a, b) in vpi.values().iter().zip(q.q().values()) {
            assert!((a + b).norm() < 1e-12);
        }
    }

    #[test]
    fn u_frame_standing_wave_is_gauge_image() {
        let g = default_grid();
        let q = ground_state(g).unwrap();
        let u0 = standing_wave(0.0, g, WaveFrame::UFrame).unwrap();
        let expected = gauge::gauge_transform(0.75, q.q());
        for (a, b) in u0.values().iter().zip(expected.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn gn_functional_at_extremal_and_below() {
        let g = default_grid();
        let q = ground_state(g).unwrap();
        let sharp = 4.0 / (PI * PI);
        let at_q = gn_functional(q.q()).unwrap();
        assert!((at_q - sharp).abs() < 1e-6, "gn(Q) {at_q}");

        let gaussian = ComplexField::from_fn(g, |x| Complex64::new((-(x * x)).exp(), 0.0));
        let at_g = gn_functional(&gaussian).unwrap();
        // exact value 2/(π√3) for e^{-x^2}
        let exact = 2.0 / (PI * 3.0_f64.sqrt());
        assert!(at_g < sharp - 1e-3);
        assert!((at_g - exact).abs() < 1e-9, "gn(gaussian) {at_g}");
    }

    #[test]
    fn gn_scaling_invariance() {
        // f(x) -> alpha f(beta x) leaves the functional unchanged
        let g = default_grid();
        let f = |x: f64| Complex64::new((-(x * x) / 2.0).exp() * (1.0 + 0.2 * x.cos()), 0.0);
        let base = ComplexField::from_fn(g, f);
        let scaled = ComplexField::from_fn(g, |x| 1.7 * f(2.5 * x));
        let a = gn_functional(&base).unwrap();
        let b = gn_functional(&scaled).unwrap();
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn gn_phase_translation_invariance() {
        let g = default_grid();
        let q = ground_state(g).unwrap();
        let base = gn_functional(q.q()).unwrap();
        // grid-aligned shift by 128 samples and a constant phase
        let n = g.n_points();
        let shift = 128usize;
        let mut vals = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            vals[j] = q.q().values()[(j + n - shift) % n] * Complex64::from_polar(1.0, 0.9);
        }
        let moved = ComplexField::new(g, vals).unwrap();
        let shifted = gn_functional(&moved).unwrap();
        assert!((base - shifted).abs() < 1e-8);
    }

    #[test]
    fn gn_inequality_on_random_smooth_fields() {
        use rand::{Rng, SeedableRng};
        let g = GridSpec::periodic(30.0, 256).unwrap();
        let sharp = 4.0 / (PI * PI);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let a1: f64 = rng.gen_range(0.2..2.0);
            let w1: f64 = rng.gen_range(0.5..4.0);
            let c1: f64 = rng.gen_range(-5.0..5.0);
            let ph: f64 = rng.gen_range(-2.0..2.0);
            let f = ComplexField::from_fn(g, |x| {
                Complex64::from_polar(a1 * (-((x - c1) / w1).powi(2)).exp(), ph * x)
            });
            let v = gn_functional(&f).unwrap();
            assert!(v <= sharp + 1e-8, "gn {v} exceeds sharp constant");
        }
    }

    #[test]
    fn zero_field_rejected() {
        let g = default_grid();
        assert!(matches!(
            gn_functional(&ComplexField::zeros(g)),
            Err(DnlsError::ZeroField)
        ));
    }

    #[test]
    fn frechet_directional_derivative() {
        // d/ds E((1+s)Q)|_0 = 2||Qx||^2 - (6/16) ||Q||_6^6 = -4π under our
        // convention; negativity is the operative fact.
        let gs = ground_state(default_grid()).unwrap();
        let d = energy_directional_derivative(gs.q());
        assert!((d + 4.0 * PI).abs() < 1e-6, "directional derivative {d}");
        assert!(d < 0.0);
    }
}
