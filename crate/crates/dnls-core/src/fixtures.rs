//! Seeded field fixtures shared by tests, the gauge-check suite, and the
//! experiment harness. Fixed seed ⇒ bit-reproducible samples.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{self, ComplexField, GridSpec};

/// Random smooth field on a periodic grid, decaying below ~1e-12 at the seam.
///
/// Built from random Fourier coefficients under a Gaussian spectral envelope,
/// then localized by a super-Gaussian window and normalized to the requested
/// L² norm.
pub fn random_smooth_periodic(g: GridSpec, seed: u64, l2_norm: f64) -> ComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.n_points();
    let k_scale = 1.5;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    let wavenumber = |m: usize| -> f64 {
        let signed = if m <= n / 2 {
            m as f64
        } else {
            m as f64 - n as f64
        };
        std::f64::consts::PI / g.half_width() * signed
    };
    for (m, z) in spec.iter_mut().enumerate() {
        let k = wavenumber(m);
        let envelope = (-(k / k_scale).powi(2)).exp();
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        *z = Complex64::new(re, im) * envelope;
    }
    grid::fft_inverse(&mut spec);
    let window_width = 0.45 * g.half_width();
    let mut values: Vec<Complex64> = (0..n)
        .map(|j| {
            let x = g.x(j);
            spec[j] / n as f64 * (-(x / window_width).powi(8)).exp()
        })
        .collect();
    let field = ComplexField::new(g, values.clone()).expect("length matches");
    let norm = grid::l2_norm(&field);
    let scale = if norm > 0.0 { l2_norm / norm } else { 0.0 };
    for z in &mut values {
        *z *= scale;
    }
    ComplexField::new(g, values).expect("length matches")
}

/// Chirped Gaussian A e^{-((x-x0)/w)^2 + ikx}.
pub fn gaussian(g: GridSpec, amplitude: f64, width: f64, center: f64, chirp: f64) -> ComplexField {
    ComplexField::from_fn(g, |x| {
        Complex64::from_polar(
            amplitude * (-((x - center) / width).powi(2)).exp(),
            chirp * x,
        )
    })
}

/// Half-line profile A x e^{-x^2} e^{i k x}; vanishes at x = 0.
pub fn halfline_xgaussian(g: GridSpec, amplitude: f64, chirp: f64) -> ComplexField {
    ComplexField::from_fn(g, |x| {
        Complex64::from_polar(amplitude * x * (-(x * x)).exp(), chirp * x)
    })
}

/// v₀ = c (Q + a e^{-x²}) with c fixed so mass(v₀) = 2π + mass_excess, and
/// the bump amplitude bisected down from the request until E(v₀) < 0.
///
/// For any positive mass excess the unperturbed scaled Q already has
/// negative energy, so the bisection always terminates; it fails only when
/// the excess is zero or negative (Gagliardo-Nirenberg forces E ≥ 0 there).
pub fn perturbed_ground_state(
    g: GridSpec,
    mass_excess: f64,
    bump_amplitude: f64,
) -> crate::error::Result<ComplexField> {
    use crate::diagnostics;
    use crate::error::DnlsError;
    use crate::ground_state;

    let q = ground_state::ground_state(g)?;
    let target_mass = 2.0 * std::f64::consts::PI + mass_excess;
    let candidate = |a: f64| -> ComplexField {
        let shaped = ComplexField::from_fn(g, |x| {
            Complex64::new(ground_state::q_profile(x) + a * (-(x * x)).exp(), 0.0)
        });
        let c = (target_mass / grid::l2_norm_sq(&shaped)).sqrt();
        shaped.scale(Complex64::new(c, 0.0))
    };
    let _ = &q;
    let mut a = bump_amplitude.abs();
    for _ in 0..60 {
        let v0 = candidate(a);
        if diagnostics::energy_e(&v0) < 0.0 {
            return Ok(v0);
        }
        if a < 1e-12 {
            break;
        }
        a *= 0.5;
    }
    // a -> 0 limit: plain scaled Q
    let v0 = candidate(0.0);
    if diagnostics::energy_e(&v0) < 0.0 {
        return Ok(v0);
    }
    Err(DnlsError::Construction(format!(
        "could not reach E < 0 at mass excess {mass_excess}; the excess must be positive"
    )))
}

/// Real v-frame half-line profile A x e^{-x²} with A tuned by bisection so
/// that E(v₀) = ‖v₀ₓ‖² − (1/16)‖v₀‖₆⁶ hits the (negative) target.
pub fn halfline_negative_energy(
    g: GridSpec,
    energy_target: f64,
) -> crate::error::Result<ComplexField> {
    use crate::error::DnlsError;

    if energy_target >= 0.0 {
        return Err(DnlsError::Construction(format!(
            "energy target must be negative, got {energy_target}"
        )));
    }
    let profile = ComplexField::from_fn(g, |x| Complex64::new(x * (-(x * x)).exp(), 0.0));
    let kinetic = grid::l2_norm_sq(&grid::derivative(&profile));
    let sextic = grid::lp_norm_pow(&profile, 6);
    // E(A p) = A² kinetic − A⁶ sextic/16: monotone decreasing past the
    // crossover, so bisection on the decreasing branch suffices
    let energy = |a: f64| a * a * kinetic - a.powi(6) * sextic / 16.0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while energy(hi) > energy_target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(DnlsError::Construction(
                "bisection for the energy target diverged".into(),
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
    let a = 0.5 * (lo + hi);
    Ok(profile.scale(Complex64::new(a, 0.0)))
}
