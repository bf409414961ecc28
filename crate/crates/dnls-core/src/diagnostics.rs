//! Conserved quantities, weighted virial functionals, their exact rate
//! formulas, and the half-line blow-up certificate.
//!
//! Frame conventions: v denotes the gauge-reduced unknown (v = G_{-3/4} u)
//! and u the original one. The energies and momenta coincide across the
//! frame map, E_D(u) = E(v) and P_D(u) = P(v), so trajectory records are
//! computed once from the v-frame state.



use crate::error::{DnlsError, Result};
use crate::gauge::{self, GaugeParameter};
use crate::grid::{self, ComplexField, GridKind, GridSpec};

/// One time-slice of the standard diagnostics along a trajectory.
///
/// `virial_i` carries I(t) = ∫x²|v|² and `virial_j` the ψ = x functional
/// J(t) = 2Im∫x conj(v) vₓ + (1/2)∫x|v|⁴ whose rate is 4E(v₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy_e: f64,
    pub energy_ed: f64,
    pub momentum_p: f64,
    pub momentum_pd: f64,
    pub virial_i: f64,
    pub virial_j: f64,
    pub grad_norm: f64,
    pub dt_used: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.mass,
            self.energy_e,
            self.energy_ed,
            self.momentum_p,
            self.momentum_pd,
            self.virial_i,
            self.virial_j,
            self.grad_norm,
            self.dt_used,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// M(f) = ∫ |f|².
pub fn mass(f: &ComplexField) -> f64 {
    grid::l2_norm_sq(f)
}

/// v-frame energy E(v) = ‖vₓ‖₂² − (1/16)‖v‖₆⁶.
pub fn energy_e(v: &ComplexField) -> f64 {
    let vx = grid::derivative(v);
    grid::l2_norm_sq(&vx) - grid::lp_norm_pow(v, 6) / 16.0
}

/// u-frame energy E_D(u) = ∫(|uₓ|² + (3/2)Im(|u|²u conj(uₓ)) + (1/2)|u|⁶).
pub fn energy_ed(u: &ComplexField) -> f64 {
    let ux = grid::derivative(u);
    let g = u.grid();
    let n = g.n_points();
    let mut integrand = vec![0.0; n];
    for j in 0..n {
        let z = u.values()[j];
        let zx = ux.values()[j];
        integrand[j] =
            zx.norm_sqr() + 1.5 * (z.norm_sqr() * z * zx.conj()).im + 0.5 * z.norm_sqr().powi(3);
    }
    g.integrate(&integrand)
}

/// v-frame momentum P(v) = Im∫ conj(v) vₓ + (1/4)∫|v|⁴.
pub fn momentum_p(v: &ComplexField) -> f64 {
    let vx = grid::derivative(v);
    let g = v.grid();
    let current: Vec<f64> = v
        .values()
        .iter()
        .zip(vx.values())
        .map(|(&z, &zx)| (z.conj() * zx).im)
        .collect();
    let quartic: Vec<f64> = v.values().iter().map(|z| z.norm_sqr().powi(2)).collect();
    g.integrate(&current) + 0.25 * g.integrate(&quartic)
}

/// u-frame momentum P_D(u) = Im∫ conj(u) uₓ − (1/2)∫|u|⁴.
pub fn momentum_pd(u: &ComplexField) -> f64 {
    let ux = grid::derivative(u);
    let g = u.grid();
    let current: Vec<f64> = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&z, &zx)| (z.conj() * zx).im)
        .collect();
    let quartic: Vec<f64> = u.values().iter().map(|z| z.norm_sqr().powi(2)).collect();
    g.integrate(&current) - 0.5 * g.integrate(&quartic)
}

/// Weight function ψ for the virial functionals, with analytically supplied
/// ψ′ and ψ‴. Numerical third differences of user samples are refused by
/// construction: custom weights must provide closures for all three.
#[derive(Debug, Clone)]
pub struct VirialWeight {
    kind: WeightKind,
    psi: Vec<f64>,
    psi_prime: Vec<f64>,
    psi_third: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    One,
    X,
    XSquared,
    Custom,
}

impl VirialWeight {
    pub fn one(g: GridSpec) -> Self {
        Self {
            kind: WeightKind::One,
            psi: vec![1.0; g.n_points()],
            psi_prime: vec![0.0; g.n_points()],
            psi_third: vec![0.0; g.n_points()],
        }
    }

    pub fn x(g: GridSpec) -> Self {
        Self {
            kind: WeightKind::X,
            psi: g.points(),
            psi_prime: vec![1.0; g.n_points()],
            psi_third: vec![0.0; g.n_points()],
        }
    }

    pub fn x_squared(g: GridSpec) -> Self {
        Self {
            kind: WeightKind::XSquared,
            psi: g.points().iter().map(|&x| x * x).collect(),
            psi_prime: g.points().iter().map(|&x| 2.0 * x).collect(),
            psi_third: vec![0.0; g.n_points()],
        }
    }

    /// Custom C³ weight given by closures for ψ, ψ′, ψ‴.
    pub fn custom(
        g: GridSpec,
        psi: impl Fn(f64) -> f64,
        psi_prime: impl Fn(f64) -> f64,
        psi_third: impl Fn(f64) -> f64,
    ) -> Self {
        let xs = g.points();
        Self {
            kind: WeightKind::Custom,
            psi: xs.iter().map(|&x| psi(x)).collect(),
            psi_prime: xs.iter().map(|&x| psi_prime(x)).collect(),
            psi_third: xs.iter().map(|&x| psi_third(x)).collect(),
        }
    }

    pub fn kind(&self) -> WeightKind {
        self.kind
    }
}

/// I(t) = ∫ ψ |v|².
pub fn virial_i(v: &ComplexField, w: &VirialWeight) -> f64 {
    let g = v.grid();
    let integrand: Vec<f64> = v
        .values()
        .iter()
        .zip(&w.psi)
        .map(|(z, &p)| p * z.norm_sqr())
        .collect();
    g.integrate(&integrand)
}

/// J(t) = 2 Im ∫ ψ conj(v) vₓ + (1/2) ∫ ψ |v|⁴.
pub fn virial_j(v: &ComplexField, w: &VirialWeight) -> f64 {
    let vx = grid::derivative(v);
    let g = v.grid();
    let integrand: Vec<f64> = v
        .values()
        .iter()
        .zip(vx.values())
        .zip(&w.psi)
        .map(|((&z, &zx), &p)| p * (2.0 * (z.conj() * zx).im + 0.5 * z.norm_sqr().powi(2)))
        .collect();
    g.integrate(&integrand)
}

/// I′(t) = 2 Im ∫ ψ′ conj(v) vₓ, evaluated at the instantaneous state.
pub fn virial_i_rate(v: &ComplexField, w: &VirialWeight) -> f64 {
    let vx = grid::derivative(v);
    let g = v.grid();
    let integrand: Vec<f64> = v
        .values()
        .iter()
        .zip(vx.values())
        .zip(&w.psi_prime)
        .map(|((&z, &zx), &p)| 2.0 * p * (z.conj() * zx).im)
        .collect();
    g.integrate(&integrand)
}

/// J′(t) = 4 ∫ ψ′ (|vₓ|² − (1/16)|v|⁶) − ∫ ψ‴ |v|².
pub fn virial_j_rate(v: &ComplexField, w: &VirialWeight) -> f64 {
    let vx = grid::derivative(v);
    let g = v.grid();
    let main: Vec<f64> = v
        .values()
        .iter()
        .zip(vx.values())
        .zip(&w.psi_prime)
        .map(|((&z, &zx), &p)| 4.0 * p * (zx.norm_sqr() - z.norm_sqr().powi(3) / 16.0))
        .collect();
    let third: Vec<f64> = v
        .values()
        .iter()
        .zip(&w.psi_third)
        .map(|(&z, &p)| p * z.norm_sqr())
        .collect();
    g.integrate(&main) - g.integrate(&third)
}

/// ∫ ψ |v|⁴ — the "surplus" term that breaks variance convexity for DNLS.
pub fn weighted_quartic(v: &ComplexField, w: &VirialWeight) -> f64 {
    let g = v.grid();
    let integrand: Vec<f64> = v
        .values()
        .iter()
        .zip(&w.psi)
        .map(|(z, &p)| p * z.norm_sqr().powi(2))
        .collect();
    g.integrate(&integrand)
}

/// Full diagnostics record from a v-frame state. The u-frame columns are
/// filled through the frame dictionary (E_D = E, P_D = P), computed once.
pub fn record(t: f64, v: &ComplexField, dt_used: f64) -> DiagnosticsRecord {
    let g = v.grid();
    let vx = grid::derivative(v);
    let grad_sq = grid::l2_norm_sq(&vx);
    let e = grad_sq - grid::lp_norm_pow(v, 6) / 16.0;
    let p = momentum_p(v);
    let wx2 = VirialWeight::x_squared(g);
    let wx = VirialWeight::x(g);
    DiagnosticsRecord {
        t,
        mass: mass(v),
        energy_e: e,
        energy_ed: e,
        momentum_p: p,
        momentum_pd: p,
        virial_i: virial_i(v, &wx2),
        virial_j: virial_j(v, &wx),
        grad_norm: grad_sq.sqrt(),
        dt_used,
    }
}

/// Quadratic-in-time certificate for half-line blow-up: I(t) ≤ a2 t² + a1 t + a0
/// with a2 = 4E < 0 forces I to vanish by t_star_bound, and the
/// Cauchy-Schwarz bound ‖vₓ(t)‖₂ ≥ mass0 / (2√I(t)) then diverges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupCertificate {
    /// 4 E(v₀)
    pub a2: f64,
    /// I′(0) + ∫ x |v₀|⁴
    pub a1: f64,
    /// I(0) = ∫ x² |v₀|²
    pub a0: f64,
    /// Positive root of a2 t² + a1 t + a0.
    pub t_star_bound: f64,
    /// ∫ |v₀|², conserved, drives the gradient lower bound.
    pub mass0: f64,
}

/// Certificate from u-frame initial data on the half-line. Maps to the
/// v-frame through G_{-3/4} (phase integral from x = 0) and evaluates all
/// coefficients by quadrature on v₀ alone — never by time differencing.
pub fn blowup_certificate(u0: &ComplexField) -> Result<BlowupCertificate> {
    if u0.grid().kind() != GridKind::DirichletHalfLine {
        return Err(DnlsError::InvalidGrid(
            "blow-up certificate is a half-line statement".into(),
        ));
    }
    let v0 = gauge::gauge_transform(GaugeParameter::U_TO_V, u0);
    let vx = gauge::gauge_derivative(GaugeParameter::U_TO_V, u0);
    certificate_from_v_frame(&v0, &vx)
}

/// Certificate directly from v-frame data (vₓ supplied so callers can use
/// the analytic gauge derivative when available).
pub fn certificate_from_v_frame(
    v0: &ComplexField,
    vx: &ComplexField,
) -> Result<BlowupCertificate> {
    let g = v0.grid();
    if g.kind() != GridKind::DirichletHalfLine {
        return Err(DnlsError::InvalidGrid(
            "blow-up certificate is a half-line statement".into(),
        ));
    }
    let energy = grid::l2_norm_sq(vx) - grid::lp_norm_pow(v0, 6) / 16.0;
    if energy >= 0.0 {
        return Err(DnlsError::NonnegativeEnergy(energy));
    }
    let xs = g.points();
    let i_prime_integrand: Vec<f64> = v0
        .values()
        .iter()
        .zip(vx.values())
        .zip(&xs)
        .map(|((&z, &zx), &x)| 4.0 * x * (z.conj() * zx).im)
        .collect();
    let x_quartic: Vec<f64> = v0
        .values()
        .iter()
        .zip(&xs)
        .map(|(&z, &x)| x * z.norm_sqr().powi(2))
        .collect();
    let x_sq_density: Vec<f64> = v0
        .values()
        .iter()
        .zip(&xs)
        .map(|(&z, &x)| x * x * z.norm_sqr())
        .collect();
    let a2 = 4.0 * energy;
    let a1 = g.integrate(&i_prime_integrand) + g.integrate(&x_quartic);
    let a0 = g.integrate(&x_sq_density);
    let disc = a1 * a1 - 4.0 * a2 * a0;
    let t_star_bound = (a1 + disc.sqrt()) / (-2.0 * a2);
    Ok(BlowupCertificate {
        a2,
        a1,
        a0,
        t_star_bound,
        mass0: mass(v0),
    })
}

impl BlowupCertificate {
    /// Value of the quadratic bound at time t.
    pub fn quadratic_bound(&self, t: f64) -> f64 {
        self.a2 * t * t + self.a1 * t + self.a0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::gauge;
    use crate::ground_state::{self, WaveFrame};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn periodic() -> GridSpec {
        GridSpec::periodic(30.0, 1024).unwrap()
    }

    #[test]
    fn ground_state_functionals() {
        let q = ground_state::ground_state(periodic()).unwrap();
        assert!((mass(q.q()) - 2.0 * PI).abs() < 1e-10);
        assert!(energy_e(q.q()).abs() < 1e-9);
        // P(Q) = 0 + (1/4)·16 = 4
        assert!((momentum_p(q.q()) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn u_frame_energy_matches_v_frame_for_random_fields() {
        for seed in [1u64, 9, 27] {
            let u = fixtures::random_smooth_periodic(periodic(), seed, 1.5);
            let v = gauge::gauge_transform(-0.75, &u);
            let lhs = energy_ed(&u);
            let rhs = energy_e(&v);
            assert!((lhs - rhs).abs() < 1e-8, "seed {seed}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn momentum_frame_dictionary() {
        for seed in [4u64, 13] {
            let u = fixtures::random_smooth_periodic(periodic(), seed, 1.5);
            let v = gauge::gauge_transform(-0.75, &u);
            let lhs = momentum_pd(&u);
            let rhs = momentum_p(&v);
            assert!((lhs - rhs).abs() < 1e-8, "seed {seed}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn unit_weight_reduces_virials_to_momentum_and_mass_laws() {
        let v = fixtures::random_smooth_periodic(periodic(), 6, 1.3);
        let g = v.grid();
        let one = VirialWeight::one(g);
        assert!((virial_j(&v, &one) - 2.0 * momentum_p(&v)).abs() < 1e-12);
        assert_eq!(virial_i_rate(&v, &one), 0.0);
        assert_eq!(virial_j_rate(&v, &one), 0.0);
        assert!((virial_i(&v, &one) - mass(&v)).abs() < 1e-12);
    }

    #[test]
    fn variance_of_ground_state() {
        // ∫ x² Q² frozen from a high-precision quadrature of the closed form
        let q = ground_state::ground_state(periodic()).unwrap();
        let w = VirialWeight::x_squared(periodic());
        let i = virial_i(q.q(), &w);
        assert!((i - 3.875_784_585_037_477_5).abs() < 1e-9, "I(Q) = {i}");
        assert!(i > 0.0);
    }

    #[test]
    fn standing_wave_j_rate_vanishes() {
        // ψ = x on e^{it}Q: J′ = 4E(Q) = 0
        let g = periodic();
        let w = VirialWeight::x(g);
        for t in [0.0, 0.4, 2.1] {
            let v = ground_state::standing_wave(t, g, WaveFrame::VFrame).unwrap();
            assert!(virial_j_rate(&v, &w).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_field_virials_vanish() {
        let g = periodic();
        let z = ComplexField::zeros(g);
        let w = VirialWeight::x_squared(g);
        assert_eq!(virial_i(&z, &w), 0.0);
        assert_eq!(virial_j(&z, &w), 0.0);
    }

    #[test]
    fn custom_weight_matches_x_squared() {
        let g = periodic();
        let v = fixtures::random_smooth_periodic(g, 3, 1.0);
        let builtin = VirialWeight::x_squared(g);
        let custom = VirialWeight::custom(g, |x| x * x, |x| 2.0 * x, |_| 0.0);
        assert!((virial_i(&v, &builtin) - virial_i(&v, &custom)).abs() < 1e-14);
        assert!((virial_j_rate(&v, &builtin) - virial_j_rate(&v, &custom)).abs() < 1e-14);
    }

    #[test]
    fn record_is_consistent() {
        let v = fixtures::random_smooth_periodic(periodic(), 44, 1.2);
        let r = record(0.5, &v, 1e-3);
        assert!(r.is_finite());
        assert!((r.energy_e - energy_e(&v)).abs() < 1e-12);
        assert_eq!(r.energy_e, r.energy_ed);
        assert_eq!(r.momentum_p, r.momentum_pd);
        assert!((r.mass - mass(&v)).abs() < 1e-12);
    }

    fn halfline() -> GridSpec {
        GridSpec::dirichlet_half_line(15.0, 2048).unwrap()
    }

    /// v-frame fixture with E(v₀) = -1: A x e^{-x²} with A from the closed
    /// scaling relation E(Ap) = A²K - A⁶ S/16.
    fn negative_energy_v0() -> ComplexField {
        let g = halfline();
        let p = ComplexField::from_fn(g, |x| Complex64::new(x * (-(x * x)).exp(), 0.0));
        let k = grid::l2_norm_sq(&grid::derivative(&p));
        let s = grid::lp_norm_pow(&p, 6);
        // solve A²k - A⁶ s/16 = -1 by bisection on the decreasing branch
        let f = |a: f64| a * a * k - a.powi(6) * s / 16.0;
        let (mut lo, mut hi) = (1.0_f64, 20.0_f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > -1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        p.scale(Complex64::new(a, 0.0))
    }

    #[test]
    fn certificate_of_negative_energy_fixture() {
        let v0 = negative_energy_v0();

        // direct v-frame path: E = -1 to quadrature accuracy
        let direct = certificate_from_v_frame(&v0, &grid::derivative(&v0)).unwrap();
        assert!((direct.a2 + 4.0).abs() < 1e-8, "a2 {}", direct.a2);

        // u-frame round trip picks up finite-difference error from the
        // oscillating gauge phase; accuracy is FD-limited, not exact
        let u0 = gauge::gauge_transform(0.75, &v0);
        let cert = blowup_certificate(&u0).unwrap();
        assert!((cert.a2 + 4.0).abs() < 5e-4, "a2 {}", cert.a2);
        // regression baselines from an independent quadrature of the fixture
        assert!((cert.a0 - 5.8706).abs() < 1e-2, "a0 {}", cert.a0);
        assert!((cert.a1 - 39.005).abs() < 5e-2, "a1 {}", cert.a1);
        assert!((cert.t_star_bound - 9.8996).abs() < 1e-2, "t* {}", cert.t_star_bound);
        assert!((cert.mass0 - 7.8275).abs() < 1e-2, "mass0 {}", cert.mass0);
        // root consistency: with a2 = -4 the positive root is
        // (a1 + sqrt(a1² + 16 a0)) / 8
        let formula = (direct.a1 + (direct.a1 * direct.a1 + 16.0 * direct.a0).sqrt()) / 8.0;
        assert!((direct.t_star_bound - formula).abs() < 1e-6);
        assert!(cert.quadratic_bound(cert.t_star_bound).abs() < 1e-8);
    }

    #[test]
    fn certificate_rejects_nonnegative_energy() {
        // The literal profile A x e^{-x²+3ix} has E_D > 0 for every A, which
        // makes it the natural rejection fixture.
        let g = halfline();
        for amp in [0.5, 2.0, 7.0] {
            let u0 = fixtures::halfline_xgaussian(g, amp, 3.0);
            assert!(matches!(
                blowup_certificate(&u0),
                Err(DnlsError::NonnegativeEnergy(_))
            ));
        }
    }

    #[test]
    fn certificate_rejects_periodic_grids() {
        let u = fixtures::random_smooth_periodic(periodic(), 1, 1.0);
        assert!(blowup_certificate(&u).is_err());
    }
}
