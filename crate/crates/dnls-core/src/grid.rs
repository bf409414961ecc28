//! Spatial discretization, spectral differentiation, quadrature, and norms.
//!
//! Two domain flavors are supported: a periodic truncation `[-L, L)` of the
//! line (uniform grid, Fourier differentiation, rectangle quadrature) and a
//! Dirichlet interval `[0, L]` standing in for the half-line (fourth-order
//! finite differences, composite Simpson quadrature). Everything downstream
//! is built on these primitives.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{DnlsError, Result};

/// Domain flavor of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Uniform periodic grid on `[-L, L)`, `n` a power of two.
    PeriodicLine,
    /// Uniform grid on `[0, L]` with both endpoints as samples.
    DirichletHalfLine,
}

/// Discretization of the (truncated) line or half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    kind: GridKind,
    half_width: f64,
    n_points: usize,
    dx: f64,
}

impl GridSpec {
    /// Periodic grid covering `[-half_width, half_width)` with `n_points` samples.
    pub fn periodic(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(DnlsError::InvalidGrid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 16 {
            return Err(DnlsError::InvalidGrid(format!(
                "n_points must be at least 16, got {n_points}"
            )));
        }
        if !n_points.is_power_of_two() {
            return Err(DnlsError::InvalidGrid(format!(
                "periodic grids need a power-of-two point count, got {n_points}"
            )));
        }
        Ok(Self {
            kind: GridKind::PeriodicLine,
            half_width,
            n_points,
            dx: 2.0 * half_width / n_points as f64,
        })
    }

    /// Dirichlet grid covering `[0, half_width]`; first and last samples are exactly 0 and L.
    pub fn dirichlet_half_line(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(DnlsError::InvalidGrid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 16 {
            return Err(DnlsError::InvalidGrid(format!(
                "n_points must be at least 16, got {n_points}"
            )));
        }
        Ok(Self {
            kind: GridKind::DirichletHalfLine,
            half_width,
            n_points,
            dx: half_width / (n_points - 1) as f64,
        })
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coordinate of sample `j`. Endpoints are exact.
    pub fn x(&self, j: usize) -> f64 {
        debug_assert!(j < self.n_points);
        match self.kind {
            GridKind::PeriodicLine => {
                -self.half_width + 2.0 * self.half_width * j as f64 / self.n_points as f64
            }
            GridKind::DirichletHalfLine => {
                self.half_width * j as f64 / (self.n_points - 1) as f64
            }
        }
    }

    /// All sample coordinates.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.x(j)).collect()
    }

    /// Quadrature of real samples: rectangle rule on the periodic line
    /// (spectrally accurate for smooth periodic data), composite Simpson on
    /// the half-line.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.n_points, "sample count must match grid");
        match self.kind {
            GridKind::PeriodicLine => f.iter().sum::<f64>() * self.dx,
            GridKind::DirichletHalfLine => simpson(f, self.dx),
        }
    }

    /// Quadrature of complex samples.
    pub fn integrate_complex(&self, f: &[Complex64]) -> Complex64 {
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let im: Vec<f64> = f.iter().map(|z| z.im).collect();
        Complex64::new(self.integrate(&re), self.integrate(&im))
    }

    /// Cumulative integral `C(x_j) = ∫ f` from the left end, with `C[0] = 0`.
    ///
    /// Periodic grids use the spectral antiderivative (division by ik plus a
    /// linear term for the mean), so the result differentiates back to `f` at
    /// spectral accuracy; half-line grids use cumulative Simpson.
    pub fn cumulative_integral(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n_points, "sample count must match grid");
        match self.kind {
            GridKind::PeriodicLine => {
                let n = self.n_points;
                let mut spec: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                fft_forward(&mut spec);
                let mean = spec[0].re / n as f64;
                let k = wavenumbers(self);
                spec[0] = Complex64::new(0.0, 0.0);
                for m in 1..n {
                    if k[m] == 0.0 {
                        spec[m] = Complex64::new(0.0, 0.0); // Nyquist
                    } else {
                        spec[m] /= Complex64::new(0.0, k[m]);
                    }
                }
                fft_inverse(&mut spec);
                let p0 = spec[0].re / n as f64;
                (0..n)
                    .map(|j| {
                        mean * (self.x(j) + self.half_width) + spec[j].re / n as f64 - p0
                    })
                    .collect()
            }
            GridKind::DirichletHalfLine => cumulative_simpson(f, self.dx),
        }
    }
}

/// Composite Simpson; falls back to a 3/8 closure when the interval count is odd.
fn simpson(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    let intervals = n - 1;
    if intervals % 2 == 0 {
        simpson_even(f, dx)
    } else {
        // Simpson over the first intervals-3 panels, 3/8 rule on the last three.
        let head = &f[..n - 3];
        let tail = &f[n - 4..];
        simpson_even(head, dx) + dx * 3.0 / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3])
    }
}

fn simpson_even(f: &[f64], dx: f64) -> f64 {
    let n = f.len();
    debug_assert!(n >= 3 && (n - 1) % 2 == 0);
    let mut acc = f[0] + f[n - 1];
    for (j, &v) in f.iter().enumerate().take(n - 1).skip(1) {
        acc += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * dx / 3.0
}

/// Cumulative Simpson: each interval integrates the parabola through the
/// three nearest samples, in the style of `scipy.integrate.cumulative_simpson`.
fn cumulative_simpson(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for j in 0..n - 1 {
        let seg = if j == 0 {
            dx / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2])
        } else {
            dx / 12.0 * (-f[j - 1] + 8.0 * f[j] + 5.0 * f[j + 1])
        };
        out[j + 1] = out[j] + seg;
    }
    out
}

/// A sampled complex-valued function on a grid; the state u, v, or w at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(DnlsError::FieldLengthMismatch {
                len: values.len(),
                expected: grid.n_points(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.n_points()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_points()).map(|j| f(grid.x(j))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Pointwise map preserving the grid.
    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| c * z)
    }

    /// Samples of |f|^2.
    pub fn abs_sq(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Maximum modulus over all samples.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// ∫ |f|^2.
pub fn l2_norm_sq(f: &ComplexField) -> f64 {
    f.grid().integrate(&f.abs_sq())
}

pub fn l2_norm(f: &ComplexField) -> f64 {
    l2_norm_sq(f).sqrt()
}

/// ∫ |f|^p for even p.
pub fn lp_norm_pow(f: &ComplexField, p: u32) -> f64 {
    debug_assert!(p % 2 == 0);
    let half = (p / 2) as i32;
    let samples: Vec<f64> = f.values().iter().map(|z| z.norm_sqr().powi(half)).collect();
    f.grid().integrate(&samples)
}

/// √(‖f‖₂² + ‖∂ₓf‖₂²).
pub fn sobolev_h1_norm(f: &ComplexField) -> f64 {
    let df = derivative(f);
    (l2_norm_sq(f) + l2_norm_sq(&df)).sqrt()
}

/// ∂ₓ f: Fourier multiplier ik on the periodic line, fourth-order centered
/// finite differences with one-sided closures on the half-line.
pub fn derivative(f: &ComplexField) -> ComplexField {
    let grid = f.grid();
    match grid.kind() {
        GridKind::PeriodicLine => {
            let mut spec = f.values().to_vec();
            fft_forward(&mut spec);
            let k = wavenumbers(&grid);
            for (z, &km) in spec.iter_mut().zip(k.iter()) {
                *z *= Complex64::new(0.0, km);
            }
            fft_inverse(&mut spec);
            let scale = 1.0 / grid.n_points() as f64;
            ComplexField {
                grid,
                values: spec.into_iter().map(|z| z * scale).collect(),
            }
        }
        GridKind::DirichletHalfLine => {
            let v = f.values();
            let n = grid.n_points();
            let h = grid.dx();
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4])
                / (12.0 * h);
            out[1] =
                (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h);
            for j in 2..n - 2 {
                out[j] = (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) / (12.0 * h);
            }
            out[n - 2] = (3.0 * v[n - 1] + 10.0 * v[n - 2] - 18.0 * v[n - 3] + 6.0 * v[n - 4]
                - v[n - 5])
                / (12.0 * h);
            out[n - 1] = (25.0 * v[n - 1] - 48.0 * v[n - 2] + 36.0 * v[n - 3] - 16.0 * v[n - 4]
                + 3.0 * v[n - 5])
                / (12.0 * h);
            ComplexField { grid, values: out }
        }
    }
}

// ---------------------------------------------------------------------------
// Spectral helpers shared with the solvers.
// ---------------------------------------------------------------------------

/// Angular wavenumbers in FFT layout; the Nyquist mode is zeroed so that
/// derivatives of real fields stay real.
pub(crate) fn wavenumbers(grid: &GridSpec) -> Vec<f64> {
    debug_assert_eq!(grid.kind(), GridKind::PeriodicLine);
    let n = grid.n_points();
    let base = std::f64::consts::PI / grid.half_width();
    (0..n)
        .map(|m| {
            if m < n / 2 {
                base * m as f64
            } else if m == n / 2 {
                0.0
            } else {
                base * (m as f64 - n as f64)
            }
        })
        .collect()
}

/// k² in FFT layout, with the true Nyquist magnitude (k² is sign-free).
pub(crate) fn wavenumbers_sq(grid: &GridSpec) -> Vec<f64> {
    let n = grid.n_points();
    let base = std::f64::consts::PI / grid.half_width();
    (0..n)
        .map(|m| {
            let signed = if m <= n / 2 {
                m as f64
            } else {
                m as f64 - n as f64
            };
            (base * signed).powi(2)
        })
        .collect()
}

/// 2/3-rule mask: true where the mode is kept.
pub(crate) fn dealias_keep(grid: &GridSpec) -> Vec<bool> {
    let n = grid.n_points();
    let cutoff = n / 3;
    (0..n)
        .map(|m| {
            let mag = if m <= n / 2 { m } else { n - m };
            mag <= cutoff
        })
        .collect()
}

fn fft_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Unnormalized forward FFT in place.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    fft_pair(buf.len()).0.process(buf);
}

/// Unnormalized inverse FFT in place (divide by n afterwards).
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    fft_pair(buf.len()).1.process(buf);
}
