//! The coupled pair: parameters, phase-sector coupling, vector field and
//! its linearization.
//!
//! Each element is a FitzHugh–Nagumo oscillator in the excitable regime.
//! Element `i` receives the current `I(φ_j)` from its partner whenever the
//! partner's polar angle `φ_j` lies in the sector `[α, α + δ]`; the sector
//! edges are smoothed by a double sigmoid of steepness `k`. All angles are
//! radians internally.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::Matrix4 as NaMatrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent arguments are clamped to this magnitude before `exp`.
pub const EXP_CLAMP: f64 = 500.0;

/// 4×4 real matrix in the coordinate order `(x1, y1, x2, y2)`.
pub type Matrix4 = NaMatrix4<f64>;

/// Model constants and coupling angles.
///
/// `beta = alpha + delta` is derived and never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub a: f64,
    pub eps: f64,
    pub k: f64,
    pub g: f64,
    /// Sector start, radians in `[0, 2π)`.
    pub alpha: f64,
    /// Sector width, radians in `(0, 2π)`.
    pub delta: f64,
}

impl Default for Parameters {
    /// `a = -1.01, ε = 0.01, k = 50, g = 0.1` with the sector at α = 210°, δ = 50°.
    fn default() -> Self {
        Self {
            a: -1.01,
            eps: 0.01,
            k: 50.0,
            g: 0.1,
            alpha: 210f64.to_radians(),
            delta: 50f64.to_radians(),
        }
    }
}

impl Parameters {
    /// Validates and normalizes `alpha` into `[0, 2π)`.
    pub fn new(a: f64, eps: f64, k: f64, g: f64, alpha: f64, delta: f64) -> Result<Self> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if ![a, eps, k, g, alpha, delta].iter().all(|v| v.is_finite()) {
            return bad("all parameters must be finite");
        }
        if eps <= 0.0 {
            return bad("eps must be positive");
        }
        if k <= 0.0 {
            return bad("k must be positive");
        }
        if g < 0.0 {
            return bad("g must be non-negative");
        }
        if !(delta > 0.0 && delta < TAU) {
            return bad("delta must lie in (0, 2π)");
        }
        Ok(Self {
            a,
            eps,
            k,
            g,
            alpha: wrap_angle(alpha),
            delta,
        })
    }

    /// Default constants with the sector given in degrees.
    pub fn with_angles_deg(alpha_deg: f64, delta_deg: f64) -> Result<Self> {
        Self::default().with_sector_deg(alpha_deg, delta_deg)
    }

    /// Wraps `alpha_deg` before converting, so `α` and `α + 360°` give identical parameters.
    pub fn with_sector_deg(self, alpha_deg: f64, delta_deg: f64) -> Result<Self> {
        self.with_sector(alpha_deg.rem_euclid(360.0).to_radians(), delta_deg.to_radians())
    }

    pub fn with_sector(self, alpha: f64, delta: f64) -> Result<Self> {
        Self::new(self.a, self.eps, self.k, self.g, alpha, delta)
    }

    pub fn with_coupling(self, g: f64) -> Result<Self> {
        Self::new(self.a, self.eps, self.k, g, self.alpha, self.delta)
    }

    pub fn with_excitability(self, a: f64) -> Result<Self> {
        Self::new(a, self.eps, self.k, self.g, self.alpha, self.delta)
    }

    pub fn beta(&self) -> f64 {
        self.alpha + self.delta
    }

    pub fn alpha_deg(&self) -> f64 {
        self.alpha.to_degrees()
    }

    pub fn delta_deg(&self) -> f64 {
        self.delta.to_degrees()
    }

    /// y-coordinate of the uncoupled rest state, `a − a³/3`.
    pub fn rest_y(&self) -> f64 {
        self.a - self.a.powi(3) / 3.0
    }
}

/// Maps any finite angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU) + 0.0;
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Phase point of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl State {
    pub const fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Self {
        Self { x1, y1, x2, y2 }
    }

    /// Both elements at the same point, i.e. a point of the invariant plane.
    pub const fn symmetric(x: f64, y: f64) -> Self {
        Self::new(x, y, x, y)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Coordinate by index in `(x1, y1, x2, y2)` order.
    pub fn coord(&self, index: usize) -> f64 {
        self.to_array()[index]
    }

    pub fn distance(&self, other: &State) -> f64 {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn offset(&self, d: [f64; 4]) -> State {
        let s = self.to_array();
        State::from_array([s[0] + d[0], s[1] + d[1], s[2] + d[2], s[3] + d[3]])
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.y1, self.x2, self.y2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StateDerivative {
    pub dx1: f64,
    pub dy1: f64,
    pub dx2: f64,
    pub dy2: f64,
}

impl StateDerivative {
    pub fn to_array(self) -> [f64; 4] {
        [self.dx1, self.dy1, self.dx2, self.dy2]
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Exchange of the two elements.
pub fn swap(s: State) -> State {
    State::new(s.x2, s.y2, s.x1, s.y1)
}

/// Polar angle of `(x, y)` counterclockwise from the positive x-axis, in `[0, 2π)`.
pub fn phase_angle(x: f64, y: f64) -> Result<f64> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::PhaseUndefined);
    }
    Ok(wrap_angle(y.atan2(x)))
}

// One sigmoid window evaluated at an unwrapped angle.
// Returns (I, dI/dφ). The derivative is formed as k·g·(E1/D − E2/D)/D so that
// it stays finite when both exponentials are huge.
fn window(phi: f64, p: &Parameters) -> (f64, f64) {
    let e1 = (p.k * (p.alpha - phi)).clamp(-EXP_CLAMP, EXP_CLAMP).exp();
    let e2 = (p.k * (phi - p.beta())).clamp(-EXP_CLAMP, EXP_CLAMP).exp();
    let d = 1.0 + e1 + e2;
    let value = p.g / d;
    let slope = p.k * p.g * (e1 / d - e2 / d) / d;
    (value, slope)
}

// The dominant copy of the window among φ, φ + 2π, φ − 2π. The window is
// symmetric about the sector midpoint and decreasing in the distance from
// it, so the maximum is attained by the copy closest to the midpoint.
fn wrapped_window(phi: f64, p: &Parameters) -> (f64, f64) {
    let mid = p.alpha + 0.5 * p.delta;
    let best = [phi, phi + TAU, phi - TAU]
        .into_iter()
        .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
        .expect("three candidates");
    window(best, p)
}

/// Coupling current `g / (1 + e^{k(α−φ)} + e^{k(φ−β)})`, wrap-aware.
pub fn coupling_current(phi: f64, p: &Parameters) -> f64 {
    wrapped_window(phi, p).0
}

/// `dI/dφ` of [`coupling_current`].
pub fn coupling_slope(phi: f64, p: &Parameters) -> f64 {
    wrapped_window(phi, p).1
}

/// Partial derivatives `(∂I/∂x, ∂I/∂y)` of the current emitted by an element at `(x, y)`.
pub fn coupling_partials(x: f64, y: f64, p: &Parameters) -> Result<(f64, f64)> {
    let phi = phase_angle(x, y)?;
    let slope = coupling_slope(phi, p);
    let r2 = x * x + y * y;
    Ok((-slope * y / r2, slope * x / r2))
}

/// Current emitted by an element located at `(x, y)`.
pub fn emitted_current(x: f64, y: f64, p: &Parameters) -> Result<f64> {
    Ok(coupling_current(phase_angle(x, y)?, p))
}

/// Current and its partials `(I, ∂I/∂x, ∂I/∂y)` emitted by an element at `(x, y)`.
pub fn coupling_with_partials(x: f64, y: f64, p: &Parameters) -> Result<(f64, f64, f64)> {
    let phi = phase_angle(x, y)?;
    let (value, slope) = wrapped_window(phi, p);
    let r2 = x * x + y * y;
    Ok((value, -slope * y / r2, slope * x / r2))
}

/// Right-hand side of the coupled system.
pub fn vector_field(s: &State, p: &Parameters) -> Result<StateDerivative> {
    let i1 = emitted_current(s.x1, s.y1, p)?;
    let i2 = emitted_current(s.x2, s.y2, p)?;
    Ok(StateDerivative {
        dx1: (s.x1 - s.x1.powi(3) / 3.0 - s.y1 + i2) / p.eps,
        dy1: s.x1 - p.a,
        dx2: (s.x2 - s.x2.powi(3) / 3.0 - s.y2 + i1) / p.eps,
        dy2: s.x2 - p.a,
    })
}

/// Analytic Jacobian of [`vector_field`].
pub fn jacobian(s: &State, p: &Parameters) -> Result<Matrix4> {
    let (ix1, iy1) = coupling_partials(s.x1, s.y1, p)?;
    let (ix2, iy2) = coupling_partials(s.x2, s.y2, p)?;
    let e = p.eps;
    #[rustfmt::skip]
    let m = Matrix4::new(
        (1.0 - s.x1 * s.x1) / e, -1.0 / e, ix2 / e, iy2 / e,
        1.0, 0.0, 0.0, 0.0,
        ix1 / e, iy1 / e, (1.0 - s.x2 * s.x2) / e, -1.0 / e,
        0.0, 0.0, 1.0, 0.0,
    );
    Ok(m)
}

/// Trace of the Jacobian, `(2 − x1² − x2²)/ε`; the coupling contributes nothing.
pub fn jacobian_trace(s: &State, p: &Parameters) -> f64 {
    (2.0 - s.x1 * s.x1 - s.x2 * s.x2) / p.eps
}

/// Four eigenvalues sorted by descending real part, then descending imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(pub [Complex64; 4]);

impl Spectrum {
    pub fn new(mut values: [Complex64; 4]) -> Self {
        values.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
        Self(values)
    }

    /// Eigenvalues of an arbitrary real 4×4 matrix (Schur decomposition).
    pub fn of_matrix(m: &Matrix4) -> Self {
        let ev = m.complex_eigenvalues();
        Self::new([ev[0], ev[1], ev[2], ev[3]])
    }

    pub fn values(&self) -> &[Complex64; 4] {
        &self.0
    }

    pub fn max_real(&self) -> f64 {
        self.0[0].re
    }

    /// Largest distance between `self[i]` and its nearest unmatched partner in `other`.
    pub fn distance(&self, other: &Spectrum) -> f64 {
        let mut used = [false; 4];
        let mut worst: f64 = 0.0;
        for v in &self.0 {
            let (j, d) = other
                .0
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, w)| (j, (v - w).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("four candidates");
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }
}

// Roots of ε λ² − b λ + c = 0.
fn quadratic_roots(eps: f64, b: f64, c: f64) -> [Complex64; 2] {
    let disc = Complex64::new(b * b - 4.0 * eps * c, 0.0).sqrt();
    let b = Complex64::new(b, 0.0);
    [(b + disc) / (2.0 * eps), (b - disc) / (2.0 * eps)]
}

/// Closed-form eigenvalue pairs at a symmetric equilibrium `(a, y0, a, y0)`.
///
/// Returns `(in_phase, anti_phase)`: the in-phase pair solves
/// `ελ² − (1 − a² + I_x)λ + (1 − I_y) = 0`, the anti-phase pair solves
/// `ελ² − (1 − a² − I_x)λ + (1 + I_y) = 0`.
pub fn symmetric_pairs(y0: f64, p: &Parameters) -> Result<([Complex64; 2], [Complex64; 2])> {
    let (ix, iy) = coupling_partials(p.a, y0, p)?;
    let lin = 1.0 - p.a * p.a;
    Ok((
        quadratic_roots(p.eps, lin + ix, 1.0 - iy),
        quadratic_roots(p.eps, lin - ix, 1.0 + iy),
    ))
}

/// All four closed-form eigenvalues at the symmetric equilibrium `(a, y0, a, y0)`.
pub fn symmetric_spectrum(y0: f64, p: &Parameters) -> Result<Spectrum> {
    let (inp, anti) = symmetric_pairs(y0, p)?;
    Ok(Spectrum::new([inp[0], inp[1], anti[0], anti[1]]))
}
