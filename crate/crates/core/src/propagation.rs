//! Linear steady-state propagation of the field pair `(Ω_R, Ω_L)`.
//!
//! In the weak-probe regime with equal probe detunings the pair obeys
//! `∂_z Ω = −iKΩ` with `K = Q·P`, where `P` projects onto the bright
//! combination `(cos θ, sin θ)` set by the phaseonium. Hence the bright mode
//! `cos θ Ω_R + sin θ Ω_L` evolves as `e^{−iQz}` while the dark mode
//! `sin θ Ω_R − cos θ Ω_L` is untouched.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::beam::{lg_radial_amplitude, BeamSpec, FieldPair};
use crate::bloch::{resonance_denominator, AtomParams};
use crate::ode::{rk4_step, uniform_steps};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Complex medium response `Q` together with the strength scale `ζ` it
/// carries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumResponse {
    pub q: Complex64,
    pub zeta: f64,
}

impl MediumResponse {
    /// `Q/ζ`, the response in units of `2cζ/ω` used for susceptibilities.
    pub fn q_hat(&self) -> Complex64 {
        self.q / self.zeta
    }

    /// Bright-mode transfer factor `e^{−iQz}`.
    pub fn transfer(&self, z: f64) -> Complex64 {
        (-I * self.q * z).exp()
    }
}

/// `Q = ζ / (Δ − |Ω_C|²/(Δ − Δ_C + 2iγ_d) + i(Γ + γ_d))`.
///
/// Only `|Ω_C|²` enters, so the phase of the control field is irrelevant.
pub fn q_factor(
    delta: f64,
    delta_c: f64,
    omega_c: Complex64,
    atom: &AtomParams,
    zeta: f64,
) -> Result<Complex64> {
    if !(zeta > 0.0) || !zeta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "medium strength must be positive, got {zeta}"
        )));
    }
    let den = resonance_denominator(delta, delta_c, omega_c, atom)?;
    Ok(Complex64::from(zeta) / den)
}

/// Rank-one projector onto `(cos θ, sin θ)`.
pub fn bright_projector(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c * c, s * c, s * c, s * s)
}

/// Coupling matrix `K = Q·P` of the propagation equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrix {
    q: Complex64,
    theta: f64,
}

impl CouplingMatrix {
    pub fn new(q: Complex64, theta: f64) -> Self {
        CouplingMatrix { q, theta }
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn projector(&self) -> Matrix2<f64> {
        bright_projector(self.theta)
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        self.projector().map(|p| self.q * p)
    }

    /// Null vector `(sin θ, −cos θ)` of `K`.
    pub fn dark_vector(&self) -> Vector2<f64> {
        let (s, c) = self.theta.sin_cos();
        Vector2::new(s, -c)
    }

    /// Closed-form `exp(−iKz) = I + (e^{−iQz} − 1)P`.
    pub fn evolution(&self, z: f64) -> Matrix2<Complex64> {
        let factor = (-I * self.q * z).exp() - 1.0;
        Matrix2::identity() + self.projector().map(|p| factor * p)
    }
}

/// `K = Q [[cos²θ, sinθ cosθ], [sinθ cosθ, sin²θ]]`.
pub fn coupling_matrix(q: Complex64, theta: f64) -> CouplingMatrix {
    CouplingMatrix::new(q, theta)
}

/// Field pair at depth `z` from the entrance pair `fields0`.
pub fn propagate_analytic(fields0: &FieldPair, q: Complex64, theta: f64, z: f64) -> FieldPair {
    let (s, c) = theta.sin_cos();
    let transfer = (-I * q * z).exp();
    let mixing = (transfer - 1.0) * (s * c);
    FieldPair {
        omega_r: fields0.omega_r * (s * s + c * c * transfer) + fields0.omega_l * mixing,
        omega_l: fields0.omega_r * mixing + fields0.omega_l * (c * c + s * s * transfer),
    }
}

/// Closed form for `θ = α = π/4`, `ψ = 0`:
/// `Ω_{R,L} = Ω₀(r)(e^{−iQz} cos lφ ± i sin lφ)` with entrance amplitude
/// `Ω₀ = ε sin(π/4) A(r) = εA(r)/√2`.
pub fn propagate_symmetric(
    r: f64,
    phi: f64,
    spec: &BeamSpec,
    q: Complex64,
    z: f64,
) -> Result<FieldPair> {
    let amp = spec.epsilon * FRAC_1_SQRT_2 * lg_radial_amplitude(r, spec)?;
    let (s, c) = (f64::from(spec.l) * phi).sin_cos();
    let bright = (-I * q * z).exp() * c;
    Ok(FieldPair {
        omega_r: (bright + I * s) * amp,
        omega_l: (bright - I * s) * amp,
    })
}

/// RK4 integration of `∂_z Ω = −iKΩ` from 0 to `z` with steps no longer
/// than `dz`.
pub fn propagate_numeric(
    fields0: &FieldPair,
    k: &CouplingMatrix,
    z: f64,
    dz: f64,
) -> Result<FieldPair> {
    if !(dz > 0.0) || !dz.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {dz}"
        )));
    }
    let generator = k.matrix().map(|v| -I * v);
    let f = |y: &Vector2<Complex64>| generator * y;
    let (steps, h) = uniform_steps(z, dz);
    let mut y = Vector2::new(fields0.omega_r, fields0.omega_l);
    for _ in 0..steps {
        y = rk4_step(&f, &y, h);
    }
    Ok(FieldPair::new(y[0], y[1]))
}

/// Bright and dark mode amplitudes of a field pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Modes {
    pub bright: Complex64,
    pub dark: Complex64,
}

impl Modes {
    /// Inverse of [`dark_bright_decompose`].
    pub fn recompose(&self, theta: f64) -> FieldPair {
        let (s, c) = theta.sin_cos();
        FieldPair {
            omega_r: self.bright * c + self.dark * s,
            omega_l: self.bright * s - self.dark * c,
        }
    }
}

/// `bright = cos θ Ω_R + sin θ Ω_L`, `dark = sin θ Ω_R − cos θ Ω_L`.
pub fn dark_bright_decompose(fields: &FieldPair, theta: f64) -> Modes {
    let (s, c) = theta.sin_cos();
    Modes {
        bright: fields.omega_r * c + fields.omega_l * s,
        dark: fields.omega_r * s - fields.omega_l * c,
    }
}
