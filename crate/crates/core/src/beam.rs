//! Entrance field of the vector vortex: lowest-radial-index Laguerre–Gaussian
//! amplitudes with opposite helical phases on the two circular components.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameters of the input vector vortex.
///
/// Transverse positions handed to the functions in this module are already
/// normalised by the waist, so `w` does not enter any formula; it is kept so
/// that configurations document the physical length scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSpec {
    /// Topological charge; its sign is the vorticity of the right-handed
    /// component.
    pub l: i32,
    #[serde(default = "unit_waist")]
    pub w: f64,
    /// Overall Rabi amplitude scale, in units of Γ.
    pub epsilon: f64,
    /// Power split between left (`cos α`) and right (`sin α`) components.
    pub alpha: f64,
    /// Relative phase of the right-handed component at the entrance.
    pub psi: f64,
}

fn unit_waist() -> f64 {
    1.0
}

impl BeamSpec {
    pub fn new(l: i32, epsilon: f64, alpha: f64, psi: f64) -> Result<Self> {
        let spec = BeamSpec {
            l,
            w: 1.0,
            epsilon,
            alpha,
            psi,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0) || !self.w.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beam waist must be positive, got {}",
                self.w
            )));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "amplitude scale must be non-negative, got {}",
                self.epsilon
            )));
        }
        if !self.alpha.is_finite() || !self.psi.is_finite() {
            return Err(Error::InvalidParameter(
                "alpha and psi must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Radius (in units of `w`) where the radial amplitude peaks.
    pub fn ring_radius(&self) -> f64 {
        (f64::from(self.l.unsigned_abs()) / 2.0).sqrt()
    }

    /// Peak value of the radial amplitude, `max_r A(r)`.
    pub fn peak_amplitude(&self) -> f64 {
        let r = self.ring_radius();
        r.powi(self.l.unsigned_abs() as i32) * (-r * r).exp()
    }
}

/// Complex Rabi frequencies of the right- and left-circular components at one
/// transverse point, in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldPair {
    pub omega_r: Complex64,
    pub omega_l: Complex64,
}

impl FieldPair {
    pub fn new(omega_r: Complex64, omega_l: Complex64) -> Self {
        FieldPair { omega_r, omega_l }
    }

    pub fn is_finite(&self) -> bool {
        self.omega_r.is_finite() && self.omega_l.is_finite()
    }

    /// `|Ω_R|² + |Ω_L|²`.
    pub fn intensity(&self) -> f64 {
        self.omega_r.norm_sqr() + self.omega_l.norm_sqr()
    }

    /// Euclidean distance to `other`, treating the pair as a 2-vector.
    pub fn distance(&self, other: &FieldPair) -> f64 {
        ((self.omega_r - other.omega_r).norm_sqr() + (self.omega_l - other.omega_l).norm_sqr())
            .sqrt()
    }
}

/// Radial profile `A(r) = r^|l| exp(-r²)` with `r` in units of the waist.
pub fn lg_radial_amplitude(r: f64, spec: &BeamSpec) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "radial coordinate must be finite and non-negative, got {r}"
        )));
    }
    Ok(r.powi(spec.l.unsigned_abs() as i32) * (-r * r).exp())
}

/// Circular-component weights `(ε_L, ε_R) = (ε cos α, ε sin α e^{iψ})`.
pub fn weighting(spec: &BeamSpec) -> (Complex64, Complex64) {
    let eps_l = Complex64::from(spec.epsilon * spec.alpha.cos());
    let eps_r = Complex64::from_polar(spec.epsilon * spec.alpha.sin(), spec.psi);
    (eps_l, eps_r)
}

/// Field pair at the medium entrance, `Ω_R = ε_R A e^{ilφ}`, `Ω_L = ε_L A e^{-ilφ}`.
pub fn initial_fields(r: f64, phi: f64, spec: &BeamSpec) -> Result<FieldPair> {
    let amp = lg_radial_amplitude(r, spec)?;
    let (eps_l, eps_r) = weighting(spec);
    let winding = f64::from(spec.l) * phi;
    Ok(FieldPair {
        omega_r: eps_r * amp * Complex64::cis(winding),
        omega_l: eps_l * amp * Complex64::cis(-winding),
    })
}

/// Maps an arbitrary angle into `[0, 2π)`.
pub fn wrap_azimuth(phi: f64) -> f64 {
    let wrapped = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// One sample of a transverse grid, with both coordinate systems filled in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub phi: f64,
}

impl GridPoint {
    pub fn from_polar(r: f64, phi: f64) -> Self {
        GridPoint {
            x: r * phi.cos(),
            y: r * phi.sin(),
            r,
            phi,
        }
    }

    pub fn from_cartesian(x: f64, y: f64) -> Self {
        GridPoint {
            x,
            y,
            r: x.hypot(y),
            phi: wrap_azimuth(y.atan2(x)),
        }
    }
}

/// Transverse sampling of the beam cross-section (coordinates in units of `w`).
#[derive(Debug, Clone, PartialEq)]
pub enum TransverseGrid {
    Polar { r: Vec<f64>, phi: Vec<f64> },
    Cartesian { x: Vec<f64>, y: Vec<f64> },
}

fn check_increasing(name: &str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} list is empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "{name} list has non-finite entries"
        )));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!(
            "{name} list must be strictly increasing"
        )));
    }
    Ok(())
}

impl TransverseGrid {
    pub fn polar(r: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        check_increasing("r", &r)?;
        check_increasing("phi", &phi)?;
        if r[0] < 0.0 {
            return Err(Error::InvalidParameter("radii must be non-negative".into()));
        }
        if phi[0] < 0.0 || *phi.last().unwrap() >= TAU {
            return Err(Error::InvalidParameter(
                "azimuth samples must lie in [0, 2π)".into(),
            ));
        }
        Ok(TransverseGrid::Polar { r, phi })
    }

    pub fn cartesian(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_increasing("x", &x)?;
        check_increasing("y", &y)?;
        Ok(TransverseGrid::Cartesian { x, y })
    }

    pub fn len(&self) -> usize {
        match self {
            TransverseGrid::Polar { r, phi } => r.len() * phi.len(),
            TransverseGrid::Cartesian { x, y } => x.len() * y.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points in row order: outer coordinate (`r` or `x`) major.
    pub fn points(&self) -> Vec<GridPoint> {
        match self {
            TransverseGrid::Polar { r, phi } => r
                .iter()
                .flat_map(|&r| phi.iter().map(move |&p| GridPoint::from_polar(r, p)))
                .collect(),
            TransverseGrid::Cartesian { x, y } => x
                .iter()
                .flat_map(|&x| y.iter().map(move |&y| GridPoint::from_cartesian(x, y)))
                .collect(),
        }
    }
}
