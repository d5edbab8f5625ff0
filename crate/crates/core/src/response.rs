//! Polarization-dependent linear susceptibilities of the phaseonium medium.
//!
//! Values are normalised to `2cζ/ω`, so a susceptibility is the dimensionless
//! `Q/ζ` times a component-dependent azimuthal factor. The native sign
//! convention ties loss to `Im Q < 0`; [`Parity::Paper`] flips the sign of the
//! whole susceptibility so that absorption reads as `Im χ > 0` and slow light
//! as a positive dispersion slope in `Δ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{initial_fields, FieldPair};
use crate::propagation::{propagate_analytic, MediumResponse};
use crate::{Error, Result, Scenario};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative field magnitude (in units of `ε · max A`) below which a component
/// susceptibility is flagged invalid.
pub const VALIDITY_FLOOR: f64 = 1e-12;

/// Default finite-difference step for [`dispersion_slope`], in units of Γ.
pub const DEFAULT_SLOPE_STEP: f64 = 1e-3;

/// Sign convention of emitted susceptibilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    #[default]
    Native,
    Paper,
}

impl Parity {
    pub fn apply(self, chi: Complex64) -> Complex64 {
        match self {
            Parity::Native => chi,
            Parity::Paper => -chi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Right,
    Left,
}

/// Susceptibilities of both circular components at one point.
///
/// Invalid components hold `NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusceptibilityPoint {
    pub chi_r: Complex64,
    pub chi_l: Complex64,
    pub valid_r: bool,
    pub valid_l: bool,
}

impl SusceptibilityPoint {
    fn new(chi_r: Option<Complex64>, chi_l: Option<Complex64>) -> Self {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        SusceptibilityPoint {
            chi_r: chi_r.unwrap_or(nan),
            chi_l: chi_l.unwrap_or(nan),
            valid_r: chi_r.is_some(),
            valid_l: chi_l.is_some(),
        }
    }

    pub fn with_parity(self, parity: Parity) -> Self {
        SusceptibilityPoint {
            chi_r: parity.apply(self.chi_r),
            chi_l: parity.apply(self.chi_l),
            ..self
        }
    }

    pub fn get(&self, component: Component) -> Option<Complex64> {
        match component {
            Component::Right => self.valid_r.then_some(self.chi_r),
            Component::Left => self.valid_l.then_some(self.chi_l),
        }
    }
}

/// Susceptibilities from the local field pair:
/// `χ_R = Q̂ (cos²θ + (Ω_L/Ω_R) sinθ cosθ)`, `χ_L = Q̂ ((Ω_R/Ω_L) sinθ cosθ + sin²θ)`.
///
/// A component whose field magnitude is below `field_floor` is flagged
/// invalid rather than divided by.
pub fn susceptibility_general(
    fields: &FieldPair,
    q_hat: Complex64,
    theta: f64,
    field_floor: f64,
) -> SusceptibilityPoint {
    let (s, c) = theta.sin_cos();
    let usable = |omega: Complex64| omega.norm() >= field_floor && omega.norm() > 0.0;
    let chi_r =
        usable(fields.omega_r).then(|| q_hat * (c * c + fields.omega_l / fields.omega_r * (s * c)));
    let chi_l =
        usable(fields.omega_l).then(|| q_hat * (fields.omega_r / fields.omega_l * (s * c) + s * s));
    SusceptibilityPoint::new(chi_r, chi_l)
}

/// Closed form for `θ = α = π/4`, `ψ = 0`:
/// `χ_{R,L} = Q̂ e^{−iQz} cos lφ / (e^{−iQz} cos lφ ± i sin lφ)`.
///
/// Multiplying through by `cos lφ` keeps the expression finite where
/// `tan lφ` diverges.
pub fn susceptibility_symmetric(
    phi: f64,
    l: i32,
    response: &MediumResponse,
    z: f64,
) -> SusceptibilityPoint {
    let (s, c) = (f64::from(l) * phi).sin_cos();
    let bright = response.transfer(z) * c;
    let q_hat = response.q_hat();
    let component = |den: Complex64| (den.norm() >= VALIDITY_FLOOR).then(|| q_hat * bright / den);
    SusceptibilityPoint::new(component(bright + I * s), component(bright - I * s))
}

/// Susceptibilities of `scenario` at probe detuning `delta`, transverse point
/// `(r, phi)` and depth `z`, via the general propagation solution.
pub fn susceptibility_at(
    scenario: &Scenario,
    delta: f64,
    r: f64,
    phi: f64,
    z: f64,
) -> Result<SusceptibilityPoint> {
    let response = scenario.response(delta)?;
    susceptibility_with(scenario, &response, r, phi, z)
}

fn susceptibility_with(
    scenario: &Scenario,
    response: &MediumResponse,
    r: f64,
    phi: f64,
    z: f64,
) -> Result<SusceptibilityPoint> {
    let fields0 = initial_fields(r, phi, &scenario.beam)?;
    let fields = propagate_analytic(&fields0, response.q, scenario.theta, z);
    Ok(susceptibility_general(
        &fields,
        response.q_hat(),
        scenario.theta,
        scenario.field_floor(),
    ))
}

/// Where in the beam and at what depth a response map is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSettings {
    /// Radius in units of `w`.
    pub r: f64,
    pub z: f64,
    pub parity: Parity,
}

impl Default for ResponseSettings {
    fn default() -> Self {
        ResponseSettings {
            r: 1.0,
            z: 0.0,
            parity: Parity::Native,
        }
    }
}

/// One row of an azimuth/detuning response map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseRow {
    pub phi: f64,
    pub delta: f64,
    pub chi: SusceptibilityPoint,
}

/// Susceptibility table over `phis × deltas`, φ-major.
pub fn response_map(
    phis: &[f64],
    deltas: &[f64],
    scenario: &Scenario,
    settings: &ResponseSettings,
) -> Result<Vec<ResponseRow>> {
    scenario.validate()?;
    let responses = deltas
        .iter()
        .map(|&d| scenario.response(d))
        .collect::<Result<Vec<_>>>()?;
    let rows: Result<Vec<Vec<ResponseRow>>> = phis
        .par_iter()
        .map(|&phi| {
            deltas
                .iter()
                .zip(&responses)
                .map(|(&delta, response)| {
                    let chi = susceptibility_with(scenario, response, settings.r, phi, settings.z)?;
                    Ok(ResponseRow {
                        phi,
                        delta,
                        chi: chi.with_parity(settings.parity),
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// Central difference `(Re χ(Δ=h) − Re χ(Δ=−h)) / 2h` at azimuth `phi`.
pub fn dispersion_slope(
    phi: f64,
    scenario: &Scenario,
    settings: &ResponseSettings,
    component: Component,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    let sample = |delta: f64| -> Result<f64> {
        let point = susceptibility_at(scenario, delta, settings.r, phi, settings.z)?
            .with_parity(settings.parity);
        point.get(component).map(|chi| chi.re).ok_or_else(|| {
            Error::Undefined(format!(
                "susceptibility invalid at φ = {phi}, Δ = {delta} (field below floor)"
            ))
        })
    };
    Ok((sample(h)? - sample(-h)?) / (2.0 * h))
}
