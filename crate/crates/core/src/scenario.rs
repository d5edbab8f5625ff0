use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beam::BeamSpec;
use crate::bloch::{AtomParams, PhaseoniumState};
use crate::propagation::{q_factor, MediumResponse};
use crate::Result;

/// Physical configuration shared by the map, texture and averaging
/// operations: the input beam, the atoms, the control field, the ground-state
/// preparation and the medium strength.
///
/// The probe detuning `Δ = Δ₁ = Δ₂` is passed separately because most
/// operations sweep it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub beam: BeamSpec,
    pub atom: AtomParams,
    pub omega_c: Complex64,
    pub delta_c: f64,
    pub theta: f64,
    pub zeta: f64,
}

impl Scenario {
    pub fn phaseonium(&self) -> PhaseoniumState {
        PhaseoniumState::new(self.theta)
    }

    /// Medium response at probe detuning `delta`.
    pub fn response(&self, delta: f64) -> Result<MediumResponse> {
        let q = q_factor(delta, self.delta_c, self.omega_c, &self.atom, self.zeta)?;
        Ok(MediumResponse { q, zeta: self.zeta })
    }

    pub fn validate(&self) -> Result<()> {
        self.beam.validate()?;
        self.atom.validate()?;
        if !(self.zeta > 0.0) || !self.zeta.is_finite() {
            return Err(crate::Error::InvalidParameter(format!(
                "medium strength must be positive, got {}",
                self.zeta
            )));
        }
        if !self.omega_c.is_finite() || !self.delta_c.is_finite() || !self.theta.is_finite() {
            return Err(crate::Error::InvalidParameter(
                "control field, control detuning and theta must be finite".into(),
            ));
        }
        Ok(())
    }

    /// Field floor below which a component susceptibility is flagged invalid.
    pub fn field_floor(&self) -> f64 {
        crate::response::VALIDITY_FLOOR * self.beam.epsilon * self.beam.peak_amplitude()
    }
}
