//! Tripod atom: RWA Hamiltonian, optical Bloch equations with radiative decay
//! and ground-state dephasing, the phaseonium preparation and the first-order
//! steady-state probe coherences.
//!
//! States are indexed `|1⟩..|4⟩` in the physics and `0..=3` in code. `|1⟩`
//! and `|2⟩` are coupled to the excited state `|4⟩` by the right- and
//! left-circular probe components, `|3⟩` by the control field.
//!
//! The equations of motion are the explicit element-wise Bloch system, with
//! `ρ₄₄` eliminated through population conservation and the lower triangle
//! filled by Hermiticity. The coherence `ρ₁₂` carries only the `Ω_L` drive
//! terms, as in the reference model; a first-principles commutator would
//! couple it through `Ω_R ρ₄₂` instead (see the `commutator_agreement` test).

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ode::{rk4_step, uniform_steps};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radiative decay rates out of `|4⟩` and the ground-state dephasing rate,
/// all in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomParams {
    pub gamma_41: f64,
    pub gamma_42: f64,
    pub gamma_43: f64,
    pub gamma_d: f64,
}

impl AtomParams {
    pub fn new(gamma_41: f64, gamma_42: f64, gamma_43: f64, gamma_d: f64) -> Result<Self> {
        let atom = AtomParams {
            gamma_41,
            gamma_42,
            gamma_43,
            gamma_d,
        };
        atom.validate()?;
        Ok(atom)
    }

    /// Equal branching `γ₄ⱼ = 2/3` so that `Γ = 1`.
    pub fn symmetric(gamma_d: f64) -> Self {
        let g = 2.0 / 3.0;
        AtomParams {
            gamma_41: g,
            gamma_42: g,
            gamma_43: g,
            gamma_d,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.gamma_41, self.gamma_42, self.gamma_43, self.gamma_d];
        if rates.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "decay rates must be finite and non-negative, got {rates:?}"
            )));
        }
        Ok(())
    }

    /// `Γ = (γ₄₁ + γ₄₂ + γ₄₃) / 2`.
    pub fn gamma(&self) -> f64 {
        (self.gamma_41 + self.gamma_42 + self.gamma_43) / 2.0
    }
}

impl Default for AtomParams {
    fn default() -> Self {
        AtomParams::symmetric(1e-3)
    }
}

/// Rabi frequencies and detunings in the rotating frame, in units of Γ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriveParams {
    pub omega_r: Complex64,
    pub omega_l: Complex64,
    pub omega_c: Complex64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub delta_c: f64,
}

impl DriveParams {
    pub fn is_finite(&self) -> bool {
        self.omega_r.is_finite()
            && self.omega_l.is_finite()
            && self.omega_c.is_finite()
            && self.delta_1.is_finite()
            && self.delta_2.is_finite()
            && self.delta_c.is_finite()
    }
}

/// Ground-state preparation `cos θ |1⟩ + sin θ |2⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseoniumState {
    pub theta: f64,
}

impl PhaseoniumState {
    pub fn new(theta: f64) -> Self {
        PhaseoniumState { theta }
    }
}

/// A 4×4 density matrix in the bare-state basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix4<Complex64>);

/// Tolerance of the construction-time invariant checks.
pub const DENSITY_TOLERANCE: f64 = 1e-12;

impl DensityMatrix {
    /// Wraps `m` after checking Hermiticity, unit trace and real diagonal
    /// populations in `[0, 1]`.
    pub fn new(m: Matrix4<Complex64>) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check(DENSITY_TOLERANCE)?;
        Ok(rho)
    }

    pub fn from_matrix_unchecked(m: Matrix4<Complex64>) -> Self {
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix4<Complex64> {
        self.0
    }

    /// Element `ρ_ij` with zero-based indices.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Largest componentwise deviation from `ρ = ρ†`.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.0)
    }

    /// Smallest eigenvalue of the Hermitian part of `ρ`.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (self.0 + self.0.adjoint()) * Complex64::from(0.5);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// Checks the density-matrix invariants to `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        if self.0.iter().any(|z| !z.is_finite()) {
            return Err(Error::Domain(
                "density matrix has non-finite entries".into(),
            ));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::Domain(format!(
                "density matrix is not Hermitian (error {herm:e})"
            )));
        }
        let trace = self.trace();
        if (trace - Complex64::from(1.0)).norm() > tol {
            return Err(Error::Domain(format!("trace is {trace}, expected 1")));
        }
        for k in 0..4 {
            let p = self.0[(k, k)];
            if p.im.abs() > tol || p.re < -tol || p.re > 1.0 + tol {
                return Err(Error::Domain(format!("population ρ{0}{0} = {p}", k + 1)));
            }
        }
        Ok(())
    }
}

fn hermiticity_error(m: &Matrix4<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `ρ(0) = |ψ⟩⟨ψ|` with `|ψ⟩ = cos θ |1⟩ + sin θ |2⟩`.
pub fn initial_density(phaseonium: PhaseoniumState) -> DensityMatrix {
    let (s, c) = phaseonium.theta.sin_cos();
    let mut m = Matrix4::zeros();
    m[(0, 0)] = Complex64::from(c * c);
    m[(1, 1)] = Complex64::from(s * s);
    m[(0, 1)] = Complex64::from(s * c);
    m[(1, 0)] = Complex64::from(s * c);
    DensityMatrix(m)
}

/// Rotating-frame Hamiltonian (ħ = 1): diagonal `(-Δ₁, -Δ₂, -Δ_C, 0)` and
/// couplings `Ω_R, Ω_L, Ω_C` from `|1⟩, |2⟩, |3⟩` to `|4⟩`.
pub fn hamiltonian_rwa(drive: &DriveParams) -> Matrix4<Complex64> {
    let mut h = Matrix4::zeros();
    h[(0, 0)] = Complex64::from(-drive.delta_1);
    h[(1, 1)] = Complex64::from(-drive.delta_2);
    h[(2, 2)] = Complex64::from(-drive.delta_c);
    for (k, omega) in [drive.omega_r, drive.omega_l, drive.omega_c]
        .into_iter()
        .enumerate()
    {
        h[(k, 3)] = omega;
        h[(3, k)] = omega.conj();
    }
    h
}

/// Right-hand side `dρ/dt` of the tripod Bloch equations.
pub fn bloch_rhs(
    rho: &DensityMatrix,
    drive: &DriveParams,
    atom: &AtomParams,
) -> Matrix4<Complex64> {
    rhs(&rho.0, drive, atom)
}

fn rhs(r: &Matrix4<Complex64>, drive: &DriveParams, atom: &AtomParams) -> Matrix4<Complex64> {
    let (om_r, om_l, om_c) = (drive.omega_r, drive.omega_l, drive.omega_c);
    let (d1, d2, dc) = (drive.delta_1, drive.delta_2, drive.delta_c);
    let gd = atom.gamma_d;
    let big_gamma = atom.gamma();
    let optical_damping = big_gamma + gd;

    let p11 = r[(0, 0)].re;
    let p22 = r[(1, 1)].re;
    let p33 = r[(2, 2)].re;
    let p44 = 1.0 - p11 - p22 - p33;
    let r12 = r[(0, 1)];
    let r13 = r[(0, 2)];
    let r14 = r[(0, 3)];
    let r23 = r[(1, 2)];
    let r24 = r[(1, 3)];
    let r34 = r[(2, 3)];
    let r21 = r[(1, 0)];
    let r31 = r[(2, 0)];
    let r32 = r[(2, 1)];
    let r41 = r[(3, 0)];
    let r42 = r[(3, 1)];
    let r43 = r[(3, 2)];

    let dp11 = (I * (om_r.conj() * r14 - om_r * r41)).re
        + atom.gamma_41 * p44
        + gd * (p22 + p33 - 2.0 * p11);
    let dp22 = (I * (om_l.conj() * r24 - om_l * r42)).re
        + atom.gamma_42 * p44
        + gd * (p11 + p33 - 2.0 * p22);
    let dp33 = (I * (om_c.conj() * r34 - om_c * r43)).re
        + atom.gamma_43 * p44
        + gd * (p11 + p22 - 2.0 * p33);

    let d12 = I * (r12 * (d1 - d2) + om_l.conj() * r14 - om_l * r41) - 2.0 * gd * r12;
    let d13 = I * (r13 * (d1 - dc) + om_c.conj() * r14 - om_r * r43) - 2.0 * gd * r13;
    let d14 = I * (om_r * p11 + om_l * r12 + om_c * r13 + d1 * r14)
        - I * om_r * p44
        - optical_damping * r14;
    let d23 = I * (r23 * (d2 - dc) + om_c.conj() * r24 - om_l * r43) - 2.0 * gd * r23;
    let d24 = I * (om_r * r21 + om_l * p22 + om_c * r23 + d2 * r24)
        - I * om_l * p44
        - optical_damping * r24;
    let d34 = I * (om_r * r31 + om_l * r32 + om_c * p33 + dc * r34)
        - I * om_c * p44
        - optical_damping * r34;

    let mut out = Matrix4::zeros();
    out[(0, 0)] = Complex64::from(dp11);
    out[(1, 1)] = Complex64::from(dp22);
    out[(2, 2)] = Complex64::from(dp33);
    out[(3, 3)] = Complex64::from(-(dp11 + dp22 + dp33));
    for ((i, j), v) in [
        ((0, 1), d12),
        ((0, 2), d13),
        ((0, 3), d14),
        ((1, 2), d23),
        ((1, 3), d24),
        ((2, 3), d34),
    ] {
        out[(i, j)] = v;
        out[(j, i)] = v.conj();
    }
    out
}

/// Maximum tolerated `|Tr ρ − 1|` during integration.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Evolves `rho0` for `t_final` (in 1/Γ) with fixed-step RK4 of step at most
/// `dt`.
pub fn integrate_master(
    rho0: &DensityMatrix,
    drive: &DriveParams,
    atom: &AtomParams,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    integrate_master_with(rho0, drive, atom, t_final, dt, |_, _| {})
}

/// Like [`integrate_master`], calling `observe(t, ρ(t))` after every step.
pub fn integrate_master_with<F>(
    rho0: &DensityMatrix,
    drive: &DriveParams,
    atom: &AtomParams,
    t_final: f64,
    dt: f64,
    mut observe: F,
) -> Result<DensityMatrix>
where
    F: FnMut(f64, &DensityMatrix),
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {dt}"
        )));
    }
    if !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "final time must be non-negative, got {t_final}"
        )));
    }
    if !drive.is_finite() {
        return Err(Error::InvalidParameter(
            "drive parameters must be finite".into(),
        ));
    }
    atom.validate()?;

    let f = |m: &Matrix4<Complex64>| rhs(m, drive, atom);
    let (steps, h) = uniform_steps(t_final, dt);
    let mut state = rho0.0;
    for k in 1..=steps {
        state = rk4_step(&f, &state, h);
        let t = k as f64 * h;
        let drift = (state.trace() - Complex64::from(1.0)).norm();
        // Negated comparison so that NaN also trips the check.
        if !(drift <= TRACE_DRIFT_LIMIT) {
            return Err(Error::Integration {
                t,
                reason: format!("trace drift {drift:e} exceeds {TRACE_DRIFT_LIMIT:e}"),
            });
        }
        if state.iter().any(|z| !z.is_finite()) {
            return Err(Error::Integration {
                t,
                reason: "non-finite density matrix".into(),
            });
        }
        observe(t, &DensityMatrix(state));
    }
    Ok(DensityMatrix(state))
}

/// First-order steady-state probe coherences `ρ₁₄⁽¹⁾` and `ρ₂₄⁽¹⁾`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeCoherences {
    pub rho14: Complex64,
    pub rho24: Complex64,
}

impl ProbeCoherences {
    pub fn rho41(&self) -> Complex64 {
        self.rho14.conj()
    }

    pub fn rho42(&self) -> Complex64 {
        self.rho24.conj()
    }
}

/// Dressed resonant denominator `Δ − |Ω_C|²/(Δ − Δ_C + 2iγ_d) + i(Γ + γ_d)`
/// shared by the probe coherences and the medium response.
pub fn resonance_denominator(
    delta: f64,
    delta_c: f64,
    omega_c: Complex64,
    atom: &AtomParams,
) -> Result<Complex64> {
    let gd = atom.gamma_d;
    let two_photon = Complex64::new(delta - delta_c, 2.0 * gd);
    let control = omega_c.norm_sqr();
    let light_shift = if control == 0.0 {
        Complex64::from(0.0)
    } else {
        if two_photon.norm() == 0.0 {
            return Err(Error::Singular(format!(
                "two-photon denominator vanishes at Δ = Δ_C = {delta_c} with γ_d = 0"
            )));
        }
        control / two_photon
    };
    let den = Complex64::from(delta) - light_shift + I * (atom.gamma() + gd);
    if !(den.norm() > 1e-300) || !den.is_finite() {
        return Err(Error::Singular(format!(
            "resonant denominator {den} at Δ = {delta}"
        )));
    }
    Ok(den)
}

/// Steady-state probe coherences to first order in the probe fields, for the
/// zeroth-order phaseonium populations.
pub fn steady_coherences_first_order(
    drive: &DriveParams,
    atom: &AtomParams,
    phaseonium: PhaseoniumState,
) -> Result<ProbeCoherences> {
    let (s, c) = phaseonium.theta.sin_cos();
    let den_1 = resonance_denominator(drive.delta_1, drive.delta_c, drive.omega_c, atom)?;
    let den_2 = resonance_denominator(drive.delta_2, drive.delta_c, drive.omega_c, atom)?;
    let source_1 = drive.omega_r * (c * c) + drive.omega_l * (s * c);
    let source_2 = drive.omega_r * (s * c) + drive.omega_l * (s * s);
    Ok(ProbeCoherences {
        rho14: -source_1 / den_1,
        rho24: -source_2 / den_2,
    })
}

/// Integrated probe coherences after `t_final` compared with the first-order
/// steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiSteadyComparison {
    pub numeric: ProbeCoherences,
    pub first_order: ProbeCoherences,
    /// `‖(ρ₁₄, ρ₂₄)_num − (ρ₁₄, ρ₂₄)⁽¹⁾‖ / ‖(ρ₁₄, ρ₂₄)⁽¹⁾‖`.
    pub relative_error: f64,
}

/// Starts from the phaseonium state, integrates to `t_final` and compares
/// the probe coherences with [`steady_coherences_first_order`].
pub fn quasi_steady_comparison(
    drive: &DriveParams,
    atom: &AtomParams,
    phaseonium: PhaseoniumState,
    t_final: f64,
    dt: f64,
) -> Result<QuasiSteadyComparison> {
    let first_order = steady_coherences_first_order(drive, atom, phaseonium)?;
    let rho = integrate_master(&initial_density(phaseonium), drive, atom, t_final, dt)?;
    let numeric = ProbeCoherences {
        rho14: rho.get(0, 3),
        rho24: rho.get(1, 3),
    };
    let scale = first_order.rho14.norm().hypot(first_order.rho24.norm());
    if scale == 0.0 {
        return Err(Error::Undefined("first-order coherences vanish".into()));
    }
    let diff = (numeric.rho14 - first_order.rho14)
        .norm()
        .hypot((numeric.rho24 - first_order.rho24).norm());
    Ok(QuasiSteadyComparison {
        numeric,
        first_order,
        relative_error: diff / scale,
    })
}
