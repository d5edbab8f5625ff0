//! Measurements behind the validation suite and the acceptance run.
//!
//! Each function computes one observable against an independent oracle and
//! returns the raw number; judging it against a tolerance is left to the
//! caller. Random sampling is chunked with per-chunk seeds so results do not
//! depend on the thread count.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use anyhow::{ensure, Context, Result};
use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tripod_vortex::beam::{initial_fields, BeamSpec, FieldPair, TransverseGrid};
use tripod_vortex::bloch::{
    bloch_rhs, hamiltonian_rwa, initial_density, integrate_master, integrate_master_with,
    quasi_steady_comparison, AtomParams, DensityMatrix, DriveParams, PhaseoniumState,
};
use tripod_vortex::polarization::{
    average_ellipticity, fields_at_z, first_sign_change_depth, petal_count, polarization_state,
    stokes,
};
use tripod_vortex::propagation::{
    coupling_matrix, dark_bright_decompose, propagate_analytic, propagate_numeric,
    propagate_symmetric, MediumResponse,
};
use tripod_vortex::response::{
    dispersion_slope, susceptibility_at, susceptibility_general, susceptibility_symmetric,
    Component, Parity, ResponseSettings,
};
use tripod_vortex::{Complex64, Scenario};

/// Signature of the medium-response function, injectable for mutation tests.
pub type QFn = fn(f64, f64, Complex64, &AtomParams, f64) -> tripod_vortex::Result<Complex64>;

const CHUNK: usize = 4096;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Maximum of `f(rng)` over `samples` draws, chunked for determinism.
fn sample_max<F>(samples: usize, seed: u64, f: F) -> Result<f64>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let maxima = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed.wrapping_mul(0x9E37_79B9).wrapping_add(chunk as u64),
            );
            let n = CHUNK.min(samples - chunk * CHUNK);
            let mut worst = 0.0f64;
            for _ in 0..n {
                let v = f(&mut rng)?;
                // NaN must win so that broken samples surface.
                if v.is_nan() || v > worst {
                    worst = v;
                }
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(maxima.into_iter().fold(0.0, |a, b| {
        if b.is_nan() || a.is_nan() {
            f64::NAN
        } else {
            a.max(b)
        }
    }))
}

/// Fig. 2 conditions: l = 1, θ = α = π/4, ψ = 0, |Ω_C| = Γ, γ_d = 10⁻³Γ.
pub fn symmetric_scenario(l: i32) -> Scenario {
    Scenario {
        beam: BeamSpec::new(l, 1.0, FRAC_PI_4, 0.0).expect("valid beam"),
        atom: AtomParams::symmetric(1e-3),
        omega_c: c(1.0, 0.0),
        delta_c: 0.0,
        theta: FRAC_PI_4,
        zeta: 1.0,
    }
}

/// Fig. 4 conditions: α = π/8, ψ = 0, γ_d = 10⁻³Γ.
pub fn texture_scenario(theta: f64, omega_c: f64) -> Scenario {
    Scenario {
        beam: BeamSpec::new(1, 1.0, FRAC_PI_4 / 2.0, 0.0).expect("valid beam"),
        atom: AtomParams::symmetric(1e-3),
        omega_c: c(omega_c, 0.0),
        delta_c: 0.0,
        theta,
        zeta: 1.0,
    }
}

pub fn square_grid(half_width: f64, n: usize) -> TransverseGrid {
    let axis: Vec<f64> = (0..n)
        .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
        .collect();
    TransverseGrid::cartesian(axis.clone(), axis).expect("valid grid")
}

// ---------------------------------------------------------------- Bloch

fn random_density(rng: &mut ChaCha8Rng) -> Result<DensityMatrix> {
    let a = Matrix4::from_fn(|_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let g = a * a.adjoint();
    let g = g / g.trace();
    let mut m = (g + g.adjoint()) * c(0.5, 0.0);
    for k in 0..4 {
        m[(k, k)].im = 0.0;
    }
    Ok(DensityMatrix::new(m)?)
}

fn random_complex(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    c(
        rng.random_range(-scale..scale),
        rng.random_range(-scale..scale),
    )
}

fn random_drive(rng: &mut ChaCha8Rng, probe: f64) -> DriveParams {
    DriveParams {
        omega_r: random_complex(rng, probe),
        omega_l: random_complex(rng, probe),
        omega_c: random_complex(rng, 3.0),
        delta_1: rng.random_range(-3.0..3.0),
        delta_2: rng.random_range(-3.0..3.0),
        delta_c: rng.random_range(-3.0..3.0),
    }
}

fn random_atom(rng: &mut ChaCha8Rng) -> AtomParams {
    AtomParams {
        gamma_41: rng.random_range(0.0..1.0),
        gamma_42: rng.random_range(0.0..1.0),
        gamma_43: rng.random_range(0.0..1.0),
        gamma_d: rng.random_range(0.0..0.1),
    }
}

/// Largest `|Tr ρ̇|` over random states, drives and rates.
pub fn rhs_trace(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let rho = random_density(rng)?;
        let d = bloch_rhs(&rho, &random_drive(rng, 2.0), &random_atom(rng));
        Ok(d.trace().norm())
    })
}

/// Largest `‖ρ̇ − ρ̇†‖` over random states, drives and rates.
pub fn rhs_hermiticity(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let rho = random_density(rng)?;
        let d = bloch_rhs(&rho, &random_drive(rng, 2.0), &random_atom(rng));
        Ok((d - d.adjoint()).norm())
    })
}

/// Largest deviation of the lossless equations from `−i[H, ρ]` outside the
/// ground-state coherence pair, whose drive term follows a different form.
pub fn commutator_gap(samples: usize, seed: u64) -> Result<f64> {
    let lossless = AtomParams {
        gamma_41: 0.0,
        gamma_42: 0.0,
        gamma_43: 0.0,
        gamma_d: 0.0,
    };
    sample_max(samples, seed, |rng| {
        let rho = random_density(rng)?;
        let drive = random_drive(rng, 2.0);
        let d = bloch_rhs(&rho, &drive, &lossless);
        let h = hamiltonian_rwa(&drive);
        let m = *rho.matrix();
        let comm = (h * m - m * h) * c(0.0, -1.0);
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                if (i, j) == (0, 1) || (i, j) == (1, 0) {
                    continue;
                }
                worst = worst.max((d[(i, j)] - comm[(i, j)]).norm());
            }
        }
        Ok(worst)
    })
}

/// `|ρ₄₄(1/Γ) − e^{−2Γ·1}|` with drives off and `ρ₄₄(0) = 1`.
pub fn excited_decay_error() -> Result<f64> {
    let mut m = Matrix4::zeros();
    m[(3, 3)] = c(1.0, 0.0);
    let atom = AtomParams::symmetric(0.0);
    let out = integrate_master(
        &DensityMatrix::new(m)?,
        &DriveParams::default(),
        &atom,
        1.0,
        1e-3,
    )?;
    Ok((out.get(3, 3).re - (-2.0 * atom.gamma()).exp()).abs())
}

/// Largest `|ρ₁₂(t) − ρ₁₂(0) e^{−2γ_d t}|` along an undriven trajectory.
pub fn ground_coherence_decay_error(gamma_d: f64, t_final: f64) -> Result<f64> {
    let atom = AtomParams::symmetric(gamma_d);
    let rho0 = initial_density(PhaseoniumState::new(0.4));
    let start = rho0.get(0, 1);
    let mut worst = 0.0f64;
    integrate_master_with(
        &rho0,
        &DriveParams::default(),
        &atom,
        t_final,
        1e-3,
        |t, rho| {
            worst = worst.max((rho.get(0, 1) - start * (-2.0 * gamma_d * t).exp()).norm());
        },
    )?;
    Ok(worst)
}

/// Smallest eigenvalue seen along weak-probe trajectories up to `t_final`.
pub fn weak_probe_positivity(trajectories: usize, t_final: f64, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(DriveParams, f64)> = (0..trajectories)
        .map(|_| {
            (
                random_drive(&mut rng, 1e-2),
                rng.random_range(0.0..FRAC_PI_2),
            )
        })
        .collect();
    let minima = cases
        .par_iter()
        .map(|(drive, theta)| {
            let mut worst = f64::INFINITY;
            integrate_master_with(
                &initial_density(PhaseoniumState::new(*theta)),
                drive,
                &AtomParams::symmetric(1e-3),
                t_final,
                1e-3,
                |_, rho| worst = worst.min(rho.min_eigenvalue()),
            )?;
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(minima.into_iter().fold(f64::INFINITY, f64::min))
}

/// Probe conditions of the quasi-steady comparison: equal probes of size
/// `omega` detuned by Γ, resonant control of strength Γ, θ = π/4.
pub fn weak_probe_drive(omega: f64) -> DriveParams {
    DriveParams {
        omega_r: c(omega, 0.0),
        omega_l: c(omega, 0.0),
        omega_c: c(1.0, 0.0),
        delta_1: 1.0,
        delta_2: 1.0,
        delta_c: 0.0,
    }
}

/// Relative error of integrated coherences (t = 30/Γ, dt = 10⁻³/Γ) against
/// the first-order steady state.
pub fn quasi_steady_error(omega: f64, gamma_d: f64) -> Result<f64> {
    let cmp = quasi_steady_comparison(
        &weak_probe_drive(omega),
        &AtomParams::symmetric(gamma_d),
        PhaseoniumState::new(FRAC_PI_4),
        30.0,
        1e-3,
    )?;
    Ok(cmp.relative_error)
}

/// Residual at probe `omega` divided by the residual at `omega/2`.
pub fn halving_ratio(omega: f64, gamma_d: f64) -> Result<f64> {
    let (full, half) = rayon::join(
        || quasi_steady_error(omega, gamma_d),
        || quasi_steady_error(omega / 2.0, gamma_d),
    );
    Ok(full? / half?)
}

// ---------------------------------------------------------- propagation

/// Relative deviation of `Q` at Δ = Δ_C = 0 from the hand-reduced value
/// `1/(i(Γ + γ_d) + i|Ω_C|²/(2γ_d))`.
pub fn q_resonance_error(q: QFn) -> Result<f64> {
    let atom = AtomParams::symmetric(1e-3);
    let got = q(0.0, 0.0, c(1.0, 0.0), &atom, 1.0)?;
    let den = c(0.0, 1.0 + 1e-3) + c(0.0, 1.0 / (2.0 * 1e-3));
    let expected = c(1.0, 0.0) / den;
    Ok((got - expected).norm() / expected.norm())
}

/// Without control or dephasing `Q` is the Lorentzian `1/(Δ + iΓ)`.
pub fn lorentzian_error(q: QFn) -> Result<f64> {
    let atom = AtomParams::symmetric(0.0);
    let mut worst = 0.0f64;
    for k in 0..61 {
        let delta = -3.0 + 0.1 * k as f64;
        let got = q(delta, 0.0, c(0.0, 0.0), &atom, 1.0)?;
        let expected = c(1.0, 0.0) / c(delta, 1.0);
        worst = worst.max((got - expected).norm() / expected.norm());
    }
    Ok(worst)
}

struct PropagationDraw {
    fields0: FieldPair,
    q: Complex64,
    theta: f64,
}

fn physical_draw(rng: &mut ChaCha8Rng, q: QFn) -> Result<PropagationDraw> {
    let l = rng.random_range(1..=3) * if rng.random_bool(0.5) { 1 } else { -1 };
    let spec = BeamSpec::new(
        l,
        1.0,
        rng.random_range(0.05..1.5),
        rng.random_range(0.0..TAU),
    )?;
    let r = rng.random_range(0.2..2.0);
    let fields0 = initial_fields(r, rng.random_range(0.0..TAU), &spec)?;
    let omega_c = Complex64::from_polar(rng.random_range(1.0..5.0), rng.random_range(0.0..TAU));
    let delta = rng.random_range(-0.4..0.4);
    Ok(PropagationDraw {
        fields0,
        q: q(delta, 0.0, omega_c, &AtomParams::symmetric(1e-3), 1.0)?,
        theta: rng.random_range(0.05..1.5),
    })
}

/// Largest `‖Ω_RK4 − Ω_exact‖/‖Ω_exact‖` at checkpoints every `checkpoint`
/// units up to `z_max`, over `draws` physical parameter sets.
pub fn numeric_oracle(
    draws: usize,
    z_max: f64,
    checkpoint: f64,
    dz: f64,
    seed: u64,
    q: QFn,
) -> Result<f64> {
    ensure!(
        checkpoint > 0.0 && z_max >= checkpoint,
        "bad checkpoint spacing"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = (0..draws)
        .map(|_| physical_draw(&mut rng, q))
        .collect::<Result<Vec<_>>>()?;
    let n_checkpoints = (z_max / checkpoint).round() as usize;
    let errors = cases
        .par_iter()
        .map(|case| {
            let k = coupling_matrix(case.q, case.theta);
            let mut current = case.fields0;
            let mut worst = 0.0f64;
            for n in 1..=n_checkpoints {
                current = propagate_numeric(&current, &k, checkpoint, dz)?;
                let z = n as f64 * checkpoint;
                let exact = propagate_analytic(&case.fields0, case.q, case.theta, z);
                let err = current.distance(&exact) / exact.intensity().sqrt();
                worst = if err.is_nan() {
                    f64::NAN
                } else {
                    worst.max(err)
                };
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors
        .into_iter()
        .fold(0.0, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) }))
}

/// Largest relative drift of the dark amplitude and largest relative
/// departure of the bright amplitude from `e^{−iQz}` scaling, over random
/// `(θ, Q, inputs, z)`.
pub fn dark_bright_laws(draws: usize, seed: u64) -> Result<(f64, f64)> {
    let dark = sample_max(draws, seed, |rng| {
        let (f0, q, theta, z) = mode_draw(rng);
        let scale = f0.intensity().sqrt();
        let before = dark_bright_decompose(&f0, theta);
        let after = dark_bright_decompose(&propagate_analytic(&f0, q, theta, z), theta);
        Ok((after.dark - before.dark).norm() / scale)
    })?;
    let bright = sample_max(draws, seed ^ 0xB1, |rng| {
        let (f0, q, theta, z) = mode_draw(rng);
        let scale = f0.intensity().sqrt();
        let before = dark_bright_decompose(&f0, theta);
        let after = dark_bright_decompose(&propagate_analytic(&f0, q, theta, z), theta);
        let law = before.bright * (c(0.0, -1.0) * q * z).exp();
        Ok((after.bright - law).norm() / scale)
    })?;
    Ok((dark, bright))
}

fn mode_draw(rng: &mut ChaCha8Rng) -> (FieldPair, Complex64, f64, f64) {
    let f0 = FieldPair::new(random_complex(rng, 1.0), random_complex(rng, 1.0));
    let q = c(rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.0));
    (
        f0,
        q,
        rng.random_range(0.0..PI),
        rng.random_range(0.0..2000.0),
    )
}

/// Largest `|bright(z)/bright(0)|` for the physical medium response over a
/// detuning scan, at depth `z`. A passive medium keeps this at most 1.
pub fn bright_gain(q: QFn, z: f64) -> Result<f64> {
    let atom = AtomParams::symmetric(1e-3);
    let theta = 0.6;
    let f0 = FieldPair::new(c(0.3, 0.1), c(-0.2, 0.4));
    let b0 = dark_bright_decompose(&f0, theta).bright;
    let mut worst = 0.0f64;
    for k in 0..121 {
        let delta = -3.0 + 0.05 * k as f64;
        let qv = q(delta, 0.0, c(1.0, 0.0), &atom, 1.0)?;
        let b = dark_bright_decompose(&propagate_analytic(&f0, qv, theta, z), theta).bright;
        worst = worst.max(b.norm() / b0.norm());
    }
    Ok(worst)
}

/// Largest relative drift of the dark amplitude for the physical medium
/// response over a detuning scan.
pub fn dark_drift(q: QFn, z: f64) -> Result<f64> {
    let atom = AtomParams::symmetric(1e-3);
    let theta = 0.6;
    let f0 = FieldPair::new(c(0.3, 0.1), c(-0.2, 0.4));
    let d0 = dark_bright_decompose(&f0, theta).dark;
    let mut worst = 0.0f64;
    for k in 0..121 {
        let delta = -3.0 + 0.05 * k as f64;
        let qv = q(delta, 0.0, c(1.0, 0.0), &atom, 1.0)?;
        let d = dark_bright_decompose(&propagate_analytic(&f0, qv, theta, z), theta).dark;
        worst = worst.max((d - d0).norm() / d0.norm());
    }
    Ok(worst)
}

/// Largest distance between the general solution and the symmetric closed
/// form, relative to the entrance amplitude.
pub fn symmetric_reduction(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let l = rng.random_range(1..=3);
        let s = symmetric_scenario(l);
        let q = s.response(rng.random_range(-3.0..3.0))?.q;
        let (r, phi, z) = (
            rng.random_range(0.1..2.0),
            rng.random_range(0.0..TAU),
            rng.random_range(0.0..2000.0),
        );
        let f0 = initial_fields(r, phi, &s.beam)?;
        let general = propagate_analytic(&f0, q, s.theta, z);
        let closed = propagate_symmetric(r, phi, &s.beam, q, z)?;
        Ok(general.distance(&closed) / f0.intensity().sqrt())
    })
}

// ------------------------------------------------------------- response

/// Largest `|Im χ̂|` of either component at Δ = 0 over `n_phi` azimuths.
pub fn eit_window(n_phi: usize) -> Result<f64> {
    let s = symmetric_scenario(1);
    let mut worst = 0.0f64;
    for k in 0..n_phi {
        let phi = TAU * k as f64 / n_phi as f64;
        let chi = susceptibility_at(&s, 0.0, 1.0, phi, 0.0)?;
        ensure!(
            chi.valid_r && chi.valid_l,
            "invalid susceptibility at phi = {phi}"
        );
        worst = worst.max(chi.chi_r.im.abs()).max(chi.chi_l.im.abs());
    }
    Ok(worst)
}

/// Detunings of the local maxima of `|Im χ̂_R|` at φ = 0 on an `n`-point
/// grid over [−3Γ, 3Γ].
pub fn absorption_peaks(n: usize) -> Result<Vec<f64>> {
    let s = symmetric_scenario(1);
    let deltas: Vec<f64> = (0..n)
        .map(|k| -3.0 + 6.0 * k as f64 / (n - 1) as f64)
        .collect();
    let values = deltas
        .iter()
        .map(|&d| Ok(susceptibility_at(&s, d, 1.0, 0.0, 0.0)?.chi_r.im.abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((1..n - 1)
        .filter(|&k| values[k] > values[k - 1] && values[k] > values[k + 1])
        .map(|k| deltas[k])
        .collect())
}

fn chi_gap(
    a: &tripod_vortex::response::SusceptibilityPoint,
    b: &tripod_vortex::response::SusceptibilityPoint,
) -> f64 {
    if !(a.valid_r && a.valid_l && b.valid_r && b.valid_l) {
        return f64::NAN;
    }
    (a.chi_r - b.chi_r).norm().max((a.chi_l - b.chi_l).norm())
}

/// Largest `|χ̂(φ + π/|l|) − χ̂(φ)|` at the entrance plane (r = w, z = 0)
/// over random φ, Δ ∈ [−3Γ, 3Γ], `l` ∈ {1, 2, 3}.
pub fn periodicity_entrance(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let l = rng.random_range(1..=3);
        let s = symmetric_scenario(l);
        let delta = rng.random_range(-3.0..3.0);
        let response = s.response(delta)?;
        let phi = rng.random_range(0.0..TAU);
        let here = general_at(&s, &response, phi, 0.0)?;
        let shifted = general_at(&s, &response, phi + PI / f64::from(l), 0.0)?;
        Ok(chi_gap(&here, &shifted))
    })
}

/// As [`periodicity_entrance`] but inside the medium on resonance, using the
/// symmetric closed form at depths up to `z_max`.
pub fn periodicity_depth(samples: usize, seed: u64, z_max: f64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let l = rng.random_range(1..=3);
        let response = symmetric_scenario(l).response(0.0)?;
        let phi = rng.random_range(0.0..TAU);
        let z = rng.random_range(0.0..z_max);
        let here = susceptibility_symmetric(phi, l, &response, z);
        let shifted = susceptibility_symmetric(phi + PI / f64::from(l), l, &response, z);
        Ok(chi_gap(&here, &shifted))
    })
}

fn general_at(
    s: &Scenario,
    response: &MediumResponse,
    phi: f64,
    z: f64,
) -> Result<tripod_vortex::response::SusceptibilityPoint> {
    let f0 = initial_fields(1.0, phi, &s.beam)?;
    let f = propagate_analytic(&f0, response.q, s.theta, z);
    Ok(susceptibility_general(
        &f,
        response.q_hat(),
        s.theta,
        s.field_floor(),
    ))
}

/// Largest `|χ̂_L(φ) − χ̂_R(−φ)|` for symmetric inputs over random
/// (φ, Δ ∈ [−3Γ, 3Γ], z ∈ [0, 2000]).
pub fn complementarity(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let l = rng.random_range(1..=3);
        let response = symmetric_scenario(l).response(rng.random_range(-3.0..3.0))?;
        let phi = rng.random_range(0.0..TAU);
        let z = rng.random_range(0.0..2000.0);
        let here = susceptibility_symmetric(phi, l, &response, z);
        let mirrored = susceptibility_symmetric(-phi, l, &response, z);
        if !(here.valid_l && mirrored.valid_r) {
            return Ok(0.0);
        }
        Ok((here.chi_l - mirrored.chi_r).norm())
    })
}

/// Dispersion slopes at Δ = 0 (r = w, z = 0) for both components at `phi`,
/// in the convention where slow light has a positive slope.
pub fn dispersion_slopes(phi: f64) -> Result<(f64, f64)> {
    let s = symmetric_scenario(1);
    let settings = ResponseSettings {
        r: 1.0,
        z: 0.0,
        parity: Parity::Paper,
    };
    let h = tripod_vortex::response::DEFAULT_SLOPE_STEP;
    Ok((
        dispersion_slope(phi, &s, &settings, Component::Right, h)?,
        dispersion_slope(phi, &s, &settings, Component::Left, h)?,
    ))
}

/// Largest violation of `|Ω_R|²χ̂_R + |Ω_L|²χ̂_L = Q̂|bright|²`, relative to
/// `|Q̂|(|Ω_R|² + |Ω_L|²)`.
pub fn sum_rule(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let mut s = symmetric_scenario(rng.random_range(1..=3));
        s.theta = rng.random_range(0.05..1.5);
        s.beam = BeamSpec::new(
            s.beam.l,
            1.0,
            rng.random_range(0.05..1.5),
            rng.random_range(0.0..TAU),
        )?;
        let response = s.response(rng.random_range(-3.0..3.0))?;
        let f0 = initial_fields(
            rng.random_range(0.2..2.0),
            rng.random_range(0.0..TAU),
            &s.beam,
        )?;
        let f = propagate_analytic(&f0, response.q, s.theta, rng.random_range(0.0..500.0));
        let chi = susceptibility_general(&f, response.q_hat(), s.theta, s.field_floor());
        if !(chi.valid_r && chi.valid_l) {
            return Ok(0.0);
        }
        let lhs = chi.chi_r * f.omega_r.norm_sqr() + chi.chi_l * f.omega_l.norm_sqr();
        let rhs = response.q_hat() * dark_bright_decompose(&f, s.theta).bright.norm_sqr();
        Ok((lhs - rhs).norm() / (response.q_hat().norm() * f.intensity()))
    })
}

// --------------------------------------------------------- polarization

/// Largest relative Stokes defect `|S₀² − |S⃗|²|/S₀²` over random fields at
/// random depths.
pub fn stokes_identity(samples: usize, seed: u64) -> Result<f64> {
    sample_max(samples, seed, |rng| {
        let mut s = texture_scenario(rng.random_range(0.0..PI), rng.random_range(0.5..5.0));
        s.beam = BeamSpec::new(
            rng.random_range(1..=3),
            1.0,
            rng.random_range(0.0..FRAC_PI_2),
            rng.random_range(0.0..TAU),
        )?;
        let q = s.response(rng.random_range(-3.0..3.0))?.q;
        let f = fields_at_z(
            rng.random_range(0.0..2.5),
            rng.random_range(0.0..TAU),
            &s.beam,
            s.theta,
            q,
            rng.random_range(0.0..1e4),
        )?;
        Ok(stokes(f.omega_r, f.omega_l).polarization_defect())
    })
}

/// Azimuthal intensity maxima on the ring at ζz = `z`, resonant, θ = α = π/4.
pub fn petals(l: i32, z: f64) -> Result<usize> {
    let phis: Vec<f64> = (0..720).map(|k| TAU * k as f64 / 720.0).collect();
    Ok(petal_count(&phis, &symmetric_scenario(l), 0.0, z)?)
}

/// Depth beyond which `|e^{−iQz}| < bound` for `scenario` at `delta`.
pub fn decay_depth(scenario: &Scenario, delta: f64, bound: f64) -> Result<f64> {
    let q = scenario.response(delta)?.q;
    ensure!(q.im < 0.0, "medium is not lossy at delta = {delta}");
    Ok(bound.ln() / q.im)
}

/// Average ellipticity deep in the medium (`|e^{−iQz}| < 10⁻⁶`), resonant,
/// `|Ω_C| = Γ`, on `grid`.
pub fn asymptotic_kappa(theta: f64, grid: &TransverseGrid) -> Result<f64> {
    let s = texture_scenario(theta, 1.0);
    let z = 1.01 * decay_depth(&s, 0.0, 1e-6)?;
    Ok(average_ellipticity(grid, &s, z, 0.0)?)
}

/// Average ellipticity at the entrance for the α = π/8 beam.
pub fn entrance_kappa(grid: &TransverseGrid) -> Result<f64> {
    Ok(average_ellipticity(
        grid,
        &texture_scenario(FRAC_PI_4, 1.0),
        0.0,
        0.0,
    )?)
}

/// First sign-change depths of the average ellipticity at Δ = 0.1Γ,
/// θ = π/4, for `|Ω_C|` = Γ and 5Γ.
pub fn sign_change_depths(grid: &TransverseGrid, z_step: f64) -> Result<(f64, f64)> {
    let scan = |omega_c: f64| -> Result<f64> {
        let s = texture_scenario(FRAC_PI_4, omega_c);
        let z_max = decay_depth(&s, 0.1, 1e-6)?;
        first_sign_change_depth(grid, &s, 0.1, z_step, z_max)?
            .with_context(|| format!("no sign change before stationarity at |Omega_C| = {omega_c}"))
    };
    let (a, b) = rayon::join(|| scan(1.0), || scan(5.0));
    Ok((a?, b?))
}

/// Largest per-unit-depth change of κ beyond the decay depth on resonance,
/// over a few transverse points and mixing angles.
pub fn stationarity() -> Result<f64> {
    let mut worst = 0.0f64;
    for theta in [FRAC_PI_4 / 2.0, FRAC_PI_4, 3.0 * FRAC_PI_4 / 2.0] {
        let s = texture_scenario(theta, 1.0);
        let q = s.response(0.0)?.q;
        let z0 = decay_depth(&s, 0.0, 1e-6)?;
        for (r, phi) in [(0.4, 0.3), (0.7, 1.9), (1.2, 4.0)] {
            let kappa = |z: f64| -> Result<f64> {
                let f = fields_at_z(r, phi, &s.beam, theta, q, z)?;
                Ok(polarization_state(&stokes(f.omega_r, f.omega_l), 0.0)?.kappa)
            };
            let mut prev = kappa(z0)?;
            for k in 1..=100 {
                let next = kappa(z0 + k as f64)?;
                worst = worst.max((next - prev).abs());
                prev = next;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tripod_vortex::propagation::q_factor;

    #[test]
    fn sampling_is_independent_of_thread_count() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sum_rule(3 * CHUNK + 17, 5).unwrap())
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn nan_samples_propagate() {
        let v = sample_max(10, 1, |rng| {
            Ok(if rng.random_bool(0.5) { f64::NAN } else { 1.0 })
        })
        .unwrap();
        assert!(v.is_nan());
    }

    #[test]
    fn quick_measurements() {
        assert!(q_resonance_error(q_factor).unwrap() < 1e-12);
        assert!(lorentzian_error(q_factor).unwrap() < 1e-14);
        assert!(bright_gain(q_factor, 500.0).unwrap() <= 1.0);
        assert!(dark_drift(q_factor, 500.0).unwrap() < 1e-12);
        assert_eq!(petals(1, 700.0).unwrap(), 2);
        let peaks = absorption_peaks(512).unwrap();
        assert_eq!(peaks.len(), 2, "{peaks:?}");
    }
}
