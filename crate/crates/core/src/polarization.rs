//! Vector field at depth, Stokes parameters, ellipticity and polarization
//! textures across the beam cross-section.
//!
//! Field amplitudes are kept in Rabi-frequency units; the dipole/ħ scale
//! between `E` and `Ω` is a common factor that drops out of every Stokes
//! ratio.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::beam::{lg_radial_amplitude, weighting, BeamSpec, FieldPair, GridPoint, TransverseGrid};
use crate::{Error, Result, Scenario};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `|κ|` at or below this is classed linear.
pub const KAPPA_LIN: f64 = 0.05;
/// `|κ|` at or above `π/4 − KAPPA_CIRC` is classed circular.
pub const KAPPA_CIRC: f64 = 0.05;
/// Relative intensity (fraction of max `S₀`) below which a point is undefined.
pub const INTENSITY_FLOOR: f64 = 1e-2;
/// Largest excursion of `S₃/S₀` beyond ±1 that is silently clamped.
pub const ASIN_CLAMP_LIMIT: f64 = 1e-9;

/// Circular components at depth `z`:
///
/// `E_R = ε sinα e^{iψ} A e^{ilφ} (sin²θ + cos²θ e^{−iQz}) + ε cosα A e^{−ilφ} sinθ cosθ (e^{−iQz} − 1)`
/// `E_L = ε sinα e^{iψ} A e^{ilφ} sinθ cosθ (e^{−iQz} − 1) + ε cosα A e^{−ilφ} (cos²θ + sin²θ e^{−iQz})`
pub fn fields_at_z(
    r: f64,
    phi: f64,
    spec: &BeamSpec,
    theta: f64,
    q: Complex64,
    z: f64,
) -> Result<FieldPair> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!(
            "depth must be non-negative, got {z}"
        )));
    }
    let amp = lg_radial_amplitude(r, spec)?;
    let (eps_l, eps_r) = weighting(spec);
    let winding = f64::from(spec.l) * phi;
    let right = eps_r * amp * Complex64::cis(winding);
    let left = eps_l * amp * Complex64::cis(-winding);
    let (s, c) = theta.sin_cos();
    let e = (-I * q * z).exp();
    Ok(FieldPair {
        omega_r: right * (s * s + c * c * e) + left * (s * c) * (e - 1.0),
        omega_l: right * (s * c) * (e - 1.0) + left * (c * c + s * s * e),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    /// `|S₀² − (S₁² + S₂² + S₃²)| / S₀²`, zero for a dark point.
    pub fn polarization_defect(&self) -> f64 {
        let s0sq = self.s0 * self.s0;
        if s0sq == 0.0 {
            return 0.0;
        }
        (s0sq - (self.s1 * self.s1 + self.s2 * self.s2 + self.s3 * self.s3)).abs() / s0sq
    }
}

pub fn stokes(e_r: Complex64, e_l: Complex64) -> StokesVector {
    let cross = e_r.conj() * e_l;
    StokesVector {
        s0: e_r.norm_sqr() + e_l.norm_sqr(),
        s1: 2.0 * cross.re,
        s2: 2.0 * cross.im,
        s3: e_r.norm_sqr() - e_l.norm_sqr(),
    }
}

/// `S₃ > 0` is right-handed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolarizationClass {
    Linear,
    LeftCircular,
    RightCircular,
    Elliptical,
    Undefined,
}

impl PolarizationClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PolarizationClass::Linear => "linear",
            PolarizationClass::LeftCircular => "left-circular",
            PolarizationClass::RightCircular => "right-circular",
            PolarizationClass::Elliptical => "elliptical",
            PolarizationClass::Undefined => "undefined",
        }
    }

    fn from_kappa(kappa: f64) -> Self {
        if kappa.abs() <= KAPPA_LIN {
            PolarizationClass::Linear
        } else if kappa >= FRAC_PI_4 - KAPPA_CIRC {
            PolarizationClass::RightCircular
        } else if kappa <= -(FRAC_PI_4 - KAPPA_CIRC) {
            PolarizationClass::LeftCircular
        } else {
            PolarizationClass::Elliptical
        }
    }
}

impl std::fmt::Display for PolarizationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationState {
    /// Ellipticity angle in `[−π/4, π/4]`.
    pub kappa: f64,
    /// Orientation in `(−π/2, π/2]`.
    pub xi: f64,
    pub class: PolarizationClass,
}

impl PolarizationState {
    pub const UNDEFINED: PolarizationState = PolarizationState {
        kappa: 0.0,
        xi: 0.0,
        class: PolarizationClass::Undefined,
    };

    pub fn is_defined(&self) -> bool {
        self.class != PolarizationClass::Undefined
    }
}

/// `κ = ½ asin(S₃/S₀)`, `ξ = ½ atan2(S₂, S₁)`. Points with `S₀ < floor` get
/// the undefined sentinel.
pub fn polarization_state(s: &StokesVector, floor: f64) -> Result<PolarizationState> {
    if !(s.s0 >= floor) || s.s0 <= 0.0 {
        return Ok(PolarizationState::UNDEFINED);
    }
    let mut ratio = s.s3 / s.s0;
    if ratio.abs() > 1.0 {
        if ratio.abs() - 1.0 >= ASIN_CLAMP_LIMIT {
            return Err(Error::Domain(format!(
                "S3/S0 = {ratio} is outside [-1, 1] beyond rounding"
            )));
        }
        ratio = ratio.clamp(-1.0, 1.0);
    }
    let kappa = 0.5 * ratio.asin();
    let mut xi = 0.5 * s.s2.atan2(s.s1);
    // atan2 returns (−π, π]; halving maps −π/2 only for an exact −π input.
    if xi <= -std::f64::consts::FRAC_PI_2 {
        xi += std::f64::consts::PI;
    }
    Ok(PolarizationState {
        kappa,
        xi,
        class: PolarizationClass::from_kappa(kappa),
    })
}

/// One transverse sample of a texture map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureRow {
    pub point: GridPoint,
    pub stokes: StokesVector,
    /// `S₀` divided by the maximum `S₀` over the grid at this depth.
    pub intensity: f64,
    pub state: PolarizationState,
    /// Whether an ellipse glyph is drawn here (every k-th row).
    pub glyph: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextureTable {
    pub z: f64,
    pub rows: Vec<TextureRow>,
}

fn stokes_on(
    points: &[GridPoint],
    scenario: &Scenario,
    q: Complex64,
    z: f64,
) -> Result<Vec<StokesVector>> {
    points
        .par_iter()
        .map(|p| {
            let f = fields_at_z(p.r, p.phi, &scenario.beam, scenario.theta, q, z)?;
            Ok(stokes(f.omega_r, f.omega_l))
        })
        .collect()
}

fn max_s0(values: &[StokesVector]) -> f64 {
    values.iter().map(|s| s.s0).fold(0.0, f64::max)
}

/// Stokes and polarization tables for each depth in `z_list`, in grid order.
///
/// `decimation` selects every k-th row for glyphs; it must be at least 1.
pub fn texture_map(
    grid: &TransverseGrid,
    scenario: &Scenario,
    delta: f64,
    z_list: &[f64],
    decimation: usize,
) -> Result<Vec<TextureTable>> {
    scenario.validate()?;
    if decimation == 0 {
        return Err(Error::InvalidParameter(
            "decimation must be at least 1".into(),
        ));
    }
    let q = scenario.response(delta)?.q;
    let points = grid.points();
    z_list
        .iter()
        .map(|&z| {
            let values = stokes_on(&points, scenario, q, z)?;
            let peak = max_s0(&values);
            let floor = INTENSITY_FLOOR * peak;
            let rows = points
                .iter()
                .zip(&values)
                .enumerate()
                .map(|(i, (point, s))| {
                    Ok(TextureRow {
                        point: *point,
                        stokes: *s,
                        intensity: if peak > 0.0 { s.s0 / peak } else { 0.0 },
                        state: polarization_state(s, floor)?,
                        glyph: i % decimation == 0,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TextureTable { z, rows })
        })
        .collect()
}

fn mean_kappa(values: &[StokesVector]) -> Result<f64> {
    let floor = INTENSITY_FLOOR * max_s0(values);
    let mut sum = 0.0;
    let mut count = 0usize;
    for s in values {
        let state = polarization_state(s, floor)?;
        if state.is_defined() {
            sum += state.kappa;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Undefined(
            "no grid point above the intensity floor".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// Mean κ over grid points with `S₀ ≥ INTENSITY_FLOOR · max S₀`.
pub fn average_ellipticity(
    grid: &TransverseGrid,
    scenario: &Scenario,
    z: f64,
    delta: f64,
) -> Result<f64> {
    scenario.validate()?;
    let q = scenario.response(delta)?.q;
    mean_kappa(&stokes_on(&grid.points(), scenario, q, z)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub z: f64,
    pub delta: f64,
    pub avg_kappa: f64,
}

/// Average ellipticity over `deltas × z_list`, delta-major.
pub fn ellipticity_sweep(
    grid: &TransverseGrid,
    scenario: &Scenario,
    z_list: &[f64],
    deltas: &[f64],
) -> Result<Vec<SweepRow>> {
    scenario.validate()?;
    let points = grid.points();
    let rows: Result<Vec<Vec<SweepRow>>> = deltas
        .par_iter()
        .map(|&delta| {
            let q = scenario.response(delta)?.q;
            z_list
                .iter()
                .map(|&z| {
                    let values = points
                        .iter()
                        .map(|p| {
                            let f = fields_at_z(p.r, p.phi, &scenario.beam, scenario.theta, q, z)?;
                            Ok(stokes(f.omega_r, f.omega_l))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(SweepRow {
                        z,
                        delta,
                        avg_kappa: mean_kappa(&values)?,
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// First `z` of a `(z, κ)` series whose sign differs from the first nonzero
/// value.
pub fn first_sign_change(series: &[(f64, f64)]) -> Option<f64> {
    let reference = series.iter().map(|&(_, k)| k).find(|k| *k != 0.0)?.signum();
    series
        .iter()
        .find(|&&(_, k)| k != 0.0 && k.signum() != reference)
        .map(|&(z, _)| z)
}

/// Scans `z = 0, z_step, 2 z_step, …, ≤ z_max` and returns the first depth at
/// which the average ellipticity differs in sign from its entrance value.
pub fn first_sign_change_depth(
    grid: &TransverseGrid,
    scenario: &Scenario,
    delta: f64,
    z_step: f64,
    z_max: f64,
) -> Result<Option<f64>> {
    scenario.validate()?;
    if !(z_step > 0.0) || !(z_max >= 0.0) || !z_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "depth scan needs z_step > 0 and finite z_max >= 0, got {z_step}, {z_max}"
        )));
    }
    let q = scenario.response(delta)?.q;
    let points = grid.points();
    let mut reference: Option<f64> = None;
    let steps = (z_max / z_step).floor() as usize;
    for k in 0..=steps {
        let z = k as f64 * z_step;
        let kappa = mean_kappa(&stokes_on(&points, scenario, q, z)?)?;
        if kappa == 0.0 {
            continue;
        }
        match reference {
            None => reference = Some(kappa.signum()),
            Some(sign) if kappa.signum() != sign => return Ok(Some(z)),
            Some(_) => {}
        }
    }
    Ok(None)
}

/// Relative tolerance under which neighbouring smoothed samples count as equal.
const PLATEAU_TOLERANCE: f64 = 1e-9;

/// Number of azimuthal intensity maxima on the ring `r = sqrt(|l|/2)` where the
/// radial profile peaks.
///
/// `phis` should sample a full turn uniformly. The profile is smoothed with a
/// circular 3-sample window; runs of equal samples are merged before strict
/// maxima are counted, so a uniform ring yields 0.
pub fn petal_count(phis: &[f64], scenario: &Scenario, delta: f64, z: f64) -> Result<usize> {
    scenario.validate()?;
    let q = scenario.response(delta)?.q;
    let r = scenario.beam.ring_radius();
    let profile = phis
        .iter()
        .map(|&phi| {
            fields_at_z(r, phi, &scenario.beam, scenario.theta, q, z).map(|f| f.intensity())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(count_circular_maxima(&profile))
}

fn count_circular_maxima(profile: &[f64]) -> usize {
    let n = profile.len();
    if n < 3 {
        return 0;
    }
    let smoothed: Vec<f64> = (0..n)
        .map(|i| (profile[(i + n - 1) % n] + profile[i] + profile[(i + 1) % n]) / 3.0)
        .collect();
    let peak = smoothed.iter().cloned().fold(0.0, f64::max);
    let tol = PLATEAU_TOLERANCE * peak;
    let differs = |a: f64, b: f64| (a - b).abs() > tol;
    let Some(start) = (0..n).find(|&i| differs(smoothed[i], smoothed[(i + n - 1) % n])) else {
        return 0;
    };
    let mut levels: Vec<f64> = Vec::new();
    for k in 0..n {
        let v = smoothed[(start + k) % n];
        match levels.last() {
            Some(&last) if !differs(v, last) => {}
            _ => levels.push(v),
        }
    }
    let m = levels.len();
    if m < 2 {
        return 0;
    }
    (0..m)
        .filter(|&i| {
            let v = levels[i];
            v > levels[(i + m - 1) % m] && v > levels[(i + 1) % m]
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::initial_fields;
    use crate::bloch::AtomParams;
    use crate::propagation::propagate_analytic;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_8, PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scenario(theta: f64, alpha: f64, psi: f64, omega_c: f64) -> Scenario {
        Scenario {
            beam: BeamSpec::new(1, 1.0, alpha, psi).unwrap(),
            atom: AtomParams::symmetric(1e-3),
            omega_c: c(omega_c, 0.0),
            delta_c: 0.0,
            theta,
            zeta: 1.0,
        }
    }

    fn cartesian(n: usize, half_width: f64) -> TransverseGrid {
        let axis: Vec<f64> = (0..n)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
            .collect();
        TransverseGrid::cartesian(axis.clone(), axis).unwrap()
    }

    fn ring(n: usize) -> Vec<f64> {
        (0..n).map(|i| TAU * i as f64 / n as f64).collect()
    }

    #[test]
    fn stokes_examples() {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        assert_eq!(
            stokes(one, zero),
            StokesVector {
                s0: 1.0,
                s1: 0.0,
                s2: 0.0,
                s3: 1.0
            }
        );
        assert_eq!(
            stokes(one, one),
            StokesVector {
                s0: 2.0,
                s1: 2.0,
                s2: 0.0,
                s3: 0.0
            }
        );
        assert_eq!(
            stokes(zero, one),
            StokesVector {
                s0: 1.0,
                s1: 0.0,
                s2: 0.0,
                s3: -1.0
            }
        );
    }

    #[test]
    fn state_examples() {
        let right = polarization_state(
            &StokesVector {
                s0: 1.0,
                s1: 0.0,
                s2: 0.0,
                s3: 1.0,
            },
            0.0,
        )
        .unwrap();
        assert!((right.kappa - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(right.class, PolarizationClass::RightCircular);
        let lin = polarization_state(
            &StokesVector {
                s0: 2.0,
                s1: 2.0,
                s2: 0.0,
                s3: 0.0,
            },
            0.0,
        )
        .unwrap();
        assert_eq!(
            (lin.kappa, lin.xi, lin.class),
            (0.0, 0.0, PolarizationClass::Linear)
        );
        let left = polarization_state(
            &StokesVector {
                s0: 1.0,
                s1: 0.0,
                s2: 0.0,
                s3: -1.0,
            },
            0.0,
        )
        .unwrap();
        assert!((left.kappa + FRAC_PI_4).abs() < 1e-15);
        assert_eq!(left.class, PolarizationClass::LeftCircular);
    }

    #[test]
    fn state_thresholds_and_sentinels() {
        let dim = polarization_state(
            &StokesVector {
                s0: 0.5,
                s1: 0.5,
                s2: 0.0,
                s3: 0.0,
            },
            1.0,
        )
        .unwrap();
        assert_eq!(dim, PolarizationState::UNDEFINED);
        let dark = polarization_state(
            &StokesVector {
                s0: 0.0,
                s1: 0.0,
                s2: 0.0,
                s3: 0.0,
            },
            0.0,
        )
        .unwrap();
        assert_eq!(dark.class, PolarizationClass::Undefined);
        let ell = |kappa: f64| {
            let s = StokesVector {
                s0: 1.0,
                s1: (2.0 * kappa).cos(),
                s2: 0.0,
                s3: (2.0 * kappa).sin(),
            };
            polarization_state(&s, 0.0).unwrap().class
        };
        assert_eq!(ell(0.049), PolarizationClass::Linear);
        assert_eq!(ell(0.3), PolarizationClass::Elliptical);
        assert_eq!(ell(-0.3), PolarizationClass::Elliptical);
        assert_eq!(ell(FRAC_PI_4 - 0.049), PolarizationClass::RightCircular);
        assert_eq!(ell(-FRAC_PI_4 + 0.049), PolarizationClass::LeftCircular);
        // Orientation: S2 < 0, S1 = -1 sits at the branch cut.
        let cut = polarization_state(
            &StokesVector {
                s0: 1.0,
                s1: -1.0,
                s2: -0.0,
                s3: 0.0,
            },
            0.0,
        )
        .unwrap();
        assert!(cut.xi > -std::f64::consts::FRAC_PI_2 && cut.xi <= std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn asin_clamp_limits() {
        let slightly = StokesVector {
            s0: 1.0,
            s1: 0.0,
            s2: 0.0,
            s3: 1.0 + 1e-12,
        };
        assert!((polarization_state(&slightly, 0.0).unwrap().kappa - FRAC_PI_4).abs() < 1e-15);
        let broken = StokesVector {
            s0: 1.0,
            s1: 0.0,
            s2: 0.0,
            s3: 1.0 + 1e-6,
        };
        assert!(matches!(
            polarization_state(&broken, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn entrance_fields_and_domain() {
        let s = scenario(0.7, 0.3, 1.1, 1.0);
        let q = s.response(0.2).unwrap().q;
        for phi in [0.0, 1.0, 4.0] {
            let at0 = fields_at_z(0.8, phi, &s.beam, s.theta, q, 0.0).unwrap();
            let input = initial_fields(0.8, phi, &s.beam).unwrap();
            assert!(at0.distance(&input) < 1e-16);
        }
        assert!(fields_at_z(0.8, 0.0, &s.beam, s.theta, q, -1.0).is_err());
        assert!(fields_at_z(-0.8, 0.0, &s.beam, s.theta, q, 1.0).is_err());
    }

    #[test]
    fn entrance_ellipticity_is_left_dominant() {
        let s = scenario(FRAC_PI_4, FRAC_PI_8, 0.0, 1.0);
        let k = average_ellipticity(&cartesian(21, 2.0), &s, 0.0, 0.0).unwrap();
        // tan α weighting: κ = ½ asin(-cos 2α) everywhere.
        assert!((k - 0.5 * (-(2.0 * FRAC_PI_8).cos()).asin()).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_selection_by_theta() {
        let grid = cartesian(21, 2.0);
        for (theta, sign) in [(FRAC_PI_4, 0.0), (FRAC_PI_8, -1.0), (3.0 * FRAC_PI_8, 1.0)] {
            for (alpha, psi) in [(FRAC_PI_8, 0.0), (0.3, 2.0), (1.2, 4.0)] {
                let s = scenario(theta, alpha, psi, 1.0);
                let k = average_ellipticity(&grid, &s, 1e4, 0.0).unwrap();
                let expected = theta - FRAC_PI_4;
                assert!((k - expected).abs() < 1e-6, "θ={theta} α={alpha}: {k}");
                if sign == 0.0 {
                    assert!(k.abs() < 1e-6);
                } else {
                    assert_eq!(k.signum(), sign);
                }
            }
        }
        let tables = texture_map(
            &grid,
            &scenario(FRAC_PI_4, FRAC_PI_8, 0.0, 1.0),
            0.0,
            &[1e4],
            1,
        )
        .unwrap();
        assert!(tables[0].rows.iter().all(|r| matches!(
            r.state.class,
            PolarizationClass::Linear | PolarizationClass::Undefined
        )));
    }

    #[test]
    fn stationary_beyond_decay() {
        let s = scenario(FRAC_PI_8, FRAC_PI_8, 0.0, 1.0);
        let q = s.response(0.0).unwrap().q;
        let z0 = (1e-6f64).ln() / (q.im);
        assert!((-I * q * z0).exp().norm() <= 1e-6 * (1.0 + 1e-9));
        let mut prev: Option<f64> = None;
        for step in 0..50 {
            let z = z0 + step as f64;
            let f = fields_at_z(0.7, 0.9, &s.beam, s.theta, q, z).unwrap();
            let kappa = polarization_state(&stokes(f.omega_r, f.omega_l), 0.0)
                .unwrap()
                .kappa;
            if let Some(p) = prev {
                assert!((kappa - p).abs() < 1e-6);
            }
            prev = Some(kappa);
        }
    }

    #[test]
    fn texture_rows_follow_grid_order() {
        let grid = cartesian(5, 1.5);
        let s = scenario(FRAC_PI_4, FRAC_PI_8, 0.0, 1.0);
        let tables = texture_map(&grid, &s, 0.1, &[0.0, 50.0], 3).unwrap();
        assert_eq!(tables.len(), 2);
        let points = grid.points();
        for table in &tables {
            assert_eq!(table.rows.len(), points.len());
            let peak = table.rows.iter().map(|r| r.intensity).fold(0.0, f64::max);
            assert!((peak - 1.0).abs() < 1e-15);
            for (i, (row, p)) in table.rows.iter().zip(&points).enumerate() {
                assert_eq!(row.point, *p);
                assert_eq!(row.glyph, i % 3 == 0);
            }
        }
        assert!(texture_map(&grid, &s, 0.1, &[0.0], 0).is_err());
    }

    #[test]
    fn dark_grid_has_no_average() {
        // A grid confined to the beam axis sees only the l = 1 null.
        let grid = TransverseGrid::cartesian(vec![0.0], vec![0.0]).unwrap();
        let s = scenario(FRAC_PI_4, FRAC_PI_8, 0.0, 1.0);
        assert!(matches!(
            average_ellipticity(&grid, &s, 0.0, 0.0),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn petals() {
        let phis = ring(720);
        let mut s = scenario(FRAC_PI_4, FRAC_PI_4, 0.0, 1.0);
        assert_eq!(petal_count(&phis, &s, 0.0, 700.0).unwrap(), 2);
        assert_eq!(petal_count(&phis, &s, 0.0, 0.0).unwrap(), 0);
        s.beam.l = 2;
        assert_eq!(petal_count(&phis, &s, 0.0, 700.0).unwrap(), 4);
        s.beam.l = 3;
        assert_eq!(petal_count(&phis, &s, 0.0, 1e4).unwrap(), 6);
    }

    #[test]
    fn maxima_counting() {
        assert_eq!(count_circular_maxima(&[1.0; 10]), 0);
        let two: Vec<f64> = ring(64).iter().map(|p| p.cos().powi(2)).collect();
        assert_eq!(count_circular_maxima(&two), 2);
        assert_eq!(
            count_circular_maxima(&[0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            1
        );
    }

    #[test]
    fn sign_change_search() {
        assert_eq!(
            first_sign_change(&[(0.0, -1.0), (1.0, -0.5), (2.0, 0.1)]),
            Some(2.0)
        );
        assert_eq!(
            first_sign_change(&[(0.0, 0.0), (1.0, 0.5), (2.0, -0.1)]),
            Some(2.0)
        );
        assert_eq!(first_sign_change(&[(0.0, -1.0), (1.0, -0.5)]), None);
        assert_eq!(first_sign_change(&[]), None);
    }

    #[test]
    fn oscillation_slows_with_control_strength() {
        let grid = cartesian(15, 2.0);
        let zs: Vec<f64> = (0..=3000).map(|i| i as f64).collect();
        let first = |omega_c: f64| {
            let s = scenario(FRAC_PI_4, FRAC_PI_8, 0.0, omega_c);
            let rows = ellipticity_sweep(&grid, &s, &zs, &[0.1]).unwrap();
            let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.z, r.avg_kappa)).collect();
            first_sign_change(&series).expect("no sign change")
        };
        let (fast, slow) = (first(1.0), first(5.0));
        assert!(slow / fast >= 10.0, "{fast} -> {slow}");
        let scan = |omega_c: f64| {
            let s = scenario(FRAC_PI_4, FRAC_PI_8, 0.0, omega_c);
            first_sign_change_depth(&grid, &s, 0.1, 1.0, 3000.0).unwrap()
        };
        assert_eq!(scan(1.0), Some(fast));
        assert_eq!(scan(5.0), Some(slow));
        assert!(first_sign_change_depth(
            &grid,
            &scenario(FRAC_PI_4, FRAC_PI_8, 0.0, 1.0),
            0.1,
            0.0,
            10.0
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn eq28_matches_propagation(
            r in 0.0..2.5f64, phi in 0.0..TAU, l in -3i32..=3, alpha in 0.0..1.57f64, psi in 0.0..TAU,
            theta in 0.0..PI, qr in -1.0..1.0f64, qi in -0.5..0.0f64, z in 0.0..100.0f64,
        ) {
            let spec = BeamSpec::new(l, 1.0, alpha, psi).unwrap();
            let q = c(qr, qi);
            let direct = fields_at_z(r, phi, &spec, theta, q, z).unwrap();
            let chained = propagate_analytic(&initial_fields(r, phi, &spec).unwrap(), q, theta, z);
            prop_assert!(direct.distance(&chained) < 1e-14);
        }

        #[test]
        fn fully_polarized(er in (-10.0..10.0f64, -10.0..10.0f64), el in (-10.0..10.0f64, -10.0..10.0f64)) {
            let s = stokes(c(er.0, er.1), c(el.0, el.1));
            prop_assert!(s.s0 >= 0.0 && s.s3.abs() <= s.s0);
            prop_assert!(s.polarization_defect() < 1e-10);
            let state = polarization_state(&s, 0.0).unwrap();
            prop_assert!(state.kappa.abs() <= FRAC_PI_4);
            prop_assert!(state.xi > -std::f64::consts::FRAC_PI_2 && state.xi <= std::f64::consts::FRAC_PI_2);
        }

        #[test]
        fn asymptotic_ratio(phi in 0.0..TAU, alpha in 0.1..1.4f64, psi in 0.0..TAU, theta in 0.1..1.4f64) {
            let spec = BeamSpec::new(1, 1.0, alpha, psi).unwrap();
            let q = c(-0.05, -0.01);
            let f = fields_at_z(0.7, phi, &spec, theta, q, 5000.0).unwrap();
            prop_assume!(f.omega_l.norm() > 1e-6);
            prop_assert!((f.omega_r / f.omega_l + theta.tan()).norm() < 1e-9);
        }
    }
}
