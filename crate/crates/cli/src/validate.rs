//! The `validate` subcommand: named checks with measured value and bound.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};
use std::fmt;

use anyhow::Result;
use tripod_vortex::propagation::q_factor;

use crate::measure::{self, QFn};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Above(f64),
    Below(f64),
    Within(f64, f64),
    Equals(f64),
}

impl Bound {
    pub fn admits(&self, x: f64) -> bool {
        match *self {
            Bound::AtMost(b) => x <= b,
            Bound::AtLeast(b) => x >= b,
            Bound::Above(b) => x > b,
            Bound::Below(b) => x < b,
            Bound::Within(lo, hi) => x >= lo && x <= hi,
            Bound::Equals(b) => x == b,
        }
    }
}

fn short(b: f64) -> String {
    if b != 0.0 && b.abs() < 1e-3 {
        format!("{b:e}")
    } else {
        format!("{b}")
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Bound::AtMost(b) => write!(f, "<= {b:e}"),
            Bound::AtLeast(b) => write!(f, ">= {}", short(b)),
            Bound::Above(b) => write!(f, "> {}", short(b)),
            Bound::Below(b) => write!(f, "< {}", short(b)),
            Bound::Within(lo, hi) => write!(f, "in [{lo}, {hi}]"),
            Bound::Equals(b) => write!(f, "== {b}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub group: &'static str,
    pub name: &'static str,
    pub measured: f64,
    pub bound: Bound,
    pub passed: bool,
    pub error: Option<String>,
}

impl Check {
    pub fn new(
        group: &'static str,
        name: &'static str,
        measured: Result<f64>,
        bound: Bound,
    ) -> Self {
        match measured {
            Ok(m) => Check {
                group,
                name,
                measured: m,
                bound,
                passed: bound.admits(m),
                error: None,
            },
            Err(e) => Check {
                group,
                name,
                measured: f64::NAN,
                bound,
                passed: false,
                error: Some(format!("{e:#}")),
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<6} {:<13} {:<40} {:>24}  bound",
            "status", "group", "check", "measured"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<6} {:<13} {:<40} {:>24.6e}  {}{}",
                if c.passed { "PASS" } else { "FAIL" },
                c.group,
                c.name,
                c.measured,
                c.bound,
                c.error
                    .as_deref()
                    .map(|e| format!("  ({e})"))
                    .unwrap_or_default()
            )?;
        }
        let failed = self.failures().count();
        write!(
            f,
            "{} checks, {} passed, {} failed",
            self.checks.len(),
            self.checks.len() - failed,
            failed
        )
    }
}

/// Knobs for the suite; `q` is the medium-response function under test.
#[derive(Clone, Copy)]
pub struct Suite {
    pub q: QFn,
    pub seed: u64,
}

impl Default for Suite {
    fn default() -> Self {
        Suite {
            q: q_factor,
            seed: 20_240_611,
        }
    }
}

fn count(x: Result<usize>) -> Result<f64> {
    x.map(|n| n as f64)
}

impl Suite {
    pub fn run(&self) -> Report {
        let seed = self.seed;
        let q = self.q;
        let grid = measure::square_grid(2.0, 41);
        let mut checks = vec![
            Check::new(
                "bloch",
                "rhs trace vanishes",
                measure::rhs_trace(2000, seed),
                Bound::AtMost(1e-12),
            ),
            Check::new(
                "bloch",
                "rhs is hermitian",
                measure::rhs_hermiticity(2000, seed + 1),
                Bound::AtMost(1e-12),
            ),
            Check::new(
                "bloch",
                "coherent part matches commutator",
                measure::commutator_gap(2000, seed + 2),
                Bound::AtMost(1e-12),
            ),
            Check::new(
                "bloch",
                "excited population decay",
                measure::excited_decay_error(),
                Bound::AtMost(1e-6),
            ),
            Check::new(
                "bloch",
                "ground coherence decay",
                measure::ground_coherence_decay_error(1e-2, 20.0),
                Bound::AtMost(1e-8),
            ),
            Check::new(
                "bloch",
                "weak-probe positivity",
                measure::weak_probe_positivity(4, 100.0, seed + 3),
                Bound::AtLeast(-1e-6),
            ),
            Check::new(
                "bloch",
                "quasi-steady coherences",
                measure::quasi_steady_error(1e-3, 1e-6),
                Bound::AtMost(1e-2),
            ),
            Check::new(
                "bloch",
                "probe halving ratio",
                measure::halving_ratio(1e-3, 1e-6),
                Bound::Within(3.0, 5.0),
            ),
            Check::new(
                "propagation",
                "Q at EIT resonance",
                measure::q_resonance_error(q),
                Bound::AtMost(1e-12),
            ),
            Check::new(
                "propagation",
                "Q lorentzian without control",
                measure::lorentzian_error(q),
                Bound::AtMost(1e-12),
            ),
            Check::new(
                "propagation",
                "RK4 oracle agreement",
                measure::numeric_oracle(8, 2000.0, 100.0, 0.01, seed + 4, q),
                Bound::AtMost(1e-8),
            ),
            Check::new(
                "propagation",
                "dark mode invariance",
                measure::dark_drift(q, 5.0),
                Bound::AtMost(1e-12),
            ),
            Check::new(
                "propagation",
                "bright mode decays",
                measure::bright_gain(q, 5.0),
                Bound::AtMost(1.0),
            ),
        ];
        let laws = measure::dark_bright_laws(1000, seed + 5);
        checks.push(Check::new(
            "propagation",
            "dark law (random draws)",
            laws.as_ref()
                .map(|v| v.0)
                .map_err(|e| anyhow::anyhow!("{e:#}")),
            Bound::AtMost(1e-12),
        ));
        checks.push(Check::new(
            "propagation",
            "bright law (random draws)",
            laws.map(|v| v.1),
            Bound::AtMost(1e-12),
        ));
        checks.push(Check::new(
            "propagation",
            "symmetric closed form",
            measure::symmetric_reduction(1000, seed + 6),
            Bound::AtMost(1e-12),
        ));

        checks.push(Check::new(
            "response",
            "EIT window at resonance",
            measure::eit_window(512),
            Bound::AtMost(5e-3),
        ));
        let peaks = measure::absorption_peaks(512);
        checks.push(Check::new(
            "response",
            "absorption peak count",
            peaks
                .as_ref()
                .map(|p| p.len() as f64)
                .map_err(|e| anyhow::anyhow!("{e:#}")),
            Bound::Equals(2.0),
        ));
        checks.push(Check::new(
            "response",
            "absorption peak offset from |Δ|=Γ",
            peaks.map(|p| p.iter().map(|d| (d.abs() - 1.0).abs()).fold(0.0, f64::max)),
            Bound::AtMost(0.2),
        ));
        checks.push(Check::new(
            "response",
            "azimuthal periodicity (z=0)",
            measure::periodicity_entrance(100_000, seed + 7),
            Bound::Below(1e-12),
        ));
        checks.push(Check::new(
            "response",
            "azimuthal periodicity (depth)",
            measure::periodicity_depth(100_000, seed + 8, 2000.0),
            Bound::Below(1e-12),
        ));
        checks.push(Check::new(
            "response",
            "mirror complementarity",
            measure::complementarity(100_000, seed + 9),
            Bound::Below(1e-12),
        ));
        let slopes = [0.0, FRAC_PI_4, 3.0 * FRAC_PI_4]
            .iter()
            .map(|&phi| measure::dispersion_slopes(phi).map(|(r, l)| r.min(l)))
            .collect::<Result<Vec<f64>>>()
            .map(|v| v.into_iter().fold(f64::INFINITY, f64::min));
        checks.push(Check::new(
            "response",
            "dispersion slope positive",
            slopes,
            Bound::Above(0.0),
        ));
        checks.push(Check::new(
            "response",
            "dispersion slope flat at π/2",
            measure::dispersion_slopes(FRAC_PI_2).map(|(r, l)| r.abs().max(l.abs())),
            Bound::Below(1e-8),
        ));
        checks.push(Check::new(
            "response",
            "loss sum rule",
            measure::sum_rule(10_000, seed + 10),
            Bound::AtMost(1e-12),
        ));

        checks.push(Check::new(
            "polarization",
            "stokes identity",
            measure::stokes_identity(100_000, seed + 11),
            Bound::AtMost(1e-10),
        ));
        checks.push(Check::new(
            "polarization",
            "petal count l=1",
            count(measure::petals(1, 700.0)),
            Bound::Equals(2.0),
        ));
        checks.push(Check::new(
            "polarization",
            "petal count l=2",
            count(measure::petals(2, 700.0)),
            Bound::Equals(4.0),
        ));
        checks.push(Check::new(
            "polarization",
            "entrance left-dominant",
            measure::entrance_kappa(&grid),
            Bound::Below(0.0),
        ));
        checks.push(Check::new(
            "polarization",
            "asymptotic κ θ=π/4 (|κ|)",
            measure::asymptotic_kappa(FRAC_PI_4, &grid).map(f64::abs),
            Bound::Below(0.02),
        ));
        checks.push(Check::new(
            "polarization",
            "asymptotic κ θ=π/8",
            measure::asymptotic_kappa(FRAC_PI_8, &grid),
            Bound::Below(-0.5),
        ));
        checks.push(Check::new(
            "polarization",
            "asymptotic κ θ=3π/8",
            measure::asymptotic_kappa(3.0 * FRAC_PI_8, &grid),
            Bound::Above(0.5),
        ));
        checks.push(Check::new(
            "polarization",
            "stationarity beyond decay",
            measure::stationarity(),
            Bound::Below(1e-6),
        ));
        let grid_coarse = measure::square_grid(2.0, 21);
        checks.push(Check::new(
            "polarization",
            "control slowdown factor",
            measure::sign_change_depths(&grid_coarse, 1.0).map(|(a, b)| b / a),
            Bound::AtLeast(10.0),
        ));
        Report { checks }
    }
}
