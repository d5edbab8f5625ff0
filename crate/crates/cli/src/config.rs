//! Scenario configuration: JSON schema, named presets and `--set` overrides.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, TAU};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use tripod_vortex::beam::{BeamSpec, TransverseGrid};
use tripod_vortex::bloch::AtomParams;
use tripod_vortex::response::Parity;
use tripod_vortex::{Complex64, Scenario};

/// A list of values, either explicit or evenly spaced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Linspace(Linspace),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    /// Whether `stop` itself is included.
    #[serde(default = "yes")]
    pub endpoint: bool,
}

fn yes() -> bool {
    true
}

impl Axis {
    pub fn linspace(start: f64, stop: f64, count: usize, endpoint: bool) -> Self {
        Axis::Linspace(Linspace {
            start,
            stop,
            count,
            endpoint,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Linspace(l) => {
                if l.count == 0 {
                    return Vec::new();
                }
                if l.count == 1 {
                    return vec![l.start];
                }
                let intervals = if l.endpoint { l.count - 1 } else { l.count };
                let step = (l.stop - l.start) / intervals as f64;
                (0..l.count).map(|i| l.start + i as f64 * step).collect()
            }
        }
    }

    fn check(&self, name: &str) -> Result<Vec<f64>> {
        let values = self.values();
        ensure!(!values.is_empty(), "{name} is empty");
        ensure!(
            values.iter().all(|v| v.is_finite()),
            "{name} has non-finite entries"
        );
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GridSpec {
    Cartesian { x: Axis, y: Axis },
    Polar { r: Axis, phi: Axis },
}

impl GridSpec {
    pub fn square(half_width: f64, count: usize) -> Self {
        let axis = Axis::linspace(-half_width, half_width, count, true);
        GridSpec::Cartesian {
            x: axis.clone(),
            y: axis,
        }
    }

    pub fn build(&self) -> Result<TransverseGrid> {
        let grid = match self {
            GridSpec::Cartesian { x, y } => TransverseGrid::cartesian(x.values(), y.values()),
            GridSpec::Polar { r, phi } => TransverseGrid::polar(r.values(), phi.values()),
        };
        Ok(grid?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Probe detuning `Δ = Δ₁ = Δ₂` used by propagation and texture runs.
    pub delta: f64,
    pub delta_c: f64,
    /// Control Rabi frequency as `[re, im]`.
    pub omega_c: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub z: Axis,
    pub delta: Axis,
    /// Falls back to the main grid when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    /// File-name prefix; the config name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: PathBuf::from("out"),
            prefix: None,
        }
    }
}

fn default_decimation() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub beam: BeamSpec,
    pub atom: AtomParams,
    pub drive: DriveConfig,
    /// Phaseonium mixing angles; each one is a separate run.
    pub thetas: Vec<f64>,
    pub zeta: f64,
    /// Radius (units of `w`) and depth of the response map.
    pub r_eval: f64,
    pub z_eval: f64,
    pub phi_list: Axis,
    pub delta_list: Axis,
    pub grid: GridSpec,
    pub z_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub sign_parity: Parity,
    #[serde(default = "default_decimation")]
    pub decimation: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn scenario(&self, theta: f64) -> Scenario {
        Scenario {
            beam: self.beam,
            atom: self.atom,
            omega_c: self.drive.omega_c,
            delta_c: self.drive.delta_c,
            theta,
            zeta: self.zeta,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(!self.thetas.is_empty(), "thetas is empty");
        for &theta in &self.thetas {
            self.scenario(theta)
                .validate()
                .with_context(|| format!("scenario at theta = {theta}"))?;
        }
        ensure!(self.drive.delta.is_finite(), "drive.delta must be finite");
        ensure!(
            self.r_eval.is_finite() && self.r_eval >= 0.0,
            "r_eval must be finite and non-negative"
        );
        ensure!(
            self.z_eval.is_finite() && self.z_eval >= 0.0,
            "z_eval must be finite and non-negative"
        );
        self.phi_list.check("phi_list")?;
        self.delta_list.check("delta_list")?;
        self.grid.build().context("grid")?;
        ensure!(!self.z_list.is_empty(), "z_list is empty");
        ensure!(
            self.z_list.iter().all(|z| z.is_finite() && *z >= 0.0),
            "z_list entries must be finite and non-negative"
        );
        if let Some(sweep) = &self.sweep {
            let zs = sweep.z.check("sweep.z")?;
            ensure!(zs.iter().all(|z| *z >= 0.0), "sweep.z must be non-negative");
            sweep.delta.check("sweep.delta")?;
            if let Some(grid) = &sweep.grid {
                grid.build().context("sweep.grid")?;
            }
        }
        ensure!(self.decimation >= 1, "decimation must be at least 1");
        ensure!(!self.name.is_empty(), "name is empty");
        Ok(())
    }

    pub fn prefix(&self) -> &str {
        self.output.prefix.as_deref().unwrap_or(&self.name)
    }

    /// First 16 hex digits of the SHA-256 of the config with the output
    /// location blanked, so that relocating a run does not change it.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputSpec::default();
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        hex::encode(digest)[..16].to_string()
    }
}

pub const PRESET_NAMES: [&str; 5] = ["fig2", "fig3a", "fig3b", "fig4b", "fig5"];

pub fn preset_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig2" => "absorption/dispersion maps at z=0, r=w: 512 phi x 512 delta in [-3, 3]",
        "fig3a" => "intensity evolution on resonance (delta=0), theta=alpha=pi/4",
        "fig3b" => "intensity evolution slightly detuned (delta=0.1), theta=alpha=pi/4",
        "fig4b" => "polarization textures and ellipticity sweep, alpha=pi/8, |Omega_C|=1",
        "fig5" => "as fig4b with |Omega_C|=5 and delta=0.1",
        _ => return None,
    })
}

fn base(name: &str) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        beam: BeamSpec {
            l: 1,
            w: 1.0,
            epsilon: 1.0,
            alpha: FRAC_PI_4,
            psi: 0.0,
        },
        atom: AtomParams::symmetric(1e-3),
        drive: DriveConfig {
            delta: 0.0,
            delta_c: 0.0,
            omega_c: Complex64::new(1.0, 0.0),
        },
        thetas: vec![FRAC_PI_4],
        zeta: 1.0,
        r_eval: 1.0,
        z_eval: 0.0,
        phi_list: Axis::linspace(0.0, TAU, 512, false),
        delta_list: Axis::linspace(-3.0, 3.0, 512, true),
        grid: GridSpec::square(2.0, 161),
        z_list: vec![0.0],
        sweep: None,
        sign_parity: Parity::Native,
        decimation: default_decimation(),
        output: OutputSpec::default(),
    }
}

fn polarization_preset(name: &str, omega_c: f64, delta: f64) -> ScenarioConfig {
    let mut cfg = base(name);
    cfg.beam.alpha = FRAC_PI_8;
    cfg.drive.delta = delta;
    cfg.drive.omega_c = Complex64::new(omega_c, 0.0);
    cfg.thetas = vec![FRAC_PI_4, FRAC_PI_8, 3.0 * FRAC_PI_8];
    cfg.grid = GridSpec::square(2.0, 81);
    cfg.z_list = vec![0.0, 100.0, 300.0, 700.0, 2000.0];
    cfg.decimation = 6;
    cfg.sweep = Some(SweepSpec {
        z: Axis::linspace(0.0, 2000.0, 201, true),
        delta: Axis::linspace(-0.4, 0.4, 41, true),
        grid: Some(GridSpec::square(2.0, 41)),
    });
    cfg
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let cfg = match name {
        "fig2" => base(name),
        "fig3a" | "fig3b" => {
            let mut cfg = base(name);
            cfg.drive.delta = if name == "fig3a" { 0.0 } else { 0.1 };
            cfg.z_list = vec![0.0, 100.0, 300.0, 700.0, 2000.0];
            cfg
        }
        "fig4b" => polarization_preset(name, 1.0, 0.0),
        "fig5" => polarization_preset(name, 5.0, 0.1),
        other => bail!(
            "unknown preset {other:?}; available: {}",
            PRESET_NAMES.join(", ")
        ),
    };
    Ok(cfg)
}

/// Writes `value` at the dotted `path`, creating intermediate objects.
fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    ensure!(keys.iter().all(|k| !k.is_empty()), "malformed key {path:?}");
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        node = match node {
            Value::Object(map) => map
                .entry(key.to_string())
                .or_insert_with(|| Value::Object(Default::default())),
            Value::Array(items) => {
                let idx: usize = key
                    .parse()
                    .with_context(|| format!("{path}: {key:?} is not an array index"))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .with_context(|| format!("{path}: index {idx} out of range ({len})"))?
            }
            _ => bail!("{path}: {key:?} is not an object"),
        };
    }
    let last = keys[keys.len() - 1];
    match node {
        Value::Object(map) => {
            map.insert(last.to_string(), value);
        }
        Value::Array(items) => {
            let idx: usize = last
                .parse()
                .with_context(|| format!("{path}: {last:?} is not an array index"))?;
            let len = items.len();
            *items
                .get_mut(idx)
                .with_context(|| format!("{path}: index {idx} out of range ({len})"))? = value;
        }
        _ => bail!("{path}: parent is not an object"),
    }
    Ok(())
}

/// Applies one `key=value` override. The value is parsed as JSON, falling back
/// to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("override {assignment:?} is not key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(root, key.trim(), value)
}

/// Where a config comes from and what to change on top of it.
#[derive(Debug, Clone, Default)]
pub struct ConfigSource {
    pub preset: Option<String>,
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub sign_parity: Option<Parity>,
    pub out: Option<PathBuf>,
}

pub fn load_file(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl ConfigSource {
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let mut value = match (&self.preset, &self.config) {
            (Some(_), Some(_)) => bail!("--preset and --config are mutually exclusive"),
            (Some(name), None) => serde_json::to_value(preset(name)?)?,
            (None, Some(path)) => load_file(path)?,
            (None, None) => bail!("either --preset or --config is required"),
        };
        for assignment in &self.sets {
            apply_override(&mut value, assignment)?;
        }
        if let Some(parity) = self.sign_parity {
            value["sign_parity"] = serde_json::to_value(parity)?;
        }
        if let Some(dir) = &self.out {
            set_path(&mut value, "output.dir", serde_json::to_value(dir)?)?;
        }
        let cfg: ScenarioConfig =
            serde_json::from_value(value).context("config does not match the schema")?;
        cfg.validate().context("invalid config")?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_preset(name: &str, sets: &[&str]) -> Result<ScenarioConfig> {
        ConfigSource {
            preset: Some(name.into()),
            sets: sets.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
        .resolve()
    }

    #[test]
    fn linspace_values() {
        assert_eq!(
            Axis::linspace(0.0, 1.0, 5, true).values(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(
            Axis::linspace(0.0, 1.0, 4, false).values(),
            vec![0.0, 0.25, 0.5, 0.75]
        );
        assert_eq!(Axis::linspace(2.0, 3.0, 1, true).values(), vec![2.0]);
        assert!(Axis::linspace(2.0, 3.0, 0, true).values().is_empty());
    }

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESET_NAMES {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert!(preset_description(name).is_some());
            let text = serde_json::to_string(&cfg).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn fig2_preset_parameters() {
        let cfg = preset("fig2").unwrap();
        assert_eq!(cfg.phi_list.values().len(), 512);
        assert!(cfg.phi_list.values().iter().all(|p| *p < TAU));
        let deltas = cfg.delta_list.values();
        assert_eq!((deltas.len(), deltas[0], deltas[511]), (512, -3.0, 3.0));
        assert_eq!((cfg.r_eval, cfg.z_eval), (1.0, 0.0));
        assert_eq!(cfg.atom.gamma_d, 1e-3);
        assert_eq!(cfg.drive.omega_c, Complex64::new(1.0, 0.0));
        assert_eq!(
            (cfg.thetas[0], cfg.beam.alpha, cfg.beam.psi),
            (FRAC_PI_4, FRAC_PI_4, 0.0)
        );
    }

    #[test]
    fn overrides() {
        let cfg = from_preset(
            "fig2",
            &["beam.l=2", "drive.omega_c=[2.0, 0.5]", "name=custom"],
        )
        .unwrap();
        assert_eq!(cfg.beam.l, 2);
        assert_eq!(cfg.drive.omega_c, Complex64::new(2.0, 0.5));
        assert_eq!(cfg.name, "custom");
        let cfg = from_preset("fig4b", &["thetas.1=0.3"]).unwrap();
        assert_eq!(cfg.thetas[1], 0.3);
        assert!(from_preset("fig2", &["beam.colour=3"]).is_err());
        assert!(from_preset("fig2", &["bogus=1"]).is_err());
        assert!(from_preset("fig2", &["thetas.7=1"]).is_err());
        assert!(from_preset("fig2", &["noequals"]).is_err());
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(from_preset("fig2", &["phi_list=[]"]).is_err());
        assert!(from_preset("fig2", &["phi_list.count=0"]).is_err());
        assert!(from_preset("fig2", &["z_list=[-1]"]).is_err());
        assert!(from_preset("fig2", &["zeta=0"]).is_err());
        assert!(from_preset("fig2", &["thetas=[]"]).is_err());
        assert!(from_preset("fig2", &["decimation=0"]).is_err());
        assert!(ConfigSource::default().resolve().is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = from_preset("fig3a", &[]).unwrap();
        let b = ConfigSource {
            preset: Some("fig3a".into()),
            out: Some("elsewhere".into()),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        let c = from_preset("fig3a", &["zeta=2"]).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn parity_flag_overrides_config() {
        let cfg = ConfigSource {
            preset: Some("fig2".into()),
            sign_parity: Some(Parity::Paper),
            ..Default::default()
        }
        .resolve()
        .unwrap();
        assert_eq!(cfg.sign_parity, Parity::Paper);
    }
}
