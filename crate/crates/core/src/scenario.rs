//! Scenario configuration: a TOML schema with units in every key name, the
//! built-in `uma` and `ind` presets, and the derived link models consumed by
//! the analytic and simulation engines.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{CoverageInputs, MicrowaveLink, MmWaveLink};
use crate::error::{Error, Result};
use crate::geometry::{thinning_factor, LosModel, ObstacleLaw, UniformRange};
use crate::quadrature::QuadratureOptions;
use crate::radio::{derive_pattern, normalized_noise, AntennaPattern, Band, PathLossModel};
use crate::units::{db_to_linear, intensity_to_isd};

const UMA_PRESET: &str = include_str!("../presets/uma.toml");
const IND_PRESET: &str = include_str!("../presets/ind.toml");

pub const PRESET_NAMES: [&str; 2] = ["uma", "ind"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub bs_intensity_per_m2: f64,
    pub relays_per_cell: f64,
    /// ρ: fraction of cells with an active uplink transmitter.
    pub multiplexing_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightConfig {
    pub bs_antenna_height_m: f64,
    pub ue_antenna_height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerConfig {
    pub bs_tx_power_dbm: f64,
    pub ue_tx_power_dbm: f64,
    pub noise_density_dbm_hz: f64,
    pub ue_noise_figure_db: f64,
}

/// A thinning factor given as a number or as the keyword `"derive"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Thinning {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleConfig {
    /// ξ, mean fraction of the plane covered by obstacle footprints.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage_ratio: Option<f64>,
    /// λ_o directly, as an alternative to `coverage_ratio`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity_per_m2: Option<f64>,
    pub radius_min_m: f64,
    pub radius_max_m: f64,
    pub height_min_m: f64,
    pub height_max_m: f64,
    pub eta_cellular: Thinning,
    pub eta_d2d: Thinning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub bs_elements_per_side: u32,
    pub ue_elements_per_side: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandConfig {
    pub mmwave_carrier_ghz: f64,
    pub mmwave_bandwidth_hz: f64,
    pub microwave_carrier_ghz: f64,
    pub microwave_bandwidth_hz: f64,
}

/// Explicit path-loss coefficients: `PL = a2 + x + a1·log10(d/unit) + a3·log10(f_GHz)` dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomPathLoss {
    pub a1_db: f64,
    pub a2_db: f64,
    pub a3_db: f64,
    #[serde(default)]
    pub shadow_margin_db: f64,
    #[serde(default = "one")]
    pub distance_unit_m: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PathLossSpec {
    Named(String),
    Custom(CustomPathLoss),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathLossConfig {
    pub cellular: PathLossSpec,
    pub mmwave_d2d: PathLossSpec,
    pub microwave_d2d_los: PathLossSpec,
    pub microwave_d2d_nlos: PathLossSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelayBand {
    Mmwave,
    Microwave,
}

impl From<RelayBand> for Band {
    fn from(b: RelayBand) -> Band {
        match b {
            RelayBand::Mmwave => Band::MmWave,
            RelayBand::Microwave => Band::Microwave,
        }
    }
}

impl std::fmt::Display for RelayBand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RelayBand::Mmwave => "mmwave",
            RelayBand::Microwave => "microwave",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub relay_band: RelayBand,
    pub tau_max_db: f64,
    pub fading_rate: f64,
    pub quadrature_rel_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayoutKind {
    Ppp,
    Hex,
    IndGrid,
    Footprints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub kind: LayoutKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub isd_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub footprint_file: Option<String>,
    /// Overrides the certified simulation window radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius_m: Option<f64>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            kind: LayoutKind::Ppp,
            isd_m: None,
            footprint_file: None,
            window_radius_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub network: NetworkConfig,
    pub heights: HeightConfig,
    pub power: PowerConfig,
    pub obstacles: ObstacleConfig,
    pub antennas: AntennaConfig,
    pub bands: BandConfig,
    pub path_loss: PathLossConfig,
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub layout: LayoutConfig,
}

/// A parsed configuration together with the keys that were ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub config: ScenarioConfig,
    pub warnings: Vec<String>,
}

fn section<T: DeserializeOwned>(table: &toml::Table, name: &str) -> Result<T> {
    let value = table
        .get(name)
        .ok_or_else(|| Error::config(name, "missing section"))?;
    value.clone().try_into().map_err(|e: toml::de::Error| {
        let msg = e.message().to_string();
        let field = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("missing field"))
            .map(|key| format!("{name}.{key}"))
            .unwrap_or_else(|| name.to_string());
        Error::config(field, msg)
    })
}

fn unknown_keys(input: &toml::Table, known: &toml::Table, prefix: &str, out: &mut Vec<String>) {
    for (key, value) in input {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match (value, known.get(key)) {
            (_, None) => out.push(format!("unknown key `{path}` ignored")),
            (toml::Value::Table(inner), Some(toml::Value::Table(k))) => unknown_keys(inner, k, &path, out),
            _ => {}
        }
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<LoadedConfig> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<syntax>", e.message().to_string()))?;
        let name = match table.get("name") {
            Some(toml::Value::String(s)) => s.clone(),
            Some(_) => return Err(Error::config("name", "must be a string")),
            None => return Err(Error::config("name", "missing field")),
        };
        let config = ScenarioConfig {
            name,
            network: section(&table, "network")?,
            heights: section(&table, "heights")?,
            power: section(&table, "power")?,
            obstacles: section(&table, "obstacles")?,
            antennas: section(&table, "antennas")?,
            bands: section(&table, "bands")?,
            path_loss: section(&table, "path_loss")?,
            analysis: section(&table, "analysis")?,
            layout: if table.contains_key("layout") {
                section(&table, "layout")?
            } else {
                LayoutConfig::default()
            },
        };
        config.validate()?;
        let known = toml::Table::try_from(&config).map_err(|e| Error::config("<dump>", e.to_string()))?;
        let mut warnings = Vec::new();
        unknown_keys(&table, &known, "", &mut warnings);
        Ok(LoadedConfig { config, warnings })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LoadedConfig> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "uma" => UMA_PRESET,
            "ind" => IND_PRESET,
            other => {
                return Err(Error::config(
                    "preset",
                    format!("unknown preset `{other}`, expected one of {PRESET_NAMES:?}"),
                ))
            }
        };
        Ok(Self::parse(text)?.config)
    }

    pub fn uma() -> Self {
        Self::preset("uma").expect("built-in preset is valid")
    }

    pub fn ind() -> Self {
        Self::preset("ind").expect("built-in preset is valid")
    }

    /// Canonical TOML text; field order is fixed by the schema.
    pub fn dump(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical dump.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.dump().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Copy with obstacles given by coverage ratio ξ instead of intensity.
    pub fn with_coverage_ratio(&self, xi: f64) -> Self {
        let mut c = self.clone();
        c.obstacles.coverage_ratio = Some(xi);
        c.obstacles.intensity_per_m2 = None;
        c
    }

    pub fn with_bs_intensity(&self, lambda: f64) -> Self {
        let mut c = self.clone();
        c.network.bs_intensity_per_m2 = lambda;
        if c.layout.isd_m.is_some() {
            c.layout.isd_m = Some(intensity_to_isd(lambda));
        }
        c
    }

    pub fn with_relay_band(&self, band: RelayBand) -> Self {
        let mut c = self.clone();
        c.analysis.relay_band = band;
        c
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| -> Result<()> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and positive, got {v}")))
            }
        };
        let non_negative = |field: &str, v: f64| -> Result<()> {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and >= 0, got {v}")))
            }
        };
        let finite = |field: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite, got {v}")))
            }
        };

        positive("network.bs_intensity_per_m2", self.network.bs_intensity_per_m2)?;
        non_negative("network.relays_per_cell", self.network.relays_per_cell)?;
        let rho = self.network.multiplexing_factor;
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::config("network.multiplexing_factor", format!("must lie in [0, 1], got {rho}")));
        }
        non_negative("heights.bs_antenna_height_m", self.heights.bs_antenna_height_m)?;
        non_negative("heights.ue_antenna_height_m", self.heights.ue_antenna_height_m)?;
        finite("power.bs_tx_power_dbm", self.power.bs_tx_power_dbm)?;
        finite("power.ue_tx_power_dbm", self.power.ue_tx_power_dbm)?;
        finite("power.noise_density_dbm_hz", self.power.noise_density_dbm_hz)?;
        non_negative("power.ue_noise_figure_db", self.power.ue_noise_figure_db)?;

        let o = &self.obstacles;
        match (o.coverage_ratio, o.intensity_per_m2) {
            (Some(xi), None) => {
                if !(0.0..1.0).contains(&xi) {
                    return Err(Error::config("obstacles.coverage_ratio", format!("must lie in [0, 1), got {xi}")));
                }
            }
            (None, Some(l)) => non_negative("obstacles.intensity_per_m2", l)?,
            _ => {
                return Err(Error::config(
                    "obstacles.coverage_ratio",
                    "exactly one of `coverage_ratio` and `intensity_per_m2` must be given",
                ))
            }
        }
        non_negative("obstacles.radius_min_m", o.radius_min_m)?;
        non_negative("obstacles.height_min_m", o.height_min_m)?;
        if !(o.radius_max_m >= o.radius_min_m && o.radius_max_m.is_finite()) {
            return Err(Error::config("obstacles.radius_max_m", "must be finite and >= radius_min_m"));
        }
        if !(o.height_max_m >= o.height_min_m && o.height_max_m.is_finite()) {
            return Err(Error::config("obstacles.height_max_m", "must be finite and >= height_min_m"));
        }
        for (field, eta) in [("obstacles.eta_cellular", &o.eta_cellular), ("obstacles.eta_d2d", &o.eta_d2d)] {
            match eta {
                Thinning::Value(v) if (0.0..=1.0).contains(v) => {}
                Thinning::Value(v) => return Err(Error::config(field, format!("must lie in [0, 1], got {v}"))),
                Thinning::Keyword(k) if k == "derive" => {}
                Thinning::Keyword(k) => {
                    return Err(Error::config(field, format!("expected a number or \"derive\", got \"{k}\"")))
                }
            }
        }

        for (field, n) in [
            ("antennas.bs_elements_per_side", self.antennas.bs_elements_per_side),
            ("antennas.ue_elements_per_side", self.antennas.ue_elements_per_side),
        ] {
            if n < 2 {
                return Err(Error::config(field, format!("need at least 2 elements per side, got {n}")));
            }
        }
        positive("bands.mmwave_carrier_ghz", self.bands.mmwave_carrier_ghz)?;
        positive("bands.mmwave_bandwidth_hz", self.bands.mmwave_bandwidth_hz)?;
        positive("bands.microwave_carrier_ghz", self.bands.microwave_carrier_ghz)?;
        positive("bands.microwave_bandwidth_hz", self.bands.microwave_bandwidth_hz)?;

        finite("analysis.tau_max_db", self.analysis.tau_max_db)?;
        positive("analysis.fading_rate", self.analysis.fading_rate)?;
        let tol = self.analysis.quadrature_rel_tol;
        if !(tol > 0.0 && tol < 0.1) {
            return Err(Error::config("analysis.quadrature_rel_tol", format!("must lie in (0, 0.1), got {tol}")));
        }

        let l = &self.layout;
        if let Some(isd) = l.isd_m {
            positive("layout.isd_m", isd)?;
        }
        if let Some(r) = l.window_radius_m {
            positive("layout.window_radius_m", r)?;
        }
        if l.kind == LayoutKind::Footprints && l.footprint_file.is_none() {
            return Err(Error::config("layout.footprint_file", "required for the `footprints` layout"));
        }
        Ok(())
    }
}

/// Named path-loss models. D2D UMa coefficients depend on the UE height.
fn named_path_loss(name: &str, ue_height_m: f64) -> Option<(f64, f64, f64, f64)> {
    let h = ue_height_m.max(1e-3).log10();
    Some(match name {
        "uma-mmwave-los" => (20.0, 32.4, 20.0, 1.0),
        "ind-mmwave-los" => (17.3, 32.4, 20.0, 1.0),
        "uma-d2d-los" => (22.7, 27.0, 20.0, 1.0),
        "uma-d2d-nlos" => (44.9 - 6.55 * h, 14.78 + 5.83 * h, 34.97, 1.0),
        "ind-d2d-los" => (16.9, 89.5, 0.0, 1000.0),
        "ind-d2d-nlos" => (43.3, 147.4, 0.0, 1000.0),
        _ => return None,
    })
}

pub const PATH_LOSS_MODELS: [&str; 6] = [
    "uma-mmwave-los",
    "ind-mmwave-los",
    "uma-d2d-los",
    "uma-d2d-nlos",
    "ind-d2d-los",
    "ind-d2d-nlos",
];

fn build_path_loss(field: &str, spec: &PathLossSpec, carrier_ghz: f64, ue_height_m: f64) -> Result<PathLossModel> {
    let (a1, a2, a3, x, unit) = match spec {
        PathLossSpec::Named(name) => {
            let (a1, a2, a3, unit) = named_path_loss(name, ue_height_m).ok_or_else(|| {
                Error::config(field, format!("unknown model `{name}`, expected one of {PATH_LOSS_MODELS:?}"))
            })?;
            (a1, a2, a3, 0.0, unit)
        }
        PathLossSpec::Custom(c) => (c.a1_db, c.a2_db, c.a3_db, c.shadow_margin_db, c.distance_unit_m),
    };
    PathLossModel::with_distance_unit(a1, a2, a3, x, carrier_ghz, unit).map_err(|e| Error::config(field, e.to_string()))
}

/// Fully derived scenario: every quantity the engines need, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub digest: String,
    pub bs_intensity: f64,
    pub relay_intensity: f64,
    /// ρλ_b, the uplink interferer intensity.
    pub uplink_intensity: f64,
    pub obstacles: ObstacleLaw,
    pub los_cellular: LosModel,
    pub los_d2d: LosModel,
    pub bs_pattern: AntennaPattern,
    pub ue_pattern: AntennaPattern,
    pub path_loss_cellular: PathLossModel,
    pub path_loss_mmwave_d2d: PathLossModel,
    pub path_loss_microwave_los: PathLossModel,
    pub path_loss_microwave_nlos: PathLossModel,
    pub noise_cellular: f64,
    pub noise_mmwave_d2d: f64,
    pub noise_microwave_d2d: f64,
    pub tau_max: f64,
    pub inputs: CoverageInputs,
}

impl Scenario {
    pub fn from_config(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let net = &config.network;
        let heights = &config.heights;
        let o = &config.obstacles;
        let radius = UniformRange::new(o.radius_min_m, o.radius_max_m);
        let height = UniformRange::new(o.height_min_m, o.height_max_m);
        let obstacles = match (o.coverage_ratio, o.intensity_per_m2) {
            (Some(xi), _) => ObstacleLaw::cylinders_with_coverage(xi, radius, height),
            (None, Some(l)) => ObstacleLaw::cylinders(l, radius, height),
            (None, None) => unreachable!("validated"),
        }
        .map_err(|e| Error::config("obstacles", e.to_string()))?;

        let (h_bs, h_ue) = (heights.bs_antenna_height_m, heights.ue_antenna_height_m);
        let eta = |field: &str, t: &Thinning, h_tx: f64| -> Result<f64> {
            match t {
                Thinning::Value(v) => Ok(*v),
                Thinning::Keyword(_) => thinning_factor(h_tx, h_ue, &height).map_err(|e| Error::config(field, e.to_string())),
            }
        };
        let eta_c = eta("obstacles.eta_cellular", &o.eta_cellular, h_bs)?;
        let eta_d = eta("obstacles.eta_d2d", &o.eta_d2d, h_ue)?;
        let los_cellular = LosModel::with_thinning(&obstacles, eta_c, h_bs, h_ue)
            .map_err(|e| Error::config("obstacles.eta_cellular", e.to_string()))?;
        let los_d2d = LosModel::with_thinning(&obstacles, eta_d, h_ue, h_ue)
            .map_err(|e| Error::config("obstacles.eta_d2d", e.to_string()))?;

        let bs_pattern = derive_pattern(config.antennas.bs_elements_per_side)
            .map_err(|e| Error::config("antennas.bs_elements_per_side", e.to_string()))?;
        let ue_pattern = derive_pattern(config.antennas.ue_elements_per_side)
            .map_err(|e| Error::config("antennas.ue_elements_per_side", e.to_string()))?;

        let b = &config.bands;
        let pl = &config.path_loss;
        let path_loss_cellular = build_path_loss("path_loss.cellular", &pl.cellular, b.mmwave_carrier_ghz, h_ue)?;
        let path_loss_mmwave_d2d = build_path_loss("path_loss.mmwave_d2d", &pl.mmwave_d2d, b.mmwave_carrier_ghz, h_ue)?;
        let path_loss_microwave_los =
            build_path_loss("path_loss.microwave_d2d_los", &pl.microwave_d2d_los, b.microwave_carrier_ghz, h_ue)?;
        let path_loss_microwave_nlos =
            build_path_loss("path_loss.microwave_d2d_nlos", &pl.microwave_d2d_nlos, b.microwave_carrier_ghz, h_ue)?;
        if !(path_loss_microwave_nlos.exponent() > 2.0) {
            return Err(Error::config(
                "path_loss.microwave_d2d_nlos",
                format!("interference analysis needs an exponent above 2, got {}", path_loss_microwave_nlos.exponent()),
            ));
        }

        let p = &config.power;
        let noise = |bw: f64, tx_dbm: f64| normalized_noise(p.noise_density_dbm_hz, bw, p.ue_noise_figure_db, tx_dbm);
        let noise_cellular = noise(b.mmwave_bandwidth_hz, p.bs_tx_power_dbm)?;
        let noise_mmwave_d2d = noise(b.mmwave_bandwidth_hz, p.ue_tx_power_dbm)?;
        let noise_microwave_d2d = noise(b.microwave_bandwidth_hz, p.ue_tx_power_dbm)?;

        let bs_intensity = net.bs_intensity_per_m2;
        let relay_intensity = net.relays_per_cell * bs_intensity;
        let uplink_intensity = net.multiplexing_factor * bs_intensity;

        let inputs = CoverageInputs {
            cellular: MmWaveLink {
                transmitter_intensity: bs_intensity,
                interferer_intensity: bs_intensity,
                los: los_cellular,
                tx_pattern: bs_pattern,
                rx_pattern: ue_pattern,
                path_loss: path_loss_cellular,
                noise: noise_cellular,
                interferers_beyond_serving: true,
            },
            mmwave_d2d: MmWaveLink {
                transmitter_intensity: relay_intensity,
                interferer_intensity: uplink_intensity,
                los: los_d2d,
                tx_pattern: ue_pattern,
                rx_pattern: ue_pattern,
                path_loss: path_loss_mmwave_d2d,
                noise: noise_mmwave_d2d,
                interferers_beyond_serving: false,
            },
            microwave_d2d: MicrowaveLink {
                relay_intensity,
                interferer_intensity: uplink_intensity,
                los: los_d2d,
                los_path_loss: path_loss_microwave_los,
                nlos_path_loss: path_loss_microwave_nlos,
                noise: noise_microwave_d2d,
                fading_rate: config.analysis.fading_rate,
            },
            quadrature: QuadratureOptions::default().with_rel_tol(config.analysis.quadrature_rel_tol),
        };

        let digest = config.digest();
        let tau_max = db_to_linear(config.analysis.tau_max_db);
        Ok(Self {
            config,
            digest,
            bs_intensity,
            relay_intensity,
            uplink_intensity,
            obstacles,
            los_cellular,
            los_d2d,
            bs_pattern,
            ue_pattern,
            path_loss_cellular,
            path_loss_mmwave_d2d,
            path_loss_microwave_los,
            path_loss_microwave_nlos,
            noise_cellular,
            noise_mmwave_d2d,
            noise_microwave_d2d,
            tau_max,
            inputs,
        })
    }

    pub fn preset(name: &str) -> Result<Self> {
        Self::from_config(ScenarioConfig::preset(name)?)
    }

    pub fn relay_band(&self) -> RelayBand {
        self.config.analysis.relay_band
    }
}
