//! Typed schema over the raw key-value config: defaults, parsing,
//! physics-range diagnostics, and the fully resolved form that goes into
//! the run manifest.
//!
//! Every key is either assigned in the file or filled from a default here,
//! so a manifest written after resolution is itself a complete, re-runnable
//! config. The `artifact.` namespace is reserved for manifest hash lines
//! and ignored on input.

use crate::config::{ConfigError, RawConfig};
use cytowave_core::dielectrics::Medium;
use cytowave_core::electrodes::{retardation_required, ElectrodeGeometry, GeometryKind, MapWindow};
use cytowave_core::receiver::ReceiverConfig;
use cytowave_core::transit::{ChannelSpec, CrossSection, FlowConditions};

pub const SUPPORTED_BAND_HZ: (f64, f64) = (1e7, 1e10);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    FieldMap,
    Hotspot,
    Transit,
    Detect,
    Sweep,
    Estimate,
    Materials,
}

impl Experiment {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "field_map" => Self::FieldMap,
            "hotspot" => Self::Hotspot,
            "transit" => Self::Transit,
            "detect" => Self::Detect,
            "sweep" => Self::Sweep,
            "estimate" => Self::Estimate,
            "materials" => Self::Materials,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FieldMap => "field_map",
            Self::Hotspot => "hotspot",
            Self::Transit => "transit",
            Self::Detect => "detect",
            Self::Sweep => "sweep",
            Self::Estimate => "estimate",
            Self::Materials => "materials",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverMode {
    Heterodyne,
    Homodyne,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialsSource {
    Builtin,
    Path(String),
}

impl MaterialsSource {
    pub fn as_manifest_value(&self) -> String {
        match self {
            Self::Builtin => "builtin".into(),
            Self::Path(p) => p.clone(),
        }
    }
}

/// Fully resolved run settings; every field has a concrete value.
#[derive(Debug, Clone)]
pub struct Settings {
    pub experiment: Experiment,
    pub seed: u64,

    pub kind: GeometryKind,
    pub w_m: f64,
    pub g_m: f64,
    pub pairs: usize,
    pub retardation_on: bool,
    pub map_window: MapWindow,
    pub map_nx: usize,
    pub map_nz: usize,

    pub medium: Medium,
    pub medium_key: String,

    pub material: String,
    pub radius_m: f64,
    pub height_m: f64,
    pub velocity_m_s: f64,

    pub flow_rate_m3_s: f64,
    pub concentration_per_m3: f64,
    pub detection_fraction: f64,
    pub channel_d_m: f64,
    pub cross_section: CrossSection,
    pub duration_s: f64,

    pub receiver_profile: String,
    pub receiver_mode: ReceiverMode,
    pub receiver: ReceiverConfig,
    pub v0_volts: f64,

    pub k_mad: f64,
    pub min_separation_s: Option<f64>,
    pub baseline_window_s: f64,
    pub freqs_hz: Vec<f64>,
    pub hotspot_threshold: f64,
    pub ref_v: f64,
    pub ref_d_m: f64,
    pub ref_eps_real: f64,
    pub ref_f_hz: f64,
    pub ref_kind: GeometryKind,
    pub target_d_m: f64,
    pub target_eps_real: f64,

    pub out_dir: String,
    pub trace_csv: Option<String>,
    pub materials: MaterialsSource,
}

fn bad(key: &str, message: String) -> ConfigError {
    ConfigError {
        line: 0,
        message: format!("`{key}`: {message}"),
    }
}

struct Reader<'a> {
    raw: &'a RawConfig,
}

impl<'a> Reader<'a> {
    fn str_or(&self, key: &str, default: &str) -> String {
        self.raw.get(key).unwrap_or(default).to_string()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| bad(key, format!("`{s}` is not a number"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.raw.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| bad(key, format!("`{s}` is not a non-negative integer"))),
        }
    }

    fn u64_or(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.raw.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| bad(key, format!("`{s}` is not a non-negative integer"))),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "geometry.kind",
    "geometry.w_m",
    "geometry.g_m",
    "geometry.pairs",
    "geometry.retardation",
    "geometry.map_x_min_m",
    "geometry.map_x_max_m",
    "geometry.map_z_min_m",
    "geometry.map_z_max_m",
    "geometry.map_nx",
    "geometry.map_nz",
    "medium.model",
    "medium.eps_real",
    "medium.eps_imag",
    "particle.material",
    "particle.radius_m",
    "particle.height_m",
    "particle.velocity_m_s",
    "flow.rate_m3_s",
    "flow.concentration_per_m3",
    "flow.detection_fraction",
    "flow.channel_d_m",
    "flow.cross_section",
    "flow.duration_s",
    "receiver.profile",
    "receiver.mode",
    "receiver.carrier_freq_hz",
    "receiver.if_freq_hz",
    "receiver.if_bandwidth_hz",
    "receiver.lockin_lpf_hz",
    "receiver.noise_density_v_per_rthz",
    "receiver.sample_rate_hz",
    "receiver.shielding_rejection_db",
    "receiver.phase_offset_rad",
    "receiver.v0_volts",
    "analysis.k_mad",
    "analysis.min_separation_s",
    "analysis.baseline_window_s",
    "analysis.freqs_hz",
    "analysis.hotspot_threshold",
    "analysis.ref_v",
    "analysis.ref_d_m",
    "analysis.ref_eps_real",
    "analysis.ref_f_hz",
    "analysis.ref_kind",
    "analysis.target_d_m",
    "analysis.target_eps_real",
    "io.out_dir",
    "io.trace_csv",
    "io.materials",
];

fn parse_kind(key: &str, s: &str) -> Result<GeometryKind, ConfigError> {
    match s {
        "pp" => Ok(GeometryKind::ParallelPlates),
        "id" => Ok(GeometryKind::Interdigitated),
        "dr" => Ok(GeometryKind::DiskRing),
        _ => Err(bad(key, format!("`{s}` is not one of pp, id, dr"))),
    }
}

impl Settings {
    /// Resolves a raw config against the schema. `seed_override` applies a
    /// command-line `--seed` on top of the file.
    pub fn resolve(raw: &RawConfig, seed_override: Option<u64>) -> Result<Self, ConfigError> {
        for key in raw.keys() {
            if key.starts_with("artifact.") {
                continue;
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(bad(key, "unknown key".into()));
            }
        }
        let r = Reader { raw };

        let experiment_name = raw
            .get("experiment")
            .ok_or_else(|| bad("experiment", "missing (required)".into()))?;
        let experiment = Experiment::parse(experiment_name).ok_or_else(|| {
            bad(
                "experiment",
                format!(
                    "`{experiment_name}` is not one of field_map, hotspot, transit, detect, sweep, estimate, materials"
                ),
            )
        })?;
        let seed = seed_override.map_or_else(|| r.u64_or("seed", 0), Ok)?;

        let kind = parse_kind("geometry.kind", &r.str_or("geometry.kind", "pp"))?;
        let (def_w, def_g, def_pairs) = match kind {
            GeometryKind::ParallelPlates => (45e-6, 10e-6, 0),
            GeometryKind::Interdigitated => (15e-6, 15e-6, 3),
            GeometryKind::DiskRing => (75e-6, 75e-6, 0),
        };
        let w_m = r.f64_or("geometry.w_m", def_w)?;
        let g_m = r.f64_or("geometry.g_m", def_g)?;
        let pairs = r.usize_or("geometry.pairs", def_pairs)?;

        let medium_key = r.str_or("medium.model", "water");
        let medium = match medium_key.as_str() {
            "water" => Medium::water(),
            "constant" => {
                let re = r.f64_or("medium.eps_real", 78.4)?;
                let im = r.f64_or("medium.eps_imag", 0.0)?;
                Medium::Constant(
                    cytowave_core::dielectrics::ComplexPermittivity::new(re, im)
                        .map_err(|e| bad("medium.eps_real", e.to_string()))?,
                )
            }
            other => {
                return Err(bad(
                    "medium.model",
                    format!("`{other}` is not one of water, constant"),
                ))
            }
        };

        let material = r.str_or("particle.material", "polystyrene");
        let radius_m = r.f64_or("particle.radius_m", 5e-6)?;
        let height_m = r.f64_or("particle.height_m", 20e-6)?;

        let flow_rate_m3_s = r.f64_or("flow.rate_m3_s", 1.6666666666666667e-10)?;
        let concentration_per_m3 = r.f64_or("flow.concentration_per_m3", 1e11)?;
        let detection_fraction = r.f64_or("flow.detection_fraction", 0.057)?;
        let channel_d_m = r.f64_or("flow.channel_d_m", 40e-6)?;
        let cross_section = match r.str_or("flow.cross_section", "square").as_str() {
            "square" => CrossSection::Square,
            "circular" => CrossSection::Circular,
            other => {
                return Err(bad(
                    "flow.cross_section",
                    format!("`{other}` is not one of square, circular"),
                ))
            }
        };
        let duration_s = r.f64_or("flow.duration_s", 1.2)?;

        let velocity_m_s = match raw.get("particle.velocity_m_s") {
            None | Some("auto") => {
                let channel = ChannelSpec::new(channel_d_m, cross_section, height_m)
                    .map_err(|e| bad("flow.channel_d_m", e.to_string()))?;
                channel.centerline_velocity_m_s(flow_rate_m3_s)
            }
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| bad("particle.velocity_m_s", format!("`{s}` is not a number")))?,
        };

        let receiver_profile = r.str_or("receiver.profile", "desk");
        let base = match receiver_profile.as_str() {
            "desk" => ReceiverConfig::desk_scale(),
            "full" => ReceiverConfig::full_scale(),
            other => {
                return Err(bad(
                    "receiver.profile",
                    format!("`{other}` is not one of desk, full"),
                ))
            }
        };
        let receiver = ReceiverConfig {
            carrier_freq_hz: r.f64_or("receiver.carrier_freq_hz", base.carrier_freq_hz)?,
            if_freq_hz: r.f64_or("receiver.if_freq_hz", base.if_freq_hz)?,
            if_bandwidth_hz: r.f64_or("receiver.if_bandwidth_hz", base.if_bandwidth_hz)?,
            lockin_lpf_hz: r.f64_or("receiver.lockin_lpf_hz", base.lockin_lpf_hz)?,
            noise_density_v_per_rthz: r.f64_or(
                "receiver.noise_density_v_per_rthz",
                base.noise_density_v_per_rthz,
            )?,
            sample_rate_hz: r.f64_or("receiver.sample_rate_hz", base.sample_rate_hz)?,
            shielding_rejection_db: r.f64_or(
                "receiver.shielding_rejection_db",
                base.shielding_rejection_db,
            )?,
            phase_offset_rad: r.f64_or("receiver.phase_offset_rad", base.phase_offset_rad)?,
        };
        let receiver_mode = match r.str_or("receiver.mode", "heterodyne").as_str() {
            "heterodyne" => ReceiverMode::Heterodyne,
            "homodyne" => ReceiverMode::Homodyne,
            other => {
                return Err(bad(
                    "receiver.mode",
                    format!("`{other}` is not one of heterodyne, homodyne"),
                ))
            }
        };
        let v0_volts = r.f64_or("receiver.v0_volts", 1.0)?;

        // map window defaults derive from the geometry footprint; built on
        // clamped copies so defaults exist even when diagnostics will fire
        let (wc, gc) = (w_m.abs().max(1e-9), g_m.abs().max(1e-9));
        let geom_for_span = match kind {
            GeometryKind::ParallelPlates => ElectrodeGeometry::parallel_plates(wc, gc),
            GeometryKind::Interdigitated => {
                ElectrodeGeometry::interdigitated(wc, gc, pairs.max(1))
            }
            GeometryKind::DiskRing => ElectrodeGeometry::disk_ring(wc, gc),
        }
        .map(|g| g.span_m())
        .unwrap_or(wc * 2.0 + gc);
        let half = geom_for_span / 2.0 + wc + gc;
        let map_window = MapWindow {
            x_min_m: r.f64_or("geometry.map_x_min_m", -half)?,
            x_max_m: r.f64_or("geometry.map_x_max_m", half)?,
            z_min_m: r.f64_or("geometry.map_z_min_m", gc / 50.0)?,
            z_max_m: r.f64_or("geometry.map_z_max_m", geom_for_span)?,
        };
        let map_nx = r.usize_or("geometry.map_nx", 81)?;
        let map_nz = r.usize_or("geometry.map_nz", 81)?;

        let retardation_on = match r.str_or("geometry.retardation", "auto").as_str() {
            "on" => true,
            "off" => false,
            "auto" => {
                let r_max = map_window.x_min_m.abs().max(map_window.x_max_m.abs())
                    .hypot(map_window.z_max_m.abs());
                let eps = medium
                    .permittivity(receiver.carrier_freq_hz)
                    .map(|e| e.eps_real)
                    .unwrap_or(1.0);
                retardation_required(r_max, receiver.carrier_freq_hz, eps).unwrap_or(false)
            }
            other => {
                return Err(bad(
                    "geometry.retardation",
                    format!("`{other}` is not one of auto, on, off"),
                ))
            }
        };

        let k_mad = r.f64_or("analysis.k_mad", 5.0)?;
        let min_separation_s = match raw.get("analysis.min_separation_s") {
            None | Some("auto") => None,
            Some(s) => Some(
                s.parse::<f64>()
                    .map_err(|_| bad("analysis.min_separation_s", format!("`{s}` is not a number")))?,
            ),
        };
        let baseline_window_s = r.f64_or("analysis.baseline_window_s", 0.05)?;
        let freqs_raw = r.str_or("analysis.freqs_hz", "1e7,1e8,1e9,1e10");
        let mut freqs_hz = Vec::new();
        for part in freqs_raw.split(',') {
            let part = part.trim();
            freqs_hz.push(part.parse::<f64>().map_err(|_| {
                bad("analysis.freqs_hz", format!("`{part}` is not a number"))
            })?);
        }
        let hotspot_threshold = r.f64_or("analysis.hotspot_threshold", (-1.0f64).exp())?;
        let ref_v = r.f64_or("analysis.ref_v", 0.90)?;
        let ref_d_m = r.f64_or("analysis.ref_d_m", 10e-6)?;
        let ref_eps_real = r.f64_or("analysis.ref_eps_real", 3.07)?;
        let ref_f_hz = r.f64_or("analysis.ref_f_hz", 1e7)?;
        let ref_kind = parse_kind("analysis.ref_kind", &r.str_or("analysis.ref_kind", "pp"))?;
        let target_d_m = r.f64_or("analysis.target_d_m", 1e-6)?;
        let target_eps_real = r.f64_or("analysis.target_eps_real", 3.07)?;

        let out_dir = r.str_or("io.out_dir", "out");
        let trace_csv = match raw.get("io.trace_csv") {
            None | Some("none") => None,
            Some(p) => Some(p.to_string()),
        };
        let materials = match raw.get("io.materials") {
            Some("builtin") | None => match std::env::var("CYTOWAVE_MATERIALS") {
                Ok(p) if raw.get("io.materials").is_none() && !p.is_empty() => {
                    MaterialsSource::Path(p)
                }
                _ => MaterialsSource::Builtin,
            },
            Some(p) => MaterialsSource::Path(p.to_string()),
        };

        Ok(Self {
            experiment,
            seed,
            kind,
            w_m,
            g_m,
            pairs,
            retardation_on,
            map_window,
            map_nx,
            map_nz,
            medium,
            medium_key,
            material,
            radius_m,
            height_m,
            velocity_m_s,
            flow_rate_m3_s,
            concentration_per_m3,
            detection_fraction,
            channel_d_m,
            cross_section,
            duration_s,
            receiver_profile,
            receiver_mode,
            receiver,
            v0_volts,
            k_mad,
            min_separation_s,
            baseline_window_s,
            freqs_hz,
            hotspot_threshold,
            ref_v,
            ref_d_m,
            ref_eps_real,
            ref_f_hz,
            ref_kind,
            target_d_m,
            target_eps_real,
            out_dir,
            trace_csv,
            materials,
        })
    }

    pub fn geometry(&self) -> Result<ElectrodeGeometry, cytowave_core::Error> {
        match self.kind {
            GeometryKind::ParallelPlates => ElectrodeGeometry::parallel_plates(self.w_m, self.g_m),
            GeometryKind::Interdigitated => {
                ElectrodeGeometry::interdigitated(self.w_m, self.g_m, self.pairs)
            }
            GeometryKind::DiskRing => ElectrodeGeometry::disk_ring(self.w_m, self.g_m),
        }
    }

    pub fn flow(&self) -> Result<FlowConditions, cytowave_core::Error> {
        FlowConditions::new(
            self.flow_rate_m3_s,
            self.concentration_per_m3,
            self.detection_fraction,
        )
    }

    /// Physics-range diagnostics, each naming the offending key. Empty for
    /// a runnable configuration.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut demand =
            |key: &str, ok: bool, msg: &str| {
                if !ok {
                    out.push(format!("{key}: {msg}"));
                }
            };
        demand("geometry.w_m", self.w_m.is_finite() && self.w_m > 0.0, "must be > 0");
        demand("geometry.g_m", self.g_m.is_finite() && self.g_m > 0.0, "must be > 0");
        if self.kind == GeometryKind::Interdigitated {
            demand("geometry.pairs", self.pairs >= 1, "interdigitated needs at least 1 finger pair");
        }
        demand(
            "geometry.map_nx",
            self.map_nx >= 2 && self.map_nz >= 2,
            "map grid needs at least 2 points per axis",
        );
        demand(
            "geometry.map_x_min_m",
            self.map_window.x_max_m > self.map_window.x_min_m
                && self.map_window.z_max_m > self.map_window.z_min_m
                && self.map_window.z_min_m >= 0.0,
            "map window must have positive extent and z >= 0",
        );
        let (lo, hi) = SUPPORTED_BAND_HZ;
        demand(
            "receiver.carrier_freq_hz",
            self.receiver.carrier_freq_hz >= lo && self.receiver.carrier_freq_hz <= hi,
            "supported band is 0.01-10 GHz",
        );
        for f in &self.freqs_hz {
            demand(
                "analysis.freqs_hz",
                *f >= lo && *f <= hi,
                "supported band is 0.01-10 GHz",
            );
        }
        demand(
            "analysis.freqs_hz",
            self.freqs_hz.windows(2).all(|w| w[1] > w[0]),
            "frequencies must be strictly increasing",
        );
        demand(
            "particle.radius_m",
            self.radius_m.is_finite() && self.radius_m > 0.0,
            "must be > 0",
        );
        if self.g_m > 0.0 {
            demand(
                "particle.height_m",
                self.height_m > self.g_m / 100.0,
                "inside the edge-exclusion zone (g/100 above the plane)",
            );
        }
        demand(
            "particle.height_m",
            self.height_m >= self.radius_m,
            "particle center must clear the surface by its radius",
        );
        demand(
            "particle.velocity_m_s",
            self.velocity_m_s.is_finite() && self.velocity_m_s > 0.0,
            "must be > 0",
        );
        demand(
            "flow.rate_m3_s",
            self.flow_rate_m3_s.is_finite() && self.flow_rate_m3_s > 0.0,
            "must be > 0",
        );
        demand(
            "flow.concentration_per_m3",
            self.concentration_per_m3.is_finite() && self.concentration_per_m3 >= 0.0,
            "must be >= 0",
        );
        demand(
            "flow.detection_fraction",
            self.detection_fraction > 0.0 && self.detection_fraction <= 1.0,
            "must be in (0, 1]",
        );
        demand(
            "flow.duration_s",
            self.duration_s.is_finite() && self.duration_s > 0.0,
            "must be > 0",
        );
        if let Err(e) = self.receiver.validate() {
            out.push(format!("receiver.*: {e}"));
        }
        demand("analysis.k_mad", self.k_mad.is_finite() && self.k_mad > 0.0, "must be > 0");
        demand(
            "analysis.baseline_window_s",
            self.baseline_window_s.is_finite() && self.baseline_window_s > 0.0,
            "must be > 0",
        );
        demand(
            "analysis.hotspot_threshold",
            self.hotspot_threshold > 0.0 && self.hotspot_threshold < 1.0,
            "must be in (0, 1)",
        );
        for (key, v) in [
            ("analysis.ref_v", self.ref_v),
            ("analysis.ref_d_m", self.ref_d_m),
            ("analysis.ref_eps_real", self.ref_eps_real),
            ("analysis.ref_f_hz", self.ref_f_hz),
            ("analysis.target_d_m", self.target_d_m),
            ("analysis.target_eps_real", self.target_eps_real),
        ] {
            demand(key, v.is_finite() && v > 0.0, "must be > 0");
        }
        out
    }

    /// The fully resolved config as sorted manifest lines (no artifact
    /// hashes yet, no thread count: threads never change results).
    pub fn manifest_lines(&self) -> Vec<(String, String)> {
        let kind_str = |k: GeometryKind| {
            match k {
                GeometryKind::ParallelPlates => "pp",
                GeometryKind::Interdigitated => "id",
                GeometryKind::DiskRing => "dr",
            }
            .to_string()
        };
        let mut lines: Vec<(String, String)> = vec![
            ("experiment".into(), self.experiment.name().into()),
            ("seed".into(), self.seed.to_string()),
            ("geometry.kind".into(), kind_str(self.kind)),
            ("geometry.w_m".into(), self.w_m.to_string()),
            ("geometry.g_m".into(), self.g_m.to_string()),
            ("geometry.pairs".into(), self.pairs.to_string()),
            (
                "geometry.retardation".into(),
                if self.retardation_on { "on" } else { "off" }.into(),
            ),
            ("geometry.map_x_min_m".into(), self.map_window.x_min_m.to_string()),
            ("geometry.map_x_max_m".into(), self.map_window.x_max_m.to_string()),
            ("geometry.map_z_min_m".into(), self.map_window.z_min_m.to_string()),
            ("geometry.map_z_max_m".into(), self.map_window.z_max_m.to_string()),
            ("geometry.map_nx".into(), self.map_nx.to_string()),
            ("geometry.map_nz".into(), self.map_nz.to_string()),
            ("medium.model".into(), self.medium_key.clone()),
            ("particle.material".into(), self.material.clone()),
            ("particle.radius_m".into(), self.radius_m.to_string()),
            ("particle.height_m".into(), self.height_m.to_string()),
            ("particle.velocity_m_s".into(), self.velocity_m_s.to_string()),
            ("flow.rate_m3_s".into(), self.flow_rate_m3_s.to_string()),
            (
                "flow.concentration_per_m3".into(),
                self.concentration_per_m3.to_string(),
            ),
            (
                "flow.detection_fraction".into(),
                self.detection_fraction.to_string(),
            ),
            ("flow.channel_d_m".into(), self.channel_d_m.to_string()),
            (
                "flow.cross_section".into(),
                match self.cross_section {
                    CrossSection::Square => "square",
                    CrossSection::Circular => "circular",
                }
                .into(),
            ),
            ("flow.duration_s".into(), self.duration_s.to_string()),
            ("receiver.profile".into(), self.receiver_profile.clone()),
            (
                "receiver.mode".into(),
                match self.receiver_mode {
                    ReceiverMode::Heterodyne => "heterodyne",
                    ReceiverMode::Homodyne => "homodyne",
                }
                .into(),
            ),
            (
                "receiver.carrier_freq_hz".into(),
                self.receiver.carrier_freq_hz.to_string(),
            ),
            ("receiver.if_freq_hz".into(), self.receiver.if_freq_hz.to_string()),
            (
                "receiver.if_bandwidth_hz".into(),
                self.receiver.if_bandwidth_hz.to_string(),
            ),
            (
                "receiver.lockin_lpf_hz".into(),
                self.receiver.lockin_lpf_hz.to_string(),
            ),
            (
                "receiver.noise_density_v_per_rthz".into(),
                self.receiver.noise_density_v_per_rthz.to_string(),
            ),
            (
                "receiver.sample_rate_hz".into(),
                self.receiver.sample_rate_hz.to_string(),
            ),
            (
                "receiver.shielding_rejection_db".into(),
                self.receiver.shielding_rejection_db.to_string(),
            ),
            (
                "receiver.phase_offset_rad".into(),
                self.receiver.phase_offset_rad.to_string(),
            ),
            ("receiver.v0_volts".into(), self.v0_volts.to_string()),
            ("analysis.k_mad".into(), self.k_mad.to_string()),
            (
                "analysis.min_separation_s".into(),
                self.min_separation_s
                    .map_or_else(|| "auto".into(), |v| v.to_string()),
            ),
            (
                "analysis.baseline_window_s".into(),
                self.baseline_window_s.to_string(),
            ),
            (
                "analysis.freqs_hz".into(),
                self.freqs_hz
                    .iter()
                    .map(|f| f.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            (
                "analysis.hotspot_threshold".into(),
                self.hotspot_threshold.to_string(),
            ),
            ("analysis.ref_v".into(), self.ref_v.to_string()),
            ("analysis.ref_d_m".into(), self.ref_d_m.to_string()),
            ("analysis.ref_eps_real".into(), self.ref_eps_real.to_string()),
            ("analysis.ref_f_hz".into(), self.ref_f_hz.to_string()),
            ("analysis.ref_kind".into(), kind_str(self.ref_kind)),
            ("analysis.target_d_m".into(), self.target_d_m.to_string()),
            (
                "analysis.target_eps_real".into(),
                self.target_eps_real.to_string(),
            ),
            ("io.out_dir".into(), self.out_dir.clone()),
            (
                "io.trace_csv".into(),
                self.trace_csv.clone().unwrap_or_else(|| "none".into()),
            ),
            ("io.materials".into(), self.materials.as_manifest_value()),
        ];
        if self.medium_key == "constant" {
            if let Medium::Constant(eps) = self.medium {
                lines.push(("medium.eps_real".into(), eps.eps_real.to_string()));
                lines.push(("medium.eps_imag".into(), eps.eps_imag.to_string()));
            }
        }
        lines.sort();
        lines
    }
}

// ─── tests ───────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(text: &str) -> Result<Settings, ConfigError> {
        Settings::resolve(&RawConfig::parse(text).unwrap(), None)
    }

    #[test]
    fn minimal_sweep_config_resolves_with_defaults() {
        let s = resolve("experiment = sweep\n").unwrap();
        assert_eq!(s.experiment, Experiment::Sweep);
        assert_eq!(s.kind, GeometryKind::ParallelPlates);
        assert_eq!(s.w_m, 45e-6);
        assert_eq!(s.g_m, 10e-6);
        assert_eq!(s.freqs_hz, vec![1e7, 1e8, 1e9, 1e10]);
        assert!(s.diagnostics().is_empty());
        // square 40 µm channel at 10 µL/min: centerline 2 × mean
        assert!((s.velocity_m_s - 0.2083333333333333).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = resolve("experiment = sweep\ngeometry.gap_m = 1e-5\n").unwrap_err();
        assert!(err.message.contains("geometry.gap_m"));
    }

    #[test]
    fn artifact_namespace_ignored_on_input() {
        let s = resolve("experiment = sweep\nartifact.sweep.csv.sha256 = abc\n").unwrap();
        assert_eq!(s.experiment, Experiment::Sweep);
    }

    #[test]
    fn zero_gap_diagnosed_by_key() {
        let s = resolve("experiment = field_map\ngeometry.g_m = 0\n").unwrap();
        let diags = s.diagnostics();
        assert!(diags.iter().any(|d| d.starts_with("geometry.g_m")));
    }

    #[test]
    fn out_of_band_frequency_diagnosed() {
        let s = resolve("experiment = sweep\nanalysis.freqs_hz = 1e7,2e10\n").unwrap();
        let diags = s.diagnostics();
        assert!(diags.iter().any(|d| d.contains("0.01-10 GHz")));
    }

    #[test]
    fn id_defaults_and_pairs_guard() {
        let s = resolve("experiment = field_map\ngeometry.kind = id\n").unwrap();
        assert_eq!((s.w_m, s.g_m, s.pairs), (15e-6, 15e-6, 3));
        let s = resolve("experiment = field_map\ngeometry.kind = id\ngeometry.pairs = 0\n").unwrap();
        assert!(s
            .diagnostics()
            .iter()
            .any(|d| d.starts_with("geometry.pairs")));
    }

    #[test]
    fn seed_override_wins() {
        let raw = RawConfig::parse("experiment = sweep\nseed = 9\n").unwrap();
        let s = Settings::resolve(&raw, Some(1234)).unwrap();
        assert_eq!(s.seed, 1234);
    }

    #[test]
    fn manifest_lines_round_trip() {
        let s = resolve("experiment = sweep\nparticle.radius_m = 4.25e-6\n").unwrap();
        let mut text = String::new();
        for (k, v) in s.manifest_lines() {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let s2 = resolve(&text).unwrap();
        assert_eq!(s2.radius_m, 4.25e-6);
        assert_eq!(s2.velocity_m_s, s.velocity_m_s);
        assert_eq!(s2.manifest_lines(), s.manifest_lines());
    }

    #[test]
    fn height_inside_exclusion_zone_diagnosed() {
        let s = resolve("experiment = transit\nparticle.height_m = 5e-8\nparticle.radius_m = 4e-8\n")
            .unwrap();
        assert!(s
            .diagnostics()
            .iter()
            .any(|d| d.starts_with("particle.height_m")));
    }
}
