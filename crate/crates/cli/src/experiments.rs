//! Experiment execution: each experiment renders a set of named artifacts
//! from resolved settings. All randomness flows from the run seed through
//! the core stream-derivation scheme.

use crate::settings::{Experiment, MaterialsSource, ReceiverMode, Settings};
use cytowave_core::analysis::{
    detect_peaks, peak_delta_c, pulse_statistics, sweep_frequency, DetectSettings,
    ScalingReference, SweepSetup, TrendCal,
};
use cytowave_core::analysis::estimate_bioparticle_voltage;
use cytowave_core::dielectrics::MaterialTable;
use cytowave_core::electrodes::hotspot_metrics;
use cytowave_core::receiver::{heterodyne_chain, homodyne_chain};
use cytowave_core::rng::{stream, DOMAIN_ARRIVALS};
use cytowave_core::trace::Trace;
use cytowave_core::transit::{arrival_times, pulse_train_at, synthesize_pulse, ParticleTransit};
use std::path::Path;

/// Failure classes mapped onto process exit codes by the caller.
#[derive(Debug)]
pub enum RunError {
    /// exit 2: the configuration or a configured table/trace is malformed
    Config(String),
    /// exit 3: a numerical or domain error inside a module
    Numeric(String),
    /// exit 4: filesystem trouble
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(m) => write!(f, "numerical error: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn core_err(e: cytowave_core::Error) -> RunError {
    use cytowave_core::Error;
    match &e {
        Error::MaterialTable { .. } | Error::TraceFormat { .. } => RunError::Config(e.to_string()),
        _ => RunError::Numeric(e.to_string()),
    }
}

fn io_err(e: std::io::Error) -> RunError {
    RunError::Io(e.to_string())
}

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub notes: Vec<String>,
}

fn text_artifact(name: &str, text: String) -> Artifact {
    Artifact {
        name: name.to_string(),
        bytes: text.into_bytes(),
    }
}

fn load_materials(source: &MaterialsSource) -> Result<MaterialTable, RunError> {
    match source {
        MaterialsSource::Builtin => Ok(MaterialTable::builtin()),
        MaterialsSource::Path(p) => {
            let text = std::fs::read_to_string(Path::new(p)).map_err(io_err)?;
            MaterialTable::parse(&text).map_err(core_err)
        }
    }
}

fn detect_settings(s: &Settings) -> DetectSettings {
    DetectSettings {
        k_mad: s.k_mad,
        min_separation_s: s.min_separation_s,
        baseline_window_s: s.baseline_window_s,
    }
}

/// Transducer gain at the drive frequency for the configured particle and
/// path, in volts per farad at the receiver node.
fn node_gain(
    s: &Settings,
    table: &MaterialTable,
    f_hz: f64,
) -> Result<f64, RunError> {
    let geom = s.geometry().map_err(core_err)?;
    let cal = TrendCal::for_kind(s.kind);
    let eps_m = s.medium.permittivity(cal_anchor_hz()).map_err(core_err)?;
    let eps_p = table
        .permittivity(&s.material, cal_anchor_hz())
        .map_err(core_err)?;
    let dc_ref = peak_delta_c(&geom, s.radius_m, s.height_m, eps_p, eps_m, cal_anchor_hz())
        .map_err(core_err)?;
    if dc_ref == 0.0 {
        return Err(RunError::Numeric(
            "reference capacitance perturbation is zero".into(),
        ));
    }
    Ok(cal.drive_v * cal.sensing_linear(f_hz) / dc_ref)
}

fn cal_anchor_hz() -> f64 {
    cytowave_core::analysis::TREND_FREQS_HZ[0]
}

pub fn run(s: &Settings) -> Result<RunOutput, RunError> {
    match s.experiment {
        Experiment::FieldMap => field_map(s),
        Experiment::Hotspot => hotspot(s),
        Experiment::Transit => transit(s),
        Experiment::Detect => detect(s),
        Experiment::Sweep => sweep(s),
        Experiment::Estimate => estimate(s),
        Experiment::Materials => materials(s),
    }
}

fn computed_map(s: &Settings) -> Result<cytowave_core::electrodes::FieldMap, RunError> {
    let geom = s.geometry().map_err(core_err)?;
    let f = s.receiver.carrier_freq_hz;
    let eps_m = s.medium.permittivity(f).map_err(core_err)?;
    geom.field_map(
        s.map_window,
        s.map_nx,
        s.map_nz,
        f,
        eps_m.eps_real,
        s.v0_volts,
        s.retardation_on,
    )
    .map_err(core_err)
}

fn field_map(s: &Settings) -> Result<RunOutput, RunError> {
    let map = computed_map(s)?;
    let singular = map.samples().iter().filter(|c| c.singular).count();
    Ok(RunOutput {
        artifacts: vec![
            text_artifact("field_map.csv", map.to_csv()),
            Artifact {
                name: "field_map.pgm".into(),
                bytes: map.to_pgm(),
            },
        ],
        notes: vec![format!(
            "field map {}x{} cells, {singular} inside the edge exclusion zone",
            map.nx(),
            map.nz()
        )],
    })
}

fn hotspot(s: &Settings) -> Result<RunOutput, RunError> {
    let map = computed_map(s)?;
    let m = hotspot_metrics(&map, s.hotspot_threshold).map_err(core_err)?;
    let csv = format!(
        "penetration_depth_m,width_m,threshold_fraction\n{},{},{}\n",
        m.penetration_depth_m, m.width_m, m.threshold_fraction
    );
    Ok(RunOutput {
        artifacts: vec![text_artifact("hotspot.csv", csv)],
        notes: vec![format!(
            "hotspot depth {:.3e} m, width {:.3e} m at threshold {:.4}",
            m.penetration_depth_m, m.width_m, m.threshold_fraction
        )],
    })
}

fn transit(s: &Settings) -> Result<RunOutput, RunError> {
    let geom = s.geometry().map_err(core_err)?;
    let table = load_materials(&s.materials)?;
    let f = s.receiver.carrier_freq_hz;
    let eps_m = s.medium.permittivity(f).map_err(core_err)?;
    let eps_p = table.permittivity(&s.material, f).map_err(core_err)?;
    let particle = ParticleTransit::new(
        s.radius_m,
        eps_p,
        s.height_m,
        s.velocity_m_s,
        s.receiver.sample_rate_hz,
    )
    .map_err(core_err)?;
    let gain = node_gain(s, &table, f)?;
    let pulse = synthesize_pulse(&geom, &particle, &eps_m, f, s.v0_volts, gain)
        .map_err(core_err)?;
    let peak = pulse.samples.iter().cloned().fold(f64::MIN, f64::max);
    Ok(RunOutput {
        artifacts: vec![text_artifact("pulse.csv", pulse.to_csv())],
        notes: vec![format!(
            "single crossing: {} samples, span {:.3e} s, peak {:.3e} V",
            pulse.len(),
            pulse.duration_s(),
            peak
        )],
    })
}

fn detect(s: &Settings) -> Result<RunOutput, RunError> {
    let mut artifacts = Vec::new();
    let mut notes = Vec::new();
    let magnitude = match &s.trace_csv {
        Some(path) => {
            let text = std::fs::read_to_string(Path::new(path)).map_err(io_err)?;
            Trace::from_csv(&text).map_err(core_err)?
        }
        None => {
            let geom = s.geometry().map_err(core_err)?;
            let table = load_materials(&s.materials)?;
            let f = s.receiver.carrier_freq_hz;
            let eps_m = s.medium.permittivity(f).map_err(core_err)?;
            let eps_p = table.permittivity(&s.material, f).map_err(core_err)?;
            let particle = ParticleTransit::new(
                s.radius_m,
                eps_p,
                s.height_m,
                s.velocity_m_s,
                s.receiver.sample_rate_hz,
            )
            .map_err(core_err)?;
            let flow = s.flow().map_err(core_err)?;
            let mut rng = stream(s.seed, DOMAIN_ARRIVALS);
            let arrivals = arrival_times(&flow, s.duration_s, &mut rng).map_err(core_err)?;
            let gain = node_gain(s, &table, f)?;
            let train = pulse_train_at(
                &geom,
                &particle,
                &eps_m,
                f,
                s.v0_volts,
                gain,
                &arrivals,
                s.duration_s,
            )
            .map_err(core_err)?;
            let demod = match s.receiver_mode {
                ReceiverMode::Heterodyne => heterodyne_chain(&train, &s.receiver, s.seed),
                ReceiverMode::Homodyne => homodyne_chain(&train, &s.receiver, s.seed),
            }
            .map_err(core_err)?;
            notes.push(format!("{} arrivals synthesized", arrivals.len()));
            artifacts.push(text_artifact("demod.csv", demod.to_csv()));
            demod.magnitude_trace
        }
    };
    let report = detect_peaks(&magnitude, &detect_settings(s)).map_err(core_err)?;
    let stats = pulse_statistics(&report);
    notes.push(match report.snr_db {
        Some(snr) => format!("{} peaks, snr {:.2} dB", stats.count, snr),
        None => format!("{} peaks", stats.count),
    });
    if let Some(w) = stats.mean_width_s {
        notes.push(format!("mean width {w:.4e} s"));
    }
    artifacts.push(text_artifact("peaks.csv", report.to_csv()));
    Ok(RunOutput { artifacts, notes })
}

fn sweep(s: &Settings) -> Result<RunOutput, RunError> {
    let geom = s.geometry().map_err(core_err)?;
    let table = load_materials(&s.materials)?;
    let flow = s.flow().map_err(core_err)?;
    let setup = SweepSetup {
        geom: &geom,
        radius_m: s.radius_m,
        height_m: s.height_m,
        velocity_m_s: s.velocity_m_s,
        particle_eps_at: |f| table.permittivity(&s.material, f),
        medium: &s.medium,
        flow: &flow,
        duration_s: s.duration_s,
        chain: s.receiver,
        cal: TrendCal::for_kind(s.kind),
        detect: detect_settings(s),
    };
    let result = sweep_frequency(&setup, &s.freqs_hz, s.seed).map_err(core_err)?;
    let snr_span = result
        .rows
        .iter()
        .map(|r| r.snr_db)
        .fold(f64::MIN, f64::max)
        - result
            .rows
            .iter()
            .map(|r| r.snr_db)
            .fold(f64::MAX, f64::min);
    Ok(RunOutput {
        artifacts: vec![text_artifact("sweep.csv", result.to_csv())],
        notes: vec![format!(
            "{} frequencies, snr span {snr_span:.2} dB (max-min of snr_db)",
            result.rows.len()
        )],
    })
}

fn estimate(s: &Settings) -> Result<RunOutput, RunError> {
    let reference = ScalingReference::new(s.ref_v, s.ref_d_m, s.ref_eps_real, s.ref_f_hz, s.ref_kind)
        .map_err(core_err)?;
    let v = estimate_bioparticle_voltage(&reference, s.target_d_m, s.target_eps_real)
        .map_err(core_err)?;
    let csv = format!(
        "d_m,eps_real,v_est_v\n{},{},{}\n",
        s.target_d_m, s.target_eps_real, v
    );
    Ok(RunOutput {
        artifacts: vec![text_artifact("estimate.csv", csv)],
        notes: vec![format!(
            "estimated peak {v:.4e} V for d = {:.3e} m",
            s.target_d_m
        )],
    })
}

fn materials(s: &Settings) -> Result<RunOutput, RunError> {
    let table = load_materials(&s.materials)?;
    let mut csv = String::from("name,f_hz,eps_real,eps_imag\n");
    let mut names = table.names();
    names.sort_unstable();
    for name in &names {
        for (f, eps) in table.rows(name).map_err(core_err)? {
            csv.push_str(&format!("{name},{f},{},{}\n", eps.eps_real, eps.eps_imag));
        }
    }
    Ok(RunOutput {
        artifacts: vec![text_artifact("materials.csv", csv)],
        notes: vec![format!("{} materials", names.len())],
    })
}
