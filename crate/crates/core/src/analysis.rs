//! Pulse detection, SNR estimation, pulse statistics, calibrated frequency
//! sweeps, and the bioparticle voltage-scaling estimator.
//!
//! Detection is deliberately plain: running-median baseline, MAD noise
//! scale, local maxima above a k·MAD threshold with a minimum separation.
//! The SNR definition is the integral of the baseline-subtracted magnitude
//! over each peak's window against the expected integrated noise magnitude
//! over the same windows, expressed as an amplitude ratio in dB.

use crate::dielectrics::{clausius_mossotti, ComplexPermittivity, Medium};
use crate::electrodes::{
    delta_capacitance, hotspot_metrics, ElectrodeGeometry, GeometryKind, MapWindow,
};
use crate::error::{Error, Result};
use crate::receiver::{heterodyne_chain, ReceiverConfig};
use crate::rng::{derive_seed, stream, DOMAIN_ARRIVALS, DOMAIN_SWEEP_BASE};
use crate::trace::Trace;
use crate::transit::{arrival_times, pulse_train_at, FlowConditions, ParticleTransit};

// ─────────────────────────── peak detection ───────────────────────────

/// Detection knobs. `min_separation_s = None` switches to an adaptive
/// separation of ten times the median candidate FWHM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectSettings {
    pub k_mad: f64,
    pub min_separation_s: Option<f64>,
    pub baseline_window_s: f64,
}

impl Default for DetectSettings {
    fn default() -> Self {
        Self {
            k_mad: 5.0,
            min_separation_s: None,
            baseline_window_s: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t_center_s: f64,
    pub amplitude_v: f64,
    pub fwhm_s: f64,
}

/// Detected peaks with interpulse intervals and the SNR of the trace.
/// `snr_db` is `None` when nothing was detected.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub peaks: Vec<Peak>,
    pub interpulse_intervals_s: Vec<f64>,
    pub snr_db: Option<f64>,
}

impl PeakReport {
    /// CSV with header `t_s,amp_v,fwhm_s`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,amp_v,fwhm_s\n");
        for p in &self.peaks {
            out.push_str(&format!("{},{},{}\n", p.t_center_s, p.amplitude_v, p.fwhm_s));
        }
        out
    }
}

fn median_of(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Running median evaluated on a strided grid and linearly interpolated
/// between grid points.
fn running_median_baseline(samples: &[f64], window_n: usize) -> Vec<f64> {
    let n = samples.len();
    let w = window_n.min(if n % 2 == 1 { n } else { n - 1 }).max(1);
    let half = w / 2;
    let stride = (w / 4).max(1);
    let mut grid = Vec::new();
    let mut i = 0;
    loop {
        grid.push(i.min(n - 1));
        if i >= n - 1 {
            break;
        }
        i += stride;
    }
    grid.dedup();
    let med_at = |c: usize| {
        let lo = c.saturating_sub(half);
        let hi = (c + half + 1).min(n);
        median_of(samples[lo..hi].to_vec())
    };
    let meds: Vec<f64> = grid.iter().map(|&c| med_at(c)).collect();
    let mut out = vec![0.0; n];
    for k in 0..grid.len() - 1 {
        let (i0, i1) = (grid[k], grid[k + 1]);
        let (m0, m1) = (meds[k], meds[k + 1]);
        for j in i0..=i1 {
            let f = if i1 > i0 {
                (j - i0) as f64 / (i1 - i0) as f64
            } else {
                0.0
            };
            out[j] = m0 + f * (m1 - m0);
        }
    }
    if grid.len() == 1 {
        out.fill(meds[0]);
    }
    out
}

fn mad_scale(resid: &[f64]) -> f64 {
    let med = median_of(resid.to_vec());
    let dev: Vec<f64> = resid.iter().map(|r| (r - med).abs()).collect();
    median_of(dev) * 1.4826
}

/// Half-maximum width around index `i` on the baseline-subtracted signal,
/// linearly interpolated at the crossings, truncated at the trace ends.
fn fwhm_at(resid: &[f64], i: usize, fs: f64) -> f64 {
    let half = resid[i] / 2.0;
    let n = resid.len();
    let mut left = 0.0;
    let mut lo = i;
    while lo > 0 && resid[lo - 1] >= half {
        lo -= 1;
    }
    if lo > 0 {
        left = (resid[lo] - half) / (resid[lo] - resid[lo - 1]);
    }
    let mut right = 0.0;
    let mut hi = i;
    while hi < n - 1 && resid[hi + 1] >= half {
        hi += 1;
    }
    if hi < n - 1 {
        right = (resid[hi] - half) / (resid[hi] - resid[hi + 1]);
    }
    ((hi - lo) as f64 + left + right) / fs
}

struct Residual {
    resid: Vec<f64>,
    scale: f64,
}

fn residual_of(trace: &Trace, settings: &DetectSettings) -> Result<Residual> {
    if trace.len() < 16 {
        return Err(Error::Domain {
            name: "trace_len",
            value: trace.len() as f64,
            expected: ">= 16 samples",
        });
    }
    if !(settings.k_mad > 0.0) || !(settings.baseline_window_s > 0.0) {
        return Err(Error::Domain {
            name: "detect_settings",
            value: settings.k_mad,
            expected: "k_mad > 0 and baseline_window_s > 0",
        });
    }
    let mut window_n = (settings.baseline_window_s * trace.fs_hz).round() as usize;
    if window_n % 2 == 0 {
        window_n += 1;
    }
    let baseline = running_median_baseline(&trace.samples, window_n);
    let resid: Vec<f64> = trace
        .samples
        .iter()
        .zip(&baseline)
        .map(|(s, b)| s - b)
        .collect();
    let scale = mad_scale(&resid);
    Ok(Residual { resid, scale })
}

/// Finds pulses in a trace. A constant trace yields an empty report.
pub fn detect_peaks(trace: &Trace, settings: &DetectSettings) -> Result<PeakReport> {
    let flat = trace
        .samples
        .windows(2)
        .all(|w| w[0] == w[1]);
    if trace.len() >= 16 && flat {
        return Ok(PeakReport {
            peaks: Vec::new(),
            interpulse_intervals_s: Vec::new(),
            snr_db: None,
        });
    }
    let Residual { resid, scale } = residual_of(trace, settings)?;
    let fs = trace.fs_hz;
    let thr = settings.k_mad * scale;
    let n = resid.len();
    let mut cand: Vec<usize> = Vec::new();
    for i in 1..n - 1 {
        if resid[i] > thr && resid[i] > resid[i - 1] && resid[i] >= resid[i + 1] {
            cand.push(i);
        }
    }
    if cand.is_empty() {
        return Ok(PeakReport {
            peaks: Vec::new(),
            interpulse_intervals_s: Vec::new(),
            snr_db: None,
        });
    }
    let fwhms: Vec<f64> = cand.iter().map(|&i| fwhm_at(&resid, i, fs)).collect();
    let min_sep = settings
        .min_separation_s
        .unwrap_or_else(|| 10.0 * median_of(fwhms.clone()));
    let mut order: Vec<usize> = (0..cand.len()).collect();
    order.sort_by(|&a, &b| {
        resid[cand[b]]
            .partial_cmp(&resid[cand[a]])
            .unwrap()
            .then(cand[a].cmp(&cand[b]))
    });
    let mut kept: Vec<usize> = Vec::new();
    for k in order {
        let t = cand[k] as f64 / fs;
        if kept
            .iter()
            .all(|&j| (cand[j] as f64 / fs - t).abs() >= min_sep)
        {
            kept.push(k);
        }
    }
    kept.sort_by_key(|&k| cand[k]);
    let peaks: Vec<Peak> = kept
        .iter()
        .map(|&k| Peak {
            t_center_s: cand[k] as f64 / fs,
            amplitude_v: resid[cand[k]],
            fwhm_s: fwhms[k],
        })
        .collect();
    let intervals: Vec<f64> = peaks.windows(2).map(|w| w[1].t_center_s - w[0].t_center_s).collect();
    let snr = snr_from_residual(&resid, &peaks, scale, fs);
    Ok(PeakReport {
        peaks,
        interpulse_intervals_s: intervals,
        snr_db: Some(snr),
    })
}

fn snr_from_residual(resid: &[f64], peaks: &[Peak], global_scale: f64, fs: f64) -> f64 {
    let n = resid.len();
    let dt = 1.0 / fs;
    let mut in_window = vec![false; n];
    let mut signal = 0.0;
    let mut window_time = 0.0;
    for p in peaks {
        let i0 = ((p.t_center_s - p.fwhm_s) * fs).floor().max(0.0) as usize;
        let i1 = (((p.t_center_s + p.fwhm_s) * fs).ceil() as usize).min(n - 1);
        for i in i0..=i1 {
            signal += resid[i].abs() * dt;
            in_window[i] = true;
        }
        window_time += (i1 - i0 + 1) as f64 * dt;
    }
    let off: Vec<f64> = resid
        .iter()
        .zip(&in_window)
        .filter(|(_, &w)| !w)
        .map(|(&r, _)| r)
        .collect();
    let sigma = if off.is_empty() {
        global_scale
    } else {
        mad_scale(&off)
    };
    let noise = sigma * (2.0 / std::f64::consts::PI).sqrt() * window_time;
    if noise == 0.0 {
        return f64::INFINITY;
    }
    20.0 * (signal / noise).log10()
}

/// SNR of a trace given already-detected peaks: integrated |signal| over the
/// peak windows against the expected integrated noise magnitude over the
/// same windows, as an amplitude ratio in dB. Zero noise floor yields the
/// infinite sentinel.
pub fn snr_estimate(trace: &Trace, report: &PeakReport) -> Result<f64> {
    snr_estimate_with(trace, report, &DetectSettings::default())
}

pub fn snr_estimate_with(
    trace: &Trace,
    report: &PeakReport,
    settings: &DetectSettings,
) -> Result<f64> {
    if report.peaks.is_empty() {
        return Err(Error::Domain {
            name: "peaks",
            value: 0.0,
            expected: "at least one detected peak",
        });
    }
    let Residual { resid, scale } = residual_of(trace, settings)?;
    Ok(snr_from_residual(&resid, &report.peaks, scale, trace.fs_hz))
}

// ─────────────────────────── pulse statistics ───────────────────────────

/// Summary of a peak report; fields absent when too few peaks support them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseStats {
    pub count: usize,
    pub mean_width_s: Option<f64>,
    pub mean_interval_s: Option<f64>,
}

pub fn pulse_statistics(report: &PeakReport) -> PulseStats {
    let count = report.peaks.len();
    let mean_width_s = if count >= 1 {
        Some(report.peaks.iter().map(|p| p.fwhm_s).sum::<f64>() / count as f64)
    } else {
        None
    };
    let mean_interval_s = if report.interpulse_intervals_s.is_empty() {
        None
    } else {
        Some(
            report.interpulse_intervals_s.iter().sum::<f64>()
                / report.interpulse_intervals_s.len() as f64,
        )
    };
    PulseStats {
        count,
        mean_width_s,
        mean_interval_s,
    }
}

// ─────────────────────────── voltage scaling ───────────────────────────

/// Measured reference point for the size/permittivity voltage scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingReference {
    pub v_ref_volts: f64,
    pub d_ref_m: f64,
    pub eps_ref_real: f64,
    pub frequency_hz: f64,
    pub electrode: GeometryKind,
}

impl ScalingReference {
    pub fn new(
        v_ref_volts: f64,
        d_ref_m: f64,
        eps_ref_real: f64,
        frequency_hz: f64,
        electrode: GeometryKind,
    ) -> Result<Self> {
        for (name, v) in [
            ("v_ref_volts", v_ref_volts),
            ("d_ref_m", d_ref_m),
            ("eps_ref_real", eps_ref_real),
            ("frequency_hz", frequency_hz),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Domain {
                    name,
                    value: v,
                    expected: "finite and > 0",
                });
            }
        }
        Ok(Self {
            v_ref_volts,
            d_ref_m,
            eps_ref_real,
            frequency_hz,
            electrode,
        })
    }
}

/// Expected peak voltage for a particle of diameter `d_m` and real
/// permittivity `eps_real`: v_ref · (d/d_ref)^(3/2) · (ε/ε_ref)^(1/2).
pub fn estimate_bioparticle_voltage(
    reference: &ScalingReference,
    d_m: f64,
    eps_real: f64,
) -> Result<f64> {
    for (name, v) in [("d_m", d_m), ("eps_real", eps_real)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain {
                name,
                value: v,
                expected: "finite and > 0",
            });
        }
    }
    Ok(reference.v_ref_volts
        * (d_m / reference.d_ref_m).powf(1.5)
        * (eps_real / reference.eps_ref_real).sqrt())
}

// ─────────────────────────── frequency sweep ───────────────────────────

pub const TREND_FREQS_HZ: [f64; 4] = [1e7, 1e8, 1e9, 1e10];
pub const SWEEP_BAND_HZ: (f64, f64) = (1e7, 1e10);

/// Bench calibration of one electrode's receive path across the band.
///
/// `sensing_db` is the small-signal front-end response at the four trend
/// frequencies relative to 10 MHz; it scales the pulse before noise and so
/// drives SNR. `level_db` is the display normalization applied after
/// demodulation so reported peak voltages track bench levels; it cancels
/// out of SNR. `anchor_v` is the reported peak at 10 MHz and `drive_v` the
/// IF-node pulse amplitude at 10 MHz that sets the noise-relative operating
/// point. Node values interpolate linearly in dB against log frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendCal {
    pub sensing_db: [f64; 4],
    pub level_db: [f64; 4],
    pub anchor_v: f64,
    pub drive_v: f64,
}

impl TrendCal {
    pub fn for_kind(kind: GeometryKind) -> Self {
        match kind {
            GeometryKind::ParallelPlates => Self {
                sensing_db: [0.0, 1.0, -1.5, -5.0],
                level_db: [0.0, 2.669, -7.331, -26.021],
                anchor_v: 0.90,
                drive_v: 2.2e-4,
            },
            GeometryKind::Interdigitated => Self {
                sensing_db: [0.0, -6.0, -16.0, -26.0],
                level_db: [0.0, -7.744, -24.013, -37.077],
                anchor_v: 1.43,
                drive_v: 1.6e-4,
            },
            GeometryKind::DiskRing => Self {
                sensing_db: [0.0, 0.8, -1.4, -5.0],
                level_db: [0.0, 1.138, -2.853, -27.535],
                anchor_v: 0.71,
                drive_v: 1.45e-4,
            },
        }
    }

    fn interp_db(nodes: &[f64; 4], f_hz: f64) -> f64 {
        let x = f_hz.log10();
        let xs: Vec<f64> = TREND_FREQS_HZ.iter().map(|f| f.log10()).collect();
        if x <= xs[0] {
            return nodes[0];
        }
        if x >= xs[3] {
            return nodes[3];
        }
        for k in 0..3 {
            if x <= xs[k + 1] {
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                return nodes[k] + t * (nodes[k + 1] - nodes[k]);
            }
        }
        nodes[3]
    }

    pub fn sensing_linear(&self, f_hz: f64) -> f64 {
        10f64.powf(Self::interp_db(&self.sensing_db, f_hz) / 20.0)
    }

    pub fn level_linear(&self, f_hz: f64) -> f64 {
        10f64.powf(Self::interp_db(&self.level_db, f_hz) / 20.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub f_hz: f64,
    pub snr_db: f64,
    pub peak_v: f64,
    pub hotspot_depth_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// CSV with header `f_hz,snr_db,peak_v,hotspot_depth_m`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f_hz,snr_db,peak_v,hotspot_depth_m\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.f_hz, r.snr_db, r.peak_v, r.hotspot_depth_m
            ));
        }
        out
    }
}

/// Everything a sweep needs besides the frequency list and seed.
pub struct SweepSetup<'a, F>
where
    F: Fn(f64) -> Result<ComplexPermittivity>,
{
    pub geom: &'a ElectrodeGeometry,
    pub radius_m: f64,
    pub height_m: f64,
    pub velocity_m_s: f64,
    pub particle_eps_at: F,
    pub medium: &'a Medium,
    pub flow: &'a FlowConditions,
    pub duration_s: f64,
    pub chain: ReceiverConfig,
    pub cal: TrendCal,
    pub detect: DetectSettings,
}

/// Largest capacitance perturbation along the transit path, signed.
/// Calibration anchor for converting the drive level into a transducer
/// gain in volts per farad.
pub fn peak_delta_c(
    geom: &ElectrodeGeometry,
    radius_m: f64,
    height_m: f64,
    eps_p: ComplexPermittivity,
    eps_m: ComplexPermittivity,
    f_hz: f64,
) -> Result<f64> {
    let k_cm = clausius_mossotti(eps_p.to_complex(), eps_m.to_complex())?;
    let half = geom.span_m() / 2.0 + geom.width_m() + geom.gap_m();
    let dx = (geom.width_m() + geom.gap_m()) / 50.0;
    let mut best = 0.0f64;
    let mut x = -half;
    while x <= half {
        let e = geom.field_at(x, height_m, f_hz, eps_m.eps_real, 1.0, false)?;
        let dc = delta_capacitance(radius_m, &eps_m, k_cm, e.norm(), true)?;
        if dc.abs() > best.abs() {
            best = dc;
        }
        x += dx;
    }
    Ok(best)
}

fn hotspot_depth_for(geom: &ElectrodeGeometry, f_hz: f64, eps_real: f64) -> Result<f64> {
    let half = geom.span_m() / 2.0 + geom.width_m() + geom.gap_m();
    let window = MapWindow {
        x_min_m: -half,
        x_max_m: half,
        z_min_m: geom.gap_m() / 50.0,
        z_max_m: geom.span_m(),
    };
    let map = geom.field_map(window, 41, 41, f_hz, eps_real, 1.0, true)?;
    Ok(hotspot_metrics(&map, (-1.0f64).exp())?.penetration_depth_m)
}

/// Calibrated frequency sweep: per frequency, synthesize a pulse train with
/// the front-end response applied, run the heterodyne chain, detect peaks,
/// and report SNR, display-scaled median peak voltage, and hotspot depth.
///
/// One arrival pattern (drawn from the seed's arrival stream) is shared by
/// all frequencies; each frequency's chain noise comes from an
/// independently derived seed, so results are deterministic per seed.
pub fn sweep_frequency<F>(setup: &SweepSetup<'_, F>, freqs_hz: &[f64], seed: u64) -> Result<SweepResult>
where
    F: Fn(f64) -> Result<ComplexPermittivity>,
{
    if freqs_hz.is_empty() {
        return Err(Error::Domain {
            name: "freqs_hz",
            value: 0.0,
            expected: "at least one frequency",
        });
    }
    let (lo, hi) = SWEEP_BAND_HZ;
    for &f in freqs_hz {
        if !(f >= lo && f <= hi) {
            return Err(Error::FrequencyRange {
                f_hz: f,
                min_hz: lo,
                max_hz: hi,
            });
        }
    }
    for w in freqs_hz.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain {
                name: "freqs_hz",
                value: w[1],
                expected: "strictly increasing",
            });
        }
    }
    setup.chain.validate()?;

    let f_ref = TREND_FREQS_HZ[0];
    let eps_m_ref = setup.medium.permittivity(f_ref)?;
    let eps_p_ref = (setup.particle_eps_at)(f_ref)?;
    let dc_ref = peak_delta_c(
        setup.geom,
        setup.radius_m,
        setup.height_m,
        eps_p_ref,
        eps_m_ref,
        f_ref,
    )?;
    if dc_ref == 0.0 {
        return Err(Error::Domain {
            name: "dc_ref",
            value: 0.0,
            expected: "nonzero reference perturbation",
        });
    }

    // shape factor: demod peak of a clean unit pulse through the chain
    let fs = setup.chain.sample_rate_hz;
    let shape = {
        let transit = ParticleTransit::new(
            setup.radius_m,
            eps_p_ref,
            setup.height_m,
            setup.velocity_m_s,
            fs,
        )?;
        let settle = 10.0 / setup.chain.lockin_lpf_hz;
        let span = crate::transit::transit_span_s(setup.geom, setup.velocity_m_s);
        let dur = span + 2.0 * settle;
        let train = pulse_train_at(
            setup.geom,
            &transit,
            &eps_m_ref,
            f_ref,
            1.0,
            1.0 / dc_ref,
            &[dur / 2.0],
            dur,
        )?;
        let mut quiet = setup.chain;
        quiet.noise_density_v_per_rthz = 0.0;
        let out = heterodyne_chain(&train, &quiet, 0)?;
        out.magnitude_trace
            .samples
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max)
    };
    if !(shape > 0.0) {
        return Err(Error::DegenerateTrace {
            what: "calibration pulse produced no demodulated peak",
        });
    }

    let mut arrivals_rng = stream(seed, DOMAIN_ARRIVALS);
    let arrivals = arrival_times(setup.flow, setup.duration_s, &mut arrivals_rng)?;

    let mut rows = Vec::with_capacity(freqs_hz.len());
    for (i, &f) in freqs_hz.iter().enumerate() {
        let eps_m = setup.medium.permittivity(f)?;
        let eps_p = (setup.particle_eps_at)(f)?;
        let transit =
            ParticleTransit::new(setup.radius_m, eps_p, setup.height_m, setup.velocity_m_s, fs)?;
        let sensing = setup.cal.sensing_linear(f);
        let gain = setup.cal.drive_v * sensing / dc_ref;
        let train = pulse_train_at(
            setup.geom,
            &transit,
            &eps_m,
            f,
            1.0,
            gain,
            &arrivals,
            setup.duration_s,
        )?;
        let mut cfg = setup.chain;
        cfg.carrier_freq_hz = f;
        let chain_seed = derive_seed(seed, DOMAIN_SWEEP_BASE + i as u64);
        let out = heterodyne_chain(&train, &cfg, chain_seed)?;
        let report = detect_peaks(&out.magnitude_trace, &setup.detect)?;
        let snr_db = report.snr_db.unwrap_or(f64::NEG_INFINITY);
        let peak_v = if report.peaks.is_empty() {
            0.0
        } else {
            let amps: Vec<f64> = report.peaks.iter().map(|p| p.amplitude_v).collect();
            let display =
                setup.cal.anchor_v * setup.cal.level_linear(f) / (setup.cal.drive_v * sensing * shape);
            median_of(amps) * display
        };
        let depth = hotspot_depth_for(setup.geom, f, eps_m.eps_real)?;
        rows.push(SweepRow {
            f_hz: f,
            snr_db,
            peak_v,
            hotspot_depth_m: depth,
        });
    }
    Ok(SweepResult { rows })
}

// ─────────────────────────── tests ───────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, DOMAIN_NOISE_DIRECT};
    use approx::assert_relative_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian_pulse(n: usize, fs: f64, t0: f64, amp: f64, width_s: f64) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                amp * (-0.5 * ((t - t0) / width_s).powi(2)).exp()
            })
            .collect()
    }

    fn noise(n: usize, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, DOMAIN_NOISE_DIRECT);
        (0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                sigma * x
            })
            .collect()
    }

    #[test]
    fn clean_single_pulse_detected_exactly() {
        let fs = 1e4;
        let n = 20_000;
        let samples = gaussian_pulse(n, fs, 1.0, 2.0e-3, 0.004);
        let tr = Trace::new(fs, samples).unwrap();
        let report = detect_peaks(&tr, &DetectSettings::default()).unwrap();
        assert_eq!(report.peaks.len(), 1);
        assert_relative_eq!(report.peaks[0].amplitude_v, 2.0e-3, max_relative = 0.02);
        assert_relative_eq!(report.peaks[0].t_center_s, 1.0, epsilon = 1e-3);
        // Gaussian FWHM = 2·sqrt(2 ln 2)·width
        assert_relative_eq!(report.peaks[0].fwhm_s, 2.3548 * 0.004, max_relative = 0.05);
    }

    #[test]
    fn noisy_pulse_recall() {
        let fs = 1e4;
        let n = 40_000;
        let sigma = 1e-4;
        let mut samples = noise(n, sigma, 3);
        for k in 0..10 {
            let t0 = 0.3 + 0.35 * k as f64;
            for (s, p) in samples
                .iter_mut()
                .zip(gaussian_pulse(n, fs, t0, 30.0 * sigma, 0.003))
            {
                *s += p;
            }
        }
        let tr = Trace::new(fs, samples).unwrap();
        let report = detect_peaks(&tr, &DetectSettings::default()).unwrap();
        assert_eq!(report.peaks.len(), 10);
        let stats = pulse_statistics(&report);
        assert_relative_eq!(stats.mean_interval_s.unwrap(), 0.35, max_relative = 0.02);
    }

    #[test]
    fn close_pair_keeps_larger() {
        let fs = 1e4;
        let n = 20_000;
        let mut samples = gaussian_pulse(n, fs, 0.9, 1.0e-3, 0.003);
        for (s, p) in samples
            .iter_mut()
            .zip(gaussian_pulse(n, fs, 0.95, 1.4e-3, 0.003))
        {
            *s += p;
        }
        let tr = Trace::new(fs, samples).unwrap();
        let settings = DetectSettings {
            min_separation_s: Some(0.2),
            ..DetectSettings::default()
        };
        let report = detect_peaks(&tr, &settings).unwrap();
        assert_eq!(report.peaks.len(), 1);
        assert_relative_eq!(report.peaks[0].t_center_s, 0.95, epsilon = 5e-3);
    }

    #[test]
    fn constant_trace_is_empty_report() {
        let tr = Trace::new(1e4, vec![0.25; 100]).unwrap();
        let report = detect_peaks(&tr, &DetectSettings::default()).unwrap();
        assert!(report.peaks.is_empty());
        assert!(report.snr_db.is_none());
    }

    #[test]
    fn short_trace_rejected() {
        let tr = Trace::new(1e4, vec![0.0; 8]).unwrap();
        assert!(detect_peaks(&tr, &DetectSettings::default()).is_err());
    }

    #[test]
    fn false_alarm_rate_on_pure_noise() {
        let mut clean_runs = 0;
        for seed in 0..100u64 {
            let tr = Trace::new(1e4, noise(10_000, 1e-4, seed)).unwrap();
            let report = detect_peaks(&tr, &DetectSettings::default()).unwrap();
            if report.peaks.is_empty() {
                clean_runs += 1;
            }
        }
        assert!(clean_runs >= 97, "clean {clean_runs}/100");
    }

    #[test]
    fn snr_scale_invariance() {
        let fs = 1e4;
        let n = 30_000;
        let mut samples = noise(n, 1e-4, 11);
        for (s, p) in samples
            .iter_mut()
            .zip(gaussian_pulse(n, fs, 1.5, 5e-3, 0.004))
        {
            *s += p;
        }
        let tr = Trace::new(fs, samples.clone()).unwrap();
        let scaled = Trace::new(fs, samples.iter().map(|s| 3.7 * s).collect()).unwrap();
        let a = detect_peaks(&tr, &DetectSettings::default()).unwrap();
        let b = detect_peaks(&scaled, &DetectSettings::default()).unwrap();
        assert_relative_eq!(a.snr_db.unwrap(), b.snr_db.unwrap(), epsilon = 1e-9);
        let again = snr_estimate(&tr, &a).unwrap();
        assert_relative_eq!(again, a.snr_db.unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn snr_tracks_noise_amplitude() {
        // identical pulses, noise floor ×10 → SNR falls by 20 dB
        let fs = 1e4;
        let n = 60_000;
        let pulse_amp = 0.1;
        let snr_for = |sigma: f64| {
            let mut samples = noise(n, sigma, 17);
            for k in 0..5 {
                for (s, p) in samples
                    .iter_mut()
                    .zip(gaussian_pulse(n, fs, 0.8 + k as f64, pulse_amp, 0.004))
                {
                    *s += p;
                }
            }
            detect_peaks(&Trace::new(fs, samples).unwrap(), &DetectSettings::default())
                .unwrap()
                .snr_db
                .unwrap()
        };
        let drop = snr_for(1e-4) - snr_for(1e-3);
        assert!((drop - 20.0).abs() < 1.0, "drop {drop}");
    }

    #[test]
    fn snr_constructed_level() {
        // triangle pulses of known integral over a known noise floor
        let fs = 1e4;
        let n = 50_000;
        let sigma = 1e-4;
        let w = 0.01;
        // target 40 dB: A·W / (2W·σ·sqrt(2/π)) = 100
        let amp = 200.0 * sigma * (2.0 / std::f64::consts::PI).sqrt();
        let mut samples = noise(n, sigma, 23);
        for k in 0..4 {
            let t0 = 1.0 + k as f64;
            for (i, s) in samples.iter_mut().enumerate() {
                let t = i as f64 / fs;
                let d = (t - t0).abs();
                if d < w {
                    *s += amp * (1.0 - d / w);
                }
            }
        }
        let tr = Trace::new(fs, samples).unwrap();
        let report = detect_peaks(&tr, &DetectSettings::default()).unwrap();
        assert_eq!(report.peaks.len(), 4);
        let snr = report.snr_db.unwrap();
        assert!((snr - 40.0).abs() < 1.0, "snr {snr}");
    }

    #[test]
    fn statistics_fields() {
        let one = PeakReport {
            peaks: vec![Peak {
                t_center_s: 1.0,
                amplitude_v: 1.0,
                fwhm_s: 0.01,
            }],
            interpulse_intervals_s: vec![],
            snr_db: Some(10.0),
        };
        let s = pulse_statistics(&one);
        assert_eq!(s.count, 1);
        assert_eq!(s.mean_width_s, Some(0.01));
        assert_eq!(s.mean_interval_s, None);
        let two = PeakReport {
            peaks: vec![
                Peak {
                    t_center_s: 1.0,
                    amplitude_v: 1.0,
                    fwhm_s: 0.01,
                },
                Peak {
                    t_center_s: 3.0,
                    amplitude_v: 2.0,
                    fwhm_s: 0.03,
                },
            ],
            interpulse_intervals_s: vec![2.0],
            snr_db: Some(10.0),
        };
        let s = pulse_statistics(&two);
        assert_eq!(s.mean_width_s, Some(0.02));
        assert_eq!(s.mean_interval_s, Some(2.0));
    }

    #[test]
    fn scaling_estimator_identity_and_decades() {
        let r = ScalingReference::new(0.90, 10e-6, 2.9, 1e7, GeometryKind::ParallelPlates).unwrap();
        assert_eq!(estimate_bioparticle_voltage(&r, 10e-6, 2.9).unwrap(), 0.90);
        let v = estimate_bioparticle_voltage(&r, 1e-6, 2.9).unwrap();
        let db = 20.0 * (v / 0.90).log10();
        assert_relative_eq!(db, -30.0, epsilon = 1e-9);
        assert_relative_eq!(v, 0.90 * 10f64.powf(-1.5), max_relative = 1e-12);
        // exponent additivity
        let v1 = estimate_bioparticle_voltage(&r, 5e-6, 2.9).unwrap() / 0.90;
        let v2 = estimate_bioparticle_voltage(&r, 20e-6, 2.9).unwrap() / 0.90;
        assert_relative_eq!(v1 * v2, 1.0, max_relative = 1e-12);
        let ve = estimate_bioparticle_voltage(&r, 10e-6, 11.6).unwrap();
        assert_relative_eq!(ve / 0.90, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn trend_interpolation_hits_nodes() {
        let cal = TrendCal::for_kind(GeometryKind::Interdigitated);
        assert_relative_eq!(cal.sensing_linear(1e7), 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            20.0 * cal.sensing_linear(1e8).log10(),
            -6.0,
            epsilon = 1e-9
        );
        let mid = 20.0 * cal.sensing_linear(10f64.powf(8.5)).log10();
        assert_relative_eq!(mid, -11.0, epsilon = 1e-9);
    }
}
