//! Discrete-time receive chain: modulation, IF filtering, noise injection,
//! and lock-in quadrature demodulation to magnitude and phase.
//!
//! The RF up-conversion and the IFLO down-conversion are both modeled as
//! frequency-exact, so they cancel; the simulation runs from the IF node.
//! The sensed input amplitude-modulates the IF tone, white noise is added,
//! a band-pass holds the IF bandwidth, and a phase-referenced quadrature
//! product pair is low-passed to baseband.
//!
//! The heterodyne chain injects a second, independent white component for
//! the image band folded in at the IF mix. The homodyne reference is the
//! identical chain with the image branch removed, which keeps every filter
//! literally shared; the 3 dB gap between the two is then purely the image
//! noise folding, not a filter artifact.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::rng::{stream, DOMAIN_NOISE_DIRECT, DOMAIN_NOISE_IMAGE};
use crate::trace::Trace;

// ─────────────────────────── configuration ───────────────────────────

/// Receive-chain parameters. `noise_density_v_per_rthz` may be zero (noise
/// off) or within the hardware floor band [2e-9, 8e-9].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverConfig {
    pub carrier_freq_hz: f64,
    pub if_freq_hz: f64,
    pub if_bandwidth_hz: f64,
    pub lockin_lpf_hz: f64,
    pub noise_density_v_per_rthz: f64,
    pub sample_rate_hz: f64,
    pub shielding_rejection_db: f64,
    pub phase_offset_rad: f64,
}

impl ReceiverConfig {
    /// Hardware-scale defaults: 10 MHz IF in a 50 MHz sample stream.
    pub fn full_scale() -> Self {
        Self {
            carrier_freq_hz: 1e9,
            if_freq_hz: 1e7,
            if_bandwidth_hz: 3e3,
            lockin_lpf_hz: 1.5e3,
            noise_density_v_per_rthz: 5e-9,
            sample_rate_hz: 5e7,
            shielding_rejection_db: 40.0,
            phase_offset_rad: 0.0,
        }
    }

    /// Scaled-down IF for fast simulation: identical bandwidths, 10 kHz IF
    /// in a 50 kHz stream.
    pub fn desk_scale() -> Self {
        Self {
            if_freq_hz: 1e4,
            sample_rate_hz: 5e4,
            ..Self::full_scale()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool, &'static str); 5] = [
            (
                "carrier_freq_hz",
                self.carrier_freq_hz,
                self.carrier_freq_hz.is_finite() && self.carrier_freq_hz > 0.0,
                "finite and > 0",
            ),
            (
                "if_freq_hz",
                self.if_freq_hz,
                self.if_freq_hz.is_finite() && self.if_freq_hz > 0.0,
                "finite and > 0",
            ),
            (
                "if_bandwidth_hz",
                self.if_bandwidth_hz,
                self.if_bandwidth_hz > 0.0 && self.if_bandwidth_hz < self.if_freq_hz,
                "in (0, if_freq)",
            ),
            (
                "sample_rate_hz",
                self.sample_rate_hz,
                self.sample_rate_hz > 4.0 * self.if_freq_hz,
                "> 4 x if_freq",
            ),
            (
                "shielding_rejection_db",
                self.shielding_rejection_db,
                self.shielding_rejection_db.is_finite() && self.shielding_rejection_db >= 0.0,
                ">= 0",
            ),
        ];
        for (name, value, ok, expected) in checks {
            if !ok {
                return Err(Error::Domain {
                    name,
                    value,
                    expected,
                });
            }
        }
        let nyq = self.sample_rate_hz / 2.0;
        if self.if_freq_hz + self.if_bandwidth_hz / 2.0 >= nyq {
            return Err(Error::Domain {
                name: "if_bandwidth_hz",
                value: self.if_bandwidth_hz,
                expected: "if_freq + bw/2 below Nyquist",
            });
        }
        if !(self.lockin_lpf_hz > 0.0 && self.lockin_lpf_hz < nyq) {
            return Err(Error::Domain {
                name: "lockin_lpf_hz",
                value: self.lockin_lpf_hz,
                expected: "in (0, Nyquist)",
            });
        }
        let d = self.noise_density_v_per_rthz;
        if !(d == 0.0 || (2e-9..=8e-9).contains(&d)) {
            return Err(Error::Domain {
                name: "noise_density_v_per_rthz",
                value: d,
                expected: "0 (off) or within [2e-9, 8e-9]",
            });
        }
        if !self.phase_offset_rad.is_finite() {
            return Err(Error::Domain {
                name: "phase_offset_rad",
                value: self.phase_offset_rad,
                expected: "finite",
            });
        }
        Ok(())
    }

    /// Amplitude factor for the shielding rejection.
    pub fn shielding_factor(&self) -> f64 {
        10f64.powf(-self.shielding_rejection_db / 20.0)
    }
}

/// Interference scaled by the enclosure rejection before it enters the chain.
pub fn shielding_attenuation(interferer: &Trace, cfg: &ReceiverConfig) -> Trace {
    let k = cfg.shielding_factor();
    Trace {
        fs_hz: interferer.fs_hz,
        samples: interferer.samples.iter().map(|s| s * k).collect(),
    }
}

// ─────────────────────────── filters ───────────────────────────

/// Direct-form II transposed biquad section.
#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
    s1: f64,
    s2: f64,
}

impl Biquad {
    fn new(b: [f64; 3], a1: f64, a2: f64) -> Self {
        Self {
            b0: b[0],
            b1: b[1],
            b2: b[2],
            a1,
            a2,
            s1: 0.0,
            s2: 0.0,
        }
    }

    #[inline]
    fn step(&mut self, x: f64) -> f64 {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    fn response(&self, theta: f64) -> Complex64 {
        let z1 = Complex64::new(0.0, -theta).exp();
        let z2 = z1 * z1;
        (self.b0 + self.b1 * z1 + self.b2 * z2) / (1.0 + self.a1 * z1 + self.a2 * z2)
    }
}

#[derive(Debug, Clone)]
struct Cascade {
    stages: Vec<Biquad>,
}

impl Cascade {
    #[inline]
    fn step(&mut self, x: f64) -> f64 {
        self.stages.iter_mut().fold(x, |v, s| s.step(v))
    }

    fn response(&self, theta: f64) -> Complex64 {
        self.stages
            .iter()
            .map(|s| s.response(theta))
            .product()
    }
}

/// Fourth-order Butterworth band-pass by bilinear transform of the warped
/// analog prototype; unity gain at the warped center frequency.
fn design_bandpass(center_hz: f64, bandwidth_hz: f64, fs_hz: f64) -> Result<Cascade> {
    let fs2 = 2.0 * fs_hz;
    let warp = |f: f64| fs2 * (PI * f / fs_hz).tan();
    // center warped directly so the passband peak and zero-phase point land
    // exactly on the digital carrier; edges warped for the width
    let w0 = warp(center_hz);
    let bw = warp(center_hz + bandwidth_hz / 2.0) - warp(center_hz - bandwidth_hz / 2.0);
    // second-order low-pass prototype pole in the upper half plane
    let proto = Complex64::from_polar(1.0, 3.0 * PI / 4.0);
    let pb = proto * bw;
    let disc = (pb * pb - 4.0 * w0 * w0).sqrt();
    let mut stages = Vec::with_capacity(2);
    for s_pole in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
        let zp = (fs2 + s_pole) / (fs2 - s_pole);
        if zp.norm() >= 1.0 {
            return Err(Error::FilterDesign {
                what: "band-pass pole outside the unit circle",
            });
        }
        stages.push(Biquad::new([1.0, 0.0, -1.0], -2.0 * zp.re, zp.norm_sqr()));
    }
    let mut cascade = Cascade { stages };
    let theta0 = 2.0 * (w0 / fs2).atan();
    let gain = cascade.response(theta0).norm();
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::FilterDesign {
            what: "band-pass center response vanished",
        });
    }
    let first = &mut cascade.stages[0];
    first.b0 /= gain;
    first.b1 /= gain;
    first.b2 /= gain;
    Ok(cascade)
}

/// Fourth-order Butterworth low-pass as two standard biquad sections.
fn design_lowpass(cutoff_hz: f64, fs_hz: f64) -> Result<Cascade> {
    if !(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0) {
        return Err(Error::FilterDesign {
            what: "low-pass cutoff outside (0, Nyquist)",
        });
    }
    let w = 2.0 * PI * cutoff_hz / fs_hz;
    let (sw, cw) = (w.sin(), w.cos());
    let stages = [0.541_196_100_146_197, 1.306_562_964_876_376_5]
        .iter()
        .map(|q| {
            let alpha = sw / (2.0 * q);
            let a0 = 1.0 + alpha;
            Biquad::new(
                [
                    (1.0 - cw) / (2.0 * a0),
                    (1.0 - cw) / a0,
                    (1.0 - cw) / (2.0 * a0),
                ],
                -2.0 * cw / a0,
                (1.0 - alpha) / a0,
            )
        })
        .collect();
    Ok(Cascade { stages })
}

// ─────────────────────────── demodulation ───────────────────────────

/// Lock-in output: magnitude and phase traces on the input clock.
#[derive(Debug, Clone)]
pub struct DemodOutput {
    pub magnitude_trace: Trace,
    pub phase_trace: Trace,
}

impl DemodOutput {
    /// CSV with header `t_s,mag_v,phase_rad`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,mag_v,phase_rad\n");
        let fs = self.magnitude_trace.fs_hz;
        for (i, (m, p)) in self
            .magnitude_trace
            .samples
            .iter()
            .zip(&self.phase_trace.samples)
            .enumerate()
        {
            out.push_str(&format!("{},{},{}\n", i as f64 / fs, m, p));
        }
        out
    }
}

fn run_chain(input: &Trace, cfg: &ReceiverConfig, seed: u64, image_branch: bool) -> Result<DemodOutput> {
    cfg.validate()?;
    let fs = cfg.sample_rate_hz;
    if (input.fs_hz - fs).abs() > 1e-9 * fs {
        return Err(Error::SampleRateMismatch {
            input_hz: input.fs_hz,
            expected_hz: fs,
        });
    }
    let mut bpf = design_bandpass(cfg.if_freq_hz, cfg.if_bandwidth_hz, fs)?;
    let mut lpf_i = design_lowpass(cfg.lockin_lpf_hz, fs)?;
    let mut lpf_q = lpf_i.clone();

    let sigma = cfg.noise_density_v_per_rthz * (fs / 2.0).sqrt();
    let mut rng_direct = stream(seed, DOMAIN_NOISE_DIRECT);
    let mut rng_image = stream(seed, DOMAIN_NOISE_IMAGE);

    let ratio = cfg.if_freq_hz / fs;
    let phi = cfg.phase_offset_rad;
    let n = input.len();
    let mut mag = Vec::with_capacity(n);
    let mut phase = Vec::with_capacity(n);
    for (i, &s) in input.samples.iter().enumerate() {
        let frac = (i as f64 * ratio).fract();
        let theta = 2.0 * PI * frac;
        let mut y = s * theta.cos();
        if sigma > 0.0 {
            let n1: f64 = StandardNormal.sample(&mut rng_direct);
            y += sigma * n1;
            if image_branch {
                let n2: f64 = StandardNormal.sample(&mut rng_image);
                y += sigma * n2;
            }
        }
        let y = bpf.step(y);
        let i_bb = lpf_i.step(2.0 * y * (theta + phi).cos());
        let q_bb = lpf_q.step(-2.0 * y * (theta + phi).sin());
        mag.push(i_bb.hypot(q_bb));
        phase.push(q_bb.atan2(i_bb));
    }
    Ok(DemodOutput {
        magnitude_trace: Trace::new(fs, mag)?,
        phase_trace: Trace::new(fs, phase)?,
    })
}

/// Full chain with the image-band noise component folded in at the IF mix.
pub fn heterodyne_chain(input: &Trace, cfg: &ReceiverConfig, seed: u64) -> Result<DemodOutput> {
    run_chain(input, cfg, seed, true)
}

/// Image-free reference chain sharing every filter with the heterodyne path.
pub fn homodyne_chain(input: &Trace, cfg: &ReceiverConfig, seed: u64) -> Result<DemodOutput> {
    run_chain(input, cfg, seed, false)
}

// ─────────────────────────── tests ───────────────────────────
