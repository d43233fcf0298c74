//! Particle transport through the sensing channel and pulse synthesis.
//!
//! A particle riding the flow at fixed height crosses the electrode span;
//! the induced capacitance perturbation traced along its path, scaled by the
//! transducer gain, is the raw sensing pulse. Arrivals are a homogeneous
//! Poisson process at the detected-event rate.

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::dielectrics::{clausius_mossotti, ComplexPermittivity};
use crate::electrodes::{delta_capacitance, ElectrodeGeometry};
use crate::error::{Error, Result};
use crate::trace::Trace;

// ─────────────────────────── channel and flow ───────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossSection {
    Square,
    Circular,
}

/// Microfluidic channel described by its hydraulic diameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec {
    pub hydraulic_diameter_m: f64,
    pub cross_section: CrossSection,
    pub centerline_height_m: f64,
}

impl ChannelSpec {
    pub fn new(
        hydraulic_diameter_m: f64,
        cross_section: CrossSection,
        centerline_height_m: f64,
    ) -> Result<Self> {
        if !hydraulic_diameter_m.is_finite() || hydraulic_diameter_m <= 0.0 {
            return Err(Error::Domain {
                name: "hydraulic_diameter_m",
                value: hydraulic_diameter_m,
                expected: "finite and > 0",
            });
        }
        if !centerline_height_m.is_finite()
            || centerline_height_m <= 0.0
            || centerline_height_m > hydraulic_diameter_m
        {
            return Err(Error::Domain {
                name: "centerline_height_m",
                value: centerline_height_m,
                expected: "in (0, hydraulic_diameter]",
            });
        }
        Ok(Self {
            hydraulic_diameter_m,
            cross_section,
            centerline_height_m,
        })
    }

    /// For a square duct the hydraulic diameter equals the side length.
    pub fn area_m2(&self) -> f64 {
        let d = self.hydraulic_diameter_m;
        match self.cross_section {
            CrossSection::Square => d * d,
            CrossSection::Circular => std::f64::consts::PI * d * d / 4.0,
        }
    }

    pub fn mean_velocity_m_s(&self, flow_rate_m3_s: f64) -> f64 {
        flow_rate_m3_s / self.area_m2()
    }

    /// Laminar profile peak: twice the mean.
    pub fn centerline_velocity_m_s(&self, flow_rate_m3_s: f64) -> f64 {
        2.0 * self.mean_velocity_m_s(flow_rate_m3_s)
    }
}

impl Default for ChannelSpec {
    /// 40 µm square duct, transit along the centerline.
    fn default() -> Self {
        Self {
            hydraulic_diameter_m: 40e-6,
            cross_section: CrossSection::Square,
            centerline_height_m: 20e-6,
        }
    }
}

/// Suspension feed: volumetric rate, particle concentration, and the
/// fraction of carried particles that actually crosses the sensing volume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConditions {
    pub flow_rate_m3_s: f64,
    pub concentration_per_m3: f64,
    pub detection_fraction: f64,
}

impl FlowConditions {
    pub fn new(
        flow_rate_m3_s: f64,
        concentration_per_m3: f64,
        detection_fraction: f64,
    ) -> Result<Self> {
        if !flow_rate_m3_s.is_finite() || flow_rate_m3_s <= 0.0 {
            return Err(Error::Domain {
                name: "flow_rate_m3_s",
                value: flow_rate_m3_s,
                expected: "finite and > 0",
            });
        }
        if !concentration_per_m3.is_finite() || concentration_per_m3 < 0.0 {
            return Err(Error::Domain {
                name: "concentration_per_m3",
                value: concentration_per_m3,
                expected: ">= 0",
            });
        }
        if !(detection_fraction > 0.0 && detection_fraction <= 1.0) {
            return Err(Error::Domain {
                name: "detection_fraction",
                value: detection_fraction,
                expected: "in (0, 1]",
            });
        }
        Ok(Self {
            flow_rate_m3_s,
            concentration_per_m3,
            detection_fraction,
        })
    }

    pub fn detection_rate_hz(&self) -> f64 {
        self.concentration_per_m3 * self.flow_rate_m3_s * self.detection_fraction
    }
}

impl Default for FlowConditions {
    /// 10 µL/min of a 1e11 /m³ suspension; sensing-volume fraction tuned for
    /// an interpulse interval near one second.
    fn default() -> Self {
        Self {
            flow_rate_m3_s: 1.666_666_666_666_666_7e-10,
            concentration_per_m3: 1e11,
            detection_fraction: 0.057,
        }
    }
}

/// Poisson arrival times over [0, duration): exponential gaps at the
/// detected-event rate. Zero concentration draws nothing.
pub fn arrival_times<R: Rng + ?Sized>(
    flow: &FlowConditions,
    duration_s: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !duration_s.is_finite() || duration_s < 0.0 {
        return Err(Error::Domain {
            name: "duration_s",
            value: duration_s,
            expected: "finite and >= 0",
        });
    }
    let rate = flow.detection_rate_hz();
    if rate == 0.0 {
        return Ok(Vec::new());
    }
    let exp = Exp::new(rate).map_err(|_| Error::Domain {
        name: "detection_rate_hz",
        value: rate,
        expected: "finite and > 0",
    })?;
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(rng);
        if t >= duration_s {
            break;
        }
        out.push(t);
    }
    Ok(out)
}

// ─────────────────────────── pulse synthesis ───────────────────────────

/// One particle crossing: size, dielectric identity, path height, speed,
/// and the output sampling rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleTransit {
    pub radius_m: f64,
    pub permittivity: ComplexPermittivity,
    pub height_m: f64,
    pub velocity_m_s: f64,
    pub sample_rate_hz: f64,
}

impl ParticleTransit {
    pub fn new(
        radius_m: f64,
        permittivity: ComplexPermittivity,
        height_m: f64,
        velocity_m_s: f64,
        sample_rate_hz: f64,
    ) -> Result<Self> {
        if !radius_m.is_finite() || radius_m <= 0.0 {
            return Err(Error::Domain {
                name: "radius_m",
                value: radius_m,
                expected: "finite and > 0",
            });
        }
        if !height_m.is_finite() || height_m < radius_m {
            return Err(Error::Domain {
                name: "height_m",
                value: height_m,
                expected: ">= radius_m",
            });
        }
        if !velocity_m_s.is_finite() || velocity_m_s <= 0.0 {
            return Err(Error::Domain {
                name: "velocity_m_s",
                value: velocity_m_s,
                expected: "finite and > 0",
            });
        }
        if !sample_rate_hz.is_finite() || sample_rate_hz <= 0.0 {
            return Err(Error::Domain {
                name: "sample_rate_hz",
                value: sample_rate_hz,
                expected: "finite and > 0",
            });
        }
        Ok(Self {
            radius_m,
            permittivity,
            height_m,
            velocity_m_s,
            sample_rate_hz,
        })
    }
}

/// Raw (un-coupled) sensed value with the particle centered at horizontal
/// offset x: transducer gain times the induced capacitance change.
fn sensed_at(
    geom: &ElectrodeGeometry,
    transit: &ParticleTransit,
    medium: &ComplexPermittivity,
    f_hz: f64,
    v0_volts: f64,
    gain_v_per_f: f64,
    x_m: f64,
) -> Result<f64> {
    let k_cm = clausius_mossotti(transit.permittivity.to_complex(), medium.to_complex())?;
    let e = geom.field_at(x_m, transit.height_m, f_hz, medium.eps_real, v0_volts, false)?;
    let dc = delta_capacitance(
        transit.radius_m,
        medium,
        k_cm,
        e.norm() / v0_volts.abs(),
        true,
    )?;
    Ok(gain_v_per_f * dc)
}

/// Transit span covering the electrode pattern with settling margin on both
/// sides, expressed in seconds at the transit velocity.
pub fn transit_span_s(geom: &ElectrodeGeometry, velocity_m_s: f64) -> f64 {
    let margin = 6.0 * (geom.width_m() + geom.gap_m());
    (geom.span_m() + margin) / velocity_m_s
}

/// Single-crossing sensing pulse, mean-removed, sampled at the transit rate.
///
/// The sample grid is symmetric about the crossing midpoint; the trajectory
/// is x(t) = v·(t − span/2) at fixed height. The path must clear the edge
/// exclusion radius (height above g/100).
pub fn synthesize_pulse(
    geom: &ElectrodeGeometry,
    transit: &ParticleTransit,
    medium: &ComplexPermittivity,
    f_hz: f64,
    v0_volts: f64,
    gain_v_per_f: f64,
) -> Result<Trace> {
    let span = transit_span_s(geom, transit.velocity_m_s);
    let fs = transit.sample_rate_hz;
    let n = (span * fs).floor() as usize + 1;
    let t_mid = (n - 1) as f64 / (2.0 * fs);
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let x = transit.velocity_m_s * (i as f64 / fs - t_mid);
        samples.push(sensed_at(geom, transit, medium, f_hz, v0_volts, gain_v_per_f, x)?);
    }
    Ok(Trace::new(fs, samples)?.ac_coupled())
}

/// Superimposes one crossing per arrival time onto a trace of the given
/// duration, then removes the global mean. Pulse shapes are evaluated
/// directly at each sample's offset from the arrival, so sub-sample arrival
/// placement is exact.
pub fn pulse_train_at(
    geom: &ElectrodeGeometry,
    transit: &ParticleTransit,
    medium: &ComplexPermittivity,
    f_hz: f64,
    v0_volts: f64,
    gain_v_per_f: f64,
    arrivals_s: &[f64],
    duration_s: f64,
) -> Result<Trace> {
    if !duration_s.is_finite() || duration_s <= 0.0 {
        return Err(Error::Domain {
            name: "duration_s",
            value: duration_s,
            expected: "finite and > 0",
        });
    }
    let fs = transit.sample_rate_hz;
    let n = (duration_s * fs).floor() as usize + 1;
    let span = transit_span_s(geom, transit.velocity_m_s);
    let mut samples = vec![0.0f64; n];
    for &ta in arrivals_s {
        let i0 = (((ta - span / 2.0) * fs).floor().max(0.0)) as usize;
        let i1 = ((((ta + span / 2.0) * fs).ceil()) as usize).min(n - 1);
        for (i, s) in samples.iter_mut().enumerate().take(i1 + 1).skip(i0) {
            let dt = i as f64 / fs - ta;
            if dt.abs() <= span / 2.0 {
                *s += sensed_at(
                    geom,
                    transit,
                    medium,
                    f_hz,
                    v0_volts,
                    gain_v_per_f,
                    transit.velocity_m_s * dt,
                )?;
            }
        }
    }
    Ok(Trace::new(fs, samples)?.ac_coupled())
}

/// Poisson train: samples arrivals at the flow's detected-event rate, then
/// superimposes the crossings.
pub fn pulse_train<R: Rng + ?Sized>(
    geom: &ElectrodeGeometry,
    transit: &ParticleTransit,
    medium: &ComplexPermittivity,
    f_hz: f64,
    v0_volts: f64,
    gain_v_per_f: f64,
    flow: &FlowConditions,
    duration_s: f64,
    rng: &mut R,
) -> Result<Trace> {
    let arrivals = arrival_times(flow, duration_s, rng)?;
    pulse_train_at(
        geom, transit, medium, f_hz, v0_volts, gain_v_per_f, &arrivals, duration_s,
    )
}

// ─────────────────────────── tests ───────────────────────────
