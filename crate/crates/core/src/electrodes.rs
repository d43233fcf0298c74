//! Quasi-static field model for coplanar electrode pairs on a channel floor.
//!
//! All three layouts (parallel plates, interdigitated array, disk ring) reduce
//! to sums of strip-map terms: each term is the analytic derivative of a
//! conformal strip transformation, evaluated at a shifted and optionally
//! mirrored horizontal coordinate, with an optional propagation-delay cosine.
//! Field values are complex; magnitude and phase both feed the receive chain.
//!
//! Also houses the near-field bookkeeping that rides on top of the map:
//! capacitance perturbation by a polarized particle, hotspot extraction,
//! radiation-region classification, a short-dipole emission model, and the
//! fitted parasitic-coupling response.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::constants::{C0, EPS0, MU0};
use crate::dielectrics::ComplexPermittivity;
use crate::error::{Error, Result};
use crate::specfun::ellipk;

// ─────────────────────────── geometry ───────────────────────────

/// Layout tag, used where only the family matters (coupling offsets, CSV).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometryKind {
    ParallelPlates,
    Interdigitated,
    DiskRing,
}

impl std::fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GeometryKind::ParallelPlates => "pp",
            GeometryKind::Interdigitated => "id",
            GeometryKind::DiskRing => "dr",
        };
        f.write_str(s)
    }
}

/// Coplanar electrode layout with strip width and gap in meters.
///
/// `Interdigitated` carries the pair index bound N; the array sums terms for
/// n in [-N, N]. N = 0 degenerates to a single strip-map term identical to
/// `ParallelPlates` with the same dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum ElectrodeGeometry {
    ParallelPlates { w_m: f64, g_m: f64 },
    Interdigitated { w_m: f64, g_m: f64, pairs: usize },
    DiskRing { w_m: f64, g_m: f64 },
}

/// One strip-map term of the field sum.
///
/// The horizontal argument of term n is X_n = (-x if mirror else x) + offset.
/// `retard_shift_m` is subtracted from the radial distance inside the
/// propagation-delay cosine. Mirrored terms enter the field sum with a
/// negative sign: the mirror flips the sign of the map derivative.
#[derive(Debug, Clone, Copy)]
struct Term {
    mirror: bool,
    offset_m: f64,
    retard_shift_m: f64,
}

fn check_dim(name: &'static str, v: f64) -> Result<f64> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Domain {
            name,
            value: v,
            expected: "finite and > 0",
        });
    }
    Ok(v)
}

impl ElectrodeGeometry {
    pub fn parallel_plates(w_m: f64, g_m: f64) -> Result<Self> {
        Ok(Self::ParallelPlates {
            w_m: check_dim("w_m", w_m)?,
            g_m: check_dim("g_m", g_m)?,
        })
    }

    /// `pairs` is the index bound N; the term sum runs n in [-N, N].
    pub fn interdigitated(w_m: f64, g_m: f64, pairs: usize) -> Result<Self> {
        Ok(Self::Interdigitated {
            w_m: check_dim("w_m", w_m)?,
            g_m: check_dim("g_m", g_m)?,
            pairs,
        })
    }

    pub fn disk_ring(w_m: f64, g_m: f64) -> Result<Self> {
        Ok(Self::DiskRing {
            w_m: check_dim("w_m", w_m)?,
            g_m: check_dim("g_m", g_m)?,
        })
    }

    pub fn kind(&self) -> GeometryKind {
        match self {
            Self::ParallelPlates { .. } => GeometryKind::ParallelPlates,
            Self::Interdigitated { .. } => GeometryKind::Interdigitated,
            Self::DiskRing { .. } => GeometryKind::DiskRing,
        }
    }

    pub fn width_m(&self) -> f64 {
        match *self {
            Self::ParallelPlates { w_m, .. }
            | Self::Interdigitated { w_m, .. }
            | Self::DiskRing { w_m, .. } => w_m,
        }
    }

    pub fn gap_m(&self) -> f64 {
        match *self {
            Self::ParallelPlates { g_m, .. }
            | Self::Interdigitated { g_m, .. }
            | Self::DiskRing { g_m, .. } => g_m,
        }
    }

    /// Strip-map aspect parameter q = g / (g + 2w), in (0, 1).
    pub fn layout_ratio(&self) -> f64 {
        let (w, g) = (self.width_m(), self.gap_m());
        g / (g + 2.0 * w)
    }

    /// Samples closer than this to an electrode edge are rejected, not clamped.
    pub fn exclusion_radius_m(&self) -> f64 {
        self.gap_m() / 100.0
    }

    fn terms(&self) -> Vec<Term> {
        match *self {
            Self::ParallelPlates { .. } => vec![Term {
                mirror: false,
                offset_m: 0.0,
                retard_shift_m: 0.0,
            }],
            Self::DiskRing { w_m, g_m } => {
                let s = w_m + g_m;
                // n = -1 then n = +1; X_{±1} = ±x − s/2, delay shift n·s/2.
                vec![
                    Term {
                        mirror: true,
                        offset_m: -s / 2.0,
                        retard_shift_m: -s / 2.0,
                    },
                    Term {
                        mirror: false,
                        offset_m: -s / 2.0,
                        retard_shift_m: s / 2.0,
                    },
                ]
            }
            Self::Interdigitated { w_m, g_m, pairs } => {
                let s = w_m + g_m;
                let nmax = pairs as i64;
                let mut out = Vec::with_capacity(2 * pairs + 1);
                for n in -nmax..=nmax {
                    let nf = n as f64;
                    let even = n.rem_euclid(2) == 0;
                    let (mirror, offset_m) = match (even, n >= 0) {
                        (true, true) => (false, -nf * s),
                        (true, false) => (false, -(nf + 1.0) * s),
                        (false, true) => (true, -(nf - 1.0) * s),
                        (false, false) => (true, -nf * s),
                    };
                    out.push(Term {
                        mirror,
                        offset_m,
                        retard_shift_m: nf * s,
                    });
                }
                out
            }
        }
    }

    /// Horizontal positions of the map singularities: the strip edges where
    /// the term argument reaches ±g/2 or ±(w + g/2). Sorted, deduplicated.
    pub fn edge_positions_m(&self) -> Vec<f64> {
        let (w, g) = (self.width_m(), self.gap_m());
        let targets = [g / 2.0, -g / 2.0, w + g / 2.0, -(w + g / 2.0)];
        let mut edges = Vec::new();
        for t in self.terms() {
            for tg in targets {
                let x = if t.mirror { t.offset_m - tg } else { tg - t.offset_m };
                edges.push(x);
            }
        }
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * g);
        edges
    }

    /// Overall extent of the metallized pattern along x.
    pub fn span_m(&self) -> f64 {
        let e = self.edge_positions_m();
        e[e.len() - 1] - e[0]
    }

    /// Complex field at (x, z), z ≥ 0 above the electrode plane.
    ///
    /// Sums the strip-map terms scaled by V0 / (K(q²)·g); mirrored terms
    /// carry a negative sign. With `retardation` each term is weighted by
    /// cos(2π·√ε′_m·(r − shift)/λ0), r = hypot(x, z).
    pub fn field_at(
        &self,
        x_m: f64,
        z_m: f64,
        f_hz: f64,
        eps_m_real: f64,
        v0_volts: f64,
        retardation: bool,
    ) -> Result<Complex64> {
        if !z_m.is_finite() || z_m < 0.0 {
            return Err(Error::Domain {
                name: "z_m",
                value: z_m,
                expected: "finite and >= 0",
            });
        }
        if !x_m.is_finite() {
            return Err(Error::Domain {
                name: "x_m",
                value: x_m,
                expected: "finite",
            });
        }
        check_dim("f_hz", f_hz)?;
        if !eps_m_real.is_finite() || eps_m_real < 1.0 {
            return Err(Error::Domain {
                name: "eps_m_real",
                value: eps_m_real,
                expected: ">= 1",
            });
        }
        if !v0_volts.is_finite() {
            return Err(Error::Domain {
                name: "v0_volts",
                value: v0_volts,
                expected: "finite",
            });
        }
        let limit = self.exclusion_radius_m();
        let mut min_d = f64::INFINITY;
        for e in self.edge_positions_m() {
            min_d = min_d.min((x_m - e).hypot(z_m));
        }
        if min_d < limit {
            return Err(Error::EdgeProximity {
                distance_m: min_d,
                limit_m: limit,
            });
        }

        let g = self.gap_m();
        let q = self.layout_ratio();
        let k = ellipk(q * q)?;
        let scale = v0_volts / (k * g);
        let r = x_m.hypot(z_m);
        let lam0 = C0 / f_hz;
        let kret = 2.0 * PI * eps_m_real.sqrt() / lam0;

        let mut sum = Complex64::new(0.0, 0.0);
        for t in self.terms() {
            let xe = if t.mirror { -x_m } else { x_m };
            let xn = xe + t.offset_m;
            let l = Complex64::new(2.0 * xn / g, 2.0 * z_m / g);
            let f1 = (Complex64::new(1.0, 0.0) - l * l).sqrt();
            let f2 = (Complex64::new(1.0, 0.0) - l * l * (q * q)).sqrt();
            let sign = if t.mirror { -1.0 } else { 1.0 };
            let ret = if retardation {
                (kret * (r - t.retard_shift_m)).cos()
            } else {
                1.0
            };
            sum += sign * ret / (f1 * f2);
        }
        Ok(scale * sum)
    }
}

/// True when the propagation-delay correction matters: r/λ strictly above
/// 0.01 with λ the in-medium wavelength.
pub fn retardation_required(r_m: f64, f_hz: f64, eps_m_real: f64) -> Result<bool> {
    if !r_m.is_finite() || r_m < 0.0 {
        return Err(Error::Domain {
            name: "r_m",
            value: r_m,
            expected: "finite and >= 0",
        });
    }
    check_dim("f_hz", f_hz)?;
    if !eps_m_real.is_finite() || eps_m_real < 1.0 {
        return Err(Error::Domain {
            name: "eps_m_real",
            value: eps_m_real,
            expected: ">= 1",
        });
    }
    let lambda = C0 / (f_hz * eps_m_real.sqrt());
    Ok(r_m / lambda > 0.01)
}

// ─────────────────────────── field maps ───────────────────────────

/// Rectangular sampling window for a field map, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapWindow {
    pub x_min_m: f64,
    pub x_max_m: f64,
    pub z_min_m: f64,
    pub z_max_m: f64,
}

/// One grid cell of a field map. Singular cells (inside the edge exclusion
/// radius) carry NaN values and the flag instead of an invented number.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample {
    pub x_m: f64,
    pub z_m: f64,
    pub value: Complex64,
    pub singular: bool,
}

impl FieldSample {
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }
}

/// Field sampled on a regular grid, row-major in z then x (z outer
/// ascending, x inner ascending).
#[derive(Debug, Clone)]
pub struct FieldMap {
    pub xs_m: Vec<f64>,
    pub zs_m: Vec<f64>,
    samples: Vec<FieldSample>,
}

impl FieldMap {
    pub fn nx(&self) -> usize {
        self.xs_m.len()
    }

    pub fn nz(&self) -> usize {
        self.zs_m.len()
    }

    pub fn at(&self, ix: usize, iz: usize) -> &FieldSample {
        &self.samples[iz * self.nx() + ix]
    }

    pub fn samples(&self) -> &[FieldSample] {
        &self.samples
    }

    /// CSV with header `x_m,z_m,e_re,e_im,e_abs,singular`, rows in storage
    /// order. Singular cells write NaN values and flag 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_m,z_m,e_re,e_im,e_abs,singular\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                s.x_m,
                s.z_m,
                s.value.re,
                s.value.im,
                s.magnitude(),
                u8::from(s.singular)
            ));
        }
        out
    }

    /// Binary PGM (P5) of |E|: finite cells scaled min..max onto 0..254,
    /// singular cells 255. Rows are written z ascending.
    pub fn to_pgm(&self) -> Vec<u8> {
        let finite: Vec<f64> = self
            .samples
            .iter()
            .filter(|s| !s.singular)
            .map(|s| s.magnitude())
            .collect();
        let (lo, hi) = finite
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = format!("P5\n{} {}\n255\n", self.nx(), self.nz()).into_bytes();
        for s in &self.samples {
            let b = if s.singular {
                255u8
            } else {
                (254.0 * (s.magnitude() - lo) / span).round() as u8
            };
            out.push(b);
        }
        out
    }
}

impl ElectrodeGeometry {
    /// Samples the field on an (nx × nz) grid over `window`. Cells inside the
    /// edge exclusion radius are flagged singular; every other error aborts.
    pub fn field_map(
        &self,
        window: MapWindow,
        nx: usize,
        nz: usize,
        f_hz: f64,
        eps_m_real: f64,
        v0_volts: f64,
        retardation: bool,
    ) -> Result<FieldMap> {
        if nx < 2 || nz < 2 {
            return Err(Error::Domain {
                name: "grid",
                value: nx.min(nz) as f64,
                expected: "nx >= 2 and nz >= 2",
            });
        }
        if !(window.x_min_m < window.x_max_m) || !(window.z_min_m < window.z_max_m) {
            return Err(Error::Domain {
                name: "window",
                value: f64::NAN,
                expected: "x_min < x_max and z_min < z_max",
            });
        }
        if window.z_min_m < 0.0 {
            return Err(Error::Domain {
                name: "z_min_m",
                value: window.z_min_m,
                expected: ">= 0",
            });
        }
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            let step = (b - a) / (n - 1) as f64;
            (0..n).map(|i| a + step * i as f64).collect()
        };
        let xs = lin(window.x_min_m, window.x_max_m, nx);
        let zs = lin(window.z_min_m, window.z_max_m, nz);
        let mut samples = Vec::with_capacity(nx * nz);
        for &z in &zs {
            for &x in &xs {
                match self.field_at(x, z, f_hz, eps_m_real, v0_volts, retardation) {
                    Ok(v) => samples.push(FieldSample {
                        x_m: x,
                        z_m: z,
                        value: v,
                        singular: false,
                    }),
                    Err(Error::EdgeProximity { .. }) => samples.push(FieldSample {
                        x_m: x,
                        z_m: z,
                        value: Complex64::new(f64::NAN, f64::NAN),
                        singular: true,
                    }),
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(FieldMap {
            xs_m: xs,
            zs_m: zs,
            samples,
        })
    }
}

// ─────────────────────────── hotspot ───────────────────────────

/// Extent of the concentrated near-field region at a magnitude threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HotspotMetrics {
    pub penetration_depth_m: f64,
    pub width_m: f64,
    pub threshold_fraction: f64,
}

/// Measures the hotspot of a sampled map.
///
/// The reference magnitude is the largest finite |E| on the lowest grid row
/// that has any finite cell. Depth is the highest z at which the column
/// through the reference cell still reaches `threshold_fraction` of the
/// reference; width is the outermost extent of qualifying cells on the
/// reference row plus one grid pitch.
pub fn hotspot_metrics(map: &FieldMap, threshold_fraction: f64) -> Result<HotspotMetrics> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::Domain {
            name: "threshold_fraction",
            value: threshold_fraction,
            expected: "in (0, 1)",
        });
    }
    let nx = map.nx();
    let nz = map.nz();
    let mut base_row = None;
    for iz in 0..nz {
        if (0..nx).any(|ix| !map.at(ix, iz).singular) {
            base_row = Some(iz);
            break;
        }
    }
    let iz0 = base_row.ok_or(Error::EmptyMap)?;
    let mut iref = 0;
    let mut eref = f64::NEG_INFINITY;
    for ix in 0..nx {
        let s = map.at(ix, iz0);
        if !s.singular && s.magnitude() > eref {
            eref = s.magnitude();
            iref = ix;
        }
    }
    let thr = threshold_fraction * eref;

    let mut depth = map.zs_m[iz0];
    for iz in iz0..nz {
        let s = map.at(iref, iz);
        if !s.singular && s.magnitude() >= thr {
            depth = map.zs_m[iz];
        }
    }

    let mut first = None;
    let mut last = None;
    for ix in 0..nx {
        let s = map.at(ix, iz0);
        if !s.singular && s.magnitude() >= thr {
            if first.is_none() {
                first = Some(ix);
            }
            last = Some(ix);
        }
    }
    let (i0, i1) = (first.unwrap(), last.unwrap());
    let pitch = map.xs_m[1] - map.xs_m[0];
    Ok(HotspotMetrics {
        penetration_depth_m: depth,
        width_m: map.xs_m[i1] - map.xs_m[i0] + pitch,
        threshold_fraction,
    })
}

// ─────────────────────────── particle coupling ───────────────────────────

/// Capacitance change induced by a polarized sphere of radius `a_m` in the
/// sensing field: ΔC = 4π·[ε₀]·a³·Re{ε*_m·K_CM}·(E0/V0)².
///
/// `include_eps0 = false` reproduces the bare geometric expression (units of
/// meters); the default true yields farads.
pub fn delta_capacitance(
    a_m: f64,
    eps_m: &ComplexPermittivity,
    k_cm: Complex64,
    e0_over_v0_per_m: f64,
    include_eps0: bool,
) -> Result<f64> {
    check_dim("a_m", a_m)?;
    if !e0_over_v0_per_m.is_finite() {
        return Err(Error::Domain {
            name: "e0_over_v0_per_m",
            value: e0_over_v0_per_m,
            expected: "finite",
        });
    }
    let scale = if include_eps0 { EPS0 } else { 1.0 };
    let re = (eps_m.to_complex() * k_cm).re;
    Ok(4.0 * PI * scale * a_m.powi(3) * re * e0_over_v0_per_m * e0_over_v0_per_m)
}

/// Stored-energy change for a capacitance perturbation at drive V0.
pub fn energy_perturbation(delta_c_farads: f64, v0_volts: f64) -> f64 {
    -0.5 * delta_c_farads * v0_volts * v0_volts
}

// ─────────────────────────── radiation regions ───────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    ReactiveNear,
    RadiativeNear,
    Far,
}

/// Classifies a distance against the aperture's radiation-region boundaries.
///
/// Far field beyond 2D²/λ (strict); reactive near field inside 0.62·√(D³/λ)
/// (strict); radiative near field otherwise. Far is decided first, so when
/// the two boundaries cross (electrically small apertures) the far criterion
/// wins.
pub fn region_classify(
    d_aperture_m: f64,
    f_hz: f64,
    eps_m_real: f64,
    r_m: f64,
) -> Result<Region> {
    check_dim("d_aperture_m", d_aperture_m)?;
    check_dim("f_hz", f_hz)?;
    if !eps_m_real.is_finite() || eps_m_real < 1.0 {
        return Err(Error::Domain {
            name: "eps_m_real",
            value: eps_m_real,
            expected: ">= 1",
        });
    }
    if !r_m.is_finite() || r_m < 0.0 {
        return Err(Error::Domain {
            name: "r_m",
            value: r_m,
            expected: "finite and >= 0",
        });
    }
    let lambda = C0 / (f_hz * eps_m_real.sqrt());
    let far_bound = 2.0 * d_aperture_m * d_aperture_m / lambda;
    let reactive_bound = 0.62 * (d_aperture_m.powi(3) / lambda).sqrt();
    if r_m > far_bound {
        Ok(Region::Far)
    } else if r_m < reactive_bound {
        Ok(Region::ReactiveNear)
    } else {
        Ok(Region::RadiativeNear)
    }
}

// ─────────────────────────── short dipole ───────────────────────────

/// Short-dipole emitter: drive current, element length, frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleParams {
    pub current_a: f64,
    pub length_m: f64,
    pub freq_hz: f64,
}

fn dipole_check(p: &DipoleParams, r_m: f64) -> Result<f64> {
    check_dim("current_a", p.current_a)?;
    check_dim("length_m", p.length_m)?;
    check_dim("freq_hz", p.freq_hz)?;
    if !r_m.is_finite() || r_m <= 0.0 {
        return Err(Error::Domain {
            name: "r_m",
            value: r_m,
            expected: "> 0",
        });
    }
    Ok(2.0 * PI * p.freq_hz / C0)
}

/// Instantaneous polar field of the short dipole:
/// Re{ j·c·μ₀·k·I0·L/(4πr) · sinθ · e^(−jkr) · e^(jωt) }.
pub fn dipole_field(p: &DipoleParams, r_m: f64, theta_rad: f64, t_s: f64) -> Result<f64> {
    let k = dipole_check(p, r_m)?;
    let amp = C0 * MU0 * k * p.current_a * p.length_m / (4.0 * PI * r_m);
    let phase = Complex64::new(0.0, 2.0 * PI * p.freq_hz * t_s - k * r_m).exp();
    Ok((Complex64::new(0.0, amp * theta_rad.sin()) * phase).re)
}

/// Peak amplitude of the dipole field over a carrier cycle.
pub fn dipole_amplitude(p: &DipoleParams, r_m: f64, theta_rad: f64) -> Result<f64> {
    let k = dipole_check(p, r_m)?;
    Ok(C0 * MU0 * k * p.current_a * p.length_m / (4.0 * PI * r_m) * theta_rad.sin().abs())
}

// ─────────────────────────── parasitic coupling ───────────────────────────

/// Fitted parasitic-coupling levels: per-layout offset at 10 MHz and the
/// corner above which the response flattens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingCal {
    pub corner_hz: f64,
    pub pp_offset_db: f64,
    pub dr_offset_db: f64,
    pub id_offset_db: f64,
}

impl Default for CouplingCal {
    fn default() -> Self {
        Self {
            corner_hz: 1e9,
            pp_offset_db: -70.0,
            dr_offset_db: -60.0,
            id_offset_db: -40.0,
        }
    }
}

pub const COUPLING_BAND_HZ: (f64, f64) = (1e7, 1e10);

/// Coupling level in dB: 40 dB/decade below the corner, flat above, plus the
/// per-layout offset referenced to 10 MHz.
pub fn coupling_response(geom: &ElectrodeGeometry, f_hz: f64, cal: &CouplingCal) -> Result<f64> {
    let (lo, hi) = COUPLING_BAND_HZ;
    if !(f_hz >= lo && f_hz <= hi) {
        return Err(Error::FrequencyRange {
            f_hz,
            min_hz: lo,
            max_hz: hi,
        });
    }
    let offset = match geom.kind() {
        GeometryKind::ParallelPlates => cal.pp_offset_db,
        GeometryKind::DiskRing => cal.dr_offset_db,
        GeometryKind::Interdigitated => cal.id_offset_db,
    };
    Ok(offset + 40.0 * (f_hz.min(cal.corner_hz) / lo).log10())
}

// ─────────────────────────── tests ───────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dielectrics::clausius_mossotti;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    fn pp() -> ElectrodeGeometry {
        ElectrodeGeometry::parallel_plates(45e-6, 10e-6).unwrap()
    }

    fn id(pairs: usize) -> ElectrodeGeometry {
        ElectrodeGeometry::interdigitated(25e-6, 25e-6, pairs).unwrap()
    }

    fn dr() -> ElectrodeGeometry {
        ElectrodeGeometry::disk_ring(75e-6, 75e-6).unwrap()
    }

    #[test]
    fn layout_ratio_values() {
        assert_relative_eq!(pp().layout_ratio(), 0.1, max_relative = 1e-15);
        assert_relative_eq!(id(3).layout_ratio(), 1.0 / 3.0, max_relative = 1e-15);
        let skinny = ElectrodeGeometry::parallel_plates(1e-9, 1.0).unwrap();
        assert!(skinny.layout_ratio() > 0.999_999);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(ElectrodeGeometry::parallel_plates(0.0, 1e-6).is_err());
        assert!(ElectrodeGeometry::parallel_plates(1e-6, -1.0).is_err());
        assert!(ElectrodeGeometry::disk_ring(f64::NAN, 1e-6).is_err());
    }

    // Term arguments X_n at x = 10 µm for the 25/25 µm array, all four
    // parity cases pinned individually.
    #[test]
    fn interdigitated_term_arguments() {
        let geom = id(3);
        let x = 10e-6;
        let expected = [
            140e-6,  // n = -3: mirrored, offset +3s
            60e-6,   // n = -2: direct, offset +s
            40e-6,   // n = -1: mirrored, offset +s
            10e-6,   // n =  0: direct, offset 0
            -10e-6,  // n =  1: mirrored, offset 0
            -90e-6,  // n =  2: direct, offset -2s
            -110e-6, // n =  3: mirrored, offset -2s
        ];
        let terms = geom.terms();
        assert_eq!(terms.len(), 7);
        for (t, want) in terms.iter().zip(expected) {
            let xn = if t.mirror { -x } else { x } + t.offset_m;
            assert_abs_diff_eq!(xn, want, epsilon = 1e-18);
        }
        let shifts: Vec<f64> = terms.iter().map(|t| t.retard_shift_m).collect();
        let s = 50e-6;
        for (i, n) in (-3i64..=3).enumerate() {
            assert_abs_diff_eq!(shifts[i], n as f64 * s, epsilon = 1e-18);
        }
    }

    #[test]
    fn disk_ring_term_arguments() {
        let geom = dr();
        let x = 10e-6;
        let terms = geom.terms();
        assert_eq!(terms.len(), 2);
        // n = -1: X = -x - s/2; n = +1: X = x - s/2.
        let x_minus = if terms[0].mirror { -x } else { x } + terms[0].offset_m;
        let x_plus = if terms[1].mirror { -x } else { x } + terms[1].offset_m;
        assert_abs_diff_eq!(x_minus, -85e-6, epsilon = 1e-18);
        assert_abs_diff_eq!(x_plus, -65e-6, epsilon = 1e-18);
        assert_abs_diff_eq!(terms[0].retard_shift_m, -75e-6, epsilon = 1e-18);
        assert_abs_diff_eq!(terms[1].retard_shift_m, 75e-6, epsilon = 1e-18);
    }

    #[test]
    fn single_pair_array_equals_parallel_plates() {
        let a = ElectrodeGeometry::interdigitated(45e-6, 10e-6, 0).unwrap();
        let b = pp();
        for i in 0..40 {
            let x = -60e-6 + 3e-6 * i as f64;
            let ea = a.field_at(x, 12e-6, 1e9, 78.0, 1.0, false).unwrap();
            let eb = b.field_at(x, 12e-6, 1e9, 78.0, 1.0, false).unwrap();
            assert_relative_eq!(ea.re, eb.re, max_relative = 1e-12);
            assert_relative_eq!(ea.im, eb.im, max_relative = 1e-12);
        }
    }

    #[test]
    fn mirror_symmetry_pp_and_dr() {
        for geom in [pp(), dr()] {
            for i in 1..30 {
                let x = 4e-6 * i as f64;
                let zp = 9e-6;
                let ep = geom.field_at(x, zp, 1e9, 78.0, 1.0, false).unwrap();
                let em = geom.field_at(-x, zp, 1e9, 78.0, 1.0, false).unwrap();
                assert_relative_eq!(ep.norm(), em.norm(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn far_field_decay() {
        let geom = pp();
        let span = geom.gap_m() + 2.0 * geom.width_m();
        let near = geom
            .field_at(0.0, geom.gap_m() / 10.0, 1e9, 78.0, 1.0, false)
            .unwrap()
            .norm();
        let far = geom
            .field_at(0.0, 100.0 * span, 1e9, 78.0, 1.0, false)
            .unwrap()
            .norm();
        assert!(far < 1e-3 * near);
        // monotone decay along the centerline beyond the hotspot
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let z = 20e-6 * 1.15f64.powi(i);
            let e = geom.field_at(0.0, z, 1e9, 78.0, 1.0, false).unwrap().norm();
            assert!(e < prev);
            prev = e;
        }
    }

    #[test]
    fn edge_exclusion_rejects() {
        let geom = pp();
        let err = geom.field_at(5e-6, 1e-8, 1e9, 78.0, 1.0, false);
        match err {
            Err(Error::EdgeProximity { distance_m, limit_m }) => {
                assert!(distance_m < limit_m);
                assert_relative_eq!(limit_m, 1e-7, max_relative = 1e-12);
            }
            other => panic!("expected EdgeProximity, got {other:?}"),
        }
    }

    #[test]
    fn retardation_factor_unity_at_origin_distance() {
        let geom = pp();
        let on = geom.field_at(0.0, 1e-7 + 1e-12, 1e7, 1.0, 1.0, true).unwrap();
        let off = geom.field_at(0.0, 1e-7 + 1e-12, 1e7, 1.0, 1.0, false).unwrap();
        assert_relative_eq!(on.re, off.re, max_relative = 1e-12);
        assert_relative_eq!(on.im, off.im, max_relative = 1e-12);
    }

    #[test]
    fn retardation_small_below_threshold() {
        // single unshifted term: r/λ ≤ 0.01 keeps the delay cosine within
        // (2π·0.01)²/2 of unity
        let geom = pp();
        let f = 1e10;
        let eps: f64 = 62.83;
        let lambda = C0 / (f * eps.sqrt());
        let r = 0.009 * lambda;
        assert!(!retardation_required(r, f, eps).unwrap());
        let x = 1e-5;
        let z = (r * r - x * x).sqrt();
        let on = geom.field_at(x, z, f, eps, 1.0, true).unwrap();
        let off = geom.field_at(x, z, f, eps, 1.0, false).unwrap();
        assert!((on - off).norm() / off.norm() < 5e-3);
    }

    #[test]
    fn retardation_changes_shifted_terms() {
        // finger offsets put |r − shift| well past r itself, so the delay
        // factors bite even near the threshold radius
        let geom = id(3);
        let f = 1e10;
        let eps: f64 = 62.83;
        let lambda = C0 / (f * eps.sqrt());
        let r = 0.009 * lambda;
        let x = 1e-5;
        let z = (r * r - x * x).sqrt();
        let on = geom.field_at(x, z, f, eps, 1.0, true).unwrap();
        let off = geom.field_at(x, z, f, eps, 1.0, false).unwrap();
        let rel = (on - off).norm() / off.norm();
        assert!(rel > 1e-4, "rel {rel}");
        assert!(rel < 0.2, "rel {rel}");
    }

    #[test]
    fn retardation_required_boundary() {
        assert!(!retardation_required(0.0, 1e9, 1.0).unwrap());
        assert!(retardation_required(1e-3, 1e10, 9.0).unwrap());
        let lambda = C0 / (1e9 * 4.0f64.sqrt());
        let r_at = 0.01 * lambda;
        assert!(!retardation_required(r_at, 1e9, 4.0).unwrap());
        let r_above = r_at * (1.0 + 1e-12);
        assert!(retardation_required(r_above, 1e9, 4.0).unwrap());
    }

    #[test]
    fn field_map_ordering_and_symmetry() {
        let geom = pp();
        let map = geom
            .field_map(
                MapWindow {
                    x_min_m: -40e-6,
                    x_max_m: 40e-6,
                    z_min_m: 5e-6,
                    z_max_m: 20e-6,
                },
                2,
                2,
                1e9,
                78.0,
                1.0,
                false,
            )
            .unwrap();
        assert_eq!(map.samples().len(), 4);
        assert_relative_eq!(
            map.at(0, 0).magnitude(),
            map.at(1, 0).magnitude(),
            max_relative = 1e-12
        );
        assert!(map.at(0, 1).z_m > map.at(0, 0).z_m);
        assert_eq!(map.at(1, 0).x_m, 40e-6);
    }

    #[test]
    fn field_map_flags_singular_cells() {
        let geom = pp();
        // x grid hits the gap edge at 5 µm exactly
        let map = geom
            .field_map(
                MapWindow {
                    x_min_m: 0.0,
                    x_max_m: 10e-6,
                    z_min_m: 0.0,
                    z_max_m: 10e-6,
                },
                3,
                3,
                1e9,
                78.0,
                1.0,
                false,
            )
            .unwrap();
        assert!(map.at(1, 0).singular);
        assert!(map.at(1, 0).magnitude().is_nan());
        assert!(!map.at(1, 2).singular);
        let csv = map.to_csv();
        assert!(csv.starts_with("x_m,z_m,e_re,e_im,e_abs,singular\n"));
        assert!(csv.lines().any(|l| l.ends_with(",1") && l.contains("NaN")));
        let pgm = map.to_pgm();
        assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(pgm[pgm.len() - 9 + 1], 255);
    }

    #[test]
    fn hotspot_threshold_near_one_degenerates_to_base_row() {
        let geom = pp();
        let map = geom
            .field_map(
                MapWindow {
                    x_min_m: -60e-6,
                    x_max_m: 60e-6,
                    z_min_m: 0.5e-6,
                    z_max_m: 100e-6,
                    },
                121,
                200,
                1e7,
                78.0,
                1.0,
                false,
            )
            .unwrap();
        let m = hotspot_metrics(&map, 1.0 - 1e-9).unwrap();
        assert_relative_eq!(m.penetration_depth_m, 0.5e-6, max_relative = 1e-12);
        let d_lo = hotspot_metrics(&map, 0.2).unwrap().penetration_depth_m;
        let d_mid = hotspot_metrics(&map, 0.5).unwrap().penetration_depth_m;
        let d_hi = hotspot_metrics(&map, 0.9).unwrap().penetration_depth_m;
        assert!(d_lo >= d_mid && d_mid >= d_hi);
        assert!(hotspot_metrics(&map, 0.0).is_err());
        assert!(hotspot_metrics(&map, 1.0).is_err());
    }

    #[test]
    fn hotspot_depth_grows_with_gap() {
        let shared = MapWindow {
            x_min_m: -150e-6,
            x_max_m: 150e-6,
            z_min_m: 0.5e-6,
            z_max_m: 200e-6,
        };
        let narrow = ElectrodeGeometry::parallel_plates(45e-6, 10e-6).unwrap();
        let wide = ElectrodeGeometry::parallel_plates(45e-6, 20e-6).unwrap();
        let thr = (-1.0f64).exp();
        let m1 = hotspot_metrics(
            &narrow.field_map(shared, 301, 400, 1e7, 78.0, 1.0, false).unwrap(),
            thr,
        )
        .unwrap();
        let m2 = hotspot_metrics(
            &wide.field_map(shared, 301, 400, 1e7, 78.0, 1.0, false).unwrap(),
            thr,
        )
        .unwrap();
        assert!(m2.penetration_depth_m > m1.penetration_depth_m);
    }

    #[test]
    fn hotspot_all_singular_is_an_error() {
        let geom = pp();
        // whole window inside the exclusion radius of the 5 µm edge
        let map = geom
            .field_map(
                MapWindow {
                    x_min_m: 4.99e-6,
                    x_max_m: 5.01e-6,
                    z_min_m: 0.0,
                    z_max_m: 2e-8,
                },
                3,
                3,
                1e9,
                78.0,
                1.0,
                false,
            )
            .unwrap();
        assert!(matches!(hotspot_metrics(&map, 0.5), Err(Error::EmptyMap)));
    }

    #[test]
    fn delta_capacitance_cubic_and_sign() {
        let water = ComplexPermittivity::new(78.4, 0.038).unwrap();
        let poly = ComplexPermittivity::new(2.9, 0.04).unwrap();
        let k = clausius_mossotti(poly.to_complex(), water.to_complex()).unwrap();
        let dc1 = delta_capacitance(5e-6, &water, k, 1.4e4, true).unwrap();
        let dc2 = delta_capacitance(10e-6, &water, k, 1.4e4, true).unwrap();
        assert!(dc1 < 0.0);
        assert_relative_eq!(dc2 / dc1, 8.0, max_relative = 1e-12);
        let tiny = delta_capacitance(1e-30, &water, k, 1.4e4, true).unwrap();
        assert!(tiny.abs() < 1e-80);
        let bare = delta_capacitance(5e-6, &water, k, 1.4e4, false).unwrap();
        assert_relative_eq!(dc1 / bare, EPS0, max_relative = 1e-12);
    }

    #[test]
    fn delta_capacitance_positive_for_upward_contrast() {
        let medium = ComplexPermittivity::new(2.0, 0.0).unwrap();
        let particle = Complex64::new(10.0, 0.0);
        let k = clausius_mossotti(particle, medium.to_complex()).unwrap();
        let dc = delta_capacitance(5e-6, &medium, k, 1.0e4, true).unwrap();
        assert!(dc > 0.0);
    }

    #[test]
    fn energy_route_matches() {
        let water = ComplexPermittivity::new(78.4, 0.038).unwrap();
        let poly = ComplexPermittivity::new(2.9, 0.04).unwrap();
        let k = clausius_mossotti(poly.to_complex(), water.to_complex()).unwrap();
        let v0 = 2.5;
        let e0 = 3.3e4 * v0;
        let dc = delta_capacitance(5e-6, &water, k, e0 / v0, true).unwrap();
        let du = energy_perturbation(dc, v0);
        // independent route through the polarizability
        let alpha = crate::dielectrics::polarizability(5e-6, water.to_complex() * k, true).unwrap();
        let du_alpha = -0.5 * alpha.re * e0 * e0;
        assert_relative_eq!(du, du_alpha, max_relative = 1e-12);
        assert_relative_eq!(-2.0 * du / (v0 * v0), dc, max_relative = 1e-12);
        assert_eq!(energy_perturbation(0.0, 3.0), 0.0);
        assert_relative_eq!(
            energy_perturbation(dc, 2.0 * v0) / du,
            4.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn region_boundaries() {
        assert_eq!(
            region_classify(100e-6, 1e9, 1.0, 1e-12).unwrap(),
            Region::ReactiveNear
        );
        // aperture with ordered boundaries: reactive bound < far bound
        let f = C0 / 0.03;
        let far_bound = 2.0 * 0.1 * 0.1 / 0.03;
        assert_eq!(
            region_classify(0.1, f, 1.0, far_bound).unwrap(),
            Region::RadiativeNear
        );
        assert_eq!(
            region_classify(0.1, f, 1.0, far_bound * (1.0 + 1e-12)).unwrap(),
            Region::Far
        );
        // 100 µm aperture at λ = 30 mm: both boundaries below 40 µm
        let d: f64 = 100e-6;
        let fb = 2.0 * d * d / 0.03;
        let rb = 0.62 * (d.powi(3) / 0.03f64).sqrt();
        assert_relative_eq!(fb, 6.666_666_666_666_667e-7, max_relative = 1e-12);
        assert_relative_eq!(rb, 3.579_571_668_975_68e-6, max_relative = 1e-9);
        assert_eq!(region_classify(d, f, 1.0, 40e-6).unwrap(), Region::Far);
    }

    #[test]
    fn dipole_polar_pattern_and_envelope() {
        let p = DipoleParams {
            current_a: 1e-3,
            length_m: 1e-4,
            freq_hz: 1e9,
        };
        assert_eq!(dipole_field(&p, 0.01, 0.0, 1e-10).unwrap(), 0.0);
        let a1 = dipole_amplitude(&p, 0.01, PI / 2.0).unwrap();
        let a2 = dipole_amplitude(&p, 0.02, PI / 2.0).unwrap();
        assert_relative_eq!(a1 / a2, 2.0, max_relative = 1e-12);
        assert!(dipole_field(&p, 0.0, 1.0, 0.0).is_err());
        assert!(dipole_field(&p, -1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn dipole_matches_phasor_oracle() {
        let p = DipoleParams {
            current_a: 2e-3,
            length_m: 5e-5,
            freq_hz: 3e9,
        };
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        for _ in 0..100 {
            let r = rng.gen_range(1e-3..1.0);
            let th = rng.gen_range(0.0..PI);
            let t = rng.gen_range(0.0..1e-9);
            let k = 2.0 * PI * p.freq_hz / C0;
            let amp = C0 * MU0 * k * p.current_a * p.length_m / (4.0 * PI * r) * th.sin();
            // Re{ j A e^(jφ) } = -A sin φ
            let want = -amp * (2.0 * PI * p.freq_hz * t - k * r).sin();
            let got = dipole_field(&p, r, th, t).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-12 * amp.abs().max(1e-30));
        }
    }

    #[test]
    fn coupling_slope_and_offsets() {
        let cal = CouplingCal::default();
        let pp_lo = coupling_response(&pp(), 1e7, &cal).unwrap();
        let pp_hi = coupling_response(&pp(), 1e8, &cal).unwrap();
        assert_relative_eq!(pp_hi - pp_lo, 40.0, max_relative = 1e-12);
        let above1 = coupling_response(&pp(), 2e9, &cal).unwrap();
        let above2 = coupling_response(&pp(), 9e9, &cal).unwrap();
        assert!((above1 - above2).abs() < 0.1);
        let dr_lo = coupling_response(&dr(), 1e7, &cal).unwrap();
        let id_lo = coupling_response(&id(3), 1e7, &cal).unwrap();
        assert_relative_eq!(pp_lo, dr_lo - 10.0, max_relative = 1e-12);
        assert_relative_eq!(pp_lo, id_lo - 30.0, max_relative = 1e-12);
        assert!(matches!(
            coupling_response(&pp(), 1e6, &cal),
            Err(Error::FrequencyRange { .. })
        ));
        assert!(matches!(
            coupling_response(&pp(), 2e10, &cal),
            Err(Error::FrequencyRange { .. })
        ));
    }

    #[test]
    fn edge_positions_cover_all_terms() {
        let geom = pp();
        assert_eq!(geom.edge_positions_m().len(), 4);
        assert_relative_eq!(geom.span_m(), 100e-6, max_relative = 1e-12);
        let geom = id(3);
        let edges = geom.edge_positions_m();
        assert!(edges.len() > 8);
        // leftmost term offset −2s, rightmost +3s; outer singular edge g/2 + w out
        let lo = edges[0];
        let hi = edges[edges.len() - 1];
        assert_abs_diff_eq!(lo, -137.5e-6, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 187.5e-6, epsilon = 1e-12);
        for w in edges.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn interdigitated_energy_concentrates_near_surface() {
        let geom = ElectrodeGeometry::interdigitated(15e-6, 15e-6, 3).unwrap();
        let s = 30e-6;
        let map = geom
            .field_map(
                MapWindow {
                    x_min_m: -220e-6,
                    x_max_m: 220e-6,
                    z_min_m: 15e-6 / 50.0,
                    z_max_m: 10.0 * s,
                },
                441,
                1001,
                1e7,
                78.0,
                1.0,
                false,
            )
            .unwrap();
        let dx = map.xs_m[1] - map.xs_m[0];
        let dz = map.zs_m[1] - map.zs_m[0];
        let mut near = 0.0;
        let mut total = 0.0;
        for samp in map.samples() {
            if samp.singular {
                continue;
            }
            let e2 = samp.magnitude().powi(2) * dx * dz;
            total += e2;
            if samp.z_m <= 2.0 * s {
                near += e2;
            }
        }
        assert!(near / total >= 0.90, "near fraction {}", near / total);
    }

    #[test]
    fn sampled_magnitude_scale() {
        // 45/10 µm strip pair, centerline at z = 20 µm, unit drive
        let e = pp().field_at(0.0, 20e-6, 1e7, 78.0, 1.0, false).unwrap();
        assert_relative_eq!(e.norm(), 14_300.0, max_relative = 2e-3);
    }
}
