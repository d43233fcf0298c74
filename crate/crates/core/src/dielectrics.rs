//! Complex permittivity models, the spherical-inclusion mixing factor,
//! and the tabulated bioparticle material library.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::constants::EPS0;
use crate::error::{Error, Result};

// ─── permittivity models ────────────────────────────────────────────────

/// Relative permittivity `eps' - j eps''`, with the loss part stored as a
/// positive number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    pub eps_real: f64,
    pub eps_imag: f64,
}

impl ComplexPermittivity {
    pub fn new(eps_real: f64, eps_imag: f64) -> Result<Self> {
        if !(eps_real.is_finite() && eps_real > 0.0) {
            return Err(Error::Domain {
                name: "eps_real",
                value: eps_real,
                expected: "finite and > 0",
            });
        }
        if !(eps_imag.is_finite() && eps_imag >= 0.0) {
            return Err(Error::Domain {
                name: "eps_imag",
                value: eps_imag,
                expected: "finite and >= 0",
            });
        }
        Ok(Self { eps_real, eps_imag })
    }

    /// `eps' - j eps''` as a complex number.
    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.eps_real, -self.eps_imag)
    }
}

/// Single-relaxation Debye dispersion with an optional dc conductivity
/// folded into the loss term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DebyeParams {
    pub eps_static: f64,
    pub eps_inf: f64,
    pub tau_s: f64,
    pub sigma_s_per_m: f64,
}

impl DebyeParams {
    pub fn new(eps_static: f64, eps_inf: f64, tau_s: f64, sigma_s_per_m: f64) -> Result<Self> {
        for (name, v, cond) in [
            ("eps_static", eps_static, eps_static.is_finite() && eps_static > 0.0),
            ("eps_inf", eps_inf, eps_inf.is_finite() && eps_inf > 0.0),
            ("tau_s", tau_s, tau_s.is_finite() && tau_s > 0.0),
            (
                "sigma_s_per_m",
                sigma_s_per_m,
                sigma_s_per_m.is_finite() && sigma_s_per_m >= 0.0,
            ),
        ] {
            if !cond {
                return Err(Error::Domain {
                    name,
                    value: v,
                    expected: "finite, positive (sigma may be zero)",
                });
            }
        }
        if eps_inf > eps_static {
            return Err(Error::Domain {
                name: "eps_inf",
                value: eps_inf,
                expected: "<= eps_static",
            });
        }
        Ok(Self {
            eps_static,
            eps_inf,
            tau_s,
            sigma_s_per_m,
        })
    }

    pub fn evaluate(&self, f_hz: f64) -> Result<ComplexPermittivity> {
        if !(f_hz.is_finite() && f_hz > 0.0) {
            return Err(Error::Domain {
                name: "f_hz",
                value: f_hz,
                expected: "finite and > 0",
            });
        }
        let w_tau = 2.0 * core::f64::consts::PI * f_hz * self.tau_s;
        let delta = self.eps_static - self.eps_inf;
        let denom = 1.0 + w_tau * w_tau;
        let re = self.eps_inf + delta / denom;
        let im = delta * w_tau / denom
            + self.sigma_s_per_m / (2.0 * core::f64::consts::PI * f_hz * EPS0);
        ComplexPermittivity::new(re, im)
    }

    /// Peak-loss frequency `1 / (2 pi tau)`.
    pub fn relaxation_frequency_hz(&self) -> f64 {
        1.0 / (2.0 * core::f64::consts::PI * self.tau_s)
    }
}

/// A suspending medium: either dispersionless or single-relaxation Debye.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium {
    Constant(ComplexPermittivity),
    Debye(DebyeParams),
}

impl Medium {
    /// Room-temperature water: static 78.4, infinite-frequency 5.2,
    /// relaxation time 8.27 ps, no dc conductivity.
    pub fn water() -> Medium {
        Medium::Debye(DebyeParams::new(78.4, 5.2, 8.27e-12, 0.0).expect("fixed parameters"))
    }

    pub fn permittivity(&self, f_hz: f64) -> Result<ComplexPermittivity> {
        match self {
            Medium::Constant(eps) => Ok(*eps),
            Medium::Debye(p) => p.evaluate(f_hz),
        }
    }
}

// ─── mixing and polarizability ──────────────────────────────────────────

const MIXING_DENOM_LIMIT: f64 = 1e-12;

/// Spherical-inclusion mixing factor `(eps_p - eps_m) / (eps_p + 2 eps_m)`
/// for complex permittivities.
pub fn clausius_mossotti(eps_p: Complex64, eps_m: Complex64) -> Result<Complex64> {
    let denom = eps_p + 2.0 * eps_m;
    let scale = eps_p.norm() + 2.0 * eps_m.norm();
    if denom.norm() <= MIXING_DENOM_LIMIT * scale.max(1.0) {
        return Err(Error::MixingSingular {
            denom: denom.norm(),
            limit: MIXING_DENOM_LIMIT * scale.max(1.0),
        });
    }
    Ok((eps_p - eps_m) / denom)
}

/// Dipole polarizability prefactor `4 pi eps0 a^3 eps` for a sphere of
/// radius `a`. With `include_eps0` false the vacuum permittivity is left
/// out, for callers that carry it separately.
pub fn polarizability(radius_m: f64, eps: Complex64, include_eps0: bool) -> Result<Complex64> {
    if !(radius_m.is_finite() && radius_m > 0.0) {
        return Err(Error::Domain {
            name: "radius_m",
            value: radius_m,
            expected: "finite and > 0",
        });
    }
    let scale = if include_eps0 { EPS0 } else { 1.0 };
    Ok(4.0 * core::f64::consts::PI * scale * radius_m.powi(3) * eps)
}

// ─── material table ─────────────────────────────────────────────────────

const TABLE_HEADER: &str = "material,f_hz,eps_real,eps_imag,d_min_m,d_max_m";

#[derive(Debug, Clone, PartialEq)]
struct MaterialRecord {
    f_hz: Vec<f64>,
    eps_real: Vec<f64>,
    eps_imag: Vec<f64>,
    d_min_m: f64,
    d_max_m: f64,
}

/// Frequency-tabulated permittivities for named particle materials, with
/// the physical diameter range each entry is valid for.
///
/// Lookups interpolate each component linearly against `log f` between
/// tabulated nodes and refuse frequencies outside the tabulated span.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    records: BTreeMap<String, MaterialRecord>,
}

impl MaterialTable {
    /// Parse the six-column CSV format. The header line must match
    /// `material,f_hz,eps_real,eps_imag,d_min_m,d_max_m` exactly.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == TABLE_HEADER => {}
            Some((_, h)) => {
                return Err(Error::MaterialTable {
                    line: 1,
                    what: format!("expected header `{TABLE_HEADER}`, found `{}`", h.trim()),
                })
            }
            None => {
                return Err(Error::MaterialTable {
                    line: 1,
                    what: "empty input".into(),
                })
            }
        }

        let mut records: BTreeMap<String, MaterialRecord> = BTreeMap::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 6 {
                return Err(Error::MaterialTable {
                    line: line_no,
                    what: format!("expected 6 columns, found {}", cols.len()),
                });
            }
            let name = cols[0];
            if name.is_empty() {
                return Err(Error::MaterialTable {
                    line: line_no,
                    what: "empty material name".into(),
                });
            }
            let num = |i: usize, field: &str| -> Result<f64> {
                cols[i].parse::<f64>().map_err(|_| Error::MaterialTable {
                    line: line_no,
                    what: format!("column `{field}`: not a number: `{}`", cols[i]),
                })
            };
            let f_hz = num(1, "f_hz")?;
            let eps_real = num(2, "eps_real")?;
            let eps_imag = num(3, "eps_imag")?;
            let d_min = num(4, "d_min_m")?;
            let d_max = num(5, "d_max_m")?;
            if !(f_hz.is_finite() && f_hz > 0.0) {
                return Err(Error::MaterialTable {
                    line: line_no,
                    what: format!("f_hz must be finite and positive, got {f_hz}"),
                });
            }
            ComplexPermittivity::new(eps_real, eps_imag).map_err(|_| Error::MaterialTable {
                line: line_no,
                what: format!("invalid permittivity ({eps_real}, {eps_imag})"),
            })?;
            if !(d_min.is_finite() && d_min > 0.0 && d_max.is_finite() && d_max >= d_min) {
                return Err(Error::MaterialTable {
                    line: line_no,
                    what: format!("invalid diameter range [{d_min}, {d_max}]"),
                });
            }

            let rec = records.entry(name.to_string()).or_insert(MaterialRecord {
                f_hz: Vec::new(),
                eps_real: Vec::new(),
                eps_imag: Vec::new(),
                d_min_m: d_min,
                d_max_m: d_max,
            });
            if rec.d_min_m != d_min || rec.d_max_m != d_max {
                return Err(Error::MaterialTable {
                    line: line_no,
                    what: format!("diameter range differs from earlier rows of `{name}`"),
                });
            }
            if rec.f_hz.iter().any(|&f| f == f_hz) {
                return Err(Error::MaterialTable {
                    line: line_no,
                    what: format!("duplicate frequency {f_hz} for `{name}`"),
                });
            }
            rec.f_hz.push(f_hz);
            rec.eps_real.push(eps_real);
            rec.eps_imag.push(eps_imag);
        }

        if records.is_empty() {
            return Err(Error::MaterialTable {
                line: 2,
                what: "no data rows".into(),
            });
        }
        for rec in records.values_mut() {
            let mut order: Vec<usize> = (0..rec.f_hz.len()).collect();
            order.sort_by(|&a, &b| rec.f_hz[a].total_cmp(&rec.f_hz[b]));
            rec.f_hz = order.iter().map(|&i| rec.f_hz[i]).collect();
            rec.eps_real = order.iter().map(|&i| rec.eps_real[i]).collect();
            rec.eps_imag = order.iter().map(|&i| rec.eps_imag[i]).collect();
        }
        Ok(Self { records })
    }

    /// The compiled-in library: polystyrene beads, yeast, and E. coli.
    pub fn builtin() -> Self {
        Self::parse(include_str!("../data/materials.csv")).expect("compiled-in table is valid")
    }

    pub fn names(&self) -> Vec<&str> {
        self.records.keys().map(String::as_str).collect()
    }

    fn record(&self, name: &str) -> Result<&MaterialRecord> {
        self.records.get(name).ok_or_else(|| Error::UnknownMaterial {
            name: name.to_string(),
        })
    }

    /// Valid particle diameter span for a material.
    pub fn diameter_range_m(&self, name: &str) -> Result<(f64, f64)> {
        let rec = self.record(name)?;
        Ok((rec.d_min_m, rec.d_max_m))
    }

    /// Tabulated frequency span for a material.
    pub fn frequency_range_hz(&self, name: &str) -> Result<(f64, f64)> {
        let rec = self.record(name)?;
        Ok((rec.f_hz[0], *rec.f_hz.last().expect("non-empty record")))
    }

    /// Tabulated rows for a material, sorted by frequency, as
    /// `(f_hz, permittivity)` pairs.
    pub fn rows(&self, name: &str) -> Result<Vec<(f64, ComplexPermittivity)>> {
        let rec = self.record(name)?;
        Ok(rec
            .f_hz
            .iter()
            .zip(rec.eps_real.iter().zip(rec.eps_imag.iter()))
            .map(|(&f, (&re, &im))| (f, ComplexPermittivity { eps_real: re, eps_imag: im }))
            .collect())
    }

    /// Permittivity of `name` at `f_hz`, interpolated against `log f`.
    pub fn permittivity(&self, name: &str, f_hz: f64) -> Result<ComplexPermittivity> {
        if !(f_hz.is_finite() && f_hz > 0.0) {
            return Err(Error::Domain {
                name: "f_hz",
                value: f_hz,
                expected: "finite and > 0",
            });
        }
        let rec = self.record(name)?;
        let (min, max) = (rec.f_hz[0], *rec.f_hz.last().expect("non-empty record"));
        if f_hz < min || f_hz > max {
            return Err(Error::FrequencyRange {
                f_hz,
                min_hz: min,
                max_hz: max,
            });
        }
        let i = match rec.f_hz.iter().position(|&f| f >= f_hz) {
            Some(0) => {
                return ComplexPermittivity::new(rec.eps_real[0], rec.eps_imag[0]);
            }
            Some(i) => i,
            None => unreachable!("f_hz <= max"),
        };
        if rec.f_hz[i] == f_hz {
            return ComplexPermittivity::new(rec.eps_real[i], rec.eps_imag[i]);
        }
        let (f0, f1) = (rec.f_hz[i - 1], rec.f_hz[i]);
        let t = (f_hz.ln() - f0.ln()) / (f1.ln() - f0.ln());
        let lerp = |a: f64, b: f64| a + t * (b - a);
        ComplexPermittivity::new(
            lerp(rec.eps_real[i - 1], rec.eps_real[i]),
            lerp(rec.eps_imag[i - 1], rec.eps_imag[i]),
        )
    }
}
