//! Uniformly sampled time-domain records.

use crate::error::{Error, Result};

/// A real-valued signal sampled at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    /// Sample rate in hertz.
    pub fs_hz: f64,
    /// Sample values in volts.
    pub samples: Vec<f64>,
}

impl Trace {
    pub fn new(fs_hz: f64, samples: Vec<f64>) -> Result<Self> {
        if !(fs_hz.is_finite() && fs_hz > 0.0) {
            return Err(Error::Domain {
                name: "fs_hz",
                value: fs_hz,
                expected: "finite and > 0",
            });
        }
        Ok(Self { fs_hz, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs_hz
    }

    /// Sample times, `i / fs`.
    pub fn time_axis(&self) -> Vec<f64> {
        (0..self.samples.len()).map(|i| i as f64 / self.fs_hz).collect()
    }

    /// Copy with the mean removed.
    pub fn ac_coupled(&self) -> Trace {
        if self.samples.is_empty() {
            return self.clone();
        }
        let mean = self.samples.iter().sum::<f64>() / self.samples.len() as f64;
        Trace {
            fs_hz: self.fs_hz,
            samples: self.samples.iter().map(|v| v - mean).collect(),
        }
    }

    /// Two-column CSV, `t_s,v_volts`, one row per sample.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.samples.len() + 1));
        out.push_str("t_s,v_volts\n");
        for (i, v) in self.samples.iter().enumerate() {
            let t = i as f64 / self.fs_hz;
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }

    /// Parse the `to_csv` format. The sample rate is recovered from the
    /// time column, which must be uniform; at least two rows are needed.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "t_s,v_volts" => {}
            Some((_, h)) => {
                return Err(Error::TraceFormat {
                    line: 1,
                    what: format!("expected header `t_s,v_volts`, found `{}`", h.trim()),
                })
            }
            None => {
                return Err(Error::TraceFormat {
                    line: 1,
                    what: "empty input".into(),
                })
            }
        }
        let mut times = Vec::new();
        let mut samples = Vec::new();
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let t = parse_field(cols.next(), line_no, "t_s")?;
            let v = parse_field(cols.next(), line_no, "v_volts")?;
            if cols.next().is_some() {
                return Err(Error::TraceFormat {
                    line: line_no,
                    what: "expected exactly 2 columns".into(),
                });
            }
            times.push(t);
            samples.push(v);
        }
        if times.len() < 2 {
            return Err(Error::TraceFormat {
                line: times.len() + 1,
                what: "need at least 2 rows to recover the sample rate".into(),
            });
        }
        let dt = times[1] - times[0];
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::TraceFormat {
                line: 3,
                what: "time column must be strictly increasing".into(),
            });
        }
        for (i, w) in times.windows(2).enumerate() {
            let step = w[1] - w[0];
            if (step - dt).abs() > 1e-6 * dt {
                return Err(Error::TraceFormat {
                    line: i + 3,
                    what: "time column must be uniformly spaced".into(),
                });
            }
        }
        Trace::new(1.0 / dt, samples)
    }
}

fn parse_field(field: Option<&str>, line: usize, name: &str) -> Result<f64> {
    let s = field.ok_or_else(|| Error::TraceFormat {
        line,
        what: format!("missing column `{name}`"),
    })?;
    s.trim().parse::<f64>().map_err(|_| Error::TraceFormat {
        line,
        what: format!("column `{name}`: not a number: `{}`", s.trim()),
    })
}
