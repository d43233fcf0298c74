//! Error type shared by all core modules.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A scalar argument is outside its mathematical or physical domain.
    #[error("{name} = {value:e} outside valid domain {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Material name not present in the loaded table.
    #[error("unknown material {name:?}")]
    UnknownMaterial { name: String },

    /// Frequency outside the tabulated or supported range.
    #[error("frequency {f_hz:e} Hz outside supported range [{min_hz:e}, {max_hz:e}] Hz")]
    FrequencyRange { f_hz: f64, min_hz: f64, max_hz: f64 },

    /// Clausius-Mossotti denominator vanishes within tolerance.
    #[error("mixing-factor denominator magnitude {denom:e} below relative tolerance {limit:e}")]
    MixingSingular { denom: f64, limit: f64 },

    /// Evaluation point falls inside the exclusion radius of an electrode
    /// edge, where the analytic field diverges.
    #[error("point is {distance_m:e} m from an electrode edge, inside the {limit_m:e} m exclusion radius")]
    EdgeProximity { distance_m: f64, limit_m: f64 },

    /// A field-map window contains no valid (non-singular) cells.
    #[error("field-map window contains no valid cells")]
    EmptyMap,

    /// A trace carries no structure the requested analysis can use.
    #[error("trace is degenerate for this analysis: {what}")]
    DegenerateTrace { what: &'static str },

    /// Input trace sample rate does not match the configured chain rate.
    #[error("input sample rate {input_hz} Hz does not match configured rate {expected_hz} Hz")]
    SampleRateMismatch { input_hz: f64, expected_hz: f64 },

    /// Digital filter design constraints violated.
    #[error("filter design: {what}")]
    FilterDesign { what: &'static str },

    /// Malformed material-table content.
    #[error("material table line {line}: {what}")]
    MaterialTable { line: usize, what: String },

    /// Malformed trace file content.
    #[error("trace data line {line}: {what}")]
    TraceFormat { line: usize, what: String },
}

pub type Result<T> = core::result::Result<T, Error>;
