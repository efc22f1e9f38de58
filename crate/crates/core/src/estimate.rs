use std::fmt;

use serde::{Deserialize, Serialize};

/// Where a tail value came from. Asymptotic values are expansion values,
/// not error-bounded approximations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Asymptotic { order: u8 },
    ExactSeries,
    Simulated,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Asymptotic { order } => write!(f, "asymptotic-order-{order}"),
            Provenance::ExactSeries => f.write_str("exact-series"),
            Provenance::Simulated => f.write_str("simulated"),
        }
    }
}

/// A tail probability `P{X > x}` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    pub provenance: Provenance,
    /// 95% confidence half-width (simulation only).
    pub half_width: Option<f64>,
    /// Numerical uncertainty of a series tail.
    pub uncertainty: Option<f64>,
}

impl TailEstimate {
    pub fn asymptotic(value: f64, order: u8) -> Self {
        TailEstimate { value, provenance: Provenance::Asymptotic { order }, half_width: None, uncertainty: None }
    }

    pub fn exact(value: f64, uncertainty: f64) -> Self {
        TailEstimate { value, provenance: Provenance::ExactSeries, half_width: None, uncertainty: Some(uncertainty) }
    }

    pub fn simulated(value: f64, half_width: f64) -> Self {
        TailEstimate { value, provenance: Provenance::Simulated, half_width: Some(half_width), uncertainty: None }
    }
}
