use serde::{Deserialize, Serialize};

use crate::error::{QfcError, Result};

/// Physical unit of a scan's abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbscissaUnit {
    #[serde(rename = "mW")]
    Milliwatt,
    #[serde(rename = "nm")]
    Nanometer,
    #[serde(rename = "GHz")]
    Gigahertz,
    #[serde(rename = "MHz")]
    Megahertz,
    #[serde(rename = "ns")]
    Nanosecond,
}

impl AbscissaUnit {
    pub fn suffix(self) -> &'static str {
        match self {
            AbscissaUnit::Milliwatt => "mW",
            AbscissaUnit::Nanometer => "nm",
            AbscissaUnit::Gigahertz => "GHz",
            AbscissaUnit::Megahertz => "MHz",
            AbscissaUnit::Nanosecond => "ns",
        }
    }

    pub fn from_suffix(s: &str) -> Option<Self> {
        Some(match s {
            "mW" => AbscissaUnit::Milliwatt,
            "nm" => AbscissaUnit::Nanometer,
            "GHz" => AbscissaUnit::Gigahertz,
            "MHz" => AbscissaUnit::Megahertz,
            "ns" => AbscissaUnit::Nanosecond,
            _ => return None,
        })
    }
}

/// Ordered `(abscissa, value, sigma)` records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSeries {
    pub unit: AbscissaUnit,
    pub abscissa: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma: Option<Vec<f64>>,
}

impl ScanSeries {
    pub fn new(
        unit: AbscissaUnit,
        abscissa: Vec<f64>,
        values: Vec<f64>,
        sigma: Option<Vec<f64>>,
    ) -> Result<Self> {
        let series = Self {
            unit,
            abscissa,
            values,
            sigma,
        };
        series.validate()?;
        Ok(series)
    }

    pub fn validate(&self) -> Result<()> {
        if self.abscissa.len() != self.values.len() {
            return Err(QfcError::invalid(format!(
                "{} abscissa points but {} values",
                self.abscissa.len(),
                self.values.len()
            )));
        }
        if self.abscissa.iter().chain(&self.values).any(|v| !v.is_finite()) {
            return Err(QfcError::invalid("series contains non-finite entries"));
        }
        if let Some(w) = self.abscissa.windows(2).find(|w| w[1] <= w[0]) {
            return Err(QfcError::invalid(format!(
                "abscissa not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(sigma) = &self.sigma {
            if sigma.len() != self.values.len() {
                return Err(QfcError::invalid("sigma length differs from values"));
            }
            if sigma.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(QfcError::invalid("sigma entries must be finite and > 0"));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Counting-statistics uncertainties, `sqrt(value)` floored at 1.
    pub fn with_poisson_sigma(mut self) -> Self {
        self.sigma = Some(self.values.iter().map(|v| v.max(0.0).sqrt().max(1.0)).collect());
        self
    }

    /// Per-point weights `1 / sigma`; unit weights when sigma is absent.
    pub(crate) fn inverse_sigma(&self) -> Vec<f64> {
        match &self.sigma {
            Some(s) => s.iter().map(|v| 1.0 / v).collect(),
            None => vec![1.0; self.len()],
        }
    }
}
