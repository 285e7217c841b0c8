use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Evaluated sides of an inequality `lhs >= rhs`.
///
/// `holds` is true exactly when `margin = lhs - rhs >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
    pub tolerance: f64,
    /// Individual measures entering the two sides, in the order they appear.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<f64>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl InequalityReport {
    pub fn new(lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = lhs - rhs;
        Self {
            lhs,
            rhs,
            margin,
            holds: margin >= -tolerance,
            tolerance,
            factors: Vec::new(),
            params: BTreeMap::new(),
        }
    }

    pub fn with_factors(mut self, factors: Vec<f64>) -> Self {
        self.factors = factors;
        self
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }

    /// `lhs / rhs`; infinite when `rhs` vanishes.
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// Two evaluations of the same quantity along different routes.
///
/// `margin` is their absolute (or, when `relative` is set, relative)
/// difference; `consistent` is `margin <= tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub first: f64,
    pub second: f64,
    pub margin: f64,
    pub relative: bool,
    pub consistent: bool,
    pub tolerance: f64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl ConsistencyReport {
    pub fn absolute(first: f64, second: f64, tolerance: f64) -> Self {
        let margin = (first - second).abs();
        Self {
            first,
            second,
            margin,
            relative: false,
            consistent: margin <= tolerance,
            tolerance,
            params: BTreeMap::new(),
        }
    }

    pub fn relative(first: f64, second: f64, tolerance: f64) -> Self {
        let scale = first.abs().max(second.abs());
        let margin = if scale == 0.0 { 0.0 } else { (first - second).abs() / scale };
        Self {
            first,
            second,
            margin,
            relative: true,
            consistent: margin <= tolerance,
            tolerance,
            params: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_owned(), value);
        self
    }
}
