//! JSON shapes shared by the library and the CLI. Complex numbers travel as
//! `[re, im]` pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{PureState, C64};

/// `{"coeffs": [[re, im], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeDocument {
    pub coeffs: Vec<[f64; 2]>,
}

impl AmplitudeDocument {
    pub fn from_coeffs(coeffs: &[C64]) -> Self {
        Self { coeffs: to_pairs(coeffs) }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// serde_json writes the shortest representation that round-trips, which
    /// always carries enough digits to recover the exact f64.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain numeric document")
    }

    pub fn complex(&self) -> Vec<C64> {
        from_pairs(&self.coeffs)
    }
}

pub fn to_pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

pub fn from_pairs(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

pub fn state_pairs(state: &PureState) -> Vec<[f64; 2]> {
    to_pairs(state.amplitudes())
}

/// A closed-form value next to its independently computed counterpart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub closed_form: f64,
    pub oracle: f64,
    pub difference: f64,
}

impl Comparison {
    pub fn new(closed_form: f64, oracle: f64) -> Self {
        Self { closed_form, oracle, difference: (closed_form - oracle).abs() }
    }
}
