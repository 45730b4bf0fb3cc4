//! Oscillating period by peak counting.

use crate::error::{Error, Result};
use crate::extrema::find_extrema;
use crate::types::Imf;

/// Samples per oscillation: series length over the number of interior maxima.
///
/// The value is kept unrounded; round only for display.
pub fn estimate_period(imf: &Imf) -> Result<f64> {
    period_of(&imf.values).ok_or(Error::UndefinedPeriod)
}

pub(crate) fn period_of(values: &[f64]) -> Option<f64> {
    match find_extrema(values).maxima.len() {
        0 => None,
        peaks => Some(values.len() as f64 / peaks as f64),
    }
}
