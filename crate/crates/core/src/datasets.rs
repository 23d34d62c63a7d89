//! Relative humidity of air, May 2007 and May 2008, Haarweg Wageningen
//! weather station (31 daily values each).

use crate::beta_model::Sample;

pub const MAY_2007: [f64; 31] = [
    0.40, 0.44, 0.50, 0.55, 0.58, 0.62, 0.65, 0.69, //
    0.72, 0.72, 0.73, 0.75, 0.77, 0.80, 0.81, 0.81, //
    0.83, 0.83, 0.85, 0.85, 0.85, 0.85, 0.86, 0.86, //
    0.87, 0.87, 0.89, 0.92, 0.94, 0.94, 0.97,
];

pub const MAY_2008: [f64; 31] = [
    0.39, 0.40, 0.42, 0.43, 0.43, 0.43, 0.44, 0.46, //
    0.48, 0.49, 0.51, 0.52, 0.53, 0.54, 0.56, 0.59, //
    0.62, 0.64, 0.66, 0.73, 0.75, 0.76, 0.83, 0.85, //
    0.88, 0.91, 0.92, 0.92, 0.95, 0.97, 0.98,
];

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 2] = ["may2007", "may2008"];

pub fn by_name(name: &str) -> Option<Sample> {
    let values: &[f64] = match name.to_ascii_lowercase().as_str() {
        "may2007" => &MAY_2007,
        "may2008" => &MAY_2008,
        _ => return None,
    };
    Some(Sample::new(values.to_vec()).expect("embedded data lies in [0, 1]"))
}
