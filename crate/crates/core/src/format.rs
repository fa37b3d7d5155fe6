//! Number formatting for CSV output.

/// Shortest round-trip decimal, switching to scientific notation for
/// nonzero magnitudes below `1e-4`.
pub fn csv_number(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Comma-joined [`csv_number`]s.
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|&v| csv_number(v)).collect::<Vec<_>>().join(",")
}
