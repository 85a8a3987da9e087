//! Measured-spectrum ingestion: two- or three-column delimited text
//! (frequency_GHz, transmission[, sigma]), comma or whitespace separated,
//! with an optional single header line.

use std::path::Path;

use fanoatom::fitting::{Spectrum, SpectrumPoint};

use crate::error::{CliError, CliResult};

/// Ordinate scale of the input file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeScale {
    /// Transmission probability as-is.
    Linear,
    /// Power ratio in dB, converted via T = 10^(value/10).
    Decibel,
}

pub fn ingest_spectrum(path: &Path, scale: AmplitudeScale) -> CliResult<Spectrum> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_spectrum(&text, scale).map_err(|e| match e {
        CliError::Data(msg) => CliError::Data(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_spectrum(text: &str, scale: AmplitudeScale) -> CliResult<Spectrum> {
    let mut rows: Vec<(f64, f64, Option<f64>)> = Vec::new();
    let mut columns: Option<usize> = None;
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed
            .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .collect();
        let values: Result<Vec<f64>, _> = fields.iter().map(|s| s.parse::<f64>()).collect();
        let values = match values {
            Ok(v) => v,
            Err(_) if rows.is_empty() && columns.is_none() => {
                // a single header line before any data is allowed
                columns = Some(fields.len());
                continue;
            }
            Err(_) => {
                return Err(CliError::Data(format!(
                    "line {line_no}: non-numeric cell in `{trimmed}`"
                )));
            }
        };
        if values.len() != 2 && values.len() != 3 {
            return Err(CliError::Data(format!(
                "line {line_no}: expected 2 or 3 columns, found {}",
                values.len()
            )));
        }
        let transmission = match scale {
            AmplitudeScale::Linear => values[1],
            AmplitudeScale::Decibel => 10f64.powf(values[1] / 10.0),
        };
        rows.push((values[0], transmission, values.get(2).copied()));
    }
    if rows.len() < 2 {
        return Err(CliError::Data(format!(
            "need at least 2 data rows, found {}",
            rows.len()
        )));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(CliError::Data(format!(
                "duplicate frequency {} GHz",
                pair[0].0
            )));
        }
    }
    let points = rows
        .into_iter()
        .map(|(frequency, transmission, sigma)| SpectrumPoint {
            frequency,
            transmission,
            sigma,
        })
        .collect();
    Spectrum::new(points).map_err(|e| CliError::Data(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_column_csv() {
        let spectrum = parse_spectrum("4.0,0.5\n4.1,0.6\n", AmplitudeScale::Linear).unwrap();
        assert_eq!(spectrum.len(), 2);
        assert_eq!(spectrum.points[0].transmission, 0.5);
        assert_eq!(spectrum.points[0].sigma, None);
    }

    #[test]
    fn parses_whitespace_and_header() {
        let text = "freq_ghz  T  sigma\n4.0  0.5  0.01\n4.1\t0.6\t0.02\n";
        let spectrum = parse_spectrum(text, AmplitudeScale::Linear).unwrap();
        assert_eq!(spectrum.len(), 2);
        assert_eq!(spectrum.points[1].sigma, Some(0.02));
    }

    #[test]
    fn sorts_rows_by_frequency() {
        let spectrum =
            parse_spectrum("4.2,0.7\n4.0,0.5\n4.1,0.6\n", AmplitudeScale::Linear).unwrap();
        let freqs = spectrum.frequencies();
        assert_eq!(freqs, vec![4.0, 4.1, 4.2]);
    }

    #[test]
    fn decibel_conversion() {
        let spectrum = parse_spectrum("4.0,-3.0103\n4.1,0.0\n", AmplitudeScale::Decibel).unwrap();
        assert!((spectrum.points[0].transmission - 0.5).abs() < 1e-5);
        assert!((spectrum.points[1].transmission - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        // too few rows
        let err = parse_spectrum("4.0,0.5\n", AmplitudeScale::Linear).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        // non-numeric cell past the header
        let err = parse_spectrum("4.0,0.5\nx,0.6\n", AmplitudeScale::Linear).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        // duplicate frequencies
        let err = parse_spectrum("4.0,0.5\n4.0,0.6\n", AmplitudeScale::Linear).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        // wrong column count
        let err =
            parse_spectrum("4.0,0.5,0.01,9\n4.1,0.6,0.01,9\n", AmplitudeScale::Linear).unwrap_err();
        assert!(err.to_string().contains("columns"), "{err}");
    }
}
