//! Strict TOML run configuration. Unknown keys are rejected so parameter
//! typos cannot silently fall back to defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fanoatom::fitting::ScatterGeometry;
use fanoatom::resonator::{BackgroundPhase, CouplingProfile, ResonatorConfig};
use fanoatom::{CavityChannel, CouplingPoint, GiantAtomConfig, Medium, QuasiDirectChannel};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub atom: Option<AtomSection>,
    pub medium: MediumSection,
    pub channel: Option<ChannelSection>,
    pub grid: Option<GridSection>,
    pub fit: Option<FitSection>,
    pub switch: Option<SwitchSection>,
    pub oracle: Option<OracleSection>,
    pub resonator: Option<ResonatorSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AtomSection {
    pub omega0_ghz: f64,
    pub gamma0_ghz: f64,
    /// Uniform layout: point count with a common spacing and rate.
    pub points: Option<usize>,
    pub spacing_m: Option<f64>,
    pub coupling_rate_ghz: Option<f64>,
    /// Explicit layout: one position and one rate per point.
    pub positions_m: Option<Vec<f64>>,
    pub rates_ghz: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    pub eps_eff: f64,
    pub group_velocity_m_per_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// "none", "direct", or "cavity".
    pub kind: String,
    pub mu: Option<f64>,
    pub phi_rad: Option<f64>,
    pub omega_b_ghz: Option<f64>,
    pub gamma_big_b_ghz: Option<f64>,
    pub gamma_b_left_ghz: Option<f64>,
    pub gamma_b_right_ghz: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub min_ghz: f64,
    pub max_ghz: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// "mioa", "msp", or "lorentzian".
    pub model: Option<String>,
    /// Names of the parameters to vary; the rest stay fixed.
    pub free: Option<Vec<String>>,
    pub max_iterations: Option<usize>,
    pub multi_start: Option<usize>,
    pub seed: Option<u64>,
    /// Per-parameter starting values overriding the section defaults.
    pub init: Option<std::collections::BTreeMap<String, f64>>,
    /// Per-parameter [lower, upper] bounds overriding the defaults.
    pub bounds: Option<std::collections::BTreeMap<String, [f64; 2]>>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SwitchSection {
    pub scan_min_ghz: f64,
    pub scan_max_ghz: f64,
    pub tolerance_ghz: Option<f64>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// Detuning span in units of the total linewidth Gamma0 + gamma_c.
    pub span_linewidths: Option<f64>,
    pub points: Option<usize>,
    pub tolerance: Option<f64>,
    pub horizon_ns: Option<f64>,
    pub amplitude_re: Option<f64>,
    pub amplitude_im: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSection {
    pub omega_c_ghz: f64,
    pub gamma_intrinsic_ghz: f64,
    pub length_m: f64,
    /// Constant coupling density, sqrt(GHz)/m ...
    pub coupling_density: Option<f64>,
    /// ... or (position, value) samples with linear interpolation.
    pub coupling_profile: Option<Vec<[f64; 2]>>,
    pub background_mu: Option<f64>,
    pub background_phi: Option<f64>,
    /// "constant" (phase in radians) or "length" (phase scaled by k).
    pub phase_mode: Option<String>,
}

/// Parse and validate a configuration file. Unknown keys, malformed
/// syntax, and out-of-range values are all reported with the offending
/// key.
pub fn parse_config(path: &Path) -> CliResult<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: RunConfig =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    // surface range errors eagerly so every command sees the same checks
    config.medium()?;
    if config.atom.is_some() {
        config.atom_config()?;
    }
    if config.channel.is_some() {
        config.quasi_direct_channel()?;
    }
    if let Some(grid) = &config.grid {
        grid.frequencies()?;
    }
    if config.resonator.is_some() {
        config.resonator_config()?;
    }
    Ok(config)
}

impl RunConfig {
    pub fn medium(&self) -> CliResult<Medium> {
        let section = &self.medium;
        match section.group_velocity_m_per_s {
            Some(vg) => Medium::new(section.eps_eff, vg),
            None => Medium::from_permittivity(section.eps_eff),
        }
        .map_err(|e| CliError::Config(format!("medium.{e}")))
    }

    pub fn atom_config(&self) -> CliResult<GiantAtomConfig> {
        let atom = self
            .atom
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [atom] section".into()))?;
        let medium = self.medium()?;
        let points = atom.coupling_points()?;
        GiantAtomConfig::new(atom.omega0_ghz, atom.gamma0_ghz, points, medium)
            .map_err(|e| CliError::Config(format!("atom.{e}")))
    }

    pub fn geometry(&self) -> CliResult<ScatterGeometry> {
        let config = self.atom_config()?;
        ScatterGeometry::new(
            config.points.iter().map(|p| p.position).collect(),
            config.medium,
        )
        .map_err(|e| CliError::Config(format!("atom.{e}")))
    }

    pub fn quasi_direct_channel(&self) -> CliResult<QuasiDirectChannel> {
        let Some(section) = &self.channel else {
            return Ok(QuasiDirectChannel::None);
        };
        let channel = match section.kind.as_str() {
            "none" => QuasiDirectChannel::None,
            "direct" => QuasiDirectChannel::Direct {
                mu: section
                    .mu
                    .ok_or_else(|| CliError::Config("channel.mu is required".into()))?,
                phi: section
                    .phi_rad
                    .ok_or_else(|| CliError::Config("channel.phi_rad is required".into()))?,
            },
            "cavity" => QuasiDirectChannel::Cavity(CavityChannel {
                omega_b: section
                    .omega_b_ghz
                    .ok_or_else(|| CliError::Config("channel.omega_b_ghz is required".into()))?,
                intrinsic_loss: section.gamma_big_b_ghz.ok_or_else(|| {
                    CliError::Config("channel.gamma_big_b_ghz is required".into())
                })?,
                coupling_left: section.gamma_b_left_ghz.ok_or_else(|| {
                    CliError::Config("channel.gamma_b_left_ghz is required".into())
                })?,
                coupling_right: section.gamma_b_right_ghz.ok_or_else(|| {
                    CliError::Config("channel.gamma_b_right_ghz is required".into())
                })?,
            }),
            other => {
                return Err(CliError::Config(format!(
                    "channel.kind: unknown kind `{other}` (expected none, direct, or cavity)"
                )))
            }
        };
        channel
            .validate()
            .map_err(|e| CliError::Config(format!("channel.{e}")))?;
        Ok(channel)
    }

    pub fn resonator_config(&self) -> CliResult<ResonatorConfig> {
        let section = self
            .resonator
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [resonator] section".into()))?;
        let coupling = match (&section.coupling_density, &section.coupling_profile) {
            (Some(g), None) => CouplingProfile::Constant(*g),
            (None, Some(samples)) => {
                CouplingProfile::Tabulated(samples.iter().map(|s| (s[0], s[1])).collect())
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "resonator: give either coupling_density or coupling_profile, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "resonator: coupling_density or coupling_profile is required".into(),
                ))
            }
        };
        let phase_mode = match section.phase_mode.as_deref() {
            None | Some("constant") => BackgroundPhase::Constant,
            Some("length") => BackgroundPhase::LengthScaled,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "resonator.phase_mode: unknown mode `{other}` (expected constant or length)"
                )))
            }
        };
        let config = ResonatorConfig {
            omega_c: section.omega_c_ghz,
            intrinsic_loss: section.gamma_intrinsic_ghz,
            length: section.length_m,
            coupling,
            background_mu: section.background_mu.unwrap_or(0.0),
            background_phi: section.background_phi.unwrap_or(0.0),
            phase_mode,
            medium: self.medium()?,
        };
        config
            .validate()
            .map_err(|e| CliError::Config(format!("resonator.{e}")))?;
        Ok(config)
    }
}

impl AtomSection {
    fn coupling_points(&self) -> CliResult<Vec<CouplingPoint>> {
        match (
            &self.positions_m,
            &self.rates_ghz,
            self.points,
            self.spacing_m,
            self.coupling_rate_ghz,
        ) {
            (Some(positions), Some(rates), None, None, None) => {
                if positions.len() != rates.len() {
                    return Err(CliError::Config(
                        "atom.positions_m and atom.rates_ghz must have the same length".into(),
                    ));
                }
                Ok(positions
                    .iter()
                    .zip(rates.iter())
                    .map(|(&position, &rate)| CouplingPoint { position, rate })
                    .collect())
            }
            (None, None, Some(n), Some(spacing), Some(rate)) => Ok((0..n)
                .map(|j| CouplingPoint {
                    position: j as f64 * spacing,
                    rate,
                })
                .collect()),
            _ => Err(CliError::Config(
                "atom: give either (points, spacing_m, coupling_rate_ghz) or (positions_m, rates_ghz)"
                    .into(),
            )),
        }
    }
}

impl GridSection {
    pub fn frequencies(&self) -> CliResult<Vec<f64>> {
        if !self.min_ghz.is_finite()
            || !self.max_ghz.is_finite()
            || self.min_ghz <= 0.0
            || self.max_ghz <= self.min_ghz
        {
            return Err(CliError::Config("grid: need 0 < min_ghz < max_ghz".into()));
        }
        if self.count < 2 {
            return Err(CliError::Config("grid.count: need at least 2".into()));
        }
        Ok(fanoatom::numeric::linspace(
            self.min_ghz,
            self.max_ghz,
            self.count,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const THREE_POINT: &str = r#"
[atom]
omega0_ghz = 2.8734947677952266
gamma0_ghz = 2.5e-4
points = 3
spacing_m = 0.02054
coupling_rate_ghz = 2.0e-4

[medium]
eps_eff = 6.45

[channel]
kind = "direct"
mu = 0.429
phi_rad = -1.03

[grid]
min_ghz = 2.868
max_ghz = 2.879
count = 201
"#;

    fn write_config(text: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(text.as_bytes()).unwrap();
        file
    }

    #[test]
    fn parses_minimal_config() {
        let text = "[atom]\nomega0_ghz = 4.0\ngamma0_ghz = 0.0\npoints = 1\nspacing_m = 0.0\ncoupling_rate_ghz = 1e-4\n[medium]\neps_eff = 1.0\n";
        let file = write_config(text);
        let config = parse_config(file.path()).unwrap();
        let atom = config.atom_config().unwrap();
        assert_eq!(atom.points.len(), 1);
        assert!(matches!(
            config.quasi_direct_channel().unwrap(),
            QuasiDirectChannel::None
        ));
    }

    #[test]
    fn parses_three_point_config() {
        let file = write_config(THREE_POINT);
        let config = parse_config(file.path()).unwrap();
        let atom = config.atom_config().unwrap();
        assert_eq!(atom.points.len(), 3);
        assert_eq!(atom.uniform_rate(), Some(2.0e-4));
        let grid = config.grid.as_ref().unwrap().frequencies().unwrap();
        assert_eq!(grid.len(), 201);
    }

    #[test]
    fn unknown_key_is_rejected_by_name() {
        let file = write_config(&format!("{THREE_POINT}\n[typo_section]\nx = 1\n"));
        let err = parse_config(file.path()).unwrap_err();
        assert!(err.to_string().contains("typo_section"), "{err}");

        let file = write_config(&THREE_POINT.replace("gamma0_ghz", "gamma0_gz"));
        let err = parse_config(file.path()).unwrap_err();
        assert!(err.to_string().contains("gamma0_gz"), "{err}");
    }

    #[test]
    fn negative_gamma0_names_the_key() {
        let file = write_config(&THREE_POINT.replace("gamma0_ghz = 2.5e-4", "gamma0_ghz = -1.0"));
        let err = parse_config(file.path()).unwrap_err();
        assert!(err.to_string().contains("gamma0"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_file_is_a_config_error() {
        let err = parse_config(Path::new("/nonexistent/fanoatom.toml")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn serialize_parse_round_trip() {
        let file = write_config(THREE_POINT);
        let config = parse_config(file.path()).unwrap();
        let text = toml::to_string(&config).unwrap();
        let reparsed: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(config, reparsed);
    }

    #[test]
    fn cavity_channel_requires_all_rates() {
        let text = THREE_POINT.replace(
            "kind = \"direct\"\nmu = 0.429\nphi_rad = -1.03",
            "kind = \"cavity\"\nomega_b_ghz = 2.97\ngamma_big_b_ghz = 0.01\ngamma_b_left_ghz = 0.29",
        );
        let file = write_config(&text);
        let err = parse_config(file.path()).unwrap_err();
        assert!(err.to_string().contains("gamma_b_right_ghz"), "{err}");
    }

    #[test]
    fn explicit_positions_layout() {
        let text = r#"
[atom]
omega0_ghz = 4.0
gamma0_ghz = 1e-4
positions_m = [0.0, 0.01, 0.03]
rates_ghz = [1e-4, 2e-4, 1e-4]
[medium]
eps_eff = 6.45
"#;
        let file = write_config(text);
        let config = parse_config(file.path()).unwrap();
        let atom = config.atom_config().unwrap();
        assert_eq!(atom.points.len(), 3);
        assert_eq!(atom.uniform_spacing(), None);
    }
}
