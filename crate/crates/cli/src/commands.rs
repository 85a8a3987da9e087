//! Subcommand orchestration: build core types from the configuration,
//! run the requested computation, and emit data files, a report, and a
//! plot into the output directory.

use std::fmt::Write as _;
use std::path::Path;

use fanoatom::analysis::{self, relaxation_time, switch_scan};
use fanoatom::fitting::{self, fit, FitModel, FitOptions, FitProblem, FreeParameter, Spectrum};
use fanoatom::langevin::{sigma_frequency_domain, sigma_time_domain, DriveSpec};
use fanoatom::numeric::linspace;
use fanoatom::resonator;
use fanoatom::scatter::{self, channel_mu_phi, CouplingMode};
use fanoatom::{Complex64, QuasiDirectChannel};

use crate::cli::{Cli, Command, GridArg, ModeArg, ScanArg};
use crate::config::{parse_config, RunConfig};
use crate::error::{CliError, CliResult, CoreResultExt};
use crate::ingest::{ingest_spectrum, AmplitudeScale};
use crate::output::{ensure_dir, out_path, svg_plot, table, write_file, Series};

pub fn run(cli: Cli) -> CliResult<()> {
    let config = parse_config(&cli.config)?;
    ensure_dir(&cli.out)?;
    match &cli.command {
        Command::Spectrum { grid, mode } => spectrum_cmd(&config, &cli.out, grid, *mode),
        Command::Fit {
            data,
            db,
            mode,
            seed,
            multi_start,
        } => fit_cmd(&config, &cli.out, data, *db, *mode, *seed, *multi_start),
        Command::T1 => t1_cmd(&config, &cli.out),
        Command::Switch { scan } => switch_cmd(&config, &cli.out, scan),
        Command::Resonator { grid } => resonator_cmd(&config, &cli.out, grid),
        Command::Oracle { points } => oracle_cmd(&config, &cli.out, *points),
    }
}

fn grid_from(config: &RunConfig, flag: &Option<GridArg>) -> CliResult<Vec<f64>> {
    if let Some(grid) = flag {
        if !grid.lo.is_finite()
            || !grid.hi.is_finite()
            || grid.lo <= 0.0
            || grid.hi <= grid.lo
            || grid.count < 2
        {
            return Err(CliError::Config(
                "--grid: need 0 < lo < hi and at least 2 points".into(),
            ));
        }
        return Ok(linspace(grid.lo, grid.hi, grid.count));
    }
    config
        .grid
        .as_ref()
        .ok_or_else(|| CliError::Config("no [grid] section and no --grid flag".into()))?
        .frequencies()
}

/// Full parameter map of a model from the configuration sections.
fn model_params(
    config: &RunConfig,
    model: FitModel,
) -> CliResult<std::collections::BTreeMap<String, f64>> {
    let atom = config.atom_config()?;
    let channel = config.quasi_direct_channel()?;
    let mut params = std::collections::BTreeMap::new();
    params.insert("omega0".to_string(), atom.omega0);
    params.insert("gamma0".to_string(), atom.gamma0);
    match model {
        FitModel::Mioa | FitModel::Msp => {
            let rate = atom.uniform_rate().ok_or_else(|| {
                CliError::Config("atom: this command requires a uniform coupling rate".into())
            })?;
            params.insert("gamma".to_string(), rate);
        }
        FitModel::Lorentzian => {}
    }
    if model == FitModel::Mioa {
        let (mu, phi) = channel_mu_phi(&channel, atom.omega0).or_cli()?;
        params.insert("mu".to_string(), mu);
        params.insert("phi".to_string(), phi);
    }
    if model == FitModel::Lorentzian {
        let gamma_c =
            scatter::effective_coupling(&atom, atom.omega0, CouplingMode::RateWeighted).or_cli()?;
        params.insert("gamma_eff".to_string(), gamma_c.re.max(1e-9));
    }
    Ok(params)
}

fn spectrum_cmd(
    config: &RunConfig,
    out: &Path,
    grid_flag: &Option<GridArg>,
    mode: Option<ModeArg>,
) -> CliResult<()> {
    let atom = config.atom_config()?;
    let grid = grid_from(config, grid_flag)?;
    let model = mode.unwrap_or(ModeArg::Mioa).model();
    let trace = match model {
        FitModel::Mioa => {
            let channel = config.quasi_direct_channel()?;
            analysis::sweep_spectrum(&atom, &channel, &grid).or_cli()?
        }
        FitModel::Msp => {
            analysis::sweep_spectrum(&atom, &QuasiDirectChannel::None, &grid).or_cli()?
        }
        FitModel::Lorentzian => {
            let params = model_params(config, FitModel::Lorentzian)?;
            let geometry = config.geometry()?;
            let values =
                fitting::model_curve(FitModel::Lorentzian, &params, &geometry, &grid).or_cli()?;
            Spectrum::new(
                grid.iter()
                    .zip(values.iter())
                    .map(|(&frequency, &transmission)| fitting::SpectrumPoint {
                        frequency,
                        transmission,
                        sigma: None,
                    })
                    .collect(),
            )
            .or_cli()?
        }
    };

    let freqs = trace.frequencies();
    let values = trace.values();
    write_file(
        &out_path(out, "spectrum.csv"),
        &table(&["frequency_ghz", "transmission"], &[&freqs, &values]),
    )?;
    write_file(
        &out_path(out, "spectrum.svg"),
        &svg_plot(
            "transmission spectrum",
            "frequency (GHz)",
            "T",
            &[Series {
                label: mode_label(model),
                x: &freqs,
                y: &values,
                scatter: false,
            }],
        ),
    )?;

    let t_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut report = String::new();
    let _ = writeln!(report, "transmission spectrum ({})", mode_label(model));
    let _ = writeln!(report, "omega0: {:.9} GHz", atom.omega0);
    let _ = writeln!(report, "points: {}", freqs.len());
    let _ = writeln!(
        report,
        "grid: {:.9} .. {:.9} GHz",
        freqs.first().unwrap(),
        freqs.last().unwrap()
    );
    let _ = writeln!(report, "T min: {t_min:.6e}");
    let _ = writeln!(report, "T max: {t_max:.6e}");
    if model == FitModel::Mioa {
        let channel = config.quasi_direct_channel()?;
        let (mu, phi) = channel_mu_phi(&channel, atom.omega0).or_cli()?;
        let _ = writeln!(report, "background: mu = {mu:.6}, phi = {phi:.6} rad");
    }
    write_file(&out_path(out, "spectrum_report.txt"), &report)?;
    println!(
        "spectrum: {} points, T in [{t_min:.4}, {t_max:.4}] -> {}",
        freqs.len(),
        out.display()
    );
    Ok(())
}

fn mode_label(model: FitModel) -> &'static str {
    match model {
        FitModel::Mioa => "two-channel",
        FitModel::Msp => "resonant-only",
        FitModel::Lorentzian => "lorentzian",
    }
}

fn default_free(model: FitModel) -> Vec<&'static str> {
    match model {
        FitModel::Mioa => vec!["gamma0", "mu", "phi"],
        FitModel::Msp => vec!["gamma0"],
        FitModel::Lorentzian => vec!["gamma0", "gamma_eff"],
    }
}

fn default_bounds(name: &str) -> Option<(f64, f64)> {
    match name {
        "gamma0" | "gamma" | "gamma_eff" => Some((1e-9, 1.0)),
        "mu" => Some((0.0, 1.0)),
        _ => None,
    }
}

fn fit_cmd(
    config: &RunConfig,
    out: &Path,
    data_path: &Path,
    db: bool,
    mode: Option<ModeArg>,
    seed_flag: Option<u64>,
    multi_start_flag: Option<usize>,
) -> CliResult<()> {
    let section = config.fit.clone().unwrap_or(crate::config::FitSection {
        model: None,
        free: None,
        max_iterations: None,
        multi_start: None,
        seed: None,
        init: None,
        bounds: None,
    });
    let model = match mode {
        Some(m) => m.model(),
        None => match section.model.as_deref() {
            None => FitModel::Mioa,
            Some("mioa") => FitModel::Mioa,
            Some("msp") => FitModel::Msp,
            Some("lorentzian") => FitModel::Lorentzian,
            Some(other) => {
                return Err(CliError::Config(format!(
                    "fit.model: unknown model `{other}`"
                )))
            }
        },
    };

    let scale = if db {
        AmplitudeScale::Decibel
    } else {
        AmplitudeScale::Linear
    };
    let data = ingest_spectrum(data_path, scale)?;
    let weighted = data.points.iter().all(|p| p.sigma.is_some());

    let defaults = model_params(config, model)?;
    let free_names: Vec<String> = section
        .free
        .clone()
        .unwrap_or_else(|| default_free(model).iter().map(|s| s.to_string()).collect());

    let mut fixed = defaults.clone();
    let mut free = Vec::new();
    for name in &free_names {
        let base = fixed.remove(name).ok_or_else(|| {
            CliError::Config(format!(
                "fit.free: `{name}` is not a parameter of this model"
            ))
        })?;
        let init = section
            .init
            .as_ref()
            .and_then(|m| m.get(name))
            .copied()
            .unwrap_or(base);
        let bounds = section
            .bounds
            .as_ref()
            .and_then(|m| m.get(name))
            .map(|b| (b[0], b[1]))
            .or_else(|| default_bounds(name));
        // keep the starting value strictly inside the box
        let init = match bounds {
            Some((lo, hi)) => init.clamp(lo + 1e-12 * (hi - lo), hi - 1e-12 * (hi - lo)),
            None => init,
        };
        free.push(FreeParameter::new(name, init, bounds));
    }

    let problem = FitProblem {
        model,
        fixed,
        free,
        data: data.clone(),
        geometry: config.geometry()?,
    };
    let options = FitOptions {
        max_iterations: section.max_iterations.unwrap_or(500),
        multi_start: multi_start_flag.or(section.multi_start).unwrap_or(1),
        seed: seed_flag.or(section.seed).unwrap_or(0),
    };
    let result = fit(&problem, &options).or_cli()?;

    // overlay table on the data grid
    let freqs = data.frequencies();
    let measured = data.values();
    let modeled =
        fitting::model_curve(model, &result.estimates, &problem.geometry, &freqs).or_cli()?;
    let residuals: Vec<f64> = modeled
        .iter()
        .zip(measured.iter())
        .map(|(m, d)| m - d)
        .collect();
    write_file(
        &out_path(out, "fit.csv"),
        &table(
            &["frequency_ghz", "model", "data", "residual"],
            &[&freqs, &modeled, &measured, &residuals],
        ),
    )?;
    write_file(
        &out_path(out, "fit.svg"),
        &svg_plot(
            "fit overlay",
            "frequency (GHz)",
            "T",
            &[
                Series {
                    label: "data",
                    x: &freqs,
                    y: &measured,
                    scatter: true,
                },
                Series {
                    label: mode_label(model),
                    x: &freqs,
                    y: &modeled,
                    scatter: false,
                },
            ],
        ),
    )?;

    let mut report = String::new();
    let _ = writeln!(report, "fit report ({})", mode_label(model));
    let _ = writeln!(
        report,
        "data: {} points from {}",
        data.len(),
        data_path.display()
    );
    let _ = writeln!(report, "weighted: {weighted}");
    let _ = writeln!(report, "converged: {}", result.converged);
    let _ = writeln!(report, "iterations: {}", result.iterations);
    let _ = writeln!(report, "cost: {:.6e}", result.cost);
    let _ = writeln!(report, "rmse: {:.6e}", result.rmse);
    let _ = writeln!(report, "estimates:");
    for (index, parameter) in problem.free.iter().enumerate() {
        let sigma = result.covariance[(index, index)].max(0.0).sqrt();
        let _ = writeln!(
            report,
            "  {} = {:.9e} +- {:.3e}",
            parameter.name, result.estimates[&parameter.name], sigma
        );
    }
    for (name, value) in &result.estimates {
        if problem.free.iter().all(|p| &p.name != name) {
            let _ = writeln!(report, "  {name} = {value:.9e} (fixed)");
        }
    }
    write_file(&out_path(out, "fit_report.txt"), &report)?;

    println!(
        "fit: converged = {}, rmse = {:.4e} -> {}",
        result.converged,
        result.rmse,
        out.display()
    );
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "fit stopped at the {} iteration cap; partial results written to {}",
            result.iterations,
            out.display()
        )));
    }
    Ok(())
}

fn t1_cmd(config: &RunConfig, out: &Path) -> CliResult<()> {
    let atom = config.atom_config()?;
    let gamma_c =
        scatter::effective_coupling(&atom, atom.omega0, CouplingMode::RateWeighted).or_cli()?;
    let t1 = relaxation_time(atom.gamma0, gamma_c.re).or_cli()?;
    let mut report = String::new();
    let _ = writeln!(report, "relaxation time");
    let _ = writeln!(report, "omega0: {:.9} GHz", atom.omega0);
    let _ = writeln!(report, "gamma0: {:.6e} GHz", atom.gamma0);
    let _ = writeln!(report, "gamma_c(omega0): {:.6e} GHz", gamma_c.re);
    if gamma_c.im.abs() > 1e-30 {
        let _ = writeln!(report, "gamma_c imaginary part: {:.6e} GHz", gamma_c.im);
    }
    let _ = writeln!(report, "T1: {t1:.6} us");
    write_file(&out_path(out, "t1_report.txt"), &report)?;
    println!("t1: {t1:.4} us (gamma_c = {:.4e} GHz)", gamma_c.re);
    Ok(())
}

fn switch_cmd(config: &RunConfig, out: &Path, scan_flag: &Option<ScanArg>) -> CliResult<()> {
    let atom = config.atom_config()?;
    let channel = config.quasi_direct_channel()?;
    let section = config.switch.as_ref();
    let scan = match scan_flag {
        Some(s) => (s.lo, s.hi),
        None => {
            let section = section
                .ok_or_else(|| CliError::Config("no [switch] section and no --scan flag".into()))?;
            (section.scan_min_ghz, section.scan_max_ghz)
        }
    };
    let tolerance = section.and_then(|s| s.tolerance_ghz).unwrap_or(1e-6);
    let grid_points = section.and_then(|s| s.grid_points).unwrap_or(601);

    let result = switch_scan(&atom, &channel, scan, grid_points, tolerance).or_cli()?;

    write_file(
        &out_path(out, "switch.csv"),
        &table(
            &["omega0_ghz", "gamma_c_ghz", "transmission_at_carrier"],
            &[
                &result.omega0_grid,
                &result.gamma_c_values,
                &result.transmission_at_carrier,
            ],
        ),
    )?;
    let gamma_max = result
        .gamma_c_values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-300);
    let gamma_scaled: Vec<f64> = result
        .gamma_c_values
        .iter()
        .map(|g| g / gamma_max)
        .collect();
    write_file(
        &out_path(out, "switch.svg"),
        &svg_plot(
            "switch scan",
            "atom tuning (GHz)",
            "normalised",
            &[
                Series {
                    label: "gamma_c / max",
                    x: &result.omega0_grid,
                    y: &gamma_scaled,
                    scatter: false,
                },
                Series {
                    label: "carrier T",
                    x: &result.omega0_grid,
                    y: &result.transmission_at_carrier,
                    scatter: false,
                },
            ],
        ),
    )?;

    let mut report = String::new();
    let _ = writeln!(
        report,
        "switch scan over [{:.4}, {:.4}] GHz",
        scan.0, scan.1
    );
    let _ = writeln!(report, "tolerance: {tolerance:.1e} GHz");
    let _ = writeln!(report, "bare transparency tunings (gamma_c = 0):");
    for root in &result.ioa_roots {
        let _ = writeln!(report, "  {root:.6} GHz");
    }
    let _ = writeln!(report, "corrected tunings under the background channel:");
    for point in &result.mioa_roots {
        let _ = writeln!(
            report,
            "  {:.6} GHz (carrier T = {:.6})",
            point.frequency, point.transmission
        );
    }
    write_file(&out_path(out, "switch_report.txt"), &report)?;

    let bare: Vec<String> = result.ioa_roots.iter().map(|r| format!("{r:.4}")).collect();
    let corrected: Vec<String> = result
        .mioa_roots
        .iter()
        .map(|p| format!("{:.4}", p.frequency))
        .collect();
    println!(
        "switch: bare [{}] GHz, corrected [{}] GHz -> {}",
        bare.join(", "),
        corrected.join(", "),
        out.display()
    );
    Ok(())
}

fn resonator_cmd(config: &RunConfig, out: &Path, grid_flag: &Option<GridArg>) -> CliResult<()> {
    let resonator_config = config.resonator_config()?;
    let grid = grid_from(config, grid_flag)?;
    let mut decays = Vec::with_capacity(grid.len());
    let mut transmissions = Vec::with_capacity(grid.len());
    for &frequency in &grid {
        decays.push(resonator::decay_rate(&resonator_config, frequency).or_cli()?);
        transmissions.push(
            resonator::transmission_amplitude(&resonator_config, frequency)
                .or_cli()?
                .norm_sqr(),
        );
    }
    write_file(
        &out_path(out, "resonator.csv"),
        &table(
            &["frequency_ghz", "decay_ghz", "transmission"],
            &[&grid, &decays, &transmissions],
        ),
    )?;
    write_file(
        &out_path(out, "resonator.svg"),
        &svg_plot(
            "resonator transmission",
            "frequency (GHz)",
            "|t|^2",
            &[Series {
                label: "two-channel",
                x: &grid,
                y: &transmissions,
                scatter: false,
            }],
        ),
    )?;
    let on_resonance_decay =
        resonator::decay_rate(&resonator_config, resonator_config.omega_c).or_cli()?;
    let on_resonance_t =
        resonator::transmission_amplitude(&resonator_config, resonator_config.omega_c)
            .or_cli()?
            .norm_sqr();
    let mut report = String::new();
    let _ = writeln!(report, "half-wavelength resonator");
    let _ = writeln!(report, "omega_c: {:.9} GHz", resonator_config.omega_c);
    let _ = writeln!(report, "length: {:.6} m", resonator_config.length);
    let _ = writeln!(report, "decay at omega_c: {on_resonance_decay:.6e} GHz");
    let _ = writeln!(report, "|t(omega_c)|^2: {on_resonance_t:.9}");
    write_file(&out_path(out, "resonator_report.txt"), &report)?;
    println!(
        "resonator: decay(omega_c) = {on_resonance_decay:.4e} GHz, |t|^2 = {on_resonance_t:.4} -> {}",
        out.display()
    );
    Ok(())
}

fn oracle_cmd(config: &RunConfig, out: &Path, points_flag: Option<usize>) -> CliResult<()> {
    let atom = config.atom_config()?;
    let section = config.oracle.as_ref();
    let span = section.and_then(|s| s.span_linewidths).unwrap_or(10.0);
    let points = points_flag
        .or_else(|| section.and_then(|s| s.points))
        .unwrap_or(41);
    let tolerance = section.and_then(|s| s.tolerance).unwrap_or(1e-11);
    let horizon = section.and_then(|s| s.horizon_ns).unwrap_or(1e8);
    let amplitude = Complex64::new(
        section.and_then(|s| s.amplitude_re).unwrap_or(1.0),
        section.and_then(|s| s.amplitude_im).unwrap_or(0.0),
    );
    if points < 2 {
        return Err(CliError::Config("oracle.points: need at least 2".into()));
    }

    let gamma_c =
        scatter::effective_coupling(&atom, atom.omega0, CouplingMode::RateWeighted).or_cli()?;
    let linewidth = atom.gamma0 + gamma_c.re;
    if linewidth <= 0.0 {
        return Err(CliError::Config(
            "oracle: total rate gamma0 + gamma_c must be positive".into(),
        ));
    }
    let detunings = linspace(-span * linewidth, span * linewidth, points);
    let mut closed_re = Vec::with_capacity(points);
    let mut closed_im = Vec::with_capacity(points);
    let mut settled_re = Vec::with_capacity(points);
    let mut settled_im = Vec::with_capacity(points);
    let mut deviations = Vec::with_capacity(points);
    let mut worst: f64 = 0.0;
    for &detuning in &detunings {
        let drive = DriveSpec {
            amplitude,
            detuning,
        };
        let closed = sigma_frequency_domain(&atom, &drive).or_cli()?;
        let report = sigma_time_domain(&atom, &drive, tolerance, horizon).or_cli()?;
        let deviation = (report.sigma_minus - closed).norm() / closed.norm().max(1e-300);
        closed_re.push(closed.re);
        closed_im.push(closed.im);
        settled_re.push(report.sigma_minus.re);
        settled_im.push(report.sigma_minus.im);
        deviations.push(deviation);
        worst = worst.max(deviation);
    }

    write_file(
        &out_path(out, "oracle.csv"),
        &table(
            &[
                "detuning_ghz",
                "closed_form_re",
                "closed_form_im",
                "time_domain_re",
                "time_domain_im",
                "relative_deviation",
            ],
            &[
                &detunings,
                &closed_re,
                &closed_im,
                &settled_re,
                &settled_im,
                &deviations,
            ],
        ),
    )?;
    let mut report = String::new();
    let _ = writeln!(report, "steady-state cross-check");
    let _ = writeln!(report, "detunings: {points} across +-{span} linewidths");
    let _ = writeln!(report, "linewidth (gamma0 + gamma_c): {linewidth:.6e} GHz");
    let _ = writeln!(report, "settle tolerance: {tolerance:.1e}");
    let _ = writeln!(report, "max relative deviation: {worst:.6e}");
    write_file(&out_path(out, "oracle_report.txt"), &report)?;
    println!(
        "oracle: max relative deviation {worst:.3e} -> {}",
        out.display()
    );
    Ok(())
}
