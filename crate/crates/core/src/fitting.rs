//! Nonlinear least-squares fitting of transmission spectra to the
//! two-channel model, its background-free reduction, and a plain
//! Lorentzian baseline.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::optim::{least_squares, sum_of_squares, LmOptions, LmReport};
use crate::scatter;
use crate::types::{CouplingPoint, GiantAtomConfig, Medium, QuasiDirectChannel};

/// One sampled point of a transmission trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    /// GHz.
    pub frequency: f64,
    /// Transmission probability (linear power).
    pub transmission: f64,
    /// Optional standard error of the transmission value.
    pub sigma: Option<f64>,
}

/// A sampled transmission trace with strictly increasing frequencies.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    pub points: Vec<SpectrumPoint>,
}

impl Spectrum {
    pub fn new(points: Vec<SpectrumPoint>) -> Result<Self> {
        let spectrum = Spectrum { points };
        spectrum.validate()?;
        Ok(spectrum)
    }

    pub fn validate(&self) -> Result<()> {
        for pair in self.points.windows(2) {
            if pair[1].frequency <= pair[0].frequency {
                return Err(Error::invalid(
                    "spectrum",
                    "frequencies must be strictly increasing",
                ));
            }
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.frequency.is_finite() || p.frequency <= 0.0 {
                return Err(Error::invalid(
                    "spectrum",
                    format!("row {i}: frequency must be finite and positive"),
                ));
            }
            if !p.transmission.is_finite() || p.transmission < 0.0 {
                return Err(Error::invalid(
                    "spectrum",
                    format!("row {i}: transmission must be finite and >= 0"),
                ));
            }
            if let Some(s) = p.sigma {
                if !s.is_finite() || s <= 0.0 {
                    return Err(Error::invalid(
                        "spectrum",
                        format!("row {i}: sigma must be finite and positive"),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.frequency).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.transmission).collect()
    }
}

/// Line-shape model of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// Two-channel model: resonant channel plus quasi-direct background.
    Mioa,
    /// Background-free reduction (mu = 0).
    Msp,
    /// Single effective rate, |(i Delta + Gamma0)/(i Delta + Gamma0 + gamma_eff/2)|^2.
    Lorentzian,
}

impl FitModel {
    /// Full parameter set of the model, in canonical order.
    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Mioa => &["omega0", "gamma0", "gamma", "mu", "phi"],
            FitModel::Msp => &["omega0", "gamma0", "gamma"],
            FitModel::Lorentzian => &["omega0", "gamma0", "gamma_eff"],
        }
    }
}

/// Coupling-point layout shared by every model evaluation of a fit:
/// the positions and the medium stay fixed while rates and frequencies
/// are fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterGeometry {
    /// Coupling-point positions, metres, strictly increasing.
    pub positions: Vec<f64>,
    pub medium: Medium,
}

impl ScatterGeometry {
    pub fn new(positions: Vec<f64>, medium: Medium) -> Result<Self> {
        let geometry = ScatterGeometry { positions, medium };
        geometry.validate()?;
        Ok(geometry)
    }

    /// N points spaced by `spacing`, first at x = 0.
    pub fn uniform(n: usize, spacing: f64, medium: Medium) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("positions", "need at least one point"));
        }
        if n > 1 && (!spacing.is_finite() || spacing <= 0.0) {
            return Err(Error::invalid("spacing", "must be positive"));
        }
        ScatterGeometry::new((0..n).map(|j| j as f64 * spacing).collect(), medium)
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        if self.positions.is_empty() {
            return Err(Error::invalid("positions", "need at least one point"));
        }
        if self.positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("positions", "must be finite"));
        }
        for pair in self.positions.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::invalid("positions", "must be strictly increasing"));
            }
        }
        Ok(())
    }

    fn config(&self, omega0: f64, gamma0: f64, rate: f64) -> Result<GiantAtomConfig> {
        GiantAtomConfig::new(
            omega0,
            gamma0,
            self.positions
                .iter()
                .map(|&position| CouplingPoint { position, rate })
                .collect(),
            self.medium,
        )
    }
}

/// One free parameter of a fit problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeParameter {
    pub name: String,
    pub init: f64,
    /// Box bounds enforced by a smooth transformation; `None` leaves the
    /// parameter unconstrained.
    pub bounds: Option<(f64, f64)>,
}

impl FreeParameter {
    pub fn new(name: &str, init: f64, bounds: Option<(f64, f64)>) -> Self {
        FreeParameter {
            name: name.to_string(),
            init,
            bounds,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitProblem {
    pub model: FitModel,
    pub fixed: BTreeMap<String, f64>,
    pub free: Vec<FreeParameter>,
    pub data: Spectrum,
    pub geometry: ScatterGeometry,
}

#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Number of starts; the first uses the given initial values, the rest
    /// are seeded perturbations.
    pub multi_start: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            multi_start: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Full parameter map: fixed values plus fitted estimates.
    pub estimates: BTreeMap<String, f64>,
    /// Unweighted root-mean-square residual of the transmission.
    pub rmse: f64,
    /// Gauss-Newton covariance proxy of the free parameters (order of
    /// `FitProblem::free`), symmetric positive semidefinite.
    pub covariance: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Weighted sum of squared residuals at the solution.
    pub cost: f64,
}

/// Amplitude below which the background phase carries no information and
/// is held frozen during iterations.
const MU_GAUGE_EPS: f64 = 1e-6;

/// Transmission of the chosen model at one frequency. The parameter map
/// must contain every model parameter.
pub fn model_transmission(
    model: FitModel,
    params: &BTreeMap<String, f64>,
    geometry: &ScatterGeometry,
    frequency: f64,
) -> Result<f64> {
    geometry.validate()?;
    let get = |name: &str| -> Result<f64> {
        params
            .get(name)
            .copied()
            .ok_or_else(|| Error::invalid("parameters", format!("missing `{name}`")))
    };
    match model {
        FitModel::Mioa => {
            let config = geometry.config(get("omega0")?, get("gamma0")?, get("gamma")?)?;
            let channel = QuasiDirectChannel::Direct {
                mu: get("mu")?,
                phi: wrap_angle(get("phi")?),
            };
            scatter::transmission(&config, &channel, frequency)
        }
        FitModel::Msp => {
            let config = geometry.config(get("omega0")?, get("gamma0")?, get("gamma")?)?;
            scatter::transmission(&config, &QuasiDirectChannel::None, frequency)
        }
        FitModel::Lorentzian => {
            let omega0 = get("omega0")?;
            let gamma0 = get("gamma0")?;
            let gamma_eff = get("gamma_eff")?;
            if gamma0 < 0.0 || gamma_eff < 0.0 {
                return Err(Error::invalid("rates", "must be >= 0"));
            }
            let z = Complex64::new(gamma0, frequency - omega0);
            let denom = z + 0.5 * gamma_eff;
            if denom.norm() < scatter::SINGULAR_EPS {
                return Err(Error::Singular("Lorentzian transmission"));
            }
            Ok((z / denom).norm_sqr())
        }
    }
}

/// Model transmission over a frequency grid.
pub fn model_curve(
    model: FitModel,
    params: &BTreeMap<String, f64>,
    geometry: &ScatterGeometry,
    grid: &[f64],
) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&f| model_transmission(model, params, geometry, f))
        .collect()
}

/// Evaluate the model on a grid and add seeded Gaussian noise, clamped at
/// zero. Deterministic for a fixed seed.
pub fn synth_spectrum(
    model: FitModel,
    params: &BTreeMap<String, f64>,
    geometry: &ScatterGeometry,
    grid: &[f64],
    noise_sigma: f64,
    seed: u64,
) -> Result<Spectrum> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must not be empty"));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::invalid("noise_sigma", "must be finite and >= 0"));
    }
    let clean = model_curve(model, params, geometry, grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = if noise_sigma > 0.0 {
        let noise = Normal::new(0.0, noise_sigma)
            .map_err(|e| Error::invalid("noise_sigma", e.to_string()))?;
        grid.iter()
            .zip(clean.iter())
            .map(|(&frequency, &t)| SpectrumPoint {
                frequency,
                transmission: (t + noise.sample(&mut rng)).max(0.0),
                sigma: Some(noise_sigma),
            })
            .collect()
    } else {
        grid.iter()
            .zip(clean.iter())
            .map(|(&frequency, &t)| SpectrumPoint {
                frequency,
                transmission: t,
                sigma: None,
            })
            .collect()
    };
    Spectrum::new(points)
}

fn wrap_angle(phi: f64) -> f64 {
    // into (-pi, pi]
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut wrapped = phi.rem_euclid(two_pi);
    if wrapped > std::f64::consts::PI {
        wrapped -= two_pi;
    }
    wrapped
}

fn to_external(u: f64, bounds: Option<(f64, f64)>) -> f64 {
    match bounds {
        None => u,
        Some((lo, hi)) => lo + 0.5 * (hi - lo) * (u.sin() + 1.0),
    }
}

fn to_internal(x: f64, bounds: Option<(f64, f64)>) -> f64 {
    match bounds {
        None => x,
        Some((lo, hi)) => (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0).asin(),
    }
}

struct PreparedProblem<'p> {
    problem: &'p FitProblem,
    weights: Vec<f64>,
    mu_fixed: Option<f64>,
    mu_free_index: Option<usize>,
    phi_free_index: Option<usize>,
}

impl<'p> PreparedProblem<'p> {
    fn externals(&self, u: &[f64]) -> Vec<f64> {
        self.problem
            .free
            .iter()
            .zip(u.iter())
            .map(|(p, &ui)| to_external(ui, p.bounds))
            .collect()
    }

    fn params_from_externals(&self, externals: &[f64]) -> BTreeMap<String, f64> {
        let mut params = self.problem.fixed.clone();
        for (p, &value) in self.problem.free.iter().zip(externals.iter()) {
            params.insert(p.name.clone(), value);
        }
        params
    }

    fn weighted_residuals(&self, externals: &[f64]) -> Result<Vec<f64>> {
        let params = self.params_from_externals(externals);
        self.problem
            .data
            .points
            .iter()
            .zip(self.weights.iter())
            .map(|(point, &w)| {
                let model = model_transmission(
                    self.problem.model,
                    &params,
                    &self.problem.geometry,
                    point.frequency,
                )?;
                Ok(w.sqrt() * (model - point.transmission))
            })
            .collect()
    }

    /// Freeze the background phase while the amplitude is numerically zero.
    fn frozen_mask(&self, u: &[f64]) -> Vec<bool> {
        let mut mask = vec![false; u.len()];
        if let Some(phi_idx) = self.phi_free_index {
            let mu = match (self.mu_free_index, self.mu_fixed) {
                (Some(mu_idx), _) => to_external(u[mu_idx], self.problem.free[mu_idx].bounds),
                (None, Some(fixed)) => fixed,
                (None, None) => return mask,
            };
            if mu.abs() < MU_GAUGE_EPS {
                mask[phi_idx] = true;
            }
        }
        mask
    }
}

fn validate_problem(problem: &FitProblem) -> Result<()> {
    problem.data.validate()?;
    problem.geometry.validate()?;
    let names = problem.model.parameter_names();
    for p in &problem.free {
        if !names.contains(&p.name.as_str()) {
            return Err(Error::invalid(
                "free",
                format!("`{}` is not a parameter of this model", p.name),
            ));
        }
        if problem.fixed.contains_key(&p.name) {
            return Err(Error::invalid(
                "free",
                format!("`{}` is both free and fixed", p.name),
            ));
        }
        if let Some((lo, hi)) = p.bounds {
            if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                return Err(Error::invalid(
                    "bounds",
                    format!("`{}`: lower bound must be below upper", p.name),
                ));
            }
            if !(lo <= p.init && p.init <= hi) {
                return Err(Error::invalid(
                    "bounds",
                    format!("`{}`: initial value outside bounds", p.name),
                ));
            }
        }
        if !p.init.is_finite() {
            return Err(Error::invalid(
                "free",
                format!("`{}`: initial value must be finite", p.name),
            ));
        }
    }
    for name in problem.fixed.keys() {
        if !names.contains(&name.as_str()) {
            return Err(Error::invalid(
                "fixed",
                format!("`{name}` is not a parameter of this model"),
            ));
        }
    }
    for name in names {
        let covered =
            problem.fixed.contains_key(*name) || problem.free.iter().any(|p| p.name == *name);
        if !covered {
            return Err(Error::invalid(
                "parameters",
                format!("`{name}` is neither fixed nor free"),
            ));
        }
    }
    if problem.data.len() < 2 * problem.free.len() {
        return Err(Error::invalid(
            "data",
            format!(
                "need at least {} points for {} free parameters",
                2 * problem.free.len(),
                problem.free.len()
            ),
        ));
    }
    Ok(())
}

/// Fit the free parameters by weighted damped least squares.
pub fn fit(problem: &FitProblem, options: &FitOptions) -> Result<FitResult> {
    validate_problem(problem)?;

    let values = problem.data.values();
    let spread = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - values.iter().cloned().fold(f64::INFINITY, f64::min);
    if !problem.free.is_empty() && spread <= 0.0 {
        return Err(Error::FlatObjective(
            "transmission data is constant; free parameters are unidentifiable".into(),
        ));
    }

    let weights: Vec<f64> = problem
        .data
        .points
        .iter()
        .map(|p| p.sigma.map_or(1.0, |s| 1.0 / (s * s)))
        .collect();

    let prepared = PreparedProblem {
        problem,
        weights,
        mu_fixed: problem.fixed.get("mu").copied(),
        mu_free_index: problem.free.iter().position(|p| p.name == "mu"),
        phi_free_index: problem.free.iter().position(|p| p.name == "phi"),
    };

    // No free parameters: report the fixed model as-is.
    if problem.free.is_empty() {
        let residuals = prepared.weighted_residuals(&[])?;
        let cost = sum_of_squares(&residuals);
        let rmse = unweighted_rmse(&prepared, &[])?;
        return Ok(FitResult {
            estimates: problem.fixed.clone(),
            rmse,
            covariance: DMatrix::zeros(0, 0),
            iterations: 0,
            converged: true,
            cost,
        });
    }

    let u0: Vec<f64> = problem
        .free
        .iter()
        .map(|p| to_internal(p.init, p.bounds))
        .collect();

    let lm_options = LmOptions {
        max_iterations: options.max_iterations,
        ..LmOptions::default()
    };

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best: Option<LmReport> = None;
    for start in 0..options.multi_start.max(1) {
        let u_start: Vec<f64> = if start == 0 {
            u0.clone()
        } else {
            problem
                .free
                .iter()
                .map(|p| match p.bounds {
                    Some((lo, hi)) => {
                        let x = lo + (hi - lo) * rng.random_range(0.05..0.95);
                        to_internal(x, p.bounds)
                    }
                    None => {
                        let scale = p.init.abs().max(1e-3);
                        p.init + scale * rng.random_range(-0.5..0.5)
                    }
                })
                .collect()
        };
        let report = least_squares(
            |u: &[f64]| prepared.weighted_residuals(&prepared.externals(u)),
            &u_start,
            |u: &[f64]| prepared.frozen_mask(u),
            &lm_options,
        )?;
        let better = match &best {
            None => true,
            Some(current) => report.cost < current.cost,
        };
        if better {
            best = Some(report);
        }
    }
    let report = best.expect("at least one start");

    let mut externals = prepared.externals(&report.x);
    if let Some(phi_idx) = prepared.phi_free_index {
        externals[phi_idx] = wrap_angle(externals[phi_idx]);
    }

    let covariance = covariance_proxy(&prepared, &externals, report.cost)?;
    let rmse = unweighted_rmse(&prepared, &externals)?;
    let estimates = prepared.params_from_externals(&externals);

    Ok(FitResult {
        estimates,
        rmse,
        covariance,
        iterations: report.iterations,
        converged: report.converged,
        cost: report.cost,
    })
}

fn unweighted_rmse(prepared: &PreparedProblem, externals: &[f64]) -> Result<f64> {
    let params = prepared.params_from_externals(externals);
    let mut sum = 0.0;
    for point in &prepared.problem.data.points {
        let model = model_transmission(
            prepared.problem.model,
            &params,
            &prepared.problem.geometry,
            point.frequency,
        )?;
        sum += (model - point.transmission).powi(2);
    }
    Ok((sum / prepared.problem.data.len() as f64).sqrt())
}

/// Gauss-Newton covariance proxy sigma^2 (J^T J)^+ from a finite-difference
/// Jacobian on the external parameter scale.
fn covariance_proxy(
    prepared: &PreparedProblem,
    externals: &[f64],
    cost: f64,
) -> Result<DMatrix<f64>> {
    let n = externals.len();
    let m = prepared.problem.data.len();
    let r0 = prepared.weighted_residuals(externals)?;
    let frozen: Vec<bool> = {
        let mu = match (prepared.mu_free_index, prepared.mu_fixed) {
            (Some(idx), _) => externals[idx],
            (None, Some(fixed)) => fixed,
            (None, None) => 1.0,
        };
        (0..n)
            .map(|j| Some(j) == prepared.phi_free_index && mu.abs() < MU_GAUGE_EPS)
            .collect()
    };
    let mut jac = DMatrix::zeros(m, n);
    let mut probe = externals.to_vec();
    for j in 0..n {
        if frozen[j] {
            continue;
        }
        let h = f64::EPSILON.sqrt() * externals[j].abs().max(1e-8);
        probe[j] = externals[j] + h;
        let r1 = match prepared.weighted_residuals(&probe) {
            Ok(r) => r,
            Err(_) => {
                probe[j] = externals[j] - h;
                let r = prepared.weighted_residuals(&probe)?;
                probe[j] = externals[j];
                for i in 0..m {
                    jac[(i, j)] = (r0[i] - r[i]) / h;
                }
                continue;
            }
        };
        probe[j] = externals[j];
        for i in 0..m {
            jac[(i, j)] = (r1[i] - r0[i]) / h;
        }
    }
    let normal = jac.transpose() * jac;
    let dof = m.saturating_sub(n);
    let variance = if dof > 0 { cost / dof as f64 } else { 1.0 };
    let pseudo = normal
        .svd(true, true)
        .pseudo_inverse(1e-12)
        .map_err(|e| Error::Numerics(format!("covariance pseudo-inverse: {e}")))?;
    let scaled = variance * pseudo;
    // enforce exact symmetry
    let sym = 0.5 * (&scaled + scaled.transpose());
    Ok(sym)
}

/// Convenience: weighted residual vector of a parameter map against data.
pub fn weighted_cost(
    model: FitModel,
    params: &BTreeMap<String, f64>,
    geometry: &ScatterGeometry,
    data: &Spectrum,
) -> Result<f64> {
    let mut cost = 0.0;
    for point in &data.points {
        let w = point.sigma.map_or(1.0, |s| 1.0 / (s * s));
        let model_t = model_transmission(model, params, geometry, point.frequency)?;
        cost += w * (model_t - point.transmission).powi(2);
    }
    Ok(cost)
}

/// Map of the full parameter set from per-name values; small helper for
/// tests and the command-line layer.
pub fn param_map(entries: &[(&str, f64)]) -> BTreeMap<String, f64> {
    entries
        .iter()
        .map(|(name, value)| (name.to_string(), *value))
        .collect()
}
