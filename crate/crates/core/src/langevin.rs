//! Time-domain cross-check of the frequency-domain steady state.
//!
//! In the weak-excitation regime the atomic lowering operator obeys a
//! linear equation of motion. Integrated in the frame rotating at the
//! drive frequency, its fixed point must match the closed-form
//! frequency-domain amplitude; this module provides both routes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::{settle_complex, SteadySolve};
use crate::scatter::{effective_coupling, wavevector, CouplingMode, SINGULAR_EPS};
use crate::types::GiantAtomConfig;

/// Monochromatic classical drive, expressed in the rotating frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSpec {
    /// Coherent input amplitude (dimensionless stand-in for <a_in>).
    pub amplitude: Complex64,
    /// Drive detuning omega - omega0, GHz.
    pub detuning: f64,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.amplitude.re.is_finite() || !self.amplitude.im.is_finite() {
            return Err(Error::invalid("amplitude", "must be finite"));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning", "must be finite"));
        }
        Ok(())
    }
}

/// Outcome of integrating the equation of motion to steady state.
#[derive(Debug, Clone, Copy)]
pub struct SteadyStateReport {
    pub sigma_minus: Complex64,
    /// Time needed to settle, nanoseconds.
    pub settle_time: f64,
    /// Largest accepted relative local error estimate of the integrator;
    /// bounded by the requested tolerance.
    pub max_step_error: f64,
}

/// Phase-weighted input sum S = sum_j sqrt(gamma_j) e^{-i k x_j}.
fn emission_sum(config: &GiantAtomConfig, k: f64) -> Complex64 {
    config
        .points
        .iter()
        .map(|p| p.rate.sqrt() * Complex64::from_polar(1.0, -k * p.position))
        .sum()
}

/// Closed-form steady-state amplitude
/// sigma(omega) = -S a_in / [gamma_c/2 - i(omega - omega0) + Gamma0],
/// with gamma_c and S evaluated at the drive frequency.
pub fn sigma_frequency_domain(config: &GiantAtomConfig, drive: &DriveSpec) -> Result<Complex64> {
    config.validate()?;
    drive.validate()?;
    let frequency = config.omega0 + drive.detuning;
    let gamma_c = effective_coupling(config, frequency, CouplingMode::RateWeighted)?;
    let k = wavevector(frequency, &config.medium)?;
    let denom = 0.5 * gamma_c + Complex64::new(config.gamma0, -drive.detuning);
    if denom.norm() < SINGULAR_EPS {
        return Err(Error::Singular("steady-state amplitude"));
    }
    Ok(-emission_sum(config, k) * drive.amplitude / denom)
}

/// Integrate d sigma/dt = [i Delta - Gamma0 - gamma_c/2] sigma - S a_in
/// until |d sigma/dt| < tolerance |sigma| (with a 1e-14 absolute floor) or
/// `horizon` nanoseconds elapse.
pub fn sigma_time_domain(
    config: &GiantAtomConfig,
    drive: &DriveSpec,
    tolerance: f64,
    horizon: f64,
) -> Result<SteadyStateReport> {
    config.validate()?;
    drive.validate()?;
    let frequency = config.omega0 + drive.detuning;
    let gamma_c = effective_coupling(config, frequency, CouplingMode::RateWeighted)?;
    let k = wavevector(frequency, &config.medium)?;
    let decay = Complex64::new(-config.gamma0, drive.detuning) - 0.5 * gamma_c;
    let source = emission_sum(config, k) * drive.amplitude;

    let SteadySolve {
        value,
        elapsed,
        max_step_error,
    } = settle_complex(
        |sigma| decay * sigma - source,
        Complex64::ZERO,
        tolerance,
        horizon,
    )?;
    Ok(SteadyStateReport {
        sigma_minus: value,
        settle_time: elapsed,
        max_step_error,
    })
}
