//! Closed-form frequency-domain scattering of a giant atom with a
//! quasi-direct background channel.
//!
//! The resonant channel is characterised by the collective coupling
//! gamma_c(omega), built from the propagation phases e^{i k x_j} of the
//! coupling points. The background channel contributes a fixed complex
//! amplitude mu e^{i phi}, either given directly or derived from a low-Q
//! cavity evaluated at the atomic frequency.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::types::{CavityChannel, GiantAtomConfig, Medium, QuasiDirectChannel};

/// Denominators with modulus below this (GHz units) raise a singularity error.
pub const SINGULAR_EPS: f64 = 1e-30;

const GHZ: f64 = 1e9;

/// Wave vector k = 2 pi f / v_g in 1/m, for an ordinary frequency in GHz.
pub fn wavevector(frequency: f64, medium: &Medium) -> Result<f64> {
    medium.validate()?;
    if !frequency.is_finite() || frequency <= 0.0 {
        return Err(Error::invalid("frequency", "must be finite and positive"));
    }
    Ok(2.0 * PI * frequency * GHZ / medium.group_velocity)
}

/// Propagation phase theta = k d across one spacing d, radians.
pub fn propagation_phase(frequency: f64, spacing: f64, medium: &Medium) -> Result<f64> {
    Ok(wavevector(frequency, medium)? * spacing)
}

/// How the per-point rates enter the collective coupling.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum CouplingMode {
    /// Rate-weighted emission sum against an unweighted pickup sum,
    /// (sum_j gamma_j e^{-ikx_j}) (sum_j' e^{ikx_j'}); complex in general.
    #[default]
    RateWeighted,
    /// |sum_j sqrt(gamma_j) e^{ikx_j}|^2; real and non-negative.
    Symmetric,
}

/// Collective coupling gamma_c at the given photon frequency, GHz.
///
/// The two modes agree (and are real) whenever the per-point rates are
/// uniform; for equally spaced points both reduce to
/// gamma [sin(N theta/2) / sin(theta/2)]^2 with theta = k d.
pub fn effective_coupling(
    config: &GiantAtomConfig,
    frequency: f64,
    mode: CouplingMode,
) -> Result<Complex64> {
    config.validate()?;
    let k = wavevector(frequency, &config.medium)?;
    let value = match mode {
        CouplingMode::RateWeighted => {
            let mut weighted = Complex64::ZERO;
            let mut pickup = Complex64::ZERO;
            for p in &config.points {
                let phase = Complex64::from_polar(1.0, k * p.position);
                weighted += p.rate * phase.conj();
                pickup += phase;
            }
            weighted * pickup
        }
        CouplingMode::Symmetric => {
            let mut amplitude = Complex64::ZERO;
            for p in &config.points {
                amplitude += p.rate.sqrt() * Complex64::from_polar(1.0, k * p.position);
            }
            Complex64::new(amplitude.norm_sqr(), 0.0)
        }
    };
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Numerics("effective coupling is not finite".into()));
    }
    Ok(value)
}

/// Closed form gamma [sin(N theta/2) / sin(theta/2)]^2 for N equally spaced
/// points with a common rate. Continuous through theta = 2 pi l, where it
/// takes the collective value N^2 gamma.
pub fn collective_rate(rate: f64, n: usize, theta: f64) -> f64 {
    let nf = n as f64;
    let half = 0.5 * theta;
    let denom = half.sin();
    if denom.abs() < 1e-12 {
        return rate * nf * nf;
    }
    let ratio = (nf * half).sin() / denom;
    rate * ratio * ratio
}

/// Resonant-channel reflection factor
/// R(omega) = [i(omega - omega0) + Gamma0 - gamma_c/2] /
///            [i(omega - omega0) + Gamma0 + gamma_c/2].
pub fn reflection_factor(
    config: &GiantAtomConfig,
    detuning: f64,
    gamma_c: Complex64,
) -> Result<Complex64> {
    if !detuning.is_finite() {
        return Err(Error::invalid("detuning", "must be finite"));
    }
    let z = Complex64::new(config.gamma0, detuning);
    let denom = z + 0.5 * gamma_c;
    if denom.norm() < SINGULAR_EPS {
        return Err(Error::Singular("reflection factor"));
    }
    let r = (z - 0.5 * gamma_c) / denom;
    if !r.re.is_finite() || !r.im.is_finite() {
        return Err(Error::Numerics("reflection factor is not finite".into()));
    }
    Ok(r)
}

/// Background amplitude (mu, phi) seen by the atom.
///
/// Cavity channels are collapsed to their value at the atomic frequency,
/// the anchor point of the zeroth-order expansion.
pub fn channel_mu_phi(channel: &QuasiDirectChannel, omega0: f64) -> Result<(f64, f64)> {
    channel.validate()?;
    match channel {
        QuasiDirectChannel::None => Ok((0.0, 0.0)),
        QuasiDirectChannel::Direct { mu, phi } => Ok((*mu, *phi)),
        QuasiDirectChannel::Cavity(cavity) => cavity_to_mu_phi(cavity, omega0),
    }
}

/// Scattering amplitude r = R(omega) - mu e^{i phi}.
pub fn scattering_amplitude(
    config: &GiantAtomConfig,
    channel: &QuasiDirectChannel,
    frequency: f64,
) -> Result<Complex64> {
    let gamma_c = effective_coupling(config, frequency, CouplingMode::RateWeighted)?;
    let r = reflection_factor(config, frequency - config.omega0, gamma_c)?;
    let (mu, phi) = channel_mu_phi(channel, config.omega0)?;
    Ok(r - Complex64::from_polar(mu, phi))
}

/// Transmission probability T(omega) = |(R(omega) + 1)/2 - mu e^{i phi}|^2.
///
/// With no background channel this is the bare multi-point resonant
/// spectrum; a nonzero mu makes the line shape asymmetric.
pub fn transmission(
    config: &GiantAtomConfig,
    channel: &QuasiDirectChannel,
    frequency: f64,
) -> Result<f64> {
    let gamma_c = effective_coupling(config, frequency, CouplingMode::RateWeighted)?;
    let r = reflection_factor(config, frequency - config.omega0, gamma_c)?;
    let (mu, phi) = channel_mu_phi(channel, config.omega0)?;
    let amplitude = 0.5 * (r + 1.0) - Complex64::from_polar(mu, phi);
    let t = amplitude.norm_sqr();
    if !t.is_finite() {
        return Err(Error::Numerics("transmission is not finite".into()));
    }
    Ok(t)
}

/// Full frequency response of the background cavity,
/// f(omega, omega_b) = sqrt(gL gR) / [(gL + gR)/2 - i(omega - omega_b + i Gamma_b)].
pub fn quasi_direct_response(cavity: &CavityChannel, frequency: f64) -> Result<Complex64> {
    cavity.validate()?;
    if !frequency.is_finite() {
        return Err(Error::invalid("frequency", "must be finite"));
    }
    let numerator = (cavity.coupling_left * cavity.coupling_right).sqrt();
    let denom = Complex64::new(cavity.half_width(), -(frequency - cavity.omega_b));
    if denom.norm() < SINGULAR_EPS {
        return Err(Error::Singular("quasi-direct response"));
    }
    Ok(numerator / denom)
}

/// Collapse a cavity channel to its (mu, phi) amplitude at the atomic
/// frequency. The returned pair satisfies mu e^{i phi} = f(omega0, omega_b)
/// exactly.
pub fn cavity_to_mu_phi(cavity: &CavityChannel, omega0: f64) -> Result<(f64, f64)> {
    cavity.validate()?;
    if !omega0.is_finite() {
        return Err(Error::invalid("omega0", "must be finite"));
    }
    let detuning = omega0 - cavity.omega_b;
    let half_width = cavity.half_width();
    let mu = (cavity.coupling_left * cavity.coupling_right).sqrt()
        / (half_width * half_width + detuning * detuning).sqrt();
    let phi = (detuning / half_width).atan();
    Ok((mu, phi))
}
