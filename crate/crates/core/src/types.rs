//! Domain types: the waveguide medium, the giant-atom geometry, and the
//! quasi-direct background channel.
//!
//! Unit conventions used throughout the crate:
//! * frequencies and rates are ordinary frequencies in GHz (1 GHz = 1e9 1/s),
//! * positions and lengths are metres,
//! * phases are radians.

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Propagation medium of the transmission line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Effective relative permittivity (dimensionless, >= 1).
    pub eps_eff: f64,
    /// Group velocity in m/s (0 < v_g <= c).
    pub group_velocity: f64,
}

impl Medium {
    pub fn new(eps_eff: f64, group_velocity: f64) -> Result<Self> {
        let medium = Medium {
            eps_eff,
            group_velocity,
        };
        medium.validate()?;
        Ok(medium)
    }

    /// Medium with group velocity v_g = c / sqrt(eps_eff).
    pub fn from_permittivity(eps_eff: f64) -> Result<Self> {
        if !eps_eff.is_finite() || eps_eff < 1.0 {
            return Err(Error::invalid("eps_eff", "must be finite and >= 1"));
        }
        Medium::new(eps_eff, SPEED_OF_LIGHT / eps_eff.sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eps_eff.is_finite() || self.eps_eff < 1.0 {
            return Err(Error::invalid("eps_eff", "must be finite and >= 1"));
        }
        if !self.group_velocity.is_finite()
            || self.group_velocity <= 0.0
            || self.group_velocity > SPEED_OF_LIGHT
        {
            return Err(Error::invalid(
                "group_velocity",
                "must satisfy 0 < v_g <= c",
            ));
        }
        Ok(())
    }
}

/// One physical coupling point of the giant atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingPoint {
    /// Position along the line, metres.
    pub position: f64,
    /// Per-point coupling rate, GHz.
    pub rate: f64,
}

/// A two-level atom coupled to the line at N physical points.
#[derive(Debug, Clone, PartialEq)]
pub struct GiantAtomConfig {
    /// Transition frequency omega_0, GHz.
    pub omega0: f64,
    /// Intrinsic loss Gamma_0, GHz.
    pub gamma0: f64,
    /// Coupling points, ordered by strictly increasing position.
    pub points: Vec<CouplingPoint>,
    pub medium: Medium,
}

impl GiantAtomConfig {
    pub fn new(
        omega0: f64,
        gamma0: f64,
        points: Vec<CouplingPoint>,
        medium: Medium,
    ) -> Result<Self> {
        let config = GiantAtomConfig {
            omega0,
            gamma0,
            points,
            medium,
        };
        config.validate()?;
        Ok(config)
    }

    /// N equally spaced points with a common rate, the first at x = 0.
    pub fn uniform(
        omega0: f64,
        gamma0: f64,
        n: usize,
        spacing: f64,
        rate: f64,
        medium: Medium,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("points", "need at least one coupling point"));
        }
        if n > 1 && (!spacing.is_finite() || spacing <= 0.0) {
            return Err(Error::invalid("spacing", "must be positive"));
        }
        let points = (0..n)
            .map(|j| CouplingPoint {
                position: j as f64 * spacing,
                rate,
            })
            .collect();
        GiantAtomConfig::new(omega0, gamma0, points, medium)
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        if !self.omega0.is_finite() || self.omega0 <= 0.0 {
            return Err(Error::invalid("omega0", "must be finite and positive"));
        }
        if !self.gamma0.is_finite() || self.gamma0 < 0.0 {
            return Err(Error::invalid("gamma0", "must be finite and >= 0"));
        }
        if self.points.is_empty() {
            return Err(Error::invalid("points", "need at least one coupling point"));
        }
        for (j, p) in self.points.iter().enumerate() {
            if !p.position.is_finite() {
                return Err(Error::invalid("points", format!("position {j} not finite")));
            }
        }
        for pair in self.points.windows(2) {
            if pair[1].position <= pair[0].position {
                return Err(Error::invalid(
                    "points",
                    "positions must be strictly increasing",
                ));
            }
        }
        for (j, p) in self.points.iter().enumerate() {
            if !p.rate.is_finite() || p.rate < 0.0 {
                return Err(Error::invalid(
                    "points",
                    format!("rate {j} must be finite and >= 0"),
                ));
            }
        }
        Ok(())
    }

    /// Geometric size D = x_N - x_1, metres.
    pub fn size(&self) -> f64 {
        match (self.points.last(), self.points.first()) {
            (Some(last), Some(first)) => last.position - first.position,
            _ => 0.0,
        }
    }

    /// Common spacing d when the points are equally spaced, within a 1e-9
    /// relative tolerance. `None` for N = 1 or irregular spacing.
    pub fn uniform_spacing(&self) -> Option<f64> {
        if self.points.len() < 2 {
            return None;
        }
        let d = self.points[1].position - self.points[0].position;
        for pair in self.points.windows(2) {
            let step = pair[1].position - pair[0].position;
            if (step - d).abs() > 1e-9 * d.abs().max(1e-300) {
                return None;
            }
        }
        Some(d)
    }

    /// Common rate when identical at every point (exact match).
    pub fn uniform_rate(&self) -> Option<f64> {
        let rate = self.points.first()?.rate;
        if self.points.iter().all(|p| p.rate == rate) {
            Some(rate)
        } else {
            None
        }
    }
}

/// Background channel by which photons bypass the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuasiDirectChannel {
    /// No background path (mu = 0 limit).
    None,
    /// Fixed transmission amplitude and phase shift.
    Direct {
        /// Amplitude, dimensionless in [0, 1].
        mu: f64,
        /// Phase shift, radians in (-pi, pi].
        phi: f64,
    },
    /// Low-Q cavity standing in for the background path.
    Cavity(CavityChannel),
}

impl QuasiDirectChannel {
    pub fn validate(&self) -> Result<()> {
        match self {
            QuasiDirectChannel::None => Ok(()),
            QuasiDirectChannel::Direct { mu, phi } => {
                if !mu.is_finite() || !(0.0..=1.0).contains(mu) {
                    return Err(Error::invalid("mu", "must lie in [0, 1]"));
                }
                if !phi.is_finite() || *phi <= -std::f64::consts::PI || *phi > std::f64::consts::PI
                {
                    return Err(Error::invalid("phi", "must lie in (-pi, pi]"));
                }
                Ok(())
            }
            QuasiDirectChannel::Cavity(cavity) => cavity.validate(),
        }
    }
}

/// Effective low-Q cavity parameters of the background channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityChannel {
    /// Cavity eigenfrequency omega_b, GHz.
    pub omega_b: f64,
    /// Intrinsic loss Gamma_b, GHz.
    pub intrinsic_loss: f64,
    /// Coupling rate to the input port, GHz.
    pub coupling_left: f64,
    /// Coupling rate to the output port, GHz.
    pub coupling_right: f64,
}

impl CavityChannel {
    pub fn validate(&self) -> Result<()> {
        if !self.omega_b.is_finite() || self.omega_b <= 0.0 {
            return Err(Error::invalid("omega_b", "must be finite and positive"));
        }
        for (name, value) in [
            ("gamma_big_b", self.intrinsic_loss),
            ("gamma_b_left", self.coupling_left),
            ("gamma_b_right", self.coupling_right),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        if self.half_width() <= 0.0 {
            return Err(Error::invalid(
                "cavity rates",
                "gamma_b_left + gamma_b_right + 2 Gamma_b must be positive",
            ));
        }
        Ok(())
    }

    /// (gamma_b_left + gamma_b_right)/2 + Gamma_b, the cavity half-width.
    pub fn half_width(&self) -> f64 {
        0.5 * (self.coupling_left + self.coupling_right) + self.intrinsic_loss
    }
}
