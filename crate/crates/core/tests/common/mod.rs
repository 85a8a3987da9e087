#![allow(dead_code)] // each test target uses a different subset

//! Shared fixtures: the two reference devices used across the
//! integration suites, pinned at interference points of their coupling
//! arrays (half turn for the three-point device, full turn for the
//! six-point one).

use fanoatom::fitting::ScatterGeometry;
use fanoatom::{CavityChannel, GiantAtomConfig, Medium, QuasiDirectChannel};
use std::f64::consts::PI;

pub const GHZ: f64 = 1e9;
pub const SPACING: f64 = 0.02054; // m
pub const EPS_EFF: f64 = 6.45;

pub fn medium() -> Medium {
    Medium::from_permittivity(EPS_EFF).unwrap()
}

/// Frequency at which the array phase theta = k d equals `theta`.
pub fn frequency_for_theta(theta: f64) -> f64 {
    theta * medium().group_velocity / (2.0 * PI * SPACING * GHZ)
}

/// Three coupling points, measured fit values; operated at theta = pi
/// where the collective coupling equals the per-point rate.
pub struct ThreePoint;

impl ThreePoint {
    pub const GAMMA0: f64 = 2.5e-4;
    pub const GAMMA: f64 = 2e-4;
    pub const MU: f64 = 0.429;
    pub const PHI: f64 = -1.03;

    pub fn omega0() -> f64 {
        frequency_for_theta(PI)
    }

    pub fn config() -> GiantAtomConfig {
        GiantAtomConfig::uniform(
            Self::omega0(),
            Self::GAMMA0,
            3,
            SPACING,
            Self::GAMMA,
            medium(),
        )
        .unwrap()
    }

    pub fn geometry() -> ScatterGeometry {
        ScatterGeometry::uniform(3, SPACING, medium()).unwrap()
    }

    pub fn channel() -> QuasiDirectChannel {
        QuasiDirectChannel::Direct {
            mu: Self::MU,
            phi: Self::PHI,
        }
    }

    /// Gamma0 + gamma_c at the operating point.
    pub fn linewidth() -> f64 {
        Self::GAMMA0 + Self::GAMMA
    }
}

/// Six coupling points, measured fit values; operated at theta = 2 pi
/// where the collective coupling peaks at N^2 gamma.
pub struct SixPoint;

impl SixPoint {
    pub const GAMMA0: f64 = 1.2e-4;
    pub const GAMMA: f64 = 4e-6;
    pub const MU: f64 = 0.921;
    pub const PHI: f64 = 0.312;

    pub fn omega0() -> f64 {
        frequency_for_theta(2.0 * PI)
    }

    pub fn config() -> GiantAtomConfig {
        GiantAtomConfig::uniform(
            Self::omega0(),
            Self::GAMMA0,
            6,
            SPACING,
            Self::GAMMA,
            medium(),
        )
        .unwrap()
    }

    pub fn geometry() -> ScatterGeometry {
        ScatterGeometry::uniform(6, SPACING, medium()).unwrap()
    }

    pub fn channel() -> QuasiDirectChannel {
        QuasiDirectChannel::Direct {
            mu: Self::MU,
            phi: Self::PHI,
        }
    }

    pub fn gamma_c() -> f64 {
        36.0 * Self::GAMMA
    }

    pub fn linewidth() -> f64 {
        Self::GAMMA0 + Self::gamma_c()
    }
}

/// Background cavity from the switch-analysis figure, anchored at a fixed
/// 0.1 GHz offset above the atom.
pub fn figure_cavity(omega0: f64) -> CavityChannel {
    CavityChannel {
        omega_b: omega0 + 0.1,
        intrinsic_loss: 0.01,
        coupling_left: 0.29,
        coupling_right: 0.31,
    }
}
