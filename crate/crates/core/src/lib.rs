//! Photon scattering of a giant atom with a quasi-direct background
//! channel.
//!
//! An emitter coupled to a transmission line at several points separated
//! by distances comparable to the wavelength scatters photons through two
//! interfering paths: the resonant multi-point channel, with collective
//! coupling gamma_c(omega) set by the propagation phases between the
//! points, and a background path by which photons bypass the emitter,
//! carried by a fixed complex amplitude mu e^{i phi} (optionally derived
//! from a low-Q cavity). Their interference produces asymmetric Fano line
//! shapes instead of Lorentzians.
//!
//! The crate provides:
//! * [`scatter`] — closed-form reflection, scattering amplitude, and
//!   transmission, plus the cavity-to-(mu, phi) map;
//! * [`resonator`] — the analogous half-wavelength resonator with a
//!   spatially extended coupling density;
//! * [`langevin`] — a time-domain integrator whose steady state
//!   cross-checks the closed forms;
//! * [`fitting`] — least-squares extraction of line-shape parameters from
//!   measured or synthetic spectra;
//! * [`analysis`] — relaxation times and microwave switch frequencies.
//!
//! Frequencies and rates are ordinary frequencies in GHz throughout;
//! positions are metres; phases are radians.

pub mod analysis;
pub mod error;
pub mod fitting;
pub mod langevin;
pub mod numeric;
pub mod optim;
pub mod resonator;
pub mod scatter;
pub mod types;

pub use error::{Error, Result};
pub use types::{
    CavityChannel, CouplingPoint, GiantAtomConfig, Medium, QuasiDirectChannel, SPEED_OF_LIGHT,
};

pub use num_complex::Complex64;
