//! Direct and inverse scattering for the one-dimensional Schrödinger operator
//! `−y″ + q(x)y = λy` with steplike potentials, `q(x) → c±` as `x → ±∞`.
//!
//! The pipeline runs potential → [`direct`] (Jost solutions, scattering
//! data) → [`glm`] (Marchenko kernels F±) → [`marchenko`] (transformation
//! kernels K± and the recovered potential). [`checker`] screens scattering
//! data against the characterization conditions and [`asymptotics`] covers
//! the high-energy expansions.

pub mod asymptotics;
pub mod checker;
pub mod direct;
pub mod error;
pub mod glm;
pub mod io;
pub mod marchenko;
pub mod numerics;
pub mod pipeline;
pub mod potential;
pub mod spectral;

pub use direct::{DirectConfig, DirectSolver, SamplingConfig, ScatteringData};
pub use error::{Error, Result};
pub use potential::{Potential, Side};
pub use spectral::{lift, CutSide, Region, SpectralPoint};
