//! Numerical building blocks shared by the scattering modules.

pub mod fit;
pub mod ode;
pub mod quadrature;
pub mod special;
pub mod spline;
pub mod taylor;
