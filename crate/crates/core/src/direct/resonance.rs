use super::DirectSolver;
use crate::error::{Error, Result};
use crate::numerics::fit::least_squares;
use crate::spectral::CutSide;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub resonant: bool,
    /// γ in W(λ) ≈ iγ√(λ − c̲), present when resonant.
    pub gamma: Option<f64>,
    pub w_edge_abs: f64,
    pub scale: f64,
    /// Relative misfit of the √-fit (zero when not resonant).
    pub fit_residual: f64,
}

/// Geometric ladder of offsets λ − c̲ used for the √-fit.
pub fn resonance_ladder() -> Vec<f64> {
    (0..12).map(|j| 1e-2 * 0.5f64.powi(j)).collect()
}

/// Least-squares fit of g(t) = γ + a t + b t² to complex samples; returns
/// (γ, relative misfit including the imaginary part of γ).
pub fn fit_edge_gamma(t: &[f64], g: &[Complex64]) -> (Complex64, f64) {
    let rows: Vec<Vec<f64>> = t.iter().map(|t| vec![1.0, *t, t * t]).collect();
    let re: Vec<f64> = g.iter().map(|v| v.re).collect();
    let im: Vec<f64> = g.iter().map(|v| v.im).collect();
    let (cr, rr) = least_squares(&rows, &re);
    let (ci, ri) = least_squares(&rows, &im);
    let gamma = Complex64::new(cr[0], ci[0]);
    let mag = gamma.norm().max(1e-300);
    let misfit = (rr.hypot(ri) + ci[0].abs()) / mag;
    (gamma, misfit)
}

impl<'a> DirectSolver<'a> {
    /// Decides whether W vanishes at c̲ and, if so, fits γ.
    pub fn classify_resonance(&self) -> Result<Resonance> {
        let c = self.potential.c_low();
        let w0 = self.compute_wronskian(&self.lift(c, CutSide::Upper))?;
        let scale = self.compute_wronskian(&self.lift(c + 1.0, CutSide::Upper))?.norm();
        let resonant = w0.norm() < self.cfg.eps_res * scale;
        if !resonant {
            return Ok(Resonance { resonant, gamma: None, w_edge_abs: w0.norm(), scale, fit_residual: 0.0 });
        }
        let ladder = resonance_ladder();
        let mut t = Vec::with_capacity(ladder.len());
        let mut g = Vec::with_capacity(ladder.len());
        for eps in ladder {
            let w = self.compute_wronskian(&self.lift(c + eps, CutSide::Upper))?;
            let s = eps.sqrt();
            t.push(s);
            g.push(w / (Complex64::new(0.0, 1.0) * s));
        }
        let (gamma, misfit) = fit_edge_gamma(&t, &g);
        if !(misfit < 1e-3) {
            return Err(Error::EdgeNotSqrtType { residual: misfit });
        }
        Ok(Resonance { resonant, gamma: Some(gamma.re), w_edge_abs: w0.norm(), scale, fit_residual: misfit })
    }
}
