//! Jost solutions, the Wronskian, scattering coefficients, bound states and
//! the resonance classification at the lower spectral edge.
//!
//! Jost solutions are obtained from the reduced function
//! `h±(λ,x) = φ±(λ,x) e^{∓ik±x}`, which solves `h″ ± 2ik±h′ = (q − c±)h`
//! with `h = 1, h′ = 0` beyond the support of `q − c±`. The reduced form
//! keeps both the oscillatory and the evanescent regimes bounded.

mod bound_states;
mod data;
mod resonance;

pub use bound_states::NormingConstants;
pub use data::{edge_ladder, CoefficientSeries, EigenRecord, SamplingConfig, ScatteringData};
pub use resonance::{fit_edge_gamma, resonance_ladder, Resonance};

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate_observed, OdeFailure, OdeOptions};
use crate::potential::{Potential, Side};
use crate::spectral::{lift_real, CutSide, Region, SpectralPoint};
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct DirectConfig {
    /// Half-width X∞ of the truncation window.
    pub x_inf: f64,
    /// Tail tolerance εtail for |q − c±| at the window edges.
    pub eps_tail: f64,
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Matching point for Wronskians.
    pub x_match: f64,
    /// Resonance threshold εres.
    pub eps_res: f64,
    pub scan_points: usize,
    pub delta_edge: f64,
    pub eps_lambda: f64,
    /// Relative tolerance of the residue identity check.
    pub residue_tol: f64,
}

impl Default for DirectConfig {
    fn default() -> Self {
        Self {
            x_inf: 30.0,
            eps_tail: 1e-10,
            ode_rtol: 1e-10,
            ode_atol: 1e-13,
            x_match: 0.0,
            eps_res: 1e-4,
            scan_points: 400,
            delta_edge: 1e-6,
            eps_lambda: 1e-10,
            residue_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JostEvaluation {
    pub lambda: SpectralPoint,
    pub side: Side,
    pub x: f64,
    pub phi: Complex64,
    pub phi_prime: Complex64,
    /// h±(λ,x) = φ± e^{∓ik±x}.
    pub reduced: Complex64,
    pub reduced_prime: Complex64,
}

#[derive(Debug, Clone, Copy)]
pub struct Coefficients {
    pub point: SpectralPoint,
    pub wronskian: Complex64,
    pub t_plus: Complex64,
    pub t_minus: Complex64,
    /// Present when k₊ is real and nonzero.
    pub r_plus: Option<Complex64>,
    /// Present when k₋ is real and nonzero.
    pub r_minus: Option<Complex64>,
    /// Set when W is tiny near c̲ (resonant edge): T is poorly conditioned.
    pub conditioning_warning: bool,
}

impl Coefficients {
    pub fn t(&self, side: Side) -> Complex64 {
        match side {
            Side::Plus => self.t_plus,
            Side::Minus => self.t_minus,
        }
    }

    pub fn r(&self, side: Side) -> Option<Complex64> {
        match side {
            Side::Plus => self.r_plus,
            Side::Minus => self.r_minus,
        }
    }
}

/// Direct scattering for a fixed potential. Cheap to construct; immutable
/// and shareable across threads.
#[derive(Debug, Clone)]
pub struct DirectSolver<'a> {
    potential: &'a Potential,
    cfg: DirectConfig,
    breakpoints: Vec<f64>,
    /// Where inward integration starts on each side (the support edge of q − c±).
    start_plus: f64,
    start_minus: f64,
}

impl<'a> DirectSolver<'a> {
    pub fn new(potential: &'a Potential, cfg: DirectConfig) -> Result<Self> {
        let x_inf = cfg.x_inf;
        for side in [Side::Plus, Side::Minus] {
            let tail = potential.shifted(side, side.sign() * x_inf).abs();
            if !(tail < cfg.eps_tail) {
                return Err(Error::MomentConditionViolated(format!(
                    "|q - c_{}| = {tail:.3e} at the window edge exceeds {:.1e}",
                    side.name(),
                    cfg.eps_tail
                )));
            }
        }
        let grid = crate::potential::moments_grid(potential, x_inf);
        let mut start_plus = cfg.x_match;
        for &x in grid.iter().rev() {
            if potential.shifted(Side::Plus, x).abs() > cfg.eps_tail {
                start_plus = x;
                break;
            }
        }
        let mut start_minus = cfg.x_match;
        for &x in grid.iter() {
            if potential.shifted(Side::Minus, x).abs() > cfg.eps_tail {
                start_minus = x;
                break;
            }
        }
        let margin = 0.25;
        let start_plus = (start_plus + margin).clamp(cfg.x_match, x_inf);
        let start_minus = (start_minus - margin).clamp(-x_inf, cfg.x_match);
        Ok(Self { potential, cfg, breakpoints: potential.breakpoints(), start_plus, start_minus })
    }

    pub fn potential(&self) -> &Potential {
        self.potential
    }

    pub fn config(&self) -> &DirectConfig {
        &self.cfg
    }

    pub fn lift(&self, lambda: f64, side: CutSide) -> SpectralPoint {
        lift_real(lambda, side, self.potential.c_plus, self.potential.c_minus)
    }

    /// Starting abscissa of the inward integration for a side.
    pub fn start(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.start_plus,
            Side::Minus => self.start_minus,
        }
    }

    fn ode_options(&self) -> OdeOptions {
        OdeOptions { rtol: self.cfg.ode_rtol, atol: self.cfg.ode_atol, ..Default::default() }
    }

    /// Integrates the reduced equation for `side` from its start to `x`,
    /// across breakpoints. The optional accumulator integrates `φ±²`.
    /// Returns `[h, h′, ∫_{start}^{x} φ²]` and calls `observer` on every step.
    pub(crate) fn integrate_reduced(
        &self,
        side: Side,
        k: Complex64,
        x: f64,
        with_norm: bool,
        opts: &OdeOptions,
        mut observer: impl FnMut(f64, &[Complex64; 3]),
    ) -> Result<[Complex64; 3]> {
        let s = side.sign();
        let start = self.start(side);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let mut y = [one, zero, zero];
        if s * x >= s * start {
            return Ok(y);
        }
        let c = self.potential.background(side);
        let sik2 = I * k * (2.0 * s);
        let norm_phase = I * k * (2.0 * s);

        let mut cuts: Vec<f64> = self.breakpoints.iter().copied().filter(|b| (*b - x) * (*b - start) < 0.0).collect();
        if s > 0.0 {
            cuts.sort_by(|a, b| b.total_cmp(a));
        } else {
            cuts.sort_by(f64::total_cmp);
        }
        let mut a = start;
        for b in cuts.into_iter().chain(std::iter::once(x)) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let nudge = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
            let pot = self.potential;
            let rhs = |t: f64, y: &[Complex64; 3]| -> [Complex64; 3] {
                let tc = t.clamp(lo + nudge, hi - nudge);
                let q = pot.value(tc) - c;
                let dnorm = if with_norm { y[0] * y[0] * (norm_phase * t).exp() } else { zero };
                [y[1], y[0] * q - sik2 * y[1], dnorm]
            };
            y = integrate_observed(rhs, a, y, b, opts, &mut observer).map_err(|e| self.ode_error(side, k, e))?;
            a = b;
        }
        Ok(y)
    }

    fn ode_error(&self, side: Side, k: Complex64, e: OdeFailure) -> Error {
        Error::IntegrationOverflow(format!("{} Jost solution at k = {k}: {e}", side.name()))
    }

    /// φ±(λ,x) and its derivative.
    pub fn compute_jost(&self, point: &SpectralPoint, side: Side, x: f64) -> Result<JostEvaluation> {
        let k = point.k(side);
        let y = self.integrate_reduced(side, k, x, false, &self.ode_options(), |_, _| {})?;
        Ok(jost_from_reduced(point, side, x, y[0], y[1]))
    }

    /// W(λ) = φ₋φ₊′ − φ₊φ₋′ at the configured matching point.
    pub fn compute_wronskian(&self, point: &SpectralPoint) -> Result<Complex64> {
        self.wronskian_at(point, self.cfg.x_match)
    }

    pub fn wronskian_at(&self, point: &SpectralPoint, x: f64) -> Result<Complex64> {
        let p = self.compute_jost(point, Side::Plus, x)?;
        let m = self.compute_jost(point, Side::Minus, x)?;
        Ok(wronskian(&m, &p))
    }

    /// T± = 2ik±/W and, where k± is real and nonzero, R±.
    pub fn compute_coefficients(&self, point: &SpectralPoint) -> Result<Coefficients> {
        let x = self.cfg.x_match;
        let jp = self.compute_jost(point, Side::Plus, x)?;
        let jm = self.compute_jost(point, Side::Minus, x)?;
        let w = wronskian(&jm, &jp);
        let kp = point.k_plus;
        let km = point.k_minus;
        let scale = 1.0 + kp.norm() + km.norm();
        let near_edge = (point.lambda.re - self.potential.c_low()).abs() < 1e-3;
        let mut warning = false;
        if !(w.norm() > 1e-10 * scale) {
            if near_edge || point.region == Region::BelowSpectrum {
                warning = true;
            } else {
                return Err(Error::SpuriousWronskianZero { lambda: point.lambda.re });
            }
        }
        if w.norm() == 0.0 {
            return Err(Error::SpuriousWronskianZero { lambda: point.lambda.re });
        }
        let t_plus = I * kp * 2.0 / w;
        let t_minus = I * km * 2.0 / w;
        let real_k = |k: Complex64| k.im == 0.0 && k.re != 0.0 && point.region != Region::BelowSpectrum;
        let r_plus = real_k(kp).then(|| {
            let cp = conj_eval(&jp);
            -wronskian_raw(jm.phi, jm.phi_prime, cp.0, cp.1) / w
        });
        let r_minus = real_k(km).then(|| {
            let cm = conj_eval(&jm);
            wronskian_raw(jp.phi, jp.phi_prime, cm.0, cm.1) / w
        });
        Ok(Coefficients { point: *point, wronskian: w, t_plus, t_minus, r_plus, r_minus, conditioning_warning: warning })
    }
}

pub(crate) fn jost_from_reduced(point: &SpectralPoint, side: Side, x: f64, h: Complex64, g: Complex64) -> JostEvaluation {
    let k = point.k(side);
    let sik = I * k * side.sign();
    let e = (sik * x).exp();
    JostEvaluation {
        lambda: *point,
        side,
        x,
        phi: h * e,
        phi_prime: (g + sik * h) * e,
        reduced: h,
        reduced_prime: g,
    }
}

fn conj_eval(j: &JostEvaluation) -> (Complex64, Complex64) {
    (j.phi.conj(), j.phi_prime.conj())
}

fn wronskian_raw(f: Complex64, fp: Complex64, g: Complex64, gp: Complex64) -> Complex64 {
    f * gp - g * fp
}

/// W(f, g) = f g′ − g f′.
pub fn wronskian(f: &JostEvaluation, g: &JostEvaluation) -> Complex64 {
    wronskian_raw(f.phi, f.phi_prime, g.phi, g.phi_prime)
}
