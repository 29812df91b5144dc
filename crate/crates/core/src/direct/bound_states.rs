use super::{jost_from_reduced, DirectSolver};
use crate::error::{Error, Result};
use crate::numerics::ode::OdeOptions;
use crate::potential::Side;
use crate::spectral::CutSide;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormingConstants {
    pub lambda: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    /// φ₊(λⱼ,·) = μ φ₋(λⱼ,·).
    pub mu: f64,
    pub dw_dlambda: f64,
    /// |(dW/dλ)⁻² − γ⁺γ⁻| / (γ⁺γ⁻).
    pub residue_residual: f64,
}

impl<'a> DirectSolver<'a> {
    /// Real Wronskian below the continuous spectrum.
    fn real_wronskian(&self, lambda: f64) -> Result<f64> {
        Ok(self.compute_wronskian(&self.lift(lambda, CutSide::Upper))?.re)
    }

    /// All eigenvalues in (lambda_floor, c̲ − δedge), ascending.
    ///
    /// Sign changes of W on a uniform scan are refined by bisection; the count
    /// is checked against the number of zeros of φ₋ just below c̲.
    pub fn find_bound_states(&self, lambda_floor: f64) -> Result<Vec<f64>> {
        let top = self.potential.c_low() - self.cfg.delta_edge;
        if lambda_floor >= top {
            return Ok(Vec::new());
        }
        let nodes = self.node_count(top)?;
        let mut points = self.cfg.scan_points.max(2);
        let mut found = Vec::new();
        for _attempt in 0..3 {
            found = self.scan(lambda_floor, top, points)?;
            if found.len() == nodes {
                return Ok(found);
            }
            points *= 4;
        }
        Err(Error::EigenvalueSearchIncomplete { found: found.len(), nodes })
    }

    fn scan(&self, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
        use rayon::prelude::*;
        let grid: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
        let w: Vec<f64> = grid.par_iter().map(|&l| self.real_wronskian(l)).collect::<Result<_>>()?;
        let mut roots = Vec::new();
        for i in 0..points - 1 {
            if w[i] == 0.0 {
                roots.push(grid[i]);
            } else if w[i] * w[i + 1] < 0.0 {
                roots.push(self.bisect(grid[i], grid[i + 1], w[i])?);
            }
        }
        Ok(roots)
    }

    fn bisect(&self, mut a: f64, mut b: f64, mut wa: f64) -> Result<f64> {
        while b - a > self.cfg.eps_lambda {
            let m = 0.5 * (a + b);
            let wm = self.real_wronskian(m)?;
            if wm == 0.0 {
                return Ok(m);
            }
            if wa * wm < 0.0 {
                b = m;
            } else {
                a = m;
                wa = wm;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// Number of zeros on ℝ of the real solution φ₋(λ,·), λ < c̲. By Sturm
    /// oscillation this is the number of eigenvalues below λ.
    pub fn node_count(&self, lambda: f64) -> Result<usize> {
        let point = self.lift(lambda, CutSide::Upper);
        let k = point.k_minus;
        let right = self.start(Side::Plus).max(self.cfg.x_match);
        let opts = OdeOptions { rtol: self.cfg.ode_rtol, atol: self.cfg.ode_atol, h_max: 0.05, ..Default::default() };
        let mut count = 0usize;
        let mut last = 1.0f64;
        let y = self.integrate_reduced(Side::Minus, k, right, false, &opts, |_, y| {
            let v = y[0].re;
            if v != 0.0 {
                if v * last < 0.0 {
                    count += 1;
                }
                last = v;
            }
        })?;
        // Beyond the right support edge φ₋ = a e^{κ(x−X)} + b e^{−κ(x−X)}.
        let j = jost_from_reduced(&point, Side::Minus, right, y[0], y[1]);
        let kappa = (self.potential.c_plus - lambda).sqrt();
        let a = 0.5 * (j.phi.re + j.phi_prime.re / kappa);
        let b = 0.5 * (j.phi.re - j.phi_prime.re / kappa);
        if a != 0.0 && -b / a > 1.0 {
            count += 1;
        }
        Ok(count)
    }

    /// γ±, μ and the residue identity for a verified eigenvalue.
    pub fn compute_norming_constants(&self, lambda: f64) -> Result<NormingConstants> {
        let point = self.lift(lambda, CutSide::Upper);
        let xm = self.cfg.x_match;
        let opts = OdeOptions { rtol: self.cfg.ode_rtol, atol: self.cfg.ode_atol * 1e-3, ..Default::default() };
        let kp = (self.potential.c_plus - lambda).sqrt();
        let km = (self.potential.c_minus - lambda).sqrt();
        // Beyond the support edge the tail is added exactly; the window only
        // limits us when the potential fills it.
        let window_check = |kappa: f64, side: Side| -> Result<()> {
            let filled = self.start(side).abs() >= self.cfg.x_inf;
            if filled && (-2.0 * kappa * self.cfg.x_inf).exp() > 1e-8 {
                return Err(Error::WindowTooSmall(format!(
                    "{} eigenfunction decays like e^(-{kappa:.3e}|x|), not negligible at the window edge",
                    side.name()
                )));
            }
            Ok(())
        };
        window_check(kp, Side::Plus)?;
        window_check(km, Side::Minus)?;

        let yp = self.integrate_reduced(Side::Plus, point.k_plus, xm, true, &opts, |_, _| {})?;
        let ym = self.integrate_reduced(Side::Minus, point.k_minus, xm, true, &opts, |_, _| {})?;
        let sp = self.start(Side::Plus);
        let sm = self.start(Side::Minus);
        // ∫_{xm}^{∞} φ₊²: the ODE accumulated ∫_{sp}^{xm}, plus the exact exponential tail.
        let int_plus = -yp[2].re + (-2.0 * kp * sp).exp() / (2.0 * kp);
        let int_minus = ym[2].re + (2.0 * km * sm).exp() / (2.0 * km);
        let jp = jost_from_reduced(&point, Side::Plus, xm, yp[0], yp[1]);
        let jm = jost_from_reduced(&point, Side::Minus, xm, ym[0], ym[1]);
        let mu = (jp.phi.re * jm.phi.re + jp.phi_prime.re * jm.phi_prime.re)
            / (jm.phi.re * jm.phi.re + jm.phi_prime.re * jm.phi_prime.re);
        let gamma_plus = 1.0 / (int_plus + mu * mu * int_minus);
        let gamma_minus = 1.0 / (int_minus + int_plus / (mu * mu));

        let mut h = 1e-5 * lambda.abs().max(1.0);
        let gap = self.potential.c_low() - lambda;
        if lambda + h >= self.potential.c_low() {
            h = 0.5 * gap;
        }
        let dw = (self.real_wronskian(lambda + h)? - self.real_wronskian(lambda - h)?) / (2.0 * h);
        let product = gamma_plus * gamma_minus;
        let residual = ((1.0 / (dw * dw)) - product).abs() / product;
        if !(residual <= self.cfg.residue_tol) {
            return Err(Error::InconsistentEigenpair { lambda, residual });
        }
        Ok(NormingConstants { lambda, gamma_plus, gamma_minus, mu, dw_dlambda: dw, residue_residual: residual })
    }

    /// A floor strictly below min q, for bracketing all eigenvalues.
    pub fn default_lambda_floor(&self) -> f64 {
        let grid = crate::potential::moments_grid(self.potential, self.cfg.x_inf);
        let min_q = grid.iter().map(|&x| self.potential.value(x)).fold(f64::INFINITY, f64::min);
        min_q.min(self.potential.c_low()) - 1.0
    }
}
