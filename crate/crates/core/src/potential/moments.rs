//! Decay diagnostics σ±,ᵢ, σ̂±,ᵢ and weighted moment norms.

use super::{Potential, Side};
use crate::error::{Error, Result};
use crate::numerics::quadrature::gauss_legendre;
use serde::Serialize;

const OVERFLOW_GUARD: f64 = 1e12;

#[derive(Debug, Clone, Serialize)]
pub struct MomentDiagnostics {
    pub x: Vec<f64>,
    /// `sigma_plus[i][k] = ∫_{x_k}^{X} |q₊⁽ⁱ⁾|`.
    pub sigma_plus: Vec<Vec<f64>>,
    /// `sigma_minus[i][k] = ∫_{−X}^{x_k} |q₋⁽ⁱ⁾|`.
    pub sigma_minus: Vec<Vec<f64>>,
    pub sigma_hat_plus: Vec<Vec<f64>>,
    pub sigma_hat_minus: Vec<Vec<f64>>,
    /// `moment_norm_plus[j] = ∫_0^X (1 + |x|^j)|q − c₊|`.
    pub moment_norm_plus: Vec<f64>,
    pub moment_norm_minus: Vec<f64>,
}

impl MomentDiagnostics {
    pub fn sigma(&self, side: Side, i: usize) -> &[f64] {
        match side {
            Side::Plus => &self.sigma_plus[i],
            Side::Minus => &self.sigma_minus[i],
        }
    }

    pub fn moment_norm(&self, side: Side) -> &[f64] {
        match side {
            Side::Plus => &self.moment_norm_plus,
            Side::Minus => &self.moment_norm_minus,
        }
    }
}

/// Uniform grid of spacing about `h` on [−X, X] with the potential's
/// breakpoints inserted as nodes.
pub(crate) fn working_grid(potential: &Potential, x_inf: f64, h: f64) -> Vec<f64> {
    let n = (2.0 * x_inf / h).round().max(2.0) as usize;
    let mut x: Vec<f64> = (0..=n).map(|i| -x_inf + 2.0 * x_inf * i as f64 / n as f64).collect();
    for b in potential.breakpoints() {
        if b > -x_inf && b < x_inf {
            x.push(b);
        }
    }
    x.sort_by(f64::total_cmp);
    x.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    x
}

/// Tabulates σ±,ᵢ for i ≤ n and σ̂±,ᵢ, plus moment norms for j ≤ m, over the
/// truncation window [−X, X].
pub fn compute_moments(potential: &Potential, m: usize, n: usize, x_inf: f64, eps_tail: f64) -> Result<MomentDiagnostics> {
    for side in [Side::Plus, Side::Minus] {
        let edge = side.sign() * x_inf;
        let tail = potential.shifted(side, edge).abs();
        if !(tail < eps_tail) {
            return Err(Error::MomentConditionViolated(format!(
                "|q({edge}) - c_{}| = {tail:.3e} is not below the tail tolerance {eps_tail:.1e}",
                side.name()
            )));
        }
    }
    let x = working_grid(potential, x_inf, 0.01);
    let (gz, gw) = gauss_legendre(4);
    let cells = x.len() - 1;

    // Per-cell integrals of |q±⁽ⁱ⁾| and weighted |q − c±|, evaluated strictly inside cells.
    let mut abs_int = vec![vec![[0.0f64; 2]; cells]; n + 1];
    let mut mom_cell = vec![vec![[0.0f64; 2]; cells]; m + 1];
    for c in 0..cells {
        let (a, b) = (x[c], x[c + 1]);
        for (z, w) in gz.iter().zip(&gw) {
            let t = a + 0.5 * (b - a) * (z + 1.0);
            let wt = 0.5 * (b - a) * w;
            let d = potential.derivatives(t, n)?;
            for i in 0..=n {
                let (vp, vm) = if i == 0 { (d[0] - potential.c_plus, d[0] - potential.c_minus) } else { (d[i], d[i]) };
                abs_int[i][c][0] += wt * vp.abs();
                abs_int[i][c][1] += wt * vm.abs();
            }
            for j in 0..=m {
                let weight = 1.0 + t.abs().powi(j as i32);
                mom_cell[j][c][0] += wt * weight * (d[0] - potential.c_plus).abs();
                mom_cell[j][c][1] += wt * weight * (d[0] - potential.c_minus).abs();
            }
        }
    }

    let np = x.len();
    let edge_abs = |i: usize, t: f64, side: Side| -> Result<f64> {
        let d = potential.derivatives(t, i)?;
        Ok(if i == 0 { (d[0] - potential.background(side)).abs() } else { d[i].abs() })
    };
    let mut sigma_plus = vec![vec![0.0; np]; n + 1];
    let mut sigma_minus = vec![vec![0.0; np]; n + 1];
    let mut sigma_hat_plus = vec![vec![0.0; np]; n + 1];
    let mut sigma_hat_minus = vec![vec![0.0; np]; n + 1];
    for i in 0..=n {
        for k in (0..cells).rev() {
            sigma_plus[i][k] = sigma_plus[i][k + 1] + abs_int[i][k][0];
        }
        for k in 0..cells {
            sigma_minus[i][k + 1] = sigma_minus[i][k] + abs_int[i][k][1];
        }
        // σ̂ by the trapezoid rule with the endpoint derivative correction; σ' = ∓|q⁽ⁱ⁾|.
        let mut dp = Vec::with_capacity(np);
        let mut dm = Vec::with_capacity(np);
        for (k, &t) in x.iter().enumerate() {
            let inside = |s: f64| if k == 0 { t + s } else if k == np - 1 { t - s } else { t };
            dp.push(-edge_abs(i, inside(1e-12), Side::Plus)?);
            dm.push(edge_abs(i, inside(1e-12), Side::Minus)?);
        }
        for k in (0..cells).rev() {
            let h = x[k + 1] - x[k];
            let cell = 0.5 * h * (sigma_plus[i][k] + sigma_plus[i][k + 1]) - h * h / 12.0 * (dp[k + 1] - dp[k]);
            sigma_hat_plus[i][k] = sigma_hat_plus[i][k + 1] + cell;
        }
        for k in 0..cells {
            let h = x[k + 1] - x[k];
            let cell = 0.5 * h * (sigma_minus[i][k] + sigma_minus[i][k + 1]) - h * h / 12.0 * (dm[k + 1] - dm[k]);
            sigma_hat_minus[i][k + 1] = sigma_hat_minus[i][k] + cell;
        }
    }

    let mut moment_norm_plus = vec![0.0; m + 1];
    let mut moment_norm_minus = vec![0.0; m + 1];
    for j in 0..=m {
        for c in 0..cells {
            let mid = 0.5 * (x[c] + x[c + 1]);
            if mid >= 0.0 {
                moment_norm_plus[j] += mom_cell[j][c][0];
            } else {
                moment_norm_minus[j] += mom_cell[j][c][1];
            }
        }
    }
    for v in moment_norm_plus.iter().chain(&moment_norm_minus) {
        if !v.is_finite() || *v > OVERFLOW_GUARD {
            return Err(Error::MomentConditionViolated(format!("truncated moment {v:.3e} exceeds the overflow guard")));
        }
    }

    Ok(MomentDiagnostics {
        x,
        sigma_plus,
        sigma_minus,
        sigma_hat_plus,
        sigma_hat_minus,
        moment_norm_plus,
        moment_norm_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_potential_has_zero_diagnostics() {
        let d = compute_moments(&Potential::free(0.0), 2, 2, 30.0, 1e-10).unwrap();
        assert!(d.sigma_plus.iter().flatten().all(|v| *v == 0.0));
        assert!(d.moment_norm_plus.iter().chain(&d.moment_norm_minus).all(|v| *v == 0.0));
    }

    #[test]
    fn soliton_sigma_matches_closed_form() {
        let p = Potential::sech2(0.0, 1.0, 0.0).unwrap();
        let d = compute_moments(&p, 2, 1, 30.0, 1e-10).unwrap();
        for (k, &x) in d.x.iter().enumerate().step_by(250) {
            let exact = 2.0 * (1.0 - x.tanh());
            assert!((d.sigma_plus[0][k] - exact).abs() < 1e-10, "x={x}");
            let exact_minus = 2.0 * (1.0 + x.tanh());
            assert!((d.sigma_minus[0][k] - exact_minus).abs() < 1e-10);
        }
        // σ̂₊,₀(x) = ∫_x^∞ 2(1 − tanh) = 2(ln 2 − ln(1 + e^{2x}) + 2x)... checked at x = 0: 2 ln 2.
        let k0 = d.x.iter().position(|v| v.abs() < 1e-12).unwrap();
        assert!((d.sigma_hat_plus[0][k0] - 2.0 * 2f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn step_wrong_background_is_flagged() {
        let step = Potential::step(0.0, 1.0, 0.0);
        assert!(compute_moments(&step, 1, 0, 30.0, 1e-10).is_ok());
        // Pretend both backgrounds are 1: the left tail no longer decays.
        let wrong = Potential::expression(1.0, 1.0, "step(x)", vec![0.0], 0, 1).unwrap();
        assert!(matches!(compute_moments(&wrong, 1, 0, 30.0, 1e-10), Err(Error::MomentConditionViolated(_))));
    }
}
