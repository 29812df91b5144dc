//! High-energy expansions: the u-coefficients of the Jost solutions, the
//! Weyl-function coefficients mⱼ and measured remainder rates.

use crate::direct::{DirectConfig, DirectSolver};
use crate::error::{Error, Result};
use crate::numerics::fit::linear_fit;
use crate::numerics::taylor::Jet;
use crate::potential::{Potential, Side};
use crate::spectral::{CutSide, SpectralPoint};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Sampled expansion coefficients on a uniform grid.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionCoefficients {
    pub side: Side,
    pub x: Vec<f64>,
    /// u[l] for l = 0..=max_order.
    pub u: Vec<Vec<f64>>,
    /// m[l − 1] = m_l for l = 1..=max_order.
    pub m: Vec<Vec<f64>>,
    pub max_order: usize,
}

fn uniform_grid(x_inf: f64, h: f64) -> Vec<f64> {
    let n = (2.0 * x_inf / h).round() as usize;
    (0..=n).map(|i| -x_inf + 2.0 * x_inf * i as f64 / n as f64).collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// u±,ₗ for l = 0..=max_order on a uniform grid over [−x_inf, x_inf].
///
/// Derivatives of every uₗ follow pointwise from
/// `uₗ₊₁⁽ʲ⁾ = (q± uₗ)⁽ʲ⁻¹⁾ − uₗ⁽ʲ⁺¹⁾` (j ≥ 1), so only uₗ itself needs a
/// quadrature, done cumulatively from the far end with an
/// Euler–Maclaurin end correction.
pub fn compute_u_coefficients(potential: &Potential, side: Side, max_order: usize, x_inf: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    if max_order > potential.smoothness + 1 {
        return Err(Error::OrderExceedsSmoothness { order: max_order, smoothness: potential.smoothness });
    }
    let x = uniform_grid(x_inf, 0.01);
    let h = x[1] - x[0];
    let c = potential.background(side);
    let n = max_order;
    let q_order = potential.max_derivative_order().map_or(n, |m| m.min(n));
    let q: Vec<Vec<f64>> = x
        .iter()
        .map(|&t| {
            let mut d = potential.derivatives(t, q_order)?;
            d[0] -= c;
            Ok(d)
        })
        .collect::<Result<_>>()?;
    // d[l][j][i] = uₗ⁽ʲ⁾(xᵢ), j ≤ n − l + 2.
    let jmax = |l: usize| n - l + 2;
    let mut d: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n + 1);
    let mut zero_level = vec![vec![0.0; x.len()]; jmax(0) + 1];
    zero_level[0].iter_mut().for_each(|v| *v = 1.0);
    d.push(zero_level);
    let s = side.sign();
    for l in 1..=n {
        let prev = &d[l - 1];
        let mut level = vec![vec![0.0; x.len()]; jmax(l) + 1];
        for j in 1..=jmax(l) {
            for i in 0..x.len() {
                let mut v = -prev[j + 1][i];
                for k in 0..j {
                    if k <= q_order {
                        v += binomial(j - 1, k) * q[i][k] * prev[j - 1 - k][i];
                    }
                }
                level[j][i] = v;
            }
        }
        // uₗ(x) = −∫ₓ^∞ uₗ′ (plus) or ∫_{−∞}^x uₗ′ (minus).
        let f = &level[1];
        let fp = &level[2];
        let m = x.len();
        let mut u = vec![0.0; m];
        if s > 0.0 {
            let mut acc = 0.0;
            for i in (0..m - 1).rev() {
                acc += 0.5 * h * (f[i] + f[i + 1]);
                let corr = -h * h / 12.0 * (fp[m - 1] - fp[i]);
                u[i] = -(acc + corr);
            }
        } else {
            let mut acc = 0.0;
            for i in 1..m {
                acc += 0.5 * h * (f[i] + f[i - 1]);
                let corr = -h * h / 12.0 * (fp[i] - fp[0]);
                u[i] = acc + corr;
            }
        }
        level[0] = u;
        d.push(level);
    }
    Ok((x, d.into_iter().map(|mut lv| lv.swap_remove(0)).collect()))
}

/// m₁(x), …, m_n(x) at a point, from Taylor jets of q.
pub fn m_coefficients_at(potential: &Potential, x: f64, max_order: usize) -> Result<Vec<f64>> {
    if max_order == 0 {
        return Ok(Vec::new());
    }
    if max_order - 1 > potential.smoothness {
        return Err(Error::OrderExceedsSmoothness { order: max_order, smoothness: potential.smoothness });
    }
    let order = max_order - 1;
    let q = potential.derivatives(x, order)?;
    // Jets hold Taylor coefficients; store derivatives scaled by 1/j!.
    let mut fact = 1.0;
    let coeffs: Vec<f64> = q
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as f64;
            }
            v / fact
        })
        .collect();
    let mut m: Vec<Jet> = vec![Jet { c: coeffs }];
    for l in 1..max_order {
        // −m_l′ loses one order of the jet.
        let dm = jet_derivative(&m[l - 1]);
        let mut next = dm.neg();
        for j in 1..l {
            next = next.sub(&truncate(&m[l - j - 1], next.order()).mul(&truncate(&m[j - 1], next.order())));
        }
        m.push(next);
    }
    Ok(m.iter().map(|j| j.value()).collect())
}

fn jet_derivative(j: &Jet) -> Jet {
    if j.c.len() <= 1 {
        return Jet { c: vec![0.0] };
    }
    Jet { c: (1..j.c.len()).map(|k| j.c[k] * k as f64).collect() }
}

fn truncate(j: &Jet, order: usize) -> Jet {
    Jet { c: j.c.iter().copied().take(order + 1).collect() }
}

/// m_l sampled on a grid.
pub fn compute_m_coefficients(potential: &Potential, max_order: usize, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = x.iter().map(|&t| m_coefficients_at(potential, t, max_order)).collect::<Result<_>>()?;
    Ok((0..max_order).map(|l| rows.iter().map(|r| r[l]).collect()).collect())
}

pub fn expansion_coefficients(potential: &Potential, side: Side, max_order: usize, x_inf: f64) -> Result<ExpansionCoefficients> {
    let (x, u) = compute_u_coefficients(potential, side, max_order, x_inf)?;
    let m = compute_m_coefficients(potential, max_order, &x)?;
    Ok(ExpansionCoefficients { side, x, u, m, max_order })
}

/// m±(λ, x) = φ±′/φ±.
pub fn compute_weyl_function(solver: &DirectSolver, point: &SpectralPoint, side: Side, x: f64) -> Result<Complex64> {
    let j = solver.compute_jost(point, side, x)?;
    if j.phi.norm() < 1e-12 {
        return Err(Error::WeylPoleProximity { x, phi_abs: j.phi.norm() });
    }
    Ok(j.phi_prime / j.phi)
}

/// m±(λ, x) − (±i√λ), evaluated from the reduced Jost function so that the
/// leading growth cancels analytically.
pub fn weyl_correction(solver: &DirectSolver, side: Side, lambda: f64, x: f64) -> Result<Complex64> {
    let pt = solver.lift(lambda, CutSide::Upper);
    let j = solver.compute_jost(&pt, side, x)?;
    if j.phi.norm() < 1e-12 {
        return Err(Error::WeylPoleProximity { x, phi_abs: j.phi.norm() });
    }
    let s = side.sign();
    let c = solver.potential().background(side);
    // k± − √λ = −c/(k± + √λ) for λ > c.
    let dk = -c / ((lambda - c).sqrt() + lambda.sqrt());
    Ok(I * s * dk + j.reduced_prime / j.reduced)
}

/// The truncated series Σⱼ₌₁ⁿ mⱼ/(±2i√λ)ʲ.
pub fn weyl_series(m: &[f64], side: Side, lambda: f64, n: usize) -> Complex64 {
    let z = Complex64::new(0.0, 2.0 * side.sign() * lambda.sqrt());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut p = Complex64::new(1.0, 0.0);
    for mj in m.iter().take(n) {
        p /= z;
        acc += p * mj;
    }
    acc
}

/// Default ladder: 12 geometric points over [10², 10⁴].
pub fn default_ladder() -> Vec<f64> {
    geometric_ladder(1e2, 1e4, 12)
}

pub fn geometric_ladder(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualFit {
    pub order: usize,
    pub lambda: Vec<f64>,
    pub residual: Vec<f64>,
    /// Estimated numerical floor at each λ (tolerance-halving disagreement).
    pub floor: Vec<f64>,
    /// Number of leading ladder points used in the fit.
    pub used: usize,
    pub slope: f64,
    pub pass: bool,
}

impl ResidualFit {
    /// CSV with columns lambda, residual_abs, fitted_slope.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,residual_abs,fitted_slope\n");
        for (l, r) in self.lambda.iter().zip(&self.residual) {
            out.push_str(&format!("{l},{r},{}\n", self.slope));
        }
        out
    }
}

/// Leading run of points above 10× the floor with nonincreasing residual;
/// free-potential style identically-zero residuals give slope −∞.
fn pre_floor_fit(lambda: &[f64], residual: &[f64], floor: &[f64]) -> Result<(usize, f64)> {
    if residual.iter().all(|r| *r == 0.0) {
        return Ok((lambda.len(), f64::NEG_INFINITY));
    }
    let mut used = 0;
    for i in 0..lambda.len() {
        let above = residual[i] > 10.0 * floor[i] && residual[i] > 0.0;
        let monotone = i == 0 || residual[i] <= residual[i - 1];
        if !(above && monotone) {
            break;
        }
        used = i + 1;
    }
    if used < 5 {
        return Err(Error::LadderTooShort { usable: used });
    }
    let x: Vec<f64> = lambda[..used].iter().map(|l| l.ln()).collect();
    let y: Vec<f64> = residual[..used].iter().map(|r| r.ln()).collect();
    Ok((used, linear_fit(&x, &y).0))
}

fn tight_config(base: &DirectConfig) -> DirectConfig {
    DirectConfig { ode_rtol: base.ode_rtol.min(1e-12), ode_atol: base.ode_atol.min(1e-15), ..*base }
}

/// Residual ρ(λ) = m±(λ,x) − [±i√λ + Σⱼ mⱼ(x)/(±2i√λ)ʲ] on the ladder and
/// its fitted log–log slope; passes iff slope ≤ −n/2 + 0.3.
pub fn check_expansion_residual(
    potential: &Potential,
    side: Side,
    x: f64,
    order: usize,
    ladder: &[f64],
    cfg: &DirectConfig,
) -> Result<ResidualFit> {
    let m = m_coefficients_at(potential, x, order)?;
    let fine = tight_config(cfg);
    let coarse = DirectConfig { ode_rtol: fine.ode_rtol * 2.0, ode_atol: fine.ode_atol * 2.0, ..fine };
    let s_fine = DirectSolver::new(potential, fine)?;
    let s_coarse = DirectSolver::new(potential, coarse)?;
    let pts: Vec<(f64, f64)> = ladder
        .par_iter()
        .map(|&l| {
            let series = weyl_series(&m, side, l, order);
            let a = weyl_correction(&s_fine, side, l, x)?;
            let b = weyl_correction(&s_coarse, side, l, x)?;
            Ok(((a - series).norm(), 2.0 * (a - b).norm() + 1e-15 * a.norm()))
        })
        .collect::<Result<_>>()?;
    let (residual, floor): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (used, slope) = pre_floor_fit(ladder, &residual, &floor)?;
    let pass = slope <= -(order as f64) / 2.0 + 0.3;
    Ok(ResidualFit { order, lambda: ladder.to_vec(), residual, floor, used, slope, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub lambda: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
}

impl RateFit {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,residual_abs,fitted_slope\n");
        for (l, r) in self.lambda.iter().zip(&self.values) {
            out.push_str(&format!("{l},{r},{}\n", self.slope));
        }
        out
    }
}

fn log_slope(lambda: &[f64], values: &[f64]) -> f64 {
    let (x, y): (Vec<f64>, Vec<f64>) =
        lambda.iter().zip(values).filter(|(_, v)| **v > 0.0).map(|(l, v)| (l.ln(), v.ln())).unzip();
    if x.len() < 2 {
        return f64::NEG_INFINITY;
    }
    linear_fit(&x, &y).0
}

/// |T± − 1| on the ladder with its log–log slope.
pub fn transmission_rate(solver: &DirectSolver, side: Side, ladder: &[f64]) -> Result<RateFit> {
    let values: Vec<f64> = ladder
        .par_iter()
        .map(|&l| Ok((solver.compute_coefficients(&solver.lift(l, CutSide::Upper))?.t(side) - 1.0).norm()))
        .collect::<Result<_>>()?;
    Ok(RateFit { lambda: ladder.to_vec(), slope: log_slope(ladder, &values), values })
}

/// Samples of |R±| at or below this level are treated as zero.
pub const REFLECTION_FLOOR: f64 = 1e-10;

/// |R±(λ)|·λ^{(n+1)/2} on the ladder; the slope of its logarithm should
/// not be positive when the rate holds. Samples with |R±| under
/// [`REFLECTION_FLOOR`] are reported as zero and left out of the fit.
pub fn reflection_rate(solver: &DirectSolver, side: Side, n: usize, ladder: &[f64]) -> Result<RateFit> {
    let values: Vec<f64> = ladder
        .par_iter()
        .map(|&l| {
            let r = solver.compute_coefficients(&solver.lift(l, CutSide::Upper))?.r(side).unwrap_or_default();
            let r = r.norm();
            Ok(if r <= REFLECTION_FLOOR { 0.0 } else { r * l.powf((n as f64 + 1.0) / 2.0) })
        })
        .collect::<Result<_>>()?;
    Ok(RateFit { lambda: ladder.to_vec(), slope: log_slope(ladder, &values), values })
}
