//! Nyström solution of the Marchenko equations
//!
//! ```text
//! K±(x,y) + F±(x+y) ± ∫ₓ^{±∞} K±(x,t) F±(t+y) dt = 0,   ±y ≥ ±x,
//! ```
//!
//! and recovery of the shifted potentials q±(x) = ∓2 d/dx K±(x,x).

use crate::error::{Error, Result};
use crate::glm::GlmKernel;
use crate::numerics::fit::derivative_uniform;
use crate::numerics::quadrature::composite_gauss_legendre;
use crate::potential::Side;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarchenkoConfig {
    pub panels: usize,
    pub order: usize,
    /// Relative threshold defining the truncation point of F.
    pub truncation: f64,
    pub max_condition: f64,
    /// Share of the panels placed near the diagonal end of the interval.
    pub near_fraction: f64,
    /// Quadratic Savitzky–Golay smoothing of K(x,x) before differentiation.
    pub smooth: bool,
    /// Keep the solved rows K(x,·) in the result.
    pub keep_rows: bool,
}

impl Default for MarchenkoConfig {
    fn default() -> Self {
        Self { panels: 32, order: 8, truncation: 1e-12, max_condition: 1e8, near_fraction: 0.75, smooth: false, keep_rows: false }
    }
}

impl MarchenkoConfig {
    pub fn nodes(&self) -> usize {
        self.panels * self.order
    }

    /// Configuration with `n_q` total nodes, keeping the panel order.
    pub fn with_nodes(mut self, n_q: usize) -> Self {
        self.panels = (n_q / self.order).max(1);
        self
    }
}

/// K±(x,·) at the Nyström nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelRow {
    pub x: f64,
    pub y: Vec<f64>,
    pub k: Vec<f64>,
    pub diagonal: f64,
    pub condition: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformKernel {
    pub side: Side,
    pub x_grid: Vec<f64>,
    pub k_diag: Vec<f64>,
    pub k_full: Option<Vec<KernelRow>>,
    /// q± − c±, i.e. ∓2 d/dx K±(x,x).
    pub q_recovered: Vec<f64>,
    pub condition_numbers: Vec<f64>,
}

struct Discretization {
    y: Vec<f64>,
    w: Vec<f64>,
    /// I + √W F √W.
    matrix: DMatrix<f64>,
}

fn integration_interval(kernel: &GlmKernel, x: f64, cfg: &MarchenkoConfig) -> (f64, f64) {
    let t_f = kernel.truncation_point(cfg.truncation);
    match kernel.side {
        Side::Plus => (x, (t_f - x).max(x)),
        Side::Minus => ((t_f - x).min(x), x),
    }
}

/// Composite Gauss–Legendre nodes with `near_fraction` of the panels on
/// the part of the interval within 2|x| + 2 of the diagonal end, where
/// F(s + y) has its most rapid variation (arguments near 0). Coarse
/// configurations (fewer than 16 panels) stay uniform.
fn graded_nodes(side: Side, a: f64, b: f64, x: f64, cfg: &MarchenkoConfig) -> (Vec<f64>, Vec<f64>) {
    let near_len = 2.0 * x.abs() + 2.0;
    if cfg.near_fraction <= 0.0 || b - a <= 1.5 * near_len || cfg.panels < 16 {
        return composite_gauss_legendre(a, b, cfg.panels, cfg.order);
    }
    let near_panels = ((cfg.panels as f64 * cfg.near_fraction).round() as usize).clamp(1, cfg.panels - 1);
    let far_panels = cfg.panels - near_panels;
    let (near, far) = match side {
        Side::Plus => ((a, a + near_len), (a + near_len, b)),
        Side::Minus => ((b - near_len, b), (a, b - near_len)),
    };
    let (mut y, mut w) = composite_gauss_legendre(near.0, near.1, near_panels, cfg.order);
    let (yf, wf) = composite_gauss_legendre(far.0, far.1, far_panels, cfg.order);
    y.extend(yf);
    w.extend(wf);
    (y, w)
}

fn discretize(kernel: &GlmKernel, x: f64, cfg: &MarchenkoConfig) -> Option<Discretization> {
    let (a, b) = integration_interval(kernel, x, cfg);
    if b - a < 1e-12 {
        return None;
    }
    let (y, w) = graded_nodes(kernel.side, a, b, x, cfg);
    let n = y.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut m = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in i..n {
            let v = sw[i] * sw[j] * kernel.eval(y[i] + y[j]);
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
    }
    Some(Discretization { y, w, matrix: m })
}

enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Factor {
    fn new(m: &DMatrix<f64>) -> Option<Self> {
        if let Some(c) = m.clone().cholesky() {
            return Some(Factor::Cholesky(c));
        }
        let lu = m.clone().lu();
        lu.is_invertible().then_some(Factor::Lu(lu))
    }

    fn solve(&self, b: &DVector<f64>) -> Option<DVector<f64>> {
        match self {
            Factor::Cholesky(c) => Some(c.solve(b)),
            Factor::Lu(l) => l.solve(b),
        }
    }
}

/// 2-norm condition estimate of a symmetric matrix from power iteration on
/// A and on A⁻¹ (through the factorization).
fn condition_estimate(m: &DMatrix<f64>, f: &Factor) -> f64 {
    let n = m.nrows();
    let start = DVector::from_fn(n, |i, _| 1.0 + 0.37 * ((i as f64) * 1.618).sin());
    let iterate = |apply: &dyn Fn(&DVector<f64>) -> Option<DVector<f64>>| -> f64 {
        let mut v = start.normalize();
        let mut est = 0.0;
        for _ in 0..40 {
            let Some(w) = apply(&v) else { return f64::INFINITY };
            let nw = w.norm();
            if !nw.is_finite() {
                return f64::INFINITY;
            }
            if nw == 0.0 {
                return 0.0;
            }
            let done = (nw - est).abs() <= 1e-6 * nw;
            est = nw;
            v = w / nw;
            if done {
                break;
            }
        }
        est
    };
    let big = iterate(&|v| Some(m * v));
    let inv = iterate(&|v| f.solve(v));
    big * inv
}

/// Solves the Marchenko equation at a single x.
pub fn solve_marchenko_at(kernel: &GlmKernel, x: f64, cfg: &MarchenkoConfig) -> Result<KernelRow> {
    let Some(d) = discretize(kernel, x, cfg) else {
        return Ok(KernelRow { x, y: vec![], k: vec![], diagonal: -kernel.eval(2.0 * x), condition: 1.0 });
    };
    let n = d.y.len();
    let sw: Vec<f64> = d.w.iter().map(|v| v.sqrt()).collect();
    // Unknown u = √W K, right-hand side −√W F(x + y).
    let rhs = DVector::from_fn(n, |i, _| -sw[i] * kernel.eval(x + d.y[i]));
    let factor = Factor::new(&d.matrix).ok_or(Error::NearSingular { x, condition: f64::INFINITY })?;
    let condition = condition_estimate(&d.matrix, &factor);
    if !(condition <= cfg.max_condition) {
        return Err(Error::NearSingular { x, condition });
    }
    let u = factor.solve(&rhs).ok_or(Error::NearSingular { x, condition })?;
    let k: Vec<f64> = (0..n).map(|i| u[i] / sw[i]).collect();
    // Nyström interpolation at y = x.
    let integral: f64 = (0..n).map(|j| d.w[j] * k[j] * kernel.eval(d.y[j] + x)).sum();
    let diagonal = -kernel.eval(2.0 * x) - integral;
    Ok(KernelRow { x, y: d.y, k, diagonal, condition })
}

/// Quadratic five-point Savitzky–Golay smoothing; ends are left untouched.
fn savitzky_golay(y: &[f64]) -> Vec<f64> {
    let mut out = y.to_vec();
    if y.len() < 5 {
        return out;
    }
    for i in 2..y.len() - 2 {
        out[i] = (-3.0 * y[i - 2] + 12.0 * y[i - 1] + 17.0 * y[i] + 12.0 * y[i + 1] - 3.0 * y[i + 2]) / 35.0;
    }
    out
}

/// Solves at every point of the (uniform) grid and differentiates the diagonal.
pub fn recover_potential(kernel: &GlmKernel, x_grid: &[f64], cfg: &MarchenkoConfig) -> Result<TransformKernel> {
    assert!(x_grid.len() >= 5, "reconstruction grid needs at least five points");
    let rows: Vec<KernelRow> = x_grid.par_iter().map(|&x| solve_marchenko_at(kernel, x, cfg)).collect::<Result<_>>()?;
    let k_diag: Vec<f64> = rows.iter().map(|r| r.diagonal).collect();
    let condition_numbers = rows.iter().map(|r| r.condition).collect();
    let h = (x_grid[x_grid.len() - 1] - x_grid[0]) / (x_grid.len() - 1) as f64;
    let source = if cfg.smooth { savitzky_golay(&k_diag) } else { k_diag.clone() };
    let s = kernel.side.sign();
    let q_recovered = derivative_uniform(&source, h).into_iter().map(|d| -2.0 * s * d).collect();
    Ok(TransformKernel {
        side: kernel.side,
        x_grid: x_grid.to_vec(),
        k_diag,
        k_full: cfg.keep_rows.then_some(rows),
        q_recovered,
        condition_numbers,
    })
}

/// Reconstruction window for one side: the part of `[lo, hi]` that side
/// covers, [−x_ov, hi] for the plus side and [lo, x_ov] for the minus side.
pub fn side_grid(side: Side, lo: f64, hi: f64, points: usize, x_overlap: f64) -> Vec<f64> {
    let h = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| lo + h * i as f64)
        .filter(|&x| match side {
            Side::Plus => x >= -x_overlap - 1e-12,
            Side::Minus => x <= x_overlap + 1e-12,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub window: (f64, f64),
    pub sup: f64,
    pub l1: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Compares q₋ + c₋ with q₊ + c₊ at the abscissae both sides share inside
/// [−x_ov, x_ov].
pub fn verify_two_sided_consistency(
    plus: &TransformKernel,
    minus: &TransformKernel,
    c_plus: f64,
    c_minus: f64,
    x_overlap: f64,
    tolerance: f64,
) -> ConsistencyReport {
    verify_two_sided_consistency_excluding(plus, minus, c_plus, c_minus, x_overlap, tolerance, &[], 0.0)
}

/// As [`verify_two_sided_consistency`], skipping points within `radius` of
/// known jumps, where both recoveries are Gibbs-limited.
#[allow(clippy::too_many_arguments)]
pub fn verify_two_sided_consistency_excluding(
    plus: &TransformKernel,
    minus: &TransformKernel,
    c_plus: f64,
    c_minus: f64,
    x_overlap: f64,
    tolerance: f64,
    jumps: &[f64],
    radius: f64,
) -> ConsistencyReport {
    let mut pairs = Vec::new();
    for (i, &x) in plus.x_grid.iter().enumerate() {
        if x.abs() > x_overlap + 1e-12 || jumps.iter().any(|b| (x - b).abs() < radius) {
            continue;
        }
        if let Some(j) = minus.x_grid.iter().position(|&y| (y - x).abs() < 1e-9) {
            pairs.push((x, (minus.q_recovered[j] + c_minus) - (plus.q_recovered[i] + c_plus)));
        }
    }
    let sup = pairs.iter().fold(0.0f64, |m, (_, d)| m.max(d.abs()));
    let h = plus.x_grid.get(1).map(|v| v - plus.x_grid[0]).unwrap_or(0.0);
    let l1 = pairs
        .windows(2)
        .filter(|w| w[1].0 - w[0].0 < 1.5 * h)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.abs() + w[1].1.abs()))
        .sum();
    let window = match (pairs.first(), pairs.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => (0.0, 0.0),
    };
    ConsistencyReport { window, sup, l1, tolerance, pass: !pairs.is_empty() && sup < tolerance }
}

/// Smallest singular value of the discretized I + F±,ₓ (1 when the
/// integration interval is empty).
pub fn check_homogeneous_uniqueness(kernel: &GlmKernel, x: f64, cfg: &MarchenkoConfig) -> f64 {
    match discretize(kernel, x, cfg) {
        None => 1.0,
        Some(d) => d.matrix.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, v| m.min(v.abs())),
    }
}

/// Recovery dump with columns x, K_diag_plus, K_diag_minus, q_plus,
/// q_minus, cond_plus, cond_minus; empty cells where a side was not solved.
pub fn recovery_csv(plus: &TransformKernel, minus: &TransformKernel) -> String {
    let mut xs: Vec<f64> = plus.x_grid.iter().chain(&minus.x_grid).copied().collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let find = |t: &TransformKernel, x: f64| t.x_grid.iter().position(|&y| (y - x).abs() < 1e-9);
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    let mut out = String::from("x,K_diag_plus,K_diag_minus,q_plus,q_minus,cond_plus,cond_minus\n");
    for x in xs {
        let p = find(plus, x);
        let m = find(minus, x);
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            x,
            cell(p.map(|i| plus.k_diag[i])),
            cell(m.map(|i| minus.k_diag[i])),
            cell(p.map(|i| plus.q_recovered[i])),
            cell(m.map(|i| minus.q_recovered[i])),
            cell(p.map(|i| plus.condition_numbers[i])),
            cell(m.map(|i| minus.condition_numbers[i])),
        ));
    }
    out
}

/// The recovered potential on the union grid: plus side for x ≥ 0, minus
/// side for x < 0, background added back.
pub fn combined_potential(plus: &TransformKernel, minus: &TransformKernel, c_plus: f64, c_minus: f64) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> =
        minus.x_grid.iter().zip(&minus.q_recovered).filter(|(x, _)| **x < 0.0).map(|(x, q)| (*x, q + c_minus)).collect();
    out.extend(plus.x_grid.iter().zip(&plus.q_recovered).filter(|(x, _)| **x >= 0.0).map(|(x, q)| (*x, q + c_plus)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::{EigenRecord, ScatteringData};
    use crate::glm::{assemble, GlmConfig, KernelGrid};

    fn reflectionless(eigen: Vec<EigenRecord>) -> ScatteringData {
        ScatteringData {
            c_plus: 0.0,
            c_minus: 0.0,
            eigenvalues: eigen,
            resonant: true,
            gamma_res: None,
            r_plus: Default::default(),
            r_minus: Default::default(),
            t_plus: Default::default(),
            t_minus: Default::default(),
            lower_r_plus: Default::default(),
            lower_r_minus: Default::default(),
            lower_t_plus: Default::default(),
            lower_t_minus: Default::default(),
            x_inf: 30.0,
            k_max: 40.0,
        }
    }

    fn one_pole(gamma: f64, kappa: f64) -> ScatteringData {
        reflectionless(vec![EigenRecord { lambda: -kappa * kappa, gamma_plus: gamma, gamma_minus: 4.0 * kappa * kappa / gamma, mu: 1.0 }])
    }

    fn kernel(d: &ScatteringData, side: Side) -> GlmKernel {
        assemble(d, side, KernelGrid::for_side(side, 30.0, 3.0, 256), &GlmConfig::default()).unwrap()
    }

    #[test]
    fn zero_datum_gives_zero_kernel() {
        let d = reflectionless(vec![]);
        let k = kernel(&d, Side::Plus);
        let row = solve_marchenko_at(&k, 0.5, &MarchenkoConfig::default()).unwrap();
        assert_eq!(row.diagonal, 0.0);
        assert!(row.k.iter().all(|v| *v == 0.0));
        assert_eq!(check_homogeneous_uniqueness(&k, 0.5, &MarchenkoConfig::default()), 1.0);
    }

    #[test]
    fn one_pole_datum_matches_separable_solution() {
        let cfg = MarchenkoConfig { keep_rows: true, ..Default::default() };
        for &(g, kap) in &[(2.0, 1.0), (0.7, 1.6)] {
            let d = one_pole(g, kap);
            let k = kernel(&d, Side::Plus);
            for &x in &[-2.0, 0.0, 0.8, 3.0] {
                let row = solve_marchenko_at(&k, x, &cfg).unwrap();
                let e = (-2.0 * kap * x).exp();
                let exact = -g * e / (1.0 + g / (2.0 * kap) * e);
                assert!((row.diagonal - exact).abs() < 1e-8, "g={g} x={x}");
                for (y, kv) in row.y.iter().zip(&row.k) {
                    let full = -g * (-kap * (x + y)).exp() / (1.0 + g / (2.0 * kap) * e);
                    assert!((kv - full).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn soliton_recovery_both_sides() {
        let d = one_pole(2.0, 1.0);
        let cfg = MarchenkoConfig::default();
        let plus = recover_potential(&kernel(&d, Side::Plus), &side_grid(Side::Plus, -10.0, 10.0, 801, 3.0), &cfg).unwrap();
        let minus = recover_potential(&kernel(&d, Side::Minus), &side_grid(Side::Minus, -10.0, 10.0, 801, 3.0), &cfg).unwrap();
        for t in [&plus, &minus] {
            for (x, q) in t.x_grid.iter().zip(&t.q_recovered) {
                let exact = -2.0 / x.cosh().powi(2);
                assert!((q - exact).abs() < 1e-6, "{:?} x={x}: {q} vs {exact}", t.side);
            }
        }
        let rep = verify_two_sided_consistency(&plus, &minus, 0.0, 0.0, 3.0, 1e-3);
        assert!(rep.pass && rep.sup < 1e-6);
        // Rank-one shift: the smallest eigenvalue stays 1, the largest is 2 at x = 0.
        let sv = check_homogeneous_uniqueness(&kernel(&d, Side::Plus), 0.0, &cfg);
        assert!((sv - 1.0).abs() < 1e-8);
    }

    #[test]
    fn corrupted_norming_constant_breaks_consistency() {
        let mut d = one_pole(2.0, 1.0);
        d.eigenvalues[0].gamma_plus *= 1.1;
        let cfg = MarchenkoConfig::default();
        let plus = recover_potential(&kernel(&d, Side::Plus), &side_grid(Side::Plus, -10.0, 10.0, 201, 3.0), &cfg).unwrap();
        let minus = recover_potential(&kernel(&d, Side::Minus), &side_grid(Side::Minus, -10.0, 10.0, 201, 3.0), &cfg).unwrap();
        assert!(!verify_two_sided_consistency(&plus, &minus, 0.0, 0.0, 3.0, 1e-3).pass);
    }

    #[test]
    fn negative_norming_constant_is_near_singular() {
        // γ/2κ = −1 makes 1 + (γ/2κ)e^{−2κx} vanish at x = 0.
        let d = one_pole(-2.0, 1.0);
        let k = kernel(&d, Side::Plus);
        assert!(check_homogeneous_uniqueness(&k, 0.0, &MarchenkoConfig::default()) < 1e-6);
        assert!(matches!(solve_marchenko_at(&k, 0.0, &MarchenkoConfig::default()), Err(Error::NearSingular { .. })));
    }
}
