//! Marchenko kernels F± = F_r + F_d + F_χ built from scattering data.
//!
//! The reflection part is a Fourier integral over the sampled band; R is
//! splined in a variable in which it is smooth (k itself on the c̄ side,
//! θ with k = a·sin θ and p with k = √(p² + a²) on the c̲ side, a = √(c̄ − c̲)),
//! the oscillatory factor is kept exact at every quadrature node, and the
//! band above k_max is closed with a fitted `iα/k + β/k²` tail integrated via
//! the sine integral.

use crate::direct::{CoefficientSeries, ScatteringData};
use crate::error::{Error, Result};
use crate::numerics::fit::derivative_uniform;
use crate::numerics::quadrature::gauss_legendre;
use crate::numerics::special::{cos_over_k2_tail, sin_over_k_tail};
use crate::numerics::spline::{ComplexSpline, CubicSpline};
use crate::potential::Side;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// Upper bound on the kernel grid spacing; F grows like e^{κ|t|} toward
/// negative arguments, so interpolation error there scales with the step⁴.
pub const MAX_GRID_STEP: f64 = 0.016;

/// Uniform sampling grid `start + i·step`, `i < len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl KernelGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Self {
        assert!(len >= 2 && end > start);
        Self { start, step: (end - start) / (len - 1) as f64, len }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.x(self.len - 1)
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.x(i)).collect()
    }

    /// Default grid for the Marchenko solves on one side: covers every
    /// argument x + y with x ≥ −x_ov (plus side; mirrored for minus) out to
    /// 2X∞, with spacing at most half the mean Nyström node spacing and
    /// never above [`MAX_GRID_STEP`].
    pub fn for_side(side: Side, x_inf: f64, x_overlap: f64, n_q: usize) -> Self {
        let margin = 1.0;
        let lo = -2.0 * x_overlap - margin;
        let hi = 2.0 * x_inf;
        let span = hi - lo;
        let len = ((2 * n_q).max(64) * ((span / (2.0 * x_inf)).ceil() as usize).max(1)).max((span / MAX_GRID_STEP).ceil() as usize) + 1;
        match side {
            Side::Plus => KernelGrid::new(lo, hi, len),
            Side::Minus => KernelGrid::new(-hi, -lo, len),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlmConfig {
    /// Gauss–Legendre nodes per cell of the reflection quadrature.
    pub cell_order: usize,
    /// Nodes for the multiplicity-one integral.
    pub chi_nodes: usize,
    /// Top fraction of the band used for the tail fit.
    pub tail_fraction: f64,
    /// Maximal relative misfit of the tail model.
    pub tail_tolerance: f64,
}

impl Default for GlmConfig {
    fn default() -> Self {
        Self { cell_order: 4, chi_nodes: 200, tail_fraction: 0.2, tail_tolerance: 0.1 }
    }
}

/// The fitted high-momentum model R ≈ iα/k + β/k² beyond `k_top`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub k_top: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Quadrature form of F_r(x) = (1/π) Re ∫₀^∞ R(k) e^{±ikx} dk.
#[derive(Debug, Clone)]
pub struct ReflectionTransform {
    side: Side,
    k: Vec<f64>,
    /// Quadrature weight × Jacobian × R at each node.
    wr: Vec<Complex64>,
    pub tail: Option<TailModel>,
}

impl ReflectionTransform {
    pub fn eval(&self, x: f64) -> f64 {
        let s = self.side.sign();
        let mut acc = 0.0;
        for (k, wr) in self.k.iter().zip(&self.wr) {
            let (sn, cs) = (s * k * x).sin_cos();
            acc += wr.re * cs - wr.im * sn;
        }
        let mut f = acc / PI;
        if let Some(t) = self.tail {
            f += (-t.alpha * s * sin_over_k_tail(t.k_top, x) + t.beta * cos_over_k2_tail(t.k_top, x)) / PI;
        }
        f
    }

    pub fn node_count(&self) -> usize {
        self.k.len()
    }
}

/// One band of samples in a smooth variable ν with k = k(ν), dk/dν.
struct Band {
    nu: Vec<f64>,
    r: Vec<Complex64>,
    lo: f64,
    hi: f64,
    k_of: Box<dyn Fn(f64) -> (f64, f64) + Sync + Send>,
}

fn add_band(band: Band, order: usize, k_out: &mut Vec<f64>, wr_out: &mut Vec<Complex64>) {
    if band.nu.len() < 2 {
        return;
    }
    let spline = ComplexSpline::new(band.nu.clone(), &band.r);
    let (z, w) = gauss_legendre(order);
    let mut edges = Vec::with_capacity(band.nu.len() + 2);
    if band.nu[0] > band.lo {
        edges.push(band.lo);
    }
    edges.extend(band.nu.iter().copied());
    if *band.nu.last().unwrap() < band.hi {
        edges.push(band.hi);
    }
    for e in edges.windows(2) {
        let (a, b) = (e[0], e[1]);
        if b <= a {
            continue;
        }
        for (zi, wi) in z.iter().zip(&w) {
            let nu = a + 0.5 * (b - a) * (zi + 1.0);
            let (k, dk) = (band.k_of)(nu);
            k_out.push(k);
            wr_out.push(spline.eval(nu) * (0.5 * (b - a) * wi * dk));
        }
    }
}

fn fit_tail(series: &CoefficientSeries, k_of: impl Fn(f64) -> f64, fraction: f64, tol: f64) -> Result<Option<TailModel>> {
    let Some(&l_top) = series.lambda.last() else { return Ok(None) };
    let k_top = k_of(l_top);
    let k_lo = (1.0 - fraction) * k_top;
    let pts: Vec<(f64, Complex64)> = series.iter().map(|(l, v)| (k_of(l), v)).filter(|(k, _)| *k >= k_lo).collect();
    if pts.len() < 4 {
        return Ok(None);
    }
    let rms = (pts.iter().map(|(_, v)| v.norm_sqr()).sum::<f64>() / pts.len() as f64).sqrt();
    if rms < 1e-9 {
        return Ok(None);
    }
    let (mut sa, mut na, mut sb, mut nb) = (0.0, 0.0, 0.0, 0.0);
    for (k, v) in &pts {
        sa += v.im / k;
        na += 1.0 / (k * k);
        sb += v.re / (k * k);
        nb += 1.0 / k.powi(4);
    }
    let alpha = sa / na;
    let beta = sb / nb;
    let misfit = (pts
        .iter()
        .map(|(k, v)| (v - Complex64::new(beta / (k * k), alpha / k)).norm_sqr())
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let rel = misfit / rms;
    if rel > tol {
        return Err(Error::InsufficientKmax { residual: rel });
    }
    Ok(Some(TailModel { k_top, alpha, beta }))
}

/// Builds the quadrature for F_r on one side.
pub fn reflection_transform(data: &ScatteringData, side: Side, cfg: &GlmConfig) -> Result<ReflectionTransform> {
    let series = data.r(side);
    let c = data.background(side);
    let (lo, hi) = (data.c_low(), data.c_high());
    let a = (hi - lo).sqrt();
    let mut k = Vec::new();
    let mut wr = Vec::new();
    let k_max_band = series.lambda.last().map(|l| (l - c).max(0.0).sqrt()).unwrap_or(0.0);

    if c >= hi || a == 0.0 {
        let (nu, r): (Vec<f64>, Vec<Complex64>) =
            series.iter().filter(|(l, _)| *l > c).map(|(l, v)| ((l - c).sqrt(), v)).unzip();
        add_band(Band { nu, r, lo: 0.0, hi: k_max_band, k_of: Box::new(|p| (p, 1.0)) }, cfg.cell_order, &mut k, &mut wr);
    } else {
        let (nu1, r1): (Vec<f64>, Vec<Complex64>) = series
            .iter()
            .filter(|(l, _)| *l > lo && *l <= hi)
            .map(|(l, v)| (((l - lo).sqrt() / a).min(1.0).asin(), v))
            .unzip();
        add_band(
            Band { nu: nu1, r: r1, lo: 0.0, hi: FRAC_PI_2, k_of: Box::new(move |th: f64| (a * th.sin(), a * th.cos())) },
            cfg.cell_order,
            &mut k,
            &mut wr,
        );
        let (nu2, r2): (Vec<f64>, Vec<Complex64>) =
            series.iter().filter(|(l, _)| *l >= hi).map(|(l, v)| ((l - hi).sqrt(), v)).unzip();
        let p_max = nu2.last().copied().unwrap_or(0.0);
        add_band(
            Band {
                nu: nu2,
                r: r2,
                lo: 0.0,
                hi: p_max,
                k_of: Box::new(move |p: f64| {
                    let kk = (p * p + a * a).sqrt();
                    (kk, p / kk)
                }),
            },
            cfg.cell_order,
            &mut k,
            &mut wr,
        );
    }
    let tail = fit_tail(series, |l| (l - c).max(0.0).sqrt(), cfg.tail_fraction, cfg.tail_tolerance)?;
    Ok(ReflectionTransform { side, k, wr, tail })
}

/// F_r sampled at the given abscissae.
pub fn assemble_reflection_part(data: &ScatteringData, side: Side, x: &[f64], cfg: &GlmConfig) -> Result<Vec<f64>> {
    let t = reflection_transform(data, side, cfg)?;
    Ok(x.par_iter().map(|&xi| t.eval(xi)).collect())
}

/// F_d(x) = Σⱼ γⱼ± e^{∓κⱼ± x}.
pub fn discrete_part_at(data: &ScatteringData, side: Side, x: f64) -> f64 {
    let c = data.background(side);
    let s = side.sign();
    data.eigenvalues
        .iter()
        .map(|e| {
            let g = match side {
                Side::Plus => e.gamma_plus,
                Side::Minus => e.gamma_minus,
            };
            g * (-s * (c - e.lambda).sqrt() * x).exp()
        })
        .sum()
}

pub fn assemble_discrete_part(data: &ScatteringData, side: Side, x: &[f64]) -> Vec<f64> {
    x.iter().map(|&xi| discrete_part_at(data, side, xi)).collect()
}

/// Quadrature form of F_χ on the c̄ side: nodes θ and weights that already
/// include (a/2π)|T∓(θ)|² cos θ.
#[derive(Debug, Clone)]
pub struct ChiTransform {
    side: Side,
    a: f64,
    cos_theta: Vec<f64>,
    weight: Vec<f64>,
}

impl ChiTransform {
    pub fn eval(&self, x: f64) -> f64 {
        let s = self.side.sign();
        self.cos_theta.iter().zip(&self.weight).map(|(c, w)| w * (-s * self.a * c * x).exp()).sum()
    }
}

/// `None` when the side's background is c̲ (the part vanishes there).
pub fn chi_transform(data: &ScatteringData, side: Side, cfg: &GlmConfig) -> Result<Option<ChiTransform>> {
    let (lo, hi) = (data.c_low(), data.c_high());
    if data.background(side) < hi || lo == hi {
        return Ok(None);
    }
    let a = (hi - lo).sqrt();
    let t_low = data.t(side.opposite());
    let mut th = Vec::new();
    let mut t2 = Vec::new();
    for (l, v) in t_low.iter().filter(|(l, _)| *l > lo && *l <= hi) {
        let m = v.norm_sqr();
        if !m.is_finite() {
            return Err(Error::InvalidSigma1T { lambda: l });
        }
        th.push(((l - lo).sqrt() / a).min(1.0).asin());
        t2.push(m);
    }
    if th.len() < 2 {
        return Err(Error::InvalidSigma1T { lambda: lo });
    }
    let spline = CubicSpline::new(th, t2);
    let (z, w) = gauss_legendre(cfg.chi_nodes);
    let mut cos_theta = Vec::with_capacity(z.len());
    let mut weight = Vec::with_capacity(z.len());
    for (zi, wi) in z.iter().zip(&w) {
        let theta = FRAC_PI_2 * 0.5 * (zi + 1.0);
        let m = spline.eval(theta).max(0.0);
        cos_theta.push(theta.cos());
        weight.push(a / (2.0 * PI) * m * theta.cos() * FRAC_PI_2 * 0.5 * wi);
    }
    Ok(Some(ChiTransform { side, a, cos_theta, weight }))
}

pub fn assemble_multiplicity_one_part(data: &ScatteringData, side: Side, x: &[f64], cfg: &GlmConfig) -> Result<Vec<f64>> {
    Ok(match chi_transform(data, side, cfg)? {
        Some(t) => x.iter().map(|&xi| t.eval(xi)).collect(),
        None => vec![0.0; x.len()],
    })
}

/// F± on a uniform grid, with the discrete part kept in closed form for
/// off-grid evaluation.
#[derive(Debug, Clone)]
pub struct GlmKernel {
    pub side: Side,
    pub grid: KernelGrid,
    pub f_r: Vec<f64>,
    pub f_d: Vec<f64>,
    pub f_chi: Vec<f64>,
    pub f_total: Vec<f64>,
    pub f_prime: Vec<f64>,
    /// Bound on |Im F_r| from the conjugation mismatch of upper and lower samples.
    pub imag_residue: f64,
    /// (κⱼ, γⱼ) of the discrete part on this side.
    discrete: Vec<(f64, f64)>,
    /// F_r + F_χ on the grid, interpolated off-grid.
    continuous: Vec<f64>,
}

impl GlmKernel {
    pub fn x(&self) -> Vec<f64> {
        self.grid.points()
    }

    /// F±(t): cubic (four-point Lagrange) interpolation of the continuous
    /// parts plus the exact discrete sum; zero beyond the far end of the grid.
    pub fn eval(&self, t: f64) -> f64 {
        let s = self.side.sign();
        let d: f64 = self.discrete.iter().map(|(k, g)| g * (-s * k * t).exp()).sum();
        d + self.interp_continuous(t)
    }

    fn interp_continuous(&self, t: f64) -> f64 {
        let g = &self.grid;
        let u = (t - g.start) / g.step;
        let n = g.len;
        if u < 0.0 || u > (n - 1) as f64 {
            let far_end = match self.side {
                Side::Plus => u > (n - 1) as f64,
                Side::Minus => u < 0.0,
            };
            if far_end {
                return 0.0;
            }
            let i = if u < 0.0 { 0 } else { n - 1 };
            return self.continuous[i];
        }
        let i = (u.floor() as usize).clamp(1, n - 3);
        let f = u - i as f64;
        let (p0, p1, p2, p3) = (self.continuous[i - 1], self.continuous[i], self.continuous[i + 1], self.continuous[i + 2]);
        // Lagrange weights for nodes −1, 0, 1, 2.
        let w0 = -f * (f - 1.0) * (f - 2.0) / 6.0;
        let w1 = (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0;
        let w2 = -(f + 1.0) * f * (f - 2.0) / 2.0;
        let w3 = (f + 1.0) * f * (f - 1.0) / 6.0;
        w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
    }

    /// F̂±(x) = 2F±(2x).
    pub fn f_hat(&self, x: f64) -> f64 {
        2.0 * self.eval(2.0 * x)
    }

    /// max |F| over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.f_total.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Point beyond which |F| < rel·‖F‖∞ on the grid, toward ±∞.
    pub fn truncation_point(&self, rel: f64) -> f64 {
        let thr = rel * self.sup_norm();
        let n = self.grid.len;
        match self.side {
            Side::Plus => {
                for i in (0..n).rev() {
                    if self.f_total[i].abs() >= thr {
                        return self.grid.x((i + 1).min(n - 1));
                    }
                }
                self.grid.start
            }
            Side::Minus => {
                for i in 0..n {
                    if self.f_total[i].abs() >= thr {
                        return self.grid.x(i.saturating_sub(1));
                    }
                }
                self.grid.end()
            }
        }
    }

    /// CSV with columns x, F_r, F_d, F_chi, F_total.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,F_r,F_d,F_chi,F_total\n");
        for i in 0..self.grid.len {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.grid.x(i),
                self.f_r[i],
                self.f_d[i],
                self.f_chi[i],
                self.f_total[i]
            ));
        }
        out
    }
}

fn imag_residue(data: &ScatteringData, side: Side) -> f64 {
    // (1/2π)∫|R(λ+i0) − conj R(λ−i0)| dk over the lower-side samples bounds |Im F_r|.
    let c = data.background(side);
    let lower = data.lower_r(side);
    let upper = data.r(side);
    let mut prev: Option<(f64, f64)> = None;
    let mut acc = 0.0;
    for (l, v) in lower.iter() {
        let Some(u) = upper.at(l) else { continue };
        let k = (l - c).max(0.0).sqrt();
        let d = (u - v.conj()).norm();
        if let Some((k0, d0)) = prev {
            acc += 0.5 * (k - k0) * (d + d0);
        }
        prev = Some((k, d));
    }
    acc / (2.0 * PI)
}

/// Assembles F± = F_r + F_d + F_χ on the grid, with F̂ and F′ available.
pub fn assemble(data: &ScatteringData, side: Side, grid: KernelGrid, cfg: &GlmConfig) -> Result<GlmKernel> {
    let x = grid.points();
    let (f_r, f_chi) = rayon::join(
        || assemble_reflection_part(data, side, &x, cfg),
        || assemble_multiplicity_one_part(data, side, &x, cfg),
    );
    let (f_r, f_chi) = (f_r?, f_chi?);
    let f_d = assemble_discrete_part(data, side, &x);
    let f_total: Vec<f64> = (0..x.len()).map(|i| f_r[i] + f_d[i] + f_chi[i]).collect();
    let f_prime = derivative_uniform(&f_total, grid.step);
    let c = data.background(side);
    let discrete = data
        .eigenvalues
        .iter()
        .map(|e| {
            let g = match side {
                Side::Plus => e.gamma_plus,
                Side::Minus => e.gamma_minus,
            };
            ((c - e.lambda).sqrt(), g)
        })
        .collect();
    let continuous = (0..x.len()).map(|i| f_r[i] + f_chi[i]).collect();
    Ok(GlmKernel {
        side,
        grid,
        f_r,
        f_d,
        f_chi,
        f_total,
        f_prime,
        imag_residue: imag_residue(data, side),
        discrete,
        continuous,
    })
}
