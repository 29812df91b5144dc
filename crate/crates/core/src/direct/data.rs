use super::{Coefficients, DirectSolver};
use crate::error::{Error, Result};
use crate::potential::Side;
use crate::spectral::CutSide;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

/// Samples of one coefficient, ordered by increasing λ.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientSeries {
    pub lambda: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl CoefficientSeries {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    fn push(&mut self, lambda: f64, v: Complex64) {
        self.lambda.push(lambda);
        self.values.push(v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.lambda.iter().copied().zip(self.values.iter().copied())
    }

    /// Value at an exactly sampled λ.
    pub fn at(&self, lambda: f64) -> Option<Complex64> {
        let i = self.lambda.partition_point(|&l| l < lambda);
        (i < self.lambda.len() && self.lambda[i] == lambda).then(|| self.values[i])
    }

    /// The sub-series with λ in [lo, hi].
    pub fn restricted(&self, lo: f64, hi: f64) -> CoefficientSeries {
        let mut out = CoefficientSeries::default();
        for (l, v) in self.iter() {
            if l >= lo && l <= hi {
                out.push(l, v);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    #[serde(rename = "lambda_j")]
    pub lambda: f64,
    pub gamma_plus: f64,
    pub gamma_minus: f64,
    pub mu: f64,
}

/// Where the continuous spectrum is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    /// Upper end of the momentum band on the c̄ side.
    pub k_max: f64,
    /// Minimum number of nodes on the multiplicity-one band.
    pub sigma1_nodes: usize,
    /// Number of ε-ladder points at each edge, ε = 10⁻²·4⁻ʲ.
    pub ladder_levels: usize,
    /// Every n-th continuous-spectrum sample is repeated on the lower side.
    pub lower_stride: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self { k_max: 40.0, sigma1_nodes: 200, ladder_levels: 10, lower_stride: 16 }
    }
}

/// The scattering data of a potential, sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringData {
    pub c_plus: f64,
    pub c_minus: f64,
    pub eigenvalues: Vec<EigenRecord>,
    pub resonant: bool,
    pub gamma_res: Option<f64>,
    /// Upper-side (λ + i0) samples.
    pub r_plus: CoefficientSeries,
    pub r_minus: CoefficientSeries,
    pub t_plus: CoefficientSeries,
    pub t_minus: CoefficientSeries,
    /// Lower-side (λ − i0) samples on a subset of the grid.
    pub lower_r_plus: CoefficientSeries,
    pub lower_r_minus: CoefficientSeries,
    pub lower_t_plus: CoefficientSeries,
    pub lower_t_minus: CoefficientSeries,
    pub x_inf: f64,
    pub k_max: f64,
}

pub fn edge_ladder(levels: usize) -> Vec<f64> {
    (0..levels).map(|j| 1e-2 * 0.25f64.powi(j as i32)).collect()
}

impl ScatteringData {
    pub fn c_low(&self) -> f64 {
        self.c_plus.min(self.c_minus)
    }

    pub fn c_high(&self) -> f64 {
        self.c_plus.max(self.c_minus)
    }

    pub fn background(&self, side: Side) -> f64 {
        match side {
            Side::Plus => self.c_plus,
            Side::Minus => self.c_minus,
        }
    }

    /// The side whose background is c̲ (plus when the constants coincide).
    pub fn low_side(&self) -> Side {
        if self.c_plus <= self.c_minus {
            Side::Plus
        } else {
            Side::Minus
        }
    }

    pub fn r(&self, side: Side) -> &CoefficientSeries {
        match side {
            Side::Plus => &self.r_plus,
            Side::Minus => &self.r_minus,
        }
    }

    pub fn t(&self, side: Side) -> &CoefficientSeries {
        match side {
            Side::Plus => &self.t_plus,
            Side::Minus => &self.t_minus,
        }
    }

    pub fn r_mut(&mut self, side: Side) -> &mut CoefficientSeries {
        match side {
            Side::Plus => &mut self.r_plus,
            Side::Minus => &mut self.r_minus,
        }
    }

    pub fn lower_r(&self, side: Side) -> &CoefficientSeries {
        match side {
            Side::Plus => &self.lower_r_plus,
            Side::Minus => &self.lower_r_minus,
        }
    }

    pub fn lower_t(&self, side: Side) -> &CoefficientSeries {
        match side {
            Side::Plus => &self.lower_t_plus,
            Side::Minus => &self.lower_t_minus,
        }
    }

    /// Momentum k± ≥ 0 for real λ ≥ c± on the upper side.
    pub fn k_of(&self, side: Side, lambda: f64) -> f64 {
        (lambda - self.background(side)).max(0.0).sqrt()
    }

    pub fn lambda_grid_sigma2(&self) -> Vec<f64> {
        let hi = self.c_high();
        self.t_plus.lambda.iter().copied().filter(|l| *l >= hi).collect()
    }

    pub fn lambda_grid_sigma1(&self) -> Vec<f64> {
        let (lo, hi) = (self.c_low(), self.c_high());
        self.t(self.low_side()).lambda.iter().copied().filter(|l| *l >= lo && *l < hi).collect()
    }
}

impl<'a> DirectSolver<'a> {
    /// Full scattering data: discrete spectrum, resonance status and sampled
    /// coefficients on both parts of the continuous spectrum.
    pub fn scattering_data(&self, sampling: &SamplingConfig) -> Result<ScatteringData> {
        if !(sampling.k_max > 0.0) || sampling.sigma1_nodes == 0 || sampling.lower_stride == 0 {
            return Err(Error::InvalidInput("sampling parameters must be positive".into()));
        }
        let pot = self.potential;
        let floor = self.default_lambda_floor();
        let eigen = self.find_bound_states(floor)?;
        let eigenvalues = eigen
            .iter()
            .map(|&l| {
                let n = self.compute_norming_constants(l)?;
                Ok(EigenRecord { lambda: l, gamma_plus: n.gamma_plus, gamma_minus: n.gamma_minus, mu: n.mu })
            })
            .collect::<Result<Vec<_>>>()?;
        let res = self.classify_resonance()?;

        let (lo, hi) = (pot.c_low(), pot.c_high());
        let a = (hi - lo).sqrt();
        let dp = std::f64::consts::PI / (8.0 * self.cfg.x_inf);
        let ladder = edge_ladder(sampling.ladder_levels);

        let mut sigma2: Vec<f64> = Vec::new();
        let n2 = (sampling.k_max / dp).ceil() as usize;
        for j in 1..=n2 {
            let p = j as f64 * dp;
            sigma2.push(hi + p * p);
        }
        sigma2.extend(ladder.iter().map(|e| hi + e));
        let mut sigma1: Vec<f64> = Vec::new();
        if a > 0.0 {
            let n1 = sampling.sigma1_nodes.max((a * FRAC_PI_2 / dp).ceil() as usize);
            for j in 1..=n1 {
                let th = FRAC_PI_2 * j as f64 / n1 as f64;
                let s = a * th.sin();
                sigma1.push(if j == n1 { hi } else { lo + s * s });
            }
            sigma1.extend(ladder.iter().filter(|e| **e < a * a).map(|e| lo + e));
        }
        let mut all: Vec<f64> = sigma1.iter().chain(&sigma2).copied().collect();
        all.sort_by(f64::total_cmp);
        all.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * (1.0 + y.abs()));

        let upper: Vec<Coefficients> =
            all.par_iter().map(|&l| self.compute_coefficients(&self.lift(l, CutSide::Upper))).collect::<Result<_>>()?;
        let lower_lambdas: Vec<f64> = all.iter().copied().step_by(sampling.lower_stride).collect();
        let lower: Vec<Coefficients> = lower_lambdas
            .par_iter()
            .map(|&l| self.compute_coefficients(&self.lift(l, CutSide::Lower)))
            .collect::<Result<_>>()?;

        let mut out = ScatteringData {
            c_plus: pot.c_plus,
            c_minus: pot.c_minus,
            eigenvalues,
            resonant: res.resonant,
            gamma_res: res.gamma,
            r_plus: Default::default(),
            r_minus: Default::default(),
            t_plus: Default::default(),
            t_minus: Default::default(),
            lower_r_plus: Default::default(),
            lower_r_minus: Default::default(),
            lower_t_plus: Default::default(),
            lower_t_minus: Default::default(),
            x_inf: self.cfg.x_inf,
            k_max: sampling.k_max,
        };
        let emit = |c: &Coefficients, r_p: &mut CoefficientSeries, r_m: &mut CoefficientSeries, t_p: &mut CoefficientSeries, t_m: &mut CoefficientSeries| {
            let l = c.point.lambda.re;
            // On the multiplicity-one band only the coefficients with real momentum are kept.
            let keep_plus = l >= pot.c_plus;
            let keep_minus = l >= pot.c_minus;
            if let Some(r) = c.r_plus {
                r_p.push(l, r);
            }
            if let Some(r) = c.r_minus {
                r_m.push(l, r);
            }
            if keep_plus {
                t_p.push(l, c.t_plus);
            }
            if keep_minus {
                t_m.push(l, c.t_minus);
            }
        };
        for c in &upper {
            emit(c, &mut out.r_plus, &mut out.r_minus, &mut out.t_plus, &mut out.t_minus);
        }
        for c in &lower {
            emit(c, &mut out.lower_r_plus, &mut out.lower_r_minus, &mut out.lower_t_plus, &mut out.lower_t_minus);
        }
        Ok(out)
    }
}

// ─── JSON form ───────────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct Sample {
    lambda: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize, Default)]
struct LowerJson {
    #[serde(rename = "R_plus", default)]
    r_plus: Vec<Sample>,
    #[serde(rename = "R_minus", default)]
    r_minus: Vec<Sample>,
    #[serde(rename = "T_plus", default)]
    t_plus: Vec<Sample>,
    #[serde(rename = "T_minus", default)]
    t_minus: Vec<Sample>,
}

#[derive(Serialize, Deserialize)]
struct ScatteringJson {
    c_plus: f64,
    c_minus: f64,
    resonant: bool,
    gamma_res: Option<f64>,
    eigenvalues: Vec<EigenRecord>,
    #[serde(rename = "R_plus")]
    r_plus: Vec<Sample>,
    #[serde(rename = "R_minus")]
    r_minus: Vec<Sample>,
    #[serde(rename = "T_plus")]
    t_plus: Vec<Sample>,
    #[serde(rename = "T_minus")]
    t_minus: Vec<Sample>,
    #[serde(default)]
    lower: LowerJson,
    x_inf: f64,
    k_max: f64,
}

fn to_samples(s: &CoefficientSeries) -> Vec<Sample> {
    s.iter().map(|(lambda, v)| Sample { lambda, re: v.re, im: v.im }).collect()
}

fn from_samples(v: Vec<Sample>, name: &str) -> Result<CoefficientSeries> {
    let mut s = CoefficientSeries::default();
    for smp in v {
        if !(smp.lambda.is_finite() && smp.re.is_finite() && smp.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite sample in {name}")));
        }
        if let Some(&last) = s.lambda.last() {
            if !(smp.lambda > last) {
                return Err(Error::InvalidInput(format!("{name} samples must be strictly increasing in lambda")));
            }
        }
        s.push(smp.lambda, Complex64::new(smp.re, smp.im));
    }
    Ok(s)
}

impl ScatteringData {
    pub fn to_json(&self) -> Result<String> {
        let j = ScatteringJson {
            c_plus: self.c_plus,
            c_minus: self.c_minus,
            resonant: self.resonant,
            gamma_res: self.gamma_res,
            eigenvalues: self.eigenvalues.clone(),
            r_plus: to_samples(&self.r_plus),
            r_minus: to_samples(&self.r_minus),
            t_plus: to_samples(&self.t_plus),
            t_minus: to_samples(&self.t_minus),
            lower: LowerJson {
                r_plus: to_samples(&self.lower_r_plus),
                r_minus: to_samples(&self.lower_r_minus),
                t_plus: to_samples(&self.lower_t_plus),
                t_minus: to_samples(&self.lower_t_minus),
            },
            x_inf: self.x_inf,
            k_max: self.k_max,
        };
        Ok(serde_json::to_string_pretty(&j)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: ScatteringJson = serde_json::from_str(text)?;
        let mut eig = j.eigenvalues;
        eig.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        Ok(Self {
            c_plus: j.c_plus,
            c_minus: j.c_minus,
            eigenvalues: eig,
            resonant: j.resonant,
            gamma_res: j.gamma_res,
            r_plus: from_samples(j.r_plus, "R_plus")?,
            r_minus: from_samples(j.r_minus, "R_minus")?,
            t_plus: from_samples(j.t_plus, "T_plus")?,
            t_minus: from_samples(j.t_minus, "T_minus")?,
            lower_r_plus: from_samples(j.lower.r_plus, "lower R_plus")?,
            lower_r_minus: from_samples(j.lower.r_minus, "lower R_minus")?,
            lower_t_plus: from_samples(j.lower.t_plus, "lower T_plus")?,
            lower_t_minus: from_samples(j.lower.t_minus, "lower T_minus")?,
            x_inf: j.x_inf,
            k_max: j.k_max,
        })
    }
}
