//! Steplike potentials: q(x) → c± as x → ±∞.

mod expr;
mod moments;

pub use expr::Expression;
pub use moments::{compute_moments, MomentDiagnostics};

/// The working grid used for diagnostics: spacing 0.01 on [−X, X] plus breakpoints.
pub(crate) fn moments_grid(potential: &Potential, x_inf: f64) -> Vec<f64> {
    moments::working_grid(potential, x_inf, 0.01)
}

use crate::error::{Error, Result};
use crate::numerics::spline::CubicSpline;
use crate::numerics::taylor::Jet;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which half-line / background constant a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    /// +1 for the right half-line, −1 for the left.
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone)]
pub enum PotentialKind {
    Free,
    /// `c₋` left of `jump_at`, `c₊` from `jump_at` on.
    Step { jump_at: f64 },
    /// `c − 2κ² sech²(κ(x − center))` on a constant background.
    Sech2 { kappa: f64, center: f64 },
    /// Reflectionless potential `c − 2 (ln det(I + A))''` with
    /// `A_ij = √(γᵢγⱼ) e^{−(κᵢ+κⱼ)x}/(κᵢ+κⱼ)`; the γ are right-side norming constants.
    Bargmann { kappas: Vec<f64>, gammas: Vec<f64> },
    /// User expression in `x`; breakpoints mark points of non-smoothness.
    Expression { expr: Expression, breakpoints: Vec<f64> },
    /// Natural cubic spline through samples, equal to c± outside the grid.
    Sampled { spline: CubicSpline },
}

#[derive(Debug, Clone)]
pub struct Potential {
    pub c_plus: f64,
    pub c_minus: f64,
    pub kind: PotentialKind,
    /// Declared smoothness n.
    pub smoothness: usize,
    /// Declared number of finite moments m.
    pub moments: usize,
    mirrored: bool,
}

impl Potential {
    fn build(c_plus: f64, c_minus: f64, kind: PotentialKind, smoothness: usize, moments: usize) -> Result<Self> {
        if !c_plus.is_finite() || !c_minus.is_finite() {
            return Err(Error::InvalidInput("background constants must be finite".into()));
        }
        if moments < 1 {
            return Err(Error::InvalidInput("moment count m must be at least 1".into()));
        }
        Ok(Self { c_plus, c_minus, kind, smoothness, moments, mirrored: false })
    }

    pub fn free(c: f64) -> Self {
        Self::build(c, c, PotentialKind::Free, 16, 8).expect("finite constant")
    }

    pub fn step(c_minus: f64, c_plus: f64, jump_at: f64) -> Self {
        Self::build(c_plus, c_minus, PotentialKind::Step { jump_at }, 0, 8).expect("finite constants")
    }

    /// The one-soliton well `c − 2κ² sech²(κ(x − center))`.
    pub fn sech2(c: f64, kappa: f64, center: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidInput("sech2 kappa must be positive".into()));
        }
        Self::build(c, c, PotentialKind::Sech2 { kappa, center }, 16, 8)
    }

    pub fn bargmann(c: f64, kappas: Vec<f64>, gammas: Vec<f64>) -> Result<Self> {
        if kappas.is_empty() || kappas.len() != gammas.len() {
            return Err(Error::InvalidInput("bargmann needs matching, nonempty kappas and gammas".into()));
        }
        if kappas.iter().any(|k| !(*k > 0.0)) || gammas.iter().any(|g| !(*g > 0.0)) {
            return Err(Error::InvalidInput("bargmann kappas and gammas must be positive".into()));
        }
        let mut sorted = kappas.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("bargmann kappas must be distinct".into()));
        }
        Self::build(c, c, PotentialKind::Bargmann { kappas, gammas }, 16, 8)
    }

    pub fn expression(
        c_minus: f64,
        c_plus: f64,
        source: &str,
        breakpoints: Vec<f64>,
        smoothness: usize,
        moments: usize,
    ) -> Result<Self> {
        let expr = Expression::parse(source)?;
        let mut bp = breakpoints;
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        Self::build(c_plus, c_minus, PotentialKind::Expression { expr, breakpoints: bp }, smoothness, moments)
    }

    pub fn sampled(c_minus: f64, c_plus: f64, x: Vec<f64>, q: Vec<f64>, smoothness: usize, moments: usize) -> Result<Self> {
        if x.len() < 2 || x.len() != q.len() {
            return Err(Error::InvalidInput("sampled potential needs at least two (x, q) pairs".into()));
        }
        if x.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidInput("sampled abscissae must be strictly increasing".into()));
        }
        if x.iter().chain(&q).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled values must be finite".into()));
        }
        let spline = CubicSpline::new(x, q);
        Self::build(c_plus, c_minus, PotentialKind::Sampled { spline }, smoothness.min(3), moments)
    }

    /// Overrides the declared class indices.
    pub fn with_class(mut self, smoothness: usize, moments: usize) -> Result<Self> {
        if moments < 1 {
            return Err(Error::InvalidInput("moment count m must be at least 1".into()));
        }
        if matches!(self.kind, PotentialKind::Step { .. }) && smoothness > 0 {
            return Err(Error::InvalidInput("the step potential admits smoothness n = 0 only".into()));
        }
        self.smoothness = smoothness;
        self.moments = moments;
        Ok(self)
    }

    /// The potential reflected through the origin, q(−x), with c± swapped.
    pub fn mirrored(&self) -> Self {
        let mut p = self.clone();
        p.mirrored = !self.mirrored;
        std::mem::swap(&mut p.c_plus, &mut p.c_minus);
        p
    }

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

    /// Background constants in the unmirrored frame, as (left, right).
    fn raw_backgrounds(&self) -> (f64, f64) {
        if self.mirrored {
            (self.c_plus, self.c_minus)
        } else {
            (self.c_minus, self.c_plus)
        }
    }

    /// Largest derivative order that can be evaluated.
    pub fn max_derivative_order(&self) -> Option<usize> {
        match self.kind {
            PotentialKind::Sampled { .. } => Some(3),
            _ => None,
        }
    }

    /// Points where q or one of its derivatives may jump, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let raw = match &self.kind {
            PotentialKind::Step { jump_at } => vec![*jump_at],
            PotentialKind::Expression { breakpoints, .. } => breakpoints.clone(),
            PotentialKind::Sampled { spline } => {
                let k = spline.knots();
                vec![k[0], k[k.len() - 1]]
            }
            _ => Vec::new(),
        };
        let mut out: Vec<f64> = if self.mirrored { raw.into_iter().map(|v| -v).collect() } else { raw };
        out.sort_by(f64::total_cmp);
        out
    }

    /// Interior points where q itself may jump (steps and declared
    /// breakpoints of expressions).
    pub fn jump_points(&self) -> Vec<f64> {
        match self.kind {
            PotentialKind::Sampled { .. } => Vec::new(),
            _ => self.breakpoints(),
        }
    }

    /// True when every derivative is available in closed form and smooth
    /// everywhere (no breakpoints).
    pub fn is_smooth_closed_form(&self) -> bool {
        self.max_derivative_order().is_none() && self.breakpoints().is_empty()
    }

    /// q(x), the fast value-only path.
    pub fn value(&self, x: f64) -> f64 {
        let t = if self.mirrored { -x } else { x };
        let (cl, cr) = self.raw_backgrounds();
        match &self.kind {
            PotentialKind::Free => cr,
            PotentialKind::Step { jump_at } => {
                if t >= *jump_at {
                    cr
                } else {
                    cl
                }
            }
            PotentialKind::Sech2 { kappa, center } => {
                let a = (kappa * (t - center)).abs();
                let s = 2.0 * (-a).exp() / (1.0 + (-2.0 * a).exp());
                cr - 2.0 * kappa * kappa * s * s
            }
            PotentialKind::Bargmann { kappas, gammas } => bargmann_value(kappas, gammas, t) + cr,
            PotentialKind::Expression { expr, .. } => expr.eval(t),
            PotentialKind::Sampled { spline } => {
                let k = spline.knots();
                if t < k[0] {
                    cl
                } else if t > k[k.len() - 1] {
                    cr
                } else {
                    spline.eval(t)
                }
            }
        }
    }

    /// q(x) − c± for the given side.
    pub fn shifted(&self, side: Side, x: f64) -> f64 {
        self.value(x) - self.background(side)
    }

    /// q⁽ʲ⁾(x).
    pub fn evaluate(&self, x: f64, order: usize) -> Result<f64> {
        Ok(self.derivatives(x, order)?[order])
    }

    /// [q(x), q'(x), …, q⁽ᵒʳᵈᵉʳ⁾(x)].
    pub fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if let Some(max) = self.max_derivative_order() {
            if order > max {
                return Err(Error::InsufficientSmoothness { requested: order, available: max });
            }
        }
        let t = if self.mirrored { -x } else { x };
        let (cl, cr) = self.raw_backgrounds();
        let mut d = match &self.kind {
            PotentialKind::Free => {
                let mut v = vec![0.0; order + 1];
                v[0] = cr;
                v
            }
            PotentialKind::Step { .. } => {
                let mut v = vec![0.0; order + 1];
                v[0] = self.value(x);
                v
            }
            PotentialKind::Sech2 { kappa, center } => {
                let z = Jet::variable(t, order).scale(*kappa).sub(&Jet::constant(kappa * center, order));
                let s = z.sech();
                let q = s.mul(&s).scale(-2.0 * kappa * kappa);
                let mut v = q.derivatives();
                v[0] += cr;
                v
            }
            PotentialKind::Bargmann { .. } => {
                let mut v = self.bargmann_jet(t, order).derivatives();
                v[0] += cr;
                v
            }
            PotentialKind::Expression { expr, .. } => expr.eval_jet(t, order).derivatives(),
            PotentialKind::Sampled { spline } => {
                let k = spline.knots();
                let mut v = vec![0.0; order + 1];
                if t < k[0] {
                    v[0] = cl;
                } else if t > k[k.len() - 1] {
                    v[0] = cr;
                } else {
                    for (j, slot) in v.iter_mut().enumerate() {
                        *slot = spline.derivative(t, j);
                    }
                }
                v
            }
        };
        if self.mirrored {
            for (j, v) in d.iter_mut().enumerate() {
                if j % 2 == 1 {
                    *v = -*v;
                }
            }
        }
        Ok(d)
    }

    /// Jet of `−2 (ln det(I + A))''` (background not included) to the given order.
    fn bargmann_jet(&self, x: f64, order: usize) -> Jet {
        let PotentialKind::Bargmann { kappas, gammas } = &self.kind else {
            unreachable!("bargmann_jet on non-Bargmann potential")
        };
        let n = kappas.len();
        let jo = order + 2;
        let xv = Jet::variable(x, jo);
        let mut a: Vec<Vec<Jet>> = vec![vec![Jet::constant(0.0, jo); n]; n];
        for i in 0..n {
            for j in 0..n {
                let s = kappas[i] + kappas[j];
                let e = xv.scale(-s).exp().scale((gammas[i] * gammas[j]).sqrt() / s);
                a[i][j] = if i == j { e.add(&Jet::constant(1.0, jo)) } else { e };
            }
        }
        // ln det by Gaussian elimination; I + A is positive definite so no pivoting.
        let mut logdet = Jet::constant(0.0, jo);
        for k in 0..n {
            let piv = a[k][k].clone();
            logdet = logdet.add(&piv.ln());
            for i in k + 1..n {
                let f = a[i][k].div(&piv);
                for j in k..n {
                    let t = f.mul(&a[k][j]);
                    a[i][j] = a[i][j].sub(&t);
                }
            }
        }
        // Shift the coefficients down by two orders: (ln det)'' as a jet of `order`.
        let mut c = vec![0.0; order + 1];
        for (k, slot) in c.iter_mut().enumerate() {
            *slot = -2.0 * logdet.c[k + 2] * ((k + 1) * (k + 2)) as f64;
        }
        Jet { c }
    }
}

/// `−2 (ln det M)''` with `M = I + A`, from
/// `(ln det M)'' = tr(M⁻¹M'') − tr((M⁻¹M')²)`.
fn bargmann_value(kappas: &[f64], gammas: &[f64], x: f64) -> f64 {
    const N: usize = 8;
    let n = kappas.len();
    if n > N {
        return bargmann_value_dense(kappas, gammas, x);
    }
    let mut m = [[0.0; N]; N];
    let mut a = [[0.0; N]; N];
    let mut e = [0.0; N];
    for i in 0..n {
        e[i] = (-kappas[i] * x).exp() * gammas[i].sqrt();
    }
    for i in 0..n {
        for j in 0..n {
            a[i][j] = e[i] * e[j] / (kappas[i] + kappas[j]);
            m[i][j] = a[i][j] + if i == j { 1.0 } else { 0.0 };
        }
    }
    // Gauss–Jordan inverse; M is symmetric positive definite.
    let mut inv = [[0.0; N]; N];
    for (i, row) in inv.iter_mut().enumerate().take(n) {
        row[i] = 1.0;
    }
    for k in 0..n {
        let piv = m[k][k];
        for j in 0..n {
            m[k][j] /= piv;
            inv[k][j] /= piv;
        }
        for i in 0..n {
            if i != k {
                let f = m[i][k];
                for j in 0..n {
                    m[i][j] -= f * m[k][j];
                    inv[i][j] -= f * inv[k][j];
                }
            }
        }
    }
    let s = |i: usize, j: usize| kappas[i] + kappas[j];
    // P = M⁻¹M′ with M′ = −s∘A; tr(M⁻¹M″) with M″ = s²∘A.
    let mut p = [[0.0; N]; N];
    let mut t2 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut v = 0.0;
            for k in 0..n {
                v -= inv[i][k] * s(k, j) * a[k][j];
            }
            p[i][j] = v;
        }
        for k in 0..n {
            t2 += inv[i][k] * s(k, i) * s(k, i) * a[k][i];
        }
    }
    let mut pp = 0.0;
    for i in 0..n {
        for k in 0..n {
            pp += p[i][k] * p[k][i];
        }
    }
    -2.0 * (t2 - pp)
}

fn bargmann_value_dense(kappas: &[f64], gammas: &[f64], x: f64) -> f64 {
    let n = kappas.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        let s = kappas[i] + kappas[j];
        (-s * x).exp() * (gammas[i] * gammas[j]).sqrt() / s
    });
    let s = DMatrix::from_fn(n, n, |i, j| kappas[i] + kappas[j]);
    let m = DMatrix::identity(n, n) + &a;
    let d1 = -s.component_mul(&a);
    let d2 = s.component_mul(&s).component_mul(&a);
    let lu = m.lu();
    let p = lu.solve(&d1).expect("I + A is positive definite");
    let r = lu.solve(&d2).expect("I + A is positive definite");
    -2.0 * (r.trace() - (&p * &p).trace())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_soliton_value_and_jet_agree() {
        let p = Potential::bargmann(0.0, vec![1.0, 2.0], vec![6.0, 12.0]).unwrap();
        for &x in &[-7.0f64, -1.3, 0.0, 0.4, 5.0] {
            let exact = -6.0 / x.cosh().powi(2);
            assert!((p.value(x) - exact).abs() < 1e-12, "x={x}");
            assert!((p.derivatives(x, 0).unwrap()[0] - exact).abs() < 1e-12, "x={x}");
        }
        let kappas: Vec<f64> = (1..=9).map(f64::from).collect();
        let gammas: Vec<f64> = kappas.iter().map(|k| 2.0 * k).collect();
        let q = Potential::bargmann(0.0, kappas[..8].to_vec(), gammas[..8].to_vec()).unwrap();
        let x = 0.37;
        assert!((q.value(x) - bargmann_value_dense(&kappas[..8], &gammas[..8], x)).abs() < 1e-9);
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(Potential::free(0.0).evaluate(3.7, 0).unwrap(), 0.0);
        let sol = Potential::sech2(0.0, 1.0, 0.0).unwrap();
        assert!((sol.evaluate(0.0, 0).unwrap() + 2.0).abs() < 1e-15);
        let step = Potential::step(0.0, 1.0, 0.0);
        assert_eq!(step.value(-0.5), 0.0);
        assert_eq!(step.value(0.5), 1.0);
    }

    #[test]
    fn one_term_bargmann_is_a_translated_soliton() {
        // γ = 2κ e^{2κa} places the soliton at a.
        let (kappa, a) = (1.3, 0.4);
        let b = Potential::bargmann(0.5, vec![kappa], vec![2.0 * kappa * (2.0 * kappa * a).exp()]).unwrap();
        let s = Potential::sech2(0.5, kappa, a).unwrap();
        for &x in &[-2.0, -0.3, 0.0, 0.4, 1.7] {
            let db = b.derivatives(x, 3).unwrap();
            let ds = s.derivatives(x, 3).unwrap();
            for j in 0..=3 {
                assert!((db[j] - ds[j]).abs() < 1e-11 * (1.0 + ds[j].abs()), "x={x} j={j}");
            }
        }
    }

    #[test]
    fn sampled_clamps_and_limits_order() {
        let x: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
        let q: Vec<f64> = x.iter().map(|v| -(-v * v).exp()).collect();
        let p = Potential::sampled(0.0, 0.0, x, q, 2, 1).unwrap();
        assert_eq!(p.value(-5.0), 0.0);
        assert!((p.value(0.05) + (-0.0025f64).exp()).abs() < 1e-4);
        assert!(matches!(p.evaluate(0.0, 4), Err(Error::InsufficientSmoothness { .. })));
        assert!(Potential::sampled(0.0, 0.0, vec![0.0, 0.0], vec![1.0, 1.0], 2, 1).is_err());
    }

    #[test]
    fn mirrored_potential_swaps_backgrounds() {
        let p = Potential::expression(0.0, 1.0, "0.5*(1 + tanh(x)) - exp(-(x-1)^2)", vec![], 4, 2).unwrap();
        let m = p.mirrored();
        assert_eq!(m.c_plus, 0.0);
        assert_eq!(m.c_minus, 1.0);
        assert!((m.value(0.7) - p.value(-0.7)).abs() < 1e-15);
        let dp = p.derivatives(-0.7, 2).unwrap();
        let dm = m.derivatives(0.7, 2).unwrap();
        assert!((dm[1] + dp[1]).abs() < 1e-14);
        assert!((dm[2] - dp[2]).abs() < 1e-14);
    }

    #[test]
    fn step_rejects_positive_smoothness() {
        assert!(Potential::step(0.0, 1.0, 0.0).with_class(1, 1).is_err());
        assert!(Potential::free(0.0).with_class(2, 0).is_err());
    }
}
