//! Numerical screen of scattering data against the characterization
//! conditions I–IV and the Marchenko edge conditions.

use crate::direct::{fit_edge_gamma, CoefficientSeries, ScatteringData};
use crate::glm::GlmKernel;
use crate::numerics::fit::linear_fit;
use crate::potential::Side;
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    InsufficientSampling,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::InsufficientSampling => "INSUFFICIENT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionRecord {
    pub id: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub notes: String,
}

impl ConditionRecord {
    fn new(id: &'static str, residual: f64, tolerance: f64, notes: impl Into<String>) -> Self {
        let residual = if residual.is_nan() { f64::INFINITY } else { residual.max(0.0) };
        let verdict = if residual <= tolerance { Verdict::Pass } else { Verdict::Fail };
        Self { id, residual, tolerance, verdict, notes: notes.into() }
    }

    fn insufficient(id: &'static str, tolerance: f64, notes: impl Into<String>) -> Self {
        Self { id, residual: 0.0, tolerance, verdict: Verdict::InsufficientSampling, notes: notes.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub records: Vec<ConditionRecord>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.verdict == Verdict::Pass)
    }

    pub fn get(&self, id: &str) -> Option<&ConditionRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.records.iter().filter(|r| r.verdict != Verdict::Pass).map(|r| r.id).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<5} {:>12} {:>10}  {:<12} {}\n", "id", "residual", "tol", "verdict", "notes");
        for r in &self.records {
            out.push_str(&format!(
                "{:<5} {:>12.3e} {:>10.1e}  {:<12} {}\n",
                r.id, r.residual, r.tolerance, r.verdict, r.notes
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckerTolerances {
    pub identity: f64,
    pub asymptotic: f64,
    pub window: f64,
}

impl Default for CheckerTolerances {
    fn default() -> Self {
        Self { identity: 1e-6, asymptotic: 1e-2, window: 1e-2 }
    }
}

fn sides() -> [Side; 2] {
    [Side::Plus, Side::Minus]
}

/// Upper/lower pairs at common λ.
fn conjugation_residual(upper: &CoefficientSeries, lower: &CoefficientSeries) -> (f64, usize) {
    let mut worst = 0.0f64;
    let mut n = 0;
    for (l, v) in lower.iter() {
        if let Some(u) = upper.at(l) {
            worst = worst.max((u - v.conj()).norm());
            n += 1;
        }
    }
    (worst, n)
}

pub fn check_ia(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let mut worst = 0.0f64;
    let mut n = 0;
    for s in sides() {
        for (u, l) in [(d.r(s), d.lower_r(s)), (d.t(s), d.lower_t(s))] {
            let (w, m) = conjugation_residual(u, l);
            worst = worst.max(w);
            n += m;
        }
    }
    if n == 0 {
        return ConditionRecord::insufficient("Ia", tol, "no lower-side samples");
    }
    ConditionRecord::new("Ia", worst, tol, format!("{n} conjugate pairs"))
}

pub fn check_ib(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let (lo, hi) = (d.c_low(), d.c_high());
    if lo == hi {
        return ConditionRecord::new("Ib", 0.0, tol, "no multiplicity-one band");
    }
    let s = d.low_side();
    let mut worst = 0.0f64;
    let mut n = 0;
    for (l, t) in d.t(s).iter().filter(|(l, _)| *l > lo && *l < hi) {
        let Some(r) = d.r(s).at(l) else { continue };
        worst = worst.max((t / t.conj() - r).norm());
        n += 1;
    }
    if n == 0 {
        return ConditionRecord::insufficient("Ib", tol, "no samples on the multiplicity-one band");
    }
    ConditionRecord::new("Ib", worst, tol, format!("T/conj(T) = R on {n} points"))
}

/// Samples on Σ⁽²⁾ with all four coefficients.
fn sigma2_samples(d: &ScatteringData) -> Vec<(f64, Complex64, Complex64, Complex64, Complex64)> {
    let hi = d.c_high();
    d.t_plus
        .iter()
        .filter(|(l, _)| *l > hi)
        .filter_map(|(l, tp)| Some((l, d.r_plus.at(l)?, d.r_minus.at(l)?, tp, d.t_minus.at(l)?)))
        .collect()
}

pub fn check_ic(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let mut worst = 0.0f64;
    let pts = sigma2_samples(d);
    for &(l, rp, rm, tp, tm) in &pts {
        let (kp, km) = (d.k_of(Side::Plus, l), d.k_of(Side::Minus, l));
        worst = worst.max((1.0 - rp.norm_sqr() - km / kp * tp.norm_sqr()).abs());
        worst = worst.max((1.0 - rm.norm_sqr() - kp / km * tm.norm_sqr()).abs());
    }
    if pts.is_empty() {
        return ConditionRecord::insufficient("Ic", tol, "no samples above c̄");
    }
    ConditionRecord::new("Ic", worst, tol, "1 − |R|² − (k∓/k±)|T|²")
}

pub fn check_id(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let mut worst = 0.0f64;
    let pts = sigma2_samples(d);
    for &(_, rp, rm, tp, tm) in &pts {
        worst = worst.max((rp.conj() * tp + rm * tp.conj()).norm());
        worst = worst.max((rm.conj() * tm + rp * tm.conj()).norm());
    }
    if pts.is_empty() {
        return ConditionRecord::insufficient("Id", tol, "no samples above c̄");
    }
    ConditionRecord::new("Id", worst, tol, "conj(R±)T± + R∓conj(T±)")
}

/// Log–log slope of max(|R|, |T − 1|) over the top decade of Σ⁽²⁾; the
/// residual is by how much it exceeds −1/2.
pub fn check_ie(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let pts = sigma2_samples(d);
    let Some(top) = pts.last().map(|p| p.0 - d.c_high()) else {
        return ConditionRecord::insufficient("Ie", tol, "no samples above c̄");
    };
    let floor = 1e-8;
    let mut worst_slope = f64::NEG_INFINITY;
    let mut notes = Vec::new();
    for (name, pick) in [
        ("plus", Box::new(|p: &(f64, Complex64, Complex64, Complex64, Complex64)| p.1.norm().max((p.3 - 1.0).norm()))
            as Box<dyn Fn(&(f64, Complex64, Complex64, Complex64, Complex64)) -> f64>),
        ("minus", Box::new(|p: &(f64, Complex64, Complex64, Complex64, Complex64)| p.2.norm().max((p.4 - 1.0).norm()))),
    ] {
        let sel: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| p.0 - d.c_high() >= 0.01 * top)
            .map(|p| (p.0.ln(), pick(p)))
            .filter(|(_, v)| *v > floor)
            .map(|(x, v)| (x, v.ln()))
            .collect();
        if sel.len() < 5 {
            notes.push(format!("{name}: below noise floor"));
            continue;
        }
        let (x, y): (Vec<f64>, Vec<f64>) = sel.into_iter().unzip();
        let (slope, _) = linear_fit(&x, &y);
        notes.push(format!("{name}: slope {slope:.3}"));
        worst_slope = worst_slope.max(slope);
    }
    let residual = if worst_slope.is_finite() { worst_slope + 0.5 } else { 0.0 };
    ConditionRecord::new("Ie", residual, tol, notes.join("; "))
}

pub fn check_iia(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let mut worst = 0.0f64;
    for (l, tp) in d.t_plus.iter().filter(|(l, _)| *l > d.c_high()) {
        let Some(tm) = d.t_minus.at(l) else { continue };
        let (kp, km) = (d.k_of(Side::Plus, l), d.k_of(Side::Minus, l));
        let (wp, wm) = (kp / tp, km / tm);
        worst = worst.max((wp - wm).norm() / wp.norm().max(wm.norm()));
    }
    let mut notes = vec!["2ik₊/T₊ = 2ik₋/T₋".to_string()];
    for (j, e) in d.eigenvalues.iter().enumerate() {
        if !(e.gamma_plus > 0.0 && e.gamma_minus > 0.0) {
            worst = worst.max(1.0);
            notes.push(format!("invalid norming constant sign at λ{}", j + 1));
            continue;
        }
        // Residues of T± are iμ^{±1}γ± and coincide with i/W′, so γ₋ = μ²γ₊.
        let rel = (e.gamma_minus - e.mu * e.mu * e.gamma_plus).abs() / e.gamma_minus;
        if rel > tol {
            notes.push(format!("residue mismatch at λ{}", j + 1));
        }
        worst = worst.max(rel);
    }
    ConditionRecord::new("IIa", worst, tol, notes.join("; "))
}

/// Samples with 0 < λ − c ≤ 10⁻² as (λ − c, value), finest first.
fn edge_samples(series: &CoefficientSeries, c: f64) -> Vec<(f64, Complex64)> {
    series.iter().filter(|(l, _)| *l - c > 0.0 && *l - c <= 1e-2 + 1e-15).map(|(l, v)| (l - c, v)).collect()
}

/// W on the c̲ edge ladder, from the low-side transmission coefficient.
fn edge_wronskian(d: &ScatteringData) -> Vec<(f64, Complex64)> {
    let s = d.low_side();
    let lo = d.c_low();
    let t = d.t(s);
    edge_samples(t, lo)
        .into_iter()
        .map(|(e, v)| {
            let k = e.sqrt();
            (k, Complex64::new(0.0, 2.0 * k) / v)
        })
        .collect()
}

pub fn check_iib(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let w = edge_wronskian(d);
    if w.len() < 4 {
        return ConditionRecord::insufficient("IIb", tol, "edge ladder too short");
    }
    if !d.resonant {
        // W(c̲) must stay away from zero: compare the finest two levels.
        let (k0, w0) = w[0];
        let (k1, w1) = w[1];
        let extrap = w0 - (w1 - w0) * (k0 / (k1 - k0));
        let rel = (w1.norm() * 1e-4) / extrap.norm().max(1e-300);
        return ConditionRecord::new("IIb", rel, tol, format!("non-resonant, |W(c̲)| ≈ {:.3e}", extrap.norm()));
    }
    let (t, g): (Vec<f64>, Vec<Complex64>) = w.iter().map(|(k, wv)| (*k, wv / Complex64::new(0.0, *k))).unzip();
    let (gamma, misfit) = fit_edge_gamma(&t, &g);
    let imag = gamma.im.abs() / gamma.norm().max(1e-300);
    let residual = misfit.max(imag);
    let mut notes = format!("resonant, γ = {:.6}", gamma.re);
    if gamma.norm() < 1e-8 {
        notes.push_str("; γ vanishes");
        return ConditionRecord::new("IIb", f64::INFINITY, tol, notes);
    }
    if let Some(gr) = d.gamma_res {
        notes.push_str(&format!(" (data {gr:.6})"));
    }
    ConditionRecord::new("IIb", residual, tol, notes)
}

/// Discrete modulus of continuity of R± at their edges: the change between
/// the two finest ladder levels, plus a coarse-grid jump screen.
pub fn check_iii(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for s in sides() {
        let r = d.r(s);
        if r.len() < 2 {
            continue;
        }
        let c = d.background(s);
        let ladder = edge_samples(r, c);
        if ladder.len() >= 2 {
            worst = worst.max((ladder[1].1 - ladder[0].1).norm());
        }
        let jump = r.values.windows(2).fold(0.0f64, |m, w| m.max((w[1] - w[0]).norm()));
        if jump > 0.5 {
            notes.push(format!("{}: grid jump {jump:.2}", s.name()));
            return ConditionRecord::insufficient("III", tol, notes.join("; "));
        }
    }
    notes.push("finest-ladder modulus".into());
    ConditionRecord::new("III", worst, tol, notes.join("; "))
}

/// Relative noise level of the sampled F′.
pub const IV_NOISE: f64 = 1e-7;

/// Window-doubling stability of ∫(1 + |x|^m)|F±′| over [0, ±L] and [0, ±2L].
///
/// The weight amplifies the quadrature noise of F′ far out, so samples
/// below `IV_NOISE` times max(1, sup |F′|) on the half-line are treated
/// as zero.
pub fn check_iv(kernels: (&GlmKernel, &GlmKernel), m: usize, tol: f64) -> ConditionRecord {
    let mut worst = 0.0f64;
    let mut notes = Vec::new();
    for k in [kernels.0, kernels.1] {
        let s = k.side.sign();
        let far = match k.side {
            Side::Plus => k.grid.end(),
            Side::Minus => -k.grid.start,
        };
        let big = far.min(2.0 * k.grid.step * (k.grid.len as f64)) * 0.999;
        let floor = IV_NOISE
            * k.f_prime
                .iter()
                .enumerate()
                .filter(|(i, _)| s * k.grid.x(*i) >= 0.0)
                .fold(1.0f64, |a, (_, v)| a.max(v.abs()));
        let integral = |len: f64| -> f64 {
            let mut acc = 0.0;
            let mut prev: Option<(f64, f64)> = None;
            for (i, fp) in k.f_prime.iter().enumerate() {
                let x = k.grid.x(i);
                let u = s * x;
                if !(0.0..=len).contains(&u) {
                    continue;
                }
                let a = if fp.abs() > floor { fp.abs() } else { 0.0 };
                let v = (1.0 + u.powi(m as i32)) * a;
                if let Some((u0, v0)) = prev {
                    acc += 0.5 * (u - u0).abs() * (v + v0);
                }
                prev = Some((u, v));
            }
            acc
        };
        let (i1, i2) = (integral(big / 2.0), integral(big));
        let rel = (i2 - i1).abs() / i2.max(1.0);
        notes.push(format!("{}: {i2:.4e} (floor {floor:.1e})", k.side.name()));
        worst = worst.max(rel);
    }
    ConditionRecord::new("IV", worst, tol, notes.join("; "))
}

/// Fitted log–log slope of |T_c̲| vs ε on the edge ladder; bounded T
/// requires a nonnegative slope.
pub fn check_m1(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let s = d.low_side();
    let lo = d.c_low();
    let pts: Vec<(f64, f64)> = edge_samples(d.t(s), lo)
        .into_iter()
        .map(|(e, t)| (e.ln(), t.norm()))
        .filter(|(_, v)| *v > 0.0)
        .map(|(x, v)| (x, v.ln()))
        .collect();
    if pts.len() < 3 {
        return ConditionRecord::insufficient("M1", tol, "edge ladder too short");
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (slope, _) = linear_fit(&x, &y);
    ConditionRecord::new("M1", -slope, tol, format!("|T| ~ ε^{slope:.3}"))
}

/// |k T⁻¹ (R + 1)| at the finest ladder level on the c̲ side(s).
pub fn check_m2(d: &ScatteringData, tol: f64) -> ConditionRecord {
    let lo = d.c_low();
    let mut worst = 0.0f64;
    let mut used = 0;
    for s in sides().into_iter().filter(|s| d.background(*s) == lo) {
        let finest = edge_samples(d.t(s), lo).into_iter().find(|(e, _)| d.r(s).at(lo + e).is_some());
        let Some((e, t)) = finest else { continue };
        let r = d.r(s).at(lo + e).unwrap();
        worst = worst.max((e.sqrt() * (r + 1.0) / t).norm());
        used += 1;
    }
    if used == 0 {
        return ConditionRecord::insufficient("M2", tol, "no edge samples");
    }
    ConditionRecord::new("M2", worst, tol, "k T⁻¹(R + 1) at the finest level")
}

/// Runs every check; `m` is the moment order used in IV.
pub fn check_all(data: &ScatteringData, kernels: (&GlmKernel, &GlmKernel), m: usize, tol: &CheckerTolerances) -> ConditionReport {
    ConditionReport {
        records: vec![
            check_ia(data, tol.identity),
            check_ib(data, tol.identity),
            check_ic(data, tol.identity),
            check_id(data, tol.identity),
            check_ie(data, tol.asymptotic),
            check_iia(data, tol.identity),
            check_iib(data, tol.asymptotic),
            check_iii(data, tol.asymptotic),
            check_iv(kernels, m, tol.window),
            check_m1(data, tol.asymptotic),
            check_m2(data, tol.asymptotic),
        ],
    }
}

/// R(c̲) = −1 without a resonance, a √-type Wronskian with one.
pub fn check_edge_behavior(data: &ScatteringData, tol: f64) -> ConditionRecord {
    if data.resonant {
        let r = check_iib(data, tol);
        return ConditionRecord { id: "edge", notes: format!("√-fit: {}", r.notes), ..r };
    }
    let s = data.low_side();
    let lo = data.c_low();
    let pts: Vec<(f64, Complex64)> = edge_samples(data.r(s), lo).into_iter().map(|(e, r)| (e.sqrt(), r)).take(2).collect();
    if pts.len() < 2 {
        return ConditionRecord::insufficient("edge", tol, "edge ladder too short");
    }
    let ((t0, r0), (t1, r1)) = (pts[0], pts[1]);
    let at_edge = r0 - (r1 - r0) * (t0 / (t1 - t0));
    let residual = (at_edge + 1.0).norm();
    let rec = ConditionRecord::new("edge", residual, tol, format!("R(c̲) ≈ {:.6}{:+.2e}i", at_edge.re, at_edge.im));
    if rec.verdict == Verdict::Fail {
        return ConditionRecord { notes: format!("anomalous edge; {}", rec.notes), ..rec };
    }
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::{DirectConfig, DirectSolver, SamplingConfig};
    use crate::glm::{assemble, GlmConfig, KernelGrid};
    use crate::potential::Potential;

    fn data(p: &Potential) -> ScatteringData {
        DirectSolver::new(p, DirectConfig::default()).unwrap().scattering_data(&SamplingConfig::default()).unwrap()
    }

    fn report(d: &ScatteringData, m: usize) -> ConditionReport {
        let k = |side| assemble(d, side, KernelGrid::for_side(side, d.x_inf, 3.0, 256), &GlmConfig::default()).unwrap();
        check_all(d, (&k(Side::Plus), &k(Side::Minus)), m, &CheckerTolerances::default())
    }

    #[test]
    fn step_data_passes_every_check() {
        let d = data(&Potential::step(0.0, 1.0, 0.0));
        let r = report(&d, 8);
        assert_eq!(r.records.len(), 11);
        assert!(r.all_pass(), "{}", r.table());
        let edge = check_edge_behavior(&d, 1e-2);
        assert_eq!(edge.verdict, Verdict::Pass, "{}", edge.notes);
    }

    #[test]
    fn rescaled_reflection_breaks_unitarity() {
        let mut d = data(&Potential::step(0.0, 1.0, 0.0));
        d.r_mut(Side::Plus).values.iter_mut().for_each(|v| *v *= 1.5);
        let ic = check_ic(&d, 1e-6);
        // |1.5R|² − |R|² = 1.25|R|²; largest at the c̄ edge where |R| → 1.
        let max_r2 = d.r(Side::Plus).values.iter().map(|v| v.norm_sqr() / 2.25).fold(0.0, f64::max);
        assert_eq!(ic.verdict, Verdict::Fail);
        assert!((ic.residual - 1.25 * max_r2).abs() < 1e-6 * (1.0 + ic.residual));
    }

    #[test]
    fn negative_norming_constant_is_flagged() {
        let mut d = data(&Potential::sech2(0.0, 1.0, 0.0).unwrap());
        assert_eq!(check_iia(&d, 1e-6).verdict, Verdict::Pass);
        d.eigenvalues[0].gamma_plus *= -1.0;
        let r = check_iia(&d, 1e-6);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.notes.contains("invalid norming constant sign"));
    }

    #[test]
    fn free_data_is_resonant_at_the_edge() {
        let d = data(&Potential::free(0.0));
        let r = check_iib(&d, 1e-2);
        assert_eq!(r.verdict, Verdict::Pass, "{}", r.notes);
        assert_eq!(check_m2(&d, 1e-2).verdict, Verdict::Pass);
    }

    #[test]
    fn empty_sigma2_is_insufficient() {
        let mut d = data(&Potential::step(0.0, 1.0, 0.0));
        d.t_plus = CoefficientSeries::default();
        assert_eq!(check_ic(&d, 1e-6).verdict, Verdict::InsufficientSampling);
        assert_eq!(Verdict::InsufficientSampling.to_string(), "INSUFFICIENT");
    }

    #[test]
    fn report_serializes_with_ids() {
        let d = data(&Potential::free(0.0));
        let r = report(&d, 1);
        let json = r.to_json();
        for id in ["Ia", "Ib", "Ic", "Id", "Ie", "IIa", "IIb", "III", "IV", "M1", "M2"] {
            assert!(json.contains(&format!("\"{id}\"")), "{id}");
            assert!(r.get(id).is_some());
        }
        assert!(r.failed().is_empty());
    }
}
