//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per
//! criterion with the measured quantities underneath.
//!
//! Runs without the libtest harness so the report always reaches the
//! console. The process exits nonzero when a criterion fails that is not
//! listed in `KNOWN_FAILURES`; see the README for why 7 is listed.

mod common;

use num_complex::Complex64;
use std::time::{Duration, Instant};
use steplike_ist::asymptotics::{check_expansion_residual, default_ladder, transmission_rate};
use steplike_ist::checker::{
    check_all, check_edge_behavior, check_ia, check_ib, check_ic, check_id, CheckerTolerances, Verdict,
};
use steplike_ist::glm::{chi_transform, GlmConfig, GlmKernel};
use steplike_ist::marchenko::MarchenkoConfig;
use steplike_ist::pipeline::{kernels, reconstruct_from_kernels, reconstruct_with_jumps, sup_error, InverseConfig, Reconstruction};
use steplike_ist::{CutSide, DirectConfig, DirectSolver, Potential, SamplingConfig, ScatteringData, Side};

const KNOWN_FAILURES: &[usize] = &[7];

struct Member {
    name: &'static str,
    potential: Potential,
    data: ScatteringData,
    direct_time: Duration,
    kernels: (GlmKernel, GlmKernel),
    rec: Reconstruction,
    inverse_time: Duration,
}

fn build(name: &'static str, potential: Potential) -> Member {
    let t = Instant::now();
    let data = DirectSolver::new(&potential, DirectConfig::default()).unwrap().scattering_data(&SamplingConfig::default()).unwrap();
    let direct_time = t.elapsed();
    let cfg = InverseConfig::default();
    let t = Instant::now();
    let k = kernels(&data, &cfg).unwrap();
    let rec = reconstruct_from_kernels(&data, k.clone(), &cfg, &potential.jump_points()).unwrap();
    let inverse_time = t.elapsed();
    Member { name, potential, data, direct_time, kernels: k, rec, inverse_time }
}

struct Report {
    failures: Vec<usize>,
}

impl Report {
    fn verdict(&mut self, n: usize, pass: bool) {
        println!("criterion {n}: {}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failures.push(n);
        }
    }
}

fn on_window(rec: &[(f64, f64)], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    rec.iter().copied().filter(|(x, _)| (lo..=hi).contains(x)).collect()
}

fn criterion_1(family: &[Member], report: &mut Report) {
    let m = family.iter().find(|m| m.name == "soliton").unwrap();
    let e = &m.data.eigenvalues;
    let lambda_err = (e[0].lambda + 1.0).abs();
    let gamma_err = (e[0].gamma_plus - 2.0).abs().max((e[0].gamma_minus - 2.0).abs());
    let sup = on_window(&m.rec.potential, -5.0, 5.0)
        .iter()
        .fold(0.0f64, |a, (x, q)| a.max((q + 2.0 / x.cosh().powi(2)).abs()));
    let runtime = m.direct_time + m.inverse_time;
    println!(
        "  eigenvalues {}, |λ₁ + 1| = {lambda_err:.2e}, max |γ± − 2| = {gamma_err:.2e}, sup error on [−5,5] = {sup:.2e}, runtime {:.1} s",
        e.len(),
        runtime.as_secs_f64()
    );
    report.verdict(1, e.len() == 1 && lambda_err < 1e-8 && gamma_err < 1e-6 && sup < 1e-3 && runtime.as_secs_f64() < 60.0);
}

fn criterion_2(report: &mut Report) {
    let t = Instant::now();
    let p = common::step();
    let data = DirectSolver::new(&p, DirectConfig::default()).unwrap().scattering_data(&SamplingConfig::default()).unwrap();
    let grid = data.lambda_grid_sigma2();
    let stride = (grid.len() / 100).max(1);
    let picks: Vec<f64> = grid.iter().copied().step_by(stride).take(100).collect();
    let mut err: f64 = 0.0;
    for &l in &picks {
        let (km, kp) = (l.sqrt(), (l - 1.0).sqrt());
        let r = Complex64::new((km - kp) / (km + kp), 0.0);
        let tm = Complex64::new(2.0 * km / (km + kp), 0.0);
        err = err.max((data.r(Side::Minus).at(l).unwrap() - r).norm());
        err = err.max((data.t(Side::Minus).at(l).unwrap() - tm).norm());
    }
    let cfg = GlmConfig::default();
    let chi_high = chi_transform(&data, Side::Plus, &cfg).unwrap();
    let chi_low = chi_transform(&data, Side::Minus, &cfg).unwrap();
    let (kp, km) = kernels(&data, &InverseConfig::default()).unwrap();
    let high_max = kp.f_chi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let low_max = km.f_chi.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let runtime = t.elapsed().as_secs_f64();
    println!(
        "  {} Σ⁽²⁾ points, max error of R₋, T₋ = {err:.2e}; max |F_chi| on c̄ side {high_max:.3e}, on c̲ side {low_max:.1e}; runtime {runtime:.1} s",
        picks.len()
    );
    let chi_ok = chi_high.is_some() && chi_low.is_none() && high_max > 0.0 && low_max == 0.0;
    report.verdict(2, picks.len() == 100 && err < 1e-8 && chi_ok && runtime < 10.0);
}

fn criterion_3(family: &[Member], report: &mut Report) {
    let mut pass = true;
    for m in family {
        let recs = [check_ia(&m.data, 1e-6), check_ib(&m.data, 1e-6), check_ic(&m.data, 1e-6), check_id(&m.data, 1e-6)];
        let line: Vec<String> = recs.iter().map(|r| format!("{} {:.1e}", r.id, r.residual)).collect();
        println!("  {:<13} {}", m.name, line.join(", "));
        pass &= recs.iter().all(|r| r.verdict == Verdict::Pass && r.residual < 1e-6);
    }
    report.verdict(3, pass);
}

/// dW/dλ by a fourth-order central difference below the spectrum.
fn wronskian_slope(p: &Potential, lambda: f64) -> f64 {
    let s = DirectSolver::new(p, DirectConfig { ode_rtol: 1e-12, ode_atol: 1e-15, ..Default::default() }).unwrap();
    let h = 1e-3 * (1.0 + lambda.abs());
    let w = |l: f64| s.compute_wronskian(&s.lift(l, CutSide::Upper)).unwrap().re;
    (w(lambda - 2.0 * h) - 8.0 * w(lambda - h) + 8.0 * w(lambda + h) - w(lambda + 2.0 * h)) / (12.0 * h)
}

fn criterion_4(family: &[Member], two: &Member, report: &mut Report) {
    let mut pass = true;
    let mut count = 0;
    for m in family.iter().chain(std::iter::once(two)) {
        for e in &m.data.eigenvalues {
            let dw = wronskian_slope(&m.potential, e.lambda);
            let lhs = dw.powi(-2);
            let rhs = e.gamma_plus * e.gamma_minus;
            let rel = (lhs - rhs).abs() / rhs;
            println!("  {:<13} λ = {:.8}: (dW/dλ)⁻² = {lhs:.8}, γ⁺γ⁻ = {rhs:.8}, relative {rel:.1e}", m.name, e.lambda);
            pass &= rel < 1e-4;
            count += 1;
        }
    }
    let sol = family.iter().find(|m| m.name == "soliton").unwrap();
    let product = sol.data.eigenvalues[0].gamma_plus * sol.data.eigenvalues[0].gamma_minus;
    println!("  soliton γ⁺γ⁻ = {product:.8} (closed form 4)");
    pass &= (product - 4.0).abs() < 4e-4 && count >= 4;
    report.verdict(4, pass);
}

fn perturbed(data: &ScatteringData, j: usize) -> ScatteringData {
    let mut d = data.clone();
    d.eigenvalues[j].gamma_plus *= 1.1;
    d
}

fn criterion_5(family: &[Member], two: &Member, report: &mut Report) {
    let valid = ["free", "soliton", "random bump"];
    let mut pass = true;
    for m in family.iter().filter(|m| valid.contains(&m.name)).chain(std::iter::once(two)) {
        let c = &m.rec.consistency;
        println!("  {:<13} sup |q₋ − q₊| on [{}, {}] = {:.2e}", m.name, c.window.0, c.window.1, c.sup);
        pass &= c.sup < 1e-3 && c.pass;
        for j in 0..m.data.eigenvalues.len() {
            let bad = reconstruct_with_jumps(&perturbed(&m.data, j), &InverseConfig::default(), &[]).unwrap();
            println!("  {:<13} γ⁺_{} × 1.1: sup = {:.2e}, consistency {}", m.name, j + 1, bad.consistency.sup, verdict(bad.consistency.pass));
            pass &= !bad.consistency.pass;
        }
    }
    for m in family.iter().filter(|m| !valid.contains(&m.name)) {
        let c = &m.rec.consistency;
        println!(
            "  (info) {:<13} sup |q₋ − q₊| = {:.2e} with ±0.5 around the jump excluded (cross-jump extension; not scored)",
            m.name, c.sup
        );
    }
    report.verdict(5, pass);
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn criterion_6(family: &[Member], report: &mut Report) {
    let free = &family.iter().find(|m| m.name == "free").unwrap().data;
    let step = &family.iter().find(|m| m.name == "step").unwrap().data;
    println!(
        "  free: resonant = {}, γ = {:?}; step: resonant = {}",
        free.resonant, free.gamma_res, step.resonant
    );
    let gamma_ok = free.gamma_res.is_some_and(|g| (g - 2.0).abs() <= 0.05);
    report.verdict(6, free.resonant && gamma_ok && !step.resonant);
}

fn criterion_7(report: &mut Report) {
    let ladder = default_ladder();
    let step = common::step();
    let s = DirectSolver::new(&step, DirectConfig::default()).unwrap();
    let tm = transmission_rate(&s, Side::Minus, &ladder).unwrap();
    let tp = transmission_rate(&s, Side::Plus, &ladder).unwrap();
    println!("  step: slope of |T₋ − 1| = {:.4}, of |T₊ − 1| = {:.4} (target −0.5 ± 0.1)", tm.slope, tp.slope);
    let rate_ok = (tm.slope + 0.5).abs() <= 0.1;

    let sol = common::soliton();
    let mut slopes = Vec::new();
    for n in 1..=5 {
        let f = check_expansion_residual(&sol, Side::Plus, 0.3, n, &ladder, &DirectConfig::default()).unwrap();
        println!("  soliton order {n}: residual slope {:.3} over {} ladder points, bound {:.1}: {}", f.slope, f.used, -(n as f64) / 2.0 + 0.3, verdict(f.pass));
        slopes.push((f.slope, f.pass));
    }
    let monotone = slopes.windows(2).all(|w| w[1].0 < w[0].0) && slopes.iter().all(|s| s.1);
    println!("  order-raising monotone: {monotone}");
    report.verdict(7, rate_ok && monotone);
}

fn criterion_8(family: &[Member], report: &mut Report) {
    let m = family.iter().find(|m| m.name == "soliton").unwrap();
    let err = |n_q: usize| {
        let mut cfg = InverseConfig::default();
        cfg.marchenko = MarchenkoConfig::default().with_nodes(n_q);
        let rec = reconstruct_with_jumps(&m.data, &cfg, &[]).unwrap();
        sup_error(&m.potential, &on_window(&rec.potential, -5.0, 5.0), 0.0)
    };
    let e: Vec<(usize, f64)> = [8usize, 16, 32].iter().map(|&n| (n, err(n))).collect();
    let default_err = sup_error(&m.potential, &on_window(&m.rec.potential, -5.0, 5.0), 0.0);
    for (n, v) in &e {
        println!("  N_q = {n:>3}: sup error {v:.3e}");
    }
    println!("  N_q = 256 (default): sup error {default_err:.3e} (differentiation floor)");
    let ratios: Vec<f64> = e.windows(2).map(|w| w[0].1 / w[1].1).collect();
    println!("  reduction per doubling: {ratios:.1?}");
    report.verdict(8, ratios.iter().all(|r| *r >= 8.0));
}

fn caught(data: &ScatteringData, m: usize) -> Vec<&'static str> {
    let tol = CheckerTolerances::default();
    match kernels(data, &InverseConfig::default()) {
        Ok(k) => check_all(data, (&k.0, &k.1), m, &tol).failed(),
        Err(e) => {
            println!("    kernel assembly refused the data: {e}");
            vec!["assembly"]
        }
    }
}

fn criterion_9(family: &[Member], report: &mut Report) {
    let tol = CheckerTolerances::default();
    let mut pass = true;
    for m in family {
        let r = check_all(&m.data, (&m.kernels.0, &m.kernels.1), m.potential.moments, &tol);
        let edge = check_edge_behavior(&m.data, tol.asymptotic);
        println!("  {:<13} {} of {} checks pass, edge {}", m.name, r.records.iter().filter(|r| r.verdict == Verdict::Pass).count(), r.records.len(), edge.verdict);
        pass &= r.records.len() == 11 && r.all_pass() && edge.verdict == Verdict::Pass;
    }
    let get = |name: &str| family.iter().find(|m| m.name == name).unwrap();
    for name in ["step", "random bump"] {
        let m = get(name);
        let mut scaled = m.data.clone();
        scaled.r_mut(Side::Plus).values.iter_mut().for_each(|v| *v *= 1.5);
        let by = caught(&scaled, m.potential.moments);
        println!("  {name}: R₊ × 1.5 caught by {by:?}");
        pass &= !by.is_empty();

        let mut cut = m.data.clone();
        for side in [Side::Plus, Side::Minus] {
            let c = cut.background(side);
            let series = cut.r_mut(side);
            for (l, v) in series.lambda.iter().zip(series.values.iter_mut()) {
                if (l - c).max(0.0).sqrt() > 5.0 {
                    *v = Complex64::new(0.0, 0.0);
                }
            }
        }
        let by = caught(&cut, m.potential.moments);
        println!("  {name}: R tail truncated at k = 5 caught by {by:?}");
        pass &= !by.is_empty();
    }
    for name in ["soliton", "random bump"] {
        let m = get(name);
        if m.data.eigenvalues.is_empty() {
            continue;
        }
        let mut neg = m.data.clone();
        neg.eigenvalues[0].gamma_plus = -neg.eigenvalues[0].gamma_plus;
        let by = caught(&neg, m.potential.moments);
        println!("  {name}: γ⁺₁ negated caught by {by:?}");
        pass &= !by.is_empty();
    }
    report.verdict(9, pass);
}

fn main() {
    let t = Instant::now();
    let family: Vec<Member> = common::family().into_iter().map(|(n, p)| build(n, p)).collect();
    let two = build("two-soliton", common::two_soliton());
    for m in family.iter().chain(std::iter::once(&two)) {
        println!(
            "{}: {} eigenvalue(s), resonant {}, direct {:.1} s, inverse {:.1} s",
            m.name,
            m.data.eigenvalues.len(),
            m.data.resonant,
            m.direct_time.as_secs_f64(),
            m.inverse_time.as_secs_f64()
        );
    }
    let mut report = Report { failures: Vec::new() };
    criterion_1(&family, &mut report);
    criterion_2(&mut report);
    criterion_3(&family, &mut report);
    criterion_4(&family, &two, &mut report);
    criterion_5(&family, &two, &mut report);
    criterion_6(&family, &mut report);
    criterion_7(&mut report);
    criterion_8(&family, &mut report);
    criterion_9(&family, &mut report);
    println!("acceptance suite finished in {:.1} s", t.elapsed().as_secs_f64());
    let unexpected: Vec<usize> = report.failures.iter().copied().filter(|n| !KNOWN_FAILURES.contains(n)).collect();
    let fixed: Vec<usize> = KNOWN_FAILURES.iter().copied().filter(|n| !report.failures.contains(n)).collect();
    if !fixed.is_empty() {
        println!("note: criteria {fixed:?} listed as known failures now pass");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
