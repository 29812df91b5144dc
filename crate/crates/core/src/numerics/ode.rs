//! Dormand–Prince 5(4) embedded Runge–Kutta integrator for small complex
//! systems of fixed dimension.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeFailure {
    NonFinite { x: f64 },
    TooManySteps { x: f64 },
    StepUnderflow { x: f64 },
}

impl std::fmt::Display for OdeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OdeFailure::NonFinite { x } => write!(f, "non-finite state at x = {x}"),
            OdeFailure::TooManySteps { x } => write!(f, "step budget exhausted at x = {x}"),
            OdeFailure::StepUnderflow { x } => write!(f, "step size underflow at x = {x}"),
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[Complex64; N], h: f64, terms: &[(f64, &[Complex64; N])]) -> [Complex64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        let s = h * c;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
pub fn integrate<const N: usize, F>(
    f: F,
    x0: f64,
    y0: [Complex64; N],
    x1: f64,
    opts: &OdeOptions,
) -> Result<[Complex64; N], OdeFailure>
where
    F: FnMut(f64, &[Complex64; N]) -> [Complex64; N],
{
    integrate_observed(f, x0, y0, x1, opts, |_, _| {})
}

/// Like [`integrate`], calling `observer` after every accepted step.
pub fn integrate_observed<const N: usize, F, O>(
    mut f: F,
    x0: f64,
    y0: [Complex64; N],
    x1: f64,
    opts: &OdeOptions,
    mut observer: O,
) -> Result<[Complex64; N], OdeFailure>
where
    F: FnMut(f64, &[Complex64; N]) -> [Complex64; N],
    O: FnMut(f64, &[Complex64; N]),
{
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, &y);

    let scale = |y: &[Complex64; N]| -> f64 {
        let mut s = 0.0;
        for v in y {
            s += v.norm_sqr();
        }
        (s / N as f64).sqrt()
    };
    // Standard initial step heuristic (Hairer, Nørsett & Wanner).
    let d0 = scale(&y).max(1e-5);
    let d1 = scale(&k1).max(1e-5);
    let mut h = (0.01 * d0 / d1).min(span.abs()).min(opts.h_max);
    let h_min = 1e-14 * (1.0 + x0.abs().max(x1.abs()));

    let mut steps = 0usize;
    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= 0.0 {
            break;
        }
        if steps >= opts.max_steps {
            return Err(OdeFailure::TooManySteps { x });
        }
        steps += 1;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;

        let k2 = f(x + C2 * hs, &combine(&y, hs, &[(A21, &k1)]));
        let k3 = f(x + C3 * hs, &combine(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + C4 * hs, &combine(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + C5 * hs,
            &combine(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let xe = if last { x1 } else { x + hs };
        let k6 = f(
            xe,
            &combine(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = combine(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = f(xe, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        err = (err / N as f64).sqrt();

        if !err.is_finite() {
            if h <= h_min {
                return Err(OdeFailure::NonFinite { x });
            }
            h *= 0.1;
            continue;
        }

        if err <= 1.0 {
            x = xe;
            y = y_new;
            k1 = k7;
            if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(OdeFailure::NonFinite { x });
            }
            observer(x, &y);
            if last {
                break;
            }
            let fac = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h *= fac;
            if h < h_min {
                return Err(OdeFailure::StepUnderflow { x });
            }
        }
    }
    Ok(y)
}
