//! Sine integral and the Fourier tail integrals built from it.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Si(x) = ∫₀ˣ sin t / t dt.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x <= 4.0 {
        let mut term = x;
        let mut sum = x;
        let x2 = x * x;
        let mut k = 1usize;
        loop {
            term *= -x2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            let add = term / (2 * k + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
            k += 1;
        }
        return sum;
    }
    FRAC_PI_2 + exp_integral_e1_imaginary(x).im
}

/// E₁(ix) for x > 2 by the modified Lentz continued fraction.
fn exp_integral_e1_imaginary(x: f64) -> Complex64 {
    let tiny = 1e-300;
    let z = Complex64::new(0.0, x);
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (d * an + b);
        c = b + Complex64::new(an, 0.0) / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h * Complex64::new(x.cos(), -x.sin())
}

/// ∫_K^∞ sin(kx)/k dk for K > 0.
pub fn sin_over_k_tail(big_k: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x.signum() * (FRAC_PI_2 - sine_integral(big_k * x.abs()))
}

/// ∫_K^∞ cos(kx)/k² dk for K > 0.
pub fn cos_over_k2_tail(big_k: f64, x: f64) -> f64 {
    (big_k * x).cos() / big_k - x.abs() * (FRAC_PI_2 - sine_integral(big_k * x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 5.1.
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((sine_integral(5.0) - 1.549_931_244_944_674).abs() < 1e-13);
        assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-13);
        assert!((sine_integral(4.0) - 1.758_203_138_949_053).abs() < 1e-13);
    }

    #[test]
    fn continuous_across_branch_switch() {
        let a = sine_integral(4.0 - 1e-12);
        let b = sine_integral(4.0 + 1e-12);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn large_argument_limit() {
        assert!((sine_integral(1e6) - FRAC_PI_2).abs() < 2e-6);
    }

    #[test]
    fn tail_integrals_have_correct_derivative_and_limit() {
        let x = 0.4;
        let h = 1e-5;
        for big_k in [0.5, 3.0, 12.0] {
            let d_sin = (sin_over_k_tail(big_k + h, x) - sin_over_k_tail(big_k - h, x)) / (2.0 * h);
            assert!((d_sin + (big_k * x).sin() / big_k).abs() < 1e-8);
            let d_cos = (cos_over_k2_tail(big_k + h, x) - cos_over_k2_tail(big_k - h, x)) / (2.0 * h);
            assert!((d_cos + (big_k * x).cos() / (big_k * big_k)).abs() < 1e-8);
        }
        assert!(sin_over_k_tail(1e7, x).abs() < 1e-6);
        assert!(cos_over_k2_tail(1e7, x).abs() < 1e-6);
    }
}
