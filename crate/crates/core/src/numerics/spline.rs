//! Natural cubic splines on strictly increasing abscissae.

use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl CubicSpline {
    /// Builds the natural spline; requires at least two strictly increasing knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n, "spline needs at least two matching knots");
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm for the tridiagonal system of interior moments.
            let mut c_prime = vec![0.0; n];
            let mut d_prime = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let a = h0 / 6.0;
                let b = (h0 + h1) / 3.0;
                let c = h1 / 6.0;
                let d = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (d - a * d_prime[i - 1]) / denom;
            }
            for i in (1..n - 1).rev() {
                m[i] = d_prime[i] - c_prime[i] * m[i + 1];
            }
        }
        Self { x, y, m }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    fn interval(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        self.x.partition_point(|&v| v <= t).saturating_sub(1).min(n - 2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// Derivative of the given order; outside the knot range the spline is
    /// continued linearly.
    pub fn derivative(&self, t: f64, order: usize) -> f64 {
        let n = self.x.len();
        if t < self.x[0] || t > self.x[n - 1] {
            let (xe, ye, i) = if t < self.x[0] { (self.x[0], self.y[0], 0) } else { (self.x[n - 1], self.y[n - 1], n - 2) };
            let slope = self.slope_at_end(i, t > self.x[n - 1]);
            return match order {
                0 => ye + slope * (t - xe),
                1 => slope,
                _ => 0.0,
            };
        }
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1, y0, y1) = (self.m[i], self.m[i + 1], self.y[i], self.y[i + 1]);
        match order {
            0 => a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0,
            1 => (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1,
            2 => a * m0 + b * m1,
            3 => (m1 - m0) / h,
            _ => 0.0,
        }
    }

    fn slope_at_end(&self, i: usize, right: bool) -> f64 {
        let h = self.x[i + 1] - self.x[i];
        let (m0, m1, y0, y1) = (self.m[i], self.m[i + 1], self.y[i], self.y[i + 1]);
        if right {
            (y1 - y0) / h + h * (2.0 * m1 + m0) / 6.0
        } else {
            (y1 - y0) / h - h * (2.0 * m0 + m1) / 6.0
        }
    }
}

/// Complex-valued spline as a pair of real splines.
#[derive(Debug, Clone)]
pub struct ComplexSpline {
    re: CubicSpline,
    im: CubicSpline,
}

impl ComplexSpline {
    pub fn new(x: Vec<f64>, y: &[Complex64]) -> Self {
        let re = CubicSpline::new(x.clone(), y.iter().map(|v| v.re).collect());
        let im = CubicSpline::new(x, y.iter().map(|v| v.im).collect());
        Self { re, im }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        Complex64::new(self.re.eval(t), self.im.eval(t))
    }

    pub fn knots(&self) -> &[f64] {
        self.re.knots()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knot_values_and_linear_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 1.0).collect();
        let s = CubicSpline::new(x.clone(), y.clone());
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
        assert!((s.eval(1.234) - (2.0 * 1.234 - 1.0)).abs() < 1e-13);
        assert!((s.eval(-1.0) + 3.0).abs() < 1e-12);
        assert!((s.derivative(0.77, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn fourth_order_accuracy_on_smooth_data() {
        let err = |n: usize| {
            let x: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64 * 3.0).collect();
            let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
            let s = CubicSpline::new(x, y);
            (0..200)
                .map(|i| 0.5 + 2.0 * i as f64 / 200.0)
                .map(|t| (s.eval(t) - t.sin()).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(40) / err(80);
        assert!(ratio > 12.0, "ratio {ratio}");
    }

    #[test]
    fn derivative_orders_are_consistent() {
        let x: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| (1.3 * v).cos()).collect();
        let s = CubicSpline::new(x, y);
        let h = 1e-6;
        let t = 1.234;
        let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
        assert!((fd - s.derivative(t, 1)).abs() < 1e-8);
        let fd2 = (s.derivative(t + h, 1) - s.derivative(t - h, 1)) / (2.0 * h);
        assert!((fd2 - s.derivative(t, 2)).abs() < 1e-6);
    }
}
