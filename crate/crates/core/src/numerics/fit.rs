//! Small dense least-squares fits and grid differentiation.

use nalgebra::{DMatrix, DVector};

/// Least-squares coefficients for `y ≈ Σ c_j basis_j` given the design matrix
/// rows. Returns the coefficients and the root-mean-square residual.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64) {
    let m = rows.len();
    let n = rows[0].len();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let coef = svd.solve(&b, 1e-14).expect("svd with both factors");
    let resid = &a * &coef - &b;
    let rms = (resid.norm_squared() / m as f64).sqrt();
    (coef.iter().copied().collect(), rms)
}

/// Slope and intercept of the ordinary least-squares line through (x, y).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fourth-order finite-difference derivative of samples on a uniform grid,
/// with one-sided fourth-order stencils at the two ends on each side.
pub fn derivative_uniform(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        for i in 0..n {
            d[i] = match (i, n) {
                (_, 1) => 0.0,
                (0, _) => (y[1] - y[0]) / h,
                (i, n) if i == n - 1 => (y[n - 1] - y[n - 2]) / h,
                (i, _) => (y[i + 1] - y[i - 1]) / (2.0 * h),
            };
        }
        return d;
    }
    for i in 2..n - 2 {
        d[i] = (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h);
    }
    let fwd = |i: usize| (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4]) / (12.0 * h);
    let fwd1 = |i: usize| (-3.0 * y[i - 1] - 10.0 * y[i] + 18.0 * y[i + 1] - 6.0 * y[i + 2] + y[i + 3]) / (12.0 * h);
    let bwd = |i: usize| (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) / (12.0 * h);
    let bwd1 = |i: usize| (3.0 * y[i + 1] + 10.0 * y[i] - 18.0 * y[i - 1] + 6.0 * y[i - 2] - y[i - 3]) / (12.0 * h);
    d[0] = fwd(0);
    d[1] = fwd1(1);
    d[n - 1] = bwd(n - 1);
    d[n - 2] = bwd1(n - 2);
    d
}
