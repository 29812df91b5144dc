//! Truncated Taylor series ("jets") for exact higher derivatives of
//! closed-form expressions.
//!
//! A jet of order `n` stores the normalized coefficients `c[k] = f⁽ᵏ⁾(x₀)/k!`
//! for `k = 0..=n`. Arithmetic follows the usual recurrences of automatic
//! differentiation, so derivatives are exact up to rounding.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<f64>,
}

impl Jet {
    pub fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Self { c }
    }

    /// The independent variable expanded at `x0`.
    pub fn variable(x0: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// The `j`-th derivative `j!·c[j]`.
    pub fn derivative(&self, j: usize) -> f64 {
        if j > self.order() {
            return 0.0;
        }
        let mut f = 1.0;
        for i in 2..=j {
            f *= i as f64;
        }
        self.c[j] * f
    }

    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|j| self.derivative(j)).collect()
    }

    fn zip(&self, o: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| f(*a, *b)).collect() }
    }

    pub fn add(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        self.zip(o, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet {
        Jet { c: self.c.iter().map(|v| -v).collect() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|v| v * s).collect() }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..=k {
                s += self.c[j] * o.c[k - j];
            }
            c[k] = s;
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * c[k - j];
            }
            c[k] = s / o.c[0];
        }
        Jet { c }
    }

    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].exp();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * c[k - j];
            }
            c[k] = s / k as f64;
        }
        Jet { c }
    }

    pub fn ln(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].ln();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * c[j] * self.c[k - j];
            }
            c[k] = (self.c[k] - s / k as f64) / self.c[0];
        }
        Jet { c }
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].sqrt();
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..k {
                s += c[j] * c[k - j];
            }
            c[k] = (self.c[k] - s) / (2.0 * c[0]);
        }
        Jet { c }
    }

    /// Returns (sin, cos).
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut s = vec![0.0; n];
        let mut co = vec![0.0; n];
        s[0] = self.c[0].sin();
        co[0] = self.c[0].cos();
        for k in 1..n {
            let mut a = 0.0;
            let mut b = 0.0;
            for j in 1..=k {
                a += j as f64 * self.c[j] * co[k - j];
                b += j as f64 * self.c[j] * s[k - j];
            }
            s[k] = a / k as f64;
            co[k] = -b / k as f64;
        }
        (Jet { c: s }, Jet { c: co })
    }

    pub fn tanh(&self) -> Jet {
        let n = self.c.len();
        let mut t = vec![0.0; n];
        let mut u = vec![0.0; n];
        t[0] = self.c[0].tanh();
        u[0] = 1.0 - t[0] * t[0];
        for k in 1..n {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * u[k - j];
            }
            t[k] = s / k as f64;
            let mut p = 0.0;
            for i in 0..=k {
                p += t[i] * t[k - i];
            }
            u[k] = -p;
        }
        Jet { c: t }
    }

    pub fn sech(&self) -> Jet {
        let n = self.c.len();
        let t = self.tanh();
        let mut s = vec![0.0; n];
        let a0 = self.c[0].abs();
        s[0] = 2.0 * (-a0).exp() / (1.0 + (-2.0 * a0).exp());
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                let m = k - j;
                let mut st = 0.0;
                for i in 0..=m {
                    st += s[i] * t.c[m - i];
                }
                acc += j as f64 * self.c[j] * st;
            }
            s[k] = -acc / k as f64;
        }
        Jet { c: s }
    }

    pub fn sinh(&self) -> Jet {
        let e = self.exp();
        let em = self.neg().exp();
        e.sub(&em).scale(0.5)
    }

    pub fn cosh(&self) -> Jet {
        let e = self.exp();
        let em = self.neg().exp();
        e.add(&em).scale(0.5)
    }

    pub fn powi(&self, p: i32) -> Jet {
        if p < 0 {
            return Jet::constant(1.0, self.order()).div(&self.powi(-p));
        }
        let mut result = Jet::constant(1.0, self.order());
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        result
    }

    pub fn powf(&self, o: &Jet) -> Jet {
        let exponent_const = o.c.iter().skip(1).all(|v| *v == 0.0);
        if exponent_const && o.c[0].fract() == 0.0 && o.c[0].abs() < 64.0 {
            return self.powi(o.c[0] as i32);
        }
        self.ln().mul(o).exp()
    }

    /// |a| treated as ±a according to the sign of the value.
    pub fn abs(&self) -> Jet {
        if self.c[0] < 0.0 {
            self.neg()
        } else {
            self.clone()
        }
    }
}
