//! The maps λ ↦ k± = √(λ − c±) on the cut plane and the classification of
//! spectral points.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Which boundary value of the cut plane a real λ refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutSide {
    /// λ + i0.
    Upper,
    /// λ − i0.
    Lower,
    OffAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Multiplicity-two continuous spectrum [c̄, ∞).
    Sigma2,
    /// Multiplicity-one continuous spectrum [c̲, c̄).
    Sigma1,
    BelowSpectrum,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub lambda: Complex64,
    pub k_plus: Complex64,
    pub k_minus: Complex64,
    pub side: CutSide,
    pub region: Region,
    c_plus: f64,
    c_minus: f64,
}

/// √(λ − c) with the side convention: on the axis the upper side gives
/// k ≥ 0 for λ ≥ c, the lower side −k; off the axis the
/// principal root is mapped into the closed upper half plane.
pub fn momentum(lambda: Complex64, c: f64, side: CutSide) -> Complex64 {
    match side {
        CutSide::Upper | CutSide::Lower => {
            let d = lambda.re - c;
            if d >= 0.0 {
                let k = d.sqrt();
                Complex64::new(if side == CutSide::Upper { k } else { -k }, 0.0)
            } else {
                Complex64::new(0.0, (-d).sqrt())
            }
        }
        CutSide::OffAxis => {
            let k = (lambda - c).sqrt();
            if k.im < 0.0 {
                -k
            } else {
                k
            }
        }
    }
}

/// Builds a spectral point. On-axis sides use only the real part of λ.
pub fn lift(lambda: Complex64, side: CutSide, c_plus: f64, c_minus: f64) -> SpectralPoint {
    let lambda = if side == CutSide::OffAxis { lambda } else { Complex64::new(lambda.re, 0.0) };
    let k_plus = momentum(lambda, c_plus, side);
    let k_minus = momentum(lambda, c_minus, side);
    let mut p = SpectralPoint { lambda, k_plus, k_minus, side, region: Region::Complex, c_plus, c_minus };
    p.region = classify(&p);
    p
}

/// Convenience for real λ on the given side.
pub fn lift_real(lambda: f64, side: CutSide, c_plus: f64, c_minus: f64) -> SpectralPoint {
    lift(Complex64::new(lambda, 0.0), side, c_plus, c_minus)
}

pub fn classify(point: &SpectralPoint) -> Region {
    if point.side == CutSide::OffAxis && point.lambda.im != 0.0 {
        return Region::Complex;
    }
    let lo = point.c_plus.min(point.c_minus);
    let hi = point.c_plus.max(point.c_minus);
    let l = point.lambda.re;
    if l >= hi {
        Region::Sigma2
    } else if l >= lo {
        Region::Sigma1
    } else {
        Region::BelowSpectrum
    }
}

impl SpectralPoint {
    pub fn k(&self, side: crate::potential::Side) -> Complex64 {
        match side {
            crate::potential::Side::Plus => self.k_plus,
            crate::potential::Side::Minus => self.k_minus,
        }
    }

    pub fn lambda_re(&self) -> f64 {
        self.lambda.re
    }

    pub fn backgrounds(&self) -> (f64, f64) {
        (self.c_plus, self.c_minus)
    }
}
