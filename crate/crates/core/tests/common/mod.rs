#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steplike_ist::Potential;

pub const BUMP_SEED: u64 = 2;

pub fn free() -> Potential {
    Potential::free(0.0)
}

pub fn step() -> Potential {
    Potential::step(0.0, 1.0, 0.0)
}

pub fn soliton() -> Potential {
    Potential::sech2(0.0, 1.0, 0.0).unwrap()
}

/// −2sech²x on top of the unit step.
pub fn soliton_on_step() -> Potential {
    Potential::expression(0.0, 1.0, "step(x) - 2*sech(x)^2", vec![0.0], 0, 1).unwrap()
}

/// A Gaussian well with seeded random depth, centre and width on a smooth
/// step from 0 to 1.
pub fn random_bump(seed: u64) -> Potential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depth: f64 = rng.gen_range(0.8..1.5);
    let center: f64 = rng.gen_range(-0.5..0.5);
    let width: f64 = rng.gen_range(0.8..1.2);
    let expr = format!("0.5*(1+tanh(2*x)) - {depth}*exp(-((x-({center}))/{width})^2)");
    Potential::expression(0.0, 1.0, &expr, vec![], 6, 2).unwrap()
}

/// The reflectionless well −6sech²x, eigenvalues −1 and −4.
pub fn two_soliton() -> Potential {
    Potential::bargmann(0.0, vec![1.0, 2.0], vec![6.0, 12.0]).unwrap()
}

/// The five-member test family.
pub fn family() -> Vec<(&'static str, Potential)> {
    vec![
        ("free", free()),
        ("step", step()),
        ("soliton", soliton()),
        ("soliton+step", soliton_on_step()),
        ("random bump", random_bump(BUMP_SEED)),
    ]
}
