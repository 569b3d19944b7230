#![allow(dead_code)]

use painleve3_core::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Point of the monodromy surface with Stokes parameter `s` and eigenvalue
/// coordinate `b₋` (`b₊ = 1/b₋`).
pub fn point_from_eigen(s: C64, b_minus: C64) -> MonodromyPoint {
    let w = sqrt_branch(s);
    let b_plus = 1.0 / b_minus;
    let b5 = (b_minus + b_plus) * 0.5;
    let b2 = (b_minus - b_plus) / (2.0 * w);
    MonodromyPoint::new_unchecked(s, b5 - s * b2 * 0.5, b2)
}

/// Random point with `|s| <= s_max` off the real rays and `|b₋| ∈ [0.3, 3]`.
pub fn random_generic(r: &mut ChaCha8Rng, s_max: f64) -> MonodromyPoint {
    let s = C64::from_polar(s_max * r.random::<f64>().sqrt(), r.random_range(0.0..2.0 * PI));
    let bm = C64::from_polar(
        (r.random_range(0.3f64.ln()..3.0f64.ln())).exp(),
        r.random_range(0.0..2.0 * PI),
    );
    point_from_eigen(s, bm)
}

/// Real-family point with `|s| < 2`, given `b6` and the sign of `b5`.
pub fn real_mixed(s: f64, sign5: f64, b6: f64) -> MonodromyPoint {
    let b5 = sign5 * (1.0 + (1.0 - s * s / 4.0) * b6 * b6).sqrt();
    MonodromyPoint::from_real_form(s, b5, b6, 1e-10).unwrap()
}

pub fn real_scalar(s: f64, sign: f64) -> MonodromyPoint {
    MonodromyPoint::from_real_form(s, sign, 0.0, 1e-12).unwrap()
}

/// One representative per stratum, in the order of `RealStratum::all()`.
pub fn stratum_representatives() -> Vec<MonodromyPoint> {
    vec![
        real_scalar(1.0, 1.0),
        real_mixed(1.0, 1.0, -0.5),
        real_mixed(1.0, 1.0, 0.5),
        real_scalar(1.0, -1.0),
        real_mixed(1.0, -1.0, -0.5),
        real_mixed(1.0, -1.0, 0.5),
        real_scalar(3.0, 1.0),
        real_scalar(3.0, -1.0),
        real_point_from_phase(3.0, 1.0).unwrap(),
        real_point_from_phase(3.0, -1.0).unwrap(),
        real_scalar(-3.0, 1.0),
        real_scalar(-3.0, -1.0),
        real_point_from_phase(-3.0, 1.0).unwrap(),
        real_point_from_phase(-3.0, -1.0).unwrap(),
    ]
}

pub fn max_norm(a: &MonodromyPoint, b: &MonodromyPoint) -> f64 {
    (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
