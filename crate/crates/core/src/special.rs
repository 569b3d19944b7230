//! Complex Gamma function and a few related helpers.
//!
//! `ln_gamma` uses the Stirling series after shifting the argument to
//! `Re z >= 15`; the shift is undone with a sum of principal logarithms, so the
//! result is the standard branch that is continuous off the negative real axis.

use crate::C64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k-1)) for k = 1..=10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

const SHIFT_RE: f64 = 15.0;

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal-branch log Gamma. Returns `+inf` real part at the poles.
pub fn ln_gamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        return C64::new(f64::INFINITY, 0.0);
    }
    // ln of the product for the modulus, summed arguments for the branch
    let mut w = z;
    let mut prod = C64::new(1.0, 0.0);
    let mut args = 0.0;
    while w.re < SHIFT_RE {
        prod *= w;
        args += w.arg();
        w += 1.0;
    }
    let shift = C64::new(prod.norm().ln(), args);
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += c * p;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// Gamma function on the complex plane.
pub fn gamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        return C64::new(f64::INFINITY, 0.0);
    }
    if z.re >= 0.5 {
        ln_gamma(z).exp()
    } else {
        // reflection keeps the error relative instead of growing with |ln Γ|
        let s = (PI * z).sin();
        PI / (s * ln_gamma(1.0 - z).exp())
    }
}

/// Reciprocal Gamma, an entire function; exactly zero at the poles of Γ.
pub fn rgamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        return C64::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        (-ln_gamma(z)).exp()
    } else {
        (PI * z).sin() * ln_gamma(1.0 - z).exp() / PI
    }
}

/// `arg Γ(1 + i t)` taken as `Im ln Γ(1 + i t)`, continuous in `t`.
pub fn arg_gamma_one_plus_it(t: f64) -> f64 {
    ln_gamma(C64::new(1.0, t)).im
}

/// Ratio `K_1(z) / K_0(z)` for real `z >= 8` from the large-argument series.
pub fn bessel_k1_over_k0(z: f64) -> f64 {
    let (k0, k1) = bessel_k0_k1(z);
    k1 / k0
}

/// `(K_0(z), K_1(z))` for real `z >= 8` from the large-argument series,
/// truncated at its smallest term; the relative error is about `e^{-2z}`.
pub fn bessel_k0_k1(z: f64) -> (f64, f64) {
    let series = |nu: f64| {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * z);
            // asymptotic series: stop at the smallest term
            if next.abs() >= term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term.abs() < 1e-17 {
                break;
            }
        }
        sum
    };
    let pre = (PI / (2.0 * z)).sqrt() * (-z).exp();
    (pre * series(0.0), pre * series(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Lanczos (g = 7, n = 9) as an independent reference
    fn lanczos(z: C64) -> C64 {
        const P: [f64; 9] = [
            0.999_999_999_999_809_9,
            676.520_368_121_885_1,
            -1_259.139_216_722_402_8,
            771.323_428_777_653_1,
            -176.615_029_162_140_6,
            12.507_343_278_686_905,
            -0.138_571_095_265_720_12,
            9.984_369_578_019_572e-6,
            1.505_632_735_149_311_6e-7,
        ];
        if z.re < 0.5 {
            return PI / ((PI * z).sin() * lanczos(1.0 - z));
        }
        let z = z - 1.0;
        let mut a = C64::new(P[0], 0.0);
        for (i, p) in P.iter().enumerate().skip(1) {
            a += p / (z + i as f64);
        }
        let t = z + 7.5;
        (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * a
    }

    #[test]
    fn matches_reference_values() {
        let q = gamma(C64::new(0.25, 0.0));
        assert!((q.re - 3.625_609_908_221_908).abs() < 1e-14 * q.re);
        let h = gamma(C64::new(0.5, 0.0));
        assert!((h.re - PI.sqrt()).abs() < 1e-14);
        let g = gamma(C64::new(-0.5, 0.0));
        assert!((g.re + 2.0 * PI.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn agrees_with_lanczos() {
        for &(re, im) in &[
            (0.3, 0.2),
            (1.7, -2.1),
            (-2.4, 0.6),
            (0.5, 3.0),
            (4.2, 0.0),
            (-0.3, -0.8),
        ] {
            let z = C64::new(re, im);
            let a = gamma(z);
            let b = lanczos(z);
            assert!((a - b).norm() / b.norm() < 5e-13, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn modulus_on_line_one() {
        // |Γ(1+it)|² = πt / sinh(πt)
        for &t in &[0.1, 0.306, 1.0, 2.5] {
            let g = gamma(C64::new(1.0, t));
            let want = PI * t / (PI * t).sinh();
            assert!((g.norm_sqr() - want).abs() < 2e-14 * want);
        }
    }

    #[test]
    fn ln_gamma_branch_is_continuous() {
        let mut prev = arg_gamma_one_plus_it(0.0);
        for i in 1..2000 {
            let cur = arg_gamma_one_plus_it(i as f64 * 0.01);
            assert!((cur - prev).abs() < 0.05);
            prev = cur;
        }
        // Im ln Γ(1 + 20i) from a 20-digit evaluation
        assert!((arg_gamma_one_plus_it(20.0) - 40.695_876_620_339_896).abs() < 1e-12);
    }

    #[test]
    fn rgamma_vanishes_at_poles() {
        assert_eq!(rgamma(C64::new(-3.0, 0.0)), C64::new(0.0, 0.0));
        let z = C64::new(-2.5, 0.1);
        assert!((rgamma(z) * gamma(z) - 1.0).norm() < 1e-13);
    }

    #[test]
    fn bessel_ratio_large_argument() {
        // 25-digit references
        assert!((bessel_k1_over_k0(40.0) - 1.012_423_755_560_572_1).abs() < 1e-15);
        assert!((bessel_k1_over_k0(80.0) - 1.006_230_708_242_380_8).abs() < 1e-15);
        for (z, k0_ref, k1_ref, tol) in [
            (10.0, 1.778_006_231_616_765_2e-5, 1.864_877_345_382_558_5e-5, 1e-8),
            (64.0, 2.507_733_605_169_036_6e-29, 2.527_249_911_502_212_7e-29, 1e-14),
        ] {
            let (k0, k1) = bessel_k0_k1(z);
            assert!((k0 / k0_ref - 1.0).abs() < tol, "{z}");
            assert!((k1 / k1_ref - 1.0).abs() < tol, "{z}");
        }
    }
}
