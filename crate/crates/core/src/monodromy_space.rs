//! The monodromy surface `{(s, b1, b2) : b1^2 + b2^2 + s b1 b2 = 1}`.
//!
//! A point encodes the Stokes parameter `s` and the connection matrix
//! `B = [[b1, b2], [-b2, b1 + s b2]]`, so the shape of `B` is structural and
//! only `det B = 1` has to be checked.

use crate::error::{Error, Result};
use crate::{AXIS_TOL, C64};
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyPoint {
    pub s: C64,
    pub b1: C64,
    pub b2: C64,
}

impl MonodromyPoint {
    /// Unchecked constructor; use [`make_point`] for validated input.
    pub const fn new_unchecked(s: C64, b1: C64, b2: C64) -> Self {
        Self { s, b1, b2 }
    }

    /// `|b1^2 + b2^2 + s b1 b2 − 1|`
    pub fn residual(&self) -> f64 {
        (self.b1 * self.b1 + self.b2 * self.b2 + self.s * self.b1 * self.b2 - 1.0).norm()
    }

    /// `b5 = b1 + s b2 / 2`
    pub fn b5(&self) -> C64 {
        self.b1 + self.s * self.b2 * 0.5
    }

    /// `b6 = i b2`
    pub fn b6(&self) -> C64 {
        I * self.b2
    }

    /// Build from the real-form coordinates `(s, b5, b6)`.
    pub fn from_real_form(s: f64, b5: f64, b6: f64, tol: f64) -> Result<Self> {
        let s = C64::new(s, 0.0);
        let b2 = -I * b6;
        make_point(s, b5 - s * b2 * 0.5, b2, tol)
    }

    pub fn matrix(&self) -> Matrix2<C64> {
        Matrix2::new(self.b1, self.b2, -self.b2, self.b1 + self.s * self.b2)
    }

    pub fn identity(s: C64) -> Self {
        Self::new_unchecked(s, C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    /// True when `B = ±I` within `tol`.
    pub fn is_scalar(&self, tol: f64) -> bool {
        self.b2.norm() <= tol && ((self.b1 - 1.0).norm() <= tol || (self.b1 + 1.0).norm() <= tol)
    }

    /// Project a raw 2×2 matrix onto the connection-matrix shape and
    /// renormalise the determinant. Returns the point and the projection
    /// distance.
    pub fn from_matrix(s: C64, m: &Matrix2<C64>) -> (Self, f64) {
        let b2 = (m[(0, 1)] - m[(1, 0)]) * 0.5;
        let b1 = (m[(0, 0)] + m[(1, 1)] - s * b2) * 0.5;
        let shape = Matrix2::new(b1, b2, -b2, b1 + s * b2);
        let mut dist = (m - shape).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let det = b1 * b1 + b2 * b2 + s * b1 * b2;
        dist = dist.max((det - 1.0).norm());
        let scale = det.sqrt();
        (Self::new_unchecked(s, b1 / scale, b2 / scale), dist)
    }
}

/// Validated constructor.
pub fn make_point(s: C64, b1: C64, b2: C64, tol: f64) -> Result<MonodromyPoint> {
    let p = MonodromyPoint { s, b1, b2 };
    let residual = p.residual();
    if !(residual <= tol) {
        return Err(Error::ConstraintViolation { residual, tol });
    }
    Ok(p)
}

/// The branch of `sqrt(s^2/4 − 1)` with argument in `[0, π)`; zero at `s = ±2`.
pub fn sqrt_branch(s: C64) -> C64 {
    if is_jordan(s) {
        return C64::new(0.0, 0.0);
    }
    let w = (s * s * 0.25 - 1.0).sqrt();
    if w.im < 0.0 || (w.im == 0.0 && w.re < 0.0) {
        -w
    } else {
        w
    }
}

pub(crate) fn is_real(z: C64) -> bool {
    z.im.abs() <= AXIS_TOL * z.re.abs().max(1.0)
}

pub(crate) fn is_jordan(s: C64) -> bool {
    is_real(s) && (s.re.abs() - 2.0).abs() <= AXIS_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralData {
    pub s: C64,
    pub sqrt_disc: C64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    pub alpha_plus: C64,
    pub alpha_minus: C64,
    /// `None` at `s = ±2`
    pub v_plus: Option<[C64; 2]>,
    pub v_minus: Option<[C64; 2]>,
    pub t_ni: Option<f64>,
    pub jordan_flag: bool,
}

pub fn spectral(s: C64) -> SpectralData {
    let w = sqrt_branch(s);
    let jordan = is_jordan(s);
    let base = 1.0 - s * s * 0.5;
    let (lp, lm) = if jordan {
        (C64::new(-1.0, 0.0), C64::new(-1.0, 0.0))
    } else {
        (base + s * w, base - s * w)
    };
    let t_ni = if (lm.norm() - 1.0).abs() > AXIS_TOL {
        Some(lm.norm().ln() / (2.0 * PI))
    } else {
        None
    };
    let alpha_minus = if jordan {
        C64::new(0.5 * s.re.signum(), 0.0)
    } else if is_real(s) && s.re.abs() > 2.0 {
        C64::new(0.5 * s.re.signum(), lm.norm().ln() / (2.0 * PI))
    } else {
        I * lm.ln() / (2.0 * PI)
    };
    let (v_plus, v_minus) = if jordan {
        (None, None)
    } else {
        let one = C64::new(1.0, 0.0);
        (Some([one, s * 0.5 - w]), Some([one, s * 0.5 + w]))
    };
    SpectralData {
        s,
        sqrt_disc: w,
        lambda_plus: lp,
        lambda_minus: lm,
        alpha_plus: -alpha_minus,
        alpha_minus,
        v_plus,
        v_minus,
        t_ni,
        jordan_flag: jordan,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub b_plus: Option<C64>,
    pub b_minus: Option<C64>,
    /// `b1 + s b2 / 2`, equal to `±1` at `s = ±2`.
    pub b_tilde1: C64,
    pub delta_ni: Option<C64>,
}

pub fn eigen_data(p: &MonodromyPoint) -> EigenData {
    let b5 = p.b5();
    if is_jordan(p.s) {
        return EigenData {
            b_plus: None,
            b_minus: None,
            b_tilde1: b5,
            delta_ni: None,
        };
    }
    let w = sqrt_branch(p.s);
    let bm = b5 + w * p.b2;
    let bp = b5 - w * p.b2;
    let delta = if bm.norm() > 0.0 {
        let arg = bm.arg().rem_euclid(2.0 * PI);
        let arg = if arg >= 2.0 * PI { 0.0 } else { arg };
        Some(C64::new(arg, -bm.norm().ln()))
    } else {
        None
    };
    EigenData {
        b_plus: Some(bp),
        b_minus: Some(bm),
        b_tilde1: b5,
        delta_ni: delta,
    }
}

/// `(Mon0(s), T(s))` with `T^2 = −Mon0`.
pub fn structure_matrices(s: C64) -> (Matrix2<C64>, Matrix2<C64>) {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let mon0 = Matrix2::new(one, -s, s, one - s * s);
    let t = Matrix2::new(zero, one, -one, s);
    (mon0, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symmetry {
    R1,
    R2,
    R3,
    R4,
    R5,
    M1,
    M1Inv,
}

impl Symmetry {
    pub const ALL: [Symmetry; 7] = [
        Symmetry::R1,
        Symmetry::R2,
        Symmetry::R3,
        Symmetry::R4,
        Symmetry::R5,
        Symmetry::M1,
        Symmetry::M1Inv,
    ];
}

impl std::str::FromStr for Symmetry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "r1" => Symmetry::R1,
            "r2" => Symmetry::R2,
            "r3" => Symmetry::R3,
            "r4" => Symmetry::R4,
            "r5" => Symmetry::R5,
            "m1" => Symmetry::M1,
            "m1inv" | "m1_inv" | "m1-inv" => Symmetry::M1Inv,
            other => return Err(Error::InvalidArgument(format!("unknown symmetry {other}"))),
        })
    }
}

/// Action on `(ξ, s, B)`. The formulas are written so that `R4∘R4` and
/// `R2∘M1Inv` evaluate the same floating-point expressions for `B`.
pub fn apply_symmetry(sym: Symmetry, xi: C64, p: &MonodromyPoint) -> (C64, MonodromyPoint) {
    let MonodromyPoint { s, b1, b2 } = *p;
    let q = MonodromyPoint::new_unchecked;
    match sym {
        Symmetry::R1 => (xi, q(-s, b1, -b2)),
        Symmetry::R2 => (xi, q(s, -b1, -b2)),
        Symmetry::R3 => (xi, q(-s, -b1, b2)),
        // T(s) B
        Symmetry::R4 => (xi + I * (PI / 2.0), q(s, -b2, b1 + s * b2)),
        // conj(B)^-1
        Symmetry::R5 => (xi.conj(), q(s.conj(), (b1 + s * b2).conj(), -b2.conj())),
        // Mon0(s)^-1 B
        Symmetry::M1 => (xi - I * PI, q(s, (b1 - s * b2) - s * (s * b1), b2 + s * b1)),
        // Mon0(s) B
        Symmetry::M1Inv => {
            let c = b1 + s * b2;
            (xi + I * PI, q(s, c, b2 - s * c))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuotientInvariants {
    pub y1: C64,
    pub y2: C64,
    pub y3: C64,
    pub residual: f64,
}

/// `(s^2, b1^2, b2^2)` on the cubic `y1 y2 y3 = (y2 + y3 − 1)^2`.
pub fn quotient_invariants(p: &MonodromyPoint) -> QuotientInvariants {
    let y1 = p.s * p.s;
    let y2 = p.b1 * p.b1;
    let y3 = p.b2 * p.b2;
    let r = y2 + y3 - 1.0;
    QuotientInvariants {
        y1,
        y2,
        y3,
        residual: (y1 * y2 * y3 - r * r).norm(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RealityClass {
    RealLine,
    UnitCircle,
    PositiveImaginary,
    None,
}

/// Every real structure whose fixed locus contains `p`.
pub fn memberships(p: &MonodromyPoint, tol: f64) -> Vec<RealityClass> {
    let b5 = p.b5();
    let mut out = Vec::new();
    if p.s.im.abs() <= tol && b5.im.abs() <= tol && p.b2.re.abs() <= tol {
        out.push(RealityClass::RealLine);
    }
    if p.s.re.abs() <= tol && b5.im.abs() <= tol && p.b2.im.abs() <= tol {
        out.push(RealityClass::UnitCircle);
    }
    if p.s.im.abs() <= tol && p.s.re.abs() < 2.0 && b5.re.abs() <= tol && p.b2.im.abs() <= tol && p.b2.re > 1.0 {
        out.push(RealityClass::PositiveImaginary);
    }
    out
}

pub fn reality_class(p: &MonodromyPoint, tol: f64) -> RealityClass {
    memberships(p, tol).first().copied().unwrap_or(RealityClass::None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn make_point_examples() {
        assert!(make_point(c(0., 0.), c(1., 0.), c(0., 0.), 1e-12).is_ok());
        assert!(make_point(c(1., 0.), c(0., 0.), c(1., 0.), 1e-12).is_ok());
        match make_point(c(2., 0.), c(-1., 0.), c(1., 0.), 1e-12) {
            Err(Error::ConstraintViolation { residual, .. }) => {
                assert!((residual - 1.0).abs() < 1e-15)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sqrt_branch_examples() {
        assert_eq!(sqrt_branch(c(0., 0.)), c(0., 1.));
        assert_eq!(sqrt_branch(c(2., 0.)), c(0., 0.));
        assert_eq!(sqrt_branch(c(-2., 0.)), c(0., 0.));
        assert!((sqrt_branch(c(3., 0.)) - c(1.25f64.sqrt(), 0.)).norm() < 1e-15);
        assert!((sqrt_branch(c(-3., 0.)) - c(1.25f64.sqrt(), 0.)).norm() < 1e-15);
    }

    #[test]
    fn spectral_examples() {
        let sp = spectral(c(0., 0.));
        assert_eq!(sp.lambda_plus, c(1., 0.));
        assert_eq!(sp.alpha_minus.norm(), 0.0);
        assert_eq!(sp.v_plus.unwrap()[1], c(0., -1.));
        assert_eq!(sp.v_minus.unwrap()[1], c(0., 1.));

        let sp = spectral(c(2., 0.));
        assert!(sp.jordan_flag);
        assert_eq!(sp.alpha_plus, c(-0.5, 0.));
        assert_eq!(sp.alpha_minus, c(0.5, 0.));
        assert_eq!(sp.lambda_minus, c(-1., 0.));

        // oracle values from a 30-digit evaluation
        let sp = spectral(c(3., 0.));
        assert!((sp.lambda_minus.re + 6.854_101_966_249_685).abs() < 1e-12);
        assert!((sp.lambda_plus.re + 0.145_898_033_750_315_4).abs() < 1e-12);
        assert!((sp.t_ni.unwrap() - 0.306_348_962_530_033_1).abs() < 1e-12);
        assert!((sp.alpha_minus - c(0.5, 0.306_348_962_530_033_1)).norm() < 1e-12);
    }

    #[test]
    fn eigen_examples() {
        let e = eigen_data(&MonodromyPoint::identity(c(0., 0.)));
        assert_eq!(e.b_minus, Some(c(1., 0.)));
        assert_eq!(e.delta_ni, Some(c(0., 0.)));

        let p = make_point(c(0., 0.), c(0., 0.), c(1., 0.), 1e-12).unwrap();
        let e = eigen_data(&p);
        assert_eq!(e.b_minus, Some(c(0., 1.)));
        assert_eq!(e.b_plus, Some(c(0., -1.)));

        let b6 = 1.0 / 1.25f64.sqrt();
        let p = MonodromyPoint::from_real_form(3.0, 0.0, b6, 1e-12).unwrap();
        let e = eigen_data(&p);
        assert!((e.b_minus.unwrap() - c(0., -1.)).norm() < 1e-12);
        assert!((e.delta_ni.unwrap() - c(1.5 * PI, 0.)).norm() < 1e-12);
        assert!((p.b1 - c(0., 1.341_640_786_499_874)).norm() < 1e-12);
    }

    #[test]
    fn structure_examples() {
        let (m, t) = structure_matrices(c(1., 0.));
        assert_eq!(m, Matrix2::new(c(1., 0.), c(-1., 0.), c(1., 0.), c(0., 0.)));
        assert_eq!(t * t, -m);
    }

    #[test]
    fn symmetry_examples() {
        let xi = c(0.3, 0.1);
        let id = MonodromyPoint::identity(c(0., 0.));
        assert_eq!(apply_symmetry(Symmetry::R1, xi, &id).1, id);
        let (x1, p1) = apply_symmetry(Symmetry::M1, xi, &id);
        assert_eq!(p1, id);
        assert_eq!(x1, xi - I * PI);
        let (x4, p4) = apply_symmetry(Symmetry::R4, xi, &id);
        assert_eq!(x4, xi + I * PI / 2.0);
        assert_eq!(p4.b1, c(0., 0.));
        assert_eq!(p4.b2, c(1., 0.));
    }

    #[test]
    fn quotient_examples() {
        let p = make_point(c(1., 0.), c(0., 0.), c(1., 0.), 1e-12).unwrap();
        let q = quotient_invariants(&p);
        assert_eq!((q.y1, q.y2, q.y3), (c(1., 0.), c(0., 0.), c(1., 0.)));
        assert_eq!(q.residual, 0.0);
    }

    #[test]
    fn reality_examples() {
        let id = MonodromyPoint::identity(c(0., 0.));
        assert_eq!(reality_class(&id, 1e-9), RealityClass::RealLine);
        assert_eq!(
            memberships(&id, 1e-9),
            vec![RealityClass::RealLine, RealityClass::UnitCircle]
        );
        let u = make_point(c(0., 1.), c(0., -0.447_214), c(0.894_427, 0.), 1e-5).unwrap();
        assert_eq!(reality_class(&u, 1e-5), RealityClass::UnitCircle);
        let pi = make_point(c(0., 0.), c(0., 3f64.sqrt()), c(2., 0.), 1e-12).unwrap();
        assert_eq!(reality_class(&pi, 1e-9), RealityClass::PositiveImaginary);
        let j = make_point(c(0., 0.), c(0., 0.), c(1., 0.), 1e-12).unwrap();
        assert_eq!(reality_class(&j, 1e-9), RealityClass::UnitCircle);
    }
}
