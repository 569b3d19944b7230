//! Stokes parameter and connection matrix of the linear system attached to a
//! regular point `(x, f0, g0)` of a solution.
//!
//! Flat sections have coordinates `Φ` in the basis `σ` with
//! `z ∂z Φ = −M(z) Φ`, where
//!
//! ```text
//! M(z) = (x/z) J − g0 σ3 − x z [[0, f0^-2], [f0^2, 0]],   J = [[0, 1], [1, 0]].
//! ```
//!
//! Both poles are irregular of Poincaré rank one with exponents `±x`.
//! Canonical frames are
//!
//! ```text
//! Φ±0(z) = C^-1 H0(z)   diag(e^{x/z}, e^{−x/z})          near 0,
//! Φ±∞(z) = diag(f0^-1, f0) C^-1 H∞(1/z) diag(e^{xz}, e^{−xz})   near ∞,
//! ```
//!
//! with `C = [[1, 1], [−i, i]]` and `H(0) = I`. The `+` frames at 0 and the `−`
//! frames at ∞ are evaluated on the ray `arg z = π/2`, the others on
//! `arg z = −π/2`. On these rays every exponential factor is unimodular, so
//! the truncated series can be evaluated without overflow, and the frames are
//! carried to `|z| = 1` and compared there:
//!
//! ```text
//! Φ−0 = Φ+0 S^a   (left half plane, upper triangular, S^a_12 = s)
//! Φ−0 = Φ+0 S^b   (right half plane, lower triangular)
//! Φ−∞ = Φ+0 B     (along the positive imaginary axis)
//! ```

use crate::asymptotics::SeedOptions;
use crate::error::{Error, Result};
use crate::flow::{self, chart_convert, ChartState, FlowOptions, Sampling};
use crate::monodromy_space::{structure_matrices, MonodromyPoint};
use crate::ode::Dopri5;
use crate::C64;
use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

type M2 = Matrix2<C64>;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn cmat() -> M2 {
    M2::new(c(1.0), c(1.0), -I, I)
}

fn cmat_inv() -> M2 {
    M2::new(c(0.5), I * 0.5, c(0.5), -I * 0.5)
}

fn sigma3() -> M2 {
    M2::new(c(1.0), c(0.0), c(0.0), c(-1.0))
}

fn max_abs(m: &M2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn to_array(m: &M2) -> [[C64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub x: f64,
    pub f0: C64,
    pub g0: C64,
}

impl LinearSystem {
    /// `M(z)`
    pub fn matrix(&self, z: C64) -> M2 {
        let f2 = self.f0 * self.f0;
        let a = self.x / z;
        let b = self.x * z;
        M2::new(-self.g0, a - b / f2, a - b * f2, self.g0)
    }

    pub fn trace_at(&self, z: C64) -> C64 {
        self.matrix(z).trace()
    }
}

/// The linear system of a regular state; other charts are converted to chart 0.
pub fn linear_system(st: &ChartState) -> Result<LinearSystem> {
    if !(st.x > 0.0) {
        return Err(Error::InvalidArgument("x must be positive".into()));
    }
    let st0 = chart_convert(st, 0)?;
    let (f0, g0) = st0.to_fg().ok_or(Error::OnSingularLocus)?;
    if f0.norm() == 0.0 || !f0.norm().is_finite() || !g0.norm().is_finite() {
        return Err(Error::OnSingularLocus);
    }
    Ok(LinearSystem { x: st.x, f0, g0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Location {
    Zero,
    Infinity,
}

/// Coefficients `h_k` of the formal gauge `H(w) = Σ h_k w^k`, `h_0 = I`, with
/// `w = z` at 0 and `w = 1/z` at ∞, in the basis where the polar part is
/// `(x/w) σ3`.
///
/// Order by order, `x [σ3, h_{k+1}] = −(k + N0) h_k − N1 h_{k−1}` fixes the
/// off-diagonal part of `h_{k+1}`, and the diagonal part of the next order
/// fixes its diagonal.
pub fn formal_gauge_series(sys: &LinearSystem, loc: Location, order: usize) -> Vec<M2> {
    let cm = cmat();
    let ci = cmat_inv();
    let f2 = sys.f0 * sys.f0;
    let n0 = cm * sigma3() * ci * (-sys.g0);
    let n1 = match loc {
        Location::Zero => cm * M2::new(c(0.0), 1.0 / f2, f2, c(0.0)) * ci * c(-sys.x),
        Location::Infinity => cm * M2::new(c(0.0), f2, 1.0 / f2, c(0.0)) * ci * c(-sys.x),
    };
    let n0 = match loc {
        Location::Zero => n0,
        Location::Infinity => -n0,
    };
    let x = sys.x;
    let mut h: Vec<M2> = vec![M2::identity()];
    for k in 0..order {
        let kf = k as f64;
        let prev = if k == 0 { M2::zeros() } else { h[k - 1] };
        let rhs = -(h[k] * c(kf) + n0 * h[k]) - n1 * prev;
        let mut next = M2::zeros();
        next[(0, 1)] = rhs[(0, 1)] / (2.0 * x);
        next[(1, 0)] = -rhs[(1, 0)] / (2.0 * x);
        // diagonal: (k+1) d(h_{k+1}) = −d(N0 h_{k+1}) − d(N1 h_k)
        let a = n0 * next + n1 * h[k];
        next[(0, 0)] = -a[(0, 0)] / (kf + 1.0);
        next[(1, 1)] = -a[(1, 1)] / (kf + 1.0);
        h.push(next);
    }
    h
}

fn eval_series(h: &[M2], w: C64) -> M2 {
    let mut acc = M2::zeros();
    for hk in h.iter().rev() {
        acc = acc * w + hk;
    }
    acc
}

fn frame_at(sys: &LinearSystem, loc: Location, h: &[M2], z: C64) -> M2 {
    match loc {
        Location::Zero => {
            let e = sys.x / z;
            cmat_inv() * eval_series(h, z) * M2::new(e.exp(), c(0.0), c(0.0), (-e).exp())
        }
        Location::Infinity => {
            let e = sys.x * z;
            let df = M2::new(1.0 / sys.f0, c(0.0), c(0.0), sys.f0);
            df * cmat_inv() * eval_series(h, 1.0 / z) * M2::new(e.exp(), c(0.0), c(0.0), (-e).exp())
        }
    }
}

/// Sector frame of a canonical flat basis, evaluated at `base_z` on the
/// central ray of its sector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorFrame {
    pub location: Location,
    pub sign: i8,
    pub base_z: C64,
    pub frame: M2,
}

pub fn sector_frame(sys: &LinearSystem, loc: Location, sign: i8, r: f64, order: usize) -> SectorFrame {
    let h = formal_gauge_series(sys, loc, order);
    // + at 0 and − at ∞ live on the positive imaginary axis
    let up = matches!((loc, sign >= 0), (Location::Zero, true) | (Location::Infinity, false));
    let base_z = if up { I * r } else { -I * r };
    SectorFrame {
        location: loc,
        sign,
        base_z,
        frame: frame_at(sys, loc, &h, base_z),
    }
}

enum Segment {
    /// `z = ρ e^{iθ}` with ρ from `r0` to `r1`
    Radial { theta: f64, r0: f64, r1: f64 },
    /// `z = r e^{iθ}` with θ from `th0` to `th1`
    Arc { r: f64, th0: f64, th1: f64 },
}

fn flat(m: &M2) -> [C64; 4] {
    [m[(0, 0)], m[(1, 0)], m[(0, 1)], m[(1, 1)]]
}

fn unflat(y: &[C64; 4]) -> M2 {
    M2::new(y[0], y[2], y[1], y[3])
}

/// Propagator `U` with `Φ(end) = U Φ(start)` along the segment.
fn propagator(sys: &LinearSystem, seg: &Segment, tol: f64) -> Result<M2> {
    let solver = Dopri5 {
        atol: tol * 1e-3,
        rtol: tol,
        h_min: 1e-14,
        h_max: 0.05,
        max_steps: 2_000_000,
    };
    let (t0, t1) = match *seg {
        Segment::Radial { r0, r1, .. } => (r0.ln(), r1.ln()),
        Segment::Arc { th0, th1, .. } => (th0, th1),
    };
    let rhs = |t: f64, y: &[C64; 4]| {
        let (z, dz_factor) = match *seg {
            Segment::Radial { theta, .. } => (C64::from_polar(t.exp(), theta), c(1.0)),
            Segment::Arc { r, .. } => (C64::from_polar(r, t), I),
        };
        let m = sys.matrix(z);
        flat(&(-(m * unflat(y)) * dz_factor))
    };
    let y = solver
        .integrate(rhs, t0, flat(&M2::identity()), t1, |_| {})
        .map_err(|e| match e {
            Error::StepFailure { x, .. } => Error::TransportOverflow { r: x },
            other => other,
        })?;
    let u = unflat(&y);
    if !u.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::TransportOverflow { r: t1 });
    }
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesOptions {
    /// Radius of the frame base point at 0; `None` picks
    /// `0.05 min(x, 1) / max(|f0|, 1/|f0|)`. The base point at ∞ uses `1/r0`.
    pub r0: Option<f64>,
    /// Truncation order of the formal series.
    pub order: usize,
    /// Relative tolerance of the transport integrations.
    pub transport_tol: f64,
    /// Maximum allowed change of `(s, B)` when `r0` is halved; `None` skips the check.
    pub stability_tol: Option<f64>,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            r0: None,
            order: 16,
            transport_tol: 1e-12,
            stability_tol: Some(1e-6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesOutput {
    pub s: C64,
    pub point: MonodromyPoint,
    /// `β = −2 log(2x)`, so that `e^{−β} = 4x^2`.
    pub beta: f64,
    pub residual_structure: f64,
    pub residual_transport: f64,
    pub radii_used: (f64, f64),
    pub stokes_a: [[C64; 2]; 2],
    pub stokes_b: [[C64; 2]; 2],
    pub b_raw: [[C64; 2]; 2],
    /// `Φ+0` continued once around 0, in its own basis; equals `Mon0(s)`.
    pub loop_monodromy: [[C64; 2]; 2],
    pub det_b_error: f64,
    pub transpose_error: f64,
    pub commutator_error: f64,
}

struct Raw {
    sa: M2,
    sb: M2,
    b: M2,
    lp: M2,
}

fn raw_data(sys: &LinearSystem, r0: f64, opts: &StokesOptions) -> Result<Raw> {
    let tol = opts.transport_tol;
    let n = opts.order;
    let p0 = sector_frame(sys, Location::Zero, 1, r0, n).frame;
    let m0 = sector_frame(sys, Location::Zero, -1, r0, n).frame;
    let mi = sector_frame(sys, Location::Infinity, -1, 1.0 / r0, n).frame;

    let up_in = propagator(
        sys,
        &Segment::Radial {
            theta: FRAC_PI_2,
            r0,
            r1: 1.0,
        },
        tol,
    )?;
    let down_in = propagator(
        sys,
        &Segment::Radial {
            theta: -FRAC_PI_2,
            r0,
            r1: 1.0,
        },
        tol,
    )?;
    let up_out = propagator(
        sys,
        &Segment::Radial {
            theta: FRAC_PI_2,
            r0: 1.0 / r0,
            r1: 1.0,
        },
        tol,
    )?;
    let p0 = up_in * p0;
    let m0 = down_in * m0;
    let mi = up_out * mi;

    let arc = |th0: f64, th1: f64| propagator(sys, &Segment::Arc { r: 1.0, th0, th1 }, tol);
    let left_p = arc(FRAC_PI_2, PI)? * p0;
    let left_m = arc(-FRAC_PI_2, -PI)? * m0;
    let right_p = arc(FRAC_PI_2, 0.0)? * p0;
    let right_m = arc(-FRAC_PI_2, 0.0)? * m0;
    let around = arc(FRAC_PI_2, FRAC_PI_2 + 2.0 * PI)? * p0;

    let inv = |m: &M2| {
        m.try_inverse()
            .ok_or_else(|| Error::FrameDegenerate("singular frame".into()))
    };
    let p0_inv = inv(&p0)?;
    Ok(Raw {
        sa: inv(&left_p)? * left_m,
        sb: inv(&right_p)? * right_m,
        b: p0_inv * mi,
        lp: p0_inv * around,
    })
}

fn default_r0(sys: &LinearSystem) -> f64 {
    let fm = sys.f0.norm().max(1.0 / sys.f0.norm());
    0.05 * sys.x.min(1.0) / fm
}

/// Solve the direct monodromy problem for `sys`.
pub fn stokes_data(sys: &LinearSystem, opts: &StokesOptions) -> Result<StokesOutput> {
    let r0 = opts.r0.unwrap_or_else(|| default_r0(sys));
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(Error::InvalidArgument(format!("frame radius {r0} outside (0, 1)")));
    }
    let raw = raw_data(sys, r0, opts)?;
    let s = raw.sa[(0, 1)];
    let (point, dist) = MonodromyPoint::from_matrix(s, &raw.b);

    let (mon0, _) = structure_matrices(s);
    let det_b_error = (raw.b.determinant() - 1.0).norm();
    let transpose_error = max_abs(&(raw.sb - raw.sa.transpose()));
    let commutator_error = max_abs(&(raw.b * mon0 - mon0 * raw.b));
    let triangular = raw.sa[(1, 0)]
        .norm()
        .max((raw.sa[(0, 0)] - 1.0).norm())
        .max((raw.sa[(1, 1)] - 1.0).norm());
    let residual_structure = dist
        .max(det_b_error)
        .max(transpose_error)
        .max(commutator_error)
        .max(triangular);

    let mut residual_transport = max_abs(&(raw.lp - mon0));
    if let Some(stab) = opts.stability_tol {
        let half = raw_data(sys, 0.5 * r0, opts)?;
        let change = (half.sa[(0, 1)] - s).norm().max(max_abs(&(half.b - raw.b)));
        residual_transport = residual_transport.max(change);
        if change > stab {
            return Err(Error::AsymptoticMismatch { change });
        }
    }

    Ok(StokesOutput {
        s,
        point,
        beta: -2.0 * (2.0 * sys.x).ln(),
        residual_structure,
        residual_transport,
        radii_used: (r0, 1.0 / r0),
        stokes_a: to_array(&raw.sa),
        stokes_b: to_array(&raw.sb),
        b_raw: to_array(&raw.b),
        loop_monodromy: to_array(&raw.lp),
        det_b_error,
        transpose_error,
        commutator_error,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTripReport {
    pub s_err: f64,
    pub b_err: f64,
    pub recovered: StokesOutput,
    pub probe: ChartState,
}

/// Seed the solution of `p` at `x_seed`, flow to `x_probe`, and recover the
/// monodromy data there.
pub fn round_trip(
    p: &MonodromyPoint,
    x_seed: f64,
    x_probe: f64,
    seed: &SeedOptions,
    stokes: &StokesOptions,
) -> Result<RoundTripReport> {
    let st = crate::asymptotics::seed_state(p, x_seed, seed)?;
    let fl = FlowOptions {
        sampling: Sampling::None,
        ..seed.flow.clone()
    };
    let probe = flow::flow(&st, x_probe, &fl)?.final_state();
    let sys = linear_system(&probe)?;
    let recovered = stokes_data(&sys, stokes)?;
    let s_err = (recovered.s - p.s).norm();
    let b_err = max_abs(&(recovered.point.matrix() - p.matrix()));
    Ok(RoundTripReport {
        s_err,
        b_err,
        recovered,
        probe,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(x: f64, f0: C64, g0: C64) -> LinearSystem {
        LinearSystem { x, f0, g0 }
    }

    #[test]
    fn system_examples() {
        let s = sys(1.0, c(1.0), c(0.0));
        let z = C64::new(0.7, -0.2);
        let j = M2::new(c(0.0), c(1.0), c(1.0), c(0.0));
        let want = j / z - j * z;
        assert!(max_abs(&(s.matrix(z) - want)) < 1e-15);
        let s = sys(1.0, I, c(0.0));
        let want = j / z + j * z;
        assert!(max_abs(&(s.matrix(z) - want)) < 1e-15);
        assert_eq!(sys(0.3, C64::new(0.2, 1.1), C64::new(-0.4, 0.1)).trace_at(z), c(0.0));
    }

    #[test]
    fn series_solves_the_formal_equation() {
        let s = sys(0.8, C64::new(0.6, 0.3), C64::new(0.2, -0.5));
        for loc in [Location::Zero, Location::Infinity] {
            let h = formal_gauge_series(&s, loc, 10);
            // check z∂zΦ = −MΦ by central differences at a small point
            let w0 = C64::from_polar(0.01, 1.0);
            let z0 = match loc {
                Location::Zero => w0,
                Location::Infinity => 1.0 / w0,
            };
            let d = 1e-6;
            let phi = |z: C64| frame_at(&s, loc, &h, z);
            let deriv = (phi(z0 * (1.0 + d)) - phi(z0 * (1.0 - d))) / c(2.0 * d);
            let want = -(s.matrix(z0) * phi(z0));
            let scale = max_abs(&want);
            assert!(max_abs(&(deriv - want)) < 1e-7 * scale, "{loc:?}");
        }
    }

    #[test]
    fn constant_solutions() {
        let out = stokes_data(&sys(1.0, c(1.0), c(0.0)), &StokesOptions::default()).unwrap();
        assert!(out.s.norm() < 1e-6);
        assert!((out.point.b1 - 1.0).norm() < 1e-6 && out.point.b2.norm() < 1e-6);

        let out = stokes_data(&sys(1.0, I, c(0.0)), &StokesOptions::default()).unwrap();
        assert!(out.s.norm() < 1e-6);
        assert!(
            out.point.b1.norm() < 1e-4 && (out.point.b2 - 1.0).norm() < 1e-4,
            "{:?}",
            out.point
        );
    }
}
