//! Dormand–Prince 5(4) for complex state vectors with Hairer's continuous
//! extension of order 4.
//!
//! The integrator works on `[C64; N]` and is agnostic to the sign of the step.

use crate::error::{Error, Result};
use crate::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Error-control settings for [`Dopri5`].
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

/// An accepted step together with the data for dense output on `[t0, t1]`.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [C64; N],
    pub y1: [C64; N],
    /// Derivative at `t1` (FSAL stage), reusable for the next step.
    pub f1: [C64; N],
    /// Scaled error norm of the accepted step.
    pub err: f64,
    /// Proposal for the next step size.
    pub h_next: f64,
    r: [[C64; N]; 5],
}

impl<const N: usize> Step<N> {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Continuous extension at `t`, valid for `t` in `[t0, t1]`.
    pub fn dense(&self, t: f64) -> [C64; N] {
        let th = (t - self.t0) / self.h();
        let th1 = 1.0 - th;
        let mut out = [C64::new(0.0, 0.0); N];
        for i in 0..N {
            let r = &self.r;
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

fn axpy<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn all_finite<const N: usize>(y: &[C64; N]) -> bool {
    y.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

impl Dopri5 {
    pub fn with_tol(atol: f64, rtol: f64) -> Self {
        Self {
            atol,
            rtol,
            ..Self::default()
        }
    }

    /// One trial step of size `h` from `(t, y)` with known derivative `k1`.
    /// Returns `(y1, k7, err_norm, dense coefficients)`.
    #[allow(clippy::type_complexity)]
    fn trial<F, const N: usize>(
        &self,
        f: &mut F,
        t: f64,
        y: &[C64; N],
        k1: &[C64; N],
        h: f64,
    ) -> ([C64; N], [C64; N], f64, [[C64; N]; 5])
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
    {
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.atol + self.rtol * y[i].norm().max(y1[i].norm());
            err += (e.norm() / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();

        let mut r = [[C64::new(0.0, 0.0); N]; 5];
        for i in 0..N {
            let dy = y1[i] - y[i];
            let bspl = h * k1[i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        (y1, k7, err, r)
    }

    /// A single step of size `h` without error control.
    pub fn single_step<F, const N: usize>(&self, f: &mut F, t: f64, y: &[C64; N], h: f64) -> [C64; N]
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
    {
        let k1 = f(t, y);
        self.trial(f, t, y, &k1, h).0
    }

    /// Attempt steps from `(t, y)` towards `t_end`, starting with `h_try`,
    /// shrinking until one is accepted. The step never overshoots `t_end`.
    pub fn advance<F, const N: usize>(
        &self,
        f: &mut F,
        t: f64,
        y: &[C64; N],
        k1: &[C64; N],
        h_try: f64,
        t_end: f64,
    ) -> Result<Step<N>>
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
    {
        let dir = (t_end - t).signum();
        let span = (t_end - t).abs();
        let mut h = h_try.abs().min(self.h_max).min(span) * dir;
        loop {
            if h.abs() < self.h_min.max(1e-15 * t.abs()) && h.abs() < span {
                return Err(Error::StepFailure { x: t, h });
            }
            let (y1, k7, err, r) = self.trial(f, t, y, k1, h);
            if err.is_finite() && all_finite(&y1) && err <= 1.0 {
                let fac = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                let t1 = if (t + h - t_end).abs() <= 1e-14 * t_end.abs().max(1.0) {
                    t_end
                } else {
                    t + h
                };
                return Ok(Step {
                    t0: t,
                    t1,
                    y0: *y,
                    y1,
                    f1: k7,
                    err,
                    h_next: (h * fac).abs().min(self.h_max),
                    r,
                });
            }
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.1
            };
            h *= fac;
        }
    }

    /// Standard starting step heuristic (Hairer, Nørsett & Wanner II.4).
    pub fn initial_step<F, const N: usize>(&self, f: &mut F, t: f64, y: &[C64; N], k1: &[C64; N], dir: f64) -> f64
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
    {
        let norm = |v: &[C64; N]| {
            let mut s = 0.0;
            for i in 0..N {
                let sc = self.atol + self.rtol * y[i].norm();
                s += (v[i].norm() / sc).powi(2);
            }
            (s / N as f64).sqrt()
        };
        let d0 = norm(y);
        let d1 = norm(k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 }.min(self.h_max);
        let y1 = axpy(y, h0 * dir, &[(1.0, k1)]);
        let k2 = f(t + h0 * dir, &y1);
        let mut diff = [C64::new(0.0, 0.0); N];
        for i in 0..N {
            diff[i] = k2[i] - k1[i];
        }
        let d2 = norm(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Integrate from `t0` to `t1`, calling `on_step` after each accepted step.
    pub fn integrate<F, G, const N: usize>(
        &self,
        mut f: F,
        t0: f64,
        y0: [C64; N],
        t1: f64,
        mut on_step: G,
    ) -> Result<[C64; N]>
    where
        F: FnMut(f64, &[C64; N]) -> [C64; N],
        G: FnMut(&Step<N>),
    {
        if t0 == t1 {
            return Ok(y0);
        }
        let dir = (t1 - t0).signum();
        let solver = Self {
            h_max: self.h_max.min((t1 - t0).abs()),
            ..*self
        };
        let mut t = t0;
        let mut y = y0;
        let mut k = f(t, &y);
        let mut h = solver.initial_step(&mut f, t, &y, &k, dir);
        for _ in 0..self.max_steps {
            let step = solver.advance(&mut f, t, &y, &k, h, t1)?;
            on_step(&step);
            t = step.t1;
            y = step.y1;
            k = step.f1;
            h = step.h_next;
            if t == t1 {
                return Ok(y);
            }
        }
        Err(Error::StepFailure { x: t, h })
    }
}
