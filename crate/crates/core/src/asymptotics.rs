//! Small-x behaviour of solutions in terms of their monodromy data.
//!
//! For `s` off the real rays `|s| >= 2` and `Re s >= 0` the two leading terms
//! are `κ01 (x/2)^{2α₋} b₋ + κ1,−1 (x/2)^{2−2α₋} / b₋`. Points with `Re s < 0`
//! and the negative real ray are evaluated through the R1 image, whose
//! solution is the reciprocal.

use crate::error::{Error, Result};
use crate::flow::{self, ChartState, EventKind, FlowOptions};
use crate::monodromy_space::{
    apply_symmetry, eigen_data, is_jordan, is_real, reality_class, spectral, MonodromyPoint, RealityClass, Symmetry,
};
use crate::special::{arg_gamma_one_plus_it, gamma, rgamma, EULER_GAMMA};
use crate::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AsymptoticCase {
    A,
    BPlus,
    BMinus,
    CPlus,
    CMinus,
}

pub fn asymptotic_case(s: C64) -> AsymptoticCase {
    if is_jordan(s) {
        if s.re > 0.0 {
            AsymptoticCase::CPlus
        } else {
            AsymptoticCase::CMinus
        }
    } else if is_real(s) && s.re > 2.0 {
        AsymptoticCase::BPlus
    } else if is_real(s) && s.re < -2.0 {
        AsymptoticCase::BMinus
    } else {
        AsymptoticCase::A
    }
}

/// `(κ01, κ1,−1) = (Γ(1/2 − α)/Γ(1/2 + α), Γ(α − 1/2)/Γ(3/2 − α))` at `α = α₋`.
pub fn kappa_constants(alpha_minus: C64) -> Result<(C64, C64)> {
    let n1 = 0.5 - alpha_minus;
    let n2 = alpha_minus - 0.5;
    for z in [n1, n2] {
        if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
            return Err(Error::GammaPole { z });
        }
    }
    let ratio = |n: C64, d: C64| {
        let r = rgamma(d);
        if r == C64::new(0.0, 0.0) {
            r
        } else {
            gamma(n) / gamma(d)
        }
    };
    let k01 = ratio(n1, 0.5 + alpha_minus);
    let k1m1 = ratio(n2, 1.5 - alpha_minus);
    Ok((k01, k1m1))
}

/// One term `coef · (x/2)^exponent · log(x/2)^log_power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: C64,
    pub exponent: C64,
    pub log_power: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expansion {
    pub case: AsymptoticCase,
    pub terms: Vec<Term>,
    /// When set, the solution is the reciprocal of the term sum.
    pub reciprocal: bool,
    pub valid_radius_hint: f64,
}

impl Expansion {
    /// Term sum `F` and `θF = x dF/dx` at `x` (principal branch of `log(x/2)`).
    pub fn sum_with_theta(&self, x: C64) -> (C64, C64) {
        let l = (x * 0.5).ln();
        let mut v = C64::new(0.0, 0.0);
        let mut dv = C64::new(0.0, 0.0);
        for t in &self.terms {
            let p = (t.exponent * l).exp();
            match t.log_power {
                0 => {
                    v += t.coef * p;
                    dv += t.coef * t.exponent * p;
                }
                _ => {
                    v += t.coef * p * l;
                    dv += t.coef * p * (t.exponent * l + 1.0);
                }
            }
        }
        (v, dv)
    }

    /// Value of `f` and of `g = θf / (2f)`.
    pub fn eval_fg(&self, x: C64) -> (C64, C64) {
        let (v, dv) = self.sum_with_theta(x);
        let g = dv / (2.0 * v);
        if self.reciprocal {
            (1.0 / v, -g)
        } else {
            (v, g)
        }
    }

    pub fn eval(&self, x: C64) -> C64 {
        self.eval_fg(x).0
    }
}

fn radius_hint(alpha: C64) -> f64 {
    0.1f64.min(0.1 * (-alpha.im.abs()).exp())
}

fn direct_terms(p: &MonodromyPoint) -> Result<(Vec<Term>, f64)> {
    let sp = spectral(p.s);
    if sp.jordan_flag {
        let bt = p.b5();
        let c = -4.0 * bt;
        let shift = C64::new(EULER_GAMMA, 0.0) - C64::new(0.0, PI / 2.0) * bt * p.b2;
        let one = C64::new(1.0, 0.0);
        return Ok((
            vec![
                Term {
                    coef: c,
                    exponent: one,
                    log_power: 1,
                },
                Term {
                    coef: c * shift,
                    exponent: one,
                    log_power: 0,
                },
            ],
            radius_hint(sp.alpha_minus),
        ));
    }
    let a = sp.alpha_minus;
    let bm = eigen_data(p).b_minus.expect("defined off s = ±2");
    if bm.norm() == 0.0 {
        return Err(Error::CaseUnsupported("b₋ = 0".into()));
    }
    let (k01, k1m1) = kappa_constants(a)?;
    Ok((
        vec![
            Term {
                coef: k01 * bm,
                exponent: 2.0 * a,
                log_power: 0,
            },
            Term {
                coef: k1m1 / bm,
                exponent: 2.0 - 2.0 * a,
                log_power: 0,
            },
        ],
        radius_hint(a),
    ))
}

/// True when the point is evaluated through its R1 image.
pub fn uses_reciprocal(s: C64) -> bool {
    match asymptotic_case(s) {
        AsymptoticCase::BMinus | AsymptoticCase::CMinus => true,
        AsymptoticCase::A => s.re < 0.0,
        _ => false,
    }
}

pub fn expansion(p: &MonodromyPoint) -> Result<Expansion> {
    let case = asymptotic_case(p.s);
    let reciprocal = uses_reciprocal(p.s);
    let (terms, hint) = if reciprocal {
        let (_, q) = apply_symmetry(Symmetry::R1, C64::new(0.0, 0.0), p);
        direct_terms(&q)?
    } else {
        direct_terms(p)?
    };
    Ok(Expansion {
        case,
        terms,
        reciprocal,
        valid_radius_hint: hint,
    })
}

/// Leading small-x behaviour of the solution with monodromy data `p`.
pub fn leading_term(p: &MonodromyPoint, x: C64) -> Result<C64> {
    if x.norm() == 0.0 {
        return Err(Error::InvalidArgument("x = 0".into()));
    }
    Ok(expansion(p)?.eval(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedEvent {
    pub k: i64,
    pub x: C64,
    pub kind: EventKind,
}

/// Geometric ladder of zeros (s > 2) or poles (s < −2) accumulating at 0.
/// Returns `count` entries starting at the first index whose modulus lies
/// below the expansion radius.
pub fn predict_small_x_events(p: &MonodromyPoint, count: usize) -> Result<Vec<PredictedEvent>> {
    let (q, swap) = match asymptotic_case(p.s) {
        AsymptoticCase::BPlus => (*p, false),
        AsymptoticCase::BMinus => (apply_symmetry(Symmetry::R1, C64::new(0.0, 0.0), p).1, true),
        _ => return Err(Error::WrongCase("needs real s with |s| > 2".into())),
    };
    let t = spectral(q.s).t_ni.expect("|λ₋| > 1 on the ray");
    let delta = eigen_data(&q)
        .delta_ni
        .ok_or_else(|| Error::CaseUnsupported("b₋ = 0".into()))?;
    let base = 2.0 * ((2.0 * arg_gamma_one_plus_it(t) - delta) / (2.0 * t)).exp();
    let step = PI / (2.0 * t);
    let radius = radius_hint(spectral(q.s).alpha_minus);
    let k0 = ((base.norm().ln() - radius.ln()) / step).ceil().max(i64::MIN as f64) as i64;
    Ok((0..count as i64)
        .map(|j| {
            let k = k0 + j;
            let x = base * (-(k as f64) * step).exp();
            let kind = match (k.rem_euclid(2) == 0, swap) {
                (true, false) => EventKind::ZeroMinus,
                (false, false) => EventKind::ZeroPlus,
                (true, true) => EventKind::PoleMinus,
                (false, true) => EventKind::PolePlus,
            };
            PredictedEvent { k, x, kind }
        })
        .collect())
}

#[derive(Debug, Clone)]
pub struct SeedOptions {
    /// Point at which the expansion is evaluated before flowing out to the
    /// requested seed location.
    pub x_inner: f64,
    /// Override for the expansion radius.
    pub radius: Option<f64>,
    /// Allow seeding on the zero/pole ladders of |s| > 2 at a gap midpoint.
    pub gap_safety: bool,
    pub flow: FlowOptions,
}

impl Default for SeedOptions {
    fn default() -> Self {
        Self {
            x_inner: 1e-9,
            radius: None,
            gap_safety: false,
            flow: FlowOptions::default(),
        }
    }
}

fn project_family(p: &MonodromyPoint, f: C64, g: C64) -> (C64, C64) {
    match reality_class(p, 1e-9) {
        RealityClass::RealLine => (C64::new(f.re, 0.0), C64::new(g.re, 0.0)),
        RealityClass::PositiveImaginary => (C64::new(0.0, f.im), C64::new(g.re, 0.0)),
        RealityClass::UnitCircle => (f / f.norm(), C64::new(0.0, g.im)),
        RealityClass::None => (f, g),
    }
}

/// Initial data for the solution with monodromy data `p` near `x_small`.
///
/// The expansion is evaluated at `min(x_small, x_inner)`, where its truncation
/// error is negligible, and the state is carried to `x_small` by [`flow::flow`].
/// On the ladders `|s| > 2` the state is placed at the geometric midpoint of
/// the last two predicted events below `x_small` instead.
pub fn seed_state(p: &MonodromyPoint, x_small: f64, opts: &SeedOptions) -> Result<ChartState> {
    if !(x_small > 0.0) {
        return Err(Error::InvalidArgument("x_small must be positive".into()));
    }
    let exp = expansion(p)?;
    let radius = opts.radius.unwrap_or(exp.valid_radius_hint);
    if x_small > radius {
        return Err(Error::SeedOutsideValidity { x: x_small, radius });
    }
    let chart = if exp.reciprocal { 1 } else { 0 };
    let build = |x: f64| -> Result<ChartState> {
        let (f, g) = exp.eval_fg(C64::new(x, 0.0));
        let (f, g) = project_family(p, f, g);
        if !(f.norm() > 0.0 && f.norm().is_finite() && g.norm().is_finite()) {
            return Err(Error::NonFiniteState { x });
        }
        let st = ChartState::from_fg(x, f, g);
        flow::chart_convert(&st, chart)
    };

    match exp.case {
        AsymptoticCase::BPlus | AsymptoticCase::BMinus => {
            if !opts.gap_safety {
                return Err(Error::CaseUnsupported(
                    "zeros/poles accumulate at 0 for real |s| > 2; enable gap safety".into(),
                ));
            }
            let ladder = predict_small_x_events(p, 200)?;
            let mid = ladder
                .windows(2)
                .map(|w| (w[0].x.norm() * w[1].x.norm()).sqrt())
                .find(|&m| m <= x_small)
                .ok_or_else(|| Error::CaseUnsupported("no predicted gap below x_small".into()))?;
            build(mid)
        }
        _ => {
            let x_in = x_small.min(opts.x_inner);
            let st = build(x_in)?;
            if x_in == x_small {
                return Ok(st);
            }
            let traj = flow::flow(&st, x_small, &opts.flow)?;
            let end = traj.final_state();
            let (f, g) = end
                .to_fg()
                .ok_or_else(|| Error::CaseUnsupported("seed lands on a zero or pole".into()))?;
            let (f, g) = project_family(p, f, g);
            flow::chart_convert(&ChartState::from_fg(x_small, f, g), chart)
        }
    }
}

/// Hankel-frame constants `a^±(1)` for `k = 0..=k_max`, computed from the
/// closed form and by the downward recursion from the two seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameTable {
    pub alpha: C64,
    /// `a⁺_{−2k,1}`, `a⁺_{−2k−1,2}`, `a⁻_{−2k,2}`, `a⁻_{−2k−1,1}` from the closed form
    pub closed: [Vec<C64>; 4],
    pub recursive: [Vec<C64>; 4],
    pub max_discrepancy: f64,
}

pub fn formal_frame_coefficients(alpha: C64, k_max: usize) -> Result<FrameTable> {
    let ap = alpha;
    let am = -alpha;
    let sqrt_pi = PI.sqrt();
    let two = C64::new(2.0, 0.0);
    let closed_entry = |a: C64, k: usize, odd: bool| -> Result<C64> {
        let kf = k as f64;
        let shift = if odd { 2.0 * kf + 1.0 } else { 2.0 * kf - 1.0 };
        let arg = a - 0.5 * shift;
        if arg.im == 0.0 && arg.re <= 0.0 && arg.re == arg.re.round() {
            return Err(Error::GammaPole { z: arg });
        }
        let pow = if odd { a - 2.0 * kf - 1.0 } else { a - 2.0 * kf };
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(gamma(arg) * two.powc(pow) * sign / (sqrt_pi * fact))
    };
    let mut closed: [Vec<C64>; 4] = Default::default();
    for k in 0..=k_max {
        closed[0].push(closed_entry(ap, k, false)?);
        closed[1].push(closed_entry(ap, k, true)?);
        closed[2].push(closed_entry(am, k, false)?);
        closed[3].push(closed_entry(am, k, true)?);
    }

    let seed_p = gamma(ap + 0.5) * two.powc(ap) / sqrt_pi;
    let seed_m = gamma(am + 0.5) * two.powc(am) / sqrt_pi;
    let mut rec: [Vec<C64>; 4] = Default::default();
    let (mut ev_p, mut ev_m) = (seed_p, seed_m);
    for m in 0..=k_max {
        let mf = m as f64;
        let od_p = ev_p / (2.0 * ap - 2.0 * mf - 1.0);
        let od_m = ev_m / (2.0 * am - 2.0 * mf - 1.0);
        rec[0].push(ev_p);
        rec[1].push(od_p);
        rec[2].push(ev_m);
        rec[3].push(od_m);
        ev_p = od_p / (-2.0 * mf - 2.0);
        ev_m = od_m / (-2.0 * mf - 2.0);
    }

    let mut worst: f64 = 0.0;
    for j in 0..4 {
        for (a, b) in closed[j].iter().zip(&rec[j]) {
            worst = worst.max((a - b).norm() / a.norm().max(1e-300));
        }
    }
    Ok(FrameTable {
        alpha,
        closed,
        recursive: rec,
        max_discrepancy: worst,
    })
}
