//! Real solutions: the 14 strata of the real monodromy surface, the zero/pole
//! sequences they predict, trajectory verification, TERP status flags, the
//! sinh/sine-Gordon dictionary and sheet tables `x_k(s, B)`.
//!
//! A side pattern `⟵[a][b]` means that, read in increasing `x`, the events
//! below the split point `y0` alternate `…[a][b]` with `[b]` nearest to `y0`;
//! `⟶[a][b]` means the events above `y0` alternate `[a][b]…` starting with `[a]`.

use crate::error::{Error, Result};
use crate::flow::{self, EventKind, FlowEvent, RayOptions, SampleValue, Trajectory};
use crate::monodromy_space::{memberships, MonodromyPoint, RealityClass};
use crate::{AXIS_TOL, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

/// Tolerance for membership in the real family and for `B = ±I`.
pub const REAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NearZero {
    Pos,
    Neg,
    ZerosAlt,
    PolesAlt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NearInfinity {
    Pos,
    Neg,
    MixMinus,
    MixPlus,
}

impl NearZero {
    pub fn condition(self) -> &'static str {
        match self {
            NearZero::Pos => "|s|<=2, b5>=1",
            NearZero::Neg => "|s|<=2, b5<=-1",
            NearZero::ZerosAlt => "s>2",
            NearZero::PolesAlt => "s<-2",
        }
    }
}

impl NearInfinity {
    pub fn condition(self) -> &'static str {
        match self {
            NearInfinity::Pos => "B=I",
            NearInfinity::Neg => "B=-I",
            NearInfinity::MixMinus => "b6<0",
            NearInfinity::MixPlus => "b6>0",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RealStratum {
    pub near_zero: NearZero,
    pub near_infinity: NearInfinity,
}

impl RealStratum {
    /// `None` for the two combinations that do not occur.
    pub fn new(near_zero: NearZero, near_infinity: NearInfinity) -> Option<Self> {
        let excluded = matches!(
            (near_zero, near_infinity),
            (NearZero::Pos, NearInfinity::Neg) | (NearZero::Neg, NearInfinity::Pos)
        );
        (!excluded).then_some(Self {
            near_zero,
            near_infinity,
        })
    }

    pub fn all() -> Vec<RealStratum> {
        let zs = [NearZero::Pos, NearZero::Neg, NearZero::ZerosAlt, NearZero::PolesAlt];
        let is = [
            NearInfinity::Pos,
            NearInfinity::Neg,
            NearInfinity::MixMinus,
            NearInfinity::MixPlus,
        ];
        zs.iter()
            .flat_map(|&z| is.iter().filter_map(move |&i| RealStratum::new(z, i)))
            .collect()
    }

    pub fn label(&self) -> String {
        format!("{}; {}", self.near_zero.condition(), self.near_infinity.condition())
    }

    /// Image under `f ↦ −f`, i.e. `B ↦ −B`.
    pub fn negated(&self) -> Self {
        let near_zero = match self.near_zero {
            NearZero::Pos => NearZero::Neg,
            NearZero::Neg => NearZero::Pos,
            z => z,
        };
        let near_infinity = match self.near_infinity {
            NearInfinity::Pos => NearInfinity::Neg,
            NearInfinity::Neg => NearInfinity::Pos,
            NearInfinity::MixMinus => NearInfinity::MixPlus,
            NearInfinity::MixPlus => NearInfinity::MixMinus,
        };
        Self {
            near_zero,
            near_infinity,
        }
    }
}

impl fmt::Display for RealStratum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, {:?})", self.near_zero, self.near_infinity)
    }
}

fn require_real(p: &MonodromyPoint) -> Result<()> {
    if memberships(p, REAL_TOL).contains(&RealityClass::RealLine) {
        Ok(())
    } else {
        Err(Error::NotRealFamily)
    }
}

/// Stratum of a point of the real family. Boundaries are closed:
/// `|s| = 2` counts as `|s| <= 2`.
pub fn stratum(p: &MonodromyPoint) -> Result<RealStratum> {
    require_real(p)?;
    let s = p.s.re;
    let near_zero = if s > 2.0 + AXIS_TOL {
        NearZero::ZerosAlt
    } else if s < -2.0 - AXIS_TOL {
        NearZero::PolesAlt
    } else if p.b5().re > 0.0 {
        // b5^2 = 1 + (1 − s^2/4) b6^2 >= 1 here, so the sign decides
        NearZero::Pos
    } else {
        NearZero::Neg
    };
    let near_infinity = if p.is_scalar(REAL_TOL) {
        if p.b1.re > 0.0 {
            NearInfinity::Pos
        } else {
            NearInfinity::Neg
        }
    } else if p.b6().re < 0.0 {
        NearInfinity::MixMinus
    } else {
        NearInfinity::MixPlus
    };
    RealStratum::new(near_zero, near_infinity).ok_or(Error::NotRealFamily)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Positive,
    Negative,
    Alternating(EventKind, EventKind),
}

impl Side {
    fn render(self) -> String {
        match self {
            Side::Positive => ">0".into(),
            Side::Negative => "<0".into(),
            Side::Alternating(a, b) => format!("{}{}", a.label(), b.label()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splitting {
    pub near_zero: Side,
    pub near_infinity: Side,
}

impl Splitting {
    pub fn label(&self) -> String {
        format!("⟵{} & ⟶{}", self.near_zero.render(), self.near_infinity.render())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub stratum: RealStratum,
    pub splittings: Vec<Splitting>,
    /// The table for `|s| <= 2` lists the outer alternation without fixing
    /// which of its two kinds comes first after `y0`.
    pub outer_phase_free: bool,
}

impl Pattern {
    pub fn label(&self) -> String {
        self.splittings
            .iter()
            .map(Splitting::label)
            .collect::<Vec<_>>()
            .join(" or ")
    }
}

/// Zero/pole pattern of a stratum; two splittings for `|s| > 2`, `B ≠ ±I`.
pub fn predicted_sequence(st: RealStratum) -> Pattern {
    use EventKind::{PoleMinus as Pm, PolePlus as Pp, ZeroMinus as Zm, ZeroPlus as Zp};
    use NearInfinity as I;
    use NearZero as Z;
    use Side::{Alternating as Alt, Negative as Neg, Positive as Pos};
    let sp = |a: Side, b: Side| Splitting {
        near_zero: a,
        near_infinity: b,
    };
    let splittings = match (st.near_zero, st.near_infinity) {
        (Z::Pos, I::Pos) => vec![sp(Pos, Pos)],
        (Z::Neg, I::Neg) => vec![sp(Neg, Neg)],
        (Z::Pos, I::MixMinus) => vec![sp(Pos, Alt(Pp, Zm))],
        (Z::Pos, I::MixPlus) => vec![sp(Pos, Alt(Zp, Pm))],
        (Z::Neg, I::MixMinus) => vec![sp(Neg, Alt(Zm, Pp))],
        (Z::Neg, I::MixPlus) => vec![sp(Neg, Alt(Pm, Zp))],
        (Z::ZerosAlt, I::Pos) => vec![sp(Alt(Zm, Zp), Pos)],
        (Z::ZerosAlt, I::Neg) => vec![sp(Alt(Zp, Zm), Neg)],
        (Z::ZerosAlt, I::MixMinus) => vec![sp(Alt(Zm, Zp), Alt(Zm, Pp)), sp(Alt(Zp, Zm), Alt(Pp, Zm))],
        (Z::ZerosAlt, I::MixPlus) => vec![sp(Alt(Zm, Zp), Alt(Pm, Zp)), sp(Alt(Zp, Zm), Alt(Zp, Pm))],
        (Z::PolesAlt, I::Pos) => vec![sp(Alt(Pm, Pp), Pos)],
        (Z::PolesAlt, I::Neg) => vec![sp(Alt(Pp, Pm), Neg)],
        (Z::PolesAlt, I::MixMinus) => vec![sp(Alt(Pm, Pp), Alt(Zm, Pp)), sp(Alt(Pp, Pm), Alt(Pp, Zm))],
        (Z::PolesAlt, I::MixPlus) => vec![sp(Alt(Pm, Pp), Alt(Pm, Zp)), sp(Alt(Pp, Pm), Alt(Zp, Pm))],
        _ => Vec::new(),
    };
    Pattern {
        stratum: st,
        splittings,
        outer_phase_free: matches!(st.near_zero, Z::Pos | Z::Neg),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Minimum `log10(x_max / x_min)` covered by the samples.
    pub min_decades: f64,
    /// Minimum number of events on each alternating side.
    pub min_tail_events: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            min_decades: 2.0,
            min_tail_events: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Split {
    /// Number of events below `y0`.
    pub index: usize,
    /// Geometric midpoint of the two events around `y0`, or the sample end.
    pub y0: f64,
    pub splitting: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub stratum: RealStratum,
    pub predicted: String,
    pub observed: Vec<EventKind>,
    pub event_x: Vec<f64>,
    pub splits: Vec<Split>,
    /// Signs of `f` between events agree with the event kinds and samples.
    pub sign_consistent: bool,
    /// The admissible split positions form one place in the sequence.
    pub single_split: bool,
    pub matched: bool,
    pub diagnostics: Vec<String>,
}

fn matches_inner(events: &[EventKind], side: Side, min_tail: usize) -> bool {
    match side {
        Side::Positive | Side::Negative => events.is_empty(),
        Side::Alternating(a, b) => {
            events.len() >= min_tail
                && events
                    .iter()
                    .rev()
                    .enumerate()
                    .all(|(j, &e)| e == if j % 2 == 0 { b } else { a })
        }
    }
}

fn matches_outer(events: &[EventKind], side: Side, min_tail: usize, phase_free: bool) -> bool {
    match side {
        Side::Positive | Side::Negative => events.is_empty(),
        Side::Alternating(a, b) => {
            let from = |first: EventKind, second: EventKind| {
                events
                    .iter()
                    .enumerate()
                    .all(|(j, &e)| e == if j % 2 == 0 { first } else { second })
            };
            events.len() >= min_tail && (from(a, b) || (phase_free && from(b, a)))
        }
    }
}

fn sign_of(side: Side) -> Option<f64> {
    match side {
        Side::Positive => Some(1.0),
        Side::Negative => Some(-1.0),
        Side::Alternating(..) => None,
    }
}

/// Match the events of a real trajectory against the pattern of `st`.
pub fn verify_trajectory(traj: &Trajectory, st: RealStratum, opts: &VerifyOptions) -> Result<VerifyReport> {
    let regular: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| !s.event)
        .filter_map(|s| s.value.finite().map(|v| (s.x, v.re)))
        .filter(|&(_, v)| v != 0.0)
        .collect();
    let (x_min, x_max) = regular
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &(x, _)| (a.min(x), b.max(x)));
    let decades = if regular.is_empty() {
        0.0
    } else {
        (x_max / x_min).log10()
    };
    if !(decades >= opts.min_decades) {
        return Err(Error::InsufficientSpan(format!(
            "samples cover {decades:.2} decades, need {}",
            opts.min_decades
        )));
    }

    let events: Vec<&FlowEvent> = traj.events.iter().collect();
    let kinds: Vec<EventKind> = events.iter().map(|e| e.kind).collect();
    let xs: Vec<f64> = events.iter().map(|e| e.x).collect();
    let mut diagnostics = Vec::new();

    // sign bookkeeping: between events, and at every regular sample
    let mut sign_consistent = true;
    for w in events.windows(2) {
        if -w[1].kind.sign_after() != w[0].kind.sign_after() {
            sign_consistent = false;
            diagnostics.push(format!(
                "{} at {:.6e} followed by {} at {:.6e}",
                w[0].kind, w[0].x, w[1].kind, w[1].x
            ));
        }
    }
    let expected_sign = |x: f64| -> f64 {
        match events.iter().rposition(|e| e.x < x) {
            Some(i) => events[i].kind.sign_after(),
            None => events.first().map_or(0.0, |e| -e.kind.sign_after()),
        }
    };
    if !events.is_empty() {
        if let Some(&(x, v)) = regular.iter().find(|&&(x, v)| v.signum() != expected_sign(x)) {
            sign_consistent = false;
            diagnostics.push(format!("f = {v:.6e} at x = {x:.6e} has the wrong sign"));
        }
    }
    let sign_lo = regular.first().map_or(0.0, |r| r.1.signum());
    let sign_hi = regular.last().map_or(0.0, |r| r.1.signum());
    if events.is_empty() && regular.iter().any(|r| r.1.signum() != sign_lo) {
        sign_consistent = false;
        diagnostics.push("sign change without a detected event".into());
    }

    let pattern = predicted_sequence(st);
    let mut splits = Vec::new();
    for i in 0..=kinds.len() {
        for sp in &pattern.splittings {
            let inner_ok = matches_inner(&kinds[..i], sp.near_zero, opts.min_tail_events)
                && sign_of(sp.near_zero).is_none_or(|s| s == sign_lo);
            let outer_ok = matches_outer(
                &kinds[i..],
                sp.near_infinity,
                opts.min_tail_events,
                pattern.outer_phase_free,
            ) && sign_of(sp.near_infinity).is_none_or(|s| s == sign_hi);
            if inner_ok && outer_ok {
                let y0 = match (i.checked_sub(1).map(|j| xs[j]), xs.get(i)) {
                    (Some(a), Some(&b)) => (a * b).sqrt(),
                    (Some(a), None) => (a * x_max).sqrt(),
                    (None, Some(&b)) => (x_min * b).sqrt(),
                    (None, None) => (x_min * x_max).sqrt(),
                };
                splits.push(Split {
                    index: i,
                    y0,
                    splitting: sp.label(),
                });
            }
        }
    }
    let single_split = match splits.as_slice() {
        [] => false,
        [_] => true,
        [a, b] => pattern.splittings.len() == 2 && b.index == a.index + 1,
        _ => false,
    };
    if splits.is_empty() {
        diagnostics.push(format!(
            "no split point embeds {:?} into {}",
            kinds.iter().map(|k| k.label()).collect::<Vec<_>>(),
            pattern.label()
        ));
    }
    let matched = single_split && sign_consistent;
    Ok(VerifyReport {
        stratum: st,
        predicted: pattern.label(),
        observed: kinds,
        event_x: xs,
        splits,
        sign_consistent,
        single_split,
        matched,
        diagnostics,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerpStatus {
    pub pure: bool,
    pub polarized: bool,
    pub nilpotent_orbit: bool,
    pub sabbah_orbit: bool,
}

/// TERP flags of the real solution with data `p` at `x`, given `f(x)`.
pub fn terp_status(p: &MonodromyPoint, x: f64, f_value: SampleValue) -> Result<TerpStatus> {
    require_real(p)?;
    if !(x > 0.0) {
        return Err(Error::InvalidArgument("x must be positive".into()));
    }
    let pure = matches!(f_value, SampleValue::Finite(f) if f != C64::new(0.0, 0.0));
    let polarized = pure && matches!(f_value, SampleValue::Finite(f) if f.re > 0.0 && f.im.abs() <= REAL_TOL * f.re);
    let nilpotent_orbit = p.is_scalar(REAL_TOL) && p.b1.re > 0.0;
    let sabbah_orbit = p.s.re.abs() <= 2.0 + AXIS_TOL && p.b5().re >= 1.0 - REAL_TOL;
    Ok(TerpStatus {
        pure,
        polarized,
        nilpotent_orbit,
        sabbah_orbit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GordonFamily {
    /// `f` real and nonzero; `φ = 2 log f`.
    SinhPlus,
    /// `f ∈ iℝ_{>0}`; `ψ = 2 log f − iπ`.
    SinhMinus,
    /// `|f| = 1`; `u = 2i log f + π`.
    Sine,
}

impl std::str::FromStr for GordonFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "sinhplus" => Ok(GordonFamily::SinhPlus),
            "sinhminus" => Ok(GordonFamily::SinhMinus),
            "sine" => Ok(GordonFamily::Sine),
            other => Err(Error::InvalidArgument(format!("unknown family {other}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GordonPoint {
    pub x: f64,
    /// `4x`, the variable of the sine-Gordon normalisation.
    pub x_ni: f64,
    pub value: C64,
}

const FAMILY_TOL: f64 = 1e-8;

fn in_family(f: C64, family: GordonFamily) -> bool {
    let n = f.norm();
    n > 0.0
        && n.is_finite()
        && match family {
            GordonFamily::SinhPlus => f.im.abs() <= FAMILY_TOL * n,
            GordonFamily::SinhMinus => f.re.abs() <= FAMILY_TOL * n && f.im > 0.0,
            GordonFamily::Sine => (n - 1.0).abs() <= FAMILY_TOL,
        }
}

/// Translate `(x, f)` samples into the Gordon field of `family`. `log f` is
/// continued along the list by choosing the branch nearest the previous one;
/// the first point uses the principal branch.
pub fn gordon_translate(values: &[(f64, C64)], family: GordonFamily) -> Result<Vec<GordonPoint>> {
    let mut prev_arg: Option<f64> = None;
    let mut out = Vec::with_capacity(values.len());
    for &(x, f) in values {
        if !in_family(f, family) {
            return Err(Error::FamilyMismatch { value: f });
        }
        let mut log = f.ln();
        if let Some(a) = prev_arg {
            log.im += 2.0 * PI * ((a - log.im) / (2.0 * PI)).round();
        }
        prev_arg = Some(log.im);
        let i = C64::new(0.0, 1.0);
        let value = match family {
            GordonFamily::SinhPlus => 2.0 * log,
            GordonFamily::SinhMinus => 2.0 * log - i * PI,
            GordonFamily::Sine => 2.0 * i * log + PI,
        };
        out.push(GordonPoint {
            x,
            x_ni: 4.0 * x,
            value,
        });
    }
    Ok(out)
}

/// Inverse of [`gordon_translate`]: `(x, f)` from the Gordon field.
pub fn gordon_inverse(points: &[GordonPoint], family: GordonFamily) -> Vec<(f64, C64)> {
    let i = C64::new(0.0, 1.0);
    points
        .iter()
        .map(|p| {
            let log = match family {
                GordonFamily::SinhPlus => p.value / 2.0,
                GordonFamily::SinhMinus => (p.value + i * PI) / 2.0,
                GordonFamily::Sine => (p.value - PI) / (2.0 * i),
            };
            (p.x, log.exp())
        })
        .collect()
}

/// A point of the real family with `s > 2` or `s < −2` from the phase of `b₋`:
/// `b₋ = e^{iθ}`, so `b5 = cos θ` and `b6 = −sin θ / sqrt(s^2/4 − 1)`.
pub fn real_point_from_phase(s: f64, theta: f64) -> Result<MonodromyPoint> {
    if !(s.abs() > 2.0 + AXIS_TOL) {
        return Err(Error::InvalidArgument("phase parametrisation needs |s| > 2".into()));
    }
    let w = (s * s / 4.0 - 1.0).sqrt();
    MonodromyPoint::from_real_form(s, theta.cos(), -theta.sin() / w, 1e-10)
}

#[derive(Debug, Clone)]
pub struct SheetOptions {
    pub x_lo: f64,
    pub x_hi: f64,
    pub ray: RayOptions,
    pub verify: VerifyOptions,
    /// Flag a break when `|ln x_k|` jumps by more than this between nodes.
    pub max_log_jump: f64,
}

impl Default for SheetOptions {
    fn default() -> Self {
        Self {
            x_lo: 1e-6,
            x_hi: 20.0,
            ray: RayOptions::default(),
            verify: VerifyOptions::default(),
            max_log_jump: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SheetRow {
    pub s: f64,
    pub b5: f64,
    pub b6: f64,
    /// Event index relative to the split point: `0` is the first event above
    /// `y0`, `−1` the last one below it.
    pub k: i64,
    pub x_k: f64,
    pub kind: EventKind,
    pub break_flag: bool,
}

/// Locations of the events with relative indices `ks` over a list of nodes of
/// the real family. Nodes without events contribute no rows.
pub fn sheet_trace(
    nodes: &[MonodromyPoint],
    ks: std::ops::RangeInclusive<i64>,
    opts: &SheetOptions,
) -> Result<Vec<SheetRow>> {
    let mut ray = opts.ray.clone();
    ray.seed.flow.sampling = flow::Sampling::Grid(log_grid(opts.x_lo, opts.x_hi, 60));
    let per_node: Vec<Result<Vec<SheetRow>>> = nodes
        .par_iter()
        .map(|p| {
            let st = stratum(p)?;
            let traj = flow::solve_on_ray(p, opts.x_lo, opts.x_hi, &ray)?;
            if traj.events.is_empty() {
                return Ok(Vec::new());
            }
            let rep = verify_trajectory(&traj, st, &opts.verify)?;
            let split = rep
                .splits
                .first()
                .map(|s| s.index)
                .ok_or_else(|| Error::NoConvergence(format!("no split point for {st}")))?;
            ks.clone()
                .map(|k| {
                    let idx = split as i64 + k;
                    let ev = usize::try_from(idx)
                        .ok()
                        .and_then(|i| traj.events.get(i))
                        .ok_or(Error::EventNotFound { k })?;
                    Ok(SheetRow {
                        s: p.s.re,
                        b5: p.b5().re,
                        b6: p.b6().re,
                        k,
                        x_k: ev.x,
                        kind: ev.kind,
                        break_flag: false,
                    })
                })
                .collect()
        })
        .collect();
    let mut rows: Vec<Vec<SheetRow>> = Vec::with_capacity(per_node.len());
    for r in per_node {
        rows.push(r?);
    }
    // continuity post-pass between consecutive nodes, per index
    let mut last: std::collections::HashMap<i64, f64> = Default::default();
    for node in rows.iter_mut() {
        for row in node.iter_mut() {
            if let Some(&prev) = last.get(&row.k) {
                row.break_flag = (row.x_k / prev).ln().abs() > opts.max_log_jump;
            }
            last.insert(row.k, row.x_k);
        }
    }
    Ok(rows.into_iter().flatten().collect())
}

pub(crate) fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = (((hi / lo).log10() * per_decade as f64).ceil() as usize).max(1);
    (0..=n).map(|j| lo * (hi / lo).powf(j as f64 / n as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{ChartState, FlowDiagnostics, Sample};

    fn point(s: f64, b5: f64, b6: f64) -> MonodromyPoint {
        MonodromyPoint::from_real_form(s, b5, b6, 1e-6).unwrap()
    }

    #[test]
    fn stratum_examples() {
        let st = stratum(&point(0.0, 1.0, 0.0)).unwrap();
        assert_eq!((st.near_zero, st.near_infinity), (NearZero::Pos, NearInfinity::Pos));
        let st = stratum(&point(0.0, -1.0, 0.0)).unwrap();
        assert_eq!((st.near_zero, st.near_infinity), (NearZero::Neg, NearInfinity::Neg));
        let st = stratum(&point(3.0, 0.0, 1.0 / 1.25f64.sqrt())).unwrap();
        assert_eq!(
            (st.near_zero, st.near_infinity),
            (NearZero::ZerosAlt, NearInfinity::MixPlus)
        );
        let off = MonodromyPoint::new_unchecked(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        assert_eq!(stratum(&off), Err(Error::NotRealFamily));
    }

    #[test]
    fn fourteen_strata() {
        assert_eq!(RealStratum::all().len(), 14);
        let two: usize = RealStratum::all()
            .into_iter()
            .filter(|&s| predicted_sequence(s).splittings.len() == 2)
            .count();
        assert_eq!(two, 4);
    }

    #[test]
    fn pattern_labels() {
        let st = RealStratum::new(NearZero::ZerosAlt, NearInfinity::MixMinus).unwrap();
        assert_eq!(
            predicted_sequence(st).label(),
            "⟵[0-][0+] & ⟶[0-][inf+] or ⟵[0+][0-] & ⟶[inf+][0-]"
        );
    }

    fn negate(side: Side) -> Side {
        let flip = |k: EventKind| EventKind::from_chart((k.chart() + 2) % 4);
        match side {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
            Side::Alternating(a, b) => Side::Alternating(flip(a), flip(b)),
        }
    }

    #[test]
    fn tables_are_equivariant_under_negation() {
        for st in RealStratum::all() {
            let a = predicted_sequence(st);
            let b = predicted_sequence(st.negated());
            let mapped: Vec<Splitting> = a
                .splittings
                .iter()
                .map(|s| Splitting {
                    near_zero: negate(s.near_zero),
                    near_infinity: negate(s.near_infinity),
                })
                .collect();
            assert_eq!(mapped.len(), b.splittings.len());
            assert!(mapped.iter().all(|m| b.splittings.contains(m)), "{st}");
        }
    }

    fn synthetic(events: &[(f64, EventKind)], sign_lo: f64) -> Trajectory {
        let mut samples = Vec::new();
        let mut sign = sign_lo;
        let mut x = 1e-5;
        let st = ChartState::from_fg(1.0, C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        let mut push = |x: f64, v: f64| {
            samples.push(Sample {
                x,
                value: SampleValue::Finite(C64::new(v, 0.0)),
                chart: None,
                event: false,
                state: st,
            })
        };
        push(x, sign);
        for &(xe, k) in events {
            push(0.5 * (x + xe), sign);
            sign = k.sign_after();
            x = xe;
        }
        push(10.0, sign);
        Trajectory {
            samples,
            events: events
                .iter()
                .map(|&(x, kind)| FlowEvent {
                    x,
                    kind,
                    gt: C64::new(0.0, 0.0),
                    anchor: None,
                })
                .collect(),
            diagnostics: FlowDiagnostics::default(),
            end: st,
        }
    }

    #[test]
    fn verify_synthetic_sequences() {
        use EventKind::*;
        let st = RealStratum::new(NearZero::ZerosAlt, NearInfinity::MixPlus).unwrap();
        let evs = [
            (1e-4, ZeroPlus),
            (1e-3, ZeroMinus),
            (2e-3, ZeroPlus),
            (0.1, PoleMinus),
            (0.2, ZeroPlus),
            (0.3, PoleMinus),
            (0.4, ZeroPlus),
        ];
        let rep = verify_trajectory(&synthetic(&evs, -1.0), st, &VerifyOptions::default()).unwrap();
        assert!(rep.matched, "{rep:?}");
        assert_eq!(rep.splits.len(), 2);

        let shuffled = [
            (1e-4, ZeroPlus),
            (1e-3, ZeroMinus),
            (2e-3, PoleMinus),
            (0.1, ZeroPlus),
            (0.2, ZeroPlus),
            (0.3, PoleMinus),
            (0.4, ZeroPlus),
        ];
        let rep = verify_trajectory(&synthetic(&shuffled, -1.0), st, &VerifyOptions::default()).unwrap();
        assert!(!rep.matched);

        let flat = RealStratum::new(NearZero::Pos, NearInfinity::Pos).unwrap();
        let rep = verify_trajectory(&synthetic(&[], 1.0), flat, &VerifyOptions::default()).unwrap();
        assert!(rep.matched && rep.observed.is_empty());
        let rep = verify_trajectory(&synthetic(&[], -1.0), flat, &VerifyOptions::default()).unwrap();
        assert!(!rep.matched);
    }

    #[test]
    fn verify_needs_span() {
        let st = RealStratum::new(NearZero::Pos, NearInfinity::Pos).unwrap();
        let mut t = synthetic(&[], 1.0);
        t.samples.retain(|s| s.x > 1e-2);
        assert!(matches!(
            verify_trajectory(&t, st, &VerifyOptions::default()),
            Err(Error::InsufficientSpan(_))
        ));
    }

    #[test]
    fn terp_examples() {
        let p = MonodromyPoint::identity(C64::new(1.0, 0.0));
        let t = terp_status(&p, 2.0, SampleValue::Finite(C64::new(0.9, 0.0))).unwrap();
        assert!(t.pure && t.polarized && t.nilpotent_orbit && t.sabbah_orbit);
        let q = point(0.0, -1.0, 0.0);
        let t = terp_status(&q, 1.0, SampleValue::Finite(C64::new(-1.0, 0.0))).unwrap();
        assert_eq!(
            t,
            TerpStatus {
                pure: true,
                polarized: false,
                nilpotent_orbit: false,
                sabbah_orbit: false
            }
        );
        assert!(!terp_status(&p, 1.0, SampleValue::Pole).unwrap().pure);
    }

    #[test]
    fn gordon_examples() {
        let one = gordon_translate(&[(0.5, C64::new(1.0, 0.0))], GordonFamily::SinhPlus).unwrap();
        assert_eq!(one[0].value, C64::new(0.0, 0.0));
        assert_eq!(one[0].x_ni, 2.0);
        let u = gordon_translate(&[(1.0, C64::new(1.0, 0.0))], GordonFamily::Sine).unwrap();
        assert!((u[0].value - PI).norm() < 1e-15);
        let u = gordon_translate(&[(1.0, C64::new(0.0, 1.0))], GordonFamily::Sine).unwrap();
        assert!(u[0].value.norm() < 1e-15);
        let psi = gordon_translate(&[(1.0, C64::new(0.0, 1.0))], GordonFamily::SinhMinus).unwrap();
        assert!(psi[0].value.norm() < 1e-15);
        assert!(matches!(
            gordon_translate(&[(1.0, C64::new(0.0, 1.0))], GordonFamily::SinhPlus),
            Err(Error::FamilyMismatch { .. })
        ));
    }

    #[test]
    fn gordon_unwraps_along_the_list() {
        // f = e^{iθ} with θ winding past π
        let vals: Vec<(f64, C64)> = (0..40)
            .map(|j| (j as f64, C64::from_polar(1.0, 0.2 * j as f64)))
            .collect();
        let u = gordon_translate(&vals, GordonFamily::Sine).unwrap();
        for w in u.windows(2) {
            assert!((w[1].value - w[0].value + 0.4).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_parametrisation() {
        let p = real_point_from_phase(3.0, -PI / 2.0).unwrap();
        assert!(p.b5().re.abs() < 1e-15);
        assert!((p.b6().re - 0.894_427_190_999_916).abs() < 1e-12);
    }
}
