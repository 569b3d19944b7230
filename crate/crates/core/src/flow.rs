//! Integration on the positive ray that passes through zeros and poles.
//!
//! Away from singularities the state is the pair `(f, g)` with
//! `θf = 2fg`, `θg = 2x^2 (f^2 − f^-2)`, `θ = ln x`. Close to a zero or a pole
//! (large `|g|`) the state moves into one of four charts `(f_k, g̃_k)` with
//!
//! ```text
//! (f0, g0) = (f1^-1, −g1) = (−f2, g2) = (−f3^-1, −g3)
//! g_k = −x/f_k + 1/2 + f_k g̃_k / 2
//! θf_k = −2x + f_k + f_k^2 g̃_k
//! θg̃_k = 4x^2 f_k − g̃_k − f_k g̃_k^2
//! ```
//!
//! The chart vector field is polynomial, so a simple zero of `f_k` is an
//! ordinary point. Chart `k` crossing zero is an event of type
//! `[0−]`, `[∞−]`, `[0+]`, `[∞+]` for `k = 0, 1, 2, 3`.

use crate::asymptotics::{self, SeedOptions};
use crate::error::{Error, Result};
use crate::monodromy_space::MonodromyPoint;
use crate::ode::{Dopri5, Step};
use crate::special::bessel_k0_k1;
use crate::C64;
use log::{debug, trace};
use serde::{Deserialize, Serialize};

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartState {
    pub x: f64,
    pub k: u8,
    pub f: C64,
    pub gt: C64,
}

fn chart_pair(x: f64, f0: C64, g0: C64, k: u8) -> (C64, C64) {
    let (fk, gk) = match k {
        0 => (f0, g0),
        1 => (1.0 / f0, -g0),
        2 => (-f0, g0),
        _ => (-1.0 / f0, -g0),
    };
    (fk, 2.0 * (gk + x / fk - 0.5) / fk)
}

impl ChartState {
    /// Chart-0 state from the regular pair `(f0, g0)`.
    pub fn from_fg(x: f64, f0: C64, g0: C64) -> Self {
        let (f, gt) = chart_pair(x, f0, g0, 0);
        Self { x, k: 0, f, gt }
    }

    /// `g_k` of the active chart, undefined on the singular locus.
    pub fn g_k(&self) -> Option<C64> {
        if self.f == ZERO {
            return None;
        }
        Some(-self.x / self.f + 0.5 + self.f * self.gt * 0.5)
    }

    /// The underlying `(f0, g0)`, undefined at zeros and poles.
    pub fn to_fg(&self) -> Option<(C64, C64)> {
        let g = self.g_k()?;
        Some(match self.k {
            0 => (self.f, g),
            1 => (1.0 / self.f, -g),
            2 => (-self.f, g),
            _ => (-1.0 / self.f, -g),
        })
    }

    /// `f0` where it is finite; `None` at a pole.
    pub fn f0(&self) -> Option<C64> {
        match self.k {
            0 => Some(self.f),
            2 => Some(-self.f),
            1 if self.f != ZERO => Some(1.0 / self.f),
            3 if self.f != ZERO => Some(-1.0 / self.f),
            _ => None,
        }
    }
}

/// Same solution point expressed in chart `k_new`.
pub fn chart_convert(st: &ChartState, k_new: u8) -> Result<ChartState> {
    if k_new > 3 {
        return Err(Error::InvalidArgument(format!("chart index {k_new}")));
    }
    if k_new == st.k {
        return Ok(*st);
    }
    let (f0, g0) = st.to_fg().ok_or(Error::OnSingularLocus)?;
    let (f, gt) = chart_pair(st.x, f0, g0, k_new);
    Ok(ChartState {
        x: st.x,
        k: k_new,
        f,
        gt,
    })
}

/// `(x df/dx, x dg̃/dx)` in the active chart.
pub fn chart_rhs(st: &ChartState) -> (C64, C64) {
    chart_field(st.x, st.f, st.gt)
}

fn chart_field(x: f64, f: C64, gt: C64) -> (C64, C64) {
    (-2.0 * x + f + f * f * gt, 4.0 * x * x * f - gt - f * gt * gt)
}

fn regular_field(x: f64, f: C64, g: C64) -> (C64, C64) {
    let f2 = f * f;
    (2.0 * f * g, 2.0 * x * x * (f2 - 1.0 / f2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    ZeroMinus,
    PoleMinus,
    ZeroPlus,
    PolePlus,
}

impl EventKind {
    pub fn from_chart(k: u8) -> Self {
        match k {
            0 => EventKind::ZeroMinus,
            1 => EventKind::PoleMinus,
            2 => EventKind::ZeroPlus,
            _ => EventKind::PolePlus,
        }
    }

    pub fn chart(self) -> u8 {
        match self {
            EventKind::ZeroMinus => 0,
            EventKind::PoleMinus => 1,
            EventKind::ZeroPlus => 2,
            EventKind::PolePlus => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            EventKind::ZeroMinus => "[0-]",
            EventKind::PoleMinus => "[inf-]",
            EventKind::ZeroPlus => "[0+]",
            EventKind::PolePlus => "[inf+]",
        }
    }

    pub fn is_zero(self) -> bool {
        matches!(self, EventKind::ZeroMinus | EventKind::ZeroPlus)
    }

    /// Sign of real `f0` just to the right of the event.
    pub fn sign_after(self) -> f64 {
        match self {
            EventKind::ZeroMinus | EventKind::PoleMinus => -1.0,
            EventKind::ZeroPlus | EventKind::PolePlus => 1.0,
        }
    }
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub x: f64,
    pub kind: EventKind,
    pub gt: C64,
    /// A nearby regular state in the event's chart, taken from the trajectory
    /// before the crossing; used for local fits.
    #[serde(skip)]
    pub anchor: Option<ChartState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SampleValue {
    Finite(C64),
    Pole,
}

impl SampleValue {
    pub fn finite(self) -> Option<C64> {
        match self {
            SampleValue::Finite(v) => Some(v),
            SampleValue::Pole => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub value: SampleValue,
    pub chart: Option<u8>,
    pub event: bool,
    pub state: ChartState,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    pub steps: usize,
    pub chart_switches: usize,
    pub mode_switches: usize,
    pub max_step_error: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub events: Vec<FlowEvent>,
    pub diagnostics: FlowDiagnostics,
    pub end: ChartState,
}

impl Trajectory {
    pub fn final_state(&self) -> ChartState {
        self.end
    }

    pub fn event_kinds(&self) -> Vec<EventKind> {
        self.events.iter().map(|e| e.kind).collect()
    }

    /// `f0` at `x` by linear interpolation between the stored samples;
    /// intended for plotting-level lookups only.
    pub fn nearest_sample(&self, x: f64) -> Option<&Sample> {
        self.samples.iter().min_by(|a, b| {
            (a.x - x)
                .abs()
                .partial_cmp(&(b.x - x).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    /// One sample per accepted step.
    Steps,
    /// Samples on the given x-grid (plus events), via dense output.
    Grid(Vec<f64>),
    /// Only the end state and the events.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Leave the `(f, g)` variables once `|g|` exceeds this.
    pub enter_chart_g: f64,
    /// Return to `(f, g)` once `|g|` drops below this.
    pub leave_chart_g: f64,
    /// Minimum relative x-distance between two chart switches.
    pub hysteresis: f64,
    /// `|f_k|` below which a complex near-crossing counts as an event.
    pub complex_event_tol: f64,
    pub sampling: Sampling,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            enter_chart_g: 4.0,
            leave_chart_g: 2.0,
            hysteresis: 1e-6,
            complex_event_tol: 1e-8,
            sampling: Sampling::Steps,
            max_steps: 1_000_000,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            atol: tol,
            rtol: tol,
            ..Self::default()
        }
    }

    pub fn grid(mut self, grid: Vec<f64>) -> Self {
        self.sampling = Sampling::Grid(grid);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Regular,
    Chart(u8),
}

fn field(mode: Mode, t: f64, y: &[C64; 2]) -> [C64; 2] {
    let x = t.exp();
    let (a, b) = match mode {
        Mode::Regular => regular_field(x, y[0], y[1]),
        Mode::Chart(_) => chart_field(x, y[0], y[1]),
    };
    // dθ = dx / x, so x d/dx is d/dθ
    [a, b]
}

fn state_of(mode: Mode, x: f64, y: &[C64; 2]) -> ChartState {
    match mode {
        Mode::Regular => ChartState::from_fg(x, y[0], y[1]),
        Mode::Chart(k) => ChartState {
            x,
            k,
            f: y[0],
            gt: y[1],
        },
    }
}

fn f0_of(mode: Mode, y: &[C64; 2]) -> SampleValue {
    match mode {
        Mode::Regular => SampleValue::Finite(y[0]),
        Mode::Chart(k) => {
            let st = ChartState {
                x: 1.0,
                k,
                f: y[0],
                gt: y[1],
            };
            st.f0().map_or(SampleValue::Pole, SampleValue::Finite)
        }
    }
}

/// Chart with `|f_k| <= 1` and the smallest `|g̃_k|`.
fn best_chart(x: f64, f0: C64, g0: C64) -> (u8, C64, C64) {
    let mut best: Option<(u8, C64, C64)> = None;
    for k in 0..4u8 {
        let (fk, gt) = chart_pair(x, f0, g0, k);
        if fk.norm() > 1.0 || !gt.norm().is_finite() {
            continue;
        }
        if best.is_none_or(|b| gt.norm() < b.2.norm()) {
            best = Some((k, fk, gt));
        }
    }
    best.unwrap_or_else(|| {
        let (fk, gt) = chart_pair(x, f0, g0, 0);
        (0, fk, gt)
    })
}

fn is_realish(z: C64) -> bool {
    z.im.abs() <= 1e-9 * z.re.abs().max(1e-300) || z.im == 0.0
}

struct Integrator<'a> {
    opts: &'a FlowOptions,
    solver: Dopri5,
    samples: Vec<Sample>,
    events: Vec<FlowEvent>,
    diag: FlowDiagnostics,
}

impl Integrator<'_> {
    fn record(&mut self, mode: Mode, t: f64, y: &[C64; 2], event: bool) {
        let x = t.exp();
        let st = state_of(mode, x, y);
        self.samples.push(Sample {
            x,
            value: f0_of(mode, y),
            chart: match mode {
                Mode::Regular => None,
                Mode::Chart(k) => Some(k),
            },
            event,
            state: st,
        });
    }

    fn restep(&self, mode: Mode, step: &Step<2>, t: f64) -> [C64; 2] {
        let mut rhs = |tt: f64, yy: &[C64; 2]| field(mode, tt, yy);
        if t == step.t0 {
            return step.y0;
        }
        // two half steps keep the local error well below the accepted one
        let mid = 0.5 * (step.t0 + t);
        let y = self.solver.single_step(&mut rhs, step.t0, &step.y0, mid - step.t0);
        self.solver.single_step(&mut rhs, mid, &y, t - mid)
    }

    /// Newton iteration on `f_k(θ) = 0` using re-stepped states.
    fn polish(&self, mode: Mode, step: &Step<2>, t_guess: f64, real: bool) -> (f64, [C64; 2]) {
        let (lo, hi) = if step.t0 < step.t1 {
            (step.t0, step.t1)
        } else {
            (step.t1, step.t0)
        };
        let mut t = t_guess;
        let mut y = self.restep(mode, step, t);
        for _ in 0..30 {
            let d = field(mode, t, &y)[0];
            let dt = if real { y[0].re / d.re } else { (y[0] / d).re };
            if !dt.is_finite() {
                break;
            }
            let t_new = (t - dt).clamp(lo, hi);
            let done = (t_new - t).abs() <= 1e-14 * t.abs().max(1.0);
            t = t_new;
            y = self.restep(mode, step, t);
            if done {
                break;
            }
        }
        (t, y)
    }

    fn find_events(&mut self, k: u8, step: &Step<2>) {
        let mode = Mode::Chart(k);
        const NS: usize = 8;
        let ts: Vec<f64> = (0..=NS).map(|j| step.t0 + step.h() * j as f64 / NS as f64).collect();
        let ys: Vec<[C64; 2]> = ts
            .iter()
            .map(|&t| {
                if t == step.t0 {
                    step.y0
                } else if t == step.t1 {
                    step.y1
                } else {
                    step.dense(t)
                }
            })
            .collect();
        let real = ys.iter().all(|y| is_realish(y[0]));
        let mut found: Vec<(f64, [C64; 2])> = Vec::new();
        if real {
            for j in 0..NS {
                let a = ys[j][0].re;
                let b = ys[j + 1][0].re;
                // a zero sitting exactly at the step start belongs to the previous step
                let crosses = (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0) || (b == 0.0 && a != 0.0);
                if crosses {
                    let guess = if b == a {
                        ts[j + 1]
                    } else {
                        ts[j] + (ts[j + 1] - ts[j]) * a / (a - b)
                    };
                    found.push(self.polish(mode, step, guess, true));
                }
            }
        } else {
            let (jmin, _) = ys
                .iter()
                .enumerate()
                .map(|(j, y)| (j, y[0].norm()))
                .fold((0, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc });
            if jmin > 0 && jmin < NS {
                let (t, y) = self.polish(mode, step, ts[jmin], false);
                if y[0].norm() <= self.opts.complex_event_tol {
                    found.push((t, y));
                }
            }
        }
        for (t, y) in found {
            let x = t.exp();
            if self
                .events
                .iter()
                .any(|e| e.kind.chart() == k && (e.x - x).abs() <= 1e-11 * x)
            {
                continue;
            }
            let anchor = ChartState {
                x: step.t0.exp(),
                k,
                f: step.y0[0],
                gt: step.y0[1],
            };
            trace!("event {} at x = {x:.12e}", EventKind::from_chart(k));
            self.events.push(FlowEvent {
                x,
                kind: EventKind::from_chart(k),
                gt: y[1],
                anchor: Some(anchor),
            });
            if !matches!(self.opts.sampling, Sampling::None) {
                let mut yy = y;
                yy[0] = ZERO;
                self.record(mode, t, &yy, true);
            }
        }
    }
}

/// Integrate from `init` to `x_target` on the positive ray.
pub fn flow(init: &ChartState, x_target: f64, opts: &FlowOptions) -> Result<Trajectory> {
    if !(init.x > 0.0 && x_target > 0.0) {
        return Err(Error::InvalidArgument("flow needs x > 0".into()));
    }
    let mut it = Integrator {
        opts,
        solver: Dopri5 {
            atol: opts.atol,
            rtol: opts.rtol,
            h_min: 1e-13,
            h_max: 0.25,
            max_steps: opts.max_steps,
        },
        samples: Vec::new(),
        events: Vec::new(),
        diag: FlowDiagnostics {
            method: "dopri5 in ln x, (f,g) with four-chart fallback".into(),
            ..Default::default()
        },
    };

    let t_end = x_target.ln();
    let mut t = init.x.ln();
    let (mut mode, mut y) = match init.to_fg() {
        Some((f, g)) if g.norm() <= opts.enter_chart_g => (Mode::Regular, [f, g]),
        _ => (Mode::Chart(init.k), [init.f, init.gt]),
    };
    if !matches!(opts.sampling, Sampling::None) {
        it.record(mode, t, &y, false);
    }
    if t == t_end {
        return Ok(finish(it, state_of(mode, init.x, &y)));
    }
    let dir = (t_end - t).signum();
    let grid: Vec<f64> = match &opts.sampling {
        Sampling::Grid(g) => {
            let mut g: Vec<f64> = g.iter().map(|x| x.ln()).collect();
            g.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if dir < 0.0 {
                g.reverse();
            }
            g
        }
        _ => Vec::new(),
    };
    let mut gi = grid.iter().position(|&g| (g - t) * dir > 0.0).unwrap_or(grid.len());

    let mut k1 = field(mode, t, &y);
    let mut h = {
        let mut rhs = |tt: f64, yy: &[C64; 2]| field(mode, tt, yy);
        it.solver.initial_step(&mut rhs, t, &y, &k1, dir).min(0.05)
    };
    let mut last_switch = f64::NEG_INFINITY;

    loop {
        if it.diag.steps >= opts.max_steps {
            return Err(Error::StepFailure { x: t.exp(), h });
        }
        let step = {
            let mut rhs = |tt: f64, yy: &[C64; 2]| field(mode, tt, yy);
            it.solver.advance(&mut rhs, t, &y, &k1, h, t_end)?
        };
        it.diag.steps += 1;
        it.diag.max_step_error = it.diag.max_step_error.max(step.err);
        if let Mode::Chart(k) = mode {
            it.find_events(k, &step);
        }
        while gi < grid.len() && (step.t1 - grid[gi]) * dir >= 0.0 {
            let yy = if grid[gi] == step.t1 {
                step.y1
            } else {
                step.dense(grid[gi])
            };
            it.record(mode, grid[gi], &yy, false);
            gi += 1;
        }
        t = step.t1;
        y = step.y1;
        k1 = step.f1;
        h = step.h_next;
        if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFiniteState { x: t.exp() });
        }
        if matches!(opts.sampling, Sampling::Steps) {
            it.record(mode, t, &y, false);
        }
        if t == t_end {
            break;
        }

        let x = t.exp();
        let may_switch = ((t - last_switch).abs()) > opts.hysteresis;
        let new_mode = match mode {
            Mode::Regular => {
                if y[1].norm() > opts.enter_chart_g || y[0].norm() > 1e8 {
                    let (k, fk, gt) = best_chart(x, y[0], y[1]);
                    Some((Mode::Chart(k), [fk, gt]))
                } else {
                    None
                }
            }
            Mode::Chart(k) => {
                let st = ChartState {
                    x,
                    k,
                    f: y[0],
                    gt: y[1],
                };
                match st.to_fg() {
                    Some((f0, g0)) if may_switch && g0.norm() < opts.leave_chart_g && f0.norm() < 1e8 => {
                        Some((Mode::Regular, [f0, g0]))
                    }
                    // |f_k g̃_k| blows up when approaching another chart's event
                    Some((f0, g0))
                        if may_switch && (y[0].norm() > 1.0 || (y[0] * y[1]).norm() > 2.0 * opts.enter_chart_g) =>
                    {
                        let (kn, fk, gt) = best_chart(x, f0, g0);
                        if kn != k {
                            Some((Mode::Chart(kn), [fk, gt]))
                        } else {
                            None
                        }
                    }
                    _ => None,
                }
            }
        };
        if let Some((m, yy)) = new_mode {
            match (mode, m) {
                (Mode::Chart(_), Mode::Chart(_)) => it.diag.chart_switches += 1,
                _ => it.diag.mode_switches += 1,
            }
            mode = m;
            y = yy;
            k1 = field(mode, t, &y);
            last_switch = t;
        }
    }
    let end = state_of(mode, t.exp(), &y);
    Ok(finish(it, end))
}

fn finish(mut it: Integrator<'_>, end: ChartState) -> Trajectory {
    let by_x = |a: &f64, b: &f64| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal);
    it.samples.sort_by(|a, b| by_x(&a.x, &b.x));
    it.events.sort_by(|a, b| by_x(&a.x, &b.x));
    debug!(
        "flow: {} steps, {} events, {} chart switches",
        it.diag.steps,
        it.events.len(),
        it.diag.chart_switches
    );
    Trajectory {
        samples: it.samples,
        events: it.events,
        diagnostics: it.diag,
        end,
    }
}

/// Taylor coefficients `(a1, a2, a3)` of `f_k` at an event:
/// `a1 = −2`, `a2 = −1/x0`, `a3 = (2/x0^2 + 8 g̃/x0) / 6`.
pub fn event_series(ev: &FlowEvent) -> (C64, C64, C64) {
    let x0 = ev.x;
    (
        C64::new(-2.0, 0.0),
        C64::new(-1.0 / x0, 0.0),
        (2.0 / (x0 * x0) + 8.0 * ev.gt / x0) / 6.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalFit {
    pub f_at_event: C64,
    pub a1: C64,
    pub a2: C64,
    pub a3: C64,
}

fn chart_value_at(st: &ChartState, x: f64, tol: f64) -> Result<ChartState> {
    let solver = Dopri5 {
        atol: tol * 1e-3,
        rtol: tol,
        h_min: 1e-15,
        h_max: 0.01,
        max_steps: 100_000,
    };
    let k = st.k;
    let y = solver.integrate(
        |t, y: &[C64; 2]| field(Mode::Chart(k), t, y),
        st.x.ln(),
        [st.f, st.gt],
        x.ln(),
        |_| {},
    )?;
    Ok(ChartState {
        x,
        k,
        f: y[0],
        gt: y[1],
    })
}

/// Finite-difference Taylor coefficients of `f_k` around an event, obtained by
/// re-integrating the event's chart from the stored pre-event state.
pub fn local_fit(ev: &FlowEvent, h_rel: f64) -> Result<LocalFit> {
    let anchor = ev
        .anchor
        .ok_or_else(|| Error::InvalidArgument("event has no anchor state".into()))?;
    let x0 = ev.x;
    let h = h_rel * x0;
    let tol = 1e-13;
    let val = |x: f64| chart_value_at(&anchor, x, tol).map(|s| s.f);
    let fm2 = val(x0 - 2.0 * h)?;
    let fm1 = val(x0 - h)?;
    let f0 = val(x0)?;
    let fp1 = val(x0 + h)?;
    let fp2 = val(x0 + 2.0 * h)?;
    let a1 = (8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h);
    let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    let d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h * h * h);
    Ok(LocalFit {
        f_at_event: f0,
        a1,
        a2: d2 / 2.0,
        a3: d3 / 6.0,
    })
}

/// `f0(x)` for the solution with monodromy data `p`, seeded near 0 and flowed
/// out to `x`. Returns [`SampleValue::Pole`] when `x` is within `1e−9·x` of a pole.
pub fn sample_solution(p: &MonodromyPoint, x: f64, opts: &SeedOptions) -> Result<SampleValue> {
    let exp = asymptotics::expansion(p)?;
    let radius = opts.radius.unwrap_or(exp.valid_radius_hint);
    let x_seed = x.min(0.5 * radius);
    let seed = asymptotics::seed_state(p, x_seed, opts)?;
    let fl = FlowOptions {
        sampling: Sampling::None,
        ..opts.flow.clone()
    };
    let traj = flow(&seed, x, &fl)?;
    if traj
        .events
        .iter()
        .any(|e| !e.kind.is_zero() && (e.x - x).abs() <= 1e-9 * x)
    {
        return Ok(SampleValue::Pole);
    }
    Ok(traj.end.f0().map_or(SampleValue::Pole, SampleValue::Finite))
}

#[derive(Debug, Clone)]
pub struct RayOptions {
    pub seed: SeedOptions,
    /// `B` counts as `±I` when `|b2|` and `|b1 ∓ 1|` are below this.
    pub scalar_tol: f64,
}

impl Default for RayOptions {
    fn default() -> Self {
        Self {
            seed: SeedOptions {
                gap_safety: true,
                ..SeedOptions::default()
            },
            scalar_tol: 1e-10,
        }
    }
}

/// The solution with monodromy data `p` on `[x_lo, x_hi]`.
///
/// Real `s` with `B = ±I` goes through [`decaying_branch`]; everything else is
/// seeded from the small-x expansion at `min(x_lo, radius / 2)` and flowed out.
/// Sampling follows `opts.seed.flow.sampling`.
pub fn solve_on_ray(p: &MonodromyPoint, x_lo: f64, x_hi: f64, opts: &RayOptions) -> Result<Trajectory> {
    if !(x_lo > 0.0 && x_hi > x_lo) {
        return Err(Error::InvalidArgument("need 0 < x_lo < x_hi".into()));
    }
    if p.s.im.abs() <= crate::AXIS_TOL && p.is_scalar(opts.scalar_tol) {
        let sign = p.b1.re.signum();
        let mut traj = decaying_branch(p.s.re, sign, x_lo, x_hi.max(8.0), &opts.seed.flow)?;
        traj.samples.retain(|s| s.x <= x_hi * (1.0 + 1e-15));
        return Ok(traj);
    }
    let exp = asymptotics::expansion(p)?;
    let radius = opts.seed.radius.unwrap_or(exp.valid_radius_hint);
    let x_seed = x_lo.min(0.5 * radius);
    let seed = asymptotics::seed_state(p, x_seed, &opts.seed)?;
    flow(&seed, x_hi, &opts.seed.flow)
}

/// The real solution with connection matrix `B = sign·I` and real Stokes
/// parameter `s`, on `[x_lo, x_hi]`.
///
/// These solutions approach `sign` exponentially fast as `x → ∞`, so forward
/// integration from small x amplifies rounding by about `e^{4x}`. Instead the
/// solution starts on its large-x tail `φ = −(2s/π) K0(4x)` with
/// `φ = 2 log(sign·f)`, `ψ = θφ`, `θψ = 16 x^2 sinh φ`, and is integrated
/// towards 0. Once `|φ|` reaches `PHI_HANDOFF` the state is passed to [`flow`],
/// which continues through any zeros and poles.
pub fn decaying_branch(s: f64, sign: f64, x_lo: f64, x_hi: f64, opts: &FlowOptions) -> Result<Trajectory> {
    const PHI_HANDOFF: f64 = 0.25;
    if !s.is_finite() {
        return Err(Error::InvalidArgument("s must be finite".into()));
    }
    if !(x_lo > 0.0 && x_hi > x_lo && x_hi >= 8.0) {
        return Err(Error::InvalidArgument("need 0 < x_lo < x_hi, x_hi >= 8".into()));
    }
    let sign = if sign < 0.0 { -1.0 } else { 1.0 };
    let x_start = x_hi.max(16.0);
    let (k0, k1) = bessel_k0_k1(4.0 * x_start);
    let amp = -2.0 * s / std::f64::consts::PI;
    let y0 = [C64::new(amp * k0, 0.0), C64::new(-4.0 * x_start * amp * k1, 0.0)];

    let grid: Vec<f64> = match &opts.sampling {
        Sampling::Grid(g) => g.clone(),
        Sampling::Steps => {
            let n = 400;
            (0..=n)
                .map(|j| x_lo * (x_hi / x_lo).powf(j as f64 / n as f64))
                .collect()
        }
        Sampling::None => Vec::new(),
    };
    let to_state = |x: f64, y: &[C64; 2]| {
        let f = sign * (0.5 * y[0].re).exp();
        ChartState::from_fg(x, C64::new(f, 0.0), C64::new(0.25 * y[1].re, 0.0))
    };
    let to_sample = |x: f64, y: &[C64; 2]| {
        let st = to_state(x, y);
        Sample {
            x,
            value: SampleValue::Finite(st.f),
            chart: None,
            event: false,
            state: st,
        }
    };

    let solver = Dopri5 {
        atol: 1e-300,
        rtol: opts.rtol.min(1e-12),
        h_min: 1e-14,
        h_max: 0.05,
        max_steps: opts.max_steps,
    };
    let mut rhs = |t: f64, y: &[C64; 2]| {
        let x = t.exp();
        [y[1], 16.0 * x * x * y[0].sinh()]
    };
    let mut samples = Vec::new();
    let mut steps = 0;
    let mut max_err: f64 = 0.0;
    let t_lo = x_lo.ln();
    let mut t = x_start.ln();
    let mut y = y0;
    let mut k = rhs(t, &y);
    let mut h = solver.initial_step(&mut rhs, t, &y, &k, -1.0).min(0.05);
    if grid.contains(&x_start) {
        samples.push(to_sample(x_start, &y));
    }
    while t > t_lo && y[0].re.abs() < PHI_HANDOFF {
        if steps >= opts.max_steps {
            return Err(Error::StepFailure { x: t.exp(), h });
        }
        let st = solver.advance(&mut rhs, t, &y, &k, h, t_lo)?;
        steps += 1;
        max_err = max_err.max(st.err);
        for &x in &grid {
            let tg = x.ln();
            if tg < st.t0 && tg >= st.t1 {
                let yy = if tg == st.t1 { st.y1 } else { st.dense(tg) };
                samples.push(to_sample(x, &yy));
            }
        }
        t = st.t1;
        y = st.y1;
        k = st.f1;
        h = st.h_next;
    }
    let x_switch = t.exp();
    let mut diag = FlowDiagnostics {
        steps,
        chart_switches: 0,
        mode_switches: 0,
        max_step_error: max_err,
        method: format!(
            "backward from the K0 tail at x = {x_start}, amplitude {:.15e}",
            amp * k0
        ),
    };
    let mut events = Vec::new();
    let mut end = to_state(x_switch, &y);
    if t > t_lo {
        let rest: Vec<f64> = grid.iter().copied().filter(|&g| g < x_switch).collect();
        let fl = FlowOptions {
            sampling: if rest.is_empty() {
                Sampling::None
            } else {
                Sampling::Grid(rest)
            },
            ..opts.clone()
        };
        let tail = flow(&end, x_lo, &fl)?;
        samples.extend(tail.samples.into_iter().filter(|s| s.x < x_switch));
        events = tail.events;
        end = tail.end;
        diag.steps += tail.diagnostics.steps;
        diag.chart_switches = tail.diagnostics.chart_switches;
        diag.mode_switches = tail.diagnostics.mode_switches + 1;
        diag.max_step_error = diag.max_step_error.max(tail.diagnostics.max_step_error);
    }
    samples.retain(|s| s.x >= x_lo * (1.0 - 1e-15) && s.x <= x_hi * (1.0 + 1e-15));
    samples.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
    samples.dedup_by(|a, b| a.x == b.x);
    Ok(Trajectory {
        samples,
        events,
        diagnostics: diag,
        end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn convert_examples() {
        let st = ChartState {
            x: 1.0,
            k: 0,
            f: c(1., 0.),
            gt: c(1., 0.),
        };
        let s1 = chart_convert(&st, 1).unwrap();
        assert_eq!((s1.f, s1.gt), (c(1., 0.), c(1., 0.)));
        let s2 = chart_convert(&st, 2).unwrap();
        assert_eq!((s2.f, s2.gt), (c(-1., 0.), c(3., 0.)));
        let z = ChartState {
            x: 1.0,
            k: 2,
            f: ZERO,
            gt: c(1., 0.),
        };
        assert_eq!(chart_convert(&z, 0), Err(Error::OnSingularLocus));
    }

    #[test]
    fn rhs_examples() {
        let st = ChartState {
            x: 1.0,
            k: 0,
            f: c(1., 0.),
            gt: c(1., 0.),
        };
        assert_eq!(chart_rhs(&st), (c(0., 0.), c(2., 0.)));
        let st = ChartState {
            x: 1.5,
            k: 3,
            f: ZERO,
            gt: c(0.7, 0.),
        };
        assert_eq!(chart_rhs(&st), (c(-3., 0.), c(-0.7, 0.)));
        let st = ChartState {
            x: 1.0,
            k: 0,
            f: c(2., 0.),
            gt: ZERO,
        };
        assert_eq!(chart_rhs(&st), (c(0., 0.), c(8., 0.)));
    }

    #[test]
    fn series_examples() {
        let ev = FlowEvent {
            x: 1.0,
            kind: EventKind::ZeroMinus,
            gt: ZERO,
            anchor: None,
        };
        let (a1, a2, a3) = event_series(&ev);
        assert_eq!((a1, a2), (c(-2., 0.), c(-1., 0.)));
        assert!((a3 - c(1. / 3., 0.)).norm() < 1e-15);
        let ev = FlowEvent { x: 2.0, ..ev };
        let (_, a2, a3) = event_series(&ev);
        assert_eq!(a2, c(-0.5, 0.));
        assert!((a3 - c(1. / 12., 0.)).norm() < 1e-15);
    }

    // (f, g) integrated with θ = ln x as an independent check of the chart field
    #[test]
    fn chart_field_matches_regular_field() {
        let x: f64 = 0.8;
        let (f0, g0) = (c(0.7, 0.2), c(-0.3, 0.5));
        let h = 1e-6;
        let solve = |xe: f64| {
            Dopri5::with_tol(1e-14, 1e-14)
                .integrate(
                    |t, y: &[C64; 2]| {
                        let (a, b) = regular_field(t.exp(), y[0], y[1]);
                        [a, b]
                    },
                    x.ln(),
                    [f0, g0],
                    xe.ln(),
                    |_| {},
                )
                .unwrap()
        };
        let yp = solve(x * (1.0 + h));
        let ym = solve(x * (1.0 - h));
        for k in 0..4u8 {
            let (fp, gp) = chart_pair(x * (1.0 + h), yp[0], yp[1], k);
            let (fm, gm) = chart_pair(x * (1.0 - h), ym[0], ym[1], k);
            let dt = (1.0 + h).ln() - (1.0 - h).ln();
            let (fk, gk) = chart_pair(x, f0, g0, k);
            let (df, dg) = chart_field(x, fk, gk);
            assert!(((fp - fm) / dt - df).norm() < 1e-6, "chart {k}");
            assert!(((gp - gm) / dt - dg).norm() < 1e-6, "chart {k}");
        }
    }
}
