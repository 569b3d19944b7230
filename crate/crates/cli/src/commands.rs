use crate::output::{csv_text, emit, fmt_float, to_json};
use crate::{parse_complex, usage, Format, PointArgs};
use anyhow::Result;
use clap::Args;
use painleve3_core::*;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::path::PathBuf;

pub struct Ctx {
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Ctx {
    fn json<T: serde::Serialize>(&self, value: &T) -> Result<()> {
        if self.format != Format::Json {
            return usage("this command only writes JSON; csv is available for flow and sheets");
        }
        emit(&to_json(value)?, self.out.as_deref())
    }
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    /// Absolute tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    tol_abs: f64,
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    tol_rel: f64,
}

impl TolArgs {
    fn flow(&self, sampling: Sampling) -> Result<FlowOptions> {
        if !(self.tol_abs > 0.0 && self.tol_rel > 0.0) {
            return usage("tolerances must be positive");
        }
        Ok(FlowOptions {
            atol: self.tol_abs,
            rtol: self.tol_rel,
            sampling,
            ..FlowOptions::default()
        })
    }

    fn ray(&self, sampling: Sampling) -> Result<RayOptions> {
        let mut opts = RayOptions::default();
        opts.seed.flow = self.flow(sampling)?;
        Ok(opts)
    }
}

fn check_range(x0: f64, x1: f64) -> Result<()> {
    if !(x0 > 0.0 && x1 > x0 && x1.is_finite()) {
        return usage(format!("need 0 < --x0 < --x1, got {x0} and {x1}"));
    }
    Ok(())
}

fn matrix_json(m: &Matrix2<C64>) -> Value {
    json!([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

fn point_json(p: &MonodromyPoint) -> Value {
    json!({"s": p.s, "b1": p.b1, "b2": p.b2, "b5": p.b5(), "b6": p.b6()})
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct ClassifyArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Lower end of the verification flow.
    #[arg(long, default_value_t = 1e-10)]
    x0: f64,
    /// Upper end of the verification flow.
    #[arg(long, default_value_t = 20.0)]
    x1: f64,
    #[command(flatten)]
    tol: TolArgs,
}

pub fn classify(ctx: &Ctx, a: &ClassifyArgs) -> Result<()> {
    let p = a.point.point()?;
    check_range(a.x0, a.x1)?;
    let st = stratum(&p)?;
    let pattern = predicted_sequence(st);
    let traj = solve_on_ray(&p, a.x0, a.x1, &a.tol.ray(Sampling::Steps)?)?;
    let rep = verify_trajectory(&traj, st, &VerifyOptions::default());
    let mut terp = [true; 4];
    let mut terp_samples = 0usize;
    for smp in traj.samples.iter().filter(|s| !s.event) {
        let t = terp_status(&p, smp.x, smp.value)?;
        terp_samples += 1;
        for (acc, v) in terp
            .iter_mut()
            .zip([t.pure, t.polarized, t.nilpotent_orbit, t.sabbah_orbit])
        {
            *acc &= v;
        }
    }
    let verification = match rep {
        Ok(r) => json!({
            "matched": r.matched,
            "sign_consistent": r.sign_consistent,
            "single_split": r.single_split,
            "observed": r.observed.iter().map(|k| k.label()).collect::<Vec<_>>(),
            "event_x": r.event_x,
            "splits": r.splits.iter().map(|s| json!({"index": s.index, "y0": s.y0, "splitting": s.splitting})).collect::<Vec<_>>(),
            "diagnostics": r.diagnostics,
        }),
        Err(e) => json!({"matched": false, "error": e.to_string()}),
    };
    ctx.json(&json!({
        "near_zero": st.near_zero,
        "near_infinity": st.near_infinity,
        "label": st.label(),
        "conditions": {
            "near_zero": st.near_zero.condition(),
            "near_infinity": st.near_infinity.condition(),
        },
        "predicted": pattern.label(),
        "outer_phase_free": pattern.outer_phase_free,
        "reality": memberships(&p, 1e-9),
        "point": point_json(&p),
        "terp": {
            "pure": terp[0],
            "polarized": terp[1],
            "nilpotent_orbit": terp[2],
            "sabbah_orbit": terp[3],
            "samples": terp_samples,
            "x_range": [a.x0, a.x1],
        },
        "verification": verification,
    }))
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SpectralArgs {
    /// Stokes parameter, `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    s: C64,
}

pub fn spectral(ctx: &Ctx, a: &SpectralArgs) -> Result<()> {
    let sp = painleve3_core::spectral(a.s);
    let (mon0, t) = structure_matrices(a.s);
    let mut v = serde_json::to_value(sp)?;
    v["case"] = json!(asymptotic_case(a.s));
    v["mon0"] = matrix_json(&mon0);
    v["t"] = matrix_json(&t);
    ctx.json(&v)
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct FlowArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 1e-4)]
    x0: f64,
    #[arg(long, default_value_t = 20.0)]
    x1: f64,
    /// Sample on a log grid with this many points per decade instead of at
    /// every integrator step.
    #[arg(long)]
    per_decade: Option<usize>,
    #[command(flatten)]
    tol: TolArgs,
}

pub fn flow(ctx: &Ctx, a: &FlowArgs) -> Result<()> {
    let p = a.point.point()?;
    check_range(a.x0, a.x1)?;
    let sampling = match a.per_decade {
        Some(0) => return usage("--per-decade must be positive"),
        Some(n) => {
            let decades = (a.x1 / a.x0).log10();
            let m = (decades * n as f64).ceil().max(1.0) as usize;
            Sampling::Grid(
                (0..=m)
                    .map(|j| a.x0 * (a.x1 / a.x0).powf(j as f64 / m as f64))
                    .collect(),
            )
        }
        None => Sampling::Steps,
    };
    let traj = solve_on_ray(&p, a.x0, a.x1, &a.tol.ray(sampling)?)?;
    let samples: Vec<&Sample> = traj.samples.iter().filter(|s| s.x >= a.x0 * (1.0 - 1e-12)).collect();
    match ctx.format {
        Format::Csv => {
            let rows = samples.iter().map(|s| {
                let (re, im) = match s.value.finite() {
                    Some(v) => (fmt_float(v.re), fmt_float(v.im)),
                    None => ("inf".into(), String::new()),
                };
                let kind = if s.event {
                    traj.events
                        .iter()
                        .find(|e| e.x == s.x)
                        .map_or("", |e| e.kind.label())
                        .to_string()
                } else {
                    String::new()
                };
                vec![fmt_float(s.x), re, im, s.chart.map_or(String::new(), |c| c.to_string()), kind]
            });
            emit(&csv_text(&["x", "f_re", "f_im", "chart", "event"], rows)?, ctx.out.as_deref())
        }
        Format::Json => ctx.json(&json!({
            "point": point_json(&p),
            "events": traj.events.iter().map(|e| json!({"x": e.x, "kind": e.kind.label(), "gt": e.gt})).collect::<Vec<_>>(),
            "samples": samples.iter().map(|s| json!({"x": s.x, "f": s.value.finite(), "chart": s.chart, "event": s.event})).collect::<Vec<_>>(),
            "diagnostics": traj.diagnostics,
        })),
    }
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct MonodromyArgs {
    /// Position on the positive ray.
    #[arg(long)]
    x0: f64,
    /// f(x0), `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    f: C64,
    /// g(x0) = θf / (2f), `re` or `re,im`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    g: C64,
    /// Relative tolerance of the transport integrations.
    #[arg(long, default_value_t = 1e-12)]
    tol_rel: f64,
}

pub fn monodromy(ctx: &Ctx, a: &MonodromyArgs) -> Result<()> {
    if !(a.x0 > 0.0) {
        return usage("--x0 must be positive");
    }
    let sys = linear_system(&ChartState::from_fg(a.x0, a.f, a.g))?;
    let opts = StokesOptions {
        transport_tol: a.tol_rel,
        ..StokesOptions::default()
    };
    let out = stokes_data(&sys, &opts)?;
    let mut v = serde_json::to_value(&out)?;
    v["point"] = point_json(&out.point);
    ctx.json(&v)
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct RoundtripArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Seed location.
    #[arg(long, default_value_t = 1e-3)]
    x0: f64,
    /// Probe location where the data is recovered.
    #[arg(long, default_value_t = 1.0)]
    x1: f64,
    /// Seed between the predicted zeros/poles on the ladders of real |s| > 2.
    #[arg(long)]
    gap_safety: bool,
    #[command(flatten)]
    tol: TolArgs,
}

pub fn roundtrip(ctx: &Ctx, a: &RoundtripArgs) -> Result<()> {
    let p = a.point.point()?;
    check_range(a.x0, a.x1)?;
    let seed = SeedOptions {
        gap_safety: a.gap_safety,
        flow: a.tol.flow(Sampling::None)?,
        ..SeedOptions::default()
    };
    let rep = round_trip(&p, a.x0, a.x1, &seed, &StokesOptions::default())?;
    ctx.json(&json!({
        "input": point_json(&p),
        "recovered": point_json(&rep.recovered.point),
        "s_err": rep.s_err,
        "b_err": rep.b_err,
        "det_b_error": rep.recovered.det_b_error,
        "transpose_error": rep.recovered.transpose_error,
        "commutator_error": rep.recovered.commutator_error,
        "residual_structure": rep.recovered.residual_structure,
        "probe": {"x": rep.probe.x, "chart": rep.probe.k, "f": rep.probe.f, "gt": rep.probe.gt},
    }))
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Where to evaluate the expansion.
    #[arg(long, default_value_t = 1e-3)]
    x0: f64,
    /// Number of predicted ladder events (real |s| > 2 only).
    #[arg(long, default_value_t = 10)]
    count: usize,
}

pub fn asymptotics(ctx: &Ctx, a: &AsymptoticsArgs) -> Result<()> {
    let p = a.point.point()?;
    if !(a.x0 > 0.0) {
        return usage("--x0 must be positive");
    }
    let exp = painleve3_core::asymptotics::expansion(&p)?;
    let ladder = match exp.case {
        AsymptoticCase::BPlus | AsymptoticCase::BMinus => predict_small_x_events(&p, a.count)?,
        _ => Vec::new(),
    };
    let (f, g) = exp.eval_fg(C64::new(a.x0, 0.0));
    ctx.json(&json!({
        "case": exp.case,
        "terms": exp.terms,
        "reciprocal": exp.reciprocal,
        "valid_radius_hint": exp.valid_radius_hint,
        "x": a.x0,
        "f": f,
        "g": g,
        "ladder": ladder.iter().map(|e| json!({"k": e.k, "x": e.x, "kind": e.kind.label()})).collect::<Vec<_>>(),
    }))
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SheetsArgs {
    /// Grid of Stokes parameters `start:end:count`.
    #[arg(long, allow_hyphen_values = true)]
    s_grid: String,
    /// Grid of b6 values `start:end:count` (b5 from the constraint).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "phase_grid")]
    b6_grid: Option<String>,
    /// Sign of b5 for --b6-grid nodes.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    sign5: f64,
    /// Grid of phases θ of b₋ = e^{iθ}, `start:end:count` (needs |s| > 2).
    #[arg(long, allow_hyphen_values = true)]
    phase_grid: Option<String>,
    /// Event indices `k0:k1` relative to the split point.
    #[arg(long, allow_hyphen_values = true, default_value = "0:0")]
    k: String,
    #[arg(long, default_value_t = 1e-6)]
    x0: f64,
    #[arg(long, default_value_t = 20.0)]
    x1: f64,
    #[command(flatten)]
    tol: TolArgs,
}

pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || usage(format!("malformed grid {text:?}; expected start:end:count"));
    let [a, b, n] = parts.as_slice() else { return bad() };
    let (Ok(a), Ok(b), Ok(n)) = (a.parse::<f64>(), b.parse::<f64>(), n.parse::<usize>()) else {
        return bad();
    };
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return bad();
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect())
}

fn parse_k(text: &str) -> Result<std::ops::RangeInclusive<i64>> {
    let parsed = text
        .split_once(':')
        .and_then(|(a, b)| Some((a.parse::<i64>().ok()?, b.parse::<i64>().ok()?)));
    match parsed {
        Some((a, b)) if a <= b => Ok(a..=b),
        _ => usage(format!("malformed index range {text:?}; expected k0:k1 with k0 <= k1")),
    }
}

pub fn sheets(ctx: &Ctx, a: &SheetsArgs) -> Result<()> {
    check_range(a.x0, a.x1)?;
    let ks = parse_k(&a.k)?;
    let s_grid = parse_grid(&a.s_grid)?;
    let mut nodes = Vec::new();
    match (&a.b6_grid, &a.phase_grid) {
        (Some(g), None) => {
            if a.sign5.abs() != 1.0 {
                return usage("--sign5 must be 1 or -1");
            }
            let b6s = parse_grid(g)?;
            for &s in &s_grid {
                for &b6 in &b6s {
                    let rad = 1.0 + (1.0 - s * s / 4.0) * b6 * b6;
                    if rad < 0.0 {
                        return usage(format!("no real b5 for s = {s}, b6 = {b6}"));
                    }
                    nodes.push(MonodromyPoint::from_real_form(s, a.sign5 * rad.sqrt(), b6, 1e-10)?);
                }
            }
        }
        (None, Some(g)) => {
            let phases = parse_grid(g)?;
            for &s in &s_grid {
                for &th in &phases {
                    nodes.push(real_point_from_phase(s, th)?);
                }
            }
        }
        _ => return usage("give exactly one of --b6-grid or --phase-grid"),
    }
    let opts = SheetOptions {
        x_lo: a.x0,
        x_hi: a.x1,
        ray: a.tol.ray(Sampling::None)?,
        ..SheetOptions::default()
    };
    let mut rows = sheet_trace(&nodes, ks, &opts)?;
    for r in rows.iter().filter(|r| r.break_flag) {
        log::warn!("sheet break at s = {}, b6 = {}, k = {}", r.s, r.b6, r.k);
    }
    // deterministic order independent of the worker schedule
    rows.par_sort_by(|x, y| {
        (x.s, x.b5, x.b6, x.k)
            .partial_cmp(&(y.s, y.b5, y.b6, y.k))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    match ctx.format {
        Format::Csv => {
            let lines = rows.iter().map(|r| {
                vec![
                    fmt_float(r.s),
                    fmt_float(r.b5),
                    fmt_float(r.b6),
                    r.k.to_string(),
                    fmt_float(r.x_k),
                    r.kind.label().to_string(),
                ]
            });
            emit(&csv_text(&["s", "b5", "b6", "k", "x_k", "kind"], lines)?, ctx.out.as_deref())
        }
        Format::Json => ctx.json(&rows
            .iter()
            .map(|r| json!({"s": r.s, "b5": r.b5, "b6": r.b6, "k": r.k, "x_k": r.x_k, "kind": r.kind.label(), "break": r.break_flag}))
            .collect::<Vec<_>>()),
    }
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct SymmetryArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Value of ξ carried along by the symmetries.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex, default_value = "0")]
    xi: C64,
}

fn point_distance(a: &MonodromyPoint, b: &MonodromyPoint) -> f64 {
    [(a.s - b.s), (a.b1 - b.b1), (a.b2 - b.b2)]
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

pub fn symmetry_check(ctx: &Ctx, a: &SymmetryArgs) -> Result<()> {
    let p = a.point.point()?;
    let xi = a.xi;
    let images: Vec<Value> = Symmetry::ALL
        .iter()
        .map(|&sym| {
            let (x, q) = apply_symmetry(sym, xi, &p);
            json!({"symmetry": format!("{sym:?}"), "xi": x, "point": point_json(&q), "constraint_residual": q.residual()})
        })
        .collect();
    let (x1, q) = apply_symmetry(Symmetry::R5, xi, &p);
    let (x2, q) = apply_symmetry(Symmetry::R5, x1, &q);
    let r5 = point_distance(&p, &q).max((x2 - xi).norm());
    let (a1, l) = apply_symmetry(Symmetry::R4, xi, &p);
    let (a2, l) = apply_symmetry(Symmetry::R4, a1, &l);
    let (c1, r) = apply_symmetry(Symmetry::M1Inv, xi, &p);
    let (c2, r) = apply_symmetry(Symmetry::R2, c1, &r);
    let r4 = point_distance(&l, &r).max((a2 - c2).norm());
    let q0 = quotient_invariants(&p);
    let orbit = [Symmetry::R1, Symmetry::R2, Symmetry::R3]
        .iter()
        .map(|&sym| {
            let q = quotient_invariants(&apply_symmetry(sym, xi, &p).1);
            (q.y1 - q0.y1)
                .norm()
                .max((q.y2 - q0.y2).norm())
                .max((q.y3 - q0.y3).norm())
        })
        .fold(0.0, f64::max);
    ctx.json(&json!({
        "point": point_json(&p),
        "xi": xi,
        "images": images,
        "r5_squared_error": r5,
        "r4_squared_vs_r2_m1inv_error": r4,
        "quotient": {"y1": q0.y1, "y2": q0.y2, "y3": q0.y3, "cubic_residual": q0.residual},
        "quotient_orbit_error": orbit,
    }))
}
