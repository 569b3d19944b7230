mod common;

use common::*;
use painleve3_core::*;
use proptest::prelude::*;

fn complex(max: f64) -> impl Strategy<Value = C64> {
    (-max..max, -max..max).prop_map(|(re, im)| c(re, im))
}

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = C64> {
    (lo.ln()..hi.ln(), -3.1..3.1f64).prop_map(|(r, a)| C64::from_polar(r.exp(), a))
}

fn generic_point() -> impl Strategy<Value = MonodromyPoint> {
    (complex(4.0), nonzero(0.2, 5.0))
        .prop_filter("off s = ±2", |(s, _)| {
            (s - 2.0).norm() > 1e-3 && (s + 2.0).norm() > 1e-3
        })
        .prop_map(|(s, bm)| point_from_eigen(s, bm))
}

// real point with |s| < 2 (mixed), |s| > 2 (phase), or scalar B; `gap` keeps
// |s| away from 2, where the events thin out to a handful per 30 decades
fn real_point_with_gap(gap: f64) -> impl Strategy<Value = MonodromyPoint> {
    prop_oneof![
        (-1.95..1.95f64, prop::bool::ANY, 0.1..3.0f64, prop::bool::ANY)
            .prop_map(|(s, pos, b6, up)| { real_mixed(s, if pos { 1.0 } else { -1.0 }, if up { b6 } else { -b6 }) }),
        (2.0 + gap..6.0f64, prop::bool::ANY, 0.15..3.0f64, prop::bool::ANY).prop_map(|(s, pos, th, up)| {
            let s = if pos { s } else { -s };
            real_point_from_phase(s, if up { th } else { -th }).unwrap()
        }),
        (-6.0..6.0f64, prop::bool::ANY)
            .prop_filter("gap around |s| = 2", move |(s, _)| (s.abs() - 2.0).abs() > gap
                || s.abs() < 2.0)
            .prop_map(|(s, pos)| real_scalar(s, if pos { 1.0 } else { -1.0 })),
    ]
}

fn real_point() -> impl Strategy<Value = MonodromyPoint> {
    real_point_with_gap(0.05)
}

fn rel_close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chart_round_trip(x in 1e-3..10.0f64, f in nonzero(0.05, 20.0), g in complex(5.0), k in 0u8..4) {
        let st = ChartState::from_fg(x, f, g);
        let there = chart_convert(&st, k).unwrap();
        let back = chart_convert(&there, 0).unwrap();
        let (f1, g1) = back.to_fg().unwrap();
        prop_assert!(rel_close(f1, f, 1e-12));
        prop_assert!(rel_close(g1, g, 1e-10));
    }

    #[test]
    fn chart_fields_agree(x in 1e-3..10.0f64, f in nonzero(0.05, 20.0), g in complex(5.0), k in 1u8..4) {
        // θ f_k computed in chart k equals the transformed chart-0 derivative
        let st0 = ChartState::from_fg(x, f, g);
        let stk = chart_convert(&st0, k).unwrap();
        let (df0, _) = chart_rhs(&st0);
        let (dfk, _) = chart_rhs(&stk);
        let want = match k {
            1 => -df0 / (f * f),
            2 => -df0,
            _ => df0 / (f * f),
        };
        prop_assert!(rel_close(dfk, want, 1e-10), "{dfk} vs {want}");
    }

    #[test]
    fn symmetries_preserve_the_surface(p in generic_point(), xi in complex(1.0)) {
        let scale = p.matrix().iter().map(|z| z.norm_sqr()).fold(1.0, f64::max) * p.s.norm().max(1.0);
        for sym in Symmetry::ALL {
            let (_, q) = apply_symmetry(sym, xi, &p);
            prop_assert!(q.residual() < 1e-12 * scale * 16.0, "{sym:?}: {}", q.residual());
        }
        let (x1, q) = apply_symmetry(Symmetry::R5, xi, &p);
        let (x2, q) = apply_symmetry(Symmetry::R5, x1, &q);
        prop_assert!(max_norm(&p, &q) <= 1e-14 * scale.sqrt());
        prop_assert_eq!(x2, xi);
    }

    #[test]
    fn quotient_is_orbit_invariant(p in generic_point()) {
        let q0 = quotient_invariants(&p);
        let scale = (q0.y1.norm() + 1.0) * (q0.y2.norm() + q0.y3.norm() + 1.0).powi(2);
        prop_assert!(q0.residual <= 1e-12 * scale);
        for sym in [Symmetry::R1, Symmetry::R2, Symmetry::R3] {
            let q = quotient_invariants(&apply_symmetry(sym, c(0.0, 0.0), &p).1);
            prop_assert_eq!((q.y1, q.y2, q.y3), (q0.y1, q0.y2, q0.y3));
        }
    }

    #[test]
    fn spectral_identities(s in complex(6.0)) {
        let sp = spectral(s);
        prop_assert!((sp.lambda_plus * sp.lambda_minus - 1.0).norm() < 1e-10);
        prop_assert!((sp.alpha_plus + sp.alpha_minus).norm() < 1e-12);
        let (mon0, t) = structure_matrices(s);
        let scale = mon0.iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(((t * t) + mon0).iter().all(|z| z.norm() <= 1e-12 * scale));
    }

    #[test]
    fn gordon_round_trip(
        xs in prop::collection::vec((1e-3..10.0f64, nonzero(0.1, 10.0)), 1..20),
        family in prop_oneof![Just(GordonFamily::SinhPlus), Just(GordonFamily::SinhMinus), Just(GordonFamily::Sine)],
    ) {
        let values: Vec<(f64, C64)> = xs
            .into_iter()
            .map(|(x, z)| {
                let f = match family {
                    GordonFamily::SinhPlus => c(z.re.signum() * z.norm(), 0.0),
                    GordonFamily::SinhMinus => c(0.0, z.norm()),
                    GordonFamily::Sine => z / z.norm(),
                };
                (x, f)
            })
            .collect();
        let pts = gordon_translate(&values, family).unwrap();
        for (p, (x, f)) in gordon_inverse(&pts, family).into_iter().zip(&values) {
            prop_assert_eq!(p.0, *x);
            prop_assert!((p.1 - f).norm() <= 1e-12 * f.norm());
        }
        prop_assert!(pts.iter().all(|p| p.x_ni == 4.0 * p.x));
        // imaginary-axis and unimodular f give real fields on every branch
        if family != GordonFamily::SinhPlus {
            prop_assert!(pts.iter().all(|p| p.value.im.abs() < 1e-12));
        }
    }

    #[test]
    fn negation_flips_strata(p in real_point()) {
        let st = stratum(&p).unwrap();
        let (_, q) = apply_symmetry(Symmetry::R2, c(0.0, 0.0), &p);
        prop_assert_eq!(stratum(&q).unwrap(), st.negated());
        prop_assert_eq!(st.negated().negated(), st);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn real_flows_follow_their_stratum(p in real_point_with_gap(0.5)) {
        let st = stratum(&p).unwrap();
        let traj = solve_on_ray(&p, 1e-10, 20.0, &RayOptions::default()).unwrap();
        prop_assert!(traj.samples.iter().filter_map(|s| s.value.finite()).all(|f| f.im == 0.0));
        let rep = verify_trajectory(&traj, st, &VerifyOptions::default()).unwrap();
        prop_assert!(rep.matched, "{st}: {:?} {:?}", rep.observed, rep.diagnostics);
    }

    #[test]
    fn negation_flips_the_solution(p in real_point()) {
        let (_, q) = apply_symmetry(Symmetry::R2, c(0.0, 0.0), &p);
        let grid = vec![1e-3, 0.01, 0.1, 1.0];
        let mut opts = RayOptions::default();
        opts.seed.flow.sampling = Sampling::Grid(grid.clone());
        let a = solve_on_ray(&p, 1e-3, 1.0, &opts).unwrap();
        let b = solve_on_ray(&q, 1e-3, 1.0, &opts).unwrap();
        prop_assert_eq!(a.events.len(), b.events.len());
        for (ea, eb) in a.events.iter().zip(&b.events) {
            prop_assert!((ea.x / eb.x - 1.0).abs() < 1e-6);
        }
        for &x in &grid {
            let fa = a.nearest_sample(x).and_then(|s| s.value.finite());
            let fb = b.nearest_sample(x).and_then(|s| s.value.finite());
            if let (Some(fa), Some(fb)) = (fa, fb) {
                prop_assert!(rel_close(fa, -fb, 1e-6), "x={x}: {fa} vs {fb}");
            }
        }
    }
}
