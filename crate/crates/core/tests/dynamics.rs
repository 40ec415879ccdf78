use mott_core::dynamics::{
    ic_grid, integrate_fixed, period_from_crossings, refine_onset, simulate_point, upward_crossings,
};
use mott_core::*;

fn c0() -> ModelCoefficients {
    ModelCoefficients::default_device()
}

fn circuit(rs: f64) -> CircuitParams {
    CircuitParams::new(rs, 1e-12, 1.2).unwrap()
}

fn run(rs: f64, horizon: f64) -> Trajectory {
    integrate((0.1, 0.39), &circuit(rs), &c0(), &IntegrateOptions::new(horizon)).unwrap()
}

#[test]
fn bad_initial_conditions() {
    let c = c0();
    let o = IntegrateOptions::new(1e-9);
    assert!(integrate((0.0, 0.3), &circuit(3400.0), &c, &o).is_err());
    assert!(integrate((1.0, 0.3), &circuit(3400.0), &c, &o).is_err());
    assert!(integrate((0.5, f64::NAN), &circuit(3400.0), &c, &o).is_err());
    assert!(integrate((0.5, 0.3), &circuit(3400.0), &c, &IntegrateOptions::new(0.0)).is_err());
}

#[test]
fn trajectory_invariants() {
    let t = run(3400.0, 50e-9);
    assert!(t.t.windows(2).all(|w| w[1] > w[0]));
    assert!(t.ln_x.iter().all(|&l| l < 0.0));
    assert!(t.x().iter().all(|&x| x < 1.0));
    assert_eq!(t.t.len(), t.accepted + 1);
    let tau = 3400.0 * 1e-12;
    assert!(t.t.windows(2).all(|w| w[1] - w[0] <= tau / 100.0 * (1.0 + 1e-12)));
}

#[test]
fn damped_case_settles() {
    let t = run(3200.0, 200e-9);
    assert_eq!(t.status, TerminalStatus::ConvergedFixedPoint);
    let short = run(3200.0, 40e-9);
    let (x, v) = short.last();
    assert!((x / 0.3178 - 1.0).abs() < 0.01 && (v / 0.1225 - 1.0).abs() < 0.01);
    match detect_limit_cycle(&t) {
        Verdict::FixedPoint { x, v } => {
            assert!((x / 0.317809 - 1.0).abs() < 1e-4 && (v / 0.122494 - 1.0).abs() < 1e-4);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn oscillating_case() {
    let t = run(3400.0, 200e-9);
    assert_eq!(t.status, TerminalStatus::Periodic);
    let Verdict::Cycle(lc) = detect_limit_cycle(&t) else { panic!("no cycle") };
    let ratio = lc.period / (3400.0 * 1e-12);
    assert!((2.3..=2.7).contains(&ratio), "{ratio}");
    assert!(lc.period_rel_std < 5e-3);
    assert!(lc.x_min < lc.x_max && lc.v_min < lc.v_max);
    assert!(lc.cycle.len() > 100);
}

#[test]
fn period_estimators_agree() {
    let t = run(3400.0, 200e-9);
    let k = t.t.len() / 2;
    let (ts, v, l) = (&t.t[k..], &t.v[k..], &t.ln_x[k..]);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (pv, _) = period_from_crossings(&upward_crossings(ts, v, mean(v))).unwrap();
    let (px, _) = period_from_crossings(&upward_crossings(ts, l, mean(l))).unwrap();
    assert!((pv / px - 1.0).abs() < 5e-3, "{pv} vs {px}");
}

#[test]
fn halving_tolerance_barely_moves_the_end_state() {
    let c = c0();
    let cp = circuit(3200.0);
    let base = IntegrateOptions::new(30e-9);
    let tight = IntegrateOptions { tol: base.tol.scaled(0.5), ..base };
    let a = integrate((0.1, 0.39), &cp, &c, &base).unwrap().last();
    let b = integrate((0.1, 0.39), &cp, &c, &tight).unwrap().last();
    assert!((a.0.ln() - b.0.ln()).abs() < 10.0 * base.tol.atol_ln_x * 100.0);
    assert!((a.1 - b.1).abs() < 10.0 * (base.tol.atol_v + base.tol.rtol * a.1.abs()) * 100.0);
}

#[test]
fn fifth_order_convergence() {
    let c = c0();
    let cp = circuit(3200.0);
    // a smooth stretch near the stable focus
    let ic = (0.3, 0.13);
    let t_end = 2e-9;
    let reference = integrate_fixed(ic, &cp, &c, t_end, 8192).unwrap();
    let err = |n: usize| {
        let (x, v) = integrate_fixed(ic, &cp, &c, t_end, n).unwrap();
        ((x - reference.0).abs() / reference.0).max((v - reference.1).abs() / reference.1)
    };
    let (e1, e2) = (err(64), err(128));
    let order = (e1 / e2).log2();
    assert!((4.5..=5.6).contains(&order), "order {order} ({e1:e}, {e2:e})");
}

#[test]
fn stability_agrees_with_the_jacobian() {
    let c = c0();
    for rs in [3200.0, 3400.0] {
        let cp = circuit(rs);
        let op = jacobian(pa_fixed_points(&cp, &c).last().unwrap(), &cp, &c).unwrap();
        let verdict = detect_limit_cycle(&run(rs, 200e-9));
        if verdict.is_cycle() {
            assert!(op.eigs[0].re > 0.0);
        } else {
            assert!(matches!(verdict, Verdict::FixedPoint { .. }));
            assert!(op.eigs[0].re < 0.0);
        }
    }
}

#[test]
fn orbits_turn_clockwise() {
    // in (x, v) the vector field around the focus has negative winding
    let c = c0();
    let cp = circuit(3400.0);
    let q = *pa_fixed_points(&cp, &c).last().unwrap();
    let (x0, v0) = (q.x_q.x(), q.v_q);
    let mut total = 0.0;
    let n = 64;
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        let (dx, dv) = (0.01 * th.cos(), 0.005 * th.sin());
        let x = StateFraction::new(x0 + dx).unwrap();
        let (fx, fv) = pa_circuit::vector_field(x, v0 + dv, &cp, &c);
        // angular velocity sign in the scaled plane
        total += (dx / 0.01) * (fv / 0.005) - (dv / 0.005) * (fx / 0.01);
    }
    assert!(total < 0.0);
}

#[test]
fn portrait_at_the_damped_setting_converges() {
    let c = c0();
    let ics = ic_grid((0.05, 0.95), (0.06, 1.14), 18, 18);
    let orbits = phase_portrait(&ics, &circuit(3200.0), &c, &IntegrateOptions::new(200e-9)).unwrap();
    assert_eq!(orbits.len(), 324);
    for o in &orbits {
        match o.verdict {
            Verdict::FixedPoint { x, v } => {
                assert!((x / 0.317809 - 1.0).abs() < 1e-3 && (v / 0.122494 - 1.0).abs() < 1e-3)
            }
            ref other => panic!("{:?} from {:?}", other.tag(), o.ic),
        }
    }
}

#[test]
fn cycle_extrema_independent_of_the_start() {
    let c = c0();
    let ics = ic_grid((0.05, 0.95), (0.06, 1.14), 4, 4);
    let orbits = phase_portrait(&ics, &circuit(3400.0), &c, &IntegrateOptions::new(200e-9)).unwrap();
    let cycles: Vec<&LimitCycle> = orbits
        .iter()
        .map(|o| match &o.verdict {
            Verdict::Cycle(lc) => lc,
            other => panic!("{:?}", other.tag()),
        })
        .collect();
    for lc in &cycles[1..] {
        assert!((lc.v_max / cycles[0].v_max - 1.0).abs() < 0.01);
        assert!((lc.v_min / cycles[0].v_min - 1.0).abs() < 0.01);
        assert!((lc.x_max / cycles[0].x_max - 1.0).abs() < 0.01);
    }
}

#[test]
fn rs_onset_bracket_holds_at_double_horizon() {
    let c = c0();
    let o = SweepOptions::default();
    let on = refine_onset(Param::Rs, 3200.0, 3300.0, &circuit(3400.0), &c, &o);
    assert!((on.oscillating - on.quiet - 1e-3).abs() < 1e-9);
    assert!((3100.0..=3450.0).contains(&on.value));
    let doubled = SweepOptions { horizon: 400.0 * on.value * 1e-12, ..o };
    assert!(!simulate_point(&circuit(on.quiet), &c, &doubled).unwrap().is_cycle());
    assert!(simulate_point(&circuit(on.oscillating), &c, &doubled).unwrap().is_cycle());
}

#[test]
fn sweep_reports_every_point() {
    let c = c0();
    let grid = [3000.0, 3200.0, 3400.0, 3600.0];
    let d = bifurcation_sweep(
        Param::Rs,
        &grid,
        &circuit(3400.0),
        &c,
        &SweepOptions { refine: false, ..Default::default() },
    )
    .unwrap();
    assert_eq!(d.points.len(), 4);
    let tags: Vec<&str> = d.points.iter().map(|p| p.verdict.tag()).collect();
    assert_eq!(tags, ["fixed_point", "fixed_point", "limit_cycle", "limit_cycle"]);
    assert!(d.onsets.is_empty());
}
