use mott_core::pa_circuit::{classify_jacobian, default_bracket, v_nullcline, x_nullcline, CENTER_TOL};
use mott_core::steady_state::log_grid;
use mott_core::*;
use proptest::prelude::*;
use TrDetClass::*;

fn c0() -> ModelCoefficients {
    ModelCoefficients::default_device()
}

fn circuit(rs: f64, vdc: f64) -> CircuitParams {
    CircuitParams::new(rs, 1e-12, vdc).unwrap()
}

fn tracked(cp: &CircuitParams) -> CircuitOperatingPoint {
    let c = c0();
    jacobian(pa_fixed_points(cp, &c).last().unwrap(), cp, &c).unwrap()
}

#[test]
fn invalid_circuit_rejected() {
    assert!(CircuitParams::new(0.0, 1e-12, 1.0).is_err());
    assert!(CircuitParams::new(1e3, -1.0, 1.0).is_err());
    assert!("bogus".parse::<Param>().is_err());
    assert_eq!("Vdc".parse::<Param>().unwrap(), Param::Vdc);
}

#[test]
fn small_rs_gives_real_negative_poles() {
    let c = c0();
    for rs in [100.0, 200.0] {
        let cp = circuit(rs, 1.2);
        for q in pa_fixed_points(&cp, &c) {
            let tp = transfer_poles(&q, &cp, &c).unwrap();
            assert!(tp.discriminant > 0.0);
            assert!(tp.p_plus.re < 0.0 && tp.p_minus.re < 0.0);
            assert_eq!(tp.p_plus.im, 0.0);
        }
    }
}

#[test]
fn pole_real_parts_flip_between_3k3_and_3k4() {
    let c = c0();
    let re = |rs: f64| {
        let cp = circuit(rs, 1.2);
        let q = *pa_fixed_points(&cp, &c).last().unwrap();
        transfer_poles(&q, &cp, &c).unwrap().p_plus.re
    };
    assert!(re(3300.0) < 0.0);
    assert!(re(3400.0) > 0.0);
}

#[test]
fn large_rs_gives_real_positive_poles() {
    let c = c0();
    for rs in [7.6e3, 10e3, 15e3, 20e3, 27e3] {
        let cp = circuit(rs, 1.2);
        let q = *pa_fixed_points(&cp, &c).last().unwrap();
        let tp = transfer_poles(&q, &cp, &c).unwrap();
        assert!(tp.discriminant > 0.0 && tp.p_minus.re > 0.0, "{rs}");
        assert_eq!(tracked(&cp).trdet_class, UnstableNode);
    }
}

#[test]
fn paper_fixed_points() {
    let one = tracked(&circuit(3400.0, 1.2));
    assert!((one.x_q() / 0.30396 - 1.0).abs() < 5e-3 && (one.v_q() / 0.12564 - 1.0).abs() < 5e-3);
    assert_eq!(one.trdet_class, UnstableSpiral);
    let damped = tracked(&circuit(3200.0, 1.2));
    assert_eq!(damped.trdet_class, StableSpiral);
    let ops = pa_operating_points(&circuit(3400.0, 1.0), &c0()).unwrap();
    let classes: Vec<TrDetClass> = ops.iter().map(|o| o.trdet_class).collect();
    assert_eq!(classes, [StableNode, Saddle, UnstableSpiral]);
}

#[test]
fn centre_at_the_critical_values() {
    let c = c0();
    let base = circuit(3400.0, 1.2);
    let rs = critical_parameter(Param::Rs, &base, &c, default_bracket(Param::Rs)).unwrap();
    let at = tracked(&base.with(Param::Rs, rs));
    assert_eq!(at.trdet_class, Center);
    assert!(at.tr.abs() <= CENTER_TOL * at.omega0);
    let v = critical_parameter(Param::Vdc, &base, &c, default_bracket(Param::Vdc)).unwrap();
    let at = tracked(&base.with(Param::Vdc, v));
    assert_eq!(at.trdet_class, Center);
    assert!(at.det > 0.0);
}

#[test]
fn no_crossing_is_not_found() {
    let c = c0();
    let r = critical_parameter(Param::Rs, &circuit(3400.0, 1.2), &c, (100.0, 1000.0));
    assert!(matches!(r, Err(Error::NotFound { .. })));
}

#[test]
fn xi22_always_negative_and_xi12_consistent() {
    let c = c0();
    for (rs, v) in [(500.0, 0.6), (3400.0, 1.0), (3400.0, 1.2), (9000.0, 2.0)] {
        let cp = circuit(rs, v);
        for op in pa_operating_points(&cp, &c).unwrap() {
            assert!(op.jac[1][1] < 0.0);
            let lc = linearize(&op.q, &c);
            assert_eq!(op.jac[0][1], lc.b12 / op.q.r_q);
        }
    }
}

#[test]
fn x_nullcline_is_the_dc_locus() {
    let c = c0();
    for x in log_grid(1e-8, 0.99, 300) {
        let q = FixedPoint1D::at_state(x, &c);
        assert!((x_nullcline(x, &c) - q.v_q).abs() <= 1e-12 * q.v_q);
    }
}

#[test]
fn fixed_points_lie_on_both_nullclines() {
    let c = c0();
    let cp = circuit(3400.0, 1.0);
    for q in pa_fixed_points(&cp, &c) {
        assert!((v_nullcline(q.x_q, &cp, &c) / x_nullcline(q.x_q, &c) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn fixed_point_counts_by_region() {
    let c = c0();
    let t = tangency_points(3400.0, &c);
    assert_eq!(t.len(), 2);
    let (va, vb) = (t[0].0, t[1].0);
    assert!((va - 1.0379).abs() < 2e-3 && (vb - 0.519).abs() < 2e-3);
    let count = |v: f64| pa_fixed_points(&circuit(3400.0, v), &c).len();
    assert_eq!(count(vb - 0.01), 1);
    assert_eq!(count(0.5 * (va + vb)), 3);
    assert_eq!(count(va + 0.01), 1);
}

#[test]
fn lowest_branch_is_a_stable_node() {
    let c = c0();
    for v in [0.6, 0.8, 1.0, 1.03, 1.2, 1.6] {
        let ops = pa_operating_points(&circuit(3400.0, v), &c).unwrap();
        if ops.len() == 3 || ops[0].x_q() < 0.006 {
            assert_eq!(ops[0].trdet_class, StableNode, "{v}");
        }
    }
}

#[test]
fn middle_branch_is_a_saddle() {
    let c = c0();
    for v in [0.6, 0.8, 1.0] {
        let ops = pa_operating_points(&circuit(3400.0, v), &c).unwrap();
        assert_eq!(ops[1].trdet_class, Saddle);
        assert!(ops[1].det < 0.0);
    }
}

#[test]
fn hopf_transversality() {
    let c = c0();
    for rs in [3000.0, 3250.0, 3500.0, 3750.0, 4000.0] {
        let h = hopf_conditions(Param::Rs, &circuit(rs, 1.2), &c).unwrap();
        assert!(h.d > 0.0, "{rs}: {h:?}");
    }
    let base = circuit(3400.0, 1.2);
    let rs = critical_parameter(Param::Rs, &base, &c, default_bracket(Param::Rs)).unwrap();
    let h = hopf_conditions(Param::Rs, &base.with(Param::Rs, rs), &c).unwrap();
    assert!(h.nonhyperbolic && h.beta > 0.0 && h.d > 0.0);
    let far = hopf_conditions(Param::Rs, &circuit(20e3, 1.2), &c).unwrap();
    assert!(!far.nonhyperbolic);
}

#[test]
fn cp_locus_slope_in_the_trdet_plane() {
    let c = c0();
    let base = circuit(5000.0, 1.2);
    let pts: Vec<(f64, f64)> = [0.3e-12, 0.4e-12, 0.6e-12, 1e-12]
        .iter()
        .map(|&cp| {
            let o = tracked(&base.with(Param::Cp, cp));
            (o.tr, o.det)
        })
        .collect();
    let q = pa_fixed_points(&base, &c).pop().unwrap();
    let m = SmallSignalModel::at(&q, &c).unwrap();
    let w1 = 1.0 / (m.ve.r1 * m.ve.c1);
    let predicted = -w1 * (1.0 + m.ve.r1 / (q.r_q + base.rs));
    for w in pts.windows(2) {
        let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        assert!((s / predicted - 1.0).abs() < 1e-6, "{s} vs {predicted}");
    }
}

#[test]
fn sweep_crosses_into_unstable_nodes() {
    let c = c0();
    let values: Vec<f64> = (0..=20).map(|k| 3000.0 + 300.0 * k as f64).collect();
    let sweep = trdet_sweep(Param::Rs, &values, &circuit(3400.0, 1.2), &c).unwrap();
    assert_eq!(sweep.len(), values.len());
    assert!(sweep.iter().all(|p| p.branch == 0));
    let first_node = sweep.iter().find(|p| p.op.trdet_class == UnstableNode).unwrap();
    assert!(first_node.param > 7000.0 && first_node.param < 8500.0);
}

#[test]
fn vdc_sweep_opens_three_branches() {
    let c = c0();
    let values: Vec<f64> = (0..=40).map(|k| 0.4 + 0.02 * k as f64).collect();
    let sweep = trdet_sweep(Param::Vdc, &values, &circuit(3400.0, 1.0), &c).unwrap();
    let mut branches: Vec<usize> = sweep.iter().map(|p| p.branch).collect();
    branches.sort();
    branches.dedup();
    assert!(branches.len() >= 3);
}

#[test]
fn power_law_exponent() {
    let c = c0();
    let rs: Vec<f64> = (3..=9).map(|k| k as f64 * 1e3).collect();
    let law = cp_star_power_law(&rs, 1.2, &c).unwrap();
    assert!((law.b + 2.5).abs() < 0.1 && law.r2 > 0.999);
    assert!((law.eval(3359.5) / 1e-12 - 1.0).abs() < 0.02);
    assert!(cp_star_power_law(&rs[..2], 1.2, &c).is_err());
}

#[test]
fn table3_borderline_flags() {
    let flagged: Vec<u8> = (1..=13)
        .filter_map(|id| {
            let cls = [
                Saddle,
                StableLine,
                ParallelLines,
                UnstableLine,
                StableNode,
                StableDegenerateNode,
                StableStar,
                StableSpiral,
                Center,
                UnstableSpiral,
                UnstableDegenerateNode,
                UnstableStar,
                UnstableNode,
            ][id - 1];
            assert_eq!(cls.id() as usize, id);
            cls.linearization_unreliable().then_some(cls.id())
        })
        .collect();
    assert_eq!(flagged, [2, 3, 4, 6, 7, 11, 12]);
}

#[test]
fn stars_need_a_scalar_matrix() {
    assert_eq!(classify_jacobian(&[[-2.0, 0.0], [0.0, -2.0]], 1e-9), StableStar);
    assert_eq!(classify_jacobian(&[[2.0, 0.0], [0.0, 2.0]], 1e-9), UnstableStar);
    assert_eq!(classify_jacobian(&[[-2.0, 1.0], [0.0, -2.0]], 1e-9), StableDegenerateNode);
}

proptest! {
    #[test]
    fn transfer_poles_are_jacobian_eigenvalues(
        rs in 100f64..30e3, cp in 1e-14f64..1e-10, vdc in 0.3f64..3.0
    ) {
        let c = c0();
        let p = CircuitParams::new(rs, cp, vdc).unwrap();
        for q in pa_fixed_points(&p, &c) {
            let op = jacobian(&q, &p, &c).unwrap();
            let tp = transfer_poles(&q, &p, &c).unwrap();
            let scale = op.eigs[0].norm().max(op.eigs[1].norm());
            prop_assert!((tp.d1 + op.tr).abs() <= 1e-9 * scale);
            prop_assert!((tp.d0 - op.det).abs() <= 1e-9 * scale * scale);
            prop_assert!((tp.p_plus - op.eigs[0]).norm() <= 1e-9 * scale);
            prop_assert!((tp.p_minus - op.eigs[1]).norm() <= 1e-9 * scale);
            let sum = op.eigs[0] + op.eigs[1];
            let prod = op.eigs[0] * op.eigs[1];
            prop_assert!((sum.re - op.tr).abs() <= 1e-9 * scale && sum.im.abs() <= 1e-9 * scale);
            prop_assert!((prod.re - op.det).abs() <= 1e-9 * scale * scale);
        }
    }

    #[test]
    fn classification_regions(tr in -1e3f64..1e3, det in -1e6f64..1e6) {
        let disc = tr * tr - 4.0 * det;
        let cls = classify_trdet(tr, det, disc, 1e-9);
        if det < -1e-12 {
            prop_assert_eq!(cls, Saddle);
        } else if det > 1e-12 && tr.abs() > 1e-9 {
            prop_assert_eq!(cls.is_stable(), tr < 0.0);
            if disc < -1e-6 * det {
                prop_assert!(matches!(cls, StableSpiral | UnstableSpiral));
            } else if disc > 1e-6 * det {
                prop_assert!(matches!(cls, StableNode | UnstableNode));
            }
        }
    }
}
