use mott_core::roots::logspace;
use mott_core::small_signal::{eoc_apex, impedance_coeffs, nyquist};
use mott_core::steady_state::default_locus_grid;
use mott_core::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn c0() -> ModelCoefficients {
    ModelCoefficients::default_device()
}

#[test]
fn zero_current_is_degenerate() {
    let c = c0();
    let q = FixedPoint1D::at_state(StateFraction::new(0.1).unwrap(), &c);
    let zero = FixedPoint1D { i_q: 0.0, v_q: 0.0, ..q };
    assert!(matches!(SmallSignalModel::at(&zero, &c), Err(Error::Degenerate(_))));
    assert!(virtual_elements(&linearize(&zero, &c)).is_err());
}

#[test]
fn virtual_element_signs() {
    let c = c0();
    for x in [0.001, 0.01, 0.3, 0.7] {
        let q = FixedPoint1D::at_state(StateFraction::new(x).unwrap(), &c);
        let ve = virtual_elements(&linearize(&q, &c)).unwrap();
        assert!(ve.c1 < 0.0 && ve.r1 < 0.0 && ve.r2 > 0.0);
        assert_eq!(ve.r2, q.r_q);
    }
}

#[test]
fn coefficient_identities() {
    let c = c0();
    let q = FixedPoint1D::at_current(50e-6, &c).unwrap();
    let m = SmallSignalModel::at(&q, &c).unwrap();
    let k = impedance_coeffs(&m.ve);
    for (a, b) in [(k.a1, m.coeffs.a1), (k.b0, m.coeffs.b0), (k.b1, m.coeffs.b1)] {
        assert!((a / b - 1.0).abs() < 1e-12);
    }
    assert_eq!(m.pz.k, q.r_q);
}

#[test]
fn endpoints_of_the_nyquist_locus() {
    let c = c0();
    let m = SmallSignalModel::at_current(10e-6, &c).unwrap();
    let z0 = m.z(0.0);
    assert!((z0.re - (m.ve.r1 + m.ve.r2)).abs() < 1e-9 * z0.re.abs() && z0.im == 0.0);
    let zi = m.z(1e30);
    assert!((zi.re / m.ve.r2 - 1.0).abs() < 1e-9);
    let curve = nyquist(&m.q, &logspace(1e6, 1e12, 200), &c).unwrap();
    assert!(curve.iter().all(|s| s.im > 0.0));
    assert!(curve[0].re < 0.0 && curve[199].re > 0.0);
}

#[test]
fn rez_vanishes_at_max_active_frequency() {
    let c = c0();
    for i in [9.5e-6, 10e-6, 30e-6, 300e-6, 900e-6] {
        let m = SmallSignalModel::at_current(i, &c).unwrap();
        let w = m.max_active_frequency().unwrap();
        let z = m.z(w);
        assert!(z.re.abs() <= 1e-9 * z.norm(), "{i}: {z}");
        assert!(m.z(0.5 * w).re < 0.0 && m.z(2.0 * w).re > 0.0);
    }
}

#[test]
fn no_active_band_below_critical_current() {
    let c = c0();
    let m = SmallSignalModel::at_current(9e-6, &c).unwrap();
    assert!(m.max_active_frequency().is_none());
    assert_eq!(m.pz.activity_class, ActivityClass::LocallyPassive);
    assert!(logspace(1e3, 1e13, 100).iter().all(|&w| m.z(w).re > 0.0));
}

#[test]
fn imz_peak_is_at_the_pole() {
    let c = c0();
    for i in [2e-6, 5e-6, 10e-6, 100e-6] {
        let m = SmallSignalModel::at_current(i, &c).unwrap();
        let f = m.imz_peak_frequency();
        let fp = m.lc.b11.abs() / (2.0 * PI);
        assert!((f / fp - 1.0).abs() < 1e-5, "{f} vs {fp}");
    }
}

#[test]
fn imz_peak_increases_with_current() {
    let c = c0();
    let f: Vec<f64> = [2e-6, 4e-6, 6e-6, 8e-6, 10e-6]
        .iter()
        .map(|&i| SmallSignalModel::at_current(i, &c).unwrap().lc.b11.abs())
        .collect();
    assert!(f.windows(2).all(|w| w[1] >= w[0]));
    assert!(f[4] > 2.0 * f[0]);
}

#[test]
fn imz_asymptotes() {
    let c = c0();
    let m = SmallSignalModel::at_current(10e-6, &c).unwrap();
    let wp = m.lc.b11.abs();
    let lo = m.z(1e-4 * wp).im / m.z(1e-5 * wp).im;
    let hi = m.z(1e4 * wp).im / m.z(1e5 * wp).im;
    assert!((lo - 10.0).abs() < 1e-3 && (hi - 10.0).abs() < 1e-3);
}

#[test]
fn activity_classes_along_the_locus() {
    let c = c0();
    let locus = dc_locus(&default_locus_grid(), &c).unwrap();
    let (i1, i2) = critical_currents(&locus);
    for q in &locus.points {
        let pz = pole_zero(q, &c).unwrap();
        assert!(pz.p < 0.0);
        assert_ne!(pz.activity_class, ActivityClass::ActiveNotEdge);
        if q.i_q > 1.001 * i1 && q.i_q < 0.999 * i2 {
            assert_eq!(pz.activity_class, ActivityClass::EdgeOfChaos);
        } else if q.i_q < 0.999 * i1 || q.i_q > 1.001 * i2 {
            assert_eq!(pz.activity_class, ActivityClass::LocallyPassive);
        }
    }
}

#[test]
fn rez_map_contour_branches() {
    let c = c0();
    let i = logspace(1e-6, 2e-3, 120);
    let f = logspace(1e6, 1e12, 120);
    let map = rez_map(&i, &f, &c).unwrap();
    let low: Vec<f64> = map.contour.iter().flat_map(|s| s.iter()).filter(|p| p.1 < 1e7).map(|p| p.0).collect();
    assert!(low.iter().any(|&x| (x / 9.077e-6 - 1.0).abs() < 0.01), "{low:?}");
    assert!(low.iter().any(|&x| (x / 971.18e-6 - 1.0).abs() < 0.01), "{low:?}");
    let (ia, fa) = map.apex().unwrap();
    let (q, w) = eoc_apex(&c).unwrap();
    assert!((fa / (w / (2.0 * PI)) - 1.0).abs() < 0.05);
    assert!((ia / q.i_q - 1.0).abs() < 0.2);
}

#[test]
fn scaling_is_monotone() {
    let st = scaling_study(&[5e-9, 10e-9, 20e-9, 40e-9, 60e-9], &DeviceParams::table1()).unwrap();
    assert!(st.rows.windows(2).all(|w| w[1].f_max_hz < w[0].f_max_hz));
    assert!((st.rows[0].f_max_hz / 132.1e9 - 1.0).abs() < 0.02);
    assert!(st.r2 > 0.999);
}

proptest! {
    #[test]
    fn pole_is_b11(l in -40f64..-1e-4) {
        let c = c0();
        let q = FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), &c);
        let m = SmallSignalModel::at(&q, &c).unwrap();
        prop_assert_eq!(m.pz.p, m.lc.b11);
    }

    #[test]
    fn inductive_reactance(i in 2e-6f64..3e-3, lw in 0.0f64..35.0) {
        let m = SmallSignalModel::at_current(i, &c0()).unwrap();
        prop_assert!(m.z(lw.exp()).im > 0.0);
    }

    #[test]
    fn parity_in_frequency(i in 1e-7f64..3e-3, lw in 0.0f64..35.0) {
        let m = SmallSignalModel::at_current(i, &c0()).unwrap();
        let (a, b) = (m.z(lw.exp()), m.z(-lw.exp()));
        prop_assert!((a.re - b.re).abs() <= 1e-12 * a.norm());
        prop_assert!((a.im + b.im).abs() <= 1e-12 * a.norm());
    }

    #[test]
    fn impedance_matches_virtual_circuit(i in 1e-7f64..3e-3, lw in 0.0f64..35.0) {
        let m = SmallSignalModel::at_current(i, &c0()).unwrap();
        let w = lw.exp();
        let s = num_complex::Complex64::new(0.0, w);
        let ve = m.ve;
        let z = ve.r1 / (1.0 + s * ve.r1 * ve.c1) + ve.r2;
        prop_assert!((z - m.z(w)).norm() <= 1e-9 * z.norm());
    }

    #[test]
    fn rez_scales_with_channel_length(i in 2e-6f64..2e-3, lw in 10.0f64..30.0, l in 20e-9f64..200e-9) {
        let base = DeviceParams::table1();
        let a = derive_coefficients(&base).unwrap();
        let b = derive_coefficients(&base.with_geometry(base.r_ch, l)).unwrap();
        let za = SmallSignalModel::at_current(i, &a).unwrap().z(lw.exp()) / base.l_ch;
        let zb = SmallSignalModel::at_current(i, &b).unwrap().z(lw.exp()) / l;
        prop_assert!((za - zb).norm() <= 1e-9 * za.norm());
    }
}
