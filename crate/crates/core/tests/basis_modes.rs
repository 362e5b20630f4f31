use proptest::prelude::*;
use sixwire_core::basis::{fit_quadratic_with, ENDCAP_ALPHA_Z, TILT_ALPHA};
use sixwire_core::constants::{CA40_ION_MASS, ELEMENTARY_CHARGE};
use sixwire_core::*;

fn layout() -> ElectrodeLayout {
    reconstruct_six_wire(&SixWireParams::default()).unwrap()
}

#[test]
fn null_sits_at_design_height() {
    let null = rf_null_of_default();
    assert!(null.x.abs() < 1e-12);
    assert!((null.y - 150e-6).abs() < 1e-6, "{}", null.y);
}

fn rf_null_of_default() -> FieldPoint {
    find_rf_null(&layout(), &OperatingPoint::ca40(175.0)).unwrap()
}

#[test]
fn fitted_curvature_matches_the_hessian() {
    let l = layout();
    let null = rf_null_of_default();
    for name in ["V1", "V3", "V5", "T"] {
        let e = l.electrode(name).unwrap();
        let b = fit_quadratic(e, null, null.y / 10.0).unwrap();
        let h = unit_hessian(e, null).unwrap();
        let g = unit_gradient(e, null).unwrap();
        let scale = h.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
        for k in 0..3 {
            assert!((b.alpha[k] - 0.5 * h[k][k]).abs() < 1e-3 * scale, "{name} α{k}: {} vs {}", b.alpha[k], 0.5 * h[k][k]);
            assert!((b.beta[k] - g[k]).abs() < 1e-3 * g.iter().fold(0.0_f64, |m, x| m.max(x.abs())), "{name} β{k}: {} vs {}", b.beta[k], g[k]);
        }
        assert!((b.cross[0] - h[0][1]).abs() < 1e-3 * scale);
        assert!(b.laplacian().abs() < 1e-3 * scale);
    }
}

#[test]
fn mirror_pair_sum_has_no_x_field() {
    let l = layout();
    let null = rf_null_of_default();
    for (a, b) in [("V3", "V4"), ("V5", "V6"), ("V1", "V2")] {
        let fa = fit_quadratic(l.electrode(a).unwrap(), null, null.y / 10.0).unwrap();
        let fb = fit_quadratic(l.electrode(b).unwrap(), null, null.y / 10.0).unwrap();
        assert!((fa.beta[0] + fb.beta[0]).abs() < 1e-9 * fa.beta[0].abs());
    }
}

#[test]
fn standard_sets_reproduce_their_targets() {
    let l = layout();
    let b = basis::standard_bases(&l).unwrap();
    for sol in b.all() {
        assert!(sol.residual < 1e-3, "{}: {}", sol.voltages.label.name(), sol.residual);
    }
    let e = b.endcap.voltages.v;
    assert_eq!((e[0], e[2], e[4]), (e[1], e[3], e[5]));
    let x = b.xcomp.voltages.v;
    assert_eq!((x[0], x[1]), (0.0, 0.0));
    assert_eq!((x[2], x[4]), (-x[3], -x[5]));
    let t = b.tilt.voltages.v;
    assert_eq!((t[0], t[2], t[4]), (-t[1], -t[3], -t[5]));
    // recompute the achieved coefficients from the voltages themselves
    let (bases, _) = basis::fit_control_bases(&l).unwrap();
    let achieved = bases.iter().zip(b.endcap.voltages.v).fold(PotentialBasis::ZERO, |acc, (p, v)| acc.add(&p.scaled(v)));
    assert!((achieved.alpha[2] / ENDCAP_ALPHA_Z - 1.0).abs() < 1e-3);
    assert!(achieved.beta.iter().all(|x| x.abs() < 1e-3));
}

#[test]
fn endcap_gives_the_axial_frequency() {
    let l = layout();
    let b = basis::standard_bases(&l).unwrap();
    let mut op = OperatingPoint::ca40(175.0);
    b.apply(&l, &mut op, 0.0);
    let m = analyze_modes(&l, &op).unwrap();
    let expected = (2.0 * ELEMENTARY_CHARGE * ENDCAP_ALPHA_Z / CA40_ION_MASS).sqrt() / (2.0 * std::f64::consts::PI);
    assert!((m.f_axial / expected - 1.0).abs() < 1e-3, "{} vs {}", m.f_axial, expected);
    assert!((m.f_axial / 500e3 - 1.0).abs() < 0.01);
}

#[test]
fn tilt_splits_modes_symmetrically_in_frequency_squared() {
    let l = layout();
    let b = basis::standard_bases(&l).unwrap();
    let op = OperatingPoint::ca40(196.0);
    let f2 = |t: f64| {
        let mut o = op.clone();
        b.apply(&l, &mut o, t);
        let m = analyze_modes(&l, &o).unwrap();
        (m.f_radial.0.powi(2), m.f_radial.1.powi(2), m.tilt_angle_deg)
    };
    let (lo0, hi0, th0) = f2(0.0);
    assert_eq!(th0, 0.0);
    let mut last = 0.0;
    for t in [0.25, 0.5, 1.0] {
        let (lo, hi, th) = f2(t);
        let split = 4.0 * t * ELEMENTARY_CHARGE * TILT_ALPHA / (CA40_ION_MASS * 4.0 * std::f64::consts::PI.powi(2));
        assert!(((hi - lo) / split - 1.0).abs() < 0.02, "t={t}");
        assert!(((hi + lo) / (hi0 + lo0) - 1.0).abs() < 0.01);
        assert!(th >= last);
        last = th;
    }
}

#[test]
fn rf_amplitude_inference_round_trips() {
    let l = layout();
    let op = OperatingPoint::ca40(150.0);
    let f = analyze_modes(&l, &op).unwrap().mean_radial();
    let v = infer_rf_amplitude(&l, f, &OperatingPoint::ca40(80.0)).unwrap();
    assert!((v - 150.0).abs() < 1e-4, "{v}");
}

#[test]
fn depth_scales_with_rf_squared() {
    let l = layout();
    let d1 = trap_depth(&l, &OperatingPoint::ca40(112.0)).unwrap();
    let d2 = trap_depth(&l, &OperatingPoint::ca40(223.0)).unwrap();
    let ratio = d2.depth / d1.depth;
    assert!((ratio - (223.0_f64 / 112.0).powi(2)).abs() < 1e-6, "{ratio}");
    assert!(d1.saddle.y > d1.null.y);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_quadratics_are_recovered(
        beta in prop::array::uniform3(-1e3..1e3f64),
        alpha in prop::array::uniform3(-1e7..1e7f64),
        cross in prop::array::uniform3(-1e7..1e7f64),
    ) {
        let target = PotentialBasis { alpha, beta, cross, frame: Frame::Cardinal };
        let c = FieldPoint::new(1e-6, 150e-6, -2e-6);
        let fit = fit_quadratic_with(|p| 0.3 + target.eval([p.x - c.x, p.y - c.y, p.z - c.z]), c, 15e-6).unwrap();
        for k in 0..3 {
            prop_assert!((fit.alpha[k] - alpha[k]).abs() <= 1e-8 * 1e7);
            prop_assert!((fit.beta[k] - beta[k]).abs() <= 1e-8 * 1e3 + 1e-6);
            prop_assert!((fit.cross[k] - cross[k]).abs() <= 1e-8 * 1e7);
        }
    }

    #[test]
    fn rotation_preserves_the_potential(
        beta in prop::array::uniform3(-1e3..1e3f64),
        alpha in prop::array::uniform3(-1e7..1e7f64),
        cross in prop::array::uniform3(-1e7..1e7f64),
        d in prop::array::uniform3(-1e-5..1e-5f64),
    ) {
        let b = PotentialBasis { alpha, beta, cross, frame: Frame::Cardinal };
        let r = b.to_frame(Frame::Rotated45);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let dr = [(d[0] + d[1]) * s, (d[0] - d[1]) * s, d[2]];
        prop_assert!((b.eval(d) - r.eval(dr)).abs() <= 1e-12 * (1.0 + b.eval(d).abs()));
        prop_assert_eq!(r.to_frame(Frame::Cardinal).frame, Frame::Cardinal);
    }

    #[test]
    fn solved_voltages_scale_linearly(k in 0.1..10.0f64) {
        let l = layout();
        let (bases, _) = basis::fit_control_bases(&l).unwrap();
        let one = solve_voltages(&PotentialBasis::field([0.0, 1.0, 0.0]), &bases, SymmetryClass::YComp).unwrap();
        let many = solve_voltages(&PotentialBasis::field([0.0, k, 0.0]), &bases, SymmetryClass::YComp).unwrap();
        for i in 0..6 {
            prop_assert!((many.voltages.v[i] - k * one.voltages.v[i]).abs() <= 1e-9 * k * one.voltages.v[i].abs().max(1e-3));
        }
    }

    #[test]
    fn scaled_layout_scales_the_null(k in 0.5..3.0f64) {
        let l = layout();
        let base = find_rf_null(&l, &OperatingPoint::ca40(100.0)).unwrap();
        let s = find_rf_null(&l.scaled(k), &OperatingPoint::ca40(100.0)).unwrap();
        prop_assert!((s.y / base.y - k).abs() < 1e-6 * k);
    }
}
