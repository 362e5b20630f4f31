use proptest::prelude::*;
use sixwire_core::dynamics::{collision_trial, dominant_frequency, loss_probability, tickle_response, LossSettings, TickleSettings, TrajectorySpec};
use sixwire_core::*;

fn setup(v_rf: f64) -> (ElectrodeLayout, OperatingPoint, FieldModel, FieldPoint) {
    let layout = reconstruct_six_wire(&SixWireParams::default()).unwrap();
    let mut op = OperatingPoint::ca40(v_rf);
    standard_bases(&layout).unwrap().apply(&layout, &mut op, 1.0);
    let model = FieldModel::new(&layout, &op).unwrap();
    let eq = model.equilibrium().unwrap();
    (layout, op, model, eq)
}

#[test]
fn full_motion_oscillates_at_the_secular_frequencies() {
    let (layout, op, model, eq) = setup(80.0);
    let modes = analyze_modes(&layout, &op).unwrap();
    let spec = TrajectorySpec { r0: FieldPoint::new(eq.x + 0.2e-6, eq.y + 0.1e-6, eq.z), ..TrajectorySpec::at_rest(eq, 40e-6) };
    let tr = integrate_trajectory(&model, &spec).unwrap();
    let dt = tr.t[1] - tr.t[0];
    let (lo, hi) = modes.f_radial;
    let mid = 0.5 * (lo + hi);
    let along = |u: [f64; 3]| tr.r.iter().map(|r| u[0] * (r[0] - eq.x) + u[1] * (r[1] - eq.y)).collect::<Vec<_>>();
    let a = dominant_frequency(&along(modes.mode_axes[1]), dt, 0.3 * lo, mid);
    let b = dominant_frequency(&along(modes.mode_axes[2]), dt, mid, 2.0 * hi);
    let (f1, f2) = if a < b { (a, b) } else { (b, a) };
    assert!((f1 / lo - 1.0).abs() < 0.03, "{f1} vs {lo}");
    assert!((f2 / hi - 1.0).abs() < 0.03, "{f2} vs {hi}");
}

#[test]
fn at_rest_in_the_null_stays_put() {
    let (_, _, model, eq) = setup(175.0);
    let tr = integrate_trajectory(&model, &TrajectorySpec::at_rest(eq, 5e-6)).unwrap();
    let worst = tr.r.iter().map(|r| (r[0] - eq.x).hypot(r[1] - eq.y)).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn bad_trajectory_setup_is_rejected() {
    let (_, _, model, eq) = setup(175.0);
    let spec = TrajectorySpec { steps_per_rf_cycle: 2, ..TrajectorySpec::at_rest(eq, 1e-6) };
    assert!(integrate_trajectory(&model, &spec).is_err());
}

#[test]
fn loss_runs_are_reproducible_and_bracketed() {
    let (layout, op, model, eq) = setup(175.0);
    let depth = trap_depth(&layout, &OperatingPoint { dc_voltages: Default::default(), ..op.clone() }).unwrap().depth_ev();
    let settings = LossSettings::default();
    let grid = [0.0, 0.3 * depth, 3.0 * depth];
    let a = loss_probability(&model, eq, &grid, 40, 7, depth, &settings);
    let b = loss_probability(&model, eq, &grid, 40, 7, depth, &settings);
    assert_eq!(a, b);
    assert_eq!(a.points[0].1, 0.0);
    assert_eq!(a.points[1].1, 0.0);
    assert!(a.points[2].1 >= 0.9, "{:?}", a.points);
    let c = loss_probability(&model, eq, &grid[2..], 40, 8, depth, &settings);
    assert!(c.points[0].1 >= 0.9);
}

#[test]
fn hard_kick_is_lost() {
    let (_, _, model, eq) = setup(175.0);
    let t = collision_trial(&model, eq, 5.0, -std::f64::consts::FRAC_PI_2, 0.0, &LossSettings::default());
    assert!(t.lost, "{t:?}");
    assert!(t.t_loss.unwrap() < LossSettings::default().duration);
    let soft = collision_trial(&model, eq, 1e-4, 0.3, 0.0, &LossSettings::default());
    assert!(!soft.lost && soft.t_loss.is_none());
}

#[test]
fn tickle_resonates_at_a_radial_mode() {
    let (layout, op, model, eq) = setup(175.0);
    let modes = analyze_modes(&layout, &op).unwrap();
    let v3 = layout.electrode("V3").unwrap();
    let settings = TickleSettings { duration: 20e-6, ..TickleSettings::default() };
    let on = tickle_response(&model, eq, v3, modes.f_radial.0, 0.01, &settings);
    let off = tickle_response(&model, eq, v3, 0.5 * modes.f_radial.0, 0.01, &settings);
    assert!(on > 20.0 * off, "{on:e} vs {off:e}");
}

proptest! {
    #[test]
    fn heating_conversion_is_linear(ndot in 1.0..1e5f64, f in 1e5..1e7f64, k in 0.1..10.0f64) {
        let op = OperatingPoint::ca40(175.0);
        let s = heating_to_spectral_density(ndot, f, &op);
        prop_assert!(s > 0.0);
        prop_assert!((heating_to_spectral_density(k * ndot, f, &op) / s - k).abs() < 1e-12 * k);
        prop_assert!((heating_to_spectral_density(ndot, k * f, &op) / s - k).abs() < 1e-12 * k);
    }
}
