//! Rayon versions of the core sweeps. Results come back in grid order and
//! do not depend on the thread count.

use anyhow::Result;
use rayon::prelude::*;
use sixwire_core::bloch::{optimize_repumper, MapPoint, RepumperWindow, Sensitivity};
use sixwire_core::dynamics::{collision_trial, loss_fraction, trial_draw, LossSettings};
use sixwire_core::{sensitivity, BlochError, FieldModel, FieldPoint, LaserParams, LossCurve, OperatingPoint};

/// Sizes the global pool. `None` leaves rayon's default.
pub fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        anyhow::ensure!(n > 0, "--threads must be at least 1");
        // A second call (tests, embedding) keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Collision-loss curve over `e0_grid` (eV). Trial `k` uses the same angle
/// and rf phase at every energy.
pub fn loss_curve(
    model: &FieldModel,
    eq: FieldPoint,
    e0_grid: &[f64],
    n_trials: usize,
    seed: u64,
    depth_ref: f64,
    settings: &LossSettings,
) -> LossCurve {
    let draws: Vec<(f64, f64)> = (0..n_trials as u64).map(|k| trial_draw(seed, k)).collect();
    let points = e0_grid
        .par_iter()
        .map(|&e0| {
            let lost = draws.par_iter().filter(|&&(a, p)| collision_trial(model, eq, e0, a, p, settings).lost).count();
            let (p, se) = loss_fraction(lost, n_trials);
            (e0, p, se)
        })
        .collect();
    LossCurve { points, depth_ref }
}

/// Row-major over (`delta_c_grid`, `i_r_grid`), Δ_r optimised per point.
pub fn sensitivity_map(
    lp_base: &LaserParams,
    op: &OperatingPoint,
    omega_r: f64,
    delta_c_grid: &[f64],
    i_r_grid: &[f64],
    window: &RepumperWindow,
) -> Result<Vec<MapPoint>, BlochError> {
    let cells: Vec<(f64, f64)> = delta_c_grid.iter().flat_map(|&dc| i_r_grid.iter().map(move |&ir| (dc, ir))).collect();
    cells
        .par_iter()
        .map(|&(dc, ir)| optimize_repumper(&LaserParams { delta_c: dc, i_r: ir, ..*lp_base }, op, omega_r, window))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub delta_r: f64,
    /// Scattering rate Γ·ρ_PP, s⁻¹.
    pub fluorescence: f64,
    pub sensitivity: Sensitivity,
}

/// Repumper scan with the micromotion sensitivity at each detuning.
pub fn repumper_profile(lp: &LaserParams, op: &OperatingPoint, omega_r: f64, delta_r_grid: &[f64]) -> Result<Vec<ScanPoint>, BlochError> {
    delta_r_grid
        .par_iter()
        .map(|&dr| {
            let l = LaserParams { delta_r: dr, ..*lp };
            let f = sixwire_core::repumper_scan(&l, &[dr])?[0].1;
            Ok(ScanPoint { delta_r: dr, fluorescence: f, sensitivity: sensitivity(&l, op, omega_r)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use sixwire_core::{reconstruct_six_wire, SixWireParams};

    #[test]
    fn parallel_loss_matches_sequential() {
        let layout = reconstruct_six_wire(&SixWireParams::default()).unwrap();
        let op = OperatingPoint::ca40(175.0);
        let model = FieldModel::new(&layout, &op).unwrap();
        let eq = model.rf_null().unwrap();
        let settings = LossSettings { steps: 2000, ..Default::default() };
        let grid = [0.05, 0.2];
        let par = loss_curve(&model, eq, &grid, 16, 3, 0.1, &settings);
        let seq = sixwire_core::dynamics::loss_probability(&model, eq, &grid, 16, 3, 0.1, &settings);
        assert_eq!(par, seq);
    }
}
