//! One function per subcommand. Each returns a [`Table`]; `main` only parses
//! flags and writes the result.

use std::f64::consts::PI;

use anyhow::{bail, ensure, Context, Result};
use sixwire_core::basis::{standard_bases, StandardBases};
use sixwire_core::bloch::RepumperWindow;
use sixwire_core::constants::DEFAULT_RF_FREQUENCY;
use sixwire_core::dynamics::LossSettings;
use sixwire_core::{
    analyze_modes, fit_lineshape, heating_to_spectral_density, infer_rf_amplitude, trap_depth, ElectrodeLayout, FieldModel,
    FieldPoint, LaserParams, OperatingPoint,
};

use crate::sweeps;
use crate::table::{Cell, Table};

pub const MHZ: f64 = 1e6;
const UM: f64 = 1e-6;
const EV: f64 = sixwire_core::constants::ELEMENTARY_CHARGE;

/// Tilt factors of the published mode table.
pub const TABLE_TILT_FACTORS: [f64; 6] = [0.0, 0.125, 0.25, 0.5, 1.0, 2.0];

/// Mean of the two measured tilt-0 radial frequencies, Hz.
pub const MEASURED_RADIAL_TILT0: f64 = 3.135e6;

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    ensure!(n > 0, "empty grid: at least one point is required");
    ensure!(lo.is_finite() && hi.is_finite(), "grid bounds must be finite");
    if n == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

/// rf-only ⁴⁰Ca⁺ operating point.
pub fn operating_point(v_rf: f64, f_rf: f64) -> Result<OperatingPoint> {
    ensure!(v_rf.is_finite() && v_rf > 0.0, "--vrf must be a positive amplitude in volts");
    ensure!(f_rf.is_finite() && f_rf > 0.0, "--frf must be a positive frequency");
    Ok(OperatingPoint { omega_rf: 2.0 * PI * f_rf, ..OperatingPoint::ca40(v_rf) })
}

pub fn default_operating_point() -> OperatingPoint {
    operating_point(175.0, DEFAULT_RF_FREQUENCY).expect("defaults are valid")
}

/// `op` with the endcap set and `tilt_factor` × the tilt set applied.
pub fn configured(layout: &ElectrodeLayout, bases: &StandardBases, op: &OperatingPoint, tilt_factor: f64) -> OperatingPoint {
    let mut o = op.clone();
    bases.apply(layout, &mut o, tilt_factor);
    o
}

pub fn cmd_bases(layout: &ElectrodeLayout) -> Result<Table> {
    let b = standard_bases(layout)?;
    let mut t = Table::new(&["basis", "V1_mV", "V2_mV", "V3_mV", "V4_mV", "V5_mV", "V6_mV", "residual_1"]);
    for sol in b.all() {
        let mut row: Vec<Cell> = vec![sol.voltages.label.name().into()];
        row.extend(sol.voltages.v.iter().map(|v| Cell::Num(v * 1e3)));
        row.push(sol.residual.into());
        t.push(row);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModesRun {
    pub table: Table,
    pub v_rf: f64,
}

/// Mode table over `tilt_factors`. With `measured_f_radial` the rf
/// amplitude is first fitted so the tilt-0 mean radial frequency matches.
pub fn cmd_modes(layout: &ElectrodeLayout, op: &OperatingPoint, tilt_factors: &[f64], measured_f_radial: Option<f64>) -> Result<ModesRun> {
    ensure!(!tilt_factors.is_empty(), "empty grid: no tilt factors given");
    let bases = standard_bases(layout)?;
    let v_rf = match measured_f_radial {
        Some(f) => infer_rf_amplitude(layout, f, &configured(layout, &bases, op, 0.0)).context("fitting the rf amplitude")?,
        None => op.v_rf,
    };
    let base = op.with_rf(v_rf);
    let mut t = Table::new(&["tilt_factor_1", "f_low_MHz", "f_high_MHz", "theta_deg", "f_axial_kHz", "q_1", "v_rf_V"]);
    for &k in tilt_factors {
        let m = analyze_modes(layout, &configured(layout, &bases, &base, k))?;
        t.push(vec![
            k.into(),
            (m.f_radial.0 / MHZ).into(),
            (m.f_radial.1 / MHZ).into(),
            m.tilt_angle_deg.into(),
            (m.f_axial / 1e3).into(),
            m.q.into(),
            v_rf.into(),
        ]);
    }
    Ok(ModesRun { table: t, v_rf })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossConfig {
    pub tilt_factor: f64,
    /// Kick energies as multiples of the pseudopotential depth.
    pub depth_fractions: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub settings: LossSettings,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            tilt_factor: 1.0,
            depth_fractions: (1..=20).map(|k| 0.1 * k as f64).collect(),
            trials: 1000,
            seed: 1,
            settings: LossSettings::default(),
        }
    }
}

/// Collision-loss curve at the full operating point (rf, endcap and
/// tilt), energies scaled by the rf pseudopotential depth.
pub fn cmd_loss(layout: &ElectrodeLayout, op: &OperatingPoint, cfg: &LossConfig) -> Result<Table> {
    ensure!(!cfg.depth_fractions.is_empty(), "empty grid: no kick energies given");
    ensure!(cfg.trials > 0, "need at least one trial per energy");
    let depth = trap_depth(layout, op)?.depth_ev();
    let bases = standard_bases(layout)?;
    let model = FieldModel::new(layout, &configured(layout, &bases, op, cfg.tilt_factor))?;
    let eq = model.equilibrium()?;
    let grid: Vec<f64> = cfg.depth_fractions.iter().map(|k| k * depth).collect();
    let curve = sweeps::loss_curve(&model, eq, &grid, cfg.trials, cfg.seed, depth, &cfg.settings);
    let mut t = Table::new(&["E0_eV", "E0_over_depth_1", "p_loss_1", "stderr_1", "depth_eV"]);
    for (e0, p, se) in curve.points {
        t.push(vec![e0.into(), (e0 / depth).into(), p.into(), se.into(), depth.into()]);
    }
    Ok(t)
}

/// Angular frequency of the mean radial mode at the endcap operating
/// point, used as the micromotion mode for the sensitivity commands.
pub fn radial_mode(layout: &ElectrodeLayout, op: &OperatingPoint) -> Result<f64> {
    let bases = standard_bases(layout)?;
    Ok(2.0 * PI * analyze_modes(layout, &configured(layout, &bases, op, 0.0))?.mean_radial())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensmapConfig {
    pub lasers: LaserParams,
    /// Hz.
    pub delta_c: Vec<f64>,
    /// Units of I_s.
    pub i_r: Vec<f64>,
    pub window: RepumperWindow,
}

impl Default for SensmapConfig {
    fn default() -> Self {
        SensmapConfig {
            lasers: LaserParams { i_c: 1.5, ..Default::default() },
            delta_c: linspace(-40e6, -5e6, 20).expect("static grid"),
            i_r: linspace(5.0, 200.0, 20).expect("static grid"),
            window: RepumperWindow::default(),
        }
    }
}

pub fn cmd_sensmap(op: &OperatingPoint, omega_r: f64, cfg: &SensmapConfig) -> Result<Table> {
    ensure!(!cfg.delta_c.is_empty() && !cfg.i_r.is_empty(), "empty grid: need at least one Δ_c and one I_r");
    let map = sweeps::sensitivity_map(&cfg.lasers, op, omega_r, &cfg.delta_c, &cfg.i_r, &cfg.window)?;
    let mut t = Table::new(&["delta_c_MHz", "I_r_Is", "sensitivity_pct_per_V_m", "delta_r_opt_MHz", "phase_rad"]);
    for p in map {
        t.push(vec![
            (p.delta_c / MHZ).into(),
            p.i_r.into(),
            (100.0 * p.sensitivity).into(),
            (p.delta_r_opt / MHZ).into(),
            p.phase.into(),
        ]);
    }
    Ok(t)
}

pub fn cmd_scan(op: &OperatingPoint, omega_r: f64, lasers: &LaserParams, delta_r: &[f64]) -> Result<Table> {
    ensure!(!delta_r.is_empty(), "empty grid: no repumper detunings given");
    let scan = sweeps::repumper_profile(lasers, op, omega_r, delta_r)?;
    let mut t = Table::new(&["delta_r_MHz", "fluorescence_per_s", "sensitivity_pct_per_V_m", "phase_rad"]);
    for p in scan {
        t.push(vec![
            (p.delta_r / MHZ).into(),
            p.fluorescence.into(),
            (100.0 * p.sensitivity.per_field).into(),
            p.sensitivity.phase.into(),
        ]);
    }
    Ok(t)
}

/// Fits `(Δ in MHz, counts)` data. `amplitude` is the count rate at unit
/// excited-state population; without it only height, width and
/// background are reported.
pub fn cmd_fit_lineshape(data_mhz: &[(f64, f64)], amplitude: Option<f64>) -> Result<Table> {
    ensure!(!data_mhz.is_empty(), "empty data set");
    let data: Vec<(f64, f64)> = data_mhz.iter().map(|&(d, c)| (d * MHZ, c)).collect();
    let fit = fit_lineshape(&data, amplitude)?;
    let opt = |x: Option<f64>| x.map_or(Cell::Text(String::new()), Cell::Num);
    let mut t = Table::new(&[
        "height_counts",
        "fwhm_MHz",
        "background_counts",
        "s_1",
        "gamma_MHz",
        "amplitude_counts",
        "rms_residual_counts",
    ]);
    t.push(vec![
        fit.height.into(),
        (fit.fwhm / MHZ).into(),
        fit.background.into(),
        opt(fit.s),
        opt(fit.gamma.map(|g| g / MHZ)),
        opt(fit.amplitude),
        fit.rms_residual.into(),
    ]);
    Ok(t)
}

pub fn cmd_heating(op: &OperatingPoint, ndot: f64, f_mode: f64) -> Result<Table> {
    ensure!(ndot.is_finite() && ndot >= 0.0, "heating rate must be non-negative");
    ensure!(f_mode.is_finite() && f_mode > 0.0, "mode frequency must be positive");
    let s = heating_to_spectral_density(ndot, f_mode, op);
    let mut t = Table::new(&["ndot_per_s", "f_mode_kHz", "S_E_V2_per_m2_per_Hz"]);
    t.push(vec![ndot.into(), (f_mode / 1e3).into(), s.into()]);
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldGridConfig {
    pub tilt_factor: f64,
    /// m.
    pub x: Vec<f64>,
    /// m.
    pub y: Vec<f64>,
    pub z: f64,
}

/// Pseudopotential and total potential energy on an x–y grid at the
/// operating point.
pub fn cmd_field_grid(layout: &ElectrodeLayout, op: &OperatingPoint, cfg: &FieldGridConfig) -> Result<Table> {
    ensure!(!cfg.x.is_empty() && !cfg.y.is_empty(), "empty grid: need at least one x and one y");
    if let Some(y) = cfg.y.iter().find(|y| !(**y > 0.0)) {
        bail!("grid point at y = {y} m lies on or below the chip plane");
    }
    let bases = standard_bases(layout)?;
    let model = FieldModel::new(layout, &configured(layout, &bases, op, cfg.tilt_factor))?;
    let mut t = Table::new(&["x_um", "y_um", "pseudo_eV", "total_eV", "E_rf_x_V_per_m", "E_rf_y_V_per_m"]);
    for &y in &cfg.y {
        for &x in &cfg.x {
            let p = FieldPoint::new(x, y, cfg.z);
            let g = model.rf_unit_gradient(p);
            t.push(vec![
                (x / UM).into(),
                (y / UM).into(),
                (model.pseudopotential(p) / EV).into(),
                (model.total_energy(p) / EV).into(),
                (-op.v_rf * g[0]).into(),
                (-op.v_rf * g[1]).into(),
            ]);
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sixwire_core::{reconstruct_six_wire, SixWireParams};

    fn layout() -> ElectrodeLayout {
        reconstruct_six_wire(&SixWireParams::default()).unwrap()
    }

    #[test]
    fn linspace_edges() {
        assert!(linspace(0.0, 1.0, 0).is_err());
        assert_eq!(linspace(2.0, 5.0, 1).unwrap(), vec![2.0]);
        assert_eq!(linspace(0.0, 1.0, 3).unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn bases_rows_are_symmetric() {
        let t = cmd_bases(&layout()).unwrap();
        assert_eq!(t.rows.len(), 4);
        let v1 = t.column("V1_mV").unwrap();
        let v2 = t.column("V2_mV").unwrap();
        assert_eq!(v1[0], v2[0]);
        assert!(t.column("residual_1").unwrap().iter().all(|r| *r < 1e-3));
    }

    #[test]
    fn heating_row() {
        let t = cmd_heating(&default_operating_point(), 5e4, 467e3).unwrap();
        let s = t.column("S_E_V2_per_m2_per_Hz").unwrap()[0];
        assert!((s / 1.6e-10 - 1.0).abs() < 0.02, "{s}");
    }

    #[test]
    fn empty_grids_are_usage_errors() {
        let op = default_operating_point();
        assert!(cmd_modes(&layout(), &op, &[], None).is_err());
        assert!(cmd_scan(&op, 2.0 * PI * 3e6, &LaserParams::default(), &[]).is_err());
        let cfg = FieldGridConfig { tilt_factor: 0.0, x: vec![], y: vec![1e-4], z: 0.0 };
        assert!(cmd_field_grid(&layout(), &op, &cfg).is_err());
    }

    #[test]
    fn field_grid_rejects_the_plane() {
        let cfg = FieldGridConfig { tilt_factor: 0.0, x: vec![0.0], y: vec![0.0], z: 0.0 };
        assert!(cmd_field_grid(&layout(), &default_operating_point(), &cfg).is_err());
    }
}
