use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use sixwire::commands::{self, FieldGridConfig, LossConfig, SensmapConfig, MHZ};
use sixwire::core::bloch::RepumperWindow;
use sixwire::core::dynamics::LossSettings;
use sixwire::core::LaserParams;
use sixwire::{layout_or_default, sweeps, table};

/// Six-wire surface trap workbench: voltage bases, secular modes, loss
/// Monte Carlo and micromotion-detection sensitivity, as CSV.
#[derive(Parser)]
#[command(name = "sixwire", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Layout JSON (µm). Defaults to the built-in reconstruction.
    #[arg(long, global = true)]
    layout: Option<PathBuf>,
    /// rf amplitude, V.
    #[arg(long, global = true, default_value_t = 175.0)]
    vrf: f64,
    /// rf drive frequency, MHz.
    #[arg(long, global = true, default_value_t = 25.8)]
    frf: f64,
    /// Output CSV; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads for the parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Args)]
struct LaserArgs {
    /// Cooling intensity, units of I_s.
    #[arg(long)]
    ic: Option<f64>,
    /// Cooling detuning, MHz.
    #[arg(long, allow_hyphen_values = true)]
    dc: Option<f64>,
    /// Repumper intensity, units of I_s.
    #[arg(long)]
    ir: Option<f64>,
    /// Magnetic field, G.
    #[arg(long)]
    bfield: Option<f64>,
    /// Laser linewidth, MHz.
    #[arg(long)]
    linewidth: Option<f64>,
    /// Micromotion mode frequency, MHz. Defaults to the mean radial mode.
    #[arg(long)]
    f_mode: Option<f64>,
}

impl LaserArgs {
    fn apply(&self, mut lp: LaserParams) -> LaserParams {
        if let Some(v) = self.ic {
            lp.i_c = v;
        }
        if let Some(v) = self.dc {
            lp.delta_c = v * MHZ;
        }
        if let Some(v) = self.ir {
            lp.i_r = v;
        }
        if let Some(v) = self.bfield {
            lp.b_field = v;
        }
        if let Some(v) = self.linewidth {
            lp.linewidth = v * MHZ;
        }
        lp
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Endcap, x/y compensation and tilt voltage sets (mV).
    Bases,
    /// Radial and axial modes over tilt factors.
    Modes {
        #[arg(long, value_delimiter = ',', default_values_t = commands::TABLE_TILT_FACTORS)]
        tilt: Vec<f64>,
        /// Fit the rf amplitude to this tilt-0 mean radial frequency (MHz).
        #[arg(long)]
        fit_radial: Option<f64>,
    },
    /// Collision-loss probability versus kick energy.
    Loss {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Smallest and largest kick energy, multiples of the trap depth.
        #[arg(long, default_value_t = 0.1)]
        e_min: f64,
        #[arg(long, default_value_t = 2.0)]
        e_max: f64,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = 1.0)]
        tilt: f64,
        /// Simulated time after the kick, µs.
        #[arg(long, default_value_t = 2.0)]
        duration: f64,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
    /// Micromotion sensitivity map over cooling detuning and repumper intensity.
    Sensmap {
        #[command(flatten)]
        lasers: LaserArgs,
        #[arg(long, allow_hyphen_values = true, default_value_t = -40.0)]
        dc_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
        dc_max: f64,
        #[arg(long, default_value_t = 20)]
        dc_points: usize,
        #[arg(long, default_value_t = 5.0)]
        ir_min: f64,
        #[arg(long, default_value_t = 200.0)]
        ir_max: f64,
        #[arg(long, default_value_t = 20)]
        ir_points: usize,
        /// Δ_r search half-window around Δ_c, MHz.
        #[arg(long, default_value_t = 40.0)]
        window: f64,
    },
    /// Repumper scan: fluorescence and sensitivity versus Δ_r.
    Scan {
        #[command(flatten)]
        lasers: LaserArgs,
        #[arg(long, allow_hyphen_values = true, default_value_t = -50.0)]
        dr_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 10.0)]
        dr_max: f64,
        #[arg(long, default_value_t = 121)]
        points: usize,
    },
    /// Fit the two-level lineshape to a CSV of (detuning MHz, counts).
    FitLineshape {
        data: PathBuf,
        /// Counts at unit excited-state population; enables s and Γ.
        #[arg(long)]
        amplitude: Option<f64>,
    },
    /// Field-noise spectral density from a heating rate.
    Heating {
        /// Heating rate, quanta/s.
        #[arg(long)]
        ndot: f64,
        /// Mode frequency, kHz.
        #[arg(long)]
        f_mode: f64,
    },
    /// Pseudopotential and total potential on an x–y grid.
    FieldGrid {
        #[arg(long, allow_hyphen_values = true, default_value_t = -300.0)]
        x_min: f64,
        #[arg(long, default_value_t = 300.0)]
        x_max: f64,
        #[arg(long, default_value_t = 61)]
        nx: usize,
        #[arg(long, default_value_t = 20.0)]
        y_min: f64,
        #[arg(long, default_value_t = 500.0)]
        y_max: f64,
        #[arg(long, default_value_t = 49)]
        ny: usize,
        /// Axial position, µm.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        z: f64,
        #[arg(long, default_value_t = 0.0)]
        tilt: f64,
    },
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    sweeps::init_threads(c.threads)?;
    let layout = layout_or_default(c.layout.as_deref())?;
    let op = commands::operating_point(c.vrf, c.frf * MHZ)?;
    let mode = |f: Option<f64>| -> Result<f64> {
        match f {
            Some(f) => Ok(2.0 * PI * f * MHZ),
            None => commands::radial_mode(&layout, &op),
        }
    };
    let table = match cli.cmd {
        Cmd::Bases => commands::cmd_bases(&layout)?,
        Cmd::Modes { tilt, fit_radial } => commands::cmd_modes(&layout, &op, &tilt, fit_radial.map(|f| f * MHZ))?.table,
        Cmd::Loss { trials, e_min, e_max, points, tilt, duration, steps } => {
            let cfg = LossConfig {
                tilt_factor: tilt,
                depth_fractions: commands::linspace(e_min, e_max, points)?,
                trials,
                seed: c.seed,
                settings: LossSettings { duration: duration * 1e-6, steps, ..Default::default() },
            };
            commands::cmd_loss(&layout, &op, &cfg)?
        }
        Cmd::Sensmap { lasers, dc_min, dc_max, dc_points, ir_min, ir_max, ir_points, window } => {
            let cfg = SensmapConfig {
                lasers: lasers.apply(SensmapConfig::default().lasers),
                delta_c: commands::linspace(dc_min * MHZ, dc_max * MHZ, dc_points)?,
                i_r: commands::linspace(ir_min, ir_max, ir_points)?,
                window: RepumperWindow { below: window * MHZ, above: window * MHZ, ..Default::default() },
            };
            commands::cmd_sensmap(&op, mode(lasers.f_mode)?, &cfg)?
        }
        Cmd::Scan { lasers, dr_min, dr_max, points } => {
            let lp = lasers.apply(LaserParams::default());
            let grid = commands::linspace(dr_min * MHZ, dr_max * MHZ, points)?;
            commands::cmd_scan(&op, mode(lasers.f_mode)?, &lp, &grid)?
        }
        Cmd::FitLineshape { data, amplitude } => commands::cmd_fit_lineshape(&table::read_xy_csv(&data)?, amplitude)?,
        Cmd::Heating { ndot, f_mode } => commands::cmd_heating(&op, ndot, f_mode * 1e3)?,
        Cmd::FieldGrid { x_min, x_max, nx, y_min, y_max, ny, z, tilt } => {
            let cfg = FieldGridConfig {
                tilt_factor: tilt,
                x: commands::linspace(x_min * 1e-6, x_max * 1e-6, nx)?,
                y: commands::linspace(y_min * 1e-6, y_max * 1e-6, ny)?,
                z: z * 1e-6,
            };
            commands::cmd_field_grid(&layout, &op, &cfg)?
        }
    };
    table.emit(c.out.as_deref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
