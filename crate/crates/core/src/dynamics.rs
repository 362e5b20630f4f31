//! Radial-plane ion trajectories in the full time-dependent field,
//! collision-loss trials, tickle response and heating-rate conversion.

#[allow(unused_imports)] // shadowed by std methods when a dev-dependency links std
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::constants::{ELEMENTARY_CHARGE, HBAR};
use crate::fields::{rect_gradient, FieldModel, FieldPoint, OperatingPoint};
use crate::geometry::Electrode;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("integration diverged at t = {0:.3e} s (step too coarse?)")]
    Diverged(f64),
    #[error("invalid integration setup: {0}")]
    InvalidSetup(&'static str),
}

/// Uniform-step velocity Verlet for `r̈ = a(r, t)`. `observe` sees every
/// accepted state and may stop the run by returning `false`.
pub fn verlet<A, O>(mut accel: A, r0: [f64; 2], v0: [f64; 2], dt: f64, steps: usize, mut observe: O) -> ([f64; 2], [f64; 2], usize)
where
    A: FnMut([f64; 2], f64) -> [f64; 2],
    O: FnMut(usize, f64, [f64; 2], [f64; 2]) -> bool,
{
    let (mut r, mut v) = (r0, v0);
    let mut a = accel(r, 0.0);
    if !observe(0, 0.0, r, v) {
        return (r, v, 0);
    }
    for n in 1..=steps {
        let t = n as f64 * dt;
        r = [r[0] + v[0] * dt + 0.5 * a[0] * dt * dt, r[1] + v[1] * dt + 0.5 * a[1] * dt * dt];
        let a_new = accel(r, t);
        v = [v[0] + 0.5 * (a[0] + a_new[0]) * dt, v[1] + 0.5 * (a[1] + a_new[1]) * dt];
        a = a_new;
        if !observe(n, t, r, v) {
            return (r, v, n);
        }
    }
    (r, v, steps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySpec {
    /// Start position; `z` is held fixed during the run.
    pub r0: FieldPoint,
    /// Initial (vx, vy), m·s⁻¹.
    pub v0: [f64; 2],
    pub t_end: f64,
    pub steps_per_rf_cycle: usize,
    pub rf_phase: f64,
    /// Additional spatially uniform field (Ex, Ey), V·m⁻¹.
    pub uniform_field: [f64; 2],
    /// Keep every n-th sample.
    pub sample_every: usize,
}

impl TrajectorySpec {
    pub fn at_rest(r0: FieldPoint, t_end: f64) -> Self {
        TrajectorySpec { r0, v0: [0.0; 2], t_end, steps_per_rf_cycle: 100, rf_phase: 0.0, uniform_field: [0.0; 2], sample_every: 1 }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// (x, y) samples, m.
    pub r: Vec<[f64; 2]>,
    pub v: Vec<[f64; 2]>,
}

/// Integrates `m r̈ = Q E(r, t)` in the x–y plane with
/// `E = E_dc(r) + E_rf(r) cos(Ωt + φ)` from the full electrode fields.
pub fn integrate_trajectory(model: &FieldModel, spec: &TrajectorySpec) -> Result<Trajectory, DynamicsError> {
    if spec.steps_per_rf_cycle < 8 || !(spec.t_end > 0.0) || spec.sample_every == 0 {
        return Err(DynamicsError::InvalidSetup("need t_end > 0, >= 8 steps per rf cycle, sample_every >= 1"));
    }
    let op = &model.op;
    let period = 2.0 * PI / op.omega_rf;
    let steps = (spec.t_end / period * spec.steps_per_rf_cycle as f64).ceil() as usize;
    let dt = spec.t_end / steps as f64;
    let qm = op.charge / op.mass;
    let z = spec.r0.z;
    let uf = spec.uniform_field;
    let start = [spec.r0.x, spec.r0.y];
    let limit = 1e3 * spec.r0.y.abs().max(1e-6);
    let mut out = Trajectory::default();
    let mut failed = None;
    verlet(
        |r, t| {
            let e = model.electric_field(FieldPoint::new(r[0], r[1].max(1e-12), z), t, spec.rf_phase);
            [qm * (e[0] + uf[0]), qm * (e[1] + uf[1])]
        },
        start,
        spec.v0,
        dt,
        steps,
        |n, t, r, v| {
            let far = (r[0] - start[0]).hypot(r[1] - start[1]);
            if !far.is_finite() || far > limit || r[1] <= 0.0 {
                failed = Some(t);
                return false;
            }
            if n % spec.sample_every == 0 {
                out.t.push(t);
                out.r.push(r);
                out.v.push(v);
            }
            true
        },
    );
    match failed {
        Some(t) => Err(DynamicsError::Diverged(t)),
        None => Ok(out),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionTrial {
    /// Initial kinetic energy, eV.
    pub e0: f64,
    pub angle: f64,
    pub rf_phase: f64,
    pub lost: bool,
    pub t_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossCurve {
    /// (E0 in eV, loss fraction, binomial standard error).
    pub points: Vec<(f64, f64, f64)>,
    /// Pseudopotential depth used for scaling, eV.
    pub depth_ref: f64,
}

/// Collision-loss simulation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSettings {
    pub duration: f64,
    pub steps: usize,
    /// Escape once `|r − r_eq|` exceeds this many ion heights.
    pub escape_heights: f64,
}

impl Default for LossSettings {
    fn default() -> Self {
        LossSettings { duration: 2e-6, steps: 10_000, escape_heights: 5.0 }
    }
}

/// Collision angle and rf phase for trial `trial` of a run seeded with
/// `seed`. The same trial index gets the same draw at every energy, so a
/// loss curve compares energies on common random numbers.
pub fn trial_draw(seed: u64, trial: u64) -> (f64, f64) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let angle = 2.0 * PI * rng.random::<f64>();
    let phase = 2.0 * PI * rng.random::<f64>();
    (angle, phase)
}

/// One collision: the ion at rest at `eq` receives a kick of kinetic
/// energy `e0` (eV) along `angle` at rf phase `rf_phase`.
pub fn collision_trial(model: &FieldModel, eq: FieldPoint, e0: f64, angle: f64, rf_phase: f64, settings: &LossSettings) -> CollisionTrial {
    let op = &model.op;
    let speed = (2.0 * e0.max(0.0) * ELEMENTARY_CHARGE / op.mass).sqrt();
    let v0 = [speed * angle.cos(), speed * angle.sin()];
    let qm = op.charge / op.mass;
    let dt = settings.duration / settings.steps as f64;
    let escape = settings.escape_heights * eq.y;
    let mut t_loss = None;
    verlet(
        |r, t| {
            let e = model.electric_field(FieldPoint::new(r[0], r[1].max(1e-12), eq.z), t, rf_phase);
            [qm * e[0], qm * e[1]]
        },
        [eq.x, eq.y],
        v0,
        dt,
        settings.steps,
        |_, t, r, _| {
            let d = (r[0] - eq.x).hypot(r[1] - eq.y);
            if r[1] <= 0.0 || !(d <= escape) {
                t_loss = Some(t);
                false
            } else {
                true
            }
        },
    );
    CollisionTrial { e0, angle, rf_phase, lost: t_loss.is_some(), t_loss }
}

/// Fraction and binomial standard error from loss counts.
pub fn loss_fraction(lost: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = lost as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

/// Sequential Monte Carlo over an energy grid (eV).
pub fn loss_probability(
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
        .iter()
        .map(|&e0| {
            let lost = draws.iter().filter(|&&(a, p)| collision_trial(model, eq, e0, a, p, settings).lost).count();
            let (p, se) = loss_fraction(lost, n_trials);
            (e0, p, se)
        })
        .collect();
    LossCurve { points, depth_ref }
}

/// Settings for a tickle run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickleSettings {
    /// Drive duration, s.
    pub duration: f64,
    pub steps_per_rf_cycle: usize,
    /// Kinetic energy is averaged over this final window, s.
    pub window: f64,
}

impl Default for TickleSettings {
    fn default() -> Self {
        TickleSettings { duration: 100e-6, steps_per_rf_cycle: 40, window: 5e-6 }
    }
}

/// Mean kinetic energy (J) over the closing window after driving
/// `electrode` with `amplitude·cos(2πft)` volts, the ion starting at rest
/// at `eq`.
pub fn tickle_response(model: &FieldModel, eq: FieldPoint, electrode: &Electrode, f: f64, amplitude: f64, settings: &TickleSettings) -> f64 {
    let op = &model.op;
    let period = 2.0 * PI / op.omega_rf;
    let steps = (settings.duration / period * settings.steps_per_rf_cycle as f64).ceil() as usize;
    let dt = settings.duration / steps as f64;
    let qm = op.charge / op.mass;
    let w = 2.0 * PI * f;
    let start_avg = settings.duration - settings.window;
    let (mut sum, mut count) = (0.0, 0usize);
    verlet(
        |r, t| {
            let p = FieldPoint::new(r[0], r[1].max(1e-12), eq.z);
            let mut e = model.electric_field(p, t, 0.0);
            if amplitude != 0.0 {
                let c = amplitude * (w * t).cos();
                for rect in &electrode.rects {
                    let g = rect_gradient(rect, p);
                    e[0] -= c * g[0];
                    e[1] -= c * g[1];
                }
            }
            [qm * e[0], qm * e[1]]
        },
        [eq.x, eq.y],
        [0.0, 0.0],
        dt,
        steps,
        |_, t, r, v| {
            if t >= start_avg {
                sum += 0.5 * op.mass * (v[0] * v[0] + v[1] * v[1]);
                count += 1;
            }
            r[1] > 0.0 && (r[0] - eq.x).hypot(r[1] - eq.y) < 5.0 * eq.y
        },
    );
    if count == 0 {
        f64::INFINITY
    } else {
        sum / count as f64
    }
}

/// Tickle response over a frequency grid.
pub fn tickle_scan(model: &FieldModel, eq: FieldPoint, electrode: &Electrode, f_grid: &[f64], amplitude: f64, settings: &TickleSettings) -> Vec<(f64, f64)> {
    f_grid.iter().map(|&f| (f, tickle_response(model, eq, electrode, f, amplitude, settings))).collect()
}

/// Local maxima of a sampled response, refined by a parabola through the
/// peak and its neighbours. Peaks below `floor` are dropped.
pub fn find_peaks(curve: &[(f64, f64)], floor: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 1..curve.len().saturating_sub(1) {
        let (f0, e0) = curve[k - 1];
        let (f1, e1) = curve[k];
        let (f2, e2) = curve[k + 1];
        if e1 > e0 && e1 >= e2 && e1 > floor {
            let h = f1 - f0;
            let denom = e0 - 2.0 * e1 + e2;
            let shift = if denom != 0.0 && (f2 - f1 - h).abs() < 1e-9 * h.abs() { 0.5 * h * (e0 - e2) / denom } else { 0.0 };
            out.push(f1 + shift);
        }
    }
    out
}

/// Single-sided field-noise density `S_E = 4 m ħ ω ṅ / Q²` (V²·m⁻²·Hz⁻¹)
/// from a heating rate `ndot` (quanta/s) of a mode at `f_mode` (Hz).
pub fn heating_to_spectral_density(ndot: f64, f_mode: f64, op: &OperatingPoint) -> f64 {
    4.0 * op.mass * HBAR * 2.0 * PI * f_mode * ndot / (op.charge * op.charge)
}

/// Complex amplitude of the `f` component of a uniformly sampled signal:
/// `x(t) ≈ Re(A e^{i2πft})` gives `A`.
pub fn fourier_amplitude(samples: &[f64], dt: f64, f: f64) -> Complex64 {
    let w = 2.0 * PI * f * dt;
    let n = samples.len() as f64;
    let s: Complex64 = samples.iter().enumerate().map(|(k, &x)| x * Complex64::from_polar(1.0, -w * k as f64)).sum();
    s * (2.0 / n)
}

/// Frequency of the largest Hann-windowed spectral peak in `[f_lo, f_hi]`.
pub fn dominant_frequency(samples: &[f64], dt: f64, f_lo: f64, f_hi: f64) -> f64 {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let windowed: Vec<f64> = samples
        .iter()
        .enumerate()
        .map(|(k, &x)| (x - mean) * (0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos()))
        .collect();
    let power = |f: f64| fourier_amplitude(&windowed, dt, f).norm();
    let span = n as f64 * dt;
    let coarse = ((f_hi - f_lo) * span * 8.0).ceil().max(16.0) as usize;
    let mut best = (f_lo, 0.0);
    for k in 0..=coarse {
        let f = f_lo + (f_hi - f_lo) * k as f64 / coarse as f64;
        let p = power(f);
        if p > best.1 {
            best = (f, p);
        }
    }
    let step = (f_hi - f_lo) / coarse as f64;
    crate::roots::golden_max(power, (best.0 - step).max(f_lo), (best.0 + step).min(f_hi), 1e-9 * best.0.abs().max(1.0)).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verlet_conserves_harmonic_energy() {
        let w = 2.0 * PI * 1e6;
        let periods = 100.0;
        let steps = 300_000;
        let dt = periods / 1e6 / steps as f64;
        let energy = |r: [f64; 2], v: [f64; 2]| 0.5 * (v[0] * v[0] + v[1] * v[1]) + 0.5 * w * w * (r[0] * r[0] + r[1] * r[1]);
        let e0 = energy([1e-6, 0.0], [0.0, 2.0]);
        let mut worst = 0.0_f64;
        verlet(|r, _| [-w * w * r[0], -w * w * r[1]], [1e-6, 0.0], [0.0, 2.0], dt, steps, |_, _, r, v| {
            worst = worst.max((energy(r, v) - e0).abs() / e0);
            true
        });
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn trial_draws_are_reproducible_and_distinct() {
        assert_eq!(trial_draw(7, 3), trial_draw(7, 3));
        assert_ne!(trial_draw(7, 3), trial_draw(7, 4));
        assert_ne!(trial_draw(7, 3), trial_draw(8, 3));
    }

    #[test]
    fn loss_fraction_counts() {
        assert_eq!(loss_fraction(0, 100), (0.0, 0.0));
        let (p, se) = loss_fraction(25, 100);
        assert_eq!(p, 0.25);
        assert!((se - (0.25_f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn heating_conversion() {
        let op = OperatingPoint::ca40(175.0);
        let s = heating_to_spectral_density(5e4, 467e3, &op);
        assert!((s - 1.6e-10).abs() < 0.02 * 1.6e-10, "{s:e}");
        assert_eq!(heating_to_spectral_density(0.0, 467e3, &op), 0.0);
        let s2 = heating_to_spectral_density(5e4, 934e3, &op);
        assert!((s2 / s - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_peak_of_a_sine() {
        let dt = 1e-8;
        let xs: Vec<f64> = (0..20_000).map(|k| (2.0 * PI * 3.21e6 * k as f64 * dt).sin()).collect();
        let f = dominant_frequency(&xs, dt, 2e6, 4e6);
        assert!((f - 3.21e6).abs() < 1e3, "{f}");
        let a = fourier_amplitude(&xs, dt, 3.21e6).norm();
        assert!((a - 1.0).abs() < 0.01);
    }

    #[test]
    fn parabolic_peak_refinement() {
        let curve: Vec<(f64, f64)> = (0..50).map(|k| {
            let f = k as f64 * 0.1;
            (f, 1.0 / (1.0 + (f - 2.33).powi(2) * 50.0))
        }).collect();
        let peaks = find_peaks(&curve, 0.1);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0] - 2.33).abs() < 0.02);
    }
}
