//! 8-level S1/2–P1/2–D3/2 optical Bloch model of ⁴⁰Ca⁺ with Zeeman
//! structure, its rf-modulated steady state and the two-level lineshape.
//!
//! The density matrix is vectorised column-major, `vec(ρ)[j·8 + i] = ρᵢⱼ`,
//! so the generator is a 64×64 complex matrix. Frequencies in
//! [`LaserParams`] are in Hz; the generator itself is in rad/s.

#[allow(unused_imports)] // shadowed by std methods when a dev-dependency links std
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::basis::micromotion;
use crate::constants::{
    BOHR_MAGNETON_HZ_PER_GAUSS, BRANCHING_P_TO_D, DEFAULT_RF_FREQUENCY, GAMMA_P, G_D32, G_P12, G_S12, LAMBDA_COOLING,
    LAMBDA_REPUMP,
};
use crate::fields::OperatingPoint;
use crate::linalg::{lstsq, CMatrix, Matrix};
use crate::roots::golden_max;

pub const LEVELS: usize = 8;
pub const DIM: usize = LEVELS * LEVELS;

/// `Ω² = κ · (I/I_s) · Γ · Γ_channel` for the convention
/// `I_s ≡ 4πhcΓ/λ³` with Γ taken in Hz, i.e. `I_s = 6·I_sat` where
/// `I_sat = πhcΓ/3λ³` is the usual two-level saturation intensity.
pub const RABI_KAPPA: f64 = 3.0 / PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlochError {
    #[error("nonphysical laser parameters: {0}")]
    Nonphysical(&'static str),
    #[error("singular steady-state system (degenerate parameters, e.g. a dark state)")]
    Singular,
    #[error("line-shape fit failed: {0}")]
    FitFailed(&'static str),
    #[error("line-shape fit diverged (rms residual {0:.3e})")]
    FitDiverged(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Manifold {
    S,
    P,
    D,
}

/// (manifold, 2·m_J) in storage order.
pub const LEVEL_TABLE: [(Manifold, i32); LEVELS] = [
    (Manifold::S, -1),
    (Manifold::S, 1),
    (Manifold::P, -1),
    (Manifold::P, 1),
    (Manifold::D, -3),
    (Manifold::D, -1),
    (Manifold::D, 1),
    (Manifold::D, 3),
];

fn twice_j(m: Manifold) -> i32 {
    match m {
        Manifold::S | Manifold::P => 1,
        Manifold::D => 3,
    }
}

fn g_factor(m: Manifold) -> f64 {
    match m {
        Manifold::S => G_S12,
        Manifold::P => G_P12,
        Manifold::D => G_D32,
    }
}

fn level_index(m: Manifold, tm: i32) -> Option<usize> {
    LEVEL_TABLE.iter().position(|&(mm, t)| mm == m && t == tm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserParams {
    /// Cooling (397 nm) intensity in units of I_s.
    pub i_c: f64,
    /// Cooling detuning, Hz.
    pub delta_c: f64,
    /// Repumper (866 nm) intensity in units of I_s.
    pub i_r: f64,
    /// Repumper detuning, Hz.
    pub delta_r: f64,
    /// Laser linewidth (both lasers), Hz.
    pub linewidth: f64,
    /// (σ⁻, π, σ⁺) intensity weights of the cooling beam.
    pub pol_c: [f64; 3],
    /// (σ⁻, π, σ⁺) intensity weights of the repumper.
    pub pol_r: [f64; 3],
    /// Gauss. The sign flips the Zeeman shifts.
    pub b_field: f64,
    /// Optional J_z dephasing rate (Hz) standing in for a polarisation that
    /// is incoherent rather than a fixed superposition. Zero by default.
    pub polarization_dephasing: f64,
    /// Also Doppler-modulate the cooling detuning (same beam direction).
    pub modulate_cooling: bool,
}

/// The operating point fitted to the measured repumper scan.
impl Default for LaserParams {
    fn default() -> Self {
        LaserParams {
            i_c: 1.7,
            delta_c: -14e6,
            i_r: 95.0,
            delta_r: -28.7e6,
            linewidth: 500e3,
            pol_c: [0.5, 0.0, 0.5],
            pol_r: [0.5, 0.0, 0.5],
            b_field: 1.7,
            polarization_dephasing: 0.0,
            modulate_cooling: false,
        }
    }
}

impl LaserParams {
    fn validate(&self) -> Result<(), BlochError> {
        if self.i_c < 0.0 || self.i_r < 0.0 {
            return Err(BlochError::Nonphysical("negative intensity"));
        }
        if self.linewidth < 0.0 || self.polarization_dephasing < 0.0 {
            return Err(BlochError::Nonphysical("negative linewidth"));
        }
        if self.pol_c.iter().chain(&self.pol_r).any(|w| *w < 0.0) {
            return Err(BlochError::Nonphysical("negative polarisation weight"));
        }
        let vals = [self.i_c, self.delta_c, self.i_r, self.delta_r, self.linewidth, self.b_field, self.polarization_dephasing];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(BlochError::Nonphysical("non-finite parameter"));
        }
        Ok(())
    }

    /// Same beam with σ⁺ and σ⁻ weights exchanged.
    pub fn swapped_polarization(&self) -> Self {
        let sw = |p: [f64; 3]| [p[2], p[1], p[0]];
        LaserParams { pol_c: sw(self.pol_c), pol_r: sw(self.pol_r), ..*self }
    }
}

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | J M⟩`, all arguments doubled.
pub fn clebsch_gordan(tj1: i32, tm1: i32, tj2: i32, tm2: i32, tj: i32, tm: i32) -> f64 {
    if tm1 + tm2 != tm || tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    let f = |twice: i32| factorial(twice / 2);
    let pref = ((tj + 1) as f64 * f(tj + tj1 - tj2) * f(tj - tj1 + tj2) * f(tj1 + tj2 - tj) / f(tj1 + tj2 + tj + 2)).sqrt()
        * (f(tj + tm) * f(tj - tm) * f(tj1 - tm1) * f(tj1 + tm1) * f(tj2 - tm2) * f(tj2 + tm2)).sqrt();
    let mut sum = 0.0;
    for k in 0..=20 {
        let tk = 2 * k;
        let args = [tk, tj1 + tj2 - tj - tk, tj1 - tm1 - tk, tj2 + tm2 - tk, tj - tj2 + tm1 + tk, tj - tj1 - tm2 + tk];
        if args.iter().any(|&a| a < 0) {
            continue;
        }
        let denom: f64 = args.iter().map(|&a| f(a)).product();
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / denom;
    }
    pref * sum
}

type Op8 = [[Complex64; LEVELS]; LEVELS];

fn zero8() -> Op8 {
    [[Complex64::new(0.0, 0.0); LEVELS]; LEVELS]
}

fn vi(i: usize, j: usize) -> usize {
    j * LEVELS + i
}

/// Adds `c · A ρ B` to the superoperator.
fn add_sandwich(m: &mut CMatrix, c: Complex64, a: &Op8, b: &Op8) {
    for i in 0..LEVELS {
        for k in 0..LEVELS {
            let aik = a[i][k];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            for l in 0..LEVELS {
                for j in 0..LEVELS {
                    let blj = b[l][j];
                    if blj.re == 0.0 && blj.im == 0.0 {
                        continue;
                    }
                    m[(vi(i, j), vi(k, l))] += c * aik * blj;
                }
            }
        }
    }
}

fn identity8() -> Op8 {
    let mut id = zero8();
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    id
}

fn dagger(a: &Op8) -> Op8 {
    let mut out = zero8();
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn mul8(a: &Op8, b: &Op8) -> Op8 {
    let mut out = zero8();
    for i in 0..LEVELS {
        for k in 0..LEVELS {
            for j in 0..LEVELS {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// `−i[H, ·]`.
fn add_commutator(m: &mut CMatrix, h: &Op8) {
    let id = identity8();
    add_sandwich(m, Complex64::new(0.0, -1.0), h, &id);
    add_sandwich(m, Complex64::new(0.0, 1.0), &id, h);
}

/// `LρL† − ½{L†L, ρ}`.
fn add_dissipator(m: &mut CMatrix, l: &Op8) {
    let id = identity8();
    let ld = dagger(l);
    let ldl = mul8(&ld, l);
    add_sandwich(m, Complex64::new(1.0, 0.0), l, &ld);
    add_sandwich(m, Complex64::new(-0.5, 0.0), &ldl, &id);
    add_sandwich(m, Complex64::new(-0.5, 0.0), &id, &ldl);
}

fn projector(which: Manifold) -> Op8 {
    let mut p = zero8();
    for (i, &(m, _)) in LEVEL_TABLE.iter().enumerate() {
        if m == which {
            p[i][i] = Complex64::new(1.0, 0.0);
        }
    }
    p
}

#[derive(Debug, Clone)]
pub struct ModulationModel {
    /// Generator at the configured detunings, rad/s.
    pub m0: CMatrix,
    /// ∂M0/∂Δ_r with Δ_r in rad/s.
    pub dm_r: CMatrix,
    /// ∂M0/∂Δ_c, used when the cooling beam is modulated too.
    pub dm_c: Option<CMatrix>,
    /// Trap drive, rad/s.
    pub omega: f64,
    /// Peak micromotion velocity, m/s.
    pub v0: f64,
    pub lambda_r: f64,
    pub lambda_c: f64,
    /// Natural linewidth of P1/2, rad/s.
    pub gamma: f64,
}

impl ModulationModel {
    pub fn with_drive(mut self, omega: f64, v0: f64) -> Self {
        self.omega = omega;
        self.v0 = v0;
        self
    }

    /// `ΔM = 2π v0 ∂M/∂Δ_r / λ_r` (plus the cooling term if enabled).
    pub fn delta_m(&self) -> CMatrix {
        let mut dm = self.dm_r.scaled(Complex64::new(2.0 * PI * self.v0 / self.lambda_r, 0.0));
        if let Some(dc) = &self.dm_c {
            dm = dm.add(&dc.scaled(Complex64::new(2.0 * PI * self.v0 / self.lambda_c, 0.0)));
        }
        dm
    }

    /// Modulation index `k_r v0 / Ω`.
    pub fn modulation_index(&self) -> f64 {
        2.0 * PI * self.v0 / self.lambda_r / self.omega
    }
}

/// Lindblad generator of the 8-level system for `lp`.
///
/// Decay P→S at (1 − b)Γ and P→D at bΓ, split over Zeeman sublevels by
/// squared Clebsch–Gordan coefficients. Each laser's linewidth enters as
/// dephasing of its lower manifold, `√(2π·lw) Π_S` and `√(2π·lw) Π_D`.
pub fn build_liouvillian(lp: &LaserParams) -> Result<ModulationModel, BlochError> {
    lp.validate()?;
    let gamma = GAMMA_P;
    let br = BRANCHING_P_TO_D;
    let mut h = zero8();
    let dc = 2.0 * PI * lp.delta_c;
    let dr = 2.0 * PI * lp.delta_r;
    for (i, &(m, tm)) in LEVEL_TABLE.iter().enumerate() {
        let zeeman = 2.0 * PI * g_factor(m) * 0.5 * tm as f64 * BOHR_MAGNETON_HZ_PER_GAUSS * lp.b_field;
        let e = match m {
            Manifold::S => 0.0,
            Manifold::P => -dc,
            Manifold::D => -dc + dr,
        };
        h[i][i] = Complex64::new(e + zeeman, 0.0);
    }
    let rabi_c = (RABI_KAPPA * lp.i_c * gamma * gamma * (1.0 - br)).sqrt();
    let rabi_r = (RABI_KAPPA * lp.i_r * gamma * gamma * br).sqrt();
    for (lower, rabi, pol) in [(Manifold::S, rabi_c, lp.pol_c), (Manifold::D, rabi_r, lp.pol_r)] {
        for (i, &(m1, tm1)) in LEVEL_TABLE.iter().enumerate() {
            if m1 != lower {
                continue;
            }
            for (j, &(m2, tm2)) in LEVEL_TABLE.iter().enumerate() {
                if m2 != Manifold::P {
                    continue;
                }
                let tq = tm2 - tm1;
                if tq.abs() > 2 {
                    continue;
                }
                let w = pol[(tq / 2 + 1) as usize];
                let c = clebsch_gordan(twice_j(lower), tm1, 2, tq, 1, tm2);
                let v = 0.5 * rabi * w.sqrt() * c;
                h[j][i] += Complex64::new(v, 0.0);
                h[i][j] += Complex64::new(v, 0.0);
            }
        }
    }

    let mut m0 = CMatrix::zeros(DIM);
    add_commutator(&mut m0, &h);
    for (lower, rate) in [(Manifold::S, gamma * (1.0 - br)), (Manifold::D, gamma * br)] {
        for &(mp, tmp) in LEVEL_TABLE.iter().filter(|(m, _)| *m == Manifold::P) {
            for &(ml, tml) in LEVEL_TABLE.iter().filter(|(m, _)| *m == lower) {
                let c = clebsch_gordan(twice_j(lower), tml, 2, tmp - tml, 1, tmp);
                if c == 0.0 {
                    continue;
                }
                let mut l = zero8();
                let (Some(a), Some(b)) = (level_index(ml, tml), level_index(mp, tmp)) else { continue };
                l[a][b] = Complex64::new(rate.sqrt() * c, 0.0);
                add_dissipator(&mut m0, &l);
            }
        }
    }
    let gl = 2.0 * PI * lp.linewidth;
    if gl > 0.0 {
        for which in [Manifold::S, Manifold::D] {
            let mut p = projector(which);
            for row in p.iter_mut() {
                for x in row.iter_mut() {
                    *x *= gl.sqrt();
                }
            }
            add_dissipator(&mut m0, &p);
        }
    }
    if lp.polarization_dephasing > 0.0 {
        let g = (2.0 * PI * lp.polarization_dephasing).sqrt();
        let mut jz = zero8();
        for (i, &(_, tm)) in LEVEL_TABLE.iter().enumerate() {
            jz[i][i] = Complex64::new(g * 0.5 * tm as f64, 0.0);
        }
        add_dissipator(&mut m0, &jz);
    }

    let mut dm_r = CMatrix::zeros(DIM);
    add_commutator(&mut dm_r, &projector(Manifold::D));
    let dm_c = if lp.modulate_cooling {
        let mut d = CMatrix::zeros(DIM);
        let mut hp = projector(Manifold::P);
        let pd = projector(Manifold::D);
        for i in 0..LEVELS {
            hp[i][i] = -(hp[i][i] + pd[i][i]);
        }
        add_commutator(&mut d, &hp);
        Some(d)
    } else {
        None
    };
    Ok(ModulationModel {
        m0,
        dm_r,
        dm_c,
        omega: 2.0 * PI * DEFAULT_RF_FREQUENCY,
        v0: 0.0,
        lambda_r: LAMBDA_REPUMP,
        lambda_c: LAMBDA_COOLING,
        gamma,
    })
}

/// Solves `A ρ = 0` with `tr ρ = 1` by replacing the first row.
fn null_with_trace(a: &CMatrix) -> Result<Vec<Complex64>, BlochError> {
    let mut sys = a.clone();
    for j in 0..DIM {
        sys[(0, j)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..LEVELS {
        sys[(0, vi(i, i))] = Complex64::new(1.0, 0.0);
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); DIM];
    rhs[0] = Complex64::new(1.0, 0.0);
    let lu = sys.lu().map_err(|_| BlochError::Singular)?;
    let x = lu.solve(&rhs);
    // the replaced equation must still hold; otherwise the kernel is not one-dimensional
    let r = a.mul_vec(&x);
    let scale = a.max_abs();
    if r.iter().any(|v| !(v.norm() <= 1e-8 * scale)) {
        return Err(BlochError::Singular);
    }
    Ok(x)
}

/// Unmodulated steady state of a generator.
pub fn steady_state(m0: &CMatrix) -> Result<Vec<Complex64>, BlochError> {
    null_with_trace(m0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedSteadyState {
    pub rho0: Vec<Complex64>,
    pub rho_plus1: Vec<Complex64>,
    pub rho_minus1: Vec<Complex64>,
    /// Mean scattering rate Γ·P, photons/s.
    pub f0: f64,
    /// 2|F1|/F0.
    pub mod_rel: f64,
    /// arg F1, radians.
    pub phase: f64,
    /// `k_r v0 / Ω ≥ 1`: the Fourier truncation is no longer trustworthy.
    pub beyond_validity: bool,
}

impl ModulatedSteadyState {
    pub fn p_population(&self) -> f64 {
        p_population(&self.rho0)
    }
}

pub fn p_population(rho: &[Complex64]) -> f64 {
    LEVEL_TABLE.iter().enumerate().filter(|(_, (m, _))| *m == Manifold::P).map(|(i, _)| rho[vi(i, i)].re).sum()
}

fn p_trace(rho: &[Complex64]) -> Complex64 {
    LEVEL_TABLE.iter().enumerate().filter(|(_, (m, _))| *m == Manifold::P).map(|(i, _)| rho[vi(i, i)]).sum()
}

/// ρ as an 8×8 matrix from its vectorised form.
pub fn unvec(rho: &[Complex64]) -> [[Complex64; LEVELS]; LEVELS] {
    let mut out = [[Complex64::new(0.0, 0.0); LEVELS]; LEVELS];
    for i in 0..LEVELS {
        for j in 0..LEVELS {
            out[i][j] = rho[vi(i, j)];
        }
    }
    out
}

/// Fourier steady state `ρ(t) = Σ ρₙ e^{-inΩt}` of `dρ/dt = (M0 + ΔM cos Ωt)ρ`,
/// truncated at |n| ≤ `n_max` by the matrix continued fraction
/// `Sₙ = −[M0 ± inΩ + ½ΔM Sₙ₊₁]⁻¹ ½ΔM`.
pub fn solve_modulated(model: &ModulationModel, n_max: usize) -> Result<ModulatedSteadyState, BlochError> {
    let dm = model.delta_m();
    let half = dm.scaled(Complex64::new(0.5, 0.0));
    let zero = vec![Complex64::new(0.0, 0.0); DIM];
    if model.v0 == 0.0 || dm.max_abs() == 0.0 || n_max == 0 {
        let rho0 = null_with_trace(&model.m0)?;
        let f0 = model.gamma * p_population(&rho0);
        return Ok(ModulatedSteadyState { rho0, rho_plus1: zero.clone(), rho_minus1: zero, f0, mod_rel: 0.0, phase: 0.0, beyond_validity: false });
    }
    let branch = |sign: f64| -> Result<CMatrix, BlochError> {
        let mut s: Option<CMatrix> = None;
        for n in (1..=n_max).rev() {
            let mut a = model.m0.add_diagonal(Complex64::new(0.0, sign * n as f64 * model.omega));
            if let Some(next) = &s {
                a = a.add(&half.mul(next));
            }
            let lu = a.lu().map_err(|_| BlochError::Singular)?;
            s = Some(lu.solve_matrix(&half).scaled(Complex64::new(-1.0, 0.0)));
        }
        s.ok_or(BlochError::Singular)
    };
    let s_plus = branch(1.0)?;
    let s_minus = branch(-1.0)?;
    let a = model.m0.add(&half.mul(&s_plus.add(&s_minus)));
    let rho0 = null_with_trace(&a)?;
    let rho_plus1 = s_plus.mul_vec(&rho0);
    let rho_minus1 = s_minus.mul_vec(&rho0);
    let p0 = p_population(&rho0);
    let f0 = model.gamma * p0;
    let f1 = p_trace(&rho_plus1) * model.gamma;
    let mod_rel = if f0 > 0.0 { 2.0 * f1.norm() / f0 } else { 0.0 };
    Ok(ModulatedSteadyState {
        rho0,
        rho_plus1,
        rho_minus1,
        f0,
        mod_rel,
        phase: f1.arg(),
        beyond_validity: model.modulation_index() >= 1.0,
    })
}

/// Mean fluorescence Γ·P (photons/s) against repumper detuning (Hz).
pub fn repumper_scan(lp: &LaserParams, delta_r_grid: &[f64]) -> Result<Vec<(f64, f64)>, BlochError> {
    delta_r_grid
        .iter()
        .map(|&d| {
            let m = build_liouvillian(&LaserParams { delta_r: d, ..*lp })?;
            let rho = steady_state(&m.m0)?;
            Ok((d, m.gamma * p_population(&rho)))
        })
        .collect()
}

/// Stray field used to probe the linear response, V/m.
pub const PROBE_FIELD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sensitivity {
    /// Relative fluorescence modulation per V·m⁻¹ (fraction, not percent).
    pub per_field: f64,
    /// Correlation phase, radians.
    pub phase: f64,
}

/// Relative fluorescence modulation per unit stray field along a mode of
/// angular frequency `omega_r`, with the full micromotion velocity
/// projected on the repumper.
pub fn sensitivity(lp: &LaserParams, op: &OperatingPoint, omega_r: f64) -> Result<Sensitivity, BlochError> {
    sensitivity_at(lp, op, omega_r, PROBE_FIELD)
}

pub fn sensitivity_at(lp: &LaserParams, op: &OperatingPoint, omega_r: f64, e_dc: f64) -> Result<Sensitivity, BlochError> {
    let mm = micromotion(op, e_dc, omega_r);
    let model = build_liouvillian(lp)?.with_drive(op.omega_rf, mm.v0);
    let s = solve_modulated(&model, 1)?;
    let per_field = if e_dc != 0.0 { s.mod_rel / e_dc.abs() } else { 0.0 };
    Ok(Sensitivity { per_field, phase: s.phase })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapPoint {
    pub delta_c: f64,
    pub i_r: f64,
    pub sensitivity: f64,
    pub delta_r_opt: f64,
    pub phase: f64,
}

/// Repumper detuning search window relative to Δ_c, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepumperWindow {
    pub below: f64,
    pub above: f64,
    pub step: f64,
}

impl Default for RepumperWindow {
    fn default() -> Self {
        RepumperWindow { below: 40e6, above: 40e6, step: 1e6 }
    }
}

/// Maximises |sensitivity| over Δ_r for one (Δ_c, I_r): grid scan over the
/// window, then golden-section polish around the best grid point.
pub fn optimize_repumper(lp: &LaserParams, op: &OperatingPoint, omega_r: f64, window: &RepumperWindow) -> Result<MapPoint, BlochError> {
    let eval = |dr: f64| sensitivity(&LaserParams { delta_r: dr, ..*lp }, op, omega_r).map(|s| s.per_field).unwrap_or(0.0);
    let lo = lp.delta_c - window.below;
    let hi = lp.delta_c + window.above;
    let n = ((hi - lo) / window.step).round().max(1.0) as usize;
    let mut best = (lo, f64::NEG_INFINITY);
    for k in 0..=n {
        let dr = lo + (hi - lo) * k as f64 / n as f64;
        let s = eval(dr);
        if s > best.1 {
            best = (dr, s);
        }
    }
    let (dr, _) = golden_max(eval, (best.0 - window.step).max(lo), (best.0 + window.step).min(hi), 1e3);
    let s = sensitivity(&LaserParams { delta_r: dr, ..*lp }, op, omega_r)?;
    Ok(MapPoint { delta_c: lp.delta_c, i_r: lp.i_r, sensitivity: s.per_field, delta_r_opt: dr, phase: s.phase })
}

/// Sequential sensitivity map over (Δ_c, I_r).
pub fn sensitivity_map(
    lp_base: &LaserParams,
    op: &OperatingPoint,
    omega_r: f64,
    delta_c_grid: &[f64],
    i_r_grid: &[f64],
    window: &RepumperWindow,
) -> Result<Vec<MapPoint>, BlochError> {
    let mut out = Vec::with_capacity(delta_c_grid.len() * i_r_grid.len());
    for &dc in delta_c_grid {
        for &ir in i_r_grid {
            out.push(optimize_repumper(&LaserParams { delta_c: dc, i_r: ir, ..*lp_base }, op, omega_r, window)?);
        }
    }
    Ok(out)
}

/// Index of the map point with the largest sensitivity.
pub fn argmax(points: &[MapPoint]) -> Option<usize> {
    (0..points.len()).max_by(|&a, &b| points[a].sensitivity.total_cmp(&points[b].sensitivity))
}

/// Two-level excited-state population `(s/2) / (1 + s + (2Δ/Γ)²)`.
pub fn lineshape(s: f64, delta: f64, gamma: f64) -> f64 {
    let x = 2.0 * delta / gamma;
    0.5 * s / (1.0 + s + x * x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineshapeFit {
    /// Peak counts above background, `A·s/(2(1+s))`.
    pub height: f64,
    /// Full width at half maximum `Γ√(1+s)`, Hz.
    pub fwhm: f64,
    pub background: f64,
    /// Saturation parameter; needs the amplitude to be known.
    pub s: Option<f64>,
    /// Linewidth Γ, Hz; needs the amplitude to be known.
    pub gamma: Option<f64>,
    /// Counts per unit excited-state population.
    pub amplitude: Option<f64>,
    pub rms_residual: f64,
}

/// Fits `counts = A·ρ_ee(s, Δ, Γ) + B` to `(Δ in Hz, counts)`.
///
/// Only the height, width and background of the Lorentzian are
/// identifiable from one scan: `A` and `s` trade off exactly. With the
/// count scale `amplitude` supplied, `s` and `Γ` follow from the fitted
/// height and width; without it they are left as `None`.
pub fn fit_lineshape(data: &[(f64, f64)], amplitude: Option<f64>) -> Result<LineshapeFit, BlochError> {
    if data.len() < 4 {
        return Err(BlochError::FitFailed("need at least four points"));
    }
    if data.iter().any(|(d, c)| !d.is_finite() || !c.is_finite()) {
        return Err(BlochError::FitFailed("non-finite data"));
    }
    let cmin = data.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    let cmax = data.iter().map(|d| d.1).fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * (cmax + cmin);
    let above: Vec<f64> = data.iter().filter(|d| d.1 >= half).map(|d| d.0).collect();
    let span = above.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b)) - above.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let w0 = if span > 0.0 { span } else { data.iter().map(|d| d.0.abs()).fold(0.0, f64::max).max(1.0) / 4.0 };

    let model = |p: &[f64], d: f64| {
        let x = 2.0 * d / p[1];
        p[0] / (1.0 + x * x) + p[2]
    };
    let mut p = [cmax - cmin, w0, cmin];
    let sse = |p: &[f64]| data.iter().map(|&(d, c)| (model(p, d) - c).powi(2)).sum::<f64>();
    let mut lambda = 1e-3;
    let mut cost = sse(&p);
    for _ in 0..500 {
        let mut jac = Matrix::zeros(data.len(), 3);
        let mut r = Vec::with_capacity(data.len());
        for (row, &(d, c)) in data.iter().enumerate() {
            let x = 2.0 * d / p[1];
            let den = 1.0 + x * x;
            jac[(row, 0)] = 1.0 / den;
            jac[(row, 1)] = p[0] * 2.0 * x * x / (p[1] * den * den);
            jac[(row, 2)] = 1.0;
            r.push(c - model(&p, d));
        }
        // damped normal equations as an augmented least-squares problem
        let mut aug = Matrix::zeros(data.len() + 3, 3);
        let mut rhs = r.clone();
        for i in 0..data.len() {
            for j in 0..3 {
                aug[(i, j)] = jac[(i, j)];
            }
        }
        for j in 0..3 {
            let colnorm = (0..data.len()).map(|i| jac[(i, j)] * jac[(i, j)]).sum::<f64>().sqrt();
            aug[(data.len() + j, j)] = lambda.sqrt() * colnorm.max(1e-300);
            rhs.push(0.0);
        }
        let Ok(step) = lstsq(&aug, &rhs) else {
            return Err(BlochError::FitFailed("singular Jacobian"));
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
        let tc = sse(&trial);
        if tc < cost && trial[1] > 0.0 {
            let rel = (cost - tc) / cost.max(1e-300);
            p = trial;
            cost = tc;
            lambda = (lambda * 0.3).max(1e-12);
            if rel < 1e-14 {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    let rms = (cost / data.len() as f64).sqrt();
    if !(p[1] > 0.0) || !p.iter().all(|v| v.is_finite()) {
        return Err(BlochError::FitDiverged(rms));
    }
    let (height, fwhm, background) = (p[0], p[1].abs(), p[2]);
    let (s, gamma) = match amplitude {
        Some(a) if a > 0.0 => {
            let x = 2.0 * height / a;
            if !(x > 0.0 && x < 1.0) {
                return Err(BlochError::FitFailed("fitted height inconsistent with the given amplitude"));
            }
            let s = x / (1.0 - x);
            (Some(s), Some(fwhm / (1.0 + s).sqrt()))
        }
        Some(_) => return Err(BlochError::FitFailed("amplitude must be positive")),
        None => (None, None),
    };
    Ok(LineshapeFit { height, fwhm, background, s, gamma, amplitude, rms_residual: rms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clebsch_gordan_known_values() {
        // ⟨½ ½; 1 0 | ½ ½⟩ = 1/√3, ⟨½ −½; 1 1 | ½ ½⟩ = −√(2/3)
        assert!((clebsch_gordan(1, 1, 2, 0, 1, 1) - (1.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((clebsch_gordan(1, -1, 2, 2, 1, 1) + (2.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        // ⟨1 0; ½ ½ | ½ ½⟩ = −1/√3 in the other coupling order
        assert!((clebsch_gordan(2, 0, 1, 1, 1, 1) + (1.0_f64 / 3.0).sqrt()).abs() < 1e-12);
        assert_eq!(clebsch_gordan(1, 1, 2, 2, 1, 3), 0.0);
        // completeness over D3/2 ⊗ photon for each P sublevel
        for tm in [-1, 1] {
            let s: f64 = [-3, -1, 1, 3].iter().map(|&t1| clebsch_gordan(3, t1, 2, tm - t1, 1, tm).powi(2)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn generator_preserves_trace() {
        let m = build_liouvillian(&LaserParams::default()).unwrap();
        for col in 0..DIM {
            let s: Complex64 = (0..LEVELS).map(|i| m.m0[(vi(i, i), col)]).sum();
            assert!(s.norm() < 1e-12 * m.m0.max_abs(), "column {col}");
        }
    }

    #[test]
    fn generator_is_linear_in_repumper_detuning() {
        let lp = LaserParams::default();
        let a = build_liouvillian(&lp).unwrap();
        let d = 3.7e6;
        let b = build_liouvillian(&LaserParams { delta_r: lp.delta_r + d, ..lp }).unwrap();
        let diff = b.m0.add(&a.m0.scaled(Complex64::new(-1.0, 0.0)));
        let pred = a.dm_r.scaled(Complex64::new(2.0 * PI * d, 0.0));
        for (x, y) in diff.data.iter().zip(&pred.data) {
            assert!((x - y).norm() <= 1e-6, "{x} vs {y}");
        }
    }

    #[test]
    fn negative_intensity_is_rejected() {
        let lp = LaserParams { i_c: -1.0, ..LaserParams::default() };
        assert!(matches!(build_liouvillian(&lp), Err(BlochError::Nonphysical(_))));
    }

    #[test]
    fn lineshape_limits() {
        assert!((lineshape(1e12, 0.0, 1.0) - 0.5).abs() < 1e-9);
        let (s, g) = (1.04, 25.5e6);
        let hw = 0.5 * g * (1.0 + s).sqrt();
        assert!((lineshape(s, hw, g) - 0.5 * lineshape(s, 0.0, g)).abs() < 1e-15);
        assert!((lineshape(s, -hw, g) - 0.5 * lineshape(s, 0.0, g)).abs() < 1e-15);
    }

    #[test]
    fn no_modulation_without_velocity() {
        let m = build_liouvillian(&LaserParams::default()).unwrap();
        let s = solve_modulated(&m, 1).unwrap();
        assert_eq!(s.mod_rel, 0.0);
        assert!(s.rho_plus1.iter().all(|x| x.norm() == 0.0));
        let direct = steady_state(&m.m0).unwrap();
        for (a, b) in s.rho0.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
