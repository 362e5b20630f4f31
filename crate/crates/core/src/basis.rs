//! Quadratic expansion fits, voltage synthesis, secular modes and
//! micromotion.
//!
//! Around the rf null a dc potential is written as
//! `φ ≈ C + Σ βᵢ dᵢ + Σ αᵢ dᵢ² + c_xy dx dy + c_xz dx dz + c_yz dy dz`.

#[allow(unused_imports)] // shadowed by std methods when a dev-dependency links std
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::fields::{FieldError, FieldModel, FieldPoint, OperatingPoint};
use crate::geometry::{Electrode, ElectrodeLayout};
use crate::linalg::{lstsq, pinv_solve, sym_eigen3, Matrix};
use crate::roots::brent;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("quadratic fit is ill-conditioned (degenerate sample grid)")]
    IllConditioned,
    #[error("target unreachable with the available electrodes: relative residual {0:.3e}")]
    Unreachable(f64),
    #[error("expected {expected} electrode bases, got {got}")]
    BasisCount { expected: usize, got: usize },
    #[error("unstable configuration: Hessian eigenvalue {0:.3e} J/m^2 is not positive")]
    Unstable(f64),
    #[error("rf amplitude search did not bracket the measured frequency")]
    NoRoot,
    #[error("layout does not name six controlled electrodes")]
    MissingControls,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Cardinal,
    /// x̂′ = (x̂ + ŷ)/√2, ŷ′ = (x̂ − ŷ)/√2, ẑ′ = ẑ.
    Rotated45,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialBasis {
    /// V·m⁻².
    pub alpha: [f64; 3],
    /// V·m⁻¹.
    pub beta: [f64; 3],
    /// Coefficients of the xy, xz and yz products, V·m⁻².
    pub cross: [f64; 3],
    pub frame: Frame,
}

impl PotentialBasis {
    pub const ZERO: PotentialBasis = PotentialBasis { alpha: [0.0; 3], beta: [0.0; 3], cross: [0.0; 3], frame: Frame::Cardinal };

    /// Axial confinement with `α_x = α_y = −α_z/2` so the target itself
    /// satisfies Laplace's equation.
    pub fn endcap(alpha_z: f64) -> Self {
        PotentialBasis { alpha: [-0.5 * alpha_z, -0.5 * alpha_z, alpha_z], ..Self::ZERO }
    }

    pub fn field(beta: [f64; 3]) -> Self {
        PotentialBasis { beta, ..Self::ZERO }
    }

    /// 45° quadrupole `α(x′² − y′²)` expressed in the rotated frame.
    pub fn tilt(alpha: f64) -> Self {
        PotentialBasis { alpha: [alpha, -alpha, 0.0], frame: Frame::Rotated45, ..Self::ZERO }
    }

    pub fn laplacian(&self) -> f64 {
        2.0 * (self.alpha[0] + self.alpha[1] + self.alpha[2])
    }

    /// Re-express in another frame. The 45° map is its own inverse.
    pub fn to_frame(&self, frame: Frame) -> PotentialBasis {
        if frame == self.frame {
            return *self;
        }
        let [ax, ay, az] = self.alpha;
        let [bx, by, bz] = self.beta;
        let [cxy, cxz, cyz] = self.cross;
        PotentialBasis {
            alpha: [0.5 * (ax + ay) + 0.5 * cxy, 0.5 * (ax + ay) - 0.5 * cxy, az],
            beta: [(bx + by) / SQRT_2, (bx - by) / SQRT_2, bz],
            cross: [ax - ay, (cxz + cyz) / SQRT_2, (cxz - cyz) / SQRT_2],
            frame,
        }
    }

    pub fn scaled(&self, k: f64) -> PotentialBasis {
        let m = |a: [f64; 3]| [k * a[0], k * a[1], k * a[2]];
        PotentialBasis { alpha: m(self.alpha), beta: m(self.beta), cross: m(self.cross), frame: self.frame }
    }

    pub fn add(&self, other: &PotentialBasis) -> PotentialBasis {
        let o = other.to_frame(self.frame);
        let s = |a: [f64; 3], b: [f64; 3]| [a[0] + b[0], a[1] + b[1], a[2] + b[2]];
        PotentialBasis { alpha: s(self.alpha, o.alpha), beta: s(self.beta, o.beta), cross: s(self.cross, o.cross), frame: self.frame }
    }

    /// The six coefficients `(β_x, β_y, β_z, α_x, α_y, α_z)`.
    pub fn coefficients(&self) -> [f64; 6] {
        [self.beta[0], self.beta[1], self.beta[2], self.alpha[0], self.alpha[1], self.alpha[2]]
    }

    /// Evaluates the expansion (without constant) at displacement `d`.
    pub fn eval(&self, d: [f64; 3]) -> f64 {
        let [x, y, z] = d;
        self.beta[0] * x
            + self.beta[1] * y
            + self.beta[2] * z
            + self.alpha[0] * x * x
            + self.alpha[1] * y * y
            + self.alpha[2] * z * z
            + self.cross[0] * x * y
            + self.cross[1] * x * z
            + self.cross[2] * y * z
    }
}

pub const FIT_POINTS_PER_AXIS: usize = 9;

/// Exponents (x, y, z) of the fitted monomials. The first ten are the
/// constant, linear and quadratic terms that are reported; the cubic and
/// quartic ones only absorb curvature that would otherwise leak into α.
fn fit_monomials() -> Vec<[u32; 3]> {
    let mut m = alloc::vec![
        [0, 0, 0],
        [1, 0, 0],
        [0, 1, 0],
        [0, 0, 1],
        [2, 0, 0],
        [0, 2, 0],
        [0, 0, 2],
        [1, 1, 0],
        [1, 0, 1],
        [0, 1, 1],
    ];
    for deg in 3..=4 {
        for i in (0..=deg).rev() {
            for j in (0..=deg - i).rev() {
                m.push([i, j, deg - i - j]);
            }
        }
    }
    m
}

/// Least-squares fit of the quadratic expansion to an arbitrary potential
/// over a 9×9×9 cube of half-width `radius` centred on `center`.
pub fn fit_quadratic_with<F: FnMut(FieldPoint) -> f64>(
    mut potential: F,
    center: FieldPoint,
    radius: f64,
) -> Result<PotentialBasis, SolveError> {
    if !(radius > 0.0) || center.y - radius <= 0.0 {
        return Err(SolveError::IllConditioned);
    }
    let n = FIT_POINTS_PER_AXIS;
    let monomials = fit_monomials();
    let mut a = Matrix::zeros(n * n * n, monomials.len());
    let mut b = Vec::with_capacity(n * n * n);
    let step = 2.0 / (n - 1) as f64;
    let mut row = 0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let (u, v, w) = (-1.0 + i as f64 * step, -1.0 + j as f64 * step, -1.0 + k as f64 * step);
                for (c, e) in monomials.iter().enumerate() {
                    a[(row, c)] = u.powi(e[0] as i32) * v.powi(e[1] as i32) * w.powi(e[2] as i32);
                }
                b.push(potential(FieldPoint::new(center.x + radius * u, center.y + radius * v, center.z + radius * w)));
                row += 1;
            }
        }
    }
    let c = lstsq(&a, &b).map_err(|_| SolveError::IllConditioned)?;
    let r1 = 1.0 / radius;
    let r2 = r1 * r1;
    Ok(PotentialBasis {
        beta: [c[1] * r1, c[2] * r1, c[3] * r1],
        alpha: [c[4] * r2, c[5] * r2, c[6] * r2],
        cross: [c[7] * r2, c[8] * r2, c[9] * r2],
        frame: Frame::Cardinal,
    })
}

/// Per-volt expansion coefficients of one electrode about `center`.
pub fn fit_quadratic(e: &Electrode, center: FieldPoint, radius: f64) -> Result<PotentialBasis, SolveError> {
    let rects = e.rects.clone();
    fit_quadratic_with(|p| rects.iter().map(|r| crate::fields::rect_potential(r, p)).sum(), center, radius)
}

/// Fits all six controlled electrodes (V1…V6) of a layout at its rf null
/// with the default radius `height / 10`.
pub fn fit_control_bases(layout: &ElectrodeLayout) -> Result<([PotentialBasis; 6], FieldPoint), SolveError> {
    let null = crate::fields::rf_null(layout)?;
    let names = layout.controlled_names();
    if names.len() < 6 {
        return Err(SolveError::MissingControls);
    }
    let mut out = [PotentialBasis::ZERO; 6];
    for (k, name) in names[..6].iter().enumerate() {
        let e = layout.electrode(name).ok_or(SolveError::MissingControls)?;
        out[k] = fit_quadratic(e, null, null.y / 10.0)?;
    }
    Ok((out, null))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryClass {
    /// V1 = V2, V3 = V4, V5 = V6.
    Endcap,
    /// V2 = −V1, V4 = −V3, V6 = −V5 with the outer groups tied, V3 = V5.
    Tilt,
    /// V1 = V2 = 0, V3 = V5 = −V4 = −V6.
    XComp,
    /// V1 = V2, V3 = V4, V5 = V6.
    YComp,
    Custom,
}

impl SymmetryClass {
    /// Columns map reduced variables onto (V1…V6).
    fn reduction(&self) -> Vec<[f64; 6]> {
        match self {
            SymmetryClass::Endcap | SymmetryClass::YComp => {
                alloc::vec![[1.0, 1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0, 1.0, 1.0]]
            }
            SymmetryClass::Tilt => alloc::vec![[1.0, -1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, -1.0, 1.0, -1.0]],
            SymmetryClass::XComp => alloc::vec![[0.0, 0.0, 1.0, -1.0, 1.0, -1.0]],
            SymmetryClass::Custom => (0..6)
                .map(|k| {
                    let mut c = [0.0; 6];
                    c[k] = 1.0;
                    c
                })
                .collect(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SymmetryClass::Endcap => "endcap",
            SymmetryClass::Tilt => "tilt",
            SymmetryClass::XComp => "xcomp",
            SymmetryClass::YComp => "ycomp",
            SymmetryClass::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSet {
    /// V1…V6 in volts.
    pub v: [f64; 6],
    pub label: SymmetryClass,
}

impl VoltageSet {
    pub fn scaled(&self, k: f64) -> VoltageSet {
        VoltageSet { v: self.v.map(|x| k * x), label: self.label }
    }

    /// Inserts V1…V6 into `op.dc_voltages` under the layout's controlled
    /// names, adding to whatever is already there.
    pub fn apply(&self, layout: &ElectrodeLayout, op: &mut OperatingPoint) {
        for (name, v) in layout.controlled_names().iter().zip(self.v) {
            *op.dc_voltages.entry(name.clone()).or_insert(0.0) += v;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoltageSolution {
    pub voltages: VoltageSet,
    /// Coefficients realised by `voltages`, in the target frame.
    pub achieved: PotentialBasis,
    /// Weighted |achieved − target| / |target| over the six coefficient rows
    /// (absolute when the target is zero).
    pub residual: f64,
}

pub const DEFAULT_SOLVE_TOLERANCE: f64 = 1e-3;

/// Minimum-norm voltages realising `target` after collapsing V1…V6 by the
/// symmetry class.
///
/// The linear rows are weighted by a length ℓ = √(Σβ²/Σα²) of the bases so
/// that one volt of potential error at distance ℓ costs the same in every
/// row.
pub fn solve_voltages(
    target: &PotentialBasis,
    bases: &[PotentialBasis],
    class: SymmetryClass,
) -> Result<VoltageSolution, SolveError> {
    if bases.len() != 6 {
        return Err(SolveError::BasisCount { expected: 6, got: bases.len() });
    }
    let framed: Vec<PotentialBasis> = bases.iter().map(|b| b.to_frame(target.frame)).collect();
    let sb: f64 = framed.iter().flat_map(|b| b.beta).map(|x| x * x).sum();
    let sa: f64 = framed.iter().flat_map(|b| b.alpha).map(|x| x * x).sum();
    let ell = if sa > 0.0 && sb > 0.0 { (sb / sa).sqrt() } else { 1.0 };
    let w = [1.0, 1.0, 1.0, ell, ell, ell];

    let cols = class.reduction();
    let mut a = Matrix::zeros(6, cols.len());
    for (j, col) in cols.iter().enumerate() {
        for (e, &s) in col.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let c = framed[e].coefficients();
            for i in 0..6 {
                a[(i, j)] += s * c[i] * w[i];
            }
        }
    }
    let t = target.coefficients();
    let rhs: Vec<f64> = (0..6).map(|i| t[i] * w[i]).collect();
    let x = pinv_solve(&a, &rhs, 1e-12);

    let mut v = [0.0; 6];
    for (j, col) in cols.iter().enumerate() {
        for e in 0..6 {
            v[e] += col[e] * x[j];
        }
    }
    let achieved = framed.iter().zip(v).fold(PotentialBasis { frame: target.frame, ..PotentialBasis::ZERO }, |acc, (b, ve)| acc.add(&b.scaled(ve)));
    let got = achieved.coefficients();
    let err: f64 = (0..6).map(|i| ((got[i] - t[i]) * w[i]).powi(2)).sum::<f64>().sqrt();
    let tnorm: f64 = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let residual = if tnorm > 0.0 { err / tnorm } else { err };
    if residual > DEFAULT_SOLVE_TOLERANCE {
        return Err(SolveError::Unreachable(residual));
    }
    Ok(VoltageSolution { voltages: VoltageSet { v, label: class }, achieved, residual })
}

/// Axial curvature of the standard endcap set, V·m⁻² (500 kHz for ⁴⁰Ca⁺).
pub const ENDCAP_ALPHA_Z: f64 = 2.05e6;
/// α_x′ of the standard tilt set at tilt factor 1, V·m⁻².
pub const TILT_ALPHA: f64 = 1.0e7;

/// The four operating sets: endcap, unit x and y compensation fields and the
/// 45° tilt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardBases {
    pub endcap: VoltageSolution,
    pub xcomp: VoltageSolution,
    pub ycomp: VoltageSolution,
    pub tilt: VoltageSolution,
    pub null: FieldPoint,
}

impl StandardBases {
    pub fn all(&self) -> [&VoltageSolution; 4] {
        [&self.endcap, &self.xcomp, &self.ycomp, &self.tilt]
    }

    /// Endcap plus `tilt_factor` times the tilt set, added to `op`.
    pub fn apply(&self, layout: &ElectrodeLayout, op: &mut OperatingPoint, tilt_factor: f64) {
        self.endcap.voltages.apply(layout, op);
        if tilt_factor != 0.0 {
            self.tilt.voltages.scaled(tilt_factor).apply(layout, op);
        }
    }
}

pub fn standard_bases(layout: &ElectrodeLayout) -> Result<StandardBases, SolveError> {
    let (bases, null) = fit_control_bases(layout)?;
    Ok(StandardBases {
        endcap: solve_voltages(&PotentialBasis::endcap(ENDCAP_ALPHA_Z), &bases, SymmetryClass::Endcap)?,
        xcomp: solve_voltages(&PotentialBasis::field([1.0, 0.0, 0.0]), &bases, SymmetryClass::XComp)?,
        ycomp: solve_voltages(&PotentialBasis::field([0.0, 1.0, 0.0]), &bases, SymmetryClass::YComp)?,
        tilt: solve_voltages(&PotentialBasis::tilt(TILT_ALPHA), &bases, SymmetryClass::Tilt)?,
        null,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeAnalysis {
    pub f_axial: f64,
    /// (f_low, f_high), Hz.
    pub f_radial: (f64, f64),
    pub tilt_angle_deg: f64,
    pub q: f64,
    /// Unit vectors of the axial, low radial and high radial modes.
    pub mode_axes: [[f64; 3]; 3],
    pub equilibrium: FieldPoint,
}

impl ModeAnalysis {
    pub fn mean_radial(&self) -> f64 {
        0.5 * (self.f_radial.0 + self.f_radial.1)
    }
}

/// Normal modes of the total potential (pseudopotential + dc) about its
/// minimum.
///
/// The "initially vertical" mode is the radial mode with the larger ŷ
/// component, so the tilt angle lies in [0°, 45°]. When the two radial
/// eigenvalues agree to 1e-9 the axes are undefined and 0° is reported.
pub fn analyze_modes(layout: &ElectrodeLayout, op: &OperatingPoint) -> Result<ModeAnalysis, SolveError> {
    let model = FieldModel::new(layout, op)?;
    let eq = model.equilibrium()?;
    let h = model.total_hessian(eq);
    let (vals, vecs) = sym_eigen3(h);
    if vals[0] <= 0.0 {
        return Err(SolveError::Unstable(vals[0]));
    }
    let axial = (0..3).max_by(|&a, &b| vecs[a][2].abs().total_cmp(&vecs[b][2].abs())).unwrap_or(0);
    let radial: Vec<usize> = (0..3).filter(|&k| k != axial).collect();
    let (lo, hi) = (radial[0], radial[1]);
    let m = op.mass;
    let freq = |lambda: f64| (lambda / m).sqrt() / (2.0 * PI);

    let vertical = if vecs[lo][1].abs() >= vecs[hi][1].abs() { lo } else { hi };
    let v = vecs[vertical];
    let degenerate = (vals[hi] - vals[lo]).abs() <= 1e-9 * vals[hi];
    let tilt = if degenerate { 0.0 } else { (v[1].abs() / v[0].hypot(v[1])).min(1.0).acos().to_degrees() };

    let rf = model.rf_only();
    let null = rf.rf_null()?;
    let hr = rf.total_hessian(null);
    let (rv, rvecs) = sym_eigen3(hr);
    let rax = (0..3).max_by(|&a, &b| rvecs[a][2].abs().total_cmp(&rvecs[b][2].abs())).unwrap_or(0);
    let mean_rf: f64 = (0..3).filter(|&k| k != rax).map(|k| rv[k]).sum::<f64>() / 2.0;
    let omega_r0 = (mean_rf / m).sqrt();
    let q = 2.0 * SQRT_2 * omega_r0 / op.omega_rf;

    Ok(ModeAnalysis {
        f_axial: freq(vals[axial]),
        f_radial: (freq(vals[lo]), freq(vals[hi])),
        tilt_angle_deg: tilt,
        q,
        mode_axes: [vecs[axial], vecs[lo], vecs[hi]],
        equilibrium: eq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicromotionResult {
    /// dc displacement from the null, m.
    pub x_d: f64,
    /// Micromotion amplitude, m.
    pub x_mu: f64,
    /// Peak micromotion velocity, m·s⁻¹.
    pub v0: f64,
}

/// Excess micromotion produced by a stray field `e_dc` for a mode of
/// angular frequency `omega_r`.
pub fn micromotion(op: &OperatingPoint, e_dc: f64, omega_r: f64) -> MicromotionResult {
    let x_d = op.charge * e_dc / (op.mass * omega_r * omega_r);
    let x_mu = SQRT_2 * (omega_r / op.omega_rf) * x_d;
    MicromotionResult { x_d, x_mu, v0: x_mu * op.omega_rf }
}

/// Rf amplitude whose mean radial frequency equals `measured_f_radial`
/// (Hz), with the dc voltages of `op` held fixed.
pub fn infer_rf_amplitude(layout: &ElectrodeLayout, measured_f_radial: f64, op: &OperatingPoint) -> Result<f64, SolveError> {
    if !(measured_f_radial > 0.0) {
        return Err(SolveError::NoRoot);
    }
    let f_unit = analyze_modes(layout, &OperatingPoint { dc_voltages: Default::default(), ..op.with_rf(1.0) })?.mean_radial();
    let guess = measured_f_radial / f_unit;
    let mismatch = |v: f64| match analyze_modes(layout, &op.with_rf(v)) {
        Ok(m) => m.mean_radial() - measured_f_radial,
        Err(_) => -measured_f_radial,
    };
    let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
    for _ in 0..20 {
        if mismatch(lo) < 0.0 && mismatch(hi) > 0.0 {
            break;
        }
        lo *= 0.5;
        hi *= 2.0;
    }
    brent(mismatch, lo, hi, 1e-9 * guess).ok_or(SolveError::NoRoot)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_is_recovered() {
        let truth = PotentialBasis {
            alpha: [1.3e6, -2.2e6, 0.9e6],
            beta: [0.7, -12.0, 3.5],
            cross: [4.0e5, -1.0e5, 2.5e5],
            frame: Frame::Cardinal,
        };
        let c = FieldPoint::new(1e-6, 150e-6, -2e-6);
        let fit = fit_quadratic_with(|p| 0.25 + truth.eval([p.x - c.x, p.y - c.y, p.z - c.z]), c, 15e-6).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        // roundoff on the 0.25 V offset, amplified by the cubic and quartic
        // nuisance columns, leaves errors of a few 1e-10
        for i in 0..3 {
            assert!(rel(fit.alpha[i], truth.alpha[i]) < 1e-9);
            assert!(rel(fit.beta[i], truth.beta[i]) < 1e-9);
            assert!(rel(fit.cross[i], truth.cross[i]) < 1e-9);
        }
    }

    #[test]
    fn fit_below_plane_is_rejected() {
        let r = fit_quadratic_with(|_| 0.0, FieldPoint::new(0.0, 1e-6, 0.0), 2e-6);
        assert_eq!(r, Err(SolveError::IllConditioned));
    }

    #[test]
    fn rotation_is_an_involution() {
        let b = PotentialBasis { alpha: [1.0, 2.0, -3.0], beta: [0.1, 0.2, 0.3], cross: [0.5, -0.4, 0.7], frame: Frame::Cardinal };
        let back = b.to_frame(Frame::Rotated45).to_frame(Frame::Cardinal);
        for i in 0..3 {
            assert!((back.alpha[i] - b.alpha[i]).abs() < 1e-12);
            assert!((back.beta[i] - b.beta[i]).abs() < 1e-12);
            assert!((back.cross[i] - b.cross[i]).abs() < 1e-12);
        }
        // rotation preserves the value of the expansion at a point
        let d = [0.3, -0.2, 0.5];
        let dr = [(d[0] + d[1]) / SQRT_2, (d[0] - d[1]) / SQRT_2, d[2]];
        assert!((b.eval(d) - b.to_frame(Frame::Rotated45).eval(dr)).abs() < 1e-12);
    }

    #[test]
    fn tilt_target_is_an_xy_product() {
        let t = PotentialBasis::tilt(1e7).to_frame(Frame::Cardinal);
        assert!(t.alpha[0].abs() < 1e-6 && t.alpha[1].abs() < 1e-6);
        assert!((t.cross[0] - 2e7).abs() < 1e-6);
    }

    #[test]
    fn zero_target_gives_zero_voltages() {
        let bases = [PotentialBasis { alpha: [1.0, 2.0, -3.0], beta: [0.5, 1.0, 0.0], ..PotentialBasis::ZERO }; 6];
        let s = solve_voltages(&PotentialBasis::ZERO, &bases, SymmetryClass::Custom).unwrap();
        assert!(s.voltages.v.iter().all(|v| *v == 0.0));
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn unreachable_target_is_reported() {
        let bases = [PotentialBasis { beta: [1.0, 0.0, 0.0], ..PotentialBasis::ZERO }; 6];
        let r = solve_voltages(&PotentialBasis::field([0.0, 1.0, 0.0]), &bases, SymmetryClass::Custom);
        assert!(matches!(r, Err(SolveError::Unreachable(_))));
    }

    #[test]
    fn eq4_arithmetic() {
        let op = OperatingPoint::ca40(175.0);
        let wr = 2.0 * PI * 3.1e6;
        let m = micromotion(&op, 100.0, wr);
        assert!((m.x_d - 0.636e-6).abs() < 0.002e-6);
        assert!((m.x_mu - 0.108e-6).abs() < 0.001e-6);
        assert_eq!(micromotion(&op, 0.0, wr), MicromotionResult { x_d: 0.0, x_mu: 0.0, v0: 0.0 });
        let z = micromotion(&op, 1.0, 2.0 * PI * 3.33e6);
        assert!((z.v0 - 0.16).abs() < 0.01);
    }
}
