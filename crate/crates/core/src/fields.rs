//! Gapless-plane potentials, fields and Hessians, the rf pseudopotential,
//! null search and trap depth.
//!
//! A rectangle held at 1 V in an otherwise grounded infinite plane produces
//! `φ = Ω/2π`, with `Ω` the solid angle it subtends. For a corner at
//! `(u, v)` seen from `(x, y, z)` the solid-angle primitive is
//! `F = atan(a·b / (y·R))`, `a = u − x`, `b = v − z`, `R = √(a² + b² + y²)`,
//! and the rectangle is the signed sum over its four corners. `F` is
//! continuous for `y > 0`, including across the planes `x = u`, `z = v`.

#[allow(unused_imports)] // shadowed by std methods when a dev-dependency links std
use num_traits::Float;
use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::f64::consts::PI;

use crate::constants::{CA40_ION_MASS, DEFAULT_RF_FREQUENCY, ELEMENTARY_CHARGE};
use crate::geometry::{Electrode, ElectrodeLayout, Rect};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("field evaluated at y = {0} m; points must lie above the chip (y > 0)")]
    BelowPlane(f64),
    #[error("invalid operating point: {0}")]
    InvalidOperatingPoint(&'static str),
    #[error("voltage given for unknown electrode `{0}`")]
    UnknownElectrode(String),
    #[error("no pseudopotential minimum found in the search box")]
    NoMinimum,
    #[error("no escape saddle found")]
    NoSaddle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        FieldPoint { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        FieldPoint { x: a[0], y: a[1], z: a[2] }
    }

    fn offset(self, d: [f64; 3]) -> Self {
        FieldPoint { x: self.x + d[0], y: self.y + d[1], z: self.z + d[2] }
    }

    fn check(self) -> Result<Self, FieldError> {
        if self.y > 0.0 {
            Ok(self)
        } else {
            Err(FieldError::BelowPlane(self.y))
        }
    }
}

/// Rf drive, species and the static voltages applied to named electrodes.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint {
    pub v_rf: f64,
    pub omega_rf: f64,
    pub mass: f64,
    pub charge: f64,
    pub dc_voltages: BTreeMap<String, f64>,
}

impl OperatingPoint {
    /// ⁴⁰Ca⁺ at the default 25.8 MHz drive, no dc voltages.
    pub fn ca40(v_rf: f64) -> Self {
        OperatingPoint {
            v_rf,
            omega_rf: 2.0 * PI * DEFAULT_RF_FREQUENCY,
            mass: CA40_ION_MASS,
            charge: ELEMENTARY_CHARGE,
            dc_voltages: BTreeMap::new(),
        }
    }

    pub fn with_rf(&self, v_rf: f64) -> Self {
        OperatingPoint { v_rf, ..self.clone() }
    }

    pub fn validate(&self) -> Result<(), FieldError> {
        if !(self.omega_rf > 0.0 && self.omega_rf.is_finite()) {
            return Err(FieldError::InvalidOperatingPoint("Omega_rf must be positive"));
        }
        if !(self.mass > 0.0) {
            return Err(FieldError::InvalidOperatingPoint("mass must be positive"));
        }
        if self.charge == 0.0 || !self.charge.is_finite() {
            return Err(FieldError::InvalidOperatingPoint("charge must be nonzero"));
        }
        if !self.v_rf.is_finite() || self.dc_voltages.values().any(|v| !v.is_finite()) {
            return Err(FieldError::InvalidOperatingPoint("voltages must be finite"));
        }
        Ok(())
    }

    /// `Q² V² / (4 m Ω²)`: multiplies `|∇φ_rf|²` (per-volt gradient) to give
    /// the pseudopotential in joules.
    pub fn pseudo_prefactor(&self) -> f64 {
        self.charge * self.charge * self.v_rf * self.v_rf / (4.0 * self.mass * self.omega_rf * self.omega_rf)
    }
}

struct Corner {
    a: f64,
    b: f64,
    y: f64,
    r: f64,
    p: f64,
    q: f64,
}

impl Corner {
    fn new(u: f64, v: f64, pt: FieldPoint) -> Self {
        let a = u - pt.x;
        let b = v - pt.z;
        let y = pt.y;
        let p = a * a + y * y;
        let q = b * b + y * y;
        let r = (p + b * b).sqrt();
        Corner { a, b, y, r, p, q }
    }

    fn value(&self) -> f64 {
        (self.a * self.b / (self.y * self.r)).atan()
    }

    /// Gradient with respect to the observation point.
    fn gradient(&self) -> [f64; 3] {
        let Corner { a, b, y, r, p, q } = *self;
        let ga = b * y / (p * r);
        let gb = a * y / (q * r);
        let gy = -a * b * (r * r + y * y) / (p * q * r);
        [-ga, gy, -gb]
    }

    fn hessian(&self) -> [[f64; 3]; 3] {
        let Corner { a, b, y, r, p, q } = *self;
        let r2 = r * r;
        let r3 = r2 * r;
        let y2 = y * y;
        let s = r2 + y2;
        let hxx = -a * b * y * (2.0 / (p * p * r) + 1.0 / (p * r3));
        let hzz = -a * b * y * (2.0 / (q * q * r) + 1.0 / (q * r3));
        let hxz = y / r3;
        let hxy = -(b / (p * r)) * (1.0 - 2.0 * y2 / p - y2 / r2);
        let hzy = -(a / (q * r)) * (1.0 - 2.0 * y2 / q - y2 / r2);
        let hyy = -a * b * y / (p * q * r) * (4.0 - 2.0 * s / p - 2.0 * s / q - s / r2);
        [[hxx, hxy, hxz], [hxy, hyy, hzy], [hxz, hzy, hzz]]
    }
}

const INV_2PI: f64 = 0.5 / PI;

fn corners(r: &Rect) -> [(f64, f64, f64); 4] {
    [(r.x2, r.z2, 1.0), (r.x1, r.z2, -1.0), (r.x2, r.z1, -1.0), (r.x1, r.z1, 1.0)]
}

/// Potential of one rectangle at unit voltage. Caller guarantees `p.y > 0`.
pub fn rect_potential(r: &Rect, p: FieldPoint) -> f64 {
    corners(r).iter().map(|&(u, v, s)| s * Corner::new(u, v, p).value()).sum::<f64>() * INV_2PI
}

pub fn rect_gradient(r: &Rect, p: FieldPoint) -> [f64; 3] {
    let mut g = [0.0; 3];
    for (u, v, s) in corners(r) {
        let c = Corner::new(u, v, p).gradient();
        for i in 0..3 {
            g[i] += s * c[i] * INV_2PI;
        }
    }
    g
}

pub fn rect_hessian(r: &Rect, p: FieldPoint) -> [[f64; 3]; 3] {
    let mut h = [[0.0; 3]; 3];
    for (u, v, s) in corners(r) {
        let c = Corner::new(u, v, p).hessian();
        for i in 0..3 {
            for j in 0..3 {
                h[i][j] += s * c[i][j] * INV_2PI;
            }
        }
    }
    h
}

/// Potential at `p` when `e` is held at 1 V and everything else is grounded.
pub fn unit_potential(e: &Electrode, p: FieldPoint) -> Result<f64, FieldError> {
    let p = p.check()?;
    Ok(e.rects.iter().map(|r| rect_potential(r, p)).sum())
}

/// Gradient of [`unit_potential`] (V·m⁻¹ per volt; the field is its negative).
pub fn unit_gradient(e: &Electrode, p: FieldPoint) -> Result<[f64; 3], FieldError> {
    let p = p.check()?;
    Ok(e.rects.iter().fold([0.0; 3], |acc, r| add3(acc, rect_gradient(r, p))))
}

/// Hessian of [`unit_potential`] (V·m⁻² per volt). Symmetric and traceless.
pub fn unit_hessian(e: &Electrode, p: FieldPoint) -> Result<[[f64; 3]; 3], FieldError> {
    let p = p.check()?;
    Ok(e.rects.iter().fold([[0.0; 3]; 3], |acc, r| add33(acc, rect_hessian(r, p))))
}

fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn add33(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = a;
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] += b[i][j];
        }
    }
    out
}

fn mat_vec(h: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        h[0][0] * v[0] + h[0][1] * v[1] + h[0][2] * v[2],
        h[1][0] * v[0] + h[1][1] * v[1] + h[1][2] * v[2],
        h[2][0] * v[0] + h[2][1] * v[1] + h[2][2] * v[2],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Flattened view of a layout under an operating point: the rf rectangles
/// and every dc rectangle with its applied voltage.
#[derive(Debug, Clone)]
pub struct FieldModel {
    pub op: OperatingPoint,
    rf: Vec<Rect>,
    dc: Vec<(Rect, f64)>,
}

impl FieldModel {
    pub fn new(layout: &ElectrodeLayout, op: &OperatingPoint) -> Result<Self, FieldError> {
        op.validate()?;
        let rf = layout.rf_rects().copied().collect();
        let mut dc = Vec::new();
        for (name, &v) in &op.dc_voltages {
            let e = layout.electrode(name).ok_or_else(|| FieldError::UnknownElectrode(name.clone()))?;
            if v != 0.0 {
                dc.extend(e.rects.iter().map(|r| (*r, v)));
            }
        }
        Ok(FieldModel { op: op.clone(), rf, dc })
    }

    /// rf-only model, any dc voltages dropped.
    pub fn rf_only(&self) -> FieldModel {
        FieldModel { op: OperatingPoint { dc_voltages: BTreeMap::new(), ..self.op.clone() }, rf: self.rf.clone(), dc: Vec::new() }
    }

    pub fn has_dc(&self) -> bool {
        !self.dc.is_empty()
    }

    pub fn rf_unit_gradient(&self, p: FieldPoint) -> [f64; 3] {
        self.rf.iter().fold([0.0; 3], |acc, r| add3(acc, rect_gradient(r, p)))
    }

    pub fn rf_unit_hessian(&self, p: FieldPoint) -> [[f64; 3]; 3] {
        self.rf.iter().fold([[0.0; 3]; 3], |acc, r| add33(acc, rect_hessian(r, p)))
    }

    pub fn dc_potential(&self, p: FieldPoint) -> f64 {
        self.dc.iter().map(|(r, v)| v * rect_potential(r, p)).sum()
    }

    pub fn dc_gradient(&self, p: FieldPoint) -> [f64; 3] {
        self.dc.iter().fold([0.0; 3], |acc, (r, v)| {
            let g = rect_gradient(r, p);
            [acc[0] + v * g[0], acc[1] + v * g[1], acc[2] + v * g[2]]
        })
    }

    pub fn dc_hessian(&self, p: FieldPoint) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for (r, v) in &self.dc {
            let hr = rect_hessian(r, p);
            for i in 0..3 {
                for j in 0..3 {
                    h[i][j] += v * hr[i][j];
                }
            }
        }
        h
    }

    /// Pseudopotential energy, J.
    pub fn pseudopotential(&self, p: FieldPoint) -> f64 {
        let g = self.rf_unit_gradient(p);
        self.op.pseudo_prefactor() * dot(g, g)
    }

    /// ∇Φ_ps = 2·(Q²V²/4mΩ²)·H·g, J·m⁻¹.
    pub fn pseudo_gradient(&self, p: FieldPoint) -> [f64; 3] {
        let g = self.rf_unit_gradient(p);
        let h = self.rf_unit_hessian(p);
        let hg = mat_vec(&h, g);
        let k = 2.0 * self.op.pseudo_prefactor();
        [k * hg[0], k * hg[1], k * hg[2]]
    }

    /// Pseudopotential plus `Q·φ_dc`, J.
    pub fn total_energy(&self, p: FieldPoint) -> f64 {
        self.pseudopotential(p) + self.op.charge * self.dc_potential(p)
    }

    pub fn total_gradient(&self, p: FieldPoint) -> [f64; 3] {
        let a = self.pseudo_gradient(p);
        let b = self.dc_gradient(p);
        let q = self.op.charge;
        [a[0] + q * b[0], a[1] + q * b[1], a[2] + q * b[2]]
    }

    /// Hessian of the total energy by central differences of the analytic
    /// gradient. Step is `1e-4` of the height above the chip.
    pub fn total_hessian(&self, p: FieldPoint) -> [[f64; 3]; 3] {
        let h = 1e-4 * p.y;
        let mut out = [[0.0; 3]; 3];
        for j in 0..3 {
            let mut d = [0.0; 3];
            d[j] = h;
            let gp = self.total_gradient(p.offset(d));
            d[j] = -h;
            let gm = self.total_gradient(p.offset(d));
            for i in 0..3 {
                out[i][j] = (gp[i] - gm[i]) / (2.0 * h);
            }
        }
        for i in 0..3 {
            for j in 0..i {
                let m = 0.5 * (out[i][j] + out[j][i]);
                out[i][j] = m;
                out[j][i] = m;
            }
        }
        out
    }

    /// Instantaneous electric field `−∇φ_dc − V_rf cos(Ωt + φ) ∇φ_rf`, V·m⁻¹.
    pub fn electric_field(&self, p: FieldPoint, t: f64, phase: f64) -> [f64; 3] {
        let c = self.op.v_rf * (self.op.omega_rf * t + phase).cos();
        let grf = self.rf_unit_gradient(p);
        let gdc = self.dc_gradient(p);
        [-gdc[0] - c * grf[0], -gdc[1] - c * grf[1], -gdc[2] - c * grf[2]]
    }

    /// Height scale of the rf electrodes, used to size search boxes.
    fn length_scale(&self) -> f64 {
        let w = self.rf.iter().fold(0.0_f64, |m, r| m.max(r.x1.abs()).max(r.x2.abs()));
        if w > 0.0 {
            w
        } else {
            1e-4
        }
    }

    /// Locates the zero of the rf field: scan up the symmetry axis for the
    /// smallest |∇φ_rf|, then Newton on ∇φ_rf = 0 with the analytic Hessian.
    pub fn rf_null(&self) -> Result<FieldPoint, FieldError> {
        if self.rf.is_empty() {
            return Err(FieldError::NoMinimum);
        }
        let scale = self.length_scale();
        let n = 800;
        let mut best = (f64::INFINITY, 0.0);
        for i in 1..=n {
            let y = 4.0 * scale * i as f64 / n as f64;
            let g = norm(self.rf_unit_gradient(FieldPoint::new(0.0, y, 0.0)));
            if g < best.0 {
                best = (g, y);
            }
        }
        if !(best.1 > 0.0) || best.1 >= 4.0 * scale * 0.999 {
            return Err(FieldError::NoMinimum);
        }
        let mut p = FieldPoint::new(0.0, best.1, 0.0);
        let curvature = {
            let h = self.rf_unit_hessian(p);
            (h[0][0].abs() + h[1][1].abs() + h[2][2].abs()).max(1e-300)
        };
        for _ in 0..50 {
            let g = self.rf_unit_gradient(p);
            if norm(g) < 1e-10 * curvature * p.y {
                return Ok(p);
            }
            let h = self.rf_unit_hessian(p);
            let step = solve3_lstsq(&h, [-g[0], -g[1], -g[2]]);
            let limit = 0.2 * p.y;
            let len = norm(step);
            let f = if len > limit { limit / len } else { 1.0 };
            p = p.offset([f * step[0], f * step[1], f * step[2]]);
            if !(p.y > 0.0) {
                return Err(FieldError::NoMinimum);
            }
        }
        let g = self.rf_unit_gradient(p);
        if norm(g) < 1e-6 * curvature * p.y {
            Ok(p)
        } else {
            Err(FieldError::NoMinimum)
        }
    }

    /// Minimum of the total (pseudo + dc) energy, Newton from the rf null.
    pub fn equilibrium(&self) -> Result<FieldPoint, FieldError> {
        let mut p = self.rf_null()?;
        if !self.has_dc() {
            return Ok(p);
        }
        for _ in 0..100 {
            let g = self.total_gradient(p);
            let h = self.total_hessian(p);
            let step = solve3_lstsq(&h, [-g[0], -g[1], -g[2]]);
            let limit = 0.05 * p.y;
            let len = norm(step);
            let f = if len > limit { limit / len } else { 1.0 };
            p = p.offset([f * step[0], f * step[1], f * step[2]]);
            if !(p.y > 0.0) {
                return Err(FieldError::NoMinimum);
            }
            if len < 1e-13 * p.y {
                return Ok(p);
            }
        }
        Err(FieldError::NoMinimum)
    }
}

/// Solves a 3×3 system, falling back to a pseudo-inverse when singular
/// (used where one direction has no curvature).
fn solve3_lstsq(h: &[[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let (vals, vecs) = crate::linalg::sym_eigen3(*h);
    let vmax = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut x = [0.0; 3];
    for k in 0..3 {
        if vals[k].abs() <= 1e-12 * vmax {
            continue;
        }
        let c = dot(vecs[k], b) / vals[k];
        for i in 0..3 {
            x[i] += c * vecs[k][i];
        }
    }
    x
}

/// Pseudopotential of `op` at `p`, joules.
pub fn pseudopotential(layout: &ElectrodeLayout, op: &OperatingPoint, p: FieldPoint) -> Result<f64, FieldError> {
    let p = p.check()?;
    Ok(FieldModel::new(layout, op)?.pseudopotential(p))
}

/// 3-D pseudopotential minimum. dc voltages are ignored.
pub fn find_rf_null(layout: &ElectrodeLayout, op: &OperatingPoint) -> Result<FieldPoint, FieldError> {
    FieldModel::new(layout, op)?.rf_null()
}

/// Null of the rf field, independent of drive amplitude.
pub fn rf_null(layout: &ElectrodeLayout) -> Result<FieldPoint, FieldError> {
    FieldModel::new(layout, &OperatingPoint::ca40(1.0))?.rf_null()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapDepth {
    /// Φ_ps(saddle) − Φ_ps(null), joules.
    pub depth: f64,
    pub null: FieldPoint,
    pub saddle: FieldPoint,
}

impl TrapDepth {
    pub fn depth_ev(&self) -> f64 {
        self.depth / ELEMENTARY_CHARGE
    }
}

#[derive(PartialEq)]
struct Level(f64, usize);

impl Eq for Level {}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

/// Lowest pseudopotential barrier between the null and the edge of an
/// x–y search box in the plane of the null.
///
/// A priority flood from the box boundary gives every grid cell the lowest
/// achievable maximum along any path to the edge; the highest cell on the
/// optimal path out of the null is the saddle estimate, which is then
/// polished by Newton iteration on ∇Φ_ps = 0 in the plane.
pub fn trap_depth(layout: &ElectrodeLayout, op: &OperatingPoint) -> Result<TrapDepth, FieldError> {
    let model = FieldModel::new(layout, op)?.rf_only();
    let null = model.rf_null()?;
    let h = null.y;
    let (nx, ny) = (161usize, 201usize);
    let (x0, x1) = (-5.0 * h, 5.0 * h);
    let (y0, y1) = (0.02 * h, 6.0 * h);
    let dx = (x1 - x0) / (nx - 1) as f64;
    let dy = (y1 - y0) / (ny - 1) as f64;
    let point = |i: usize, j: usize| FieldPoint::new(x0 + i as f64 * dx, y0 + j as f64 * dy, null.z);
    let mut phi = vec![0.0; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            phi[j * nx + i] = model.pseudopotential(point(i, j));
        }
    }

    let mut level = vec![f64::INFINITY; nx * ny];
    let mut parent = vec![usize::MAX; nx * ny];
    let mut heap = BinaryHeap::new();
    for j in 0..ny {
        for i in 0..nx {
            if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
                let k = j * nx + i;
                level[k] = phi[k];
                heap.push(Reverse(Level(phi[k], k)));
            }
        }
    }
    let mut done = vec![false; nx * ny];
    while let Some(Reverse(Level(l, k))) = heap.pop() {
        if done[k] {
            continue;
        }
        done[k] = true;
        let (i, j) = (k % nx, k / nx);
        let mut nbrs = [usize::MAX; 4];
        if i > 0 {
            nbrs[0] = k - 1;
        }
        if i + 1 < nx {
            nbrs[1] = k + 1;
        }
        if j > 0 {
            nbrs[2] = k - nx;
        }
        if j + 1 < ny {
            nbrs[3] = k + nx;
        }
        for &n in nbrs.iter().filter(|&&n| n != usize::MAX) {
            if done[n] {
                continue;
            }
            let cand = l.max(phi[n]);
            if cand < level[n] {
                level[n] = cand;
                parent[n] = k;
                heap.push(Reverse(Level(cand, n)));
            }
        }
    }

    let ic = ((null.x - x0) / dx).round() as usize;
    let jc = ((null.y - y0) / dy).round() as usize;
    let mut k = jc * nx + ic;
    let mut saddle_k = k;
    let mut guard = 0;
    while parent[k] != usize::MAX && guard < nx * ny {
        k = parent[k];
        if phi[k] > phi[saddle_k] {
            saddle_k = k;
        }
        guard += 1;
    }
    let grid_saddle = point(saddle_k % nx, saddle_k / nx);
    let saddle = refine_saddle(&model, grid_saddle, dx.max(dy)).unwrap_or(grid_saddle);
    let barrier = model.pseudopotential(saddle);
    let floor = model.pseudopotential(null);
    if !(barrier > floor) {
        return Err(FieldError::NoSaddle);
    }
    Ok(TrapDepth { depth: barrier - floor, null, saddle })
}

/// Newton on the in-plane pseudopotential gradient. Rejects results that
/// wander more than two grid cells from the start.
fn refine_saddle(model: &FieldModel, start: FieldPoint, cell: f64) -> Option<FieldPoint> {
    let mut p = start;
    for _ in 0..40 {
        let g = model.pseudo_gradient(p);
        let h = model.total_hessian(p);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 {
            return None;
        }
        let sx = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let sy = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        p = FieldPoint::new(p.x + sx, p.y + sy, p.z);
        if (p.x - start.x).hypot(p.y - start.y) > 2.0 * cell || !(p.y > 0.0) {
            return None;
        }
        if sx.hypot(sy) < 1e-9 * p.y {
            return Some(p);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{reconstruct_six_wire, Role, SixWireParams};

    fn square(side: f64) -> Electrode {
        Electrode::new("E", Role::DcControl, vec![Rect::new(-side / 2.0, -side / 2.0, side / 2.0, side / 2.0)])
    }

    #[test]
    fn huge_electrode_gives_unity() {
        let e = square(1e6);
        let v = unit_potential(&e, FieldPoint::new(0.3, 1e-3, -0.2)).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn far_field_vanishes() {
        let e = square(1e-4);
        let v = unit_potential(&e, FieldPoint::new(0.0, 1e3, 0.0)).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn below_plane_is_rejected() {
        let e = square(1.0);
        assert_eq!(unit_potential(&e, FieldPoint::new(0.0, 0.0, 0.0)), Err(FieldError::BelowPlane(0.0)));
        assert!(unit_gradient(&e, FieldPoint::new(0.0, -1.0, 0.0)).is_err());
    }

    #[test]
    fn square_above_center_matches_closed_form() {
        // solid angle of a square of side 2h seen from height h is 2π/3
        let e = square(2.0);
        let v = unit_potential(&e, FieldPoint::new(0.0, 1.0, 0.0)).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn partition_of_unity() {
        let l = 1e9;
        let tiles = [
            Rect::new(-l, -l, 0.1, 0.2),
            Rect::new(0.1, -l, l, 0.2),
            Rect::new(-l, 0.2, -0.3, l),
            Rect::new(-0.3, 0.2, l, l),
        ];
        let p = FieldPoint::new(0.05, 0.4, 0.1);
        let s: f64 = tiles.iter().map(|r| rect_potential(r, p)).sum();
        assert!((s - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mirror_pair_has_no_x_gradient_on_axis() {
        let l = reconstruct_six_wire(&SixWireParams::default()).unwrap();
        let p = FieldPoint::new(0.0, 150e-6, 37e-6);
        let g1 = unit_gradient(l.electrode("V3").unwrap(), p).unwrap();
        let g2 = unit_gradient(l.electrode("V4").unwrap(), p).unwrap();
        assert!((g1[0] + g2[0]).abs() < 1e-9 * g1[0].abs().max(1.0));
    }

    #[test]
    fn pseudopotential_scales_and_is_even() {
        let l = reconstruct_six_wire(&SixWireParams::default()).unwrap();
        let p = FieldPoint::new(10e-6, 180e-6, 0.0);
        let a = pseudopotential(&l, &OperatingPoint::ca40(100.0), p).unwrap();
        let b = pseudopotential(&l, &OperatingPoint::ca40(200.0), p).unwrap();
        let c = pseudopotential(&l, &OperatingPoint::ca40(-100.0), p).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        assert_eq!(a, c);
        assert_eq!(pseudopotential(&l, &OperatingPoint::ca40(0.0), p).unwrap(), 0.0);
    }

    #[test]
    fn null_ignores_dc() {
        let l = reconstruct_six_wire(&SixWireParams::default()).unwrap();
        let mut op = OperatingPoint::ca40(175.0);
        let a = find_rf_null(&l, &op).unwrap();
        op.dc_voltages.insert("V1".into(), 3.0);
        let b = find_rf_null(&l, &op).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unknown_dc_electrode_is_an_error() {
        let l = reconstruct_six_wire(&SixWireParams::default()).unwrap();
        let mut op = OperatingPoint::ca40(175.0);
        op.dc_voltages.insert("nope".into(), 1.0);
        assert!(matches!(FieldModel::new(&l, &op), Err(FieldError::UnknownElectrode(_))));
    }
}
