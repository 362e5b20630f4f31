//! Planar electrode layouts and the parametric six-wire reconstruction.

#[allow(unused_imports)] // shadowed by std methods when a dev-dependency links std
use num_traits::Float;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::fields;
use crate::roots::brent;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("electrode `{0}`: rectangle with x1 >= x2 or z1 >= z2")]
    InvalidRect(String),
    #[error("electrode `{0}`: rectangles overlap")]
    SelfOverlap(String),
    #[error("electrodes `{0}` and `{1}` overlap")]
    Overlap(String, String),
    #[error("electrode `{0}` has no mirror partner")]
    MissingPair(String),
    #[error("electrode `{0}` appears in more than one pair")]
    DuplicatePair(String),
    #[error("pair references unknown electrode `{0}`")]
    UnknownElectrode(String),
    #[error("electrodes `{0}` and `{1}` are not mirror images about x = 0")]
    Asymmetric(String, String),
    #[error("duplicate electrode name `{0}`")]
    DuplicateName(String),
    #[error("expected exactly one electrode named `T`, found {0}")]
    TickleCount(usize),
    #[error("layout has no rf electrode")]
    NoRf,
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("rf null search failed: {0}")]
    NullSearch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Rf,
    DcControl,
    Ground,
}

/// Axis-aligned rectangle `[x1, x2] × [z1, z2]` in the chip plane, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x1: f64,
    pub z1: f64,
    pub x2: f64,
    pub z2: f64,
}

impl Rect {
    pub fn new(x1: f64, z1: f64, x2: f64, z2: f64) -> Self {
        Rect { x1, z1, x2, z2 }
    }

    pub fn is_valid(&self) -> bool {
        self.x1 < self.x2 && self.z1 < self.z2 && self.x1.is_finite() && self.z2.is_finite()
    }

    pub fn mirrored(&self) -> Rect {
        Rect { x1: -self.x2, z1: self.z1, x2: -self.x1, z2: self.z2 }
    }

    pub fn scaled(&self, k: f64) -> Rect {
        Rect { x1: k * self.x1, z1: k * self.z1, x2: k * self.x2, z2: k * self.z2 }
    }

    /// Positive-area intersection; shared edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        let tol = 1e-12;
        self.x1 < other.x2 - tol && other.x1 < self.x2 - tol && self.z1 < other.z2 - tol && other.z1 < self.z2 - tol
    }

    fn approx_eq(&self, other: &Rect, tol: f64) -> bool {
        (self.x1 - other.x1).abs() <= tol
            && (self.x2 - other.x2).abs() <= tol
            && (self.z1 - other.z1).abs() <= tol
            && (self.z2 - other.z2).abs() <= tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Electrode {
    pub name: String,
    pub role: Role,
    pub rects: Vec<Rect>,
}

impl Electrode {
    pub fn new(name: impl Into<String>, role: Role, rects: Vec<Rect>) -> Self {
        Electrode { name: name.into(), role, rects }
    }
}

/// A validated layout. Construct through [`ElectrodeLayout::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeLayout {
    electrodes: Vec<Electrode>,
    pairs: Vec<(String, String)>,
    controlled: Vec<String>,
}

impl ElectrodeLayout {
    /// Checks rectangle sanity, overlaps, the mirror pairing and the tickle
    /// electrode. Every electrode must sit in exactly one pair; a
    /// self-symmetric electrode is paired with itself.
    pub fn new(
        electrodes: Vec<Electrode>,
        pairs: Vec<(String, String)>,
        controlled: Vec<String>,
    ) -> Result<Self, GeometryError> {
        for (i, e) in electrodes.iter().enumerate() {
            if electrodes[..i].iter().any(|o| o.name == e.name) {
                return Err(GeometryError::DuplicateName(e.name.clone()));
            }
            if e.rects.is_empty() || e.rects.iter().any(|r| !r.is_valid()) {
                return Err(GeometryError::InvalidRect(e.name.clone()));
            }
            for (k, r) in e.rects.iter().enumerate() {
                if e.rects[..k].iter().any(|o| o.overlaps(r)) {
                    return Err(GeometryError::SelfOverlap(e.name.clone()));
                }
            }
        }
        for (i, a) in electrodes.iter().enumerate() {
            for b in &electrodes[i + 1..] {
                if a.rects.iter().any(|ra| b.rects.iter().any(|rb| ra.overlaps(rb))) {
                    return Err(GeometryError::Overlap(a.name.clone(), b.name.clone()));
                }
            }
        }
        if !electrodes.iter().any(|e| e.role == Role::Rf) {
            return Err(GeometryError::NoRf);
        }
        let n_tickle = electrodes.iter().filter(|e| e.name == "T").count();
        if n_tickle != 1 {
            return Err(GeometryError::TickleCount(n_tickle));
        }

        let find = |name: &str| electrodes.iter().find(|e| e.name == name);
        let mut seen: Vec<&str> = Vec::new();
        for (a, b) in &pairs {
            let ea = find(a).ok_or_else(|| GeometryError::UnknownElectrode(a.clone()))?;
            let eb = find(b).ok_or_else(|| GeometryError::UnknownElectrode(b.clone()))?;
            let names: &[&str] = if a == b { &[a.as_str()] } else { &[a.as_str(), b.as_str()] };
            for &n in names {
                if seen.contains(&n) {
                    return Err(GeometryError::DuplicatePair(n.to_string()));
                }
                seen.push(n);
            }
            if (ea.role == Role::Rf) != (eb.role == Role::Rf) || !mirror_match(&ea.rects, &eb.rects) {
                return Err(GeometryError::Asymmetric(a.clone(), b.clone()));
            }
        }
        if let Some(e) = electrodes.iter().find(|e| !seen.contains(&e.name.as_str())) {
            return Err(GeometryError::MissingPair(e.name.clone()));
        }
        for c in &controlled {
            if find(c).is_none() {
                return Err(GeometryError::UnknownElectrode(c.clone()));
            }
        }
        Ok(ElectrodeLayout { electrodes, pairs, controlled })
    }

    pub fn electrodes(&self) -> &[Electrode] {
        &self.electrodes
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    /// V1…V6 followed by `T`, as declared.
    pub fn controlled_names(&self) -> &[String] {
        &self.controlled
    }

    pub fn electrode(&self, name: &str) -> Option<&Electrode> {
        self.electrodes.iter().find(|e| e.name == name)
    }

    pub fn rf_rects(&self) -> impl Iterator<Item = &Rect> {
        self.electrodes.iter().filter(|e| e.role == Role::Rf).flat_map(|e| e.rects.iter())
    }

    /// Mirror partner of an electrode under the declared pairing.
    pub fn partner(&self, name: &str) -> Option<&str> {
        self.pairs.iter().find_map(|(a, b)| {
            if a == name {
                Some(b.as_str())
            } else if b == name {
                Some(a.as_str())
            } else {
                None
            }
        })
    }

    /// All lengths multiplied by `k`.
    pub fn scaled(&self, k: f64) -> ElectrodeLayout {
        let electrodes = self
            .electrodes
            .iter()
            .map(|e| Electrode { name: e.name.clone(), role: e.role, rects: e.rects.iter().map(|r| r.scaled(k)).collect() })
            .collect();
        ElectrodeLayout { electrodes, pairs: self.pairs.clone(), controlled: self.controlled.clone() }
    }
}

fn mirror_match(a: &[Rect], b: &[Rect]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let scale = a.iter().chain(b).fold(0.0_f64, |m, r| m.max(r.x1.abs()).max(r.x2.abs()).max(r.z1.abs()).max(r.z2.abs()));
    let tol = 1e-9 * scale.max(1e-6);
    let mut used = vec![false; b.len()];
    for r in a {
        let m = r.mirrored();
        match b.iter().enumerate().position(|(j, rb)| !used[j] && rb.approx_eq(&m, tol)) {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Dimensions of the reconstructed six-wire chip, metres.
///
/// Going outward from `x = 0`: a `gap_center` slot, the centre dc strip of
/// `center_width`, a grounded strip of `center_to_rail_gap`, the rf rail of
/// `rail_width`, a `gap`, then the segmented control electrodes of lateral
/// length `control_length_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixWireParams {
    pub center_width: f64,
    pub rail_width: f64,
    pub gap_center: f64,
    pub gap: f64,
    pub center_to_rail_gap: f64,
    pub control_width_z: f64,
    pub control_length_x: f64,
    pub n_control_pairs: usize,
    pub rail_length: f64,
}

impl Default for SixWireParams {
    /// The shipped reconstruction: 150 µm ion height, 274 µm to the nearest
    /// control edge.
    fn default() -> Self {
        let um = 1e-6;
        SixWireParams {
            center_width: 77.8 * um,
            rail_width: 116.69 * um,
            gap_center: 5.0 * um,
            gap: 10.0 * um,
            center_to_rail_gap: 22.3 * um,
            control_width_z: 145.0 * um,
            control_length_x: 4800.0 * um,
            n_control_pairs: 11,
            rail_length: 8000.0 * um,
        }
    }
}

impl SixWireParams {
    pub fn rail_inner(&self) -> f64 {
        0.5 * self.gap_center + self.center_width + self.center_to_rail_gap
    }

    pub fn rail_outer(&self) -> f64 {
        self.rail_inner() + self.rail_width
    }

    pub fn control_inner(&self) -> f64 {
        self.rail_outer() + self.gap
    }
}

/// Builds the six-wire layout.
///
/// Control pairs are centred at `z = k·(control_width_z + gap)`. Wiring:
/// V1/V2 are the left/right centre strips, V3/V4 the left/right controls at
/// k = -1, 0, 1, V5/V6 those at k = ±2, and `T` is the left control at
/// k = +3. Everything else is grounded.
pub fn reconstruct_six_wire(p: &SixWireParams) -> Result<ElectrodeLayout, GeometryError> {
    let lengths = [
        ("center_width", p.center_width),
        ("rail_width", p.rail_width),
        ("gap_center", p.gap_center),
        ("gap", p.gap),
        ("control_width_z", p.control_width_z),
        ("control_length_x", p.control_length_x),
        ("rail_length", p.rail_length),
    ];
    for (name, v) in lengths {
        if !(v > 0.0 && v.is_finite()) {
            return Err(GeometryError::Degenerate(format!("{name} must be positive")));
        }
    }
    if p.center_to_rail_gap < 0.0 {
        return Err(GeometryError::Degenerate("centre strip overlaps the rf rail".into()));
    }
    if p.n_control_pairs < 7 || p.n_control_pairs % 2 == 0 {
        return Err(GeometryError::Degenerate("need an odd number of control pairs, at least 7".into()));
    }
    let pitch = p.control_width_z + p.gap;
    let half_pairs = (p.n_control_pairs / 2) as i64;
    let half_len = 0.5 * p.rail_length;
    if half_len < (half_pairs as f64 + 0.5) * pitch {
        return Err(GeometryError::Degenerate("rails shorter than the control array".into()));
    }

    let xc0 = 0.5 * p.gap_center;
    let xc1 = xc0 + p.center_width;
    let xr0 = p.rail_inner();
    let xr1 = p.rail_outer();
    let xo0 = p.control_inner();
    let xo1 = xo0 + p.control_length_x;

    let mut electrodes = Vec::new();
    electrodes.push(Electrode::new(
        "RF",
        Role::Rf,
        vec![Rect::new(-xr1, -half_len, -xr0, half_len), Rect::new(xr0, -half_len, xr1, half_len)],
    ));
    electrodes.push(Electrode::new("V1", Role::DcControl, vec![Rect::new(-xc1, -half_len, -xc0, half_len)]));
    electrodes.push(Electrode::new("V2", Role::DcControl, vec![Rect::new(xc0, -half_len, xc1, half_len)]));

    let control = |k: i64, left: bool| {
        let zc = k as f64 * pitch;
        let (z1, z2) = (zc - 0.5 * p.control_width_z, zc + 0.5 * p.control_width_z);
        if left {
            Rect::new(-xo1, z1, -xo0, z2)
        } else {
            Rect::new(xo0, z1, xo1, z2)
        }
    };
    let groups: [(&str, &str, &[i64]); 2] = [("V3", "V4", &[-1, 0, 1]), ("V5", "V6", &[-2, 2])];
    for (l, r, ks) in groups {
        electrodes.push(Electrode::new(l, Role::DcControl, ks.iter().map(|&k| control(k, true)).collect()));
        electrodes.push(Electrode::new(r, Role::DcControl, ks.iter().map(|&k| control(k, false)).collect()));
    }
    electrodes.push(Electrode::new("T", Role::DcControl, vec![control(3, true)]));
    let mut pairs: Vec<(String, String)> = [("RF", "RF"), ("V1", "V2"), ("V3", "V4"), ("V5", "V6"), ("T", "GR+3")]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    electrodes.push(Electrode::new("GR+3", Role::Ground, vec![control(3, false)]));
    for k in -half_pairs..=half_pairs {
        if (-2..=3).contains(&k) {
            continue;
        }
        let (l, r) = (format!("GL{k:+}"), format!("GR{k:+}"));
        electrodes.push(Electrode::new(l.clone(), Role::Ground, vec![control(k, true)]));
        electrodes.push(Electrode::new(r.clone(), Role::Ground, vec![control(k, false)]));
        pairs.push((l, r));
    }
    let controlled = ["V1", "V2", "V3", "V4", "V5", "V6", "T"].iter().map(|s| s.to_string()).collect();
    ElectrodeLayout::new(electrodes, pairs, controlled)
}

/// Places the rf rail so that the rf null sits at `height` and the nearest
/// control-electrode edge is `control_distance` from the ion.
///
/// The outer rail edge follows directly from the control distance. The
/// inner edge starts at the long-rail estimate `height² / outer` and is
/// refined by root-finding the 3-D null height. The centre strips keep
/// their width; the grounded strip between centre and rail absorbs the
/// difference and must stay at least `gap` wide.
pub fn solve_heights(height: f64, control_distance: f64, base: &SixWireParams) -> Result<SixWireParams, GeometryError> {
    if !(height > 0.0 && control_distance > height) {
        return Err(GeometryError::Degenerate("need 0 < height < control distance".into()));
    }
    let outer = (control_distance * control_distance - height * height).sqrt() - base.gap;
    let inner0 = height * height / outer;
    let xc1 = 0.5 * base.gap_center + base.center_width;
    let with_inner = |inner: f64| SixWireParams {
        center_to_rail_gap: inner - xc1,
        rail_width: outer - inner,
        ..*base
    };
    let null_error = |inner: f64| -> f64 {
        match reconstruct_six_wire(&with_inner(inner)).and_then(|l| {
            fields::rf_null(&l).map_err(|e| GeometryError::NullSearch(e.to_string()))
        }) {
            Ok(p) => p.y - height,
            Err(_) => f64::NAN,
        }
    };
    let lo = (0.7 * inner0).max(xc1);
    let hi = (1.3 * inner0).min(outer - 1e-3 * outer);
    let inner = brent(null_error, lo, hi, 1e-4 * height)
        .filter(|x| x.is_finite())
        .ok_or_else(|| GeometryError::NullSearch("no rail position reproduces the requested height".into()))?;
    let params = with_inner(inner);
    if params.center_to_rail_gap < base.gap {
        return Err(GeometryError::Degenerate("centre strip too wide for the requested height".into()));
    }
    Ok(params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn um(x: f64) -> f64 {
        x * 1e-6
    }

    fn small_layout(extra: Option<Electrode>) -> Result<ElectrodeLayout, GeometryError> {
        let mut es = vec![
            Electrode::new("RF", Role::Rf, vec![Rect::new(um(-200.0), um(-1000.0), um(-100.0), um(1000.0)), Rect::new(um(100.0), um(-1000.0), um(200.0), um(1000.0))]),
            Electrode::new("T", Role::DcControl, vec![Rect::new(um(-400.0), um(0.0), um(-210.0), um(100.0))]),
            Electrode::new("G", Role::Ground, vec![Rect::new(um(210.0), um(0.0), um(400.0), um(100.0))]),
        ];
        es.extend(extra);
        let pairs = vec![("RF".into(), "RF".into()), ("T".into(), "G".into())];
        ElectrodeLayout::new(es, pairs, vec!["T".into()])
    }

    #[test]
    fn minimal_layout_validates() {
        let l = small_layout(None).unwrap();
        assert_eq!(l.electrodes().len(), 3);
        assert_eq!(l.partner("T"), Some("G"));
    }

    #[test]
    fn overlap_is_rejected_with_names() {
        let bad = Electrode::new("X", Role::Ground, vec![Rect::new(um(-150.0), um(0.0), um(-120.0), um(10.0))]);
        match small_layout(Some(bad)) {
            Err(GeometryError::Overlap(a, b)) => assert_eq!((a.as_str(), b.as_str()), ("RF", "X")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unpaired_electrode_is_rejected() {
        let lone = Electrode::new("X", Role::Ground, vec![Rect::new(um(-20.0), um(0.0), um(-10.0), um(10.0))]);
        assert_eq!(small_layout(Some(lone)), Err(GeometryError::MissingPair("X".into())));
    }

    #[test]
    fn asymmetric_pair_is_rejected() {
        let es = vec![
            Electrode::new("RF", Role::Rf, vec![Rect::new(um(-200.0), um(-1000.0), um(-100.0), um(1000.0)), Rect::new(um(100.0), um(-1000.0), um(201.0), um(1000.0))]),
            Electrode::new("T", Role::DcControl, vec![Rect::new(um(-400.0), um(0.0), um(-210.0), um(100.0))]),
            Electrode::new("G", Role::Ground, vec![Rect::new(um(210.0), um(0.0), um(400.0), um(100.0))]),
        ];
        let pairs = vec![("RF".into(), "RF".into()), ("T".into(), "G".into())];
        assert!(matches!(ElectrodeLayout::new(es, pairs, vec![]), Err(GeometryError::Asymmetric(..))));
    }

    #[test]
    fn reconstruction_is_mirror_symmetric() {
        let l = reconstruct_six_wire(&SixWireParams::default()).unwrap();
        assert_eq!(l.controlled_names().len(), 7);
        for (a, b) in l.pairs() {
            let ea = l.electrode(a).unwrap();
            let eb = l.electrode(b).unwrap();
            assert!(mirror_match(&ea.rects, &eb.rects), "{a} vs {b}");
        }
        // 11 pairs of controls + rails + centre strips
        let rects: usize = l.electrodes().iter().map(|e| e.rects.len()).sum();
        assert_eq!(rects, 22 + 2 + 2);
    }

    #[test]
    fn zero_rail_width_is_rejected() {
        let p = SixWireParams { rail_width: 0.0, ..SixWireParams::default() };
        assert!(matches!(reconstruct_six_wire(&p), Err(GeometryError::Degenerate(_))));
    }

    #[test]
    fn default_parameters_match_the_control_distance() {
        let p = SixWireParams::default();
        let d = (p.control_inner().powi(2) + um(150.0).powi(2)).sqrt();
        assert!((d - um(274.0)).abs() < um(0.1));
    }
}
