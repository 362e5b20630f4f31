//! JSON electrode layouts. Lengths are decimal micrometres on disk and
//! metres in memory.
//!
//! ```json
//! {
//!   "electrodes": [
//!     { "name": "RF", "role": "rf", "rects": [[-100.0, -4000.0, -20.0, 4000.0]] }
//!   ],
//!   "pairs": [["RF", "RF"]],
//!   "controlled": ["V1", "V2", "V3", "V4", "V5", "V6", "T"]
//! }
//! ```

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sixwire_core::{reconstruct_six_wire, Electrode, ElectrodeLayout, Rect, Role, SixWireParams};

const UM: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoleName {
    Rf,
    Dc,
    Ground,
}

impl From<Role> for RoleName {
    fn from(r: Role) -> Self {
        match r {
            Role::Rf => RoleName::Rf,
            Role::DcControl => RoleName::Dc,
            Role::Ground => RoleName::Ground,
        }
    }
}

impl From<RoleName> for Role {
    fn from(r: RoleName) -> Self {
        match r {
            RoleName::Rf => Role::Rf,
            RoleName::Dc => Role::DcControl,
            RoleName::Ground => Role::Ground,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrodeEntry {
    pub name: String,
    pub role: RoleName,
    /// `[x1, z1, x2, z2]`, µm.
    pub rects: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutFile {
    pub electrodes: Vec<ElectrodeEntry>,
    pub pairs: Vec<(String, String)>,
    pub controlled: Vec<String>,
}

impl LayoutFile {
    pub fn from_layout(layout: &ElectrodeLayout) -> Self {
        let electrodes = layout
            .electrodes()
            .iter()
            .map(|e| ElectrodeEntry {
                name: e.name.clone(),
                role: e.role.into(),
                rects: e.rects.iter().map(|r| [r.x1 / UM, r.z1 / UM, r.x2 / UM, r.z2 / UM]).collect(),
            })
            .collect();
        LayoutFile { electrodes, pairs: layout.pairs().to_vec(), controlled: layout.controlled_names().to_vec() }
    }

    pub fn into_layout(self) -> Result<ElectrodeLayout> {
        let mut electrodes = Vec::with_capacity(self.electrodes.len());
        for e in self.electrodes {
            if let Some(bad) = e.rects.iter().flatten().find(|v| !v.is_finite()) {
                bail!("electrode `{}`: non-finite coordinate {bad}", e.name);
            }
            let rects = e.rects.iter().map(|r| Rect::new(r[0] * UM, r[1] * UM, r[2] * UM, r[3] * UM)).collect();
            electrodes.push(Electrode::new(e.name, e.role.into(), rects));
        }
        Ok(ElectrodeLayout::new(electrodes, self.pairs, self.controlled)?)
    }
}

pub fn parse_layout(json: &str) -> Result<ElectrodeLayout> {
    let file: LayoutFile = serde_json::from_str(json).context("malformed layout JSON")?;
    file.into_layout()
}

/// Reads and validates a layout file.
pub fn load_layout(path: &Path) -> Result<ElectrodeLayout> {
    let text = fs::read_to_string(path).with_context(|| format!("reading layout {}", path.display()))?;
    parse_layout(&text).with_context(|| format!("in layout {}", path.display()))
}

/// Pretty JSON with one rectangle per line, coordinates rounded to 1 pm.
pub fn layout_to_json(layout: &ElectrodeLayout) -> String {
    let file = LayoutFile::from_layout(layout);
    let q = |s: &str| serde_json::to_string(s).expect("string serialises");
    let num = |v: f64| {
        let r = (v * 1e6).round() / 1e6;
        if r == r.trunc() { format!("{r:.1}") } else { format!("{r}") }
    };
    let mut out = String::from("{\n  \"electrodes\": [\n");
    for (i, e) in file.electrodes.iter().enumerate() {
        let role = serde_json::to_string(&e.role).expect("role serialises");
        out += &format!("    {{\n      \"name\": {},\n      \"role\": {role},\n      \"rects\": [\n", q(&e.name));
        for (k, r) in e.rects.iter().enumerate() {
            let sep = if k + 1 < e.rects.len() { "," } else { "" };
            out += &format!("        [{}, {}, {}, {}]{sep}\n", num(r[0]), num(r[1]), num(r[2]), num(r[3]));
        }
        let sep = if i + 1 < file.electrodes.len() { "," } else { "" };
        out += &format!("      ]\n    }}{sep}\n");
    }
    out += "  ],\n  \"pairs\": [\n";
    for (i, (a, b)) in file.pairs.iter().enumerate() {
        let sep = if i + 1 < file.pairs.len() { "," } else { "" };
        out += &format!("    [{}, {}]{sep}\n", q(a), q(b));
    }
    let controlled: Vec<String> = file.controlled.iter().map(|c| q(c)).collect();
    out += &format!("  ],\n  \"controlled\": [{}]\n}}\n", controlled.join(", "));
    out
}

pub fn save_layout(layout: &ElectrodeLayout, path: &Path) -> Result<()> {
    fs::write(path, layout_to_json(layout)).with_context(|| format!("writing layout {}", path.display()))
}

/// The layout at `path`, or the default reconstruction when `None`.
pub fn layout_or_default(path: Option<&Path>) -> Result<ElectrodeLayout> {
    match path {
        Some(p) => load_layout(p),
        None => Ok(reconstruct_six_wire(&SixWireParams::default())?),
    }
}
