//! Regenerates `data/six_wire.json` from the default reconstruction.

use std::path::Path;

use sixwire::core::{reconstruct_six_wire, SixWireParams};

fn main() -> anyhow::Result<()> {
    let layout = reconstruct_six_wire(&SixWireParams::default())?;
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/six_wire.json");
    sixwire::save_layout(&layout, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}
