//! File formats, CSV output, thread-parallel sweeps and the subcommands of
//! the `sixwire` binary, on top of [`sixwire_core`].

pub mod commands;
pub mod layout_file;
pub mod sweeps;
pub mod table;

pub use layout_file::{layout_or_default, layout_to_json, load_layout, parse_layout, save_layout, LayoutFile};
pub use sixwire_core as core;
pub use table::{Cell, Table};
