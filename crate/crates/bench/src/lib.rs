//! Workloads shared by the benchmarks, loaded from the bundled spec files.

use std::path::PathBuf;

use parfwd_core::{ProtocolSpec, SpecDocument};

/// Specs used for the generation and projection benchmarks, smallest first.
pub const ENGINE_SPECS: [&str; 5] = [
    "single_relay_df",
    "protocol_b",
    "short_range_k3",
    "coupled_k3",
    "four_relay_branching",
];

/// Specs whose capacity check succeeds.
pub const CAPACITY_SPECS: [&str; 3] = ["protocol_b", "short_range_k3", "semideterministic"];

pub fn spec_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(format!("{name}.spec"))
}

/// Parses a bundled spec; panics on a broken checkout.
pub fn load(name: &str) -> (SpecDocument, ProtocolSpec) {
    let path = spec_path(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let doc = SpecDocument::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    let spec = doc.to_spec().unwrap_or_else(|e| panic!("{name}: {e}"));
    (doc, spec)
}
