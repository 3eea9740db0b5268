//! On-disk formats: Solomon-layout customer sheets in, self-contained
//! instance files (JSON) out. Instance files round-trip bit-exactly: every
//! field including hidden true releases and generation metadata.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use oprd_core::instance::{parse_customers, Instance, ParsedCustomers};

/// Read and parse a Solomon-layout file.
pub fn load_solomon(path: &Path, limit: Option<usize>) -> Result<ParsedCustomers> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_customers(&text, limit).with_context(|| format!("parsing {}", path.display()))
}

/// Write an instance as pretty JSON.
pub fn write_instance(path: &Path, instance: &Instance) -> Result<()> {
    let json = serde_json::to_string_pretty(instance)?;
    fs::write(path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Read an instance file back.
pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let instance: Instance =
        serde_json::from_str(&text).with_context(|| format!("decoding {}", path.display()))?;
    Ok(instance)
}
