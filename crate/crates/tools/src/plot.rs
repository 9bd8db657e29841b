//! Long-format CSV for external plotting.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io;

pub const PLOTDATA_HEADER: &str = "variant,interval,mbps";

/// Concatenates `dir/*/throughput.csv` into `variant,interval,mbps`, the
/// variant being the subdirectory name (suffixed `:<flow>` when a run has
/// more than one flow). Subdirectories are visited in name order.
pub fn emit_plotdata(dir: &Path) -> Result<String> {
    let mut subdirs: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.join("throughput.csv").is_file())
        .collect();
    subdirs.sort();
    if subdirs.is_empty() {
        return Err(Error::Invalid(format!("{}: no run outputs (*/throughput.csv) found", dir.display())));
    }
    let mut out = format!("{PLOTDATA_HEADER}\n");
    for sub in subdirs {
        let path = sub.join("throughput.csv");
        let series = io::parse_throughput_csv(&io::read_text(&path)?, &path)?;
        let name = sub.file_name().unwrap_or_default().to_string_lossy().into_owned();
        for s in &series {
            let label = if series.len() > 1 { format!("{name}:{}", s.flow) } else { name.clone() };
            for (i, v) in s.mbps.iter().enumerate() {
                writeln!(out, "{label},{i},{v:.6}").unwrap();
            }
        }
    }
    Ok(out)
}
