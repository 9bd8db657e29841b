//! Running scenario files and writing their results.

use std::path::Path;

use chanocc_core::sim::{run_scenario, ScenarioOutput};

use crate::error::Result;
use crate::io;
use crate::scenario::ScenarioFile;

/// Loads `config`, optionally overrides its seed, runs it and writes the
/// result files into `out_dir`.
pub fn run_config_file(config: &Path, seed: Option<u64>, out_dir: &Path) -> Result<ScenarioOutput> {
    let mut file = ScenarioFile::load(config)?;
    if let Some(seed) = seed {
        file.seed = seed;
    }
    let base = config.parent().unwrap_or(Path::new("."));
    let output = run_scenario(&file.resolve(base)?)?;
    write_outputs(out_dir, &output)?;
    Ok(output)
}

/// `throughput.csv` and `summary.csv` always; `decisions.csv` and
/// `survey.csv` when the run recorded them.
pub fn write_outputs(out_dir: &Path, output: &ScenarioOutput) -> Result<()> {
    io::write_text(&out_dir.join("throughput.csv"), &io::throughput_csv(&output.series))?;
    io::write_text(&out_dir.join("summary.csv"), &io::summary_csv(&output.series, &output.flows))?;
    if !output.decisions.is_empty() {
        io::write_text(&out_dir.join("decisions.csv"), &io::decisions_csv(&output.decisions))?;
    }
    if !output.survey.is_empty() {
        io::write_text(&out_dir.join("survey.csv"), &io::survey_csv(&output.survey))?;
    }
    Ok(())
}
