use std::fs;
use std::path::Path;

use serde_json::json;

use super::config::ProblemConfig;
use super::run::RunOutcome;
use crate::error::Result;

pub const EXPORTED_FILES: [&str; 5] = ["controls.csv", "trajectory.csv", "report.json", "bounds.json", "config.json"];

/// Writes the run artifacts into `dir`. Files for stages that did not run are
/// omitted.
pub fn export(cfg: &ProblemConfig, out: &RunOutcome, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = vec![];
    let mut put = |name: &str, text: String| -> Result<()> {
        fs::write(dir.join(name), text)?;
        written.push(name.to_string());
        Ok(())
    };
    if let Some(c) = out.controls() {
        put("controls.csv", c.to_csv())?;
    }
    if let Some(t) = &out.trajectory {
        put("trajectory.csv", t.to_csv())?;
    }
    put("report.json", serde_json::to_string_pretty(&out.report)?)?;
    put("bounds.json", serde_json::to_string_pretty(&json!({ "bounds": out.report.bounds }))?)?;
    put("config.json", serde_json::to_string_pretty(cfg)?)?;
    Ok(written)
}
