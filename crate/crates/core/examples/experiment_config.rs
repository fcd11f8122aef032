//! Running a JSON experiment and reading back the reports.

use lorot::cli::{run, ExperimentConfig};
use std::path::Path;

fn main() -> lorot::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/flat_tcd0.json");
    let config = ExperimentConfig::load(&path)?;
    println!("{} checks on a {:?} grid", config.checks.len(), config.space.resolution);
    let out = std::env::temp_dir().join("lorot-experiment-example");
    let summary = run(&path, Some(&out), 0)?;
    for c in &summary.checks {
        println!("{:<16} {} -> {}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.report.display());
    }
    Ok(())
}
