//! Parses `plan.conf`, runs it into a scratch directory and prints the
//! summary file.
//!
//! `cargo run --example experiment_plan -- [path/to/plan.conf]`

use std::{env, fs};

use kmax_wsn::harness::{compare, parse_config, run_plan, Metric, SUMMARY_FILE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/plan.conf").into());
    let mut plan = parse_config(&fs::read_to_string(&path)?)?;
    plan.output_dir = env::temp_dir().join("kmax-wsn-example");

    let summary = run_plan(&plan)?;
    print!("{}", fs::read_to_string(plan.output_dir.join(SUMMARY_FILE))?);
    println!("{}", compare(&summary, Metric::FirstDeath, "pc-kmeanspp", "sep")?);
    Ok(())
}
