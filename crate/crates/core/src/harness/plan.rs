use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ExperimentPlan;
use super::stats::SummaryTable;
use crate::engine::{run_simulation, ProtocolSpec, RoundMetrics, SimulationResult};
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
const ROUNDS_HEADER: [&str; 5] = ["round", "alive", "total_residual_j", "heads", "consumed_j"];

/// `<out>/runs/<protocol>-seed<seed>.csv`
pub fn run_csv_path(out: &Path, protocol: &ProtocolSpec, seed: u64) -> PathBuf {
    out.join("runs").join(format!("{}-seed{}.csv", protocol.name(), seed))
}

pub fn write_rounds_csv(path: &Path, rounds: &[RoundMetrics]) -> Result<()> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err)?;
    w.write_record(ROUNDS_HEADER).map_err(csv_err)?;
    for m in rounds {
        w.write_record([
            m.round.to_string(),
            m.alive.to_string(),
            m.total_residual.to_string(),
            m.heads.to_string(),
            m.consumed_this_round.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_rounds_csv(path: &Path) -> Result<Vec<RoundMetrics>> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(ROUNDS_HEADER) {
        return Err(Error::Parse { line: 1, msg: format!("{}: unexpected header", path.display()) });
    }
    r.records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(csv_err)?;
            let bad = || Error::Parse { line: i + 2, msg: format!("{}: malformed row", path.display()) };
            let field = |k: usize| rec.get(k).ok_or_else(bad);
            Ok(RoundMetrics {
                round: field(0)?.parse().map_err(|_| bad())?,
                alive: field(1)?.parse().map_err(|_| bad())?,
                total_residual: field(2)?.parse().map_err(|_| bad())?,
                heads: field(3)?.parse().map_err(|_| bad())?,
                consumed_this_round: field(4)?.parse().map_err(|_| bad())?,
            })
        })
        .collect()
}

/// Runs every (protocol, seed) pair on the global rayon pool.
pub fn run_plan(plan: &ExperimentPlan) -> Result<SummaryTable> {
    execute(plan)
}

/// Runs the plan on `jobs` worker threads.
pub fn run_plan_with_jobs(plan: &ExperimentPlan, jobs: usize) -> Result<SummaryTable> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| execute(plan))
}

fn execute(plan: &ExperimentPlan) -> Result<SummaryTable> {
    plan.validate()?;
    let runs_dir = plan.output_dir.join("runs");
    fs::create_dir_all(&runs_dir).map_err(|e| Error::io(&runs_dir, e))?;

    let pairs: Vec<(ProtocolSpec, u64)> = plan
        .protocols
        .iter()
        .flat_map(|p| plan.seeds.iter().map(move |s| (*p, *s)))
        .collect();
    // par_iter().collect() keeps input order, so the summary never depends
    // on scheduling.
    let results: Vec<SimulationResult> = pairs
        .par_iter()
        .map(|&(protocol, seed)| {
            let result = run_simulation(&plan.config, protocol, seed)?;
            write_rounds_csv(&run_csv_path(&plan.output_dir, &protocol, seed), &result.per_round)?;
            Ok(result)
        })
        .collect::<Result<_>>()?;

    let summary = SummaryTable::from_results(plan.config.clone(), &results);
    let path = plan.output_dir.join(SUMMARY_FILE);
    let mut f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    f.write_all(summary.to_csv(&plan.to_config_text()).as_bytes())
        .map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}
