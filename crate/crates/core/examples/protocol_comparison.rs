//! Runs the full protocol matrix over a handful of seeds and tests each
//! variant against SEP on first-death round.

use kmax_wsn::harness::{welch, Metric, SummaryTable};
use kmax_wsn::{run_simulation, NetworkConfig, ProtocolSpec};
use rayon::prelude::*;

const SEEDS: u64 = 8;

fn main() -> kmax_wsn::Result<()> {
    let config = NetworkConfig::default();
    let jobs: Vec<(ProtocolSpec, u64)> = ProtocolSpec::MATRIX
        .iter()
        .flat_map(|&p| (1..=SEEDS).map(move |s| (p, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(p, s)| run_simulation(&config, p, s))
        .collect::<kmax_wsn::Result<Vec<_>>>()?;
    let summary = SummaryTable::from_results(config, &results);

    let sep = summary.row("sep")?;
    let baseline = (sep.get(Metric::FirstDeath), sep.samples);
    println!("{:<16} {:>9} {:>7} {:>11}", "protocol", "first", "sd", "conf > sep");
    for row in &summary.rows {
        let fd = row.get(Metric::FirstDeath);
        let c = welch(Metric::FirstDeath, (fd, row.samples), baseline);
        println!("{:<16} {:>9.1} {:>7.1} {:>11.3}", row.protocol, fd.mean, fd.sd, c.confidence);
    }
    Ok(())
}
