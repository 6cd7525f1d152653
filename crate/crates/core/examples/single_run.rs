//! One full run of a protocol, with the lifetime milestones.
//!
//! `cargo run --example single_run -- pc-kmeanspp 3`

use std::env;

use kmax_wsn::{run_simulation, NetworkConfig, ProtocolSpec};

fn main() -> kmax_wsn::Result<()> {
    let mut args = env::args().skip(1);
    let protocol = ProtocolSpec::parse(&args.next().unwrap_or_else(|| "pc-kmeanspp".into()))?;
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);

    let result = run_simulation(&NetworkConfig::default(), protocol, seed)?;
    let show = |r: Option<usize>| r.map_or("-".to_string(), |r| r.to_string());
    println!("{protocol}, seed {seed}: {} rounds", result.rounds());
    println!("  first death  {}", show(result.first_death_round));
    println!("  half dead    {}", show(result.half_death_round));
    println!("  last death   {}", show(result.last_death_round));
    println!("  J consumed/round until first death  {:.5}", result.avg_joules_per_round);
    println!("  J residual/round until first death  {:.3}", result.avg_residual_per_round);

    for m in result.per_round.iter().step_by(250) {
        println!(
            "  round {:>5}: {:>3} alive, {:>2} heads, {:>7.3} J left",
            m.round, m.alive, m.heads, m.total_residual
        );
    }
    Ok(())
}
