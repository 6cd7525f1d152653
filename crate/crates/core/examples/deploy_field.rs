//! Deploys the canonical 100-node field and prints its make-up.

use kmax_wsn::net::deploy;
use kmax_wsn::prob::{mean_sink_distance, OptimalityParams};
use kmax_wsn::{NetworkConfig, NodeKind};

fn main() -> kmax_wsn::Result<()> {
    let config = NetworkConfig { rng_seed: 7, ..NetworkConfig::default() };
    let nodes = deploy(&config)?;

    let advanced = nodes.iter().filter(|s| s.kind == NodeKind::Advanced).count();
    println!("{} nodes, {advanced} advanced", nodes.len());
    println!("initial energy {:.2} J", config.total_initial_energy());

    let d_bs = mean_sink_distance(&nodes, config.bs_pos);
    let sizing = OptimalityParams::new(&config, d_bs);
    println!("mean distance to sink {d_bs:.2} m");
    println!("kappa_max {:.3}, d_opt {:.2} m", sizing.kappa_max, sizing.d_opt);

    for s in nodes.iter().filter(|s| s.kind == NodeKind::Advanced) {
        println!("  advanced #{:<3} at ({:5.1}, {:5.1})  {:.2} J", s.id, s.pos.x, s.pos.y, s.energy_init);
    }
    Ok(())
}
