//! Per-packet radio cost against distance, around the regime crossover.

use kmax_wsn::energy::{distance_threshold, energy_aggregate, energy_rx, energy_tx};
use kmax_wsn::RadioParams;

const BITS: u32 = 4000;

fn main() {
    let radio = RadioParams::default();
    let d0 = distance_threshold(&radio);
    println!("crossover d0 = {d0:.3} m");
    println!("rx {:.3e} J, aggregate {:.3e} J", energy_rx(&radio, BITS), energy_aggregate(&radio, BITS));
    println!("{:>8}  {:>12}  regime", "d (m)", "tx (J)");
    for d in [0.0, 10.0, 25.0, 50.0, 75.0, d0, 100.0, 125.0, 150.0] {
        let regime = if d <= d0 { "free space" } else { "multi-path" };
        println!("{d:>8.2}  {:>12.4e}  {regime}", energy_tx(&radio, BITS, d));
    }
}
