//! Every election probability for the members of one small cluster.

use kmax_wsn::prob::{adaptive_probability, cluster_stats, optimal_distance, ElectionProbabilities};
use kmax_wsn::net::distance;
use kmax_wsn::{NetworkConfig, NodeKind, Position, SensorNode};

fn main() -> kmax_wsn::Result<()> {
    let config = NetworkConfig::default();
    let d_opt = optimal_distance(&config, 75.0);
    let p_adp = adaptive_probability(6.22, 100);

    let mut cluster = Vec::new();
    for (id, (x, y, energy)) in [(50.0, 50.0, 0.45), (55.0, 52.0, 0.30), (40.0, 45.0, 0.50), (70.0, 60.0, 0.20), (48.0, 75.0, 0.95)]
        .into_iter()
        .enumerate()
    {
        let kind = if energy > 0.5 { NodeKind::Advanced } else { NodeKind::Normal };
        let mut s = SensorNode::new(id + 1, Position::new(x, y), kind, config.initial_energy(kind));
        s.energy_res = energy;
        cluster.push(s);
    }
    let head = &cluster[0];
    let stats = cluster_stats(1, &cluster, head, d_opt)?;
    println!(
        "d_opt {d_opt:.2} m, p_adp {p_adp:.4}, eps_avg {:.3} J, delta {:.2} m",
        stats.eps_avg, stats.delta_coeff
    );

    println!("{:>3} {:>7} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>8} {:>6}", "id", "d", "xi", "rho", "eta", "gamma", "sigma", "psi", "p_c", "phi");
    for s in &cluster {
        let d = distance(s.pos, head.pos);
        let p = ElectionProbabilities::evaluate(s, d, p_adp, d_opt, &stats)?;
        println!(
            "{:>3} {d:>7.2} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>8.5} {:>6.3}",
            s.id, p.p_xi, p.p_rho, p.p_eta, p.p_gamma, p.p_sigma, p.p_psi, p.p_c, p.phi
        );
    }
    Ok(())
}
