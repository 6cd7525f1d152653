//! Cluster optimality and the cluster-head election probabilities.
//!
//! `kappa_max` and `d_opt` size the clusters for a round. `P_adp` adapts the
//! base election rate to the number of alive nodes. `P_eta` scores a node's
//! energy against its own battery and its cluster average; `P_psi` scores
//! its placement against `d_opt` and the spread of its cluster. `P_c` is
//! `P_adp * P_eta * P_psi` and `phi` its node-dependent part.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::net::{distance, NetworkConfig, Position, SensorNode};

/// Round-level sizing derived from the alive population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalityParams {
    /// Fractional optimal cluster count.
    pub kappa_max: f64,
    pub d_opt: f64,
    /// Representative head-to-sink distance.
    pub d_bs: f64,
}

impl OptimalityParams {
    pub fn new(config: &NetworkConfig, d_bs: f64) -> Self {
        Self {
            kappa_max: optimal_clusters(config, d_bs),
            d_opt: optimal_distance(config, d_bs),
            d_bs,
        }
    }

    /// Uses the mean distance from the alive nodes to the sink as `d_bs`.
    pub fn from_alive<'a>(
        config: &NetworkConfig,
        alive: impl IntoIterator<Item = &'a SensorNode>,
    ) -> Self {
        Self::new(config, mean_sink_distance(alive, config.bs_pos))
    }

    /// Integral number of clusters to form among `zeta` alive nodes.
    pub fn cluster_count(&self, zeta: usize) -> usize {
        let k = self.kappa_max.round();
        let k = if k.is_finite() && k >= 1.0 { k as usize } else { 1 };
        k.min(zeta.max(1))
    }
}

/// Smallest `d_bs` accepted; keeps the sizing finite when every alive node
/// sits on the sink.
const MIN_SINK_DISTANCE: f64 = 1e-6;

pub fn mean_sink_distance<'a>(nodes: impl IntoIterator<Item = &'a SensorNode>, bs: Position) -> f64 {
    let (sum, count) = nodes
        .into_iter()
        .fold((0.0, 0usize), |(s, c), node| (s + distance(node.pos, bs), c + 1));
    if count == 0 {
        return MIN_SINK_DISTANCE;
    }
    (sum / count as f64).max(MIN_SINK_DISTANCE)
}

/// `d_opt = (eps_mp * a^2 / (2*pi*n*eps_fs))^(1/4) * d_bs`.
pub fn optimal_distance(config: &NetworkConfig, d_bs: f64) -> f64 {
    let ratio = config.eps_mp * config.a * config.a / (2.0 * PI * config.n as f64 * config.eps_fs);
    ratio.powf(0.25) * d_bs
}

/// `kappa_max = sqrt(n*eps_fs / (2*pi*eps_mp)) * a / d_bs^2`.
pub fn optimal_clusters(config: &NetworkConfig, d_bs: f64) -> f64 {
    (config.n as f64 * config.eps_fs / (2.0 * PI * config.eps_mp)).sqrt() * config.a / (d_bs * d_bs)
}

/// `P_adp = kappa_max / zeta`, capped at 1 once fewer nodes than
/// `kappa_max` remain.
pub fn adaptive_probability(kappa_max: f64, zeta: usize) -> f64 {
    debug_assert!(zeta >= 1);
    (kappa_max / zeta as f64).min(1.0)
}

/// Per-cluster aggregates used by the quality probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterStats {
    pub cluster_id: usize,
    /// Members including the head.
    pub n_members: usize,
    pub eps_avg: f64,
    /// Sum of squared deviations of member distances from `d_opt`.
    pub delta_cap: f64,
    /// `sqrt(delta_cap / n_members)`.
    pub delta_coeff: f64,
    pub sum_sq_dist: f64,
}

impl ClusterStats {
    /// Stand-in used before any cluster has formed: the network-wide
    /// average energy, and `d_opt` as the spread.
    pub fn cold_start(eps_avg: f64, d_opt: f64) -> Self {
        Self {
            cluster_id: 0,
            n_members: 1,
            eps_avg,
            delta_cap: d_opt * d_opt,
            delta_coeff: d_opt,
            sum_sq_dist: 0.0,
        }
    }
}

/// Computes the statistics of a cluster; `members` must include `head`.
pub fn cluster_stats<'a>(
    cluster_id: usize,
    members: impl IntoIterator<Item = &'a SensorNode>,
    head: &SensorNode,
    d_opt: f64,
) -> Result<ClusterStats> {
    let mut n = 0usize;
    let mut energy = 0.0;
    let mut delta_cap = 0.0;
    let mut sum_sq = 0.0;
    for node in members {
        let d = distance(node.pos, head.pos);
        n += 1;
        energy += node.energy_res;
        delta_cap += (d - d_opt) * (d - d_opt);
        sum_sq += d * d;
    }
    if n == 0 {
        return Err(Error::EmptyCluster);
    }
    Ok(ClusterStats {
        cluster_id,
        n_members: n,
        eps_avg: energy / n as f64,
        delta_cap,
        delta_coeff: (delta_cap / n as f64).sqrt(),
        sum_sq_dist: sum_sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyQuality {
    pub p_xi: f64,
    pub p_rho: f64,
    pub p_eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceQuality {
    pub p_gamma: f64,
    pub p_sigma: f64,
    pub p_psi: f64,
}

/// Energy quality of `node` relative to its cluster average and its own
/// initial charge.
pub fn energy_quality(node: &SensorNode, stats: &ClusterStats) -> Result<EnergyQuality> {
    if !node.alive {
        return Err(Error::DeadNode(node.id));
    }
    let p_xi = if stats.eps_avg > 0.0 && node.energy_res < stats.eps_avg {
        node.energy_res / stats.eps_avg
    } else {
        1.0
    };
    let p_rho = (node.energy_res / node.energy_init).clamp(0.0, 1.0);
    Ok(EnergyQuality {
        p_xi,
        p_rho,
        p_eta: p_rho * p_xi,
    })
}

/// Distance quality of a node `d` meters from a head.
pub fn distance_quality(d: f64, d_opt: f64, stats: &ClusterStats) -> DistanceQuality {
    let p_gamma = if d > d_opt { d_opt / d } else { 1.0 };
    // A query point outside the cluster can exceed the cluster's own sum.
    let p_sigma = if stats.sum_sq_dist > 0.0 && d > stats.delta_coeff {
        (d * d / stats.sum_sq_dist).min(1.0)
    } else {
        1.0
    };
    DistanceQuality {
        p_gamma,
        p_sigma,
        p_psi: p_gamma * p_sigma,
    }
}

/// Returns `(p_c, phi)`.
pub fn election_probability(p_adp: f64, p_eta: f64, p_psi: f64) -> (f64, f64) {
    let phi = p_eta * p_psi;
    (p_adp * phi, phi)
}

/// Every probability for one node against one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElectionProbabilities {
    pub p_adp: f64,
    pub p_xi: f64,
    pub p_rho: f64,
    pub p_eta: f64,
    pub p_gamma: f64,
    pub p_sigma: f64,
    pub p_psi: f64,
    pub p_c: f64,
    pub phi: f64,
}

impl ElectionProbabilities {
    pub fn compose(p_adp: f64, energy: EnergyQuality, dist: DistanceQuality) -> Self {
        let (p_c, phi) = election_probability(p_adp, energy.p_eta, dist.p_psi);
        Self {
            p_adp,
            p_xi: energy.p_xi,
            p_rho: energy.p_rho,
            p_eta: energy.p_eta,
            p_gamma: dist.p_gamma,
            p_sigma: dist.p_sigma,
            p_psi: dist.p_psi,
            p_c,
            phi,
        }
    }

    pub fn evaluate(
        node: &SensorNode,
        d_to_head: f64,
        p_adp: f64,
        d_opt: f64,
        stats: &ClusterStats,
    ) -> Result<Self> {
        Ok(Self::compose(
            p_adp,
            energy_quality(node, stats)?,
            distance_quality(d_to_head, d_opt, stats),
        ))
    }
}
