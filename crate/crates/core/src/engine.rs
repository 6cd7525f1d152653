//! Round loop for the protocol family.
//!
//! Each round recomputes the sizing (`kappa_max`, `d_opt`, `P_adp`) from the
//! alive nodes, forms clusters, then charges one data frame per member:
//! members transmit to their head, heads receive and aggregate each member
//! packet and forward one packet to the sink. Nodes that run dry are marked
//! dead at the end of the round.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::Rng;

use crate::clustering::{self, Cluster, DrawRule, NodeHistory, QualityContext, WeightMode};
use crate::energy::{energy_aggregate, energy_rx, energy_tx};
use crate::error::{Error, Result};
use crate::net::{self, distance, NetworkConfig, NodeKind, SensorNode};
use crate::prob::{self, OptimalityParams};
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Election {
    LeachThreshold,
    SepThreshold,
    KmaxMeansPP,
}

/// Quality probability multiplied into the threshold draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QualityGate {
    None,
    EnergyEta,
    DistancePsi,
    CombinedPc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProtocolSpec {
    pub election: Election,
    /// Only read for [`Election::KmaxMeansPP`].
    pub weight_mode: WeightMode,
    /// Only read for the threshold elections.
    pub quality_gate: QualityGate,
}

impl ProtocolSpec {
    pub const fn threshold(election: Election, gate: QualityGate) -> Self {
        Self {
            election,
            weight_mode: WeightMode::PlainD2,
            quality_gate: gate,
        }
    }

    pub const fn means_pp(mode: WeightMode) -> Self {
        Self {
            election: Election::KmaxMeansPP,
            weight_mode: mode,
            quality_gate: QualityGate::None,
        }
    }

    pub const SEP: Self = Self::threshold(Election::SepThreshold, QualityGate::None);
    pub const LEACH: Self = Self::threshold(Election::LeachThreshold, QualityGate::None);
    pub const PETA_MEANS_PP: Self = Self::means_pp(WeightMode::EnergyEta);
    pub const PETA_SEP: Self = Self::threshold(Election::SepThreshold, QualityGate::EnergyEta);
    pub const PETA_LEACH: Self = Self::threshold(Election::LeachThreshold, QualityGate::EnergyEta);
    pub const PPSI_MEANS_PP: Self = Self::means_pp(WeightMode::DistancePsi);
    pub const PPSI_SEP: Self = Self::threshold(Election::SepThreshold, QualityGate::DistancePsi);
    pub const PPSI_LEACH: Self = Self::threshold(Election::LeachThreshold, QualityGate::DistancePsi);
    pub const PC_MEANS_PP: Self = Self::means_pp(WeightMode::CombinedPc);

    /// The nine compared variants.
    pub const MATRIX: [Self; 9] = [
        Self::SEP,
        Self::LEACH,
        Self::PETA_MEANS_PP,
        Self::PETA_SEP,
        Self::PETA_LEACH,
        Self::PPSI_MEANS_PP,
        Self::PPSI_SEP,
        Self::PPSI_LEACH,
        Self::PC_MEANS_PP,
    ];

    /// Stable short name, e.g. `peta-kmeanspp` or `ppsi-sep`.
    pub fn name(&self) -> String {
        let (prefix, base) = match self.election {
            Election::KmaxMeansPP => (
                match self.weight_mode {
                    WeightMode::PlainD2 => "",
                    WeightMode::EnergyEta => "peta-",
                    WeightMode::DistancePsi => "ppsi-",
                    WeightMode::CombinedPc => "pc-",
                },
                "kmeanspp",
            ),
            e => (
                match self.quality_gate {
                    QualityGate::None => "",
                    QualityGate::EnergyEta => "peta-",
                    QualityGate::DistancePsi => "ppsi-",
                    QualityGate::CombinedPc => "pc-",
                },
                if e == Election::SepThreshold { "sep" } else { "leach" },
            ),
        };
        format!("{prefix}{base}")
    }

    /// Parses any name produced by [`ProtocolSpec::name`].
    pub fn parse(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        let (gate, base) = [
            ("peta-", QualityGate::EnergyEta),
            ("ppsi-", QualityGate::DistancePsi),
            ("pc-", QualityGate::CombinedPc),
        ]
        .iter()
        .find_map(|(p, g)| lower.strip_prefix(p).map(|rest| (*g, rest)))
        .unwrap_or((QualityGate::None, lower.as_str()));
        let mode = match gate {
            QualityGate::None => WeightMode::PlainD2,
            QualityGate::EnergyEta => WeightMode::EnergyEta,
            QualityGate::DistancePsi => WeightMode::DistancePsi,
            QualityGate::CombinedPc => WeightMode::CombinedPc,
        };
        match base {
            "sep" => Ok(Self::threshold(Election::SepThreshold, gate)),
            "leach" => Ok(Self::threshold(Election::LeachThreshold, gate)),
            "kmeanspp" => Ok(Self::means_pp(mode)),
            _ => Err(Error::UnknownProtocol(name.to_string())),
        }
    }
}

impl fmt::Display for ProtocolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Knobs that are off in the compared protocols.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EngineOptions {
    /// Lloyd refinement passes after means++ assignment.
    pub lloyd_iterations: usize,
    pub draw_rule: DrawRule,
    /// Pins `kappa_max` instead of recomputing it each round.
    pub frozen_kappa: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    pub alive: usize,
    pub total_residual: f64,
    pub heads: usize,
    pub consumed_this_round: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub protocol: String,
    pub seed: u64,
    pub n: usize,
    pub total_initial: f64,
    pub per_round: Vec<RoundMetrics>,
    pub first_death_round: Option<usize>,
    /// First round with at most half the nodes alive.
    pub half_death_round: Option<usize>,
    pub last_death_round: Option<usize>,
    /// Mean energy spent per round over rounds `1..=first_death` (all rounds
    /// if nobody died).
    pub avg_joules_per_round: f64,
    /// Mean network residual energy over the same window.
    pub avg_residual_per_round: f64,
}

impl SimulationResult {
    pub fn from_rounds(protocol: String, seed: u64, n: usize, total_initial: f64, per_round: Vec<RoundMetrics>) -> Self {
        let first_round_where = |pred: &dyn Fn(&RoundMetrics) -> bool| per_round.iter().find(|m| pred(m)).map(|m| m.round);
        let first_death_round = first_round_where(&|m| m.alive < n);
        let half_death_round = first_round_where(&|m| 2 * m.alive <= n);
        let last_death_round = first_round_where(&|m| m.alive == 0);

        let window = first_death_round.unwrap_or(per_round.len()).min(per_round.len());
        let (avg_joules_per_round, avg_residual_per_round) = if window == 0 {
            (0.0, 0.0)
        } else {
            let rounds = &per_round[..window];
            (
                rounds.iter().map(|m| m.consumed_this_round).sum::<f64>() / window as f64,
                rounds.iter().map(|m| m.total_residual).sum::<f64>() / window as f64,
            )
        };
        Self {
            protocol,
            seed,
            n,
            total_initial,
            per_round,
            first_death_round,
            half_death_round,
            last_death_round,
            avg_joules_per_round,
            avg_residual_per_round,
        }
    }

    pub fn final_alive(&self) -> usize {
        self.per_round.last().map_or(self.n, |m| m.alive)
    }

    /// Rounds actually simulated.
    pub fn rounds(&self) -> usize {
        self.per_round.len()
    }
}

/// Election memory for one node class under threshold election.
#[derive(Debug, Clone, Default)]
struct Epoch {
    length: usize,
    start: usize,
    elected: HashSet<usize>,
}

impl Epoch {
    /// Position of `round` inside the current epoch of `length` rounds,
    /// starting a fresh epoch when the length changes or wraps.
    fn advance(&mut self, round: usize, length: usize) -> usize {
        if length != self.length {
            self.length = length;
            self.start = round;
            self.elected.clear();
        }
        let pos = (round - self.start) % length;
        if pos == 0 {
            self.elected.clear();
        }
        pos
    }
}

/// Per-class epoch memory for threshold election.
#[derive(Debug, Clone, Default)]
pub struct ElectionMemory {
    normal: Epoch,
    advanced: Epoch,
}

impl ElectionMemory {
    pub fn elected_this_epoch(&self, kind: NodeKind, id: usize) -> bool {
        self.epoch(kind).elected.contains(&id)
    }

    fn epoch(&self, kind: NodeKind) -> &Epoch {
        match kind {
            NodeKind::Normal => &self.normal,
            NodeKind::Advanced => &self.advanced,
        }
    }
}

fn epoch_length(p: f64) -> usize {
    if p <= 0.0 {
        return usize::MAX;
    }
    (1.0 / p).ceil().max(1.0) as usize
}

/// `T(s) = p / (1 - p * (r mod ceil(1/p)))`, capped at 1.
pub fn threshold_value(p: f64, pos: usize) -> f64 {
    let denom = 1.0 - p * pos as f64;
    if denom <= 0.0 {
        1.0
    } else {
        (p / denom).clamp(0.0, 1.0)
    }
}

/// Base election rates `(normal, advanced)` for a threshold protocol.
pub fn class_probabilities(election: Election, p: f64, config: &NetworkConfig) -> (f64, f64) {
    match election {
        Election::SepThreshold => {
            let nu = config.advanced_count() as f64 / config.n as f64;
            let b = f64::from(config.b);
            let scale = 1.0 + nu * b;
            ((p / scale).min(1.0), (p * (1.0 + b) / scale).min(1.0))
        }
        _ => (p.min(1.0), p.min(1.0)),
    }
}

/// Threshold election over `alive` for `round`.
///
/// Each node not yet elected in its class epoch becomes head with
/// probability `T(s)`, scaled by the gate's quality probability. If nobody
/// is elected, the eligible node with the most residual energy is taken
/// (any alive node if none is eligible).
#[allow(clippy::too_many_arguments)]
pub fn elect_heads_threshold<R: Rng + ?Sized>(
    alive: &[SensorNode],
    protocol: &ProtocolSpec,
    round: usize,
    p: f64,
    config: &NetworkConfig,
    ctx: &QualityContext,
    memory: &mut ElectionMemory,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if alive.is_empty() {
        return Err(Error::AllDead);
    }
    let (p_nrm, p_adv) = class_probabilities(protocol.election, p, config);
    let pos_nrm = memory.normal.advance(round, epoch_length(p_nrm));
    let pos_adv = memory.advanced.advance(round, epoch_length(p_adv));

    let mut heads = Vec::new();
    for node in alive {
        let (p_class, pos, epoch) = match node.kind {
            NodeKind::Normal => (p_nrm, pos_nrm, &mut memory.normal),
            NodeKind::Advanced => (p_adv, pos_adv, &mut memory.advanced),
        };
        if epoch.elected.contains(&node.id) {
            continue;
        }
        let gate = match protocol.quality_gate {
            QualityGate::None => 1.0,
            QualityGate::EnergyEta => ctx.energy_quality(node)?.p_eta,
            QualityGate::DistancePsi => ctx.distance_quality(node).p_psi,
            QualityGate::CombinedPc => ctx.energy_quality(node)?.p_eta * ctx.distance_quality(node).p_psi,
        };
        let t = threshold_value(p_class, pos) * gate;
        if rng.random::<f64>() < t {
            epoch.elected.insert(node.id);
            heads.push(node.id);
        }
    }

    if heads.is_empty() {
        let fallback = alive
            .iter()
            .filter(|s| !memory.elected_this_epoch(s.kind, s.id))
            .max_by(|a, b| a.energy_res.total_cmp(&b.energy_res).then(b.id.cmp(&a.id)))
            .or_else(|| {
                alive
                    .iter()
                    .max_by(|a, b| a.energy_res.total_cmp(&b.energy_res).then(b.id.cmp(&a.id)))
            })
            .expect("alive is non-empty");
        match fallback.kind {
            NodeKind::Normal => memory.normal.elected.insert(fallback.id),
            NodeKind::Advanced => memory.advanced.elected.insert(fallback.id),
        };
        heads.push(fallback.id);
    }
    Ok(heads)
}

/// Everything a round produced.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub metrics: RoundMetrics,
    pub clusters: Vec<Cluster>,
    pub sizing: OptimalityParams,
    pub p_adp: f64,
}

/// A deployed network stepping through rounds under one protocol.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: NetworkConfig,
    protocol: ProtocolSpec,
    options: EngineOptions,
    nodes: Vec<SensorNode>,
    round: usize,
    rng: SimRng,
    memory: ElectionMemory,
    history: HashMap<usize, NodeHistory>,
    total_initial: f64,
}

impl Simulation {
    /// Deploys from `config.rng_seed`; protocol draws use a stream named
    /// after the protocol under the same seed.
    pub fn new(config: NetworkConfig, protocol: ProtocolSpec) -> Result<Self> {
        let nodes = net::deploy(&config)?;
        Ok(Self::from_nodes(config, protocol, nodes))
    }

    pub fn from_nodes(config: NetworkConfig, protocol: ProtocolSpec, nodes: Vec<SensorNode>) -> Self {
        let rng = rng::stream(config.rng_seed, &protocol.name());
        let total_initial = nodes.iter().map(|s| s.energy_res).sum();
        Self {
            config,
            protocol,
            options: EngineOptions::default(),
            nodes,
            round: 0,
            rng,
            memory: ElectionMemory::default(),
            history: HashMap::new(),
            total_initial,
        }
    }

    pub fn with_options(mut self, options: EngineOptions) -> Self {
        self.options = options;
        self
    }

    pub fn nodes(&self) -> &[SensorNode] {
        &self.nodes
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn memory(&self) -> &ElectionMemory {
        &self.memory
    }

    pub fn total_initial(&self) -> f64 {
        self.total_initial
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|s| s.alive).count()
    }

    pub fn total_residual(&self) -> f64 {
        self.nodes.iter().map(|s| s.energy_res).sum()
    }

    /// Runs one setup + steady-state round.
    pub fn step(&mut self) -> Result<RoundOutcome> {
        let alive: Vec<SensorNode> = self.nodes.iter().filter(|s| s.alive).cloned().collect();
        if alive.is_empty() {
            return Err(Error::AllDead);
        }
        self.round += 1;
        let zeta = alive.len();

        let mut sizing = OptimalityParams::from_alive(&self.config, &alive);
        if let Some(k) = self.options.frozen_kappa {
            sizing.kappa_max = k;
        }
        let p_adp = prob::adaptive_probability(sizing.kappa_max, zeta);

        let mut ctx = QualityContext::cold_start(&alive, p_adp, sizing.d_opt);
        ctx.history = std::mem::take(&mut self.history);

        let clusters = match self.protocol.election {
            Election::KmaxMeansPP => {
                let mode = self.protocol.weight_mode;
                let k = sizing.cluster_count(zeta);
                let heads = clustering::seed_heads_with(&alive, k, mode, &ctx, self.options.draw_rule, &mut self.rng)?;
                let clusters = clustering::assign_members(&alive, &heads, sizing.d_opt, mode, &ctx)?;
                if self.options.lloyd_iterations > 0 {
                    clustering::refine(&alive, clusters, self.options.lloyd_iterations, sizing.d_opt, mode, &ctx)?
                } else {
                    clusters
                }
            }
            _ => {
                let heads = elect_heads_threshold(
                    &alive,
                    &self.protocol,
                    self.round,
                    p_adp,
                    &self.config,
                    &ctx,
                    &mut self.memory,
                    &mut self.rng,
                )?;
                clustering::assign_members(&alive, &heads, sizing.d_opt, WeightMode::PlainD2, &ctx)?
            }
        };

        let consumed = self.charge(&clusters);
        self.history = self.record_history(&clusters, sizing.d_opt)?;

        let metrics = RoundMetrics {
            round: self.round,
            alive: self.alive_count(),
            total_residual: self.total_residual(),
            heads: clusters.len(),
            consumed_this_round: consumed,
        };
        Ok(RoundOutcome {
            metrics,
            clusters,
            sizing,
            p_adp,
        })
    }

    fn index_of(&self, id: usize) -> usize {
        debug_assert_eq!(self.nodes[id - 1].id, id);
        id - 1
    }

    /// Steady-state energy for one frame per member; returns joules drawn.
    fn charge(&mut self, clusters: &[Cluster]) -> f64 {
        let radio = self.config.radio();
        let bits = self.config.packet_bits;
        let bs = self.config.bs_pos;
        let mut costs = vec![0.0; self.nodes.len()];
        for c in clusters {
            let head = self.index_of(c.head_id);
            let head_pos = self.nodes[head].pos;
            let received = (c.len() - 1) as f64;
            costs[head] += received * (energy_rx(&radio, bits) + energy_aggregate(&radio, bits))
                + energy_tx(&radio, bits, distance(head_pos, bs));
            for &m in c.member_ids.iter().filter(|&&m| m != c.head_id) {
                let i = self.index_of(m);
                costs[i] += energy_tx(&radio, bits, distance(self.nodes[i].pos, head_pos));
            }
        }
        let drawn = self
            .nodes
            .iter_mut()
            .zip(&costs)
            .map(|(s, &c)| if c > 0.0 { s.drain(c) } else { 0.0 })
            .sum();
        self.nodes.iter_mut().for_each(SensorNode::settle);
        drawn
    }

    fn record_history(&self, clusters: &[Cluster], d_opt: f64) -> Result<HashMap<usize, NodeHistory>> {
        let mut history = HashMap::new();
        for c in clusters {
            let head = &self.nodes[self.index_of(c.head_id)];
            let members = c.member_ids.iter().map(|&id| &self.nodes[id - 1]);
            let stats = prob::cluster_stats(c.id, members, head, d_opt)?;
            for &id in &c.member_ids {
                let node = &self.nodes[self.index_of(id)];
                if node.alive {
                    history.insert(id, NodeHistory { stats, d_to_head: distance(node.pos, head.pos) });
                }
            }
        }
        Ok(history)
    }

    /// Steps until every node is dead or `max_rounds` is reached.
    pub fn run(mut self, seed: u64) -> Result<SimulationResult> {
        let mut per_round = Vec::new();
        while self.round < self.config.max_rounds && self.alive_count() > 0 {
            per_round.push(self.step()?.metrics);
        }
        Ok(SimulationResult::from_rounds(
            self.protocol.name(),
            seed,
            self.nodes.len(),
            self.total_initial,
            per_round,
        ))
    }
}

/// Deploys a network under `seed` and runs `protocol` to completion.
pub fn run_simulation(config: &NetworkConfig, protocol: ProtocolSpec, seed: u64) -> Result<SimulationResult> {
    run_simulation_with(config, protocol, seed, EngineOptions::default())
}

pub fn run_simulation_with(
    config: &NetworkConfig,
    protocol: ProtocolSpec,
    seed: u64,
    options: EngineOptions,
) -> Result<SimulationResult> {
    let config = NetworkConfig { rng_seed: seed, ..config.clone() };
    Simulation::new(config, protocol)?.with_options(options).run(seed)
}
