//! kappa_max-bounded k-means++ cluster formation.
//!
//! Heads are physical nodes. The first head is drawn uniformly (plain mode)
//! or by quality weight; every further head is drawn with probability
//! proportional to `w(s) * D(s, nearest head)^2`, where `w` is `P_eta`,
//! `P_psi` at distance `D`, or their product. Members then join either
//! the nearest head or, for the energy-aware modes, the head maximizing
//! `phi = P_eta(head) * P_psi(member -> head)`.

use std::collections::HashMap;
use std::fmt;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::net::{distance, Position, SensorNode};
use crate::prob::{self, ClusterStats, DistanceQuality, EnergyQuality};

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub id: usize,
    pub head_id: usize,
    /// Sorted ids, head included.
    pub member_ids: Vec<usize>,
    pub centroid: Position,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.member_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_ids.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    PlainD2,
    EnergyEta,
    DistancePsi,
    CombinedPc,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::PlainD2 => "plain-d2",
            WeightMode::EnergyEta => "energy-eta",
            WeightMode::DistancePsi => "distance-psi",
            WeightMode::CombinedPc => "combined-pc",
        })
    }
}

/// How the quality weight enters the subsequent-head draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DrawRule {
    /// `w(s) * D^2`
    #[default]
    ScaleD2,
    /// `w(s)` alone; ablation.
    ReplaceD2,
}

/// Where a node stood at the end of the previous round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeHistory {
    pub stats: ClusterStats,
    pub d_to_head: f64,
}

/// Previous-round state the quality probabilities are evaluated against.
#[derive(Debug, Clone)]
pub struct QualityContext {
    pub p_adp: f64,
    pub d_opt: f64,
    /// Used for nodes without history: network-average energy and `d_opt`
    /// as both distance and spread.
    pub cold: ClusterStats,
    pub history: HashMap<usize, NodeHistory>,
}

impl QualityContext {
    /// Context with no history, e.g. for the first round.
    pub fn cold_start(alive: &[SensorNode], p_adp: f64, d_opt: f64) -> Self {
        let avg = if alive.is_empty() {
            0.0
        } else {
            alive.iter().map(|s| s.energy_res).sum::<f64>() / alive.len() as f64
        };
        Self {
            p_adp,
            d_opt,
            cold: ClusterStats::cold_start(avg, d_opt),
            history: HashMap::new(),
        }
    }

    fn lookup(&self, id: usize) -> (ClusterStats, f64) {
        match self.history.get(&id) {
            Some(h) => (h.stats, h.d_to_head),
            None => (self.cold, self.d_opt),
        }
    }

    pub fn energy_quality(&self, node: &SensorNode) -> Result<EnergyQuality> {
        prob::energy_quality(node, &self.lookup(node.id).0)
    }

    pub fn distance_quality(&self, node: &SensorNode) -> DistanceQuality {
        let (stats, d) = self.lookup(node.id);
        prob::distance_quality(d, self.d_opt, &stats)
    }

    /// First-head weight for `node` under `mode`, from its previous-round
    /// position, without the node-independent `P_adp` factor.
    pub fn weight(&self, node: &SensorNode, mode: WeightMode) -> Result<f64> {
        Ok(match mode {
            WeightMode::PlainD2 => 1.0,
            WeightMode::EnergyEta => self.energy_quality(node)?.p_eta,
            WeightMode::DistancePsi => self.distance_quality(node).p_psi,
            WeightMode::CombinedPc => {
                self.energy_quality(node)?.p_eta * self.distance_quality(node).p_psi
            }
        })
    }
}

/// Draws an index with probability proportional to `weights`, or `None`
/// when every weight is zero.
fn draw<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Option<usize> {
    WeightedIndex::new(weights).ok().map(|dist| dist.sample(rng))
}

fn sq_dist(a: &SensorNode, b: &SensorNode) -> f64 {
    let d = distance(a.pos, b.pos);
    d * d
}

/// Chooses `k` distinct heads among `alive`.
pub fn seed_heads<R: Rng + ?Sized>(
    alive: &[SensorNode],
    k: usize,
    mode: WeightMode,
    ctx: &QualityContext,
    rng: &mut R,
) -> Result<Vec<usize>> {
    seed_heads_with(alive, k, mode, ctx, DrawRule::ScaleD2, rng)
}

pub fn seed_heads_with<R: Rng + ?Sized>(
    alive: &[SensorNode],
    k: usize,
    mode: WeightMode,
    ctx: &QualityContext,
    rule: DrawRule,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if alive.len() < k {
        return Err(Error::InsufficientAlive {
            needed: k,
            available: alive.len(),
        });
    }
    if k == 0 {
        return Ok(Vec::new());
    }

    let quality: Vec<f64> = alive
        .iter()
        .map(|s| ctx.weight(s, mode))
        .collect::<Result<_>>()?;

    let first = match mode {
        WeightMode::PlainD2 => rng.random_range(0..alive.len()),
        WeightMode::CombinedPc => {
            let full: Vec<f64> = quality.iter().map(|w| ctx.p_adp * w).collect();
            draw(&full, rng).unwrap_or_else(|| rng.random_range(0..alive.len()))
        }
        _ => draw(&quality, rng).unwrap_or_else(|| rng.random_range(0..alive.len())),
    };

    // Later draws score distance quality against the head a candidate would
    // join now, i.e. its nearest chosen head, using last round's spread.
    let energy: Vec<f64> = match mode {
        WeightMode::EnergyEta | WeightMode::CombinedPc => alive
            .iter()
            .map(|s| ctx.energy_quality(s).map(|q| q.p_eta))
            .collect::<Result<_>>()?,
        _ => vec![1.0; alive.len()],
    };
    let uses_psi = matches!(mode, WeightMode::DistancePsi | WeightMode::CombinedPc);
    let weight = |i: usize, d2: f64| {
        let psi = if uses_psi {
            let (stats, _) = ctx.lookup(alive[i].id);
            prob::distance_quality(d2.sqrt(), ctx.d_opt, &stats).p_psi
        } else {
            1.0
        };
        energy[i] * psi
    };

    let mut chosen = vec![false; alive.len()];
    chosen[first] = true;
    let mut heads = vec![alive[first].id];
    // Squared distance to the nearest chosen head, updated per pick.
    let mut d2: Vec<f64> = alive.iter().map(|s| sq_dist(s, &alive[first])).collect();

    while heads.len() < k {
        let weighted: Vec<f64> = match rule {
            DrawRule::ScaleD2 => d2.iter().enumerate().map(|(i, &d)| d * weight(i, d)).collect(),
            DrawRule::ReplaceD2 => d2
                .iter()
                .enumerate()
                .map(|(i, &d)| if chosen[i] { 0.0 } else { weight(i, d) })
                .collect(),
        };
        let pick = draw(&weighted, rng).or_else(|| draw(&d2, rng)).unwrap_or_else(|| {
            // Every remaining node coincides with a head.
            let free: Vec<usize> = (0..alive.len()).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        });
        chosen[pick] = true;
        heads.push(alive[pick].id);
        for (i, s) in alive.iter().enumerate() {
            d2[i] = if chosen[i] { 0.0 } else { d2[i].min(sq_dist(s, &alive[pick])) };
        }
    }

    Ok(heads)
}

fn mean_position<'a>(nodes: impl IntoIterator<Item = &'a SensorNode>) -> Position {
    let (sx, sy, n) = nodes
        .into_iter()
        .fold((0.0, 0.0, 0usize), |(x, y, n), s| (x + s.pos.x, y + s.pos.y, n + 1));
    Position::new(sx / n as f64, sy / n as f64)
}

/// Index of the nearest head; ties go to the lowest head id.
fn nearest_head(node: &SensorNode, heads: &[&SensorNode]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, h) in heads.iter().enumerate() {
        let d = distance(node.pos, h.pos);
        if d < best_d || (d == best_d && h.id < heads[best].id) {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Partitions `alive` into one cluster per head.
pub fn assign_members(
    alive: &[SensorNode],
    heads: &[usize],
    d_opt: f64,
    mode: WeightMode,
    ctx: &QualityContext,
) -> Result<Vec<Cluster>> {
    let index: HashMap<usize, &SensorNode> = alive.iter().map(|s| (s.id, s)).collect();
    let head_nodes: Vec<&SensorNode> = heads
        .iter()
        .map(|id| {
            index
                .get(id)
                .copied()
                .ok_or(Error::DeadNode(*id))
        })
        .collect::<Result<_>>()?;
    let is_head: HashMap<usize, usize> = heads.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut owner: Vec<usize> = alive
        .iter()
        .map(|s| is_head.get(&s.id).copied().unwrap_or_else(|| nearest_head(s, &head_nodes)))
        .collect();

    if matches!(mode, WeightMode::EnergyEta | WeightMode::CombinedPc) && heads.len() > 1 {
        owner = stability_assignment(alive, &head_nodes, &owner, &is_head, d_opt, ctx)?;
    }

    Ok(build_clusters(alive, &head_nodes, &owner))
}

/// Re-associates every non-head with the head maximizing `phi`, scoring
/// each candidate against the nearest-head cluster it would join.
fn stability_assignment(
    alive: &[SensorNode],
    heads: &[&SensorNode],
    provisional: &[usize],
    is_head: &HashMap<usize, usize>,
    d_opt: f64,
    ctx: &QualityContext,
) -> Result<Vec<usize>> {
    let mut forming: Vec<Vec<&SensorNode>> = vec![Vec::new(); heads.len()];
    for (s, &h) in alive.iter().zip(provisional) {
        forming[h].push(s);
    }
    let stats: Vec<ClusterStats> = heads
        .iter()
        .zip(&forming)
        .enumerate()
        .map(|(i, (h, members))| prob::cluster_stats(i + 1, members.iter().copied(), h, d_opt))
        .collect::<Result<_>>()?;
    let head_eta: Vec<f64> = heads
        .iter()
        .map(|h| ctx.energy_quality(h).map(|q| q.p_eta))
        .collect::<Result<_>>()?;

    Ok(alive
        .iter()
        .zip(provisional)
        .map(|(s, &current)| {
            if is_head.contains_key(&s.id) {
                return current;
            }
            let mut best = (f64::NEG_INFINITY, f64::INFINITY, usize::MAX, current);
            for (i, h) in heads.iter().enumerate() {
                let d = distance(s.pos, h.pos);
                let st = if i == current { stats[i] } else { with_member(stats[i], d, d_opt) };
                let phi = head_eta[i] * prob::distance_quality(d, d_opt, &st).p_psi;
                let better = phi > best.0
                    || (phi == best.0 && (d < best.1 || (d == best.1 && h.id < best.2)));
                if better {
                    best = (phi, d, h.id, i);
                }
            }
            best.3
        })
        .collect())
}

/// Geometry of a cluster after a node `d` meters from its head joins.
fn with_member(mut stats: ClusterStats, d: f64, d_opt: f64) -> ClusterStats {
    stats.n_members += 1;
    stats.delta_cap += (d - d_opt) * (d - d_opt);
    stats.delta_coeff = (stats.delta_cap / stats.n_members as f64).sqrt();
    stats.sum_sq_dist += d * d;
    stats
}

fn build_clusters(alive: &[SensorNode], heads: &[&SensorNode], owner: &[usize]) -> Vec<Cluster> {
    let mut members: Vec<Vec<&SensorNode>> = vec![Vec::new(); heads.len()];
    for (s, &h) in alive.iter().zip(owner) {
        members[h].push(s);
    }
    heads
        .iter()
        .zip(members)
        .enumerate()
        .map(|(i, (h, mut m))| {
            m.sort_by_key(|s| s.id);
            Cluster {
                id: i + 1,
                head_id: h.id,
                centroid: mean_position(m.iter().copied()),
                member_ids: m.iter().map(|s| s.id).collect(),
            }
        })
        .collect()
}

/// Arithmetic mean of each cluster's member positions.
pub fn recenter(clusters: &[Cluster], alive: &[SensorNode]) -> Vec<Position> {
    let index: HashMap<usize, &SensorNode> = alive.iter().map(|s| (s.id, s)).collect();
    clusters
        .iter()
        .map(|c| mean_position(c.member_ids.iter().filter_map(|id| index.get(id).copied())))
        .collect()
}

/// Lloyd-style refinement: move each head to the member nearest its
/// cluster centroid and reassign, until heads stop moving or `max_iter`
/// passes have run.
pub fn refine(
    alive: &[SensorNode],
    mut clusters: Vec<Cluster>,
    max_iter: usize,
    d_opt: f64,
    mode: WeightMode,
    ctx: &QualityContext,
) -> Result<Vec<Cluster>> {
    let index: HashMap<usize, &SensorNode> = alive.iter().map(|s| (s.id, s)).collect();
    for _ in 0..max_iter {
        let centroids = recenter(&clusters, alive);
        let heads: Vec<usize> = clusters
            .iter()
            .zip(&centroids)
            .map(|(c, &o)| {
                c.member_ids
                    .iter()
                    .copied()
                    .min_by(|a, b| {
                        let da = distance(index[a].pos, o);
                        let db = distance(index[b].pos, o);
                        da.total_cmp(&db).then(a.cmp(b))
                    })
                    .unwrap_or(c.head_id)
            })
            .collect();
        if heads.iter().zip(&clusters).all(|(h, c)| *h == c.head_id) {
            break;
        }
        clusters = assign_members(alive, &heads, d_opt, mode, ctx)?;
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NodeKind;
    use crate::rng;
    use proptest::prelude::*;

    fn line(xs: &[f64]) -> Vec<SensorNode> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| SensorNode::new(i + 1, Position::new(x, 0.0), NodeKind::Normal, 0.5))
            .collect()
    }

    fn ctx(alive: &[SensorNode]) -> QualityContext {
        QualityContext::cold_start(alive, 0.1, 16.0)
    }

    #[test]
    fn single_candidate_is_head() {
        let alive = line(&[3.0]);
        let mut r = rng::stream(1, "t");
        for mode in [WeightMode::PlainD2, WeightMode::EnergyEta, WeightMode::DistancePsi, WeightMode::CombinedPc] {
            assert_eq!(seed_heads(&alive, 1, mode, &ctx(&alive), &mut r).unwrap(), vec![1]);
        }
    }

    #[test]
    fn insufficient_alive() {
        let alive = line(&[0.0, 1.0]);
        let mut r = rng::stream(1, "t");
        assert!(matches!(
            seed_heads(&alive, 3, WeightMode::PlainD2, &ctx(&alive), &mut r),
            Err(Error::InsufficientAlive { needed: 3, available: 2 })
        ));
    }

    #[test]
    fn zero_quality_node_never_seeded() {
        let mut alive = line(&[0.0, 1.0, 2.0, 10.0, 20.0]);
        alive[3].energy_res = 0.0;
        let ctx = ctx(&alive);
        let mut r = rng::stream(3, "t");
        for _ in 0..2000 {
            let heads = seed_heads(&alive, 3, WeightMode::CombinedPc, &ctx, &mut r).unwrap();
            assert!(!heads.contains(&4), "{heads:?}");
        }
    }

    #[test]
    fn heads_are_distinct_and_k() {
        let alive = line(&[0.0, 0.0, 0.0, 5.0]);
        let ctx = ctx(&alive);
        let mut r = rng::stream(5, "t");
        for _ in 0..200 {
            let mut heads = seed_heads(&alive, 4, WeightMode::PlainD2, &ctx, &mut r).unwrap();
            heads.sort_unstable();
            assert_eq!(heads, vec![1, 2, 3, 4]);
        }
    }

    #[test]
    fn replace_rule_ignores_geometry() {
        let alive = line(&[0.0, 0.0, 50.0]);
        let ctx = ctx(&alive);
        let mut r = rng::stream(5, "t");
        let mut coincident = 0;
        for _ in 0..3000 {
            let h = seed_heads_with(&alive, 2, WeightMode::EnergyEta, &ctx, DrawRule::ReplaceD2, &mut r).unwrap();
            if h.contains(&1) && h.contains(&2) {
                coincident += 1;
            }
        }
        // With D^2 scaling the co-located pair can never both be heads.
        assert!(coincident > 500, "{coincident}");
    }

    #[test]
    fn one_head_takes_everyone() {
        let alive = line(&[0.0, 4.0, 9.0, 30.0]);
        let c = assign_members(&alive, &[3], 16.0, WeightMode::PlainD2, &ctx(&alive)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].member_ids, vec![1, 2, 3, 4]);
        assert_eq!(c[0].head_id, 3);
    }

    #[test]
    fn nearest_head_and_tie_break() {
        let alive = line(&[0.0, 10.0, 2.0, 5.0]);
        let c = assign_members(&alive, &[1, 2], 16.0, WeightMode::PlainD2, &ctx(&alive)).unwrap();
        assert_eq!(c[0].member_ids, vec![1, 3, 4]);
        assert_eq!(c[1].member_ids, vec![2]);
        // node 4 at x = 5 is equidistant; listing the heads in reverse must not change the owner
        let c = assign_members(&alive, &[2, 1], 16.0, WeightMode::PlainD2, &ctx(&alive)).unwrap();
        assert_eq!(c[1].head_id, 1);
        assert_eq!(c[1].member_ids, vec![1, 3, 4]);
    }

    #[test]
    fn stability_assignment_prefers_energetic_head() {
        // Member 3 sits between heads 1 and 2, slightly nearer the drained head 1.
        let mut alive = line(&[0.0, 40.0, 19.0]);
        alive[0].energy_res = 0.05;
        let ctx = QualityContext::cold_start(&alive, 0.1, 30.0);
        let plain = assign_members(&alive, &[1, 2], 30.0, WeightMode::PlainD2, &ctx).unwrap();
        assert_eq!(plain[0].member_ids, vec![1, 3]);
        let phi = assign_members(&alive, &[1, 2], 30.0, WeightMode::EnergyEta, &ctx).unwrap();
        assert_eq!(phi[1].member_ids, vec![2, 3]);
    }

    #[test]
    fn recenter_examples() {
        let alive = vec![
            SensorNode::new(1, Position::new(0.0, 0.0), NodeKind::Normal, 0.5),
            SensorNode::new(2, Position::new(2.0, 2.0), NodeKind::Normal, 0.5),
            SensorNode::new(3, Position::new(7.0, 1.0), NodeKind::Normal, 0.5),
        ];
        let clusters = vec![
            Cluster { id: 1, head_id: 1, member_ids: vec![1, 2], centroid: Position::new(0.0, 0.0) },
            Cluster { id: 2, head_id: 3, member_ids: vec![3], centroid: Position::new(0.0, 0.0) },
        ];
        let c = recenter(&clusters, &alive);
        assert_eq!(c[0], Position::new(1.0, 1.0));
        assert_eq!(c[1], Position::new(7.0, 1.0));
    }

    #[test]
    fn refine_moves_head_to_center() {
        let alive = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let ctx = ctx(&alive);
        let start = assign_members(&alive, &[1], 16.0, WeightMode::PlainD2, &ctx).unwrap();
        let out = refine(&alive, start, 5, 16.0, WeightMode::PlainD2, &ctx).unwrap();
        assert_eq!(out[0].head_id, 3);
    }

    fn scatter() -> impl Strategy<Value = Vec<SensorNode>> {
        proptest::collection::vec((0.0f64..100.0, 0.0f64..100.0, 0.01f64..0.5), 1..40).prop_map(|pts| {
            pts.into_iter()
                .enumerate()
                .map(|(i, (x, y, e))| SensorNode {
                    energy_res: e,
                    ..SensorNode::new(i + 1, Position::new(x, y), NodeKind::Normal, 0.5)
                })
                .collect()
        })
    }

    fn any_mode() -> impl Strategy<Value = WeightMode> {
        prop_oneof![
            Just(WeightMode::PlainD2),
            Just(WeightMode::EnergyEta),
            Just(WeightMode::DistancePsi),
            Just(WeightMode::CombinedPc),
        ]
    }

    proptest! {
        #[test]
        fn clusters_partition_alive(alive in scatter(), k in 1usize..8, mode in any_mode(), seed: u64) {
            let k = k.min(alive.len());
            let ctx = QualityContext::cold_start(&alive, 0.2, 12.0);
            let mut r = rng::stream(seed, "p");
            let heads = seed_heads(&alive, k, mode, &ctx, &mut r).unwrap();
            let mut again = rng::stream(seed, "p");
            prop_assert_eq!(&heads, &seed_heads(&alive, k, mode, &ctx, &mut again).unwrap());

            let clusters = assign_members(&alive, &heads, 12.0, mode, &ctx).unwrap();
            prop_assert_eq!(clusters.len(), k);
            let mut seen: Vec<usize> = clusters.iter().flat_map(|c| c.member_ids.clone()).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, alive.iter().map(|s| s.id).collect::<Vec<_>>());
            for c in &clusters {
                prop_assert!(c.member_ids.contains(&c.head_id));
            }

            if mode == WeightMode::PlainD2 || mode == WeightMode::DistancePsi {
                let pos: HashMap<usize, Position> = alive.iter().map(|s| (s.id, s.pos)).collect();
                for c in &clusters {
                    for m in &c.member_ids {
                        let own = distance(pos[m], pos[&c.head_id]);
                        for h in &heads {
                            prop_assert!(own <= distance(pos[m], pos[h]));
                        }
                    }
                }
            }
        }
    }
}
