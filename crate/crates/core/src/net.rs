//! Sensor field, node population and deployment.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::energy::RadioParams;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Euclidean distance in meters.
pub fn distance(p: Position, q: Position) -> f64 {
    (p.x - q.x).hypot(p.y - q.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Normal,
    Advanced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorNode {
    /// 1-based id.
    pub id: usize,
    pub pos: Position,
    pub kind: NodeKind,
    pub energy_init: f64,
    pub energy_res: f64,
    pub alive: bool,
}

impl SensorNode {
    pub fn new(id: usize, pos: Position, kind: NodeKind, energy_init: f64) -> Self {
        Self {
            id,
            pos,
            kind,
            energy_init,
            energy_res: energy_init,
            alive: energy_init > 0.0,
        }
    }

    /// Deducts up to `joules` and returns what was actually drawn. The node
    /// is not marked dead here; see [`SensorNode::settle`].
    pub fn drain(&mut self, joules: f64) -> f64 {
        let drawn = joules.min(self.energy_res).max(0.0);
        self.energy_res -= drawn;
        if self.energy_res < 0.0 {
            self.energy_res = 0.0;
        }
        drawn
    }

    /// Marks the node dead once its battery is exhausted.
    pub fn settle(&mut self) {
        if self.energy_res <= 0.0 {
            self.energy_res = 0.0;
            self.alive = false;
        }
    }
}

/// Field geometry, heterogeneity and radio constants for one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub n: usize,
    /// Side length of the square field, meters.
    pub a: f64,
    pub bs_pos: Position,
    /// Fraction of advanced nodes.
    pub nu: f64,
    /// Advanced nodes start with `eps0 * (1 + b)`.
    pub b: u32,
    pub eps0: f64,
    pub packet_bits: u32,
    pub eps_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    pub max_rounds: usize,
    pub rng_seed: u64,
}

impl Default for NetworkConfig {
    /// First-order radio literature values: 100 nodes on a 100 m field with
    /// the sink at the center, 10% advanced nodes at twice the energy.
    fn default() -> Self {
        Self {
            n: 100,
            a: 100.0,
            bs_pos: Position::new(50.0, 50.0),
            nu: 0.1,
            b: 1,
            eps0: 0.5,
            packet_bits: 4000,
            eps_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            max_rounds: 3000,
            rng_seed: 1,
        }
    }
}

impl NetworkConfig {
    /// Config with the sink placed at the center of an `a`-sized field.
    pub fn with_field(a: f64) -> Self {
        Self {
            a,
            bs_pos: Position::new(a / 2.0, a / 2.0),
            ..Self::default()
        }
    }

    pub fn radio(&self) -> RadioParams {
        RadioParams {
            eps_elec: self.eps_elec,
            eps_fs: self.eps_fs,
            eps_mp: self.eps_mp,
        }
    }

    pub fn advanced_count(&self) -> usize {
        (self.nu * self.n as f64).round() as usize
    }

    pub fn initial_energy(&self, kind: NodeKind) -> f64 {
        match kind {
            NodeKind::Normal => self.eps0,
            NodeKind::Advanced => self.eps0 * (1.0 + f64::from(self.b)),
        }
    }

    /// `n * eps0 * (1 + nu_eff * b)` with `nu_eff = round(nu * n) / n`.
    pub fn total_initial_energy(&self) -> f64 {
        let nu_eff = self.advanced_count() as f64 / self.n as f64;
        self.n as f64 * self.eps0 * (1.0 + nu_eff * f64::from(self.b))
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
            }
        }
        if self.n == 0 {
            return Err(Error::invalid("n", "must be at least 1"));
        }
        positive("a", self.a)?;
        if !(0.0..=1.0).contains(&self.nu) {
            return Err(Error::invalid("nu", format!("must lie in [0, 1], got {}", self.nu)));
        }
        if self.b < 1 {
            return Err(Error::invalid("b", "must be a positive integer"));
        }
        positive("eps0", self.eps0)?;
        if self.packet_bits == 0 {
            return Err(Error::invalid("packet_bits", "must be > 0"));
        }
        positive("eps_elec", self.eps_elec)?;
        positive("eps_fs", self.eps_fs)?;
        positive("eps_mp", self.eps_mp)?;
        if !(self.bs_pos.x.is_finite() && self.bs_pos.y.is_finite()) {
            return Err(Error::invalid("bs", "coordinates must be finite"));
        }
        Ok(())
    }
}

/// Places `n` nodes uniformly over the field.
///
/// Positions come first from the `deploy` stream, then a shuffle of the ids
/// from the same stream; the first `round(nu * n)` shuffled ids become
/// advanced nodes, so heterogeneity carries no spatial bias.
pub fn deploy(config: &NetworkConfig) -> Result<Vec<SensorNode>> {
    config.validate()?;
    let mut rng = rng::stream(config.rng_seed, "deploy");
    let positions: Vec<Position> = (0..config.n)
        .map(|_| {
            let x = rng.random_range(0.0..=config.a);
            let y = rng.random_range(0.0..=config.a);
            Position::new(x, y)
        })
        .collect();

    let mut order: Vec<usize> = (0..config.n).collect();
    order.shuffle(&mut rng);
    let mut kinds = vec![NodeKind::Normal; config.n];
    for &idx in order.iter().take(config.advanced_count()) {
        kinds[idx] = NodeKind::Advanced;
    }

    Ok(positions
        .into_iter()
        .zip(kinds)
        .enumerate()
        .map(|(i, (pos, kind))| SensorNode::new(i + 1, pos, kind, config.initial_energy(kind)))
        .collect())
}
