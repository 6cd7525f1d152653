//! First-order radio energy model.
//!
//! Transmission over `d` meters costs `l*eps_elec + l*eps_fs*d^2` up to the
//! crossover distance `d0 = sqrt(eps_fs / eps_mp)` and `l*eps_elec +
//! l*eps_mp*d^4` beyond it. Receiving and aggregating a packet each cost
//! `l*eps_elec`. The branch is always chosen by the actual distance, so a
//! head that happens to sit within `d0` of the sink pays free-space cost.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Electronics energy per bit, J/bit.
    pub eps_elec: f64,
    /// Free-space amplifier, J/bit/m^2.
    pub eps_fs: f64,
    /// Multi-path amplifier, J/bit/m^4.
    pub eps_mp: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            eps_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
        }
    }
}

/// Crossover distance `d0` between the free-space and multi-path regimes.
pub fn distance_threshold(params: &RadioParams) -> f64 {
    (params.eps_fs / params.eps_mp).sqrt()
}

/// Energy to send `bits` over `d` meters.
pub fn energy_tx(params: &RadioParams, bits: u32, d: f64) -> f64 {
    let bits = f64::from(bits);
    let electronics = bits * params.eps_elec;
    if d <= distance_threshold(params) {
        electronics + bits * params.eps_fs * d * d
    } else {
        electronics + bits * params.eps_mp * d.powi(4)
    }
}

pub fn energy_rx(params: &RadioParams, bits: u32) -> f64 {
    f64::from(bits) * params.eps_elec
}

/// Data aggregation costs the same as receiving, per packet.
pub fn energy_aggregate(params: &RadioParams, bits: u32) -> f64 {
    energy_rx(params, bits)
}
