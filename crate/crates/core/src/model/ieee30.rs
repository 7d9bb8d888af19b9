//! IEEE 30-bus network with data centers and a caller-supplied load profile.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::builtin::BuiltinError;
use super::{
    Demand, NetworkModel, Scenario, SpaceTimeIndex, Supplier, TransmissionLine, VirtualLink,
};

pub const IEEE30_BUSES: usize = 30;

/// `(from, to, reactance p.u., rating MW)`.
pub const IEEE30_BRANCHES: [(u32, u32, f64, f64); 41] = [
    (1, 2, 0.0575, 130.0),
    (1, 3, 0.1652, 130.0),
    (2, 4, 0.1737, 65.0),
    (3, 4, 0.0379, 130.0),
    (2, 5, 0.1983, 130.0),
    (2, 6, 0.1763, 65.0),
    (4, 6, 0.0414, 90.0),
    (5, 7, 0.1160, 70.0),
    (6, 7, 0.0820, 130.0),
    (6, 8, 0.0420, 32.0),
    (6, 9, 0.2080, 65.0),
    (6, 10, 0.5560, 32.0),
    (9, 11, 0.2080, 65.0),
    (9, 10, 0.1100, 65.0),
    (4, 12, 0.2560, 65.0),
    (12, 13, 0.1400, 65.0),
    (12, 14, 0.2559, 32.0),
    (12, 15, 0.1304, 32.0),
    (12, 16, 0.1987, 32.0),
    (14, 15, 0.1997, 16.0),
    (16, 17, 0.1923, 16.0),
    (15, 18, 0.2185, 16.0),
    (18, 19, 0.1292, 16.0),
    (19, 20, 0.0680, 32.0),
    (10, 20, 0.2090, 32.0),
    (10, 17, 0.0845, 32.0),
    (10, 21, 0.0749, 32.0),
    (10, 22, 0.1499, 32.0),
    (21, 22, 0.0236, 32.0),
    (15, 23, 0.2020, 16.0),
    (22, 24, 0.1790, 16.0),
    (23, 24, 0.2700, 16.0),
    (24, 25, 0.3292, 16.0),
    (25, 26, 0.3800, 16.0),
    (25, 27, 0.2087, 16.0),
    (28, 27, 0.3960, 65.0),
    (27, 29, 0.4153, 16.0),
    (27, 30, 0.6027, 16.0),
    (29, 30, 0.4533, 16.0),
    (8, 28, 0.2000, 32.0),
    (6, 28, 0.0599, 32.0),
];

/// Load buses with their base demand (MW).
pub const IEEE30_LOAD_BUSES: [(u32, f64); 21] = [
    (2, 21.7),
    (3, 2.4),
    (4, 7.6),
    (5, 94.2),
    (7, 22.8),
    (8, 30.0),
    (10, 5.8),
    (12, 11.2),
    (14, 6.2),
    (15, 8.2),
    (16, 3.5),
    (17, 9.0),
    (18, 3.2),
    (19, 9.5),
    (20, 2.2),
    (21, 17.5),
    (23, 3.2),
    (24, 8.7),
    (26, 3.5),
    (29, 2.4),
    (30, 10.6),
];

/// Default data-center buses.
pub const IEEE30_DACE_BUSES: [u32; 6] = [5, 8, 12, 17, 21, 30];

/// Requested load per load bus and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandProfile {
    pub horizon: usize,
    /// Keyed by bus number as a string; one entry per load bus.
    pub loads: BTreeMap<String, Vec<f64>>,
}

impl DemandProfile {
    /// Every load bus at `factor` times its base demand in every period.
    pub fn flat(horizon: usize, factor: f64) -> Self {
        Self::from_shape(&vec![factor; horizon])
    }

    /// Base demand scaled by a common per-period factor.
    pub fn from_shape(shape: &[f64]) -> Self {
        let loads = IEEE30_LOAD_BUSES
            .iter()
            .map(|&(bus, base)| (bus.to_string(), shape.iter().map(|f| base * f).collect()))
            .collect();
        Self {
            horizon: shape.len(),
            loads,
        }
    }

    pub fn check(&self) -> Result<(), BuiltinError> {
        if self.horizon == 0 {
            return Err(BuiltinError::Profile("horizon is zero"));
        }
        for (bus, _) in IEEE30_LOAD_BUSES {
            let Some(series) = self.loads.get(&bus.to_string()) else {
                return Err(BuiltinError::Profile("a load bus has no series"));
            };
            if series.len() != self.horizon {
                return Err(BuiltinError::Profile("series length differs from horizon"));
            }
            if series.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(BuiltinError::Profile("negative or non-finite load"));
            }
        }
        if self.loads.len() != IEEE30_LOAD_BUSES.len() {
            return Err(BuiltinError::Profile("series for a bus without load"));
        }
        Ok(())
    }
}

/// Tunable parts of the 30-bus case that the source data leaves open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ieee30Config {
    pub dace_buses: Vec<u32>,
    /// `(bus, price, capacity)`, constant over time.
    pub suppliers: Vec<(u32, f64, f64)>,
    pub load_price: f64,
    pub line_price: f64,
    /// Multiplier on the branch ratings.
    pub rating_scale: f64,
    pub angle_cap: f64,
    pub link_price: f64,
    pub link_capacity: f64,
    /// Computing cap at a data-center bus, as a multiple of its peak request.
    pub computing_cap_factor: f64,
}

impl Default for Ieee30Config {
    fn default() -> Self {
        Self {
            dace_buses: IEEE30_DACE_BUSES.to_vec(),
            suppliers: vec![(1, 20.0, 200.0), (27, 45.0, 110.0)],
            load_price: 200.0,
            line_price: 0.0,
            rating_scale: 3.0,
            angle_cap: 1000.0,
            link_price: 0.0,
            link_capacity: 20.0,
            computing_cap_factor: 1.5,
        }
    }
}

/// Builds the 30-bus market. With `with_virtual_links`, every ordered pair of
/// data-center space-time nodes `(n, t) -> (n', t')` with `t' >= t`, other
/// than a node to itself, gets a link.
pub fn builtin_ieee30(
    with_virtual_links: bool,
    profile: &DemandProfile,
    config: &Ieee30Config,
) -> Result<Scenario, BuiltinError> {
    profile.check()?;
    for bus in &config.dace_buses {
        if !IEEE30_LOAD_BUSES.iter().any(|(b, _)| b == bus) {
            return Err(BuiltinError::Profile("data-center bus carries no load"));
        }
    }
    let horizon = profile.horizon;
    let nodes: Vec<String> = (1..=IEEE30_BUSES as u32).map(|b| b.to_string()).collect();
    let mut s = Scenario::new(horizon, nodes);
    s.network_model = NetworkModel::Dc;
    for (k, &(a, b, x, rate)) in IEEE30_BRANCHES.iter().enumerate() {
        s.lines.push(TransmissionLine {
            id: format!("br{}", k + 1),
            snd: a.to_string(),
            rec: b.to_string(),
            susceptance: 1.0 / x,
            flow_cap: rate * config.rating_scale,
            angle_cap: config.angle_cap,
            price: config.line_price,
        });
    }
    for &(bus, price, cap) in &config.suppliers {
        s.suppliers.push(Supplier {
            id: format!("gen{bus}"),
            node: bus.to_string(),
            price: vec![price; horizon],
            capacity: vec![cap; horizon],
            ramp_limit: None,
        });
    }
    for (bus, _) in IEEE30_LOAD_BUSES {
        let key = bus.to_string();
        let series = profile.loads[&key].clone();
        let dace = config.dace_buses.contains(&bus);
        if dace {
            let peak = series.iter().copied().fold(0.0, f64::max);
            s.set_computing_cap(&key, vec![Some(config.computing_cap_factor * peak); horizon]);
        }
        s.demands.push(Demand {
            id: if dace {
                format!("dace{bus}")
            } else {
                format!("load{bus}")
            },
            node: key,
            price: vec![config.load_price; horizon],
            capacity: series,
        });
    }
    if with_virtual_links {
        for &a in &config.dace_buses {
            for t in 1..=horizon {
                for &b in &config.dace_buses {
                    for u in t..=horizon {
                        if a == b && t == u {
                            continue;
                        }
                        s.virtual_links.push(VirtualLink {
                            id: format!("v{a}_{t}_{b}_{u}"),
                            snd: SpaceTimeIndex::new(a.to_string(), t),
                            rec: SpaceTimeIndex::new(b.to_string(), u),
                            price: config.link_price,
                            capacity: config.link_capacity,
                            owner: format!("dace{a}"),
                        });
                    }
                }
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_count_matches_pair_enumeration() {
        let p = DemandProfile::flat(24, 1.0);
        let s = builtin_ieee30(true, &p, &Ieee30Config::default()).unwrap();
        assert_eq!(s.virtual_links.len(), 6 * 6 * 24 * 25 / 2 - 6 * 24);
        assert_eq!(s.virtual_links.len(), 10_656);
        let s = builtin_ieee30(false, &p, &Ieee30Config::default()).unwrap();
        assert!(s.virtual_links.is_empty());
    }

    #[test]
    fn every_load_bids_200() {
        let p = DemandProfile::flat(24, 1.0);
        let s = builtin_ieee30(true, &p, &Ieee30Config::default()).unwrap();
        assert_eq!(s.demands.len(), 21);
        assert!(s.demands.iter().flat_map(|d| &d.price).all(|&x| x == 200.0));
    }

    #[test]
    fn base_load_total() {
        let total: f64 = IEEE30_LOAD_BUSES.iter().map(|(_, l)| l).sum();
        assert!((total - 283.4).abs() < 1e-9);
    }

    #[test]
    fn malformed_profile_rejected() {
        let mut p = DemandProfile::flat(24, 1.0);
        p.loads.get_mut("5").unwrap().pop();
        assert!(builtin_ieee30(false, &p, &Ieee30Config::default()).is_err());
        let mut p = DemandProfile::flat(24, 1.0);
        p.loads.remove("30");
        assert!(builtin_ieee30(false, &p, &Ieee30Config::default()).is_err());
    }
}
