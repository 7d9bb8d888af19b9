use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{
    Demand, NetworkModel, Scenario, SpaceTimeIndex, Supplier, TransmissionLine, VirtualLink,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BuiltinError {
    #[error("scenario id {id} outside 1..={max}")]
    OutOfRange { id: usize, max: usize },
    #[error("malformed demand profile: {0}")]
    Profile(&'static str),
}

/// Temporal link capacities per scenario, in link order (1,2), (1,3), (1,4), (3,4).
const TEMPORAL_CAPS: [[f64; 4]; 9] = [
    [0.0, 0.0, 0.0, 0.0],
    [8.0, 0.0, 0.0, 0.0],
    [10.0, 0.0, 0.0, 0.0],
    [21.0, 0.0, 0.0, 0.0],
    [21.0, 20.0, 0.0, 0.0],
    [11.0, 0.0, 11.0, 0.0],
    [11.0, 0.0, 11.0, 10.0],
    [11.0, 0.0, 11.0, 20.0],
    [21.0, 0.0, 11.0, 20.0],
];

/// One-bus market over four periods where a data center can delay load.
pub fn builtin_temporal(id: usize) -> Result<Scenario, BuiltinError> {
    if !(1..=9).contains(&id) {
        return Err(BuiltinError::OutOfRange { id, max: 9 });
    }
    let mut s = Scenario::new(4, ["1"]);
    // no physical lines, so the network model is irrelevant; transport keeps
    // the single node free of angle columns
    s.network_model = NetworkModel::Transport;
    s.suppliers.push(Supplier {
        id: "s1".into(),
        node: "1".into(),
        price: vec![10.0, 20.0, 10.0, 15.0],
        capacity: vec![50.0; 4],
        ramp_limit: Some(15.0),
    });
    s.demands.push(Demand {
        id: "dace".into(),
        node: "1".into(),
        price: vec![30.0, 60.0, 40.0, 50.0],
        capacity: vec![70.0, 25.0, 70.0, 40.0],
    });
    let pairs = [(1, 2), (1, 3), (1, 4), (3, 4)];
    for (k, &(a, b)) in pairs.iter().enumerate() {
        s.virtual_links.push(VirtualLink {
            id: format!("v{a}_{b}"),
            snd: SpaceTimeIndex::new("1", a),
            rec: SpaceTimeIndex::new("1", b),
            price: 3.0,
            capacity: TEMPORAL_CAPS[id - 1][k],
            owner: "dace".into(),
        });
    }
    Ok(s)
}

/// Line list of the 7-bus system as `(snd, rec)`: two triangles joined
/// through bus 4. Recovered by searching candidate topologies for the one
/// whose base case clears at surplus 522 with prices
/// `[3, 1, 2, 1, 14.9, 15, 15]` and 50 MWh of load.
pub const SEVEN_BUS_LINES: [(&str, &str); 8] = [
    ("1", "2"),
    ("2", "3"),
    ("1", "3"),
    ("3", "4"),
    ("4", "5"),
    ("5", "6"),
    ("6", "7"),
    ("5", "7"),
];

/// Data-center buses with their bid price and requested load.
const SEVEN_BUS_DACES: [(&str, f64, f64); 4] = [
    ("1", 10.0, 13.0),
    ("3", 10.0, 17.0),
    ("6", 15.0, 17.0),
    ("7", 15.0, 13.0),
];

/// Spatial 7-bus market at a single time.
pub fn builtin_seven_bus(id: usize) -> Result<Scenario, BuiltinError> {
    if !(1..=7).contains(&id) {
        return Err(BuiltinError::OutOfRange { id, max: 7 });
    }
    let nodes: Vec<_> = (1..=7).map(|n| n.to_string()).collect();
    let mut s = Scenario::new(1, nodes);
    s.network_model = NetworkModel::Dc;
    for (k, (a, b)) in SEVEN_BUS_LINES.iter().enumerate() {
        s.lines.push(TransmissionLine {
            id: format!("l{}", k + 1),
            snd: (*a).into(),
            rec: (*b).into(),
            susceptance: 1.0,
            flow_cap: 10.0,
            angle_cap: 100.0,
            price: 0.1,
        });
    }
    for bus in ["2", "4"] {
        s.suppliers.push(Supplier {
            id: format!("g{bus}"),
            node: bus.into(),
            price: vec![1.0],
            capacity: vec![20.0],
            ramp_limit: None,
        });
    }
    let compute = if id >= 6 { 25.0 } else { 20.0 };
    for (bus, price, cap) in SEVEN_BUS_DACES {
        s.suppliers.push(Supplier {
            id: format!("sg{bus}"),
            node: bus.into(),
            price: vec![3.0],
            capacity: vec![5.0],
            ramp_limit: None,
        });
        s.demands.push(Demand {
            id: format!("dc{bus}"),
            node: bus.into(),
            price: vec![price],
            capacity: vec![cap],
        });
        s.set_computing_cap(bus, vec![Some(compute)]);
    }
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    if id >= 2 {
        pairs.extend([("1", "7"), ("7", "1")]);
    }
    if id >= 4 {
        pairs.extend([("1", "3"), ("3", "1")]);
    }
    let cap = match id {
        2 | 4 => 5.0,
        _ => 10.0,
    };
    let price = if id == 7 { 0.0 } else { 0.3 };
    for (a, b) in pairs {
        s.virtual_links.push(VirtualLink {
            id: format!("v{a}_{b}"),
            snd: SpaceTimeIndex::new(a, 1),
            rec: SpaceTimeIndex::new(b, 1),
            price,
            capacity: cap,
            owner: format!("dc{a}"),
        });
    }
    Ok(s)
}
