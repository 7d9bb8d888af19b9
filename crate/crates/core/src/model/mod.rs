//! Market instance types and scenario validation.
//!
//! A [`Scenario`] is a complete space-time market: the physical network,
//! bids from suppliers and demands, the virtual links offered by flexible
//! consumers and the per space-time computing capacities of data centers.
//! Times are 1-based throughout the public surface (`1..=horizon`); per-time
//! vectors are stored 0-based.

mod builtin;
mod ieee30;

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use builtin::{builtin_seven_bus, builtin_temporal, BuiltinError, SEVEN_BUS_LINES};
pub use ieee30::{
    builtin_ieee30, DemandProfile, Ieee30Config, IEEE30_BRANCHES, IEEE30_BUSES, IEEE30_DACE_BUSES,
    IEEE30_LOAD_BUSES,
};

/// A `(node, time)` pair addressing one balance constraint and one price.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceTimeIndex {
    pub node: String,
    /// 1-based time index.
    pub time: usize,
}

impl SpaceTimeIndex {
    pub fn new(node: impl Into<String>, time: usize) -> Self {
        Self {
            node: node.into(),
            time,
        }
    }
}

impl fmt::Display for SpaceTimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.node, self.time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Supplier {
    pub id: String,
    pub node: String,
    /// Bid price per time ($/MWh).
    pub price: Vec<f64>,
    /// Offered capacity per time (MWh).
    pub capacity: Vec<f64>,
    /// Bound on `|p[t+1] - p[t]|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demand {
    pub id: String,
    /// Hub node where the bid load is requested.
    pub node: String,
    pub price: Vec<f64>,
    pub capacity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmissionLine {
    pub id: String,
    pub snd: String,
    pub rec: String,
    pub susceptance: f64,
    pub flow_cap: f64,
    /// Physical limit on the angle difference (radians).
    pub angle_cap: f64,
    pub price: f64,
}

impl TransmissionLine {
    /// `min(flow_cap / susceptance, angle_cap)`.
    pub fn effective_angle_cap(&self) -> f64 {
        let by_flow = self.flow_cap / self.susceptance;
        if by_flow < self.angle_cap {
            by_flow
        } else {
            self.angle_cap
        }
    }
}

/// A non-physical pathway that moves load from one space-time node to
/// another. Shifting `delta` along the link serves load bid at `snd` at `rec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VirtualLink {
    pub id: String,
    pub snd: SpaceTimeIndex,
    pub rec: SpaceTimeIndex,
    pub price: f64,
    pub capacity: f64,
    /// Id of the demand offering this flexibility.
    pub owner: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkModel {
    /// Linearized power flow with phase angles.
    #[default]
    Dc,
    /// Flows bounded by line capacity only.
    Transport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Horizon length `T`.
    #[serde(rename = "T")]
    pub horizon: usize,
    pub nodes: Vec<String>,
    #[serde(default)]
    pub lines: Vec<TransmissionLine>,
    #[serde(default)]
    pub suppliers: Vec<Supplier>,
    #[serde(default)]
    pub demands: Vec<Demand>,
    #[serde(default)]
    pub virtual_links: Vec<VirtualLink>,
    /// Per-node computing capacity series. A missing node key, or a `null`
    /// entry, means the capacity is unbounded.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub computing_cap: BTreeMap<String, Vec<Option<f64>>>,
    #[serde(default)]
    pub network_model: NetworkModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_node: Option<String>,
}

/// One broken invariant: which entity, and which rule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl Violation {
    fn new(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

impl Scenario {
    /// An empty market over `horizon` periods on the given nodes.
    pub fn new(horizon: usize, nodes: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            horizon,
            nodes: nodes.into_iter().map(Into::into).collect(),
            lines: Vec::new(),
            suppliers: Vec::new(),
            demands: Vec::new(),
            virtual_links: Vec::new(),
            computing_cap: BTreeMap::new(),
            network_model: NetworkModel::Dc,
            reference_node: None,
        }
    }

    pub fn node_index(&self, node: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == node)
    }

    pub fn demand_index(&self, id: &str) -> Option<usize> {
        self.demands.iter().position(|d| d.id == id)
    }

    pub fn supplier_index(&self, id: &str) -> Option<usize> {
        self.suppliers.iter().position(|s| s.id == id)
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.virtual_links.iter().position(|v| v.id == id)
    }

    pub fn line_index(&self, id: &str) -> Option<usize> {
        self.lines.iter().position(|l| l.id == id)
    }

    /// Computing capacity at `node`, 1-based `time`; `f64::INFINITY` when unbounded.
    pub fn computing_cap_at(&self, node: &str, time: usize) -> f64 {
        self.computing_cap
            .get(node)
            .and_then(|caps| caps.get(time.wrapping_sub(1)).copied().flatten())
            .unwrap_or(f64::INFINITY)
    }

    pub fn set_computing_cap(&mut self, node: &str, caps: Vec<Option<f64>>) {
        self.computing_cap.insert(node.into(), caps);
    }

    pub fn has_ramping(&self) -> bool {
        self.horizon > 1 && self.suppliers.iter().any(|s| s.ramp_limit.is_some())
    }

    /// Number of `(node, time)` pairs.
    pub fn space_time_len(&self) -> usize {
        self.nodes.len() * self.horizon
    }

    /// Flat index of a space-time node, `node * T + (time - 1)`.
    pub fn st_index(&self, node: usize, time: usize) -> usize {
        node * self.horizon + (time - 1)
    }

    pub fn st_of(&self, idx: &SpaceTimeIndex) -> Option<usize> {
        let n = self.node_index(&idx.node)?;
        if idx.time == 0 || idx.time > self.horizon {
            return None;
        }
        Some(self.st_index(n, idx.time))
    }

    /// Checks every type invariant; an empty result means the scenario is
    /// well formed.
    pub fn validate(&self) -> Vec<Violation> {
        validate(self)
    }
}

fn check_series(
    out: &mut Vec<Violation>,
    entity: &str,
    what: &str,
    series: &[f64],
    horizon: usize,
    nonneg: bool,
) {
    if series.len() != horizon {
        out.push(Violation::new(
            entity,
            format!("{what} has length {} but T = {horizon}", series.len()),
        ));
    }
    for (t, v) in series.iter().enumerate() {
        if !v.is_finite() {
            out.push(Violation::new(
                entity,
                format!("{what} at time {} is not finite", t + 1),
            ));
        } else if nonneg && *v < 0.0 {
            out.push(Violation::new(
                entity,
                format!("{what} at time {} is negative", t + 1),
            ));
        }
    }
}

fn check_unique<'a>(
    out: &mut Vec<Violation>,
    class: &str,
    ids: impl Iterator<Item = &'a String>,
) {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id.as_str()) {
            out.push(Violation::new(
                format!("{class} {id}"),
                "duplicated id",
            ));
        }
    }
}

/// Returns every violated invariant of `scenario`; empty iff well formed.
pub fn validate(scenario: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let t_len = scenario.horizon;
    if t_len == 0 {
        out.push(Violation::new("scenario", "horizon T must be at least 1"));
    }
    if scenario.nodes.is_empty() {
        out.push(Violation::new("scenario", "node set is empty"));
    }
    check_unique(&mut out, "node", scenario.nodes.iter());
    check_unique(&mut out, "supplier", scenario.suppliers.iter().map(|s| &s.id));
    check_unique(&mut out, "demand", scenario.demands.iter().map(|d| &d.id));
    check_unique(&mut out, "line", scenario.lines.iter().map(|l| &l.id));
    check_unique(
        &mut out,
        "virtual link",
        scenario.virtual_links.iter().map(|v| &v.id),
    );

    let has_node = |n: &str| scenario.node_index(n).is_some();
    let dc = scenario.network_model == NetworkModel::Dc;

    for s in &scenario.suppliers {
        let entity = format!("supplier {}", s.id);
        if !has_node(&s.node) {
            out.push(Violation::new(&entity, format!("unknown node {}", s.node)));
        }
        check_series(&mut out, &entity, "price", &s.price, t_len, false);
        check_series(&mut out, &entity, "capacity", &s.capacity, t_len, true);
        if let Some(r) = s.ramp_limit {
            if !(r >= 0.0) || !r.is_finite() {
                out.push(Violation::new(&entity, "ramp limit must be finite and >= 0"));
            }
        }
    }

    for d in &scenario.demands {
        let entity = format!("demand {}", d.id);
        if !has_node(&d.node) {
            out.push(Violation::new(&entity, format!("unknown node {}", d.node)));
        }
        check_series(&mut out, &entity, "price", &d.price, t_len, false);
        check_series(&mut out, &entity, "capacity", &d.capacity, t_len, true);
    }

    for l in &scenario.lines {
        let entity = format!("line {}", l.id);
        for end in [&l.snd, &l.rec] {
            if !has_node(end) {
                out.push(Violation::new(&entity, format!("unknown node {end}")));
            }
        }
        if l.snd == l.rec {
            out.push(Violation::new(&entity, "sending and receiving node coincide"));
        }
        if !(l.flow_cap >= 0.0) || !l.flow_cap.is_finite() {
            out.push(Violation::new(&entity, "flow capacity must be finite and >= 0"));
        }
        if !(l.price >= 0.0) || !l.price.is_finite() {
            out.push(Violation::new(&entity, "bid price must be finite and >= 0"));
        }
        if dc {
            if !(l.susceptance > 0.0) || !l.susceptance.is_finite() {
                out.push(Violation::new(&entity, "susceptance must be finite and > 0"));
            }
            if !(l.angle_cap > 0.0) {
                out.push(Violation::new(&entity, "angle cap must be > 0"));
            }
            if l.susceptance > 0.0 && !(l.effective_angle_cap() > 0.0) {
                out.push(Violation::new(
                    &entity,
                    "effective angle cap min(flow_cap / B, angle_cap) must be > 0",
                ));
            }
        }
    }

    for v in &scenario.virtual_links {
        let entity = format!("virtual link {}", v.id);
        for (end, label) in [(&v.snd, "sending"), (&v.rec, "receiving")] {
            if !has_node(&end.node) {
                out.push(Violation::new(
                    &entity,
                    format!("{label} node {} unknown", end.node),
                ));
            }
            if end.time == 0 || end.time > t_len {
                out.push(Violation::new(
                    &entity,
                    format!("{label} time {} outside 1..={t_len}", end.time),
                ));
            }
        }
        if v.rec.time < v.snd.time {
            out.push(Violation::new(
                &entity,
                "receiving time precedes sending time",
            ));
        }
        if v.snd == v.rec {
            out.push(Violation::new(&entity, "sending and receiving space-time nodes coincide"));
        }
        if !(v.price >= 0.0) || !v.price.is_finite() {
            out.push(Violation::new(&entity, "bid price must be finite and >= 0"));
        }
        if !(v.capacity >= 0.0) || !v.capacity.is_finite() {
            out.push(Violation::new(&entity, "capacity must be finite and >= 0"));
        }
        match scenario.demands.iter().find(|d| d.id == v.owner) {
            None => out.push(Violation::new(&entity, format!("unknown owner {}", v.owner))),
            Some(owner) if owner.node != v.snd.node => out.push(Violation::new(
                &entity,
                format!(
                    "sending node {} differs from owner hub node {}",
                    v.snd.node, owner.node
                ),
            )),
            Some(_) => {}
        }
    }

    for (node, caps) in &scenario.computing_cap {
        let entity = format!("computing cap {node}");
        if !has_node(node) {
            out.push(Violation::new(&entity, format!("unknown node {node}")));
        }
        if caps.len() != t_len {
            out.push(Violation::new(
                &entity,
                format!("series has length {} but T = {t_len}", caps.len()),
            ));
        }
        for (t, c) in caps.iter().enumerate() {
            if let Some(c) = c {
                if !(*c >= 0.0) {
                    out.push(Violation::new(
                        &entity,
                        format!("capacity at time {} must be >= 0", t + 1),
                    ));
                }
            }
        }
    }

    if let Some(r) = &scenario.reference_node {
        if !has_node(r) {
            out.push(Violation::new("reference node", format!("unknown node {r}")));
        }
    }
    out
}
