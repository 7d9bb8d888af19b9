//! Assembles the clearing LP from a [`Scenario`].
//!
//! Every physical line `l` is split into two directed edges, `2l` running
//! `snd -> rec` and `2l + 1` running back, each with a nonnegative flow.
//! Balance rows read `inflow + supply + sends = outflow + demand + receipts`
//! and are stored as `inflow + supply + sends - outflow - demand - receipts = 0`,
//! so their duals are the nodal prices.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::lp::{LinearProgram, Sense};
use crate::model::{NetworkModel, Scenario, Violation};

const INF: f64 = f64::INFINITY;

/// Semantic identity of an LP column. Times are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VarKind {
    Demand { demand: usize, t: usize },
    Supply { supplier: usize, t: usize },
    Flow { line: usize, forward: bool, t: usize },
    Angle { node: usize, t: usize },
    Shift { link: usize },
    /// Load of the disaggregated consumer served at `node`.
    DisaggLoad { node: usize, t: usize },
}

/// Semantic identity of an LP row. Times are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowKind {
    Balance { node: usize, t: usize },
    DcFlow { line: usize, t: usize },
    AngleUpper { line: usize, t: usize },
    AngleLower { line: usize, t: usize },
    ComputeLower { node: usize, t: usize },
    ComputeUpper { node: usize, t: usize },
    RampUp { supplier: usize, t: usize },
    RampDown { supplier: usize, t: usize },
    AggregateCap { t: usize },
}

/// Two-way map between LP indices and their meaning.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IndexMap {
    pub vars: Vec<VarKind>,
    pub rows: Vec<RowKind>,
    var_lookup: BTreeMap<VarKind, usize>,
    row_lookup: BTreeMap<RowKind, usize>,
}

impl IndexMap {
    fn push_var(&mut self, kind: VarKind) {
        let prev = self.var_lookup.insert(kind, self.vars.len());
        debug_assert!(prev.is_none());
        self.vars.push(kind);
    }

    fn push_row(&mut self, kind: RowKind) {
        let prev = self.row_lookup.insert(kind, self.rows.len());
        debug_assert!(prev.is_none());
        self.rows.push(kind);
    }

    pub fn var(&self, kind: VarKind) -> Option<usize> {
        self.var_lookup.get(&kind).copied()
    }

    pub fn row(&self, kind: RowKind) -> Option<usize> {
        self.row_lookup.get(&kind).copied()
    }

    pub fn demand(&self, demand: usize, t: usize) -> Option<usize> {
        self.var(VarKind::Demand { demand, t })
    }

    pub fn supply(&self, supplier: usize, t: usize) -> Option<usize> {
        self.var(VarKind::Supply { supplier, t })
    }

    pub fn flow(&self, line: usize, forward: bool, t: usize) -> Option<usize> {
        self.var(VarKind::Flow { line, forward, t })
    }

    pub fn angle(&self, node: usize, t: usize) -> Option<usize> {
        self.var(VarKind::Angle { node, t })
    }

    pub fn shift(&self, link: usize) -> Option<usize> {
        self.var(VarKind::Shift { link })
    }

    pub fn balance(&self, node: usize, t: usize) -> Option<usize> {
        self.row(RowKind::Balance { node, t })
    }

    pub fn compute_lower(&self, node: usize, t: usize) -> Option<usize> {
        self.row(RowKind::ComputeLower { node, t })
    }

    pub fn compute_upper(&self, node: usize, t: usize) -> Option<usize> {
        self.row(RowKind::ComputeUpper { node, t })
    }
}

/// An LP together with the map back to scenario entities.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance {
    pub lp: LinearProgram,
    pub index: IndexMap,
}

impl LpInstance {
    pub fn num_vars(&self) -> usize {
        self.lp.num_cols()
    }

    pub fn num_rows(&self) -> usize {
        self.lp.num_rows()
    }

    pub fn count_vars(&self, pred: impl Fn(&VarKind) -> bool) -> usize {
        self.index.vars.iter().filter(|k| pred(k)).count()
    }

    pub fn count_rows(&self, pred: impl Fn(&RowKind) -> bool) -> usize {
        self.index.rows.iter().filter(|k| pred(k)).count()
    }

    /// LP-safe name of column `j`.
    pub fn var_name(&self, scenario: &Scenario, j: usize) -> String {
        let raw = match self.index.vars[j] {
            VarKind::Demand { demand, t } => format!("d_{}_{t}", scenario.demands[demand].id),
            VarKind::Supply { supplier, t } => {
                format!("p_{}_{t}", scenario.suppliers[supplier].id)
            }
            VarKind::Flow { line, forward, t } => format!(
                "f_{}_{}_{t}",
                scenario.lines[line].id,
                if forward { "fw" } else { "bw" }
            ),
            VarKind::Angle { node, t } => format!("theta_{}_{t}", scenario.nodes[node]),
            VarKind::Shift { link } => format!("delta_{}", scenario.virtual_links[link].id),
            VarKind::DisaggLoad { node, t } => format!("dn_{}_{t}", scenario.nodes[node]),
        };
        sanitize(&raw)
    }

    /// LP-safe name of row `i`.
    pub fn row_name(&self, scenario: &Scenario, i: usize) -> String {
        let raw = match self.index.rows[i] {
            RowKind::Balance { node, t } => format!("bal_{}_{t}", scenario.nodes[node]),
            RowKind::DcFlow { line, t } => format!("dc_{}_{t}", scenario.lines[line].id),
            RowKind::AngleUpper { line, t } => format!("angup_{}_{t}", scenario.lines[line].id),
            RowKind::AngleLower { line, t } => format!("anglo_{}_{t}", scenario.lines[line].id),
            RowKind::ComputeLower { node, t } => format!("cmplo_{}_{t}", scenario.nodes[node]),
            RowKind::ComputeUpper { node, t } => format!("cmpup_{}_{t}", scenario.nodes[node]),
            RowKind::RampUp { supplier, t } => {
                format!("rampup_{}_{t}", scenario.suppliers[supplier].id)
            }
            RowKind::RampDown { supplier, t } => {
                format!("rampdn_{}_{t}", scenario.suppliers[supplier].id)
            }
            RowKind::AggregateCap { t } => format!("aggcap_{t}"),
        };
        sanitize(&raw)
    }
}

fn sanitize(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("scenario is invalid ({} violations, first: {})", .0.len(), .0[0])]
    Invalid(Vec<Violation>),
    #[error("disaggregation precondition violated: {0}")]
    Precondition(String),
}

/// Connected components of the line graph, one reference node each.
/// The reference is `scenario.reference_node` inside its component and the
/// first listed node elsewhere.
pub fn reference_nodes(scenario: &Scenario) -> Vec<usize> {
    let n = scenario.nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut a: usize) -> usize {
        while p[a] != a {
            p[a] = p[p[a]];
            a = p[a];
        }
        a
    }
    for l in &scenario.lines {
        if let (Some(a), Some(b)) = (scenario.node_index(&l.snd), scenario.node_index(&l.rec)) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                parent[hi] = lo;
            }
        }
    }
    let preferred = scenario
        .reference_node
        .as_deref()
        .and_then(|r| scenario.node_index(r));
    let mut refs = Vec::new();
    for v in 0..n {
        if find(&mut parent, v) == v {
            let pick = match preferred {
                Some(p) if find(&mut parent, p) == v => p,
                _ => v,
            };
            refs.push(pick);
        }
    }
    refs.sort_unstable();
    refs
}

struct Disagg {
    demand: usize,
    t: usize,
    nodes: Vec<usize>,
}

struct Resolved {
    demand_node: Vec<usize>,
    supplier_node: Vec<usize>,
    line_ends: Vec<(usize, usize)>,
    link_ends: Vec<(usize, usize)>,
}

fn resolve(s: &Scenario) -> Resolved {
    let node = |x: &str| s.node_index(x).expect("validated node");
    Resolved {
        demand_node: s.demands.iter().map(|d| node(&d.node)).collect(),
        supplier_node: s.suppliers.iter().map(|p| node(&p.node)).collect(),
        line_ends: s.lines.iter().map(|l| (node(&l.snd), node(&l.rec))).collect(),
        link_ends: s
            .virtual_links
            .iter()
            .map(|v| (s.st_of(&v.snd).expect("validated"), s.st_of(&v.rec).expect("validated")))
            .collect(),
    }
}

/// Builds the clearing LP. Fails when the scenario does not validate.
pub fn build(scenario: &Scenario) -> Result<LpInstance, BuildError> {
    let v = scenario.validate();
    if !v.is_empty() {
        return Err(BuildError::Invalid(v));
    }
    Ok(assemble(scenario, None))
}

/// Builds the load-disaggregation LP for a market with a single flexible
/// consumer: per-node served loads `d_n` replace the consumer's bid and its
/// virtual links, capped jointly by the requested quantity.
///
/// Preconditions: at most one demand owns links; all of its links leave its
/// hub at one time `t0` for distinct other nodes at `t0`, with price 0 and
/// capacity at least the requested load; the consumer is alone at its hub;
/// the hub's computing cap at `t0` is finite and at least the requested load,
/// and no other computing cap is finite.
pub fn build_disaggregation(scenario: &Scenario) -> Result<LpInstance, BuildError> {
    let v = scenario.validate();
    if !v.is_empty() {
        return Err(BuildError::Invalid(v));
    }
    let pre = |m: String| Err(BuildError::Precondition(m));
    if scenario.virtual_links.is_empty() {
        if scenario
            .computing_cap
            .values()
            .flatten()
            .any(|c| c.is_some())
        {
            return pre("finite computing caps without a flexible consumer".into());
        }
        return Ok(assemble(scenario, None));
    }
    let owner = &scenario.virtual_links[0].owner;
    if scenario.virtual_links.iter().any(|v| &v.owner != owner) {
        return pre("more than one demand owns virtual links".into());
    }
    let j = scenario.demand_index(owner).expect("validated owner");
    let d = &scenario.demands[j];
    let hub = scenario.node_index(&d.node).expect("validated");
    let t0 = scenario.virtual_links[0].snd.time;
    let cap = d.capacity[t0 - 1];
    let mut nodes = vec![hub];
    for v in &scenario.virtual_links {
        if v.snd.time != t0 || v.rec.time != t0 {
            return pre(format!("link {} is not within time {t0}", v.id));
        }
        let n = scenario.node_index(&v.rec.node).expect("validated");
        if nodes.contains(&n) {
            return pre(format!("link {} repeats receiving node {}", v.id, v.rec.node));
        }
        if v.price != 0.0 {
            return pre(format!("link {} has nonzero price", v.id));
        }
        if v.capacity < cap {
            return pre(format!("link {} capacity below the requested load", v.id));
        }
        nodes.push(n);
    }
    if scenario
        .demands
        .iter()
        .enumerate()
        .any(|(k, o)| k != j && o.node == d.node)
    {
        return pre("another demand shares the flexible consumer's hub".into());
    }
    for (node, caps) in &scenario.computing_cap {
        for (t, c) in caps.iter().enumerate() {
            let Some(c) = c else { continue };
            let is_hub = node == &d.node && t + 1 == t0;
            if !is_hub {
                return pre(format!("finite computing cap at ({node},{})", t + 1));
            }
            if *c < cap {
                return pre("hub computing cap below the requested load".into());
            }
        }
    }
    if scenario.computing_cap_at(&d.node, t0).is_infinite() {
        return pre("hub computing cap must be finite".into());
    }
    nodes[1..].sort_unstable();
    Ok(assemble(
        scenario,
        Some(Disagg {
            demand: j,
            t: t0,
            nodes,
        }),
    ))
}

/// The transmission feasible set of a single time, with line prices as
/// objective. Line data is time invariant, so one set serves every time.
/// Columns follow the map returned alongside (`(line, forward)` for flows,
/// `None` for angles).
pub fn build_flow_set(scenario: &Scenario) -> (LinearProgram, Vec<Option<(usize, bool)>>) {
    let r = resolve(scenario);
    let mut lp = LinearProgram::default();
    let mut cols = Vec::new();
    let dc = scenario.network_model == NetworkModel::Dc;
    let mut flow_cols = Vec::new();
    for (l, line) in scenario.lines.iter().enumerate() {
        let ub = if dc { INF } else { line.flow_cap };
        let fp = lp.add_col(line.price, 0.0, ub);
        let fm = lp.add_col(line.price, 0.0, ub);
        cols.push(Some((l, true)));
        cols.push(Some((l, false)));
        flow_cols.push((fp, fm));
    }
    if dc {
        let refs = reference_nodes(scenario);
        let mut theta = Vec::new();
        for n in 0..scenario.nodes.len() {
            let pinned = refs.binary_search(&n).is_ok();
            let (lo, hi) = if pinned { (0.0, 0.0) } else { (-INF, INF) };
            theta.push(lp.add_col(0.0, lo, hi));
            cols.push(None);
        }
        for (l, line) in scenario.lines.iter().enumerate() {
            let (a, b) = r.line_ends[l];
            let (fp, fm) = flow_cols[l];
            lp.add_row(
                vec![
                    (fp, 1.0),
                    (fm, -1.0),
                    (theta[a], -line.susceptance),
                    (theta[b], line.susceptance),
                ],
                Sense::Eq,
                0.0,
            );
            let cap = line.effective_angle_cap();
            lp.add_row(vec![(theta[a], 1.0), (theta[b], -1.0)], Sense::Le, cap);
            lp.add_row(vec![(theta[a], 1.0), (theta[b], -1.0)], Sense::Ge, -cap);
        }
    }
    (lp, cols)
}

fn assemble(s: &Scenario, disagg: Option<Disagg>) -> LpInstance {
    let r = resolve(s);
    let t_len = s.horizon;
    let nn = s.nodes.len();
    let dc = s.network_model == NetworkModel::Dc;
    let mut lp = LinearProgram::default();
    let mut index = IndexMap::default();

    let is_disagg = |j: usize, t: usize| matches!(&disagg, Some(g) if g.demand == j && g.t == t);

    // columns
    let mut add = |lp: &mut LinearProgram, kind: VarKind, c: f64, lo: f64, hi: f64| {
        index.push_var(kind);
        lp.add_col(c, lo, hi)
    };
    for (j, d) in s.demands.iter().enumerate() {
        for t in 1..=t_len {
            if is_disagg(j, t) {
                continue;
            }
            add(
                &mut lp,
                VarKind::Demand { demand: j, t },
                -d.price[t - 1],
                0.0,
                d.capacity[t - 1],
            );
        }
    }
    if let Some(g) = &disagg {
        let d = &s.demands[g.demand];
        let single = g.nodes.len() == 1;
        for &n in &g.nodes {
            let hi = if single { d.capacity[g.t - 1] } else { INF };
            add(
                &mut lp,
                VarKind::DisaggLoad { node: n, t: g.t },
                -d.price[g.t - 1],
                0.0,
                hi,
            );
        }
    }
    for (i, p) in s.suppliers.iter().enumerate() {
        for t in 1..=t_len {
            add(
                &mut lp,
                VarKind::Supply { supplier: i, t },
                p.price[t - 1],
                0.0,
                p.capacity[t - 1],
            );
        }
    }
    for (l, line) in s.lines.iter().enumerate() {
        let ub = if dc { INF } else { line.flow_cap };
        for t in 1..=t_len {
            for forward in [true, false] {
                add(&mut lp, VarKind::Flow { line: l, forward, t }, line.price, 0.0, ub);
            }
        }
    }
    if dc {
        let refs = reference_nodes(s);
        for n in 0..nn {
            let pinned = refs.binary_search(&n).is_ok();
            let (lo, hi) = if pinned { (0.0, 0.0) } else { (-INF, INF) };
            for t in 1..=t_len {
                add(&mut lp, VarKind::Angle { node: n, t }, 0.0, lo, hi);
            }
        }
    }
    if disagg.is_none() {
        for (v, link) in s.virtual_links.iter().enumerate() {
            add(&mut lp, VarKind::Shift { link: v }, link.price, 0.0, link.capacity);
        }
    }

    // balance rows
    let mut bal: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nn * t_len];
    let st = |n: usize, t: usize| n * t_len + (t - 1);
    for (j, kind) in index.vars.iter().enumerate() {
        match *kind {
            VarKind::Demand { demand, t } => bal[st(r.demand_node[demand], t)].push((j, -1.0)),
            VarKind::DisaggLoad { node, t } => bal[st(node, t)].push((j, -1.0)),
            VarKind::Supply { supplier, t } => {
                bal[st(r.supplier_node[supplier], t)].push((j, 1.0))
            }
            VarKind::Flow { line, forward, t } => {
                let (a, b) = r.line_ends[line];
                let (from, to) = if forward { (a, b) } else { (b, a) };
                bal[st(to, t)].push((j, 1.0));
                bal[st(from, t)].push((j, -1.0));
            }
            VarKind::Shift { link } => {
                let (snd, rec) = r.link_ends[link];
                bal[snd].push((j, 1.0));
                bal[rec].push((j, -1.0));
            }
            VarKind::Angle { .. } => {}
        }
    }
    for n in 0..nn {
        for t in 1..=t_len {
            let mut coeffs = core::mem::take(&mut bal[st(n, t)]);
            coeffs.sort_unstable_by_key(|&(j, _)| j);
            index.push_row(RowKind::Balance { node: n, t });
            lp.add_row(coeffs, Sense::Eq, 0.0);
        }
    }

    if dc {
        for (l, line) in s.lines.iter().enumerate() {
            let (a, b) = r.line_ends[l];
            let cap = line.effective_angle_cap();
            for t in 1..=t_len {
                let fp = index.flow(l, true, t).unwrap();
                let fm = index.flow(l, false, t).unwrap();
                let ta = index.angle(a, t).unwrap();
                let tb = index.angle(b, t).unwrap();
                index.push_row(RowKind::DcFlow { line: l, t });
                lp.add_row(
                    vec![(fp, 1.0), (fm, -1.0), (ta, -line.susceptance), (tb, line.susceptance)],
                    Sense::Eq,
                    0.0,
                );
                index.push_row(RowKind::AngleUpper { line: l, t });
                lp.add_row(vec![(ta, 1.0), (tb, -1.0)], Sense::Le, cap);
                index.push_row(RowKind::AngleLower { line: l, t });
                lp.add_row(vec![(ta, 1.0), (tb, -1.0)], Sense::Ge, -cap);
            }
        }
    }

    // computing capacity: net load served at (n, t)
    let mut net: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nn * t_len];
    for (j, kind) in index.vars.iter().enumerate() {
        match *kind {
            VarKind::Demand { demand, t } => net[st(r.demand_node[demand], t)].push((j, 1.0)),
            VarKind::Shift { link } => {
                let (snd, rec) = r.link_ends[link];
                net[rec].push((j, 1.0));
                net[snd].push((j, -1.0));
            }
            _ => {}
        }
    }
    for n in 0..nn {
        for t in 1..=t_len {
            if let Some(g) = &disagg {
                if g.t == t && g.nodes[0] == n {
                    continue;
                }
            }
            let cap = s.computing_cap_at(&s.nodes[n], t);
            if !cap.is_finite() {
                continue;
            }
            let mut coeffs = core::mem::take(&mut net[st(n, t)]);
            coeffs.sort_unstable_by_key(|&(j, _)| j);
            index.push_row(RowKind::ComputeLower { node: n, t });
            lp.add_row(coeffs.clone(), Sense::Ge, 0.0);
            index.push_row(RowKind::ComputeUpper { node: n, t });
            lp.add_row(coeffs, Sense::Le, cap);
        }
    }

    for (i, p) in s.suppliers.iter().enumerate() {
        let Some(ramp) = p.ramp_limit else { continue };
        for t in 1..t_len {
            let a = index.supply(i, t).unwrap();
            let b = index.supply(i, t + 1).unwrap();
            index.push_row(RowKind::RampUp { supplier: i, t });
            lp.add_row(vec![(a, -1.0), (b, 1.0)], Sense::Le, ramp);
            index.push_row(RowKind::RampDown { supplier: i, t });
            lp.add_row(vec![(a, 1.0), (b, -1.0)], Sense::Le, ramp);
        }
    }

    if let Some(g) = &disagg {
        if g.nodes.len() > 1 {
            let coeffs = g
                .nodes
                .iter()
                .map(|&n| (index.var(VarKind::DisaggLoad { node: n, t: g.t }).unwrap(), 1.0))
                .collect();
            index.push_row(RowKind::AggregateCap { t: g.t });
            lp.add_row(coeffs, Sense::Le, s.demands[g.demand].capacity[g.t - 1]);
        }
    }

    LpInstance { lp, index }
}
