//! Test support shared by integration tests: an exhaustive vertex oracle
//! for small LPs and seeded generators of random markets.
#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vlmarket_core::lp::{LinearProgram, Sense};
use vlmarket_core::model::{
    Demand, NetworkModel, Scenario, SpaceTimeIndex, Supplier, TransmissionLine, VirtualLink,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Vertex {
    Optimal(f64),
    Infeasible,
}

const FEAS: f64 = 1e-7;
const PIVOT: f64 = 1e-9;

fn dense(lp: &LinearProgram) -> Vec<Vec<f64>> {
    let n = lp.num_cols();
    lp.rows
        .iter()
        .map(|r| {
            let mut a = vec![0.0; n];
            for &(j, v) in &r.coeffs {
                a[j] += v;
            }
            a
        })
        .collect()
}

/// LU with partial pivoting of a k×k matrix; `None` when singular.
fn factor(mut m: Vec<Vec<f64>>) -> Option<(Vec<Vec<f64>>, Vec<usize>)> {
    let k = m.len();
    let mut perm: Vec<usize> = (0..k).collect();
    for c in 0..k {
        let p = (c..k).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < PIVOT {
            return None;
        }
        m.swap(c, p);
        perm.swap(c, p);
        for r in c + 1..k {
            let f = m[r][c] / m[c][c];
            m[r][c] = f;
            for j in c + 1..k {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    Some((m, perm))
}

fn lu_solve(lu: &[Vec<f64>], perm: &[usize], b: &[f64]) -> Vec<f64> {
    let k = lu.len();
    let mut y: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
    for r in 0..k {
        for c in 0..r {
            y[r] -= lu[r][c] * y[c];
        }
    }
    for r in (0..k).rev() {
        for c in r + 1..k {
            y[r] -= lu[r][c] * y[c];
        }
        y[r] /= lu[r][r];
    }
    y
}

/// Indices of a maximal linearly independent subset of `rows`, restricted
/// to `cols`.
fn independent(a: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Vec<usize> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut keep = Vec::new();
    for &r in rows {
        let mut v: Vec<f64> = cols.iter().map(|&c| a[r][c]).collect();
        for b in &basis {
            let p = b.iter().position(|x| x.abs() > PIVOT).unwrap();
            let f = v[p] / b[p];
            for (x, y) in v.iter_mut().zip(b) {
                *x -= f * y;
            }
        }
        if v.iter().any(|x| x.abs() > PIVOT) {
            basis.push(v);
            keep.push(r);
        }
    }
    keep
}

fn combinations(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            go(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    go(items, k, 0, &mut Vec::new(), f);
}

/// Minimum of the objective over all vertices of a bounded LP, found by
/// trying every choice of active constraints. Exponential; meant for at
/// most a dozen columns.
pub fn vertex_optimum(lp: &LinearProgram) -> Vertex {
    let n = lp.num_cols();
    let a = dense(lp);
    let fixed: Vec<usize> = (0..n).filter(|&j| lp.lower[j] == lp.upper[j]).collect();
    let free: Vec<usize> = (0..n)
        .filter(|&j| lp.lower[j].is_infinite() && lp.upper[j].is_infinite())
        .collect();
    let choosable: Vec<usize> = (0..n)
        .filter(|j| !fixed.contains(j) && !free.contains(j))
        .collect();
    let movable: Vec<usize> = (0..n).filter(|j| !fixed.contains(j)).collect();
    let eq_rows: Vec<usize> = (0..a.len()).filter(|&i| lp.rows[i].sense == Sense::Eq).collect();
    let forced = independent(&a, &eq_rows, &movable);
    let optional: Vec<usize> = (0..a.len()).filter(|&i| lp.rows[i].sense != Sense::Eq).collect();

    let mut best = f64::INFINITY;
    let mut x = vec![0.0; n];
    for k in forced.len().max(free.len())..=movable.len().min(forced.len() + optional.len()) {
        // basic columns: every free column plus k - |free| choosable ones
        if k < free.len() {
            continue;
        }
        combinations(&choosable, k - free.len(), &mut |extra| {
            let mut basic: Vec<usize> = free.iter().chain(extra).copied().collect();
            basic.sort_unstable();
            let nonbasic: Vec<usize> = choosable.iter().filter(|j| !basic.contains(j)).copied().collect();
            combinations(&optional, k - forced.len(), &mut |chosen| {
                let active: Vec<usize> = forced.iter().chain(chosen).copied().collect();
                let m: Vec<Vec<f64>> = active
                    .iter()
                    .map(|&r| basic.iter().map(|&c| a[r][c]).collect())
                    .collect();
                let Some((lu, perm)) = factor(m) else { return };
                // every bound pattern of the nonbasic columns
                let options: Vec<Vec<f64>> = nonbasic
                    .iter()
                    .map(|&j| {
                        [lp.lower[j], lp.upper[j]]
                            .into_iter()
                            .filter(|v| v.is_finite())
                            .collect()
                    })
                    .collect();
                let mut pick = vec![0usize; nonbasic.len()];
                loop {
                    for &j in &fixed {
                        x[j] = lp.lower[j];
                    }
                    for (q, &j) in nonbasic.iter().enumerate() {
                        x[j] = options[q][pick[q]];
                    }
                    let rhs: Vec<f64> = active
                        .iter()
                        .map(|&r| {
                            lp.rows[r].rhs
                                - (0..n)
                                    .filter(|c| !basic.contains(c))
                                    .map(|c| a[r][c] * x[c])
                                    .sum::<f64>()
                        })
                        .collect();
                    let xb = lu_solve(&lu, &perm, &rhs);
                    for (q, &j) in basic.iter().enumerate() {
                        x[j] = xb[q];
                    }
                    if feasible(lp, &a, &x) {
                        let obj: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
                        best = best.min(obj);
                    }
                    // next pattern
                    let mut q = 0;
                    while q < pick.len() {
                        pick[q] += 1;
                        if pick[q] < options[q].len() {
                            break;
                        }
                        pick[q] = 0;
                        q += 1;
                    }
                    if q == pick.len() {
                        break;
                    }
                }
            });
        });
    }
    if best.is_finite() {
        Vertex::Optimal(best)
    } else {
        Vertex::Infeasible
    }
}

fn feasible(lp: &LinearProgram, a: &[Vec<f64>], x: &[f64]) -> bool {
    let scale = |v: f64| FEAS * (1.0 + v.abs());
    for j in 0..x.len() {
        if x[j] < lp.lower[j] - scale(lp.lower[j]) || x[j] > lp.upper[j] + scale(lp.upper[j]) {
            return false;
        }
    }
    for (r, row) in lp.rows.iter().enumerate() {
        let act: f64 = a[r].iter().zip(x).map(|(c, v)| c * v).sum();
        let ok = match row.sense {
            Sense::Le => act <= row.rhs + scale(row.rhs),
            Sense::Ge => act >= row.rhs - scale(row.rhs),
            Sense::Eq => (act - row.rhs).abs() <= scale(row.rhs),
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Small boxed LP with integer data. Some columns are fixed, some rows are
/// equalities, and infeasible instances occur.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.gen_range(1..=7);
    let m = rng.gen_range(0..=5);
    let mut lp = LinearProgram::default();
    for _ in 0..n {
        let lo = rng.gen_range(-4..=2) as f64;
        let width = if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(1..=8) as f64 };
        lp.add_col(rng.gen_range(-6..=6) as f64, lo, lo + width);
    }
    for _ in 0..m {
        let mut coeffs = Vec::new();
        for j in 0..n {
            let v = rng.gen_range(-4..=4) as f64;
            if v != 0.0 && rng.gen_bool(0.6) {
                coeffs.push((j, v));
            }
        }
        let sense = *[Sense::Le, Sense::Ge, Sense::Eq, Sense::Le].choose(rng).unwrap();
        lp.add_row(coeffs, sense, rng.gen_range(-6..=10) as f64);
    }
    lp
}

fn node(k: usize) -> String {
    format!("n{k}")
}

fn lines(rng: &mut ChaCha8Rng, nodes: usize) -> Vec<TransmissionLine> {
    let mut out = Vec::new();
    let mut add = |rng: &mut ChaCha8Rng, a: usize, b: usize| {
        out.push(TransmissionLine {
            id: format!("l{}", out.len()),
            snd: node(a),
            rec: node(b),
            susceptance: *[0.5, 1.0, 2.0].choose(rng).unwrap(),
            flow_cap: rng.gen_range(1..=15) as f64,
            angle_cap: *[5.0, 100.0].choose(rng).unwrap(),
            price: *[0.0, 0.1, 0.5].choose(rng).unwrap(),
        });
    };
    for b in 1..nodes {
        if rng.gen_bool(0.85) {
            let a = rng.gen_range(0..b);
            add(rng, a, b);
        }
    }
    if nodes > 2 && rng.gen_bool(0.4) {
        let a = rng.gen_range(0..nodes);
        let b = (a + rng.gen_range(1..nodes)) % nodes;
        add(rng, a, b);
    }
    out
}

fn supplier(rng: &mut ChaCha8Rng, id: usize, at: usize, horizon: usize, ramps: bool) -> Supplier {
    Supplier {
        id: format!("s{id}"),
        node: node(at),
        price: (0..horizon).map(|_| rng.gen_range(1..=20) as f64).collect(),
        capacity: (0..horizon).map(|_| rng.gen_range(0..=20) as f64).collect(),
        ramp_limit: {
            let r = rng.gen_range(2..=10) as f64;
            (ramps && rng.gen_bool(0.4)).then_some(r)
        },
    }
}

fn demand(rng: &mut ChaCha8Rng, id: usize, at: usize, horizon: usize) -> Demand {
    Demand {
        id: format!("d{id}"),
        node: node(at),
        price: (0..horizon).map(|_| rng.gen_range(5..=40) as f64).collect(),
        capacity: (0..horizon).map(|_| rng.gen_range(0..=20) as f64).collect(),
    }
}

/// Random valid market: at most 6 nodes, 3 periods and 12 players
/// (suppliers, demands and links together).
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let nn = rng.gen_range(1..=6);
    let horizon = rng.gen_range(1..=3);
    let mut s = Scenario::new(horizon, (0..nn).map(node));
    s.network_model = if rng.gen_bool(0.6) { NetworkModel::Dc } else { NetworkModel::Transport };
    s.lines = lines(rng, nn);
    let ns = rng.gen_range(1..=4);
    let nd = rng.gen_range(1..=4);
    let nv = rng.gen_range(0..=(12 - ns - nd).min(4));
    let ramps = horizon > 1;
    for i in 0..ns {
        let at = rng.gen_range(0..nn);
        s.suppliers.push(supplier(rng, i, at, horizon, ramps));
    }
    for j in 0..nd {
        let at = rng.gen_range(0..nn);
        s.demands.push(demand(rng, j, at, horizon));
    }
    for v in 0..nv {
        let owner = s.demands.choose(rng).unwrap().clone();
        let t1 = rng.gen_range(1..=horizon);
        let t2 = rng.gen_range(t1..=horizon);
        let mut rec = rng.gen_range(0..nn);
        if t1 == t2 && node(rec) == owner.node {
            if nn == 1 {
                continue;
            }
            rec = (rec + 1) % nn;
        }
        s.virtual_links.push(VirtualLink {
            id: format!("v{v}"),
            snd: SpaceTimeIndex::new(owner.node.clone(), t1),
            rec: SpaceTimeIndex::new(node(rec), t2),
            price: *[0.0, 0.5, 1.0, 3.0].choose(rng).unwrap(),
            capacity: rng.gen_range(0..=10) as f64,
            owner: owner.id,
        });
    }
    for k in 0..nn {
        if rng.gen_bool(0.3) {
            let caps = (0..horizon)
                .map(|_| {
                    let cap = rng.gen_range(3..=30) as f64;
                    rng.gen_bool(0.7).then_some(cap)
                })
                .collect();
            s.set_computing_cap(&node(k), caps);
        }
    }
    if rng.gen_bool(0.3) {
        s.reference_node = Some(node(rng.gen_range(0..nn)));
    }
    let v = s.validate();
    assert!(v.is_empty(), "generator produced an invalid scenario: {v:?}");
    s
}

/// Random market with one flexible consumer at hub `n0` whose links fan
/// out at a single period, as the disaggregated formulation requires.
pub fn random_single_consumer(rng: &mut ChaCha8Rng) -> Scenario {
    let nn = rng.gen_range(2..=5);
    let horizon = rng.gen_range(1..=3);
    let mut s = Scenario::new(horizon, (0..nn).map(node));
    s.network_model = if rng.gen_bool(0.6) { NetworkModel::Dc } else { NetworkModel::Transport };
    s.lines = lines(rng, nn);
    let mut hub = demand(rng, 0, 0, horizon);
    hub.id = "hub".into();
    let t0 = rng.gen_range(1..=horizon);
    let dbar = hub.capacity[t0 - 1];
    let mut targets: Vec<usize> = (1..nn).collect();
    targets.shuffle(rng);
    targets.truncate(rng.gen_range(0..nn));
    for (v, &n) in targets.iter().enumerate() {
        s.virtual_links.push(VirtualLink {
            id: format!("v{v}"),
            snd: SpaceTimeIndex::new(node(0), t0),
            rec: SpaceTimeIndex::new(node(n), t0),
            price: 0.0,
            capacity: dbar + rng.gen_range(0..=5) as f64,
            owner: hub.id.clone(),
        });
    }
    s.demands.push(hub);
    if !targets.is_empty() {
        let mut caps = vec![None; horizon];
        caps[t0 - 1] = Some(dbar + rng.gen_range(0..=5) as f64);
        s.set_computing_cap(&node(0), caps);
    }
    for i in 0..rng.gen_range(1..=4) {
        let at = rng.gen_range(0..nn);
        s.suppliers.push(supplier(rng, i, at, horizon, horizon > 1));
    }
    for j in 1..rng.gen_range(1..=4) {
        let at = rng.gen_range(1..nn);
        s.demands.push(demand(rng, j, at, horizon));
    }
    let v = s.validate();
    assert!(v.is_empty(), "generator produced an invalid scenario: {v:?}");
    s
}

/// Table rows of the one-bus temporal study: surplus, prices, and the
/// `d`, `p`, `δ` vectors.
pub struct TemporalRow {
    pub phi: f64,
    pub pi: [f64; 4],
    pub d: [f64; 4],
    pub p: [f64; 4],
    pub delta: [f64; 4],
    pub load_payment: f64,
    pub supplier_revenue: f64,
    pub vlink_revenue: f64,
    pub load_profit: f64,
    pub vlink_profit: f64,
    pub supplier_profit: f64,
}

#[rustfmt::skip]
pub const TEMPORAL: [TemporalRow; 9] = [
    TemporalRow { phi: 4400.0, pi: [30.0, -30.0, 40.0, 15.0], d: [40.0, 25.0, 40.0, 40.0], p: [40.0, 25.0, 40.0, 40.0], delta: [0.0, 0.0, 0.0, 0.0], load_payment: 2650.0, supplier_revenue: 2650.0, vlink_revenue: 0.0, load_profit: 3650.0, vlink_profit: 0.0, supplier_profit: 750.0 },
    TemporalRow { phi: 4856.0, pi: [30.0, -30.0, 40.0, 15.0], d: [56.0, 25.0, 48.0, 40.0], p: [48.0, 33.0, 48.0, 40.0], delta: [8.0, 0.0, 0.0, 0.0], load_payment: 3450.0, supplier_revenue: 2970.0, vlink_revenue: 480.0, load_profit: 3650.0, vlink_profit: 456.0, supplier_profit: 750.0 },
    TemporalRow { phi: 4970.0, pi: [30.0, 20.0, 40.0, 15.0], d: [60.0, 25.0, 50.0, 40.0], p: [50.0, 35.0, 50.0, 40.0], delta: [10.0, 0.0, 0.0, 0.0], load_payment: 4900.0, supplier_revenue: 4800.0, vlink_revenue: 100.0, load_profit: 2400.0, vlink_profit: 70.0, supplier_profit: 2500.0 },
    TemporalRow { phi: 5040.0, pi: [23.0, 20.0, 40.0, 15.0], d: [70.0, 25.0, 50.0, 40.0], p: [50.0, 45.0, 50.0, 40.0], delta: [20.0, 0.0, 0.0, 0.0], load_payment: 4710.0, supplier_revenue: 4650.0, vlink_revenue: 60.0, load_profit: 2890.0, vlink_profit: 0.0, supplier_profit: 2150.0 },
    TemporalRow { phi: 5040.0, pi: [23.0, 20.0, 40.0, 15.0], d: [70.0, 25.0, 50.0, 40.0], p: [50.0, 45.0, 50.0, 40.0], delta: [20.0, 0.0, 0.0, 0.0], load_payment: 4710.0, supplier_revenue: 4650.0, vlink_revenue: 60.0, load_profit: 2890.0, vlink_profit: 0.0, supplier_profit: 2150.0 },
    TemporalRow { phi: 5090.0, pi: [23.0, 20.0, 40.0, 20.0], d: [70.0, 25.0, 50.0, 40.0], p: [50.0, 35.0, 50.0, 50.0], delta: [10.0, 0.0, 10.0, 0.0], load_payment: 4910.0, supplier_revenue: 4850.0, vlink_revenue: 60.0, load_profit: 2690.0, vlink_profit: 0.0, supplier_profit: 2400.0 },
    TemporalRow { phi: 5197.0, pi: [30.0, 20.0, 40.0, 27.0], d: [61.0, 25.0, 60.0, 40.0], p: [50.0, 36.0, 50.0, 50.0], delta: [11.0, 0.0, 0.0, 10.0], load_payment: 5810.0, supplier_revenue: 5570.0, vlink_revenue: 240.0, load_profit: 1920.0, vlink_profit: 177.0, supplier_profit: 3100.0 },
    TemporalRow { phi: 5197.0, pi: [30.0, 20.0, 40.0, 37.0], d: [61.0, 25.0, 60.0, 40.0], p: [50.0, 36.0, 50.0, 50.0], delta: [11.0, 0.0, 0.0, 10.0], load_payment: 6210.0, supplier_revenue: 6070.0, vlink_revenue: 140.0, load_profit: 1520.0, vlink_profit: 77.0, supplier_profit: 3600.0 },
    TemporalRow { phi: 5260.0, pi: [23.0, 20.0, 40.0, 37.0], d: [70.0, 25.0, 60.0, 40.0], p: [50.0, 45.0, 50.0, 50.0], delta: [20.0, 0.0, 0.0, 10.0], load_payment: 5990.0, supplier_revenue: 5900.0, vlink_revenue: 90.0, load_profit: 2010.0, vlink_profit: 0.0, supplier_profit: 3250.0 },
];

/// 7-bus table rows: surplus, the seven nodal prices with repeating
/// decimals written as fractions, the computing-cap dual at bus 3, and
/// cleared load.
pub struct SevenBusRow {
    pub phi: f64,
    pub pi: [f64; 7],
    pub omega3: f64,
    pub total_load: f64,
    pub load_payment: f64,
    pub transmission_revenue: f64,
    pub supplier_revenue: f64,
    pub vlink_revenue: f64,
    pub vlink_profit: f64,
    pub transmission_profit: f64,
    pub s2_profit: f64,
    pub s4_profit: f64,
}

const fn frac(whole: f64, num: f64, den: f64) -> f64 {
    whole + num / den
}

#[rustfmt::skip]
pub const SEVEN_BUS: [SevenBusRow; 7] = [
    SevenBusRow { phi: 522.0, pi: [3.0, 1.0, 2.0, 1.0, 14.9, 15.0, 15.0], omega3: 0.0, total_load: 50.0, load_payment: 373.0, transmission_revenue: 180.0, supplier_revenue: 193.0, vlink_revenue: 0.0, vlink_profit: 0.0, transmission_profit: 175.0, s2_profit: 0.0, s4_profit: 0.0 },
    SevenBusRow { phi: frac(577.0, 11.0, 30.0), pi: [5.0, 1.0, 3.0, 2.9, frac(14.0, 13.0, 15.0), 15.0, frac(14.0, 14.0, 15.0)], omega3: 0.0, total_load: 55.0, load_payment: frac(490.0, 2.0, 15.0), transmission_revenue: 181.8, supplier_revenue: frac(258.0, 2.0, 3.0), vlink_revenue: frac(49.0, 2.0, 3.0), vlink_profit: frac(48.0, 1.0, 6.0), transmission_profit: 176.77, s2_profit: 0.0, s4_profit: 38.0 },
    SevenBusRow { phi: frac(605.0, 8.0, 15.0), pi: [10.0, 1.0, 5.5, 1.0, frac(10.0, 7.0, 30.0), frac(10.0, 11.0, 30.0), 10.3], omega3: 0.0, total_load: 56.0, load_payment: frac(493.0, 19.0, 30.0), transmission_revenue: 273.8, supplier_revenue: frac(216.0, 5.0, 6.0), vlink_revenue: 3.0, vlink_profit: 0.0, transmission_profit: frac(268.0, 1.0, 3.0), s2_profit: 0.0, s4_profit: 0.0 },
    SevenBusRow { phi: frac(582.0, 7.0, 15.0), pi: [3.0, 2.4, 2.7, 2.6, frac(14.0, 13.0, 15.0), 15.0, frac(14.0, 14.0, 15.0)], omega3: 0.0, total_load: 55.0, load_payment: frac(459.0, 1.0, 30.0), transmission_revenue: 133.8, supplier_revenue: frac(264.0, 2.0, 3.0), vlink_revenue: frac(60.0, 17.0, 30.0), vlink_profit: frac(58.0, 1.0, 6.0), transmission_profit: frac(128.0, 2.0, 3.0), s2_profit: 28.0, s4_profit: 32.0 },
    SevenBusRow { phi: frac(618.0, 2.0, 15.0), pi: [10.0, 1.0, 5.5, 5.4, frac(10.0, 7.0, 30.0), frac(10.0, 11.0, 30.0), 10.3], omega3: 4.2, total_load: 57.5, load_payment: frac(508.0, 19.0, 30.0), transmission_revenue: 185.8, supplier_revenue: frac(306.0, 1.0, 3.0), vlink_revenue: 16.5, vlink_profit: 0.0, transmission_profit: frac(180.0, 1.0, 3.0), s2_profit: 0.0, s4_profit: 88.0 },
    SevenBusRow { phi: frac(639.0, 2.0, 15.0), pi: [3.3, 2.7, 3.0, 2.9, frac(3.0, 8.0, 15.0), frac(3.0, 2.0, 3.0), 3.6], omega3: 0.0, total_load: 60.0, load_payment: frac(203.0, 1.0, 30.0), transmission_revenue: 17.8, supplier_revenue: frac(179.0, 5.0, 6.0), vlink_revenue: 5.4, vlink_profit: 0.0, transmission_profit: frac(12.0, 1.0, 3.0), s2_profit: 34.0, s4_profit: 38.0 },
    SevenBusRow { phi: frac(644.0, 8.0, 15.0), pi: [3.0, 1.0, 3.0, 1.0, frac(2.0, 14.0, 15.0), frac(3.0, 1.0, 15.0), 3.0], omega3: 0.0, total_load: 60.0, load_payment: frac(181.0, 2.0, 15.0), transmission_revenue: 80.8, supplier_revenue: frac(100.0, 1.0, 3.0), vlink_revenue: 0.0, vlink_profit: 0.0, transmission_profit: frac(75.0, 1.0, 3.0), s2_profit: 0.0, s4_profit: 0.0 },
];
