#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use traffic_qubo::congestion::CongestionWeights;
use traffic_qubo::geo::LatLon;
use traffic_qubo::network::{Edge, Node, RoadNetwork};

pub const R: f64 = 6_371_008.8;

/// Great-circle distance by the spherical law of cosines.
pub fn cosine_law_distance(p: (f64, f64), q: (f64, f64)) -> f64 {
    let (p1, p2) = (p.0.to_radians(), q.0.to_radians());
    let dl = (q.1 - p.1).to_radians();
    let c = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
    R * c.clamp(-1.0, 1.0).acos()
}

/// Haversine written out separately from the library.
pub fn haversine_oracle(p: (f64, f64), q: (f64, f64)) -> f64 {
    let dphi = (q.0 - p.0).to_radians();
    let dlam = (q.1 - p.1).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + p.0.to_radians().cos() * q.0.to_radians().cos() * (dlam / 2.0).sin().powi(2);
    2.0 * R * h.sqrt().min(1.0).asin()
}

/// Random tensor: each vehicle has 1 or `k` real alternatives with one
/// zero penalty; conflicting pairs get several nonzero combinations.
pub fn random_weights(rng: &mut impl Rng, n: usize, k: usize, pair_prob: f64) -> CongestionWeights<f64> {
    let penalties: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let real = if k > 1 && rng.gen_bool(0.15) { 1 } else { k };
            let mut p: Vec<f64> = (0..real).map(|_| rng.gen_range(1.0..120.0)).collect();
            let zero = rng.gen_range(0..real);
            p[zero] = 0.0;
            p
        })
        .collect();
    let mut w = CongestionWeights::new(k, penalties, 4.0, 10.0);
    for i in 0..n {
        for j in i + 1..n {
            if !rng.gen_bool(pair_prob) {
                continue;
            }
            let mut combos: Vec<(usize, usize)> = (0..k).flat_map(|a| (0..k).map(move |b| (a, b))).collect();
            combos.shuffle(rng);
            let take = rng.gen_range(2.min(combos.len())..=combos.len());
            for &(a, b) in &combos[..take] {
                if a < w.real_alternatives(i) && b < w.real_alternatives(j) {
                    w.add(i, j, a, b, rng.gen_range(1.0..100.0));
                }
            }
        }
    }
    w
}

/// Dense copy `t[i][j][a][b]`, symmetric in `(i, a) <-> (j, b)`.
pub fn dense(w: &CongestionWeights<f64>) -> Vec<Vec<Vec<Vec<f64>>>> {
    let (n, k) = (w.n(), w.k);
    let mut t = vec![vec![vec![vec![0.0; k]; k]; n]; n];
    for (&(i, j, a, b), &v) in &w.weights {
        t[i][j][a][b] += v;
        t[j][i][b][a] += v;
    }
    t
}

/// `q(x) + p(x)` evaluated term by term, with its own penalty weight.
pub fn direct_energy(w: &CongestionWeights<f64>, lambda: f64, x: &[bool]) -> f64 {
    let (n, k) = (w.n(), w.k);
    let t = dense(w);
    let bit = |i: usize, a: usize| if x[i * k + a] { 1.0 } else { 0.0 };
    let mut congestion = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for a in 0..k {
                for b in 0..k {
                    congestion += t[i][j][a][b] * bit(i, a) * bit(j, b);
                }
            }
        }
    }
    let mut duration = 0.0;
    let mut penalty = 0.0;
    for i in 0..n {
        let real = w.real_alternatives(i);
        let s: f64 = (0..k).map(|a| bit(i, a)).sum();
        penalty += lambda * (1.0 - s) * (1.0 - s);
        for a in 0..k {
            if a < real {
                duration += w.penalties[i][a] * bit(i, a);
            } else {
                // phantom alternatives carry +λ on the diagonal instead of -λ
                penalty += 2.0 * lambda * bit(i, a);
            }
        }
    }
    congestion + duration + penalty
}

/// Penalty weight recomputed from the dense tensor.
pub fn oracle_lambda(w: &CongestionWeights<f64>) -> f64 {
    let t = dense(w);
    let (n, k) = (w.n(), w.k);
    let mut best: f64 = 0.0;
    for i in 0..n {
        for a in 0..k {
            let row: f64 = (0..n).filter(|&j| j != i).map(|j| (0..k).map(|b| t[i][j][a][b]).sum::<f64>()).sum();
            best = best.max(row);
        }
    }
    let pi_max = w.penalties.iter().flatten().copied().fold(0.0, f64::max);
    best.max(1.0 + pi_max)
}

pub fn is_one_hot(w: &CongestionWeights<f64>, x: &[bool]) -> bool {
    let k = w.k;
    (0..w.n()).all(|i| {
        let on: Vec<usize> = (0..k).filter(|&a| x[i * k + a]).collect();
        on.len() == 1 && on[0] < w.real_alternatives(i)
    })
}

pub fn bits(mask: u64, len: usize) -> Vec<bool> {
    (0..len).map(|b| mask >> b & 1 == 1).collect()
}

/// Nodes spaced `gaps` meters apart due north from the origin, joined by
/// one-way edges at `speed`.
pub fn meridian_line(gaps: &[f64], speed: f64) -> RoadNetwork {
    let origin = LatLon::new(48.70, 21.26);
    let mut nodes = vec![Node {
        id: "n0".into(),
        pos: origin,
    }];
    let mut north = 0.0;
    for (i, g) in gaps.iter().enumerate() {
        north += g;
        nodes.push(Node {
            id: format!("n{}", i + 1),
            pos: origin.offset(north, 0.0),
        });
    }
    let edges = (0..gaps.len())
        .map(|i| {
            let (a, b) = (nodes[i].pos, nodes[i + 1].pos);
            Edge::new(format!("s{i}"), i, i + 1, vec![a, b], a.distance(b), speed, true)
        })
        .collect();
    RoadNetwork::new(nodes, edges).unwrap()
}

/// Planted partition: `groups` blocks of `size` vehicles, intra-block edges
/// with probability `p_in`, cross edges with `p_out`, weights in [1, 10).
pub fn planted_graph(
    rng: &mut impl Rng,
    groups: usize,
    size: usize,
    p_in: f64,
    p_out: f64,
) -> traffic_qubo::clustering::ConflictGraph {
    let n = groups * size;
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let p = if a / size == b / size { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((a, b, rng.gen_range(1.0..10.0)));
            }
        }
    }
    traffic_qubo::clustering::ConflictGraph::from_edges(n, &edges)
}

/// Whether `members` (graph node indices) induce a connected subgraph.
pub fn is_connected(g: &traffic_qubo::clustering::ConflictGraph, members: &[usize]) -> bool {
    let inside: std::collections::HashSet<usize> = members.iter().copied().collect();
    let mut seen = std::collections::HashSet::from([members[0]]);
    let mut stack = vec![members[0]];
    while let Some(u) = stack.pop() {
        for &(v, _) in &g.adj[u] {
            if inside.contains(&v) && seen.insert(v) {
                stack.push(v);
            }
        }
    }
    seen.len() == members.len()
}

/// In-memory scenario on a jittered grid: network, routes and weights.
pub struct Scenario {
    pub net: RoadNetwork,
    pub routes: traffic_qubo::routing::RouteSet,
    pub weights: CongestionWeights<f64>,
}

pub fn scenario(seed: u64, side: usize, n: usize, attraction: bool) -> Scenario {
    use traffic_qubo::demand::{generate_vehicles, DemandConfig};
    use traffic_qubo::network::{generate_grid, GridSpec};
    use traffic_qubo::routing::{compute_routes, RoutingConfig};
    let origin = LatLon { lat: 48.70, lon: 21.24 };
    let spec = GridSpec {
        speed_jitter: 0.2,
        ..GridSpec::new(side, side, 150.0, 13.89, origin, seed)
    };
    let net = generate_grid(&spec).unwrap();
    let half = (side - 1) as f64 * 75.0;
    let demand = DemandConfig {
        n,
        l_min: 300.0,
        l_max: 3000.0,
        attraction: attraction.then(|| origin.offset(half, half)),
        attraction_radius: 300.0,
        seed,
    };
    let vehicles = generate_vehicles(&net, &demand).unwrap();
    let routes = compute_routes(&net, &vehicles, &RoutingConfig { k: 2, alpha: 10.0, w: 600.0 }).unwrap();
    let entries = traffic_qubo::congestion::detect_conflicts(&routes, 10.0, 600.0, 4.0).unwrap();
    let weights = traffic_qubo::congestion::build_weights(&entries, &routes, 2, 4.0, 10.0).unwrap();
    Scenario { net, routes, weights }
}

/// Weight tensor by a plain loop over steps, pairs and alternatives.
pub fn oracle_weights(
    routes: &traffic_qubo::routing::RouteSet,
    gamma: f64,
    alpha: f64,
    steps: usize,
) -> std::collections::BTreeMap<(usize, usize, usize, usize), f64> {
    let mut out = std::collections::BTreeMap::new();
    for m in 0..=steps {
        for i in 0..routes.len() {
            for j in i + 1..routes.len() {
                for (a, ri) in routes[i].iter().enumerate() {
                    for (b, rj) in routes[j].iter().enumerate() {
                        let (Some(p), Some(q)) = (ri.points.get(m), rj.points.get(m)) else { continue };
                        if p.edge != q.edge {
                            continue;
                        }
                        let d = haversine_oracle((p.pos.lat, p.pos.lon), (q.pos.lat, q.pos.lon));
                        let v = (p.speed + q.speed) / 2.0;
                        let s = if v == 0.0 {
                            if d == 0.0 { alpha } else { 0.0 }
                        } else {
                            alpha * (1.0 - d / (gamma * v)).max(0.0)
                        };
                        if s > 0.0 {
                            *out.entry((i, j, a, b)).or_insert(0.0) += s;
                        }
                    }
                }
            }
        }
    }
    out
}
