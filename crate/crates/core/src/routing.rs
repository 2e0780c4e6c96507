//! Yen's k shortest loopless paths over edge travel time, and sampling of a
//! path into timed route points.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::demand::Vehicle;
use crate::error::{Error, Result};
use crate::geo::LatLon;
use crate::network::RoadNetwork;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingConfig {
    /// Alternatives per vehicle.
    pub k: usize,
    /// Sampling interval in seconds.
    pub alpha: f64,
    /// Simulation window in seconds.
    pub w: f64,
}

impl RoutingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha must be > 0"));
        }
        if !(self.w >= self.alpha) {
            return Err(Error::invalid("window w must be >= alpha"));
        }
        Ok(())
    }
}

/// One sampled position of a vehicle on a route.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePoint {
    pub t: f64,
    pub pos: LatLon,
    /// Edge index.
    pub edge: usize,
    pub speed: f64,
    /// Traversal direction as `(from, to)` node indices.
    pub dir: (usize, usize),
    /// Meters from the start of `edge`, found by projecting `pos` onto the
    /// edge geometry.
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub vehicle: usize,
    /// 0-based alternative index.
    pub alt: usize,
    /// Edge indices in travel order. Routes read back from the points file
    /// only know the edges that were sampled.
    pub edges: Vec<usize>,
    /// Seconds.
    pub duration: f64,
    /// Meters.
    pub length: f64,
    /// Sampling interval the points were taken with.
    pub alpha: f64,
    pub points: Vec<RoutePoint>,
}

/// Per-vehicle route alternatives, indexed by vehicle id then alternative.
pub type RouteSet = Vec<Vec<Route>>;

#[derive(Clone, Copy, PartialEq)]
struct Dist(f64);

impl Eq for Dist {}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

fn path_duration(net: &RoadNetwork, edges: &[usize]) -> f64 {
    edges.iter().map(|&e| net.edge(e).travel_time()).sum()
}

/// Fastest path from `src` to `dst` avoiding banned edges and nodes. Among
/// equally fast paths the lexicographically smallest edge-index sequence
/// wins.
fn fastest_path(
    net: &RoadNetwork,
    src: usize,
    dst: usize,
    banned_edges: &[bool],
    banned_nodes: &[bool],
) -> Option<Vec<usize>> {
    // distances to dst over the reversed graph
    let n = net.nodes().len();
    let mut h = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    h[dst] = 0.0;
    heap.push(Reverse((Dist(0.0), dst)));
    while let Some(Reverse((Dist(d), v))) = heap.pop() {
        if d > h[v] {
            continue;
        }
        for &e in net.incoming(v) {
            let u = net.edge(e).from;
            if banned_edges[e] || banned_nodes[u] {
                continue;
            }
            let nd = d + net.edge(e).travel_time();
            if nd < h[u] {
                h[u] = nd;
                heap.push(Reverse((Dist(nd), u)));
            }
        }
    }
    if !h[src].is_finite() {
        return None;
    }

    let mut path = Vec::new();
    let mut u = src;
    while u != dst {
        let tol = 1e-9 * h[u].max(1.0);
        let next = net.outgoing(u).iter().copied().find(|&e| {
            let edge = net.edge(e);
            !banned_edges[e] && !banned_nodes[edge.to] && (edge.travel_time() + h[edge.to] - h[u]).abs() <= tol
        })?;
        path.push(next);
        u = net.edge(next).to;
        if path.len() > n {
            return None;
        }
    }
    Some(path)
}

fn cmp_candidates(net: &RoadNetwork, a: &[usize], b: &[usize]) -> Ordering {
    let (da, db) = (path_duration(net, a), path_duration(net, b));
    if (da - db).abs() <= 1e-9 * da.max(db).max(1.0) {
        a.cmp(b)
    } else {
        da.total_cmp(&db)
    }
}

/// Up to `k` loopless paths ordered by travel time, ties broken by edge
/// index sequence.
pub fn k_shortest_routes(net: &RoadNetwork, origin: usize, dest: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    let n_nodes = net.nodes().len();
    if origin >= n_nodes || dest >= n_nodes {
        return Err(Error::UnknownNode(format!("index {}", origin.max(dest))));
    }
    let no_path = || Error::NoPath {
        from: net.node(origin).id.clone(),
        to: net.node(dest).id.clone(),
    };
    if origin == dest {
        return Err(Error::invalid("origin equals destination"));
    }
    let mut banned_edges = vec![false; net.edges().len()];
    let mut banned_nodes = vec![false; n_nodes];
    let first = fastest_path(net, origin, dest, &banned_edges, &banned_nodes).ok_or_else(no_path)?;

    let mut accepted = vec![first];
    let mut candidates: Vec<Vec<usize>> = Vec::new();
    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        let mut prev_nodes = Vec::with_capacity(prev.len() + 1);
        prev_nodes.push(origin);
        prev_nodes.extend(prev.iter().map(|&e| net.edge(e).to));

        for i in 0..prev.len() {
            let spur = prev_nodes[i];
            let root = &prev[..i];
            banned_edges.iter_mut().for_each(|b| *b = false);
            banned_nodes.iter_mut().for_each(|b| *b = false);
            for p in &accepted {
                if p.len() > i && &p[..i] == root {
                    banned_edges[p[i]] = true;
                }
            }
            for &v in &prev_nodes[..i] {
                banned_nodes[v] = true;
            }
            if let Some(tail) = fastest_path(net, spur, dest, &banned_edges, &banned_nodes) {
                let mut cand = root.to_vec();
                cand.extend(tail);
                if !accepted.contains(&cand) && !candidates.contains(&cand) {
                    candidates.push(cand);
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let best = (0..candidates.len())
            .min_by(|&a, &b| cmp_candidates(net, &candidates[a], &candidates[b]))
            .unwrap();
        accepted.push(candidates.swap_remove(best));
    }
    Ok(accepted)
}

/// Samples a connected edge path every `alpha` seconds assuming constant
/// speed on each edge, up to `min(duration, w)`.
pub fn sample_route(
    net: &RoadNetwork,
    vehicle: usize,
    alt: usize,
    edges: &[usize],
    cfg: &RoutingConfig,
) -> Result<Route> {
    cfg.validate()?;
    if edges.is_empty() {
        return Err(Error::invalid("route has no edges"));
    }
    for w in edges.windows(2) {
        if net.edge(w[0]).to != net.edge(w[1]).from {
            return Err(Error::DisconnectedPath(
                net.edge(w[0]).id.clone(),
                net.edge(w[1]).id.clone(),
            ));
        }
    }
    let mut starts = Vec::with_capacity(edges.len());
    let mut acc = 0.0;
    for &e in edges {
        starts.push(acc);
        acc += net.edge(e).travel_time();
    }
    let duration = acc;
    let length = edges.iter().map(|&e| net.edge(e).length).sum();
    let horizon = duration.min(cfg.w);
    let steps = (horizon / cfg.alpha + 1e-9).floor() as usize;

    let mut points = Vec::with_capacity(steps + 1);
    for m in 0..=steps {
        let t = m as f64 * cfg.alpha;
        // at an edge boundary the vehicle is entering the next edge
        let i = starts.partition_point(|&s| s <= t).max(1) - 1;
        let edge = net.edge(edges[i]);
        let along = ((t - starts[i]) * edge.speed).clamp(0.0, edge.length);
        let pos = edge.point_at(along);
        points.push(RoutePoint {
            t,
            pos,
            edge: edges[i],
            speed: edge.speed,
            dir: (edge.from, edge.to),
            offset: edge.project(pos),
        });
    }
    Ok(Route {
        vehicle,
        alt,
        edges: edges.to_vec(),
        duration,
        length,
        alpha: cfg.alpha,
        points,
    })
}

/// Routes and samples all alternatives for every vehicle.
pub fn compute_routes(net: &RoadNetwork, vehicles: &[Vehicle], cfg: &RoutingConfig) -> Result<RouteSet> {
    cfg.validate()?;
    vehicles
        .iter()
        .map(|v| {
            k_shortest_routes(net, v.origin, v.destination, cfg.k)?
                .iter()
                .enumerate()
                .map(|(a, path)| sample_route(net, v.id, a, path, cfg))
                .collect()
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct PointRow {
    vehicle_id: usize,
    alt: usize,
    t: f64,
    lat: f64,
    lon: f64,
    edge_id: String,
    speed: f64,
    dir_from: String,
    dir_to: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct SummaryRow {
    vehicle_id: usize,
    alt: usize,
    duration_s: f64,
    length_m: f64,
    n_points: usize,
    /// Space-separated edge ids of the full path.
    edges: String,
}

pub fn write_routes(points_path: &Path, summary_path: &Path, net: &RoadNetwork, routes: &RouteSet) -> Result<()> {
    let mut pw = csv::Writer::from_path(points_path)?;
    let mut sw = csv::Writer::from_path(summary_path)?;
    for r in routes.iter().flatten() {
        sw.serialize(SummaryRow {
            vehicle_id: r.vehicle,
            alt: r.alt,
            duration_s: r.duration,
            length_m: r.length,
            n_points: r.points.len(),
            edges: r.edges.iter().map(|&e| net.edge(e).id.as_str()).collect::<Vec<_>>().join(" "),
        })?;
        for p in &r.points {
            pw.serialize(PointRow {
                vehicle_id: r.vehicle,
                alt: r.alt,
                t: p.t,
                lat: p.pos.lat,
                lon: p.pos.lon,
                edge_id: net.edge(p.edge).id.clone(),
                speed: p.speed,
                dir_from: net.node(p.dir.0).id.clone(),
                dir_to: net.node(p.dir.1).id.clone(),
            })?;
        }
    }
    pw.flush()?;
    sw.flush()?;
    Ok(())
}

/// Reads routes back from the points and summary files. Point offsets are
/// recomputed by projection onto the network geometry.
pub fn read_routes(points_path: &Path, summary_path: &Path, net: &RoadNetwork, alpha: f64) -> Result<RouteSet> {
    let mut routes: RouteSet = Vec::new();
    for row in crate::io::csv_reader(summary_path)?.deserialize() {
        let row: SummaryRow = row?;
        if row.vehicle_id > routes.len() {
            return Err(Error::invalid(format!("route summary skips vehicle {}", routes.len())));
        }
        if row.vehicle_id == routes.len() {
            routes.push(Vec::new());
        }
        let alts = &mut routes[row.vehicle_id];
        if row.alt != alts.len() {
            return Err(Error::invalid(format!(
                "route summary for vehicle {} has alternative {} out of order",
                row.vehicle_id, row.alt
            )));
        }
        let edges = row
            .edges
            .split_whitespace()
            .map(|id| net.edge_idx(id))
            .collect::<Result<Vec<_>>>()?;
        alts.push(Route {
            vehicle: row.vehicle_id,
            alt: row.alt,
            edges,
            duration: row.duration_s,
            length: row.length_m,
            alpha,
            points: Vec::with_capacity(row.n_points),
        });
    }
    for row in crate::io::csv_reader(points_path)?.deserialize() {
        let row: PointRow = row?;
        let route = routes
            .get_mut(row.vehicle_id)
            .and_then(|v| v.get_mut(row.alt))
            .ok_or_else(|| Error::invalid(format!("points for unknown route {}/{}", row.vehicle_id, row.alt)))?;
        let edge = net.edge_idx(&row.edge_id)?;
        let dir = (net.node_idx(&row.dir_from)?, net.node_idx(&row.dir_to)?);
        let pos = LatLon::new(row.lat, row.lon);
        if !route.edges.contains(&edge) {
            return Err(Error::invalid(format!(
                "point of route {}/{} lies on edge {} outside its path",
                row.vehicle_id, row.alt, row.edge_id
            )));
        }
        route.points.push(RoutePoint {
            t: row.t,
            pos,
            edge,
            speed: row.speed,
            dir,
            offset: net.edge(edge).project(pos),
        });
    }
    for r in routes.iter().flatten() {
        if r.points.is_empty() {
            return Err(Error::invalid(format!("route {}/{} has no points", r.vehicle, r.alt)));
        }
    }
    Ok(routes)
}
