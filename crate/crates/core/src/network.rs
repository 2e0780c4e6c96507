//! Directed road graph, its text file format, synthetic grids and radius
//! clipping.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geo::{cumulative_lengths, polyline_length, LatLon};

/// Relative tolerance between stored edge length and geometry length.
pub const GEOMETRY_LENGTH_TOLERANCE: f64 = 0.005;
/// Degrees; geometry endpoints must sit on their nodes.
const ENDPOINT_TOLERANCE_DEG: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: String,
    pub pos: LatLon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    /// Index into [`RoadNetwork::nodes`].
    pub from: usize,
    pub to: usize,
    pub geometry: Vec<LatLon>,
    /// Meters.
    pub length: f64,
    /// Meters per second.
    pub speed: f64,
    pub oneway: bool,
    cum: Vec<f64>,
}

impl Edge {
    pub fn new(
        id: impl Into<String>,
        from: usize,
        to: usize,
        geometry: Vec<LatLon>,
        length: f64,
        speed: f64,
        oneway: bool,
    ) -> Self {
        let cum = cumulative_lengths(&geometry);
        Self {
            id: id.into(),
            from,
            to,
            geometry,
            length,
            speed,
            oneway,
            cum,
        }
    }

    /// Seconds.
    pub fn travel_time(&self) -> f64 {
        self.length / self.speed
    }

    /// Cumulative haversine lengths along the geometry.
    pub fn cumulative(&self) -> &[f64] {
        &self.cum
    }

    /// Point at `offset` meters from the start node, measured in units of
    /// the stored edge length.
    pub fn point_at(&self, offset: f64) -> LatLon {
        crate::geo::point_at_fraction(&self.geometry, &self.cum, offset / self.length)
    }

    /// Offset in meters (stored-length units) of the geometry point closest
    /// to `p`.
    pub fn project(&self, p: LatLon) -> f64 {
        crate::geo::project_fraction(&self.geometry, &self.cum, p) * self.length
    }
}

/// Center and radius used to cut a sub-network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkSelection {
    pub center: LatLon,
    pub radius_km: f64,
}

impl NetworkSelection {
    pub fn new(center: LatLon, radius_km: f64) -> Result<Self> {
        if !(radius_km > 0.0) {
            return Err(Error::invalid("selection radius must be > 0"));
        }
        Ok(Self { center, radius_km })
    }
}

/// Immutable directed road graph.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    node_index: HashMap<String, usize>,
    edge_index: HashMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl RoadNetwork {
    /// Validates and indexes the graph. Two-way edges without an explicit
    /// reverse get one synthesized with id `<id>:r`.
    pub fn new(nodes: Vec<Node>, mut edges: Vec<Edge>) -> Result<Self> {
        let mut node_index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if !(-90.0..=90.0).contains(&n.pos.lat) || !(-180.0..=180.0).contains(&n.pos.lon) {
                return Err(Error::invalid(format!("node {} has out-of-range coordinates", n.id)));
            }
            if node_index.insert(n.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "node",
                    id: n.id.clone(),
                });
            }
        }
        for e in &edges {
            validate_edge(e, &nodes)?;
        }

        let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
        for e in &edges {
            *pairs.entry((e.from, e.to)).or_default() += 1;
        }
        let mut extra = Vec::new();
        for e in &edges {
            if !e.oneway && !pairs.contains_key(&(e.to, e.from)) {
                let mut geometry = e.geometry.clone();
                geometry.reverse();
                extra.push(Edge::new(
                    format!("{}:r", e.id),
                    e.to,
                    e.from,
                    geometry,
                    e.length,
                    e.speed,
                    false,
                ));
            }
        }
        edges.extend(extra);

        let mut edge_index = HashMap::with_capacity(edges.len());
        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut incoming = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), i).is_some() {
                return Err(Error::DuplicateId {
                    kind: "edge",
                    id: e.id.clone(),
                });
            }
            outgoing[e.from].push(i);
            incoming[e.to].push(i);
        }
        Ok(Self {
            nodes,
            edges,
            node_index,
            edge_index,
            outgoing,
            incoming,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn node_idx(&self, id: &str) -> Result<usize> {
        self.node_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownNode(id.to_string()))
    }

    pub fn edge_idx(&self, id: &str) -> Result<usize> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(id.to_string()))
    }

    /// Edge indices leaving node `idx`, in file order.
    pub fn outgoing(&self, idx: usize) -> &[usize] {
        &self.outgoing[idx]
    }

    pub fn incoming(&self, idx: usize) -> &[usize] {
        &self.incoming[idx]
    }

    /// Serialize into the line-oriented network format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# road network: nodes `id lat lon`, edges `id from to length_m speed_mps oneway k lat lon ...`\n");
        let _ = writeln!(s, "NODES {}", self.nodes.len());
        for n in &self.nodes {
            let _ = writeln!(s, "{} {:.10} {:.10}", n.id, n.pos.lat, n.pos.lon);
        }
        let _ = writeln!(s, "EDGES {}", self.edges.len());
        for e in &self.edges {
            let _ = write!(
                s,
                "{} {} {} {:.9} {:.9} {} {}",
                e.id,
                self.nodes[e.from].id,
                self.nodes[e.to].id,
                e.length,
                e.speed,
                u8::from(e.oneway),
                e.geometry.len()
            );
            for p in &e.geometry {
                let _ = write!(s, " {:.10} {:.10}", p.lat, p.lon);
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        parse_network(text, source)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn validate_edge(e: &Edge, nodes: &[Node]) -> Result<()> {
    let bad = |msg: String| Error::InvalidEdge {
        edge: e.id.clone(),
        msg,
    };
    if !(e.length > 0.0) || !e.length.is_finite() {
        return Err(bad(format!("length must be > 0, got {}", e.length)));
    }
    if !(e.speed > 0.0) || !e.speed.is_finite() {
        return Err(bad(format!("speed must be > 0, got {}", e.speed)));
    }
    if e.geometry.len() < 2 {
        return Err(bad("geometry needs at least 2 points".into()));
    }
    let near = |a: LatLon, b: LatLon| {
        (a.lat - b.lat).abs() <= ENDPOINT_TOLERANCE_DEG && (a.lon - b.lon).abs() <= ENDPOINT_TOLERANCE_DEG
    };
    if !near(e.geometry[0], nodes[e.from].pos) || !near(*e.geometry.last().unwrap(), nodes[e.to].pos) {
        return Err(bad("geometry endpoints do not match node coordinates".into()));
    }
    let geom = polyline_length(&e.geometry);
    if (geom - e.length).abs() > GEOMETRY_LENGTH_TOLERANCE * e.length {
        return Err(bad(format!(
            "geometry length {geom:.3} m differs from stored length {:.3} m",
            e.length
        )));
    }
    Ok(())
}

pub fn load_network(path: &Path) -> Result<RoadNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::Io(e),
    })?;
    parse_network(&text, &path.display().to_string())
}

pub fn parse_network(text: &str, source: &str) -> Result<RoadNetwork> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: String| Error::Parse {
        path: source.to_string(),
        line,
        msg,
    };
    let header = |name: &str, lines: &mut dyn Iterator<Item = (usize, &str)>| -> Result<usize> {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, format!("missing {name} header")))?;
        let mut tok = l.split_whitespace();
        match (tok.next(), tok.next(), tok.next()) {
            (Some(h), Some(n), None) if h == name => {
                n.parse().map_err(|_| err(ln, format!("bad {name} count `{n}`")))
            }
            _ => Err(err(ln, format!("expected `{name} <count>`"))),
        }
    };

    let n_nodes = header("NODES", &mut lines)?;
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, "unexpected end of file in NODES".into()))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() != 3 {
            return Err(err(ln, "expected `id lat lon`".into()));
        }
        let lat = parse_f64(tok[1]).ok_or_else(|| err(ln, format!("bad latitude `{}`", tok[1])))?;
        let lon = parse_f64(tok[2]).ok_or_else(|| err(ln, format!("bad longitude `{}`", tok[2])))?;
        nodes.push(Node {
            id: tok[0].to_string(),
            pos: LatLon::new(lat, lon),
        });
    }
    let ids: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();

    let n_edges = header("EDGES", &mut lines)?;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let (ln, l) = lines
            .next()
            .ok_or_else(|| err(0, "unexpected end of file in EDGES".into()))?;
        let tok: Vec<&str> = l.split_whitespace().collect();
        if tok.len() < 7 {
            return Err(err(ln, "expected `edge_id from to length speed oneway k coords...`".into()));
        }
        let node = |t: &str| {
            ids.get(t).copied().ok_or_else(|| Error::DanglingNode {
                edge: tok[0].to_string(),
                node: t.to_string(),
            })
        };
        let from = node(tok[1])?;
        let to = node(tok[2])?;
        let length = parse_f64(tok[3]).ok_or_else(|| err(ln, format!("bad length `{}`", tok[3])))?;
        let speed = parse_f64(tok[4]).ok_or_else(|| err(ln, format!("bad speed `{}`", tok[4])))?;
        let oneway = match tok[5] {
            "0" => false,
            "1" => true,
            t => return Err(err(ln, format!("oneway must be 0 or 1, got `{t}`"))),
        };
        let k: usize = tok[6]
            .parse()
            .map_err(|_| err(ln, format!("bad point count `{}`", tok[6])))?;
        if tok.len() != 7 + 2 * k {
            return Err(err(ln, format!("expected {k} coordinate pairs")));
        }
        let mut geometry = Vec::with_capacity(k);
        for p in tok[7..].chunks(2) {
            let lat = parse_f64(p[0]).ok_or_else(|| err(ln, format!("bad coordinate `{}`", p[0])))?;
            let lon = parse_f64(p[1]).ok_or_else(|| err(ln, format!("bad coordinate `{}`", p[1])))?;
            geometry.push(LatLon::new(lat, lon));
        }
        edges.push(Edge::new(tok[0], from, to, geometry, length, speed, oneway));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(err(ln, "trailing content after EDGES block".into()));
    }
    RoadNetwork::new(nodes, edges)
}

fn parse_f64(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Parameters of a synthetic rectangular street grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Meters between 4-neighbors.
    pub spacing: f64,
    /// Base speed in meters per second.
    pub speed: f64,
    /// South-west corner.
    pub origin: LatLon,
    pub seed: u64,
    /// Each road's speed is scaled by a factor drawn uniformly from
    /// `[1 - jitter, 1 + jitter]`; 0 keeps every road at `speed`.
    pub speed_jitter: f64,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, spacing: f64, speed: f64, origin: LatLon, seed: u64) -> Self {
        Self {
            rows,
            cols,
            spacing,
            speed,
            origin,
            seed,
            speed_jitter: 0.0,
        }
    }
}

/// Deterministic grid with two directed edges per pair of 4-neighbors.
///
/// Row `r` sits `r * spacing` meters north of the origin. Longitudes are
/// offset using the cosine of each row's own latitude so that east-west
/// neighbors stay `spacing` apart.
pub fn generate_grid(spec: &GridSpec) -> Result<RoadNetwork> {
    if spec.rows < 2 || spec.cols < 2 {
        return Err(Error::invalid("grid needs at least 2 rows and 2 columns"));
    }
    if !(spec.spacing > 0.0) || !(spec.speed > 0.0) {
        return Err(Error::invalid("grid spacing and speed must be > 0"));
    }
    if !(0.0..1.0).contains(&spec.speed_jitter) {
        return Err(Error::invalid("speed jitter must be in [0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let idx = |r: usize, c: usize| r * spec.cols + c;
    let mut nodes = Vec::with_capacity(spec.rows * spec.cols);
    for r in 0..spec.rows {
        let row_origin = spec.origin.offset(r as f64 * spec.spacing, 0.0);
        for c in 0..spec.cols {
            let pos = row_origin.offset(0.0, c as f64 * spec.spacing);
            nodes.push(Node {
                id: format!("r{r}c{c}"),
                pos: round_coord(pos),
            });
        }
    }
    let mut edges = Vec::new();
    let mut add_road = |a: usize, b: usize, rng: &mut ChaCha8Rng| {
        let speed = if spec.speed_jitter > 0.0 {
            spec.speed * rng.gen_range(1.0 - spec.speed_jitter..=1.0 + spec.speed_jitter)
        } else {
            spec.speed
        };
        let speed = round_quantity(speed);
        let (pa, pb) = (nodes[a].pos, nodes[b].pos);
        let length = round_quantity(pa.distance(pb));
        let n = edges.len();
        edges.push(Edge::new(format!("e{n}"), a, b, vec![pa, pb], length, speed, false));
        edges.push(Edge::new(format!("e{}", n + 1), b, a, vec![pb, pa], length, speed, false));
    };
    for r in 0..spec.rows {
        for c in 0..spec.cols {
            if c + 1 < spec.cols {
                add_road(idx(r, c), idx(r, c + 1), &mut rng);
            }
            if r + 1 < spec.rows {
                add_road(idx(r, c), idx(r + 1, c), &mut rng);
            }
        }
    }
    RoadNetwork::new(nodes, edges)
}

// Values are snapped to what the file format stores so that a generated
// network and its saved copy are identical.
fn round_coord(p: LatLon) -> LatLon {
    LatLon::new(snap(p.lat, 10), snap(p.lon, 10))
}

fn round_quantity(v: f64) -> f64 {
    snap(v, 9)
}

fn snap(v: f64, decimals: usize) -> f64 {
    format!("{v:.decimals$}").parse().expect("formatted float parses")
}

/// Sub-network of nodes within the selection radius and the edges whose
/// endpoints are both kept.
pub fn clip_network(net: &RoadNetwork, sel: &NetworkSelection) -> Result<RoadNetwork> {
    if !(sel.radius_km > 0.0) {
        return Err(Error::invalid("selection radius must be > 0"));
    }
    let radius_m = sel.radius_km * 1000.0;
    let mut remap = vec![None; net.nodes.len()];
    let mut nodes = Vec::new();
    for (i, n) in net.nodes.iter().enumerate() {
        if n.pos.distance(sel.center) <= radius_m {
            remap[i] = Some(nodes.len());
            nodes.push(n.clone());
        }
    }
    if nodes.is_empty() {
        return Err(Error::EmptyNetwork);
    }
    let edges = net
        .edges
        .iter()
        .filter_map(|e| {
            let (from, to) = (remap[e.from]?, remap[e.to]?);
            Some(Edge { from, to, ..e.clone() })
        })
        .collect();
    RoadNetwork::new(nodes, edges)
}
