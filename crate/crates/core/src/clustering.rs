//! Vehicle conflict graph, Leiden community detection and the merge/filter
//! pass that turns communities into solver-sized clusters.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::congestion::CongestionWeights;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Undirected weighted graph over conflicting vehicles.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    /// Number of vehicles in the instance, including isolated ones.
    pub n_vehicles: usize,
    /// Vehicle id of each graph node, ascending.
    pub vehicles: Vec<usize>,
    /// Per node, `(neighbor node, weight)` sorted by neighbor.
    pub adj: Vec<Vec<(usize, f64)>>,
}

impl ConflictGraph {
    /// Graph from explicit undirected edges between vehicle ids. Zero and
    /// negative weights and self-loops are dropped; repeated pairs add up.
    pub fn from_edges(n_vehicles: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(a, b, w) in edges {
            if a != b {
                *pairs.entry((a.min(b), a.max(b))).or_default() += w;
            }
        }
        pairs.retain(|_, w| *w > 0.0);
        let mut vehicles: Vec<usize> = pairs.keys().flat_map(|&(a, b)| [a, b]).collect();
        vehicles.sort_unstable();
        vehicles.dedup();
        let mut local = vec![usize::MAX; n_vehicles];
        for (l, &v) in vehicles.iter().enumerate() {
            local[v] = l;
        }
        let mut adj = vec![Vec::new(); vehicles.len()];
        for (&(a, b), &w) in &pairs {
            adj[local[a]].push((local[b], w));
            adj[local[b]].push((local[a], w));
        }
        for list in &mut adj {
            list.sort_unstable_by_key(|&(u, _)| u);
        }
        Self {
            n_vehicles,
            vehicles,
            adj,
        }
    }

    pub fn node_count(&self) -> usize {
        self.vehicles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn weight(&self, u: usize, v: usize) -> f64 {
        self.adj[u]
            .binary_search_by_key(&v, |&(x, _)| x)
            .map(|i| self.adj[u][i].1)
            .unwrap_or(0.0)
    }

    /// Resolution-scaled modularity of a partition given as a community
    /// label per node.
    pub fn modularity(&self, labels: &[usize], rho: f64) -> f64 {
        let two_m: f64 = self.adj.iter().flatten().map(|&(_, w)| w).sum();
        if two_m == 0.0 {
            return 0.0;
        }
        let n_comm = labels.iter().copied().max().map_or(0, |c| c + 1);
        let mut internal = vec![0.0; n_comm];
        let mut total = vec![0.0; n_comm];
        for (u, list) in self.adj.iter().enumerate() {
            for &(v, w) in list {
                total[labels[u]] += w;
                if labels[u] == labels[v] {
                    internal[labels[u]] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&total)
            .map(|(&i, &k)| i / two_m - rho * (k / two_m).powi(2))
            .sum()
    }
}

/// Collapses the tensor to `w_ij = Σ_ab w[i,j,a,b]` per vehicle pair.
pub fn build_conflict_graph<T: Scalar>(weights: &CongestionWeights<T>) -> ConflictGraph {
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(i, j, _, _), &w) in &weights.weights {
        *pairs.entry((i, j)).or_default() += w.as_f64();
    }
    let edges: Vec<(usize, usize, f64)> = pairs.into_iter().map(|((i, j), w)| (i, j, w)).collect();
    ConflictGraph::from_edges(weights.n(), &edges)
}

/// Working graph for one Leiden level.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    degree: Vec<f64>,
    two_m: f64,
    /// Original graph nodes represented by each level node.
    members: Vec<Vec<usize>>,
}

impl Level {
    fn base(g: &ConflictGraph) -> Self {
        let n = g.node_count();
        let degree: Vec<f64> = g.adj.iter().map(|l| l.iter().map(|&(_, w)| w).sum()).collect();
        Self {
            adj: g.adj.clone(),
            self_loop: vec![0.0; n],
            two_m: degree.iter().sum(),
            degree,
            members: (0..n).map(|v| vec![v]).collect(),
        }
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    /// Collapses each group of `labels` into one node.
    fn aggregate(&self, labels: &[usize]) -> Self {
        let n_new = labels.iter().copied().max().map_or(0, |c| c + 1);
        let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n_new];
        let mut self_loop = vec![0.0; n_new];
        let mut degree = vec![0.0; n_new];
        let mut members = vec![Vec::new(); n_new];
        for u in 0..self.n() {
            let cu = labels[u];
            degree[cu] += self.degree[u];
            self_loop[cu] += self.self_loop[u];
            members[cu].extend_from_slice(&self.members[u]);
            for &(v, w) in &self.adj[u] {
                let cv = labels[v];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_loop[cu] += w / 2.0;
                } else {
                    *links[cu].entry(cv).or_default() += w;
                }
            }
        }
        Self {
            adj: links.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loop,
            degree,
            two_m: self.two_m,
            members,
        }
    }
}

/// Relabels to `0..c` in order of first appearance.
fn compact(labels: &mut [usize]) -> usize {
    let mut map = BTreeMap::new();
    let mut next = 0;
    for l in labels.iter_mut() {
        *l = *map.entry(*l).or_insert_with(|| {
            next += 1;
            next - 1
        });
    }
    next
}

const EPS: f64 = 1e-12;

/// Queue-based local moving; returns whether any node moved.
fn move_nodes(level: &Level, labels: &mut [usize], rho: f64, rng: &mut ChaCha8Rng) -> bool {
    let n = level.n();
    let scale = rho / level.two_m;
    let mut total = vec![0.0; n];
    let mut size = vec![0usize; n];
    for v in 0..n {
        total[labels[v]] += level.degree[v];
        size[labels[v]] += 1;
    }
    let mut empty: Vec<usize> = (0..n).filter(|&c| size[c] == 0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut queued = vec![true; n];
    let mut link = vec![0.0; n];
    let mut touched = Vec::new();
    let mut moved = false;

    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        let own = labels[v];
        let kv = level.degree[v];
        total[own] -= kv;
        size[own] -= 1;
        if size[own] == 0 {
            empty.push(own);
        }
        for &(u, w) in &level.adj[v] {
            let c = labels[u];
            if link[c] == 0.0 {
                touched.push(c);
            }
            link[c] += w;
        }
        let mut best = own;
        let mut best_gain = link[own] - kv * total[own] * scale;
        for &c in &touched {
            let gain = link[c] - kv * total[c] * scale;
            if gain > best_gain + EPS {
                best = c;
                best_gain = gain;
            }
        }
        if best_gain < -EPS && size[own] > 0 {
            // better off alone
            best = empty.pop().expect("an empty community exists while v is detached");
        } else if best == own && size[own] == 0 {
            empty.retain(|&c| c != own);
        }
        if best != own && size[best] == 0 {
            empty.retain(|&c| c != best);
        }
        labels[v] = best;
        total[best] += kv;
        size[best] += 1;
        if best != own {
            moved = true;
            for &(u, _) in &level.adj[v] {
                if labels[u] != best && !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
        for c in touched.drain(..) {
            link[c] = 0.0;
        }
    }
    moved
}

/// Merges singletons inside each community into well-connected
/// sub-communities.
fn refine(level: &Level, labels: &[usize], rho: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = level.n();
    let scale = rho / level.two_m;
    let mut comm_total = vec![0.0; n];
    for v in 0..n {
        comm_total[labels[v]] += level.degree[v];
    }
    let mut refined: Vec<usize> = (0..n).collect();
    let mut r_total: Vec<f64> = level.degree.clone();
    let mut r_size = vec![1usize; n];
    // weight from each refined community to the rest of its parent community
    let mut r_ext: Vec<f64> = (0..n)
        .map(|v| {
            level.adj[v]
                .iter()
                .filter(|&&(u, _)| labels[u] == labels[v])
                .map(|&(_, w)| w)
                .sum()
        })
        .collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut link = vec![0.0; n];
    let mut touched = Vec::new();
    for v in order {
        if r_size[refined[v]] != 1 {
            continue;
        }
        let c = labels[v];
        let kv = level.degree[v];
        let ext_v = r_ext[refined[v]];
        if ext_v < kv * (comm_total[c] - kv) * scale - EPS {
            continue;
        }
        for &(u, w) in &level.adj[v] {
            if labels[u] == c && refined[u] != refined[v] {
                let r = refined[u];
                if link[r] == 0.0 {
                    touched.push(r);
                }
                link[r] += w;
            }
        }
        let mut best = None;
        let mut best_gain = 0.0;
        for &r in &touched {
            let well_connected = r_ext[r] >= r_total[r] * (comm_total[c] - r_total[r]) * scale - EPS;
            let gain = link[r] - kv * r_total[r] * scale;
            if well_connected && gain >= -EPS && (best.is_none() || gain > best_gain + EPS) {
                best = Some(r);
                best_gain = gain;
            }
        }
        if let Some(r) = best {
            let old = refined[v];
            r_size[old] = 0;
            r_total[old] = 0.0;
            r_ext[old] = 0.0;
            refined[v] = r;
            r_total[r] += kv;
            r_size[r] += 1;
            r_ext[r] += ext_v - 2.0 * link[r];
        }
        for r in touched.drain(..) {
            link[r] = 0.0;
        }
    }
    refined
}

/// Leiden community detection maximizing resolution-scaled modularity.
///
/// Returns communities as sorted lists of graph node indices, ordered by
/// their smallest node. Every community induces a connected subgraph.
pub fn leiden(g: &ConflictGraph, rho: f64, seed: u64) -> Result<Vec<Vec<usize>>> {
    if !(rho > 0.0) {
        return Err(Error::invalid("resolution must be > 0"));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = Level::base(g);
    if level.two_m == 0.0 {
        return Ok((0..n).map(|v| vec![v]).collect());
    }
    let mut labels: Vec<usize> = (0..n).collect();
    for _ in 0..64 {
        move_nodes(&level, &mut labels, rho, &mut rng);
        let n_comm = compact(&mut labels);
        if n_comm == level.n() {
            break;
        }
        let mut refined = refine(&level, &labels, rho, &mut rng);
        let n_refined = compact(&mut refined);
        let next_labels: Vec<usize>;
        if n_refined == level.n() {
            // refinement kept everything apart; aggregate the plain partition
            level = level.aggregate(&labels);
            next_labels = (0..n_comm).collect();
        } else {
            let mut parent = vec![0; n_refined];
            for v in 0..level.n() {
                parent[refined[v]] = labels[v];
            }
            level = level.aggregate(&refined);
            next_labels = parent;
        }
        labels = next_labels;
    }
    let mut node_label = vec![0; n];
    for (agg, members) in level.members.iter().enumerate() {
        for &v in members {
            node_label[v] = labels[agg];
        }
    }
    Ok(connected_parts(g, &node_label))
}

/// Splits every labelled group into connected components.
fn connected_parts(g: &ConflictGraph, labels: &[usize]) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut part = vec![s];
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(v, _) in &g.adj[u] {
                if !seen[v] && labels[v] == labels[s] {
                    seen[v] = true;
                    part.push(v);
                    stack.push(v);
                }
            }
        }
        part.sort_unstable();
        out.push(part);
    }
    out
}

/// Final clusters of vehicle ids plus the vehicles left out.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSet {
    pub clusters: Vec<Vec<usize>>,
    pub residual: Vec<usize>,
    pub rho: f64,
    pub min_size: usize,
    pub max_clusters: usize,
}

impl ClusterSet {
    /// One cluster with every vehicle, for runs without decomposition.
    pub fn single(n_vehicles: usize) -> Self {
        Self {
            clusters: vec![(0..n_vehicles).collect()],
            residual: Vec::new(),
            rho: 0.0,
            min_size: 1,
            max_clusters: 1,
        }
    }

    pub fn n_vehicles(&self) -> usize {
        self.clusters.iter().map(Vec::len).sum::<usize>() + self.residual.len()
    }

    /// `Σ |C|²`, the pairwise-term count relative to `k²`.
    pub fn squared_size_sum(&self) -> usize {
        self.clusters.iter().map(|c| c.len() * c.len()).sum()
    }

    /// Cluster label per vehicle; `None` for residual vehicles.
    pub fn labels(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.n_vehicles()];
        for (c, members) in self.clusters.iter().enumerate() {
            for &v in members {
                out[v] = Some(c);
            }
        }
        out
    }

    /// CSV `vehicle_id,cluster_id` with `-1` for residual vehicles.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["vehicle_id", "cluster_id"])?;
        for (v, label) in self.labels().into_iter().enumerate() {
            let c = label.map_or(-1, |c| c as i64);
            w.write_record([v.to_string(), c.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        let mut residual = Vec::new();
        for (row, rec) in crate::io::csv_reader(path)?.records().enumerate() {
            let rec = rec?;
            let v: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| Error::invalid("bad vehicle_id"))?;
            let c: i64 = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| Error::invalid("bad cluster_id"))?;
            if v != row {
                return Err(Error::invalid("cluster file must list vehicles 0..n in order"));
            }
            if c < 0 {
                residual.push(v);
            } else {
                let c = c as usize;
                if clusters.len() <= c {
                    clusters.resize(c + 1, Vec::new());
                }
                clusters[c].push(v);
            }
        }
        if clusters.iter().any(Vec::is_empty) {
            return Err(Error::invalid("cluster ids must be dense"));
        }
        Ok(Self {
            max_clusters: clusters.len(),
            clusters,
            residual,
            rho: 0.0,
            min_size: 1,
        })
    }
}

/// Enforces the minimum cluster size and the cluster-count cap.
///
/// Clusters below `min_size` are merged, smallest first, into the neighbor
/// with the largest connecting weight. Clusters with no weighted neighbor
/// are batched together in order until each batch reaches `min_size`; a
/// short final batch joins the previous batch, or the smallest remaining
/// cluster. If more than `max_clusters` remain, those with the largest
/// internal weight are kept and the rest become residual.
pub fn merge_and_filter(
    partition: &[Vec<usize>],
    g: &ConflictGraph,
    min_size: usize,
    max_clusters: usize,
    rho: f64,
) -> Result<ClusterSet> {
    if min_size == 0 || max_clusters == 0 {
        return Err(Error::invalid("min size and max clusters must be >= 1"));
    }
    let mut members: Vec<Vec<usize>> = partition.iter().filter(|c| !c.is_empty()).cloned().collect();
    let c = members.len();
    let mut owner = vec![usize::MAX; g.node_count()];
    for (i, m) in members.iter().enumerate() {
        for &v in m {
            owner[v] = i;
        }
    }
    let mut links: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); c];
    let mut intra = vec![0.0; c];
    for (u, list) in g.adj.iter().enumerate() {
        for &(v, w) in list {
            let (a, b) = (owner[u], owner[v]);
            if a == usize::MAX || b == usize::MAX {
                continue;
            }
            if a == b {
                intra[a] += w / 2.0;
            } else {
                *links[a].entry(b).or_default() += w;
            }
        }
    }
    let mut alive = vec![true; c];

    // merge undersized clusters into their strongest neighbor
    loop {
        let pick = (0..c)
            .filter(|&i| alive[i] && members[i].len() < min_size && !links[i].is_empty())
            .min_by_key(|&i| (members[i].len(), i));
        let Some(small) = pick else { break };
        let (&target, &between) = links[small]
            .iter()
            .fold(None, |best: Option<(&usize, &f64)>, cand| match best {
                Some(b) if b.1 >= cand.1 => Some(b),
                _ => Some(cand),
            })
            .expect("non-empty links");
        let moved = std::mem::take(&mut members[small]);
        members[target].extend(moved);
        intra[target] += intra[small] + between;
        alive[small] = false;
        let small_links = std::mem::take(&mut links[small]);
        for (&other, &w) in &small_links {
            links[other].remove(&small);
            if other != target {
                *links[target].entry(other).or_default() += w;
                *links[other].entry(target).or_default() += w;
            }
        }
        links[target].remove(&small);
    }

    // batch isolated undersized clusters
    let isolated: Vec<usize> = (0..c).filter(|&i| alive[i] && members[i].len() < min_size).collect();
    let mut batches: Vec<Vec<usize>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for i in isolated {
        open.extend(std::mem::take(&mut members[i]));
        alive[i] = false;
        if open.len() >= min_size {
            batches.push(std::mem::take(&mut open));
        }
    }
    let mut kept: Vec<(Vec<usize>, f64)> = (0..c).filter(|&i| alive[i]).map(|i| (std::mem::take(&mut members[i]), intra[i])).collect();
    kept.extend(batches.into_iter().map(|b| (b, 0.0)));
    if !open.is_empty() {
        if let Some(last) = kept.iter_mut().rev().find(|(_, w)| *w == 0.0).filter(|(m, _)| m.len() >= min_size) {
            last.0.extend(open);
        } else if let Some(smallest) = kept.iter_mut().min_by_key(|(m, _)| m.len()) {
            smallest.0.extend(open);
        } else {
            kept.push((open, 0.0));
        }
    }

    // cap the count, keeping the heaviest
    kept.iter_mut().for_each(|(m, _)| m.sort_unstable());
    kept.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then(b.0.len().cmp(&a.0.len()))
            .then(a.0[0].cmp(&b.0[0]))
    });
    let demoted: Vec<usize> = kept.iter().skip(max_clusters).flat_map(|(m, _)| m.iter().copied()).collect();
    kept.truncate(max_clusters);

    let to_vehicle = |m: &[usize]| -> Vec<usize> {
        let mut v: Vec<usize> = m.iter().map(|&u| g.vehicles[u]).collect();
        v.sort_unstable();
        v
    };
    let clusters: Vec<Vec<usize>> = kept.iter().map(|(m, _)| to_vehicle(m)).collect();
    let mut in_cluster = vec![false; g.n_vehicles];
    for &v in clusters.iter().flatten() {
        in_cluster[v] = true;
    }
    let mut residual: Vec<usize> = (0..g.n_vehicles).filter(|&v| !in_cluster[v]).collect();
    residual.sort_unstable();
    debug_assert!(demoted.iter().all(|&u| !in_cluster[g.vehicles[u]]));
    Ok(ClusterSet {
        clusters,
        residual,
        rho,
        min_size,
        max_clusters,
    })
}

/// Conflict graph, Leiden and merge/filter in one call.
pub fn cluster_vehicles<T: Scalar>(
    weights: &CongestionWeights<T>,
    rho: f64,
    min_size: usize,
    max_clusters: usize,
    seed: u64,
) -> Result<ClusterSet> {
    let g = build_conflict_graph(weights);
    let partition = leiden(&g, rho, seed)?;
    merge_and_filter(&partition, &g, min_size, max_clusters, rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cliques() -> ConflictGraph {
        let mut edges = Vec::new();
        for base in [0, 5] {
            for a in 0..5 {
                for b in a + 1..5 {
                    edges.push((base + a, base + b, 1.0));
                }
            }
        }
        edges.push((4, 5, 1.0));
        ConflictGraph::from_edges(10, &edges)
    }

    #[test]
    fn empty_tensor_gives_empty_graph() {
        let w: CongestionWeights<f64> = CongestionWeights::new(2, vec![vec![0.0]; 3], 4.0, 10.0);
        let g = build_conflict_graph(&w);
        assert_eq!(g.node_count(), 0);
        assert!(leiden(&g, 1.0, 0).unwrap().is_empty());
    }

    #[test]
    fn pair_weights_are_summed() {
        let mut w: CongestionWeights<f64> = CongestionWeights::new(2, vec![vec![0.0; 2]; 2], 4.0, 10.0);
        w.add(0, 1, 0, 0, 3.0);
        w.add(0, 1, 1, 0, 4.0);
        let g = build_conflict_graph(&w);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight(0, 1), 7.0);
    }

    #[test]
    fn two_cliques_recovered() {
        let parts = leiden(&two_cliques(), 1.0, 7).unwrap();
        assert_eq!(parts, vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]]);
    }

    #[test]
    fn single_edge_graph() {
        let g = ConflictGraph::from_edges(2, &[(0, 1, 2.0)]);
        let parts = leiden(&g, 1.0, 0).unwrap();
        assert_eq!(parts.iter().map(Vec::len).sum::<usize>(), 2);
    }

    #[test]
    fn merge_prefers_heavier_neighbor() {
        // cluster {0} links to {1,2} with 5 and to {3,4} with 9
        let g = ConflictGraph::from_edges(
            5,
            &[(0, 1, 5.0), (1, 2, 20.0), (0, 3, 9.0), (3, 4, 20.0)],
        );
        let partition = vec![vec![0], vec![1, 2], vec![3, 4]];
        let cs = merge_and_filter(&partition, &g, 2, 10, 1.0).unwrap();
        assert!(cs.clusters.contains(&vec![0, 3, 4]));
        assert!(cs.clusters.contains(&vec![1, 2]));
    }

    #[test]
    fn fixed_point_when_constraints_hold() {
        let g = two_cliques();
        let partition = vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]];
        let cs = merge_and_filter(&partition, &g, 5, 2, 1.0).unwrap();
        assert_eq!(cs.clusters.len(), 2);
        assert!(cs.residual.is_empty());
    }

    #[test]
    fn isolated_singletons_are_batched_then_capped() {
        // 30 graph nodes with no edges between distinct clusters
        let g = ConflictGraph {
            n_vehicles: 30,
            vehicles: (0..30).collect(),
            adj: vec![Vec::new(); 30],
        };
        let partition: Vec<Vec<usize>> = (0..30).map(|v| vec![v]).collect();
        let cs = merge_and_filter(&partition, &g, 10, 2, 1.0).unwrap();
        assert_eq!(cs.clusters.len(), 2);
        assert!(cs.clusters.iter().all(|c| c.len() == 10));
        assert_eq!(cs.residual.len(), 10);
    }

    #[test]
    fn cluster_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clusters.csv");
        let cs = ClusterSet {
            clusters: vec![vec![1, 3], vec![0]],
            residual: vec![2],
            rho: 1.0,
            min_size: 1,
            max_clusters: 2,
        };
        cs.write(&path).unwrap();
        let back = ClusterSet::read(&path).unwrap();
        assert_eq!(back.clusters, cs.clusters);
        assert_eq!(back.residual, cs.residual);
    }
}
