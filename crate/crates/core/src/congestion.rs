//! Leader-follower congestion scoring, the pairwise weight tensor and
//! per-route duration penalties.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use crate::error::{Error, Result};
pub use crate::geo::haversine;
use crate::routing::RouteSet;
use crate::scalar::Scalar;

/// Congestion score of one leader-follower pair at one time step:
/// `alpha * max(1 - d / (gamma * v_mean), 0)`.
///
/// When both vehicles are stopped the headway is undefined; co-located
/// stopped vehicles score `alpha`, separated ones score 0.
pub fn pair_score<T: Scalar>(d: T, v_leader: T, v_follower: T, alpha: T, gamma: T) -> T {
    let v_mean = (v_leader + v_follower) / T::of(2.0);
    if v_mean <= T::zero() {
        return if d <= T::zero() { alpha } else { T::zero() };
    }
    alpha * (T::one() - d / (gamma * v_mean)).max(T::zero())
}

/// Accumulated score of `leader` (on alternative `leader_alt`) ahead of
/// `follower` on one directed edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongestionEntry<T> {
    pub edge: usize,
    pub leader: usize,
    pub follower: usize,
    pub leader_alt: usize,
    pub follower_alt: usize,
    pub score: T,
}

type EntryKey = (usize, usize, usize, usize, usize);

fn check_alpha(routes: &RouteSet, alpha: f64) -> Result<()> {
    for r in routes.iter().flatten() {
        if r.alpha != alpha {
            return Err(Error::MixedAlpha(alpha, r.alpha));
        }
    }
    Ok(())
}

/// Scores every leader-follower pair sharing a directed edge at the same
/// time step and sums the scores per `(edge, leader, follower, alts)`.
///
/// The leader is the vehicle further along the edge; on equal offsets the
/// lower vehicle id leads. Zero scores produce no entry. Output is sorted by
/// key.
pub fn detect_conflicts<T: Scalar>(routes: &RouteSet, alpha: f64, w: f64, gamma: T) -> Result<Vec<CongestionEntry<T>>> {
    if !(alpha > 0.0) || !(gamma > T::zero()) {
        return Err(Error::invalid("alpha and gamma must be > 0"));
    }
    check_alpha(routes, alpha)?;
    let steps = (w / alpha + 1e-9).floor() as usize;
    let alpha_t = T::of(alpha);
    let mut acc: HashMap<EntryKey, T> = HashMap::new();
    // (edge, dir, vehicle, alt, point) for everyone present at a step
    let mut present: Vec<(usize, (usize, usize), usize, usize, usize)> = Vec::new();

    for m in 0..=steps {
        present.clear();
        for r in routes.iter().flatten() {
            if let Some(p) = r.points.get(m) {
                present.push((p.edge, p.dir, r.vehicle, r.alt, m));
            }
        }
        present.sort_unstable();
        for group in present.chunk_by(|a, b| a.0 == b.0 && a.1 == b.1) {
            if group.len() < 2 {
                continue;
            }
            for (x, &(edge, _, vi, ai, _)) in group.iter().enumerate() {
                for &(_, _, vj, aj, _) in &group[x + 1..] {
                    if vi == vj {
                        continue;
                    }
                    let pi = &routes[vi][ai].points[m];
                    let pj = &routes[vj][aj].points[m];
                    // group is sorted by vehicle id, so vi < vj here
                    let (lead, follow) = if pj.offset > pi.offset {
                        ((vj, aj, pj), (vi, ai, pi))
                    } else {
                        ((vi, ai, pi), (vj, aj, pj))
                    };
                    let d = haversine(
                        (T::of(lead.2.pos.lat), T::of(lead.2.pos.lon)),
                        (T::of(follow.2.pos.lat), T::of(follow.2.pos.lon)),
                    );
                    let s = pair_score(d, T::of(lead.2.speed), T::of(follow.2.speed), alpha_t, gamma);
                    if s > T::zero() {
                        *acc.entry((edge, lead.0, follow.0, lead.1, follow.1)).or_default() += s;
                    }
                }
            }
        }
    }
    let mut out: Vec<CongestionEntry<T>> = acc
        .into_iter()
        .map(|((edge, leader, follower, leader_alt, follower_alt), score)| CongestionEntry {
            edge,
            leader,
            follower,
            leader_alt,
            follower_alt,
            score,
        })
        .collect();
    out.sort_unstable_by_key(|e| (e.edge, e.leader, e.follower, e.leader_alt, e.follower_alt));
    Ok(out)
}

/// Sparse pairwise congestion tensor plus duration penalties.
///
/// Weights are stored once per unordered vehicle pair under the key
/// `(i, j, a_i, a_j)` with `i < j`; the stored value is the sum of both
/// leader/follower orientations. Absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CongestionWeights<T> {
    /// Alternatives per vehicle in the QUBO (uniform).
    pub k: usize,
    /// Per vehicle, duration penalty of each real alternative; its length is
    /// the number of real alternatives.
    pub penalties: Vec<Vec<T>>,
    pub weights: BTreeMap<(usize, usize, usize, usize), T>,
    pub gamma: T,
    pub alpha: T,
}

impl<T: Scalar> CongestionWeights<T> {
    /// Empty tensor for vehicles with the given penalties.
    pub fn new(k: usize, penalties: Vec<Vec<T>>, gamma: T, alpha: T) -> Self {
        Self {
            k,
            penalties,
            weights: BTreeMap::new(),
            gamma,
            alpha,
        }
    }

    pub fn n(&self) -> usize {
        self.penalties.len()
    }

    pub fn real_alternatives(&self, vehicle: usize) -> usize {
        self.penalties[vehicle].len()
    }

    /// Weight for vehicle `i` on alternative `a` and `j` on `b`, either order.
    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> T {
        let key = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        self.weights.get(&key).copied().unwrap_or_else(T::zero)
    }

    /// Adds to the symmetric weight of `(i, a)` with `(j, b)`.
    pub fn add(&mut self, i: usize, j: usize, a: usize, b: usize, w: T) {
        assert_ne!(i, j, "no self interactions");
        let key = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        *self.weights.entry(key).or_default() += w;
    }

    /// Total weight between two vehicles over all alternative pairs.
    pub fn pair_total(&self, i: usize, j: usize) -> T {
        let (i, j) = (i.min(j), i.max(j));
        self.weights
            .range((i, j, 0, 0)..=(i, j, usize::MAX, usize::MAX))
            .map(|(_, &w)| w)
            .sum()
    }

    /// Alternative with zero penalty; lowest index on ties.
    pub fn shortest_alt(&self, vehicle: usize) -> usize {
        let p = &self.penalties[vehicle];
        let min = p.iter().copied().fold(T::infinity(), T::min);
        p.iter().position(|&x| x == min).unwrap_or(0)
    }

    /// Restriction to a subset of vehicles, renumbered in the given order.
    pub fn restrict(&self, vehicles: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n()];
        for (l, &v) in vehicles.iter().enumerate() {
            local[v] = l;
        }
        let mut out = Self::new(
            self.k,
            vehicles.iter().map(|&v| self.penalties[v].clone()).collect(),
            self.gamma,
            self.alpha,
        );
        for (&(i, j, a, b), &w) in &self.weights {
            if local[i] != usize::MAX && local[j] != usize::MAX {
                out.add(local[i], local[j], a, b, w);
            }
        }
        out
    }

    pub fn write(&self, weights_path: &Path, penalties_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(weights_path)?;
        w.write_record(["i", "j", "a_i", "a_j", "weight"])?;
        for (&(i, j, a, b), v) in &self.weights {
            w.write_record([i.to_string(), j.to_string(), a.to_string(), b.to_string(), v.to_string()])?;
        }
        w.flush()?;
        let mut p = csv::Writer::from_path(penalties_path)?;
        p.write_record(["vehicle_id", "alt", "pi_seconds"])?;
        for (v, pis) in self.penalties.iter().enumerate() {
            for (a, pi) in pis.iter().enumerate() {
                p.write_record([v.to_string(), a.to_string(), pi.to_string()])?;
            }
        }
        p.flush()?;
        Ok(())
    }

    pub fn read(weights_path: &Path, penalties_path: &Path, k: usize, gamma: T, alpha: T) -> Result<Self> {
        fn field<V: std::str::FromStr>(rec: &csv::StringRecord, i: usize, what: &str) -> Result<V> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::invalid(format!("bad {what} in record {rec:?}")))
        }
        let mut penalties: Vec<Vec<T>> = Vec::new();
        for rec in crate::io::csv_reader(penalties_path)?.records() {
            let rec = rec?;
            let v: usize = field(&rec, 0, "vehicle_id")?;
            let a: usize = field(&rec, 1, "alt")?;
            let pi: T = field(&rec, 2, "pi_seconds")?;
            if v == penalties.len() {
                penalties.push(Vec::new());
            }
            if v + 1 != penalties.len() || a != penalties[v].len() || a >= k {
                return Err(Error::invalid(format!("penalty rows out of order at vehicle {v} alt {a}")));
            }
            penalties[v].push(pi);
        }
        let mut out = Self::new(k, penalties, gamma, alpha);
        for rec in crate::io::csv_reader(weights_path)?.records() {
            let rec = rec?;
            let (i, j, a, b): (usize, usize, usize, usize) = (
                field(&rec, 0, "i")?,
                field(&rec, 1, "j")?,
                field(&rec, 2, "a_i")?,
                field(&rec, 3, "a_j")?,
            );
            let w: T = field(&rec, 4, "weight")?;
            if i >= j || j >= out.n() || a >= out.real_alternatives(i) || b >= out.real_alternatives(j) {
                return Err(Error::invalid(format!("weight key ({i},{j},{a},{b}) out of range")));
            }
            out.weights.insert((i, j, a, b), w);
        }
        Ok(out)
    }
}

/// Aggregates entries over edges into the symmetrized tensor and derives
/// duration penalties `dur(i, a) - min_b dur(i, b)` from the routes.
pub fn build_weights<T: Scalar>(
    entries: &[CongestionEntry<T>],
    routes: &RouteSet,
    k: usize,
    gamma: T,
    alpha: T,
) -> Result<CongestionWeights<T>> {
    let mut penalties = Vec::with_capacity(routes.len());
    for (v, alts) in routes.iter().enumerate() {
        if alts.is_empty() || alts.len() > k {
            return Err(Error::invalid(format!(
                "vehicle {v} has {} routes, expected 1..={k}",
                alts.len()
            )));
        }
        let min = alts.iter().map(|r| r.duration).fold(f64::INFINITY, f64::min);
        penalties.push(alts.iter().map(|r| T::of(r.duration - min)).collect());
    }
    let mut out = CongestionWeights::new(k, penalties, gamma, alpha);
    for e in entries {
        if e.score > T::zero() {
            out.add(e.leader, e.follower, e.leader_alt, e.follower_alt, e.score);
        }
    }
    Ok(out)
}
