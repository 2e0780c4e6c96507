//! Global congestion cost, baselines, solver comparisons and heatmap
//! exports.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::congestion::{detect_conflicts, CongestionWeights};
use crate::error::{Error, Result};
use crate::network::RoadNetwork;
use crate::qubo::{Assignment, QuboInstance};
use crate::routing::RouteSet;
use crate::scalar::Scalar;

/// Where a vehicle's final route choice came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Solver(String),
    Shortest,
    Random,
    Repair,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Solver(name) => f.write_str(name),
            Provenance::Shortest => f.write_str("shortest"),
            Provenance::Random => f.write_str("random"),
            Provenance::Repair => f.write_str("repair"),
        }
    }
}

impl Provenance {
    fn parse(s: &str) -> Self {
        match s {
            "shortest" => Provenance::Shortest,
            "random" => Provenance::Random,
            "repair" => Provenance::Repair,
            other => Provenance::Solver(other.to_string()),
        }
    }
}

/// Route choice for every vehicle in the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalAssignment {
    pub choices: Vec<usize>,
    pub provenance: Vec<Provenance>,
}

impl GlobalAssignment {
    pub fn uniform(choices: Vec<usize>, p: Provenance) -> Self {
        let provenance = vec![p; choices.len()];
        Self { choices, provenance }
    }

    pub fn len(&self) -> usize {
        self.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choices.is_empty()
    }

    /// Checks that every vehicle picks one of its real alternatives.
    pub fn check<T: Scalar>(&self, weights: &CongestionWeights<T>) -> Result<()> {
        if self.choices.len() != weights.n() || self.provenance.len() != weights.n() {
            return Err(Error::LengthMismatch {
                expected: weights.n(),
                got: self.choices.len(),
            });
        }
        for (i, &a) in self.choices.iter().enumerate() {
            if a >= weights.real_alternatives(i) {
                return Err(Error::invalid(format!("vehicle {i} assigned non-existent alternative {a}")));
            }
        }
        Ok(())
    }

    /// Overwrites the choices of `vehicle_ids` from a one-hot solver
    /// assignment; vehicles without a valid block keep their current choice.
    pub fn apply<T: Scalar>(&mut self, q: &QuboInstance<T>, x: &Assignment, p: &Provenance) -> Result<()> {
        if x.len() != q.n_var() {
            return Err(Error::LengthMismatch {
                expected: q.n_var(),
                got: x.len(),
            });
        }
        for (i, &v) in q.vehicle_ids().iter().enumerate() {
            if let Some(a) = q.block_choice(x, i) {
                self.choices[v] = a;
                self.provenance[v] = p.clone();
            }
        }
        Ok(())
    }

    /// Bit vector of this assignment over the vehicles of `q`.
    pub fn to_qubo_assignment<T: Scalar>(&self, q: &QuboInstance<T>) -> Assignment {
        let mut x = Assignment::zeros(q.n_var());
        for (i, &v) in q.vehicle_ids().iter().enumerate() {
            x.0[q.index(i, self.choices[v])] = true;
        }
        x
    }

    /// CSV `vehicle_id,alt,provenance`.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["vehicle_id", "alt", "provenance"])?;
        for (v, (a, p)) in self.choices.iter().zip(&self.provenance).enumerate() {
            w.write_record([v.to_string(), a.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut out = Self {
            choices: Vec::new(),
            provenance: Vec::new(),
        };
        for (row, rec) in crate::io::csv_reader(path)?.records().enumerate() {
            let rec = rec?;
            let bad = || Error::Parse {
                path: path.display().to_string(),
                line: row + 2,
                msg: "expected `vehicle_id,alt,provenance`".into(),
            };
            let v: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let a: usize = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if v != row {
                return Err(bad());
            }
            out.choices.push(a);
            out.provenance.push(Provenance::parse(rec.get(2).unwrap_or("")));
        }
        Ok(out)
    }
}

/// Pairwise congestion of the chosen routes over all vehicle pairs.
pub fn interaction_cost<T: Scalar>(weights: &CongestionWeights<T>, ga: &GlobalAssignment) -> Result<T> {
    ga.check(weights)?;
    let c = &ga.choices;
    Ok(weights
        .weights
        .iter()
        .filter(|(&(i, j, a, b), _)| c[i] == a && c[j] == b)
        .map(|(_, &w)| w)
        .sum())
}

/// Sum of duration penalties of the chosen routes.
pub fn penalty_cost<T: Scalar>(weights: &CongestionWeights<T>, ga: &GlobalAssignment) -> Result<T> {
    ga.check(weights)?;
    Ok(ga.choices.iter().enumerate().map(|(i, &a)| weights.penalties[i][a]).sum())
}

/// `Σ_{i<j} w[i,j,a_i,a_j] + Σ_i π[i][a_i]` over every vehicle.
pub fn congestion_cost<T: Scalar>(weights: &CongestionWeights<T>, ga: &GlobalAssignment) -> Result<T> {
    Ok(interaction_cost(weights, ga)? + penalty_cost(weights, ga)?)
}

/// Cost restricted to pairs inside `members` plus their penalties.
pub fn cluster_cost<T: Scalar>(weights: &CongestionWeights<T>, ga: &GlobalAssignment, members: &[usize]) -> Result<T> {
    ga.check(weights)?;
    let mut inside = vec![false; weights.n()];
    for &v in members {
        inside[v] = true;
    }
    let c = &ga.choices;
    let pairs: T = weights
        .weights
        .iter()
        .filter(|(&(i, j, a, b), _)| inside[i] && inside[j] && c[i] == a && c[j] == b)
        .map(|(_, &w)| w)
        .sum();
    let penalties: T = members.iter().map(|&i| weights.penalties[i][c[i]]).sum();
    Ok(pairs + penalties)
}

/// `(e_a - e_b) / e_b`; negative when `a` is better.
pub fn delta_energy(e_a: f64, e_b: f64) -> Result<f64> {
    if e_b == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((e_a - e_b) / e_b)
}

/// Fastest alternative per vehicle, lowest index on ties.
pub fn baseline_shortest(routes: &RouteSet) -> GlobalAssignment {
    let choices = routes
        .iter()
        .map(|alts| {
            let min = alts.iter().map(|r| r.duration).fold(f64::INFINITY, f64::min);
            alts.iter().position(|r| r.duration == min).unwrap_or(0)
        })
        .collect();
    GlobalAssignment::uniform(choices, Provenance::Shortest)
}

/// Uniformly random real alternative per vehicle.
pub fn baseline_random(routes: &RouteSet, seed: u64) -> GlobalAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let choices = routes.iter().map(|alts| rng.gen_range(0..alts.len().max(1))).collect();
    GlobalAssignment::uniform(choices, Provenance::Random)
}

/// `100 (base - opt) / base`, in percent. Zero when both costs are zero.
pub fn improvement_vs_baseline(cost_opt: f64, cost_base: f64) -> Result<f64> {
    if cost_base == 0.0 {
        return if cost_opt == 0.0 { Ok(0.0) } else { Err(Error::ZeroDenominator) };
    }
    Ok(100.0 * (cost_base - cost_opt) / cost_base)
}

/// Nonzero strictly-upper coefficients over `C(n_var, 2)`; 0 when
/// `n_var < 2`.
pub fn qubo_density<T: Scalar>(q: &QuboInstance<T>) -> f64 {
    let n = q.n_var();
    if n < 2 {
        return 0.0;
    }
    let off = q.coefficients().iter().filter(|(&(u, v), &c)| u < v && c != T::zero()).count();
    off as f64 / (n * (n - 1) / 2) as f64
}

/// Vehicle count per overlap degree (number of distinct conflicting
/// partners).
pub fn overlap_degrees<T: Scalar>(weights: &CongestionWeights<T>) -> BTreeMap<usize, usize> {
    let mut pairs: BTreeMap<(usize, usize), T> = BTreeMap::new();
    for (&(i, j, _, _), &w) in &weights.weights {
        *pairs.entry((i, j)).or_default() += w;
    }
    let mut degree = vec![0usize; weights.n()];
    for (&(i, j), &w) in &pairs {
        if w > T::zero() {
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    let mut hist = BTreeMap::new();
    for d in degree {
        *hist.entry(d).or_default() += 1;
    }
    hist
}

/// Congestion score per network edge under the chosen routes.
pub fn edge_scores<T: Scalar>(
    net: &RoadNetwork,
    routes: &RouteSet,
    ga: &GlobalAssignment,
    alpha: f64,
    w: f64,
    gamma: T,
) -> Result<Vec<T>> {
    if ga.len() != routes.len() {
        return Err(Error::LengthMismatch {
            expected: routes.len(),
            got: ga.len(),
        });
    }
    let chosen: RouteSet = routes
        .iter()
        .zip(&ga.choices)
        .map(|(alts, &a)| {
            let mut r = alts
                .get(a)
                .cloned()
                .ok_or_else(|| Error::invalid(format!("alternative {a} out of range")))?;
            r.alt = 0;
            Ok(vec![r])
        })
        .collect::<Result<_>>()?;
    let mut scores = vec![T::zero(); net.edges().len()];
    for e in detect_conflicts(&chosen, alpha, w, gamma)? {
        scores[e.edge] += e.score;
    }
    Ok(scores)
}

/// CSV `edge_id,score` for every edge.
pub fn write_heatmap_csv<T: Scalar>(path: &Path, net: &RoadNetwork, scores: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["edge_id", "score"])?;
    for (e, s) in net.edges().iter().zip(scores) {
        w.write_record([e.id.clone(), s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// GeoJSON FeatureCollection of edge LineStrings with `edge_id` and
/// `score` properties. Coordinates are `[lon, lat]`.
pub fn heatmap_geojson<T: Scalar>(net: &RoadNetwork, scores: &[T]) -> serde_json::Value {
    let features: Vec<serde_json::Value> = net
        .edges()
        .iter()
        .zip(scores)
        .map(|(e, s)| {
            let coords: Vec<[f64; 2]> = e.geometry.iter().map(|p| [p.lon, p.lat]).collect();
            json!({
                "type": "Feature",
                "geometry": {"type": "LineString", "coordinates": coords},
                "properties": {"edge_id": e.id, "score": s.as_f64()},
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

pub fn write_heatmap_geojson<T: Scalar>(path: &Path, net: &RoadNetwork, scores: &[T]) -> Result<()> {
    let text = serde_json::to_string_pretty(&heatmap_geojson(net, scores))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterCost {
    pub cluster: usize,
    pub size: usize,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaEnergy {
    pub a: String,
    pub b: String,
    pub energy_a: f64,
    pub energy_b: f64,
    pub delta: Option<f64>,
}

/// All metrics of one run, serialized as the report file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub n_vehicles: usize,
    pub total_cost: f64,
    pub interaction_cost: f64,
    pub penalty_cost: f64,
    pub cluster_costs: Vec<ClusterCost>,
    /// `total_cost` minus the sum of per-cluster costs.
    pub cross_cluster_cost: f64,
    pub residual_vehicles: usize,
    pub shortest_cost: f64,
    pub random_cost: f64,
    pub improvement_vs_shortest_pct: Option<f64>,
    pub improvement_vs_random_pct: Option<f64>,
    pub validity_rate: f64,
    pub repaired_vehicles: usize,
    pub qubo_densities: Vec<f64>,
    pub overlap_degrees: BTreeMap<usize, usize>,
    pub delta_energy: Vec<DeltaEnergy>,
}

impl EvaluationReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Inputs for [`evaluate`] beyond the weights and the final assignment.
#[derive(Debug, Clone, Default)]
pub struct EvaluationInputs {
    pub clusters: Vec<Vec<usize>>,
    pub residual: usize,
    pub random_seed: u64,
    /// Vehicles whose solver output was valid before repair, and total.
    pub valid_before_repair: (usize, usize),
    pub qubo_densities: Vec<f64>,
    pub delta_energy: Vec<DeltaEnergy>,
}

pub fn evaluate<T: Scalar>(
    weights: &CongestionWeights<T>,
    routes: &RouteSet,
    ga: &GlobalAssignment,
    inputs: &EvaluationInputs,
) -> Result<EvaluationReport> {
    let interaction = interaction_cost(weights, ga)?.as_f64();
    let penalty = penalty_cost(weights, ga)?.as_f64();
    let total = interaction + penalty;
    let cluster_costs = inputs
        .clusters
        .iter()
        .enumerate()
        .map(|(c, m)| {
            Ok(ClusterCost {
                cluster: c,
                size: m.len(),
                cost: cluster_cost(weights, ga, m)?.as_f64(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let shortest = congestion_cost(weights, &baseline_shortest(routes))?.as_f64();
    let random = congestion_cost(weights, &baseline_random(routes, inputs.random_seed))?.as_f64();
    let (valid, considered) = inputs.valid_before_repair;
    Ok(EvaluationReport {
        n_vehicles: ga.len(),
        total_cost: total,
        interaction_cost: interaction,
        penalty_cost: penalty,
        cross_cluster_cost: total - cluster_costs.iter().map(|c| c.cost).sum::<f64>(),
        cluster_costs,
        residual_vehicles: inputs.residual,
        shortest_cost: shortest,
        random_cost: random,
        improvement_vs_shortest_pct: improvement_vs_baseline(total, shortest).ok(),
        improvement_vs_random_pct: improvement_vs_baseline(total, random).ok(),
        validity_rate: if considered == 0 { 1.0 } else { valid as f64 / considered as f64 },
        repaired_vehicles: considered - valid,
        qubo_densities: inputs.qubo_densities.clone(),
        overlap_degrees: overlap_degrees(weights),
        delta_energy: inputs.delta_energy.clone(),
    })
}
