//! End-to-end workflow: configuration, file-backed stages and the run
//! manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::clustering::{cluster_vehicles, ClusterSet};
use crate::congestion::{build_weights, detect_conflicts, CongestionWeights};
use crate::demand::{generate_vehicles, read_vehicles, write_vehicles, DemandConfig, DEFAULT_ATTRACTION_RADIUS_M};
use crate::error::{Error, Result};
use crate::evaluation::{
    baseline_shortest, edge_scores, evaluate, qubo_density, write_heatmap_csv, write_heatmap_geojson, DeltaEnergy,
    EvaluationInputs, EvaluationReport, GlobalAssignment, Provenance,
};
use crate::geo::LatLon;
use crate::io::{read_to_string, sha256_file};
use crate::network::{clip_network, generate_grid, load_network, GridSpec, NetworkSelection, RoadNetwork};
use crate::qubo::{build_qubo, Assignment, QuboInstance};
use crate::routing::{compute_routes, read_routes, write_routes, RouteSet, RoutingConfig};
use crate::solvers::{read_results, repair, solver_by_name, write_results, ExhaustiveMode, ResultRecord, SolverConfig};

pub const NETWORK_FILE: &str = "network.txt";
pub const VEHICLES_FILE: &str = "vehicles.csv";
pub const ROUTE_POINTS_FILE: &str = "routes_points.csv";
pub const ROUTE_SUMMARY_FILE: &str = "routes_summary.csv";
pub const WEIGHTS_FILE: &str = "weights.csv";
pub const PENALTIES_FILE: &str = "penalties.csv";
pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const QUBO_DIR: &str = "qubo";
pub const SOLUTION_DIR: &str = "solutions";
pub const RESULTS_FILE: &str = "results.csv";
pub const ASSIGNMENT_FILE: &str = "assignment.csv";
pub const REPORT_FILE: &str = "report.json";
pub const HEATMAP_CSV: &str = "heatmap.csv";
pub const HEATMAP_GEOJSON: &str = "heatmap.geojson";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const TIMINGS_FILE: &str = "timings.json";

/// Files that carry wall-clock measurements and are left out of the
/// manifest hashes.
pub const UNHASHED: [&str; 3] = [MANIFEST_FILE, TIMINGS_FILE, RESULTS_FILE];

/// Road network source.
#[derive(Debug, Clone, PartialEq)]
pub enum NetworkSource {
    /// Synthetic grid centred on the configured center.
    Grid,
    File(PathBuf),
}

/// Every tunable of a run. Parsed from `key = value` lines; keys may be
/// written with `_` or `-`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub network: NetworkSource,
    pub grid_rows: usize,
    pub grid_cols: usize,
    pub grid_spacing: f64,
    pub grid_speed: f64,
    pub grid_speed_jitter: f64,
    pub center: LatLon,
    pub radius_km: f64,
    pub attraction: Option<LatLon>,
    pub attraction_radius: f64,
    pub n: usize,
    pub l_min: f64,
    pub l_max: f64,
    pub k: usize,
    pub alpha: f64,
    pub w: f64,
    pub gamma: f64,
    pub rho: f64,
    pub m: usize,
    pub max_clusters: usize,
    pub clustering: bool,
    pub seed: u64,
    pub solver: String,
    pub solver_config: SolverConfig,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            network: NetworkSource::Grid,
            grid_rows: 40,
            grid_cols: 40,
            grid_spacing: 100.0,
            grid_speed: 13.89,
            grid_speed_jitter: 0.0,
            center: LatLon::new(48.72, 21.26),
            radius_km: 2.0,
            attraction: None,
            attraction_radius: DEFAULT_ATTRACTION_RADIUS_M,
            n: 25_000,
            l_min: 600.0,
            l_max: 8000.0,
            k: 2,
            alpha: 10.0,
            w: 600.0,
            gamma: 4.0,
            rho: 4.0,
            m: 1000,
            max_clusters: 5,
            clustering: true,
            seed: 0,
            solver: "sa".to_string(),
            solver_config: SolverConfig::default(),
            output_dir: PathBuf::from("run"),
        }
    }
}

fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("bad value `{value}` for `{key}`")))
}

fn parse_opt<V: std::str::FromStr>(key: &str, value: &str) -> Result<Option<V>> {
    if value == "none" {
        Ok(None)
    } else {
        parse_value(key, value).map(Some)
    }
}

fn show_opt<V: ToString>(v: &Option<V>) -> String {
    v.as_ref().map_or_else(|| "none".to_string(), V::to_string)
}

impl PipelineConfig {
    /// Sets one field by name.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let k = key.as_str();
        let sc = &mut self.solver_config;
        match k {
            "network" => {
                self.network = if value == "grid" {
                    NetworkSource::Grid
                } else {
                    NetworkSource::File(PathBuf::from(value))
                }
            }
            "grid_rows" => self.grid_rows = parse_value(k, value)?,
            "grid_cols" => self.grid_cols = parse_value(k, value)?,
            "grid_spacing" => self.grid_spacing = parse_value(k, value)?,
            "grid_speed" => self.grid_speed = parse_value(k, value)?,
            "grid_speed_jitter" => self.grid_speed_jitter = parse_value(k, value)?,
            "center_lat" => self.center.lat = parse_value(k, value)?,
            "center_lon" => self.center.lon = parse_value(k, value)?,
            "radius_km" => self.radius_km = parse_value(k, value)?,
            "attraction_lat" | "attraction_lon" => match parse_opt::<f64>(k, value)? {
                None => self.attraction = None,
                Some(v) => {
                    let p = self.attraction.get_or_insert(self.center);
                    if k == "attraction_lat" {
                        p.lat = v;
                    } else {
                        p.lon = v;
                    }
                }
            },
            "attraction_radius" => self.attraction_radius = parse_value(k, value)?,
            "n" => self.n = parse_value(k, value)?,
            "l_min" => self.l_min = parse_value(k, value)?,
            "l_max" => self.l_max = parse_value(k, value)?,
            "k" => self.k = parse_value(k, value)?,
            "alpha" => self.alpha = parse_value(k, value)?,
            "w" => self.w = parse_value(k, value)?,
            "gamma" => self.gamma = parse_value(k, value)?,
            "rho" => self.rho = parse_value(k, value)?,
            "m" => self.m = parse_value(k, value)?,
            "max_clusters" => self.max_clusters = parse_value(k, value)?,
            "clustering" => self.clustering = parse_value(k, value)?,
            "seed" => self.seed = parse_value(k, value)?,
            "solver" => self.solver = value.to_string(),
            "time_limit" => sc.time_limit = parse_opt(k, value)?,
            "sweeps" => sc.sweeps = parse_opt(k, value)?,
            "reads" => sc.reads = parse_value(k, value)?,
            "t_initial" => sc.t_initial = parse_opt(k, value)?,
            "t_final" => sc.t_final = parse_opt(k, value)?,
            "cooling" => sc.cooling = parse_opt(k, value)?,
            "tenure" => sc.tenure = parse_opt(k, value)?,
            "max_stagnation" => sc.max_stagnation = parse_opt(k, value)?,
            "iterations" => sc.iterations = parse_opt(k, value)?,
            "exhaustive_mode" => {
                sc.exhaustive_mode = match value {
                    "feasible" => ExhaustiveMode::Feasible,
                    "full" => ExhaustiveMode::Full,
                    _ => return Err(Error::invalid("exhaustive_mode is `feasible` or `full`")),
                }
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => return Err(Error::invalid(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            cfg.set(key, value).map_err(|e| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, &path.display().to_string())
    }

    /// All settings except the output directory, which does not affect
    /// results.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let sc = &self.solver_config;
        let network = match &self.network {
            NetworkSource::Grid => "grid".to_string(),
            NetworkSource::File(p) => p.display().to_string(),
        };
        let pairs: Vec<(&str, String)> = vec![
            ("network", network),
            ("grid_rows", self.grid_rows.to_string()),
            ("grid_cols", self.grid_cols.to_string()),
            ("grid_spacing", self.grid_spacing.to_string()),
            ("grid_speed", self.grid_speed.to_string()),
            ("grid_speed_jitter", self.grid_speed_jitter.to_string()),
            ("center_lat", self.center.lat.to_string()),
            ("center_lon", self.center.lon.to_string()),
            ("radius_km", self.radius_km.to_string()),
            ("attraction_lat", show_opt(&self.attraction.map(|p| p.lat))),
            ("attraction_lon", show_opt(&self.attraction.map(|p| p.lon))),
            ("attraction_radius", self.attraction_radius.to_string()),
            ("n", self.n.to_string()),
            ("l_min", self.l_min.to_string()),
            ("l_max", self.l_max.to_string()),
            ("k", self.k.to_string()),
            ("alpha", self.alpha.to_string()),
            ("w", self.w.to_string()),
            ("gamma", self.gamma.to_string()),
            ("rho", self.rho.to_string()),
            ("m", self.m.to_string()),
            ("max_clusters", self.max_clusters.to_string()),
            ("clustering", self.clustering.to_string()),
            ("seed", self.seed.to_string()),
            ("solver", self.solver.clone()),
            ("time_limit", show_opt(&sc.time_limit)),
            ("sweeps", show_opt(&sc.sweeps)),
            ("reads", sc.reads.to_string()),
            ("t_initial", show_opt(&sc.t_initial)),
            ("t_final", show_opt(&sc.t_final)),
            ("cooling", show_opt(&sc.cooling)),
            ("tenure", show_opt(&sc.tenure)),
            ("max_stagnation", show_opt(&sc.max_stagnation)),
            ("iterations", show_opt(&sc.iterations)),
            (
                "exhaustive_mode",
                match sc.exhaustive_mode {
                    ExhaustiveMode::Feasible => "feasible",
                    ExhaustiveMode::Full => "full",
                }
                .to_string(),
            ),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.demand_config().validate()?;
        self.routing_config().validate()?;
        self.solver_config.validate()?;
        solver_by_name::<f64>(&self.solver, &self.solver_config)?;
        if !(self.gamma > 0.0) || !(self.rho > 0.0) || !(self.radius_km > 0.0) {
            return Err(Error::invalid("gamma, rho and radius_km must be > 0"));
        }
        if self.m == 0 || self.max_clusters == 0 {
            return Err(Error::invalid("m and max_clusters must be >= 1"));
        }
        Ok(())
    }

    pub fn demand_config(&self) -> DemandConfig {
        DemandConfig {
            n: self.n,
            l_min: self.l_min,
            l_max: self.l_max,
            attraction: self.attraction,
            attraction_radius: self.attraction_radius,
            seed: self.seed,
        }
    }

    pub fn routing_config(&self) -> RoutingConfig {
        RoutingConfig {
            k: self.k,
            alpha: self.alpha,
            w: self.w,
        }
    }

    /// Grid whose middle node sits on the configured center.
    pub fn grid_spec(&self) -> GridSpec {
        let half_h = (self.grid_rows.saturating_sub(1)) as f64 * self.grid_spacing / 2.0;
        let half_w = (self.grid_cols.saturating_sub(1)) as f64 * self.grid_spacing / 2.0;
        let origin = self.center.offset(-half_h, 0.0).offset(0.0, -half_w);
        GridSpec {
            speed_jitter: self.grid_speed_jitter,
            ..GridSpec::new(
                self.grid_rows,
                self.grid_cols,
                self.grid_spacing,
                self.grid_speed,
                origin,
                self.seed,
            )
        }
    }
}

/// Paths of the stage files inside a run directory.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn qubo(&self, cluster: usize) -> PathBuf {
        self.root.join(QUBO_DIR).join(format!("cluster_{cluster}.coo"))
    }

    pub fn lp(&self, cluster: usize) -> PathBuf {
        self.root.join(QUBO_DIR).join(format!("cluster_{cluster}.lp"))
    }

    pub fn solution(&self, cluster: usize) -> PathBuf {
        self.root.join(SOLUTION_DIR).join(format!("cluster_{cluster}.txt"))
    }

    fn ensure(&self) -> Result<()> {
        std::fs::create_dir_all(self.root.join(QUBO_DIR))?;
        std::fs::create_dir_all(self.root.join(SOLUTION_DIR))?;
        Ok(())
    }

    pub fn network(&self) -> Result<RoadNetwork> {
        load_network(&self.file(NETWORK_FILE))
    }

    pub fn routes(&self, net: &RoadNetwork, alpha: f64) -> Result<RouteSet> {
        read_routes(&self.file(ROUTE_POINTS_FILE), &self.file(ROUTE_SUMMARY_FILE), net, alpha)
    }

    pub fn weights(&self, cfg: &PipelineConfig) -> Result<CongestionWeights<f64>> {
        CongestionWeights::read(&self.file(WEIGHTS_FILE), &self.file(PENALTIES_FILE), cfg.k, cfg.gamma, cfg.alpha)
    }

    pub fn clusters(&self) -> Result<ClusterSet> {
        ClusterSet::read(&self.file(CLUSTERS_FILE))
    }

    /// QUBO files present, in cluster order.
    pub fn qubos(&self, n_clusters: usize) -> Result<Vec<QuboInstance<f64>>> {
        (0..n_clusters).map(|c| QuboInstance::load(&self.qubo(c))).collect()
    }

    pub fn solutions(&self, n_clusters: usize) -> Result<Vec<Assignment>> {
        (0..n_clusters)
            .map(|c| Assignment::from_bitstring(read_to_string(&self.solution(c))?.trim()))
            .collect()
    }
}

fn staged<V>(stage: &'static str, f: impl FnOnce() -> Result<V>) -> Result<V> {
    f().map_err(|e| e.in_stage(stage))
}

/// Network, vehicles and sampled alternative routes.
pub fn stage_generate(cfg: &PipelineConfig, dir: &RunDir) -> Result<()> {
    staged("generate", || {
        dir.ensure()?;
        let full = match &cfg.network {
            NetworkSource::Grid => generate_grid(&cfg.grid_spec())?,
            NetworkSource::File(p) => load_network(p)?,
        };
        let net = clip_network(&full, &NetworkSelection::new(cfg.center, cfg.radius_km)?)?;
        net.save(&dir.file(NETWORK_FILE))?;
        let net = dir.network()?;
        let vehicles = generate_vehicles(&net, &cfg.demand_config())?;
        write_vehicles(&dir.file(VEHICLES_FILE), &net, &vehicles)?;
        let vehicles = read_vehicles(&dir.file(VEHICLES_FILE), &net)?;
        let routes = compute_routes(&net, &vehicles, &cfg.routing_config())?;
        write_routes(&dir.file(ROUTE_POINTS_FILE), &dir.file(ROUTE_SUMMARY_FILE), &net, &routes)
    })
}

/// Congestion tensor and duration penalties.
pub fn stage_weights(cfg: &PipelineConfig, dir: &RunDir) -> Result<()> {
    staged("weights", || {
        let net = dir.network()?;
        let routes = dir.routes(&net, cfg.alpha)?;
        let entries = detect_conflicts(&routes, cfg.alpha, cfg.w, cfg.gamma)?;
        let weights = build_weights(&entries, &routes, cfg.k, cfg.gamma, cfg.alpha)?;
        weights.write(&dir.file(WEIGHTS_FILE), &dir.file(PENALTIES_FILE))
    })
}

/// Clusters file; a single all-vehicle cluster when clustering is off.
pub fn stage_cluster(cfg: &PipelineConfig, dir: &RunDir) -> Result<()> {
    staged("cluster", || {
        let weights = dir.weights(cfg)?;
        let clusters = if cfg.clustering {
            cluster_vehicles(&weights, cfg.rho, cfg.m, cfg.max_clusters, cfg.seed)?
        } else {
            ClusterSet::single(weights.n())
        };
        clusters.write(&dir.file(CLUSTERS_FILE))
    })
}

/// One COO file per cluster.
pub fn stage_build_qubo(cfg: &PipelineConfig, dir: &RunDir) -> Result<()> {
    staged("build-qubo", || {
        dir.ensure()?;
        let weights = dir.weights(cfg)?;
        let clusters = dir.clusters()?;
        for (c, members) in clusters.clusters.iter().enumerate() {
            let q = build_qubo(&weights.restrict(members), members)?;
            q.save(&dir.qubo(c))?;
        }
        Ok(())
    })
}

/// Solves, repairs and combines per-cluster solutions into the global
/// assignment. Vehicles outside every cluster take their fastest route.
pub fn stage_solve(cfg: &PipelineConfig, dir: &RunDir) -> Result<()> {
    staged("solve", || {
        dir.ensure()?;
        let net = dir.network()?;
        let routes = dir.routes(&net, cfg.alpha)?;
        let clusters = dir.clusters()?;
        let qubos = dir.qubos(clusters.clusters.len())?;
        let mut ga = baseline_shortest(&routes);
        let mut rows = Vec::with_capacity(qubos.len());
        for (c, q) in qubos.iter().enumerate() {
            let sc = SolverConfig {
                seed: cfg.seed.wrapping_add(c as u64),
                ..cfg.solver_config.clone()
            };
            let solver = solver_by_name::<f64>(&cfg.solver, &sc)?;
            let result = solver.solve(q)?;
            std::fs::write(dir.solution(c), format!("{}\n", result.assignment.to_bitstring()))?;
            let fixed = repair(q, &result.assignment)?;
            let repaired = fixed != result.assignment;
            ga.apply(q, &fixed, &Provenance::Solver(result.solver.clone()))?;
            for i in 0..q.n_vehicles() {
                if q.block_choice(&result.assignment, i).is_none() {
                    ga.provenance[q.vehicle_ids()[i]] = Provenance::Repair;
                }
            }
            rows.push(ResultRecord::new(&result, repaired));
        }
        write_results(&dir.file(RESULTS_FILE), &rows)?;
        ga.write(&dir.file(ASSIGNMENT_FILE))
    })
}

/// Totals of two results files compared with the normalized energy gap.
pub fn compare_results(a: &Path, b: &Path) -> Result<DeltaEnergy> {
    let total = |p: &Path| -> Result<(String, f64)> {
        let rows = read_results(p)?;
        let name = rows.first().map_or_else(String::new, |r| r.solver.clone());
        Ok((name, rows.iter().map(|r| r.energy).sum()))
    };
    let (name_a, energy_a) = total(a)?;
    let (name_b, energy_b) = total(b)?;
    Ok(DeltaEnergy {
        a: format!("{name_a} ({})", a.display()),
        b: format!("{name_b} ({})", b.display()),
        energy_a,
        energy_b,
        delta: crate::evaluation::delta_energy(energy_a, energy_b).ok(),
    })
}

/// Report over the global assignment, plus optional solver comparisons.
pub fn stage_evaluate(cfg: &PipelineConfig, dir: &RunDir, compare: &[DeltaEnergy]) -> Result<EvaluationReport> {
    staged("evaluate", || {
        let net = dir.network()?;
        let routes = dir.routes(&net, cfg.alpha)?;
        let weights = dir.weights(cfg)?;
        let clusters = dir.clusters()?;
        let ga = GlobalAssignment::read(&dir.file(ASSIGNMENT_FILE))?;
        let qubos = dir.qubos(clusters.clusters.len())?;
        let raw = dir.solutions(clusters.clusters.len())?;

        let mut valid = 0;
        let mut considered = 0;
        let mut solver_energy = 0.0;
        let mut shortest_energy = 0.0;
        for (q, x) in qubos.iter().zip(&raw) {
            considered += q.n_vehicles();
            valid += (0..q.n_vehicles()).filter(|&i| q.block_choice(x, i).is_some()).count();
            solver_energy += q.energy(&ga.to_qubo_assignment(q))?;
            shortest_energy += q.energy(&q.shortest_assignment())?;
        }
        let mut delta_energy = Vec::new();
        if !qubos.is_empty() {
            delta_energy.push(DeltaEnergy {
                a: cfg.solver.clone(),
                b: "shortest".to_string(),
                energy_a: solver_energy,
                energy_b: shortest_energy,
                delta: crate::evaluation::delta_energy(solver_energy, shortest_energy).ok(),
            });
        }
        delta_energy.extend(compare.iter().cloned());
        let inputs = EvaluationInputs {
            clusters: clusters.clusters.clone(),
            residual: clusters.residual.len(),
            random_seed: cfg.seed,
            valid_before_repair: (valid, considered),
            qubo_densities: qubos.iter().map(qubo_density).collect(),
            delta_energy,
        };
        let report = evaluate(&weights, &routes, &ga, &inputs)?;
        report.write(&dir.file(REPORT_FILE))?;
        Ok(report)
    })
}

/// Heatmap CSV and GeoJSON, and optionally an LP file per QUBO.
pub fn stage_export(cfg: &PipelineConfig, dir: &RunDir, heatmap: bool, lp: bool) -> Result<()> {
    staged("export", || {
        if heatmap {
            let net = dir.network()?;
            let routes = dir.routes(&net, cfg.alpha)?;
            let ga = GlobalAssignment::read(&dir.file(ASSIGNMENT_FILE))?;
            let scores = edge_scores(&net, &routes, &ga, cfg.alpha, cfg.w, cfg.gamma)?;
            write_heatmap_csv(&dir.file(HEATMAP_CSV), &net, &scores)?;
            write_heatmap_geojson(&dir.file(HEATMAP_GEOJSON), &net, &scores)?;
        }
        if lp {
            let clusters = dir.clusters()?;
            for (c, q) in dir.qubos(clusters.clusters.len())?.iter().enumerate() {
                q.save_lp(&dir.lp(c))?;
            }
        }
        Ok(())
    })
}

/// Config snapshot, artifact hashes and versions of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: BTreeMap<String, String>,
    pub artifacts: BTreeMap<String, String>,
    pub unhashed: Vec<String>,
    pub versions: BTreeMap<String, String>,
}

impl RunManifest {
    /// Hashes every file under the run directory except [`UNHASHED`].
    pub fn collect(cfg: &PipelineConfig, dir: &RunDir) -> Result<Self> {
        let mut artifacts = BTreeMap::new();
        let mut stack = vec![dir.root.clone()];
        while let Some(d) = stack.pop() {
            for entry in std::fs::read_dir(&d)? {
                let path = entry?.path();
                if path.is_dir() {
                    stack.push(path);
                    continue;
                }
                let rel = path
                    .strip_prefix(&dir.root)
                    .expect("walk stays under root")
                    .components()
                    .map(|c| c.as_os_str().to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join("/");
                if !UNHASHED.contains(&rel.as_str()) {
                    artifacts.insert(rel, sha256_file(&path)?);
                }
            }
        }
        let versions = BTreeMap::from([
            ("traffic-qubo".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("manifest".to_string(), "1".to_string()),
        ]);
        Ok(Self {
            config: cfg.entries(),
            artifacts,
            unhashed: UNHASHED.iter().map(|s| s.to_string()).collect(),
            versions,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Runs every stage in order into `cfg.output_dir`, writing the manifest
/// and per-stage wall-clock timings.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let dir = RunDir::new(&cfg.output_dir);
    let mut timings: BTreeMap<&str, f64> = BTreeMap::new();
    let mut timed = |name: &'static str, f: &dyn Fn() -> Result<()>| -> Result<()> {
        let t = Instant::now();
        f()?;
        timings.insert(name, t.elapsed().as_secs_f64());
        Ok(())
    };
    timed("generate", &|| stage_generate(cfg, &dir))?;
    timed("weights", &|| stage_weights(cfg, &dir))?;
    timed("cluster", &|| stage_cluster(cfg, &dir))?;
    timed("build-qubo", &|| stage_build_qubo(cfg, &dir))?;
    timed("solve", &|| stage_solve(cfg, &dir))?;
    timed("evaluate", &|| stage_evaluate(cfg, &dir, &[]).map(|_| ()))?;
    timed("export", &|| stage_export(cfg, &dir, true, true))?;
    std::fs::write(dir.file(TIMINGS_FILE), serde_json::to_string_pretty(&timings)?)?;
    let manifest = RunManifest::collect(cfg, &dir)?;
    manifest.write(&dir.file(MANIFEST_FILE))?;
    Ok(manifest)
}
