//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::path::Path;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, RngAlgorithm, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traffic_qubo::clustering::{leiden, merge_and_filter, ConflictGraph};
use traffic_qubo::congestion::{build_weights, detect_conflicts, pair_score};
use traffic_qubo::evaluation::GlobalAssignment;
use traffic_qubo::geo::haversine;
use traffic_qubo::pipeline::{run_pipeline, PipelineConfig, RunDir, ASSIGNMENT_FILE, MANIFEST_FILE, REPORT_FILE};
use traffic_qubo::qubo::{build_qubo, Assignment};
use traffic_qubo::solvers::{repair, Exhaustive, ExhaustiveMode, QuboSolver, SimulatedAnnealing, SolverConfig, TabuSearch};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {:.1} s, limit {} s", t.as_secs_f64(), limit.as_secs()))
}

/// The 200 seeded instances shared by the first two checks.
fn small_instances() -> Vec<traffic_qubo::Weights> {
    (0..200u64)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 2 + (seed as usize % 5);
            common::random_weights(&mut rng, n, 2, 0.6)
        })
        .collect()
}

fn lambda_enforcement() -> Outcome {
    let start = Instant::now();
    let mut gaps = Vec::new();
    for (idx, w) in small_instances().iter().enumerate() {
        let n = w.n();
        let q = build_qubo(w, &(0..n).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let (mut valid, mut invalid) = (f64::INFINITY, f64::INFINITY);
        for mask in 0..1u64 << (2 * n) {
            let x = common::bits(mask, 2 * n);
            let e = q.energy(&Assignment(x.clone())).unwrap();
            if common::is_one_hot(w, &x) {
                valid = valid.min(e);
            } else {
                invalid = invalid.min(e);
            }
        }
        ensure(invalid > valid, || format!("instance {idx}: invalid {invalid} <= valid {valid}"))?;
        gaps.push(invalid - valid);
    }
    within(start, Duration::from_secs(30), "enumeration")?;
    let min_gap = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(format!("200/200 instances, smallest invalid-valid gap {min_gap:.3}, {:.2} s", start.elapsed().as_secs_f64()))
}

fn matrix_formula_equivalence() -> Outcome {
    let mut checked = 0usize;
    let mut worst = 0.0f64;
    for (idx, w) in small_instances().iter().enumerate() {
        let n = w.n();
        let q = build_qubo(w, &(0..n).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let lambda = common::oracle_lambda(w);
        for mask in 0..1u64 << (2 * n) {
            let x = common::bits(mask, 2 * n);
            let direct = common::direct_energy(w, lambda, &x);
            let e = q.energy(&Assignment(x)).unwrap();
            let rel = (e - direct).abs() / direct.abs().max(1.0);
            worst = worst.max(rel);
            ensure(rel <= 1e-9, || format!("instance {idx} mask {mask}: {e} vs {direct}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} bitstrings, worst relative error {worst:.1e}"))
}

fn congestion_oracle() -> Outcome {
    let mut compared = 0;
    for seed in 0..50u64 {
        let n = 4 + (seed as usize % 7);
        let s = common::scenario(1000 + seed, 7, n, true);
        let entries = detect_conflicts(&s.routes, 10.0, 600.0, 4.0).map_err(|e| e.to_string())?;
        let w = build_weights(&entries, &s.routes, 2, 4.0, 10.0).map_err(|e| e.to_string())?;
        let oracle = common::oracle_weights(&s.routes, 4.0, 10.0, 60);
        ensure(w.weights.len() == oracle.len(), || {
            format!("seed {seed}: {} weights vs {} in the oracle", w.weights.len(), oracle.len())
        })?;
        for (key, &v) in &oracle {
            let got = w.weights.get(key).copied().unwrap_or(0.0);
            ensure((got - v).abs() <= 1e-9 * v.abs().max(1.0), || format!("seed {seed} {key:?}: {got} vs {v}"))?;
        }
        compared += oracle.len();
    }
    ensure(compared > 50, || format!("only {compared} nonzero weights compared"))?;
    Ok(format!("50 instances, {compared} nonzero weights equal within 1e-9"))
}

fn heuristic_quality() -> Outcome {
    let start = Instant::now();
    let (mut sa_hits, mut tabu_hits) = (0, 0);
    for seed in 0..100u64 {
        let w = if seed % 2 == 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
            common::random_weights(&mut rng, 10, 2, 0.4)
        } else {
            common::scenario(5000 + seed, 6, 10, true).weights
        };
        let q = build_qubo(&w, &(0..10).collect::<Vec<_>>()).map_err(|e| e.to_string())?;
        let best = Exhaustive { mode: ExhaustiveMode::Feasible }.solve(&q).map_err(|e| e.to_string())?.energy;
        let shortest = q.energy(&q.shortest_assignment()).unwrap();
        let sa = SimulatedAnnealing::new(SolverConfig::with_seed(seed)).solve(&q).map_err(|e| e.to_string())?;
        let tabu = TabuSearch::new(SolverConfig::with_seed(seed)).solve(&q).map_err(|e| e.to_string())?;
        for r in [&sa, &tabu] {
            ensure(r.energy <= shortest, || format!("seed {seed}: {} {} above shortest {shortest}", r.solver, r.energy))?;
        }
        let hit = |e: f64| (e - best).abs() <= 1e-3 * best.abs().max(1.0);
        sa_hits += usize::from(hit(sa.energy));
        tabu_hits += usize::from(hit(tabu.energy));
    }
    within(start, Duration::from_secs(60), "solving")?;
    let detail = format!("SA {sa_hits}/100, Tabu {tabu_hits}/100 optimal, {:.2} s", start.elapsed().as_secs_f64());
    ensure(sa_hits >= 95 && tabu_hits >= 95, || detail.clone())?;
    Ok(detail)
}

fn report_field(dir: &Path, key: &str) -> f64 {
    let text = std::fs::read_to_string(dir.join(REPORT_FILE)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v[key].as_f64().unwrap_or(f64::NAN)
}

fn attraction_config(dir: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::default();
    for (k, v) in [
        ("grid_rows", "20"),
        ("grid_cols", "20"),
        ("n", "500"),
        ("clustering", "false"),
        ("attraction_lat", "48.72"),
        ("attraction_lon", "21.26"),
    ] {
        c.set(k, v).unwrap();
    }
    c.output_dir = dir.to_path_buf();
    c
}

fn congestion_improvement() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    run_pipeline(&attraction_config(tmp.path())).map_err(|e| e.to_string())?;
    within(start, Duration::from_secs(300), "pipeline")?;
    let cost = report_field(tmp.path(), "total_cost");
    let base = report_field(tmp.path(), "shortest_cost");
    let pct = report_field(tmp.path(), "improvement_vs_shortest_pct");
    let detail = format!(
        "cost {cost:.1} vs shortest {base:.1}, improvement {pct:.2}%, {:.1} s",
        start.elapsed().as_secs_f64()
    );
    ensure(cost < base && pct >= 5.0, || detail.clone())?;
    Ok(detail)
}

fn clustering_reduction() -> Outcome {
    let n = 2500;
    let min_size = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let g = common::planted_graph(&mut rng, 25, 100, 0.1, 0.0005);
    let start = Instant::now();
    let parts = leiden(&g, 1.0, 0).map_err(|e| e.to_string())?;
    let disconnected = parts.iter().filter(|p| !common::is_connected(&g, p)).count();
    ensure(disconnected == 0, || format!("{disconnected} disconnected communities"))?;
    let cs = merge_and_filter(&parts, &g, min_size, 30, 1.0).map_err(|e| e.to_string())?;
    let sq = cs.squared_size_sum();
    ensure(sq <= n * n / 20, || format!("sum of squared sizes {sq} > {}", n * n / 20))?;
    ensure(cs.clusters.iter().all(|c| c.len() >= min_size), || "cluster below minimum size".into())?;

    let mut edges = Vec::new();
    for base in [0, 5] {
        for a in 0..5 {
            for b in a + 1..5 {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
    edges.push((4, 5, 1.0));
    let fixture = leiden(&ConflictGraph::from_edges(10, &edges), 1.0, 0).map_err(|e| e.to_string())?;
    ensure(fixture == vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7, 8, 9]], || format!("two-clique fixture gave {fixture:?}"))?;
    Ok(format!(
        "{} communities, {} kept clusters, sum |C|^2 = {sq} (n^2 = {}, factor {:.1}), {:.2} s",
        parts.len(),
        cs.clusters.len(),
        n * n,
        (n * n) as f64 / sq as f64,
        start.elapsed().as_secs_f64()
    ))
}

fn score_properties() -> Outcome {
    let config = PropConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PropConfig::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let strategy = (0.0..500.0f64, 0.0..500.0f64, 0.01..40.0f64, 0.01..40.0f64, 0.1..50.0f64, 0.5..10.0f64);
    runner
        .run(&strategy, |(d1, d2, v1, v2, alpha, gamma)| {
            let s = pair_score(d1, v1, v2, alpha, gamma);
            prop_assert!((0.0..=alpha).contains(&s));
            prop_assert_eq!(pair_score(0.0, v1, v2, alpha, gamma), alpha);
            let reach = gamma * (v1 + v2) / 2.0;
            prop_assert_eq!(pair_score(reach + d1, v1, v2, alpha, gamma), 0.0);
            let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
            prop_assert!(pair_score(lo, v1, v2, alpha, gamma) >= pair_score(hi, v1, v2, alpha, gamma));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("10000 random inputs".into())
}

fn haversine_accuracy() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 1000 {
        let p = (rng.gen_range(-70.0..70.0), rng.gen_range(-180.0..180.0));
        let q = (p.0 + rng.gen_range(-0.45..0.45), p.1 + rng.gen_range(-0.45..0.45));
        let d = haversine(p, q);
        if d >= 50_000.0 {
            continue;
        }
        worst = worst.max((d - common::cosine_law_distance(p, q)).abs());
        pairs += 1;
    }
    ensure(worst <= 5.0, || format!("max deviation {worst:.3} m"))?;
    Ok(format!("1000 pairs under 50 km, max deviation {worst:.2e} m"))
}

fn reproducibility() -> Outcome {
    let config = |dir: &Path| {
        let mut c = attraction_config(dir);
        for (k, v) in [("n", "300"), ("clustering", "true"), ("m", "40")] {
            c.set(k, v).unwrap();
        }
        c
    };
    let (a, b) = (tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?);
    let ma = run_pipeline(&config(a.path())).map_err(|e| e.to_string())?;
    run_pipeline(&config(b.path())).map_err(|e| e.to_string())?;
    let (fa, fb) = (
        std::fs::read(a.path().join(MANIFEST_FILE)).map_err(|e| e.to_string())?,
        std::fs::read(b.path().join(MANIFEST_FILE)).map_err(|e| e.to_string())?,
    );
    ensure(fa == fb, || "manifests differ".into())?;
    Ok(format!("{} artifact hashes identical across two runs", ma.artifacts.len()))
}

fn validity_after_repair() -> Outcome {
    let scenarios: [(&str, bool, usize); 5] = [
        ("sa", false, 80),
        ("tabu", false, 80),
        ("exhaustive", false, 40),
        ("sa", true, 200),
        ("tabu", true, 200),
    ];
    let mut vehicles = 0;
    for (solver, clustering, n) in scenarios {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut c = attraction_config(tmp.path());
        c.grid_rows = 12;
        c.grid_cols = 12;
        c.n = n;
        c.clustering = clustering;
        c.m = 20;
        c.solver = solver.to_string();
        run_pipeline(&c).map_err(|e| e.to_string())?;
        let dir = RunDir::new(tmp.path());
        let weights = dir.weights(&c).map_err(|e| e.to_string())?;
        let ga = GlobalAssignment::read(&dir.file(ASSIGNMENT_FILE)).map_err(|e| e.to_string())?;
        ga.check(&weights).map_err(|e| format!("{solver}: {e}"))?;
        let clusters = dir.clusters().map_err(|e| e.to_string())?;
        for q in dir.qubos(clusters.clusters.len()).map_err(|e| e.to_string())? {
            ensure(q.is_valid(&ga.to_qubo_assignment(&q)).unwrap(), || format!("{solver}: cluster assignment invalid"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(q.n_var() as u64);
            for _ in 0..50 {
                let x = Assignment((0..q.n_var()).map(|_| rng.gen_bool(0.5)).collect());
                ensure(q.is_valid(&repair(&q, &x).unwrap()).unwrap(), || "repair left an invalid block".into())?;
            }
        }
        vehicles += ga.len();
    }
    Ok(format!("5 scenarios, {vehicles} vehicles, all one-hot over real routes"))
}

fn main() {
    let checks: [(&str, fn() -> Outcome); 10] = [
        ("lambda enforcement", lambda_enforcement),
        ("matrix vs direct energy", matrix_formula_equivalence),
        ("congestion tensor oracle", congestion_oracle),
        ("heuristic quality", heuristic_quality),
        ("congestion improvement", congestion_improvement),
        ("clustering reduction", clustering_reduction),
        ("score function properties", score_properties),
        ("haversine accuracy", haversine_accuracy),
        ("reproducibility", reproducibility),
        ("validity after repair", validity_after_repair),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
