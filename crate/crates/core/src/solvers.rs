//! QUBO solvers: exhaustive enumeration, simulated annealing and tabu
//! search, plus one-hot repair of raw solver output.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{Assignment, QuboInstance};
use crate::scalar::Scalar;

/// Full-scan limit for exhaustive search.
pub const MAX_FULL_SCAN_VARS: usize = 24;
/// Per-component limit on one-hot combinations for feasible-only search.
pub const MAX_FEASIBLE_COMBINATIONS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    pub assignment: Assignment,
    /// Includes the constant offset.
    pub energy: T,
    pub valid: bool,
    pub prep_s: f64,
    pub solve_s: f64,
    pub solver: String,
    pub seed: u64,
    /// Tabu restarts; 0 for other solvers.
    pub restarts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ExhaustiveMode {
    /// All `2^n_var` bit vectors.
    Full,
    /// Only one-hot assignments over real alternatives, enumerated per
    /// connected group of interacting vehicles.
    #[default]
    Feasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub seed: u64,
    /// Wall-clock limit in seconds for the heuristics.
    pub time_limit: Option<f64>,
    /// SA sweeps per read; default `50 * n_var`.
    pub sweeps: Option<usize>,
    pub reads: usize,
    /// Default: largest single-flip `|ΔE|` from a random state.
    pub t_initial: Option<f64>,
    /// Default: `1e-3 * t_initial`.
    pub t_final: Option<f64>,
    /// Geometric cooling factor; default derived from the sweep count.
    pub cooling: Option<f64>,
    /// Default: `max(8, n_var / 10)`.
    pub tenure: Option<usize>,
    /// Non-improving moves before a restart; default `2 * n_var`.
    pub max_stagnation: Option<usize>,
    /// Tabu iterations; default `max(1000, 100 * n_var)`.
    pub iterations: Option<usize>,
    pub exhaustive_mode: ExhaustiveMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            time_limit: None,
            sweeps: None,
            reads: 8,
            t_initial: None,
            t_final: None,
            cooling: None,
            tenure: None,
            max_stagnation: None,
            iterations: None,
            exhaustive_mode: ExhaustiveMode::Feasible,
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: Option<f64>, what: &str| match v {
            Some(t) if !(t > 0.0) => Err(Error::invalid(format!("{what} must be > 0"))),
            _ => Ok(()),
        };
        positive(self.t_initial, "initial temperature")?;
        positive(self.t_final, "final temperature")?;
        positive(self.time_limit, "time limit")?;
        if let Some(c) = self.cooling {
            if !(c > 0.0 && c < 1.0) {
                return Err(Error::invalid("cooling factor must be in (0, 1)"));
            }
        }
        if self.reads == 0 || self.sweeps == Some(0) || self.iterations == Some(0) || self.max_stagnation == Some(0) {
            return Err(Error::invalid("solver budgets must be >= 1"));
        }
        Ok(())
    }
}

/// Common interface over the QUBO solvers. Quantum and MILP back ends are
/// reached through the exported COO and LP files instead.
pub trait QuboSolver<T: Scalar> {
    fn name(&self) -> &'static str;
    fn solve(&self, q: &QuboInstance<T>) -> Result<SolveResult<T>>;
}

/// Symmetric adjacency view of the upper-triangular matrix.
struct Sparse<T> {
    diag: Vec<T>,
    adj: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> Sparse<T> {
    fn new(q: &QuboInstance<T>) -> Self {
        let n = q.n_var();
        let mut diag = vec![T::zero(); n];
        let mut adj = vec![Vec::new(); n];
        for (&(u, v), &c) in q.coefficients() {
            if u == v {
                diag[u] = c;
            } else {
                adj[u].push((v, c));
                adj[v].push((u, c));
            }
        }
        Self { diag, adj }
    }

    fn fields(&self, x: &[bool]) -> Vec<T> {
        let mut f = vec![T::zero(); x.len()];
        for (u, &on) in x.iter().enumerate() {
            if on {
                for &(v, c) in &self.adj[u] {
                    f[v] += c;
                }
            }
        }
        f
    }

    #[inline]
    fn delta(&self, x: &[bool], field: &[T], v: usize) -> T {
        let d = self.diag[v] + field[v];
        if x[v] {
            -d
        } else {
            d
        }
    }

    #[inline]
    fn flip(&self, x: &mut [bool], field: &mut [T], v: usize) {
        x[v] = !x[v];
        let sign = if x[v] { T::one() } else { -T::one() };
        for &(u, c) in &self.adj[v] {
            field[u] += sign * c;
        }
    }
}

fn finish<T: Scalar>(
    q: &QuboInstance<T>,
    x: Assignment,
    solver: &str,
    seed: u64,
    prep_s: f64,
    solve_s: f64,
    restarts: usize,
) -> Result<SolveResult<T>> {
    Ok(SolveResult {
        energy: q.energy(&x)?,
        valid: q.is_valid(&x)?,
        assignment: x,
        prep_s,
        solve_s,
        solver: solver.to_string(),
        seed,
        restarts,
    })
}

/// Lower exact energy wins; the warm start is kept unless beaten.
fn better_of<T: Scalar>(q: &QuboInstance<T>, start: Assignment, found: Assignment) -> Result<Assignment> {
    Ok(if q.energy(&found)? < q.energy(&start)? {
        found
    } else {
        start
    })
}

/// Exact minimum by enumeration.
#[derive(Debug, Clone, Default)]
pub struct Exhaustive {
    pub mode: ExhaustiveMode,
}

impl<T: Scalar> QuboSolver<T> for Exhaustive {
    fn name(&self) -> &'static str {
        match self.mode {
            ExhaustiveMode::Full => "exhaustive-full",
            ExhaustiveMode::Feasible => "exhaustive",
        }
    }

    fn solve(&self, q: &QuboInstance<T>) -> Result<SolveResult<T>> {
        let t0 = Instant::now();
        let sparse = Sparse::new(q);
        let prep = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let x = match self.mode {
            ExhaustiveMode::Full => full_scan(q, &sparse)?,
            ExhaustiveMode::Feasible => feasible_scan(q, &sparse)?,
        };
        let name = <Self as QuboSolver<T>>::name(self);
        finish(q, x, name, 0, prep, t1.elapsed().as_secs_f64(), 0)
    }
}

/// Gray-code walk over all bit vectors; ties go to the lexicographically
/// smallest vector.
fn full_scan<T: Scalar>(q: &QuboInstance<T>, sparse: &Sparse<T>) -> Result<Assignment> {
    let n = q.n_var();
    if n > MAX_FULL_SCAN_VARS {
        return Err(Error::InstanceTooLarge(format!(
            "{n} variables exceed the full-scan limit of {MAX_FULL_SCAN_VARS}"
        )));
    }
    let mut x = vec![false; n];
    let mut field = vec![T::zero(); n];
    let mut e = T::zero();
    let mut best_e = e;
    let mut best = x.clone();
    let tol = T::of(1e-9);
    for g in 1u64..(1u64 << n) {
        let v = g.trailing_zeros() as usize;
        e += sparse.delta(&x, &field, v);
        sparse.flip(&mut x, &mut field, v);
        let scale = e.abs().max(best_e.abs()).max(T::one());
        if e < best_e - tol * scale {
            best_e = e;
            best.copy_from_slice(&x);
        } else if (e - best_e).abs() <= tol * scale {
            let (cand, cur) = (Assignment(x.clone()), Assignment(best.clone()));
            let (ec, eb) = (q.energy(&cand)?, q.energy(&cur)?);
            if ec < eb || (ec == eb && x < best) {
                best_e = e;
                best.copy_from_slice(&x);
            }
        }
    }
    Ok(Assignment(best))
}

/// Vehicles grouped by nonzero cross-vehicle coefficients.
fn interaction_components<T: Scalar>(q: &QuboInstance<T>) -> Vec<Vec<usize>> {
    let n = q.n_vehicles();
    let k = q.k();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for &(u, v) in q.coefficients().keys() {
        let (a, b) = (u / k, v / k);
        if a != b {
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        let r = root(&mut parent, v);
        groups[r].push(v);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// Enumerates one-hot assignments over real alternatives, separately for
/// each group of interacting vehicles.
fn feasible_scan<T: Scalar>(q: &QuboInstance<T>, sparse: &Sparse<T>) -> Result<Assignment> {
    let k = q.k();
    let mut x = vec![false; q.n_var()];
    let mut field = vec![T::zero(); q.n_var()];
    for comp in interaction_components(q) {
        let radix: Vec<usize> = comp.iter().map(|&i| q.real_alternatives(i)).collect();
        let total = radix
            .iter()
            .try_fold(1u64, |acc, &r| acc.checked_mul(r as u64).filter(|&p| p <= MAX_FEASIBLE_COMBINATIONS));
        if total.is_none() {
            return Err(Error::InstanceTooLarge(format!(
                "a group of {} interacting vehicles exceeds {MAX_FEASIBLE_COMBINATIONS} one-hot combinations",
                comp.len()
            )));
        }
        // odometer over choices; vehicle comp[0] is the fastest digit
        let mut choice = vec![0usize; comp.len()];
        let mut e = T::zero();
        for (p, &i) in comp.iter().enumerate() {
            let v = i * k + choice[p];
            e += sparse.delta(&x, &field, v);
            sparse.flip(&mut x, &mut field, v);
        }
        let mut best_e = e;
        let mut best = choice.clone();
        let tol = T::of(1e-9);
        // lexicographically smaller bit vector == larger alternative index at
        // the first differing vehicle
        let lex_less = |a: &[usize], b: &[usize]| {
            a.iter().zip(b).find(|(x, y)| x != y).is_some_and(|(x, y)| x > y)
        };
        loop {
            let mut p = 0;
            while p < comp.len() {
                let i = comp[p];
                let old = i * k + choice[p];
                e += sparse.delta(&x, &field, old);
                sparse.flip(&mut x, &mut field, old);
                choice[p] = (choice[p] + 1) % radix[p];
                let new = i * k + choice[p];
                e += sparse.delta(&x, &field, new);
                sparse.flip(&mut x, &mut field, new);
                if choice[p] != 0 {
                    break;
                }
                p += 1;
            }
            if p == comp.len() {
                break;
            }
            let scale = e.abs().max(best_e.abs()).max(T::one());
            if e < best_e - tol * scale || ((e - best_e).abs() <= tol * scale && lex_less(&choice, &best)) {
                best_e = e;
                best.copy_from_slice(&choice);
            }
        }
        // the odometer wrapped back to all zeros; install the best choice
        for (p, &i) in comp.iter().enumerate() {
            if best[p] != 0 {
                x[i * k] = false;
                x[i * k + best[p]] = true;
            }
        }
        field = sparse.fields(&x);
    }
    Ok(Assignment(x))
}

fn deadline(cfg: &SolverConfig, start: Instant) -> impl Fn() -> bool {
    let limit = cfg.time_limit;
    move || limit.is_some_and(|l| start.elapsed().as_secs_f64() >= l)
}

/// Single-flip Metropolis annealing with geometric cooling, warm-started
/// from the fastest-route assignment on every read.
#[derive(Debug, Clone, Default)]
pub struct SimulatedAnnealing {
    pub config: SolverConfig,
}

impl SimulatedAnnealing {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }
}

/// Largest single-flip energy change from a random state.
fn sample_max_delta<T: Scalar>(sparse: &Sparse<T>, rng: &mut ChaCha8Rng) -> f64 {
    let n = sparse.diag.len();
    let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let field = sparse.fields(&x);
    (0..n)
        .map(|v| sparse.delta(&x, &field, v).abs().as_f64())
        .fold(0.0, f64::max)
}

impl<T: Scalar> QuboSolver<T> for SimulatedAnnealing {
    fn name(&self) -> &'static str {
        "sa"
    }

    fn solve(&self, q: &QuboInstance<T>) -> Result<SolveResult<T>> {
        let cfg = &self.config;
        cfg.validate()?;
        let t0 = Instant::now();
        let sparse = Sparse::new(q);
        let n = q.n_var();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let t_hot = cfg.t_initial.unwrap_or_else(|| {
            let d = sample_max_delta(&sparse, &mut rng);
            if d > 0.0 {
                d
            } else {
                1.0
            }
        });
        let t_cold = cfg.t_final.unwrap_or(1e-3 * t_hot).min(t_hot);
        let (sweeps, factor) = match (cfg.cooling, cfg.sweeps) {
            (Some(c), None) => (((t_cold / t_hot).ln() / c.ln()).ceil().max(1.0) as usize, c),
            (Some(c), Some(s)) => (s, c),
            (None, s) => {
                let s = s.unwrap_or(50 * n).max(1);
                let f = if s > 1 {
                    (t_cold / t_hot).powf(1.0 / (s - 1) as f64)
                } else {
                    1.0
                };
                (s, f)
            }
        };
        let start = q.shortest_assignment();
        let prep = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let expired = deadline(cfg, t1);
        let mut best = start.0.clone();
        let mut best_e = q.energy(&start)?;
        'reads: for read in 0..cfg.reads {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(read as u64 + 1)));
            let mut x = start.0.clone();
            let mut field = sparse.fields(&x);
            let mut e = q.energy(&start)?;
            let mut temp = t_hot;
            for _ in 0..sweeps {
                for v in 0..n {
                    let d = sparse.delta(&x, &field, v);
                    if d <= T::zero() || rng.gen::<f64>() < (-d.as_f64() / temp).exp() {
                        sparse.flip(&mut x, &mut field, v);
                        e += d;
                        if e < best_e {
                            best_e = e;
                            best.copy_from_slice(&x);
                        }
                    }
                }
                temp *= factor;
                if expired() {
                    break 'reads;
                }
            }
        }
        let x = better_of(q, start, Assignment(best))?;
        finish(q, x, "sa", cfg.seed, prep, t1.elapsed().as_secs_f64(), 0)
    }
}

/// Steepest-descent tabu search with per-variable tenure, aspiration and
/// perturbation restarts from the best state.
#[derive(Debug, Clone, Default)]
pub struct TabuSearch {
    pub config: SolverConfig,
}

impl TabuSearch {
    pub fn new(config: SolverConfig) -> Self {
        Self { config }
    }
}

impl<T: Scalar> QuboSolver<T> for TabuSearch {
    fn name(&self) -> &'static str {
        "tabu"
    }

    fn solve(&self, q: &QuboInstance<T>) -> Result<SolveResult<T>> {
        let cfg = &self.config;
        cfg.validate()?;
        let t0 = Instant::now();
        let sparse = Sparse::new(q);
        let n = q.n_var();
        let tenure = cfg.tenure.unwrap_or((n / 10).max(8)).min(n.saturating_sub(1));
        let stagnation = cfg.max_stagnation.unwrap_or(2 * n).max(1);
        let iterations = cfg.iterations.unwrap_or((100 * n).max(1000));
        let start = q.shortest_assignment();
        let prep = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let expired = deadline(cfg, t1);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut x = start.0.clone();
        let mut field = sparse.fields(&x);
        let mut e = q.energy(&start)?;
        let mut best = x.clone();
        let mut best_e = e;
        let mut restarts = 0;
        let tol = T::of(1e-12);

        if cfg.tenure == Some(0) {
            // plain steepest descent to a local minimum
            loop {
                let (v, d) = (0..n)
                    .map(|v| (v, sparse.delta(&x, &field, v)))
                    .fold((usize::MAX, T::zero()), |acc, (v, d)| if d < acc.1 { (v, d) } else { acc });
                if v == usize::MAX || d >= -tol * e.abs().max(T::one()) {
                    break;
                }
                sparse.flip(&mut x, &mut field, v);
                e += d;
            }
            let x = better_of(q, start, Assignment(x))?;
            return finish(q, x, "tabu", cfg.seed, prep, t1.elapsed().as_secs_f64(), 0);
        }

        let mut tabu_until = vec![0usize; n];
        let mut stagnant = 0;
        for it in 0..iterations {
            if it % 64 == 0 && expired() {
                break;
            }
            let mut chosen = None;
            let mut chosen_d = T::infinity();
            let mut ties = 0u32;
            for v in 0..n {
                let d = sparse.delta(&x, &field, v);
                let allowed = tabu_until[v] <= it || e + d < best_e - tol * best_e.abs().max(T::one());
                if !allowed {
                    continue;
                }
                if d < chosen_d {
                    chosen = Some(v);
                    chosen_d = d;
                    ties = 1;
                } else if d == chosen_d {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        chosen = Some(v);
                    }
                }
            }
            let Some(v) = chosen else {
                // everything tabu: let the oldest entry expire
                let oldest = (0..n).min_by_key(|&v| tabu_until[v]).unwrap_or(0);
                tabu_until[oldest] = it;
                continue;
            };
            sparse.flip(&mut x, &mut field, v);
            e += chosen_d;
            tabu_until[v] = it + 1 + tenure;
            if e < best_e - tol * best_e.abs().max(T::one()) {
                best_e = e;
                best.copy_from_slice(&x);
                stagnant = 0;
            } else {
                stagnant += 1;
            }
            if stagnant >= stagnation {
                restarts += 1;
                stagnant = 0;
                x.copy_from_slice(&best);
                perturb(q, &mut x, &mut rng);
                field = sparse.fields(&x);
                e = q.energy(&Assignment(x.clone()))?;
                tabu_until.iter_mut().for_each(|t| *t = 0);
            }
        }
        let x = better_of(q, start, Assignment(best))?;
        finish(q, x, "tabu", cfg.seed, prep, t1.elapsed().as_secs_f64(), restarts)
    }
}

/// Moves a random fifth of the vehicles to random real alternatives.
fn perturb<T: Scalar>(q: &QuboInstance<T>, x: &mut [bool], rng: &mut ChaCha8Rng) {
    let k = q.k();
    let mut vehicles: Vec<usize> = (0..q.n_vehicles()).collect();
    vehicles.shuffle(rng);
    for &i in vehicles.iter().take((q.n_vehicles() / 5).max(1)) {
        x[i * k..(i + 1) * k].iter_mut().for_each(|b| *b = false);
        x[i * k + rng.gen_range(0..q.real_alternatives(i))] = true;
    }
}

/// Resets every vehicle whose block is not a one-hot over a real
/// alternative to its fastest route. Valid blocks are left untouched.
pub fn repair<T: Scalar>(q: &QuboInstance<T>, x: &Assignment) -> Result<Assignment> {
    if x.len() != q.n_var() {
        return Err(Error::LengthMismatch {
            expected: q.n_var(),
            got: x.len(),
        });
    }
    let k = q.k();
    let mut out = x.clone();
    for i in 0..q.n_vehicles() {
        if q.block_choice(x, i).is_none() {
            let block = &mut out.0[i * k..(i + 1) * k];
            block.iter_mut().for_each(|b| *b = false);
            block[q.shortest_alt(i)] = true;
        }
    }
    Ok(out)
}

/// Solver by CLI name: `exhaustive`, `exhaustive-full`, `sa` or `tabu`.
pub fn solver_by_name<T: Scalar>(name: &str, cfg: &SolverConfig) -> Result<Box<dyn QuboSolver<T>>> {
    Ok(match name {
        "exhaustive" => Box::new(Exhaustive {
            mode: ExhaustiveMode::Feasible,
        }),
        "exhaustive-full" => Box::new(Exhaustive {
            mode: ExhaustiveMode::Full,
        }),
        "sa" => Box::new(SimulatedAnnealing::new(cfg.clone())),
        "tabu" => Box::new(TabuSearch::new(cfg.clone())),
        other => return Err(Error::invalid(format!("unknown solver `{other}`"))),
    })
}

/// One row of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub solver: String,
    pub seed: u64,
    pub energy: f64,
    pub valid: bool,
    pub repaired: bool,
    pub prep_s: f64,
    pub solve_s: f64,
}

impl ResultRecord {
    /// `repaired` records whether repair changed the solver's assignment.
    pub fn new<T: Scalar>(r: &SolveResult<T>, repaired: bool) -> Self {
        Self {
            solver: r.solver.clone(),
            seed: r.seed,
            energy: r.energy.as_f64(),
            valid: r.valid,
            repaired,
            prep_s: r.prep_s,
            solve_s: r.solve_s,
        }
    }
}

/// CSV `solver,seed,energy,valid,repaired,prep_s,solve_s`.
pub fn write_results(path: &Path, rows: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["solver", "seed", "energy", "valid", "repaired", "prep_s", "solve_s"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<ResultRecord>> {
    let mut out = Vec::new();
    for row in crate::io::csv_reader(path)?.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congestion::CongestionWeights;
    use crate::qubo::build_qubo;

    fn two_vehicles() -> QuboInstance<f64> {
        let mut w = CongestionWeights::new(2, vec![vec![0.0, 0.0]; 2], 4.0, 10.0);
        w.add(0, 1, 0, 0, 100.0);
        build_qubo(&w, &[0, 1]).unwrap()
    }

    #[test]
    fn exhaustive_single_vehicle() {
        let w = CongestionWeights::new(2, vec![vec![0.0, 60.0]], 4.0, 10.0);
        let q = build_qubo(&w, &[0]).unwrap();
        for mode in [ExhaustiveMode::Full, ExhaustiveMode::Feasible] {
            let r = Exhaustive { mode }.solve(&q).unwrap();
            assert_eq!(r.assignment.0, vec![true, false]);
            assert_eq!(r.energy, 0.0);
            assert!(r.valid);
        }
    }

    #[test]
    fn exhaustive_avoids_the_conflict() {
        let q = two_vehicles();
        for mode in [ExhaustiveMode::Full, ExhaustiveMode::Feasible] {
            let r = Exhaustive { mode }.solve(&q).unwrap();
            assert_eq!(r.energy, 0.0);
            assert!(r.valid);
            let x = &r.assignment.0;
            assert!(!(x[0] && x[2]));
            // lexicographically smallest optimum: vehicle 0 on alt 1, vehicle 1 on alt 1
            assert_eq!(x, &vec![false, true, false, true]);
        }
    }

    #[test]
    fn full_scan_limit() {
        let w = CongestionWeights::new(5, vec![vec![0.0; 5]; 5], 4.0, 10.0);
        let q = build_qubo(&w, &[0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(
            Exhaustive { mode: ExhaustiveMode::Full }.solve(&q),
            Err(Error::InstanceTooLarge(_))
        ));
        // independent vehicles are enumerated one group at a time
        assert!(Exhaustive::default().solve(&q).unwrap().valid);
    }

    #[test]
    fn heuristics_on_zero_instance_return_shortest() {
        let w = CongestionWeights::new(2, vec![vec![0.0, 5.0], vec![3.0, 0.0]], 4.0, 10.0);
        let q = build_qubo(&w, &[0, 1]).unwrap();
        let sa = SimulatedAnnealing::new(SolverConfig::with_seed(1)).solve(&q).unwrap();
        let tabu = TabuSearch::new(SolverConfig::with_seed(1)).solve(&q).unwrap();
        for r in [sa, tabu] {
            assert!(r.valid);
            assert_eq!(r.energy, 0.0);
        }
    }

    #[test]
    fn steepest_descent_stops_at_one_flip_minimum() {
        let q = two_vehicles();
        let cfg = SolverConfig {
            tenure: Some(0),
            ..SolverConfig::with_seed(3)
        };
        let r = TabuSearch::new(cfg).solve(&q).unwrap();
        // leaving the shortest pair needs two flips, each breaking one-hot
        assert_eq!(r.energy, 100.0);
        assert!(r.valid);
        assert_eq!(r.restarts, 0);
        let full = TabuSearch::new(SolverConfig::with_seed(3)).solve(&q).unwrap();
        assert_eq!(full.energy, 0.0);
    }

    #[test]
    fn repair_examples() {
        let q = two_vehicles();
        let ok = Assignment(vec![false, true, true, false]);
        assert_eq!(repair(&q, &ok).unwrap(), ok);
        let zeros = Assignment::zeros(4);
        assert_eq!(repair(&q, &zeros).unwrap(), q.shortest_assignment());
        let both = Assignment(vec![false, true, true, true]);
        assert_eq!(repair(&q, &both).unwrap().0, vec![false, true, true, false]);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig {
            cooling: Some(1.5),
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            reads: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SolverConfig {
            t_initial: Some(0.0),
            ..Default::default()
        }
        .validate()
        .is_err());
    }
}
