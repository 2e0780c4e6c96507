//! QUBO assembly from the congestion tensor, the one-hot penalty weight,
//! energy evaluation and solver-facing file formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::congestion::CongestionWeights;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Binary decision vector, one bit per `(vehicle, alternative)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Self(vec![false; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// `0`/`1` characters.
    pub fn to_bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bitstring(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::invalid(format!("bad bit `{c}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

/// Upper-triangular QUBO for `n` vehicles with `k` alternatives each.
///
/// Variable `i * k + a` selects alternative `a` of local vehicle `i`.
/// Alternatives at or beyond a vehicle's real count are placeholders that
/// pad the block to `k` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance<T> {
    k: usize,
    /// Global id of each local vehicle.
    vehicle_ids: Vec<usize>,
    real: Vec<usize>,
    shortest: Vec<usize>,
    coefficients: BTreeMap<(usize, usize), T>,
    lambda: T,
    offset: T,
}

/// Row sums `Λ[i][a] = Σ_{j≠i} Σ_b w[i,j,a,b]` of the symmetric tensor.
pub fn interaction_row_sums<T: Scalar>(weights: &CongestionWeights<T>) -> Vec<Vec<T>> {
    let mut rows: Vec<Vec<T>> = (0..weights.n()).map(|_| vec![T::zero(); weights.k]).collect();
    for (&(i, j, a, b), &w) in &weights.weights {
        rows[i][a] += w;
        rows[j][b] += w;
    }
    rows
}

/// One-hot penalty weight: the largest interaction row sum, floored at
/// `1 + max π` so the constraint is enforced on conflict-free instances.
pub fn compute_lambda<T: Scalar>(weights: &CongestionWeights<T>) -> T {
    let row_max = interaction_row_sums(weights)
        .iter()
        .flatten()
        .copied()
        .fold(T::zero(), T::max);
    let pi_max = weights
        .penalties
        .iter()
        .flatten()
        .copied()
        .fold(T::zero(), T::max);
    row_max.max(T::one() + pi_max)
}

/// Builds the QUBO for all vehicles of `weights`, labelled with
/// `vehicle_ids` (global ids; pass `0..n` for an unclustered instance).
pub fn build_qubo<T: Scalar>(weights: &CongestionWeights<T>, vehicle_ids: &[usize]) -> Result<QuboInstance<T>> {
    let n = weights.n();
    let k = weights.k;
    if n == 0 || k == 0 {
        return Err(Error::invalid("QUBO needs n >= 1 and k >= 1"));
    }
    if vehicle_ids.len() != n {
        return Err(Error::invalid("vehicle id list does not match the tensor"));
    }
    let idx = |i: usize, a: usize| i * k + a;
    let mut q: BTreeMap<(usize, usize), T> = BTreeMap::new();

    for (&(i, j, a, b), &w) in &weights.weights {
        // i < j, so the index pair is already upper-triangular
        *q.entry((idx(i, a), idx(j, b))).or_default() += w;
    }

    let lambda = compute_lambda(weights);
    let two_lambda = lambda + lambda;
    for i in 0..n {
        for a in 0..k {
            for b in a + 1..k {
                *q.entry((idx(i, a), idx(i, b))).or_default() += two_lambda;
            }
        }
    }
    for i in 0..n {
        let real = weights.real_alternatives(i);
        for a in 0..k {
            let diag = if a < real {
                -lambda + weights.penalties[i][a]
            } else {
                lambda
            };
            *q.entry((idx(i, a), idx(i, a))).or_default() += diag;
        }
    }
    q.retain(|_, v| *v != T::zero());

    Ok(QuboInstance {
        k,
        vehicle_ids: vehicle_ids.to_vec(),
        real: (0..n).map(|i| weights.real_alternatives(i)).collect(),
        shortest: (0..n).map(|i| weights.shortest_alt(i)).collect(),
        coefficients: q,
        lambda,
        offset: lambda * T::of(n as f64),
    })
}

impl<T: Scalar> QuboInstance<T> {
    pub fn n_vehicles(&self) -> usize {
        self.vehicle_ids.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_var(&self) -> usize {
        self.n_vehicles() * self.k
    }

    pub fn index(&self, vehicle: usize, alt: usize) -> usize {
        vehicle * self.k + alt
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Constant `λ·n` that makes the penalty vanish on one-hot assignments.
    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn vehicle_ids(&self) -> &[usize] {
        &self.vehicle_ids
    }

    pub fn real_alternatives(&self, vehicle: usize) -> usize {
        self.real[vehicle]
    }

    pub fn shortest_alt(&self, vehicle: usize) -> usize {
        self.shortest[vehicle]
    }

    pub fn is_real(&self, var: usize) -> bool {
        var % self.k < self.real[var / self.k]
    }

    /// Indices of placeholder variables.
    pub fn not_real(&self) -> Vec<usize> {
        (0..self.n_var()).filter(|&v| !self.is_real(v)).collect()
    }

    /// Nonzero upper-triangular coefficients keyed by `(u, v)`, `u <= v`.
    pub fn coefficients(&self) -> &BTreeMap<(usize, usize), T> {
        &self.coefficients
    }

    pub fn coefficient(&self, u: usize, v: usize) -> T {
        let key = (u.min(v), u.max(v));
        self.coefficients.get(&key).copied().unwrap_or_else(T::zero)
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.n_var() {
            return Err(Error::LengthMismatch {
                expected: self.n_var(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `xᵀQx` plus the constant offset.
    pub fn energy(&self, x: &Assignment) -> Result<T> {
        self.check_len(x)?;
        let mut e = self.offset;
        for (&(u, v), &c) in &self.coefficients {
            if x.0[u] && x.0[v] {
                e += c;
            }
        }
        Ok(e)
    }

    /// Every vehicle selects exactly one alternative and it is real.
    pub fn is_valid(&self, x: &Assignment) -> Result<bool> {
        self.check_len(x)?;
        Ok((0..self.n_vehicles()).all(|i| self.block_choice(x, i).is_some()))
    }

    /// The alternative vehicle `i` selects, if its block is a one-hot over a
    /// real alternative.
    pub fn block_choice(&self, x: &Assignment, i: usize) -> Option<usize> {
        let block = &x.0[i * self.k..(i + 1) * self.k];
        let mut chosen = None;
        for (a, &bit) in block.iter().enumerate() {
            if bit {
                if chosen.is_some() {
                    return None;
                }
                chosen = Some(a);
            }
        }
        chosen.filter(|&a| a < self.real[i])
    }

    /// One-hot assignment putting every vehicle on its fastest route.
    pub fn shortest_assignment(&self) -> Assignment {
        let mut x = Assignment::zeros(self.n_var());
        for i in 0..self.n_vehicles() {
            x.0[self.index(i, self.shortest[i])] = true;
        }
        x
    }

    /// Coordinate-list text: a header with the instance metadata, then one
    /// `u v value` line per nonzero coefficient.
    pub fn to_coo(&self) -> String {
        let mut s = String::new();
        s.push_str("# qubo coo: energy = sum over lines of value * x_u * x_v, plus offset\n");
        let _ = writeln!(s, "n_var {}", self.n_var());
        let _ = writeln!(s, "k {}", self.k);
        let _ = writeln!(s, "lambda {}", self.lambda);
        let _ = writeln!(s, "offset {}", self.offset);
        let _ = writeln!(s, "vehicles {}", self.n_vehicles());
        for i in 0..self.n_vehicles() {
            let _ = writeln!(s, "{} {} {}", self.vehicle_ids[i], self.real[i], self.shortest[i]);
        }
        let _ = writeln!(s, "coefficients {}", self.coefficients.len());
        for (&(u, v), c) in &self.coefficients {
            let _ = writeln!(s, "{u} {v} {c}");
        }
        s
    }

    pub fn from_coo(text: &str, source: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, msg: &str| Error::Parse {
            path: source.to_string(),
            line,
            msg: msg.to_string(),
        };
        fn num<V: std::str::FromStr>(tok: &[String], i: usize) -> Option<V> {
            tok.get(i).and_then(|t| t.parse().ok())
        }
        let next = |lines: &mut dyn Iterator<Item = (usize, &str)>, want: &str| -> Result<(usize, Vec<String>)> {
            let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing {want}")))?;
            Ok((ln, l.split_whitespace().map(str::to_string).collect()))
        };
        let keyed = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| -> Result<(usize, String)> {
            let (ln, tok) = next(lines, key)?;
            if tok.len() != 2 || tok[0] != key {
                return Err(err(ln, &format!("expected `{key} <value>`")));
            }
            Ok((ln, tok[1].clone()))
        };
        let (ln, v) = keyed(&mut lines, "n_var")?;
        let n_var: usize = v.parse().map_err(|_| err(ln, "bad n_var"))?;
        let (ln, v) = keyed(&mut lines, "k")?;
        let k: usize = v.parse().map_err(|_| err(ln, "bad k"))?;
        let (ln, v) = keyed(&mut lines, "lambda")?;
        let lambda: T = v.parse().map_err(|_| err(ln, "bad lambda"))?;
        let (ln, v) = keyed(&mut lines, "offset")?;
        let offset: T = v.parse().map_err(|_| err(ln, "bad offset"))?;
        let (ln, v) = keyed(&mut lines, "vehicles")?;
        let n: usize = v.parse().map_err(|_| err(ln, "bad vehicle count"))?;
        if k == 0 || n * k != n_var {
            return Err(err(ln, "n_var must equal vehicles * k"));
        }
        let (mut vehicle_ids, mut real, mut shortest) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..n {
            let (ln, tok) = next(&mut lines, "vehicle line")?;
            match (num::<usize>(&tok, 0), num::<usize>(&tok, 1), num::<usize>(&tok, 2)) {
                (Some(id), Some(r), Some(s)) if tok.len() == 3 && r >= 1 && r <= k && s < r => {
                    vehicle_ids.push(id);
                    real.push(r);
                    shortest.push(s);
                }
                _ => return Err(err(ln, "expected `vehicle_id real_alternatives shortest_alt`")),
            }
        }
        let (ln, v) = keyed(&mut lines, "coefficients")?;
        let nnz: usize = v.parse().map_err(|_| err(ln, "bad coefficient count"))?;
        let mut coefficients = BTreeMap::new();
        for _ in 0..nnz {
            let (ln, tok) = next(&mut lines, "coefficient line")?;
            match (num::<usize>(&tok, 0), num::<usize>(&tok, 1), num::<T>(&tok, 2)) {
                (Some(u), Some(v), Some(c)) if tok.len() == 3 && u <= v && v < n_var => {
                    coefficients.insert((u, v), c);
                }
                _ => return Err(err(ln, "expected `u v value` with u <= v < n_var")),
            }
        }
        if let Some((ln, _)) = lines.next() {
            return Err(err(ln, "trailing content"));
        }
        Ok(Self {
            k,
            vehicle_ids,
            real,
            shortest,
            coefficients,
            lambda,
            offset,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_coo())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_coo(&crate::io::read_to_string(path)?, &path.display().to_string())
    }

    /// CPLEX LP text of the linearized problem: binary `x` per variable,
    /// continuous `y_u_v` in `[0, 1]` per quadratic term tied to the product
    /// by `y <= x_u`, `y <= x_v`, `y >= x_u + x_v - 1`.
    pub fn to_lp(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "\\ linearized QUBO, {} variables", self.n_var());
        let _ = writeln!(s, "\\ constant offset: {} (add to the objective value)", self.offset);
        s.push_str("Minimize\n obj:");
        let mut terms = 0;
        let mut aux = Vec::new();
        for (&(u, v), &c) in &self.coefficients {
            let name = if u == v {
                format!("x{u}")
            } else {
                aux.push((u, v));
                format!("y{u}_{v}")
            };
            let sign = if c < T::zero() { "-" } else { "+" };
            let _ = write!(s, " {sign} {} {name}", c.abs());
            terms += 1;
            if terms % 8 == 0 {
                s.push_str("\n    ");
            }
        }
        if terms == 0 {
            s.push_str(" 0 x0");
        }
        s.push_str("\nSubject To\n");
        for &(u, v) in &aux {
            let _ = writeln!(s, " c{u}_{v}_a: y{u}_{v} - x{u} <= 0");
            let _ = writeln!(s, " c{u}_{v}_b: y{u}_{v} - x{v} <= 0");
            let _ = writeln!(s, " c{u}_{v}_c: y{u}_{v} - x{u} - x{v} >= -1");
        }
        s.push_str("Bounds\n");
        for &(u, v) in &aux {
            let _ = writeln!(s, " 0 <= y{u}_{v} <= 1");
        }
        s.push_str("Binary\n");
        for u in 0..self.n_var() {
            let _ = writeln!(s, " x{u}");
        }
        s.push_str("End\n");
        s
    }

    pub fn save_lp(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_lp())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_vehicle() -> QuboInstance<f64> {
        let w = CongestionWeights::new(2, vec![vec![0.0, 60.0]], 4.0, 10.0);
        build_qubo(&w, &[0]).unwrap()
    }

    #[test]
    fn single_vehicle_matrix() {
        let q = one_vehicle();
        let l = q.lambda();
        assert_eq!(l, 61.0);
        assert_eq!(q.coefficient(0, 0), -l);
        assert_eq!(q.coefficient(1, 1), -l + 60.0);
        assert_eq!(q.coefficient(0, 1), 2.0 * l);
        assert_eq!(q.offset(), l);
    }

    #[test]
    fn placeholder_alternative_gets_positive_diagonal() {
        let w = CongestionWeights::new(2, vec![vec![0.0]], 4.0, 10.0);
        let q = build_qubo(&w, &[0]).unwrap();
        assert_eq!(q.coefficient(1, 1), q.lambda());
        assert_eq!(q.not_real(), vec![1]);
    }

    #[test]
    fn lambda_floor_and_row_sums() {
        let w = CongestionWeights::new(2, vec![vec![0.0, 0.0]; 2], 4.0, 10.0);
        assert_eq!(compute_lambda(&w), 1.0);
        let mut w = CongestionWeights::new(1, vec![vec![0.0]; 2], 4.0, 10.0);
        w.add(0, 1, 0, 0, 7.0);
        let rows = interaction_row_sums(&w);
        assert_eq!(rows, vec![vec![7.0], vec![7.0]]);
        assert_eq!(compute_lambda(&w), 7.0);
    }

    #[test]
    fn energy_examples() {
        let q = one_vehicle();
        assert_eq!(q.energy(&Assignment(vec![true, false])).unwrap(), 0.0);
        assert_eq!(q.energy(&Assignment(vec![false, false])).unwrap(), q.lambda());
        assert!(matches!(
            q.energy(&Assignment(vec![true])),
            Err(Error::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn validity() {
        let w = CongestionWeights::new(2, vec![vec![0.0, 1.0], vec![0.0]], 4.0, 10.0);
        let q = build_qubo(&w, &[0, 1]).unwrap();
        assert!(q.is_valid(&Assignment(vec![false, true, true, false])).unwrap());
        assert!(!q.is_valid(&Assignment(vec![true, true, true, false])).unwrap());
        assert!(!q.is_valid(&Assignment(vec![true, false, false, true])).unwrap());
        assert!(!q.is_valid(&Assignment(vec![true, false, false, false])).unwrap());
    }

    #[test]
    fn lp_counts_for_one_vehicle() {
        let lp = one_vehicle().to_lp();
        assert_eq!(lp.matches("<= 1\n").count(), 1);
        assert_eq!(lp.lines().filter(|l| l.trim_start().starts_with('c')).count(), 3);
        let binaries = lp.split("Binary\n").nth(1).unwrap().lines().filter(|l| l.starts_with(" x")).count();
        assert_eq!(binaries, 2);
    }

    #[test]
    fn bitstring_round_trip() {
        let x = Assignment(vec![true, false, true]);
        assert_eq!(Assignment::from_bitstring(&x.to_bitstring()).unwrap(), x);
        assert!(Assignment::from_bitstring("012").is_err());
    }
}
