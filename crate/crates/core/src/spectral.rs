//! Spectra of reversible transition matrices and the eigenvalue bounds built on them.
//!
//! Eigenvalues come from the symmetric conjugate `S[x][y] = sqrt(pi_x / pi_y) Q[x][y]`,
//! which has the same spectrum as `Q` when detailed balance holds.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{
    stationary_distribution, structural_report, transition_matrix, StationaryDistribution,
    TransitionMatrix, WeightedGraph,
};

/// One-sided slack used by every bound assertion.
pub const BOUND_SLACK: f64 = 1e-9;

const DETAILED_BALANCE_TOL: f64 = 1e-8;

/// Real eigenvalues sorted non-decreasing, with multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    /// Wraps a list of eigenvalues, sorting it.
    pub fn from_values(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self { eigenvalues }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest eigenvalue other than the top one (`beta_1`).
    pub fn second_largest(&self) -> Option<f64> {
        let n = self.eigenvalues.len();
        (n >= 2).then(|| self.eigenvalues[n - 2])
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `sum_i lambda_i^k`.
    pub fn trace_power(&self, k: u32) -> f64 {
        self.eigenvalues.iter().map(|l| l.powi(k as i32)).sum()
    }

    /// `-(1/m) sum_i ln(1 - rho lambda_i)`.
    pub fn log_det_functional(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        let m = self.eigenvalues.len() as f64;
        Ok(-self
            .eigenvalues
            .iter()
            .map(|&l| (-rho * l).ln_1p())
            .sum::<f64>()
            / m)
    }

    /// `(1/m) sum_{k=2}^{K} Tr Q^k / k`.
    pub fn partial_loop_mass_rate(&self, max_len: usize) -> Result<f64> {
        if max_len < 2 {
            return Err(Error::InvalidArgument(format!("K must be >= 2, got {max_len}")));
        }
        let m = self.eigenvalues.len() as f64;
        let mut powers: Vec<f64> = self.eigenvalues.clone();
        let mut total = 0.0;
        for k in 2..=max_len {
            let mut trace = 0.0;
            for (p, &l) in powers.iter_mut().zip(&self.eigenvalues) {
                *p *= l;
                trace += *p;
            }
            total += trace / k as f64;
        }
        Ok(total / m)
    }

    pub fn esd(&self) -> EmpiricalSpectralDistribution {
        EmpiricalSpectralDistribution {
            support: self.eigenvalues.clone(),
        }
    }

    /// CSV with header `index,eigenvalue`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue\n");
        for (i, l) in self.eigenvalues.iter().enumerate() {
            let _ = writeln!(s, "{i},{l}");
        }
        s
    }
}

/// `nu = (1/m) sum_i delta_{lambda_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSpectralDistribution {
    support: Vec<f64>,
}

impl EmpiricalSpectralDistribution {
    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.support.iter().map(|l| l.powi(k as i32)).sum::<f64>() / self.support.len() as f64
    }

    /// `(location, mass)` pairs.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let w = 1.0 / self.support.len() as f64;
        self.support.iter().map(|&l| (l, w)).collect()
    }

    /// CSV with header `support,mass`.
    pub fn to_csv(&self) -> String {
        let w = 1.0 / self.support.len() as f64;
        let mut s = String::from("support,mass\n");
        for l in &self.support {
            let _ = writeln!(s, "{l},{w}");
        }
        s
    }
}

/// Sup-distance between the CDFs of two atomic measures. Atom locations closer
/// than `tol` are treated as the same point.
pub fn kolmogorov_distance(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> f64 {
    let sorted = |atoms: &[(f64, f64)]| {
        let mut v = atoms.to_vec();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut cum = Vec::with_capacity(v.len());
        let mut acc = 0.0;
        for &(x, w) in &v {
            acc += w;
            cum.push((x, acc));
        }
        cum
    };
    let cdf = |cum: &[(f64, f64)], t: f64| {
        let i = cum.partition_point(|&(x, _)| x <= t);
        if i == 0 {
            0.0
        } else {
            cum[i - 1].1
        }
    };
    let (ca, cb) = (sorted(a), sorted(b));
    ca.iter()
        .chain(&cb)
        .flat_map(|&(x, _)| [x - tol, x + tol])
        .map(|t| (cdf(&ca, t) - cdf(&cb, t)).abs())
        .fold(0.0, f64::max)
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidArgument(format!("rho must lie in [0, 1), got {rho}")));
    }
    Ok(())
}

fn symmetric_conjugate(q: &TransitionMatrix, pi: &[f64]) -> Result<DMatrix<f64>> {
    let m = q.size();
    for x in 0..m {
        for y in x + 1..m {
            let deviation = (pi[x] * q.get(x, y) - pi[y] * q.get(y, x)).abs();
            if deviation > DETAILED_BALANCE_TOL {
                return Err(Error::DetailedBalance { x, y, deviation });
            }
        }
    }
    let mut s = DMatrix::from_fn(m, m, |x, y| (pi[x] / pi[y]).sqrt() * q.get(x, y));
    let t = s.transpose();
    s += t;
    s *= 0.5;
    Ok(s)
}

fn symmetric_eigenvalues(s: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Spectrum of a reversible `Q` with stationary law `pi`.
pub fn eigenvalues(q: &TransitionMatrix, pi: &StationaryDistribution) -> Result<Spectrum> {
    let s = symmetric_conjugate(q, pi.weights())?;
    Ok(Spectrum {
        eigenvalues: symmetric_eigenvalues(s),
    })
}

/// Eigenvalues (unsorted) and orthonormal eigenvectors (columns) of the
/// symmetric conjugate of `Q`.
pub fn symmetric_decomposition(
    q: &TransitionMatrix,
    pi: &StationaryDistribution,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let eig = SymmetricEigen::new(symmetric_conjugate(q, pi.weights())?);
    Ok((eig.eigenvalues.iter().copied().collect(), eig.eigenvectors))
}

/// Spectrum of the walk on `g`.
pub fn graph_spectrum(g: &WeightedGraph) -> Result<Spectrum> {
    let q = transition_matrix(g)?;
    let pi = stationary_distribution(g)?;
    eigenvalues(&q, &pi)
}

/// Recovers the reversible measure of `Q` (normalized to sum 1) from the ratios
/// `pi_y / pi_x = Q[x][y] / Q[y][x]` along a spanning tree of its support.
pub fn reversible_measure(q: &TransitionMatrix) -> Result<StationaryDistribution> {
    let m = q.size();
    let mut pi = vec![0.0; m];
    pi[0] = 1.0;
    let mut queue = VecDeque::from([0]);
    let mut seen = 1;
    while let Some(x) = queue.pop_front() {
        for y in 0..m {
            if pi[y] == 0.0 && q.get(x, y) > 0.0 {
                if q.get(y, x) <= 0.0 {
                    return Err(Error::DetailedBalance {
                        x,
                        y,
                        deviation: q.get(x, y),
                    });
                }
                pi[y] = pi[x] * q.get(x, y) / q.get(y, x);
                seen += 1;
                queue.push_back(y);
            }
        }
    }
    if seen != m {
        return Err(Error::Disconnected);
    }
    let total: f64 = pi.iter().sum();
    let weights: Vec<f64> = pi.into_iter().map(|p| p / total).collect();
    Ok(StationaryDistribution::from_weights(weights))
}

/// `Q^k` by repeated squaring.
pub fn matrix_power(q: &DMatrix<f64>, k: u32) -> DMatrix<f64> {
    let mut result = DMatrix::identity(q.nrows(), q.ncols());
    let mut base = q.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `Tr Q^k` from the repeated-squaring matrix power.
pub fn matrix_power_trace(q: &TransitionMatrix, k: u32) -> f64 {
    matrix_power(q.matrix(), k).trace()
}

/// `Tr Q^k` as `sum_i lambda_i^k`.
pub fn trace_power(q: &TransitionMatrix, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let pi = reversible_measure(q)?;
    Ok(eigenvalues(q, &pi)?.trace_power(k))
}

/// `-(1/m) ln det(I - rho Q)` from the spectrum.
pub fn log_det_functional(q: &TransitionMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let pi = reversible_measure(q)?;
    eigenvalues(q, &pi)?.log_det_functional(rho)
}

/// `(1/m) sum_{k>=1} rho^k Tr Q^k / k` summed with matrix powers until the
/// remaining terms are below `tol` (bounded by `rho^k / (k (1 - rho))`).
pub fn log_det_series(q: &TransitionMatrix, rho: f64, tol: f64) -> Result<f64> {
    check_rho(rho)?;
    let m = q.size() as f64;
    let mut power = q.matrix().clone();
    let mut rho_k = rho;
    let mut total = 0.0;
    for k in 1.. {
        total += rho_k * power.trace() / k as f64;
        rho_k *= rho;
        // Tr Q^j / m <= 1 for every j
        if rho_k / ((k + 1) as f64 * (1.0 - rho)) < tol {
            break;
        }
        power = &power * q.matrix();
    }
    Ok(total / m)
}

/// `(1/m) sum_{k=2}^{K} Tr Q^k / k`.
pub fn partial_loop_mass_rate(q: &TransitionMatrix, max_len: usize) -> Result<f64> {
    let pi = reversible_measure(q)?;
    eigenvalues(q, &pi)?.partial_loop_mass_rate(max_len)
}

/// A self-avoiding path `gamma_xy` for every unordered pair `x < y`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSystem {
    paths: BTreeMap<(usize, usize), Vec<usize>>,
}

impl PathSystem {
    /// Checks every path against `g`. Paths are keyed by `(x, y)` with `x < y`
    /// and must run from `x` to `y`.
    pub fn new(g: &WeightedGraph, paths: BTreeMap<(usize, usize), Vec<usize>>) -> Result<Self> {
        let m = g.vertex_count();
        for x in 0..m {
            for y in x + 1..m {
                let Some(p) = paths.get(&(x, y)) else {
                    return Err(Error::InvalidPathSystem(format!("missing path for ({x}, {y})")));
                };
                if p.first() != Some(&x) || p.last() != Some(&y) {
                    return Err(Error::InvalidPathSystem(format!(
                        "path for ({x}, {y}) has wrong endpoints"
                    )));
                }
                let mut seen = vec![false; m];
                for &v in p {
                    if v >= m || std::mem::replace(&mut seen[v], true) {
                        return Err(Error::InvalidPathSystem(format!(
                            "path for ({x}, {y}) repeats or leaves the vertex set at {v}"
                        )));
                    }
                }
                if let Some(w) = p.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
                    return Err(Error::InvalidPathSystem(format!(
                        "path for ({x}, {y}) uses non-edge ({}, {})",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(Self { paths })
    }

    pub fn path(&self, x: usize, y: usize) -> Option<&[usize]> {
        let key = (x.min(y), x.max(y));
        self.paths.get(&key).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<usize>)> {
        self.paths.iter()
    }
}

/// BFS tree from `root` exploring neighbors in increasing index order.
fn bfs_parents(g: &WeightedGraph, root: usize) -> (Vec<usize>, Vec<usize>) {
    let m = g.vertex_count();
    let mut parent = vec![usize::MAX; m];
    let mut dist = vec![usize::MAX; m];
    dist[root] = 0;
    parent[root] = root;
    let mut queue = VecDeque::from([root]);
    while let Some(x) = queue.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    (parent, dist)
}

/// Path from `root` to `target` in a BFS parent array.
fn tree_path(parent: &[usize], root: usize, target: usize) -> Vec<usize> {
    let mut p = vec![target];
    let mut v = target;
    while v != root {
        v = parent[v];
        p.push(v);
    }
    p.reverse();
    p
}

/// Shortest paths from a BFS rooted at the smaller endpoint, neighbors taken in
/// increasing index order.
pub fn default_path_system(g: &WeightedGraph) -> Result<PathSystem> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let m = g.vertex_count();
    let mut paths = BTreeMap::new();
    for x in 0..m {
        let (parent, _) = bfs_parents(g, x);
        for y in x + 1..m {
            paths.insert((x, y), tree_path(&parent, x, y));
        }
    }
    PathSystem::new(g, paths)
}

/// A closed walk `sigma_x` through each vertex `x` with an odd number of edges.
/// Each walk is stored as `[x, v_1, ..., v_{L-1}]` and closes back to `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct OddLoopSystem {
    loops: Vec<Vec<usize>>,
}

impl OddLoopSystem {
    pub fn new(g: &WeightedGraph, loops: Vec<Vec<usize>>) -> Result<Self> {
        if loops.len() != g.vertex_count() {
            return Err(Error::InvalidPathSystem(format!(
                "need one odd loop per vertex, got {}",
                loops.len()
            )));
        }
        for (x, walk) in loops.iter().enumerate() {
            if walk.first() != Some(&x) {
                return Err(Error::InvalidPathSystem(format!("loop {x} does not start at {x}")));
            }
            if walk.len() % 2 == 0 {
                return Err(Error::InvalidPathSystem(format!(
                    "loop {x} has even length {}",
                    walk.len()
                )));
            }
            let closes = (0..walk.len()).all(|i| g.has_edge(walk[i], walk[(i + 1) % walk.len()]));
            if !closes {
                return Err(Error::InvalidPathSystem(format!("loop {x} uses a non-edge")));
            }
        }
        Ok(Self { loops })
    }

    pub fn walk(&self, x: usize) -> &[usize] {
        &self.loops[x]
    }

    /// Edges of `sigma_x` in walk order, with multiplicity.
    pub fn edges(&self, x: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = &self.loops[x];
        (0..w.len()).map(move |i| {
            let (a, b) = (w[i], w[(i + 1) % w.len()]);
            (a.min(b), a.max(b))
        })
    }
}

/// A globally shortest odd cycle, as a vertex sequence.
pub fn minimal_odd_cycle(g: &WeightedGraph) -> Result<Vec<usize>> {
    let mut best: Option<Vec<usize>> = None;
    for s in 0..g.vertex_count() {
        let (parent, dist) = bfs_parents(g, s);
        for &(u, v, _) in g.edges() {
            if dist[u] != usize::MAX && dist[u] == dist[v] {
                let len = 2 * dist[u] + 1;
                if best.as_ref().is_some_and(|b| b.len() <= len) {
                    continue;
                }
                let mut cycle = tree_path(&parent, s, u);
                let mut back = tree_path(&parent, s, v);
                back.reverse();
                back.pop();
                cycle.extend(back);
                // the two tree paths may share a prefix; keep only simple cycles
                let mut seen = vec![false; g.vertex_count()];
                if cycle.iter().all(|&x| !std::mem::replace(&mut seen[x], true)) {
                    best = Some(cycle);
                }
            }
        }
    }
    best.ok_or(Error::Bipartite)
}

/// For each `x`: the BFS path to a vertex `x0` of a minimal odd cycle, once
/// around the cycle, and the same path back. Vertices on the cycle just use
/// the cycle itself.
pub fn default_odd_loop_system(g: &WeightedGraph) -> Result<OddLoopSystem> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let cycle = minimal_odd_cycle(g)?;
    let x0 = cycle[0];
    let (parent, _) = bfs_parents(g, x0);
    let mut loops = Vec::with_capacity(g.vertex_count());
    for x in 0..g.vertex_count() {
        if let Some(i) = cycle.iter().position(|&v| v == x) {
            loops.push([&cycle[i..], &cycle[..i]].concat());
            continue;
        }
        let to_x = tree_path(&parent, x0, x);
        // x -> x0
        let mut walk: Vec<usize> = to_x.iter().rev().copied().collect();
        walk.pop();
        walk.extend(&cycle);
        // x0 -> x, excluding the final x which closes the walk
        walk.extend(&to_x[..to_x.len() - 1]);
        loops.push(walk);
    }
    OddLoopSystem::new(g, loops)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareReport {
    pub kappa: f64,
    pub bound: f64,
    pub second_largest: f64,
    pub holds: bool,
}

/// Path-congestion bound `beta_1 <= 1 - 1/kappa`.
pub fn poincare_bound(
    g: &WeightedGraph,
    pi: &StationaryDistribution,
    paths: &PathSystem,
) -> Result<PoincareReport> {
    let q = transition_matrix(g)?;
    let mut load: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (&(x, y), path) in paths.iter() {
        let length: f64 = path
            .windows(2)
            .map(|e| 1.0 / pi.flow(&q, e[0], e[1]))
            .sum();
        let contribution = length * pi.get(x) * pi.get(y);
        for e in path.windows(2) {
            *load.entry((e[0].min(e[1]), e[0].max(e[1]))).or_default() += contribution;
        }
    }
    let kappa = load.values().copied().fold(0.0, f64::max);
    let bound = 1.0 - 1.0 / kappa;
    let second_largest = eigenvalues(&q, pi)?
        .second_largest()
        .ok_or_else(|| Error::InvalidArgument("graph needs at least two vertices".into()))?;
    Ok(PoincareReport {
        kappa,
        bound,
        second_largest,
        holds: second_largest <= bound + BOUND_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddLoopReport {
    pub tau: f64,
    pub bound: f64,
    pub smallest: f64,
    pub holds: bool,
}

/// Odd-loop bound `beta_min >= -1 + 2/tau`.
pub fn odd_loop_bound(
    g: &WeightedGraph,
    pi: &StationaryDistribution,
    loops: &OddLoopSystem,
) -> Result<OddLoopReport> {
    if g.is_bipartite() {
        return Err(Error::Bipartite);
    }
    let q = transition_matrix(g)?;
    let mut load: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for x in 0..g.vertex_count() {
        let length: f64 = loops.edges(x).map(|(a, b)| 1.0 / pi.flow(&q, a, b)).sum();
        let mut used: Vec<_> = loops.edges(x).collect();
        used.sort_unstable();
        used.dedup();
        for e in used {
            *load.entry(e).or_default() += pi.get(x) * length;
        }
    }
    let tau = load.values().copied().fold(0.0, f64::max);
    let bound = -1.0 + 2.0 / tau;
    let smallest = eigenvalues(&q, pi)?.smallest();
    Ok(OddLoopReport {
        tau,
        bound,
        smallest,
        holds: smallest >= bound - BOUND_SLACK,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceTailReport {
    /// `(k, |Tr Q^k - 1|, m (1 - 2/(3 d m^2))^k)` for each sampled `k`.
    pub samples: Vec<(u64, f64, f64)>,
    pub max_deviation: f64,
    pub holds: bool,
}

/// Checks `|Tr Q^k - 1| <= m (1 - 2/(3 d m^2))^k` at `k = ceil(m^b) * 2^j`, `j = 0..8`,
/// on a regular, connected, non-bipartite unit-weight graph.
pub fn trace_tail_check(g: &WeightedGraph, b: f64) -> Result<TraceTailReport> {
    if b <= 2.0 {
        return Err(Error::InvalidArgument(format!("b must exceed 2, got {b}")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    if g.is_bipartite() {
        return Err(Error::Bipartite);
    }
    if !g.is_regular() || !g.has_unit_weights() {
        return Err(Error::InvalidArgument("trace tail check needs a regular unit-weight graph".into()));
    }
    let spectrum = graph_spectrum(g)?;
    let m = g.vertex_count() as f64;
    let d = g.degree(0) as f64;
    let rate = 1.0 - 2.0 / (3.0 * d * m * m);
    let k0 = m.powf(b).ceil() as u64;
    // the Perron eigenvalue is exactly 1; the deviation is the sum over the rest
    let rest = &spectrum.eigenvalues()[..spectrum.len() - 1];
    let mut samples = Vec::new();
    for j in 0..8 {
        let k = k0 << j;
        let deviation = rest.iter().map(|&l| pow_u64(l, k)).sum::<f64>().abs();
        let bound = m * pow_u64(rate, k);
        samples.push((k, deviation, bound));
    }
    let max_deviation = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let holds = samples.iter().all(|&(_, dev, bound)| dev <= bound + BOUND_SLACK);
    Ok(TraceTailReport {
        samples,
        max_deviation,
        holds,
    })
}

fn pow_u64(x: f64, k: u64) -> f64 {
    if k <= i32::MAX as u64 {
        x.powi(k as i32)
    } else {
        x.abs().powf(k as f64) * if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnProbabilityReport {
    pub trace: f64,
    pub trace_bound: f64,
    /// `max_x (Q^k)[x][x]` and `10 max(1/sqrt(k), 1/m)`, regular graphs only.
    pub per_vertex: Option<(f64, f64)>,
    /// The graph has non-unit weights, so the constant is provisional and a
    /// violation is only flagged.
    pub weighted: bool,
    pub holds: bool,
}

/// Checks `sum_x (Q^k)[x][x] <= (14 D^2 / d^2) max(m / sqrt(k), 1)` and, for
/// regular graphs, `(Q^k)[x][x] <= 10 max(1/sqrt(k), 1/m)`. Weighted graphs use
/// `D / r` and `d / R` in place of `D` and `d`.
pub fn return_probability_bound_check(g: &WeightedGraph, k: u32) -> Result<ReturnProbabilityReport> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    let q = transition_matrix(g)?;
    let power = matrix_power(q.matrix(), k);
    let trace = power.trace();
    let report = structural_report(g);
    let weighted = !g.has_unit_weights();
    let (big, small) = if weighted {
        (
            report.bounds.max_degree as f64 / report.bounds.weight_inv_min,
            report.bounds.min_degree as f64 / report.bounds.weight_inv_max,
        )
    } else {
        (report.bounds.max_degree as f64, report.bounds.min_degree as f64)
    };
    let m = g.vertex_count() as f64;
    let kf = k as f64;
    let trace_bound = 14.0 * big * big / (small * small) * (m / kf.sqrt()).max(1.0);
    let per_vertex = (g.is_regular() && !weighted).then(|| {
        let max_diag = (0..g.vertex_count())
            .map(|x| power[(x, x)])
            .fold(0.0, f64::max);
        (max_diag, 10.0 * (1.0 / kf.sqrt()).max(1.0 / m))
    });
    let holds = trace <= trace_bound + BOUND_SLACK
        && per_vertex.is_none_or(|(v, b)| v <= b + BOUND_SLACK);
    Ok(ReturnProbabilityReport {
        trace,
        trace_bound,
        per_vertex,
        weighted,
        holds,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterlacingReport {
    /// `ln det(I - rho Q) - ln det(I - rho Q|_A)`.
    pub difference: f64,
    pub bracket: (f64, f64),
    pub bracket_holds: bool,
    /// `alpha_j <= beta_j <= alpha_{m - |A| + j}` for every `j`.
    pub interlacing_holds: bool,
}

/// Cauchy interlacing for the principal submatrix on `subset` and the resulting
/// log-determinant bracket `(m - |A|) [ln(1 - rho), ln(1 + rho)]`.
pub fn interlacing_bracket_check(
    q: &TransitionMatrix,
    pi: &StationaryDistribution,
    subset: &[usize],
    rho: f64,
) -> Result<InterlacingReport> {
    check_rho(rho)?;
    let m = q.size();
    if subset.is_empty() {
        return Err(Error::InvalidArgument("subset must be nonempty".into()));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != subset.len() || sorted.last().is_some_and(|&v| v >= m) {
        return Err(Error::InvalidArgument("subset has repeated or out-of-range vertices".into()));
    }
    let s = symmetric_conjugate(q, pi.weights())?;
    let alpha = symmetric_eigenvalues(s.clone());
    let sub = DMatrix::from_fn(sorted.len(), sorted.len(), |i, j| s[(sorted[i], sorted[j])]);
    let beta = symmetric_eigenvalues(sub);
    let gap = m - sorted.len();
    let interlacing_holds = beta.iter().enumerate().all(|(j, &b)| {
        alpha[j] <= b + BOUND_SLACK && b <= alpha[gap + j] + BOUND_SLACK
    });

    let log_det = |a: DMatrix<f64>| -> f64 {
        let n = a.nrows();
        let lu = (DMatrix::identity(n, n) - a * rho).lu();
        lu.determinant().ln()
    };
    let difference = log_det(q.matrix().clone()) - log_det(q.principal(&sorted));
    let gapf = gap as f64;
    let bracket = (gapf * (-rho).ln_1p(), gapf * rho.ln_1p());
    let bracket_holds =
        difference >= bracket.0 - BOUND_SLACK && difference <= bracket.1 + BOUND_SLACK;
    Ok(InterlacingReport {
        difference,
        bracket,
        bracket_holds,
        interlacing_holds,
    })
}

/// Effect of deleting edges on the spectrum.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerturbationReport {
    pub vertices: usize,
    pub removed_edges: usize,
    /// Kolmogorov distance between the two empirical spectral distributions.
    pub kolmogorov: f64,
    pub rows: Vec<PerturbationRow>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerturbationRow {
    pub rho: f64,
    pub original: f64,
    pub perturbed: f64,
    /// `perturbed - original`, both per vertex.
    pub delta: f64,
    /// `(a/m) max(|ln(1 - rho)|, ln(1 + rho))` with `a` the number of removed edges.
    pub bound: f64,
    pub holds: bool,
}

/// Compares the spectrum of `g` with that of `g` minus `removed`, which must
/// stay connected.
pub fn perturbation_report(
    g: &WeightedGraph,
    removed: &[(usize, usize)],
    rhos: &[f64],
) -> Result<PerturbationReport> {
    let before = graph_spectrum(g)?;
    let after = graph_spectrum(&g.without_edges(removed)?)?;
    let m = g.vertex_count();
    let a = removed.len() as f64;
    let rows = rhos
        .iter()
        .map(|&rho| {
            let original = before.log_det_functional(rho)?;
            let perturbed = after.log_det_functional(rho)?;
            let delta = perturbed - original;
            let bound = a / m as f64 * (-(-rho).ln_1p()).max(rho.ln_1p());
            Ok(PerturbationRow {
                rho,
                original,
                perturbed,
                delta,
                bound,
                holds: delta.abs() <= bound + BOUND_SLACK,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PerturbationReport {
        vertices: m,
        removed_edges: removed.len(),
        kolmogorov: kolmogorov_distance(&before.esd().atoms(), &after.esd().atoms(), 1e-9),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_complete, build_cycle, build_cycle_with_chords, build_path, random_connected};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn approx(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn spectrum_examples() {
        let s = graph_spectrum(&build_complete(3).unwrap()).unwrap();
        assert!(approx(s.eigenvalues(), &[-0.5, -0.5, 1.0], 1e-12));
        let s = graph_spectrum(&build_cycle(4).unwrap()).unwrap();
        assert!(approx(s.eigenvalues(), &[-1.0, 0.0, 0.0, 1.0], 1e-12));
        for n in 2..=7 {
            let s = graph_spectrum(&build_complete(n).unwrap()).unwrap();
            let mut expected = vec![-1.0 / (n as f64 - 1.0); n - 1];
            expected.push(1.0);
            assert!(approx(s.eigenvalues(), &expected, 1e-12), "K_{n}");
        }
    }

    /// Characteristic polynomial of a 2x2, 3x3 or 4x4 matrix by Faddeev-LeVerrier.
    fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
        let n = a.nrows();
        let mut coeffs = vec![1.0];
        let mut mk = DMatrix::<f64>::zeros(n, n);
        for k in 1..=n {
            mk = a * &mk + DMatrix::identity(n, n) * coeffs[k - 1];
            let c = -(a * &mk).trace() / k as f64;
            coeffs.push(c);
        }
        coeffs
    }

    #[test]
    fn eigenvalues_are_roots_of_the_characteristic_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in 2..=4 {
            for _ in 0..5 {
                let g = random_connected(m, 0.5, (0.5, 2.0), &mut rng).unwrap();
                let q = transition_matrix(&g).unwrap();
                let coeffs = char_poly(q.matrix());
                let s = graph_spectrum(&g).unwrap();
                for &l in s.eigenvalues() {
                    let p = coeffs.iter().fold(0.0, |acc, c| acc * l + c);
                    let dp = coeffs[..m]
                        .iter()
                        .enumerate()
                        .fold(0.0, |acc, (i, c)| acc * l + c * (m - i) as f64);
                    // Newton step size bounds the distance to the nearest root
                    // for simple roots; fall back to the residual itself
                    let step = if dp.abs() > 1e-6 { (p / dp).abs() } else { p.abs() };
                    assert!(step < 1e-9, "m={m} l={l} step={step}");
                }
            }
        }
    }

    #[test]
    fn detailed_balance_violation_is_rejected() {
        let g = build_cycle(4).unwrap();
        let q = transition_matrix(&g).unwrap();
        let bad = StationaryDistribution::from_weights(vec![0.4, 0.2, 0.2, 0.2]);
        assert!(matches!(eigenvalues(&q, &bad), Err(Error::DetailedBalance { .. })));
    }

    #[test]
    fn trace_examples() {
        let q = transition_matrix(&build_complete(3).unwrap()).unwrap();
        assert!((trace_power(&q, 2).unwrap() - 1.5).abs() < 1e-12);
        assert!((trace_power(&q, 3).unwrap() - 0.75).abs() < 1e-12);
        assert!(trace_power(&q, 1).unwrap().abs() < 1e-12);
        assert!(trace_power(&q, 0).is_err());
    }

    #[test]
    fn trace_by_eigen_sum_matches_matrix_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..30 {
            let m = rng.random_range(2..=12);
            let g = random_connected(m, 0.3, (0.5, 2.0), &mut rng).unwrap();
            let q = transition_matrix(&g).unwrap();
            let s = graph_spectrum(&g).unwrap();
            for k in 1..=64 {
                let a = s.trace_power(k);
                let b = matrix_power_trace(&q, k);
                assert!((a - b).abs() < 1e-8, "m={m} k={k} {a} {b}");
            }
        }
    }

    #[test]
    fn spectrum_invariants_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let m = rng.random_range(2..=12);
            let g = random_connected(m, 0.3, (0.5, 2.0), &mut rng).unwrap();
            let s = graph_spectrum(&g).unwrap();
            assert!(s.eigenvalues().iter().all(|l| l.abs() <= 1.0 + 1e-9));
            assert!((s.eigenvalues()[m - 1] - 1.0).abs() < 1e-9);
            assert!(s.eigenvalues().iter().sum::<f64>().abs() < 1e-8);
            assert!(s.esd().moment(1).abs() < 1e-8);
        }
    }

    #[test]
    fn log_det_examples() {
        let q3 = transition_matrix(&build_complete(3).unwrap()).unwrap();
        let q4 = transition_matrix(&build_cycle(4).unwrap()).unwrap();
        assert_eq!(log_det_functional(&q3, 0.0).unwrap(), 0.0);
        let expected = -(0.5f64.ln() + 2.0 * 1.25f64.ln()) / 3.0;
        assert!((log_det_functional(&q3, 0.5).unwrap() - expected).abs() < 1e-12);
        let expected = -(0.5f64.ln() + 1.5f64.ln()) / 4.0;
        assert!((log_det_functional(&q4, 0.5).unwrap() - expected).abs() < 1e-12);
        assert!(log_det_functional(&q3, 1.0).is_err());
    }

    #[test]
    fn log_det_matches_power_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let m = rng.random_range(2..=10);
            let g = random_connected(m, 0.4, (0.5, 2.0), &mut rng).unwrap();
            let q = transition_matrix(&g).unwrap();
            for rho in [0.1, 0.5, 0.9] {
                let a = log_det_functional(&q, rho).unwrap();
                let b = log_det_series(&q, rho, 1e-12).unwrap();
                assert!((a - b).abs() < 1e-9, "rho={rho} {a} {b}");
            }
        }
    }

    #[test]
    fn partial_loop_mass_examples() {
        let q3 = transition_matrix(&build_complete(3).unwrap()).unwrap();
        assert!((partial_loop_mass_rate(&q3, 2).unwrap() - 0.25).abs() < 1e-12);
        let expected = 0.25 + 0.75 / 9.0;
        assert!((partial_loop_mass_rate(&q3, 3).unwrap() - expected).abs() < 1e-12);
        assert!(partial_loop_mass_rate(&q3, 1).is_err());

        for (g, d) in [(build_cycle(9).unwrap(), 2.0), (build_complete(6).unwrap(), 5.0)] {
            let q = transition_matrix(&g).unwrap();
            let rate = partial_loop_mass_rate(&q, 2).unwrap();
            assert!(rate >= 1.0 / (2.0 * d * d) - 1e-12);
            let mut last = rate;
            for k in 3..20 {
                let next = partial_loop_mass_rate(&q, k).unwrap();
                assert!(next >= last - 1e-15);
                last = next;
            }
        }
    }

    #[test]
    fn poincare_examples() {
        let g = build_complete(3).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        let r = poincare_bound(&g, &pi, &default_path_system(&g).unwrap()).unwrap();
        assert!((r.kappa - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.bound + 0.5).abs() < 1e-12);
        assert!((r.second_largest + 0.5).abs() < 1e-12);
        assert!(r.holds);

        let g = build_cycle(4).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        let paths = default_path_system(&g).unwrap();
        assert_eq!(paths.path(0, 2).unwrap(), &[0, 1, 2]);
        let r = poincare_bound(&g, &pi, &paths).unwrap();
        // edge {0,1} carries (0,1), (0,2) and (1,3)... enumerated by hand:
        // |gamma| = 8 per edge, pi = 1/4; loads: {0,1}: 8+16+16 = 40/16
        assert!((r.kappa - 40.0 / 16.0).abs() < 1e-12, "{}", r.kappa);
        assert!(r.second_largest.abs() < 1e-12 && r.holds);
    }

    #[test]
    fn poincare_regular_corollary() {
        for g in [build_cycle(7).unwrap(), build_complete(5).unwrap(), build_cycle(10).unwrap()] {
            let pi = stationary_distribution(&g).unwrap();
            let r = poincare_bound(&g, &pi, &default_path_system(&g).unwrap()).unwrap();
            let (m, d) = (g.vertex_count() as f64, g.degree(0) as f64);
            assert!(r.holds);
            assert!(r.second_largest <= 1.0 - 1.0 / (d * m * m) + 1e-12);
        }
    }

    #[test]
    fn path_system_validation() {
        let g = build_path(3).unwrap();
        let paths = default_path_system(&g).unwrap();
        assert_eq!(paths.path(0, 2).unwrap(), &[0, 1, 2]);
        let mut bad = BTreeMap::new();
        bad.insert((0, 1), vec![0, 1]);
        bad.insert((0, 2), vec![0, 2]);
        bad.insert((1, 2), vec![1, 2]);
        assert!(matches!(PathSystem::new(&g, bad), Err(Error::InvalidPathSystem(_))));
    }

    #[test]
    fn odd_loop_examples() {
        let g = build_complete(3).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        let loops = default_odd_loop_system(&g).unwrap();
        assert_eq!(minimal_odd_cycle(&g).unwrap().len(), 3);
        let r = odd_loop_bound(&g, &pi, &loops).unwrap();
        assert!((r.tau - 18.0).abs() < 1e-12);
        assert!((r.bound + 8.0 / 9.0).abs() < 1e-12);
        assert!(r.holds);

        let g = build_cycle(4).unwrap();
        assert!(matches!(default_odd_loop_system(&g), Err(Error::Bipartite)));
    }

    #[test]
    fn odd_loop_cycle_with_chords_triangles() {
        for n in [2, 5, 8] {
            let g = build_cycle_with_chords(n).unwrap();
            let pi = stationary_distribution(&g).unwrap();
            let loops = (0..3 * n)
                .map(|x| {
                    let base = 3 * (x / 3);
                    let tri = [base, base + 1, base + 2];
                    let r = x - base;
                    vec![tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]]
                })
                .collect();
            let loops = OddLoopSystem::new(&g, loops).unwrap();
            let r = odd_loop_bound(&g, &pi, &loops).unwrap();
            assert!((r.tau - 24.0).abs() < 1e-9, "tau = {}", r.tau);
            assert!((r.bound + 11.0 / 12.0).abs() < 1e-12);
            assert!(r.holds && r.smallest >= -11.0 / 12.0);
        }
    }

    #[test]
    fn default_odd_loops_are_short() {
        let g = build_cycle_with_chords(2).unwrap();
        let loops = default_odd_loop_system(&g).unwrap();
        for x in 0..g.vertex_count() {
            let len = loops.walk(x).len();
            assert!(len % 2 == 1 && len <= 3 * g.vertex_count());
        }
        for g in [build_cycle(9).unwrap(), build_complete(5).unwrap()] {
            let pi = stationary_distribution(&g).unwrap();
            let r = odd_loop_bound(&g, &pi, &default_odd_loop_system(&g).unwrap()).unwrap();
            let (m, d) = (g.vertex_count() as f64, g.degree(0) as f64);
            assert!(r.bound >= -1.0 + 2.0 / (3.0 * d * m * m) - 1e-12);
            assert!(r.holds);
        }
    }

    #[test]
    fn trace_tail_examples() {
        let r = trace_tail_check(&build_complete(3).unwrap(), 2.5).unwrap();
        assert!(r.holds);
        for &(k, dev, bound) in &r.samples {
            assert!(k >= 16);
            let exact = 2.0 * 0.5f64.powi(k as i32);
            assert!((dev - exact).abs() <= 1e-12 * exact.max(1e-300));
            assert!(dev <= 3.0 * (8.0f64 / 9.0).powi(k as i32) + 1e-300);
            assert!(bound > 0.0 || dev == 0.0);
        }
        assert!(trace_tail_check(&build_complete(4).unwrap(), 2.5).unwrap().holds);
        assert!(matches!(
            trace_tail_check(&build_cycle(6).unwrap(), 2.5),
            Err(Error::Bipartite)
        ));
    }

    #[test]
    fn return_probability_examples() {
        let r = return_probability_bound_check(&build_cycle(4).unwrap(), 2).unwrap();
        assert!((r.trace - 2.0).abs() < 1e-12);
        assert!((r.trace_bound - 14.0 * 4.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!(r.holds);

        let r = return_probability_bound_check(&build_complete(5).unwrap(), 3).unwrap();
        assert!((r.trace - 0.9375).abs() < 1e-12);
        assert!(r.holds);

        let g = crate::graph::build_tree_ball(3, 2).unwrap();
        let r = return_probability_bound_check(&g, 2).unwrap();
        let q = transition_matrix(&g).unwrap();
        assert!((r.trace - matrix_power_trace(&q, 2)).abs() < 1e-12);
        assert!((r.trace_bound - 14.0 * 9.0 * (10.0 / 2f64.sqrt())).abs() < 1e-9);
        assert!(r.holds && r.per_vertex.is_none());
    }

    #[test]
    fn interlacing_examples() {
        let g = build_complete(4).unwrap();
        let q = transition_matrix(&g).unwrap();
        let pi = stationary_distribution(&g).unwrap();
        let full = interlacing_bracket_check(&q, &pi, &[0, 1, 2, 3], 0.5).unwrap();
        assert!(full.difference.abs() < 1e-12);

        let r = interlacing_bracket_check(&q, &pi, &[0, 1, 2], 0.5).unwrap();
        // I - Q/2 on K_4 has eigenvalues 1/2, 7/6 (x3); the 3x3 block has 2/3, 7/6, 7/6
        let expected = (0.5f64 * (7.0f64 / 6.0).powi(3)).ln() - (2.0f64 / 3.0 * (7.0f64 / 6.0).powi(2)).ln();
        assert!((r.difference - expected).abs() < 1e-12);
        assert!(r.bracket_holds && r.interlacing_holds);
        assert!(interlacing_bracket_check(&q, &pi, &[], 0.5).is_err());
    }

    #[test]
    fn interlacing_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let m = rng.random_range(2..=10);
            let g = random_connected(m, 0.4, (0.5, 2.0), &mut rng).unwrap();
            let q = transition_matrix(&g).unwrap();
            let pi = stationary_distribution(&g).unwrap();
            let subset: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.6)).collect();
            if subset.is_empty() {
                continue;
            }
            for rho in [0.3, 0.7] {
                let r = interlacing_bracket_check(&q, &pi, &subset, rho).unwrap();
                assert!(r.bracket_holds && r.interlacing_holds);
            }
        }
    }

    #[test]
    fn kolmogorov_distance_basics() {
        let a = [(0.0, 0.5), (1.0, 0.5)];
        assert_eq!(kolmogorov_distance(&a, &a, 1e-9), 0.0);
        let b = [(0.0, 1.0)];
        assert!((kolmogorov_distance(&a, &b, 1e-9) - 0.5).abs() < 1e-15);
        let c = [(1e-12, 0.5), (1.0, 0.5)];
        assert_eq!(kolmogorov_distance(&a, &c, 1e-9), 0.0);
    }

    #[test]
    fn csv_exports() {
        let s = graph_spectrum(&build_cycle(4).unwrap()).unwrap();
        let csv = s.to_csv();
        assert!(csv.starts_with("index,eigenvalue\n0,-1"));
        assert_eq!(csv.lines().count(), 5);
        assert!(s.esd().to_csv().contains(",0.25"));
    }
}
