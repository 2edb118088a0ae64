//! Undirected weighted graphs, the graph families used throughout the crate,
//! and the reversible Markov chain each graph induces.
//!
//! Vertices are dense indices `0..m`. Builders fix their layout:
//!
//! * torus: mixed-radix coordinates, `x = c_0 + side * c_1 + side^2 * c_2 + ...`
//! * tree ball: breadth-first generation order (root `0`, its `d` children `1..=d`, ...)
//! * cycle with chords: the cycle `0, 1, ..., 3n-1` plus chords `{3i, 3i+2}`

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};

/// An undirected graph with symmetric positive edge weights and no self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    /// Edges as `(u, v, w)` with `u < v`, sorted.
    edges: Vec<(usize, usize, f64)>,
    /// Neighbors of each vertex, sorted by neighbor index.
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Rejects self-loops, repeated edges,
    /// out-of-range endpoints and non-positive or non-finite weights.
    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidArgument("graph needs at least one vertex".into()));
        }
        let mut map = BTreeMap::new();
        for (a, b, w) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) out of range for {vertex_count} vertices"
                )));
            }
            if a == b {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({a}, {b}) has non-positive weight {w}"
                )));
            }
            let key = (a.min(b), a.max(b));
            if map.insert(key, w).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "edge ({}, {}) listed twice",
                    key.0, key.1
                )));
            }
        }
        Ok(Self::from_map(vertex_count, map))
    }

    fn from_map(vertex_count: usize, map: BTreeMap<(usize, usize), f64>) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        let edges: Vec<_> = map.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        for &(u, v, w) in &edges {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(y, _)| y);
        }
        Self {
            vertex_count,
            edges,
            adjacency,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Neighbors of `x` with edge weights, sorted by neighbor index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    /// Sum of the weights of the edges at `x`.
    pub fn weighted_degree(&self, x: usize) -> f64 {
        self.adjacency[x].iter().map(|&(_, w)| w).sum()
    }

    /// Weight of `{x, y}`, or `None` when the pair is not an edge.
    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacency[x]
            .binary_search_by_key(&y, |&(z, _)| z)
            .ok()
            .map(|i| self.adjacency[x][i].1)
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.weight(x, y).is_some()
    }

    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == self.vertex_count
    }

    /// A proper 2-coloring when one exists.
    pub fn two_coloring(&self) -> Option<Vec<u8>> {
        let mut color = vec![u8::MAX; self.vertex_count];
        for start in 0..self.vertex_count {
            if color[start] != u8::MAX {
                continue;
            }
            color[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.adjacency[x] {
                    if color[y] == u8::MAX {
                        color[y] = 1 - color[x];
                        queue.push_back(y);
                    } else if color[y] == color[x] {
                        return None;
                    }
                }
            }
        }
        Some(color)
    }

    pub fn is_bipartite(&self) -> bool {
        self.two_coloring().is_some()
    }

    pub fn is_regular(&self) -> bool {
        let d = self.degree(0);
        (1..self.vertex_count).all(|x| self.degree(x) == d)
    }

    pub fn has_unit_weights(&self) -> bool {
        self.edges.iter().all(|&(_, _, w)| w == 1.0)
    }

    /// A copy of the graph with the listed edges removed (endpoints in either order).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Result<Self> {
        let mut map: BTreeMap<_, _> = self.edges.iter().map(|&(u, v, w)| ((u, v), w)).collect();
        for &(a, b) in removed {
            if map.remove(&(a.min(b), a.max(b))).is_none() {
                return Err(Error::InvalidArgument(format!("({a}, {b}) is not an edge")));
            }
        }
        Ok(Self::from_map(self.vertex_count, map))
    }

    /// Writes the edge-list text format: a header `m edge_count`, then one
    /// `u v w` line per edge. Weights use the shortest round-trip decimal form.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.vertex_count, self.edges.len());
        for &(u, v, w) in &self.edges {
            let _ = writeln!(s, "{u} {v} {w}");
        }
        s
    }

    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (m, count) = loop {
            let Some((i, line)) = lines.next() else {
                return Err(Error::Parse {
                    line: 0,
                    message: "missing header".into(),
                });
            };
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let m = parse_field::<usize>(it.next(), i + 1, "vertex count")?;
            let count = parse_field::<usize>(it.next(), i + 1, "edge count")?;
            break (m, count);
        };
        let mut edges = Vec::with_capacity(count);
        for (i, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u = parse_field::<usize>(it.next(), i + 1, "u")?;
            let v = parse_field::<usize>(it.next(), i + 1, "v")?;
            let w = parse_field::<f64>(it.next(), i + 1, "w")?;
            if it.next().is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "trailing fields".into(),
                });
            }
            edges.push((u, v, w));
        }
        if edges.len() != count {
            return Err(Error::Parse {
                line: 1,
                message: format!("header announces {count} edges, found {}", edges.len()),
            });
        }
        Self::from_edges(m, edges)
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        Self::read_edge_list(text.as_bytes())
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, name: &str) -> Result<T> {
    let field = field.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {name}"),
    })?;
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {name}: {field:?}"),
    })
}

/// The discrete torus `(Z / side Z)^dim` with unit weights.
///
/// For `side = 2` the two lattice edges between a pair of vertices collapse into
/// a single unit-weight edge, so each vertex has degree `dim` instead of `2 dim`.
pub fn build_torus(dim: usize, side: usize) -> Result<WeightedGraph> {
    if dim == 0 {
        return Err(Error::InvalidArgument("torus dimension must be >= 1".into()));
    }
    if side < 2 {
        return Err(Error::InvalidArgument(format!("torus side must be >= 2, got {side}")));
    }
    let m = side
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::InvalidArgument("torus too large".into()))?;
    let mut map = BTreeMap::new();
    for x in 0..m {
        let mut stride = 1;
        for _ in 0..dim {
            let coord = (x / stride) % side;
            let y = x - coord * stride + ((coord + 1) % side) * stride;
            map.insert((x.min(y), x.max(y)), 1.0);
            stride *= side;
        }
    }
    Ok(WeightedGraph::from_map(m, map))
}

/// Number of vertices in the ball of radius `radius` of the `degree`-regular tree.
pub fn tree_ball_size(degree: usize, radius: usize) -> usize {
    if radius == 0 {
        1
    } else if degree == 2 {
        1 + 2 * radius
    } else {
        (degree * (degree - 1).pow(radius as u32) - 2) / (degree - 2)
    }
}

/// The ball of radius `radius` around the root of the `degree`-regular tree.
pub fn build_tree_ball(degree: usize, radius: usize) -> Result<WeightedGraph> {
    if degree < 2 {
        return Err(Error::InvalidArgument(format!("tree degree must be >= 2, got {degree}")));
    }
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for level in 0..radius {
        let children = if level == 0 { degree } else { degree - 1 };
        let mut next = Vec::with_capacity(frontier.len() * children);
        for &v in &frontier {
            for _ in 0..children {
                edges.push((v, next_id, 1.0));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    WeightedGraph::from_edges(next_id, edges)
}

/// The complete graph `K_n` with unit weights.
pub fn build_complete(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("complete graph needs n >= 2, got {n}")));
    }
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0)));
    WeightedGraph::from_edges(n, edges)
}

/// The cycle on `n` vertices with unit weights (`n >= 3`).
pub fn build_cycle(n: usize) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("cycle needs n >= 3, got {n}")));
    }
    build_torus(1, n)
}

/// The path `0 - 1 - ... - (n-1)` with unit weights.
pub fn build_path(n: usize) -> Result<WeightedGraph> {
    WeightedGraph::from_edges(n, (1..n).map(|i| (i - 1, i, 1.0)))
}

/// The `3n`-cycle with one chord `{3i, 3i+2}` per consecutive triple.
pub fn build_cycle_with_chords(n: usize) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("cycle with chords needs n >= 2, got {n}")));
    }
    let m = 3 * n;
    let cycle = (0..m).map(|i| (i, (i + 1) % m, 1.0));
    let chords = chord_edges(n).into_iter().map(|(u, v)| (u, v, 1.0));
    WeightedGraph::from_edges(m, cycle.chain(chords))
}

/// The chords of [`build_cycle_with_chords`], in triple order.
pub fn chord_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (3 * i, 3 * i + 2)).collect()
}

/// A connected random graph: a uniform random recursive tree plus each
/// remaining pair independently with probability `extra_edge_prob`.
/// Weights are uniform on `weights`.
pub fn random_connected<R: Rng + ?Sized>(
    m: usize,
    extra_edge_prob: f64,
    weights: (f64, f64),
    rng: &mut R,
) -> Result<WeightedGraph> {
    if m < 2 {
        return Err(Error::InvalidArgument("random graph needs m >= 2".into()));
    }
    let draw = |rng: &mut R| {
        if weights.0 == weights.1 {
            weights.0
        } else {
            rng.random_range(weights.0..weights.1)
        }
    };
    let mut map = BTreeMap::new();
    for v in 1..m {
        let u = rng.random_range(0..v);
        let w = draw(rng);
        map.insert((u, v), w);
    }
    for u in 0..m {
        for v in u + 1..m {
            if !map.contains_key(&(u, v)) && rng.random_bool(extra_edge_prob) {
                let w = draw(rng);
                map.insert((u, v), w);
            }
        }
    }
    Ok(WeightedGraph::from_map(m, map))
}

/// Row-stochastic transition matrix `Q[x][y] = w_xy / sum_z w_xz`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[(x, y)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// The principal submatrix on `subset` (order preserved).
    pub fn principal(&self, subset: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(subset.len(), subset.len(), |i, j| {
            self.entries[(subset[i], subset[j])]
        })
    }
}

/// Builds `Q` for `g`. Every vertex needs at least one edge.
pub fn transition_matrix(g: &WeightedGraph) -> Result<TransitionMatrix> {
    let m = g.vertex_count();
    let mut entries = DMatrix::zeros(m, m);
    for x in 0..m {
        if g.degree(x) == 0 {
            return Err(Error::IsolatedVertex { vertex: x });
        }
        let total = g.weighted_degree(x);
        for &(y, w) in g.neighbors(x) {
            entries[(x, y)] = w / total;
        }
    }
    Ok(TransitionMatrix { entries })
}

/// Stationary law `pi_z = sum_y w_zy / sum_{x,y} w_xy` of the walk on a connected graph.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    weights: Vec<f64>,
}

impl StationaryDistribution {
    /// Wraps a probability vector as given, without checking it against a graph.
    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, x: usize) -> f64 {
        self.weights[x]
    }

    /// Normalized edge weight `pi_x Q[x][y]`.
    pub fn flow(&self, q: &TransitionMatrix, x: usize, y: usize) -> f64 {
        self.weights[x] * q.get(x, y)
    }
}

pub fn stationary_distribution(g: &WeightedGraph) -> Result<StationaryDistribution> {
    let m = g.vertex_count();
    if let Some(x) = (0..m).find(|&x| g.degree(x) == 0) {
        return Err(Error::IsolatedVertex { vertex: x });
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let degrees: Vec<f64> = (0..m).map(|x| g.weighted_degree(x)).collect();
    let total: f64 = degrees.iter().sum();
    Ok(StationaryDistribution {
        weights: degrees.into_iter().map(|d| d / total).collect(),
    })
}

/// Degree and weight bounds: `D`, `d`, `r = min 1/w`, `R = max 1/w`.
///
/// An edgeless graph reports `d = D = 0`, `r = +inf` and `R = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeWeightBounds {
    pub max_degree: usize,
    pub min_degree: usize,
    pub weight_inv_min: f64,
    pub weight_inv_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralReport {
    pub bounds: DegreeWeightBounds,
    pub connected: bool,
    pub bipartite: bool,
}

pub fn structural_report(g: &WeightedGraph) -> StructuralReport {
    let degrees = (0..g.vertex_count()).map(|x| g.degree(x));
    let inv = g.edges().iter().map(|&(_, _, w)| 1.0 / w);
    StructuralReport {
        bounds: DegreeWeightBounds {
            max_degree: degrees.clone().max().unwrap_or(0),
            min_degree: degrees.min().unwrap_or(0),
            weight_inv_min: inv.clone().fold(f64::INFINITY, f64::min),
            weight_inv_max: inv.fold(0.0, f64::max),
        },
        connected: g.is_connected(),
        bipartite: g.is_bipartite(),
    }
}
