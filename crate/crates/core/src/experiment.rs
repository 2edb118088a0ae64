//! Config-driven experiment runner.
//!
//! A config is a TOML document:
//!
//! ```toml
//! kind = "phase-sweep"        # see `Kind`
//! sizes = [8, 10, 12]
//! budget = 1000               # replicates, soups or Monte-Carlo draws
//! seed = 7
//!
//! [graph]
//! family = "cycle"            # cycle, path, complete, torus, tree-ball,
//!                             # cycle-with-chords, random, edge-list
//! dim = 2                     # torus
//! degree = 3                  # tree-ball
//! edge_prob = 0.3             # random
//! weights = [0.5, 2.0]        # random
//! path = "graph.txt"          # edge-list
//!
//! [killing]
//! rule = "exp-rate"           # fixed (c), exp-rate (a), power (d), beta (beta)
//! a = 0.6931471805599453
//!
//! [params]
//! oracle = "dp"               # cover-prob, phase-sweep: dp, mc or auto
//!
//! [output]
//! path = "sweep.csv"
//! format = "csv"              # csv or json
//! ```
//!
//! What a size means depends on the family: the vertex count for cycles,
//! paths, complete and random graphs, the side for tori, the radius for tree
//! balls and the number of chords for the cycle with chords. Killing rules are
//! evaluated with `m` the vertex count: `exp-rate` gives `c = e^{-a m}`, `power`
//! gives `c = m^{-d}` and `beta` gives `c = beta/m`.
//!
//! Unknown keys anywhere are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::complete::{regime_sweep, RegimeRow};
use crate::error::{Error, Result};
use crate::graph::{
    build_complete, build_cycle, build_cycle_with_chords, build_path, build_torus, build_tree_ball,
    chord_edges, random_connected, transition_matrix, WeightedGraph,
};
use crate::limits::{
    empirical_j, leaf_chain_j, predicted_cover_limit, torus_limit_j, torus_limit_j_qmc,
    tree_ball_j, tree_ball_limit_spectrum, Estimate, PhaseParameters, TorusJMethod,
};
use crate::loops::{
    auto_length_distribution, conditional_cover_curve, exact_cover_probability, loop_length_distribution,
    mc_cover_prob, soup_cover_counts, KillingRate, MAX_DP_VERTICES,
};
use crate::rng::{replicate_rng, CoverEstimate};
use crate::spectral::{graph_spectrum, perturbation_report};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// May be left out when the kind comes from the command line.
    #[serde(default)]
    pub kind: Option<String>,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub killing: Option<KillingConfig>,
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_budget() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub family: String,
    pub dim: Option<usize>,
    pub degree: Option<usize>,
    pub edge_prob: Option<f64>,
    pub weights: Option<(f64, f64)>,
    pub path: Option<PathBuf>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            family: "cycle".into(),
            dim: None,
            degree: None,
            edge_prob: None,
            weights: None,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KillingConfig {
    pub rule: String,
    pub c: Option<f64>,
    pub a: Option<f64>,
    pub d: Option<f64>,
    pub beta: Option<f64>,
}

/// Kind-specific knobs; each is ignored by the kinds that do not use it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// `dp`, `mc` or `auto` (DP when the graph has at most 14 vertices).
    pub oracle: Option<String>,
    /// Loop lengths for conditional-curve.
    pub lengths: Option<Vec<usize>>,
    /// Soup intensity.
    pub alpha: Option<f64>,
    /// Loop-length truncation; chosen automatically when absent.
    pub max_len: Option<usize>,
    /// Rates `a` for phase-sweep; defaults to the killing rule's `a`.
    pub rates: Option<Vec<f64>>,
    /// Covering functional for phase-sweep on families without a known limit.
    pub j: Option<f64>,
    /// Exponents `d` for complete-sweep.
    pub exponents: Option<Vec<f64>>,
    /// Truncation level for tree-limit.
    pub m_max: Option<usize>,
    /// `quadrature`, `series` or `qmc` for torus-limit.
    pub method: Option<String>,
    /// `rho` values for stability.
    pub rhos: Option<Vec<f64>>,
    /// Number of chords removed by stability; `ceil(sqrt(m))` when absent.
    pub removed: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            path: None,
            format: default_format(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config {
            path: "<config>".into(),
            message: e.message().to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config {
            path: path.display().to_string(),
            message: e.to_string().trim_end().to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Spectrum,
    LoopLength,
    CoverProb,
    ConditionalCurve,
    Soup,
    PhaseSweep,
    TreeLimit,
    TorusLimit,
    CompleteSweep,
    Stability,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Spectrum,
        Kind::LoopLength,
        Kind::CoverProb,
        Kind::ConditionalCurve,
        Kind::Soup,
        Kind::PhaseSweep,
        Kind::TreeLimit,
        Kind::TorusLimit,
        Kind::CompleteSweep,
        Kind::Stability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Spectrum => "spectrum",
            Kind::LoopLength => "loop-length",
            Kind::CoverProb => "cover-prob",
            Kind::ConditionalCurve => "conditional-curve",
            Kind::Soup => "soup",
            Kind::PhaseSweep => "phase-sweep",
            Kind::TreeLimit => "tree-limit",
            Kind::TorusLimit => "torus-limit",
            Kind::CompleteSweep => "complete-sweep",
            Kind::Stability => "stability",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    fn needs_killing(self) -> bool {
        matches!(self, Kind::LoopLength | Kind::CoverProb | Kind::Soup | Kind::PhaseSweep)
    }

    fn needs_sizes(self) -> bool {
        !matches!(self, Kind::TreeLimit | Kind::TorusLimit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Cycle,
    Path,
    Complete,
    Torus { dim: usize },
    TreeBall { degree: usize },
    CycleWithChords,
    Random { edge_prob: f64, weights: (f64, f64) },
    EdgeList,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Killing {
    Fixed(f64),
    ExpRate(f64),
    Power(f64),
    Beta(f64),
}

impl Killing {
    fn rate(self, m: usize) -> Result<KillingRate> {
        match self {
            Killing::Fixed(c) => KillingRate::new(c),
            Killing::ExpRate(a) => KillingRate::from_exp_rate(a, m),
            Killing::Power(d) => KillingRate::from_power(d, m),
            Killing::Beta(b) => KillingRate::from_beta(b, m),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// A validation finding, located by its dotted field path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

struct Checked {
    kind: Kind,
    family: Family,
    killing: Option<Killing>,
}

struct Diags(Vec<Diagnostic>);

impl Diags {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            path: path.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, path: &str, v: Option<f64>) -> Option<f64> {
        match v {
            None => {
                self.push(path, "required");
                None
            }
            Some(x) if !(x > 0.0 && x.is_finite()) => {
                self.push(path, format!("must be positive and finite, got {x}"));
                None
            }
            Some(x) => Some(x),
        }
    }
}

/// Every problem with `config`, each tagged with its field path. Empty means
/// the config can be run.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    check(config).err().unwrap_or_default()
}

fn check(config: &ExperimentConfig) -> std::result::Result<Checked, Vec<Diagnostic>> {
    let mut d = Diags(Vec::new());
    let kind = match config.kind.as_deref() {
        None => {
            d.push("kind", "required");
            None
        }
        Some(k) => {
            let parsed = Kind::parse(k);
            if parsed.is_none() {
                let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
                d.push("kind", format!("unknown kind `{k}`; expected one of {}", names.join(", ")));
            }
            parsed
        }
    };
    if config.budget == 0 {
        d.push("budget", "must be >= 1");
    }

    let g = &config.graph;
    let family = match g.family.as_str() {
        "cycle" => Some(Family::Cycle),
        "path" => Some(Family::Path),
        "complete" => Some(Family::Complete),
        "torus" => match g.dim {
            Some(dim) if dim >= 1 => Some(Family::Torus { dim }),
            Some(_) => {
                d.push("graph.dim", "must be >= 1");
                None
            }
            None => {
                d.push("graph.dim", "required for the torus family");
                None
            }
        },
        "tree-ball" => match g.degree {
            Some(degree) if degree >= 3 => Some(Family::TreeBall { degree }),
            Some(_) => {
                d.push("graph.degree", "must be >= 3");
                None
            }
            None => {
                d.push("graph.degree", "required for the tree-ball family");
                None
            }
        },
        "cycle-with-chords" => Some(Family::CycleWithChords),
        "random" => {
            let edge_prob = match g.edge_prob {
                Some(p) if (0.0..=1.0).contains(&p) => Some(p),
                Some(p) => {
                    d.push("graph.edge_prob", format!("must lie in [0, 1], got {p}"));
                    None
                }
                None => {
                    d.push("graph.edge_prob", "required for the random family");
                    None
                }
            };
            let weights = g.weights.unwrap_or((1.0, 1.0));
            if !(weights.0 > 0.0 && weights.0 <= weights.1 && weights.1.is_finite()) {
                d.push("graph.weights", format!("need 0 < low <= high, got {weights:?}"));
            }
            edge_prob.map(|edge_prob| Family::Random { edge_prob, weights })
        }
        "edge-list" => {
            if g.path.is_none() {
                d.push("graph.path", "required for the edge-list family");
            }
            Some(Family::EdgeList)
        }
        other => {
            d.push("graph.family", format!("unknown family `{other}`"));
            None
        }
    };

    let killing = config.killing.as_ref().and_then(|k| match k.rule.as_str() {
        "fixed" => d.positive("killing.c", k.c).map(Killing::Fixed),
        "exp-rate" => d.positive("killing.a", k.a).map(Killing::ExpRate),
        "power" => d.positive("killing.d", k.d).map(Killing::Power),
        "beta" => d.positive("killing.beta", k.beta).map(Killing::Beta),
        other => {
            d.push("killing.rule", format!("unknown rule `{other}`; expected fixed, exp-rate, power or beta"));
            None
        }
    });

    match config.output.format.as_str() {
        "csv" | "json" => {}
        other => d.push("output.format", format!("unknown format `{other}`; expected csv or json")),
    }

    if let Some(kind) = kind {
        check_kind(config, kind, family, killing, &mut d);
    }

    match (kind, family) {
        (Some(kind), Some(family)) if d.0.is_empty() => Ok(Checked { kind, family, killing }),
        _ => Err(d.0),
    }
}

fn check_kind(
    config: &ExperimentConfig,
    kind: Kind,
    family: Option<Family>,
    killing: Option<Killing>,
    d: &mut Diags,
) {
    let p = &config.params;
    let edge_list = family == Some(Family::EdgeList);
    if kind.needs_sizes() && config.sizes.is_empty() && !edge_list {
        d.push("sizes", "must be non-empty");
    }
    if let Some(family) = family {
        for (i, &n) in config.sizes.iter().enumerate() {
            if let Some(msg) = size_problem(family, n) {
                d.push(&format!("sizes[{i}]"), msg);
            }
        }
    }
    if kind.needs_killing() && config.killing.is_none() {
        d.push("killing", format!("required for {}", kind.name()));
    }
    if let Some(oracle) = &p.oracle {
        if !matches!(oracle.as_str(), "dp" | "mc" | "auto") {
            d.push("params.oracle", format!("unknown oracle `{oracle}`; expected dp, mc or auto"));
        }
    }
    let unit_interval = |d: &mut Diags, path: &str, values: &[f64]| {
        for (i, &x) in values.iter().enumerate() {
            if !(x > 0.0 && x < 1.0) {
                d.push(&format!("{path}[{i}]"), format!("must lie in (0, 1), got {x}"));
            }
        }
    };
    match kind {
        Kind::ConditionalCurve => match &p.lengths {
            None => d.push("params.lengths", "required for conditional-curve"),
            Some(ls) if ls.is_empty() => d.push("params.lengths", "must be non-empty"),
            Some(ls) => {
                for (i, &k) in ls.iter().enumerate() {
                    if k < 2 {
                        d.push(&format!("params.lengths[{i}]"), "loop lengths must be >= 2");
                    }
                }
            }
        },
        Kind::Soup => {
            d.positive("params.alpha", Some(p.alpha.unwrap_or(1.0)));
        }
        Kind::LoopLength => {
            if p.max_len.is_some_and(|k| k < 2) {
                d.push("params.max_len", "must be >= 2");
            }
        }
        Kind::PhaseSweep => {
            if !matches!(killing, Some(Killing::ExpRate(_))) && p.rates.is_none() {
                d.push("killing.rule", "phase-sweep needs exp-rate or params.rates");
            }
            if let Some(rates) = &p.rates {
                if rates.is_empty() {
                    d.push("params.rates", "must be non-empty");
                }
                for (i, &a) in rates.iter().enumerate() {
                    if !(a > 0.0 && a.is_finite()) {
                        d.push(&format!("params.rates[{i}]"), format!("must be positive and finite, got {a}"));
                    }
                }
            }
            if let Some(j) = p.j {
                d.positive("params.j", Some(j));
            } else if matches!(family, Some(Family::CycleWithChords | Family::Random { .. } | Family::EdgeList)) {
                d.push("params.j", "required: this family has no built-in covering functional");
            }
        }
        Kind::TreeLimit => {
            if family.is_some_and(|f| !matches!(f, Family::TreeBall { .. })) {
                d.push("graph.family", "tree-limit needs the tree-ball family");
            }
            if p.m_max.is_some_and(|m| m == 0) {
                d.push("params.m_max", "must be >= 1");
            }
        }
        Kind::TorusLimit => {
            if family.is_some_and(|f| !matches!(f, Family::Torus { .. } | Family::Cycle)) {
                d.push("graph.family", "torus-limit needs the torus or cycle family");
            }
            match p.method.as_deref() {
                None | Some("quadrature") | Some("qmc") => {}
                Some("series") => {
                    if let Some(Family::Torus { dim }) = family {
                        if dim > 2 {
                            d.push("params.method", "the series route covers dimensions 1 and 2");
                        }
                    }
                }
                Some(other) => d.push(
                    "params.method",
                    format!("unknown method `{other}`; expected quadrature, series or qmc"),
                ),
            }
        }
        Kind::CompleteSweep => {
            if family.is_some_and(|f| f != Family::Complete) {
                d.push("graph.family", "complete-sweep needs the complete family");
            }
            match &p.exponents {
                None => d.push("params.exponents", "required for complete-sweep"),
                Some(es) if es.is_empty() => d.push("params.exponents", "must be non-empty"),
                Some(es) => {
                    for (i, &e) in es.iter().enumerate() {
                        if !(e > 0.0 && e.is_finite()) {
                            d.push(&format!("params.exponents[{i}]"), format!("must be positive, got {e}"));
                        }
                    }
                }
            }
        }
        Kind::Stability => {
            if family.is_some_and(|f| f != Family::CycleWithChords) {
                d.push("graph.family", "stability needs the cycle-with-chords family");
            }
            if let Some(rhos) = &p.rhos {
                unit_interval(d, "params.rhos", rhos);
            }
            if let Some(r) = p.removed {
                if let Some(&n) = config.sizes.iter().find(|&&n| r > n) {
                    d.push("params.removed", format!("cannot remove {r} of the {n} chords"));
                }
            }
        }
        Kind::Spectrum | Kind::CoverProb => {}
    }
}

fn size_problem(family: Family, n: usize) -> Option<String> {
    let min = match family {
        Family::Cycle | Family::Complete => 3,
        Family::Path | Family::CycleWithChords | Family::Random { .. } => 2,
        Family::Torus { .. } => 3,
        Family::TreeBall { .. } => 1,
        Family::EdgeList => 0,
    };
    (n < min).then(|| format!("must be >= {min}, got {n}"))
}

fn build(config: &ExperimentConfig, family: Family, index: usize, n: usize) -> Result<WeightedGraph> {
    match family {
        Family::Cycle => build_cycle(n),
        Family::Path => build_path(n),
        Family::Complete => build_complete(n),
        Family::Torus { dim } => build_torus(dim, n),
        Family::TreeBall { degree } => build_tree_ball(degree, n),
        Family::CycleWithChords => build_cycle_with_chords(n),
        Family::Random { edge_prob, weights } => {
            // graph streams count down from the top so they never meet replicate streams
            let mut rng = replicate_rng(config.seed, u64::MAX - index as u64);
            random_connected(n, edge_prob, weights, &mut rng)
        }
        Family::EdgeList => {
            let path = config.graph.path.as_ref().expect("validated");
            let file = std::fs::File::open(path)?;
            WeightedGraph::read_edge_list(std::io::BufReader::new(file))
        }
    }
}

/// One CSV cell or JSON value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
    Flag(bool),
    Empty,
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // `Display` for f64 is the shortest string that parses back to the same value
            Cell::Real(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Flag(b) => write!(f, "{b}"),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Flag(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// The result of [`run`]: a table in grid order plus per-run metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub kind: Kind,
    pub config: ExperimentConfig,
    pub version: &'static str,
    pub wall_time_secs: f64,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Scalar results that do not fit the table.
    pub summary: serde_json::Map<String, serde_json::Value>,
    /// Truncation levels, tail bounds and other approximations used.
    pub diagnostics: Vec<String>,
    #[serde(skip)]
    footer: Option<String>,
}

impl RunRecord {
    fn new(kind: Kind, config: &ExperimentConfig, columns: Vec<&'static str>) -> Self {
        Self {
            kind,
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION"),
            wall_time_secs: 0.0,
            columns,
            rows: Vec::new(),
            summary: serde_json::Map::new(),
            diagnostics: Vec::new(),
            footer: None,
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn note(&mut self, key: &str, value: impl Serialize) {
        self.summary.insert(key.into(), serde_json::to_value(value).unwrap_or_default());
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::to_string).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        if let Some(f) = &self.footer {
            let _ = writeln!(s, "{f}");
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => Ok(self.to_csv()),
            Format::Json => self.to_json().map(|mut s| {
                s.push('\n');
                s
            }),
        }
    }
}

/// The output format named by the config.
pub fn output_format(config: &ExperimentConfig) -> Result<Format> {
    match config.output.format.as_str() {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        other => Err(Error::Config {
            path: "output.format".into(),
            message: format!("unknown format `{other}`"),
        }),
    }
}

/// Validates and runs `config`. Rows come out in grid order: sizes outer,
/// then the kind's own parameter.
pub fn run(config: &ExperimentConfig) -> Result<RunRecord> {
    let checked = check(config).map_err(|diags| {
        let first = &diags[0];
        let message = diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
        Error::Config {
            path: first.path.clone(),
            message,
        }
    })?;
    let start = Instant::now();
    let mut record = match checked.kind {
        Kind::Spectrum => run_spectrum(config, &checked)?,
        Kind::LoopLength => run_loop_length(config, &checked)?,
        Kind::CoverProb => run_cover_prob(config, &checked)?,
        Kind::ConditionalCurve => run_conditional(config, &checked)?,
        Kind::Soup => run_soup(config, &checked)?,
        Kind::PhaseSweep => run_phase_sweep(config, &checked)?,
        Kind::TreeLimit => run_tree_limit(config, &checked)?,
        Kind::TorusLimit => run_torus_limit(config, &checked)?,
        Kind::CompleteSweep => run_complete_sweep(config)?,
        Kind::Stability => run_stability(config)?,
    };
    record.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(record)
}

/// The sizes to run; an edge-list graph with no sizes runs once.
fn sizes(config: &ExperimentConfig, checked: &Checked) -> Vec<usize> {
    if config.sizes.is_empty() && checked.family == Family::EdgeList {
        vec![0]
    } else {
        config.sizes.clone()
    }
}

fn graphs(config: &ExperimentConfig, checked: &Checked) -> Result<Vec<(usize, WeightedGraph)>> {
    sizes(config, checked)
        .into_iter()
        .enumerate()
        .map(|(i, n)| Ok((n, build(config, checked.family, i, n)?)))
        .collect()
}

fn run_spectrum(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let mut rec = RunRecord::new(checked.kind, config, vec!["n", "index", "eigenvalue"]);
    for (n, g) in graphs(config, checked)? {
        let spectrum = graph_spectrum(&g)?;
        for (i, &l) in spectrum.eigenvalues().iter().enumerate() {
            rec.push(vec![n.into(), i.into(), l.into()]);
        }
    }
    Ok(rec)
}

fn run_loop_length(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let killing = checked.killing.expect("validated");
    let mut rec = RunRecord::new(checked.kind, config, vec!["n", "k", "mass"]);
    for (n, g) in graphs(config, checked)? {
        let c = killing.rate(g.vertex_count())?;
        let q = transition_matrix(&g)?;
        let dist = match config.params.max_len {
            Some(k) => loop_length_distribution(&q, c, k)?,
            None => auto_length_distribution(&q, c)?,
        };
        for k in 2..=dist.max_len() {
            rec.push(vec![n.into(), k.into(), dist.mass(k).into()]);
        }
        rec.diagnostics.push(format!(
            "n={n}: c={:e}, K={}, tail mass in [{:e}, {:e}], tail/mass={:e}",
            c.value(),
            dist.max_len(),
            dist.tail_lower,
            dist.tail_upper,
            dist.tail_ratio()
        ));
    }
    Ok(rec)
}

/// Covering probability by the exact DP or by Monte Carlo.
fn cover_estimate(
    config: &ExperimentConfig,
    g: &WeightedGraph,
    c: KillingRate,
    seed: u64,
) -> Result<(&'static str, CoverEstimate, String)> {
    let m = g.vertex_count();
    let use_dp = match config.params.oracle.as_deref().unwrap_or("auto") {
        "dp" => true,
        "mc" => false,
        _ => m <= MAX_DP_VERTICES,
    };
    if use_dp {
        let exact = exact_cover_probability(g, c)?;
        let estimate = CoverEstimate {
            point: exact.probability,
            half_width: 0.0,
            replicates: 0,
            seed,
            truncation: None,
            tail_bound: None,
        };
        let note = format!("exact, uncovered-mass recursion ran {} steps", exact.steps);
        Ok(("dp", estimate, note))
    } else {
        let e = mc_cover_prob(g, c, config.budget, seed)?;
        let note = format!(
            "monte carlo, {} loops, K={}, tail bound {:e}",
            config.budget,
            e.truncation.unwrap_or(0),
            e.tail_bound.unwrap_or(0.0)
        );
        Ok(("mc", e, note))
    }
}

fn run_cover_prob(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let killing = checked.killing.expect("validated");
    let columns = vec!["n", "c", "oracle", "estimate", "ci_low", "ci_high", "truncation_k", "tail_bound"];
    let mut rec = RunRecord::new(checked.kind, config, columns);
    for (i, (n, g)) in graphs(config, checked)?.into_iter().enumerate() {
        let c = killing.rate(g.vertex_count())?;
        let (oracle, e, note) = cover_estimate(config, &g, c, config.seed.wrapping_add(i as u64))?;
        let (lo, hi) = e.interval();
        rec.push(vec![
            n.into(),
            c.value().into(),
            oracle.into(),
            e.point.into(),
            lo.into(),
            hi.into(),
            e.truncation.into(),
            e.tail_bound.into(),
        ]);
        rec.diagnostics.push(format!("n={n}: {note}"));
    }
    Ok(rec)
}

fn run_conditional(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let lengths = config.params.lengths.as_deref().expect("validated");
    let columns = vec!["n", "k", "estimate", "ci_low", "ci_high", "markov_lower_bound"];
    let mut rec = RunRecord::new(checked.kind, config, columns);
    for (i, (n, g)) in graphs(config, checked)?.into_iter().enumerate() {
        let curve = conditional_cover_curve(&g, lengths, config.budget, config.seed.wrapping_add(i as u64))?;
        for p in curve {
            let (lo, hi) = p.estimate.interval();
            rec.push(vec![
                n.into(),
                p.k.into(),
                p.estimate.point.into(),
                lo.into(),
                hi.into(),
                p.markov_lower_bound.into(),
            ]);
        }
    }
    Ok(rec)
}

fn run_soup(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let killing = checked.killing.expect("validated");
    let alpha = config.params.alpha.unwrap_or(1.0);
    let columns = vec!["n", "alpha", "soups", "mean_count", "variance", "predicted_mean"];
    let mut rec = RunRecord::new(checked.kind, config, columns);
    for (i, (n, g)) in graphs(config, checked)?.into_iter().enumerate() {
        let c = killing.rate(g.vertex_count())?;
        let counts = soup_cover_counts(&g, c, alpha, config.budget, config.seed.wrapping_add(i as u64))?;
        let len = counts.len() as f64;
        let mean = counts.iter().sum::<usize>() as f64 / len;
        let variance = if counts.len() > 1 {
            counts.iter().map(|&k| (k as f64 - mean).powi(2)).sum::<f64>() / (len - 1.0)
        } else {
            0.0
        };
        let predicted = if g.vertex_count() <= MAX_DP_VERTICES {
            Some(alpha * exact_cover_probability(&g, c)?.covered_mass)
        } else {
            None
        };
        rec.push(vec![
            n.into(),
            alpha.into(),
            config.budget.into(),
            mean.into(),
            variance.into(),
            predicted.into(),
        ]);
        let q = transition_matrix(&g)?;
        let dist = auto_length_distribution(&q, c)?;
        rec.diagnostics.push(format!(
            "n={n}: loop lengths 2..={}, mass beyond K at most {:e}",
            dist.max_len(),
            dist.tail_upper
        ));
    }
    Ok(rec)
}

/// The limit covering functional of a family, if one is known.
fn family_j(config: &ExperimentConfig, family: Family) -> Result<Option<f64>> {
    if let Some(j) = config.params.j {
        return Ok(Some(j));
    }
    Ok(match family {
        Family::Cycle | Family::Path => Some(std::f64::consts::LN_2),
        Family::Torus { dim } => Some(torus_limit_j(dim, TorusJMethod::Quadrature)?.value),
        Family::TreeBall { degree } => Some(leaf_chain_j(degree)?),
        // the empirical spectral distribution of K_n collapses to a point mass at 0
        Family::Complete => Some(0.0),
        _ => None,
    })
}

fn run_phase_sweep(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let rates = match (&config.params.rates, checked.killing) {
        (Some(r), _) => r.clone(),
        (None, Some(Killing::ExpRate(a))) => vec![a],
        _ => unreachable!("validated"),
    };
    let j = family_j(config, checked.family)?.expect("validated");
    let columns = vec!["n", "a", "c", "oracle", "estimate", "ci_low", "ci_high", "j", "predicted", "gap"];
    let mut rec = RunRecord::new(checked.kind, config, columns);
    let mut cell = 0u64;
    for (n, g) in graphs(config, checked)? {
        for &a in &rates {
            let c = KillingRate::from_exp_rate(a, g.vertex_count())?;
            let (oracle, e, note) = cover_estimate(config, &g, c, config.seed.wrapping_add(cell))?;
            cell += 1;
            let predicted = if j == 0.0 {
                1.0
            } else {
                predicted_cover_limit(PhaseParameters::new(a, j)?)
            };
            let (lo, hi) = e.interval();
            rec.push(vec![
                n.into(),
                a.into(),
                c.value().into(),
                oracle.into(),
                e.point.into(),
                lo.into(),
                hi.into(),
                j.into(),
                predicted.into(),
                (e.point - predicted).into(),
            ]);
            rec.diagnostics.push(format!("n={n}, a={a}: {note}"));
        }
    }
    Ok(rec)
}

fn run_tree_limit(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let Family::TreeBall { degree } = checked.family else {
        unreachable!("validated")
    };
    let m_max = config.params.m_max.unwrap_or(60);
    let limit = tree_ball_limit_spectrum(degree, m_max)?;
    let columns = vec!["M", "i", "theta", "lambda", "mass"];
    let mut rec = RunRecord::new(checked.kind, config, columns);
    for atom in &limit.atoms {
        rec.push(vec![
            atom.m.into(),
            atom.i.into(),
            atom.theta.into(),
            atom.lambda.into(),
            atom.mass.into(),
        ]);
    }
    rec.footer = Some(format!("tail,,,,{}", limit.tail_mass));
    let (lo, hi) = limit.j_bracket();
    rec.note("j_closed_form", tree_ball_j(degree)?);
    rec.note("j_atomic", limit.atomic_j());
    rec.note("j_bracket", [lo, hi]);
    rec.note("tail_mass", limit.tail_mass);
    rec.note("j_leaf_chain", leaf_chain_j(degree)?);
    let mut finite = Vec::new();
    for (n, g) in graphs(config, checked)? {
        let j = empirical_j(&graph_spectrum(&g)?);
        finite.push(serde_json::json!({ "radius": n, "vertices": g.vertex_count(), "empirical_j": j }));
    }
    if !finite.is_empty() {
        rec.note("finite_balls", finite);
    }
    rec.diagnostics.push(format!("atoms for M <= {m_max}, remaining mass {:e}", limit.tail_mass));
    Ok(rec)
}

fn run_torus_limit(config: &ExperimentConfig, checked: &Checked) -> Result<RunRecord> {
    let dim = match checked.family {
        Family::Torus { dim } => dim,
        _ => 1,
    };
    let (method, limit): (&str, Estimate) = match config.params.method.as_deref().unwrap_or("quadrature") {
        "series" => ("series", torus_limit_j(dim, TorusJMethod::Series)?),
        "qmc" => ("qmc", torus_limit_j_qmc(dim, config.budget.max(1024) as usize, 16, config.seed)?),
        _ => ("quadrature", torus_limit_j(dim, TorusJMethod::Quadrature)?),
    };
    let columns = vec!["side", "vertices", "empirical_j", "limit_j", "gap"];
    let mut rec = RunRecord::new(checked.kind, config, columns);
    rec.note("dim", dim);
    rec.note("method", method);
    rec.note("j", limit.value);
    rec.note("error", limit.error);
    for &side in &config.sizes {
        let g = if dim == 1 { build_cycle(side)? } else { build_torus(dim, side)? };
        let j = empirical_j(&graph_spectrum(&g)?);
        rec.push(vec![
            side.into(),
            g.vertex_count().into(),
            j.into(),
            limit.value.into(),
            (j - limit.value).into(),
        ]);
    }
    rec.diagnostics.push(format!("{method} error estimate {:e}", limit.error));
    Ok(rec)
}

fn run_complete_sweep(config: &ExperimentConfig) -> Result<RunRecord> {
    let exponents = config.params.exponents.as_deref().expect("validated");
    let rows: Vec<RegimeRow> = regime_sweep(&config.sizes, exponents, config.budget, config.seed)?;
    let columns = vec!["n", "c_rule", "estimate", "ci", "predicted"];
    let mut rec = RunRecord::new(Kind::CompleteSweep, config, columns);
    for r in rows {
        rec.push(vec![
            r.n.into(),
            r.c_rule.as_str().into(),
            r.estimate.into(),
            r.ci.into(),
            r.predicted.into(),
        ]);
    }
    rec.diagnostics.push(format!("{} cover-time and eta draws per cell", config.budget));
    Ok(rec)
}

fn run_stability(config: &ExperimentConfig) -> Result<RunRecord> {
    let rhos = config.params.rhos.clone().unwrap_or_else(|| vec![0.3, 0.6, 0.9]);
    let columns = vec![
        "n", "vertices", "removed", "rho", "original", "perturbed", "delta", "bound", "holds", "kolmogorov",
    ];
    let mut rec = RunRecord::new(Kind::Stability, config, columns);
    for &n in &config.sizes {
        let g = build_cycle_with_chords(n)?;
        let m = g.vertex_count();
        let a = config.params.removed.unwrap_or_else(|| ((m as f64).sqrt().ceil() as usize).min(n));
        let report = perturbation_report(&g, &chord_edges(n)[..a], &rhos)?;
        for row in report.rows {
            rec.push(vec![
                n.into(),
                m.into(),
                a.into(),
                row.rho.into(),
                row.original.into(),
                row.perturbed.into(),
                row.delta.into(),
                row.bound.into(),
                row.holds.into(),
                report.kolmogorov.into(),
            ]);
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> ExperimentConfig {
        ExperimentConfig::from_toml_str(text).unwrap()
    }

    fn paths(c: &ExperimentConfig) -> Vec<String> {
        validate(c).into_iter().map(|d| d.path).collect()
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml_str("kind = \"spectrum\"\nsizse = [3]\n").unwrap_err();
        assert!(err.to_string().contains("sizse"), "{err}");
        let err = ExperimentConfig::from_toml_str("[graph]\nfamly = \"cycle\"\n").unwrap_err();
        assert!(err.to_string().contains("famly"), "{err}");
    }

    #[test]
    fn validation_examples() {
        let c = parse("kind = \"spectrum\"\nsizes = [4]\nbudget = 0\n");
        assert_eq!(paths(&c), ["budget"]);

        let c = parse("kind = \"spectrum\"\nsizes = [4]\n[graph]\nfamily = \"moebius\"\n");
        assert_eq!(paths(&c), ["graph.family"]);

        let mut c = parse("kind = \"cover-prob\"\nsizes = [4]\n[killing]\nrule = \"exp-rate\"\na = 1.0\n");
        assert!(validate(&c).is_empty());
        c.killing.as_mut().unwrap().a = Some(f64::INFINITY);
        assert_eq!(paths(&c), ["killing.a"]);
        c.killing.as_mut().unwrap().a = Some(f64::NAN);
        assert_eq!(paths(&c), ["killing.a"]);

        let c = parse("kind = \"cover-prob\"\n");
        assert_eq!(paths(&c), ["sizes", "killing"]);

        let c = parse("kind = \"torus-limit\"\n[graph]\nfamily = \"torus\"\n");
        assert_eq!(paths(&c), ["graph.dim"]);

        let c = parse("sizes = [2]\n");
        assert_eq!(paths(&c), ["kind"]);

        let c = parse("kind = \"spectrum\"\nsizes = [3, 2]\n");
        assert_eq!(paths(&c), ["sizes[1]"]);
    }

    #[test]
    fn run_reports_config_errors() {
        let c = parse("kind = \"spectrum\"\nsizes = []\n");
        assert!(matches!(run(&c), Err(Error::Config { path, .. }) if path == "sizes"));
    }

    #[test]
    fn dp_over_cap_is_infeasible() {
        let c = parse(
            "kind = \"cover-prob\"\nsizes = [15]\n[killing]\nrule = \"fixed\"\nc = 0.5\n[params]\noracle = \"dp\"\n",
        );
        assert!(matches!(run(&c), Err(Error::Infeasible(_))));
    }

    #[test]
    fn spectrum_rows() {
        let rec = run(&parse("kind = \"spectrum\"\nsizes = [4]\n")).unwrap();
        let csv = rec.to_csv();
        assert!(csv.starts_with("n,index,eigenvalue\n4,0,-1\n"), "{csv}");
        assert_eq!(rec.rows.len(), 4);
    }

    #[test]
    fn phase_sweep_gaps_shrink() {
        let c = parse(
            "kind = \"phase-sweep\"\nsizes = [8, 10, 12]\n\
             [killing]\nrule = \"exp-rate\"\na = 0.6931471805599453\n[params]\noracle = \"dp\"\n",
        );
        let rec = run(&c).unwrap();
        let gaps: Vec<f64> = rec
            .rows
            .iter()
            .map(|r| match r[9] {
                Cell::Real(g) => g.abs(),
                _ => panic!(),
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn tree_limit_record() {
        let c = parse("kind = \"tree-limit\"\n[graph]\nfamily = \"tree-ball\"\ndegree = 3\n");
        let rec = run(&c).unwrap();
        let j = rec.summary["j_atomic"].as_f64().unwrap();
        assert!((j - 0.5 * 1.5f64.ln()).abs() < 1e-6);
        assert!(rec.to_csv().lines().last().unwrap().starts_with("tail,,,,"));
    }

    #[test]
    fn runs_are_reproducible() {
        let c = parse(
            "kind = \"cover-prob\"\nsizes = [5, 6]\nbudget = 300\nseed = 11\n\
             [killing]\nrule = \"fixed\"\nc = 0.05\n[params]\noracle = \"mc\"\n",
        );
        let a = run(&c).unwrap();
        let b = run(&c).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn json_record_has_metadata() {
        let rec = run(&parse("kind = \"spectrum\"\nsizes = [3]\n[graph]\nfamily = \"complete\"\n")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rec.render(Format::Json).unwrap()).unwrap();
        assert_eq!(v["kind"], "spectrum");
        assert_eq!(v["config"]["graph"]["family"], "complete");
        assert_eq!(v["rows"][2][2], 1.0);
        assert!(v["version"].is_string());
    }
}
