//! Request sequences, the flat adjustment-cost rule, stage-decomposed
//! total-cost accounting, empirical entropy and the closed-form bound
//! calculators.
//!
//! Routing costs are integer edge counts; the reconfiguration charge and
//! all bounds are reals. A schedule with `k + 1` stages pays `k * C(n)`
//! in adjustments (the first tree is free for offline algorithms).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tree::{Key, Tree, TreeError};

#[derive(Debug, Clone, PartialEq)]
pub enum CostError {
    Tree(TreeError),
    /// Request shape does not match the sequence model.
    ModelMismatch { expected: Model, got: Model },
    /// Stage block lengths do not sum to the sequence length.
    BlockLengthMismatch { blocks: usize, m: usize },
    EmptyFrequencyTable,
    /// Closed-form bound evaluated outside its domain.
    BoundDomain { what: &'static str },
    BadCostSpec { spec: String },
}

impl fmt::Display for CostError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tree(e) => e.fmt(f),
            Self::ModelMismatch { expected, got } => {
                write!(f, "request model mismatch: sequence is {expected:?}, request is {got:?}")
            }
            Self::BlockLengthMismatch { blocks, m } => {
                write!(f, "stage lengths sum to {blocks}, sequence has {m} requests")
            }
            Self::EmptyFrequencyTable => write!(f, "frequency table has zero total mass"),
            Self::BoundDomain { what } => write!(f, "bound domain violation: {what}"),
            Self::BadCostSpec { spec } => write!(f, "cannot parse reconfiguration cost spec {spec:?}"),
        }
    }
}

impl std::error::Error for CostError {}

impl From<TreeError> for CostError {
    fn from(e: TreeError) -> Self {
        CostError::Tree(e)
    }
}

/// Which cost model a sequence lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// Requests are single keys served from the root.
    SingleSource,
    /// Requests are (source, destination) pairs served along the tree path.
    AllToAll,
}

/// One request. `src == dst` is allowed in the all-to-all model (cost 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Request {
    Node(Key),
    Pair { src: Key, dst: Key },
}

impl Request {
    pub fn model(&self) -> Model {
        match self {
            Request::Node(_) => Model::SingleSource,
            Request::Pair { .. } => Model::AllToAll,
        }
    }

    /// The keys this request touches (one or two).
    pub fn endpoints(&self) -> impl Iterator<Item = Key> {
        let (a, b) = match *self {
            Request::Node(u) => (u, None),
            Request::Pair { src, dst } => (src, Some(dst)),
        };
        std::iter::once(a).chain(b)
    }
}

/// A finite, model-homogeneous request sequence over keys `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestSequence {
    pub model: Model,
    pub n: u32,
    pub items: Vec<Request>,
}

impl RequestSequence {
    pub fn new(model: Model, n: u32, items: Vec<Request>) -> Result<Self, CostError> {
        for r in &items {
            if r.model() != model {
                return Err(CostError::ModelMismatch { expected: model, got: r.model() });
            }
            for k in r.endpoints() {
                if k == 0 || k > n {
                    return Err(TreeError::KeyOutOfRange { key: k, n }.into());
                }
            }
        }
        Ok(RequestSequence { model, n, items })
    }

    pub fn single_source(n: u32, keys: impl IntoIterator<Item = Key>) -> Result<Self, CostError> {
        Self::new(Model::SingleSource, n, keys.into_iter().map(Request::Node).collect())
    }

    pub fn all_to_all(n: u32, pairs: impl IntoIterator<Item = (Key, Key)>) -> Result<Self, CostError> {
        Self::new(Model::AllToAll, n, pairs.into_iter().map(|(src, dst)| Request::Pair { src, dst }).collect())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Reconfiguration-cost specification: a literal value or a named profile
/// of `n`. Profile evaluation rounds to the nearest integer, floored at 1.
#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    Literal(f64),
    Const(f64),
    Log2N,
    SqrtN,
    N,
}

impl CostSpec {
    pub fn evaluate(&self, n: u32) -> f64 {
        match self {
            CostSpec::Literal(c) => *c,
            CostSpec::Const(k) => k.round().max(1.0),
            CostSpec::Log2N => (n as f64).log2().round().max(1.0),
            CostSpec::SqrtN => (n as f64).sqrt().round().max(1.0),
            CostSpec::N => n as f64,
        }
    }
}

impl FromStr for CostSpec {
    type Err = CostError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "log2n" => return Ok(CostSpec::Log2N),
            "sqrtn" => return Ok(CostSpec::SqrtN),
            "n" => return Ok(CostSpec::N),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("const:") {
            let v: f64 = k.parse().map_err(|_| CostError::BadCostSpec { spec: s.to_string() })?;
            return Ok(CostSpec::Const(v));
        }
        s.parse::<f64>()
            .map(CostSpec::Literal)
            .map_err(|_| CostError::BadCostSpec { spec: s.to_string() })
    }
}

impl fmt::Display for CostSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostSpec::Literal(c) => write!(f, "{c}"),
            CostSpec::Const(k) => write!(f, "const:{k}"),
            CostSpec::Log2N => write!(f, "log2n"),
            CostSpec::SqrtN => write!(f, "sqrtn"),
            CostSpec::N => write!(f, "n"),
        }
    }
}

/// Instance parameters: key count and reconfiguration charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub n: u32,
    pub c: f64,
}

impl CostParams {
    /// The analysis assumes `C(n) <= n`; larger values are allowed but
    /// flagged so experiment drivers can warn.
    pub fn new(n: u32, c: f64) -> Self {
        CostParams { n, c }
    }

    pub fn from_spec(n: u32, spec: &CostSpec) -> Self {
        CostParams { n, c: spec.evaluate(n) }
    }

    pub fn exceeds_model_assumption(&self) -> bool {
        self.c > self.n as f64
    }
}

/// A stage decomposition: each stage serves a contiguous block of the
/// sequence in one fixed tree.
#[derive(Debug, Clone)]
pub struct Schedule {
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone)]
pub struct Stage {
    pub tree: Tree,
    pub len: usize,
}

impl Schedule {
    /// Number of reconfigurations: stages minus one.
    pub fn reconfigurations(&self) -> usize {
        self.stages.len().saturating_sub(1)
    }

    pub fn total_len(&self) -> usize {
        self.stages.iter().map(|s| s.len).sum()
    }
}

/// Cost breakdown for a schedule run over a sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub routing: u64,
    pub adjustments: f64,
    pub total: f64,
    pub stages: Vec<StageReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    /// Block length.
    pub x: usize,
    /// Routing cost of the block in the stage tree.
    pub c: u64,
    /// Empirical entropy of the block (endpoint multiset in all-to-all).
    #[serde(rename = "H")]
    pub h: f64,
}

/// Serve one request in a tree: depth of the key, or path length between
/// the endpoints.
pub fn serve_cost(tree: &Tree, r: &Request) -> Result<u64, CostError> {
    match *r {
        Request::Node(u) => Ok(tree.depth(u)? as u64),
        Request::Pair { src, dst } => Ok(tree.distance(src, dst)? as u64),
    }
}

/// Shannon entropy (bits) of the distribution induced by a count table.
/// Zero counts are skipped; errs when the table is empty or all-zero.
pub fn empirical_entropy(counts: &[u64]) -> Result<f64, CostError> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(CostError::EmptyFrequencyTable);
    }
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    Ok(h)
}

/// Entropy of the endpoint multiset of a request slice: single-source
/// requests contribute one key, pairs contribute both endpoints.
pub fn block_entropy(n: u32, block: &[Request]) -> Result<f64, CostError> {
    let mut counts = vec![0u64; n as usize + 1];
    for r in block {
        for k in r.endpoints() {
            counts[k as usize] += 1;
        }
    }
    empirical_entropy(&counts[1..])
}

/// Serve a sequence under a stage decomposition and account routing,
/// adjustments (`k * C(n)`) and per-stage entropies.
pub fn schedule_cost(
    seq: &RequestSequence,
    schedule: &Schedule,
    params: &CostParams,
) -> Result<CostReport, CostError> {
    let total_len = schedule.total_len();
    if total_len != seq.len() {
        return Err(CostError::BlockLengthMismatch { blocks: total_len, m: seq.len() });
    }
    let mut routing = 0u64;
    let mut stages = Vec::with_capacity(schedule.stages.len());
    let mut pos = 0usize;
    for stage in &schedule.stages {
        let block = &seq.items[pos..pos + stage.len];
        pos += stage.len;
        let mut c = 0u64;
        for r in block {
            c += serve_cost(&stage.tree, r)?;
        }
        let h = if block.is_empty() { 0.0 } else { block_entropy(seq.n, block)? };
        routing += c;
        stages.push(StageReport { x: stage.len, c, h });
    }
    let adjustments = schedule.reconfigurations() as f64 * params.c;
    Ok(CostReport { routing, adjustments, total: routing as f64 + adjustments, stages })
}

/// Closed-form bounds from the analysis. `m` is the request count, `c`
/// the reconfiguration charge, `n` the key count, `t`/`h` a total mass
/// and an entropy.
pub mod bounds {
    /// `1 / (1 - log2(sqrt(5) - 1))`, the balancing constant (~1.4404).
    pub fn balancing_factor() -> f64 {
        1.0 / (1.0 - (5f64.sqrt() - 1.0).log2())
    }

    /// Offline single-source upper bound `2m log2(c + 2.2)`.
    pub fn offline_upper_ss(m: u64, c: f64) -> f64 {
        2.0 * m as f64 * (c + 2.2).log2()
    }

    /// Offline single-source lower bound `m log2 c`.
    pub fn offline_lower_ss(m: u64, c: f64) -> f64 {
        m as f64 * c.log2()
    }

    /// Offline all-to-all upper bound `4m (log2 c + 3.9)`.
    pub fn offline_upper_a2a(m: u64, c: f64) -> f64 {
        4.0 * m as f64 * (c.log2() + 3.9)
    }

    /// Offline all-to-all lower bound `m log2(c) / 4`.
    pub fn offline_lower_a2a(m: u64, c: f64) -> f64 {
        m as f64 * c.log2() / 4.0
    }

    /// Competitive-ratio lower bound `log2(n) / (2 log2(c + 2.2))`.
    pub fn cr_lower_ss(n: u32, c: f64) -> f64 {
        (n as f64).log2() / (2.0 * (c + 2.2).log2())
    }

    /// Competitive-ratio lower bound `log2(n) / 4`.
    pub fn cr_lower_a2a(n: u32) -> f64 {
        (n as f64).log2() / 4.0
    }

    /// Static-tree upper bound `T (2 + H / (1 - log2(sqrt(5) - 1)))`.
    pub fn mehlhorn_upper(t: u64, h: f64) -> f64 {
        t as f64 * (2.0 + h * balancing_factor())
    }

    /// Static-tree lower bound `T H / log2 3` (comparison-count cost).
    pub fn mehlhorn_lower(t: u64, h: f64) -> f64 {
        t as f64 * h / 3f64.log2()
    }

    /// Named dispatcher with domain validation; the log-based kinds need
    /// `c >= 1`.
    pub fn bound(kind: &str, m: u64, n: u32, c: f64) -> Result<f64, super::CostError> {
        let needs_log_c = matches!(
            kind,
            "offline_lower_ss" | "offline_upper_a2a" | "offline_lower_a2a"
        );
        if needs_log_c && c < 1.0 {
            return Err(super::CostError::BoundDomain { what: "c < 1 for a log2(c) bound" });
        }
        if c < 0.0 {
            return Err(super::CostError::BoundDomain { what: "negative reconfiguration cost" });
        }
        match kind {
            "offline_upper_ss" => Ok(offline_upper_ss(m, c)),
            "offline_lower_ss" => Ok(offline_lower_ss(m, c)),
            "offline_upper_a2a" => Ok(offline_upper_a2a(m, c)),
            "offline_lower_a2a" => Ok(offline_lower_a2a(m, c)),
            "cr_lower_ss" => Ok(cr_lower_ss(n, c)),
            "cr_lower_a2a" => Ok(cr_lower_a2a(n)),
            _ => Err(super::CostError::BoundDomain { what: "unknown bound kind" }),
        }
    }
}
