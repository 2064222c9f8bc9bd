//! Trace files: a one-line JSON header followed by one request per line
//! (`u` for single-source, `s d` for pairs), plus the seeded generators
//! that produce benchmark sequences.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, Uniform};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::adversary::{fixed_source_round_robin, round_robin};
use crate::cost::{CostError, CostParams, CostSpec, Model, Request, RequestSequence};
use crate::tree::Key;

#[derive(Debug, Clone, PartialEq)]
pub enum TraceError {
    Cost(CostError),
    Header { reason: String },
    Body { line: usize, reason: String },
    /// Generator kind incompatible with the requested model.
    KindModel { kind: String, model: Model },
    BadKind { kind: String },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cost(e) => e.fmt(f),
            Self::Header { reason } => write!(f, "bad trace header: {reason}"),
            Self::Body { line, reason } => write!(f, "bad trace line {line}: {reason}"),
            Self::KindModel { kind, model } => {
                write!(f, "trace kind {kind} cannot generate {model:?} sequences")
            }
            Self::BadKind { kind } => write!(f, "unknown trace kind {kind:?}"),
        }
    }
}

impl std::error::Error for TraceError {}

impl From<CostError> for TraceError {
    fn from(e: CostError) -> Self {
        TraceError::Cost(e)
    }
}

/// Parsed trace: header (model, n, reconfiguration-cost spec) plus the
/// request body.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub c_spec: CostSpec,
    pub seq: RequestSequence,
}

impl TraceFile {
    pub fn new(c_spec: CostSpec, seq: RequestSequence) -> Self {
        TraceFile { c_spec, seq }
    }

    pub fn params(&self) -> CostParams {
        CostParams::from_spec(self.seq.n, &self.c_spec)
    }

    /// Text form: header line then one request per line.
    pub fn to_text(&self) -> String {
        let model = match self.seq.model {
            Model::SingleSource => "single_source",
            Model::AllToAll => "all_to_all",
        };
        let c = match &self.c_spec {
            CostSpec::Literal(v) => {
                if v.fract() == 0.0 {
                    format!("{}", *v as i64)
                } else {
                    format!("{v}")
                }
            }
            other => format!("{:?}", other.to_string()),
        };
        let mut out = format!(r#"{{"model":"{model}","n":{},"c":{c}}}"#, self.seq.n);
        out.push('\n');
        for r in &self.seq.items {
            match r {
                Request::Node(u) => {
                    out.push_str(&u.to_string());
                }
                Request::Pair { src, dst } => {
                    out.push_str(&format!("{src} {dst}"));
                }
            }
            out.push('\n');
        }
        out
    }
}

impl FromStr for TraceFile {
    type Err = TraceError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text.lines();
        let header_line = lines.next().ok_or_else(|| TraceError::Header { reason: "empty file".into() })?;
        let header: Value = serde_json::from_str(header_line)
            .map_err(|e| TraceError::Header { reason: format!("not JSON: {e}") })?;
        let model = match header.get("model").and_then(Value::as_str) {
            Some("single_source") => Model::SingleSource,
            Some("all_to_all") => Model::AllToAll,
            other => {
                return Err(TraceError::Header { reason: format!("model must be single_source or all_to_all, got {other:?}") })
            }
        };
        let n = header
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| TraceError::Header { reason: "missing node count n".into() })?;
        if n == 0 || n > u32::MAX as u64 {
            return Err(TraceError::Header { reason: format!("bad node count {n}") });
        }
        let n = n as u32;
        let c_spec = match header.get("c") {
            Some(Value::Number(num)) => CostSpec::Literal(
                num.as_f64().ok_or_else(|| TraceError::Header { reason: "bad cost number".into() })?,
            ),
            Some(Value::String(s)) => s
                .parse::<CostSpec>()
                .map_err(|e| TraceError::Header { reason: e.to_string() })?,
            None => return Err(TraceError::Header { reason: "missing reconfiguration cost c".into() }),
            other => return Err(TraceError::Header { reason: format!("bad cost spec {other:?}") }),
        };

        let mut items = Vec::new();
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let first: Key = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|e| TraceError::Body { line: line_no, reason: format!("{e}") })?;
            match (model, parts.next()) {
                (Model::SingleSource, None) => items.push(Request::Node(first)),
                (Model::AllToAll, Some(second)) => {
                    let dst: Key = second
                        .parse()
                        .map_err(|e| TraceError::Body { line: line_no, reason: format!("{e}") })?;
                    items.push(Request::Pair { src: first, dst });
                }
                (Model::SingleSource, Some(_)) => {
                    return Err(TraceError::Body { line: line_no, reason: "expected a single key".into() })
                }
                (Model::AllToAll, None) => {
                    return Err(TraceError::Body { line: line_no, reason: "expected a source and a destination".into() })
                }
            }
            if parts.next().is_some() {
                return Err(TraceError::Body { line: line_no, reason: "trailing tokens".into() });
            }
        }
        let seq = RequestSequence::new(model, n, items)?;
        Ok(TraceFile { c_spec, seq })
    }
}

/// Benchmark sequence families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceKind {
    /// `(i mod n) + 1`; single-source only.
    RoundRobin,
    /// Pairs `(1, (i mod n) + 1)`; all-to-all only.
    FixedSource,
    /// Independent uniform keys (or endpoint pairs).
    UniformRandom,
    /// Independent Zipf(s) keys (or endpoint pairs).
    Zipf(f64),
}

impl FromStr for TraceKind {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "round_robin" => Ok(TraceKind::RoundRobin),
            "fixed_source" => Ok(TraceKind::FixedSource),
            "uniform_random" => Ok(TraceKind::UniformRandom),
            _ => {
                if let Some(arg) = s.strip_prefix("zipf:").or_else(|| s.strip_prefix("zipf(").and_then(|r| r.strip_suffix(')'))) {
                    let s_param: f64 =
                        arg.parse().map_err(|_| TraceError::BadKind { kind: s.to_string() })?;
                    return Ok(TraceKind::Zipf(s_param));
                }
                if s == "zipf" {
                    return Ok(TraceKind::Zipf(1.1));
                }
                Err(TraceError::BadKind { kind: s.to_string() })
            }
        }
    }
}

/// Zipf(s) sampler over `1..=n`: weight of key i proportional to i^-s.
struct ZipfSampler {
    cumulative: Vec<f64>,
}

impl ZipfSampler {
    fn new(n: u32, s: f64) -> Self {
        let mut cumulative = Vec::with_capacity(n as usize);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).powf(-s);
            cumulative.push(acc);
        }
        ZipfSampler { cumulative }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Key {
        let total = *self.cumulative.last().unwrap();
        let x = rng.gen::<f64>() * total;
        match self.cumulative.binary_search_by(|c| c.partial_cmp(&x).unwrap()) {
            Ok(idx) | Err(idx) => (idx as Key + 1).min(self.cumulative.len() as Key),
        }
    }
}

/// Generate a sequence; deterministic given the seed.
pub fn generate(
    kind: TraceKind,
    model: Model,
    n: u32,
    m: usize,
    seed: u64,
) -> Result<RequestSequence, TraceError> {
    match (kind, model) {
        (TraceKind::RoundRobin, Model::SingleSource) => Ok(round_robin(n, m)?),
        (TraceKind::RoundRobin, Model::AllToAll) => {
            Err(TraceError::KindModel { kind: "round_robin".into(), model })
        }
        (TraceKind::FixedSource, Model::AllToAll) => Ok(fixed_source_round_robin(n, m)?),
        (TraceKind::FixedSource, Model::SingleSource) => {
            Err(TraceError::KindModel { kind: "fixed_source".into(), model })
        }
        (TraceKind::UniformRandom, _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dist = Uniform::new_inclusive(1 as Key, n);
            Ok(random_sequence(model, n, m, || dist.sample(&mut rng))?)
        }
        (TraceKind::Zipf(s), _) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sampler = ZipfSampler::new(n, s);
            Ok(random_sequence(model, n, m, || sampler.sample(&mut rng))?)
        }
    }
}

fn random_sequence(
    model: Model,
    n: u32,
    m: usize,
    mut draw: impl FnMut() -> Key,
) -> Result<RequestSequence, CostError> {
    match model {
        Model::SingleSource => {
            let keys: Vec<Key> = (0..m).map(|_| draw()).collect();
            RequestSequence::single_source(n, keys)
        }
        Model::AllToAll => {
            let pairs: Vec<(Key, Key)> = (0..m).map(|_| (draw(), draw())).collect();
            RequestSequence::all_to_all(n, pairs)
        }
    }
}
