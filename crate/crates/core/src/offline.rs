//! Offline block-partition algorithm: split the sequence into
//! `ceil(m / (C(n) ln 2))` near-equal contiguous blocks and serve each
//! block in a weight-balanced tree built from its own frequency table.
//! Works for both models; the all-to-all variant builds the per-block
//! tree from endpoint tallies.

use std::fmt;

use crate::builders::{mehlhorn_build, optimal_static, BuildError, FrequencyTable};
use crate::cost::{schedule_cost, CostError, CostParams, CostReport, Model, RequestSequence, Schedule, Stage};

#[derive(Debug, Clone, PartialEq)]
pub enum OfflineError {
    Cost(CostError),
    Build(BuildError),
    /// The block-count formula degenerates below `c = 1`.
    CostTooSmall { c: f64 },
    ModelMismatch { expected: Model, got: Model },
    EmptySequence,
}

impl fmt::Display for OfflineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cost(e) => e.fmt(f),
            Self::Build(e) => e.fmt(f),
            Self::CostTooSmall { c } => write!(f, "reconfiguration cost {c} < 1 rejected by the block partition"),
            Self::ModelMismatch { expected, got } => {
                write!(f, "offline algorithm for {expected:?} got a {got:?} sequence")
            }
            Self::EmptySequence => write!(f, "cannot run the offline algorithm on an empty sequence"),
        }
    }
}

impl std::error::Error for OfflineError {}

impl From<CostError> for OfflineError {
    fn from(e: CostError) -> Self {
        OfflineError::Cost(e)
    }
}

impl From<BuildError> for OfflineError {
    fn from(e: BuildError) -> Self {
        OfflineError::Build(e)
    }
}

/// Which static construction serves each block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StaticBuilder {
    /// Weight-balanced build; the one the cost analysis is stated for.
    #[default]
    Mehlhorn,
    /// Exact optimal static tree, for comparison runs.
    OptimalDp,
}

impl StaticBuilder {
    pub fn build(&self, table: &FrequencyTable) -> Result<crate::tree::Tree, BuildError> {
        match self {
            StaticBuilder::Mehlhorn => mehlhorn_build(table),
            StaticBuilder::OptimalDp => optimal_static(table).map(|(t, _)| t),
        }
    }
}

/// Block lengths of the partition: `k + 1 = ceil(m / (c ln 2))` blocks,
/// the first `m mod (k+1)` of length `floor(m/(k+1)) + 1`, the rest one
/// shorter. Degenerate zero-length blocks are dropped. Every returned
/// block has length at most `c ln 2 + 1`.
pub fn partition_blocks(m: usize, params: &CostParams) -> Result<Vec<usize>, OfflineError> {
    if params.c < 1.0 {
        return Err(OfflineError::CostTooSmall { c: params.c });
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let denom = params.c * std::f64::consts::LN_2;
    let parts = ((m as f64 / denom).ceil() as usize).max(1);
    let x = m / parts;
    let r = m % parts;
    let mut blocks = Vec::with_capacity(parts);
    blocks.extend(std::iter::repeat_n(x + 1, r));
    if x > 0 {
        blocks.extend(std::iter::repeat_n(x, parts - r));
    }
    debug_assert_eq!(blocks.iter().sum::<usize>(), m);
    Ok(blocks)
}

fn run(
    seq: &RequestSequence,
    params: &CostParams,
    builder: StaticBuilder,
) -> Result<(Schedule, CostReport), OfflineError> {
    if seq.is_empty() {
        return Err(OfflineError::EmptySequence);
    }
    let blocks = partition_blocks(seq.len(), params)?;
    let mut stages = Vec::with_capacity(blocks.len());
    let mut pos = 0usize;
    for len in blocks {
        let block = &seq.items[pos..pos + len];
        pos += len;
        let mut table = FrequencyTable::new(seq.n);
        for r in block {
            for k in r.endpoints() {
                table.bump(k);
            }
        }
        let tree = builder.build(&table)?;
        stages.push(Stage { tree, len });
    }
    let schedule = Schedule { stages };
    let report = schedule_cost(seq, &schedule, params)?;
    Ok((schedule, report))
}

/// Single-source offline algorithm; total cost stays within
/// `2m log2(C(n) + 2.2)`.
pub fn offline_single_source(
    seq: &RequestSequence,
    params: &CostParams,
) -> Result<(Schedule, CostReport), OfflineError> {
    offline_single_source_with(seq, params, StaticBuilder::Mehlhorn)
}

pub fn offline_single_source_with(
    seq: &RequestSequence,
    params: &CostParams,
    builder: StaticBuilder,
) -> Result<(Schedule, CostReport), OfflineError> {
    if seq.model != Model::SingleSource {
        return Err(OfflineError::ModelMismatch { expected: Model::SingleSource, got: seq.model });
    }
    run(seq, params, builder)
}

/// All-to-all extension: same partition, per-block tables count both
/// endpoints of every pair, routing is measured as tree distance. Total
/// cost stays within `4m (log2 C(n) + 3.9)`.
pub fn offline_all_to_all(
    seq: &RequestSequence,
    params: &CostParams,
) -> Result<(Schedule, CostReport), OfflineError> {
    offline_all_to_all_with(seq, params, StaticBuilder::Mehlhorn)
}

pub fn offline_all_to_all_with(
    seq: &RequestSequence,
    params: &CostParams,
    builder: StaticBuilder,
) -> Result<(Schedule, CostReport), OfflineError> {
    if seq.model != Model::AllToAll {
        return Err(OfflineError::ModelMismatch { expected: Model::AllToAll, got: seq.model });
    }
    run(seq, params, builder)
}
