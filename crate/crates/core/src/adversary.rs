//! Request generators from the lower-bound constructions: the oblivious
//! round-robin sequences and the adaptive deepest-node and greedy-matching
//! adversaries that drive an online algorithm through its own tree.

use std::fmt;

use crate::builders::{matching_to_bst, BuildError, Matching};
use crate::cost::{schedule_cost, CostError, CostParams, CostReport, Model, Request, RequestSequence, Schedule, Stage};
use crate::online::{OnlineAlgorithm, OnlineError};
use crate::tree::Key;

#[derive(Debug, Clone, PartialEq)]
pub enum AdversaryError {
    Tree(crate::tree::TreeError),
    Online(OnlineError),
    Cost(CostError),
    Build(BuildError),
    /// The matching adversary needs `log2(n)/2 >= 1`.
    TooFewNodes { n: u32 },
    /// No pair beyond the distance threshold exists even with a fresh
    /// matching; the run cannot make progress.
    Stuck { at: usize },
}

impl fmt::Display for AdversaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tree(e) => e.fmt(f),
            Self::Online(e) => e.fmt(f),
            Self::Cost(e) => e.fmt(f),
            Self::Build(e) => e.fmt(f),
            Self::TooFewNodes { n } => write!(f, "matching adversary needs n >= 4, got {n}"),
            Self::Stuck { at } => write!(f, "no admissible pair at request {at}"),
        }
    }
}

impl std::error::Error for AdversaryError {}

impl From<crate::tree::TreeError> for AdversaryError {
    fn from(e: crate::tree::TreeError) -> Self {
        AdversaryError::Tree(e)
    }
}

impl From<OnlineError> for AdversaryError {
    fn from(e: OnlineError) -> Self {
        AdversaryError::Online(e)
    }
}

impl From<CostError> for AdversaryError {
    fn from(e: CostError) -> Self {
        AdversaryError::Cost(e)
    }
}

impl From<BuildError> for AdversaryError {
    fn from(e: BuildError) -> Self {
        AdversaryError::Build(e)
    }
}

/// `sigma_i = (i mod n) + 1` for `i = 1..=m`.
pub fn round_robin(n: u32, m: usize) -> Result<RequestSequence, CostError> {
    let keys = (1..=m as u64).map(|i| (i % n as u64) as Key + 1);
    RequestSequence::single_source(n, keys)
}

/// Pairs `(1, (i mod n) + 1)` for `i = 1..=m`.
pub fn fixed_source_round_robin(n: u32, m: usize) -> Result<RequestSequence, CostError> {
    let pairs = (1..=m as u64).map(|i| (1, (i % n as u64) as Key + 1));
    RequestSequence::all_to_all(n, pairs)
}

/// One matching epoch of the greedy adversary.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub pairs: Vec<(Key, Key)>,
    /// Requests emitted while this matching was active.
    pub len: usize,
    /// Whether the epoch ended because no admissible pair was left (as
    /// opposed to the request budget running out).
    pub saturated: bool,
}

/// Everything an adversary run produces.
#[derive(Debug, Clone)]
pub struct AdversaryTranscript {
    pub sequence: RequestSequence,
    /// Serve cost of each request measured in the tree the adversary saw
    /// when it emitted the request.
    pub emitted_costs: Vec<u64>,
    /// Cost the online algorithm actually paid (differs on requests that
    /// triggered a rebuild: those are served in the fresh tree).
    pub realized_costs: Vec<u64>,
    /// Whether each request triggered a rebuild.
    pub restructured: Vec<bool>,
    /// Rebuild count of the online algorithm during the run.
    pub restructures: usize,
    pub online_routing: u64,
    pub online_total: f64,
    /// Matching adversary only: the epoch matchings.
    pub epochs: Vec<EpochRecord>,
    /// Matching adversary only: the companion offline schedule (one
    /// matching-realizing tree per epoch) and its measured report.
    pub offline: Option<(Schedule, CostReport)>,
}

impl AdversaryTranscript {
    pub fn offline_total(&self) -> Option<f64> {
        self.offline.as_ref().map(|(_, r)| r.total)
    }
}

/// Repeatedly request a deepest node of the algorithm's current tree.
/// Every request targets depth at least `ceil(log2(n+1)) - 1` at emission
/// time.
pub fn deepest_node_adversary<A: OnlineAlgorithm + ?Sized>(
    alg: &mut A,
    n: u32,
    m: usize,
    params: &CostParams,
) -> Result<AdversaryTranscript, AdversaryError> {
    let mut emitted_costs = Vec::with_capacity(m);
    let mut realized_costs = Vec::with_capacity(m);
    let mut restructured = Vec::with_capacity(m);
    let mut items = Vec::with_capacity(m);
    let mut restructures = 0usize;
    let mut online_routing = 0u64;
    for _ in 0..m {
        let target = alg.tree().deepest_node();
        let emitted = alg.tree().depth(target)? as u64;
        let req = Request::Node(target);
        let rec = alg.serve(&req)?;
        if rec.restructured {
            restructures += 1;
        }
        emitted_costs.push(emitted);
        realized_costs.push(rec.cost);
        restructured.push(rec.restructured);
        online_routing += rec.cost;
        items.push(req);
    }
    let sequence = RequestSequence::new(Model::SingleSource, n, items)?;
    let online_total = online_routing as f64 + restructures as f64 * params.c;
    Ok(AdversaryTranscript {
        sequence,
        emitted_costs,
        realized_costs,
        restructured,
        restructures,
        online_routing,
        online_total,
        epochs: Vec::new(),
        offline: None,
    })
}

/// Greedy matching adversary: grow a non-self-intersecting matching of
/// pairs that are far apart in the algorithm's current tree, hammering
/// each pair until the algorithm rebuilds. When no admissible pair is
/// left the matching has reached its limit: the epoch is recorded and a
/// fresh matching starts. The companion offline strategy serves each
/// epoch in the matching-realizing tree at unit cost per request.
pub fn matching_adversary<A: OnlineAlgorithm + ?Sized>(
    alg: &mut A,
    n: u32,
    m: usize,
    params: &CostParams,
) -> Result<AdversaryTranscript, AdversaryError> {
    if n < 4 {
        return Err(AdversaryError::TooFewNodes { n });
    }
    let threshold = (n as f64).log2() / 2.0;

    let mut emitted_costs = Vec::with_capacity(m);
    let mut realized_costs = Vec::with_capacity(m);
    let mut restructured_flags = Vec::with_capacity(m);
    let mut items = Vec::with_capacity(m);
    let mut restructures = 0usize;
    let mut online_routing = 0u64;

    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut pairs: Vec<(Key, Key)> = Vec::new();
    let mut epoch_start = 0usize;
    let mut current: Option<(Key, Key)> = None;

    let mut t = 0usize;
    while t < m {
        if current.is_none() {
            match pick_pair(alg.tree(), &pairs, threshold)? {
                Some(pair) => {
                    pairs.push(pair);
                    current = Some(pair);
                }
                None => {
                    // Matching reached its limit; the offline comparator
                    // reconfigures here.
                    if pairs.is_empty() {
                        return Err(AdversaryError::Stuck { at: t });
                    }
                    epochs.push(EpochRecord { pairs: std::mem::take(&mut pairs), len: t - epoch_start, saturated: true });
                    epoch_start = t;
                    continue;
                }
            }
        }
        let (src, dst) = current.unwrap();
        let emitted = alg.tree().distance(src, dst)? as u64;
        let req = Request::Pair { src, dst };
        let rec = alg.serve(&req)?;
        if rec.restructured {
            restructures += 1;
            current = None;
        }
        emitted_costs.push(emitted);
        realized_costs.push(rec.cost);
        restructured_flags.push(rec.restructured);
        online_routing += rec.cost;
        items.push(req);
        t += 1;
    }
    if t > epoch_start || !pairs.is_empty() {
        epochs.push(EpochRecord { pairs, len: t - epoch_start, saturated: false });
    }

    let sequence = RequestSequence::new(Model::AllToAll, n, items)?;
    let online_total = online_routing as f64 + restructures as f64 * params.c;

    // Companion offline strategy: one matching-realizing tree per epoch.
    let mut stages = Vec::with_capacity(epochs.len());
    for epoch in &epochs {
        let matching = Matching::new(n, epoch.pairs.clone())?;
        let tree = matching_to_bst(&matching)?;
        stages.push(Stage { tree, len: epoch.len });
    }
    let schedule = Schedule { stages };
    let report = schedule_cost(&sequence, &schedule, params)?;

    Ok(AdversaryTranscript {
        sequence,
        emitted_costs,
        realized_costs,
        restructured: restructured_flags,
        restructures,
        online_routing,
        online_total,
        epochs,
        offline: Some((schedule, report)),
    })
}

/// Greedy pair selection: x is the smallest key that is unmatched and not
/// inside any matched interval; y is the smallest key above x under the
/// same availability rule at tree distance beyond the threshold. Keeping
/// y outside matched intervals is what preserves non-self-intersection.
/// Following the greedy construction, failure to extend from the chosen
/// x ends the epoch even if a larger x might still work.
fn pick_pair(
    tree: &crate::tree::Tree,
    pairs: &[(Key, Key)],
    threshold: f64,
) -> Result<Option<(Key, Key)>, AdversaryError> {
    let n = tree.n();
    let mut blocked = vec![false; n as usize + 1];
    for &(a, b) in pairs {
        for k in a..=b {
            blocked[k as usize] = true;
        }
    }
    let Some(x) = (1..=n).find(|&k| !blocked[k as usize]) else {
        return Ok(None);
    };
    for y in x + 1..=n {
        if blocked[y as usize] {
            continue;
        }
        if tree.distance(x, y)? as f64 > threshold {
            return Ok(Some((x, y)));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::validate_matching;
    use crate::online::{BudgetRunner, OnlinePolicy, StaticRunner};
    use crate::tree::Tree;

    #[test]
    fn round_robin_examples() {
        let seq = round_robin(3, 5).unwrap();
        let keys: Vec<Key> = seq
            .items
            .iter()
            .map(|r| match r {
                Request::Node(u) => *u,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(keys, vec![2, 3, 1, 2, 3]);

        let ones = round_robin(1, 4).unwrap();
        assert!(ones.items.iter().all(|r| *r == Request::Node(1)));
        assert!(round_robin(3, 0).unwrap().is_empty());
    }

    #[test]
    fn round_robin_windows_are_balanced() {
        // Any window's per-key counts differ by at most one.
        let seq = round_robin(5, 60).unwrap();
        for start in 0..20 {
            for len in 1..=25 {
                let mut counts = [0u64; 6];
                for r in &seq.items[start..start + len] {
                    if let Request::Node(u) = r {
                        counts[*u as usize] += 1;
                    }
                }
                let max = counts[1..].iter().max().unwrap();
                let min = counts[1..].iter().min().unwrap();
                assert!(max - min <= 1);
            }
        }
    }

    #[test]
    fn fixed_source_examples() {
        let seq = fixed_source_round_robin(4, 3).unwrap();
        assert_eq!(
            seq.items,
            vec![
                Request::Pair { src: 1, dst: 2 },
                Request::Pair { src: 1, dst: 3 },
                Request::Pair { src: 1, dst: 4 }
            ]
        );
        let ones = fixed_source_round_robin(1, 2).unwrap();
        assert!(ones.items.iter().all(|r| *r == Request::Pair { src: 1, dst: 1 }));
        assert!(fixed_source_round_robin(4, 0).unwrap().is_empty());
    }

    #[test]
    fn deepest_against_static_balanced() {
        let mut alg = StaticRunner::new(Tree::balanced(7).unwrap());
        let params = CostParams::new(7, 2.0);
        let transcript = deepest_node_adversary(&mut alg, 7, 10, &params).unwrap();
        assert!(transcript.realized_costs.iter().all(|&c| c == 2));
        assert!(transcript.emitted_costs.iter().all(|&c| c == 2));
        assert_eq!(transcript.restructures, 0);
    }

    #[test]
    fn deepest_on_single_node() {
        let mut alg = StaticRunner::new(Tree::balanced(1).unwrap());
        let params = CostParams::new(1, 1.0);
        let transcript = deepest_node_adversary(&mut alg, 1, 5, &params).unwrap();
        assert!(transcript.realized_costs.iter().all(|&c| c == 0));
    }

    #[test]
    fn deepest_emitted_costs_hit_depth_floor() {
        // Any binary tree on n nodes has a node at depth ceil(log2(n+1))-1.
        let n = 15u32;
        let params = CostParams::new(n, 4.0);
        let mut alg = BudgetRunner::balanced_start(params, OnlinePolicy::default()).unwrap();
        let transcript = deepest_node_adversary(&mut alg, n, 50, &params).unwrap();
        let floor = ((n + 1) as f64).log2().ceil() as u64 - 1;
        assert!(transcript.emitted_costs.iter().all(|&c| c >= floor));
    }

    #[test]
    fn matching_first_pick_on_balanced_seven() {
        // x = 1; distances from 1 in the balanced tree: 2 -> 1, 3 -> 2;
        // threshold log2(7)/2 ~ 1.40, so y = 3.
        let tree = Tree::balanced(7).unwrap();
        let pair = pick_pair(&tree, &[], (7f64).log2() / 2.0).unwrap();
        assert_eq!(pair, Some((1, 3)));
    }

    #[test]
    fn matching_adversary_against_budget_algorithm() {
        let n = 16u32;
        let params = CostParams::new(n, 3.0);
        let mut alg = BudgetRunner::balanced_start(params, OnlinePolicy::default()).unwrap();
        let m = 60;
        let transcript = matching_adversary(&mut alg, n, m, &params).unwrap();
        let threshold = (n as f64).log2() / 2.0;

        assert_eq!(transcript.sequence.len(), m);
        assert_eq!(transcript.emitted_costs.len(), m);
        // Selection rule: every request was far in the tree it was aimed at.
        assert!(transcript.emitted_costs.iter().all(|&c| c as f64 > threshold));
        // Matchings stay valid.
        for epoch in &transcript.epochs {
            assert!(validate_matching(&epoch.pairs, n));
        }
        // Offline comparator serves everything at unit cost.
        let (schedule, report) = transcript.offline.as_ref().unwrap();
        assert_eq!(report.routing as usize, m);
        let expected = m as f64 + (transcript.epochs.len() as f64 - 1.0) * params.c;
        assert_eq!(report.total, expected);
        assert_eq!(schedule.stages.len(), transcript.epochs.len());
    }

    #[test]
    fn matching_adversary_needs_four_nodes() {
        let params = CostParams::new(3, 1.0);
        let mut alg = StaticRunner::new(Tree::balanced(3).unwrap());
        assert!(matches!(
            matching_adversary(&mut alg, 3, 5, &params),
            Err(AdversaryError::TooFewNodes { .. })
        ));
    }

    #[test]
    fn matching_against_static_runner_fills_one_epoch() {
        // A static opponent never restructures, so the adversary hammers
        // its first pair for the whole run.
        let params = CostParams::new(8, 2.0);
        let mut alg = StaticRunner::new(Tree::balanced(8).unwrap());
        let transcript = matching_adversary(&mut alg, 8, 12, &params).unwrap();
        assert_eq!(transcript.epochs.len(), 1);
        assert!(!transcript.epochs[0].saturated);
        assert_eq!(transcript.epochs[0].pairs.len(), 1);
        assert_eq!(transcript.offline_total(), Some(12.0));
    }
}
