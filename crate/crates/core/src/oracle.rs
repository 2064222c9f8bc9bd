//! Exhaustive small-instance ground truth: exact offline OPT over all
//! tree sequences, brute-force static optimum, the rotation-condition
//! checker for source-routed optimal trees, and the exact minimizer of
//! the partition objective behind the offline lower bound.

use std::fmt;

use crate::builders::FrequencyTable;
use crate::cost::{serve_cost, CostError, CostParams, RequestSequence, Schedule, Stage};
use crate::tree::{enumerate_all_bsts, Key, Tree, TreeError};

/// Guard rails keeping every oracle exhaustive at desk scale.
pub const MAX_ORACLE_N: u32 = 8;
pub const MAX_ORACLE_M: usize = 60;
pub const MAX_PARTITION_M: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    Tree(TreeError),
    Cost(CostError),
    InstanceTooLarge { what: &'static str },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Tree(e) => e.fmt(f),
            Self::Cost(e) => e.fmt(f),
            Self::InstanceTooLarge { what } => write!(f, "instance over oracle guard: {what}"),
        }
    }
}

impl std::error::Error for OracleError {}

impl From<TreeError> for OracleError {
    fn from(e: TreeError) -> Self {
        OracleError::Tree(e)
    }
}

impl From<CostError> for OracleError {
    fn from(e: CostError) -> Self {
        OracleError::Cost(e)
    }
}

/// Exact offline optimum: dynamic program over (request index, tree id)
/// across every BST shape. The first tree is free; each change of tree
/// pays `C(n)`. Because the switch charge is uniform, each step only
/// needs the per-tree stay value plus the global best, so the transition
/// is linear in the number of trees.
pub fn exact_opt(seq: &RequestSequence, params: &CostParams) -> Result<(f64, Schedule), OracleError> {
    if seq.n > MAX_ORACLE_N {
        return Err(OracleError::InstanceTooLarge { what: "exact_opt needs n <= 8" });
    }
    if seq.len() > MAX_ORACLE_M {
        return Err(OracleError::InstanceTooLarge { what: "exact_opt needs m <= 60" });
    }
    let trees = enumerate_all_bsts(seq.n)?;
    let m = seq.len();
    if m == 0 {
        let schedule = Schedule { stages: vec![] };
        return Ok((0.0, schedule));
    }

    let t_count = trees.len();
    let mut dp = vec![0.0f64; t_count];
    let mut next = vec![0.0f64; t_count];
    // Predecessor tree per (step, tree); step 0 is the initial choice.
    let mut back = vec![vec![0u32; t_count]; m];

    for (step, req) in seq.items.iter().enumerate() {
        // Best predecessor if we switch (smallest index on ties).
        let mut best_idx = 0usize;
        for (idx, &v) in dp.iter().enumerate() {
            if v < dp[best_idx] {
                best_idx = idx;
            }
        }
        let best_switch = dp[best_idx] + params.c;
        for (idx, tree) in trees.iter().enumerate() {
            let stay = dp[idx];
            let (prev, from) = if step == 0 || stay <= best_switch {
                (stay, idx as u32)
            } else {
                (best_switch, best_idx as u32)
            };
            next[idx] = prev + serve_cost(tree, req)? as f64;
            back[step][idx] = from;
        }
        std::mem::swap(&mut dp, &mut next);
    }

    let mut best_final = 0usize;
    for (idx, &v) in dp.iter().enumerate() {
        if v < dp[best_final] {
            best_final = idx;
        }
    }
    let cost = dp[best_final];

    // Walk predecessors back into a stage decomposition.
    let mut tree_per_step = vec![0u32; m];
    let mut cur = best_final as u32;
    for step in (0..m).rev() {
        tree_per_step[step] = cur;
        cur = back[step][cur as usize];
    }
    let mut stages: Vec<Stage> = Vec::new();
    for step in 0..m {
        let idx = tree_per_step[step] as usize;
        match stages.last_mut() {
            Some(stage) if tree_per_step[step - 1] == tree_per_step[step] => stage.len += 1,
            _ => stages.push(Stage { tree: trees[idx].clone(), len: 1 }),
        }
    }
    Ok((cost, Schedule { stages }))
}

/// Minimum weighted edge-depth over every enumerated tree; validates the
/// interval DP. Ties resolve to the first tree in enumeration order.
pub fn brute_force_static_opt(table: &FrequencyTable) -> Result<(Tree, u64), OracleError> {
    if table.n() > MAX_ORACLE_N {
        return Err(OracleError::InstanceTooLarge { what: "brute force needs n <= 8" });
    }
    let trees = enumerate_all_bsts(table.n())?;
    let mut best: Option<(u64, &Tree)> = None;
    for tree in &trees {
        let cost = table.weighted_depth(tree);
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, tree));
        }
    }
    let (cost, tree) = best.expect("enumeration is never empty");
    Ok((tree.clone(), cost))
}

/// Which branch of the rotation condition held on the source-optimal
/// static tree.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationReport {
    /// Destination mass inside the subtree rooted at the source.
    pub subtree_mass: u64,
    /// Mass of the source's parent plus the subtree of the parent's other
    /// child (0 when the source is the root).
    pub sibling_mass: u64,
    pub total_mass: u64,
    pub source_is_root: bool,
    pub condition1: bool,
    pub condition2: bool,
    pub tree: Tree,
}

impl RotationReport {
    pub fn holds(&self) -> bool {
        self.condition1 || self.condition2
    }
}

/// On the optimal static tree for communications from a fixed source
/// (cost = sum of freq(dst) * distance(source, dst), brute-forced over
/// all shapes), check that the source's subtree holds at least a quarter
/// of the mass, or that its parent plus the parent's other subtree does.
pub fn check_rotation_condition(table: &FrequencyTable, source: Key) -> Result<RotationReport, OracleError> {
    let n = table.n();
    if n > MAX_ORACLE_N {
        return Err(OracleError::InstanceTooLarge { what: "rotation check needs n <= 8" });
    }
    if source == 0 || source > n {
        return Err(OracleError::Tree(TreeError::KeyOutOfRange { key: source, n }));
    }
    let trees = enumerate_all_bsts(n)?;
    let mut best: Option<(u64, &Tree)> = None;
    for tree in &trees {
        let mut cost = 0u64;
        for d in 1..=n {
            let f = table.count(d);
            if f > 0 {
                cost += f * tree.distance(source, d)? as u64;
            }
        }
        if best.is_none_or(|(b, _)| cost < b) {
            best = Some((cost, tree));
        }
    }
    let (_, tree) = best.expect("enumeration is never empty");
    let total_mass = table.total();

    let source_mass = subtree_mass(tree, table, source);
    let source_is_root = tree.parent(source).is_none();
    let sibling_mass = if source_is_root {
        0
    } else {
        let parent = tree.parent(source).unwrap();
        let other = if tree.left(parent) == Some(source) { tree.right(parent) } else { tree.left(parent) };
        table.count(parent) + other.map_or(0, |o| subtree_mass(tree, table, o))
    };

    let quarter = total_mass as f64 / 4.0;
    let condition1 = source_is_root || source_mass as f64 >= quarter;
    let condition2 = !source_is_root && sibling_mass as f64 >= quarter;
    Ok(RotationReport {
        subtree_mass: if source_is_root { total_mass } else { source_mass },
        sibling_mass,
        total_mass,
        source_is_root,
        condition1,
        condition2,
        tree: tree.clone(),
    })
}

fn subtree_mass(tree: &Tree, table: &FrequencyTable, root: Key) -> u64 {
    let mut mass = 0u64;
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        mass += table.count(k);
        for child in [tree.left(k), tree.right(k)].into_iter().flatten() {
            stack.push(child);
        }
    }
    mass
}

/// Exact integer minimum of `k C(n) + sum x_i min(log2 x_i, log2 n)` over
/// every k >= 0 and positive integer parts summing to m, by a partition
/// DP over (part count, mass).
pub fn min_partition_objective(m: usize, n: u32, c: f64) -> Result<f64, OracleError> {
    if m == 0 || m > MAX_PARTITION_M {
        return Err(OracleError::InstanceTooLarge { what: "partition objective needs 1 <= m <= 80" });
    }
    let log_n = (n as f64).log2();
    let part_cost: Vec<f64> =
        (0..=m).map(|x| if x == 0 { 0.0 } else { x as f64 * (x as f64).log2().min(log_n) }).collect();

    // dp[p][v]: cheapest split of mass v into exactly p positive parts.
    let mut dp = vec![vec![f64::INFINITY; m + 1]; m + 1];
    dp[0][0] = 0.0;
    for p in 1..=m {
        for v in p..=m {
            let mut best = f64::INFINITY;
            for x in 1..=v - (p - 1) {
                let cand = dp[p - 1][v - x] + part_cost[x];
                if cand < best {
                    best = cand;
                }
            }
            dp[p][v] = best;
        }
    }
    let mut best = f64::INFINITY;
    for (p, row) in dp.iter().enumerate().skip(1) {
        let cand = (p - 1) as f64 * c + row[m];
        if cand < best {
            best = cand;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_opt_two_keys() {
        // n = 2, C = 1, (1,1,2,2): serve the 1s under root 1, switch once.
        let seq = RequestSequence::single_source(2, [1, 1, 2, 2]).unwrap();
        let (cost, schedule) = exact_opt(&seq, &CostParams::new(2, 1.0)).unwrap();
        assert_eq!(cost, 1.0);
        assert_eq!(schedule.stages.len(), 2);
        let report = crate::cost::schedule_cost(&seq, &schedule, &CostParams::new(2, 1.0)).unwrap();
        assert_eq!(report.total, 1.0);

        // Constant sequence: free.
        let seq = RequestSequence::single_source(2, [2, 2, 2]).unwrap();
        let (cost, _) = exact_opt(&seq, &CostParams::new(2, 5.0)).unwrap();
        assert_eq!(cost, 0.0);

        // n = 2, C = 10, alternating: static tree wins at cost 2.
        let seq = RequestSequence::single_source(2, [1, 2, 1, 2]).unwrap();
        let (cost, schedule) = exact_opt(&seq, &CostParams::new(2, 10.0)).unwrap();
        assert_eq!(cost, 2.0);
        assert_eq!(schedule.stages.len(), 1);
    }

    #[test]
    fn exact_opt_guards() {
        let seq = RequestSequence::single_source(9, [1]).unwrap();
        assert!(exact_opt(&seq, &CostParams::new(9, 1.0)).is_err());
        let long = RequestSequence::single_source(2, std::iter::repeat_n(1, 61)).unwrap();
        assert!(exact_opt(&long, &CostParams::new(2, 1.0)).is_err());
    }

    #[test]
    fn exact_opt_all_to_all() {
        let seq = RequestSequence::all_to_all(3, [(1, 3), (1, 3), (1, 3)]).unwrap();
        let (cost, _) = exact_opt(&seq, &CostParams::new(3, 2.0)).unwrap();
        // OPT never switches here: it just picks the shape minimizing d(1,3).
        let trees = enumerate_all_bsts(3).unwrap();
        let best = trees
            .iter()
            .map(|t| 3 * t.distance(1, 3).unwrap() as u64)
            .min()
            .unwrap();
        assert_eq!(cost, best as f64);
    }

    #[test]
    fn brute_static_examples() {
        let (_, cost) = brute_force_static_opt(&FrequencyTable::from_counts(vec![1, 1, 1])).unwrap();
        assert_eq!(cost, 2);
        let (_, cost) = brute_force_static_opt(&FrequencyTable::from_counts(vec![5])).unwrap();
        assert_eq!(cost, 0);
        let (tree, cost) = brute_force_static_opt(&FrequencyTable::from_counts(vec![10, 1, 1])).unwrap();
        assert_eq!(cost, 3);
        assert_eq!(tree.root(), 1);
        assert!(brute_force_static_opt(&FrequencyTable::new(9)).is_err());
    }

    #[test]
    fn rotation_condition_root_source() {
        // All communications go from the source to itself: every shape
        // costs 0 and the first enumerated tree roots key 1.
        let table = FrequencyTable::from_counts(vec![5, 0, 0, 0]);
        let report = check_rotation_condition(&table, 1).unwrap();
        assert!(report.source_is_root);
        assert!(report.condition1);
        assert_eq!(report.subtree_mass, 5);
    }

    #[test]
    fn rotation_condition_uniform_small() {
        let table = FrequencyTable::from_counts(vec![1, 1, 1, 1, 1]);
        let report = check_rotation_condition(&table, 1).unwrap();
        assert!(report.holds());
        assert!(check_rotation_condition(&table, 9).is_err());
    }

    #[test]
    fn partition_objective_values() {
        // m = 60, n = 16, c = 4: the lower bound m log2 c = 120.
        let v = min_partition_objective(60, 16, 4.0).unwrap();
        assert!(v >= 120.0);

        // c = 1: all-singleton partitions cost nothing.
        let v = min_partition_objective(10, 4, 1.0).unwrap();
        assert!(v >= 0.0);
        assert_eq!(min_partition_objective(10, 1, 5.0).unwrap(), 0.0);

        assert!(min_partition_objective(81, 4, 2.0).is_err());
        assert!(min_partition_objective(0, 4, 2.0).is_err());
    }

    #[test]
    fn partition_objective_matches_full_enumeration() {
        // Exhaustive check over all integer partitions for small m.
        fn enumerate_min(m: usize, n: u32, c: f64) -> f64 {
            let log_n = (n as f64).log2();
            let f = |x: usize| x as f64 * (x as f64).log2().min(log_n);
            let mut best = f64::INFINITY;
            // parts chosen nondecreasing to enumerate partitions once
            fn rec(remaining: usize, min_part: usize, parts: usize, acc: f64, c: f64, f: &dyn Fn(usize) -> f64, best: &mut f64) {
                if remaining == 0 {
                    let total = (parts as f64 - 1.0) * c + acc;
                    if total < *best {
                        *best = total;
                    }
                    return;
                }
                for x in min_part..=remaining {
                    rec(remaining - x, x, parts + 1, acc + f(x), c, f, best);
                }
            }
            rec(m, 1, 0, 0.0, c, &f, &mut best);
            best
        }

        for (m, n, c) in [(10usize, 4u32, 2.0f64), (12, 3, 1.0), (15, 6, 3.0), (20, 4, 2.0), (9, 8, 4.0)] {
            let dp = min_partition_objective(m, n, c).unwrap();
            let brute = enumerate_min(m, n, c);
            assert!((dp - brute).abs() < 1e-9, "m={m} n={n} c={c}: dp={dp} brute={brute}");
        }
    }

    #[test]
    fn prohibitive_switch_cost_reduces_to_static() {
        let seq = RequestSequence::single_source(4, [1, 3, 2, 4, 1, 3]).unwrap();
        let m = seq.len();
        let params = CostParams::new(4, (m * 3) as f64);
        let (cost, schedule) = exact_opt(&seq, &params).unwrap();
        assert_eq!(schedule.stages.len(), 1);
        let table = FrequencyTable::from_sequence(&seq);
        let (_, static_cost) = brute_force_static_opt(&table).unwrap();
        assert_eq!(cost, static_cost as f64);
    }
}
