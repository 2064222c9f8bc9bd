//! Static BST constructions: the weight-balanced build, the exact optimal
//! static tree (interval DP with the root-monotonicity speedup), and the
//! matching-to-BST construction that realizes a non-self-intersecting
//! matching with every pair adjacent.

use std::fmt;
use std::str::FromStr;

use crate::cost::{empirical_entropy, CostError, RequestSequence};
use crate::tree::{Key, Tree};

#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    /// Table total mass is zero or the key range is empty.
    EmptyTable,
    BadTable { reason: String },
    InvalidMatching { reason: String },
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyTable => write!(f, "frequency table is empty or all-zero"),
            Self::BadTable { reason } => write!(f, "bad frequency table: {reason}"),
            Self::InvalidMatching { reason } => write!(f, "invalid matching: {reason}"),
        }
    }
}

impl std::error::Error for BuildError {}

/// Per-key access counts over `1..=n`. Zero-count keys still occupy tree
/// positions; they just contribute nothing to weighted costs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    counts: Vec<u64>, // slot 0 unused
}

impl FrequencyTable {
    pub fn new(n: u32) -> Self {
        FrequencyTable { counts: vec![0; n as usize + 1] }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let mut v = Vec::with_capacity(counts.len() + 1);
        v.push(0);
        v.extend(counts);
        FrequencyTable { counts: v }
    }

    /// Endpoint tallies of a request sequence: single-source requests
    /// count their key once, pairs count both endpoints.
    pub fn from_sequence(seq: &RequestSequence) -> Self {
        let mut t = FrequencyTable::new(seq.n);
        for r in &seq.items {
            for k in r.endpoints() {
                t.bump(k);
            }
        }
        t
    }

    pub fn n(&self) -> u32 {
        (self.counts.len() - 1) as u32
    }

    pub fn count(&self, k: Key) -> u64 {
        self.counts[k as usize]
    }

    pub fn bump(&mut self, k: Key) {
        self.counts[k as usize] += 1;
    }

    /// Total mass T.
    pub fn total(&self) -> u64 {
        self.counts[1..].iter().sum()
    }

    /// Empirical entropy of the normalized table.
    pub fn entropy(&self) -> Result<f64, CostError> {
        empirical_entropy(&self.counts[1..])
    }

    /// Weighted edge-depth of a tree under this table.
    pub fn weighted_depth(&self, tree: &Tree) -> u64 {
        let depths = tree.all_depths();
        (1..=self.n()).map(|k| self.counts[k as usize] * depths[k as usize] as u64).sum()
    }
}

/// Text form: `key:count` pairs, comma-separated. Keys not mentioned get
/// count 0; `n` is the largest key mentioned.
impl fmt::Display for FrequencyTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in 1..=self.n() {
            let c = self.counts[k as usize];
            if c > 0 {
                if !first {
                    f.write_str(",")?;
                }
                write!(f, "{k}:{c}")?;
                first = false;
            }
        }
        Ok(())
    }
}

impl FromStr for FrequencyTable {
    type Err = BuildError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut pairs = Vec::new();
        let mut n = 0u32;
        for item in s.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (k, c) = item
                .split_once(':')
                .ok_or_else(|| BuildError::BadTable { reason: format!("expected key:count, got {item:?}") })?;
            let k: u32 = k
                .trim()
                .parse()
                .map_err(|e| BuildError::BadTable { reason: format!("bad key {k:?}: {e}") })?;
            let c: u64 = c
                .trim()
                .parse()
                .map_err(|e| BuildError::BadTable { reason: format!("bad count {c:?}: {e}") })?;
            if k == 0 {
                return Err(BuildError::BadTable { reason: "keys start at 1".into() });
            }
            n = n.max(k);
            pairs.push((k, c));
        }
        if n == 0 {
            return Err(BuildError::EmptyTable);
        }
        let mut t = FrequencyTable::new(n);
        for (k, c) in pairs {
            t.counts[k as usize] += c;
        }
        Ok(t)
    }
}

struct LinkBuf {
    parent: Vec<Option<Key>>,
    left: Vec<Option<Key>>,
    right: Vec<Option<Key>>,
}

impl LinkBuf {
    fn new(n: u32) -> Self {
        let len = n as usize + 1;
        LinkBuf { parent: vec![None; len], left: vec![None; len], right: vec![None; len] }
    }

    fn attach(&mut self, parent: Key, child: Key) {
        if child < parent {
            self.left[parent as usize] = Some(child);
        } else {
            self.right[parent as usize] = Some(child);
        }
        self.parent[child as usize] = Some(parent);
    }

    fn finish(self, n: u32, root: Key) -> Tree {
        let code = preorder_from_links(n, root, &self.left, &self.right);
        Tree::from_code(&crate::tree::TreeCode(code)).expect("builder produced an invalid BST")
    }
}

fn preorder_from_links(n: u32, root: Key, left: &[Option<Key>], right: &[Option<Key>]) -> Vec<Key> {
    let mut out = Vec::with_capacity(n as usize);
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        out.push(k);
        if let Some(r) = right[k as usize] {
            stack.push(r);
        }
        if let Some(l) = left[k as usize] {
            stack.push(l);
        }
    }
    out
}

/// Weight-balanced construction: for each subrange pick the root that
/// minimizes `|W(lo, r-1) - W(r+1, hi)|`, ties toward the smallest key,
/// then recurse. Satisfies the `T (2 + H/(1 - log2(sqrt 5 - 1)))` bound.
pub fn mehlhorn_build(table: &FrequencyTable) -> Result<Tree, BuildError> {
    let n = table.n();
    if n == 0 {
        return Err(BuildError::EmptyTable);
    }
    if table.total() == 0 {
        return Err(BuildError::EmptyTable);
    }
    // prefix[i] = mass of keys 1..=i.
    let mut prefix = vec![0u64; n as usize + 1];
    for k in 1..=n as usize {
        prefix[k] = prefix[k - 1] + table.counts[k];
    }
    let mut links = LinkBuf::new(n);
    let root = balance_range(&prefix, &mut links, 1, n);
    Ok(links.finish(n, root))
}

/// Signed imbalance of rooting `[lo, hi]` at `r`: left mass minus right
/// mass. Nondecreasing in `r`, which lets the argmin be binary-searched.
fn imbalance(prefix: &[u64], lo: Key, hi: Key, r: Key) -> i64 {
    let left = prefix[(r - 1) as usize] - prefix[(lo - 1) as usize];
    let right = prefix[hi as usize] - prefix[r as usize];
    left as i64 - right as i64
}

fn balance_range(prefix: &[u64], links: &mut LinkBuf, lo: Key, hi: Key) -> Key {
    debug_assert!(lo <= hi);
    let r = balance_root(prefix, lo, hi);
    if r > lo {
        let l = balance_range(prefix, links, lo, r - 1);
        links.attach(r, l);
    }
    if r < hi {
        let right = balance_range(prefix, links, r + 1, hi);
        links.attach(r, right);
    }
    r
}

fn balance_root(prefix: &[u64], lo: Key, hi: Key) -> Key {
    if lo == hi {
        return lo;
    }
    // First root with nonnegative imbalance; always exists because the
    // imbalance at hi is the full left mass.
    let mut a = lo;
    let mut b = hi;
    while a < b {
        let mid = (a + b) / 2;
        if imbalance(prefix, lo, hi, mid) >= 0 {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    let p = a;
    if p == lo {
        return lo;
    }
    let v_pos = imbalance(prefix, lo, hi, p);
    let v_neg = -imbalance(prefix, lo, hi, p - 1);
    if v_pos < v_neg {
        return p;
    }
    // The last negative value wins (or ties, which also favors the smaller
    // index). Its value may repeat; take the first occurrence.
    let target = -v_neg;
    let mut a = lo;
    let mut b = p - 1;
    while a < b {
        let mid = (a + b) / 2;
        if imbalance(prefix, lo, hi, mid) >= target {
            b = mid;
        } else {
            a = mid + 1;
        }
    }
    a
}

/// Exact optimal static tree: minimizes the weighted edge-depth
/// `sum freq(u) * depth(u)` by interval DP over comparison counts, with
/// the classic root-monotonicity restriction for O(n^2) time. Ties take
/// the smallest feasible root per interval.
pub fn optimal_static(table: &FrequencyTable) -> Result<(Tree, u64), BuildError> {
    let n = table.n() as usize;
    if n == 0 || table.total() == 0 {
        return Err(BuildError::EmptyTable);
    }
    let mut prefix = vec![0u64; n + 1];
    for k in 1..=n {
        prefix[k] = prefix[k - 1] + table.counts[k];
    }
    let w = |i: usize, j: usize| -> u64 { prefix[j] - prefix[i - 1] };

    // cost[i][j] over comparison counts (every key in the range pays at
    // least one visit); minimizing it also minimizes edge-depth because
    // the two differ by the constant W(i, j) per interval.
    let mut cost = vec![vec![0u64; n + 2]; n + 2];
    let mut root = vec![vec![0usize; n + 2]; n + 2];
    for i in 1..=n {
        cost[i][i] = table.counts[i];
        root[i][i] = i;
    }
    for len in 2..=n {
        for i in 1..=n - len + 1 {
            let j = i + len - 1;
            let lo = root[i][j - 1];
            let hi = root[i + 1][j].max(lo);
            let mut best = u64::MAX;
            let mut best_r = lo;
            for r in lo..=hi {
                let v = cost[i][r - 1] + cost[r + 1][j];
                if v < best {
                    best = v;
                    best_r = r;
                }
            }
            cost[i][j] = best + w(i, j);
            root[i][j] = best_r;
        }
    }

    let mut links = LinkBuf::new(n as u32);
    let mut stack = vec![(1usize, n)];
    while let Some((i, j)) = stack.pop() {
        let r = root[i][j];
        if r > i {
            let lr = root[i][r - 1];
            links.attach(r as Key, lr as Key);
            stack.push((i, r - 1));
        }
        if r < j {
            let rr = root[r + 1][j];
            links.attach(r as Key, rr as Key);
            stack.push((r + 1, j));
        }
    }
    let tree = links.finish(n as u32, root[1][n] as Key);
    let edge_cost = cost[1][n] - w(1, n);
    debug_assert_eq!(edge_cost, table.weighted_depth(&tree));
    Ok((tree, edge_cost))
}

/// Pairing of keys whose intervals are pairwise disjoint or properly
/// nested, with each key in at most one pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    n: u32,
    pairs: Vec<(Key, Key)>,
}

impl Matching {
    pub fn new(n: u32, pairs: Vec<(Key, Key)>) -> Result<Self, BuildError> {
        let pairs: Vec<(Key, Key)> =
            pairs.into_iter().map(|(a, b)| if a <= b { (a, b) } else { (b, a) }).collect();
        if !validate_matching(&pairs, n) {
            return Err(BuildError::InvalidMatching {
                reason: "pairs must be vertex-disjoint and non-self-intersecting".into(),
            });
        }
        Ok(Matching { n, pairs })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn pairs(&self) -> &[(Key, Key)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// True iff every key appears in at most one pair, keys are in range,
/// no pair is degenerate, and for any two pairs the intervals are either
/// disjoint or one properly contains the other.
pub fn validate_matching(pairs: &[(Key, Key)], n: u32) -> bool {
    let mut used = vec![false; n as usize + 1];
    for &(a, b) in pairs {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if a == 0 || b > n || a == b {
            return false;
        }
        for k in [a, b] {
            if used[k as usize] {
                return false;
            }
            used[k as usize] = true;
        }
    }
    for (idx, &(a, b)) in pairs.iter().enumerate() {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        for &(c, d) in &pairs[idx + 1..] {
            let (c, d) = if c <= d { (c, d) } else { (d, c) };
            let disjoint = b < c || d < a;
            let nested = (a < c && d < b) || (c < a && b < d);
            if !disjoint && !nested {
                return false;
            }
        }
    }
    true
}

/// Build a BST on `1..=n` in which every matched pair is adjacent: the
/// smallest matched key of a range becomes the subtree root, its partner
/// the root's right child, and the three leftover segments recurse.
/// Ranges with no matched keys become midpoint-balanced subtrees.
pub fn matching_to_bst(matching: &Matching) -> Result<Tree, BuildError> {
    let n = matching.n;
    if n == 0 {
        return Err(BuildError::EmptyTable);
    }
    let mut partner = vec![0 as Key; n as usize + 1];
    for &(a, b) in &matching.pairs {
        partner[a as usize] = b;
        partner[b as usize] = a;
    }
    let mut links = LinkBuf::new(n);
    let root = matching_range(&partner, &mut links, 1, n);
    Ok(links.finish(n, root))
}

fn matching_range(partner: &[Key], links: &mut LinkBuf, lo: Key, hi: Key) -> Key {
    // Smallest matched key in the range; its partner is inside the range
    // because recursion never splits a pair.
    let j = (lo..=hi).find(|&k| partner[k as usize] != 0);
    let Some(j) = j else {
        return balanced_segment(links, lo, hi);
    };
    let i = partner[j as usize];
    debug_assert!(j < i && i <= hi, "partner escaped the range");
    if j > lo {
        let l = balanced_segment(links, lo, j - 1);
        links.attach(j, l);
    }
    links.attach(j, i);
    if i > j + 1 {
        let inner = matching_range(partner, links, j + 1, i - 1);
        links.attach(i, inner);
    }
    if i < hi {
        let outer = matching_range(partner, links, i + 1, hi);
        links.attach(i, outer);
    }
    j
}

fn balanced_segment(links: &mut LinkBuf, lo: Key, hi: Key) -> Key {
    let mid = (lo + hi) / 2;
    if mid > lo {
        let l = balanced_segment(links, lo, mid - 1);
        links.attach(mid, l);
    }
    if mid < hi {
        let r = balanced_segment(links, mid + 1, hi);
        links.attach(mid, r);
    }
    mid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mehlhorn_examples() {
        // Uniform on 1..3: symmetric, root 2.
        let t = mehlhorn_build(&FrequencyTable::from_counts(vec![1, 1, 1])).unwrap();
        assert_eq!(t.root(), 2);
        assert_eq!(t.depth(1).unwrap(), 1);
        assert_eq!(t.depth(3).unwrap(), 1);

        // (10, 1, 1): imbalances are 2, 9, 11 in magnitude, so root 1.
        let t = mehlhorn_build(&FrequencyTable::from_counts(vec![10, 1, 1])).unwrap();
        assert_eq!(t.root(), 1);

        // Single key.
        let t = mehlhorn_build(&FrequencyTable::from_counts(vec![5])).unwrap();
        assert_eq!(t.root(), 1);
        assert_eq!(t.n(), 1);

        assert!(mehlhorn_build(&FrequencyTable::from_counts(vec![0, 0])).is_err());
    }

    #[test]
    fn mehlhorn_matches_linear_scan_rule() {
        // The binary-searched argmin must agree with a direct scan,
        // including ties and zero-weight runs.
        let tables = [
            vec![0, 0, 5, 0, 0],
            vec![3, 3, 3, 3],
            vec![1, 0, 0, 1],
            vec![2, 1, 1, 2, 4, 0, 1],
            vec![0, 1, 0, 1, 0, 1, 0],
        ];
        for counts in tables {
            check_balance_rule(counts);
        }

        // A seeded batch with plenty of zeros and ties.
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..60 {
            let n = (next() % 12 + 1) as usize;
            let counts: Vec<u64> = (0..n).map(|_| next() % 5).collect();
            check_balance_rule(counts);
        }
    }

    fn check_balance_rule(counts: Vec<u64>) {
        let n = counts.len() as u32;
        let table = FrequencyTable::from_counts(counts.clone());
        let mut prefix = vec![0u64; n as usize + 1];
        for k in 1..=n as usize {
            prefix[k] = prefix[k - 1] + counts[k - 1];
        }
        for lo in 1..=n {
            for hi in lo..=n {
                let fast = balance_root(&prefix, lo, hi);
                let slow = (lo..=hi)
                    .min_by_key(|&r| imbalance(&prefix, lo, hi, r).unsigned_abs())
                    .unwrap();
                assert_eq!(fast, slow, "range [{lo},{hi}] of {table}");
            }
        }
    }

    #[test]
    fn optimal_static_examples() {
        let (t, cost) = optimal_static(&FrequencyTable::from_counts(vec![1, 1, 1])).unwrap();
        assert_eq!(cost, 2);
        assert_eq!(t.root(), 2);

        let (t, cost) = optimal_static(&FrequencyTable::from_counts(vec![10, 1, 1])).unwrap();
        assert_eq!(cost, 3);
        assert_eq!(t.root(), 1);
        assert_eq!(t.right(1), Some(2));
        assert_eq!(t.right(2), Some(3));

        let (_, cost) = optimal_static(&FrequencyTable::from_counts(vec![7])).unwrap();
        assert_eq!(cost, 0);

        assert!(optimal_static(&FrequencyTable::from_counts(vec![0])).is_err());
    }

    #[test]
    fn matching_validation() {
        assert!(validate_matching(&[(1, 4), (2, 3)], 6));
        assert!(!validate_matching(&[(1, 3), (2, 4)], 4));
        assert!(validate_matching(&[], 3));
        assert!(!validate_matching(&[(1, 2), (2, 3)], 3)); // shared vertex
        assert!(!validate_matching(&[(1, 1)], 2)); // degenerate
        assert!(!validate_matching(&[(1, 5)], 4)); // out of range
    }

    #[test]
    fn matching_to_bst_examples() {
        // The figure instance: pairs (1,4), (2,3), (5,6) on n = 6.
        let m = Matching::new(6, vec![(1, 4), (2, 3), (5, 6)]).unwrap();
        let t = matching_to_bst(&m).unwrap();
        assert_eq!(t.root(), 1);
        assert_eq!(t.right(1), Some(4));
        assert_eq!(t.left(4), Some(2));
        assert_eq!(t.right(2), Some(3));
        assert_eq!(t.right(4), Some(5));
        assert_eq!(t.right(5), Some(6));
        for &(a, b) in m.pairs() {
            assert_eq!(t.distance(a, b).unwrap(), 1);
        }

        // Empty matching: balanced tree.
        let m = Matching::new(3, vec![]).unwrap();
        let t = matching_to_bst(&m).unwrap();
        assert_eq!(t.root(), 2);

        // Base pair (1,2).
        let m = Matching::new(2, vec![(1, 2)]).unwrap();
        let t = matching_to_bst(&m).unwrap();
        assert_eq!(t.root(), 1);
        assert_eq!(t.right(1), Some(2));

        assert!(Matching::new(4, vec![(1, 3), (2, 4)]).is_err());
    }

    #[test]
    fn frequency_table_text_form() {
        let t: FrequencyTable = "1:10, 3:2".parse().unwrap();
        assert_eq!(t.n(), 3);
        assert_eq!(t.count(1), 10);
        assert_eq!(t.count(2), 0);
        assert_eq!(t.count(3), 2);
        assert_eq!(t.to_string(), "1:10,3:2");
        assert_eq!(t.to_string().parse::<FrequencyTable>().unwrap(), t);
        assert!("".parse::<FrequencyTable>().is_err());
        assert!("1-2".parse::<FrequencyTable>().is_err());
        assert!("0:3".parse::<FrequencyTable>().is_err());
    }

    #[test]
    fn sequence_tables_count_endpoints() {
        let seq = RequestSequence::all_to_all(4, [(1, 4), (1, 3)]).unwrap();
        let t = FrequencyTable::from_sequence(&seq);
        assert_eq!(t.count(1), 2);
        assert_eq!(t.count(3), 1);
        assert_eq!(t.count(4), 1);
        assert_eq!(t.total(), 4);
    }

    #[test]
    fn zero_weight_keys_still_present() {
        let table = FrequencyTable::from_counts(vec![0, 0, 1, 0, 0]);
        let t = mehlhorn_build(&table).unwrap();
        assert_eq!(t.n(), 5);
        assert_eq!(t.root(), 3);
        let (opt, cost) = optimal_static(&table).unwrap();
        assert_eq!(opt.n(), 5);
        assert_eq!(cost, 0);
    }
}
