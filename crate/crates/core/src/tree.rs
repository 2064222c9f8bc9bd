//! Index-based binary search trees over the dense key set `1..=n`.
//!
//! A [`Tree`] is one topology the structure can be in: parent/left/right
//! links stored as flat arrays, no balancing metadata. Trees are values;
//! every structural edit produces a new tree.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

/// Node label. Keys are always exactly `1..=n`.
pub type Key = u32;

/// Largest `n` accepted by [`enumerate_all_bsts`]; Catalan growth makes
/// exhaustive enumeration pointless beyond this.
pub const ENUMERATION_LIMIT: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    /// Key outside `1..=n`.
    KeyOutOfRange { key: Key, n: u32 },
    /// Rotation pivot has no parent.
    RotateRoot { key: Key },
    /// `enumerate_all_bsts` called outside its guard range.
    EnumerationGuard { n: u32 },
    /// Preorder code did not describe a BST on `1..=n`.
    MalformedCode { reason: String },
    EmptyTree,
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::KeyOutOfRange { key, n } => write!(f, "key {key} outside 1..={n}"),
            Self::RotateRoot { key } => write!(f, "cannot rotate {key} above its parent: it is the root"),
            Self::EnumerationGuard { n } => {
                write!(f, "n = {n} outside enumeration guard 1..={ENUMERATION_LIMIT}")
            }
            Self::MalformedCode { reason } => write!(f, "malformed tree code: {reason}"),
            Self::EmptyTree => write!(f, "tree must contain at least one key"),
        }
    }
}

impl std::error::Error for TreeError {}

/// A binary search tree over keys `1..=n`, stored as index arrays.
///
/// Invariants (enforced by every constructor):
/// - in-order traversal yields `1, 2, ..., n`,
/// - exactly one root, mutually consistent parent/child links,
/// - all `n` keys reachable from the root (`n - 1` edges, no cycles).
#[derive(Clone, PartialEq, Eq)]
pub struct Tree {
    n: u32,
    root: Key,
    // Slot 0 unused so keys index directly.
    parent: Vec<Option<Key>>,
    left: Vec<Option<Key>>,
    right: Vec<Option<Key>>,
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tree({})", self.to_code())
    }
}

/// Preorder serialization of a tree. The preorder walk of a BST on
/// `1..=n` determines the tree uniquely.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TreeCode(pub Vec<Key>);

impl fmt::Display for TreeCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for k in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for TreeCode {
    type Err = TreeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let keys = s
            .split(',')
            .map(|part| {
                part.trim()
                    .parse::<Key>()
                    .map_err(|e| TreeError::MalformedCode { reason: format!("bad key {part:?}: {e}") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TreeCode(keys))
    }
}

/// Builder used internally by the constructors: collects links, then
/// validates the whole structure once.
struct Links {
    n: u32,
    parent: Vec<Option<Key>>,
    left: Vec<Option<Key>>,
    right: Vec<Option<Key>>,
}

impl Links {
    fn new(n: u32) -> Self {
        let len = n as usize + 1;
        Links { n, parent: vec![None; len], left: vec![None; len], right: vec![None; len] }
    }

    fn attach(&mut self, parent: Key, child: Key) {
        if child < parent {
            self.left[parent as usize] = Some(child);
        } else {
            self.right[parent as usize] = Some(child);
        }
        self.parent[child as usize] = Some(parent);
    }

    fn into_tree(self, root: Key) -> Tree {
        let tree = Tree { n: self.n, root, parent: self.parent, left: self.left, right: self.right };
        debug_assert!(tree.check_invariants().is_ok(), "constructed tree violates invariants");
        tree
    }
}

impl Tree {
    /// Number of keys.
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn root(&self) -> Key {
        self.root
    }

    pub fn left(&self, k: Key) -> Option<Key> {
        self.left[k as usize]
    }

    pub fn right(&self, k: Key) -> Option<Key> {
        self.right[k as usize]
    }

    pub fn parent(&self, k: Key) -> Option<Key> {
        self.parent[k as usize]
    }

    fn check_key(&self, k: Key) -> Result<(), TreeError> {
        if k == 0 || k > self.n {
            Err(TreeError::KeyOutOfRange { key: k, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Edge count on the root-to-`u` path; the root itself is at depth 0.
    pub fn depth(&self, u: Key) -> Result<u32, TreeError> {
        self.check_key(u)?;
        let mut d = 0;
        let mut cur = u;
        while let Some(p) = self.parent[cur as usize] {
            d += 1;
            cur = p;
        }
        Ok(d)
    }

    /// Lowest common ancestor. In a BST this is the first node `w` on the
    /// root path with `min(u,v) <= w <= max(u,v)`.
    pub fn lca(&self, u: Key, v: Key) -> Result<Key, TreeError> {
        self.check_key(u)?;
        self.check_key(v)?;
        let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
        let mut cur = self.root;
        loop {
            if cur < lo {
                cur = self.right[cur as usize].expect("lca walk fell off the tree");
            } else if cur > hi {
                cur = self.left[cur as usize].expect("lca walk fell off the tree");
            } else {
                return Ok(cur);
            }
        }
    }

    /// Unweighted shortest-path length between `u` and `v`.
    pub fn distance(&self, u: Key, v: Key) -> Result<u32, TreeError> {
        let w = self.lca(u, v)?;
        Ok(self.depth(u)? + self.depth(v)? - 2 * self.depth(w)?)
    }

    /// A key of maximum depth; ties broken toward the smallest key so
    /// adaptive adversaries are deterministic.
    pub fn deepest_node(&self) -> Key {
        let depths = self.all_depths();
        let mut best = self.root;
        let mut best_d = 0;
        for k in 1..=self.n {
            let d = depths[k as usize];
            if d > best_d || (d == best_d && k < best) {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Depth of every key in one pass (index 0 unused).
    pub fn all_depths(&self) -> Vec<u32> {
        let mut depths = vec![0u32; self.n as usize + 1];
        let mut stack = vec![self.root];
        while let Some(k) = stack.pop() {
            let d = depths[k as usize];
            for child in [self.left[k as usize], self.right[k as usize]].into_iter().flatten() {
                depths[child as usize] = d + 1;
                stack.push(child);
            }
        }
        depths
    }

    /// Single rotation lifting `child` above its parent. The result is a
    /// valid BST on the same key set; applying the inverse rotation
    /// restores the original tree.
    pub fn rotate(&self, child: Key) -> Result<Tree, TreeError> {
        self.check_key(child)?;
        let parent = self.parent[child as usize].ok_or(TreeError::RotateRoot { key: child })?;
        let mut t = self.clone();
        let c = child as usize;
        let p = parent as usize;
        let grand = t.parent[p];

        // The child's inner subtree moves across to the parent.
        if t.left[p] == Some(child) {
            // Right rotation: child's right subtree becomes parent's left.
            let inner = t.right[c];
            t.left[p] = inner;
            if let Some(b) = inner {
                t.parent[b as usize] = Some(parent);
            }
            t.right[c] = Some(parent);
        } else {
            // Left rotation: child's left subtree becomes parent's right.
            let inner = t.left[c];
            t.right[p] = inner;
            if let Some(b) = inner {
                t.parent[b as usize] = Some(parent);
            }
            t.left[c] = Some(parent);
        }
        t.parent[p] = Some(child);
        t.parent[c] = grand;
        match grand {
            None => t.root = child,
            Some(g) => {
                let g = g as usize;
                if t.left[g] == Some(parent) {
                    t.left[g] = Some(child);
                } else {
                    t.right[g] = Some(child);
                }
            }
        }
        debug_assert!(t.check_invariants().is_ok());
        Ok(t)
    }

    /// Keys in symmetric order; always `1..=n` for a valid tree.
    pub fn in_order(&self) -> Vec<Key> {
        let mut out = Vec::with_capacity(self.n as usize);
        // Iterative in-order with explicit stack.
        let mut stack = Vec::new();
        let mut cur = Some(self.root);
        while cur.is_some() || !stack.is_empty() {
            while let Some(k) = cur {
                stack.push(k);
                cur = self.left[k as usize];
            }
            let k = stack.pop().unwrap();
            out.push(k);
            cur = self.right[k as usize];
        }
        out
    }

    /// Preorder serialization.
    pub fn to_code(&self) -> TreeCode {
        let mut out = Vec::with_capacity(self.n as usize);
        let mut stack = vec![self.root];
        while let Some(k) = stack.pop() {
            out.push(k);
            if let Some(r) = self.right[k as usize] {
                stack.push(r);
            }
            if let Some(l) = self.left[k as usize] {
                stack.push(l);
            }
        }
        TreeCode(out)
    }

    /// Rebuild a tree from its preorder code, validating that the code is
    /// a permutation of `1..=n` whose preorder walk respects BST order.
    pub fn from_code(code: &TreeCode) -> Result<Tree, TreeError> {
        let n = code.0.len() as u32;
        if n == 0 {
            return Err(TreeError::EmptyTree);
        }
        let mut seen = vec![false; n as usize + 1];
        for &k in &code.0 {
            if k == 0 || k > n {
                return Err(TreeError::MalformedCode { reason: format!("key {k} outside 1..={n}") });
            }
            if seen[k as usize] {
                return Err(TreeError::MalformedCode { reason: format!("duplicate key {k}") });
            }
            seen[k as usize] = true;
        }

        // Stack-based preorder reconstruction: each key hangs off the last
        // node whose interval admits it.
        let mut links = Links::new(n);
        let root = code.0[0];
        // (key, lower exclusive bound, upper exclusive bound)
        let mut stack: Vec<(Key, u32, u32)> = vec![(root, 0, n + 1)];
        for &k in &code.0[1..] {
            // Pop until k fits under the top's interval.
            while let Some(&(top, lo, hi)) = stack.last() {
                if k > lo && k < hi {
                    let _ = (top, lo, hi);
                    break;
                }
                stack.pop();
            }
            let &(top, lo, hi) = stack.last().ok_or_else(|| TreeError::MalformedCode {
                reason: "preorder violates BST order".to_string(),
            })?;
            if k < top {
                if links.left[top as usize].is_some() {
                    return Err(TreeError::MalformedCode {
                        reason: format!("two left children under {top}"),
                    });
                }
                links.attach(top, k);
                stack.push((k, lo, top));
            } else {
                links.attach(top, k);
                stack.pop();
                stack.push((k, top, hi));
            }
        }
        Ok(links.into_tree(root))
    }

    /// Midpoint-balanced tree on `1..=n`.
    pub fn balanced(n: u32) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::EmptyTree);
        }
        let mut links = Links::new(n);
        let root = build_balanced(&mut links, 1, n);
        Ok(links.into_tree(root))
    }

    /// Tree produced by inserting the keys of `order` (a permutation of
    /// `1..=n`) into an empty BST in sequence.
    pub fn from_insertion_order(order: &[Key]) -> Result<Tree, TreeError> {
        let n = order.len() as u32;
        if n == 0 {
            return Err(TreeError::EmptyTree);
        }
        let mut links = Links::new(n);
        let mut seen = vec![false; n as usize + 1];
        let root = order[0];
        for &k in order {
            if k == 0 || k > n {
                return Err(TreeError::KeyOutOfRange { key: k, n });
            }
            if seen[k as usize] {
                return Err(TreeError::MalformedCode { reason: format!("duplicate key {k}") });
            }
            seen[k as usize] = true;
        }
        for &k in &order[1..] {
            let mut cur = root;
            loop {
                let slot = if k < cur { &mut links.left[cur as usize] } else { &mut links.right[cur as usize] };
                match *slot {
                    Some(next) => cur = next,
                    None => {
                        links.attach(cur, k);
                        break;
                    }
                }
            }
        }
        Ok(links.into_tree(root))
    }

    /// Uniformly shuffled insertion order from the caller's generator;
    /// the sampling scheme used by the large-n property grids.
    pub fn random<R: Rng>(n: u32, rng: &mut R) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::EmptyTree);
        }
        let mut order: Vec<Key> = (1..=n).collect();
        order.shuffle(rng);
        Tree::from_insertion_order(&order)
    }

    /// Full structural validation; used by constructors in debug builds
    /// and by tests.
    pub fn check_invariants(&self) -> Result<(), TreeError> {
        if self.n == 0 {
            return Err(TreeError::EmptyTree);
        }
        if self.parent[self.root as usize].is_some() {
            return Err(TreeError::MalformedCode { reason: "root has a parent".into() });
        }
        let mut reached = 0u32;
        let mut stack = vec![self.root];
        while let Some(k) = stack.pop() {
            reached += 1;
            if reached > self.n {
                return Err(TreeError::MalformedCode { reason: "cycle detected".into() });
            }
            if let Some(l) = self.left[k as usize] {
                if l >= k || self.parent[l as usize] != Some(k) {
                    return Err(TreeError::MalformedCode { reason: format!("bad left link at {k}") });
                }
                stack.push(l);
            }
            if let Some(r) = self.right[k as usize] {
                if r <= k || self.parent[r as usize] != Some(k) {
                    return Err(TreeError::MalformedCode { reason: format!("bad right link at {k}") });
                }
                stack.push(r);
            }
        }
        if reached != self.n {
            return Err(TreeError::MalformedCode {
                reason: format!("{reached} of {} keys reachable", self.n),
            });
        }
        let inorder = self.in_order();
        if inorder.iter().copied().ne(1..=self.n) {
            return Err(TreeError::MalformedCode { reason: "in-order is not 1..=n".into() });
        }
        Ok(())
    }
}

fn build_balanced(links: &mut Links, lo: Key, hi: Key) -> Key {
    let mid = (lo + hi) / 2;
    if mid > lo {
        let l = build_balanced(links, lo, mid - 1);
        links.attach(mid, l);
    }
    if mid < hi {
        let r = build_balanced(links, mid + 1, hi);
        links.attach(mid, r);
    }
    mid
}

/// Every distinct BST shape on `1..=n`, exactly once, in a deterministic
/// order (recursive by root, left factor outermost).
pub fn enumerate_all_bsts(n: u32) -> Result<Vec<Tree>, TreeError> {
    if n == 0 || n > ENUMERATION_LIMIT {
        return Err(TreeError::EnumerationGuard { n });
    }
    // Each shape is its root plus a parent-child edge list.
    type Shape = (Key, Vec<(Key, Key)>);

    fn shapes(lo: Key, hi: Key, memo: &mut Vec<Vec<Option<Vec<Shape>>>>) -> Vec<Shape> {
        if lo > hi {
            return vec![(0, Vec::new())];
        }
        if let Some(cached) = &memo[lo as usize][hi as usize] {
            return cached.clone();
        }
        let mut out = Vec::new();
        for root in lo..=hi {
            let lefts = if root > lo { shapes(lo, root - 1, memo) } else { vec![(0, Vec::new())] };
            let rights = if root < hi { shapes(root + 1, hi, memo) } else { vec![(0, Vec::new())] };
            for (lroot, ledges) in &lefts {
                for (rroot, redges) in &rights {
                    let mut edges = Vec::with_capacity(ledges.len() + redges.len() + 2);
                    edges.extend_from_slice(ledges);
                    edges.extend_from_slice(redges);
                    if *lroot != 0 {
                        edges.push((root, *lroot));
                    }
                    if *rroot != 0 {
                        edges.push((root, *rroot));
                    }
                    out.push((root, edges));
                }
            }
        }
        memo[lo as usize][hi as usize] = Some(out.clone());
        out
    }

    let mut memo = vec![vec![None; n as usize + 1]; n as usize + 1];
    let all = shapes(1, n, &mut memo);
    let mut trees = Vec::with_capacity(all.len());
    for (root, edges) in all {
        let mut links = Links::new(n);
        for (p, c) in edges {
            links.attach(p, c);
        }
        trees.push(links.into_tree(root));
    }
    Ok(trees)
}

/// Catalan number C(n) via the standard recurrence; test oracle for the
/// enumeration count.
pub fn catalan(n: u32) -> u64 {
    let n = n as usize;
    let mut c = vec![0u64; n + 1];
    c[0] = 1;
    for i in 1..=n {
        for j in 0..i {
            c[i] += c[j] * c[i - 1 - j];
        }
    }
    c[n]
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Running-figure tree: root 5; 3 under 5 with children 2 (then 1) and 4;
    /// 7 under 5 with children 6 and 8.
    pub(crate) fn figure_tree() -> Tree {
        Tree::from_code(&"5,3,2,1,4,7,6,8".parse().unwrap()).unwrap()
    }

    #[test]
    fn depth_examples() {
        let t = figure_tree();
        assert_eq!(t.depth(1).unwrap(), 3);
        assert_eq!(t.depth(t.root()).unwrap(), 0);
        let path = Tree::from_insertion_order(&[1, 2, 3]).unwrap();
        assert_eq!(path.depth(3).unwrap(), 2);
        assert!(matches!(t.depth(9), Err(TreeError::KeyOutOfRange { .. })));
        assert!(matches!(t.depth(0), Err(TreeError::KeyOutOfRange { .. })));
    }

    #[test]
    fn lca_examples() {
        let t = figure_tree();
        assert_eq!(t.lca(1, 4).unwrap(), 3);
        assert_eq!(t.lca(6, 6).unwrap(), 6);
        let b = Tree::balanced(7).unwrap();
        assert_eq!(b.root(), 4);
        assert_eq!(b.lca(1, 3).unwrap(), 2);
    }

    #[test]
    fn distance_examples() {
        let t = figure_tree();
        assert_eq!(t.distance(1, 4).unwrap(), 3);
        assert_eq!(t.distance(4, 1).unwrap(), 3);
        assert_eq!(t.distance(2, 2).unwrap(), 0);
        let b = Tree::balanced(7).unwrap();
        assert_eq!(b.distance(1, 7).unwrap(), 4);
    }

    #[test]
    fn deepest_node_examples() {
        assert_eq!(figure_tree().deepest_node(), 1);
        assert_eq!(Tree::balanced(1).unwrap().deepest_node(), 1);
        let path = Tree::from_insertion_order(&[1, 2, 3]).unwrap();
        assert_eq!(path.deepest_node(), 3);
        // Tie broken toward the smallest key.
        let b = Tree::balanced(7).unwrap();
        assert_eq!(b.deepest_node(), 1);
    }

    #[test]
    fn rotate_lifts_child() {
        // Figure-2 shape: z=6 at the top, y=4 its left child, x=2 under y,
        // subtrees A={1}, B={3}, C={5}.
        let t = Tree::from_code(&"6,4,2,1,3,5".parse().unwrap()).unwrap();
        let r = t.rotate(2).unwrap();
        assert_eq!(r.to_code().to_string(), "6,2,1,4,3,5");
        // Inverse rotation restores the original.
        assert_eq!(r.rotate(4).unwrap(), t);

        let path = Tree::from_insertion_order(&[1, 2, 3]).unwrap();
        let r = path.rotate(2).unwrap();
        assert_eq!(r.root(), 2);
        assert_eq!(r.left(2), Some(1));
        assert_eq!(r.right(2), Some(3));

        assert!(matches!(path.rotate(1), Err(TreeError::RotateRoot { .. })));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_all_bsts(1).unwrap().len(), 1);
        assert_eq!(enumerate_all_bsts(3).unwrap().len(), 5);
        assert_eq!(enumerate_all_bsts(8).unwrap().len(), 1430);
        assert_eq!(catalan(3), 5);
        assert_eq!(catalan(8), 1430);
        assert!(enumerate_all_bsts(0).is_err());
        assert!(enumerate_all_bsts(13).is_err());
    }

    #[test]
    fn code_round_trip() {
        let single = Tree::balanced(1).unwrap();
        assert_eq!(single.to_code().to_string(), "1");
        assert_eq!(figure_tree().to_code().to_string(), "5,3,2,1,4,7,6,8");
        let t = Tree::from_code(&"2,1,3".parse().unwrap()).unwrap();
        assert_eq!(t.root(), 2);
        assert_eq!(t.left(2), Some(1));
        assert_eq!(t.right(2), Some(3));
    }

    #[test]
    fn malformed_codes_rejected() {
        assert!(Tree::from_code(&TreeCode(vec![1, 1])).is_err());
        assert!(Tree::from_code(&TreeCode(vec![2, 5, 1])).is_err());
        // Preorder 2,3,1 puts 1 after the walk has moved right of 2.
        assert!(Tree::from_code(&TreeCode(vec![2, 3, 1])).is_err());
        assert!(Tree::from_code(&TreeCode(vec![])).is_err());
        assert!("1,,2".parse::<TreeCode>().is_err());
    }

    #[test]
    fn balanced_shape() {
        let b = Tree::balanced(7).unwrap();
        assert_eq!(b.to_code().to_string(), "4,2,1,3,6,5,7");
        assert_eq!(Tree::balanced(3).unwrap().root(), 2);
    }

    #[test]
    fn insertion_order_tree() {
        let t = Tree::from_insertion_order(&[2, 1, 3]).unwrap();
        assert_eq!(t.to_code().to_string(), "2,1,3");
        let path = Tree::from_insertion_order(&[3, 2, 1]).unwrap();
        assert_eq!(path.depth(1).unwrap(), 2);
        assert!(Tree::from_insertion_order(&[1, 1]).is_err());
    }
}
