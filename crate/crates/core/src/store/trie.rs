//! Prefix-ordered trie over the rows of one relation.
//!
//! Nodes are laid out level by level. Every level keeps its nodes in
//! lexicographic order of their root paths, so the descendants of any
//! contiguous run of nodes are themselves contiguous at every deeper level.
//! That turns "how many distinct values of the next `k` columns sit under
//! this prefix" into a subtraction, and uniform sampling of a distinct
//! projection into a single random index.

use rand::Rng;

use super::Value;
use crate::error::{Error, Result};

#[derive(Debug, Default)]
struct Level {
    values: Vec<Value>,
    parent: Vec<u32>,
    /// `child_start[i]..child_start[i + 1]` are the children of node `i` on
    /// the next level. Left empty on the deepest level.
    child_start: Vec<u32>,
}

/// A matched prefix: the node reached after fixing `depth` leading columns.
/// `depth == 0` is the virtual root.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Prefix {
    depth: usize,
    node: u32,
}

impl Prefix {
    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Trie index of a relation under one column order.
#[derive(Debug)]
pub struct TrieIndex {
    order: Vec<usize>,
    levels: Vec<Level>,
    /// Multiplicity prefix sums over the deepest level.
    leaf_prefix: Vec<u64>,
}

impl TrieIndex {
    /// Builds the index over row-major `data` with `arity` columns, storing
    /// column `order[l]` at level `l`. `order` must be a permutation.
    pub(crate) fn build(data: &[Value], arity: usize, order: Vec<usize>) -> Self {
        debug_assert_eq!(order.len(), arity);
        let n = if arity == 0 { 0 } else { data.len() / arity };
        let key = |r: usize, l: usize| data[r * arity + order[l]];
        let mut rows: Vec<usize> = (0..n).collect();
        rows.sort_unstable_by(|&a, &b| {
            (0..arity)
                .map(|l| key(a, l).cmp(&key(b, l)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });

        let mut levels: Vec<Level> = (0..arity).map(|_| Level::default()).collect();
        let mut mult: Vec<u64> = Vec::new();
        let mut prev: Option<usize> = None;
        for &r in &rows {
            // First level at which this row leaves the previous row's path.
            let split = match prev {
                None => 0,
                Some(p) => (0..arity).find(|&l| key(p, l) != key(r, l)).unwrap_or(arity),
            };
            if split == arity {
                *mult.last_mut().expect("duplicate follows a row") += 1;
                continue;
            }
            for l in split..arity {
                let parent = if l == 0 {
                    0
                } else {
                    (levels[l - 1].values.len() - 1) as u32
                };
                if l + 1 < arity {
                    let next_len = levels[l + 1].values.len() as u32;
                    levels[l].child_start.push(next_len);
                }
                levels[l].values.push(key(r, l));
                levels[l].parent.push(parent);
            }
            mult.push(1);
            prev = Some(r);
        }
        for l in 0..arity.saturating_sub(1) {
            let end = levels[l + 1].values.len() as u32;
            levels[l].child_start.push(end);
        }
        let mut leaf_prefix = Vec::with_capacity(mult.len() + 1);
        leaf_prefix.push(0);
        let mut acc = 0;
        for m in mult {
            acc += m;
            leaf_prefix.push(acc);
        }
        TrieIndex {
            order,
            levels,
            leaf_prefix,
        }
    }

    /// Column of the relation stored at each level.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn arity(&self) -> usize {
        self.order.len()
    }

    /// Number of rows, counted with multiplicity.
    pub fn len(&self) -> u64 {
        *self.leaf_prefix.last().unwrap_or(&0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn root(&self) -> Prefix {
        Prefix { depth: 0, node: 0 }
    }

    fn child_span(&self, p: Prefix) -> (u32, u32) {
        if p.depth == 0 {
            (0, self.levels.first().map_or(0, |l| l.values.len() as u32))
        } else {
            let cs = &self.levels[p.depth - 1].child_start;
            (cs[p.node as usize], cs[p.node as usize + 1])
        }
    }

    /// Follows one more column from `p`.
    pub fn child(&self, p: Prefix, value: Value) -> Option<Prefix> {
        if p.depth >= self.arity() {
            return None;
        }
        let (lo, hi) = self.child_span(p);
        let vals = &self.levels[p.depth].values[lo as usize..hi as usize];
        let i = vals.binary_search(&value).ok()?;
        Some(Prefix {
            depth: p.depth + 1,
            node: lo + i as u32,
        })
    }

    /// Matches values of the leading `prefix.len()` columns of the order.
    pub fn seek(&self, prefix: &[Value]) -> Option<Prefix> {
        prefix
            .iter()
            .try_fold(self.root(), |p, &v| self.child(p, v))
    }

    /// Nodes on level `p.depth + k - 1` below `p`; `k >= 1`.
    fn span(&self, p: Prefix, k: usize) -> (u32, u32) {
        debug_assert!(k >= 1 && p.depth + k <= self.arity());
        let (mut lo, mut hi) = self.child_span(p);
        for l in p.depth..p.depth + k - 1 {
            let cs = &self.levels[l].child_start;
            lo = cs[lo as usize];
            hi = cs[hi as usize];
        }
        (lo, hi)
    }

    fn leaf_span(&self, p: Prefix) -> (u32, u32) {
        if p.depth == self.arity() {
            (p.node, p.node + 1)
        } else {
            self.span(p, self.arity() - p.depth)
        }
    }

    /// Rows below `p`, with multiplicity.
    pub fn count(&self, p: Prefix) -> u64 {
        if self.arity() == 0 {
            return 0;
        }
        let (lo, hi) = self.leaf_span(p);
        self.leaf_prefix[hi as usize] - self.leaf_prefix[lo as usize]
    }

    /// Distinct values of the `k` columns following `p`.
    pub fn distinct(&self, p: Prefix, k: usize) -> u64 {
        if k == 0 {
            return u64::from(self.count(p) > 0);
        }
        let (lo, hi) = self.span(p, k);
        u64::from(hi - lo)
    }

    /// Writes the values on levels `from..=level` of the path to `node`
    /// into `out[0..]`.
    fn path_values(&self, level: usize, mut node: u32, from: usize, out: &mut [Value]) {
        let mut l = level;
        loop {
            out[l - from] = self.levels[l].values[node as usize];
            if l == from {
                break;
            }
            node = self.levels[l].parent[node as usize];
            l -= 1;
        }
    }

    /// `i`-th distinct value (ascending) of the `k >= 1` columns after `p`.
    pub fn nth_distinct(&self, p: Prefix, k: usize, i: u64, out: &mut [Value]) -> Result<()> {
        let (lo, hi) = self.span(p, k);
        let len = u64::from(hi - lo);
        if i >= len {
            return Err(Error::OutOfRange {
                index: i as usize,
                len: len as usize,
            });
        }
        self.path_values(p.depth + k - 1, lo + i as u32, p.depth, out);
        Ok(())
    }

    /// Uniform draw over the distinct values of the `k >= 1` columns after `p`.
    pub fn sample_distinct<R: Rng + ?Sized>(
        &self,
        p: Prefix,
        k: usize,
        rng: &mut R,
        out: &mut [Value],
    ) -> bool {
        let (lo, hi) = self.span(p, k);
        if lo == hi {
            return false;
        }
        let node = rng.random_range(lo..hi);
        self.path_values(p.depth + k - 1, node, p.depth, out);
        true
    }

    /// Multiplicity-weighted row draw below `p`; writes the remaining
    /// `arity - p.depth` columns (in level order) into `out`.
    pub fn sample_below<R: Rng + ?Sized>(&self, p: Prefix, rng: &mut R, out: &mut [Value]) -> bool {
        let (lo, hi) = self.leaf_span(p);
        let (a, b) = (self.leaf_prefix[lo as usize], self.leaf_prefix[hi as usize]);
        if a == b {
            return false;
        }
        let r = rng.random_range(a..b);
        let leaf = self.leaf_prefix.partition_point(|&c| c <= r) - 1;
        if p.depth < self.arity() {
            self.path_values(self.arity() - 1, leaf as u32, p.depth, out);
        }
        true
    }

    /// Visits the distinct values of the `k >= 1` columns after `p`.
    pub fn for_each_distinct(&self, p: Prefix, k: usize, mut f: impl FnMut(&[Value])) {
        let (lo, hi) = self.span(p, k);
        let mut buf = vec![0; k];
        for node in lo..hi {
            self.path_values(p.depth + k - 1, node, p.depth, &mut buf);
            f(&buf);
        }
    }

    /// Multiplicity of a full row, given column-indexed values.
    pub fn exist(&self, row: &[Value]) -> bool {
        let prefix: Vec<Value> = self.order.iter().map(|&c| row[c]).collect();
        self.seek(&prefix).is_some_and(|p| self.count(p) > 0)
    }

    /// Translates a column-indexed partial tuple into a prefix of the order.
    fn prefix_of(&self, s: &[Option<Value>]) -> Result<Vec<Value>> {
        let bound = s.iter().filter(|v| v.is_some()).count();
        self.order[..bound]
            .iter()
            .map(|&c| s.get(c).copied().flatten().ok_or(Error::UnsupportedOrder))
            .collect()
    }

    /// `|R ⋉ s|` with multiplicity, for a column-indexed partial tuple.
    pub fn degree(&self, s: &[Option<Value>]) -> Result<u64> {
        let prefix = self.prefix_of(s)?;
        Ok(self.seek(&prefix).map_or(0, |p| self.count(p)))
    }

    /// `i`-th distinct value of the columns `cols` under `s`, where `s`
    /// followed by `cols` must be a prefix of the order.
    pub fn access(&self, s: &[Option<Value>], cols: &[usize], i: usize) -> Result<Vec<Value>> {
        let view = self.project_view(s, cols, true)?;
        let mut out = vec![0; cols.len()];
        match view.prefix {
            Some(p) if !cols.is_empty() => self.nth_distinct(p, cols.len(), i as u64, &mut out)?,
            _ => return Err(Error::OutOfRange { index: i, len: 0 }),
        }
        Ok(self.reorder(&out, view.depth, cols))
    }

    /// Row-weighted sample of `R ⋉ s`, returned column-indexed.
    pub fn sample_row<R: Rng + ?Sized>(&self, s: &[Option<Value>], rng: &mut R) -> Result<Vec<Value>> {
        let prefix = self.prefix_of(s)?;
        let p = self.seek(&prefix).ok_or(Error::Empty)?;
        let mut tail = vec![0; self.arity() - p.depth];
        if !self.sample_below(p, rng, &mut tail) {
            return Err(Error::Empty);
        }
        let mut row = vec![0; self.arity()];
        for (l, &c) in self.order.iter().enumerate() {
            row[c] = if l < p.depth { prefix[l] } else { tail[l - p.depth] };
        }
        Ok(row)
    }

    /// Handle on `π_cols(R ⋉ s)`.
    pub fn project_view(&self, s: &[Option<Value>], cols: &[usize], dedup: bool) -> Result<View<'_>> {
        let prefix = self.prefix_of(s)?;
        let d = prefix.len();
        let mut want: Vec<usize> = cols.to_vec();
        want.sort_unstable();
        let mut have: Vec<usize> = self.order[d..(d + cols.len()).min(self.arity())].to_vec();
        have.sort_unstable();
        if want != have {
            return Err(Error::UnsupportedOrder);
        }
        Ok(View {
            index: self,
            prefix: self.seek(&prefix),
            depth: d,
            k: cols.len(),
            dedup,
        })
    }

    /// Reorders level-ordered values of the levels after `depth` into the
    /// caller's column order `cols`.
    fn reorder(&self, level_vals: &[Value], depth: usize, cols: &[usize]) -> Vec<Value> {
        cols.iter()
            .map(|c| {
                let l = self.order.iter().position(|o| o == c).expect("column in order");
                level_vals[l - depth]
            })
            .collect()
    }
}

/// Lightweight handle on `π_I(R ⋉ s)` for a prefix `s` and the next `k`
/// columns `I` of an index order.
#[derive(Clone, Copy, Debug)]
pub struct View<'a> {
    index: &'a TrieIndex,
    prefix: Option<Prefix>,
    depth: usize,
    k: usize,
    dedup: bool,
}

impl View<'_> {
    /// Distinct `I`-values when deduplicating, rows of `R ⋉ s` otherwise.
    pub fn size(&self) -> u64 {
        match self.prefix {
            None => 0,
            Some(p) if self.dedup => self.index.distinct(p, self.k),
            Some(p) => self.index.count(p),
        }
    }

    /// Distinct `I`-values in ascending order, in index-level order.
    pub fn iter(&self) -> Vec<Vec<Value>> {
        let mut out = Vec::new();
        if let Some(p) = self.prefix {
            if self.k > 0 {
                self.index.for_each_distinct(p, self.k, |v| out.push(v.to_vec()));
            } else if self.index.count(p) > 0 {
                out.push(Vec::new());
            }
        }
        out
    }

    /// Uniform distinct value (dedup) or row-weighted value; `None` if empty.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Vec<Value>> {
        let p = self.prefix?;
        if self.k == 0 {
            return (self.index.count(p) > 0).then(Vec::new);
        }
        let mut out = vec![0; self.k];
        if self.dedup {
            self.index.sample_distinct(p, self.k, rng, &mut out).then_some(out)
        } else {
            let mut tail = vec![0; self.index.arity() - self.depth];
            if !self.index.sample_below(p, rng, &mut tail) {
                return None;
            }
            out.copy_from_slice(&tail[..self.k]);
            Some(out)
        }
    }
}
