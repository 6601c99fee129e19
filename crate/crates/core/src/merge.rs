//! Sequential merging of the products that fall inside one interval.
//!
//! Each merger reads the operands and an [`Edge`] and produces the sorted,
//! combined terms of that interval. Mergers own their scratch buffers, so a
//! worker keeps one merger for its whole lifetime and resets it between
//! intervals.

use std::str::FromStr;
use std::sync::Arc;

use crate::coeff::Coeff;
use crate::exponent::Exponent;
use crate::poly::{PolySpace, Polynomial};
use crate::split::Edge;

/// Sorted terms of one interval (the container `D_k`).
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalResult<C> {
    pub exps: Vec<Exponent>,
    pub coeffs: Vec<C>,
}

impl<C> Default for IntervalResult<C> {
    fn default() -> Self {
        IntervalResult {
            exps: Vec::new(),
            coeffs: Vec::new(),
        }
    }
}

impl<C> IntervalResult<C> {
    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum MergerKind {
    #[default]
    Heap,
    Tree,
}

impl MergerKind {
    pub fn name(self) -> &'static str {
        match self {
            MergerKind::Heap => "heap",
            MergerKind::Tree => "tree",
        }
    }
}

impl FromStr for MergerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "heap" => Ok(MergerKind::Heap),
            "tree" => Ok(MergerKind::Tree),
            other => Err(format!("unknown merger `{other}` (expected heap or tree)")),
        }
    }
}

/// Either merger behind one interface, so workers can be generic over the
/// choice made at run time.
pub enum Merger<C: Coeff> {
    Heap(HeapMerger),
    Tree(TreeMerger<C>),
}

impl<C: Coeff> Merger<C> {
    pub fn new(kind: MergerKind) -> Self {
        match kind {
            MergerKind::Heap => Merger::Heap(HeapMerger::default()),
            MergerKind::Tree => Merger::Tree(TreeMerger::default()),
        }
    }

    pub fn merge(
        &mut self,
        a: &Polynomial<C>,
        b: &Polynomial<C>,
        edge: &Edge,
    ) -> IntervalResult<C> {
        match self {
            Merger::Heap(h) => h.merge(a, b, edge),
            Merger::Tree(t) => t.merge(a, b, edge),
        }
    }
}

pub fn heap_merge<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    edge: &Edge,
) -> IntervalResult<C> {
    HeapMerger::default().merge(a, b, edge)
}

pub fn tree_merge<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    edge: &Edge,
) -> IntervalResult<C> {
    TreeMerger::default().merge(a, b, edge)
}

/// Heap node: an exponent and the first row of the chain of rows whose
/// current product has that exponent.
#[derive(Clone, Copy, Debug)]
struct HeapEntry {
    exp: Exponent,
    head: u32,
}

const NIL: u32 = u32::MAX;

/// Binary min-heap merger holding at most one product per row.
///
/// Rows whose current products share an exponent met on the way up are
/// chained behind a single heap node, so dense products keep the heap small.
/// All entries with the minimal exponent are taken together and summed
/// before any successor is pushed back.
#[derive(Debug, Default)]
pub struct HeapMerger {
    heap: Vec<HeapEntry>,
    /// Per row: current column and next row in the same chain.
    col: Vec<u32>,
    next: Vec<u32>,
    popped: Vec<u32>,
    comparisons: u64,
}

impl HeapMerger {
    /// Exponent comparisons made by the heap since construction.
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    fn push(&mut self, exp: Exponent, row: u32) {
        // Find the slot first so an equal exponent on the path can take the
        // row into its chain without moving anything.
        let mut pos = self.heap.len();
        while pos > 0 {
            let parent = (pos - 1) / 2;
            let pe = self.heap[parent].exp;
            self.comparisons += 1;
            if pe == exp {
                self.next[row as usize] = self.heap[parent].head;
                self.heap[parent].head = row;
                return;
            }
            if pe < exp {
                break;
            }
            pos = parent;
        }
        let slot = pos;
        let mut pos = self.heap.len();
        self.heap.push(HeapEntry { exp, head: row });
        while pos > slot {
            let parent = (pos - 1) / 2;
            self.heap[pos] = self.heap[parent];
            pos = parent;
        }
        self.next[row as usize] = NIL;
        self.heap[slot] = HeapEntry { exp, head: row };
    }

    fn pop(&mut self) -> Option<HeapEntry> {
        let last = self.heap.pop()?;
        if self.heap.is_empty() {
            return Some(last);
        }
        let top = self.heap[0];
        let n = self.heap.len();
        let mut pos = 0;
        loop {
            let left = 2 * pos + 1;
            if left >= n {
                break;
            }
            let right = left + 1;
            let mut child = left;
            if right < n {
                self.comparisons += 1;
                if self.heap[right].exp < self.heap[left].exp {
                    child = right;
                }
            }
            self.comparisons += 1;
            if self.heap[child].exp < last.exp {
                self.heap[pos] = self.heap[child];
                pos = child;
            } else {
                break;
            }
        }
        self.heap[pos] = last;
        Some(top)
    }

    pub fn merge<C: Coeff>(
        &mut self,
        a: &Polynomial<C>,
        b: &Polynomial<C>,
        edge: &Edge,
    ) -> IntervalResult<C> {
        let (ae, ac) = (a.exponents(), a.coeffs());
        let (be, bc) = (b.exponents(), b.coeffs());
        self.heap.clear();
        if self.col.len() < edge.rows() {
            self.col.resize(edge.rows(), 0);
            self.next.resize(edge.rows(), NIL);
        }
        for (i, &ea) in ae.iter().enumerate().take(edge.rows()) {
            let run = edge.row(i);
            if !run.is_empty() {
                self.col[i] = run.start as u32;
                self.push(ea.add_unchecked(be[run.start]), i as u32);
            }
        }

        let mut out = IntervalResult::default();
        while let Some(first) = self.pop() {
            let exp = first.exp;
            self.popped.clear();
            let mut chain = first.head;
            while chain != NIL {
                self.popped.push(chain);
                chain = self.next[chain as usize];
            }
            while let Some(top) = self.heap.first() {
                self.comparisons += 1;
                if top.exp != exp {
                    break;
                }
                let mut chain = self.pop().unwrap().head;
                while chain != NIL {
                    self.popped.push(chain);
                    chain = self.next[chain as usize];
                }
            }
            let mut acc = C::acc_zero();
            for &r in &self.popped {
                C::acc_add_mul(
                    &mut acc,
                    &ac[r as usize],
                    &bc[self.col[r as usize] as usize],
                );
            }
            for k in 0..self.popped.len() {
                let row = self.popped[k];
                let next = self.col[row as usize] as usize + 1;
                if next < edge.row(row as usize).end {
                    self.col[row as usize] = next as u32;
                    self.push(ae[row as usize].add_unchecked(be[next]), row);
                }
            }
            let c = C::acc_finish(acc);
            if !c.is_zero() {
                out.exps.push(exp);
                out.coeffs.push(c);
            }
        }
        out
    }
}

const FANOUT: usize = 16;
const LEVELS: usize = 16;

/// 16-ary radix tree over the nibbles of packed exponents.
///
/// Level `d` is indexed by nibble `d` counted from the most significant end,
/// so an in-order walk visits exponents in ascending order. Internal nodes
/// live in an arena of child tables; slot value 0 means "no child" (the root
/// is node 0 and is never anyone's child). At the last level a slot holds
/// `leaf index + 1`.
///
/// Consecutive insertions usually share a long prefix, so the path of the
/// previous insertion is cached and the descent restarts at the first
/// differing nibble.
#[derive(Debug)]
pub struct TreeMerger<C: Coeff> {
    nodes: Vec<[u32; FANOUT]>,
    leaves: Vec<(Exponent, Option<C::Acc>)>,
    path: [u32; LEVELS],
    last: Option<(Exponent, u32)>,
}

impl<C: Coeff> Default for TreeMerger<C> {
    fn default() -> Self {
        TreeMerger {
            nodes: vec![[0; FANOUT]],
            leaves: Vec::new(),
            path: [0; LEVELS],
            last: None,
        }
    }
}

#[inline(always)]
fn nibble(e: Exponent, level: usize) -> usize {
    ((e.raw() >> (60 - 4 * level)) & 0xf) as usize
}

impl<C: Coeff> TreeMerger<C> {
    fn reset(&mut self) {
        self.nodes.truncate(1);
        self.nodes[0] = [0; FANOUT];
        self.leaves.clear();
        self.last = None;
    }

    /// Number of arena nodes in use (root included).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn insert(&mut self, exp: Exponent, a: &C, b: &C) {
        let start = match self.last {
            Some((prev, leaf)) if prev == exp => {
                C::acc_add_mul(self.leaves[leaf as usize].1.as_mut().unwrap(), a, b);
                return;
            }
            Some((prev, _)) => ((prev.raw() ^ exp.raw()).leading_zeros() / 4) as usize,
            None => 0,
        };
        let mut node = self.path[start] as usize;
        for level in start..LEVELS - 1 {
            let nib = nibble(exp, level);
            let mut child = self.nodes[node][nib] as usize;
            if child == 0 {
                child = self.nodes.len();
                self.nodes.push([0; FANOUT]);
                self.nodes[node][nib] = child as u32;
            }
            node = child;
            self.path[level + 1] = node as u32;
        }
        let nib = nibble(exp, LEVELS - 1);
        let slot = self.nodes[node][nib];
        let leaf = if slot == 0 {
            let mut acc = C::acc_zero();
            C::acc_add_mul(&mut acc, a, b);
            self.leaves.push((exp, Some(acc)));
            let leaf = self.leaves.len() as u32 - 1;
            self.nodes[node][nib] = leaf + 1;
            leaf
        } else {
            let leaf = slot - 1;
            C::acc_add_mul(self.leaves[leaf as usize].1.as_mut().unwrap(), a, b);
            leaf
        };
        self.last = Some((exp, leaf));
    }

    /// Walks the tree in nibble order, moving every non-zero leaf out.
    pub fn flatten(&mut self) -> IntervalResult<C> {
        let mut out = IntervalResult::default();
        out.exps.reserve(self.leaves.len());
        out.coeffs.reserve(self.leaves.len());
        let mut stack: Vec<(u32, u8, u8)> = Vec::with_capacity(LEVELS);
        if !self.leaves.is_empty() {
            stack.push((0, 0, 0));
        }
        while let Some(top) = stack.last_mut() {
            let (node, level, nib) = *top;
            if nib as usize == FANOUT {
                stack.pop();
                continue;
            }
            top.2 += 1;
            let slot = self.nodes[node as usize][nib as usize];
            if slot == 0 {
                continue;
            }
            if level as usize == LEVELS - 1 {
                let leaf = &mut self.leaves[slot as usize - 1];
                let c = C::acc_finish(leaf.1.take().expect("leaf visited once"));
                if !c.is_zero() {
                    out.exps.push(leaf.0);
                    out.coeffs.push(c);
                }
            } else {
                stack.push((slot, level + 1, 0));
            }
        }
        self.reset();
        out
    }

    pub fn merge(
        &mut self,
        a: &Polynomial<C>,
        b: &Polynomial<C>,
        edge: &Edge,
    ) -> IntervalResult<C> {
        self.reset();
        let (ae, ac) = (a.exponents(), a.coeffs());
        let (be, bc) = (b.exponents(), b.coeffs());
        for i in 0..edge.rows() {
            for j in edge.row(i) {
                self.insert(ae[i].add_unchecked(be[j]), &ac[i], &bc[j]);
            }
        }
        self.flatten()
    }
}

/// Concatenates interval containers given in ascending interval order.
pub fn concat<C: Coeff>(
    space: &Arc<PolySpace>,
    results: impl IntoIterator<Item = IntervalResult<C>>,
) -> Polynomial<C> {
    let mut exps = Vec::new();
    let mut coeffs = Vec::new();
    for r in results {
        debug_assert!(
            exps.last().zip(r.exps.first()).is_none_or(|(x, y)| x < y),
            "interval containers out of order"
        );
        if exps.is_empty() {
            exps = r.exps;
            coeffs = r.coeffs;
        } else {
            exps.extend(r.exps);
            coeffs.extend(r.coeffs);
        }
    }
    Polynomial::from_canonical_parts(space.clone(), exps, coeffs)
}
