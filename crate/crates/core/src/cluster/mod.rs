//! The interval algorithm on `N` simulated nodes.
//!
//! Node 0 holds the operands, picks the interval bounds and broadcasts
//! everything. Each node counts the products of a contiguous slice of
//! intervals, node 0 gathers the counts, cuts the intervals into `N`
//! consecutive ranges of roughly equal work and sends every node its range.
//! Nodes multiply their range with their own worker pool and node 0 gathers
//! the partial results in node order, which is also exponent order.
//!
//! Nodes are threads that talk only through a [`Transport`]. Interval indices
//! are 0-based and ranges half-open.

pub mod transport;
pub mod wire;

use std::ops::Range;
use std::sync::Arc;

use thiserror::Error;

use crate::coeff::Coeff;
use crate::error::Error;
use crate::exponent::Exponent;
use crate::merge::{concat, IntervalResult};
use crate::parmul::{orient, process_intervals, MulConfig};
use crate::poly::{PolySpace, Polynomial};
use crate::split::{find_edge_into, select_grid, Edge, SplitSet};

pub use transport::{LocalTransport, Payload, Transport, TransportError, TransportStats};
use wire::{Reader, WireError, Writer, BCAST_OPERANDS, OPCOUNTS, RANGE, RESULT};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("transport: {0}")]
    Transport(#[from] TransportError),
    #[error("protocol violation at node {node}: {msg}")]
    Protocol { node: usize, msg: String },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("node {0} panicked")]
    NodePanic(usize),
}

impl ClusterError {
    fn wire(node: usize, e: WireError) -> ClusterError {
        ClusterError::Protocol { node, msg: e.0 }
    }
}

type ClusterResult<T> = std::result::Result<T, ClusterError>;

/// Assignment of intervals to nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterPlan {
    pub nodes: usize,
    /// Node `r` multiplies intervals `ranges[r]`.
    pub ranges: Vec<Range<usize>>,
    /// Products per interval.
    pub op_counts: Vec<u64>,
}

impl ClusterPlan {
    pub fn new(op_counts: Vec<u64>, nodes: usize) -> ClusterPlan {
        ClusterPlan {
            nodes,
            ranges: partition_by_ops(&op_counts, nodes),
            op_counts,
        }
    }

    /// Products assigned to each node.
    pub fn loads(&self) -> Vec<u64> {
        self.ranges
            .iter()
            .map(|r| self.op_counts[r.clone()].iter().sum())
            .collect()
    }

    pub fn total_ops(&self) -> u64 {
        self.op_counts.iter().sum()
    }

    pub fn max_op(&self) -> u64 {
        self.op_counts.iter().copied().max().unwrap_or(0)
    }
}

/// Greedy prefix split of `ops` into `nodes` consecutive ranges. Range `r`
/// ends at the first cut where the running sum reaches `(r + 1) / nodes` of
/// the total, so every load is within `max(ops)` of the average.
pub fn partition_by_ops(ops: &[u64], nodes: usize) -> Vec<Range<usize>> {
    assert!(nodes >= 1, "partition needs at least one node");
    let total: u128 = ops.iter().map(|&o| o as u128).sum();
    let n = nodes as u128;
    let mut ranges = Vec::with_capacity(nodes);
    let mut start = 0;
    let mut end = 0;
    let mut cum: u128 = 0;
    for r in 0..nodes {
        if r + 1 == nodes {
            end = ops.len();
        } else {
            let threshold = (r as u128 + 1) * total;
            while end < ops.len() && cum * n < threshold {
                cum += ops[end] as u128;
                end += 1;
            }
        }
        ranges.push(start..end);
        start = end;
    }
    ranges
}

/// Intervals whose products node `r` counts: contiguous chunks.
pub fn count_slice(intervals: usize, nodes: usize, r: usize) -> Range<usize> {
    intervals * r / nodes..intervals * (r + 1) / nodes
}

/// Outcome of a cluster multiplication.
#[derive(Clone, Debug)]
pub struct ClusterRun<C: Coeff> {
    pub product: Polynomial<C>,
    pub plan: ClusterPlan,
    pub stats: TransportStats,
}

/// Runs the protocol over a fresh [`LocalTransport`].
pub fn cluster_mul_local<C: Coeff>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    cfg: &MulConfig,
    nodes: usize,
) -> ClusterResult<ClusterRun<C>> {
    cluster_mul(a, b, cfg, &LocalTransport::new(nodes))
}

/// `a * b` on `transport.nodes()` nodes; the caller plays node 0 and `cfg`
/// is the worker configuration of every node.
pub fn cluster_mul<C: Coeff, T: Transport>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    cfg: &MulConfig,
    transport: &T,
) -> ClusterResult<ClusterRun<C>> {
    a.check_product_fits(b)?;
    let nodes = transport.nodes();
    std::thread::scope(|scope| {
        let workers: Vec<_> = (1..nodes)
            .map(|r| {
                scope.spawn(move || {
                    let _guard = AbortOnPanic(transport);
                    let out = worker_node::<C, T>(r, cfg, transport);
                    if let Err(e) = &out {
                        transport.abort(&format!("node {r}: {e}"));
                    }
                    out
                })
            })
            .collect();
        let master = {
            let _guard = AbortOnPanic(transport);
            master_node(a, b, cfg, transport)
        };
        if let Err(e) = &master {
            transport.abort(&format!("node 0: {e}"));
        }
        let mut errors = Vec::new();
        let master = master.map_err(|e| errors.push(e)).ok();
        for (i, h) in workers.into_iter().enumerate() {
            match h.join() {
                Ok(Ok(())) => {}
                Ok(Err(e)) => errors.push(e),
                Err(_) => errors.push(ClusterError::NodePanic(i + 1)),
            }
        }
        // The node that failed first explains the aborts seen by the others.
        let aborted =
            |e: &ClusterError| matches!(e, ClusterError::Transport(TransportError::Aborted(_)));
        if let Some(k) = errors
            .iter()
            .position(|e| !aborted(e))
            .or((!errors.is_empty()).then_some(0))
        {
            return Err(errors.swap_remove(k));
        }
        let (product, plan) = master.expect("no error recorded");
        Ok(ClusterRun {
            product,
            plan,
            stats: transport.stats(),
        })
    })
}

struct AbortOnPanic<'t, T: Transport>(&'t T);

impl<T: Transport> Drop for AbortOnPanic<'_, T> {
    fn drop(&mut self) {
        if std::thread::panicking() {
            self.0.abort("a node panicked");
        }
    }
}

fn op_counts(a: &[Exponent], b: &[Exponent], split: &SplitSet, ks: Range<usize>) -> Vec<u64> {
    let mut edge = Edge::default();
    ks.map(|k| {
        let (lo, hi) = split.interval(k);
        find_edge_into(&mut edge, a, b, lo, hi);
        edge.count_ops()
    })
    .collect()
}

fn result_frame<C: Coeff>(parts: &[IntervalResult<C>]) -> Vec<u8> {
    let exps: Vec<Exponent> = parts.iter().flat_map(|p| p.exps.iter().copied()).collect();
    Writer::new(RESULT)
        .terms(&exps, parts.iter().flat_map(|p| p.coeffs.iter()))
        .finish()
}

fn master_node<C: Coeff, T: Transport>(
    a: &Polynomial<C>,
    b: &Polynomial<C>,
    cfg: &MulConfig,
    transport: &T,
) -> ClusterResult<(Polynomial<C>, ClusterPlan)> {
    let nodes = transport.nodes();
    let space = a.space();
    let (rows, cols) = orient(a, b);
    // An empty operand still runs the protocol, over zero intervals.
    let split = if rows.is_zero() || cols.is_zero() {
        SplitSet::from_trusted(vec![Exponent::END])
    } else {
        select_grid(rows.exponents(), cols.exponents(), cfg.grid)
    };

    let frame = Writer::new(BCAST_OPERANDS)
        .u8(C::WIRE_TAG)
        .space(space)
        .poly(rows)
        .poly(cols)
        .u64s(split.bounds().iter().map(|e| e.raw()))
        .finish();
    transport.broadcast(0, frame)?;

    let intervals = split.intervals();
    let mut ops = op_counts(
        rows.exponents(),
        cols.exponents(),
        &split,
        count_slice(intervals, nodes, 0),
    );
    for r in 1..nodes {
        let msg = transport.receive(0, r)?;
        let mut rd = Reader::open(&msg, OPCOUNTS).map_err(|e| ClusterError::wire(0, e))?;
        let first = rd.u64().map_err(|e| ClusterError::wire(0, e))? as usize;
        let counts = rd.u64s().map_err(|e| ClusterError::wire(0, e))?;
        rd.finish().map_err(|e| ClusterError::wire(0, e))?;
        let expected = count_slice(intervals, nodes, r);
        if first != expected.start || counts.len() != expected.len() {
            return Err(ClusterError::Protocol {
                node: 0,
                msg: format!(
                    "node {r} counted intervals {first}+{} instead of {expected:?}",
                    counts.len()
                ),
            });
        }
        ops.extend(counts);
    }

    let plan = ClusterPlan::new(ops, nodes);
    for r in 1..nodes {
        let range = &plan.ranges[r];
        transport.send(
            0,
            r,
            Writer::new(RANGE)
                .u64(range.start as u64)
                .u64(range.end as u64)
                .finish(),
        )?;
    }

    let (mut parts, _) = process_intervals(rows, cols, &split, plan.ranges[0].clone(), cfg);
    for r in 1..nodes {
        let msg = transport.receive(0, r)?;
        let mut rd = Reader::open(&msg, RESULT).map_err(|e| ClusterError::wire(0, e))?;
        let (exps, coeffs) = rd.terms::<C>().map_err(|e| ClusterError::wire(0, e))?;
        rd.finish().map_err(|e| ClusterError::wire(0, e))?;
        parts.push(IntervalResult { exps, coeffs });
    }
    let ordered = parts.windows(2).all(|w| {
        w[0].exps
            .last()
            .zip(w[1].exps.first())
            .is_none_or(|(x, y)| x < y)
    });
    if !ordered {
        return Err(ClusterError::Protocol {
            node: 0,
            msg: "gathered results out of order".into(),
        });
    }
    Ok((concat(space, parts), plan))
}

fn worker_node<C: Coeff, T: Transport>(
    r: usize,
    cfg: &MulConfig,
    transport: &T,
) -> ClusterResult<()> {
    let nodes = transport.nodes();
    let wire = |e| ClusterError::wire(r, e);

    let msg = transport.receive(r, 0)?;
    let mut rd = Reader::open(&msg, BCAST_OPERANDS).map_err(wire)?;
    let tag = rd.u8().map_err(wire)?;
    if tag != C::WIRE_TAG {
        return Err(ClusterError::Protocol {
            node: r,
            msg: format!(
                "coefficient tag {tag}, expected {} ({})",
                C::WIRE_TAG,
                C::NAME
            ),
        });
    }
    let space: Arc<PolySpace> = rd.space().map_err(wire)?;
    let a: Polynomial<C> = rd.poly(&space).map_err(wire)?;
    let b: Polynomial<C> = rd.poly(&space).map_err(wire)?;
    let bounds: Vec<Exponent> = rd
        .u64s()
        .map_err(wire)?
        .into_iter()
        .map(Exponent::from_raw)
        .collect();
    rd.finish().map_err(wire)?;
    let split = if a.is_zero() || b.is_zero() {
        SplitSet::from_trusted(bounds)
    } else {
        SplitSet::from_bounds(a.exponents(), b.exponents(), bounds)?
    };

    let mine = count_slice(split.intervals(), nodes, r);
    let counts = op_counts(a.exponents(), b.exponents(), &split, mine.clone());
    transport.send(
        r,
        0,
        Writer::new(OPCOUNTS)
            .u64(mine.start as u64)
            .u64s(counts)
            .finish(),
    )?;

    let msg = transport.receive(r, 0)?;
    let mut rd = Reader::open(&msg, RANGE).map_err(wire)?;
    let l1 = rd.u64().map_err(wire)? as usize;
    let l2 = rd.u64().map_err(wire)? as usize;
    rd.finish().map_err(wire)?;
    if l1 > l2 || l2 > split.intervals() {
        return Err(ClusterError::Protocol {
            node: r,
            msg: format!("range {l1}..{l2} outside 0..{}", split.intervals()),
        });
    }

    let (parts, _) = process_intervals(&a, &b, &split, l1..l2, cfg);
    transport.send(r, 0, result_frame(&parts))?;
    Ok(())
}
