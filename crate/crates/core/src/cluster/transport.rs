//! Message passing between simulated nodes.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};

use thiserror::Error;

/// Shared, immutable message body. A broadcast hands the same buffer to
/// every receiver.
pub type Payload = Arc<[u8]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("node {node} out of range for a {nodes}-node transport")]
    NoSuchNode { node: usize, nodes: usize },
    #[error("transport aborted: {0}")]
    Aborted(String),
    #[error("send from node {from} to node {to} failed: {msg}")]
    SendFailed { from: usize, to: usize, msg: String },
}

/// Message and byte counters. A broadcast counts as one message carrying its
/// payload once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TransportStats {
    pub messages: u64,
    pub bytes: u64,
    /// Message count per frame tag (the first payload byte).
    pub by_tag: [u64; 8],
}

impl TransportStats {
    fn record(&mut self, payload: &[u8]) {
        self.messages += 1;
        self.bytes += payload.len() as u64;
        if let Some(&tag) = payload.first() {
            if let Some(slot) = self.by_tag.get_mut(tag as usize) {
                *slot += 1;
            }
        }
    }
}

/// Point-to-point FIFO channels between `nodes()` endpoints.
///
/// Implementations must deliver messages from one sender to one receiver in
/// order and without loss, and must be usable from all nodes concurrently.
pub trait Transport: Send + Sync {
    fn nodes(&self) -> usize;

    fn send(&self, from: usize, to: usize, payload: Vec<u8>) -> Result<(), TransportError>;

    /// Delivers one payload to every node except `from`.
    fn broadcast(&self, from: usize, payload: Vec<u8>) -> Result<(), TransportError>;

    /// Blocks until the next message from `from` to `at` arrives.
    fn receive(&self, at: usize, from: usize) -> Result<Payload, TransportError>;

    /// Fails every pending and future `receive`. Used when a node gives up so
    /// that its peers do not wait forever.
    fn abort(&self, reason: &str);

    fn stats(&self) -> TransportStats;
}

struct State {
    /// Queue `to * nodes + from`.
    queues: Vec<VecDeque<Payload>>,
    aborted: Option<String>,
    stats: TransportStats,
}

/// In-process transport backed by one queue per (receiver, sender) pair.
pub struct LocalTransport {
    nodes: usize,
    state: Mutex<State>,
    ready: Condvar,
}

impl LocalTransport {
    pub fn new(nodes: usize) -> LocalTransport {
        assert!(nodes >= 1, "a transport needs at least one node");
        LocalTransport {
            nodes,
            state: Mutex::new(State {
                queues: (0..nodes * nodes).map(|_| VecDeque::new()).collect(),
                aborted: None,
                stats: TransportStats::default(),
            }),
            ready: Condvar::new(),
        }
    }

    fn check(&self, node: usize) -> Result<(), TransportError> {
        if node < self.nodes {
            Ok(())
        } else {
            Err(TransportError::NoSuchNode {
                node,
                nodes: self.nodes,
            })
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }
}

impl Transport for LocalTransport {
    fn nodes(&self) -> usize {
        self.nodes
    }

    fn send(&self, from: usize, to: usize, payload: Vec<u8>) -> Result<(), TransportError> {
        self.check(from)?;
        self.check(to)?;
        let mut st = self.lock();
        if let Some(reason) = &st.aborted {
            return Err(TransportError::Aborted(reason.clone()));
        }
        st.stats.record(&payload);
        st.queues[to * self.nodes + from].push_back(payload.into());
        self.ready.notify_all();
        Ok(())
    }

    fn broadcast(&self, from: usize, payload: Vec<u8>) -> Result<(), TransportError> {
        self.check(from)?;
        let mut st = self.lock();
        if let Some(reason) = &st.aborted {
            return Err(TransportError::Aborted(reason.clone()));
        }
        st.stats.record(&payload);
        let shared: Payload = payload.into();
        for to in (0..self.nodes).filter(|&to| to != from) {
            st.queues[to * self.nodes + from].push_back(shared.clone());
        }
        self.ready.notify_all();
        Ok(())
    }

    fn receive(&self, at: usize, from: usize) -> Result<Payload, TransportError> {
        self.check(at)?;
        self.check(from)?;
        let mut st = self.lock();
        loop {
            if let Some(msg) = st.queues[at * self.nodes + from].pop_front() {
                return Ok(msg);
            }
            if let Some(reason) = &st.aborted {
                return Err(TransportError::Aborted(reason.clone()));
            }
            st = self.ready.wait(st).unwrap_or_else(|p| p.into_inner());
        }
    }

    fn abort(&self, reason: &str) {
        let mut st = self.lock();
        st.aborted.get_or_insert_with(|| reason.to_string());
        self.ready.notify_all();
    }

    fn stats(&self) -> TransportStats {
        self.lock().stats.clone()
    }
}
