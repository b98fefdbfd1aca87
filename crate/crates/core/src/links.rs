//! Signal transport between the long-term processors and short-term memory.
//!
//! The Up-Tree is a pipelined binary tournament: every node buffers at most
//! one chunk, and each [`UpTree::compete_step`] lets every empty node pull the
//! stronger of its two children. A chunk therefore climbs at most one level
//! per step, and a chunk that loses a comparison stays parked at its node
//! until the stronger stream above it dries up.

use std::collections::VecDeque;

use crate::error::LinkError;
use crate::ltm::Percept;
use crate::needs::NeedId;

#[derive(Debug, Clone, PartialEq)]
pub enum ChunkPayload {
    Need(NeedId),
    Percept(Percept),
}

/// A frozen copy of a processor's output at submission time.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub ltm_id: usize,
    pub payload: ChunkPayload,
    pub weight: f64,
    pub submitted_at: u64,
}

/// Node address: `level` 0 holds the leaves, `level == height` is the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeRef {
    pub level: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinkEvent {
    Submitted { leaf: usize, weight: f64 },
    /// A chunk lost a buffer conflict and is gone.
    Dropped { node: NodeRef, chunk: Chunk },
    Advanced { node: NodeRef, ltm_id: usize, weight: f64 },
    Emitted(Chunk),
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpTree {
    height: usize,
    /// `levels[l][i]` is the buffer of node `i` at level `l`.
    levels: Vec<Vec<Option<Chunk>>>,
}

impl UpTree {
    /// Tree for `ltm_count` processors, padded with inert leaves up to a power of two.
    pub fn new(ltm_count: usize) -> Self {
        let leaves = ltm_count.max(1).next_power_of_two();
        let height = leaves.trailing_zeros() as usize;
        let levels = (0..=height).map(|l| vec![None; leaves >> l]).collect();
        UpTree { height, levels }
    }

    pub fn leaves(&self) -> usize {
        self.levels[0].len()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn node(&self, node: NodeRef) -> Option<&Chunk> {
        self.levels.get(node.level)?.get(node.index)?.as_ref()
    }

    /// Number of chunks currently buffered anywhere in the tree.
    pub fn buffered(&self) -> usize {
        self.levels.iter().flatten().filter(|c| c.is_some()).count()
    }

    pub fn is_empty(&self) -> bool {
        self.buffered() == 0
    }

    /// Places `chunk` in the buffer of `leaf`. An occupied buffer keeps the
    /// heavier chunk; on equal weight the newcomer wins.
    pub fn submit(&mut self, leaf: usize, chunk: Chunk) -> Result<Vec<LinkEvent>, LinkError> {
        let leaves = self.leaves();
        if leaf >= leaves {
            return Err(LinkError::LeafOutOfRange { leaf, leaves });
        }
        if !chunk.weight.is_finite() {
            return Err(LinkError::NonFiniteWeight);
        }
        let node = NodeRef { level: 0, index: leaf };
        let mut events = vec![LinkEvent::Submitted { leaf, weight: chunk.weight }];
        let slot = &mut self.levels[0][leaf];
        match slot.take() {
            Some(old) if old.weight > chunk.weight => {
                events.push(LinkEvent::Dropped { node, chunk });
                *slot = Some(old);
            }
            Some(old) => {
                events.push(LinkEvent::Dropped { node, chunk: old });
                *slot = Some(chunk);
            }
            None => *slot = Some(chunk),
        }
        Ok(events)
    }

    /// One pipeline step. The chunk sitting at the root when the step starts
    /// is emitted; then, from the top level down, every empty node pulls the
    /// heavier of its children (equal weights: lower `ltm_id`).
    pub fn compete_step(&mut self) -> (Option<Chunk>, Vec<LinkEvent>) {
        let mut events = Vec::new();
        let winner = self.levels[self.height][0].take();
        if let Some(w) = &winner {
            events.push(LinkEvent::Emitted(w.clone()));
        }
        for level in (1..=self.height).rev() {
            let (lower, upper) = self.levels.split_at_mut(level);
            let children = &mut lower[level - 1];
            for (index, parent) in upper[0].iter_mut().enumerate() {
                if parent.is_some() {
                    continue;
                }
                let (l, r) = (2 * index, 2 * index + 1);
                let pick = match (&children[l], &children[r]) {
                    (None, None) => continue,
                    (Some(_), None) => l,
                    (None, Some(_)) => r,
                    (Some(a), Some(b)) => {
                        if beats(a, b) {
                            l
                        } else {
                            r
                        }
                    }
                };
                let chunk = children[pick].take().expect("picked child is occupied");
                events.push(LinkEvent::Advanced {
                    node: NodeRef { level, index },
                    ltm_id: chunk.ltm_id,
                    weight: chunk.weight,
                });
                *parent = Some(chunk);
            }
        }
        (winner, events)
    }
}

fn beats(a: &Chunk, b: &Chunk) -> bool {
    a.weight > b.weight || (a.weight == b.weight && a.ltm_id < b.ltm_id)
}

/// FIFO channel from the sensors straight into short-term memory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pipe {
    queue: VecDeque<Percept>,
}

impl Pipe {
    pub fn push(&mut self, percept: Percept) {
        self.queue.push_back(percept);
    }

    pub fn drain(&mut self) -> Vec<Percept> {
        self.queue.drain(..).collect()
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}

/// Receiver end of the Down-Tree.
pub trait Listener<T> {
    fn receive(&mut self, payload: &T);
}

/// Delivers the same payload to every listener; returns the delivery count.
pub fn broadcast<T, L: Listener<T>>(payload: &T, listeners: &mut [L]) -> usize {
    for l in listeners.iter_mut() {
        l.receive(payload);
    }
    listeners.len()
}
