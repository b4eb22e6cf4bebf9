//! Cluster-head buffer bank: one FIFO of network-coded packets per cluster.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::signal::BitBlock;

/// One stored packet: the XOR payload of one antenna stream plus the
/// ground-truth source bits used only for end-to-end error scoring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BufferedPacket {
    pub payload: BitBlock,
    pub truth_x1: BitBlock,
    pub truth_x2: BitBlock,
    pub birth_slot: u64,
}

impl BufferedPacket {
    /// Packet awaiting storage; the birth slot is stamped by
    /// [`BufferBank::store`].
    pub fn new(payload: BitBlock, truth_x1: BitBlock, truth_x2: BitBlock) -> Self {
        Self {
            payload,
            truth_x1,
            truth_x2,
            birth_slot: 0,
        }
    }
}

/// Occupancy snapshot used by mode selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BufferSummary {
    pub occupancy: Vec<usize>,
    /// Total stored packets, `N_p`.
    pub total: usize,
    /// Fullest cluster, lowest index on ties.
    pub fullest: usize,
    pub capacity: usize,
}

impl BufferSummary {
    pub fn can_store(&self, cluster: usize, group: usize) -> bool {
        self.occupancy[cluster] + group <= self.capacity
    }

    pub fn can_extract(&self, cluster: usize, group: usize) -> bool {
        self.occupancy[cluster] >= group
    }
}

#[derive(Debug, Clone)]
pub struct BufferBank {
    queues: Vec<VecDeque<BufferedPacket>>,
    capacity: usize,
    group: usize,
    stored: u64,
    extracted: u64,
}

impl BufferBank {
    /// `clusters` queues of `capacity` packets each, moved in groups of
    /// `group` (= `M_S`) packets. `capacity` must be a positive multiple of
    /// `group`.
    pub fn new(clusters: usize, capacity: usize, group: usize) -> Result<Self> {
        if clusters == 0 {
            return Err(invalid("K", "must be positive"));
        }
        if group == 0 {
            return Err(invalid("Ms", "must be positive"));
        }
        if capacity == 0 || !capacity.is_multiple_of(group) {
            return Err(invalid("J", "must be a positive multiple of Ms"));
        }
        Ok(Self {
            queues: (0..clusters).map(|_| VecDeque::with_capacity(capacity)).collect(),
            capacity,
            group,
            stored: 0,
            extracted: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Slot-group capacity `Q = J / M_S`.
    pub fn group_capacity(&self) -> usize {
        self.capacity / self.group
    }

    pub fn occupancy(&self, cluster: usize) -> usize {
        self.queues[cluster].len()
    }

    pub fn total(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn stored_count(&self) -> u64 {
        self.stored
    }

    pub fn extracted_count(&self) -> u64 {
        self.extracted
    }

    /// Appends one group, stamping every packet with `slot`. Returns the new
    /// occupancy of the cluster.
    pub fn store(&mut self, cluster: usize, group: Vec<BufferedPacket>, slot: u64) -> Result<usize> {
        if group.len() != self.group {
            return Err(Error::DimensionMismatch {
                expected: self.group,
                actual: group.len(),
            });
        }
        let occupancy = self.queues[cluster].len();
        if occupancy + group.len() > self.capacity {
            return Err(Error::BufferOverflow {
                cluster,
                occupancy,
                capacity: self.capacity,
            });
        }
        let q = &mut self.queues[cluster];
        for mut p in group {
            p.birth_slot = slot;
            q.push_back(p);
        }
        self.stored += self.group as u64;
        Ok(q.len())
    }

    /// Removes the oldest group and reports each packet's delay
    /// `slot - birth_slot`.
    pub fn extract(&mut self, cluster: usize, slot: u64) -> Result<(Vec<BufferedPacket>, Vec<u64>)> {
        let occupancy = self.queues[cluster].len();
        if occupancy < self.group {
            return Err(Error::BufferUnderflow {
                cluster,
                occupancy,
                requested: self.group,
            });
        }
        let packets: Vec<BufferedPacket> = self.queues[cluster].drain(..self.group).collect();
        let delays = packets.iter().map(|p| slot.saturating_sub(p.birth_slot)).collect();
        self.extracted += self.group as u64;
        Ok((packets, delays))
    }

    pub fn summary(&self) -> BufferSummary {
        let occupancy: Vec<usize> = self.queues.iter().map(VecDeque::len).collect();
        let mut fullest = 0;
        for (k, &o) in occupancy.iter().enumerate() {
            if o > occupancy[fullest] {
                fullest = k;
            }
        }
        BufferSummary {
            total: occupancy.iter().sum(),
            occupancy,
            fullest,
            capacity: self.capacity,
        }
    }
}
