//! Slot-occupancy bookkeeping for constructive schedulers.

use crate::model::{Placement, Scenario};

/// Per-server count of busy CPUs in each slot.
#[derive(Debug, Clone)]
pub struct Occupancy {
    usage: Vec<Vec<u32>>,
    capacity: Vec<u32>,
}

impl Occupancy {
    pub fn new(s: &Scenario) -> Self {
        Occupancy {
            usage: vec![vec![0; s.slot_count()]; s.num_servers()],
            capacity: s.servers.iter().map(|srv| srv.cpu_count).collect(),
        }
    }

    pub fn fits(&self, j: usize, p: &Placement) -> bool {
        self.usage[j][p.slots()].iter().all(|&u| u < self.capacity[j])
    }

    pub fn reserve(&mut self, j: usize, p: &Placement) {
        for u in &mut self.usage[j][p.slots()] {
            *u += 1;
        }
    }

    /// Earliest placement of task `i` on server `j` that fits, if any.
    pub fn earliest_fit(&self, s: &Scenario, i: usize, j: usize) -> Option<Placement> {
        let first = s.slot_of(s.tasks[i].arrival);
        (first..s.slot_count())
            .map_while(|k| s.placement(i, j, k))
            .find(|p| self.fits(j, p))
    }
}
