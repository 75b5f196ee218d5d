//! Leader election on the ring by bidirectional doubling probes.
//!
//! Each candidate probes `2^k` hops in both directions in phase `k`; probes
//! are swallowed by any agent with a larger id, turned into replies at the
//! hop limit, and a candidate that gets both replies doubles its reach. The
//! probe of the maximum id eventually travels the whole ring back to its
//! origin, which thereby learns it is the leader. The leader then circulates
//! a relabeling token carrying a hop count, so every agent learns its
//! clockwise distance from the leader.
//!
//! The machine is engine-agnostic: it consumes messages and emits
//! `(direction, message)` pairs, and the sync/async agents adapt directions
//! to neighbor indices. Every message fits one basic message (the model
//! allows a constant number of agent ids per unit charge).

/// Direction of travel around the ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dir {
    /// Toward the following neighbor (`pos + 1 mod n`).
    Cw,
    /// Toward the preceding neighbor (`pos - 1 mod n`).
    Ccw,
}

impl Dir {
    fn flip(self) -> Dir {
        match self {
            Dir::Cw => Dir::Ccw,
            Dir::Ccw => Dir::Cw,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum ElectMsg {
    Probe { id: u64, hops_left: u64, dir: Dir },
    Reply { id: u64, dir: Dir },
    /// Relabel token, clockwise only; the receiver's label is `hops`.
    Relabel { hops: u64 },
}

/// What the surrounding agent learns from one delivery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ElectEvent {
    BecameLeader,
    /// Learned the clockwise distance from the leader.
    GotLabel(usize),
    /// Leader saw its relabel token complete the circle.
    RelabelDone,
}

#[derive(Debug)]
pub(crate) struct ElectionSm {
    id: u64,
    phase: u32,
    cw_replied: bool,
    ccw_replied: bool,
    is_leader: bool,
    candidate: bool,
}

impl ElectionSm {
    pub fn new(id: u64) -> Self {
        ElectionSm {
            id,
            phase: 0,
            cw_replied: false,
            ccw_replied: false,
            is_leader: false,
            candidate: true,
        }
    }

    fn probes(&self) -> Vec<(Dir, ElectMsg)> {
        let hops = 1u64 << self.phase;
        vec![
            (
                Dir::Cw,
                ElectMsg::Probe {
                    id: self.id,
                    hops_left: hops,
                    dir: Dir::Cw,
                },
            ),
            (
                Dir::Ccw,
                ElectMsg::Probe {
                    id: self.id,
                    hops_left: hops,
                    dir: Dir::Ccw,
                },
            ),
        ]
    }

    /// First activation: phase-0 probes in both directions.
    pub fn start(&mut self) -> Vec<(Dir, ElectMsg)> {
        self.probes()
    }

    pub fn on_msg(&mut self, msg: ElectMsg) -> (Vec<(Dir, ElectMsg)>, Option<ElectEvent>) {
        match msg {
            ElectMsg::Probe { id, hops_left, dir } => {
                if id == self.id {
                    // Our own probe made it all the way around.
                    if self.is_leader {
                        return (vec![], None);
                    }
                    self.is_leader = true;
                    return (vec![], Some(ElectEvent::BecameLeader));
                }
                if id < self.id {
                    // Swallowed: a bigger id stands in the way.
                    return (vec![], None);
                }
                self.candidate = false;
                if hops_left > 1 {
                    (
                        vec![(
                            dir,
                            ElectMsg::Probe {
                                id,
                                hops_left: hops_left - 1,
                                dir,
                            },
                        )],
                        None,
                    )
                } else {
                    // Hop limit reached: answer back toward the origin.
                    let back = dir.flip();
                    (vec![(back, ElectMsg::Reply { id, dir: back })], None)
                }
            }
            ElectMsg::Reply { id, dir } => {
                if id != self.id {
                    return (vec![(dir, ElectMsg::Reply { id, dir })], None);
                }
                if !self.candidate || self.is_leader {
                    return (vec![], None);
                }
                // A reply traveling CCW answers our CW probe.
                match dir {
                    Dir::Ccw => self.cw_replied = true,
                    Dir::Cw => self.ccw_replied = true,
                }
                if self.cw_replied && self.ccw_replied {
                    self.phase += 1;
                    self.cw_replied = false;
                    self.ccw_replied = false;
                    (self.probes(), None)
                } else {
                    (vec![], None)
                }
            }
            ElectMsg::Relabel { hops } => {
                if self.is_leader {
                    (vec![], Some(ElectEvent::RelabelDone))
                } else {
                    (
                        vec![(Dir::Cw, ElectMsg::Relabel { hops: hops + 1 })],
                        Some(ElectEvent::GotLabel(hops as usize)),
                    )
                }
            }
        }
    }

    /// Token the fresh leader sends to start the relabeling pass.
    pub fn relabel_token() -> (Dir, ElectMsg) {
        (Dir::Cw, ElectMsg::Relabel { hops: 1 })
    }
}
