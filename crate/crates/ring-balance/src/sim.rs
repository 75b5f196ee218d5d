//! Deterministic ring simulator with the basic-message cost model.
//!
//! Agents may only talk to their two ring neighbors. Every sent message is
//! charged `max(1, ceil(payload_bits / ceil(log2 n)))` basic-message units.
//! The synchronous engine runs lock-step rounds (messages sent in round `t`
//! arrive in round `t + 1`); the asynchronous engine is an event loop over a
//! priority queue with per-link FIFO delivery under a pluggable delay model.
//! Both engines are single-threaded and bit-deterministic: identical inputs
//! and seeds give identical traces, metrics and final states.

use std::collections::BTreeMap;
use std::collections::BinaryHeap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Protocol phase a message is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Election,
    PhaseTwo,
    PhaseThree,
    Gather,
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Election => "election",
            Phase::PhaseTwo => "phase2",
            Phase::PhaseThree => "phase3",
            Phase::Gather => "gather",
        }
    }
}

/// Accounting tag: phase plus, for the assignment phase, the stage index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseTag {
    pub phase: Phase,
    pub stage: Option<u32>,
}

impl PhaseTag {
    pub fn phase(phase: Phase) -> Self {
        PhaseTag { phase, stage: None }
    }

    pub fn stage(phase: Phase, stage: u32) -> Self {
        PhaseTag {
            phase,
            stage: Some(stage),
        }
    }
}

/// A message in flight on the ring. `dst` must be a ring neighbor of `src`.
#[derive(Debug, Clone)]
pub struct Message<P> {
    pub src: usize,
    pub dst: usize,
    pub payload: P,
    pub payload_bits: u64,
    pub tag: PhaseTag,
}

/// Bits of one basic message: `ceil(log2 n)`, never less than 1.
pub fn basic_unit_bits(n: usize) -> u64 {
    let bits = (usize::BITS - n.saturating_sub(1).leading_zeros()) as u64;
    bits.max(1)
}

/// Units charged for a payload of the given bit size.
pub fn charge_units(payload_bits: u64, unit_bits: u64) -> u64 {
    payload_bits.div_ceil(unit_bits).max(1)
}

/// Bits needed to encode a value in `0..=v` (at least 1).
pub fn value_bits(v: u64) -> u64 {
    (64 - v.leading_zeros() as u64).max(1)
}

/// Running message-cost accounting for one simulation.
#[derive(Debug, Clone)]
pub struct MessageAccounting {
    pub basic_unit_bits: u64,
    pub total_units: u64,
    pub messages: u64,
    pub per_phase: BTreeMap<Phase, u64>,
    /// Units per phase-3 stage index.
    pub per_stage: BTreeMap<u32, u64>,
}

impl MessageAccounting {
    pub fn new(n: usize) -> Self {
        MessageAccounting {
            basic_unit_bits: basic_unit_bits(n),
            total_units: 0,
            messages: 0,
            per_phase: BTreeMap::new(),
            per_stage: BTreeMap::new(),
        }
    }

    /// Charges one message and returns its unit cost.
    pub fn charge(&mut self, payload_bits: u64, tag: PhaseTag) -> u64 {
        let units = charge_units(payload_bits, self.basic_unit_bits);
        self.total_units += units;
        self.messages += 1;
        *self.per_phase.entry(tag.phase).or_insert(0) += units;
        if let Some(stage) = tag.stage {
            *self.per_stage.entry(stage).or_insert(0) += units;
        }
        units
    }

    pub fn phase_units(&self, phase: Phase) -> u64 {
        self.per_phase.get(&phase).copied().unwrap_or(0)
    }
}

/// Metrics of one finished run.
#[derive(Debug, Clone)]
pub struct RunMetrics {
    pub basic_unit_bits: u64,
    pub total_units: u64,
    pub messages: u64,
    pub per_phase: BTreeMap<Phase, u64>,
    pub per_stage_units: BTreeMap<u32, u64>,
    /// Rounds executed (sync) or latest delivery time (async).
    pub time_units: u64,
}

impl RunMetrics {
    fn from_accounting(acct: MessageAccounting, time_units: u64) -> Self {
        RunMetrics {
            basic_unit_bits: acct.basic_unit_bits,
            total_units: acct.total_units,
            messages: acct.messages,
            per_phase: acct.per_phase,
            per_stage_units: acct.per_stage,
            time_units,
        }
    }

    pub fn phase_units(&self, phase: Phase) -> u64 {
        self.per_phase.get(&phase).copied().unwrap_or(0)
    }
}

/// One line of the optional event trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRecord {
    pub t: u64,
    pub src: usize,
    pub dst: usize,
    pub phase: String,
    pub units: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    /// An agent tried to message a non-neighbor: a protocol bug.
    NonNeighborSend { src: usize, dst: usize },
    RoundLimitExceeded { limit: u64 },
    EventLimitExceeded { limit: u64 },
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::NonNeighborSend { src, dst } => {
                write!(f, "agent {src} sent to non-neighbor {dst}")
            }
            SimError::RoundLimitExceeded { limit } => {
                write!(f, "round limit {limit} exceeded")
            }
            SimError::EventLimitExceeded { limit } => {
                write!(f, "event limit {limit} exceeded")
            }
        }
    }
}

impl std::error::Error for SimError {}

/// Messages queued by an agent during one activation.
#[derive(Debug)]
pub struct Outbox<P> {
    sends: Vec<(usize, P, u64, PhaseTag)>,
}

impl<P> Outbox<P> {
    fn new() -> Self {
        Outbox { sends: Vec::new() }
    }

    pub fn send(&mut self, dst: usize, payload: P, payload_bits: u64, tag: PhaseTag) {
        self.sends.push((dst, payload, payload_bits, tag));
    }
}

fn check_neighbor(n: usize, src: usize, dst: usize) -> Result<(), SimError> {
    let ok = n >= 2 && (dst == (src + 1) % n || dst == (src + n - 1) % n);
    if ok {
        Ok(())
    } else {
        Err(SimError::NonNeighborSend { src, dst })
    }
}

/// Round-driven agent for the synchronous engine. `step` runs once per
/// round with the messages delivered this round (sent in the previous one).
pub trait SyncAgent {
    type Payload;

    fn step(&mut self, round: u64, inbox: Vec<Message<Self::Payload>>, out: &mut Outbox<Self::Payload>);

    fn halted(&self) -> bool;
}

/// Result of a synchronous run. `all_halted` is false when the round budget
/// ran out first; metrics are still meaningful in that case.
pub struct SyncRun<A> {
    pub agents: Vec<A>,
    pub metrics: RunMetrics,
    pub all_halted: bool,
    pub trace: Vec<TraceRecord>,
}

/// Runs agents in lock-step rounds until all halt or `max_rounds` is hit.
pub fn run_sync<A: SyncAgent>(
    mut agents: Vec<A>,
    max_rounds: u64,
    record_trace: bool,
) -> Result<SyncRun<A>, SimError> {
    let n = agents.len();
    let mut acct = MessageAccounting::new(n);
    let mut trace = Vec::new();
    let mut inboxes: Vec<Vec<Message<A::Payload>>> = (0..n).map(|_| Vec::new()).collect();
    let mut rounds = 0u64;

    for round in 0..max_rounds {
        if agents.iter().all(|a| a.halted()) {
            break;
        }
        rounds = round + 1;
        let mut next: Vec<Vec<Message<A::Payload>>> = (0..n).map(|_| Vec::new()).collect();
        for (i, agent) in agents.iter_mut().enumerate() {
            let inbox = std::mem::take(&mut inboxes[i]);
            if agent.halted() {
                continue;
            }
            let mut out = Outbox::new();
            agent.step(round, inbox, &mut out);
            for (dst, payload, bits, tag) in out.sends {
                check_neighbor(n, i, dst)?;
                let units = acct.charge(bits, tag);
                if record_trace {
                    trace.push(TraceRecord {
                        t: round,
                        src: i,
                        dst,
                        phase: tag.phase.label().to_string(),
                        units,
                    });
                }
                next[dst].push(Message {
                    src: i,
                    dst,
                    payload,
                    payload_bits: bits,
                    tag,
                });
            }
        }
        inboxes = next;
    }

    let all_halted = agents.iter().all(|a| a.halted());
    Ok(SyncRun {
        agents,
        metrics: RunMetrics::from_accounting(acct, rounds),
        all_halted,
        trace,
    })
}

/// Link delay policy for the asynchronous engine. All delays are at least
/// one time unit and per-link FIFO order is preserved regardless of the
/// sampled values.
#[derive(Debug, Clone)]
pub enum DelayModel {
    /// Every hop takes exactly one time unit.
    Unit,
    /// Integer delays drawn uniformly from `[lo, hi]`, reproducible from
    /// the seed.
    UniformRandom { lo: u64, hi: u64, seed: u64 },
    /// Fixed delay per directed link `(src, dst)`; missing links default
    /// to one time unit.
    AdversarialPerLink { delays: BTreeMap<(usize, usize), u64> },
}

impl DelayModel {
    fn sampler(&self) -> DelaySampler {
        match self {
            DelayModel::Unit => DelaySampler::Unit,
            DelayModel::UniformRandom { lo, hi, seed } => DelaySampler::Uniform {
                lo: (*lo).max(1),
                hi: (*hi).max((*lo).max(1)),
                rng: ChaCha8Rng::seed_from_u64(*seed),
            },
            DelayModel::AdversarialPerLink { delays } => DelaySampler::Table {
                delays: delays.clone(),
            },
        }
    }
}

enum DelaySampler {
    Unit,
    Uniform { lo: u64, hi: u64, rng: ChaCha8Rng },
    Table { delays: BTreeMap<(usize, usize), u64> },
}

impl DelaySampler {
    fn sample(&mut self, src: usize, dst: usize) -> u64 {
        match self {
            DelaySampler::Unit => 1,
            DelaySampler::Uniform { lo, hi, rng } => rng.gen_range(*lo..=*hi),
            DelaySampler::Table { delays } => delays.get(&(src, dst)).copied().unwrap_or(1).max(1),
        }
    }
}

/// Event-driven agent for the asynchronous engine.
pub trait AsyncAgent {
    type Payload;

    /// Called once before any delivery, in agent order.
    fn on_start(&mut self, out: &mut Outbox<Self::Payload>);

    fn on_message(
        &mut self,
        msg: Message<Self::Payload>,
        now: u64,
        out: &mut Outbox<Self::Payload>,
    );

    fn halted(&self) -> bool;
}

pub struct AsyncRun<A> {
    pub agents: Vec<A>,
    pub metrics: RunMetrics,
    pub all_halted: bool,
    pub trace: Vec<TraceRecord>,
}

struct QueuedEvent<P> {
    deliver_at: u64,
    seq: u64,
    msg: Message<P>,
}

impl<P> PartialEq for QueuedEvent<P> {
    fn eq(&self, other: &Self) -> bool {
        self.deliver_at == other.deliver_at && self.seq == other.seq
    }
}
impl<P> Eq for QueuedEvent<P> {}
impl<P> PartialOrd for QueuedEvent<P> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<P> Ord for QueuedEvent<P> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Min-heap through reversal: earliest (time, seq) first.
        (other.deliver_at, other.seq).cmp(&(self.deliver_at, self.seq))
    }
}

/// Runs event-driven agents until all halt, the queue drains, or
/// `max_events` deliveries happen.
pub fn run_async<A: AsyncAgent>(
    mut agents: Vec<A>,
    delay: &DelayModel,
    max_events: u64,
    record_trace: bool,
) -> Result<AsyncRun<A>, SimError> {
    let n = agents.len();
    let mut acct = MessageAccounting::new(n);
    let mut trace = Vec::new();
    let mut sampler = delay.sampler();
    let mut heap: BinaryHeap<QueuedEvent<A::Payload>> = BinaryHeap::new();
    let mut seq = 0u64;
    // Per-link FIFO horizon: a delivery never precedes an earlier send on
    // the same link even if it sampled a shorter delay.
    let mut link_horizon: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut latest_delivery = 0u64;

    let mut schedule = |now: u64,
                        src: usize,
                        sends: Vec<(usize, A::Payload, u64, PhaseTag)>,
                        heap: &mut BinaryHeap<QueuedEvent<A::Payload>>,
                        acct: &mut MessageAccounting,
                        trace: &mut Vec<TraceRecord>,
                        sampler: &mut DelaySampler,
                        link_horizon: &mut BTreeMap<(usize, usize), u64>|
     -> Result<(), SimError> {
        for (dst, payload, bits, tag) in sends {
            check_neighbor(n, src, dst)?;
            let units = acct.charge(bits, tag);
            if record_trace {
                trace.push(TraceRecord {
                    t: now,
                    src,
                    dst,
                    phase: tag.phase.label().to_string(),
                    units,
                });
            }
            let horizon = link_horizon.entry((src, dst)).or_insert(0);
            let deliver_at = (now + sampler.sample(src, dst)).max(*horizon);
            *horizon = deliver_at;
            heap.push(QueuedEvent {
                deliver_at,
                seq,
                msg: Message {
                    src,
                    dst,
                    payload,
                    payload_bits: bits,
                    tag,
                },
            });
            seq += 1;
        }
        Ok(())
    };

    for i in 0..n {
        let mut out = Outbox::new();
        agents[i].on_start(&mut out);
        schedule(
            0,
            i,
            out.sends,
            &mut heap,
            &mut acct,
            &mut trace,
            &mut sampler,
            &mut link_horizon,
        )?;
    }

    let mut events = 0u64;
    while let Some(ev) = heap.pop() {
        if agents.iter().all(|a| a.halted()) {
            break;
        }
        events += 1;
        if events > max_events {
            return Err(SimError::EventLimitExceeded { limit: max_events });
        }
        latest_delivery = latest_delivery.max(ev.deliver_at);
        let dst = ev.msg.dst;
        if agents[dst].halted() {
            continue;
        }
        let now = ev.deliver_at;
        let mut out = Outbox::new();
        agents[dst].on_message(ev.msg, now, &mut out);
        schedule(
            now,
            dst,
            out.sends,
            &mut heap,
            &mut acct,
            &mut trace,
            &mut sampler,
            &mut link_horizon,
        )?;
    }

    let all_halted = agents.iter().all(|a| a.halted());
    Ok(AsyncRun {
        agents,
        metrics: RunMetrics::from_accounting(acct, latest_delivery),
        all_halted,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_bits_examples() {
        assert_eq!(basic_unit_bits(1), 1);
        assert_eq!(basic_unit_bits(2), 1);
        assert_eq!(basic_unit_bits(3), 2);
        assert_eq!(basic_unit_bits(16), 4);
        assert_eq!(basic_unit_bits(17), 5);
    }

    #[test]
    fn charge_examples() {
        // n = 16 gives 4-bit units.
        assert_eq!(charge_units(3, 4), 1);
        assert_eq!(charge_units(9, 4), 3);
        assert_eq!(charge_units(0, 4), 1);
        // k color IDs of ceil(log2 m) bits each.
        let k = 5u64;
        let m_bits = value_bits(63); // m = 64 colors -> 6-bit IDs
        assert_eq!(charge_units(k * m_bits, 4), (k * m_bits).div_ceil(4));
    }

    /// Agent that sends one empty-payload token clockwise every round.
    struct TokenForever {
        pos: usize,
        n: usize,
    }

    impl SyncAgent for TokenForever {
        type Payload = ();

        fn step(&mut self, _round: u64, _inbox: Vec<Message<()>>, out: &mut Outbox<()>) {
            out.send(
                (self.pos + 1) % self.n,
                (),
                1,
                PhaseTag::phase(Phase::Election),
            );
        }

        fn halted(&self) -> bool {
            false
        }
    }

    #[test]
    fn token_ring_charges_one_unit_per_message_per_round() {
        let agents = (0..3).map(|pos| TokenForever { pos, n: 3 }).collect();
        let run = run_sync(agents, 5, false).unwrap();
        assert_eq!(run.metrics.total_units, 15);
        assert_eq!(run.metrics.time_units, 5);
        assert!(!run.all_halted);
    }

    struct Silent {
        done: bool,
    }

    impl SyncAgent for Silent {
        type Payload = ();

        fn step(&mut self, _round: u64, _inbox: Vec<Message<()>>, _out: &mut Outbox<()>) {
            self.done = true;
        }

        fn halted(&self) -> bool {
            self.done
        }
    }

    #[test]
    fn never_sending_agents_halt_with_zero_units() {
        let agents = (0..4).map(|_| Silent { done: false }).collect::<Vec<_>>();
        let run = run_sync(agents, 100, false).unwrap();
        assert_eq!(run.metrics.total_units, 0);
        assert!(run.all_halted);
        assert_eq!(run.metrics.time_units, 1);
    }

    struct NonNeighborBug;

    impl SyncAgent for NonNeighborBug {
        type Payload = ();

        fn step(&mut self, _round: u64, _inbox: Vec<Message<()>>, out: &mut Outbox<()>) {
            out.send(2, (), 1, PhaseTag::phase(Phase::Election));
        }

        fn halted(&self) -> bool {
            false
        }
    }

    #[test]
    fn non_neighbor_send_is_an_error() {
        let agents = vec![NonNeighborBug, NonNeighborBug, NonNeighborBug, NonNeighborBug];
        let err = run_sync(agents, 5, false).unwrap_err();
        assert_eq!(err, SimError::NonNeighborSend { src: 0, dst: 2 });
    }

    /// Async agent that records delivery times, forwarding nothing.
    struct Sink {
        seen: Vec<(usize, u64, u64)>, // (src, payload-id, time)
        to_send: Vec<(usize, u64)>,
    }

    impl AsyncAgent for Sink {
        type Payload = u64;

        fn on_start(&mut self, out: &mut Outbox<u64>) {
            for &(dst, id) in &self.to_send {
                out.send(dst, id, 1, PhaseTag::phase(Phase::Election));
            }
        }

        fn on_message(&mut self, msg: Message<u64>, now: u64, _out: &mut Outbox<u64>) {
            self.seen.push((msg.src, msg.payload, now));
        }

        fn halted(&self) -> bool {
            false
        }
    }

    #[test]
    fn unit_delay_delivers_at_time_one() {
        let agents = vec![
            Sink {
                seen: vec![],
                to_send: vec![(1, 7)],
            },
            Sink {
                seen: vec![],
                to_send: vec![],
            },
        ];
        let run = run_async(agents, &DelayModel::Unit, 100, false).unwrap();
        assert_eq!(run.agents[1].seen, vec![(0, 7, 1)]);
        assert_eq!(run.metrics.time_units, 1);
    }

    #[test]
    fn same_link_fifo_under_random_delays() {
        for seed in 0..40 {
            let agents = vec![
                Sink {
                    seen: vec![],
                    to_send: vec![(1, 1), (1, 2), (1, 3)],
                },
                Sink {
                    seen: vec![],
                    to_send: vec![],
                },
            ];
            let model = DelayModel::UniformRandom {
                lo: 1,
                hi: 9,
                seed,
            };
            let run = run_async(agents, &model, 100, false).unwrap();
            let ids: Vec<u64> = run.agents[1].seen.iter().map(|&(_, id, _)| id).collect();
            assert_eq!(ids, vec![1, 2, 3], "seed {seed}");
            let times: Vec<u64> = run.agents[1].seen.iter().map(|&(_, _, t)| t).collect();
            assert!(times.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn async_runs_are_reproducible() {
        let mk = || {
            vec![
                Sink {
                    seen: vec![],
                    to_send: vec![(1, 1), (1, 2)],
                },
                Sink {
                    seen: vec![],
                    to_send: vec![(0, 9)],
                },
            ]
        };
        let model = DelayModel::UniformRandom {
            lo: 1,
            hi: 5,
            seed: 11,
        };
        let a = run_async(mk(), &model, 100, true).unwrap();
        let b = run_async(mk(), &model, 100, true).unwrap();
        assert_eq!(a.agents[1].seen, b.agents[1].seen);
        assert_eq!(a.metrics.total_units, b.metrics.total_units);
        assert_eq!(a.metrics.time_units, b.metrics.time_units);
        let fmt = |t: &[TraceRecord]| {
            t.iter()
                .map(|r| format!("{} {} {} {} {}", r.t, r.src, r.dst, r.phase, r.units))
                .collect::<Vec<_>>()
        };
        assert_eq!(fmt(&a.trace), fmt(&b.trace));
    }
}
