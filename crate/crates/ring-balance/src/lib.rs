//! Deterministic simulator and exact solvers for the distributed balanced
//! color assignment problem on rings.
//!
//! A set of `n` agents sits on a ring; `m >= n` colors exist and agent `i`
//! initially holds `Q[j][i]` items of color `j`. The agents must agree on a
//! balanced assignment of colors to agents (each agent ends up with
//! `floor(m/n)` or `floor(m/n) + 1` colors) while minimizing the number of
//! items that have to move. This crate provides:
//!
//! * the problem data model ([`model`]) with exact cost and feasibility
//!   predicates,
//! * a deterministic ring simulator ([`sim`]) with the basic-message cost
//!   model (one unit per `ceil(log2 n)` bits),
//! * the three-phase greedy protocols in synchronous and asynchronous form
//!   ([`protocols`]), together with the 2-approximation, the
//!   (2+eps)-approximation and the gather-at-leader baseline,
//! * exact optimal-cost oracles ([`oracle`]) via min-cost max-flow,
//!   exhaustive enumeration and the Hungarian method,
//! * instance generators ([`instances`]) for random suites and the
//!   adversarial instance families used to probe the approximation ratio.

pub mod instances;
pub mod model;
pub mod oracle;
pub mod protocols;
pub mod schedule;
pub mod sim;

pub use model::{Assignment, Instance};
pub use protocols::{ProtocolConfig, SelectionPolicy};
