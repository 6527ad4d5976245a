//! Cut-off analysis for rendez-vous protocols.
//!
//! A rendez-vous protocol describes a population of identical processes
//! (plus, optionally, a single leader) that synchronise pairwise on letters.
//! The cut-off question asks whether there is a population size `B` such that
//! for every `n >= B` all entities can be driven from their initial to their
//! final state.
//!
//! This crate is `no_std` (with `alloc`) and contains only the algorithmic
//! core:
//!
//! * [`model`]: protocols, validation, classification and transformations.
//! * [`semantics`]: configurations, the rendez-vous step relation and exact
//!   per-population reachability with replayable traces.
//! * [`petri`]: Petri nets, the protocol/net encodings in both directions,
//!   reversed and merged nets, bounded reachability, flat expressions, the
//!   linear-set intersection gadget and the single-place cut-off search.
//! * [`evenodd`]: the parity abstraction for symmetric protocols.
//! * [`cutoff`]: the decision driver and certificate checking.
//!
//! Text formats, JSON and the command line live in the companion `rdvcut`
//! crate.

#![no_std]

extern crate alloc;

pub mod budget;
pub mod corpus;
pub mod cutoff;
pub mod evenodd;
pub mod model;
pub mod petri;
pub mod semantics;

pub use budget::{Clock, NoClock};
pub use model::{Protocol, ProtocolBuilder};
