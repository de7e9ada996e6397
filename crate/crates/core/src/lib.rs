//! Star-schema XML warehouse core: the in-memory model, the join index
//! that embeds dimension attributes into fact cells, the decision-support
//! query language, instrumented evaluation over both document layouts,
//! closed-form traversal costs and a deterministic data generator.
//!
//! Document parsing, serialization, benchmarking and the command-line
//! front end live in the companion `xcube-cli` crate; this crate is
//! `no_std` (with `alloc`) and purely computational.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cost;
pub mod exec;
pub mod gen;
pub mod index;
pub mod model;
pub mod query;

#[cfg(test)]
pub(crate) mod testutil;
