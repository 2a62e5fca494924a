//! Fiber graphs `G(n, r)` of two-way `n x n` contingency tables whose row and
//! column sums all equal `r`.
//!
//! Vertices are the tables of one fiber, edges are the signed 2x2 swap moves
//! `±(e_ij + e_kl - e_il - e_kj)`. The crate enumerates fibers, builds and
//! orients the graphs, measures degrees, distances and vertex connectivity,
//! decomposes tables into permutation matrices, and runs seeded
//! Metropolis-Hastings walks for exact conditional tests.
//!
//! Everything here is `no_std` + `alloc`; file formats and the command line
//! live in the companion `fibergraph-cli` crate.
//!
//! Indices are 0-based throughout the library API. Anything meant for humans
//! (the `Display` impls, error messages) reports 1-based rows and columns.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod decomposition;
pub mod enumerate;
mod error;
pub mod flow;
pub mod graph;
pub mod mcmc;
pub mod table;

pub use error::{Error, Result};
pub use table::{ContingencyTable, MarkovMove, Sign};
