//! Table fact verification by latent program search.
//!
//! A statement is linked to a table ([`linker`]), programs in a small typed
//! language ([`dsl`]) are enumerated from the linked values ([`search`]), and
//! the executed candidates are turned into a verdict ([`ranker`]). The
//! [`linearize`] module serializes tables into text premises, and
//! [`harness`] loads datasets and runs evaluations.

pub mod config;
pub mod dsl;
pub mod harness;
pub mod linearize;
pub mod linker;
pub mod ranker;
pub mod search;
pub mod table;
