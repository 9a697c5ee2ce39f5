//! Simulator for OAM-based simultaneous wireless information and power
//! transfer between uniform circular arrays over line-of-sight channels.
//!
//! The crate is layered bottom-up:
//!
//! - [`geometry`]: transmit/receive UCA element positions and misaligned poses.
//! - [`channel`]: free-space LOS channel matrices and circulant mode gains.
//! - [`swipt`]: power-splitting receivers for OAM, MIMO (SVD/ZF) and SISO links.
//! - [`region`]: rate-energy regions by Monte Carlo sampling and a Lagrangian bound.
//! - [`field`]: observation-plane intensity maps of single OAM modes.
//! - [`scenario`], [`config`], [`output`]: the experiment runner behind the CLI.

pub mod channel;
pub mod config;
pub mod error;
pub mod field;
pub mod geometry;
pub mod output;
pub mod region;
pub mod scenario;
pub mod swipt;
pub mod units;

pub use error::{Result, SimError};
