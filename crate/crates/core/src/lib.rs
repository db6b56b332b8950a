//! Pacing equilibria, proportional budget dynamics and incentive audits for
//! linear Fisher markets in which each seller owns several items and sells
//! them through first-price auctions with multiplicative budget pacing.
//!
//! The crate is organised bottom-up:
//!
//! * [`market`], [`generate`] and [`io`]: the market model, seeded instance
//!   generation and JSON files.
//! * [`equilibrium`]: sub-market pacing equilibria (with and without additive
//!   boosts), the whole-market competitive equilibrium, welfare measures and a
//!   brute-force oracle.
//! * [`dynamics`]: proportional budget reallocation across sellers and its
//!   convergence diagnostics.
//! * [`incentives`]: buyer and seller deviation analysis.
//! * [`seller_game`]: the seller competition game, its equilibrium and fairness.
//! * [`suite`]: the batch audit that checks every guarantee on seeded instances.
//! * [`report`]: CSV and JSON renderings shared by the command-line tool.

pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod generate;
pub mod incentives;
pub mod io;
pub mod market;
pub mod matrix;
mod maxflow;
pub mod report;
pub mod seller_game;
pub mod suite;

pub use error::{Error, Result, Violation};
pub use market::{validate, BudgetSplit, MarketSpec, UtilityMatrix, ValidatedMarket};
pub use matrix::Matrix;
