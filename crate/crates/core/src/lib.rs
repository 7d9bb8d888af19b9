//! Space-time electricity market clearing with virtual links.
//!
//! A [`model::Scenario`] describes the grid, bids and load-shifting links.
//! [`builder::build`] turns it into an LP, [`solver`] solves it with row
//! duals, [`clearing`] reads back allocations and prices, [`settlement`]
//! computes payments and profits, [`verify`] checks the market properties
//! on a cleared solution and [`sweep`] runs instance families.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod builder;
pub mod clearing;
pub mod lp;
pub mod model;
pub mod settlement;
pub mod solver;
pub mod sweep;
pub mod verify;

/// Absolute tolerances used by the solver certificate and the checks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    pub feas: f64,
    pub comp: f64,
    pub gap: f64,
    /// Threshold above which a quantity counts as cleared (MWh).
    pub cleared: f64,
    /// Slack allowed in price and profit relations.
    pub price: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feas: 1e-8,
            comp: 1e-7,
            gap: 1e-7,
            cleared: 1e-6,
            price: 1e-6,
        }
    }
}
