//! Filtrations as observability extents over simulated paths.
//!
//! [`InformationSet`] answers reads of `W`, the clock and prices only inside
//! its declared extents and counts every attempt to look further. The
//! measurability test and the look-ahead strategy are built on top of it.

mod experiment;
mod info;
mod measurability;
mod strategy;

pub use experiment::{
    run_arbitrage_experiment, write_ledger_csv, ArbitrageConfig, ArbitrageReport, ArmSummary, Drift, DriftName,
    RhoReport,
};
pub use info::{enlarged_info, AccessAudit, InformationSet};
pub use measurability::{
    classify_time, continue_crossing, measurability_test, measure_from_state, Classification, ClockState,
    MeasurabilityOptions, MeasurabilityReport, RateState,
};
pub use strategy::{default_check_times, lookahead_strategy, natural_strategy, Direction, StrategyLedger, Trade};
