//! Epsilon-drawdown analysis of intraday price series.
//!
//! The crate covers the full pipeline: tick cleaning and bar aggregation
//! ([`market_data`]), epsilon-drawdown/drawup detection and event
//! characteristics ([`events`]), Pareto tail fitting with lower-bound
//! selection ([`powerlaw`]), Dragon-King outlier tests ([`outlier_tests`]),
//! empirical tail dependence ([`tail_dependence`]) and the reshuffling null
//! model plus synthetic generators ([`null_model`]).

pub mod events;
pub mod market_data;
pub mod null_model;
pub mod outlier_tests;
pub mod powerlaw;
pub mod quantile;
pub mod special;
pub mod tail_dependence;

pub use events::{EpsilonConfig, EpsilonMode, Event, EventKind, EventSeries};
pub use market_data::{BarSeries, SessionSpec, TickRecord};
pub use outlier_tests::{DkResult, ExponentialTail, UResult};
pub use powerlaw::{Distance, PowerLawFit, ScanConfig};
