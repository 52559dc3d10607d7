//! Dataset loaders: French Data Library daily industry returns and
//! football-data.co.uk pre-match 1X2 odds.

pub mod ff49;
pub mod football;

pub use ff49::{load_ff49, rolling_instances, select_universe, ReturnsPanel, RollingInstance};
pub use football::{build_slates, devig, load_football_odds, MatchRecord, OddsTriplet};
