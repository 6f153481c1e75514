//! Monte Carlo coincidence experiments.

mod chsh;
mod counts;
mod sweep;

pub use chsh::{chsh, chsh_value, ChshAngles, ChshResult, PAIR_LABELS};
pub use counts::{correlation, run_point, CoincidenceCounts, CorrelationPoint};
pub use sweep::{
    active_sweep, correlation_sweep, malus_transmission, passive_sweep, uniform_grid,
    ActiveNormalization, RunSettings, SweepKind, SweepPoint, SweepSeries, MIN_CONTROL_SURVIVORS,
};
pub(crate) use sweep::map_points;
