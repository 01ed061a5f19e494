//! Monte Carlo estimators: heat-bath sampling, parallel tempering with
//! thermodynamic integration, and annealing searches for ground states.

mod anneal;
mod chain;
mod ladder;
mod thermo;

pub use anneal::{anneal_ground_state, estimate_sector_max, initial_sector_counts, sk_ground_state};
pub use chain::{gibbs_sweep, ChainState, System, REFRESH_INTERVAL};
pub use ladder::{LadderConfig, DEFAULT_RUNGS};
pub use thermo::{thermo_integrate, quenched_thermo_integrate, RungTrace, Tempering, ThermoEstimate, TRACE_CSV_HEADER};
