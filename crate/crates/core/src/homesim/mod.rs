//! Minute-resolution home simulator for the standby-shutdown protocol.
//!
//! Each run makes two passes over `0..duration_min`. The baseline pass
//! follows device schedules only. The controlled pass applies schedule edges,
//! then the occupancy trace, then the rules, every minute. Energy is the
//! per-minute power summed over the run, in watt-hours.
//!
//! Frequencies, thresholds and energies are generic over [`Scalar`](crate::Scalar).

mod occupancy;
mod scenario;
mod sim;

pub use occupancy::{train, History, OccupancyError, OccupancyModel};
pub use scenario::{Device, HistorySpan, OccupancySpan, PowerProfile, Scenario, ScenarioInvalid, ScheduleEntry};
pub use sim::{
    format_wh, run, DeviceEnergy, Event, EventSource, SimError, SimParams, SimReport, StepConflict, WorldState,
};

pub const MINUTES_PER_DAY: u32 = 1440;
