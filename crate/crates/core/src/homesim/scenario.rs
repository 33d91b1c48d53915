use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::is_slug;
use crate::rules::Mode;

use super::MINUTES_PER_DAY;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid scenario at {location}: {message}")]
pub struct ScenarioInvalid {
    pub location: String,
    pub message: String,
}

fn invalid(location: impl Into<String>, message: impl Into<String>) -> ScenarioInvalid {
    ScenarioInvalid {
        location: location.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerProfile {
    pub off: f64,
    pub standby: f64,
    pub on: f64,
}

impl PowerProfile {
    pub fn watts(&self, mode: Mode) -> f64 {
        match mode {
            Mode::Off => self.off,
            Mode::Standby => self.standby,
            Mode::On => self.on,
        }
    }
}

/// Intended usage: the device is in `mode` during `[start_min, end_min)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub start_min: u32,
    pub end_min: u32,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Device {
    pub id: String,
    pub room: String,
    pub power_w: PowerProfile,
    pub initial_mode: Mode,
    pub schedule: Vec<ScheduleEntry>,
}

impl Device {
    /// Mode the schedule asks for at minute `t`: the covering interval, else
    /// the initial mode.
    pub fn scheduled_mode(&self, t: u32) -> Mode {
        self.schedule
            .iter()
            .find(|e| e.start_min <= t && t < e.end_min)
            .map_or(self.initial_mode, |e| e.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OccupancySpan {
    pub room: String,
    pub start_min: u32,
    pub end_min: u32,
}

/// Occupancy of `room` during `[start_min, end_min)` on history day `day`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySpan {
    pub day: u32,
    pub room: String,
    pub start_min: u32,
    pub end_min: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub duration_min: u32,
    pub rooms: Vec<String>,
    pub devices: Vec<Device>,
    pub occupancy_trace: Vec<OccupancySpan>,
    pub history: Vec<HistorySpan>,
}

fn check_interval(location: &str, start: u32, end: u32, limit: u32) -> Result<(), ScenarioInvalid> {
    if start >= end {
        return Err(invalid(
            location,
            format!("interval [{start}, {end}) is empty or reversed"),
        ));
    }
    if end > limit {
        return Err(invalid(location, format!("interval end {end} exceeds {limit}")));
    }
    Ok(())
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioInvalid> {
        if self.duration_min == 0 {
            return Err(invalid("duration_min", "duration must be positive"));
        }
        let mut rooms = BTreeSet::new();
        for (i, room) in self.rooms.iter().enumerate() {
            let loc = format!("rooms[{i}]");
            if !is_slug(room) {
                return Err(invalid(loc, format!("`{room}` is not a slug")));
            }
            if !rooms.insert(room.as_str()) {
                return Err(invalid(loc, format!("room `{room}` listed twice")));
            }
        }
        let room_known = |loc: &str, room: &str| {
            if rooms.contains(room) {
                Ok(())
            } else {
                Err(invalid(loc, format!("unknown room `{room}`")))
            }
        };

        let mut ids = BTreeSet::new();
        for (i, dev) in self.devices.iter().enumerate() {
            let loc = format!("devices[{i}]");
            if !is_slug(&dev.id) {
                return Err(invalid(format!("{loc}.id"), format!("`{}` is not a slug", dev.id)));
            }
            if !ids.insert(dev.id.as_str()) {
                return Err(invalid(
                    format!("{loc}.id"),
                    format!("device `{}` listed twice", dev.id),
                ));
            }
            room_known(&format!("{loc}.room"), &dev.room)?;
            let p = dev.power_w;
            if ![p.off, p.standby, p.on].iter().all(|w| w.is_finite() && *w >= 0.0) {
                return Err(invalid(
                    format!("{loc}.power_w"),
                    "power must be finite and non-negative",
                ));
            }
            if !(p.off <= p.standby && p.standby <= p.on) {
                return Err(invalid(
                    format!("{loc}.power_w"),
                    "power must satisfy off <= standby <= on",
                ));
            }
            let mut sorted: Vec<(usize, &ScheduleEntry)> = dev.schedule.iter().enumerate().collect();
            for (j, entry) in &sorted {
                check_interval(
                    &format!("{loc}.schedule[{j}]"),
                    entry.start_min,
                    entry.end_min,
                    self.duration_min,
                )?;
            }
            sorted.sort_by_key(|(_, e)| e.start_min);
            for pair in sorted.windows(2) {
                if pair[1].1.start_min < pair[0].1.end_min {
                    return Err(invalid(
                        format!("{loc}.schedule[{}]", pair[1].0),
                        format!("overlaps schedule[{}]", pair[0].0),
                    ));
                }
            }
        }

        for (i, span) in self.occupancy_trace.iter().enumerate() {
            let loc = format!("occupancy_trace[{i}]");
            room_known(&loc, &span.room)?;
            check_interval(&loc, span.start_min, span.end_min, self.duration_min)?;
        }
        for (i, span) in self.history.iter().enumerate() {
            let loc = format!("history[{i}]");
            room_known(&loc, &span.room)?;
            check_interval(&loc, span.start_min, span.end_min, MINUTES_PER_DAY)?;
        }
        Ok(())
    }
}
