use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::rules::OccupancyPredictor;
use crate::scalar::Scalar;

use super::scenario::{HistorySpan, Scenario};
use super::MINUTES_PER_DAY;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OccupancyError {
    #[error("slot length {0} does not divide 1440")]
    BadSlot(u32),
    #[error("threshold must lie in [0, 1]")]
    BadThreshold,
}

/// Historical occupancy spans plus the number of days they cover.
///
/// Days are indexed from 0; a day with no spans counts as fully unoccupied.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct History {
    days: u32,
    rooms: BTreeSet<String>,
    spans: Vec<HistorySpan>,
}

impl History {
    /// Day count is `max(day) + 1`, or 0 for no spans.
    pub fn new(spans: Vec<HistorySpan>) -> Self {
        let days = spans.iter().map(|s| s.day + 1).max().unwrap_or(0);
        let rooms = spans.iter().map(|s| s.room.clone()).collect();
        History { days, rooms, spans }
    }

    /// Explicit day count; must cover every span's day.
    pub fn with_days(days: u32, spans: Vec<HistorySpan>) -> Self {
        let mut h = History::new(spans);
        assert!(days >= h.days, "history spans reach day {}", h.days);
        h.days = days;
        h
    }

    /// Registers rooms that should be known to the model even with no spans.
    pub fn with_rooms<I: IntoIterator<Item = S>, S: Into<String>>(mut self, rooms: I) -> Self {
        self.rooms.extend(rooms.into_iter().map(Into::into));
        self
    }

    pub fn from_scenario(scenario: &Scenario) -> Self {
        History::new(scenario.history.clone()).with_rooms(scenario.rooms.iter().cloned())
    }

    pub fn days(&self) -> u32 {
        self.days
    }

    pub fn spans(&self) -> &[HistorySpan] {
        &self.spans
    }

    pub fn rooms(&self) -> &BTreeSet<String> {
        &self.rooms
    }
}

/// Per-room, per-slot historical occupancy fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyModel<T> {
    slot_minutes: u32,
    freq: BTreeMap<String, Vec<T>>,
    threshold: T,
}

fn merge(mut spans: Vec<(u32, u32)>) -> Vec<(u32, u32)> {
    spans.sort_unstable();
    let mut out: Vec<(u32, u32)> = Vec::with_capacity(spans.len());
    for (s, e) in spans {
        match out.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => out.push((s, e)),
        }
    }
    out
}

/// Fits the frequency model: occupied minutes in each slot over all history
/// days, divided by `slot_minutes * days`. Threshold defaults to 0.2.
pub fn train<T: Scalar>(history: &History, slot_minutes: u32) -> Result<OccupancyModel<T>, OccupancyError> {
    if slot_minutes == 0 || !MINUTES_PER_DAY.is_multiple_of(slot_minutes) {
        return Err(OccupancyError::BadSlot(slot_minutes));
    }
    let slots = (MINUTES_PER_DAY / slot_minutes) as usize;

    let mut by_room_day: BTreeMap<(&str, u32), Vec<(u32, u32)>> = BTreeMap::new();
    for span in history
        .spans
        .iter()
        .filter(|s| s.start_min < s.end_min.min(MINUTES_PER_DAY))
    {
        by_room_day
            .entry((span.room.as_str(), span.day))
            .or_default()
            .push((span.start_min, span.end_min.min(MINUTES_PER_DAY)));
    }

    let mut counts: BTreeMap<&str, Vec<u64>> = history.rooms.iter().map(|r| (r.as_str(), vec![0u64; slots])).collect();
    for ((room, _), spans) in by_room_day {
        let row = counts.entry(room).or_insert_with(|| vec![0; slots]);
        for (start, end) in merge(spans) {
            let first = start / slot_minutes;
            let last = (end - 1) / slot_minutes;
            for slot in first..=last {
                let lo = start.max(slot * slot_minutes);
                let hi = end.min((slot + 1) * slot_minutes);
                row[slot as usize] += u64::from(hi - lo);
            }
        }
    }

    let denom = u64::from(slot_minutes) * u64::from(history.days);
    let freq = counts
        .into_iter()
        .map(|(room, row)| {
            let values = row
                .into_iter()
                .map(|c| {
                    if denom == 0 {
                        T::zero()
                    } else {
                        T::from_count(c) / T::from_count(denom)
                    }
                })
                .collect();
            (room.to_owned(), values)
        })
        .collect();
    Ok(OccupancyModel {
        slot_minutes,
        freq,
        threshold: T::from_f64(0.2).expect("0.2 representable"),
    })
}

impl<T: Scalar> OccupancyModel<T> {
    pub fn with_threshold(mut self, threshold: T) -> Result<Self, OccupancyError> {
        if !(threshold >= T::zero() && threshold <= T::one()) {
            return Err(OccupancyError::BadThreshold);
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn slot_minutes(&self) -> u32 {
        self.slot_minutes
    }

    pub fn slot_count(&self) -> usize {
        (MINUTES_PER_DAY / self.slot_minutes) as usize
    }

    pub fn threshold(&self) -> T {
        self.threshold
    }

    pub fn rooms(&self) -> impl Iterator<Item = &str> {
        self.freq.keys().map(String::as_str)
    }

    /// Frequency for a room and slot; zero for unknown rooms.
    pub fn freq(&self, room: &str, slot: usize) -> T {
        self.freq
            .get(room)
            .and_then(|row| row.get(slot))
            .copied()
            .unwrap_or_else(T::zero)
    }

    /// Slot indices overlapping `[t mod 1440, t mod 1440 + horizon)`, wrapping
    /// past midnight, in visiting order.
    pub fn window_slots(&self, t_min: u32, horizon_min: u32) -> Vec<usize> {
        let n = self.slot_count();
        if horizon_min == 0 {
            return Vec::new();
        }
        if horizon_min >= MINUTES_PER_DAY {
            return (0..n).collect();
        }
        let start = t_min % MINUTES_PER_DAY;
        let first = (start / self.slot_minutes) as usize;
        let last = ((start + horizon_min - 1) / self.slot_minutes) as usize;
        (first..=last).map(|s| s % n).collect()
    }

    /// True iff `room` is known and some slot in the window reaches the
    /// threshold. Unknown rooms are never predicted occupied.
    pub fn predicted_occupied(&self, room: &str, t_min: u32, horizon_min: u32) -> bool {
        let Some(row) = self.freq.get(room) else { return false };
        self.window_slots(t_min, horizon_min)
            .into_iter()
            .any(|s| row[s] >= self.threshold)
    }
}

impl<T: Scalar> OccupancyPredictor for OccupancyModel<T> {
    fn predicted_occupied(&self, room: &str, t_min: u32, horizon_min: u32) -> bool {
        OccupancyModel::predicted_occupied(self, room, t_min, horizon_min)
    }
}
