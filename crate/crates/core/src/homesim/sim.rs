use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::rules::{evaluate, Action, Mode, OccupancyPredictor, Rule, RuleConflict};
use crate::scalar::Scalar;

use super::occupancy::{train, History, OccupancyError};
use super::scenario::{Scenario, ScenarioInvalid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioInvalid),
    #[error(transparent)]
    Model(#[from] OccupancyError),
    #[error("power of device `{0}` is not representable in the scalar type")]
    Unrepresentable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EventSource {
    Schedule,
    Rule(String),
}

impl fmt::Display for EventSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSource::Schedule => f.write_str("schedule"),
            EventSource::Rule(id) => write!(f, "rule:{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub time_min: u32,
    pub source: EventSource,
    pub device_id: String,
    pub new_mode: Mode,
}

/// Mutable state of one simulation pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WorldState {
    pub time_min: u32,
    pub device_modes: BTreeMap<String, Mode>,
    pub device_rooms: BTreeMap<String, String>,
    pub occupancy: BTreeMap<String, bool>,
    /// Whether any room's occupancy flipped at `time_min`.
    pub occupancy_changed: bool,
    pub event_log: Vec<Event>,
}

impl WorldState {
    fn set_mode(&mut self, device: &str, mode: Mode, source: EventSource) {
        let slot = self.device_modes.get_mut(device).expect("known device");
        if *slot != mode {
            *slot = mode;
            self.event_log.push(Event {
                time_min: self.time_min,
                source,
                device_id: device.to_owned(),
                new_mode: mode,
            });
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams<T> {
    pub slot_minutes: u32,
    pub threshold: T,
    pub horizon_min: u32,
}

impl<T: Scalar> Default for SimParams<T> {
    fn default() -> Self {
        SimParams {
            slot_minutes: 30,
            threshold: T::from_f64(0.2).expect("0.2 representable"),
            horizon_min: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceEnergy<T> {
    pub baseline_wh: T,
    pub controlled_wh: T,
}

/// A rule conflict observed at `time_min`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepConflict {
    pub time_min: u32,
    pub conflict: RuleConflict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport<T> {
    pub scenario: String,
    pub per_device: BTreeMap<String, DeviceEnergy<T>>,
    pub total: DeviceEnergy<T>,
    pub savings_wh: T,
    /// Controlled-pass mode changes, in time order.
    pub events: Vec<Event>,
    pub conflicts: Vec<StepConflict>,
}

/// Minutes spent in each mode, indexed by [`mode_index`].
type ModeMinutes = [u64; 3];

fn mode_index(mode: Mode) -> usize {
    match mode {
        Mode::Off => 0,
        Mode::Standby => 1,
        Mode::On => 2,
    }
}

struct Control<'a> {
    rules: &'a [Rule],
    predictor: &'a dyn OccupancyPredictor,
    horizon_min: u32,
}

struct PassOutcome {
    minutes: BTreeMap<String, ModeMinutes>,
    events: Vec<Event>,
    conflicts: Vec<StepConflict>,
}

fn occupancy_table(scenario: &Scenario) -> BTreeMap<&str, Vec<bool>> {
    let len = scenario.duration_min as usize;
    let mut table: BTreeMap<&str, Vec<bool>> = scenario.rooms.iter().map(|r| (r.as_str(), vec![false; len])).collect();
    for span in &scenario.occupancy_trace {
        let row = table.get_mut(span.room.as_str()).expect("validated room");
        for cell in &mut row[span.start_min as usize..span.end_min as usize] {
            *cell = true;
        }
    }
    table
}

fn simulate_pass(scenario: &Scenario, control: Option<&Control<'_>>) -> PassOutcome {
    let mut world = WorldState::default();
    for dev in &scenario.devices {
        world.device_modes.insert(dev.id.clone(), dev.initial_mode);
        world.device_rooms.insert(dev.id.clone(), dev.room.clone());
    }
    for room in &scenario.rooms {
        world.occupancy.insert(room.clone(), false);
    }
    let mut devices: Vec<_> = scenario.devices.iter().collect();
    devices.sort_by(|a, b| a.id.cmp(&b.id));
    let occupancy = occupancy_table(scenario);
    let mut minutes: BTreeMap<String, ModeMinutes> = devices.iter().map(|d| (d.id.clone(), [0; 3])).collect();
    let mut conflicts = Vec::new();

    for t in 0..scenario.duration_min {
        world.time_min = t;

        // Schedule edges: an interval start sets its mode, an interval end
        // reverts to the initial mode.
        for dev in &devices {
            let target = if let Some(entry) = dev.schedule.iter().find(|e| e.start_min == t) {
                Some(entry.mode)
            } else if dev.schedule.iter().any(|e| e.end_min == t) {
                Some(dev.initial_mode)
            } else {
                None
            };
            if let Some(mode) = target {
                world.set_mode(&dev.id, mode, EventSource::Schedule);
            }
        }

        world.occupancy_changed = false;
        for (room, row) in &occupancy {
            let now = row[t as usize];
            let slot = world.occupancy.get_mut(*room).expect("room registered");
            if *slot != now {
                *slot = now;
                world.occupancy_changed = true;
            }
        }

        if let Some(ctl) = control {
            let eval = evaluate(ctl.rules, &world, ctl.predictor, ctl.horizon_min);
            conflicts.extend(
                eval.conflicts
                    .into_iter()
                    .map(|conflict| StepConflict { time_min: t, conflict }),
            );
            for fired in eval.actions {
                let Action::SetMode(mode) = fired.action;
                world.set_mode(&fired.device_id, mode, EventSource::Rule(fired.rule_id));
            }
        }

        for (id, mode) in &world.device_modes {
            minutes.get_mut(id).expect("known device")[mode_index(*mode)] += 1;
        }
    }

    PassOutcome {
        minutes,
        events: world.event_log,
        conflicts,
    }
}

fn energy_wh<T: Scalar>(minutes: &ModeMinutes, power: &[T; 3]) -> T {
    let watt_minutes = minutes
        .iter()
        .zip(power)
        .fold(T::zero(), |acc, (m, p)| acc + T::from_count(*m) * *p);
    watt_minutes / T::from_count(60)
}

/// Runs the baseline (schedule only) and controlled (schedule + rules) passes.
pub fn run<T: Scalar>(scenario: &Scenario, rules: &[Rule], params: &SimParams<T>) -> Result<SimReport<T>, SimError> {
    scenario.validate()?;
    let model = train::<T>(&History::from_scenario(scenario), params.slot_minutes)?.with_threshold(params.threshold)?;

    let baseline = simulate_pass(scenario, None);
    let control = Control {
        rules,
        predictor: &model,
        horizon_min: params.horizon_min,
    };
    let controlled = simulate_pass(scenario, Some(&control));

    let mut per_device = BTreeMap::new();
    for dev in &scenario.devices {
        let convert = |w: f64| T::from_f64(w).ok_or_else(|| SimError::Unrepresentable(dev.id.clone()));
        let power = [
            convert(dev.power_w.off)?,
            convert(dev.power_w.standby)?,
            convert(dev.power_w.on)?,
        ];
        per_device.insert(
            dev.id.clone(),
            DeviceEnergy {
                baseline_wh: energy_wh(&baseline.minutes[&dev.id], &power),
                controlled_wh: energy_wh(&controlled.minutes[&dev.id], &power),
            },
        );
    }

    let mut total = DeviceEnergy {
        baseline_wh: T::zero(),
        controlled_wh: T::zero(),
    };
    let mut savings_wh = T::zero();
    for e in per_device.values() {
        total.baseline_wh = total.baseline_wh + e.baseline_wh;
        total.controlled_wh = total.controlled_wh + e.controlled_wh;
        savings_wh = savings_wh + (e.baseline_wh - e.controlled_wh);
    }

    Ok(SimReport {
        scenario: scenario.name.clone(),
        per_device,
        total,
        savings_wh,
        events: controlled.events,
        conflicts: controlled.conflicts,
    })
}

/// Three-decimal rendering; never prints a negative zero.
pub fn format_wh(value: f64) -> String {
    let s = format!("{value:.3}");
    if s == "-0.000" {
        "0.000".to_owned()
    } else {
        s
    }
}

fn raw_wh<T: Scalar>(value: T) -> Box<RawValue> {
    RawValue::from_string(format_wh(value.as_f64())).expect("decimal literal is valid JSON")
}

#[derive(Serialize)]
struct EnergyJson {
    baseline_wh: Box<RawValue>,
    controlled_wh: Box<RawValue>,
}

#[derive(Serialize)]
struct EventJson<'a> {
    time_min: u32,
    source: String,
    device_id: &'a str,
    new_mode: Mode,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    per_device: BTreeMap<&'a str, EnergyJson>,
    total: EnergyJson,
    savings_wh: Box<RawValue>,
    events: Vec<EventJson<'a>>,
}

impl<T: Scalar> SimReport<T> {
    pub fn rule_firings(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.source, EventSource::Rule(_)))
            .count()
    }

    /// Byte-stable JSON with fields `per_device`, `total`, `savings_wh`,
    /// `events`; energies carry three decimals. Ends with a newline.
    pub fn to_json(&self) -> String {
        let energy = |e: &DeviceEnergy<T>| EnergyJson {
            baseline_wh: raw_wh(e.baseline_wh),
            controlled_wh: raw_wh(e.controlled_wh),
        };
        let doc = ReportJson {
            per_device: self.per_device.iter().map(|(k, v)| (k.as_str(), energy(v))).collect(),
            total: energy(&self.total),
            savings_wh: raw_wh(self.savings_wh),
            events: self
                .events
                .iter()
                .map(|e| EventJson {
                    time_min: e.time_min,
                    source: e.source.to_string(),
                    device_id: &e.device_id,
                    new_mode: e.new_mode,
                })
                .collect(),
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("report serializes");
        out.push('\n');
        out
    }

    /// Human-readable summary followed by the event log.
    pub fn to_text(&self) -> String {
        let mut out = format!("scenario {}\n", self.scenario);
        for (id, e) in &self.per_device {
            out.push_str(&format!(
                "device {id}: baseline {} Wh, controlled {} Wh\n",
                format_wh(e.baseline_wh.as_f64()),
                format_wh(e.controlled_wh.as_f64())
            ));
        }
        out.push_str(&format!(
            "total: baseline {} Wh, controlled {} Wh\n",
            format_wh(self.total.baseline_wh.as_f64()),
            format_wh(self.total.controlled_wh.as_f64())
        ));
        out.push_str(&format!("savings_wh {}\n", format_wh(self.savings_wh.as_f64())));
        out.push_str(&format!("events {}\n", self.events.len()));
        for e in &self.events {
            out.push_str(&format!(
                "  t={} {} {} -> {}\n",
                e.time_min, e.source, e.device_id, e.new_mode
            ));
        }
        for c in &self.conflicts {
            out.push_str(&format!("  t={} {}\n", c.time_min, c.conflict));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homesim::scenario::{Device, HistorySpan, OccupancySpan, PowerProfile, ScheduleEntry};
    use crate::rules::parse_rules;
    use num_rational::Rational64;

    const SHUTDOWN: &str = "rule standby_shutdown:\n  on tick\n  when device.mode == standby and not occupied(device.room) and not predicted_occupied(device.room)\n  then set device.mode = off\n";

    fn overnight() -> Scenario {
        Scenario {
            name: "standby_overnight".into(),
            duration_min: 480,
            rooms: vec!["living_room".into()],
            devices: vec![Device {
                id: "tv".into(),
                room: "living_room".into(),
                power_w: PowerProfile {
                    off: 0.0,
                    standby: 5.0,
                    on: 100.0,
                },
                initial_mode: Mode::Standby,
                schedule: vec![],
            }],
            occupancy_trace: vec![],
            history: vec![],
        }
    }

    fn shutdown() -> Vec<Rule> {
        parse_rules(SHUTDOWN).unwrap()
    }

    #[test]
    fn overnight_shutdown_saves_forty_wh() {
        let r = run::<f64>(&overnight(), &shutdown(), &SimParams::default()).unwrap();
        assert_eq!(r.events.len(), 1);
        assert_eq!(r.events[0].time_min, 0);
        assert_eq!(r.events[0].source, EventSource::Rule("standby_shutdown".into()));
        assert_eq!(r.per_device["tv"].baseline_wh, 40.0);
        assert_eq!(r.per_device["tv"].controlled_wh, 0.0);
        assert_eq!(r.savings_wh, 40.0);

        let exact = run::<Rational64>(&overnight(), &shutdown(), &SimParams::default()).unwrap();
        assert_eq!(exact.savings_wh, Rational64::from_integer(40));
    }

    #[test]
    fn occupied_room_blocks_rule() {
        let mut s = overnight();
        s.occupancy_trace.push(OccupancySpan {
            room: "living_room".into(),
            start_min: 0,
            end_min: 480,
        });
        let r = run::<f64>(&s, &shutdown(), &SimParams::default()).unwrap();
        assert_eq!(r.rule_firings(), 0);
        assert_eq!(r.savings_wh, 0.0);
    }

    #[test]
    fn predicted_occupancy_blocks_rule() {
        let mut s = overnight();
        s.history.push(HistorySpan {
            day: 0,
            room: "living_room".into(),
            start_min: 0,
            end_min: 1440,
        });
        let r = run::<f64>(&s, &shutdown(), &SimParams::default()).unwrap();
        assert_eq!(r.rule_firings(), 0);
        assert_eq!(r.savings_wh, 0.0);
    }

    #[test]
    fn no_rules_is_baseline() {
        let r = run::<f64>(&overnight(), &[], &SimParams::default()).unwrap();
        assert_eq!(r.per_device["tv"].baseline_wh, r.per_device["tv"].controlled_wh);
        assert_eq!(r.savings_wh, 0.0);
        assert!(r.events.is_empty());
    }

    #[test]
    fn schedule_wins_at_its_start_minute() {
        let mut s = overnight();
        s.devices[0].schedule.push(ScheduleEntry {
            start_min: 60,
            end_min: 120,
            mode: Mode::Standby,
        });
        let r = run::<f64>(&s, &shutdown(), &SimParams::default()).unwrap();
        let log: Vec<(u32, String, Mode)> = r
            .events
            .iter()
            .map(|e| (e.time_min, e.source.to_string(), e.new_mode))
            .collect();
        assert_eq!(
            log,
            vec![
                (0, "rule:standby_shutdown".into(), Mode::Off),
                (60, "schedule".into(), Mode::Standby),
                (60, "rule:standby_shutdown".into(), Mode::Off),
                (120, "schedule".into(), Mode::Standby),
                (120, "rule:standby_shutdown".into(), Mode::Off),
            ]
        );
    }

    #[test]
    fn schedule_end_reverts_to_initial_mode() {
        let mut s = overnight();
        s.devices[0].schedule.push(ScheduleEntry {
            start_min: 10,
            end_min: 20,
            mode: Mode::On,
        });
        let r = run::<f64>(&s, &[], &SimParams::default()).unwrap();
        let log: Vec<(u32, Mode)> = r.events.iter().map(|e| (e.time_min, e.new_mode)).collect();
        assert_eq!(log, vec![(10, Mode::On), (20, Mode::Standby)]);
        // 470 min standby at 5 W plus 10 min on at 100 W.
        assert_eq!(r.per_device["tv"].baseline_wh, (470.0 * 5.0 + 10.0 * 100.0) / 60.0);
    }

    #[test]
    fn json_layout_is_fixed() {
        let r = run::<f64>(&overnight(), &shutdown(), &SimParams::default()).unwrap();
        let json = r.to_json();
        let expected = "{\n  \"per_device\": {\n    \"tv\": {\n      \"baseline_wh\": 40.000,\n      \"controlled_wh\": 0.000\n    }\n  },\n  \"total\": {\n    \"baseline_wh\": 40.000,\n    \"controlled_wh\": 0.000\n  },\n  \"savings_wh\": 40.000,\n  \"events\": [\n    {\n      \"time_min\": 0,\n      \"source\": \"rule:standby_shutdown\",\n      \"device_id\": \"tv\",\n      \"new_mode\": \"off\"\n    }\n  ]\n}\n";
        assert_eq!(json, expected);
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["savings_wh"].as_f64(), Some(40.0));
    }

    #[test]
    fn invalid_scenario_and_params() {
        let mut s = overnight();
        s.devices[0].room = "garage".into();
        assert!(matches!(
            run::<f64>(&s, &[], &SimParams::default()),
            Err(SimError::Scenario(_))
        ));
        let bad = SimParams {
            slot_minutes: 7,
            ..SimParams::default()
        };
        assert!(matches!(run::<f64>(&overnight(), &[], &bad), Err(SimError::Model(_))));
        let bad = SimParams {
            threshold: 2.0,
            ..SimParams::default()
        };
        assert!(matches!(run::<f64>(&overnight(), &[], &bad), Err(SimError::Model(_))));
    }

    #[test]
    fn format_never_negative_zero() {
        assert_eq!(format_wh(-0.0), "0.000");
        assert_eq!(format_wh(-0.0001), "0.000");
        assert_eq!(format_wh(39.9999999), "40.000");
    }
}
