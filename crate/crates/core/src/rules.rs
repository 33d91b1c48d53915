//! Condition-action rules over the simulator's world state.
//!
//! ```text
//! rule standby_shutdown:
//!   on tick
//!   when device.mode == standby and not occupied(device.room) and not predicted_occupied(device.room)
//!   then set device.mode = off
//! ```
//!
//! Each rule is implicitly quantified over every device. Conditions form a
//! conjunction. All rules in a step see the world as it was before the step's
//! actions; when two actions disagree about one device the first in file
//! order wins and a [`RuleConflict`] is reported.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::homesim::WorldState;
use crate::ontology::is_slug;
use crate::text::{is_blank_or_comment, lines, Cursor, ErrorCode, ParseError};

/// Device application mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Off,
    On,
    Standby,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Off, Mode::On, Mode::Standby];

    pub fn keyword(self) -> &'static str {
        match self {
            Mode::Off => "off",
            Mode::On => "on",
            Mode::Standby => "standby",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.keyword() == s)
            .ok_or_else(|| format!("unknown mode `{s}` (expected off, on or standby)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trigger {
    /// Fires every simulated minute.
    Tick,
    /// Fires on minutes where any room's occupancy flips.
    OccupancyChange,
}

impl Trigger {
    pub fn keyword(self) -> &'static str {
        match self {
            Trigger::Tick => "tick",
            Trigger::OccupancyChange => "occupancy_change",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    ModeIs(Mode),
    /// Occupancy sensor reading for the device's room.
    Occupied,
    /// Historical prediction for the device's room. `None` uses the run's
    /// default horizon.
    PredictedOccupied {
        horizon_min: Option<u32>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Condition {
    pub negated: bool,
    pub predicate: Predicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    SetMode(Mode),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub trigger: Trigger,
    pub conditions: Vec<Condition>,
    pub actions: Vec<Action>,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("not ")?;
        }
        match self.predicate {
            Predicate::ModeIs(m) => write!(f, "device.mode == {m}"),
            Predicate::Occupied => f.write_str("occupied(device.room)"),
            Predicate::PredictedOccupied { horizon_min: None } => f.write_str("predicted_occupied(device.room)"),
            Predicate::PredictedOccupied { horizon_min: Some(h) } => {
                write!(f, "predicted_occupied(device.room, {h}min)")
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rule {}:", self.id)?;
        writeln!(f, "  on {}", self.trigger.keyword())?;
        let conds: Vec<String> = self.conditions.iter().map(ToString::to_string).collect();
        writeln!(f, "  when {}", conds.join(" and "))?;
        for Action::SetMode(m) in &self.actions {
            writeln!(f, "  then set device.mode = {m}")?;
        }
        Ok(())
    }
}

/// Canonical text: rules separated by one blank line.
pub fn print_rules(rules: &[Rule]) -> String {
    rules.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

fn expect_char(cur: &mut Cursor<'_>, c: char) -> Result<(), ParseError> {
    cur.skip_ws();
    if cur.peek() == Some(c) {
        cur.bump();
        Ok(())
    } else {
        Err(cur.error(ErrorCode::Syntax, format!("expected `{c}`")))
    }
}

fn expect_str(cur: &mut Cursor<'_>, s: &str) -> Result<(), ParseError> {
    cur.skip_ws();
    for c in s.chars() {
        if cur.peek() != Some(c) {
            return Err(cur.error(ErrorCode::Syntax, format!("expected `{s}`")));
        }
        cur.bump();
    }
    Ok(())
}

fn parse_mode(cur: &mut Cursor<'_>) -> Result<Mode, ParseError> {
    cur.skip_ws();
    let col = cur.column();
    let word = cur.word();
    if word.is_empty() {
        return Err(cur.error(ErrorCode::Syntax, "expected a mode"));
    }
    word.parse()
        .map_err(|m: String| cur.error_at(col, ErrorCode::UnknownMode, m))
}

/// `device.room` argument, with the opening parenthesis already consumed.
fn parse_room_arg(cur: &mut Cursor<'_>) -> Result<(), ParseError> {
    cur.skip_ws();
    let col = cur.column();
    let obj = cur.word();
    if obj != "device" || cur.peek() != Some('.') {
        return Err(cur.error_at(col, ErrorCode::Syntax, "expected `device.room`"));
    }
    cur.bump();
    let field = cur.word();
    if field != "room" {
        return Err(cur.error_at(col, ErrorCode::Syntax, "expected `device.room`"));
    }
    Ok(())
}

fn parse_condition(cur: &mut Cursor<'_>) -> Result<Condition, ParseError> {
    cur.skip_ws();
    let mut col = cur.column();
    let mut word = cur.word();
    let mut negated = false;
    if word == "not" {
        negated = true;
        cur.skip_ws();
        col = cur.column();
        word = cur.word();
    }
    let predicate = match word.as_str() {
        "device" => {
            expect_char(cur, '.')?;
            let field_col = cur.column();
            let field = cur.word();
            if field != "mode" {
                return Err(cur.error_at(
                    field_col,
                    ErrorCode::UnknownPredicate,
                    format!("unknown device field `{field}`"),
                ));
            }
            expect_str(cur, "==")?;
            Predicate::ModeIs(parse_mode(cur)?)
        }
        "occupied" => {
            expect_char(cur, '(')?;
            parse_room_arg(cur)?;
            expect_char(cur, ')')?;
            Predicate::Occupied
        }
        "predicted_occupied" => {
            expect_char(cur, '(')?;
            parse_room_arg(cur)?;
            cur.skip_ws();
            let horizon_min = if cur.peek() == Some(',') {
                cur.bump();
                cur.skip_ws();
                let h_col = cur.column();
                let tok = cur.word();
                let minutes = tok
                    .strip_suffix("min")
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| {
                        cur.error_at(h_col, ErrorCode::Syntax, format!("expected `<int>min`, found `{tok}`"))
                    })?;
                if minutes == 0 {
                    return Err(cur.error_at(h_col, ErrorCode::Syntax, "horizon must be positive"));
                }
                Some(minutes)
            } else {
                None
            };
            expect_char(cur, ')')?;
            Predicate::PredictedOccupied { horizon_min }
        }
        "" => return Err(cur.error_at(col, ErrorCode::Syntax, "expected a condition")),
        other => return Err(cur.error_at(col, ErrorCode::UnknownPredicate, format!("unknown predicate `{other}`"))),
    };
    Ok(Condition { negated, predicate })
}

#[derive(Default)]
struct PartialRule {
    id: String,
    line: usize,
    trigger: Option<Trigger>,
    conditions: Vec<Condition>,
    actions: Vec<Action>,
}

impl PartialRule {
    fn finish(self) -> Result<Rule, ParseError> {
        let missing = |what: &str| {
            ParseError::new(
                self.line,
                1,
                ErrorCode::Syntax,
                format!("rule `{}` has no `{what}` clause", self.id),
            )
        };
        let trigger = self.trigger.ok_or_else(|| missing("on"))?;
        if self.conditions.is_empty() {
            return Err(missing("when"));
        }
        if self.actions.is_empty() {
            return Err(missing("then"));
        }
        Ok(Rule {
            id: self.id,
            trigger,
            conditions: self.conditions,
            actions: self.actions,
        })
    }
}

/// Parses `.rules` text into rules in file order.
pub fn parse_rules(text: &str) -> Result<Vec<Rule>, ParseError> {
    let mut rules: Vec<Rule> = Vec::new();
    let mut current: Option<PartialRule> = None;
    let mut ids = BTreeSet::new();

    for (line_no, line) in lines(text) {
        if is_blank_or_comment(line) {
            continue;
        }
        let mut cur = Cursor::new(line_no, line);
        let mut indent = 0;
        while let Some(c) = cur.peek() {
            match c {
                ' ' => {
                    indent += 1;
                    cur.bump();
                }
                '\t' => return Err(cur.error(ErrorCode::BadIndent, "tabs are not allowed in indentation")),
                _ => break,
            }
        }

        let kw_col = cur.column();
        let kw = cur.word();
        match (indent, kw.as_str()) {
            (0, "rule") => {
                if let Some(done) = current.take() {
                    rules.push(done.finish()?);
                }
                cur.skip_ws();
                let id_col = cur.column();
                let id = cur.word();
                if !is_slug(&id) {
                    return Err(cur.error_at(id_col, ErrorCode::Syntax, format!("invalid rule id `{id}`")));
                }
                expect_char(&mut cur, ':')?;
                cur.expect_end()?;
                if !ids.insert(id.clone()) {
                    return Err(cur.error_at(
                        id_col,
                        ErrorCode::DuplicateRuleId,
                        format!("rule `{id}` is defined twice"),
                    ));
                }
                current = Some(PartialRule {
                    id,
                    line: line_no,
                    ..Default::default()
                });
            }
            (0, _) => {
                return Err(cur.error_at(
                    kw_col,
                    ErrorCode::UnknownKeyword,
                    format!("expected `rule`, found `{kw}`"),
                ))
            }
            (2, _) => {
                let Some(rule) = current.as_mut() else {
                    return Err(cur.error_at(1, ErrorCode::BadIndent, "clause outside of a rule"));
                };
                match kw.as_str() {
                    "on" => {
                        if rule.trigger.is_some() || !rule.conditions.is_empty() || !rule.actions.is_empty() {
                            return Err(cur.error_at(
                                kw_col,
                                ErrorCode::Syntax,
                                "`on` must be the first and only trigger clause",
                            ));
                        }
                        cur.skip_ws();
                        let t_col = cur.column();
                        let word = cur.word();
                        rule.trigger = Some(match word.as_str() {
                            "tick" => Trigger::Tick,
                            "occupancy_change" => Trigger::OccupancyChange,
                            _ => {
                                return Err(cur.error_at(
                                    t_col,
                                    ErrorCode::UnknownKeyword,
                                    format!("unknown trigger `{word}`"),
                                ))
                            }
                        });
                    }
                    "when" => {
                        if rule.trigger.is_none() || !rule.conditions.is_empty() || !rule.actions.is_empty() {
                            return Err(cur.error_at(
                                kw_col,
                                ErrorCode::Syntax,
                                "`when` must follow `on` exactly once",
                            ));
                        }
                        loop {
                            rule.conditions.push(parse_condition(&mut cur)?);
                            cur.skip_ws();
                            if cur.at_end_or_comment() {
                                break;
                            }
                            let and_col = cur.column();
                            if cur.word() != "and" {
                                return Err(cur.error_at(and_col, ErrorCode::Syntax, "expected `and`"));
                            }
                        }
                    }
                    "then" => {
                        if rule.conditions.is_empty() {
                            return Err(cur.error_at(kw_col, ErrorCode::Syntax, "`then` must follow `when`"));
                        }
                        cur.skip_ws();
                        let set_col = cur.column();
                        if cur.word() != "set" {
                            return Err(cur.error_at(
                                set_col,
                                ErrorCode::Syntax,
                                "expected `set device.mode = <mode>`",
                            ));
                        }
                        expect_str(&mut cur, "device")?;
                        expect_char(&mut cur, '.')?;
                        let f_col = cur.column();
                        if cur.word() != "mode" {
                            return Err(cur.error_at(f_col, ErrorCode::Syntax, "only `device.mode` can be set"));
                        }
                        expect_char(&mut cur, '=')?;
                        rule.actions.push(Action::SetMode(parse_mode(&mut cur)?));
                    }
                    _ => return Err(cur.error_at(kw_col, ErrorCode::UnknownKeyword, format!("unknown clause `{kw}`"))),
                }
                cur.expect_end()?;
            }
            _ => {
                return Err(cur.error_at(
                    kw_col,
                    ErrorCode::BadIndent,
                    format!("indentation must be 0 or 2 spaces, found {indent}"),
                ))
            }
        }
    }
    if let Some(done) = current {
        rules.push(done.finish()?);
    }
    Ok(rules)
}

/// Historical occupancy oracle consulted by `predicted_occupied(...)`.
pub trait OccupancyPredictor {
    fn predicted_occupied(&self, room: &str, t_min: u32, horizon_min: u32) -> bool;
}

impl<P: OccupancyPredictor + ?Sized> OccupancyPredictor for &P {
    fn predicted_occupied(&self, room: &str, t_min: u32, horizon_min: u32) -> bool {
        (**self).predicted_occupied(room, t_min, horizon_min)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiredAction {
    pub rule_id: String,
    pub device_id: String,
    pub action: Action,
}

/// Two actions in one step disagreed about a device; `kept` won.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleConflict {
    pub device_id: String,
    pub kept_rule: String,
    pub kept: Mode,
    pub dropped_rule: String,
    pub dropped: Mode,
}

impl fmt::Display for RuleConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RuleConflict device {}: {} sets {} (kept), {} sets {} (dropped)",
            self.device_id, self.kept_rule, self.kept, self.dropped_rule, self.dropped
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evaluation {
    pub actions: Vec<FiredAction>,
    pub conflicts: Vec<RuleConflict>,
}

fn holds(
    cond: &Condition,
    room: &str,
    world: &WorldState,
    predictor: &dyn OccupancyPredictor,
    mode: Mode,
    default_horizon: u32,
) -> bool {
    let value = match cond.predicate {
        Predicate::ModeIs(m) => mode == m,
        Predicate::Occupied => world.occupancy.get(room).copied().unwrap_or(false),
        Predicate::PredictedOccupied { horizon_min } => {
            predictor.predicted_occupied(room, world.time_min, horizon_min.unwrap_or(default_horizon))
        }
    };
    value != cond.negated
}

/// Evaluates one step. Ordering of the result is (rule order, device id,
/// action order); actions that would not change a device's mode are dropped.
pub fn evaluate(
    rules: &[Rule],
    world: &WorldState,
    predictor: &dyn OccupancyPredictor,
    default_horizon: u32,
) -> Evaluation {
    let mut candidates: Vec<(usize, FiredAction)> = Vec::new();
    for (order, rule) in rules.iter().enumerate() {
        let fires = match rule.trigger {
            Trigger::Tick => true,
            Trigger::OccupancyChange => world.occupancy_changed,
        };
        if !fires {
            continue;
        }
        for (device, &mode) in &world.device_modes {
            let room = world.device_rooms.get(device).map(String::as_str).unwrap_or("");
            if rule
                .conditions
                .iter()
                .all(|c| holds(c, room, world, predictor, mode, default_horizon))
            {
                for action in &rule.actions {
                    candidates.push((
                        order,
                        FiredAction {
                            rule_id: rule.id.clone(),
                            device_id: device.clone(),
                            action: *action,
                        },
                    ));
                }
            }
        }
    }

    let mut winner: BTreeMap<&str, (String, Mode)> = BTreeMap::new();
    let mut out = Evaluation::default();
    let mut kept = Vec::new();
    for (_, fired) in &candidates {
        let Action::SetMode(mode) = fired.action;
        match winner.get(fired.device_id.as_str()) {
            None => {
                winner.insert(&fired.device_id, (fired.rule_id.clone(), mode));
                kept.push(fired);
            }
            Some((_, m)) if *m == mode => {}
            Some((rule, m)) => out.conflicts.push(RuleConflict {
                device_id: fired.device_id.clone(),
                kept_rule: rule.clone(),
                kept: *m,
                dropped_rule: fired.rule_id.clone(),
                dropped: mode,
            }),
        }
    }
    out.actions = kept
        .into_iter()
        .filter(|f| {
            let Action::SetMode(mode) = f.action;
            world.device_modes.get(&f.device_id) != Some(&mode)
        })
        .cloned()
        .collect();
    out
}
