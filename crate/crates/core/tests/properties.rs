use std::collections::BTreeSet;

use proptest::prelude::*;

use crossdep::crossdep::{CrossLink, DepGraph};
use crossdep::homesim::{train, History, HistorySpan};
use crossdep::ontology::{is_slug, slugify, ConceptId, ConceptKind, Ontology};
use crossdep::rules::{parse_rules, print_rules, Action, Condition, Mode, Predicate, Rule, Trigger};
use crossdep::seed::{build_case_study_links, build_ict, build_smart_home};
use crossdep::text::{parse_ontology, serialize_ontology};

/// (parent pick, kind pick, label); the parent pick indexes concepts added so
/// far, with out-of-range picks meaning "new root".
type Step = (usize, u8, String);

fn build(slug: &str, steps: &[Step]) -> Ontology {
    let mut onto = Ontology::new(slug, "Generated \"quoted\" \\ title").unwrap();
    let mut ids: Vec<ConceptId> = Vec::new();
    for (pick, kind, label) in steps {
        let parent = ids.get(*pick).cloned();
        let kind = match (&parent, kind % 2) {
            (None, _) => ConceptKind::Domain,
            (Some(p), _) if p.depth() == 0 => ConceptKind::Class,
            (Some(_), 0) => ConceptKind::SubClass,
            (Some(_), _) => ConceptKind::Feature,
        };
        if let Ok(id) = onto.add_concept(parent.as_ref(), label, kind) {
            ids.push(id);
        }
    }
    onto
}

fn steps(max: usize) -> impl Strategy<Value = Vec<Step>> {
    prop::collection::vec((0usize..40, any::<u8>(), "[A-Za-z0-9 \"\\\\/()é-]{1,10}"), 0..max)
}

fn mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::Off), Just(Mode::Standby), Just(Mode::On)]
}

fn condition() -> impl Strategy<Value = Condition> {
    let predicate = prop_oneof![
        mode().prop_map(Predicate::ModeIs),
        Just(Predicate::Occupied),
        prop::option::of(1u32..2000).prop_map(|horizon_min| Predicate::PredictedOccupied { horizon_min }),
    ];
    (any::<bool>(), predicate).prop_map(|(negated, predicate)| Condition { negated, predicate })
}

fn rules() -> impl Strategy<Value = Vec<Rule>> {
    let rule = (
        prop_oneof![Just(Trigger::Tick), Just(Trigger::OccupancyChange)],
        prop::collection::vec(condition(), 1..4),
        prop::collection::vec(mode().prop_map(Action::SetMode), 1..3),
    );
    prop::collection::vec(rule, 0..5).prop_map(|rs| {
        rs.into_iter()
            .enumerate()
            .map(|(i, (trigger, conditions, actions))| Rule {
                id: format!("rule_{i}"),
                trigger,
                conditions,
                actions,
            })
            .collect()
    })
}

fn history() -> impl Strategy<Value = History> {
    let span = (0u32..4, 0usize..2, 0u32..1440, 1u32..600).prop_map(|(day, room, start, len)| HistorySpan {
        day,
        room: ["hall", "den"][room].to_owned(),
        start_min: start,
        end_min: (start + len).min(1440),
    });
    prop::collection::vec(span, 0..8).prop_map(|spans| History::new(spans).with_rooms(["hall", "den"]))
}

proptest! {
    #[test]
    fn slugify_is_idempotent(label in "\\PC{0,24}") {
        if let Ok(slug) = slugify(&label) {
            prop_assert!(is_slug(&slug));
            prop_assert_eq!(slugify(&slug).unwrap(), slug);
        }
    }

    #[test]
    fn onto_text_round_trips(steps in steps(40)) {
        let onto = build("gen", &steps);
        prop_assert!(onto.validate().is_empty());
        let text = serialize_ontology(&onto);
        let back = parse_ontology(&text).unwrap();
        prop_assert_eq!(serialize_ontology(&back), text);
        prop_assert_eq!(back.total_count(), onto.total_count());
    }

    #[test]
    fn rules_round_trip(rules in rules()) {
        let text = print_rules(&rules);
        let back = parse_rules(&text).unwrap();
        prop_assert_eq!(&back, &rules);
        prop_assert_eq!(print_rules(&back), text);
    }

    #[test]
    fn prediction_is_monotone_in_horizon(
        h in history(),
        slot in prop::sample::select(vec![1u32, 15, 30, 60, 90]),
        t in 0u32..3000,
        h1 in 1u32..1500,
        extra in 0u32..300,
        theta in 0u32..=8,
    ) {
        let model = train::<f64>(&h, slot).unwrap().with_threshold(f64::from(theta) / 8.0).unwrap();
        for room in ["hall", "den", "attic"] {
            if model.predicted_occupied(room, t, h1) {
                prop_assert!(model.predicted_occupied(room, t, h1 + extra));
            }
        }
    }

    #[test]
    fn closure_is_monotone_and_symmetric(a in steps(25), b in steps(25), link_picks in prop::collection::vec((0usize..50, 0usize..50), 0..15)) {
        let left = build("left", &a);
        let right = build("right", &b);
        let lids: Vec<ConceptId> = left.concepts().map(|c| c.id().clone()).collect();
        let rids: Vec<ConceptId> = right.concepts().map(|c| c.id().clone()).collect();
        let mut links = Vec::new();
        let mut seen = BTreeSet::new();
        if !lids.is_empty() && !rids.is_empty() {
            for (i, j) in link_picks {
                let key = (i % lids.len(), j % rids.len());
                if seen.insert(key) {
                    links.push(CrossLink::new(lids[key.0].clone(), rids[key.1].clone(), "feeds").unwrap());
                }
            }
        }
        let g = DepGraph::new([left, right], links).unwrap();
        let all: Vec<ConceptId> = lids.into_iter().chain(rids).collect();
        for x in &all {
            let mut prev = BTreeSet::new();
            for k in 1..=4 {
                let c = g.dependency_closure(x, k).unwrap();
                prop_assert!(prev.is_subset(&c));
                prop_assert!(!c.contains(x));
                for y in &c {
                    prop_assert!(g.dependency_closure(y, k).unwrap().contains(x));
                }
                prev = c;
            }
        }
    }
}

#[test]
fn seed_closure_is_symmetric() {
    let g = DepGraph::new([build_smart_home(), build_ict()], build_case_study_links()).unwrap();
    let all: Vec<ConceptId> = g
        .ontologies()
        .flat_map(|o| o.concepts().map(|c| c.id().clone()))
        .collect();
    for k in 1..=3 {
        let closures: Vec<BTreeSet<ConceptId>> = all.iter().map(|x| g.dependency_closure(x, k).unwrap()).collect();
        for (i, x) in all.iter().enumerate() {
            for (j, y) in all.iter().enumerate() {
                assert_eq!(closures[i].contains(y), closures[j].contains(x), "{x} / {y} at k={k}");
            }
        }
    }
}
