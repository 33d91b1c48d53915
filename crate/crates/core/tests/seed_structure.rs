use std::collections::BTreeSet;

use crossdep::ontology::{ConceptId, ConceptKind, Ontology};
use crossdep::seed::{build_case_study_links, build_ict, build_smart_home, ict_provenance, ICT_INVENTED};

/// Hand-reviewed pre-order enumeration of the smart-home taxonomy.
const SMART_HOME: &[(usize, &str, &str)] = &[
    (0, "domain", "Building Information"),
    (1, "class", "Address"),
    (2, "feature", "Latitude"),
    (2, "feature", "Longitude"),
    (1, "class", "Building Spaces"),
    (2, "subclass", "Livingroom"),
    (2, "subclass", "Bedroom"),
    (2, "subclass", "Hallway"),
    (2, "subclass", "Kitchen"),
    (1, "class", "Building Resources"),
    (2, "subclass", "Lighting"),
    (2, "subclass", "Heating"),
    (3, "subclass", "Heating System"),
    (4, "feature", "Combo Boiler"),
    (4, "feature", "System Boiler"),
    (4, "feature", "Back Boiler"),
    (3, "subclass", "Distribution System"),
    (4, "feature", "No. of Radiators"),
    (4, "feature", "Size of Radiators"),
    (4, "feature", "Water Tank"),
    (2, "subclass", "Appliances"),
    (3, "subclass", "Application Mode"),
    (4, "feature", "Off"),
    (4, "feature", "On"),
    (4, "feature", "Stand By"),
    (1, "class", "Basic Information"),
    (2, "subclass", "EPC Rating"),
    (2, "subclass", "Air Test"),
    (2, "subclass", "Archetype"),
    (2, "subclass", "Ownership"),
    (2, "subclass", "Building Age"),
    (2, "subclass", "BIM Model"),
    (2, "subclass", "Physical Attributes"),
    (3, "subclass", "Fabric Efficiency"),
    (4, "feature", "Level of Insulation"),
    (4, "feature", "Quality of Building"),
    (4, "feature", "Orientation Level"),
    (4, "feature", "Design Decisions"),
    (4, "feature", "Ventilation"),
    (0, "domain", "Neighbourhood/Regional Information"),
    (1, "class", "Site Information"),
    (2, "subclass", "City"),
    (2, "subclass", "Neighbourhood"),
    (3, "feature", "Lower Layer Super Output (LSOA)"),
    (2, "subclass", "Local facilities"),
    (3, "feature", "Grid (Nearest substation)"),
    (3, "feature", "Sub stations"),
    (1, "class", "Climate information"),
    (0, "domain", "Environmental Factors"),
    (1, "class", "Environmental parameter"),
    (2, "feature", "Temperature"),
    (2, "feature", "Humidity"),
    (2, "subclass", "Air quality"),
    (3, "subclass", "Pollution level"),
    (4, "feature", "Carbon mono oxide (CO)"),
    (4, "feature", "Nitrogen di oxide (NO)"),
    (4, "feature", "Volatile organic components (VOC)"),
    (4, "subclass", "Particulates"),
    (5, "feature", "Dust"),
    (5, "feature", "Smoke particles"),
    (3, "feature", "Pollen level"),
    (2, "feature", "Noise level"),
    (1, "class", "Weather"),
    (2, "feature", "Dry"),
    (2, "subclass", "Rain"),
    (3, "feature", "Rainfall"),
    (2, "subclass", "Snow"),
    (3, "feature", "Snowfall"),
    (2, "subclass", "Wind"),
    (3, "feature", "Wind speed"),
    (3, "feature", "Direction of speed over time"),
    (0, "domain", "Human Factors"),
    (1, "class", "Demographic information"),
    (2, "feature", "Age"),
    (2, "feature", "Gender"),
    (2, "feature", "Occupation"),
    (2, "feature", "Awareness"),
    (2, "feature", "Health status"),
    (2, "feature", "Ethnicity"),
    (2, "subclass", "Family composition"),
    (3, "feature", "Single"),
    (3, "feature", "Couple"),
    (3, "subclass", "Couple with children"),
    (4, "feature", "Children with primary age"),
    (4, "feature", "Children with secondary age"),
    (1, "class", "Behavioural information"),
    (2, "subclass", "Personal preferences"),
    (3, "subclass", "Attitude"),
    (4, "feature", "Financial"),
    (4, "feature", "Ethical"),
    (2, "feature", "Thermal comfort"),
    (2, "feature", "Visual comfort"),
    (0, "domain", "Services"),
    (1, "class", "Primary service"),
    (2, "feature", "Heating"),
    (2, "feature", "Cooling"),
    (1, "class", "Secondary service"),
    (2, "feature", "Appliances"),
    (2, "feature", "Lighting"),
    (1, "class", "Energy"),
    (2, "feature", "Electricity"),
    (2, "feature", "Gas"),
    (2, "feature", "Renewable energy usage"),
];

const ICT_DOMAINS: &[&str] = &[
    "Big Data Management",
    "Devices",
    "Communication Infrastructure",
    "Decision Making/Policy Making",
];

/// ICT labels taken from source terms rather than invented.
const ICT_SOURCED: &[&str] = &[
    "Big Data Management",
    "Devices",
    "Communication Infrastructure",
    "Decision Making/Policy Making",
    "Historical Data",
    "Occupancy Sensor",
];

fn qid(s: &str) -> ConceptId {
    s.parse().unwrap()
}

fn child_labels(onto: &Ontology, id: &str) -> Vec<String> {
    onto.children_of(&qid(id))
        .unwrap()
        .iter()
        .map(|c| c.label().to_owned())
        .collect()
}

#[test]
fn smart_home_matches_enumeration() {
    let onto = build_smart_home();
    let got: Vec<(usize, &str, &str)> = onto
        .preorder()
        .into_iter()
        .map(|(d, c)| (d, c.kind().keyword(), c.label()))
        .collect();
    assert_eq!(got, SMART_HOME);
    assert_eq!(onto.total_count(), 103);
    assert!(onto.validate().is_empty());
}

#[test]
fn smart_home_headline_counts() {
    let onto = build_smart_home();
    let roots: Vec<&str> = onto.roots().iter().map(|r| onto.get(r).unwrap().label()).collect();
    assert_eq!(
        roots,
        [
            "Building Information",
            "Neighbourhood/Regional Information",
            "Environmental Factors",
            "Human Factors",
            "Services"
        ]
    );
    assert_eq!(child_labels(&onto, "smart_home:building_information").len(), 4);
    assert_eq!(
        child_labels(&onto, "smart_home:building_information.basic_information").len(),
        7
    );
    assert_eq!(
        child_labels(
            &onto,
            "smart_home:building_information.building_resources.appliances.application_mode"
        ),
        ["Off", "On", "Stand By"]
    );
    assert_eq!(
        child_labels(&onto, "smart_home:environmental_factors.weather"),
        ["Dry", "Rain", "Snow", "Wind"]
    );
    // The node itself plus 3 classes and 7 features.
    assert_eq!(onto.subtree_count(&qid("smart_home:services")).unwrap(), 11);
    let mode = onto
        .concept(&qid(
            "smart_home:building_information.building_resources.appliances.application_mode.stand_by",
        ))
        .unwrap();
    assert_eq!(mode.kind(), ConceptKind::Feature);
}

#[test]
fn subtree_count_is_one_plus_children() {
    fn check(onto: &Ontology, id: &ConceptId) -> usize {
        let sum: usize = onto.get(id).unwrap().children().iter().map(|c| check(onto, c)).sum();
        assert_eq!(onto.subtree_count(id).unwrap(), 1 + sum, "{id}");
        1 + sum
    }
    for onto in [build_smart_home(), build_ict()] {
        let total: usize = onto.roots().iter().map(|r| check(&onto, r)).sum();
        assert_eq!(total, onto.total_count());
    }
}

#[test]
fn kinds_follow_depth() {
    for onto in [build_smart_home(), build_ict()] {
        for (depth, c) in onto.preorder() {
            assert!(c.kind().allowed_at_depth(depth), "{}", c.id());
            if c.kind() == ConceptKind::Feature {
                assert!(c.children().is_empty());
            }
        }
    }
}

#[test]
fn ict_domains_and_case_study_concepts() {
    let onto = build_ict();
    let roots: Vec<&str> = onto.roots().iter().map(|r| onto.get(r).unwrap().label()).collect();
    assert_eq!(roots, ICT_DOMAINS);
    assert_eq!(
        onto.concept(&qid("ict:devices.sensors.occupancy_sensor"))
            .unwrap()
            .kind(),
        ConceptKind::Feature
    );
    assert!(onto.contains(&qid("ict:big_data_management.historical_data")));
    assert!(onto.contains(&qid("ict:decision_making_policy_making.reasoning_engine")));
    assert!(onto.validate().is_empty());
}

#[test]
fn every_ict_label_is_sourced_or_flagged_invented() {
    let onto = build_ict();
    let listed: BTreeSet<String> = ict_provenance().lines().map(str::to_owned).collect();
    assert_eq!(listed.len(), ICT_INVENTED.len());
    for c in onto.concepts() {
        let sourced = ICT_SOURCED.contains(&c.label());
        let flagged = listed.contains(&c.id().to_string());
        assert!(
            sourced != flagged,
            "{} must be exactly one of sourced or invented",
            c.id()
        );
    }
    for id in &listed {
        assert!(onto.contains(&qid(id)), "provenance entry {id} is not a concept");
    }
}

#[test]
fn case_study_links_resolve_across_ontologies() {
    let sh = build_smart_home();
    let ict = build_ict();
    let links = build_case_study_links();
    let rels: Vec<&str> = links.iter().map(|l| l.relation()).collect();
    assert_eq!(rels, ["monitors", "records", "controls"]);
    for l in &links {
        assert_eq!(l.source().ontology(), "ict");
        assert!(ict.contains(l.source()));
        assert!(sh.contains(l.target()));
    }
}
