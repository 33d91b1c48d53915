//! Built-in smart-home and ICT ontologies, the case-study cross-links, and
//! the stakeholder requirements registry.
//!
//! The ontologies are built in code; the files under `seeds/` are their
//! canonical serializations and are checked byte-for-byte against these
//! builders. The requirement-to-concept mapping is data
//! (`seeds/requirements.tsv`) and is embedded at compile time.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::crossdep::CrossLink;
use crate::ontology::{ConceptId, ConceptKind, Ontology};
use crate::text::{lines, ErrorCode, ParseError};

pub const SMART_HOME_SLUG: &str = "smart_home";
pub const ICT_SLUG: &str = "ict";

/// Embedded copy of `seeds/requirements.tsv`.
pub const REQUIREMENTS_TSV: &str = include_str!("../../../seeds/requirements.tsv");

/// ICT concepts with no direct textual source, kept in sync with
/// `seeds/ict_provenance.txt`.
pub const ICT_INVENTED: &[&str] = &[
    "ict:devices.sensors",
    "ict:decision_making_policy_making.reasoning_engine",
];

/// Nested literal used to describe a subtree compactly.
enum Node {
    /// Non-leaf below the domain/class levels, or a leaf named as a subclass.
    Sub(&'static str, &'static [Node]),
    Feat(&'static str),
}

use Node::{Feat, Sub};

struct ClassSpec {
    label: &'static str,
    children: &'static [Node],
}

struct DomainSpec {
    label: &'static str,
    classes: &'static [ClassSpec],
}

const fn class(label: &'static str, children: &'static [Node]) -> ClassSpec {
    ClassSpec { label, children }
}

const SMART_HOME: &[DomainSpec] = &[
    DomainSpec {
        label: "Building Information",
        classes: &[
            class("Address", &[Feat("Latitude"), Feat("Longitude")]),
            class(
                "Building Spaces",
                &[
                    Sub("Livingroom", &[]),
                    Sub("Bedroom", &[]),
                    Sub("Hallway", &[]),
                    Sub("Kitchen", &[]),
                ],
            ),
            class(
                "Building Resources",
                &[
                    Sub("Lighting", &[]),
                    Sub(
                        "Heating",
                        &[
                            Sub(
                                "Heating System",
                                &[Feat("Combo Boiler"), Feat("System Boiler"), Feat("Back Boiler")],
                            ),
                            Sub(
                                "Distribution System",
                                &[Feat("No. of Radiators"), Feat("Size of Radiators"), Feat("Water Tank")],
                            ),
                        ],
                    ),
                    Sub(
                        "Appliances",
                        &[Sub("Application Mode", &[Feat("Off"), Feat("On"), Feat("Stand By")])],
                    ),
                ],
            ),
            class(
                "Basic Information",
                &[
                    Sub("EPC Rating", &[]),
                    Sub("Air Test", &[]),
                    Sub("Archetype", &[]),
                    Sub("Ownership", &[]),
                    Sub("Building Age", &[]),
                    Sub("BIM Model", &[]),
                    Sub(
                        "Physical Attributes",
                        &[Sub(
                            "Fabric Efficiency",
                            &[
                                Feat("Level of Insulation"),
                                Feat("Quality of Building"),
                                Feat("Orientation Level"),
                                Feat("Design Decisions"),
                                Feat("Ventilation"),
                            ],
                        )],
                    ),
                ],
            ),
        ],
    },
    DomainSpec {
        label: "Neighbourhood/Regional Information",
        classes: &[
            class(
                "Site Information",
                &[
                    Sub("City", &[]),
                    Sub("Neighbourhood", &[Feat("Lower Layer Super Output (LSOA)")]),
                    Sub(
                        "Local facilities",
                        &[Feat("Grid (Nearest substation)"), Feat("Sub stations")],
                    ),
                ],
            ),
            class("Climate information", &[]),
        ],
    },
    DomainSpec {
        label: "Environmental Factors",
        classes: &[
            class(
                "Environmental parameter",
                &[
                    Feat("Temperature"),
                    Feat("Humidity"),
                    Sub(
                        "Air quality",
                        &[
                            Sub(
                                "Pollution level",
                                &[
                                    Feat("Carbon mono oxide (CO)"),
                                    Feat("Nitrogen di oxide (NO)"),
                                    Feat("Volatile organic components (VOC)"),
                                    Sub("Particulates", &[Feat("Dust"), Feat("Smoke particles")]),
                                ],
                            ),
                            Feat("Pollen level"),
                        ],
                    ),
                    Feat("Noise level"),
                ],
            ),
            class(
                "Weather",
                &[
                    Feat("Dry"),
                    Sub("Rain", &[Feat("Rainfall")]),
                    Sub("Snow", &[Feat("Snowfall")]),
                    Sub("Wind", &[Feat("Wind speed"), Feat("Direction of speed over time")]),
                ],
            ),
        ],
    },
    DomainSpec {
        label: "Human Factors",
        classes: &[
            class(
                "Demographic information",
                &[
                    Feat("Age"),
                    Feat("Gender"),
                    Feat("Occupation"),
                    Feat("Awareness"),
                    Feat("Health status"),
                    Feat("Ethnicity"),
                    Sub(
                        "Family composition",
                        &[
                            Feat("Single"),
                            Feat("Couple"),
                            Sub(
                                "Couple with children",
                                &[Feat("Children with primary age"), Feat("Children with secondary age")],
                            ),
                        ],
                    ),
                ],
            ),
            class(
                "Behavioural information",
                &[
                    Sub(
                        "Personal preferences",
                        &[Sub("Attitude", &[Feat("Financial"), Feat("Ethical")])],
                    ),
                    Feat("Thermal comfort"),
                    Feat("Visual comfort"),
                ],
            ),
        ],
    },
    DomainSpec {
        label: "Services",
        classes: &[
            class("Primary service", &[Feat("Heating"), Feat("Cooling")]),
            class("Secondary service", &[Feat("Appliances"), Feat("Lighting")]),
            class(
                "Energy",
                &[Feat("Electricity"), Feat("Gas"), Feat("Renewable energy usage")],
            ),
        ],
    },
];

const ICT: &[DomainSpec] = &[
    DomainSpec {
        label: "Big Data Management",
        classes: &[class("Historical Data", &[])],
    },
    DomainSpec {
        label: "Devices",
        classes: &[class("Sensors", &[Feat("Occupancy Sensor")])],
    },
    DomainSpec {
        label: "Communication Infrastructure",
        classes: &[],
    },
    DomainSpec {
        label: "Decision Making/Policy Making",
        classes: &[class("Reasoning Engine", &[])],
    },
];

fn add_nodes(onto: &mut Ontology, parent: &ConceptId, nodes: &[Node]) {
    for node in nodes {
        match node {
            Sub(label, children) => {
                let id = onto
                    .add_concept(Some(parent), label, ConceptKind::SubClass)
                    .expect("seed subclass");
                add_nodes(onto, &id, children);
            }
            Feat(label) => {
                onto.add_concept(Some(parent), label, ConceptKind::Feature)
                    .expect("seed feature");
            }
        }
    }
}

fn build(slug: &str, title: &str, domains: &[DomainSpec]) -> Ontology {
    let mut onto = Ontology::new(slug, title).expect("seed slug");
    for domain in domains {
        let d = onto
            .add_concept(None, domain.label, ConceptKind::Domain)
            .expect("seed domain");
        for class in domain.classes {
            let c = onto
                .add_concept(Some(&d), class.label, ConceptKind::Class)
                .expect("seed class");
            add_nodes(&mut onto, &c, class.children);
        }
    }
    onto
}

/// The smart-home data ontology: five domains and everything beneath them.
pub fn build_smart_home() -> Ontology {
    build(SMART_HOME_SLUG, "Smart Home Data Ontology", SMART_HOME)
}

/// The ICT ontology: four domains with the minimal subtree the case study needs.
pub fn build_ict() -> Ontology {
    build(ICT_SLUG, "ICT Ontology", ICT)
}

/// Cross-links for the standby-shutdown case study.
pub fn build_case_study_links() -> Vec<CrossLink> {
    let link = |s: &str, t: &str, rel: &str| {
        CrossLink::new(s.parse().expect("seed id"), t.parse().expect("seed id"), rel).expect("seed link")
    };
    vec![
        link(
            "ict:devices.sensors.occupancy_sensor",
            "smart_home:building_information.building_spaces",
            "monitors",
        ),
        link(
            "ict:big_data_management.historical_data",
            "smart_home:human_factors.behavioural_information",
            "records",
        ),
        link(
            "ict:decision_making_policy_making.reasoning_engine",
            "smart_home:building_information.building_resources.appliances.application_mode",
            "controls",
        ),
    ]
}

/// Canonical `seeds/ict_provenance.txt` content.
pub fn ict_provenance() -> String {
    ICT_INVENTED.iter().map(|id| format!("{id}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stakeholder {
    Occupiers,
    EnergyProviders,
    HousingAgencies,
    Government,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown stakeholder `{0}` (expected occupiers, energy_providers, housing_agencies or government)")]
pub struct UnknownStakeholder(pub String);

impl Stakeholder {
    pub const ALL: [Stakeholder; 4] = [
        Stakeholder::Occupiers,
        Stakeholder::EnergyProviders,
        Stakeholder::HousingAgencies,
        Stakeholder::Government,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Stakeholder::Occupiers => "occupiers",
            Stakeholder::EnergyProviders => "energy_providers",
            Stakeholder::HousingAgencies => "housing_agencies",
            Stakeholder::Government => "government",
        }
    }
}

impl fmt::Display for Stakeholder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Stakeholder {
    type Err = UnknownStakeholder;

    /// Accepts the slug form, case-insensitively, with `-` for `_`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.slug() == norm)
            .ok_or_else(|| UnknownStakeholder(s.to_owned()))
    }
}

/// One stakeholder demand and the concepts whose data serves it.
///
/// An empty concept set marks a strategic-level demand with no data concept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Requirement {
    pub stakeholder: Stakeholder,
    pub index: u32,
    pub text: String,
    pub concepts: BTreeSet<ConceptId>,
}

impl Requirement {
    pub fn is_strategic(&self) -> bool {
        self.concepts.is_empty()
    }

    /// `stakeholder<TAB>index<TAB>text<TAB>ids`
    pub fn tsv_row(&self) -> String {
        let ids: Vec<String> = self.concepts.iter().map(ToString::to_string).collect();
        format!("{}\t{}\t{}\t{}", self.stakeholder, self.index, self.text, ids.join(","))
    }
}

/// Parses the requirements table. Lines starting with `#` and blank lines
/// are skipped; `(stakeholder, index)` pairs must be unique.
pub fn parse_requirements(text: &str) -> Result<Vec<Requirement>, ParseError> {
    let mut out: Vec<Requirement> = Vec::new();
    for (line_no, line) in lines(text) {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(ParseError::new(
                line_no,
                1,
                ErrorCode::Syntax,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let col_of = |field: usize| 1 + fields[..field].iter().map(|f| f.chars().count() + 1).sum::<usize>();
        let stakeholder: Stakeholder = fields[0]
            .parse()
            .map_err(|e: UnknownStakeholder| ParseError::new(line_no, 1, ErrorCode::UnknownKeyword, e.to_string()))?;
        let index: u32 = fields[1].parse().ok().filter(|i| *i > 0).ok_or_else(|| {
            ParseError::new(
                line_no,
                col_of(1),
                ErrorCode::Syntax,
                "index must be a positive integer",
            )
        })?;
        if fields[2].trim().is_empty() {
            return Err(ParseError::new(
                line_no,
                col_of(2),
                ErrorCode::Syntax,
                "requirement text is empty",
            ));
        }
        let mut concepts = BTreeSet::new();
        if !fields[3].is_empty() {
            let mut col = col_of(3);
            for raw in fields[3].split(',') {
                let id: ConceptId = raw.parse().map_err(|_| {
                    ParseError::new(
                        line_no,
                        col,
                        ErrorCode::BadQualifiedId,
                        format!("`{raw}` is not a qualified id"),
                    )
                })?;
                concepts.insert(id);
                col += raw.chars().count() + 1;
            }
        }
        if out.iter().any(|r| r.stakeholder == stakeholder && r.index == index) {
            return Err(ParseError::new(
                line_no,
                1,
                ErrorCode::Syntax,
                format!("duplicate requirement {stakeholder} #{index}"),
            ));
        }
        out.push(Requirement {
            stakeholder,
            index,
            text: fields[2].to_owned(),
            concepts,
        });
    }
    Ok(out)
}

/// The shipped registry. Every mapped id resolves in the seed ontologies.
pub fn build_requirements() -> Vec<Requirement> {
    parse_requirements(REQUIREMENTS_TSV).expect("embedded requirements table parses")
}
