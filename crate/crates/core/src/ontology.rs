//! Typed concept forest: `Domain -> Class -> SubClass/Feature`.
//!
//! Concepts are identified by label-derived slug paths, so a concept's id
//! encodes its whole ancestry (`smart_home:services.energy.gas`). The
//! [`Ontology`] owns an index of every concept plus the ordered list of roots;
//! [`Ontology::validate`] re-checks every structural invariant and reports
//! violations as data.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("label is empty after slugification")]
    EmptyLabel,
    #[error("invalid slug `{0}`")]
    BadSlug(String),
    #[error("invalid qualified id `{0}`")]
    BadId(String),
    #[error("`{slug}` already exists under {parent}")]
    DuplicateSibling { parent: String, slug: String },
    #[error("{kind} is not allowed at depth {depth}{}", if *.parent_is_feature { " (parent is a feature)" } else { "" })]
    IllegalKind {
        kind: ConceptKind,
        depth: usize,
        parent_is_feature: bool,
    },
    #[error("unknown parent {0}")]
    UnknownParent(ConceptId),
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
}

/// Level of a concept in the forest. Ordered from root to leaf.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConceptKind {
    Domain,
    Class,
    SubClass,
    Feature,
}

impl ConceptKind {
    pub const ALL: [ConceptKind; 4] = [
        ConceptKind::Domain,
        ConceptKind::Class,
        ConceptKind::SubClass,
        ConceptKind::Feature,
    ];

    /// Keyword used in `.onto` files and tree output.
    pub fn keyword(self) -> &'static str {
        match self {
            ConceptKind::Domain => "domain",
            ConceptKind::Class => "class",
            ConceptKind::SubClass => "subclass",
            ConceptKind::Feature => "feature",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Whether this kind may sit at `depth` (root = 0).
    pub fn allowed_at_depth(self, depth: usize) -> bool {
        match depth {
            0 => self == ConceptKind::Domain,
            1 => self == ConceptKind::Class,
            _ => matches!(self, ConceptKind::SubClass | ConceptKind::Feature),
        }
    }
}

impl fmt::Display for ConceptKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// True iff `s` matches `[a-z0-9]+(_[a-z0-9]+)*`.
pub fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && s.split('_')
            .all(|part| !part.is_empty() && part.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit()))
}

/// Lowercases `label` and collapses every run of non-alphanumerics to `_`.
///
/// Non-ASCII letters are treated as separators so the result is always a
/// valid slug.
pub fn slugify(label: &str) -> Result<String, OntologyError> {
    let mut out = String::with_capacity(label.len());
    let mut pending_sep = false;
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.push(c.to_ascii_lowercase());
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        Err(OntologyError::EmptyLabel)
    } else {
        Ok(out)
    }
}

/// Qualified concept id, `<ontology>:<seg0>.<seg1>...`.
///
/// Ordering is the byte order of the string form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConceptId {
    ontology: String,
    path: Vec<String>,
}

impl ConceptId {
    pub fn new<S: Into<String>>(
        ontology: impl Into<String>,
        path: impl IntoIterator<Item = S>,
    ) -> Result<Self, OntologyError> {
        let ontology = ontology.into();
        let path: Vec<String> = path.into_iter().map(Into::into).collect();
        if !is_slug(&ontology) {
            return Err(OntologyError::BadSlug(ontology));
        }
        if path.is_empty() {
            return Err(OntologyError::BadId(format!("{ontology}:")));
        }
        if let Some(bad) = path.iter().find(|s| !is_slug(s)) {
            return Err(OntologyError::BadSlug(bad.clone()));
        }
        Ok(ConceptId { ontology, path })
    }

    pub fn root(ontology: &str, slug: &str) -> Result<Self, OntologyError> {
        Self::new(ontology, [slug])
    }

    pub fn ontology(&self) -> &str {
        &self.ontology
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// 0 for roots.
    pub fn depth(&self) -> usize {
        self.path.len() - 1
    }

    pub fn last_segment(&self) -> &str {
        self.path.last().expect("path is never empty")
    }

    pub fn parent(&self) -> Option<ConceptId> {
        (self.path.len() > 1).then(|| ConceptId {
            ontology: self.ontology.clone(),
            path: self.path[..self.path.len() - 1].to_vec(),
        })
    }

    /// Child id with `slug` appended. `slug` must already be a valid slug.
    pub fn child(&self, slug: &str) -> ConceptId {
        debug_assert!(is_slug(slug));
        let mut path = self.path.clone();
        path.push(slug.to_owned());
        ConceptId {
            ontology: self.ontology.clone(),
            path,
        }
    }

    /// True when `self` is `other` or one of its descendants.
    pub fn is_within(&self, other: &ConceptId) -> bool {
        self.ontology == other.ontology && self.path.starts_with(&other.path)
    }

    fn bytes(&self) -> impl Iterator<Item = u8> + '_ {
        let path = self.path.iter().enumerate().flat_map(|(i, seg)| {
            let sep: &[u8] = if i == 0 { b"" } else { b"." };
            sep.iter().copied().chain(seg.bytes())
        });
        self.ontology.bytes().chain(std::iter::once(b':')).chain(path)
    }
}

impl Ord for ConceptId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bytes().cmp(other.bytes())
    }
}

impl PartialOrd for ConceptId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ConceptId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.ontology, self.path.join("."))
    }
}

impl FromStr for ConceptId {
    type Err = OntologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || OntologyError::BadId(s.to_owned());
        let (onto, rest) = s.split_once(':').ok_or_else(bad)?;
        if !is_slug(onto) || rest.is_empty() {
            return Err(bad());
        }
        let path: Vec<&str> = rest.split('.').collect();
        if !path.iter().all(|seg| is_slug(seg)) {
            return Err(bad());
        }
        ConceptId::new(onto, path).map_err(|_| bad())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    id: ConceptId,
    label: String,
    kind: ConceptKind,
    children: Vec<ConceptId>,
}

impl Concept {
    /// Raw constructor; no invariants are checked here (see [`Ontology::validate`]).
    pub fn new(id: ConceptId, label: impl Into<String>, kind: ConceptKind, children: Vec<ConceptId>) -> Self {
        Concept {
            id,
            label: label.into(),
            kind,
            children,
        }
    }

    pub fn id(&self) -> &ConceptId {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> ConceptKind {
        self.kind
    }

    pub fn children(&self) -> &[ConceptId] {
        &self.children
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationCode {
    IllegalKind,
    FeatureWithChildren,
    DanglingChild,
    BadChildId,
    DuplicateChild,
    Orphan,
    LabelMismatch,
    KeyMismatch,
    WrongOntology,
    BadRoot,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub concept: ConceptId,
    pub code: ViolationCode,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.concept, self.code, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    slug: String,
    title: String,
    roots: Vec<ConceptId>,
    index: BTreeMap<ConceptId, Concept>,
}

impl Ontology {
    pub fn new(slug: impl Into<String>, title: impl Into<String>) -> Result<Self, OntologyError> {
        let slug = slug.into();
        if !is_slug(&slug) {
            return Err(OntologyError::BadSlug(slug));
        }
        Ok(Ontology {
            slug,
            title: title.into(),
            roots: Vec::new(),
            index: BTreeMap::new(),
        })
    }

    /// Assembles an ontology from raw parts without checking anything.
    /// Use [`Ontology::validate`] to inspect the result.
    pub fn from_parts(
        slug: impl Into<String>,
        title: impl Into<String>,
        roots: Vec<ConceptId>,
        concepts: impl IntoIterator<Item = Concept>,
    ) -> Self {
        Ontology {
            slug: slug.into(),
            title: title.into(),
            roots,
            index: concepts.into_iter().map(|c| (c.id.clone(), c)).collect(),
        }
    }

    pub fn slug(&self) -> &str {
        &self.slug
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    pub fn roots(&self) -> &[ConceptId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.index.contains_key(id)
    }

    pub fn get(&self, id: &ConceptId) -> Option<&Concept> {
        self.index.get(id)
    }

    pub fn concept(&self, id: &ConceptId) -> Result<&Concept, OntologyError> {
        self.index
            .get(id)
            .ok_or_else(|| OntologyError::UnknownConcept(id.clone()))
    }

    /// Concepts in id order.
    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.index.values()
    }

    pub fn add_concept(
        &mut self,
        parent: Option<&ConceptId>,
        label: &str,
        kind: ConceptKind,
    ) -> Result<ConceptId, OntologyError> {
        let slug = slugify(label)?;
        let id = match parent {
            None => {
                if kind != ConceptKind::Domain {
                    return Err(OntologyError::IllegalKind {
                        kind,
                        depth: 0,
                        parent_is_feature: false,
                    });
                }
                let id = ConceptId::root(&self.slug, &slug)?;
                if self.index.contains_key(&id) {
                    return Err(OntologyError::DuplicateSibling {
                        parent: format!("{}:", self.slug),
                        slug,
                    });
                }
                self.roots.push(id.clone());
                id
            }
            Some(parent_id) => {
                let parent = self
                    .index
                    .get(parent_id)
                    .filter(|_| parent_id.ontology() == self.slug)
                    .ok_or_else(|| OntologyError::UnknownParent(parent_id.clone()))?;
                let depth = parent_id.depth() + 1;
                if parent.kind == ConceptKind::Feature || !kind.allowed_at_depth(depth) {
                    return Err(OntologyError::IllegalKind {
                        kind,
                        depth,
                        parent_is_feature: parent.kind == ConceptKind::Feature,
                    });
                }
                let id = parent_id.child(&slug);
                if self.index.contains_key(&id) {
                    return Err(OntologyError::DuplicateSibling {
                        parent: parent_id.to_string(),
                        slug,
                    });
                }
                self.index
                    .get_mut(parent_id)
                    .expect("parent checked above")
                    .children
                    .push(id.clone());
                id
            }
        };
        self.index
            .insert(id.clone(), Concept::new(id.clone(), label, kind, Vec::new()));
        Ok(id)
    }

    pub fn children_of(&self, id: &ConceptId) -> Result<Vec<&Concept>, OntologyError> {
        let concept = self.concept(id)?;
        Ok(concept.children.iter().filter_map(|c| self.index.get(c)).collect())
    }

    pub fn parent_of(&self, id: &ConceptId) -> Option<&Concept> {
        id.parent().and_then(|p| self.index.get(&p))
    }

    /// Number of concepts in the subtree rooted at `id`, the node included.
    pub fn subtree_count(&self, id: &ConceptId) -> Result<usize, OntologyError> {
        self.concept(id)?;
        Ok(self.preorder_from(id).len())
    }

    /// Sum of [`Ontology::subtree_count`] over all roots.
    pub fn total_count(&self) -> usize {
        self.preorder().len()
    }

    /// Depth-first pre-order over the whole forest, with depth relative to
    /// the roots.
    pub fn preorder(&self) -> Vec<(usize, &Concept)> {
        let mut out = Vec::with_capacity(self.index.len());
        for root in &self.roots {
            self.walk(root, 0, &mut out);
        }
        out
    }

    /// Pre-order over the subtree at `id`; depth is relative to `id`.
    pub fn preorder_from(&self, id: &ConceptId) -> Vec<(usize, &Concept)> {
        let mut out = Vec::new();
        self.walk(id, 0, &mut out);
        out
    }

    fn walk<'a>(&'a self, id: &ConceptId, depth: usize, out: &mut Vec<(usize, &'a Concept)>) {
        // Only follow proper child ids so malformed indexes cannot loop.
        let Some(concept) = self.index.get(id) else { return };
        out.push((depth, concept));
        for child in &concept.children {
            if child.parent().as_ref() == Some(id) {
                self.walk(child, depth + 1, out);
            }
        }
    }

    /// Checks every structural invariant. An empty report means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut report = Vec::new();
        let mut push = |concept: &ConceptId, code, message: String| {
            report.push(Violation {
                concept: concept.clone(),
                code,
                message,
            })
        };

        for (key, concept) in &self.index {
            if key != &concept.id {
                push(
                    key,
                    ViolationCode::KeyMismatch,
                    format!("index key differs from concept id {}", concept.id),
                );
            }
            if key.ontology() != self.slug {
                push(
                    key,
                    ViolationCode::WrongOntology,
                    format!("concept belongs to `{}`", key.ontology()),
                );
            }
            match slugify(&concept.label) {
                Ok(slug) if slug == key.last_segment() => {}
                Ok(slug) => push(
                    key,
                    ViolationCode::LabelMismatch,
                    format!("label slug `{slug}` differs from id"),
                ),
                Err(_) => push(key, ViolationCode::LabelMismatch, "label has no alphanumerics".into()),
            }
            if !concept.kind.allowed_at_depth(key.depth()) {
                push(
                    key,
                    ViolationCode::IllegalKind,
                    format!("{} is not allowed at depth {}", concept.kind, key.depth()),
                );
            }
            if concept.kind == ConceptKind::Feature && !concept.children.is_empty() {
                push(
                    key,
                    ViolationCode::FeatureWithChildren,
                    "features cannot have children".into(),
                );
            }
            let mut seen = BTreeSet::new();
            for child in &concept.children {
                if !seen.insert(child) {
                    push(
                        key,
                        ViolationCode::DuplicateChild,
                        format!("child {child} listed twice"),
                    );
                }
                if child.parent().as_ref() != Some(key) {
                    push(
                        key,
                        ViolationCode::BadChildId,
                        format!("child {child} does not extend this path"),
                    );
                } else if !self.index.contains_key(child) {
                    push(
                        key,
                        ViolationCode::DanglingChild,
                        format!("child {child} has no index entry"),
                    );
                }
            }
        }

        let mut seen_roots = BTreeSet::new();
        for root in &self.roots {
            if root.depth() != 0 || root.ontology() != self.slug {
                push(
                    root,
                    ViolationCode::BadRoot,
                    "root id must be a single segment of this ontology".into(),
                );
            }
            if !seen_roots.insert(root) {
                push(root, ViolationCode::DuplicateChild, "root listed twice".into());
            }
            if !self.index.contains_key(root) {
                push(root, ViolationCode::DanglingChild, "root has no index entry".into());
            }
        }

        let reachable: BTreeSet<&ConceptId> = self.preorder().into_iter().map(|(_, c)| &c.id).collect();
        for key in self.index.keys() {
            if !reachable.contains(key) {
                push(key, ViolationCode::Orphan, "not reachable from any root".into());
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qid(s: &str) -> ConceptId {
        s.parse().unwrap()
    }

    #[test]
    fn slugify_examples() {
        assert_eq!(slugify("Combo Boiler").unwrap(), "combo_boiler");
        assert_eq!(slugify("No. of Radiators").unwrap(), "no_of_radiators");
        assert_eq!(slugify("Carbon mono oxide (CO)").unwrap(), "carbon_mono_oxide_co");
        assert_eq!(
            slugify("Neighbourhood/Regional Information").unwrap(),
            "neighbourhood_regional_information"
        );
        assert_eq!(slugify("  --  "), Err(OntologyError::EmptyLabel));
        assert_eq!(slugify(""), Err(OntologyError::EmptyLabel));
    }

    #[test]
    fn slug_shape() {
        assert!(is_slug("a1_b2"));
        for bad in ["", "_a", "a_", "a__b", "A", "a-b", "a.b"] {
            assert!(!is_slug(bad), "{bad}");
        }
    }

    #[test]
    fn id_round_trip_and_order() {
        let id = qid("smart_home:services.energy.gas");
        assert_eq!(id.to_string(), "smart_home:services.energy.gas");
        assert_eq!(id.depth(), 2);
        assert_eq!(id.parent().unwrap().to_string(), "smart_home:services.energy");
        for bad in ["smart_home", "smart_home:", "Smart:x", "a:b..c", "a:b.", ":x"] {
            assert!(bad.parse::<ConceptId>().is_err(), "{bad}");
        }
        // ':' sorts after digits, so byte order differs from segment order here.
        assert!(qid("ict1:x") < qid("ict:x"));
        assert!(qid("a:b.c") < qid("a:b_c"));
    }

    #[test]
    fn add_and_query() {
        let mut onto = Ontology::new("smart_home", "t").unwrap();
        let services = onto.add_concept(None, "Services", ConceptKind::Domain).unwrap();
        assert_eq!(onto.roots().len(), 1);
        let energy = onto.add_concept(Some(&services), "Energy", ConceptKind::Class).unwrap();
        let gas = onto.add_concept(Some(&energy), "Gas", ConceptKind::Feature).unwrap();
        assert_eq!(gas.to_string(), "smart_home:services.energy.gas");
        assert_eq!(onto.children_of(&gas).unwrap(), Vec::<&Concept>::new());
        assert_eq!(onto.subtree_count(&gas).unwrap(), 1);
        assert_eq!(onto.subtree_count(&services).unwrap(), 3);
        assert!(onto.validate().is_empty());

        assert!(matches!(
            onto.add_concept(Some(&energy), "GAS", ConceptKind::Feature),
            Err(OntologyError::DuplicateSibling { .. })
        ));
        assert!(matches!(
            onto.add_concept(None, "Energy", ConceptKind::Class),
            Err(OntologyError::IllegalKind { depth: 0, .. })
        ));
        assert!(matches!(
            onto.add_concept(Some(&services), "Other", ConceptKind::SubClass),
            Err(OntologyError::IllegalKind { depth: 1, .. })
        ));
        assert!(matches!(
            onto.add_concept(Some(&gas), "Natural", ConceptKind::Feature),
            Err(OntologyError::IllegalKind {
                parent_is_feature: true,
                ..
            })
        ));
        assert!(matches!(
            onto.add_concept(Some(&qid("smart_home:nope")), "X", ConceptKind::Class),
            Err(OntologyError::UnknownParent(_))
        ));
        assert!(matches!(
            onto.subtree_count(&qid("smart_home:nope")),
            Err(OntologyError::UnknownConcept(_))
        ));
    }

    #[test]
    fn validate_flags_class_root() {
        let root = qid("x:energy");
        let onto = Ontology::from_parts(
            "x",
            "t",
            vec![root.clone()],
            [Concept::new(root, "Energy", ConceptKind::Class, vec![])],
        );
        let report = onto.validate();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].code, ViolationCode::IllegalKind);
    }

    #[test]
    fn validate_flags_dangling_child_and_orphan() {
        let root = qid("x:services");
        let ghost = qid("x:services.ghost");
        let orphan = qid("x:other.thing");
        let onto = Ontology::from_parts(
            "x",
            "t",
            vec![root.clone()],
            [
                Concept::new(root, "Services", ConceptKind::Domain, vec![ghost]),
                Concept::new(orphan, "Thing", ConceptKind::Class, vec![]),
            ],
        );
        let codes: Vec<_> = onto.validate().into_iter().map(|v| v.code).collect();
        assert_eq!(codes, vec![ViolationCode::DanglingChild, ViolationCode::Orphan]);
    }

    #[test]
    fn validate_flags_label_and_feature_children() {
        let root = qid("x:services");
        let leaf = qid("x:services.energy");
        let below = qid("x:services.energy.gas");
        let onto = Ontology::from_parts(
            "x",
            "t",
            vec![root.clone()],
            [
                Concept::new(root, "Services", ConceptKind::Domain, vec![leaf.clone()]),
                Concept::new(leaf, "Power", ConceptKind::Feature, vec![below.clone()]),
                Concept::new(below, "Gas", ConceptKind::Feature, vec![]),
            ],
        );
        let codes: BTreeSet<_> = onto.validate().into_iter().map(|v| v.code).collect();
        assert!(codes.contains(&ViolationCode::LabelMismatch));
        assert!(codes.contains(&ViolationCode::FeatureWithChildren));
        assert!(codes.contains(&ViolationCode::IllegalKind));
    }
}
