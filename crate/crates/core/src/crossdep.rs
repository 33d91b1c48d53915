//! Cross-ontology dependency graph.
//!
//! The edge set combines hierarchy edges (parent <-> child inside one
//! ontology) with labelled cross-links between ontologies. Both kinds are
//! traversable in either direction; the direction taken is recorded on each
//! path edge so callers can filter.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::ontology::{is_slug, ConceptId, Ontology};
use crate::seed::{Requirement, Stakeholder};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("link {0} connects two concepts of the same ontology")]
    SameOntology(String),
    #[error("invalid relation slug `{0}`")]
    BadRelation(String),
    #[error("duplicate link {0}")]
    DuplicateLink(String),
    #[error("ontology `{0}` supplied twice")]
    DuplicateOntology(String),
    #[error("no requirement {stakeholder} #{index}")]
    UnknownRequirement { stakeholder: Stakeholder, index: u32 },
    #[error("{0} must be at least 1")]
    ZeroBound(&'static str),
}

/// Directed, labelled edge between concepts of two different ontologies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrossLink {
    source: ConceptId,
    target: ConceptId,
    relation: String,
}

impl CrossLink {
    pub fn new(source: ConceptId, target: ConceptId, relation: impl Into<String>) -> Result<Self, GraphError> {
        let relation = relation.into();
        if !is_slug(&relation) {
            return Err(GraphError::BadRelation(relation));
        }
        if source.ontology() == target.ontology() {
            return Err(GraphError::SameOntology(format!("{source} -> {target}")));
        }
        Ok(CrossLink {
            source,
            target,
            relation,
        })
    }

    pub fn source(&self) -> &ConceptId {
        &self.source
    }

    pub fn target(&self) -> &ConceptId {
        &self.target
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }
}

impl fmt::Display for CrossLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "link {} -> {} : {}", self.source, self.target, self.relation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Hierarchy,
    Cross,
}

/// Hierarchy: `Forward` is parent to child. Cross: `Forward` is source to target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeDesc {
    pub kind: EdgeKind,
    pub relation: Option<String>,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DepPath {
    pub nodes: Vec<ConceptId>,
    pub edges: Vec<EdgeDesc>,
}

impl DepPath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `a -[rel]-> b`, `a <-[rel]- b` for cross-links, `a -> b` for hierarchy;
    /// a zero-length path renders as `a (self)`.
    pub fn render(&self) -> String {
        let mut out = self.nodes[0].to_string();
        if self.edges.is_empty() {
            out.push_str(" (self)");
            return out;
        }
        for (edge, node) in self.edges.iter().zip(&self.nodes[1..]) {
            match (edge.kind, &edge.relation, edge.direction) {
                (EdgeKind::Cross, Some(rel), Direction::Forward) => out.push_str(&format!(" -[{rel}]-> ")),
                (EdgeKind::Cross, Some(rel), Direction::Reverse) => out.push_str(&format!(" <-[{rel}]- ")),
                _ => out.push_str(" -> "),
            }
            out.push_str(&node.to_string());
        }
        out
    }
}

impl Ord for DepPath {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.nodes.cmp(&other.nodes))
            .then_with(|| self.edges.cmp(&other.edges))
    }
}

impl PartialOrd for DepPath {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Ontologies plus the cross-links between them. Immutable once built.
#[derive(Debug, Clone)]
pub struct DepGraph {
    ontologies: BTreeMap<String, Ontology>,
    links: Vec<CrossLink>,
    adjacency: BTreeMap<ConceptId, Vec<(ConceptId, EdgeDesc)>>,
}

impl DepGraph {
    pub fn new(ontologies: impl IntoIterator<Item = Ontology>, links: Vec<CrossLink>) -> Result<Self, GraphError> {
        let mut by_slug = BTreeMap::new();
        for onto in ontologies {
            let slug = onto.slug().to_owned();
            if by_slug.insert(slug.clone(), onto).is_some() {
                return Err(GraphError::DuplicateOntology(slug));
            }
        }

        let mut adjacency: BTreeMap<ConceptId, Vec<(ConceptId, EdgeDesc)>> = BTreeMap::new();
        for onto in by_slug.values() {
            for concept in onto.concepts() {
                adjacency.entry(concept.id().clone()).or_default();
                for child in concept.children() {
                    let down = EdgeDesc {
                        kind: EdgeKind::Hierarchy,
                        relation: None,
                        direction: Direction::Forward,
                    };
                    let up = EdgeDesc {
                        direction: Direction::Reverse,
                        ..down.clone()
                    };
                    adjacency
                        .entry(concept.id().clone())
                        .or_default()
                        .push((child.clone(), down));
                    adjacency
                        .entry(child.clone())
                        .or_default()
                        .push((concept.id().clone(), up));
                }
            }
        }

        let mut seen = BTreeSet::new();
        for link in &links {
            for end in [&link.source, &link.target] {
                if !adjacency.contains_key(end) {
                    return Err(GraphError::UnknownConcept(end.clone()));
                }
            }
            if link.source.ontology() == link.target.ontology() {
                return Err(GraphError::SameOntology(link.to_string()));
            }
            if !seen.insert(link) {
                return Err(GraphError::DuplicateLink(link.to_string()));
            }
            let desc = |direction| EdgeDesc {
                kind: EdgeKind::Cross,
                relation: Some(link.relation.clone()),
                direction,
            };
            adjacency
                .get_mut(&link.source)
                .expect("checked")
                .push((link.target.clone(), desc(Direction::Forward)));
            adjacency
                .get_mut(&link.target)
                .expect("checked")
                .push((link.source.clone(), desc(Direction::Reverse)));
        }

        Ok(DepGraph {
            ontologies: by_slug,
            links,
            adjacency,
        })
    }

    pub fn ontology(&self, slug: &str) -> Option<&Ontology> {
        self.ontologies.get(slug)
    }

    pub fn ontologies(&self) -> impl Iterator<Item = &Ontology> {
        self.ontologies.values()
    }

    pub fn links(&self) -> &[CrossLink] {
        &self.links
    }

    pub fn contains(&self, id: &ConceptId) -> bool {
        self.adjacency.contains_key(id)
    }

    fn resolve(&self, id: &ConceptId) -> Result<&[(ConceptId, EdgeDesc)], GraphError> {
        self.adjacency
            .get(id)
            .map(Vec::as_slice)
            .ok_or_else(|| GraphError::UnknownConcept(id.clone()))
    }

    /// Neighbours of `id` over the combined edge set, one entry per edge.
    pub fn neighbours(&self, id: &ConceptId) -> Result<&[(ConceptId, EdgeDesc)], GraphError> {
        self.resolve(id)
    }

    /// All simple paths from `from` to `to` with at most `max_len` edges,
    /// ordered by length, then node ids, then edge descriptors.
    pub fn find_paths(&self, from: &ConceptId, to: &ConceptId, max_len: usize) -> Result<Vec<DepPath>, GraphError> {
        self.resolve(from)?;
        self.resolve(to)?;
        if max_len == 0 {
            return Err(GraphError::ZeroBound("max_len"));
        }
        if from == to {
            return Ok(vec![DepPath {
                nodes: vec![from.clone()],
                edges: Vec::new(),
            }]);
        }

        let mut found = Vec::new();
        let mut nodes = vec![from.clone()];
        let mut edges = Vec::new();
        let mut on_path = BTreeSet::from([from.clone()]);
        self.extend_paths(to, max_len, &mut nodes, &mut edges, &mut on_path, &mut found);
        found.sort();
        Ok(found)
    }

    fn extend_paths(
        &self,
        to: &ConceptId,
        max_len: usize,
        nodes: &mut Vec<ConceptId>,
        edges: &mut Vec<EdgeDesc>,
        on_path: &mut BTreeSet<ConceptId>,
        found: &mut Vec<DepPath>,
    ) {
        if edges.len() == max_len {
            return;
        }
        let here = nodes.last().expect("path has a start node").clone();
        for (next, edge) in &self.adjacency[&here] {
            if on_path.contains(next) {
                continue;
            }
            nodes.push(next.clone());
            edges.push(edge.clone());
            if next == to {
                found.push(DepPath {
                    nodes: nodes.clone(),
                    edges: edges.clone(),
                });
            } else {
                on_path.insert(next.clone());
                self.extend_paths(to, max_len, nodes, edges, on_path, found);
                on_path.remove(next);
            }
            nodes.pop();
            edges.pop();
        }
    }

    /// Every concept within `max_hops` edges of `from`, excluding `from`.
    pub fn dependency_closure(&self, from: &ConceptId, max_hops: usize) -> Result<BTreeSet<ConceptId>, GraphError> {
        self.resolve(from)?;
        if max_hops == 0 {
            return Err(GraphError::ZeroBound("max_hops"));
        }
        let mut dist = BTreeMap::from([(from, 0usize)]);
        let mut queue = VecDeque::from([from]);
        while let Some(node) = queue.pop_front() {
            let d = dist[node];
            if d == max_hops {
                continue;
            }
            for (next, _) in &self.adjacency[node] {
                if !dist.contains_key(next) {
                    dist.insert(next, d + 1);
                    queue.push_back(next);
                }
            }
        }
        Ok(dist.into_keys().filter(|id| *id != from).cloned().collect())
    }

    /// Requirements whose concept set contains `concept` (or, with
    /// `include_descendants`, any concept in its subtree), ordered by
    /// stakeholder then index.
    pub fn requirements_for_concept(
        &self,
        reqs: &[Requirement],
        concept: &ConceptId,
        include_descendants: bool,
    ) -> Result<Vec<(Stakeholder, u32)>, GraphError> {
        self.resolve(concept)?;
        let mut hits: Vec<(Stakeholder, u32)> = reqs
            .iter()
            .filter(|r| {
                r.concepts.iter().any(|c| {
                    if include_descendants {
                        c.is_within(concept)
                    } else {
                        c == concept
                    }
                })
            })
            .map(|r| (r.stakeholder, r.index))
            .collect();
        hits.sort();
        hits.dedup();
        Ok(hits)
    }
}

/// Mapped concept set of one requirement.
pub fn concepts_for_requirement(
    reqs: &[Requirement],
    stakeholder: Stakeholder,
    index: u32,
) -> Result<&BTreeSet<ConceptId>, GraphError> {
    reqs.iter()
        .find(|r| r.stakeholder == stakeholder && r.index == index)
        .map(|r| &r.concepts)
        .ok_or(GraphError::UnknownRequirement { stakeholder, index })
}
