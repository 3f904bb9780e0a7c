//! Typed entity graph with a name/alias gazetteer and discourse-relation
//! traversal.
//!
//! The graph is built once from JSON-lines node and edge files and is
//! read-only afterwards. All query results come back in a deterministic
//! order so callers never see hash-order effects.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::text;

/// Relations treated as taxonomic ("up/down the ontology").
pub const TAXONOMIC: &[&str] = &["subclass_of", "instance_of", "located_in"];
/// Parent relations whose shared targets make two entities siblings.
pub const SIBLING_PARENTS: &[&str] = &["located_in", "instance_of"];
pub const CONTINGENCY_RELS: &[&str] = &["because_of", "causes"];
pub const TEMPORAL_RELS: &[&str] = &["next_event", "precedes"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        EntityId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: EntityId,
    pub name: String,
    #[serde(default)]
    pub aliases: Vec<String>,
    /// Most specific type first.
    #[serde(default)]
    pub types: Vec<String>,
}

impl Entity {
    pub fn has_type(&self, ty: &str) -> bool {
        self.types.iter().any(|t| t == ty)
    }

    /// Name without a leading article, e.g. "Louvre" for "the Louvre".
    pub fn bare_name(&self) -> &str {
        strip_article(&self.name)
    }
}

fn strip_article(name: &str) -> &str {
    for article in ["the ", "The "] {
        if let Some(rest) = name.strip_prefix(article) {
            return rest;
        }
    }
    name
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: EntityId,
    pub rel: String,
    pub dst: EntityId,
}

impl Edge {
    pub fn new(src: impl Into<String>, rel: impl Into<String>, dst: impl Into<String>) -> Self {
        Edge {
            src: EntityId(src.into()),
            rel: rel.into(),
            dst: EntityId(dst.into()),
        }
    }

    pub fn is_taxonomic(&self) -> bool {
        TAXONOMIC.contains(&self.rel.as_str())
    }
}

/// A type identifier referenced from some entity's `types` list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TypeNode {
    pub id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscourseRelation {
    Expansion,
    Comparison,
    Contingency,
    Temporal,
}

impl DiscourseRelation {
    pub const ALL: [DiscourseRelation; 4] = [
        DiscourseRelation::Expansion,
        DiscourseRelation::Comparison,
        DiscourseRelation::Contingency,
        DiscourseRelation::Temporal,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DiscourseRelation::Expansion => "expansion",
            DiscourseRelation::Comparison => "comparison",
            DiscourseRelation::Contingency => "contingency",
            DiscourseRelation::Temporal => "temporal",
        }
    }
}

impl fmt::Display for DiscourseRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

/// One hop of a justification path. `Forward` walks `edge.src → edge.dst`,
/// `Backward` walks `edge.dst → edge.src`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub edge: Edge,
    pub direction: Direction,
}

impl PathStep {
    fn forward(edge: Edge) -> Self {
        PathStep { edge, direction: Direction::Forward }
    }

    fn backward(edge: Edge) -> Self {
        PathStep { edge, direction: Direction::Backward }
    }

    pub fn from_node(&self) -> &EntityId {
        match self.direction {
            Direction::Forward => &self.edge.src,
            Direction::Backward => &self.edge.dst,
        }
    }

    pub fn to_node(&self) -> &EntityId {
        match self.direction {
            Direction::Forward => &self.edge.dst,
            Direction::Backward => &self.edge.src,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstantiation {
    pub relation: DiscourseRelation,
    pub focus: EntityId,
    pub result: EntityId,
    pub path: Vec<PathStep>,
}

impl RelationInstantiation {
    /// The relation label of the last hop, e.g. `artist` for a comparison
    /// through a shared artist.
    pub fn via(&self) -> Option<&str> {
        self.path.last().map(|s| s.edge.rel.as_str())
    }

    /// The intermediate node for two-hop paths (shared parent or value).
    pub fn pivot(&self) -> Option<&EntityId> {
        (self.path.len() == 2).then(|| self.path[0].to_node())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum KgError {
    #[error("{path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}:{line}: edge endpoint `{id}` does not resolve")]
    DanglingEdge { path: PathBuf, line: usize, id: String },
    #[error("{path}:{line}: duplicate entity id `{id}`")]
    DuplicateEntity { path: PathBuf, line: usize, id: String },
    #[error("subclass_of cycle through `{0}`")]
    SubclassCycle(String),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
}

/// Case-insensitive name and alias lookup keyed by normalized term strings.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    map: HashMap<String, EntityId>,
    max_len: usize,
}

impl Gazetteer {
    fn key(phrase: &str) -> Vec<String> {
        text::tokenize(phrase)
            .iter()
            .map(|t| text::term(t).to_string())
            .collect()
    }

    fn insert(&mut self, phrase: &str, id: &EntityId) {
        let key = Self::key(phrase);
        if key.is_empty() {
            return;
        }
        self.max_len = self.max_len.max(key.len());
        // Entities are visited in id order, so the first claim on a phrase is stable.
        self.map.entry(key.join(" ")).or_insert_with(|| id.clone());
    }

    pub fn lookup(&self, terms: &[&str]) -> Option<&EntityId> {
        self.map.get(&terms.join(" "))
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: BTreeMap<EntityId, Entity>,
    types: BTreeSet<TypeNode>,
    edges: BTreeSet<Edge>,
    out: HashMap<(EntityId, String), BTreeSet<EntityId>>,
    inc: HashMap<(EntityId, String), BTreeSet<EntityId>>,
    out_edges: HashMap<EntityId, Vec<Edge>>,
    gazetteer: Gazetteer,
}

#[derive(Deserialize)]
struct EdgeRecord {
    src: String,
    rel: String,
    dst: String,
}

fn read(path: &Path) -> Result<String, KgError> {
    fs::read_to_string(path).map_err(|e| KgError::Io {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })
}

fn records(body: &str) -> impl Iterator<Item = (usize, &str)> {
    body.lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

impl KnowledgeGraph {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Loads one nodes file and one edges file.
    pub fn load(nodes: &Path, edges: &Path) -> Result<Self, KgError> {
        Self::load_pairs(&[(nodes.to_path_buf(), edges.to_path_buf())])
    }

    /// Loads every `<name>.nodes.jsonl` in `dir` together with its sibling
    /// `<name>.edges.jsonl` (optional). All nodes are read before any edge so
    /// edges may cross pack boundaries.
    pub fn load_dir(dir: &Path) -> Result<Self, KgError> {
        let listing = fs::read_dir(dir).map_err(|e| KgError::Io {
            path: dir.to_path_buf(),
            msg: e.to_string(),
        })?;
        let mut pairs = Vec::new();
        for entry in listing.flatten() {
            let name = entry.file_name().to_string_lossy().into_owned();
            if let Some(stem) = name.strip_suffix(".nodes.jsonl") {
                pairs.push((entry.path(), dir.join(format!("{stem}.edges.jsonl"))));
            }
        }
        pairs.sort();
        Self::load_pairs(&pairs)
    }

    fn load_pairs(pairs: &[(PathBuf, PathBuf)]) -> Result<Self, KgError> {
        let mut entities = Vec::new();
        let mut seen = BTreeSet::new();
        for (nodes, _) in pairs {
            let body = read(nodes)?;
            for (line, rec) in records(&body) {
                let entity: Entity = serde_json::from_str(rec).map_err(|e| KgError::Parse {
                    path: nodes.clone(),
                    line,
                    msg: e.to_string(),
                })?;
                if !seen.insert(entity.id.clone()) {
                    return Err(KgError::DuplicateEntity {
                        path: nodes.clone(),
                        line,
                        id: entity.id.0,
                    });
                }
                entities.push(entity);
            }
        }
        let mut edges = Vec::new();
        for (_, edge_path) in pairs {
            if !edge_path.exists() {
                continue;
            }
            let body = read(edge_path)?;
            for (line, rec) in records(&body) {
                let r: EdgeRecord = serde_json::from_str(rec).map_err(|e| KgError::Parse {
                    path: edge_path.clone(),
                    line,
                    msg: e.to_string(),
                })?;
                for id in [&r.src, &r.dst] {
                    if !seen.contains(&EntityId(id.clone())) {
                        return Err(KgError::DanglingEdge {
                            path: edge_path.clone(),
                            line,
                            id: id.clone(),
                        });
                    }
                }
                edges.push(Edge::new(r.src, r.rel, r.dst));
            }
        }
        Self::from_parts(entities, edges)
    }

    /// Builds a graph from in-memory records, applying the same checks as
    /// the file loaders.
    pub fn from_parts(entities: Vec<Entity>, edges: Vec<Edge>) -> Result<Self, KgError> {
        let mut g = KnowledgeGraph::default();
        for e in entities {
            if g.entities.contains_key(&e.id) {
                return Err(KgError::DuplicateEntity {
                    path: PathBuf::new(),
                    line: 0,
                    id: e.id.0,
                });
            }
            for t in &e.types {
                g.types.insert(TypeNode { id: t.clone() });
            }
            g.entities.insert(e.id.clone(), e);
        }
        for edge in edges {
            for id in [&edge.src, &edge.dst] {
                if !g.entities.contains_key(id) {
                    return Err(KgError::UnknownEntity(id.0.clone()));
                }
            }
            if !g.edges.insert(edge.clone()) {
                continue;
            }
            g.out
                .entry((edge.src.clone(), edge.rel.clone()))
                .or_default()
                .insert(edge.dst.clone());
            g.inc
                .entry((edge.dst.clone(), edge.rel.clone()))
                .or_default()
                .insert(edge.src.clone());
            g.out_edges.entry(edge.src.clone()).or_default().push(edge);
        }
        for list in g.out_edges.values_mut() {
            list.sort();
        }
        g.check_subclass_acyclic()?;
        let mut gaz = Gazetteer::default();
        for e in g.entities.values() {
            gaz.insert(&e.name, &e.id);
            gaz.insert(strip_article(&e.name), &e.id);
            for a in &e.aliases {
                gaz.insert(a, &e.id);
                gaz.insert(strip_article(a), &e.id);
            }
        }
        g.gazetteer = gaz;
        Ok(g)
    }

    fn check_subclass_acyclic(&self) -> Result<(), KgError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Open,
            Done,
        }
        let mut marks: HashMap<&EntityId, Mark> = HashMap::new();
        for start in self.entities.keys() {
            if marks.contains_key(start) {
                continue;
            }
            // Iterative DFS: (node, index of next child to visit).
            let mut stack: Vec<(&EntityId, usize)> = vec![(start, 0)];
            marks.insert(start, Mark::Open);
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                let children: Vec<&EntityId> = self
                    .out
                    .get(&(node.clone(), "subclass_of".to_string()))
                    .map(|s| s.iter().collect())
                    .unwrap_or_default();
                if *next < children.len() {
                    let child = children[*next];
                    *next += 1;
                    match marks.get(child) {
                        Some(Mark::Open) => return Err(KgError::SubclassCycle(child.0.clone())),
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(child, Mark::Open);
                            stack.push((child, 0));
                        }
                    }
                } else {
                    marks.insert(node, Mark::Done);
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.get(id)
    }

    pub fn get(&self, id: &str) -> Option<&Entity> {
        self.entities.get(&EntityId(id.to_string()))
    }

    pub fn contains(&self, id: &EntityId) -> bool {
        self.entities.contains_key(id)
    }

    /// Display name for an id, falling back to the raw id.
    pub fn name_of(&self, id: &EntityId) -> String {
        self.entity(id).map(|e| e.name.clone()).unwrap_or_else(|| id.0.clone())
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.entities.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn type_nodes(&self) -> impl Iterator<Item = &TypeNode> {
        self.types.iter()
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }

    pub fn has_edge(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    fn require(&self, id: &EntityId) -> Result<(), KgError> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(KgError::UnknownEntity(id.0.clone()))
        }
    }

    /// All `dst` with an edge `(entity, rel, dst)`, sorted by id.
    pub fn neighbors(&self, entity: &EntityId, rel: &str) -> Result<Vec<EntityId>, KgError> {
        self.require(entity)?;
        Ok(self
            .out
            .get(&(entity.clone(), rel.to_string()))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default())
    }

    /// All `src` with an edge `(src, rel, entity)`, sorted by id.
    pub fn reverse_neighbors(&self, entity: &EntityId, rel: &str) -> Result<Vec<EntityId>, KgError> {
        self.require(entity)?;
        Ok(self
            .inc
            .get(&(entity.clone(), rel.to_string()))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default())
    }

    pub fn outgoing(&self, entity: &EntityId) -> &[Edge] {
        self.out_edges.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Entities related to `focus` by `relation`, ranked by path length then
    /// id. Each result appears once, with its shortest justification path.
    pub fn instantiate_relation(
        &self,
        relation: DiscourseRelation,
        focus: &EntityId,
        exclude: &BTreeSet<EntityId>,
    ) -> Result<Vec<RelationInstantiation>, KgError> {
        self.require(focus)?;
        let mut found: Vec<(EntityId, Vec<PathStep>)> = Vec::new();
        match relation {
            DiscourseRelation::Comparison => {
                for rel in SIBLING_PARENTS {
                    for parent in self.neighbors(focus, rel)? {
                        let up = Edge::new(focus.0.clone(), *rel, parent.0.clone());
                        for sib in self.reverse_neighbors(&parent, rel)? {
                            let down = Edge::new(sib.0.clone(), *rel, parent.0.clone());
                            found.push((sib, vec![PathStep::forward(up.clone()), PathStep::backward(down)]));
                        }
                    }
                }
                for edge in self.outgoing(focus).iter().filter(|e| !e.is_taxonomic()) {
                    for other in self.reverse_neighbors(&edge.dst, &edge.rel)? {
                        let back = Edge::new(other.0.clone(), edge.rel.clone(), edge.dst.0.clone());
                        found.push((other, vec![PathStep::forward(edge.clone()), PathStep::backward(back)]));
                    }
                }
            }
            DiscourseRelation::Expansion => {
                for edge in self.outgoing(focus).iter().filter(|e| !e.is_taxonomic()) {
                    found.push((edge.dst.clone(), vec![PathStep::forward(edge.clone())]));
                }
            }
            DiscourseRelation::Contingency | DiscourseRelation::Temporal => {
                let rels = if relation == DiscourseRelation::Contingency {
                    CONTINGENCY_RELS
                } else {
                    TEMPORAL_RELS
                };
                for edge in self.outgoing(focus).iter().filter(|e| rels.contains(&e.rel.as_str())) {
                    found.push((edge.dst.clone(), vec![PathStep::forward(edge.clone())]));
                }
            }
        }
        let mut best: BTreeMap<EntityId, Vec<PathStep>> = BTreeMap::new();
        for (id, path) in found {
            if &id == focus || exclude.contains(&id) {
                continue;
            }
            match best.get(&id) {
                Some(existing) if (existing.len(), existing) <= (path.len(), &path) => {}
                _ => {
                    best.insert(id, path);
                }
            }
        }
        let mut out: Vec<RelationInstantiation> = best
            .into_iter()
            .map(|(result, path)| RelationInstantiation {
                relation,
                focus: focus.clone(),
                result,
                path,
            })
            .collect();
        out.sort_by(|a, b| (a.path.len(), &a.result).cmp(&(b.path.len(), &b.result)));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ent(id: &str, name: &str, types: &[&str]) -> Entity {
        Entity {
            id: EntityId::from(id),
            name: name.into(),
            aliases: vec![],
            types: types.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn travel() -> KnowledgeGraph {
        KnowledgeGraph::from_parts(
            vec![
                ent("paris", "Paris", &["city"]),
                ent("eiffel_tower", "the Eiffel Tower", &["landmark"]),
                ent("louvre", "the Louvre", &["museum"]),
                ent("mona_lisa", "the Mona Lisa", &["artwork"]),
                ent("da_vinci", "Leonardo da Vinci", &["person"]),
                ent("last_supper", "The Last Supper", &["artwork"]),
            ],
            vec![
                Edge::new("eiffel_tower", "located_in", "paris"),
                Edge::new("louvre", "located_in", "paris"),
                Edge::new("louvre", "artwork", "mona_lisa"),
                Edge::new("mona_lisa", "artist", "da_vinci"),
                Edge::new("last_supper", "artist", "da_vinci"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn comparison_finds_sibling_via_shared_parent() {
        let g = travel();
        let r = g
            .instantiate_relation(DiscourseRelation::Comparison, &"eiffel_tower".into(), &BTreeSet::new())
            .unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].result.as_str(), "louvre");
        assert_eq!(r[0].pivot().unwrap().as_str(), "paris");
    }

    #[test]
    fn comparison_via_shared_attribute() {
        let g = travel();
        let r = g
            .instantiate_relation(DiscourseRelation::Comparison, &"mona_lisa".into(), &BTreeSet::new())
            .unwrap();
        assert_eq!(r.iter().map(|i| i.result.as_str()).collect::<Vec<_>>(), vec!["last_supper"]);
        assert_eq!(r[0].via(), Some("artist"));
    }

    #[test]
    fn subclass_cycle_rejected() {
        let err = KnowledgeGraph::from_parts(
            vec![ent("a", "A", &[]), ent("b", "B", &[])],
            vec![Edge::new("a", "subclass_of", "b"), Edge::new("b", "subclass_of", "a")],
        )
        .unwrap_err();
        assert!(matches!(err, KgError::SubclassCycle(_)));
    }

    #[test]
    fn unknown_entity_is_lookup_error() {
        let g = travel();
        assert!(matches!(g.neighbors(&"nowhere".into(), "artwork"), Err(KgError::UnknownEntity(_))));
    }

    #[test]
    fn gazetteer_covers_names_without_article() {
        let g = travel();
        assert_eq!(g.gazetteer().lookup(&["eiffel", "tower"]).unwrap().as_str(), "eiffel_tower");
        assert_eq!(g.gazetteer().lookup(&["the", "louvre"]).unwrap().as_str(), "louvre");
    }
}
