//! The parser-internal graph form.
//!
//! A graph becomes an [`IGraph`] by adding a virtual root with a `TOP` edge to
//! every top node, one virtual terminal per token with `ANCHOR` edges from the
//! nodes anchored to it, and by rewriting labels and property values that
//! spell out the anchored tokens into placeholders. Cycles are broken first,
//! since the transition system only builds DAGs.

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::companion::TokenRow;
use crate::constraints::FrameworkProfile;
use crate::error::{Error, Result};
use crate::graph::{find_cycles, Anchor, Edge, Graph, Node, NodeId};
use crate::transition::{NodeKind, ANCHOR_LABEL, TOP_LABEL};

/// Stands for the space-joined lemmas of the anchored tokens.
pub const LEMMA_PLACEHOLDER: &str = "<l>";
/// Stands for the space-joined forms of the anchored tokens.
pub const FORM_PLACEHOLDER: &str = "<f>";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placeholder {
    Lemma,
    Form,
}

impl Placeholder {
    pub fn token(self) -> &'static str {
        match self {
            Placeholder::Lemma => LEMMA_PLACEHOLDER,
            Placeholder::Form => FORM_PLACEHOLDER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct INode {
    pub id: usize,
    pub kind: NodeKind,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub properties: IndexMap<String, String>,
}

impl INode {
    pub fn is_virtual(&self) -> bool {
        self.kind != NodeKind::Inner
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IEdge {
    pub source: usize,
    pub target: usize,
    pub label: String,
    #[serde(default)]
    pub attributes: IndexMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IGraph {
    #[serde(default)]
    pub id: String,
    #[serde(default)]
    pub framework: String,
    #[serde(default)]
    pub flavor: Option<u8>,
    pub nodes: Vec<INode>,
    pub edges: Vec<IEdge>,
    pub root: usize,
    /// Terminal node ids in token order.
    pub terminals: Vec<usize>,
    #[serde(default)]
    pub removed_cycle_edges: Vec<Edge>,
}

impl IGraph {
    pub fn is_terminal(&self, id: usize) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Terminal(_))
    }

    pub fn inner_nodes(&self) -> impl Iterator<Item = &INode> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Inner)
    }

    /// Token positions anchored by `node`, ascending.
    pub fn anchored_positions(&self, node: usize) -> Vec<usize> {
        let mut positions: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.source == node)
            .filter_map(|e| match self.nodes[e.target].kind {
                NodeKind::Terminal(p) => Some(p),
                _ => None,
            })
            .collect();
        positions.sort_unstable();
        positions.dedup();
        positions
    }

    /// Checks the structural invariants; `Err` names the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        let n = self.nodes.len();
        if self.root >= n || self.nodes[self.root].kind != NodeKind::Root {
            return Err("root is not a root node".into());
        }
        if self.nodes.iter().filter(|x| x.kind == NodeKind::Root).count() != 1 {
            return Err("expected exactly one virtual root".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(format!("node at position {i} has id {}", node.id));
            }
            if node.is_virtual() && (node.label.is_some() || !node.properties.is_empty()) {
                return Err(format!("virtual node {i} carries a label or properties"));
            }
        }
        for (k, &t) in self.terminals.iter().enumerate() {
            if t >= n || self.nodes[t].kind != NodeKind::Terminal(k) {
                return Err(format!("terminal {k} is not node {t}"));
            }
        }
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            if e.source >= n || e.target >= n {
                return Err(format!("edge {} -> {} out of range", e.source, e.target));
            }
            if e.target == self.root {
                return Err("the virtual root has an incoming edge".into());
            }
            if self.is_terminal(e.source) {
                return Err(format!("terminal {} has an outgoing edge", e.source));
            }
            if e.source == self.root && e.label != TOP_LABEL {
                return Err(format!("root edge labeled {:?}", e.label));
            }
            if e.source == self.root && self.is_terminal(e.target) {
                return Err("TOP edge ends at a terminal".into());
            }
            if e.label == ANCHOR_LABEL && !self.is_terminal(e.target) {
                return Err("ANCHOR edge does not end at a terminal".into());
            }
            if self.is_terminal(e.target) && e.label != ANCHOR_LABEL {
                return Err(format!("edge into terminal labeled {:?}", e.label));
            }
            if e.source != self.root && !self.is_terminal(e.target) {
                out[e.source].push(e.target);
            }
        }
        // Kahn's algorithm over the semantic subgraph.
        let mut indegree = vec![0usize; n];
        for targets in &out {
            for &t in targets {
                indegree[t] += 1;
            }
        }
        let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop() {
            seen += 1;
            for &t in &out[v] {
                indegree[t] -= 1;
                if indegree[t] == 0 {
                    queue.push(t);
                }
            }
        }
        if seen != n {
            return Err("the semantic subgraph is cyclic".into());
        }
        Ok(())
    }
}

/// Removes edges until `graph` is acyclic. Each round takes the first witness
/// cycle and drops its edge with the greatest `(source, target, label)`.
pub fn break_cycles(graph: &Graph) -> (Graph, Vec<Edge>) {
    let mut graph = graph.clone();
    let mut removed = Vec::new();
    loop {
        let cycles = find_cycles(&graph);
        let Some(cycle) = cycles.first() else {
            break;
        };
        let victim = *cycle
            .iter()
            .max_by(|&&a, &&b| {
                let (ea, eb) = (&graph.edges[a], &graph.edges[b]);
                (ea.source, ea.target, ea.label.as_deref().unwrap_or(""))
                    .cmp(&(eb.source, eb.target, eb.label.as_deref().unwrap_or("")))
                    .then(a.cmp(&b))
            })
            .expect("cycles are non-empty");
        removed.push(graph.edges.remove(victim));
    }
    (graph, removed)
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Byte offset of the first occurrence of `needle` in `text` that is not
/// glued to surrounding letters or digits.
fn bounded_find(text: &str, needle: &str) -> Option<usize> {
    if needle.is_empty() {
        return None;
    }
    text.match_indices(needle).map(|(i, _)| i).find(|&i| {
        let before = text[..i].chars().next_back();
        let after = text[i + needle.len()..].chars().next();
        !before.is_some_and(is_word_char) && !after.is_some_and(is_word_char)
    })
}

/// Rewrites the first token-bounded occurrence of the lemma (or, failing
/// that, the form) string into its placeholder. Matching is exact.
pub fn substitute(text: &str, lemmas: &str, forms: &str) -> Option<String> {
    if text.contains(LEMMA_PLACEHOLDER) || text.contains(FORM_PLACEHOLDER) {
        return None;
    }
    for (needle, placeholder) in [(lemmas, Placeholder::Lemma), (forms, Placeholder::Form)] {
        if let Some(i) = bounded_find(text, needle) {
            return Some(format!(
                "{}{}{}",
                &text[..i],
                placeholder.token(),
                &text[i + needle.len()..]
            ));
        }
    }
    None
}

pub fn has_placeholder(text: &str) -> bool {
    text.contains(LEMMA_PLACEHOLDER) || text.contains(FORM_PLACEHOLDER)
}

pub fn resolve(text: &str, lemmas: &str, forms: &str) -> String {
    text.replace(LEMMA_PLACEHOLDER, lemmas).replace(FORM_PLACEHOLDER, forms)
}

/// Collapses `op1..opK` into a single `op` placeholder property when the
/// values are exactly the anchored tokens' forms.
fn collapse_name(properties: &mut IndexMap<String, String>, lemmas: &[&str], forms: &[&str]) -> bool {
    let k = forms.len();
    if k == 0 || properties.contains_key("op") {
        return false;
    }
    let Some(start) = properties.get_index_of("op1") else {
        return false;
    };
    let values: Option<Vec<&str>> = (1..=k)
        .map(|i| {
            properties
                .get_index(start + i - 1)
                .filter(|(name, _)| **name == format!("op{i}"))
                .map(|(_, v)| v.as_str())
        })
        .collect();
    let Some(values) = values else {
        return false;
    };
    if properties.contains_key(&format!("op{}", k + 1)) || values != forms {
        return false;
    }
    let placeholder = if values == lemmas {
        Placeholder::Lemma
    } else {
        Placeholder::Form
    };
    for i in (1..=k).rev() {
        properties.shift_remove(&format!("op{i}"));
    }
    properties.shift_insert(start, "op".to_owned(), placeholder.token().to_owned());
    true
}

fn expand_name(
    properties: &mut IndexMap<String, String>,
    lemmas: &[&str],
    forms: &[&str],
) -> bool {
    let Some(start) = properties.get_index_of("op") else {
        return false;
    };
    let source = match properties[start].as_str() {
        LEMMA_PLACEHOLDER => lemmas,
        FORM_PLACEHOLDER => forms,
        _ => return false,
    };
    if source.is_empty() {
        return false;
    }
    properties.shift_remove_index(start);
    for (i, value) in source.iter().enumerate() {
        properties.shift_insert(start + i, format!("op{}", i + 1), (*value).to_owned());
    }
    true
}

/// Converts a graph and its tokens into the intermediate representation.
pub fn to_intermediate(graph: &Graph, rows: &[TokenRow], profile: &FrameworkProfile) -> Result<IGraph> {
    let (acyclic, removed) = break_cycles(graph);
    let n = rows.len();
    let mut nodes = Vec::with_capacity(1 + n + acyclic.nodes.len());
    nodes.push(INode {
        id: 0,
        kind: NodeKind::Root,
        label: None,
        properties: IndexMap::new(),
    });
    for k in 0..n {
        nodes.push(INode {
            id: k + 1,
            kind: NodeKind::Terminal(k),
            label: None,
            properties: IndexMap::new(),
        });
    }
    let mut index: HashMap<NodeId, usize> = HashMap::new();
    for node in &acyclic.nodes {
        let id = nodes.len();
        index.insert(node.id, id);
        nodes.push(INode {
            id,
            kind: NodeKind::Inner,
            label: node.label.clone(),
            properties: node.properties.clone(),
        });
    }

    let mut edges = Vec::new();
    for top in &acyclic.tops {
        edges.push(IEdge {
            source: 0,
            target: index[top],
            label: TOP_LABEL.to_owned(),
            attributes: IndexMap::new(),
        });
    }
    for edge in &acyclic.edges {
        edges.push(IEdge {
            source: index[&edge.source],
            target: index[&edge.target],
            label: edge.label.clone().unwrap_or_default(),
            attributes: edge.attributes.clone(),
        });
    }
    let collapse_names = profile.framework == "amr";
    for node in &acyclic.nodes {
        let id = index[&node.id];
        let mut positions = Vec::new();
        for anchor in &node.anchors {
            let hits: Vec<usize> = (0..n).filter(|&k| rows[k].anchor.overlaps(anchor)).collect();
            if hits.is_empty() {
                return Err(Error::Conversion(format!(
                    "graph {}: anchor {}:{} of node {} overlaps no token",
                    graph.id, anchor.from, anchor.to, node.id
                )));
            }
            positions.extend(hits);
        }
        positions.sort_unstable();
        positions.dedup();
        for &k in &positions {
            edges.push(IEdge {
                source: id,
                target: k + 1,
                label: ANCHOR_LABEL.to_owned(),
                attributes: IndexMap::new(),
            });
        }
        if positions.is_empty() {
            continue;
        }
        let lemma_list: Vec<&str> = positions.iter().map(|&k| rows[k].lemma.as_str()).collect();
        let form_list: Vec<&str> = positions.iter().map(|&k| rows[k].form.as_str()).collect();
        let (lemmas, forms) = (lemma_list.join(" "), form_list.join(" "));
        let inode = &mut nodes[id];
        let collapsed = collapse_names && collapse_name(&mut inode.properties, &lemma_list, &form_list);
        if let Some(label) = inode.label.as_deref().and_then(|l| substitute(l, &lemmas, &forms)) {
            inode.label = Some(label);
        }
        for (name, value) in inode.properties.iter_mut() {
            if collapsed && name == "op" {
                continue;
            }
            if let Some(v) = substitute(value, &lemmas, &forms) {
                *value = v;
            }
        }
    }
    Ok(IGraph {
        id: graph.id.clone(),
        framework: graph.framework.clone(),
        flavor: graph.flavor,
        nodes,
        edges,
        root: 0,
        terminals: (1..=n).collect(),
        removed_cycle_edges: removed,
    })
}

/// Inverts [`to_intermediate`]. Placeholders on nodes without anchors are an
/// error.
pub fn from_intermediate(igraph: &IGraph, rows: &[TokenRow], input: &str) -> Result<Graph> {
    convert_back(igraph, rows, input, true)
}

/// Like [`from_intermediate`], but drops placeholders that cannot be resolved.
/// Used on parser output, which is not guaranteed to anchor every node.
pub fn from_intermediate_lenient(igraph: &IGraph, rows: &[TokenRow], input: &str) -> Graph {
    convert_back(igraph, rows, input, false).expect("lenient conversion does not fail")
}

fn convert_back(igraph: &IGraph, rows: &[TokenRow], input: &str, strict: bool) -> Result<Graph> {
    let mut graph = Graph::new(igraph.id.clone(), igraph.framework.clone(), input);
    graph.flavor = igraph.flavor;
    let mut ids: HashMap<usize, NodeId> = HashMap::new();
    for inode in igraph.inner_nodes() {
        let id = ids.len() as NodeId;
        ids.insert(inode.id, id);
        let positions = igraph.anchored_positions(inode.id);
        if positions.iter().any(|&p| p >= rows.len()) {
            return Err(Error::Conversion(format!(
                "graph {}: terminal beyond the {} token rows",
                igraph.id,
                rows.len()
            )));
        }
        let lemma_list: Vec<&str> = positions.iter().map(|&k| rows[k].lemma.as_str()).collect();
        let form_list: Vec<&str> = positions.iter().map(|&k| rows[k].form.as_str()).collect();
        let (lemmas, forms) = (lemma_list.join(" "), form_list.join(" "));

        let mut node = Node::new(id);
        let mut properties = inode.properties.clone();
        let needs_tokens = inode.label.as_deref().is_some_and(has_placeholder)
            || properties.values().any(|v| has_placeholder(v));
        if needs_tokens && positions.is_empty() && strict {
            return Err(Error::Conversion(format!(
                "graph {}: node {} has a placeholder but no anchors",
                igraph.id, inode.id
            )));
        }
        expand_name(&mut properties, &lemma_list, &form_list);
        node.label = inode.label.as_deref().map(|l| resolve(l, &lemmas, &forms));
        for value in properties.values_mut() {
            *value = resolve(value, &lemmas, &forms);
        }
        node.properties = properties;
        node.anchors = positions.iter().map(|&k| rows[k].anchor).collect();
        graph.nodes.push(node);
    }
    let mut seen_tops = HashSet::new();
    for edge in &igraph.edges {
        if edge.source == igraph.root {
            if let Some(&t) = ids.get(&edge.target) {
                if seen_tops.insert(t) {
                    graph.tops.push(t);
                }
            }
            continue;
        }
        let (Some(&s), Some(&t)) = (ids.get(&edge.source), ids.get(&edge.target)) else {
            continue;
        };
        graph.edges.push(Edge {
            source: s,
            target: t,
            label: (!edge.label.is_empty()).then(|| edge.label.clone()),
            attributes: edge.attributes.clone(),
            extra: Default::default(),
        });
    }
    Ok(graph)
}

/// Character span covered by a list of rows, used when merging anchors.
pub fn span_of(rows: &[TokenRow]) -> Option<Anchor> {
    Some(Anchor::new(rows.first()?.anchor.from, rows.last()?.anchor.to))
}
