//! The MRP graph data model and its JSON-lines container.
//!
//! Properties and attributes travel as parallel `properties`/`values` arrays
//! on the wire and live in insertion-ordered maps in memory. Fields this
//! module does not interpret (`time`, `version`, `provenance`, ...) are kept
//! verbatim so that a read/write cycle loses nothing.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::constraints::FrameworkProfile;
use crate::error::{Error, Result};

pub type NodeId = u32;

/// A character span `[from, to)` in the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Anchor {
    pub from: usize,
    pub to: usize,
}

impl Anchor {
    pub fn new(from: usize, to: usize) -> Self {
        Anchor { from, to }
    }

    pub fn overlaps(&self, other: &Anchor) -> bool {
        self.from < other.to && other.from < self.to
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub label: Option<String>,
    pub properties: IndexMap<String, String>,
    pub anchors: Vec<Anchor>,
    pub extra: Map<String, Value>,
}

impl Node {
    pub fn new(id: NodeId) -> Self {
        Node {
            id,
            label: None,
            properties: IndexMap::new(),
            anchors: Vec::new(),
            extra: Map::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_property(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.properties.insert(name.into(), value.into());
        self
    }

    pub fn with_anchor(mut self, from: usize, to: usize) -> Self {
        self.anchors.push(Anchor::new(from, to));
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub attributes: IndexMap<String, String>,
    #[serde(default)]
    pub extra: Map<String, Value>,
}

impl Edge {
    pub fn new(source: NodeId, target: NodeId, label: Option<&str>) -> Self {
        Edge {
            source,
            target,
            label: label.map(str::to_owned),
            attributes: IndexMap::new(),
            extra: Map::new(),
        }
    }

    pub fn with_attribute(mut self, name: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(name.into(), value.into());
        self
    }

    fn sort_key(&self) -> (NodeId, NodeId, &str) {
        (self.source, self.target, self.label.as_deref().unwrap_or(""))
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Graph {
    pub id: String,
    pub framework: String,
    pub flavor: Option<u8>,
    pub input: String,
    pub tops: Vec<NodeId>,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub extra: Map<String, Value>,
}

impl Graph {
    pub fn new(id: impl Into<String>, framework: impl Into<String>, input: impl Into<String>) -> Self {
        Graph {
            id: id.into(),
            framework: framework.into(),
            input: input.into(),
            ..Graph::default()
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    /// Length of the source text in characters, the unit anchors count in.
    pub fn input_len(&self) -> usize {
        self.input.chars().count()
    }

    pub fn is_cyclic(&self) -> bool {
        !find_cycles(self).is_empty()
    }

    fn structural_problem(&self) -> Option<String> {
        let mut ids = HashSet::new();
        for node in &self.nodes {
            if !ids.insert(node.id) {
                return Some(format!("duplicate node id {}", node.id));
            }
        }
        for edge in &self.edges {
            if !ids.contains(&edge.source) || !ids.contains(&edge.target) {
                return Some(format!(
                    "edge {} -> {} references a missing node",
                    edge.source, edge.target
                ));
            }
        }
        for top in &self.tops {
            if !ids.contains(top) {
                return Some(format!("top {top} references a missing node"));
            }
        }
        None
    }
}

// Wire representation.

#[derive(Serialize, Deserialize)]
struct GraphWire {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    flavor: Option<u8>,
    framework: String,
    #[serde(flatten)]
    extra: Map<String, Value>,
    #[serde(default)]
    input: String,
    #[serde(default)]
    tops: Vec<NodeId>,
    #[serde(default)]
    nodes: Vec<NodeWire>,
    #[serde(default)]
    edges: Vec<EdgeWire>,
}

#[derive(Serialize, Deserialize)]
struct NodeWire {
    id: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    properties: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchors: Option<Vec<Anchor>>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

#[derive(Serialize, Deserialize)]
struct EdgeWire {
    source: NodeId,
    target: NodeId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attributes: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<Value>>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

fn scalar_to_string(value: Value) -> String {
    match value {
        Value::String(s) => s,
        other => other.to_string(),
    }
}

fn zip_map(
    names: Option<Vec<String>>,
    values: Option<Vec<Value>>,
    graph_id: &str,
    what: &str,
) -> Result<IndexMap<String, String>> {
    let names = names.unwrap_or_default();
    let values = values.unwrap_or_default();
    if names.len() != values.len() {
        return Err(Error::Validation {
            graph_id: graph_id.to_owned(),
            message: format!(
                "{what} has {} names but {} values",
                names.len(),
                values.len()
            ),
        });
    }
    let mut map = IndexMap::with_capacity(names.len());
    for (name, value) in names.into_iter().zip(values) {
        if map.insert(name.clone(), scalar_to_string(value)).is_some() {
            return Err(Error::Validation {
                graph_id: graph_id.to_owned(),
                message: format!("{what} repeats name {name:?}"),
            });
        }
    }
    Ok(map)
}

fn split_map(map: &IndexMap<String, String>) -> (Option<Vec<String>>, Option<Vec<Value>>) {
    if map.is_empty() {
        return (None, None);
    }
    (
        Some(map.keys().cloned().collect()),
        Some(map.values().map(|v| Value::String(v.clone())).collect()),
    )
}

impl GraphWire {
    fn into_graph(self) -> Result<Graph> {
        let id = self.id;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for n in self.nodes {
            nodes.push(Node {
                id: n.id,
                label: n.label,
                properties: zip_map(n.properties, n.values, &id, &format!("node {}", n.id))?,
                anchors: n.anchors.unwrap_or_default(),
                extra: n.extra,
            });
        }
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in self.edges {
            edges.push(Edge {
                source: e.source,
                target: e.target,
                label: e.label,
                attributes: zip_map(
                    e.attributes,
                    e.values,
                    &id,
                    &format!("edge {} -> {}", e.source, e.target),
                )?,
                extra: e.extra,
            });
        }
        Ok(Graph {
            id,
            framework: self.framework,
            flavor: self.flavor,
            input: self.input,
            tops: self.tops,
            nodes,
            edges,
            extra: self.extra,
        })
    }

    fn from_graph(graph: &Graph) -> GraphWire {
        GraphWire {
            id: graph.id.clone(),
            flavor: graph.flavor,
            framework: graph.framework.clone(),
            extra: graph.extra.clone(),
            input: graph.input.clone(),
            tops: graph.tops.clone(),
            nodes: graph
                .nodes
                .iter()
                .map(|n| {
                    let (properties, values) = split_map(&n.properties);
                    NodeWire {
                        id: n.id,
                        label: n.label.clone(),
                        properties,
                        values,
                        anchors: if n.anchors.is_empty() {
                            None
                        } else {
                            Some(n.anchors.clone())
                        },
                        extra: n.extra.clone(),
                    }
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|e| {
                    let (attributes, values) = split_map(&e.attributes);
                    EdgeWire {
                        source: e.source,
                        target: e.target,
                        label: e.label.clone(),
                        attributes,
                        values,
                        extra: e.extra.clone(),
                    }
                })
                .collect(),
        }
    }
}

/// Parses a single MRP JSON object.
pub fn parse_graph(line: &str, line_no: usize) -> Result<Graph> {
    let wire: GraphWire =
        serde_json::from_str(line).map_err(|source| Error::Json { line: line_no, source })?;
    let graph = wire.into_graph()?;
    if let Some(message) = graph.structural_problem() {
        return Err(Error::Validation {
            graph_id: graph.id,
            message,
        });
    }
    Ok(graph)
}

/// Reads one graph per non-blank line. Line numbers in errors are 1-based.
pub fn read_mrp<R: BufRead>(reader: R) -> Result<Vec<Graph>> {
    let mut graphs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        graphs.push(parse_graph(&line, idx + 1)?);
    }
    Ok(graphs)
}

pub fn graph_to_json(graph: &Graph) -> String {
    serde_json::to_string(&GraphWire::from_graph(graph)).expect("graph serialization cannot fail")
}

pub fn write_mrp<W: Write>(graphs: &[Graph], mut writer: W) -> Result<()> {
    for graph in graphs {
        writer.write_all(graph_to_json(graph).as_bytes())?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// One finding of [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateNodeId(NodeId),
    DanglingEdge { source: NodeId, target: NodeId },
    DanglingTop(NodeId),
    DuplicateTop(NodeId),
    EmptyAnchor { node: NodeId, anchor: Anchor },
    AnchorOutOfRange { node: NodeId, anchor: Anchor },
    NodeLabelsForbidden { node: NodeId },
    NodeLabelMissing { node: NodeId },
    NodePropertiesForbidden { node: NodeId },
    EdgeAttributesForbidden { source: NodeId, target: NodeId },
    AnchorsForbidden { node: NodeId },
    Multigraph { source: NodeId, target: NodeId, label: Option<String> },
    TooManyTops { count: usize, max: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateNodeId(id) => write!(f, "duplicate node id {id}"),
            DanglingEdge { source, target } => {
                write!(f, "edge {source} -> {target} references a missing node")
            }
            DanglingTop(id) => write!(f, "top {id} references a missing node"),
            DuplicateTop(id) => write!(f, "top {id} listed twice"),
            EmptyAnchor { node, anchor } => {
                write!(f, "node {node}: empty anchor {}:{}", anchor.from, anchor.to)
            }
            AnchorOutOfRange { node, anchor } => write!(
                f,
                "node {node}: anchor {}:{} outside the input",
                anchor.from, anchor.to
            ),
            NodeLabelsForbidden { node } => write!(f, "node {node}: node labels forbidden"),
            NodeLabelMissing { node } => write!(f, "node {node}: node label required"),
            NodePropertiesForbidden { node } => {
                write!(f, "node {node}: node properties forbidden")
            }
            EdgeAttributesForbidden { source, target } => {
                write!(f, "edge {source} -> {target}: edge attributes forbidden")
            }
            AnchorsForbidden { node } => write!(f, "node {node}: anchors forbidden"),
            Multigraph { source, target, label } => write!(
                f,
                "edge {source} -> {target} ({}) duplicated in a non-multigraph framework",
                label.as_deref().unwrap_or("unlabeled")
            ),
            TooManyTops { count, max } => write!(f, "{count} tops, at most {max} allowed"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

/// Checks the data-model invariants and every constraint of `profile`.
pub fn validate(graph: &Graph, profile: &FrameworkProfile) -> ValidationReport {
    let mut violations = Vec::new();
    let mut ids = HashSet::new();
    for node in &graph.nodes {
        if !ids.insert(node.id) {
            violations.push(Violation::DuplicateNodeId(node.id));
        }
    }
    let input_len = graph.input_len();
    for node in &graph.nodes {
        for anchor in &node.anchors {
            if anchor.from >= anchor.to {
                violations.push(Violation::EmptyAnchor { node: node.id, anchor: *anchor });
            } else if anchor.to > input_len {
                violations.push(Violation::AnchorOutOfRange { node: node.id, anchor: *anchor });
            }
        }
        if node.label.is_some() && !profile.allows_node_labels {
            violations.push(Violation::NodeLabelsForbidden { node: node.id });
        }
        if node.label.is_none() && profile.required_node_labels {
            violations.push(Violation::NodeLabelMissing { node: node.id });
        }
        if !node.properties.is_empty() && !profile.allows_node_properties {
            violations.push(Violation::NodePropertiesForbidden { node: node.id });
        }
        if !node.anchors.is_empty() && !profile.allows_anchors {
            violations.push(Violation::AnchorsForbidden { node: node.id });
        }
    }
    let mut seen_edges = HashSet::new();
    for edge in &graph.edges {
        if !ids.contains(&edge.source) || !ids.contains(&edge.target) {
            violations.push(Violation::DanglingEdge { source: edge.source, target: edge.target });
        }
        if !edge.attributes.is_empty() && !profile.allows_edge_attributes {
            violations.push(Violation::EdgeAttributesForbidden {
                source: edge.source,
                target: edge.target,
            });
        }
        if !profile.allows_multigraph && !seen_edges.insert(edge.sort_key()) {
            violations.push(Violation::Multigraph {
                source: edge.source,
                target: edge.target,
                label: edge.label.clone(),
            });
        }
    }
    let mut seen_tops = HashSet::new();
    for top in &graph.tops {
        if !ids.contains(top) {
            violations.push(Violation::DanglingTop(*top));
        }
        if !seen_tops.insert(*top) {
            violations.push(Violation::DuplicateTop(*top));
        }
    }
    if let Some(max) = profile.max_tops {
        if graph.tops.len() > max {
            violations.push(Violation::TooManyTops { count: graph.tops.len(), max });
        }
    }
    ValidationReport { violations }
}

/// Returns one witness cycle per non-trivial strongly connected component,
/// plus every self-loop, each as a list of indices into `graph.edges`.
///
/// Witnesses are found by a depth-first search from the component's lowest
/// node id, visiting targets in ascending id order.
pub fn find_cycles(graph: &Graph) -> Vec<Vec<usize>> {
    let mut ids: Vec<NodeId> = graph.nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    ids.dedup();
    let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();
    // Outgoing (target position, edge index), ascending by target id then edge order.
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (e, edge) in graph.edges.iter().enumerate() {
        if let (Some(&s), Some(&t)) = (index.get(&edge.source), index.get(&edge.target)) {
            out[s].push((t, e));
        }
    }
    for list in &mut out {
        list.sort();
    }

    let components = tarjan(&out);
    let mut cycles: Vec<(usize, Vec<usize>)> = Vec::new();
    for comp in components.iter().filter(|c| c.len() >= 2) {
        let members: HashSet<usize> = comp.iter().copied().collect();
        let start = *comp.iter().min().expect("non-empty component");
        if let Some(path) = witness(&out, &members, start) {
            cycles.push((start, path));
        }
    }
    for (s, list) in out.iter().enumerate() {
        for &(t, e) in list {
            if s == t {
                cycles.push((s, vec![e]));
            }
        }
    }
    cycles.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.len().cmp(&b.1.len()).reverse()));
    cycles.into_iter().map(|(_, c)| c).collect()
}

fn witness(out: &[Vec<(usize, usize)>], members: &HashSet<usize>, start: usize) -> Option<Vec<usize>> {
    let mut visited = HashSet::new();
    visited.insert(start);
    // Stack frames: (node, next outgoing position), with the edge path alongside.
    let mut frames = vec![(start, 0usize)];
    let mut path: Vec<usize> = Vec::new();
    while let Some(frame) = frames.last_mut() {
        let (node, pos) = *frame;
        if pos >= out[node].len() {
            frames.pop();
            path.pop();
            continue;
        }
        frame.1 += 1;
        let (target, edge) = out[node][pos];
        if !members.contains(&target) || target == node {
            continue;
        }
        if target == start {
            path.push(edge);
            return Some(path);
        }
        if visited.insert(target) {
            path.push(edge);
            frames.push((target, 0));
        }
    }
    None
}

/// Iterative Tarjan; components are returned in discovery order of their roots.
fn tarjan(out: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    let n = out.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call = vec![(root, 0usize)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < out[v].len() {
                let w = out[v][*pos].0;
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(comp);
                }
            }
        }
    }
    components
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleCounts {
    pub graph_count: usize,
    pub cyclic_count: usize,
    pub cyclic_fraction: Option<f64>,
}

impl CycleCounts {
    fn finish(&mut self) {
        self.cyclic_fraction = (self.graph_count > 0)
            .then(|| self.cyclic_count as f64 / self.graph_count as f64);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    #[serde(flatten)]
    pub overall: CycleCounts,
    pub per_framework: BTreeMap<String, CycleCounts>,
}

pub fn corpus_stats(graphs: &[Graph]) -> CorpusStats {
    let cyclic: Vec<bool> = graphs.par_iter().map(Graph::is_cyclic).collect();
    let mut stats = CorpusStats::default();
    for (graph, cyclic) in graphs.iter().zip(cyclic) {
        let entry = stats.per_framework.entry(graph.framework.clone()).or_default();
        for counts in [&mut stats.overall, entry] {
            counts.graph_count += 1;
            counts.cyclic_count += usize::from(cyclic);
        }
    }
    stats.overall.finish();
    stats.per_framework.values_mut().for_each(CycleCounts::finish);
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::profile_for;

    const ONE_NODE: &str = r#"{"id": "s1", "flavor": 1, "framework": "ucca", "time": "2020-04-01", "input": "Hi", "tops": [0], "nodes": [{"id": 0, "anchors": [{"from": 0, "to": 2}]}], "edges": []}"#;

    #[test]
    fn reads_single_node_graph() {
        let graphs = read_mrp(ONE_NODE.as_bytes()).unwrap();
        assert_eq!(graphs.len(), 1);
        let g = &graphs[0];
        assert_eq!((g.nodes.len(), g.edges.len(), g.tops.len()), (1, 0, 1));
        assert_eq!(g.extra.get("time"), Some(&Value::String("2020-04-01".into())));
    }

    #[test]
    fn empty_stream_is_empty_corpus() {
        assert!(read_mrp("".as_bytes()).unwrap().is_empty());
        let mut out = Vec::new();
        write_mrp(&[], &mut out).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn dangling_edge_names_graph() {
        let line = r#"{"id": "broken-7", "framework": "dm", "input": "a b", "tops": [0], "nodes": [{"id": 0}], "edges": [{"source": 0, "target": 3, "label": "ARG1"}]}"#;
        match read_mrp(line.as_bytes()) {
            Err(Error::Validation { graph_id, .. }) => assert_eq!(graph_id, "broken-7"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_line() {
        let text = format!("{ONE_NODE}\n{{not json\n");
        match read_mrp(text.as_bytes()) {
            Err(Error::Json { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected JSON error, got {other:?}"),
        }
    }

    #[test]
    fn property_order_survives_round_trip() {
        let mut g = Graph::new("p", "ptg", "word");
        g.nodes.push(
            Node::new(0)
                .with_label("word")
                .with_property("zeta", "1")
                .with_property("alpha", "2")
                .with_property("mid", "3"),
        );
        let mut buf = Vec::new();
        write_mrp(&[g.clone()], &mut buf).unwrap();
        let back = read_mrp(buf.as_slice()).unwrap();
        let keys: Vec<&str> = back[0].nodes[0].properties.keys().map(String::as_str).collect();
        assert_eq!(keys, ["zeta", "alpha", "mid"]);
        assert_eq!(back[0], g);
    }

    #[test]
    fn non_string_values_become_strings() {
        let line = r#"{"id": "u", "framework": "ucca", "input": "a b", "tops": [], "nodes": [{"id": 0}, {"id": 1}], "edges": [{"source": 0, "target": 1, "label": "A", "attributes": ["remote"], "values": [true]}]}"#;
        let g = &read_mrp(line.as_bytes()).unwrap()[0];
        assert_eq!(g.edges[0].attributes["remote"], "true");
    }

    #[test]
    fn ucca_rejects_node_labels() {
        let mut g = Graph::new("u", "ucca", "fox");
        g.nodes.push(Node::new(0).with_label("fox").with_anchor(0, 3));
        g.tops.push(0);
        let report = validate(&g, &profile_for("ucca").unwrap());
        assert_eq!(report.violations.len(), 1);
        assert!(report.messages()[0].contains("node labels forbidden"));
    }

    #[test]
    fn ptg_parallel_edges_are_fine() {
        let mut g = Graph::new("p", "ptg", "a b");
        g.nodes.push(Node::new(0).with_label("a").with_property("sempos", "n"));
        g.nodes.push(Node::new(1).with_label("b").with_property("sempos", "v"));
        g.edges.push(Edge::new(0, 1, Some("ACT")));
        g.edges.push(Edge::new(0, 1, Some("PAT")));
        g.tops.push(0);
        assert!(validate(&g, &profile_for("ptg").unwrap()).is_valid());
    }

    #[test]
    fn duplicate_triple_only_allowed_for_multigraphs() {
        let mut g = Graph::new("d", "dm", "a b");
        g.nodes.push(Node::new(0).with_label("a"));
        g.nodes.push(Node::new(1).with_label("b"));
        g.edges.push(Edge::new(0, 1, Some("ARG1")));
        g.edges.push(Edge::new(0, 1, Some("ARG1")));
        let report = validate(&g, &profile_for("dm").unwrap());
        assert!(matches!(report.violations[..], [Violation::Multigraph { .. }]));
        assert!(validate(&g, &profile_for("ptg").unwrap())
            .violations
            .iter()
            .all(|v| !matches!(v, Violation::Multigraph { .. })));
    }

    #[test]
    fn empty_graph_is_valid() {
        let g = Graph::new("e", "ucca", "");
        for fw in ["ucca", "ptg", "amr", "drg", "eds", "dm", "psd"] {
            assert!(validate(&g, &profile_for(fw).unwrap()).is_valid(), "{fw}");
        }
    }

    #[test]
    fn anchor_bounds_are_checked() {
        let mut g = Graph::new("a", "ucca", "ab");
        g.nodes.push(Node::new(0).with_anchor(1, 5));
        g.nodes.push(Node::new(1).with_anchor(1, 1));
        let report = validate(&g, &profile_for("ucca").unwrap());
        assert_eq!(report.violations.len(), 2);
    }

    #[test]
    fn two_cycle_is_found() {
        let mut g = Graph::new("c", "ptg", "");
        g.nodes.extend([Node::new(0), Node::new(1)]);
        g.edges.push(Edge::new(0, 1, Some("a")));
        g.edges.push(Edge::new(1, 0, Some("b")));
        assert_eq!(find_cycles(&g), vec![vec![0, 1]]);
    }

    #[test]
    fn self_loop_counts_as_cycle() {
        let mut g = Graph::new("c", "ptg", "");
        g.nodes.push(Node::new(4));
        g.edges.push(Edge::new(4, 4, None));
        assert_eq!(find_cycles(&g), vec![vec![0]]);
    }

    #[test]
    fn dag_has_no_cycles() {
        let mut g = Graph::new("d", "dm", "");
        g.nodes.extend((0..4).map(Node::new));
        g.edges.push(Edge::new(0, 1, None));
        g.edges.push(Edge::new(0, 2, None));
        g.edges.push(Edge::new(1, 3, None));
        g.edges.push(Edge::new(2, 3, None));
        assert!(find_cycles(&g).is_empty());
    }

    #[test]
    fn witness_prefers_lower_targets() {
        // 0 -> 2 -> 0 and 0 -> 1 -> 0 share a component; the witness goes through 1.
        let mut g = Graph::new("w", "ptg", "");
        g.nodes.extend((0..3).map(Node::new));
        g.edges.push(Edge::new(0, 2, None));
        g.edges.push(Edge::new(2, 0, None));
        g.edges.push(Edge::new(0, 1, None));
        g.edges.push(Edge::new(1, 0, None));
        assert_eq!(find_cycles(&g), vec![vec![2, 3]]);
    }

    #[test]
    fn empty_corpus_has_no_fraction() {
        let stats = corpus_stats(&[]);
        assert_eq!(stats.overall.graph_count, 0);
        assert_eq!(stats.overall.cyclic_fraction, None);
    }
}
