//! Parser states and the uniform transition set.
//!
//! The stack is written with its top to the right and the buffer with its
//! head to the left. Node references are creation indices: the virtual root
//! is `0`, the terminals are `1..=n`, and every node created by `NODE` or
//! `CHILD` takes the next index.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irep::{IEdge, IGraph, INode};

pub type NodeRef = usize;

pub const ROOT: NodeRef = 0;
/// Label of edges from the virtual root to top nodes.
pub const TOP_LABEL: &str = "TOP";
/// Label of edges from anchored nodes to virtual terminals.
pub const ANCHOR_LABEL: &str = "ANCHOR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransitionKind {
    Shift,
    Reduce,
    Node,
    Child,
    Label,
    Property,
    LeftEdge,
    RightEdge,
    Attribute,
    Swap,
    Finish,
}

impl TransitionKind {
    pub const ALL: [TransitionKind; 11] = [
        TransitionKind::Shift,
        TransitionKind::Reduce,
        TransitionKind::Node,
        TransitionKind::Child,
        TransitionKind::Label,
        TransitionKind::Property,
        TransitionKind::LeftEdge,
        TransitionKind::RightEdge,
        TransitionKind::Attribute,
        TransitionKind::Swap,
        TransitionKind::Finish,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TransitionKind::Shift => "SHIFT",
            TransitionKind::Reduce => "REDUCE",
            TransitionKind::Node => "NODE",
            TransitionKind::Child => "CHILD",
            TransitionKind::Label => "LABEL",
            TransitionKind::Property => "PROPERTY",
            TransitionKind::LeftEdge => "LEFT-EDGE",
            TransitionKind::RightEdge => "RIGHT-EDGE",
            TransitionKind::Attribute => "ATTRIBUTE",
            TransitionKind::Swap => "SWAP",
            TransitionKind::Finish => "FINISH",
        }
    }

    pub fn takes_payload(self) -> bool {
        matches!(
            self,
            TransitionKind::Node
                | TransitionKind::Child
                | TransitionKind::Label
                | TransitionKind::Property
                | TransitionKind::LeftEdge
                | TransitionKind::RightEdge
                | TransitionKind::Attribute
        )
    }

    /// Kinds whose payload is an edge label chosen by the transition classifier.
    pub fn creates_edge(self) -> bool {
        matches!(
            self,
            TransitionKind::Node
                | TransitionKind::Child
                | TransitionKind::LeftEdge
                | TransitionKind::RightEdge
        )
    }
}

impl FromStr for TransitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransitionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::TransitionFormat(format!("unknown transition kind {s:?}")))
    }
}

/// A transition with its optional payload: an edge label, a node label, or a
/// `name=value` pair for properties and attributes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub kind: TransitionKind,
    pub payload: Option<String>,
}

impl Transition {
    fn bare(kind: TransitionKind) -> Self {
        Transition { kind, payload: None }
    }

    fn with(kind: TransitionKind, payload: impl Into<String>) -> Self {
        Transition { kind, payload: Some(payload.into()) }
    }

    pub fn shift() -> Self {
        Self::bare(TransitionKind::Shift)
    }
    pub fn reduce() -> Self {
        Self::bare(TransitionKind::Reduce)
    }
    pub fn swap() -> Self {
        Self::bare(TransitionKind::Swap)
    }
    pub fn finish() -> Self {
        Self::bare(TransitionKind::Finish)
    }
    pub fn node(label: impl Into<String>) -> Self {
        Self::with(TransitionKind::Node, label)
    }
    pub fn child(label: impl Into<String>) -> Self {
        Self::with(TransitionKind::Child, label)
    }
    pub fn label(label: impl Into<String>) -> Self {
        Self::with(TransitionKind::Label, label)
    }
    pub fn property(name: &str, value: &str) -> Self {
        Self::with(TransitionKind::Property, format!("{name}={value}"))
    }
    pub fn left_edge(label: impl Into<String>) -> Self {
        Self::with(TransitionKind::LeftEdge, label)
    }
    pub fn right_edge(label: impl Into<String>) -> Self {
        Self::with(TransitionKind::RightEdge, label)
    }
    pub fn attribute(name: &str, value: &str) -> Self {
        Self::with(TransitionKind::Attribute, format!("{name}={value}"))
    }

    pub fn payload(&self) -> &str {
        self.payload.as_deref().unwrap_or("")
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Some(p) => write!(f, "{}\t{}", self.kind.name(), p),
            None => f.write_str(self.kind.name()),
        }
    }
}

impl FromStr for Transition {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (name, payload) = match line.split_once('\t') {
            Some((n, p)) => (n, Some(p.to_owned())),
            None => (line, None),
        };
        let kind: TransitionKind = name.parse()?;
        if kind.takes_payload() != payload.is_some() {
            return Err(Error::TransitionFormat(format!(
                "{name} {} a payload",
                if kind.takes_payload() { "requires" } else { "does not take" }
            )));
        }
        Ok(Transition { kind, payload })
    }
}

/// Splits a property or attribute payload at its first `=`.
pub fn split_pair(payload: &str) -> Option<(&str, &str)> {
    payload.split_once('=').filter(|(name, _)| !name.is_empty())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Root,
    /// A virtual terminal, carrying its 0-based token position.
    Terminal(usize),
    Inner,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateNode {
    pub kind: NodeKind,
    pub label: Option<String>,
    pub properties: IndexMap<String, String>,
    pub outgoing: Vec<usize>,
    pub incoming: Vec<usize>,
}

impl StateNode {
    fn new(kind: NodeKind) -> Self {
        StateNode {
            kind,
            label: None,
            properties: IndexMap::new(),
            outgoing: Vec::new(),
            incoming: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateEdge {
    pub source: NodeRef,
    pub target: NodeRef,
    pub label: String,
    pub attributes: IndexMap<String, String>,
}

/// Why a transition cannot be applied.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Illegal(pub String);

impl fmt::Display for Illegal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn illegal<T>(reason: &str) -> std::result::Result<T, Illegal> {
    Err(Illegal(reason.to_owned()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParserState {
    stack: Vec<NodeRef>,
    buffer: VecDeque<NodeRef>,
    nodes: Vec<StateNode>,
    edges: Vec<StateEdge>,
    history: Vec<Transition>,
    n_terminals: usize,
    finished: bool,
}

/// Builds the initial state for a sentence whose tokens carry the given ids.
/// Ids only need to be distinct; terminal `k` gets node reference `k + 1`.
pub fn initial_state<T: Eq + std::hash::Hash>(tokens: &[T]) -> Result<ParserState> {
    let mut seen = HashSet::new();
    if !tokens.iter().all(|t| seen.insert(t)) {
        return Err(Error::Illegal("duplicate terminal reference".into()));
    }
    Ok(ParserState::new(tokens.len()))
}

impl ParserState {
    pub fn new(n_terminals: usize) -> Self {
        let mut nodes = Vec::with_capacity(2 * n_terminals + 1);
        nodes.push(StateNode::new(NodeKind::Root));
        nodes.extend((0..n_terminals).map(|i| StateNode::new(NodeKind::Terminal(i))));
        ParserState {
            stack: vec![ROOT],
            buffer: (1..=n_terminals).collect(),
            nodes,
            edges: Vec::new(),
            history: Vec::new(),
            n_terminals,
            finished: false,
        }
    }

    pub fn stack(&self) -> &[NodeRef] {
        &self.stack
    }

    pub fn buffer(&self) -> &VecDeque<NodeRef> {
        &self.buffer
    }

    pub fn nodes(&self) -> &[StateNode] {
        &self.nodes
    }

    pub fn node(&self, r: NodeRef) -> &StateNode {
        &self.nodes[r]
    }

    pub fn edges(&self) -> &[StateEdge] {
        &self.edges
    }

    pub fn history(&self) -> &[Transition] {
        &self.history
    }

    pub fn n_terminals(&self) -> usize {
        self.n_terminals
    }

    pub fn is_terminal(&self) -> bool {
        self.finished
    }

    /// Whether `r` is one of the token nodes.
    pub fn is_token(&self, r: NodeRef) -> bool {
        (1..=self.n_terminals).contains(&r)
    }

    pub fn terminal_ref(&self, position: usize) -> NodeRef {
        position + 1
    }

    /// Creation index of a node; identical to its reference.
    pub fn index_of(&self, r: NodeRef) -> usize {
        r
    }

    pub fn stack_top(&self) -> Option<NodeRef> {
        self.stack.last().copied()
    }

    /// The `k`-th stack item from the top (`0` is the top).
    pub fn stack_at(&self, k: usize) -> Option<NodeRef> {
        self.stack.len().checked_sub(k + 1).map(|i| self.stack[i])
    }

    pub fn buffer_at(&self, k: usize) -> Option<NodeRef> {
        self.buffer.get(k).copied()
    }

    pub fn latest_edge(&self) -> Option<&StateEdge> {
        self.edges.last()
    }

    /// Whether a directed path leads from `from` to `to`.
    pub fn has_path(&self, from: NodeRef, to: NodeRef) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut todo = vec![from];
        seen[from] = true;
        while let Some(v) = todo.pop() {
            for &e in &self.nodes[v].outgoing {
                let t = self.edges[e].target;
                if t == to {
                    return true;
                }
                if !seen[t] {
                    seen[t] = true;
                    todo.push(t);
                }
            }
        }
        false
    }

    pub fn has_edge(&self, source: NodeRef, target: NodeRef, label: &str) -> bool {
        self.nodes[source]
            .outgoing
            .iter()
            .any(|&e| self.edges[e].target == target && self.edges[e].label == label)
    }

    /// Checks every precondition of `t`; `Err` carries the first failing one.
    pub fn check(&self, t: &Transition) -> std::result::Result<(), Illegal> {
        use TransitionKind::*;
        if self.finished {
            return illegal("terminal state");
        }
        if t.kind.takes_payload() != t.payload.is_some() {
            return illegal(if t.kind.takes_payload() {
                "missing payload"
            } else {
                "unexpected payload"
            });
        }
        match t.kind {
            Shift => {
                if self.buffer.is_empty() {
                    return illegal("empty buffer");
                }
            }
            Reduce | Node | Child | Label | Property => {
                let x = match self.stack_top() {
                    Some(x) => x,
                    None => return illegal("empty stack"),
                };
                if matches!(t.kind, Reduce | Node | Label | Property) && x == ROOT {
                    return illegal("x is root");
                }
                if matches!(t.kind, Child | Label | Property) && self.is_token(x) {
                    return illegal("x is terminal");
                }
                if t.kind == Label && self.nodes[x].label.is_some() {
                    return illegal("node already labeled");
                }
                if t.kind == Property && split_pair(t.payload()).is_none() {
                    return illegal("payload is not name=value");
                }
            }
            LeftEdge | RightEdge => {
                let (x, y) = match (self.stack_at(0), self.stack_at(1)) {
                    (Some(top), Some(second)) if t.kind == LeftEdge => (top, second),
                    (Some(top), Some(second)) => (second, top),
                    _ => return illegal("stack has fewer than two items"),
                };
                if self.is_token(x) {
                    return illegal("x is terminal");
                }
                if y == ROOT {
                    return illegal("y is root");
                }
                if self.has_path(y, x) {
                    return illegal("directed path from y to x");
                }
            }
            Attribute => {
                let edge = match self.latest_edge() {
                    Some(e) => e,
                    None => return illegal("no edge to attribute"),
                };
                if edge.source == ROOT {
                    return illegal("x is root");
                }
                if self.is_token(edge.target) {
                    return illegal("y is terminal");
                }
                if split_pair(t.payload()).is_none() {
                    return illegal("payload is not name=value");
                }
            }
            Swap => {
                let (x, y) = match (self.stack_at(1), self.stack_at(0)) {
                    (Some(x), Some(y)) => (x, y),
                    _ => return illegal("stack has fewer than two items"),
                };
                if x == ROOT {
                    return illegal("x is root");
                }
                if self.index_of(x) >= self.index_of(y) {
                    return illegal("swap index order");
                }
            }
            Finish => {
                if self.stack != [ROOT] || !self.buffer.is_empty() {
                    return illegal("finish requires stack [root] and an empty buffer");
                }
            }
        }
        Ok(())
    }

    pub fn is_legal(&self, t: &Transition) -> bool {
        self.check(t).is_ok()
    }

    /// Returns the successor state, leaving `self` untouched.
    pub fn apply(&self, t: &Transition) -> Result<ParserState> {
        let mut next = self.clone();
        next.apply_mut(t)?;
        Ok(next)
    }

    pub fn apply_mut(&mut self, t: &Transition) -> Result<()> {
        self.check(t).map_err(|e| Error::Illegal(e.0))?;
        use TransitionKind::*;
        match t.kind {
            Shift => {
                let x = self.buffer.pop_front().expect("checked");
                self.stack.push(x);
            }
            Reduce => {
                self.stack.pop();
            }
            Node => {
                let x = self.stack_top().expect("checked");
                let y = self.add_node();
                self.add_edge(y, x, t.payload());
                self.buffer.push_front(y);
            }
            Child => {
                let x = self.stack_top().expect("checked");
                let y = self.add_node();
                self.add_edge(x, y, t.payload());
                self.buffer.push_front(y);
            }
            Label => {
                let x = self.stack_top().expect("checked");
                self.nodes[x].label = Some(t.payload().to_owned());
            }
            Property => {
                let x = self.stack_top().expect("checked");
                let (name, value) = split_pair(t.payload()).expect("checked");
                self.nodes[x].properties.insert(name.to_owned(), value.to_owned());
            }
            LeftEdge => {
                let (x, y) = (self.stack_at(0).unwrap(), self.stack_at(1).unwrap());
                self.add_edge(x, y, t.payload());
            }
            RightEdge => {
                let (x, y) = (self.stack_at(1).unwrap(), self.stack_at(0).unwrap());
                self.add_edge(x, y, t.payload());
            }
            Attribute => {
                let (name, value) = split_pair(t.payload()).expect("checked");
                let edge = self.edges.last_mut().expect("checked");
                edge.attributes.insert(name.to_owned(), value.to_owned());
            }
            Swap => {
                let y = self.stack.pop().expect("checked");
                let x = self.stack.pop().expect("checked");
                self.stack.push(y);
                self.buffer.push_front(x);
            }
            Finish => {
                self.stack.clear();
                self.finished = true;
            }
        }
        self.history.push(t.clone());
        Ok(())
    }

    fn add_node(&mut self) -> NodeRef {
        self.nodes.push(StateNode::new(NodeKind::Inner));
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, source: NodeRef, target: NodeRef, label: &str) {
        let e = self.edges.len();
        self.edges.push(StateEdge {
            source,
            target,
            label: label.to_owned(),
            attributes: IndexMap::new(),
        });
        self.nodes[source].outgoing.push(e);
        self.nodes[target].incoming.push(e);
    }

    /// Reads the built graph out of a state, finished or not.
    pub fn snapshot(&self) -> IGraph {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| INode {
                id,
                kind: n.kind,
                label: n.label.clone(),
                properties: n.properties.clone(),
            })
            .collect();
        let edges = self
            .edges
            .iter()
            .map(|e| IEdge {
                source: e.source,
                target: e.target,
                label: e.label.clone(),
                attributes: e.attributes.clone(),
            })
            .collect();
        IGraph {
            nodes,
            edges,
            root: ROOT,
            terminals: (1..=self.n_terminals).collect(),
            ..IGraph::default()
        }
    }
}

/// The graph of a finished parse.
pub fn extract_igraph(state: &ParserState) -> Result<IGraph> {
    if !state.is_terminal() {
        return Err(Error::Illegal("state is not terminal".into()));
    }
    Ok(state.snapshot())
}
