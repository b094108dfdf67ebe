//! Gold transition sequences.
//!
//! The oracle proposes the gold-consistent transitions of a state in a fixed
//! priority order: decorations first (Attribute, Label, Property), then edges
//! between the two topmost stack items, Reduce for finished nodes, then node
//! creation while the buffer is empty (Node from a child for nodes with
//! anchored descendants, Child from a parent otherwise), Swap when s0 still
//! has partners deeper in the stack, Shift, late creation, other Swaps and
//! Finish. A fresh node is the newest item, so it may swap its way down the
//! whole stack; the swapped items return through Shift. [`gold_sequence`]
//! follows that order greedily and backtracks with a memoized depth-first
//! search when the greedy choice dead-ends.

use std::collections::HashSet;

use crate::companion::TokenRow;
use crate::error::{Error, Result};
use crate::irep::IGraph;
use crate::transition::{
    extract_igraph, NodeKind, NodeRef, ParserState, Transition, TransitionKind, ROOT,
};

/// Upper bound on explored states per sentence.
pub const SEARCH_BUDGET: usize = 1_000_000;

/// Static facts about a gold graph.
#[derive(Clone, Debug)]
struct GoldIndex {
    /// Edge indices leaving each node.
    outgoing: Vec<Vec<usize>>,
    /// Edge indices entering each node.
    incoming: Vec<Vec<usize>>,
    /// Whether a node reaches a terminal through its outgoing edges.
    bottom_up: Vec<bool>,
}

impl GoldIndex {
    fn new(gold: &IGraph) -> Self {
        let n = gold.nodes.len();
        let mut outgoing = vec![Vec::new(); n];
        let mut incoming = vec![Vec::new(); n];
        for (i, e) in gold.edges.iter().enumerate() {
            outgoing[e.source].push(i);
            incoming[e.target].push(i);
        }
        let mut bottom_up: Vec<bool> = (0..n).map(|v| gold.is_terminal(v)).collect();
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..n {
                if bottom_up[v] || v == gold.root {
                    continue;
                }
                if outgoing[v].iter().any(|&e| bottom_up[gold.edges[e].target]) {
                    bottom_up[v] = true;
                    changed = true;
                }
            }
        }
        GoldIndex {
            outgoing,
            incoming,
            bottom_up,
        }
    }
}

/// A parser state paired with the gold graph it is meant to rebuild.
#[derive(Clone, Debug)]
pub struct OracleState<'g> {
    pub parser: ParserState,
    pub gold: &'g IGraph,
    index: std::rc::Rc<GoldIndex>,
    /// Gold node for each parser node.
    to_gold: Vec<usize>,
    /// Parser node for each gold node, once created.
    to_parser: Vec<Option<NodeRef>>,
    /// Which gold edges have been built.
    done: Vec<bool>,
    /// Gold edge matching the parser's latest edge.
    latest: Option<usize>,
}

impl<'g> OracleState<'g> {
    /// Starts from the initial parser state. Fails if the gold graph breaks
    /// an invariant or has nodes no transition sequence can create.
    pub fn new(gold: &'g IGraph) -> Result<Self> {
        gold.check().map_err(|m| Error::Oracle(format!("invalid gold graph: {m}")))?;
        let n = gold.terminals.len();
        for (k, &t) in gold.terminals.iter().enumerate() {
            if t != k + 1 {
                return Err(Error::Oracle("terminals must be nodes 1..=n".into()));
            }
        }
        if gold.root != ROOT {
            return Err(Error::Oracle("root must be node 0".into()));
        }
        let index = GoldIndex::new(gold);
        // A node is reachable if it is created bottom-up or has a reachable parent.
        let mut reachable: Vec<bool> = (0..gold.nodes.len())
            .map(|v| v == ROOT || index.bottom_up[v])
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for v in 0..gold.nodes.len() {
                if !reachable[v] && index.incoming[v].iter().any(|&e| reachable[gold.edges[e].source]) {
                    reachable[v] = true;
                    changed = true;
                }
            }
        }
        if let Some(v) = (0..gold.nodes.len()).find(|&v| !reachable[v]) {
            return Err(Error::Oracle(format!(
                "node {v} is neither anchored below nor reachable from the root"
            )));
        }
        let mut to_parser = vec![None; gold.nodes.len()];
        for v in 0..=n {
            to_parser[v] = Some(v);
        }
        Ok(OracleState {
            parser: ParserState::new(n),
            gold,
            index: std::rc::Rc::new(index),
            to_gold: (0..=n).collect(),
            to_parser,
            done: vec![false; gold.edges.len()],
            latest: None,
        })
    }

    pub fn gold_of(&self, r: NodeRef) -> usize {
        self.to_gold[r]
    }

    /// Gold edges not built yet.
    pub fn pending_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.done.iter().enumerate().filter(|(_, d)| !**d).map(|(i, _)| i)
    }

    pub fn is_complete(&self) -> bool {
        self.done.iter().all(|d| *d) && self.parser.is_terminal()
    }

    fn pending_label(&self, r: NodeRef) -> Option<&str> {
        let node = self.parser.node(r);
        if node.kind != NodeKind::Inner || node.label.is_some() {
            return None;
        }
        self.gold.nodes[self.to_gold[r]].label.as_deref()
    }

    fn pending_property(&self, r: NodeRef) -> Option<(&str, &str)> {
        let node = self.parser.node(r);
        if node.kind != NodeKind::Inner {
            return None;
        }
        self.gold.nodes[self.to_gold[r]]
            .properties
            .iter()
            .find(|(k, v)| node.properties.get(*k) != Some(*v))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    fn pending_attribute(&self) -> Option<(&str, &str)> {
        let gold_edge = &self.gold.edges[self.latest?];
        let edge = self.parser.latest_edge()?;
        gold_edge
            .attributes
            .iter()
            .find(|(k, v)| edge.attributes.get(*k) != Some(*v))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// The first pending gold edge from `source` to `target` (parser refs).
    fn pending_between(&self, source: NodeRef, target: NodeRef) -> Option<usize> {
        let (gs, gt) = (self.to_gold[source], self.to_gold[target]);
        self.index.outgoing[gs]
            .iter()
            .copied()
            .find(|&e| !self.done[e] && self.gold.edges[e].target == gt)
    }

    fn has_pending_work(&self, r: NodeRef) -> bool {
        let g = self.to_gold[r];
        self.pending_label(r).is_some()
            || self.pending_property(r).is_some()
            || self.index.outgoing[g].iter().any(|&e| !self.done[e])
            || self.index.incoming[g].iter().any(|&e| !self.done[e])
    }

    /// Whether `r` has a pending edge to a created node sitting below the
    /// second stack item.
    fn partner_deeper(&self, r: NodeRef) -> bool {
        let stack = self.parser.stack();
        if stack.len() < 3 {
            return false;
        }
        stack[..stack.len() - 2]
            .iter()
            .any(|&d| self.pending_between(r, d).is_some() || self.pending_between(d, r).is_some())
    }

    /// Whether gold node `node`, once created through `edge`, has no pending
    /// edge to a built node waiting in the buffer.
    fn creation_safe(&self, node: usize, edge: usize) -> bool {
        let buffer = self.parser.buffer();
        self.index.outgoing[node]
            .iter()
            .map(|&e| (e, self.gold.edges[e].target))
            .chain(self.index.incoming[node].iter().map(|&e| (e, self.gold.edges[e].source)))
            .filter(|&(e, _)| e != edge && !self.done[e])
            .all(|(_, other)| self.to_parser[other].is_none_or(|r| !buffer.contains(&r)))
    }

    /// Node creations available from the stack top, as (transition, gold node, gold edge).
    fn creations(&self) -> Vec<(Transition, usize, usize)> {
        let mut out = Vec::new();
        let Some(x) = self.parser.stack_top() else {
            return out;
        };
        let g = self.to_gold[x];
        if x != ROOT {
            for &e in &self.index.incoming[g] {
                let p = self.gold.edges[e].source;
                if !self.done[e] && self.to_parser[p].is_none() && self.index.bottom_up[p] {
                    out.push((Transition::node(self.gold.edges[e].label.clone()), p, e));
                }
            }
        }
        if !self.parser.is_token(x) {
            for &e in &self.index.outgoing[g] {
                let c = self.gold.edges[e].target;
                if !self.done[e] && self.to_parser[c].is_none() && !self.index.bottom_up[c] {
                    out.push((Transition::child(self.gold.edges[e].label.clone()), c, e));
                }
            }
        }
        out
    }

    /// Gold-consistent transitions in priority order. A single element means
    /// the transition is forced.
    fn candidates(&self, order: Order) -> Vec<Transition> {
        if self.parser.is_terminal() {
            return Vec::new();
        }
        if let Some((k, v)) = self.pending_attribute() {
            return vec![Transition::attribute(k, v)];
        }
        let s0 = self.parser.stack_top();
        if let Some(x) = s0 {
            if let Some(label) = self.pending_label(x) {
                return vec![Transition::label(label)];
            }
            if let Some((k, v)) = self.pending_property(x) {
                return vec![Transition::property(k, v)];
            }
        }
        if let (Some(x), Some(y)) = (self.parser.stack_at(0), self.parser.stack_at(1)) {
            if let Some(e) = self.pending_between(x, y) {
                let t = Transition::left_edge(self.gold.edges[e].label.clone());
                if self.parser.is_legal(&t) {
                    return vec![t];
                }
            }
            if let Some(e) = self.pending_between(y, x) {
                let t = Transition::right_edge(self.gold.edges[e].label.clone());
                if self.parser.is_legal(&t) {
                    return vec![t];
                }
            }
        }
        // Creations whose new node has no built partner in the buffer can go
        // first: sweeping down the stack, the node meets all its partners.
        let mut safe: Vec<Transition> = Vec::new();
        let mut creations: Vec<Transition> = Vec::new();
        let mut seen: Vec<Transition> = Vec::new();
        for (t, node, edge) in self.creations() {
            if seen.contains(&t) {
                continue;
            }
            seen.push(t.clone());
            let early = match order {
                Order::Sweep => self.creation_safe(node, edge),
                Order::Drain => self.parser.buffer().is_empty(),
                Order::Eager => true,
            };
            if early {
                safe.push(t);
            } else {
                creations.push(t);
            }
        }
        if let Some(x) = s0 {
            if x != ROOT && !self.has_pending_work(x) {
                return vec![Transition::reduce()];
            }
        }
        // New nodes are best made with an empty buffer, so that they meet
        // every existing node while sweeping down the stack.
        let mut out: Vec<Transition> = Vec::new();
        let buffer_empty = self.parser.buffer().is_empty();
        let swap = Transition::swap();
        let swap_legal = self.parser.is_legal(&swap);
        let swap_first = swap_legal && self.partner_deeper(s0.unwrap());
        // Nodes made later would sink below s0 and cut it off from the root.
        let to_root = swap_first && self.pending_between(ROOT, s0.unwrap()).is_some();
        if to_root {
            out.push(swap.clone());
        }
        out.append(&mut safe);
        if swap_first && !to_root {
            out.push(swap.clone());
        }
        if !buffer_empty {
            out.push(Transition::shift());
        }
        out.append(&mut creations);
        if swap_legal && !swap_first {
            let (x, y) = (self.parser.stack_at(1).unwrap(), self.parser.stack_at(0).unwrap());
            if self.has_pending_work(x) || self.has_pending_work(y) {
                out.push(swap);
            }
        }
        if self.done.iter().all(|d| *d) && self.parser.is_legal(&Transition::finish()) {
            out.push(Transition::finish());
        }
        out
    }

    /// Applies a transition, tracking which gold nodes and edges it builds.
    /// The transition must come from the candidate list.
    fn advance(&mut self, t: &Transition) -> Result<()> {
        use TransitionKind::*;
        let s0 = self.parser.stack_at(0);
        let s1 = self.parser.stack_at(1);
        let built = match t.kind {
            Node | Child => {
                let (_, node, edge) = self
                    .creations()
                    .into_iter()
                    .find(|(c, _, _)| c == t)
                    .ok_or_else(|| Error::Oracle(format!("{t} creates no gold node")))?;
                self.to_parser[node] = Some(self.parser.nodes().len());
                self.to_gold.push(node);
                Some(edge)
            }
            LeftEdge => self.pending_between(s0.unwrap(), s1.unwrap()),
            RightEdge => self.pending_between(s1.unwrap(), s0.unwrap()),
            _ => None,
        };
        if let Some(e) = built {
            if self.gold.edges[e].label != t.payload() {
                return Err(Error::Oracle(format!("{t} does not match a gold edge")));
            }
            self.done[e] = true;
            self.latest = Some(e);
        }
        self.parser.apply_mut(t)
    }

    fn key(&self) -> Vec<usize> {
        let mut key = Vec::with_capacity(64);
        key.extend(self.parser.stack());
        key.push(usize::MAX);
        key.extend(self.parser.buffer());
        key.push(usize::MAX);
        key.extend(&self.to_gold);
        key.push(usize::MAX);
        for (i, node) in self.parser.nodes().iter().enumerate() {
            if node.kind == NodeKind::Inner {
                key.push(i * 2 + node.label.is_some() as usize);
                key.push(node.properties.len());
            }
        }
        key.push(usize::MAX);
        key.extend(self.done.iter().map(|&d| d as usize));
        key.push(self.latest.map_or(usize::MAX, |e| e));
        key.push(self.parser.latest_edge().map_or(0, |e| e.attributes.len()));
        key.push(self.parser.is_terminal() as usize);
        key
    }

    fn blocking_edge(&self) -> String {
        match self.pending_edges().next() {
            Some(e) => {
                let edge = &self.gold.edges[e];
                format!("pending edge {} -> {} ({})", edge.source, edge.target, edge.label)
            }
            None => "no pending edge".into(),
        }
    }
}

/// Candidate orderings tried in turn by the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Order {
    /// Create nodes early when no built partner waits in the buffer.
    Sweep,
    /// Create nodes early only on an empty buffer.
    Drain,
    /// Create nodes as soon as their creator tops the stack.
    Eager,
}

struct Search {
    order: Order,
    failed: HashSet<Vec<usize>>,
    expanded: usize,
    budget: usize,
}

impl Search {
    /// Completes `state` to the gold graph, appending transitions to `path`.
    fn complete(&mut self, state: OracleState<'_>, path: &mut Vec<Transition>) -> Option<bool> {
        if state.is_complete() {
            return Some(true);
        }
        let key = state.key();
        if self.failed.contains(&key) {
            return Some(false);
        }
        self.expanded += 1;
        if self.expanded > self.budget {
            return None;
        }
        for t in state.candidates(self.order) {
            let mut next = state.clone();
            if next.advance(&t).is_err() {
                continue;
            }
            path.push(t);
            match self.complete(next, path) {
                Some(true) => return Some(true),
                Some(false) => {
                    path.pop();
                }
                None => return None,
            }
        }
        self.failed.insert(key);
        Some(false)
    }
}

fn search_from(state: &OracleState<'_>, budget: usize) -> Result<Option<Vec<Transition>>> {
    // Each ordering suits different graphs, so all of them run with a small
    // budget first. Failed states stay failed across rounds.
    let orders = [Order::Sweep, Order::Drain, Order::Eager];
    let mut searches: Vec<Search> = orders
        .iter()
        .map(|&order| Search { order, failed: HashSet::new(), expanded: 0, budget: 0 })
        .collect();
    let mut round = 2_000;
    loop {
        let last = round >= budget / orders.len();
        for search in &mut searches {
            search.expanded = 0;
            search.budget = round.min(budget / orders.len());
            let mut path = Vec::new();
            match search.complete(state.clone(), &mut path) {
                Some(true) => return Ok(Some(path)),
                // Every ordering explores all gold-consistent transitions, so
                // a finished search is a proof of unreachability.
                Some(false) => return Ok(None),
                None => {}
            }
        }
        if last {
            break;
        }
        round *= 8;
    }
    Err(Error::Oracle(format!(
        "oracle stuck: search budget of {budget} states exhausted, {}",
        state.blocking_edge()
    )))
}

/// The gold-consistent transitions from which the gold graph stays
/// reachable, in priority order.
pub fn next_gold(ostate: &OracleState<'_>) -> Result<Vec<Transition>> {
    if ostate.parser.is_terminal() {
        return Err(Error::Oracle("parser state is terminal".into()));
    }
    let mut out = Vec::new();
    for t in ostate.candidates(Order::Sweep) {
        let mut next = ostate.clone();
        if next.advance(&t).is_err() {
            continue;
        }
        if search_from(&next, SEARCH_BUDGET)?.is_some() {
            out.push(t);
        }
    }
    if out.is_empty() {
        return Err(Error::Oracle(format!("oracle stuck: {}", ostate.blocking_edge())));
    }
    Ok(out)
}

/// Applies `t` to an oracle state.
pub fn advance(ostate: &mut OracleState<'_>, t: &Transition) -> Result<()> {
    ostate.advance(t)
}

/// A transition sequence that rebuilds `gold` from the initial state.
pub fn gold_sequence(gold: &IGraph, rows: &[TokenRow]) -> Result<Vec<Transition>> {
    if rows.len() != gold.terminals.len() {
        return Err(Error::Oracle(format!(
            "{} token rows for {} terminals",
            rows.len(),
            gold.terminals.len()
        )));
    }
    let state = OracleState::new(gold)?;
    search_from(&state, SEARCH_BUDGET)?
        .ok_or_else(|| Error::Oracle(format!("oracle stuck: {}", state.blocking_edge())))
}

/// Applies `seq` from the initial state and returns the built graph.
pub fn replay(rows: &[TokenRow], seq: &[Transition]) -> Result<IGraph> {
    let mut state = ParserState::new(rows.len());
    for (index, t) in seq.iter().enumerate() {
        state.check(t).map_err(|e| Error::Replay {
            index,
            reason: e.0,
        })?;
        state.apply_mut(t)?;
    }
    extract_igraph(&state).map_err(|_| Error::Replay {
        index: seq.len(),
        reason: "sequence ends before Finish".into(),
    })
}

/// Whether two graphs are equal up to renaming inner nodes. Used to check
/// replays; the inner nodes are matched by their anchoring and structure,
/// with a backtracking search over equally plausible candidates.
pub fn same_igraph(a: &IGraph, b: &IGraph) -> bool {
    let inner_a: Vec<usize> = a.inner_nodes().map(|n| n.id).collect();
    let inner_b: Vec<usize> = b.inner_nodes().map(|n| n.id).collect();
    if inner_a.len() != inner_b.len()
        || a.terminals.len() != b.terminals.len()
        || a.edges.len() != b.edges.len()
    {
        return false;
    }
    let signature = |g: &IGraph, v: usize| {
        let node = &g.nodes[v];
        let mut props: Vec<String> = node.properties.iter().map(|(k, v)| format!("{k}={v}")).collect();
        props.sort();
        let mut out: Vec<String> = g
            .edges
            .iter()
            .filter(|e| e.source == v || e.target == v)
            .map(|e| {
                let end = |x: usize| match g.nodes[x].kind {
                    NodeKind::Inner => "*".to_string(),
                    _ => x.to_string(),
                };
                format!("{}>{}:{}", if e.source == v { "@".into() } else { end(e.source) }, if e.target == v { "@".into() } else { end(e.target) }, e.label)
            })
            .collect();
        out.sort();
        (node.label.clone(), props, out)
    };
    let sig_b: Vec<_> = inner_b.iter().map(|&v| signature(b, v)).collect();
    let edge_set = |g: &IGraph, map: &dyn Fn(usize) -> usize| {
        let mut edges: Vec<(usize, usize, String, Vec<(String, String)>)> = g
            .edges
            .iter()
            .map(|e| {
                let mut attrs: Vec<(String, String)> =
                    e.attributes.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                attrs.sort();
                (map(e.source), map(e.target), e.label.clone(), attrs)
            })
            .collect();
        edges.sort();
        edges
    };
    let target = edge_set(b, &|v| v);
    let mut assign: Vec<Option<usize>> = vec![None; a.nodes.len()];
    let mut used = vec![false; inner_b.len()];

    fn go(
        i: usize,
        inner_a: &[usize],
        candidates: &[Vec<usize>],
        inner_b: &[usize],
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        check: &dyn Fn(&[Option<usize>]) -> bool,
    ) -> bool {
        if i == inner_a.len() {
            return check(assign);
        }
        for &j in &candidates[i] {
            if used[j] {
                continue;
            }
            used[j] = true;
            assign[inner_a[i]] = Some(inner_b[j]);
            if go(i + 1, inner_a, candidates, inner_b, assign, used, check) {
                return true;
            }
            used[j] = false;
            assign[inner_a[i]] = None;
        }
        false
    }

    let candidates: Vec<Vec<usize>> = inner_a
        .iter()
        .map(|&v| {
            let sig = signature(a, v);
            (0..inner_b.len()).filter(|&j| sig_b[j] == sig).collect()
        })
        .collect();
    let check = |assign: &[Option<usize>]| {
        let map = |v: usize| match a.nodes[v].kind {
            NodeKind::Inner => assign[v].expect("assigned"),
            _ => v,
        };
        edge_set(a, &map) == target
    };
    go(0, &inner_a, &candidates, &inner_b, &mut assign, &mut used, &check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irep::{IEdge, INode};
    use crate::graph::Anchor;
    use indexmap::IndexMap;

    fn rows(n: usize) -> Vec<TokenRow> {
        (0..n)
            .map(|i| TokenRow::new(i + 1, "w", "w", "X", "X", Anchor::new(2 * i, 2 * i + 1)))
            .collect()
    }

    fn igraph(n: usize, inner: &[Option<&str>], edges: &[(usize, usize, &str)]) -> IGraph {
        let mut nodes = vec![INode {
            id: 0,
            kind: NodeKind::Root,
            label: None,
            properties: IndexMap::new(),
        }];
        for k in 0..n {
            nodes.push(INode {
                id: k + 1,
                kind: NodeKind::Terminal(k),
                label: None,
                properties: IndexMap::new(),
            });
        }
        for l in inner {
            nodes.push(INode {
                id: nodes.len(),
                kind: NodeKind::Inner,
                label: l.map(str::to_owned),
                properties: IndexMap::new(),
            });
        }
        IGraph {
            nodes,
            edges: edges
                .iter()
                .map(|&(s, t, l)| IEdge {
                    source: s,
                    target: t,
                    label: l.into(),
                    attributes: IndexMap::new(),
                })
                .collect(),
            root: 0,
            terminals: (1..=n).collect(),
            ..IGraph::default()
        }
    }

    #[test]
    fn root_only_is_finish() {
        let g = igraph(0, &[], &[]);
        assert_eq!(gold_sequence(&g, &[]).unwrap(), vec![Transition::finish()]);
        assert_eq!(replay(&[], &[Transition::finish()]).unwrap().nodes.len(), 1);
    }

    #[test]
    fn single_anchored_top() {
        let g = igraph(1, &[Some("x")], &[(0, 2, "TOP"), (2, 1, "ANCHOR")]);
        let seq = gold_sequence(&g, &rows(1)).unwrap();
        assert_eq!(seq[0], Transition::shift());
        assert!(seq.contains(&Transition::node("ANCHOR")));
        assert!(seq.contains(&Transition::label("x")));
        assert_eq!(seq.last(), Some(&Transition::finish()));
        assert!(same_igraph(&replay(&rows(1), &seq).unwrap(), &g));
    }

    #[test]
    fn crossing_edges_need_swap() {
        // Nodes a (3) and b (4) anchored to tokens 2 and 1, edge a -> b plus
        // an unanchored child of the root linking to token-2's node.
        let g = igraph(
            2,
            &[Some("a"), Some("b"), Some("c")],
            &[(3, 2, "ANCHOR"), (4, 1, "ANCHOR"), (0, 5, "TOP"), (5, 4, "R"), (5, 3, "S"), (3, 4, "E")],
        );
        let seq = gold_sequence(&g, &rows(2)).unwrap();
        assert!(same_igraph(&replay(&rows(2), &seq).unwrap(), &g));
    }

    #[test]
    fn label_is_proposed_first() {
        let g = igraph(1, &[Some("x")], &[(0, 2, "TOP"), (2, 1, "ANCHOR")]);
        let mut o = OracleState::new(&g).unwrap();
        for t in [Transition::shift(), Transition::node("ANCHOR"), Transition::shift()] {
            o.advance(&t).unwrap();
        }
        assert_eq!(next_gold(&o).unwrap(), vec![Transition::label("x")]);
    }

    #[test]
    fn finish_when_done() {
        let g = igraph(0, &[], &[]);
        let o = OracleState::new(&g).unwrap();
        assert_eq!(next_gold(&o).unwrap(), vec![Transition::finish()]);
    }

    #[test]
    fn unreachable_node_is_an_error() {
        let g = igraph(0, &[Some("a"), Some("b")], &[(1, 2, "R")]);
        assert!(matches!(gold_sequence(&g, &[]), Err(Error::Oracle(_))));
    }

    #[test]
    fn replay_reports_index() {
        match replay(&rows(1), &[Transition::shift(), Transition::shift()]) {
            Err(Error::Replay { index, reason }) => {
                assert_eq!(index, 1);
                assert_eq!(reason, "empty buffer");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(replay(&rows(1), &[]), Err(Error::Replay { index: 0, .. })));
    }
}

