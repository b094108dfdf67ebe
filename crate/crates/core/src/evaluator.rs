//! MRP F-score.
//!
//! Graphs are decomposed into tuples (tops, labels, properties, anchors,
//! edges, edge attributes). The score of a system graph against a gold graph
//! is the tuple overlap under the node correspondence that maximizes it,
//! found by hill-climbing from several starting points.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

pub const CLASSES: [&str; 6] = ["tops", "labels", "properties", "anchors", "edges", "attributes"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreParams {
    pub restarts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            restarts: 10,
            iterations: 5000,
            seed: 0,
        }
    }
}

/// Tuples of one graph, with nodes renamed through a correspondence.
/// Node names are strings so renamed and unmatched nodes can coexist.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TupleBag {
    pub tops: BTreeSet<String>,
    pub labels: BTreeSet<(String, String)>,
    pub properties: BTreeSet<(String, String, String)>,
    pub anchors: BTreeSet<(String, Vec<usize>)>,
    pub edges: BTreeMap<(String, String, String), usize>,
    pub attributes: BTreeMap<(String, String, String, String, String), usize>,
}

impl TupleBag {
    pub fn counts(&self) -> [usize; 6] {
        [
            self.tops.len(),
            self.labels.len(),
            self.properties.len(),
            self.anchors.len(),
            self.edges.values().sum(),
            self.attributes.values().sum(),
        ]
    }
}

/// Non-whitespace character positions covered by a node's anchors.
pub fn anchor_positions(graph: &Graph, node: &crate::graph::Node) -> Vec<usize> {
    let chars: Vec<char> = graph.input.chars().collect();
    let mut out = BTreeSet::new();
    for a in &node.anchors {
        for p in a.from..a.to.min(chars.len()) {
            if !chars[p].is_whitespace() {
                out.insert(p);
            }
        }
    }
    out.into_iter().collect()
}

/// Decomposes `graph` into tuples. Nodes found in `rename` take the given
/// name; the others are named `#id`.
pub fn tuples(graph: &Graph, rename: &HashMap<NodeId, String>) -> TupleBag {
    let name = |id: NodeId| rename.get(&id).cloned().unwrap_or_else(|| format!("#{id}"));
    let mut bag = TupleBag::default();
    for &t in &graph.tops {
        bag.tops.insert(name(t));
    }
    for node in &graph.nodes {
        if let Some(l) = &node.label {
            bag.labels.insert((name(node.id), l.clone()));
        }
        for (k, v) in &node.properties {
            bag.properties.insert((name(node.id), k.clone(), v.clone()));
        }
        let positions = anchor_positions(graph, node);
        if !positions.is_empty() {
            bag.anchors.insert((name(node.id), positions));
        }
    }
    for e in &graph.edges {
        let label = e.label.clone().unwrap_or_default();
        *bag.edges.entry((name(e.source), name(e.target), label.clone())).or_default() += 1;
        for (k, v) in &e.attributes {
            *bag
                .attributes
                .entry((name(e.source), name(e.target), label.clone(), k.clone(), v.clone()))
                .or_default() += 1;
        }
    }
    bag
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub gold: usize,
    pub system: usize,
    pub matched: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassScore {
    pub fn new(gold: usize, system: usize, matched: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(matched, system);
        let recall = ratio(matched, gold);
        let f1 = ratio(2 * matched, gold + system);
        ClassScore {
            gold,
            system,
            matched,
            precision,
            recall,
            f1,
        }
    }

    fn add(&self, other: &ClassScore) -> ClassScore {
        ClassScore::new(
            self.gold + other.gold,
            self.system + other.system,
            self.matched + other.matched,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub classes: BTreeMap<String, ClassScore>,
    pub overall: ClassScore,
    /// System node id to gold node id. Empty for corpus reports.
    pub correspondence: Vec<(NodeId, NodeId)>,
    pub params: ScoreParams,
    pub graphs: usize,
}

impl ScoreReport {
    fn from_counts(gold: [usize; 6], system: [usize; 6], matched: [usize; 6], params: ScoreParams) -> Self {
        let classes: BTreeMap<String, ClassScore> = CLASSES
            .iter()
            .enumerate()
            .map(|(i, c)| (c.to_string(), ClassScore::new(gold[i], system[i], matched[i])))
            .collect();
        let overall = ClassScore::new(gold.iter().sum(), system.iter().sum(), matched.iter().sum());
        ScoreReport {
            classes,
            overall,
            correspondence: Vec::new(),
            params,
            graphs: 1,
        }
    }

    /// Unweighted mean of the per-class F over classes with any tuples.
    pub fn macro_f1(&self) -> f64 {
        let used: Vec<f64> = self
            .classes
            .values()
            .filter(|c| c.gold + c.system > 0)
            .map(|c| c.f1)
            .collect();
        if used.is_empty() {
            0.0
        } else {
            used.iter().sum::<f64>() / used.len() as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12}{:>8}{:>8}{:>8}{:>8}{:>8}{:>8}", "class", "gold", "system", "match", "P", "R", "F");
        let row = |out: &mut String, name: &str, c: &ClassScore| {
            let _ = writeln!(
                out,
                "{:<12}{:>8}{:>8}{:>8}{:>8.4}{:>8.4}{:>8.4}",
                name, c.gold, c.system, c.matched, c.precision, c.recall, c.f1
            );
        };
        for name in CLASSES {
            row(&mut out, name, &self.classes[name]);
        }
        row(&mut out, "all", &self.overall);
        out
    }

    fn merge(&mut self, other: &ScoreReport) {
        for (name, c) in &other.classes {
            let entry = self.classes.entry(name.clone()).or_default();
            *entry = entry.add(c);
        }
        self.overall = self.overall.add(&other.overall);
        self.graphs += other.graphs;
    }
}

/// Per-graph facts the search needs, indexed by node position.
struct Side {
    ids: Vec<NodeId>,
    top: Vec<bool>,
    labels: Vec<Option<String>>,
    properties: Vec<BTreeSet<(String, String)>>,
    anchors: Vec<Vec<usize>>,
    /// (source, target, label, attributes)
    edges: Vec<(usize, usize, String, Vec<(String, String)>)>,
    counts: [usize; 6],
}

impl Side {
    fn new(graph: &Graph) -> Self {
        let pos: HashMap<NodeId, usize> = graph.nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
        let tops: BTreeSet<NodeId> = graph.tops.iter().copied().collect();
        let mut edges: Vec<_> = graph
            .edges
            .iter()
            .map(|e| {
                let mut attrs: Vec<(String, String)> =
                    e.attributes.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
                attrs.sort();
                (pos[&e.source], pos[&e.target], e.label.clone().unwrap_or_default(), attrs)
            })
            .collect();
        edges.sort();
        Side {
            ids: graph.nodes.iter().map(|n| n.id).collect(),
            top: graph.nodes.iter().map(|n| tops.contains(&n.id)).collect(),
            labels: graph.nodes.iter().map(|n| n.label.clone()).collect(),
            properties: graph
                .nodes
                .iter()
                .map(|n| n.properties.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
                .collect(),
            anchors: graph.nodes.iter().map(|n| anchor_positions(graph, n)).collect(),
            edges,
            counts: tuples(graph, &HashMap::new()).counts(),
        }
    }
}

/// Node-local matches of system node `s` mapped onto gold node `g`.
fn node_matches(gold: &Side, system: &Side, s: usize, g: usize) -> [usize; 4] {
    [
        (system.top[s] && gold.top[g]) as usize,
        (system.labels[s].is_some() && system.labels[s] == gold.labels[g]) as usize,
        system.properties[s].intersection(&gold.properties[g]).count(),
        (!system.anchors[s].is_empty() && system.anchors[s] == gold.anchors[g]) as usize,
    ]
}

struct Scorer<'a> {
    gold: &'a Side,
    system: &'a Side,
    /// Node-local match totals, `local[s][g]`.
    local: Vec<Vec<usize>>,
    /// Gold edges grouped by endpoints.
    gold_edges: HashMap<(usize, usize), Vec<(String, Vec<(String, String)>)>>,
}

impl<'a> Scorer<'a> {
    fn new(gold: &'a Side, system: &'a Side) -> Self {
        let local = (0..system.ids.len())
            .map(|s| {
                (0..gold.ids.len())
                    .map(|g| node_matches(gold, system, s, g).iter().sum())
                    .collect()
            })
            .collect();
        let mut gold_edges: HashMap<(usize, usize), Vec<_>> = HashMap::new();
        for (s, t, l, a) in &gold.edges {
            gold_edges.entry((*s, *t)).or_default().push((l.clone(), a.clone()));
        }
        Scorer {
            gold,
            system,
            local,
            gold_edges,
        }
    }

    /// Edge and attribute matches under `assign`.
    fn edge_matches(&self, assign: &[Option<usize>]) -> [usize; 2] {
        let mut groups: HashMap<(usize, usize), Vec<(&str, &[(String, String)])>> = HashMap::new();
        for (s, t, l, a) in &self.system.edges {
            if let (Some(gs), Some(gt)) = (assign[*s], assign[*t]) {
                groups.entry((gs, gt)).or_default().push((l.as_str(), a.as_slice()));
            }
        }
        let mut edges = 0;
        let mut attrs = 0;
        for (key, sys) in groups {
            let Some(gold) = self.gold_edges.get(&key) else {
                continue;
            };
            // Multiset intersections of labels and of (label, name, value).
            let mut labels: HashMap<&str, usize> = HashMap::new();
            let mut pairs: HashMap<(&str, &str, &str), usize> = HashMap::new();
            for (l, a) in gold {
                *labels.entry(l.as_str()).or_default() += 1;
                for (k, v) in a {
                    *pairs.entry((l.as_str(), k.as_str(), v.as_str())).or_default() += 1;
                }
            }
            for (l, a) in sys {
                if let Some(c) = labels.get_mut(l).filter(|c| **c > 0) {
                    *c -= 1;
                    edges += 1;
                }
                for (k, v) in a {
                    if let Some(c) = pairs.get_mut(&(l, k.as_str(), v.as_str())).filter(|c| **c > 0) {
                        *c -= 1;
                        attrs += 1;
                    }
                }
            }
        }
        [edges, attrs]
    }

    fn total(&self, assign: &[Option<usize>]) -> usize {
        let local: usize = assign
            .iter()
            .enumerate()
            .filter_map(|(s, g)| g.map(|g| self.local[s][g]))
            .sum();
        let [e, a] = self.edge_matches(assign);
        local + e + a
    }

    fn per_class(&self, assign: &[Option<usize>]) -> [usize; 6] {
        let mut out = [0; 6];
        for (s, g) in assign.iter().enumerate() {
            if let Some(g) = g {
                let m = node_matches(self.gold, self.system, s, *g);
                for i in 0..4 {
                    out[i] += m[i];
                }
            }
        }
        let [e, a] = self.edge_matches(assign);
        out[4] = e;
        out[5] = a;
        out
    }

    /// No assignment can match more than this.
    fn bound(&self) -> usize {
        (0..6).map(|c| self.gold.counts[c].min(self.system.counts[c])).sum()
    }

    fn identity(&self) -> Vec<Option<usize>> {
        let by_id: HashMap<NodeId, usize> = self.gold.ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        self.system.ids.iter().map(|id| by_id.get(id).copied()).collect()
    }

    /// Greedy match by node-local similarity, ties broken by noise.
    fn greedy(&self, rng: &mut ChaCha8Rng) -> Vec<Option<usize>> {
        let mut pairs: Vec<(usize, f64, usize, usize)> = Vec::new();
        for s in 0..self.system.ids.len() {
            for g in 0..self.gold.ids.len() {
                pairs.push((self.local[s][g], rng.gen::<f64>(), s, g));
            }
        }
        pairs.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.total_cmp(&a.1)));
        let mut assign = vec![None; self.system.ids.len()];
        let mut taken = vec![false; self.gold.ids.len()];
        for (_, _, s, g) in pairs {
            if assign[s].is_none() && !taken[g] {
                assign[s] = Some(g);
                taken[g] = true;
            }
        }
        assign
    }

    /// Candidate moves: swap the targets of two system nodes, or move one
    /// system node to a free gold node.
    fn moves(&self, assign: &[Option<usize>]) -> Vec<(usize, Option<usize>)> {
        let n = self.system.ids.len();
        let mut taken = vec![false; self.gold.ids.len()];
        for g in assign.iter().flatten() {
            taken[*g] = true;
        }
        let mut out = Vec::new();
        for s in 0..n {
            for s2 in s + 1..n {
                if assign[s] != assign[s2] {
                    out.push((s, Some(s2)));
                }
            }
        }
        for s in 0..n {
            for g in 0..self.gold.ids.len() {
                if !taken[g] {
                    out.push((s, Some(n + g)));
                }
            }
        }
        out
    }

    fn apply(&self, assign: &mut [Option<usize>], (s, other): (usize, Option<usize>)) {
        let n = self.system.ids.len();
        match other {
            Some(s2) if s2 < n => assign.swap(s, s2),
            Some(g) => assign[s] = Some(g - n),
            None => assign[s] = None,
        }
    }

    /// Iterated local search: first-improvement climbing, then a random
    /// double move once stuck, keeping the best assignment seen.
    fn climb(&self, mut assign: Vec<Option<usize>>, iterations: usize, rng: &mut ChaCha8Rng) -> (usize, Vec<Option<usize>>) {
        let bound = self.bound();
        let mut score = self.total(&assign);
        let mut best = (score, assign.clone());
        let mut used = 0;
        while used < iterations && best.0 < bound {
            let mut moves = self.moves(&assign);
            if moves.is_empty() {
                break;
            }
            moves.shuffle(rng);
            let mut improved = false;
            for m in moves {
                if used >= iterations {
                    break;
                }
                used += 1;
                let mut next = assign.clone();
                self.apply(&mut next, m);
                let s = self.total(&next);
                if s > score {
                    assign = next;
                    score = s;
                    improved = true;
                    break;
                }
            }
            if score > best.0 {
                best = (score, assign.clone());
            }
            if !improved {
                for _ in 0..2 {
                    let moves = self.moves(&assign);
                    if let Some(m) = moves.choose(rng) {
                        self.apply(&mut assign, *m);
                    }
                }
                score = self.total(&assign);
            }
        }
        best
    }
}

fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Scores one system graph against one gold graph.
pub fn score_pair(gold: &Graph, system: &Graph, params: &ScoreParams) -> ScoreReport {
    let gs = Side::new(gold);
    let ss = Side::new(system);
    let scorer = Scorer::new(&gs, &ss);
    let restarts = params.restarts.max(1);
    let run = |r: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(params.seed, r));
        let start = if r == 0 {
            scorer.identity()
        } else {
            scorer.greedy(&mut rng)
        };
        scorer.climb(start, params.iterations, &mut rng)
    };
    let mut results = vec![run(0)];
    if results[0].0 < scorer.bound() {
        results.extend((1..restarts).into_par_iter().map(run).collect::<Vec<_>>());
    }
    let mut best = &results[0];
    for r in &results[1..] {
        if r.0 > best.0 {
            best = r;
        }
    }
    let mut report = ScoreReport::from_counts(gs.counts, ss.counts, scorer.per_class(&best.1), *params);
    report.correspondence = best
        .1
        .iter()
        .enumerate()
        .filter_map(|(s, g)| g.map(|g| (ss.ids[s], gs.ids[g])))
        .collect();
    report
}

/// Micro-averaged score over a corpus, pairing graphs by id. Gold graphs
/// without a system graph are scored against an empty graph.
pub fn score_corpus(golds: &[Graph], systems: &[Graph], params: &ScoreParams) -> Result<ScoreReport> {
    let mut by_id: HashMap<&str, &Graph> = HashMap::new();
    for s in systems {
        if by_id.insert(s.id.as_str(), s).is_some() {
            return Err(Error::Evaluation(format!("duplicate system graph id {}", s.id)));
        }
    }
    let mut gold_ids = BTreeSet::new();
    for g in golds {
        if !gold_ids.insert(g.id.as_str()) {
            return Err(Error::Evaluation(format!("duplicate gold graph id {}", g.id)));
        }
    }
    if let Some(s) = systems.iter().find(|s| !gold_ids.contains(s.id.as_str())) {
        return Err(Error::Evaluation(format!("system graph {} has no gold graph", s.id)));
    }
    let reports: Vec<ScoreReport> = golds
        .par_iter()
        .map(|g| match by_id.get(g.id.as_str()) {
            Some(s) => score_pair(g, s, params),
            None => score_pair(g, &Graph::new(g.id.clone(), g.framework.clone(), g.input.clone()), params),
        })
        .collect();
    let mut total = ScoreReport::from_counts([0; 6], [0; 6], [0; 6], *params);
    total.graphs = 0;
    for r in &reports {
        total.merge(r);
    }
    Ok(total)
}
