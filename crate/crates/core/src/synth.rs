//! Synthetic sentences and graphs.
//!
//! Two generators: [`random_sample`] draws random graphs shaped by a
//! framework profile (labels, properties, anchors, tops, multigraph edges,
//! optional cycles) to stress the conversion and the oracle, and
//! [`ucca_sample`] builds UCCA-style graphs by fixed rules from part-of-speech
//! patterns, so that a parser can actually learn them.

use std::hash::Hasher;

use fnv::FnvHasher;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::companion::TokenRow;
use crate::constraints::{profile_for, FrameworkProfile, FRAMEWORKS};
use crate::error::Result;
use crate::graph::{Anchor, Edge, Graph, Node};

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub graph: Graph,
    pub rows: Vec<TokenRow>,
}

const DETS: [&str; 3] = ["the", "a", "this"];
const ADJS: [&str; 4] = ["big", "small", "red", "old"];
const NOUNS: [&str; 7] = ["fox", "sky", "dog", "city", "river", "house", "tree"];
const NAMES: [&str; 4] = ["John", "Mary", "Paris", "York"];
const VERBS: [(&str, &str); 5] = [
    ("gazed", "gaze"),
    ("moved", "move"),
    ("saw", "see"),
    ("ran", "run"),
    ("jumped", "jump"),
];
const ADPS: [&str; 4] = ["at", "to", "over", "in"];

type Word = (String, String, &'static str, &'static str);

fn word(form: &str, lemma: &str, upos: &'static str, xpos: &'static str) -> Word {
    (form.to_owned(), lemma.to_owned(), upos, xpos)
}

fn random_word<R: Rng>(rng: &mut R) -> Word {
    match rng.gen_range(0..8) {
        0 => word(DETS.choose(rng).unwrap(), DETS[0], "DET", "DT"),
        1 => {
            let a = ADJS.choose(rng).unwrap();
            word(a, a, "ADJ", "JJ")
        }
        2 | 3 => {
            let n = NOUNS.choose(rng).unwrap();
            if rng.gen_bool(0.3) {
                word(&format!("{n}s"), n, "NOUN", "NNS")
            } else {
                word(n, n, "NOUN", "NN")
            }
        }
        4 => {
            let n = NAMES.choose(rng).unwrap();
            word(n, n, "PROPN", "NNP")
        }
        5 => {
            let (f, l) = VERBS.choose(rng).unwrap();
            word(f, l, "VERB", "VBD")
        }
        6 => {
            let a = ADPS.choose(rng).unwrap();
            word(a, a, "ADP", "IN")
        }
        _ => word(",", ",", "PUNCT", ","),
    }
}

/// Joins words with single spaces and records each word's span.
pub fn sentence(words: &[Word]) -> (String, Vec<TokenRow>) {
    let mut input = String::new();
    let mut rows = Vec::with_capacity(words.len());
    for (i, (form, lemma, upos, xpos)) in words.iter().enumerate() {
        if i > 0 {
            input.push(' ');
        }
        let from = input.chars().count();
        input.push_str(form);
        let to = input.chars().count();
        rows.push(TokenRow::new(i + 1, form, lemma, upos, xpos, Anchor::new(from, to)));
    }
    (input, rows)
}

fn edge_labels(framework: &str) -> &'static [&'static str] {
    match framework {
        "ucca" => &["A", "P", "D", "C", "E", "H", "L", "U", "R", "S", "F"],
        "ptg" => &["ACT", "PAT", "ADDR", "EFF", "RSTR", "APP", "coref.gram", "CONJ.member"],
        "amr" => &["ARG0", "ARG1", "ARG2", "mod", "name", "time", "location"],
        "drg" => &["Agent", "Theme", "Time", "Patient", "member"],
        "eds" => &["ARG1", "ARG2", "BV", "L-INDEX", "R-INDEX"],
        "dm" => &["ARG1", "ARG2", "compound", "BV", "mwe"],
        _ => &["ACT-arg", "PAT-arg", "RSTR", "APPS.m"],
    }
}

const CONCEPTS: [&str; 6] = ["person", "thing", "and", "have-rel-role-91", "entity", "time"];

fn anchored_label<R: Rng>(framework: &str, lemmas: &str, rng: &mut R) -> String {
    match (framework, rng.gen_range(0..4)) {
        ("eds", _) => format!("_{lemmas}_n_1"),
        ("dm" | "psd", _) => lemmas.to_owned(),
        (_, 0) => format!("{lemmas}-01"),
        (_, 1) => CONCEPTS.choose(rng).unwrap().to_string(),
        _ => lemmas.to_owned(),
    }
}

/// A random graph over a random sentence, shaped by `framework`'s profile.
///
/// Every node is reachable from the first top through tree edges, and extra
/// edges go forward in node order, so the graph is acyclic unless `cyclic`
/// asks for one back edge. That edge always closes its cycle from the
/// highest node on it, which makes it the one removed when cycles are
/// broken, so no node is cut off by the removal.
pub fn random_sample<R: Rng>(framework: &str, id: &str, cyclic: bool, rng: &mut R) -> Result<Sample> {
    let profile = profile_for(framework)?;
    let fw = profile.framework.as_str();
    let n = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..=7) };
    let words: Vec<Word> = (0..n).map(|_| random_word(rng)).collect();
    let (input, rows) = sentence(&words);
    let token_nodes = matches!(fw, "dm" | "psd");
    let m = if token_nodes {
        n.max(1)
    } else {
        rng.gen_range(1..=n + 3)
    };
    let labels = edge_labels(fw);
    let mut graph = Graph::new(id, fw, input);
    let mut parent = vec![0usize; m];
    for i in 0..m {
        graph.nodes.push(Node::new(i as u32));
        if i > 0 {
            parent[i] = rng.gen_range(0..i);
            graph
                .edges
                .push(Edge::new(parent[i] as u32, i as u32, Some(labels.choose(rng).unwrap())));
        }
    }

    // Anchors: a contiguous span per anchored node.
    let anchor_p = match fw {
        "amr" | "drg" => 0.4,
        _ => 0.7,
    };
    let mut spans: Vec<Option<(usize, usize)>> = vec![None; m];
    for i in 0..m {
        if n == 0 {
            break;
        }
        if token_nodes {
            if i < n {
                spans[i] = Some((i, i + 1));
            }
        } else if rng.gen_bool(anchor_p) {
            let len = rng.gen_range(1..=n.min(3));
            let start = rng.gen_range(0..=n - len);
            spans[i] = Some((start, start + len));
        }
    }
    for (i, span) in spans.iter().enumerate() {
        if let Some((a, b)) = span {
            graph.nodes[i].anchors.push(Anchor::new(rows[*a].anchor.from, rows[b - 1].anchor.to));
        }
    }

    for i in 0..m {
        let lemmas = spans[i].map(|(a, b)| {
            rows[a..b].iter().map(|r| r.lemma.as_str()).collect::<Vec<_>>().join(" ")
        });
        let node = &mut graph.nodes[i];
        if fw == "amr" && spans[i].is_some() && rng.gen_bool(0.3) {
            let (a, b) = spans[i].unwrap();
            node.label = Some("name".into());
            for (k, r) in rows[a..b].iter().enumerate() {
                node.properties.insert(format!("op{}", k + 1), r.form.clone());
            }
            continue;
        }
        if profile.allows_node_labels && (profile.required_node_labels || rng.gen_bool(0.5)) {
            node.label = Some(match &lemmas {
                Some(l) => anchored_label(fw, l, rng),
                None => CONCEPTS.choose(rng).unwrap().to_string(),
            });
        }
        if profile.allows_node_properties && rng.gen_bool(0.4) {
            let choices: [(&str, String); 3] = [
                ("pos", ["n", "v", "a"].choose(rng).unwrap().to_string()),
                ("frame", format!("f{}", rng.gen_range(1..4))),
                ("carg", lemmas.clone().unwrap_or_else(|| "x".into())),
            ];
            for _ in 0..rng.gen_range(1..=2) {
                let (k, v) = choices.choose(rng).unwrap();
                node.properties.insert(k.to_string(), v.clone());
            }
        }
    }

    // Extra forward edges make reentrancies; multigraphs may repeat pairs.
    for _ in 0..rng.gen_range(0..=m) {
        if m < 2 {
            break;
        }
        let s = rng.gen_range(0..m - 1);
        let t = rng.gen_range(s + 1..m);
        let label = labels.choose(rng).unwrap();
        let exists = graph
            .edges
            .iter()
            .any(|e| e.source == s as u32 && e.target == t as u32 && e.label.as_deref() == Some(label));
        if exists && !profile.allows_multigraph {
            continue;
        }
        let mut edge = Edge::new(s as u32, t as u32, Some(label));
        if profile.allows_edge_attributes && rng.gen_bool(0.4) {
            let (k, v) = if fw == "ucca" { ("remote", "true") } else { ("member", "true") };
            edge = edge.with_attribute(k, v);
        }
        graph.edges.push(edge);
    }
    if cyclic {
        plant_cycle(&mut graph, &parent, labels, rng);
    }

    graph.tops.push(0);
    if profile.max_tops.is_none() && m > 1 && rng.gen_bool(0.2) {
        graph.tops.push(rng.gen_range(1..m) as u32);
    }
    Ok(Sample { graph, rows })
}

/// Adds an edge from a node back to one of its tree ancestors. Needs at
/// least two nodes; a single node gets a self-loop.
fn plant_cycle<R: Rng>(graph: &mut Graph, parent: &[usize], labels: &[&str], rng: &mut R) {
    let m = parent.len();
    let label = *labels.choose(rng).unwrap();
    if m == 1 {
        graph.edges.push(Edge::new(0, 0, Some(label)));
        return;
    }
    let j = rng.gen_range(1..m);
    let mut ancestors = vec![parent[j]];
    while *ancestors.last().unwrap() != 0 {
        let a = *ancestors.last().unwrap();
        ancestors.push(parent[a]);
    }
    let a = *ancestors.choose(rng).unwrap();
    graph.edges.push(Edge::new(j as u32, a as u32, Some(label)));
}

/// `count` random graphs, of which exactly `round(count * fraction)` are
/// cyclic, in shuffled order.
pub fn planted_corpus<R: Rng>(framework: &str, count: usize, fraction: f64, rng: &mut R) -> Result<Vec<Sample>> {
    let cyclic = (count as f64 * fraction).round() as usize;
    let mut flags: Vec<bool> = (0..count).map(|i| i < cyclic).collect();
    flags.shuffle(rng);
    flags
        .into_iter()
        .enumerate()
        .map(|(i, c)| random_sample(framework, &format!("{framework}-{i:04}"), c, rng))
        .collect()
}

/// The grammar behind [`ucca_sample`], as a part-of-speech pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Chunk {
    /// Optional determiner, optional adjective, noun or proper name.
    Np,
    /// Preposition plus noun phrase.
    Pp,
    Verb,
    Conj,
    Punct,
}

fn clause<R: Rng>(rng: &mut R) -> Vec<Chunk> {
    let mut out = vec![Chunk::Np, Chunk::Verb];
    if rng.gen_bool(0.5) {
        out.push(Chunk::Np);
    }
    if rng.gen_bool(0.5) {
        out.push(Chunk::Pp);
    }
    out
}

fn np_words<R: Rng>(rng: &mut R, lexicon: &Lexicon) -> Vec<Word> {
    if rng.gen_bool(0.25) {
        let n = lexicon.names.choose(rng).unwrap();
        return vec![word(n, n, "PROPN", "NNP")];
    }
    let mut out = Vec::new();
    if rng.gen_bool(0.7) {
        let d = DETS.choose(rng).unwrap();
        out.push(word(d, d, "DET", "DT"));
    }
    if rng.gen_bool(0.3) {
        let a = ADJS.choose(rng).unwrap();
        out.push(word(a, a, "ADJ", "JJ"));
    }
    let n = lexicon.nouns.choose(rng).unwrap();
    out.push(word(n, n, "NOUN", "NN"));
    out
}

/// Content words for [`ucca_sample`]; different lexicons give related but
/// distinct corpora.
#[derive(Clone, Debug)]
pub struct Lexicon {
    pub nouns: Vec<&'static str>,
    pub names: Vec<&'static str>,
    pub verbs: Vec<(&'static str, &'static str)>,
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon {
            nouns: NOUNS.to_vec(),
            names: NAMES.to_vec(),
            verbs: VERBS.to_vec(),
        }
    }
}

impl Lexicon {
    /// Splits the default lexicon in two halves.
    pub fn half(second: bool) -> Self {
        let pick = |len: usize| -> Vec<usize> { (0..len).filter(|i| (i % 2 == 1) == second).collect() };
        Lexicon {
            nouns: pick(NOUNS.len()).into_iter().map(|i| NOUNS[i]).collect(),
            names: pick(NAMES.len()).into_iter().map(|i| NAMES[i]).collect(),
            verbs: pick(VERBS.len()).into_iter().map(|i| VERBS[i]).collect(),
        }
    }
}

struct Builder {
    graph: Graph,
    rows: Vec<TokenRow>,
}

impl Builder {
    fn node(&mut self) -> u32 {
        let id = self.graph.nodes.len() as u32;
        self.graph.nodes.push(Node::new(id));
        id
    }

    fn leaf(&mut self, token: usize) -> u32 {
        let id = self.node();
        let a = self.rows[token].anchor;
        self.graph.nodes[id as usize].anchors.push(a);
        id
    }

    fn edge(&mut self, s: u32, t: u32, label: &str) {
        self.graph.edges.push(Edge::new(s, t, Some(label)));
    }

    /// Attaches a noun phrase under `parent`; one-word phrases attach the
    /// word directly.
    fn np(&mut self, parent: u32, label: &str, tokens: &[usize]) {
        if let [t] = tokens {
            let leaf = self.leaf(*t);
            self.edge(parent, leaf, label);
            return;
        }
        let unit = self.node();
        self.edge(parent, unit, label);
        for (k, &t) in tokens.iter().enumerate() {
            let leaf = self.leaf(t);
            self.edge(unit, leaf, if k + 1 == tokens.len() { "C" } else { "E" });
        }
    }
}

/// A UCCA-style graph built by rule from a random clause pattern: one scene
/// per clause with the verb as process (P), noun phrases as participants (A,
/// with E and C inside), prepositional phrases as participants with a
/// relator (R), clauses linked under a parallel-scene unit (H, L) and
/// punctuation attached with U.
pub fn ucca_sample<R: Rng>(id: &str, lexicon: &Lexicon, rng: &mut R) -> Sample {
    let mut chunks = clause(rng);
    if rng.gen_bool(0.3) {
        chunks.push(Chunk::Conj);
        chunks.extend(clause(rng));
    }
    if rng.gen_bool(0.7) {
        chunks.push(Chunk::Punct);
    }
    let mut words = Vec::new();
    let mut spans = Vec::new();
    for &c in &chunks {
        let start = words.len();
        match c {
            Chunk::Np => words.extend(np_words(rng, lexicon)),
            Chunk::Pp => {
                let a = ADPS.choose(rng).unwrap();
                words.push(word(a, a, "ADP", "IN"));
                words.extend(np_words(rng, lexicon));
            }
            Chunk::Verb => {
                let (f, l) = lexicon.verbs.choose(rng).unwrap();
                words.push(word(f, l, "VERB", "VBD"));
            }
            Chunk::Conj => words.push(word("and", "and", "CCONJ", "CC")),
            Chunk::Punct => words.push(word(".", ".", "PUNCT", ".")),
        }
        spans.push((c, start..words.len()));
    }
    let (input, rows) = sentence(&words);
    let mut b = Builder {
        graph: Graph::new(id, "ucca", input),
        rows,
    };
    b.graph.flavor = Some(1);
    let top = b.node();
    b.graph.tops.push(top);
    let linked = chunks.contains(&Chunk::Conj);
    let mut scene = if linked { b.node() } else { top };
    if linked {
        b.edge(top, scene, "H");
    }
    for (c, range) in spans {
        let tokens: Vec<usize> = range.collect();
        match c {
            Chunk::Np => b.np(scene, "A", &tokens),
            Chunk::Pp => {
                let unit = b.node();
                b.edge(scene, unit, "A");
                let r = b.leaf(tokens[0]);
                b.edge(unit, r, "R");
                b.np(unit, "C", &tokens[1..]);
            }
            Chunk::Verb => {
                let leaf = b.leaf(tokens[0]);
                b.edge(scene, leaf, "P");
            }
            Chunk::Conj => {
                let leaf = b.leaf(tokens[0]);
                b.edge(top, leaf, "L");
                scene = b.node();
                b.edge(top, scene, "H");
            }
            Chunk::Punct => {
                let leaf = b.leaf(tokens[0]);
                b.edge(top, leaf, "U");
            }
        }
    }
    Sample {
        graph: b.graph,
        rows: b.rows,
    }
}

/// A seed derived from `seed` for the purpose `name`.
pub fn sub_seed(seed: u64, name: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write_u64(seed);
    h.write(name.as_bytes());
    h.finish()
}

/// Cyclic graphs planted in the bundled cyclic fixture, out of
/// [`CYCLIC_FIXTURE_SIZE`].
pub const CYCLIC_FIXTURE_CYCLIC: usize = 34;
pub const CYCLIC_FIXTURE_SIZE: usize = 100;

/// The bundled corpora as (relative path without extension, samples):
///
/// * `ucca/train`, `ucca/dev`: rule-built UCCA graphs (50 and 10).
/// * `finetune/a`, `finetune/b`: UCCA graphs over the two lexicon halves.
/// * `frameworks/<tag>`: 30 acyclic random graphs per framework.
/// * `cyclic/ptg`: random PTG graphs with a planted share of cycles.
pub fn bundle(seed: u64) -> Result<Vec<(String, Vec<Sample>)>> {
    let ucca = |name: &str, count: usize, lexicon: &Lexicon| {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, name));
        let stem = name.replace('/', "-");
        (0..count)
            .map(|i| ucca_sample(&format!("{stem}-{i:03}"), lexicon, &mut rng))
            .collect::<Vec<_>>()
    };
    let mut out = vec![
        ("ucca/train".to_owned(), ucca("ucca/train", 50, &Lexicon::default())),
        ("ucca/dev".to_owned(), ucca("ucca/dev", 10, &Lexicon::default())),
        ("finetune/a".to_owned(), ucca("finetune/a", 40, &Lexicon::half(false))),
        ("finetune/b".to_owned(), ucca("finetune/b", 40, &Lexicon::half(true))),
    ];
    for fw in FRAMEWORKS {
        let name = format!("frameworks/{fw}");
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, &name));
        let samples = (0..30)
            .map(|i| random_sample(fw, &format!("{fw}-{i:03}"), false, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        out.push((name, samples));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, "cyclic/ptg"));
    let fraction = CYCLIC_FIXTURE_CYCLIC as f64 / CYCLIC_FIXTURE_SIZE as f64;
    out.push(("cyclic/ptg".to_owned(), planted_corpus("ptg", CYCLIC_FIXTURE_SIZE, fraction, &mut rng)?));
    Ok(out)
}

/// Checks a sample against its profile; used by tests and the generator CLI.
pub fn conforms(sample: &Sample, profile: &FrameworkProfile) -> bool {
    crate::graph::validate(&sample.graph, profile).is_valid()
}
