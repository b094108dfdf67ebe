//! Feature extraction over parser states.

use std::collections::BTreeSet;

use crate::companion::TokenRow;
use crate::transition::{NodeKind, NodeRef, ParserState, Transition, ANCHOR_LABEL};

/// Bumped whenever templates change meaning; stored in model files.
pub const FEATURE_VERSION: u32 = 1;

/// Stack and buffer window size.
pub const WINDOW: usize = 3;

/// Number of past actions used as features.
pub const HISTORY: usize = 3;

/// Categorical templates. Window templates are repeated per slot, so the
/// template id of slot `k` is `base * 8 + k`.
pub const CATEGORICAL: [&str; 14] = [
    "kind", "lemma", "upos", "xpos", "punct", "gap", "label", "props", "in", "out", "form", "head", "attrs", "none",
];

/// Global categorical templates, numbered after the window templates.
pub const GLOBAL: [&str; 16] = [
    "action", "action.s0", "s0s1.edge", "s0s1.order", "s0.lemma+s1.lemma", "s0.lemma+b0.lemma",
    "s0.kind+b0.kind", "s0.upos+s1.upos", "latest", "framework", "s0.label+s1.label", "s0.in+s0.out",
    "depth", "buffer", "run", "s0.kind+s1.kind+action",
];

/// Numeric templates, per window slot.
pub const NUMERIC: [&str; 3] = ["height", "parents", "children"];

/// Window slots in template order.
pub const SLOTS: [&str; 6] = ["s0", "s1", "s2", "b0", "b1", "b2"];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    /// (template id, value).
    pub categorical: Vec<(u16, String)>,
    /// (feature id, value), all finite.
    pub numeric: Vec<(u16, f64)>,
}

impl FeatureVector {
    fn cat(&mut self, id: u16, value: impl Into<String>) {
        self.categorical.push((id, value.into()));
    }

    fn num(&mut self, id: u16, value: f64) {
        debug_assert!(value.is_finite());
        self.numeric.push((id, value));
    }

    /// The value of a named categorical feature, for tests and debugging.
    pub fn get(&self, name: &str) -> Option<&str> {
        let id = template_id(name)?;
        self.categorical.iter().find(|(t, _)| *t == id).map(|(_, v)| v.as_str())
    }

    /// The value of a named numeric feature.
    pub fn get_numeric(&self, name: &str) -> Option<f64> {
        let id = numeric_id(name)?;
        self.numeric.iter().find(|(t, _)| *t == id).map(|(_, v)| *v)
    }
}

/// Template id of a categorical name such as `s0.lemma` or `action.1`.
pub fn template_id(name: &str) -> Option<u16> {
    if let Some((slot, base)) = name.split_once('.') {
        if let (Some(k), Some(b)) = (
            SLOTS.iter().position(|s| *s == slot),
            CATEGORICAL.iter().position(|c| *c == base),
        ) {
            return Some((b * 8 + k) as u16);
        }
    }
    let global = |i: usize| (CATEGORICAL.len() * 8 + i) as u16;
    if let Some(rest) = name.strip_prefix("action.") {
        if let Ok(k) = rest.parse::<usize>() {
            if k < HISTORY {
                return Some(global(GLOBAL.len() + k));
            }
        }
    }
    GLOBAL.iter().position(|g| *g == name).map(global)
}

/// Numeric feature id of a name such as `s1.height` or `terminal_ratio`.
pub fn numeric_id(name: &str) -> Option<u16> {
    if name == "terminal_ratio" {
        return Some((NUMERIC.len() * 8) as u16);
    }
    let (slot, base) = name.split_once('.')?;
    let k = SLOTS.iter().position(|s| *s == slot)?;
    let b = NUMERIC.iter().position(|n| *n == base)?;
    Some((b * 8 + k) as u16)
}

fn cat_id(base: &str, slot: usize) -> u16 {
    (CATEGORICAL.iter().position(|c| *c == base).expect("known template") * 8 + slot) as u16
}

fn global_id(name: &str) -> u16 {
    template_id(name).expect("known template")
}

/// The terminal reached by repeatedly following the outgoing edge with the
/// alphabetically smallest label. `None` if a sink without terminals is hit.
pub fn head_terminal(state: &ParserState, r: NodeRef) -> Option<NodeRef> {
    let mut seen = BTreeSet::new();
    let mut cur = r;
    loop {
        if state.is_token(cur) {
            return Some(cur);
        }
        if !seen.insert(cur) {
            return None;
        }
        let node = state.node(cur);
        let next = node
            .outgoing
            .iter()
            .map(|&e| &state.edges()[e])
            .min_by(|a, b| a.label.cmp(&b.label).then(a.target.cmp(&b.target)))?;
        cur = next.target;
    }
}

/// Token positions in the yield of `r`: terminals reachable downwards.
fn yield_of(state: &ParserState, r: NodeRef) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut seen = BTreeSet::new();
    let mut todo = vec![r];
    while let Some(v) = todo.pop() {
        if !seen.insert(v) {
            continue;
        }
        if let NodeKind::Terminal(p) = state.node(v).kind {
            out.insert(p);
        }
        todo.extend(state.node(v).outgoing.iter().map(|&e| state.edges()[e].target));
    }
    out
}

/// Discontinuities in the yield: "none", "one" or "multiple".
pub fn gap_type(state: &ParserState, r: NodeRef) -> &'static str {
    let positions: Vec<usize> = yield_of(state, r).into_iter().collect();
    let gaps = positions.windows(2).filter(|w| w[1] != w[0] + 1).count();
    match gaps {
        0 => "none",
        1 => "one",
        _ => "multiple",
    }
}

/// Longest downward path from `r`, in edges.
fn height(state: &ParserState, r: NodeRef) -> usize {
    fn go(state: &ParserState, r: NodeRef, memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(h) = memo[r] {
            return h;
        }
        memo[r] = Some(0);
        let h = state
            .node(r)
            .outgoing
            .iter()
            .map(|&e| go(state, state.edges()[e].target, memo) + 1)
            .max()
            .unwrap_or(0);
        memo[r] = Some(h);
        h
    }
    go(state, r, &mut vec![None; state.nodes().len()])
}

fn is_punct(row: &TokenRow) -> bool {
    row.upos == "PUNCT" || (!row.form.is_empty() && row.form.chars().all(|c| c.is_ascii_punctuation()))
}

fn kind_name(state: &ParserState, r: NodeRef) -> &'static str {
    match state.node(r).kind {
        NodeKind::Root => "root",
        NodeKind::Terminal(_) => "terminal",
        NodeKind::Inner => "inner",
    }
}

fn edge_labels(state: &ParserState, edges: &[usize]) -> String {
    let mut labels: Vec<&str> = edges
        .iter()
        .map(|&e| state.edges()[e].label.as_str())
        .filter(|l| *l != ANCHOR_LABEL)
        .collect();
    labels.sort_unstable();
    labels.join("|")
}

struct Slot<'a> {
    lemma: &'a str,
    upos: &'a str,
    kind: &'static str,
    label: String,
    incoming: String,
    outgoing: String,
}

/// Features of a state. `history` holds the transitions taken so far, most
/// recent last; `framework` is set for multitask models.
pub fn extract_features(
    state: &ParserState,
    rows: &[TokenRow],
    history: &[Transition],
    framework: Option<&str>,
) -> FeatureVector {
    let mut fv = FeatureVector::default();
    let mut slots: Vec<Option<Slot>> = Vec::new();
    let refs: Vec<Option<NodeRef>> = (0..WINDOW)
        .map(|k| state.stack_at(k))
        .chain((0..WINDOW).map(|k| state.buffer_at(k)))
        .collect();
    for (k, r) in refs.iter().enumerate() {
        let Some(r) = *r else {
            fv.cat(cat_id("none", k), "none");
            for n in NUMERIC {
                fv.num(numeric_id(&format!("{}.{n}", SLOTS[k])).unwrap(), 0.0);
            }
            slots.push(None);
            continue;
        };
        let node = state.node(r);
        let kind = kind_name(state, r);
        fv.cat(cat_id("kind", k), kind);
        let head = head_terminal(state, r);
        let row = head.and_then(|h| match state.node(h).kind {
            NodeKind::Terminal(p) => rows.get(p),
            _ => None,
        });
        let (lemma, upos) = match row {
            Some(row) => {
                fv.cat(cat_id("lemma", k), row.lemma.as_str());
                fv.cat(cat_id("upos", k), row.upos.as_str());
                fv.cat(cat_id("xpos", k), row.xpos.as_str());
                fv.cat(cat_id("form", k), row.form.to_lowercase());
                fv.cat(cat_id("punct", k), if is_punct(row) { "1" } else { "0" });
                (row.lemma.as_str(), row.upos.as_str())
            }
            None => {
                fv.cat(cat_id("head", k), "none");
                ("none", "none")
            }
        };
        let label = node.label.clone().unwrap_or_else(|| "none".into());
        fv.cat(cat_id("label", k), label.as_str());
        let mut names: Vec<&str> = node.properties.keys().map(String::as_str).collect();
        names.sort_unstable();
        fv.cat(cat_id("props", k), names.join("|"));
        let incoming = edge_labels(state, &node.incoming);
        let outgoing = edge_labels(state, &node.outgoing);
        fv.cat(cat_id("in", k), incoming.as_str());
        fv.cat(cat_id("out", k), outgoing.as_str());
        if k == 0 {
            fv.cat(cat_id("gap", k), gap_type(state, r));
        }
        let slot = SLOTS[k];
        fv.num(numeric_id(&format!("{slot}.height")).unwrap(), height(state, r) as f64);
        fv.num(numeric_id(&format!("{slot}.parents")).unwrap(), node.incoming.len() as f64);
        fv.num(numeric_id(&format!("{slot}.children")).unwrap(), node.outgoing.len() as f64);
        slots.push(Some(Slot {
            lemma,
            upos,
            kind,
            label,
            incoming,
            outgoing,
        }));
    }

    let ratio = state.n_terminals() as f64 / state.nodes().len() as f64;
    fv.num(numeric_id("terminal_ratio").unwrap(), ratio);

    for k in 0..HISTORY {
        let a = history.len().checked_sub(k + 1).map(|i| history[i].to_string());
        fv.cat(global_id(&format!("action.{k}")), a.unwrap_or_else(|| "none".into()));
    }
    let last = history.last().map(|t| t.kind.name()).unwrap_or("none");
    let run = history.iter().rev().take_while(|t| t.kind.name() == last).count();
    fv.cat(global_id("run"), format!("{last}x{}", run.min(4)));
    fv.cat(global_id("depth"), state.stack().len().min(8).to_string());
    fv.cat(global_id("buffer"), state.buffer().len().min(5).to_string());
    let s = |k: usize| slots[k].as_ref();
    let field = |k: usize, f: fn(&Slot) -> String| s(k).map(f).unwrap_or_else(|| "none".into());
    fv.cat(global_id("action"), last);
    fv.cat(global_id("action.s0"), format!("{last}+{}", field(0, |x| x.kind.to_string())));
    let (s0, s1) = (state.stack_at(0), state.stack_at(1));
    let relation = match (s0, s1) {
        (Some(x), Some(y)) => {
            let mut rel: Vec<String> = Vec::new();
            for &e in &state.node(x).outgoing {
                if state.edges()[e].target == y {
                    rel.push(format!(">{}", state.edges()[e].label));
                }
            }
            for &e in &state.node(y).outgoing {
                if state.edges()[e].target == x {
                    rel.push(format!("<{}", state.edges()[e].label));
                }
            }
            rel.sort();
            fv.cat(
                global_id("s0s1.order"),
                if state.index_of(y) < state.index_of(x) { "older" } else { "newer" },
            );
            rel.join("|")
        }
        _ => "none".into(),
    };
    fv.cat(global_id("s0s1.edge"), relation);
    fv.cat(
        global_id("s0.lemma+s1.lemma"),
        format!("{}+{}", field(0, |x| x.lemma.into()), field(1, |x| x.lemma.into())),
    );
    fv.cat(
        global_id("s0.lemma+b0.lemma"),
        format!("{}+{}", field(0, |x| x.lemma.into()), field(3, |x| x.lemma.into())),
    );
    fv.cat(
        global_id("s0.kind+s1.kind+action"),
        format!("{}+{}+{last}", field(0, |x| x.kind.into()), field(1, |x| x.kind.into())),
    );
    fv.cat(
        global_id("s0.kind+b0.kind"),
        format!("{}+{}", field(0, |x| x.kind.into()), field(3, |x| x.kind.into())),
    );
    fv.cat(
        global_id("s0.upos+s1.upos"),
        format!("{}+{}", field(0, |x| x.upos.into()), field(1, |x| x.upos.into())),
    );
    fv.cat(
        global_id("s0.label+s1.label"),
        format!("{}+{}", field(0, |x| x.label.clone()), field(1, |x| x.label.clone())),
    );
    fv.cat(
        global_id("s0.in+s0.out"),
        format!("{}+{}", field(0, |x| x.incoming.clone()), field(0, |x| x.outgoing.clone())),
    );
    let latest = state
        .latest_edge()
        .map(|e| {
            let mut names: Vec<&str> = e.attributes.keys().map(String::as_str).collect();
            names.sort_unstable();
            format!("{}:{}", e.label, names.join("|"))
        })
        .unwrap_or_else(|| "none".into());
    fv.cat(global_id("latest"), latest);
    if let Some(fw) = framework {
        fv.cat(global_id("framework"), fw);
    }
    fv
}
