//! Per-framework constraint profiles and transition masking.
//!
//! The transition set is the same for every framework. A profile only rules
//! transitions out, based on what the framework's graphs may contain and on
//! the payload strings seen in training data.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::irep::IGraph;
use crate::transition::{
    split_pair, NodeKind, NodeRef, ParserState, Transition, TransitionKind, ANCHOR_LABEL, ROOT,
    TOP_LABEL,
};

/// Framework tags with a built-in profile.
pub const FRAMEWORKS: [&str; 7] = ["dm", "psd", "eds", "ptg", "ucca", "amr", "drg"];

const DEFAULTS: &str = include_str!("../data/profiles.toml");

/// Payload strings permitted for a framework, learned from training data.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub edge_labels: BTreeSet<String>,
    pub node_labels: BTreeSet<String>,
    /// `name=value` pairs.
    pub properties: BTreeSet<String>,
    /// `name=value` pairs.
    pub attributes: BTreeSet<String>,
}

impl Vocabulary {
    pub fn observe(&mut self, graph: &IGraph) {
        for node in graph.inner_nodes() {
            if let Some(label) = &node.label {
                self.node_labels.insert(label.clone());
            }
            for (name, value) in &node.properties {
                self.properties.insert(format!("{name}={value}"));
            }
        }
        for edge in &graph.edges {
            if edge.source == graph.root || graph.is_terminal(edge.target) {
                continue;
            }
            self.edge_labels.insert(edge.label.clone());
            for (name, value) in &edge.attributes {
                self.attributes.insert(format!("{name}={value}"));
            }
        }
    }

    pub fn merge(&mut self, other: &Vocabulary) {
        self.edge_labels.extend(other.edge_labels.iter().cloned());
        self.node_labels.extend(other.node_labels.iter().cloned());
        self.properties.extend(other.properties.iter().cloned());
        self.attributes.extend(other.attributes.iter().cloned());
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameworkProfile {
    pub framework: String,
    pub allows_node_labels: bool,
    pub allows_node_properties: bool,
    pub allows_edge_attributes: bool,
    pub allows_anchors: bool,
    pub allows_multigraph: bool,
    #[serde(default)]
    pub max_tops: Option<usize>,
    pub required_node_labels: bool,
    #[serde(default)]
    pub vocabulary: Vocabulary,
}

/// A partial profile, as read from a config file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileOverride {
    pub allows_node_labels: Option<bool>,
    pub allows_node_properties: Option<bool>,
    pub allows_edge_attributes: Option<bool>,
    pub allows_anchors: Option<bool>,
    pub allows_multigraph: Option<bool>,
    pub max_tops: Option<usize>,
    pub required_node_labels: Option<bool>,
}

pub type ProfileConfig = BTreeMap<String, ProfileOverride>;

impl FrameworkProfile {
    pub fn apply(&mut self, o: &ProfileOverride) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = o.$field {
                    self.$field = v;
                }
            )*};
        }
        set!(
            allows_node_labels,
            allows_node_properties,
            allows_edge_attributes,
            allows_anchors,
            allows_multigraph,
            required_node_labels
        );
        if o.max_tops.is_some() {
            self.max_tops = o.max_tops;
        }
        self.check()
    }

    pub fn check(&self) -> Result<()> {
        if self.required_node_labels && !self.allows_node_labels {
            return Err(Error::Profile(format!(
                "{}: node labels are required but not allowed",
                self.framework
            )));
        }
        Ok(())
    }
}

pub fn parse_profile_config(text: &str) -> Result<ProfileConfig> {
    let config: ProfileConfig = toml::from_str(text).map_err(|e| Error::Profile(e.to_string()))?;
    Ok(config
        .into_iter()
        .map(|(k, v)| (k.to_ascii_lowercase(), v))
        .collect())
}

pub fn load_profile_config(path: &Path) -> Result<ProfileConfig> {
    parse_profile_config(&std::fs::read_to_string(path)?)
}

/// The built-in profile for a framework tag (case-insensitive).
pub fn profile_for(framework: &str) -> Result<FrameworkProfile> {
    profile_with(framework, &ProfileConfig::new())
}

/// The built-in profile with `config` applied on top.
pub fn profile_with(framework: &str, config: &ProfileConfig) -> Result<FrameworkProfile> {
    let tag = framework.to_ascii_lowercase();
    let defaults = parse_profile_config(DEFAULTS).expect("bundled profiles parse");
    let base = defaults
        .get(&tag)
        .ok_or_else(|| Error::UnknownFramework(framework.to_owned()))?;
    let mut profile = FrameworkProfile {
        framework: tag.clone(),
        allows_node_labels: false,
        allows_node_properties: false,
        allows_edge_attributes: false,
        allows_anchors: false,
        allows_multigraph: false,
        max_tops: None,
        required_node_labels: false,
        vocabulary: Vocabulary::default(),
    };
    profile.apply(base)?;
    if let Some(o) = config.get(&tag) {
        profile.apply(o)?;
    }
    Ok(profile)
}

/// The allowed transitions in a state.
///
/// Structural transitions are listed in full. Label, Property and Attribute
/// are listed once per candidate payload, so the payload classifier can pick
/// among them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mask {
    pub actions: Vec<Transition>,
    pub labels: Vec<String>,
    pub properties: Vec<String>,
    pub attributes: Vec<String>,
}

impl Mask {
    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
            && self.labels.is_empty()
            && self.properties.is_empty()
            && self.attributes.is_empty()
    }

    pub fn payloads(&self, kind: TransitionKind) -> &[String] {
        match kind {
            TransitionKind::Label => &self.labels,
            TransitionKind::Property => &self.properties,
            TransitionKind::Attribute => &self.attributes,
            _ => &[],
        }
    }

    pub fn contains(&self, t: &Transition) -> bool {
        match t.kind {
            TransitionKind::Label | TransitionKind::Property | TransitionKind::Attribute => {
                self.payloads(t.kind).iter().any(|p| Some(p.as_str()) == t.payload.as_deref())
            }
            _ => self.actions.contains(t),
        }
    }

    /// Every allowed transition, sorted by text encoding.
    pub fn all(&self) -> Vec<Transition> {
        let mut out = self.actions.clone();
        out.extend(self.labels.iter().map(Transition::label));
        for (kind, list) in [
            (TransitionKind::Property, &self.properties),
            (TransitionKind::Attribute, &self.attributes),
        ] {
            out.extend(list.iter().map(|p| Transition {
                kind,
                payload: Some(p.clone()),
            }));
        }
        out.sort_by_key(|t| t.to_string());
        out
    }
}

fn top_count(state: &ParserState) -> usize {
    state.node(ROOT).outgoing.len()
}

fn semantic_labels(profile: &FrameworkProfile) -> impl Iterator<Item = &String> {
    profile
        .vocabulary
        .edge_labels
        .iter()
        .filter(|l| *l != TOP_LABEL && *l != ANCHOR_LABEL)
}

/// Edge labels allowed for a new edge from `source` to `target`, where
/// `target` is `None` for a node that does not exist yet.
fn edge_labels(
    state: &ParserState,
    profile: &FrameworkProfile,
    source: NodeRef,
    target: Option<NodeRef>,
) -> Vec<String> {
    let to_terminal = target.is_some_and(|t| state.is_token(t));
    if source == ROOT {
        if to_terminal || profile.max_tops.is_some_and(|m| top_count(state) >= m) {
            return Vec::new();
        }
        return match target {
            Some(t) if state.has_edge(ROOT, t, TOP_LABEL) => Vec::new(),
            _ => vec![TOP_LABEL.to_owned()],
        };
    }
    if to_terminal {
        let t = target.unwrap();
        if !profile.allows_anchors || state.has_edge(source, t, ANCHOR_LABEL) {
            return Vec::new();
        }
        return vec![ANCHOR_LABEL.to_owned()];
    }
    semantic_labels(profile)
        .filter(|l| match target {
            Some(t) => profile.allows_multigraph || !state.has_edge(source, t, l),
            None => true,
        })
        .cloned()
        .collect()
}

fn labeling_pending(state: &ParserState, profile: &FrameworkProfile, x: NodeRef) -> bool {
    profile.required_node_labels
        && !profile.vocabulary.node_labels.is_empty()
        && state.node(x).kind == NodeKind::Inner
        && state.node(x).label.is_none()
}

/// Transitions that are legal in `state` and permitted by `profile`.
pub fn transition_mask(state: &ParserState, profile: &FrameworkProfile) -> Mask {
    let mut mask = Mask::default();
    if state.is_terminal() {
        return mask;
    }
    let mut push = |t: Transition| {
        if state.is_legal(&t) {
            mask.actions.push(t);
        }
    };
    push(Transition::shift());
    if let Some(x) = state.stack_top() {
        if !labeling_pending(state, profile, x) {
            push(Transition::reduce());
        }
        if x != ROOT {
            let target_labels = if state.is_token(x) {
                if profile.allows_anchors {
                    vec![ANCHOR_LABEL.to_owned()]
                } else {
                    Vec::new()
                }
            } else {
                semantic_labels(profile).cloned().collect()
            };
            for l in target_labels {
                push(Transition::node(l));
            }
        }
        if !state.is_token(x) {
            for l in edge_labels(state, profile, x, None) {
                push(Transition::child(l));
            }
        }
    }
    if let (Some(s0), Some(s1)) = (state.stack_at(0), state.stack_at(1)) {
        for l in edge_labels(state, profile, s0, Some(s1)) {
            push(Transition::left_edge(l));
        }
        for l in edge_labels(state, profile, s1, Some(s0)) {
            push(Transition::right_edge(l));
        }
        push(Transition::swap());
    }
    push(Transition::finish());

    if let Some(x) = state.stack_top() {
        let node = state.node(x);
        if profile.allows_node_labels && state.is_legal(&Transition::label("_")) {
            mask.labels = profile.vocabulary.node_labels.iter().cloned().collect();
        }
        if profile.allows_node_properties && state.is_legal(&Transition::property("_", "_")) {
            mask.properties = profile
                .vocabulary
                .properties
                .iter()
                .filter(|p| split_pair(p).is_some_and(|(n, _)| !node.properties.contains_key(n)))
                .cloned()
                .collect();
        }
    }
    if profile.allows_edge_attributes && state.is_legal(&Transition::attribute("_", "_")) {
        let edge = state.latest_edge().expect("attribute is legal");
        mask.attributes = profile
            .vocabulary
            .attributes
            .iter()
            .filter(|p| split_pair(p).is_some_and(|(n, _)| !edge.attributes.contains_key(n)))
            .cloned()
            .collect();
    }
    mask
}

/// The transition forced when the mask is empty: Reduce if the stack holds
/// anything above the root, else Shift, else Finish. `None` if none of them
/// is legal either.
pub fn recovery(state: &ParserState) -> Option<Transition> {
    [Transition::reduce(), Transition::shift(), Transition::finish()]
        .into_iter()
        .find(|t| state.is_legal(t))
}
