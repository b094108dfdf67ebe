//! Greedy parsing and perceptron training.

use log::{info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::extract_features;
use super::model::{hash_features, Hashed, Model, Perceptron, Weights};
use crate::companion::TokenRow;
use crate::constraints::{recovery, transition_mask, FrameworkProfile, Mask, Vocabulary};
use crate::error::{Error, Result};
use crate::evaluator::{score_corpus, ScoreParams};
use crate::graph::Graph;
use crate::irep::{from_intermediate_lenient, to_intermediate};
use crate::oracle::gold_sequence;
use crate::transition::{ParserState, Transition, TransitionKind};

/// Class name of a transition for the transition classifier: payload kinds
/// are scored by kind alone.
fn class_of(t: &Transition) -> String {
    match t.kind {
        TransitionKind::Label | TransitionKind::Property | TransitionKind::Attribute => t.kind.name().to_owned(),
        _ => t.to_string(),
    }
}

/// Transition classes allowed by a mask, sorted.
fn classes_of(mask: &Mask) -> Vec<String> {
    let mut out: Vec<String> = mask.actions.iter().map(|t| t.to_string()).collect();
    for kind in [TransitionKind::Label, TransitionKind::Property, TransitionKind::Attribute] {
        if !mask.payloads(kind).is_empty() {
            out.push(kind.name().to_owned());
        }
    }
    out.sort();
    out
}

fn payload_weights(model: &Model, kind: TransitionKind) -> Option<&Weights> {
    match kind {
        TransitionKind::Label => model.labels.as_ref(),
        TransitionKind::Property => model.properties.as_ref(),
        TransitionKind::Attribute => model.attributes.as_ref(),
        _ => None,
    }
}

fn features(model: &Model, state: &ParserState, rows: &[TokenRow]) -> Vec<Hashed> {
    let fw = model.multitask.then_some(model.framework.as_str());
    hash_features(&extract_features(state, rows, state.history(), fw))
}

/// The best transition in a non-empty mask: the transition classifier picks
/// a kind, the payload classifier its payload. Ties go to the smallest
/// transition encoding.
pub fn predict(model: &Model, features: &[Hashed], mask: &Mask) -> Option<Transition> {
    let classes = classes_of(mask);
    let refs: Vec<&str> = classes.iter().map(String::as_str).collect();
    let class = model.transitions.best(features, &refs)?;
    for kind in [TransitionKind::Label, TransitionKind::Property, TransitionKind::Attribute] {
        if class == kind.name() {
            let payloads: Vec<&str> = mask.payloads(kind).iter().map(String::as_str).collect();
            let payload = match payload_weights(model, kind) {
                Some(w) => w.best(features, &payloads)?,
                None => payloads.iter().min().copied()?,
            };
            return Some(Transition {
                kind,
                payload: Some(payload.to_owned()),
            });
        }
    }
    mask.actions.iter().find(|t| t.to_string() == class).cloned()
}

/// Result of parsing one sentence.
#[derive(Clone, Debug)]
pub struct Parsed {
    pub graph: Graph,
    pub transitions: Vec<Transition>,
    /// Steps taken by the recovery rule on an empty mask.
    pub recovered: usize,
    /// Whether the step budget ran out and the parse was force-completed.
    pub truncated: bool,
}

/// Default step budget for a sentence of `n` tokens.
pub fn step_budget(n: usize) -> usize {
    10 * (2 * n + 10)
}

/// Completes a state without building anything new: label where required,
/// then reduce and shift everything and finish.
fn force_complete(state: &mut ParserState, profile: &FrameworkProfile) -> usize {
    let mut steps = 0;
    while !state.is_terminal() {
        let mask = transition_mask(state, profile);
        let pick = mask
            .labels
            .first()
            .map(Transition::label)
            .or_else(|| {
                [Transition::reduce(), Transition::shift(), Transition::finish()]
                    .into_iter()
                    .find(|t| mask.contains(t))
            })
            .or_else(|| recovery(state));
        match pick {
            Some(t) if state.apply_mut(&t).is_ok() => steps += 1,
            _ => break,
        }
    }
    steps
}

/// Parses one sentence greedily.
pub fn parse(model: &Model, rows: &[TokenRow], profile: &FrameworkProfile, id: &str, input: &str) -> Parsed {
    parse_with_budget(model, rows, profile, id, input, step_budget(rows.len()))
}

/// [`parse`] with an explicit step budget.
pub fn parse_with_budget(
    model: &Model,
    rows: &[TokenRow],
    profile: &FrameworkProfile,
    id: &str,
    input: &str,
    budget: usize,
) -> Parsed {
    let mut state = ParserState::new(rows.len());
    let mut recovered = 0;
    if rows.is_empty() {
        state.apply_mut(&Transition::finish()).expect("finish is legal on an empty sentence");
    }
    while !state.is_terminal() && state.history().len() < budget {
        let mask = transition_mask(&state, profile);
        let t = if mask.is_empty() {
            recovered += 1;
            match recovery(&state) {
                Some(t) => t,
                None => break,
            }
        } else {
            let f = features(model, &state, rows);
            match predict(model, &f, &mask) {
                Some(t) => t,
                None => break,
            }
        };
        if state.apply_mut(&t).is_err() {
            break;
        }
    }
    let truncated = !state.is_terminal();
    if truncated {
        force_complete(&mut state, profile);
    }
    let mut igraph = state.snapshot();
    igraph.id = id.to_owned();
    igraph.framework = profile.framework.clone();
    Parsed {
        graph: from_intermediate_lenient(&igraph, rows, input),
        transitions: state.history().to_vec(),
        recovered,
        truncated,
    }
}

/// Parses a corpus in parallel; output order follows the input.
pub fn parse_corpus(model: &Model, corpus: &[(Graph, Vec<TokenRow>)], profile: &FrameworkProfile) -> Vec<Parsed> {
    parse_corpus_with_budget(model, corpus, profile, None)
}

/// [`parse_corpus`] with a fixed per-sentence step budget.
pub fn parse_corpus_with_budget(
    model: &Model,
    corpus: &[(Graph, Vec<TokenRow>)],
    profile: &FrameworkProfile,
    budget: Option<usize>,
) -> Vec<Parsed> {
    use rayon::prelude::*;
    corpus
        .par_iter()
        .map(|(g, rows)| {
            let budget = budget.unwrap_or_else(|| step_budget(rows.len()));
            parse_with_budget(model, rows, profile, &g.id, &g.input, budget)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    /// Adds the framework-id feature.
    pub multitask: bool,
    /// Scored after every epoch; the best epoch's weights are kept.
    pub validation: Vec<(Graph, Vec<TokenRow>)>,
    pub score_params: ScoreParams,
    /// Continue training this model (fine-tuning).
    pub init: Option<Model>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            seed: 0,
            multitask: false,
            validation: Vec::new(),
            score_params: ScoreParams {
                restarts: 2,
                iterations: 500,
                seed: 0,
            },
            init: None,
        }
    }
}

/// One training sentence with its oracle sequence.
struct Prepared<'a> {
    rows: &'a [TokenRow],
    sequence: Vec<Transition>,
}

struct Learners {
    transitions: Perceptron,
    labels: Perceptron,
    properties: Perceptron,
    attributes: Perceptron,
}

impl Learners {
    fn new(init: Option<&Model>) -> Self {
        let from = |w: Option<&Weights>| w.map(Perceptron::from_weights).unwrap_or_default();
        Learners {
            transitions: from(init.map(|m| &m.transitions)),
            labels: from(init.and_then(|m| m.labels.as_ref())),
            properties: from(init.and_then(|m| m.properties.as_ref())),
            attributes: from(init.and_then(|m| m.attributes.as_ref())),
        }
    }

    fn payload(&mut self, kind: TransitionKind) -> &mut Perceptron {
        match kind {
            TransitionKind::Label => &mut self.labels,
            TransitionKind::Property => &mut self.properties,
            _ => &mut self.attributes,
        }
    }

    fn model(&self, base: &Model) -> Model {
        let mut m = base.clone();
        m.transitions = self.transitions.averaged();
        let p = &m.profile;
        m.labels = p.allows_node_labels.then(|| self.labels.averaged());
        m.properties = p.allows_node_properties.then(|| self.properties.averaged());
        m.attributes = p.allows_edge_attributes.then(|| self.attributes.averaged());
        m
    }
}

/// Walks one oracle sequence, updating the learners. Returns false when a
/// gold transition falls outside the mask.
fn learn_sentence(learners: &mut Learners, model: &Model, s: &Prepared, mistakes: &mut usize) -> bool {
    let mut state = ParserState::new(s.rows.len());
    for gold in &s.sequence {
        let mask = transition_mask(&state, &model.profile);
        if !mask.contains(gold) {
            return false;
        }
        let f = features(model, &state, s.rows);
        let classes = classes_of(&mask);
        let refs: Vec<&str> = classes.iter().map(String::as_str).collect();
        if !learners.transitions.learn(&f, &refs, &class_of(gold)) {
            *mistakes += 1;
        }
        if gold.kind.takes_payload() && payload_weights(model, gold.kind).is_some() {
            let payloads: Vec<&str> = mask.payloads(gold.kind).iter().map(String::as_str).collect();
            if !payloads.is_empty() && !learners.payload(gold.kind).learn(&f, &payloads, gold.payload()) {
                *mistakes += 1;
            }
        }
        if state.apply_mut(gold).is_err() {
            return false;
        }
    }
    true
}

/// Micro F of a model on a corpus.
pub fn evaluate_model(model: &Model, corpus: &[(Graph, Vec<TokenRow>)], params: &ScoreParams) -> Result<f64> {
    let golds: Vec<Graph> = corpus.iter().map(|(g, _)| g.clone()).collect();
    let systems: Vec<Graph> = parse_corpus(model, corpus, &model.profile)
        .into_iter()
        .map(|p| p.graph)
        .collect();
    Ok(score_corpus(&golds, &systems, params)?.overall.f1)
}

/// Trains a model with the averaged perceptron on oracle sequences.
pub fn train(corpus: &[(Graph, Vec<TokenRow>)], profile: &FrameworkProfile, config: &TrainConfig) -> Result<Model> {
    if corpus.is_empty() {
        return Err(Error::NoTrainingData);
    }
    let mut vocabulary = Vocabulary::default();
    let mut prepared = Vec::new();
    let mut skipped = 0;
    for (graph, rows) in corpus {
        let sequence = to_intermediate(graph, rows, profile).and_then(|ig| {
            vocabulary.observe(&ig);
            gold_sequence(&ig, rows)
        });
        match sequence {
            Ok(sequence) => prepared.push(Prepared { rows, sequence }),
            Err(e) => {
                warn!("skipping {}: {e}", graph.id);
                skipped += 1;
            }
        }
    }
    if prepared.is_empty() {
        return Err(Error::NoTrainingData);
    }
    let mut base = match &config.init {
        Some(init) => {
            let mut m = init.clone();
            if m.framework != profile.framework {
                m.meta.lineage.push(m.framework.clone());
            } else {
                m.meta.lineage.push(format!("{}@{}", m.framework, m.meta.epochs));
            }
            m.framework = profile.framework.clone();
            let mut p = profile.clone();
            p.vocabulary.merge(&m.profile.vocabulary);
            m.profile = p;
            m
        }
        None => Model::new(profile.clone()),
    };
    base.profile.vocabulary.merge(&vocabulary);
    base.multitask = config.multitask || base.multitask;
    base.meta.seed = config.seed;
    base.meta.epochs = config.epochs;
    base.meta.skipped = skipped;
    base.meta.sentences = prepared.len();
    base.meta.epoch_scores.clear();
    base.meta.epoch_mistakes.clear();

    let mut learners = Learners::new(config.init.as_ref());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..prepared.len()).collect();
    let mut best: Option<(f64, Model)> = None;
    let mut last = None;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut rejected = 0;
        let mut mistakes = 0;
        for &i in &order {
            if !learn_sentence(&mut learners, &base, &prepared[i], &mut mistakes) {
                rejected += 1;
            }
        }
        info!("epoch {epoch}: {mistakes} training mistakes");
        base.meta.epoch_mistakes.push(mistakes);
        if rejected > 0 {
            warn!("epoch {epoch}: {rejected} sentences left the mask");
        }
        let mut model = learners.model(&base);
        model.meta.epoch_mistakes = base.meta.epoch_mistakes.clone();
        if config.validation.is_empty() {
            info!("epoch {epoch} done");
            last = Some(model);
            continue;
        }
        let f = evaluate_model(&model, &config.validation, &config.score_params)?;
        info!("epoch {epoch}: validation F {f:.4}");
        base.meta.epoch_scores.push(f);
        model.meta.epoch_scores = base.meta.epoch_scores.clone();
    model.meta.epoch_mistakes = base.meta.epoch_mistakes.clone();
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            model.meta.best_epoch = epoch;
            best = Some((f, model));
        }
    }
    let mut model = match best {
        Some((_, m)) => m,
        None => {
            let mut m = last.unwrap_or_else(|| learners.model(&base));
            m.meta.best_epoch = config.epochs;
            m
        }
    };
    model.meta.epoch_scores = base.meta.epoch_scores.clone();
    model.meta.epoch_mistakes = base.meta.epoch_mistakes.clone();
    Ok(model)
}
