//! Averaged multi-class perceptron over hashed features, and the model file.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hasher;
use std::path::Path;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::features::{FeatureVector, FEATURE_VERSION};
use crate::constraints::FrameworkProfile;
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "tupa-mrp-model";

/// A hashed feature with its value (1 for categorical features).
pub type Hashed = (u64, f64);

/// FNV-1a hashes of a feature vector.
pub fn hash_features(fv: &FeatureVector) -> Vec<Hashed> {
    let mut out = Vec::with_capacity(fv.categorical.len() + fv.numeric.len() + 1);
    // Bias.
    out.push((0, 1.0));
    for (id, value) in &fv.categorical {
        let mut h = FnvHasher::default();
        h.write(&id.to_le_bytes());
        h.write_u8(0xff);
        h.write(value.as_bytes());
        out.push((h.finish(), 1.0));
    }
    for (id, value) in &fv.numeric {
        let mut h = FnvHasher::default();
        h.write(b"#");
        h.write(&id.to_le_bytes());
        out.push((h.finish(), *value));
    }
    out
}

/// Final weights of one classifier: rows of (class index, weight) per
/// feature hash, sorted by class.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub classes: Vec<String>,
    pub rows: BTreeMap<u64, Vec<(u32, f32)>>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Weights {
    fn reindex(&mut self) {
        self.index = self.classes.iter().enumerate().map(|(i, c)| (c.clone(), i as u32)).collect();
    }

    pub fn class_index(&self, class: &str) -> Option<u32> {
        self.index.get(class).copied()
    }

    /// Scores of `candidates`; unknown classes score 0.
    pub fn scores(&self, features: &[Hashed], candidates: &[&str]) -> Vec<f64> {
        let ids: Vec<Option<u32>> = candidates.iter().map(|c| self.class_index(c)).collect();
        let mut out = vec![0.0; candidates.len()];
        for (key, value) in features {
            let Some(row) = self.rows.get(key) else {
                continue;
            };
            for (slot, id) in ids.iter().enumerate() {
                if let Some(id) = id {
                    if let Ok(i) = row.binary_search_by_key(id, |(c, _)| *c) {
                        out[slot] += row[i].1 as f64 * value;
                    }
                }
            }
        }
        out
    }

    /// The best candidate; ties go to the lexicographically smallest.
    pub fn best<'c>(&self, features: &[Hashed], candidates: &[&'c str]) -> Option<&'c str> {
        let scores = self.scores(features, candidates);
        let mut best: Option<(f64, &str)> = None;
        for (c, s) in candidates.iter().zip(scores) {
            best = match best {
                Some((bs, bc)) if bs > s || (bs == s && bc <= *c) => Some((bs, bc)),
                _ => Some((s, *c)),
            };
        }
        best.map(|(_, c)| c)
    }
}

#[derive(Clone, Debug, Default)]
struct Entry {
    weight: f64,
    /// Sum of the weight over steps before `stamp`.
    total: f64,
    /// First step the current weight applies to.
    stamp: u64,
}

/// Training-time perceptron with lazy averaging.
#[derive(Clone, Debug, Default)]
pub struct Perceptron {
    classes: Vec<String>,
    index: HashMap<String, u32>,
    rows: HashMap<u64, BTreeMap<u32, Entry>>,
    step: u64,
}

impl Perceptron {
    /// Starts from existing weights, as when fine-tuning.
    pub fn from_weights(w: &Weights) -> Self {
        let mut p = Perceptron::default();
        for c in &w.classes {
            p.class(c);
        }
        for (key, row) in &w.rows {
            let r = p.rows.entry(*key).or_default();
            for (c, v) in row {
                r.insert(*c, Entry { weight: *v as f64, total: 0.0, stamp: 1 });
            }
        }
        p
    }

    fn class(&mut self, name: &str) -> u32 {
        if let Some(i) = self.index.get(name) {
            return *i;
        }
        let i = self.classes.len() as u32;
        self.classes.push(name.to_owned());
        self.index.insert(name.to_owned(), i);
        i
    }

    fn snapshot(&self) -> Weights {
        let mut w = Weights {
            classes: self.classes.clone(),
            ..Weights::default()
        };
        w.reindex();
        w
    }

    /// Current (non-averaged) scores.
    fn scores(&self, features: &[Hashed], candidates: &[&str]) -> Vec<f64> {
        let mut out = vec![0.0; candidates.len()];
        let ids: Vec<Option<u32>> = candidates.iter().map(|c| self.index.get(*c).copied()).collect();
        for (key, value) in features {
            let Some(row) = self.rows.get(key) else {
                continue;
            };
            for (slot, id) in ids.iter().enumerate() {
                if let Some(e) = id.and_then(|id| row.get(&id)) {
                    out[slot] += e.weight * value;
                }
            }
        }
        out
    }

    /// Predicts among `candidates` with the current weights and updates
    /// towards `gold` on a mistake. Returns whether the prediction was right.
    pub fn learn(&mut self, features: &[Hashed], candidates: &[&str], gold: &str) -> bool {
        self.step += 1;
        let scores = self.scores(features, candidates);
        let mut best: Option<(f64, &str)> = None;
        for (c, s) in candidates.iter().zip(scores) {
            best = match best {
                Some((bs, bc)) if bs > s || (bs == s && bc <= *c) => Some((bs, bc)),
                _ => Some((s, *c)),
            };
        }
        let predicted = best.map(|(_, c)| c.to_owned());
        if predicted.as_deref() == Some(gold) {
            return true;
        }
        let g = self.class(gold);
        let p = predicted.map(|p| self.class(&p));
        let step = self.step;
        for (key, value) in features {
            let row = self.rows.entry(*key).or_default();
            for (c, delta) in [(Some(g), *value), (p, -*value)] {
                let Some(c) = c else { continue };
                let e = row.entry(c).or_default();
                e.total += e.weight * step.saturating_sub(e.stamp.max(1)) as f64;
                e.stamp = step;
                e.weight += delta;
            }
        }
        false
    }

    /// Weights averaged over all updates so far. Initial weights count as
    /// held since step 0.
    pub fn averaged(&self) -> Weights {
        let mut w = self.snapshot();
        let t = self.step.max(1);
        for (key, row) in &self.rows {
            let avg: Vec<(u32, f32)> = row
                .iter()
                .map(|(c, e)| {
                    let total = e.total + e.weight * (t + 1 - e.stamp.max(1)) as f64;
                    (*c, (total / t as f64) as f32)
                })
                .filter(|(_, v)| *v != 0.0)
                .collect();
            if !avg.is_empty() {
                w.rows.insert(*key, avg);
            }
        }
        w
    }
}

/// Bookkeeping stored with a model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs: usize,
    pub best_epoch: usize,
    /// Validation F per epoch, when a validation set was given.
    pub epoch_scores: Vec<f64>,
    /// Training mistakes per epoch, over all classifiers.
    #[serde(default)]
    pub epoch_mistakes: Vec<usize>,
    /// Sentences skipped because the oracle failed on them.
    pub skipped: usize,
    pub sentences: usize,
    /// Models this one was fine-tuned from, oldest first.
    pub lineage: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub format: String,
    pub feature_version: u32,
    pub framework: String,
    /// Whether the framework-id feature is used.
    pub multitask: bool,
    pub profile: FrameworkProfile,
    pub transitions: Weights,
    pub labels: Option<Weights>,
    pub properties: Option<Weights>,
    pub attributes: Option<Weights>,
    pub meta: TrainMeta,
}

impl Model {
    pub fn new(profile: FrameworkProfile) -> Self {
        Model {
            format: MODEL_FORMAT.into(),
            feature_version: FEATURE_VERSION,
            framework: profile.framework.clone(),
            multitask: false,
            transitions: Weights::default(),
            labels: profile.allows_node_labels.then(Weights::default),
            properties: profile.allows_node_properties.then(Weights::default),
            attributes: profile.allows_edge_attributes.then(Weights::default),
            profile,
            meta: TrainMeta::default(),
        }
    }

    /// Deterministic JSON encoding.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut model: Model = serde_json::from_str(text).map_err(|e| Error::Model(e.to_string()))?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Model(format!("not a model file (format {:?})", model.format)));
        }
        if model.feature_version != FEATURE_VERSION {
            return Err(Error::Model(format!(
                "feature version {} unsupported (expected {FEATURE_VERSION})",
                model.feature_version
            )));
        }
        for w in [
            Some(&mut model.transitions),
            model.labels.as_mut(),
            model.properties.as_mut(),
            model.attributes.as_mut(),
        ]
        .into_iter()
        .flatten()
        {
            w.reindex();
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::profile_for;

    fn feats(keys: &[u64]) -> Vec<Hashed> {
        keys.iter().map(|k| (*k, 1.0)).collect()
    }

    #[test]
    fn zero_weights_pick_smallest() {
        let w = Weights::default();
        assert_eq!(w.best(&feats(&[1, 2]), &["SWAP", "REDUCE", "SHIFT"]), Some("REDUCE"));
    }

    #[test]
    fn learns_separable_problem() {
        let mut p = Perceptron::default();
        let data = [(vec![1u64], "A"), (vec![2u64], "B")];
        for _ in 0..5 {
            for (f, g) in &data {
                p.learn(&feats(f), &["A", "B"], g);
            }
        }
        let w = p.averaged();
        assert_eq!(w.best(&feats(&[1]), &["A", "B"]), Some("A"));
        assert_eq!(w.best(&feats(&[2]), &["A", "B"]), Some("B"));
    }

    #[test]
    fn model_json_round_trip() {
        let mut p = Perceptron::default();
        p.learn(&feats(&[7]), &["X", "Y"], "Y");
        let mut m = Model::new(profile_for("ucca").unwrap());
        m.transitions = p.averaged();
        let text = m.to_json();
        let back = Model::from_json(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.transitions.best(&feats(&[7]), &["X", "Y"]), Some("Y"));
        assert!(back.labels.is_none());
    }

    #[test]
    fn rejects_foreign_file() {
        assert!(Model::from_json("{}").is_err());
    }
}
