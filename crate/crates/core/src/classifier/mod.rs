//! Feature extraction, the averaged perceptron and the greedy parser.
//!
//! The transition classifier scores structural transitions with their edge
//! labels, and one class per payload kind (Label, Property, Attribute);
//! separate payload classifiers then choose among the values the profile
//! vocabulary allows.

pub mod features;
pub mod model;
pub mod parser;

pub use features::{extract_features, head_terminal, FeatureVector};
pub use model::{Model, TrainMeta, Weights};
pub use parser::{
    evaluate_model, parse, parse_corpus, parse_corpus_with_budget, parse_with_budget, predict, step_budget, train, Parsed,
    TrainConfig,
};
