use std::io;

use thiserror::Error;

/// Errors raised by the parser toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: malformed JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("graph {graph_id}: {message}")]
    Validation { graph_id: String, message: String },

    #[error("companion node {node}: {message}")]
    Companion { node: String, message: String },

    #[error("CoNLL-U line {line}: {message}")]
    Conllu { line: usize, message: String },

    #[error("conversion failed: {0}")]
    Conversion(String),

    #[error("illegal transition: {0}")]
    Illegal(String),

    #[error("transition {index} is illegal: {reason}")]
    Replay { index: usize, reason: String },

    #[error("oracle stuck: {0}")]
    Oracle(String),

    #[error("unknown framework: {0}")]
    UnknownFramework(String),

    #[error("malformed transition: {0}")]
    TransitionFormat(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("no training data")]
    NoTrainingData,

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("profile configuration: {0}")]
    Profile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
