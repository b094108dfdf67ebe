//! Transition-based parsing of sentences into meaning-representation graphs.
//!
//! The crate covers the whole pipeline around a uniform DAG transition system:
//!
//! * [`graph`]: the MRP graph data model, JSON-lines I/O, validation and
//!   cycle analysis.
//! * [`companion`]: morpho-syntactic companion data and CoNLL-U output.
//! * [`irep`]: the intermediate representation with a virtual root, virtual
//!   terminals and label placeholders.
//! * [`transition`]: parser states and the eleven transitions.
//! * [`oracle`]: gold transition sequences for training.
//! * [`constraints`]: per-framework profiles that mask transitions.
//! * [`classifier`]: features, an averaged perceptron and the greedy parser.
//! * [`evaluator`]: MRP precision, recall and F-score.

pub mod classifier;
pub mod cli;
pub mod companion;
pub mod constraints;
pub mod error;
pub mod evaluator;
pub mod graph;
pub mod irep;
pub mod oracle;
pub mod synth;
pub mod transition;

pub use crate::error::{Error, Result};
pub use crate::graph::{Anchor, Edge, Graph, Node};
