//! Morpho-syntactic companion data.
//!
//! Companion graphs carry one node per token, with the form as node label (or
//! a `form` property) and `lemma`, `upos` and `xpos` properties. They convert
//! to [`TokenRow`]s, which can be written as CoNLL-U with the character span
//! kept in the MISC column as `TokenRange=from:to`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Anchor, Graph, Node};

pub const COMPANION_FRAMEWORK: &str = "companion";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenRow {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub anchor: Anchor,
}

impl TokenRow {
    pub fn new(index: usize, form: &str, lemma: &str, upos: &str, xpos: &str, anchor: Anchor) -> Self {
        TokenRow {
            index,
            form: form.to_owned(),
            lemma: lemma.to_owned(),
            upos: upos.to_owned(),
            xpos: xpos.to_owned(),
            anchor,
        }
    }
}

fn required<'a>(node: &'a Node, name: &str) -> Result<&'a str> {
    node.properties
        .get(name)
        .map(String::as_str)
        .ok_or_else(|| Error::Companion {
            node: node.id.to_string(),
            message: format!("missing {name} property"),
        })
}

/// Turns a companion graph into token rows ordered by anchor start.
pub fn companion_to_rows(graph: &Graph) -> Result<Vec<TokenRow>> {
    let mut rows = Vec::with_capacity(graph.nodes.len());
    for node in &graph.nodes {
        let form = match (node.properties.get("form"), &node.label) {
            (Some(form), _) | (None, Some(form)) => form.as_str(),
            (None, None) => {
                return Err(Error::Companion {
                    node: node.id.to_string(),
                    message: "missing form".into(),
                })
            }
        };
        let anchor = match node.anchors[..] {
            [anchor] if anchor.from < anchor.to => anchor,
            _ => {
                return Err(Error::Companion {
                    node: node.id.to_string(),
                    message: format!("expected one non-empty anchor, found {}", node.anchors.len()),
                })
            }
        };
        rows.push(TokenRow::new(
            0,
            form,
            required(node, "lemma")?,
            required(node, "upos")?,
            required(node, "xpos")?,
            anchor,
        ));
    }
    rows.sort_by_key(|r| (r.anchor.from, r.anchor.to));
    for pair in rows.windows(2) {
        if pair[0].anchor.to > pair[1].anchor.from {
            return Err(Error::Companion {
                node: graph.id.clone(),
                message: format!(
                    "overlapping token anchors {}:{} and {}:{}",
                    pair[0].anchor.from, pair[0].anchor.to, pair[1].anchor.from, pair[1].anchor.to
                ),
            });
        }
    }
    for (i, row) in rows.iter_mut().enumerate() {
        row.index = i + 1;
    }
    Ok(rows)
}

/// Builds a companion graph from rows.
pub fn rows_to_companion(id: &str, input: &str, rows: &[TokenRow]) -> Graph {
    let mut graph = Graph::new(id, COMPANION_FRAMEWORK, input);
    for (i, row) in rows.iter().enumerate() {
        graph.nodes.push(
            Node::new(i as u32)
                .with_label(row.form.clone())
                .with_property("lemma", row.lemma.clone())
                .with_property("upos", row.upos.clone())
                .with_property("xpos", row.xpos.clone())
                .with_anchor(row.anchor.from, row.anchor.to),
        );
    }
    graph
}

fn column(value: &str) -> &str {
    if value.is_empty() {
        "_"
    } else {
        value
    }
}

/// Writes one sentence block, terminated by a blank line.
pub fn write_conllu<W: Write>(mut sink: W, sent_id: Option<&str>, rows: &[TokenRow]) -> Result<()> {
    if let Some(id) = sent_id {
        writeln!(sink, "# sent_id = {id}")?;
    }
    for row in rows {
        writeln!(
            sink,
            "{}\t{}\t{}\t{}\t{}\t_\t_\t_\t_\tTokenRange={}:{}",
            row.index,
            column(&row.form),
            column(&row.lemma),
            column(&row.upos),
            column(&row.xpos),
            row.anchor.from,
            row.anchor.to
        )?;
    }
    writeln!(sink)?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConlluSentence {
    pub sent_id: Option<String>,
    pub rows: Vec<TokenRow>,
}

fn token_range(misc: &str) -> Option<Anchor> {
    misc.split('|').find_map(|field| {
        let (from, to) = field.strip_prefix("TokenRange=")?.split_once(':')?;
        Some(Anchor::new(from.parse().ok()?, to.parse().ok()?))
    })
}

/// Reads sentences written by [`write_conllu`]. Multiword-token and empty-node
/// lines are skipped.
pub fn read_conllu<R: BufRead>(reader: R) -> Result<Vec<ConlluSentence>> {
    let mut sentences = Vec::new();
    let mut current = ConlluSentence::default();
    let mut open = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.trim().is_empty() {
            sentences.push(std::mem::take(&mut current));
            open = false;
            continue;
        }
        open = true;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "sent_id" {
                    current.sent_id = Some(value.trim().to_owned());
                }
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Conllu {
                line: line_no,
                message: format!("expected 10 columns, found {}", cols.len()),
            });
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue;
        }
        let index = cols[0].parse().map_err(|_| Error::Conllu {
            line: line_no,
            message: format!("bad token index {:?}", cols[0]),
        })?;
        let anchor = token_range(cols[9]).ok_or_else(|| Error::Conllu {
            line: line_no,
            message: "missing TokenRange in MISC".into(),
        })?;
        current
            .rows
            .push(TokenRow::new(index, cols[1], cols[2], cols[3], cols[4], anchor));
    }
    if open {
        sentences.push(current);
    }
    Ok(sentences)
}
