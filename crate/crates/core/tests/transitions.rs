//! One case per transition, checking its exact effect, and one per
//! precondition, checking the refusal and its reason.
//!
//! Also compiled into the acceptance runner, so cases are plain functions.

#![allow(dead_code)]

use tupa_mrp::transition::{NodeKind, ParserState, Transition, ROOT};

fn state(n: usize, seq: &[Transition]) -> ParserState {
    let mut s = ParserState::new(n);
    for t in seq {
        s.apply_mut(t).unwrap_or_else(|e| panic!("setup {t}: {e}"));
    }
    s
}

fn stack(s: &ParserState) -> Vec<usize> {
    s.stack().to_vec()
}

fn buffer(s: &ParserState) -> Vec<usize> {
    s.buffer().iter().copied().collect()
}

fn edges(s: &ParserState) -> Vec<(usize, usize, String)> {
    s.edges().iter().map(|e| (e.source, e.target, e.label.clone())).collect()
}

fn e(source: usize, target: usize, label: &str) -> (usize, usize, String) {
    (source, target, label.to_owned())
}

/// Two tokens (refs 1, 2) with two inner nodes: 3 over token 1 and 4 over
/// token 2. Stack [root, 3, 4], buffer empty.
fn two_units() -> ParserState {
    state(
        2,
        &[
            Transition::shift(),
            Transition::node("A"),
            Transition::reduce(),
            Transition::shift(),
            Transition::shift(),
            Transition::node("B"),
            Transition::reduce(),
            Transition::shift(),
        ],
    )
}

/// Applies `t` and checks the count law: one history entry more, and node
/// count grows only for Node and Child.
fn apply(before: &ParserState, t: Transition) -> ParserState {
    let after = before.apply(&t).unwrap_or_else(|e| panic!("{t}: {e}"));
    assert_eq!(after.history().len(), before.history().len() + 1);
    assert_eq!(after.history().last(), Some(&t));
    let grew = after.nodes().len() - before.nodes().len();
    assert_eq!(grew, usize::from(matches!(t.to_string().split('\t').next(), Some("NODE" | "CHILD"))));
    after
}

fn refused(s: &ParserState, t: Transition, reason: &str) {
    match s.check(&t) {
        Err(r) => assert_eq!(r.0, reason, "{t}"),
        Ok(()) => panic!("{t} accepted"),
    }
    assert!(!s.is_legal(&t));
    assert!(s.apply(&t).is_err());
}

pub fn shift_moves_buffer_head_to_stack() {
    let s = apply(&ParserState::new(2), Transition::shift());
    assert_eq!(stack(&s), [ROOT, 1]);
    assert_eq!(buffer(&s), [2]);
    assert!(s.edges().is_empty());
}

pub fn reduce_pops_stack() {
    let before = state(1, &[Transition::shift()]);
    let s = apply(&before, Transition::reduce());
    assert_eq!(stack(&s), [ROOT]);
    assert!(buffer(&s).is_empty());
    assert_eq!(s.nodes().len(), 2);
}

pub fn node_creates_parent_at_buffer_head() {
    let before = state(2, &[Transition::shift()]);
    let s = apply(&before, Transition::node("time"));
    assert_eq!(stack(&s), [ROOT, 1]);
    assert_eq!(buffer(&s), [3, 2]);
    assert_eq!(edges(&s), [e(3, 1, "time")]);
    assert_eq!(s.nodes()[3].kind, NodeKind::Inner);
    assert_eq!(s.index_of(3), 3);
}

pub fn child_creates_child_at_buffer_head() {
    let before = state(1, &[Transition::shift(), Transition::node("A"), Transition::reduce(), Transition::shift()]);
    let s = apply(&before, Transition::child("D"));
    assert_eq!(stack(&s), [ROOT, 2]);
    assert_eq!(buffer(&s), [3]);
    assert_eq!(edges(&s), [e(2, 1, "A"), e(2, 3, "D")]);
}

pub fn label_sets_stack_top_label() {
    let before = state(1, &[Transition::shift(), Transition::node("A"), Transition::reduce(), Transition::shift()]);
    let s = apply(&before, Transition::label("after"));
    assert_eq!(s.node(2).label.as_deref(), Some("after"));
    assert_eq!(stack(&s), stack(&before));
    assert_eq!(buffer(&s), buffer(&before));
}

pub fn property_adds_pair_to_stack_top() {
    let before = state(1, &[Transition::shift(), Transition::node("A"), Transition::reduce(), Transition::shift()]);
    let s = apply(&before, Transition::property("tense", "past"));
    let s = apply(&s, Transition::property("op", "a=b"));
    let props: Vec<(&str, &str)> = s.node(2).properties.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
    assert_eq!(props, [("tense", "past"), ("op", "a=b")]);
    assert_eq!(stack(&s), stack(&before));
}

pub fn left_edge_points_from_top_to_second() {
    let before = two_units();
    let s = apply(&before, Transition::left_edge("ARG0"));
    assert_eq!(edges(&s).last(), Some(&e(4, 3, "ARG0")));
    assert_eq!(stack(&s), [ROOT, 3, 4]);
    assert_eq!(s.latest_edge().map(|e| (e.source, e.target)), Some((4, 3)));
}

pub fn right_edge_points_from_second_to_top() {
    let before = two_units();
    let s = apply(&before, Transition::right_edge("ARG1"));
    assert_eq!(edges(&s).last(), Some(&e(3, 4, "ARG1")));
    assert_eq!(stack(&s), [ROOT, 3, 4]);
}

pub fn attribute_decorates_latest_edge() {
    let before = two_units().apply(&Transition::right_edge("A")).unwrap();
    let s = apply(&before, Transition::attribute("remote", "true"));
    let last = s.edges().last().unwrap();
    assert_eq!((last.source, last.target), (3, 4));
    assert_eq!(last.attributes.get("remote").map(String::as_str), Some("true"));
    assert!(s.edges()[..s.edges().len() - 1].iter().all(|e| e.attributes.is_empty()));
}

pub fn swap_moves_second_to_buffer() {
    let before = two_units();
    let s = apply(&before, Transition::swap());
    assert_eq!(stack(&s), [ROOT, 4]);
    assert_eq!(buffer(&s), [3]);
    assert_eq!(edges(&s), edges(&before));
}

pub fn finish_ends_the_parse() {
    let s = apply(&ParserState::new(0), Transition::finish());
    assert!(s.is_terminal());
    assert!(s.apply(&Transition::shift()).is_err());
    assert!(s.apply(&Transition::finish()).is_err());
}

pub fn shift_needs_buffer() {
    refused(&ParserState::new(0), Transition::shift(), "empty buffer");
}

pub fn root_cannot_be_reduced_or_decorated() {
    let s = ParserState::new(1);
    refused(&s, Transition::reduce(), "x is root");
    refused(&s, Transition::node("A"), "x is root");
    refused(&s, Transition::label("L"), "x is root");
    refused(&s, Transition::property("a", "b"), "x is root");
}

pub fn terminals_take_no_children_or_decorations() {
    let s = state(1, &[Transition::shift()]);
    refused(&s, Transition::child("A"), "x is terminal");
    refused(&s, Transition::label("L"), "x is terminal");
    refused(&s, Transition::property("a", "b"), "x is terminal");
}

pub fn edges_need_non_terminal_source() {
    let s = state(2, &[Transition::shift(), Transition::shift()]);
    refused(&s, Transition::left_edge("A"), "x is terminal");
    refused(&s, Transition::right_edge("A"), "x is terminal");
}

pub fn edges_never_enter_root() {
    let s = state(1, &[Transition::shift(), Transition::node("A"), Transition::reduce(), Transition::shift()]);
    refused(&s, Transition::left_edge("A"), "y is root");
    let s = ParserState::new(0);
    refused(&s, Transition::right_edge("A"), "stack has fewer than two items");
}

pub fn edges_never_close_a_cycle() {
    // 3 -> 4 exists, so 4 -> 3 would close a cycle.
    let s = two_units().apply(&Transition::right_edge("A")).unwrap();
    refused(&s, Transition::left_edge("B"), "directed path from y to x");
    let s = two_units().apply(&Transition::left_edge("A")).unwrap();
    refused(&s, Transition::right_edge("B"), "directed path from y to x");
}

pub fn attribute_needs_an_edge_between_inner_nodes() {
    refused(&ParserState::new(1), Transition::attribute("a", "b"), "no edge to attribute");
    let s = state(1, &[Transition::shift(), Transition::node("A")]);
    refused(&s, Transition::attribute("a", "b"), "y is terminal");
}

pub fn swap_needs_index_order() {
    let s = two_units().apply(&Transition::swap()).unwrap().apply(&Transition::shift()).unwrap();
    // Stack [root, 4, 3]: i(4) > i(3).
    refused(&s, Transition::swap(), "swap index order");
    refused(&state(1, &[Transition::shift()]), Transition::swap(), "x is root");
}

pub fn finish_needs_empty_buffer_and_bare_root() {
    refused(
        &ParserState::new(1),
        Transition::finish(),
        "finish requires stack [root] and an empty buffer",
    );
    refused(
        &state(1, &[Transition::shift()]),
        Transition::finish(),
        "finish requires stack [root] and an empty buffer",
    );
}

pub fn label_only_once() {
    let s = state(
        1,
        &[
            Transition::shift(),
            Transition::node("A"),
            Transition::reduce(),
            Transition::shift(),
            Transition::label("x"),
        ],
    );
    refused(&s, Transition::label("y"), "node already labeled");
}

pub type Case = (&'static str, fn());

pub const POSITIVE: [Case; 11] = [
    ("shift", shift_moves_buffer_head_to_stack),
    ("reduce", reduce_pops_stack),
    ("node", node_creates_parent_at_buffer_head),
    ("child", child_creates_child_at_buffer_head),
    ("label", label_sets_stack_top_label),
    ("property", property_adds_pair_to_stack_top),
    ("left-edge", left_edge_points_from_top_to_second),
    ("right-edge", right_edge_points_from_second_to_top),
    ("attribute", attribute_decorates_latest_edge),
    ("swap", swap_moves_second_to_buffer),
    ("finish", finish_ends_the_parse),
];

pub const NEGATIVE: [Case; 10] = [
    ("shift on empty buffer", shift_needs_buffer),
    ("root as x", root_cannot_be_reduced_or_decorated),
    ("terminal as x", terminals_take_no_children_or_decorations),
    ("terminal edge source", edges_need_non_terminal_source),
    ("edge into root", edges_never_enter_root),
    ("path from y to x", edges_never_close_a_cycle),
    ("attribute without inner edge", attribute_needs_an_edge_between_inner_nodes),
    ("swap index order", swap_needs_index_order),
    ("finish too early", finish_needs_empty_buffer_and_bare_root),
    ("relabel", label_only_once),
];

#[cfg(test)]
mod cases {
    macro_rules! run {
        ($($name:ident),* $(,)?) => {
            $(#[test] fn $name() { super::$name() })*
        };
    }

    run!(
        shift_moves_buffer_head_to_stack,
        reduce_pops_stack,
        node_creates_parent_at_buffer_head,
        child_creates_child_at_buffer_head,
        label_sets_stack_top_label,
        property_adds_pair_to_stack_top,
        left_edge_points_from_top_to_second,
        right_edge_points_from_second_to_top,
        attribute_decorates_latest_edge,
        swap_moves_second_to_buffer,
        finish_ends_the_parse,
        shift_needs_buffer,
        root_cannot_be_reduced_or_decorated,
        terminals_take_no_children_or_decorations,
        edges_need_non_terminal_source,
        edges_never_enter_root,
        edges_never_close_a_cycle,
        attribute_needs_an_edge_between_inner_nodes,
        swap_needs_index_order,
        finish_needs_empty_buffer_and_bare_root,
        label_only_once,
    );
}
