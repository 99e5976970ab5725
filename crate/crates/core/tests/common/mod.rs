//! Shared helpers for the integration suites: seeded random generation of
//! acyclic attribute-value structures and of regular path expressions.

use domgram_core::fstruct::{FGraph, NodeId, Value};
use domgram_core::regpath::RegPath;
use rand::rngs::StdRng;
use rand::Rng;

pub const ATTRS: [&str; 6] = ["A", "B", "C", "D", "E", "F"];
pub const ATOMS: [&str; 3] = ["x", "y", "z"];

/// Random rooted acyclic structure, depth at most 4, at most 6 attributes
/// per node. Occasionally links back to an already finished node, which
/// produces reentrancy without cycles.
pub fn random_avm(rng: &mut StdRng) -> (FGraph, NodeId) {
    let mut graph = FGraph::new();
    let mut finished: Vec<NodeId> = Vec::new();
    let root = random_node(rng, &mut graph, 0, &mut finished);
    (graph, root)
}

fn random_node(
    rng: &mut StdRng,
    graph: &mut FGraph,
    depth: usize,
    finished: &mut Vec<NodeId>,
) -> NodeId {
    let node = graph.add_node();
    let max_arcs = if depth >= 4 { 0 } else { 4 };
    let arcs = rng.gen_range(0..=max_arcs.min(6));
    for _ in 0..arcs {
        let attr = ATTRS[rng.gen_range(0..ATTRS.len())];
        if graph.get(node, attr).is_some() {
            continue;
        }
        let value = match rng.gen_range(0..10) {
            0..=4 => Value::Atom(ATOMS[rng.gen_range(0..ATOMS.len())].to_string()),
            5 if !finished.is_empty() => {
                Value::Node(finished[rng.gen_range(0..finished.len())])
            }
            _ => Value::Node(random_node(rng, graph, depth + 1, finished)),
        };
        graph.put(node, attr, value).expect("construction is consistent");
    }
    finished.push(node);
    node
}

/// Random regular path expression over the attribute alphabet.
pub fn random_regpath(rng: &mut StdRng, depth: usize) -> RegPath {
    let choice = if depth == 0 {
        0
    } else {
        rng.gen_range(0..6)
    };
    match choice {
        0 => RegPath::Atom(ATTRS[rng.gen_range(0..ATTRS.len())].to_string()),
        1 => RegPath::Seq(
            (0..rng.gen_range(1..=3))
                .map(|_| random_regpath(rng, depth - 1))
                .collect(),
        ),
        2 => RegPath::Alt(
            (0..rng.gen_range(2..=3))
                .map(|_| random_regpath(rng, depth - 1))
                .collect(),
        ),
        3 => RegPath::Opt(Box::new(random_regpath(rng, depth - 1))),
        4 => RegPath::Star(Box::new(random_regpath(rng, depth - 1))),
        _ => RegPath::Epsilon,
    }
}

/// Brute force: every concrete path of the graph (to nodes and atoms).
pub fn all_paths(graph: &FGraph, root: NodeId) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    walk(graph, graph.resolve(root), &mut prefix, &mut out);
    out.sort();
    out
}

fn walk(graph: &FGraph, node: NodeId, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    for (attr, value) in graph.attributes(node) {
        prefix.push(attr);
        out.push(prefix.clone());
        if let Value::Node(n) = value {
            walk(graph, graph.resolve(n), prefix, out);
        }
        prefix.pop();
    }
}
