//! Machine-readable rendering of analyses.
//!
//! Schema `domgram/analysis/1`: one JSON object per analysis carrying the
//! bracketed c-structure and domain tree, the f-structure as a nested
//! object (`{"ref": n}` marks reentrant nodes, tagged with `"id"` at their
//! first occurrence), dependency triples with token indices, and the
//! resolved modifier placements.

use std::collections::BTreeMap;

use domgram_core::fstruct::{FGraph, NodeId, Value};
use domgram_core::grammar::Grammar;
use domgram_core::pipeline::Analysis;

pub fn analysis_json(sentence: &str, a: &Analysis, g: &Grammar) -> serde_json::Value {
    let deps: Vec<serde_json::Value> = a
        .dep_tree
        .edges
        .iter()
        .map(|e| {
            serde_json::json!({
                "head": e.head,
                "head_lexeme": a.dep_tree.words[&e.head].lexeme,
                "dep": e.dep,
                "modifier": e.modifier,
                "modifier_lexeme": a.dep_tree.words[&e.modifier].lexeme,
            })
        })
        .collect();
    let placements: Vec<serde_json::Value> = a
        .placements
        .iter()
        .map(|p| {
            serde_json::json!({
                "modifier": p.modifier_token,
                "anchor": p.anchor_token,
                "dep": p.dep,
                "path": p.path,
            })
        })
        .collect();
    serde_json::json!({
        "schema": "domgram/analysis/1",
        "tokens": sentence.split_whitespace().collect::<Vec<_>>(),
        "c_structure": a.c_tree.bracketed(),
        "f_structure": fstruct_json(&a.graph, a.f_root),
        "domains": a.domain_tree.bracketed(),
        "root": a.dep_tree.root,
        "dependencies": deps,
        "content_triples": a.dep_tree.content_triples(g)
            .into_iter()
            .map(|(h, d, m)| serde_json::json!([h, d, m]))
            .collect::<Vec<_>>(),
        "placements": placements,
    })
}

/// Nested-object form of an f-structure with stable ids for reentrancy.
pub fn fstruct_json(graph: &FGraph, root: NodeId) -> serde_json::Value {
    let mut ids: BTreeMap<NodeId, usize> = BTreeMap::new();
    node_json(graph, graph.resolve(root), &mut ids)
}

fn node_json(
    graph: &FGraph,
    node: NodeId,
    ids: &mut BTreeMap<NodeId, usize>,
) -> serde_json::Value {
    if let Some(&id) = ids.get(&node) {
        return serde_json::json!({ "ref": id });
    }
    let id = ids.len();
    ids.insert(node, id);
    let mut map = serde_json::Map::new();
    map.insert("id".to_string(), serde_json::json!(id));
    for (attr, value) in graph.attributes(node) {
        let v = match value {
            Value::Atom(a) => serde_json::Value::String(a),
            Value::Node(n) => node_json(graph, graph.resolve(n), ids),
        };
        map.insert(attr, v);
    }
    serde_json::Value::Object(map)
}
