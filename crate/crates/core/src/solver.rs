//! Annotation solver: turns a c-structure tree into f-structures.
//!
//! Every word contributes its lexical structure (CLASS, LEXEME, features);
//! head identifications glue word structures to their domain nodes. Each
//! modifier unit (a single domain child, or the spliced slot sequence of a
//! multi-slot class) must then be placed under some dependency path of its
//! anchor — the structure of the innermost enclosing domain's head word.
//! Path prefixes are resolved non-constructively: only dependency arcs that
//! already exist (through earlier placements) can be traversed, while the
//! final dependency arc itself is licensed by a valency slot of the target
//! word, whose defining CLASS equation constructs it. The search explores
//! every consistent combination of placements; inconsistent branches are
//! pruned by unification failure, and required-but-unfilled or
//! forbidden-but-present dependencies are rejected by the constraining
//! checks at the end.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::backbone::BackboneRuleSet;
use crate::chart::CNode;
use crate::fstruct::{FGraph, NodeId, Value};
use crate::grammar::{Grammar, Optionality};

/// One modifier placement in a solution: the path under which the unit was
/// unified, resolved from its anchor word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub modifier_token: usize,
    pub anchor_token: usize,
    pub dep: String,
    /// Full attribute path from the anchor structure, prefix plus final
    /// dependency.
    pub path: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub graph: FGraph,
    pub root: NodeId,
    pub root_token: usize,
    /// Word structure of each token, by token index.
    pub word_nodes: BTreeMap<usize, NodeId>,
    pub placements: Vec<Placement>,
}

struct WordAt {
    token: usize,
    surface: String,
    class: String,
}

struct Group {
    /// Structures of the unit's c-nodes; spliced slot sequences have one
    /// per slot.
    members: Vec<NodeId>,
    /// Word class of the unit's head word.
    class: String,
    head_token: usize,
    anchor: NodeId,
    field: Option<String>,
}

struct Setup {
    graph: FGraph,
    words: Vec<WordAt>,
    word_nodes: BTreeMap<usize, NodeId>,
    groups: Vec<Group>,
    root_phi: NodeId,
    root_token: usize,
}

/// Solve one c-structure tree: all f-structures consistent with its
/// annotations and the lexicon, deduplicated up to isomorphism.
pub fn solve(tree: &CNode, rs: &BackboneRuleSet, g: &Grammar) -> Vec<Solution> {
    let Some(setup) = prepare(tree, rs, g) else {
        return Vec::new();
    };
    // Cheap necessary condition: enough valency slots for each modifier
    // class among the words present.
    {
        let mut demand: BTreeMap<&str, usize> = BTreeMap::new();
        for group in &setup.groups {
            *demand.entry(group.class.as_str()).or_insert(0) += 1;
        }
        for (class, needed) in demand {
            let supply: usize = setup
                .words
                .iter()
                .filter_map(|w| g.entry(&w.surface, &w.class))
                .map(|e| e.valency.iter().filter(|s| s.mod_class == class).count())
                .sum();
            if supply < needed {
                return Vec::new();
            }
        }
    }
    let mut solver = Solver {
        g,
        words: &setup.words,
        word_nodes: &setup.word_nodes,
        root_phi: setup.root_phi,
        root_token: setup.root_token,
        groups: &setup.groups,
        visited: BTreeSet::new(),
        solutions: Vec::new(),
        seen_canon: BTreeSet::new(),
    };
    let pending: BTreeSet<usize> = (0..setup.groups.len()).collect();
    solver.search(&setup.graph, &BTreeMap::new(), &pending);
    solver.solutions
}

struct Solver<'a> {
    g: &'a Grammar,
    words: &'a [WordAt],
    word_nodes: &'a BTreeMap<usize, NodeId>,
    root_phi: NodeId,
    root_token: usize,
    groups: &'a [Group],
    visited: BTreeSet<Vec<(usize, String, Vec<String>)>>,
    solutions: Vec<Solution>,
    seen_canon: BTreeSet<String>,
}

impl<'a> Solver<'a> {
    fn search(
        &mut self,
        graph: &FGraph,
        placed: &BTreeMap<usize, (String, Vec<String>)>,
        pending: &BTreeSet<usize>,
    ) {
        let key: Vec<(usize, String, Vec<String>)> = placed
            .iter()
            .map(|(&i, (d, p))| (i, d.clone(), p.clone()))
            .collect();
        if !self.visited.insert(key) {
            return;
        }
        if pending.is_empty() {
            self.finalize(graph, placed);
            return;
        }
        for &gi in pending {
            let group = &self.groups[gi];
            for (dep, prefix) in self.candidates(graph, group, placed) {
                let mut next = graph.clone();
                if self.place(&mut next, group, &dep, &prefix).is_err() {
                    continue;
                }
                let mut placed2 = placed.clone();
                let mut full = prefix.clone();
                full.push(dep.clone());
                placed2.insert(gi, (dep.clone(), full));
                let mut pending2 = pending.clone();
                pending2.remove(&gi);
                self.search(&next, &placed2, &pending2);
            }
        }
    }

    /// Placement candidates for a unit: every dependency whose float path
    /// has a resolvable prefix from the anchor, ending at a word with a
    /// free valency slot of the unit's class.
    fn candidates(
        &self,
        graph: &FGraph,
        group: &Group,
        placed: &BTreeMap<usize, (String, Vec<String>)>,
    ) -> Vec<(String, Vec<String>)> {
        let used = self.used_slots(graph, placed);
        let mut out = Vec::new();
        for spec in &self.g.path_specs {
            for prefix in graph.resolve_uncertainty(group.anchor, &spec.float_path) {
                let target = match prefix_node(graph, group.anchor, &prefix) {
                    Some(t) => t,
                    None => continue,
                };
                let Some(token) = self.word_at(graph, target) else {
                    continue;
                };
                let Some(word) = self.words.iter().find(|w| w.token == token) else {
                    continue;
                };
                let Some(entry) = self.g.entry(&word.surface, &word.class) else {
                    continue;
                };
                let Some(slot) = entry.slot(&spec.dep) else {
                    continue;
                };
                if slot.mod_class != group.class {
                    continue;
                }
                if used.contains(&(target, spec.dep.clone())) {
                    continue;
                }
                out.push((spec.dep.clone(), prefix));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Token whose word structure is `node`, if any.
    fn word_at(&self, graph: &FGraph, node: NodeId) -> Option<usize> {
        let node = graph.resolve(node);
        for (&token, &wn) in self.word_nodes {
            if graph.resolve(wn) == node {
                return Some(token);
            }
        }
        None
    }

    fn used_slots(
        &self,
        graph: &FGraph,
        placed: &BTreeMap<usize, (String, Vec<String>)>,
    ) -> BTreeSet<(NodeId, String)> {
        let mut used = BTreeSet::new();
        for (&gi, (dep, full)) in placed {
            let group = &self.groups[gi];
            let prefix = &full[..full.len() - 1];
            if let Some(t) = prefix_node(graph, group.anchor, prefix) {
                used.insert((t, dep.clone()));
            }
        }
        used
    }

    fn place(
        &self,
        graph: &mut FGraph,
        group: &Group,
        dep: &str,
        prefix: &[String],
    ) -> Result<(), ()> {
        let target = prefix_node(graph, group.anchor, prefix).ok_or(())?;
        let head_node = self.word_nodes[&group.head_token];
        match graph.get(target, dep) {
            None => graph
                .put(target, dep, Value::Node(head_node))
                .map_err(|_| ())?,
            Some(Value::Node(existing)) => graph.unify(existing, head_node).map_err(|_| ())?,
            Some(Value::Atom(_)) => return Err(()),
        }
        // Defining CLASS equation from the valency schema.
        graph
            .apply_defining(
                target,
                &[dep.to_string(), "CLASS".to_string()],
                Value::Atom(group.class.clone()),
            )
            .map_err(|_| ())?;
        // All unit members share the placed structure.
        for &member in &group.members {
            graph.unify(member, head_node).map_err(|_| ())?;
        }
        if let Some(field) = &group.field {
            graph
                .apply_defining(head_node, &["FIELD".to_string()], Value::Atom(field.clone()))
                .map_err(|_| ())?;
        }
        Ok(())
    }

    fn finalize(&mut self, graph: &FGraph, placed: &BTreeMap<usize, (String, Vec<String>)>) {
        // Constraining checks, per word and valency slot.
        for w in self.words {
            let node = self.word_nodes[&w.token];
            let Some(entry) = self.g.entry(&w.surface, &w.class) else {
                return;
            };
            for slot in &entry.valency {
                let filled = graph.check_existential(
                    node,
                    &[slot.dep.clone(), "LEXEME".to_string()],
                );
                match slot.optionality {
                    Optionality::Req => {
                        if !filled {
                            return;
                        }
                    }
                    Optionality::Opt => {
                        if !filled && !graph.check_negative(node, &[slot.dep.clone()]) {
                            // The dependency path exists (e.g. built by a
                            // feature) but no word fills it.
                            return;
                        }
                    }
                }
            }
        }
        let root = graph.resolve(self.root_phi);
        let canon = graph.canonical(root);
        if !self.seen_canon.insert(canon) {
            return;
        }
        let mut placements = Vec::new();
        for (&gi, (dep, full)) in placed {
            let group = &self.groups[gi];
            let anchor_token = self
                .word_at(graph, group.anchor)
                .unwrap_or(self.root_token);
            placements.push(Placement {
                modifier_token: group.head_token,
                anchor_token,
                dep: dep.clone(),
                path: full.clone(),
            });
        }
        placements.sort_by_key(|p| p.modifier_token);
        self.solutions.push(Solution {
            graph: graph.clone(),
            root,
            root_token: self.root_token,
            word_nodes: self.word_nodes.clone(),
            placements,
        });
    }
}

fn prefix_node(graph: &FGraph, anchor: NodeId, prefix: &[String]) -> Option<NodeId> {
    if prefix.is_empty() {
        return Some(graph.resolve(anchor));
    }
    match graph.value_at(anchor, prefix) {
        Some(Value::Node(n)) => Some(n),
        _ => None,
    }
}

fn prepare(tree: &CNode, rs: &BackboneRuleSet, g: &Grammar) -> Option<Setup> {
    let mut graph = FGraph::new();
    let mut words = Vec::new();
    let mut word_nodes = BTreeMap::new();
    // Lexical structures.
    for leaf in tree.leaves() {
        let token = leaf.token_index?;
        let surface = leaf.word.as_ref()?;
        let entry = g.entry(surface, &leaf.cat)?;
        let node = graph.add_node();
        graph
            .put(node, "CLASS", Value::Atom(entry.class.clone()))
            .ok()?;
        graph
            .put(node, "LEXEME", Value::Atom(entry.lexeme.clone()))
            .ok()?;
        for (path, atom) in &entry.features {
            if graph
                .apply_defining(node, path, Value::Atom(atom.clone()))
                .is_err()
            {
                return None;
            }
        }
        words.push(WordAt {
            token,
            surface: surface.clone(),
            class: entry.class.clone(),
        });
        word_nodes.insert(token, node);
    }
    let root_token = head_token(tree)?;
    let mut groups = Vec::new();
    let root_phi = weave(tree, &mut graph, &word_nodes, rs, g, &mut groups)?;
    Some(Setup {
        graph,
        words,
        word_nodes,
        groups,
        root_phi,
        root_token,
    })
}

/// The token of the head word reached by following head children.
fn head_token(node: &CNode) -> Option<usize> {
    if let Some(i) = node.token_index {
        return Some(i);
    }
    node.children.iter().filter(|c| c.head).find_map(head_token)
}

/// Assign a structure to every c-node, unify head children with their
/// mothers, and collect modifier units.
fn weave(
    node: &CNode,
    graph: &mut FGraph,
    word_nodes: &BTreeMap<usize, NodeId>,
    rs: &BackboneRuleSet,
    g: &Grammar,
    groups: &mut Vec<Group>,
) -> Option<NodeId> {
    if let Some(i) = node.token_index {
        return Some(word_nodes[&i]);
    }
    let phi = graph.add_node();
    let mut i = 0;
    while i < node.children.len() {
        let child = &node.children[i];
        // A spliced unit spans consecutive children with the same tag.
        let unit_len = match child.splice_group {
            Some(tag) => node.children[i..]
                .iter()
                .take_while(|c| c.splice_group == Some(tag))
                .count(),
            None => 1,
        };
        let unit = &node.children[i..i + unit_len];
        let mut member_phis = Vec::new();
        for member in unit {
            member_phis.push(weave(member, graph, word_nodes, rs, g, groups)?);
        }
        if child.head {
            for &m in &member_phis {
                graph.unify(phi, m).ok()?;
            }
        } else {
            let class = rs
                .meta(&unit[0].cat)
                .and_then(|m| m.class.clone())?;
            let head = unit.iter().find_map(head_token)?;
            groups.push(Group {
                members: member_phis,
                class,
                head_token: head,
                anchor: phi,
                field: unit[0].field.clone(),
            });
        }
        i += unit_len;
    }
    Some(phi)
}
