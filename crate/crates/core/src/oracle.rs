//! Generate-and-test oracle, independent of the backbone and the solver.
//!
//! Given a dependency tree, enumerate every linearization the grammar
//! licenses by direct construction: choose a positional head for each word
//! (any ancestor reachable over its dependency's float path), a slot of
//! that head's domain sequence (matching a required target field), and an
//! order within every slot consistent with its cardinality, then keep the
//! results whose domain structure passes the precedence predicates. Only
//! the grammar model and the ordering checks are shared with the parsing
//! pipeline, so agreement between the two is a genuine cross-check.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::chart::ParseError;
use crate::grammar::{Cardinality, Grammar, Optionality};
use crate::order::{check_float_licensing, check_precedence, DepTree, DomainNode, DomainTree, Element, Word};
use crate::pipeline::Engine;

pub const DEFAULT_BOUND: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearization {
    pub tokens: Vec<usize>,
    pub surfaces: Vec<String>,
    /// A domain structure licensing this order.
    pub witness: DomainTree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    BoundExceeded { size: usize, bound: usize },
    MissingEntry { surface: String },
    MissingDomainSpec { class: String },
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BoundExceeded { size, bound } => {
                write!(f, "{} words exceed the oracle bound of {}", size, bound)
            }
            OracleError::MissingEntry { surface } => {
                write!(f, "no lexical entry for '{}'", surface)
            }
            OracleError::MissingDomainSpec { class } => {
                write!(f, "class '{}' has no domain specification", class)
            }
        }
    }
}

impl core::error::Error for OracleError {}

/// All word orders licensed for a dependency tree, deduplicated by surface
/// sequence, sorted.
pub fn enumerate_linearizations(
    dep: &DepTree,
    g: &Grammar,
    bound: usize,
) -> Result<Vec<Linearization>, OracleError> {
    if dep.words.len() > bound {
        return Err(OracleError::BoundExceeded {
            size: dep.words.len(),
            bound,
        });
    }
    for w in dep.words.values() {
        if g.entry(&w.surface, &w.class).is_none() {
            return Err(OracleError::MissingEntry {
                surface: w.surface.clone(),
            });
        }
        if g.domain_spec(&w.class).is_none() {
            return Err(OracleError::MissingDomainSpec {
                class: w.class.clone(),
            });
        }
    }
    let non_roots: Vec<usize> = dep
        .words
        .keys()
        .copied()
        .filter(|&t| t != dep.root)
        .collect();
    // Placement choices per word: (positional head, slot index).
    let mut choices: Vec<Vec<(usize, usize)>> = Vec::new();
    for &m in &non_roots {
        let Some((d, direct_head)) = dep.head_of(m) else {
            return Ok(Vec::new());
        };
        let spec = match g.path_spec(d) {
            Some(s) => s,
            None => return Ok(Vec::new()),
        };
        let mut options = Vec::new();
        // Ancestors of m (starting at the direct head), with the label path
        // from each ancestor down to the direct head.
        let mut chain = alloc::vec![(direct_head, Vec::new())];
        {
            let mut labels: Vec<String> = Vec::new();
            let mut cur = direct_head;
            while let Some((dd, hh)) = dep.head_of(cur) {
                labels.insert(0, dd.to_string());
                chain.push((hh, labels.clone()));
                cur = hh;
            }
        }
        for (p, labels) in chain {
            if !spec.float_path.matches(&labels) {
                continue;
            }
            let p_class = &dep.words[&p].class;
            let Some(p_spec) = g.domain_spec(p_class) else {
                continue;
            };
            for (si, slot) in p_spec.slots.iter().enumerate() {
                if slot.cardinality == Cardinality::Empty {
                    continue;
                }
                if let Some(required) = &spec.target_field {
                    if slot.field.as_deref() != Some(required.as_str()) {
                        continue;
                    }
                }
                options.push((p, si));
            }
        }
        if options.is_empty() {
            return Ok(Vec::new());
        }
        choices.push(options);
    }

    let mut by_sequence: BTreeMap<Vec<usize>, Linearization> = BTreeMap::new();
    let mut assignment: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    assign(
        dep,
        g,
        &non_roots,
        &choices,
        0,
        &mut assignment,
        &mut by_sequence,
    );
    let mut out: Vec<Linearization> = by_sequence.into_values().collect();
    out.sort_by(|a, b| (&a.surfaces, &a.tokens).cmp(&(&b.surfaces, &b.tokens)));
    Ok(out)
}

fn assign(
    dep: &DepTree,
    g: &Grammar,
    non_roots: &[usize],
    choices: &[Vec<(usize, usize)>],
    idx: usize,
    assignment: &mut BTreeMap<usize, (usize, usize)>,
    out: &mut BTreeMap<Vec<usize>, Linearization>,
) {
    if idx == non_roots.len() {
        realize(dep, g, assignment, out);
        return;
    }
    for &choice in &choices[idx] {
        assignment.insert(non_roots[idx], choice);
        assign(dep, g, non_roots, choices, idx + 1, assignment, out);
        assignment.remove(&non_roots[idx]);
    }
}

/// Check cardinalities, enumerate orders, filter by precedence.
fn realize(
    dep: &DepTree,
    g: &Grammar,
    assignment: &BTreeMap<usize, (usize, usize)>,
    out: &mut BTreeMap<Vec<usize>, Linearization>,
) {
    // Slot fills: (head token, slot index) -> modifiers in token order.
    let mut fills: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (&m, &(p, si)) in assignment {
        fills.entry((p, si)).or_default().push(m);
    }
    for (&t, word) in &dep.words {
        let Some(spec) = g.domain_spec(&word.class) else {
            return;
        };
        for (si, slot) in spec.slots.iter().enumerate() {
            let n = fills.get(&(t, si)).map(|v| v.len()).unwrap_or(0);
            if !slot.cardinality.admits(n) {
                return;
            }
        }
    }
    for (tokens, block) in word_blocks(dep.root, dep, g, &fills) {
        let root = if block.len() == 1 {
            block.into_iter().next().unwrap()
        } else {
            DomainNode {
                class: None,
                slot: None,
                field: None,
                owner: None,
                elements: block.into_iter().map(Element::Domain).collect(),
            }
        };
        let tree = DomainTree { root };
        if !check_precedence(&tree, dep, g).is_empty() {
            continue;
        }
        debug_assert!(check_float_licensing(&tree, dep, g).is_empty());
        let surfaces = tokens
            .iter()
            .map(|t| dep.words[t].surface.clone())
            .collect();
        out.entry(tokens.clone()).or_insert(Linearization {
            tokens,
            surfaces,
            witness: tree,
        });
    }
}

/// Every realization of a word's domain sequence: the covered token order
/// and one DomainNode per slot.
fn word_blocks(
    token: usize,
    dep: &DepTree,
    g: &Grammar,
    fills: &BTreeMap<(usize, usize), Vec<usize>>,
) -> Vec<(Vec<usize>, Vec<DomainNode>)> {
    let word = &dep.words[&token];
    let spec = g.domain_spec(&word.class).expect("checked upfront");
    let mut results: Vec<(Vec<usize>, Vec<DomainNode>)> = alloc::vec![(Vec::new(), Vec::new())];
    for (si, slot) in spec.slots.iter().enumerate() {
        let members: Vec<usize> = fills.get(&(token, si)).cloned().unwrap_or_default();
        // Each member contributes its own block alternatives.
        let mut member_blocks: Vec<Vec<(usize, Vec<usize>, Vec<DomainNode>)>> = Vec::new();
        for &m in &members {
            let blocks = word_blocks(m, dep, g, fills);
            member_blocks.push(
                blocks
                    .into_iter()
                    .map(|(seq, doms)| (m, seq, doms))
                    .collect(),
            );
        }
        let mut combos: Vec<Vec<(usize, Vec<usize>, Vec<DomainNode>)>> = alloc::vec![Vec::new()];
        for options in &member_blocks {
            let mut next = Vec::new();
            for combo in &combos {
                for option in options {
                    let mut c = combo.clone();
                    c.push(option.clone());
                    next.push(c);
                }
            }
            combos = next;
        }
        let mut slot_variants: Vec<(Vec<usize>, DomainNode)> = Vec::new();
        for combo in combos {
            for order in permutations(&combo) {
                let self_positions: Vec<Option<usize>> = if !slot.holds_self {
                    alloc::vec![None]
                } else if slot.cardinality == Cardinality::ZeroOrMore {
                    (0..=order.len()).map(Some).collect()
                } else {
                    // Bounded cardinalities place the elements before the
                    // word, matching the compiled rule shapes.
                    alloc::vec![Some(order.len())]
                };
                for self_pos in self_positions {
                    let mut seq = Vec::new();
                    let mut elements = Vec::new();
                    for (i, (_, mseq, mdoms)) in order.iter().enumerate() {
                        if self_pos == Some(i) {
                            seq.push(token);
                            elements.push(Element::Word(word_of(dep, token)));
                        }
                        seq.extend(mseq.iter().copied());
                        for d in mdoms {
                            elements.push(Element::Domain(d.clone()));
                        }
                    }
                    if self_pos == Some(order.len()) {
                        seq.push(token);
                        elements.push(Element::Word(word_of(dep, token)));
                    }
                    let node = DomainNode {
                        class: Some(word.class.clone()),
                        slot: Some(slot.name.clone()),
                        field: slot.field.clone(),
                        owner: Some(token),
                        elements,
                    };
                    slot_variants.push((seq, node));
                }
            }
        }
        let mut next = Vec::new();
        for (seq, doms) in &results {
            for (sseq, snode) in &slot_variants {
                let mut seq = seq.clone();
                seq.extend(sseq.iter().copied());
                let mut doms = doms.clone();
                doms.push(snode.clone());
                next.push((seq, doms));
            }
        }
        results = next;
    }
    results
}

fn word_of(dep: &DepTree, token: usize) -> Word {
    dep.words[&token].clone()
}

fn permutations<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    if items.is_empty() {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest: Vec<T> = items.to_vec();
        let item = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, item.clone());
            out.push(tail);
        }
    }
    out
}

// Cross validation -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossReport {
    pub parser: BTreeSet<Vec<String>>,
    pub oracle: BTreeSet<Vec<String>>,
}

impl CrossReport {
    pub fn agree(&self) -> bool {
        self.parser == self.oracle
    }

    pub fn only_parser(&self) -> Vec<Vec<String>> {
        self.parser.difference(&self.oracle).cloned().collect()
    }

    pub fn only_oracle(&self) -> Vec<Vec<String>> {
        self.oracle.difference(&self.parser).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossError {
    Oracle(OracleError),
    Parse(ParseError),
    BadGrammar,
}

impl fmt::Display for CrossError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrossError::Oracle(e) => write!(f, "{}", e),
            CrossError::Parse(e) => write!(f, "{}", e),
            CrossError::BadGrammar => write!(f, "grammar does not compile"),
        }
    }
}

impl core::error::Error for CrossError {}

/// Parse every permutation of a word multiset and compare the accepted set
/// with the union of oracle linearizations over every dependency tree the
/// valencies allow.
pub fn cross_validate(words: &[String], g: &Grammar, bound: usize) -> Result<CrossReport, CrossError> {
    if words.len() > bound {
        return Err(CrossError::Oracle(OracleError::BoundExceeded {
            size: words.len(),
            bound,
        }));
    }
    for w in words {
        if g.entries_for(w).is_empty() {
            return Err(CrossError::Oracle(OracleError::MissingEntry {
                surface: w.clone(),
            }));
        }
    }
    let engine = Engine::new(g).map_err(|_| CrossError::BadGrammar)?;

    let mut parser = BTreeSet::new();
    let mut sorted: Vec<String> = words.to_vec();
    sorted.sort();
    for perm in multiset_permutations(&sorted) {
        let accepted = !engine
            .analyses_of_tokens(&perm)
            .map_err(CrossError::Parse)?
            .is_empty();
        if accepted {
            parser.insert(perm);
        }
    }

    let mut oracle = BTreeSet::new();
    for tree in dependency_trees(&sorted, g) {
        let linearizations =
            enumerate_linearizations(&tree, g, bound).map_err(CrossError::Oracle)?;
        for lin in linearizations {
            oracle.insert(lin.surfaces);
        }
    }
    Ok(CrossReport { parser, oracle })
}

/// Unique permutations of a sorted multiset.
fn multiset_permutations(sorted: &[String]) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    let mut pool: Vec<(String, usize)> = Vec::new();
    for w in sorted {
        match pool.iter_mut().find(|(s, _)| s == w) {
            Some((_, n)) => *n += 1,
            None => pool.push((w.clone(), 1)),
        }
    }
    fn rec(
        pool: &mut Vec<(String, usize)>,
        current: &mut Vec<String>,
        len: usize,
        out: &mut Vec<Vec<String>>,
    ) {
        if current.len() == len {
            out.push(current.clone());
            return;
        }
        for i in 0..pool.len() {
            if pool[i].1 == 0 {
                continue;
            }
            pool[i].1 -= 1;
            current.push(pool[i].0.clone());
            rec(pool, current, len, out);
            current.pop();
            pool[i].1 += 1;
        }
    }
    let len = sorted.len();
    rec(&mut pool, &mut current, len, &mut out);
    out
}

/// Every dependency tree the words' valencies allow: one word of a root
/// class governs the rest through matching valency slots, each slot filled
/// at most once, required slots exactly once, and the words' feature
/// requirements consistent along the arcs.
fn dependency_trees(words: &[String], g: &Grammar) -> Vec<DepTree> {
    let n = words.len();
    // Entry (class) choice per token.
    let mut entry_options: Vec<Vec<&crate::grammar::LexicalEntry>> = Vec::new();
    for w in words {
        entry_options.push(g.entries_for(w));
    }
    let mut trees = Vec::new();
    let mut chosen: Vec<usize> = alloc::vec![0; n];
    entry_rec(words, g, &entry_options, 0, &mut chosen, &mut trees);
    trees
}

fn entry_rec(
    words: &[String],
    g: &Grammar,
    options: &[Vec<&crate::grammar::LexicalEntry>],
    idx: usize,
    chosen: &mut Vec<usize>,
    trees: &mut Vec<DepTree>,
) {
    if idx == words.len() {
        head_assignments(words, g, options, chosen, trees);
        return;
    }
    for i in 0..options[idx].len() {
        chosen[idx] = i;
        entry_rec(words, g, options, idx + 1, chosen, trees);
    }
}

fn head_assignments(
    words: &[String],
    g: &Grammar,
    options: &[Vec<&crate::grammar::LexicalEntry>],
    chosen: &[usize],
    trees: &mut Vec<DepTree>,
) {
    let n = words.len();
    let entries: Vec<&crate::grammar::LexicalEntry> =
        (0..n).map(|i| options[i][chosen[i]]).collect();
    for root in 0..n {
        if !g.roots.contains(&entries[root].class) {
            continue;
        }
        // Candidates per non-root token: (head, dep).
        let mut cand: Vec<(usize, Vec<(usize, String)>)> = Vec::new();
        let mut dead = false;
        for m in 0..n {
            if m == root {
                continue;
            }
            let mut list = Vec::new();
            for h in 0..n {
                if h == m {
                    continue;
                }
                for slot in &entries[h].valency {
                    if slot.mod_class == entries[m].class {
                        list.push((h, slot.dep.clone()));
                    }
                }
            }
            if list.is_empty() {
                dead = true;
                break;
            }
            cand.push((m, list));
        }
        if dead {
            continue;
        }
        let mut arcs: BTreeMap<usize, (usize, String)> = BTreeMap::new();
        arc_rec(words, &entries, root, &cand, 0, &mut arcs, trees);
    }
}

fn arc_rec(
    words: &[String],
    entries: &[&crate::grammar::LexicalEntry],
    root: usize,
    cand: &[(usize, Vec<(usize, String)>)],
    idx: usize,
    arcs: &mut BTreeMap<usize, (usize, String)>,
    trees: &mut Vec<DepTree>,
) {
    if idx == cand.len() {
        if let Some(tree) = finish_tree(words, entries, root, arcs) {
            trees.push(tree);
        }
        return;
    }
    let (m, options) = &cand[idx];
    for (h, dep) in options {
        // Each slot is filled at most once.
        if arcs.values().any(|(hh, dd)| hh == h && dd == dep) {
            continue;
        }
        arcs.insert(*m, (*h, dep.clone()));
        arc_rec(words, entries, root, cand, idx + 1, arcs, trees);
        arcs.remove(m);
    }
}

fn finish_tree(
    words: &[String],
    entries: &[&crate::grammar::LexicalEntry],
    root: usize,
    arcs: &BTreeMap<usize, (usize, String)>,
) -> Option<DepTree> {
    let n = words.len();
    // Connectivity: every token reaches the root.
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0;
        while cur != root {
            cur = arcs.get(&cur)?.0;
            steps += 1;
            if steps > n {
                return None;
            }
        }
    }
    // Required slots filled; optional slots with feature requirements too.
    for h in 0..n {
        for slot in &entries[h].valency {
            let filled = arcs.values().any(|(hh, dd)| *hh == h && dd == &slot.dep);
            let feature_forced = entries[h]
                .features
                .iter()
                .any(|(path, _)| path.first() == Some(&slot.dep));
            match slot.optionality {
                Optionality::Req => {
                    if !filled {
                        return None;
                    }
                }
                Optionality::Opt => {
                    if feature_forced && !filled {
                        return None;
                    }
                }
            }
        }
    }
    // Feature consistency along the arcs, to a fixpoint.
    let mut eff: Vec<BTreeMap<Vec<String>, String>> = Vec::new();
    for e in entries {
        let mut map = BTreeMap::new();
        for (path, atom) in &e.features {
            if let Some(prev) = map.insert(path.clone(), atom.clone()) {
                if prev != *atom {
                    return None;
                }
            }
        }
        eff.push(map);
    }
    for _ in 0..16 {
        let mut changed = false;
        for (m, (h, dep)) in arcs {
            let pushes: Vec<(Vec<String>, String)> = eff[*h]
                .iter()
                .filter(|(path, _)| path.first() == Some(dep) && path.len() > 1)
                .map(|(path, atom)| (path[1..].to_vec(), atom.clone()))
                .collect();
            for (rest, atom) in pushes {
                match eff[*m].get(&rest) {
                    Some(existing) if *existing != atom => return None,
                    Some(_) => {}
                    None => {
                        eff[*m].insert(rest, atom);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut tree = DepTree {
        root,
        words: BTreeMap::new(),
        edges: Vec::new(),
    };
    for t in 0..n {
        tree.words.insert(
            t,
            Word {
                token: t,
                surface: words[t].clone(),
                lexeme: entries[t].lexeme.clone(),
                class: entries[t].class.clone(),
            },
        );
    }
    for (m, (h, dep)) in arcs {
        tree.edges.push(crate::order::DepEdge {
            head: *h,
            dep: dep.clone(),
            modifier: *m,
        });
    }
    Some(tree)
}
