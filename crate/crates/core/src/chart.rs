//! Chart parser for the compiled backbone.
//!
//! An Earley-style recognizer over rules whose right-hand-side positions
//! carry repetition marks. Iteration and optionality are handled by dotted
//! items directly (an item may stay on a starred position or skip an
//! optional one), so reported trees contain no repetition auxiliaries.
//! Splice nodes standing in for sequencing metacategories are dissolved
//! into their mother node when trees are unpacked.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::backbone::{BackboneRuleSet, CatKind, Rep, RhsSym, START_CATEGORY};
use crate::grammar::Grammar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    UnknownToken { token: String, position: usize },
    NoStartCategory,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::UnknownToken { token, position } => {
                write!(f, "unknown token '{}' at position {}", token, position + 1)
            }
            ParseError::NoStartCategory => write!(f, "grammar has no root classes"),
        }
    }
}

impl core::error::Error for ParseError {}

/// A node of a reported c-structure tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CNode {
    pub cat: String,
    pub span: (usize, usize),
    /// Set on preterminal nodes: index and surface of the covered token.
    pub token_index: Option<usize>,
    pub word: Option<String>,
    pub children: Vec<CNode>,
    /// Head identification from the matched rule position.
    pub head: bool,
    /// Field assigned to whatever is placed at this position.
    pub field: Option<String>,
    /// Children spliced from one metacategory occurrence share a tag; they
    /// form a single placement unit.
    pub splice_group: Option<usize>,
}

impl CNode {
    pub fn bracketed(&self) -> String {
        let mut out = String::new();
        self.bracket_rec(&mut out);
        out
    }

    fn bracket_rec(&self, out: &mut String) {
        use core::fmt::Write;
        out.push('(');
        out.push_str(&self.cat);
        if let Some(w) = &self.word {
            let _ = write!(out, " {}", w);
        }
        for child in &self.children {
            out.push(' ');
            child.bracket_rec(out);
        }
        out.push(')');
    }

    pub fn is_preterminal(&self) -> bool {
        self.token_index.is_some()
    }

    /// All preterminal descendants in surface order.
    pub fn leaves(&self) -> Vec<&CNode> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a CNode>) {
        if self.is_preterminal() {
            out.push(self);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }
}

// Internal parser tables ------------------------------------------------------

/// Parser tables compiled from a rule set; build once, parse many times.
pub struct ChartTables {
    inner: Tables,
}

impl ChartTables {
    pub fn build(rs: &BackboneRuleSet, g: &Grammar) -> ChartTables {
        ChartTables {
            inner: Tables::build(rs, g),
        }
    }
}

struct Tables {
    names: Vec<String>,
    kinds: Vec<CatKind>,
    ids: BTreeMap<String, u32>,
    rules: Vec<PRule>,
    rules_by_lhs: BTreeMap<u32, Vec<u32>>,
}

struct PRule {
    lhs: u32,
    rhs: Vec<PSlot>,
}

struct PSlot {
    alts: BTreeSet<u32>,
    rep: Rep,
    head: bool,
    field: Option<String>,
}

impl Tables {
    fn build(rs: &BackboneRuleSet, g: &Grammar) -> Tables {
        let mut t = Tables {
            names: Vec::new(),
            kinds: Vec::new(),
            ids: BTreeMap::new(),
            rules: Vec::new(),
            rules_by_lhs: BTreeMap::new(),
        };
        for (name, meta) in &rs.categories {
            t.intern(name, meta.kind);
        }
        for rule in &rs.rules {
            let lhs = t.id(&rule.lhs);
            let mut rhs = Vec::new();
            for item in &rule.rhs {
                let mut alts = BTreeSet::new();
                match &item.sym {
                    RhsSym::Cat(c) => {
                        alts.insert(t.id(c));
                    }
                    RhsSym::Domain(Some(classes)) => {
                        for class in classes {
                            alts.insert(t.id(&crate::backbone::domain_cat_name(class)));
                        }
                    }
                    RhsSym::Domain(None) => {
                        for class in &g.classes {
                            alts.insert(t.id(&crate::backbone::domain_cat_name(&class.name)));
                        }
                    }
                }
                rhs.push(PSlot {
                    alts,
                    rep: item.rep,
                    head: item.head,
                    field: item.field.clone(),
                });
            }
            let idx = t.rules.len() as u32;
            t.rules.push(PRule { lhs, rhs });
            t.rules_by_lhs.entry(lhs).or_default().push(idx);
        }
        t
    }

    fn intern(&mut self, name: &str, kind: CatKind) -> u32 {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.ids.insert(name.to_string(), id);
        id
    }

    fn id(&self, name: &str) -> u32 {
        *self
            .ids
            .get(name)
            .unwrap_or_else(|| panic!("category '{}' not interned", name))
    }

    fn kind(&self, cat: u32) -> CatKind {
        self.kinds[cat as usize]
    }
}

// Chart ------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Item {
    rule: u32,
    dot: u32,
    origin: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct NodeKey {
    cat: u32,
    start: u32,
    end: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Deriv {
    prev_dot: u32,
    prev_end: u32,
    /// Consumed constituent and the rule position that consumed it; `None`
    /// for a skipped optional or iterated position.
    child: Option<(u32, NodeKey)>,
}

struct Charts {
    items: Vec<BTreeMap<Item, BTreeSet<Deriv>>>,
    completed: BTreeMap<NodeKey, BTreeSet<u32>>,
    waiting: Vec<BTreeMap<u32, BTreeSet<Item>>>,
}

struct Run<'a> {
    tables: &'a Tables,
    charts: Charts,
    token_cats: Vec<BTreeSet<u32>>,
    n: usize,
}

impl<'a> Run<'a> {
    /// Record an item instance; returns true if it is new at that position.
    fn record(&mut self, item: Item, end: u32, deriv: Option<Deriv>) -> bool {
        let map = &mut self.charts.items[end as usize];
        let is_new = !map.contains_key(&item);
        let entry = map.entry(item).or_default();
        if let Some(d) = deriv {
            entry.insert(d);
        }
        is_new
    }

    fn process_position(&mut self, pos: usize) {
        let mut queue: Vec<Item> = self.charts.items[pos].keys().copied().collect();
        let mut seen: BTreeSet<Item> = queue.iter().copied().collect();
        while let Some(item) = queue.pop() {
            let rule = &self.tables.rules[item.rule as usize];
            if item.dot as usize == rule.rhs.len() {
                self.complete(item, pos, &mut queue, &mut seen);
                continue;
            }
            let slot = &rule.rhs[item.dot as usize];
            if matches!(slot.rep, Rep::Optional | Rep::Star) {
                let skipped = Item {
                    rule: item.rule,
                    dot: item.dot + 1,
                    origin: item.origin,
                };
                self.record(
                    skipped,
                    pos as u32,
                    Some(Deriv {
                        prev_dot: item.dot,
                        prev_end: pos as u32,
                        child: None,
                    }),
                );
                if seen.insert(skipped) {
                    queue.push(skipped);
                }
            }
            let alts: Vec<u32> = slot.alts.iter().copied().collect();
            for cat in alts {
                match self.tables.kind(cat) {
                    CatKind::Preterminal => {
                        if pos < self.n && self.token_cats[pos].contains(&cat) {
                            let node = NodeKey {
                                cat,
                                start: pos as u32,
                                end: pos as u32 + 1,
                            };
                            self.advance(item, node, pos, &mut queue, &mut seen);
                        }
                    }
                    _ => {
                        self.charts.waiting[pos].entry(cat).or_default().insert(item);
                        let rules: Vec<u32> = self
                            .tables
                            .rules_by_lhs
                            .get(&cat)
                            .cloned()
                            .unwrap_or_default();
                        for r in rules {
                            let predicted = Item {
                                rule: r,
                                dot: 0,
                                origin: pos as u32,
                            };
                            self.record(predicted, pos as u32, None);
                            if seen.insert(predicted) {
                                queue.push(predicted);
                            }
                        }
                        // The category may already have completed empty here.
                        let empty = NodeKey {
                            cat,
                            start: pos as u32,
                            end: pos as u32,
                        };
                        if self.charts.completed.contains_key(&empty) {
                            self.advance(item, empty, pos, &mut queue, &mut seen);
                        }
                    }
                }
            }
        }
    }

    fn complete(
        &mut self,
        item: Item,
        pos: usize,
        queue: &mut Vec<Item>,
        seen: &mut BTreeSet<Item>,
    ) {
        let lhs = self.tables.rules[item.rule as usize].lhs;
        let node = NodeKey {
            cat: lhs,
            start: item.origin,
            end: pos as u32,
        };
        let first = !self.charts.completed.contains_key(&node);
        self.charts
            .completed
            .entry(node)
            .or_default()
            .insert(item.rule);
        if !first {
            return;
        }
        let waiters: Vec<Item> = self.charts.waiting[item.origin as usize]
            .get(&lhs)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for waiter in waiters {
            self.advance(waiter, node, pos, queue, seen);
        }
    }

    /// Advance an item over a completed constituent. The item lives at
    /// `node.start`; the results live at `node.end`.
    fn advance(
        &mut self,
        item: Item,
        node: NodeKey,
        pos: usize,
        queue: &mut Vec<Item>,
        seen: &mut BTreeSet<Item>,
    ) {
        let slot = &self.tables.rules[item.rule as usize].rhs[item.dot as usize];
        let deriv = Deriv {
            prev_dot: item.dot,
            prev_end: node.start,
            child: Some((item.dot, node)),
        };
        // A starred position consumes constituents without moving the dot
        // and is exited only by the skip step, so every child sequence has
        // exactly one derivation. Empty constituents are not consumed by
        // stars (no progress).
        let target = match slot.rep {
            Rep::Star => {
                if node.start == node.end {
                    return;
                }
                item
            }
            Rep::One | Rep::Optional => Item {
                rule: item.rule,
                dot: item.dot + 1,
                origin: item.origin,
            },
        };
        self.record(target, node.end, Some(deriv));
        if node.end as usize == pos && seen.insert(target) {
            queue.push(target);
        }
    }
}

/// Parse a token sequence against the backbone: all complete c-structure
/// trees over the full span, at most `max_unpack` of them, in a stable
/// order. Splice nodes are dissolved and the synthetic start category is
/// unwrapped when it covers a single domain.
pub fn parse_backbone(
    tokens: &[String],
    rs: &BackboneRuleSet,
    g: &Grammar,
    max_unpack: usize,
) -> Result<Vec<CNode>, ParseError> {
    let tables = ChartTables::build(rs, g);
    parse_with_tables(tokens, &tables, g, max_unpack)
}

/// As [`parse_backbone`], against prebuilt tables.
pub fn parse_with_tables(
    tokens: &[String],
    tables: &ChartTables,
    g: &Grammar,
    max_unpack: usize,
) -> Result<Vec<CNode>, ParseError> {
    let tables = &tables.inner;
    let mut token_cats: Vec<BTreeSet<u32>> = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let entries = g.entries_for(tok);
        if entries.is_empty() {
            return Err(ParseError::UnknownToken {
                token: tok.clone(),
                position: i,
            });
        }
        let mut cats = BTreeSet::new();
        for e in entries {
            if let Some(&id) = tables.ids.get(&e.class) {
                cats.insert(id);
            }
        }
        token_cats.push(cats);
    }
    let n = tokens.len();
    let start = *tables
        .ids
        .get(START_CATEGORY)
        .ok_or(ParseError::NoStartCategory)?;

    let mut run = Run {
        tables: &tables,
        charts: Charts {
            items: (0..=n).map(|_| BTreeMap::new()).collect(),
            completed: BTreeMap::new(),
            waiting: (0..=n).map(|_| BTreeMap::new()).collect(),
        },
        token_cats,
        n,
    };
    for &r in tables.rules_by_lhs.get(&start).into_iter().flatten() {
        run.record(
            Item {
                rule: r,
                dot: 0,
                origin: 0,
            },
            0,
            None,
        );
    }
    for pos in 0..=n {
        run.process_position(pos);
    }

    let root = NodeKey {
        cat: start,
        start: 0,
        end: n as u32,
    };
    if n == 0 || !run.charts.completed.contains_key(&root) {
        return Ok(Vec::new());
    }
    let mut unpacker = Unpacker {
        charts: &run.charts,
        tables: &tables,
        tokens,
        budget: max_unpack.max(1),
        memo: BTreeMap::new(),
    };
    let raw = unpacker.trees(root);
    let mut trees = Vec::new();
    for tree in raw {
        let mut counter = 0;
        let mut tree = dissolve(tree, &tables, &mut counter);
        if tree.cat == START_CATEGORY && tree.children.len() == 1 {
            let mut child = tree.children.remove(0);
            child.head = false;
            child.splice_group = None;
            tree = child;
        }
        trees.push(tree);
    }
    Ok(trees)
}

// Unpacking ---------------------------------------------------------------------

struct Unpacker<'a> {
    charts: &'a Charts,
    tables: &'a Tables,
    tokens: &'a [String],
    budget: usize,
    memo: BTreeMap<NodeKey, Vec<CNode>>,
}

impl<'a> Unpacker<'a> {
    fn trees(&mut self, node: NodeKey) -> Vec<CNode> {
        if self.tables.kind(node.cat) == CatKind::Preterminal {
            let i = node.start as usize;
            return alloc::vec![CNode {
                cat: self.tables.names[node.cat as usize].clone(),
                span: (i, i + 1),
                token_index: Some(i),
                word: Some(self.tokens[i].clone()),
                children: Vec::new(),
                head: false,
                field: None,
                splice_group: None,
            }];
        }
        if let Some(cached) = self.memo.get(&node) {
            return cached.clone();
        }
        let mut out = Vec::new();
        let rules: Vec<u32> = self
            .charts
            .completed
            .get(&node)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for rule in rules {
            let final_item = Item {
                rule,
                dot: self.tables.rules[rule as usize].rhs.len() as u32,
                origin: node.start,
            };
            for seq in self.child_seqs(final_item, node.end) {
                if out.len() >= self.budget {
                    break;
                }
                self.expand_seq(node, rule, &seq, &mut out);
            }
            if out.len() >= self.budget {
                break;
            }
        }
        self.memo.insert(node, out.clone());
        out
    }

    /// Child sequences of an item instance, each child tagged with the rule
    /// position that consumed it.
    fn child_seqs(&self, item: Item, end: u32) -> Vec<Vec<(u32, NodeKey)>> {
        let derivs = self.charts.items[end as usize]
            .get(&item)
            .filter(|d| !d.is_empty());
        let Some(derivs) = derivs else {
            // No derivations: the initial prediction, nothing consumed yet.
            debug_assert_eq!(item.dot, 0);
            debug_assert_eq!(item.origin, end);
            return alloc::vec![Vec::new()];
        };
        let mut out = Vec::new();
        for deriv in derivs {
            let prev = Item {
                rule: item.rule,
                dot: deriv.prev_dot,
                origin: item.origin,
            };
            for mut prefix in self.child_seqs(prev, deriv.prev_end) {
                if let Some(child) = deriv.child {
                    prefix.push(child);
                }
                out.push(prefix);
                if out.len() >= self.budget {
                    return out;
                }
            }
        }
        out
    }

    fn expand_seq(
        &mut self,
        node: NodeKey,
        rule: u32,
        seq: &[(u32, NodeKey)],
        out: &mut Vec<CNode>,
    ) {
        let mut rows: Vec<Vec<CNode>> = alloc::vec![Vec::new()];
        for &(slot_idx, child) in seq {
            let subtrees = self.trees(child);
            let slot = &self.tables.rules[rule as usize].rhs[slot_idx as usize];
            let mut next = Vec::new();
            for row in &rows {
                for tree in &subtrees {
                    let mut tree = tree.clone();
                    tree.head = slot.head;
                    tree.field = slot.field.clone();
                    let mut row = row.clone();
                    row.push(tree);
                    next.push(row);
                    if next.len() >= self.budget {
                        break;
                    }
                }
                if next.len() >= self.budget {
                    break;
                }
            }
            rows = next;
        }
        for children in rows {
            if out.len() >= self.budget {
                return;
            }
            out.push(CNode {
                cat: self.tables.names[node.cat as usize].clone(),
                span: (node.start as usize, node.end as usize),
                token_index: None,
                word: None,
                children,
                head: false,
                field: None,
                splice_group: None,
            });
        }
    }
}

/// Replace splice nodes with their children. The children inherit the
/// splice node's head flag and field assignment and share a fresh group tag
/// marking them as one placement unit.
fn dissolve(node: CNode, tables: &Tables, counter: &mut usize) -> CNode {
    let mut out = node.clone();
    out.children = Vec::new();
    for child in node.children {
        let child = dissolve(child, tables, counter);
        let is_splice = tables
            .ids
            .get(&child.cat)
            .map(|&id| tables.kind(id) == CatKind::Splice)
            .unwrap_or(false);
        if is_splice {
            *counter += 1;
            let tag = *counter;
            for mut grandchild in child.children {
                grandchild.head = child.head;
                grandchild.field = child.field.clone();
                grandchild.splice_group = Some(tag);
                out.children.push(grandchild);
            }
        } else {
            out.children.push(child);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backbone::{compile_domains, expand_metacategories};
    use crate::loader::load_grammar;

    fn fixture() -> Grammar {
        load_grammar(include_str!("../../../fixtures/german.dg")).unwrap()
    }

    fn parse(g: &Grammar, sentence: &str) -> Vec<CNode> {
        let rs = expand_metacategories(&compile_domains(g)).unwrap();
        let tokens: Vec<String> = sentence.split_whitespace().map(|s| s.to_string()).collect();
        parse_backbone(&tokens, &rs, g, 1000).unwrap()
    }

    #[test]
    fn parses_example_sentence_with_topological_fields() {
        let g = fixture();
        let trees = parse(&g, "den Mann hat der Junge gesehen .");
        assert!(!trees.is_empty());
        let expected = "(domI (domINITIAL (domN (domD (D den)) (N Mann))) \
(domMIDDLE (Vfin hat) (domN (domD (D der)) (N Junge)) (domVpp (Vpp gesehen))) \
(domFINAL) (I .))";
        let found = trees.iter().any(|t| t.bracketed() == expected);
        assert!(
            found,
            "expected tree not in forest:\n{}",
            trees
                .iter()
                .map(|t| t.bracketed())
                .collect::<Vec<_>>()
                .join("\n")
        );
    }

    #[test]
    fn empty_input_yields_empty_forest() {
        let g = fixture();
        assert!(parse(&g, "").is_empty());
    }

    #[test]
    fn two_determiners_do_not_parse() {
        let g = fixture();
        assert!(parse(&g, "den den").is_empty());
    }

    #[test]
    fn unknown_token_is_reported_with_position() {
        let g = fixture();
        let rs = expand_metacategories(&compile_domains(&g)).unwrap();
        let tokens: Vec<String> = ["den", "xyzzy"].iter().map(|s| s.to_string()).collect();
        match parse_backbone(&tokens, &rs, &g, 10) {
            Err(ParseError::UnknownToken { token, position }) => {
                assert_eq!(token, "xyzzy");
                assert_eq!(position, 1);
            }
            other => panic!("expected unknown token error, got {:?}", other),
        }
    }

    #[test]
    fn children_spans_partition_parent_spans() {
        fn check(node: &CNode) {
            if !node.children.is_empty() {
                let mut pos = node.span.0;
                for c in &node.children {
                    assert_eq!(c.span.0, pos, "gap under {}", node.cat);
                    pos = c.span.1;
                    check(c);
                }
                assert_eq!(pos, node.span.1);
            }
        }
        let g = fixture();
        let trees = parse(&g, "den Mann hat der Junge gesehen .");
        assert!(!trees.is_empty());
        for t in &trees {
            check(t);
        }
    }

    #[test]
    fn cardinality_shapes_are_respected() {
        // In every tree, domINITIAL has exactly one domain child and
        // domFINAL at most one; determiners dominate only their word.
        fn check(node: &CNode) {
            let domain_children = node.children.iter().filter(|c| !c.is_preterminal()).count();
            match node.cat.as_str() {
                "domINITIAL" => assert_eq!(domain_children, 1),
                "domFINAL" => assert!(domain_children <= 1),
                "domD" => assert_eq!(node.children.len(), 1),
                _ => {}
            }
            for c in &node.children {
                check(c);
            }
        }
        let g = fixture();
        let trees = parse(&g, "den Mann hat der Junge gesehen .");
        assert!(!trees.is_empty());
        for t in &trees {
            check(t);
        }
    }

    #[test]
    fn metacategory_nodes_never_appear_in_trees() {
        fn check(node: &CNode) {
            assert_ne!(node.cat, "domVfin");
            for c in &node.children {
                check(c);
            }
        }
        let g = fixture();
        for t in parse(&g, "den Mann hat der Junge gesehen .") {
            check(&t);
        }
    }

    #[test]
    fn spliced_children_share_a_group_tag() {
        let g = fixture();
        let trees = parse(&g, "den Mann hat der Junge gesehen .");
        let tree = trees
            .iter()
            .find(|t| t.cat == "domI" && t.children.iter().any(|c| c.cat == "domINITIAL"))
            .expect("tree with a spliced verb sequence");
        let groups: BTreeSet<Option<usize>> = tree
            .children
            .iter()
            .filter(|c| !c.is_preterminal())
            .map(|c| c.splice_group)
            .collect();
        assert_eq!(groups.len(), 1, "slot categories should share one group");
        assert!(groups.iter().next().unwrap().is_some());
    }
}
