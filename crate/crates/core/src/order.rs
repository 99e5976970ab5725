//! Order domain structure, dependency tree, and the ordering checks.
//!
//! A domain tree records which words and sub-domains each order domain
//! contains, in surface order. Precedence predicates are evaluated inside
//! the single domain a word is a direct member of: sibling sub-domains are
//! represented by their topmost word, labeled with its incoming dependency,
//! and anything outside that domain is exempt. Float licensing checks, for
//! every word, that the path between its positional head (the word whose
//! domain it sits in) and its direct head is in the dependency's float
//! path language, and that a required target field matches the slot it was
//! placed in.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::backbone::{BackboneRuleSet, CatKind};
use crate::chart::CNode;
use crate::fstruct::{FGraph, NodeId, Value};
use crate::grammar::{Grammar, PredicateKind};

/// A word token inside a domain tree or dependency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub token: usize,
    pub surface: String,
    pub lexeme: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Word(Word),
    Domain(DomainNode),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainNode {
    /// Class of the word this domain belongs to; None for the synthetic
    /// root covering a sentence without a covering domain.
    pub class: Option<String>,
    pub slot: Option<String>,
    pub field: Option<String>,
    /// Token of the word whose domain specification introduced this domain.
    pub owner: Option<usize>,
    /// Ordered contents: the member word (if this slot holds it) and the
    /// placed sub-domains.
    pub elements: Vec<Element>,
}

impl DomainNode {
    pub fn member(&self) -> Option<&Word> {
        self.elements.iter().find_map(|e| match e {
            Element::Word(w) => Some(w),
            Element::Domain(_) => None,
        })
    }

    fn words_transitive<'a>(&'a self, out: &mut Vec<&'a Word>) {
        for e in &self.elements {
            match e {
                Element::Word(w) => out.push(w),
                Element::Domain(d) => d.words_transitive(out),
            }
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a DomainNode)) {
        f(self);
        for e in &self.elements {
            if let Element::Domain(d) = e {
                d.visit(f);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainTree {
    pub root: DomainNode,
}

impl DomainTree {
    pub fn all_domains(&self) -> Vec<&DomainNode> {
        let mut out = Vec::new();
        self.root.visit(&mut |d| out.push(d));
        out
    }

    /// Bracketed rendering: `(Class/slot[=field] element ...)`, words by
    /// surface form.
    pub fn bracketed(&self) -> String {
        let mut out = String::new();
        render_domain(&self.root, &mut out);
        out
    }
}

fn render_domain(d: &DomainNode, out: &mut String) {
    use core::fmt::Write;
    out.push('(');
    match (&d.class, &d.slot) {
        (Some(c), Some(s)) => {
            let _ = write!(out, "{}/{}", c, s);
        }
        _ => out.push_str("TOP"),
    }
    if let Some(f) = &d.field {
        let _ = write!(out, "={}", f);
    }
    for e in &d.elements {
        out.push(' ');
        match e {
            Element::Word(w) => out.push_str(&w.surface),
            Element::Domain(sub) => render_domain(sub, out),
        }
    }
    out.push(')');
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepEdge {
    pub head: usize,
    pub dep: String,
    pub modifier: usize,
}

/// Dependency tree over word tokens. May be non-projective; includes
/// punctuation words when they govern anything.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DepTree {
    pub root: usize,
    pub words: BTreeMap<usize, Word>,
    pub edges: Vec<DepEdge>,
}

impl DepTree {
    pub fn head_of(&self, token: usize) -> Option<(&str, usize)> {
        self.edges
            .iter()
            .find(|e| e.modifier == token)
            .map(|e| (e.dep.as_str(), e.head))
    }

    /// Triples over content words: arcs whose head is not a punctuation
    /// class word, as `(head lexeme, dependency, modifier lexeme)`.
    pub fn content_triples(&self, g: &Grammar) -> Vec<(String, String, String)> {
        let mut out = Vec::new();
        self.triples_rec(self.root, g, &mut out);
        out
    }

    fn triples_rec(&self, token: usize, g: &Grammar, out: &mut Vec<(String, String, String)>) {
        let head_punct = self
            .words
            .get(&token)
            .map(|w| g.is_punct(&w.class))
            .unwrap_or(false);
        for e in self.edges.iter().filter(|e| e.head == token) {
            if !head_punct {
                out.push((
                    self.words[&e.head].lexeme.clone(),
                    e.dep.clone(),
                    self.words[&e.modifier].lexeme.clone(),
                ));
            }
            self.triples_rec(e.modifier, g, out);
        }
    }
}

// Violations -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolationCode {
    PredSelfFirst,
    PredSelfLast,
    PredDepOrder,
    FloatPath,
    FieldMismatch,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationCode::PredSelfFirst => "PRED_SELF_FIRST",
            ViolationCode::PredSelfLast => "PRED_SELF_LAST",
            ViolationCode::PredDepOrder => "PRED_DEP_ORDER",
            ViolationCode::FloatPath => "FLOAT_PATH",
            ViolationCode::FieldMismatch => "FIELD_MISMATCH",
        };
        write!(f, "{}", s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub token: usize,
    pub message: String,
}

// Domain structure extraction ---------------------------------------------------

/// Derive the order domain structure from a c-structure tree: domain
/// category nodes become domains, preterminals attach their word as a
/// member of the enclosing domain.
pub fn extract_domain_structure(tree: &CNode, rs: &BackboneRuleSet, g: &Grammar) -> DomainTree {
    let mut root = extract_node(tree, rs, g);
    if root.owner.is_none() {
        root.owner = root.member().map(|w| w.token);
    }
    DomainTree { root }
}

fn extract_node(node: &CNode, rs: &BackboneRuleSet, g: &Grammar) -> DomainNode {
    let meta = rs.meta(&node.cat);
    let (class, slot) = match meta {
        Some(m) if matches!(m.kind, CatKind::Domain | CatKind::Slot) => {
            (m.class.clone(), m.slot.clone())
        }
        _ => (None, None),
    };
    let field = class
        .as_deref()
        .zip(slot.as_deref())
        .and_then(|(c, s)| {
            g.domain_spec(c)
                .and_then(|spec| spec.slots.iter().find(|sl| sl.name == s))
                .and_then(|sl| sl.field.clone())
        });
    let mut elements = Vec::new();
    let mut i = 0;
    while i < node.children.len() {
        let child = &node.children[i];
        if let (Some(token), Some(surface)) = (child.token_index, child.word.as_ref()) {
            let lexeme = g
                .entry(surface, &child.cat)
                .map(|e| e.lexeme.clone())
                .unwrap_or_else(|| surface.clone());
            elements.push(Element::Word(Word {
                token,
                surface: surface.clone(),
                lexeme,
                class: child.cat.clone(),
            }));
            i += 1;
            continue;
        }
        // A placed unit is one domain, or the spliced slot sequence of a
        // multi-slot class; all of its domains are owned by the word in
        // the class's self slot.
        let unit_len = match child.splice_group {
            Some(tag) => node.children[i..]
                .iter()
                .take_while(|c| c.splice_group == Some(tag))
                .count(),
            None => 1,
        };
        let mut unit: Vec<DomainNode> = node.children[i..i + unit_len]
            .iter()
            .map(|c| extract_node(c, rs, g))
            .collect();
        let owner = unit.iter().find_map(|d| {
            let class = d.class.as_deref()?;
            let self_slot = g.domain_spec(class)?.self_slot()?;
            if d.slot.as_deref() == Some(self_slot.name.as_str()) {
                d.member().map(|w| w.token)
            } else {
                None
            }
        });
        for d in &mut unit {
            d.owner = owner;
            elements.push(Element::Domain(d.clone()));
        }
        i += unit_len;
    }
    DomainNode {
        class,
        slot,
        field,
        owner: None,
        elements,
    }
}

// Dependency tree derivation -----------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeriveError {
    pub path: Vec<String>,
}

impl fmt::Display for DeriveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "dependency attribute without LEXEME at {}",
            self.path.join(".")
        )
    }
}

impl core::error::Error for DeriveError {}

/// Derive the dependency tree from a solved f-structure: one edge per
/// dependency attribute whose value carries a LEXEME. `tokens` maps word
/// structures to their token indices.
pub fn derive_dependency_tree(
    graph: &FGraph,
    root: NodeId,
    g: &Grammar,
    tokens: &BTreeMap<NodeId, usize>,
    words: &BTreeMap<usize, Word>,
) -> Result<DepTree, DeriveError> {
    let root = graph.resolve(root);
    let root_token = *tokens.get(&root).ok_or(DeriveError { path: Vec::new() })?;
    let mut tree = DepTree {
        root: root_token,
        words: BTreeMap::new(),
        edges: Vec::new(),
    };
    tree.words
        .insert(root_token, words[&root_token].clone());
    let mut path = Vec::new();
    derive_rec(graph, root, root_token, g, tokens, words, &mut tree, &mut path)?;
    Ok(tree)
}

fn derive_rec(
    graph: &FGraph,
    node: NodeId,
    token: usize,
    g: &Grammar,
    tokens: &BTreeMap<NodeId, usize>,
    words: &BTreeMap<usize, Word>,
    tree: &mut DepTree,
    path: &mut Vec<String>,
) -> Result<(), DeriveError> {
    for (attr, value) in graph.attributes(node) {
        if !g.deps.iter().any(|d| *d == attr) {
            continue;
        }
        let Value::Node(child) = value else { continue };
        path.push(attr.clone());
        if graph.get(child, "LEXEME").is_none() {
            return Err(DeriveError { path: path.clone() });
        }
        let child = graph.resolve(child);
        let child_token = *tokens.get(&child).ok_or(DeriveError { path: path.clone() })?;
        tree.words.insert(child_token, words[&child_token].clone());
        tree.edges.push(DepEdge {
            head: token,
            dep: attr.clone(),
            modifier: child_token,
        });
        derive_rec(graph, child, child_token, g, tokens, words, tree, path)?;
        path.pop();
    }
    Ok(())
}

// Precedence ---------------------------------------------------------------------

/// Evaluate every precedence predicate in the single domain its holder is a
/// direct member of. Domain elements are the member word plus, per child
/// sub-domain, its topmost contained word, labeled with that word's
/// incoming dependency.
pub fn check_precedence(dt: &DomainTree, dep: &DepTree, g: &Grammar) -> Vec<Violation> {
    let mut out = Vec::new();
    for domain in dt.all_domains() {
        let Some(member) = domain.member() else {
            continue;
        };
        let predicates = g.predicates_for(&member.class);
        if predicates.is_empty() {
            continue;
        }
        let elements = labeled_elements(domain, dep);
        let self_pos = elements
            .iter()
            .position(|e| e.token == Some(member.token))
            .unwrap_or(0);
        for pred in predicates {
            match &pred.kind {
                PredicateKind::SelfFirst => {
                    if elements[..self_pos].iter().any(|e| e.token != Some(member.token)) {
                        out.push(Violation {
                            code: ViolationCode::PredSelfFirst,
                            token: member.token,
                            message: alloc::format!(
                                "'{}' must precede every element of its domain",
                                member.surface
                            ),
                        });
                    }
                }
                PredicateKind::SelfLast => {
                    if elements[self_pos + 1..]
                        .iter()
                        .any(|e| e.token != Some(member.token))
                    {
                        out.push(Violation {
                            code: ViolationCode::PredSelfLast,
                            token: member.token,
                            message: alloc::format!(
                                "'{}' must follow every element of its domain",
                                member.surface
                            ),
                        });
                    }
                }
                PredicateKind::Before { left, right } => {
                    let lefts: Vec<usize> = positions(&elements, left);
                    let rights: Vec<usize> = positions(&elements, right);
                    let violated = rights
                        .iter()
                        .any(|r| lefts.iter().any(|l| r < l));
                    if violated {
                        out.push(Violation {
                            code: ViolationCode::PredDepOrder,
                            token: member.token,
                            message: alloc::format!(
                                "{} must precede {} in the domain of '{}'",
                                left, right, member.surface
                            ),
                        });
                    }
                }
            }
        }
    }
    out
}

struct LabeledElement {
    /// Token of the element's word (the member itself or a representative).
    token: Option<usize>,
    label: Option<String>,
}

fn positions(elements: &[LabeledElement], dep: &str) -> Vec<usize> {
    elements
        .iter()
        .enumerate()
        .filter(|(_, e)| e.label.as_deref() == Some(dep))
        .map(|(i, _)| i)
        .collect()
}

fn labeled_elements(domain: &DomainNode, dep: &DepTree) -> Vec<LabeledElement> {
    let mut out = Vec::new();
    for e in &domain.elements {
        match e {
            Element::Word(w) => out.push(LabeledElement {
                token: Some(w.token),
                label: dep.head_of(w.token).map(|(d, _)| d.to_string()),
            }),
            Element::Domain(sub) => {
                let mut words = Vec::new();
                sub.words_transitive(&mut words);
                // Topmost representative: contained word whose head lies
                // outside the sub-domain.
                let inside: BTreeSet<usize> = words.iter().map(|w| w.token).collect();
                let mut reps: Vec<&Word> = words
                    .iter()
                    .filter(|w| match dep.head_of(w.token) {
                        Some((_, h)) => !inside.contains(&h),
                        None => true,
                    })
                    .copied()
                    .collect();
                reps.sort_by_key(|w| w.token);
                if reps.is_empty() {
                    out.push(LabeledElement {
                        token: None,
                        label: None,
                    });
                } else {
                    for rep in reps {
                        out.push(LabeledElement {
                            token: Some(rep.token),
                            label: dep.head_of(rep.token).map(|(d, _)| d.to_string()),
                        });
                    }
                }
            }
        }
    }
    out
}

// Float licensing ------------------------------------------------------------------

/// Check discontinuity licensing: for every word, the dependency path from
/// its positional head down to its direct head must be in the float path
/// language of its incoming dependency, and the slot it was placed into
/// must carry the dependency's target field, if one is required.
pub fn check_float_licensing(dt: &DomainTree, dep: &DepTree, g: &Grammar) -> Vec<Violation> {
    let mut out = Vec::new();
    // The domain each word's unit was placed into: the parent domain of the
    // word's own (top) domains.
    let mut placement: BTreeMap<usize, &DomainNode> = BTreeMap::new();
    collect_placements(&dt.root, &mut placement);
    for (&token, parent) in &placement {
        let Some((d, direct_head)) = dep.head_of(token) else {
            continue;
        };
        let Some(spec) = g.path_spec(d) else { continue };
        let word = &dep.words[&token];
        let positional = parent.owner;
        match positional {
            None => {
                // Placed under the synthetic root: only the dependency root
                // may live there, and it has no incoming dependency.
                out.push(Violation {
                    code: ViolationCode::FloatPath,
                    token,
                    message: alloc::format!("'{}' is not placed in any head's domain", word.surface),
                });
            }
            Some(p) => {
                let path = path_between(dep, p, direct_head);
                let licensed = match &path {
                    Some(labels) => spec.float_path.matches(labels),
                    None => false,
                };
                if !licensed {
                    out.push(Violation {
                        code: ViolationCode::FloatPath,
                        token,
                        message: alloc::format!(
                            "'{}' ({}) floated into the domain of '{}' without a licensing path",
                            word.surface,
                            d,
                            dep.words
                                .get(&p)
                                .map(|w| w.surface.as_str())
                                .unwrap_or("?")
                        ),
                    });
                }
                if let Some(required) = &spec.target_field {
                    if parent.field.as_deref() != Some(required.as_str()) {
                        out.push(Violation {
                            code: ViolationCode::FieldMismatch,
                            token,
                            message: alloc::format!(
                                "'{}' ({}) must be placed in a {} field, found {}",
                                word.surface,
                                d,
                                required,
                                parent.field.as_deref().unwrap_or("none")
                            ),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Parent domain of each word's unit: for every domain, the words owning
/// its child sub-domains were placed into it.
fn collect_placements<'a>(node: &'a DomainNode, out: &mut BTreeMap<usize, &'a DomainNode>) {
    for e in &node.elements {
        if let Element::Domain(sub) = e {
            if let Some(owner) = sub.owner {
                // The first (leftmost) domain of a unit records the
                // placement; further slots of the same unit agree.
                out.entry(owner).or_insert(node);
            }
            collect_placements(sub, out);
        }
    }
}

/// Dependency label path from `from` down to `to`; empty when equal, None
/// when `from` is not an ancestor of `to`.
fn path_between(dep: &DepTree, from: usize, to: usize) -> Option<Vec<String>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut labels = Vec::new();
    let mut cur = to;
    while let Some((d, head)) = dep.head_of(cur) {
        labels.push(d.to_string());
        if head == from {
            labels.reverse();
            return Some(labels);
        }
        cur = head;
    }
    None
}
