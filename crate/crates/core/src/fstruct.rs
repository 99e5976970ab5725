//! Attribute-value graphs with unification.
//!
//! F-structures are rooted acyclic graphs whose arcs are labeled with
//! attribute symbols and whose leaves are atoms. Reentrancy (two paths
//! reaching the same node) is supported. Besides unification the engine
//! offers defining equations (which construct paths), constraining checks
//! (existential and negative, which never construct), and non-constructive
//! resolution of regular path expressions: a path expression only ever
//! matches paths that already exist in the graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::regpath::RegPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Atom(String),
    Node(NodeId),
}

#[derive(Debug, Clone)]
enum Slot {
    Live(BTreeMap<String, Value>),
    Forward(NodeId),
}

/// A forest of attribute-value structures. Nodes merged by unification are
/// forwarded to a single representative.
#[derive(Debug, Clone, Default)]
pub struct FGraph {
    slots: Vec<Slot>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnifyFailure {
    AtomClash {
        path: Vec<String>,
        left: String,
        right: String,
    },
    AtomVsComplex {
        path: Vec<String>,
    },
    Cycle,
}

impl fmt::Display for UnifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnifyFailure::AtomClash { path, left, right } => {
                write!(f, "atom clash at {}: {} vs {}", path.join("."), left, right)
            }
            UnifyFailure::AtomVsComplex { path } => {
                write!(f, "atom unified with complex value at {}", path.join("."))
            }
            UnifyFailure::Cycle => write!(f, "unification would create a cycle"),
        }
    }
}

impl core::error::Error for UnifyFailure {}

impl FGraph {
    pub fn new() -> Self {
        FGraph { slots: Vec::new() }
    }

    pub fn add_node(&mut self) -> NodeId {
        let id = NodeId(self.slots.len() as u32);
        self.slots.push(Slot::Live(BTreeMap::new()));
        id
    }

    /// Follow forwarding chains to the representative.
    pub fn resolve(&self, mut id: NodeId) -> NodeId {
        loop {
            match &self.slots[id.index()] {
                Slot::Forward(next) => id = *next,
                Slot::Live(_) => return id,
            }
        }
    }

    fn arcs(&self, id: NodeId) -> &BTreeMap<String, Value> {
        match &self.slots[self.resolve(id).index()] {
            Slot::Live(arcs) => arcs,
            Slot::Forward(_) => unreachable!(),
        }
    }

    fn arcs_mut(&mut self, id: NodeId) -> &mut BTreeMap<String, Value> {
        let id = self.resolve(id);
        match &mut self.slots[id.index()] {
            Slot::Live(arcs) => arcs,
            Slot::Forward(_) => unreachable!(),
        }
    }

    /// Resolve a value so node values point at representatives.
    pub fn resolve_value(&self, v: &Value) -> Value {
        match v {
            Value::Atom(a) => Value::Atom(a.clone()),
            Value::Node(n) => Value::Node(self.resolve(*n)),
        }
    }

    pub fn get(&self, id: NodeId, attr: &str) -> Option<Value> {
        self.arcs(id).get(attr).map(|v| self.resolve_value(v))
    }

    pub fn attributes(&self, id: NodeId) -> Vec<(String, Value)> {
        self.arcs(id)
            .iter()
            .map(|(k, v)| (k.clone(), self.resolve_value(v)))
            .collect()
    }

    /// Set an attribute on a node that does not yet carry it.
    pub fn put(&mut self, id: NodeId, attr: &str, value: Value) -> Result<(), UnifyFailure> {
        self.merge_arc(id, attr, value, &mut vec![attr.to_string()])?;
        self.ensure_acyclic()
    }

    /// Unify two nodes in place. On failure the graph is left in an
    /// unspecified state; callers branch on clones.
    pub fn unify(&mut self, a: NodeId, b: NodeId) -> Result<(), UnifyFailure> {
        let mut path = Vec::new();
        self.unify_inner(a, b, &mut path)?;
        self.ensure_acyclic()
    }

    fn unify_inner(
        &mut self,
        a: NodeId,
        b: NodeId,
        path: &mut Vec<String>,
    ) -> Result<(), UnifyFailure> {
        let a = self.resolve(a);
        let b = self.resolve(b);
        if a == b {
            return Ok(());
        }
        let b_arcs = match core::mem::replace(&mut self.slots[b.index()], Slot::Forward(a)) {
            Slot::Live(arcs) => arcs,
            Slot::Forward(_) => unreachable!(),
        };
        for (attr, bval) in b_arcs {
            path.push(attr.clone());
            self.merge_arc(a, &attr, bval, path)?;
            path.pop();
        }
        Ok(())
    }

    fn merge_arc(
        &mut self,
        target: NodeId,
        attr: &str,
        incoming: Value,
        path: &mut Vec<String>,
    ) -> Result<(), UnifyFailure> {
        let existing = self.arcs(target).get(attr).cloned();
        match existing {
            None => {
                self.arcs_mut(target).insert(attr.to_string(), incoming);
                Ok(())
            }
            Some(Value::Atom(x)) => match incoming {
                Value::Atom(y) if x == y => Ok(()),
                Value::Atom(y) => Err(UnifyFailure::AtomClash {
                    path: path.clone(),
                    left: x,
                    right: y,
                }),
                Value::Node(_) => Err(UnifyFailure::AtomVsComplex { path: path.clone() }),
            },
            Some(Value::Node(n)) => match incoming {
                Value::Node(m) => self.unify_inner(n, m, path),
                Value::Atom(_) => Err(UnifyFailure::AtomVsComplex { path: path.clone() }),
            },
        }
    }

    fn ensure_acyclic(&self) -> Result<(), UnifyFailure> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut color = vec![0u8; self.slots.len()];
        for i in 0..self.slots.len() {
            if matches!(self.slots[i], Slot::Live(_)) && color[i] == 0 {
                self.cycle_dfs(NodeId(i as u32), &mut color)?;
            }
        }
        Ok(())
    }

    fn cycle_dfs(&self, id: NodeId, color: &mut Vec<u8>) -> Result<(), UnifyFailure> {
        let id = self.resolve(id);
        match color[id.index()] {
            1 => return Err(UnifyFailure::Cycle),
            2 => return Ok(()),
            _ => {}
        }
        color[id.index()] = 1;
        for (_, v) in self.arcs(id).iter() {
            if let Value::Node(n) = v {
                self.cycle_dfs(*n, color)?;
            }
        }
        color[id.index()] = 2;
        Ok(())
    }

    /// Apply a defining equation: the path is constructed if absent and the
    /// value unified in at its end.
    pub fn apply_defining(
        &mut self,
        root: NodeId,
        path: &[String],
        value: Value,
    ) -> Result<(), UnifyFailure> {
        debug_assert!(!path.is_empty());
        let mut cur = self.resolve(root);
        let mut walked: Vec<String> = Vec::new();
        for attr in &path[..path.len() - 1] {
            walked.push(attr.clone());
            match self.get(cur, attr) {
                None => {
                    let fresh = self.add_node();
                    self.arcs_mut(cur).insert(attr.clone(), Value::Node(fresh));
                    cur = fresh;
                }
                Some(Value::Node(n)) => cur = n,
                Some(Value::Atom(_)) => {
                    return Err(UnifyFailure::AtomVsComplex { path: walked });
                }
            }
        }
        let last = path.last().unwrap();
        walked.push(last.clone());
        self.merge_arc(cur, last, value, &mut walked)?;
        self.ensure_acyclic()
    }

    /// Node (or atom) reached by a concrete path, if it exists.
    pub fn value_at(&self, root: NodeId, path: &[String]) -> Option<Value> {
        let mut cur = Value::Node(self.resolve(root));
        for attr in path {
            match cur {
                Value::Node(n) => cur = self.get(n, attr)?,
                Value::Atom(_) => return None,
            }
        }
        Some(cur)
    }

    /// Existential check: true iff the path exists. Never constructs.
    pub fn check_existential(&self, root: NodeId, path: &[String]) -> bool {
        self.value_at(root, path).is_some()
    }

    /// Negative check: true iff the path is absent. Never constructs.
    pub fn check_negative(&self, root: NodeId, path: &[String]) -> bool {
        self.value_at(root, path).is_none()
    }

    /// Evaluate a constraining constraint against the structure; `None` for
    /// constraint kinds that define rather than check.
    pub fn check_constraining(&self, root: NodeId, c: &Constraint) -> Option<bool> {
        match c {
            Constraint::Existential { path } => Some(self.check_existential(root, path)),
            Constraint::Negative { path } => Some(self.check_negative(root, path)),
            Constraint::Defining { .. } | Constraint::PathDisjunction { .. } => None,
        }
    }

    /// Resolve a regular path expression against the graph: returns exactly
    /// the concrete attribute paths from `root` that exist and whose label
    /// sequence is in the language. Non-constructive: the graph is never
    /// changed, and termination follows from acyclicity.
    pub fn resolve_uncertainty(&self, root: NodeId, re: &RegPath) -> Vec<Vec<String>> {
        let nfa = re.compile();
        let mut out = Vec::new();
        let start = nfa.start_set();
        let mut prefix = Vec::new();
        if nfa.is_accepting(&start) {
            out.push(Vec::new());
        }
        self.resolve_rec(self.resolve(root), &nfa, start, &mut prefix, &mut out);
        out.sort();
        out
    }

    fn resolve_rec(
        &self,
        node: NodeId,
        nfa: &crate::regpath::Nfa,
        states: Vec<bool>,
        prefix: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
    ) {
        for (attr, value) in self.arcs(node).iter() {
            let next = nfa.step(&states, attr);
            if nfa.is_dead(&next) {
                continue;
            }
            prefix.push(attr.clone());
            if nfa.is_accepting(&next) {
                out.push(prefix.clone());
            }
            if let Value::Node(n) = value {
                self.resolve_rec(self.resolve(*n), nfa, next, prefix, out);
            }
            prefix.pop();
        }
    }

    /// Count of nodes and arcs reachable from `root`.
    pub fn reachable_size(&self, root: NodeId) -> (usize, usize) {
        let mut seen = BTreeSet::new();
        let mut arcs = 0;
        self.size_dfs(self.resolve(root), &mut seen, &mut arcs);
        (seen.len(), arcs)
    }

    fn size_dfs(&self, node: NodeId, seen: &mut BTreeSet<NodeId>, arcs: &mut usize) {
        if !seen.insert(node) {
            return;
        }
        for (_, v) in self.arcs(node).iter() {
            *arcs += 1;
            if let Value::Node(n) = v {
                self.size_dfs(self.resolve(*n), seen, arcs);
            }
        }
    }

    /// Canonical string form; two rooted graphs are isomorphic iff their
    /// canonical forms are equal.
    pub fn canonical(&self, root: NodeId) -> String {
        let mut ids = BTreeMap::new();
        let mut out = String::new();
        self.canon_rec(self.resolve(root), &mut ids, &mut out);
        out
    }

    fn canon_rec(&self, node: NodeId, ids: &mut BTreeMap<NodeId, usize>, out: &mut String) {
        use core::fmt::Write;
        if let Some(k) = ids.get(&node) {
            let _ = write!(out, "#{}", k);
            return;
        }
        ids.insert(node, ids.len());
        out.push('[');
        for (attr, v) in self.arcs(node).iter() {
            let _ = write!(out, "{}:", attr);
            match v {
                Value::Atom(a) => {
                    let _ = write!(out, "{}", a);
                }
                Value::Node(n) => self.canon_rec(self.resolve(*n), ids, out),
            }
            out.push(' ');
        }
        out.push(']');
    }

    /// Whether the structure rooted at `a` subsumes (is at most as specific
    /// as) the structure rooted at `b_root` in `b_graph`.
    pub fn subsumes(&self, a: NodeId, b_graph: &FGraph, b_root: NodeId) -> bool {
        let mut map = BTreeMap::new();
        self.subsumes_rec(self.resolve(a), b_graph, b_graph.resolve(b_root), &mut map)
    }

    fn subsumes_rec(
        &self,
        a: NodeId,
        bg: &FGraph,
        b: NodeId,
        map: &mut BTreeMap<NodeId, NodeId>,
    ) -> bool {
        if let Some(&mapped) = map.get(&a) {
            return mapped == b;
        }
        map.insert(a, b);
        for (attr, av) in self.arcs(a).iter() {
            match (av, bg.get(b, attr)) {
                (Value::Atom(x), Some(Value::Atom(y))) => {
                    if *x != y {
                        return false;
                    }
                }
                (Value::Node(n), Some(Value::Node(m))) => {
                    if !self.subsumes_rec(self.resolve(*n), bg, m, map) {
                        return false;
                    }
                }
                _ => return false,
            }
        }
        true
    }

    /// Pretty-print in attribute-value matrix style. Shared nodes are tagged
    /// `#k` at first mention and referenced by tag afterwards.
    pub fn render_avm(&self, root: NodeId) -> String {
        let root = self.resolve(root);
        let mut refcount: BTreeMap<NodeId, usize> = BTreeMap::new();
        self.count_refs(root, &mut refcount, &mut BTreeSet::new());
        let shared: BTreeSet<NodeId> = refcount
            .iter()
            .filter(|(_, &c)| c > 1)
            .map(|(&n, _)| n)
            .collect();
        let mut tags = BTreeMap::new();
        let mut out = String::new();
        self.avm_rec(root, 0, &shared, &mut tags, &mut out);
        out
    }

    fn count_refs(
        &self,
        node: NodeId,
        counts: &mut BTreeMap<NodeId, usize>,
        visited: &mut BTreeSet<NodeId>,
    ) {
        if !visited.insert(node) {
            return;
        }
        for (_, v) in self.arcs(node).iter() {
            if let Value::Node(n) = v {
                let n = self.resolve(*n);
                *counts.entry(n).or_insert(0) += 1;
                self.count_refs(n, counts, visited);
            }
        }
    }

    fn avm_rec(
        &self,
        node: NodeId,
        col: usize,
        shared: &BTreeSet<NodeId>,
        tags: &mut BTreeMap<NodeId, usize>,
        out: &mut String,
    ) {
        use core::fmt::Write;
        let mut col = col;
        if shared.contains(&node) {
            if let Some(tag) = tags.get(&node) {
                let _ = write!(out, "#{}", tag);
                return;
            }
            let tag = tags.len() + 1;
            tags.insert(node, tag);
            let _ = write!(out, "#{}=", tag);
            col += 2 + decimal_width(tag);
        }
        let attrs = self.attributes(node);
        if attrs.is_empty() {
            out.push_str("[ ]");
            return;
        }
        // CLASS and LEXEME lead; everything else alphabetical.
        let mut ordered: Vec<(String, Value)> = Vec::new();
        for lead in ["CLASS", "LEXEME"] {
            if let Some(pos) = attrs.iter().position(|(a, _)| a == lead) {
                ordered.push(attrs[pos].clone());
            }
        }
        for (a, v) in &attrs {
            if a != "CLASS" && a != "LEXEME" {
                ordered.push((a.clone(), v.clone()));
            }
        }
        let width = ordered.iter().map(|(a, _)| a.len()).max().unwrap_or(0);
        out.push_str("[ ");
        for (i, (attr, value)) in ordered.iter().enumerate() {
            if i > 0 {
                out.push('\n');
                for _ in 0..col + 2 {
                    out.push(' ');
                }
            }
            let _ = write!(out, "{:width$} ", attr, width = width);
            match value {
                Value::Atom(a) => out.push_str(a),
                Value::Node(n) => {
                    self.avm_rec(self.resolve(*n), col + 2 + width + 1, shared, tags, out)
                }
            }
        }
        out.push_str(" ]");
    }
}

fn decimal_width(mut n: usize) -> usize {
    let mut w = 1;
    while n >= 10 {
        n /= 10;
        w += 1;
    }
    w
}

/// Annotation anchor: the mother node's structure or the annotated node's.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Up,
    Down,
}

/// A single constraint from an annotation or a lexical schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Defining { path: Vec<String>, value: Value },
    Existential { path: Vec<String> },
    Negative { path: Vec<String> },
    PathDisjunction { path: RegPath },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regpath;

    fn atom(s: &str) -> Value {
        Value::Atom(s.into())
    }

    fn path(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn unify_with_empty_is_identity() {
        let mut g = FGraph::new();
        let x = g.add_node();
        g.apply_defining(x, &path(&["CASE"]), atom("acc")).unwrap();
        let before = g.canonical(x);
        let empty = g.add_node();
        g.unify(empty, x).unwrap();
        assert_eq!(g.canonical(empty), before);
    }

    #[test]
    fn unify_atom_clash_reports_path() {
        let mut g = FGraph::new();
        let a = g.add_node();
        let b = g.add_node();
        g.apply_defining(a, &path(&["CASE"]), atom("acc")).unwrap();
        g.apply_defining(b, &path(&["CASE"]), atom("nom")).unwrap();
        match g.unify(a, b) {
            Err(UnifyFailure::AtomClash { path, .. }) => assert_eq!(path, vec!["CASE"]),
            other => panic!("expected clash, got {:?}", other),
        }
    }

    #[test]
    fn unify_merges_complementary_structure() {
        let mut g = FGraph::new();
        let a = g.add_node();
        let b = g.add_node();
        g.apply_defining(a, &path(&["OBJ", "CLASS"]), atom("N"))
            .unwrap();
        g.apply_defining(b, &path(&["OBJ", "LEXEME"]), atom("mann"))
            .unwrap();
        g.unify(a, b).unwrap();
        assert_eq!(g.value_at(a, &path(&["OBJ", "CLASS"])), Some(atom("N")));
        assert_eq!(
            g.value_at(a, &path(&["OBJ", "LEXEME"])),
            Some(atom("mann"))
        );
    }

    #[test]
    fn defining_constructs_chains() {
        let mut g = FGraph::new();
        let r = g.add_node();
        g.apply_defining(r, &path(&["SUBJ", "CASE"]), atom("nom"))
            .unwrap();
        assert_eq!(g.value_at(r, &path(&["SUBJ", "CASE"])), Some(atom("nom")));

        let mut g2 = FGraph::new();
        let r2 = g2.add_node();
        g2.apply_defining(r2, &path(&["A", "B", "C"]), atom("x"))
            .unwrap();
        let (nodes, arcs) = g2.reachable_size(r2);
        assert_eq!((nodes, arcs), (3, 3));

        assert!(g
            .apply_defining(r, &path(&["SUBJ", "CASE", "MORE"]), atom("y"))
            .is_err());
    }

    #[test]
    fn constraining_checks_do_not_construct() {
        let mut g = FGraph::new();
        let r = g.add_node();
        g.apply_defining(r, &path(&["LEXEME"]), atom("mann")).unwrap();
        let before = g.reachable_size(r);
        assert!(g.check_existential(r, &path(&["LEXEME"])));
        assert!(g.check_negative(r, &path(&["RELA"])));
        assert!(!g.check_existential(r, &path(&["TENSE"])));
        assert_eq!(g.reachable_size(r), before);

        assert_eq!(
            g.check_constraining(r, &Constraint::Existential { path: path(&["LEXEME"]) }),
            Some(true)
        );
        assert_eq!(
            g.check_constraining(r, &Constraint::Negative { path: path(&["LEXEME"]) }),
            Some(false)
        );
        assert_eq!(
            g.check_constraining(
                r,
                &Constraint::Defining { path: path(&["X"]), value: atom("y") }
            ),
            None
        );
        assert_eq!(g.reachable_size(r), before);
    }

    #[test]
    fn uncertainty_resolves_only_existing_paths() {
        // hat with SUBJ and VPART; VPART has OBJ.
        let mut g = FGraph::new();
        let hat = g.add_node();
        g.apply_defining(hat, &path(&["SUBJ", "LEXEME"]), atom("junge"))
            .unwrap();
        g.apply_defining(hat, &path(&["VPART", "OBJ", "LEXEME"]), atom("mann"))
            .unwrap();

        let re = regpath::parse("VPART* OBJ").unwrap();
        assert_eq!(g.resolve_uncertainty(hat, &re), vec![path(&["VPART", "OBJ"])]);

        let subj = regpath::parse("SUBJ").unwrap();
        let mut empty = FGraph::new();
        let root = empty.add_node();
        assert!(empty.resolve_uncertainty(root, &subj).is_empty());
    }

    #[test]
    fn uncertainty_on_auxiliary_chain() {
        // will -> VPART -> haben -> VPART -> gesehen -> OBJ -> mann
        let mut g = FGraph::new();
        let will = g.add_node();
        g.apply_defining(will, &path(&["VPART", "VPART", "OBJ", "LEXEME"]), atom("mann"))
            .unwrap();
        let re = regpath::parse("VPART* OBJ").unwrap();
        let resolved = g.resolve_uncertainty(will, &re);
        assert_eq!(resolved, vec![path(&["VPART", "VPART", "OBJ"])]);

        // Brute-force oracle: enumerate every path, filter by the language.
        fn all_paths(g: &FGraph, node: NodeId, prefix: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
            for (attr, v) in g.attributes(node) {
                prefix.push(attr);
                out.push(prefix.clone());
                if let Value::Node(n) = v {
                    all_paths(g, n, prefix, out);
                }
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        all_paths(&g, will, &mut Vec::new(), &mut all);
        let mut expected: Vec<Vec<String>> =
            all.into_iter().filter(|p| re.matches(p)).collect();
        expected.sort();
        assert_eq!(resolved, expected);
    }

    #[test]
    fn cycles_are_rejected() {
        let mut g = FGraph::new();
        let a = g.add_node();
        let b = g.add_node();
        g.put(a, "X", Value::Node(b)).unwrap();
        assert_eq!(g.unify(a, b), Err(UnifyFailure::Cycle));
    }

    #[test]
    fn reentrancy_survives_unification_and_rendering() {
        let mut g = FGraph::new();
        let r = g.add_node();
        let shared = g.add_node();
        g.apply_defining(shared, &path(&["CASE"]), atom("nom")).unwrap();
        g.put(r, "SUBJ", Value::Node(shared)).unwrap();
        g.put(r, "TOPIC", Value::Node(shared)).unwrap();
        let avm = g.render_avm(r);
        assert!(avm.contains("#1="), "expected a reentrancy tag:\n{}", avm);
        assert!(avm.contains("#1"));
        // canonical form records the sharing
        let canon = g.canonical(r);
        assert!(canon.contains("#1"));
    }

    #[test]
    fn subsumption_basics() {
        let mut g = FGraph::new();
        let small = g.add_node();
        g.apply_defining(small, &path(&["CASE"]), atom("nom")).unwrap();
        let big = g.add_node();
        g.apply_defining(big, &path(&["CASE"]), atom("nom")).unwrap();
        g.apply_defining(big, &path(&["NUM"]), atom("sg")).unwrap();
        assert!(g.subsumes(small, &g.clone(), big));
        assert!(!g.subsumes(big, &g.clone(), small));
    }
}
