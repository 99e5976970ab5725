//! Grammar description types: word classes, dependency types, valencies,
//! order domain specifications, precedence predicates, modifier path
//! specifications, and the lexicon.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::fstruct::{Constraint, Value};
use crate::regpath::RegPath;

/// Attribute names that share the f-structure namespace with dependencies
/// and therefore cannot be used as dependency or feature names.
pub const RESERVED_ATTRS: [&str; 3] = ["CLASS", "LEXEME", "FIELD"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordClass {
    pub name: String,
    /// Punctuation classes are excluded from reported dependency triples.
    pub punct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optionality {
    Opt,
    Req,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValencySlot {
    pub optionality: Optionality,
    pub dep: String,
    pub mod_class: String,
}

/// How many elements (besides the word itself) a domain slot admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    /// No elements at all; only meaningful on the slot holding the word.
    Empty,
    ZeroOrMore,
    AtMostOne,
    AtLeastOne,
    ExactlyOne,
}

impl Cardinality {
    pub fn symbol(self) -> Option<&'static str> {
        match self {
            Cardinality::Empty => None,
            Cardinality::ZeroOrMore => Some("*"),
            Cardinality::AtMostOne => Some("?"),
            Cardinality::AtLeastOne => Some("+"),
            Cardinality::ExactlyOne => Some("!"),
        }
    }

    pub fn admits(self, n: usize) -> bool {
        match self {
            Cardinality::Empty => n == 0,
            Cardinality::ZeroOrMore => true,
            Cardinality::AtMostOne => n <= 1,
            Cardinality::AtLeastOne => n >= 1,
            Cardinality::ExactlyOne => n == 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSlotSpec {
    pub name: String,
    pub cardinality: Cardinality,
    /// This slot contains the defining word itself.
    pub holds_self: bool,
    pub field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainSpec {
    pub class: String,
    pub slots: Vec<DomainSlotSpec>,
}

impl DomainSpec {
    pub fn self_slot(&self) -> Option<&DomainSlotSpec> {
        self.slots.iter().find(|s| s.holds_self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateKind {
    /// The word precedes every other element of its domain.
    SelfFirst,
    /// The word follows every other element of its domain.
    SelfLast,
    /// Elements in dependency `left` precede elements in dependency `right`.
    Before { left: String, right: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrecedencePredicate {
    pub holder: String,
    pub kind: PredicateKind,
}

impl fmt::Display for PredicateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredicateKind::SelfFirst => write!(f, "self-first"),
            PredicateKind::SelfLast => write!(f, "self-last"),
            PredicateKind::Before { left, right } => write!(f, "{}<{}", left, right),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModifierPathSpec {
    pub dep: String,
    /// Regular language over dependency names licensing the path between the
    /// positional head and the direct head. `{ε}` means continuous
    /// attachment.
    pub float_path: RegPath,
    /// If set, the modifier may only be placed into slots carrying this
    /// field label.
    pub target_field: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexicalEntry {
    pub surface: String,
    pub class: String,
    pub lexeme: String,
    pub valency: Vec<ValencySlot>,
    /// Defining equations on the word's own structure. Paths are attribute
    /// sequences; a path starting with a dependency name states a
    /// requirement on the filler of that valency slot (e.g. `SUBJ.CASE=nom`).
    pub features: Vec<(Vec<String>, String)>,
}

impl LexicalEntry {
    pub fn slot(&self, dep: &str) -> Option<&ValencySlot> {
        self.valency.iter().find(|s| s.dep == dep)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Grammar {
    pub classes: Vec<WordClass>,
    pub deps: Vec<String>,
    pub domain_specs: Vec<DomainSpec>,
    pub predicates: Vec<PrecedencePredicate>,
    pub path_specs: Vec<ModifierPathSpec>,
    pub lexicon: Vec<LexicalEntry>,
    /// Classes whose domain sequence may span a whole sentence.
    pub roots: Vec<String>,
}

impl Grammar {
    pub fn class(&self, name: &str) -> Option<&WordClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn is_punct(&self, class: &str) -> bool {
        self.class(class).map(|c| c.punct).unwrap_or(false)
    }

    pub fn domain_spec(&self, class: &str) -> Option<&DomainSpec> {
        self.domain_specs.iter().find(|d| d.class == class)
    }

    pub fn path_spec(&self, dep: &str) -> Option<&ModifierPathSpec> {
        self.path_specs.iter().find(|p| p.dep == dep)
    }

    pub fn entry(&self, surface: &str, class: &str) -> Option<&LexicalEntry> {
        self.lexicon
            .iter()
            .find(|e| e.surface == surface && e.class == class)
    }

    pub fn entries_for(&self, surface: &str) -> Vec<&LexicalEntry> {
        self.lexicon.iter().filter(|e| e.surface == surface).collect()
    }

    /// Predicates held by a class, duplicates removed.
    pub fn predicates_for(&self, class: &str) -> Vec<&PrecedencePredicate> {
        let mut seen = Vec::new();
        for p in self.predicates.iter().filter(|p| p.holder == class) {
            if !seen.contains(&p) {
                seen.push(p);
            }
        }
        seen
    }

    /// All classes that have some lexical entry with a valency slot for
    /// `dep` accepting `mod_class`.
    pub fn governing_classes(&self, dep: &str, mod_class: &str) -> BTreeSet<&str> {
        self.lexicon
            .iter()
            .filter(|e| {
                e.valency
                    .iter()
                    .any(|s| s.dep == dep && s.mod_class == mod_class)
            })
            .map(|e| e.class.as_str())
            .collect()
    }
}

/// Constraint schemata for one valency slot: a disjunction of branches,
/// each branch a conjunction of constraints anchored at the word's own
/// structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotSchema {
    pub slot: ValencySlot,
    pub branches: Vec<Vec<Constraint>>,
}

/// Expand a lexical entry's valency into constraint schemata. A required
/// slot yields a single branch (defining `dep.CLASS`, existential
/// `dep.LEXEME`); an optional slot adds a branch forbidding the dependency.
pub fn expand_valency(entry: &LexicalEntry) -> Vec<SlotSchema> {
    entry
        .valency
        .iter()
        .map(|slot| {
            let present = alloc::vec![
                Constraint::Defining {
                    path: alloc::vec![slot.dep.clone(), "CLASS".to_string()],
                    value: Value::Atom(slot.mod_class.clone()),
                },
                Constraint::Existential {
                    path: alloc::vec![slot.dep.clone(), "LEXEME".to_string()],
                },
            ];
            let branches = match slot.optionality {
                Optionality::Req => alloc::vec![present],
                Optionality::Opt => alloc::vec![
                    alloc::vec![Constraint::Negative {
                        path: alloc::vec![slot.dep.clone()],
                    }],
                    present,
                ],
            };
            SlotSchema {
                slot: slot.clone(),
                branches,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationItem {
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub items: Vec<ValidationItem>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.items.iter().any(|i| i.severity == Severity::Error)
    }

    fn error(&mut self, message: String) {
        self.items.push(ValidationItem {
            severity: Severity::Error,
            message,
        });
    }

    fn warning(&mut self, message: String) {
        self.items.push(ValidationItem {
            severity: Severity::Warning,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            let tag = match item.severity {
                Severity::Error => "error",
                Severity::Warning => "warning",
            };
            writeln!(f, "{}: {}", tag, item.message)?;
        }
        Ok(())
    }
}

/// Check every grammar invariant; the returned report is empty exactly when
/// the grammar is well-formed.
pub fn validate_grammar(g: &Grammar) -> ValidationReport {
    let mut report = ValidationReport::default();
    let class_names: BTreeSet<&str> = g.classes.iter().map(|c| c.name.as_str()).collect();
    let dep_names: BTreeSet<&str> = g.deps.iter().map(|d| d.as_str()).collect();

    let mut seen = BTreeSet::new();
    for c in &g.classes {
        if c.name.is_empty() {
            report.error("empty word class name".to_string());
        }
        if !seen.insert(&c.name) {
            report.error(alloc::format!("duplicate word class '{}'", c.name));
        }
    }
    let mut seen = BTreeSet::new();
    for d in &g.deps {
        if !seen.insert(d) {
            report.error(alloc::format!("duplicate dependency type '{}'", d));
        }
        if RESERVED_ATTRS.contains(&d.as_str()) {
            report.error(alloc::format!(
                "dependency type '{}' collides with a reserved attribute name",
                d
            ));
        }
    }

    // Domain specifications: exactly one per class, exactly one self slot.
    for c in &g.classes {
        let specs: Vec<&DomainSpec> = g.domain_specs.iter().filter(|d| d.class == c.name).collect();
        match specs.len() {
            0 => report.error(alloc::format!("class '{}' has no domain specification", c.name)),
            1 => {}
            n => report.error(alloc::format!(
                "class '{}' has {} domain specifications",
                c.name, n
            )),
        }
    }
    let mut multi_slot_names: Vec<(&str, &str)> = Vec::new();
    for spec in &g.domain_specs {
        if !class_names.contains(spec.class.as_str()) {
            report.error(alloc::format!(
                "domain specification for undeclared class '{}'",
                spec.class
            ));
        }
        let self_slots = spec.slots.iter().filter(|s| s.holds_self).count();
        if self_slots != 1 {
            report.error(alloc::format!(
                "domain specification for '{}' has {} self slots (exactly one required)",
                spec.class, self_slots
            ));
        }
        let mut names = BTreeSet::new();
        for slot in &spec.slots {
            if !names.insert(&slot.name) {
                report.error(alloc::format!(
                    "domain specification for '{}' repeats slot name '{}'",
                    spec.class, slot.name
                ));
            }
            if slot.cardinality == Cardinality::Empty && !slot.holds_self {
                report.error(alloc::format!(
                    "slot '{}' of '{}' admits no elements and does not hold the word",
                    slot.name, spec.class
                ));
            }
        }
        if spec.slots.len() > 1 {
            for slot in &spec.slots {
                if let Some((other, _)) = multi_slot_names
                    .iter()
                    .find(|(_, n)| *n == slot.name.as_str())
                {
                    report.error(alloc::format!(
                        "slot name '{}' used by both '{}' and '{}'; slot category names must be unique",
                        slot.name, other, spec.class
                    ));
                } else {
                    multi_slot_names.push((spec.class.as_str(), slot.name.as_str()));
                }
            }
        }
    }

    // Predicates.
    let mut seen_preds: Vec<&PrecedencePredicate> = Vec::new();
    for p in &g.predicates {
        if !class_names.contains(p.holder.as_str()) {
            report.error(alloc::format!(
                "precedence predicate for undeclared class '{}'",
                p.holder
            ));
        }
        if let PredicateKind::Before { left, right } = &p.kind {
            for d in [left, right] {
                if !dep_names.contains(d.as_str()) {
                    report.error(alloc::format!(
                        "precedence predicate of '{}' references undeclared dependency '{}'",
                        p.holder, d
                    ));
                }
            }
        }
        if seen_preds.contains(&p) {
            report.warning(alloc::format!(
                "duplicate precedence predicate '{}' for '{}' (deduplicated)",
                p.kind, p.holder
            ));
        } else {
            seen_preds.push(p);
        }
    }

    // Modifier path specifications: exactly one per dependency.
    for d in &g.deps {
        let n = g.path_specs.iter().filter(|p| &p.dep == d).count();
        if n != 1 {
            report.error(alloc::format!(
                "dependency '{}' has {} path specifications (exactly one required)",
                d, n
            ));
        }
    }
    for p in &g.path_specs {
        if !dep_names.contains(p.dep.as_str()) {
            report.error(alloc::format!(
                "path specification for undeclared dependency '{}'",
                p.dep
            ));
        }
        for sym in p.float_path.symbols() {
            if !dep_names.contains(sym) {
                report.error(alloc::format!(
                    "float path of '{}' references undeclared dependency '{}'",
                    p.dep, sym
                ));
            }
        }
    }

    // Lexicon.
    let mut seen_entries = BTreeSet::new();
    for e in &g.lexicon {
        if e.surface.is_empty() {
            report.error("lexical entry with empty surface form".to_string());
        }
        if !seen_entries.insert((&e.surface, &e.class)) {
            report.error(alloc::format!(
                "duplicate lexical entry for '{}' as '{}'",
                e.surface, e.class
            ));
        }
        if !class_names.contains(e.class.as_str()) {
            report.error(alloc::format!(
                "lexical entry '{}' references undeclared class '{}'",
                e.surface, e.class
            ));
        }
        let mut deps_seen = BTreeSet::new();
        for slot in &e.valency {
            if !deps_seen.insert(&slot.dep) {
                report.error(alloc::format!(
                    "entry '{}' repeats valency dependency '{}'",
                    e.surface, slot.dep
                ));
            }
            if !dep_names.contains(slot.dep.as_str()) {
                report.error(alloc::format!(
                    "entry '{}' uses undeclared dependency '{}'",
                    e.surface, slot.dep
                ));
            }
            if !class_names.contains(slot.mod_class.as_str()) {
                report.error(alloc::format!(
                    "entry '{}' requires undeclared class '{}'",
                    e.surface, slot.mod_class
                ));
            }
        }
        for (path, _) in &e.features {
            if path.is_empty() {
                report.error(alloc::format!("entry '{}' has a feature with empty path", e.surface));
                continue;
            }
            for seg in path {
                if RESERVED_ATTRS.contains(&seg.as_str()) {
                    report.error(alloc::format!(
                        "entry '{}' uses reserved attribute '{}' in feature path",
                        e.surface, seg
                    ));
                }
            }
            if dep_names.contains(path[0].as_str()) {
                if path.len() < 2 {
                    report.error(alloc::format!(
                        "entry '{}' has an atomic feature named after dependency '{}'",
                        e.surface, path[0]
                    ));
                } else if e.slot(&path[0]).is_none() {
                    report.error(alloc::format!(
                        "entry '{}' constrains dependency '{}' without a matching valency slot",
                        e.surface, path[0]
                    ));
                }
            }
            for seg in path.iter().skip(1) {
                if dep_names.contains(seg.as_str()) {
                    report.error(alloc::format!(
                        "entry '{}': feature path segment '{}' is a dependency name",
                        e.surface, seg
                    ));
                }
            }
        }
    }

    for r in &g.roots {
        if !class_names.contains(r.as_str()) {
            report.error(alloc::format!("root directive names undeclared class '{}'", r));
        }
    }

    report
}

/// Serialize a grammar to its canonical text form; `load_grammar` on the
/// result reconstructs an equal grammar.
pub fn dump_grammar(g: &Grammar) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    if !g.roots.is_empty() {
        let _ = writeln!(out, "root: {}", g.roots.join(" "));
        out.push('\n');
    }
    let _ = writeln!(out, "classes:");
    for c in &g.classes {
        if c.punct {
            let _ = writeln!(out, "  {} @punct", c.name);
        } else {
            let _ = writeln!(out, "  {}", c.name);
        }
    }
    out.push('\n');
    let _ = writeln!(out, "deps:");
    for d in &g.deps {
        let _ = writeln!(out, "  {}", d);
    }
    out.push('\n');
    let _ = writeln!(out, "domains:");
    for spec in &g.domain_specs {
        let _ = write!(out, "  {}:", spec.class);
        for slot in &spec.slots {
            let mut parts: Vec<String> = Vec::new();
            if let Some(sym) = slot.cardinality.symbol() {
                parts.push(sym.to_string());
            }
            if slot.holds_self {
                parts.push("@self".to_string());
            }
            if let Some(field) = &slot.field {
                parts.push(alloc::format!("field={}", field));
            }
            let _ = write!(out, " {}({})", slot.name, parts.join(" "));
        }
        out.push('\n');
    }
    out.push('\n');
    if !g.predicates.is_empty() {
        let _ = writeln!(out, "predicates:");
        for c in &g.classes {
            let preds: Vec<&PrecedencePredicate> =
                g.predicates.iter().filter(|p| p.holder == c.name).collect();
            if preds.is_empty() {
                continue;
            }
            let _ = write!(out, "  {}:", c.name);
            for p in preds {
                let _ = write!(out, " {}", p.kind);
            }
            out.push('\n');
        }
        out.push('\n');
    }
    let _ = writeln!(out, "paths:");
    for p in &g.path_specs {
        let _ = write!(out, "  {}: {}", p.dep, p.float_path);
        if let Some(field) = &p.target_field {
            let _ = write!(out, " field={}", field);
        }
        out.push('\n');
    }
    out.push('\n');
    let _ = writeln!(out, "lexicon:");
    for e in &g.lexicon {
        let _ = write!(out, "  {} {} lexeme={}", e.surface, e.class, e.lexeme);
        for slot in &e.valency {
            let o = match slot.optionality {
                Optionality::Req => "req",
                Optionality::Opt => "opt",
            };
            let _ = write!(out, " {} {} {}", o, slot.dep, slot.mod_class);
        }
        for (path, atom) in &e.features {
            let _ = write!(out, " {}={}", path.join("."), atom);
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(valency: Vec<ValencySlot>) -> LexicalEntry {
        LexicalEntry {
            surface: "hat".into(),
            class: "Vfin".into(),
            lexeme: "hat".into(),
            valency,
            features: Vec::new(),
        }
    }

    fn slot(optionality: Optionality, dep: &str, class: &str) -> ValencySlot {
        ValencySlot {
            optionality,
            dep: dep.into(),
            mod_class: class.into(),
        }
    }

    #[test]
    fn required_slot_expands_to_single_branch() {
        let schemata = expand_valency(&entry(alloc::vec![slot(Optionality::Req, "SUBJ", "N")]));
        assert_eq!(schemata.len(), 1);
        assert_eq!(schemata[0].branches.len(), 1);
        let branch = &schemata[0].branches[0];
        assert!(matches!(
            &branch[0],
            Constraint::Defining { path, value: Value::Atom(a) }
                if path == &["SUBJ", "CLASS"] && a == "N"
        ));
        assert!(matches!(
            &branch[1],
            Constraint::Existential { path } if path == &["SUBJ", "LEXEME"]
        ));
    }

    #[test]
    fn optional_slot_expands_to_two_branches() {
        let schemata = expand_valency(&entry(alloc::vec![slot(Optionality::Opt, "RELA", "Vfin")]));
        assert_eq!(schemata[0].branches.len(), 2);
        assert!(matches!(
            &schemata[0].branches[0][0],
            Constraint::Negative { path } if path == &["RELA"]
        ));
    }

    #[test]
    fn empty_valency_expands_to_nothing() {
        assert!(expand_valency(&entry(Vec::new())).is_empty());
    }

    #[test]
    fn validate_flags_double_self_slot() {
        let mut g = Grammar::default();
        g.classes.push(WordClass {
            name: "N".into(),
            punct: false,
        });
        g.domain_specs.push(DomainSpec {
            class: "N".into(),
            slots: alloc::vec![
                DomainSlotSpec {
                    name: "a".into(),
                    cardinality: Cardinality::ZeroOrMore,
                    holds_self: true,
                    field: None,
                },
                DomainSlotSpec {
                    name: "b".into(),
                    cardinality: Cardinality::ZeroOrMore,
                    holds_self: true,
                    field: None,
                },
            ],
        });
        let report = validate_grammar(&g);
        assert!(report
            .items
            .iter()
            .any(|i| i.severity == Severity::Error && i.message.contains("self slots")));
    }

    #[test]
    fn validate_warns_on_duplicate_predicates() {
        let mut g = Grammar::default();
        g.classes.push(WordClass {
            name: "Vfin".into(),
            punct: false,
        });
        g.domain_specs.push(DomainSpec {
            class: "Vfin".into(),
            slots: alloc::vec![DomainSlotSpec {
                name: "main".into(),
                cardinality: Cardinality::ZeroOrMore,
                holds_self: true,
                field: None,
            }],
        });
        g.deps.push("OBJ".into());
        g.deps.push("VPART".into());
        for d in ["OBJ", "VPART"] {
            g.path_specs.push(ModifierPathSpec {
                dep: d.into(),
                float_path: RegPath::Epsilon,
                target_field: None,
            });
        }
        let pred = PrecedencePredicate {
            holder: "Vfin".into(),
            kind: PredicateKind::Before {
                left: "OBJ".into(),
                right: "VPART".into(),
            },
        };
        g.predicates.push(pred.clone());
        g.predicates.push(pred);
        let report = validate_grammar(&g);
        assert_eq!(
            report
                .items
                .iter()
                .filter(|i| i.severity == Severity::Warning)
                .count(),
            1
        );
        assert_eq!(g.predicates_for("Vfin").len(), 1);
    }
}
