//! Compilation of domain specifications into an annotated context-free
//! backbone.
//!
//! Every word class `C` gets a category `domC` for its order domain
//! sequence. Single-slot classes get one plain rule; multi-slot classes get
//! one rule per slot plus a sequencing metacategory `domC = domSLOT ...`
//! whose expansion is attached directly to the mother node, so `domC` never
//! shows up in a c-structure. `DOMAIN` is the union of all domain
//! categories and marks the positions where modifier domains may be placed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::grammar::{Cardinality, Grammar};

pub const START_CATEGORY: &str = "TOP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatKind {
    /// Domain of a single-slot word class (`domN`).
    Domain,
    /// One slot of a multi-slot class (`domINITIAL`).
    Slot,
    /// Word class preterminal (`Vfin`).
    Preterminal,
    /// Synthetic start category.
    Start,
    /// Expansion point of a sequencing metacategory; dissolved in reported
    /// c-structures.
    Splice,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatMeta {
    pub kind: CatKind,
    pub class: Option<String>,
    pub slot: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rep {
    One,
    Optional,
    Star,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhsSym {
    Cat(String),
    /// An order-domain position. `None` matches the full DOMAIN union;
    /// a set restricts it to the domains of the named classes.
    Domain(Option<BTreeSet<String>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsItem {
    pub sym: RhsSym,
    pub rep: Rep,
    /// Head identification: this child's structure is the domain's.
    pub head: bool,
    /// Field assigned to whatever is placed here.
    pub field: Option<String>,
}

impl RhsItem {
    fn cat(name: &str) -> Self {
        RhsItem {
            sym: RhsSym::Cat(name.to_string()),
            rep: Rep::One,
            head: false,
            field: None,
        }
    }

    fn domain(rep: Rep, field: Option<&String>) -> Self {
        RhsItem {
            sym: RhsSym::Domain(None),
            rep,
            head: false,
            field: field.cloned(),
        }
    }

    /// Modifier placement applies to every non-head child.
    pub fn is_modifier(&self) -> bool {
        !self.head
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackboneRule {
    pub lhs: String,
    pub rhs: Vec<RhsItem>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BackboneRuleSet {
    pub rules: Vec<BackboneRule>,
    pub start: String,
    /// Sequencing metacategories: name -> expansion.
    pub metacats: Vec<(String, Vec<String>)>,
    /// Domain category of every word class, in declaration order.
    pub domain_union: Vec<String>,
    pub categories: BTreeMap<String, CatMeta>,
}

impl BackboneRuleSet {
    pub fn meta(&self, cat: &str) -> Option<&CatMeta> {
        self.categories.get(cat)
    }

    pub fn metacat(&self, name: &str) -> Option<&[String]> {
        self.metacats
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, seq)| seq.as_slice())
    }
}

pub fn domain_cat_name(class: &str) -> String {
    alloc::format!("dom{}", class)
}

pub fn slot_cat_name(slot: &str) -> String {
    alloc::format!("dom{}", slot.to_uppercase())
}

/// Compile the grammar's domain specifications into backbone rules.
/// Annotations attach head identification to the self preterminal and
/// modifier placement plus field assignment to every DOMAIN occurrence.
pub fn compile_domains(g: &Grammar) -> BackboneRuleSet {
    let mut rs = BackboneRuleSet {
        start: START_CATEGORY.to_string(),
        ..Default::default()
    };
    rs.categories.insert(
        START_CATEGORY.to_string(),
        CatMeta {
            kind: CatKind::Start,
            class: None,
            slot: None,
        },
    );
    for root in &g.roots {
        let mut item = RhsItem::cat(&domain_cat_name(root));
        item.head = true;
        rs.rules.push(BackboneRule {
            lhs: START_CATEGORY.to_string(),
            rhs: alloc::vec![item],
        });
    }
    for class in &g.classes {
        let Some(spec) = g.domain_spec(&class.name) else {
            continue;
        };
        let dom = domain_cat_name(&class.name);
        rs.domain_union.push(dom.clone());
        rs.categories.insert(
            class.name.clone(),
            CatMeta {
                kind: CatKind::Preterminal,
                class: Some(class.name.clone()),
                slot: None,
            },
        );
        if spec.slots.len() == 1 {
            let slot = &spec.slots[0];
            rs.categories.insert(
                dom.clone(),
                CatMeta {
                    kind: CatKind::Domain,
                    class: Some(class.name.clone()),
                    slot: Some(slot.name.clone()),
                },
            );
            rs.rules.push(BackboneRule {
                lhs: dom,
                rhs: slot_rhs(slot, &class.name),
            });
        } else {
            let mut seq = Vec::new();
            for slot in &spec.slots {
                let slot_cat = slot_cat_name(&slot.name);
                seq.push(slot_cat.clone());
                rs.categories.insert(
                    slot_cat.clone(),
                    CatMeta {
                        kind: CatKind::Slot,
                        class: Some(class.name.clone()),
                        slot: Some(slot.name.clone()),
                    },
                );
                rs.rules.push(BackboneRule {
                    lhs: slot_cat,
                    rhs: slot_rhs(slot, &class.name),
                });
            }
            rs.categories.insert(
                dom.clone(),
                CatMeta {
                    kind: CatKind::Splice,
                    class: Some(class.name.clone()),
                    slot: None,
                },
            );
            rs.metacats.push((dom, seq));
        }
    }
    rs
}

/// Right-hand side for one domain slot. A slot holding the word itself with
/// unrestricted cardinality puts the preterminal between two independent
/// stars; bounded cardinalities place the elements before the word.
fn slot_rhs(slot: &crate::grammar::DomainSlotSpec, class: &str) -> Vec<RhsItem> {
    let field = slot.field.as_ref();
    let mut head = RhsItem::cat(class);
    head.head = true;
    let dom = |rep| RhsItem::domain(rep, field);
    match (slot.holds_self, slot.cardinality) {
        (true, Cardinality::Empty) => alloc::vec![head],
        (true, Cardinality::ZeroOrMore) => alloc::vec![dom(Rep::Star), head, dom(Rep::Star)],
        (true, Cardinality::AtMostOne) => alloc::vec![dom(Rep::Optional), head],
        (true, Cardinality::AtLeastOne) => alloc::vec![dom(Rep::One), dom(Rep::Star), head],
        (true, Cardinality::ExactlyOne) => alloc::vec![dom(Rep::One), head],
        (false, Cardinality::ZeroOrMore) => alloc::vec![dom(Rep::Star)],
        (false, Cardinality::AtMostOne) => alloc::vec![dom(Rep::Optional)],
        (false, Cardinality::AtLeastOne) => alloc::vec![dom(Rep::One), dom(Rep::Star)],
        (false, Cardinality::ExactlyOne) => alloc::vec![dom(Rep::One)],
        (false, Cardinality::Empty) => Vec::new(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetacatCycle {
    pub name: String,
}

impl fmt::Display for MetacatCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cyclic metacategory definition involving '{}'", self.name)
    }
}

impl core::error::Error for MetacatCycle {}

/// Resolve sequencing metacategories. Each metacategory becomes a splice
/// rule whose children are attached to the referencing rule's mother node
/// when trees are reported, so no metacategory node ever appears in a
/// c-structure. Aliases of aliases are flattened.
pub fn expand_metacategories(rs: &BackboneRuleSet) -> Result<BackboneRuleSet, MetacatCycle> {
    let mut out = rs.clone();

    // Flatten each metacategory's sequence down to concrete categories.
    let mut flat: Vec<(String, Vec<String>)> = Vec::new();
    for (name, _) in &rs.metacats {
        let mut seq = Vec::new();
        let mut stack = alloc::vec![name.clone()];
        flatten(rs, name, &mut seq, &mut stack)?;
        flat.push((name.clone(), seq));
    }
    out.metacats = flat.clone();

    for (name, seq) in &flat {
        out.rules.push(BackboneRule {
            lhs: name.clone(),
            rhs: seq.iter().map(|c| RhsItem::cat(c)).collect(),
        });
    }
    Ok(out)
}

fn flatten(
    rs: &BackboneRuleSet,
    name: &str,
    seq: &mut Vec<String>,
    stack: &mut Vec<String>,
) -> Result<(), MetacatCycle> {
    let Some(expansion) = rs.metacat(name) else {
        return Ok(());
    };
    let expansion: Vec<String> = expansion.to_vec();
    for element in expansion {
        if stack.iter().any(|s| *s == element) {
            return Err(MetacatCycle { name: element });
        }
        if rs.metacat(&element).is_some() {
            stack.push(element.clone());
            flatten(rs, &element, seq, stack)?;
            stack.pop();
        } else {
            seq.push(element);
        }
    }
    Ok(())
}

/// Narrow every DOMAIN occurrence to the domains of classes that can
/// actually be placed there, given the lexicon's valencies and the float
/// paths. The set of strings accepted by the full pipeline is unchanged;
/// rules whose mandatory DOMAIN becomes unsatisfiable are dropped.
pub fn specialize_domain_union(rs: &BackboneRuleSet, g: &Grammar) -> BackboneRuleSet {
    let mut out = rs.clone();
    let mut placeable: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for class in &g.classes {
        placeable.insert(class.name.clone(), placeable_classes(g, &class.name));
    }
    let mut kept = Vec::new();
    for rule in &out.rules {
        let host = match rs.meta(&rule.lhs) {
            Some(meta)
                if matches!(meta.kind, CatKind::Domain | CatKind::Slot) =>
            {
                meta.class.clone()
            }
            _ => None,
        };
        let Some(host) = host else {
            kept.push(rule.clone());
            continue;
        };
        let allowed = placeable.get(&host).cloned().unwrap_or_default();
        let mut rhs = Vec::new();
        let mut dead = false;
        for item in &rule.rhs {
            if !matches!(item.sym, RhsSym::Domain(_)) {
                rhs.push(item.clone());
                continue;
            }
            if allowed.is_empty() {
                match item.rep {
                    Rep::One => {
                        dead = true;
                        break;
                    }
                    Rep::Optional | Rep::Star => continue,
                }
            }
            let mut narrowed = item.clone();
            narrowed.sym = RhsSym::Domain(Some(allowed.clone()));
            rhs.push(narrowed);
        }
        if !dead {
            kept.push(BackboneRule {
                lhs: rule.lhs.clone(),
                rhs,
            });
        }
    }
    out.rules = kept;
    out
}

/// Classes whose domain sequence may be placed in a domain of `host`:
/// reachable via some dependency's float path over class-level valencies.
fn placeable_classes(g: &Grammar, host: &str) -> BTreeSet<String> {
    // Class-level dependency arcs derived from the lexicon.
    let mut arcs: BTreeSet<(String, String, String)> = BTreeSet::new();
    for e in &g.lexicon {
        for slot in &e.valency {
            arcs.insert((e.class.clone(), slot.dep.clone(), slot.mod_class.clone()));
        }
    }
    let mut result = BTreeSet::new();
    for spec in &g.path_specs {
        let nfa = spec.float_path.compile();
        // Breadth-first product of classes and NFA state sets.
        let mut frontier = alloc::vec![(host.to_string(), nfa.start_set())];
        let mut seen: BTreeSet<(String, Vec<bool>)> = frontier.iter().cloned().collect();
        while let Some((class, states)) = frontier.pop() {
            if nfa.is_accepting(&states) {
                for (from, dep, to) in &arcs {
                    if *from == class && *dep == spec.dep {
                        result.insert(to.clone());
                    }
                }
            }
            for (from, dep, to) in &arcs {
                if *from != class {
                    continue;
                }
                let next = nfa.step(&states, dep);
                if nfa.is_dead(&next) {
                    continue;
                }
                let key = (to.clone(), next.clone());
                if seen.insert(key) {
                    frontier.push((to.clone(), next));
                }
            }
        }
    }
    result
}

/// Render the rule set in the order-domain rule notation used by grammar
/// writers: `->` rules with `*` for iteration and `( ... )` for optional
/// positions, `=` for metacategory definitions, and the DOMAIN union first.
pub fn dump_backbone(rs: &BackboneRuleSet) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "DOMAIN = {{ {} }}.", rs.domain_union.join(" | "));
    for rule in rs.rules.iter().filter(|r| r.lhs == rs.start) {
        let _ = writeln!(out, "{}", rule_line(rule));
    }
    let mut printed = BTreeSet::new();
    for (name, seq) in &rs.metacats {
        if printed.insert(name.clone()) {
            let _ = writeln!(out, "{} = {}.", name, seq.join(" "));
        }
    }
    for rule in &rs.rules {
        if rule.lhs == rs.start || rs.metacat(&rule.lhs).is_some() {
            continue;
        }
        let _ = writeln!(out, "{}", rule_line(rule));
    }
    out
}

fn rule_line(rule: &BackboneRule) -> String {
    use core::fmt::Write;
    let mut line = String::new();
    let _ = write!(line, "{} ->", rule.lhs);
    for item in &rule.rhs {
        let base = match &item.sym {
            RhsSym::Cat(c) => c.clone(),
            RhsSym::Domain(None) => "DOMAIN".to_string(),
            RhsSym::Domain(Some(set)) => {
                if set.is_empty() {
                    "{ }".to_string()
                } else {
                    alloc::format!(
                        "{{ {} }}",
                        set.iter()
                            .map(|c| domain_cat_name(c))
                            .collect::<Vec<_>>()
                            .join(" | ")
                    )
                }
            }
        };
        match item.rep {
            Rep::One => {
                let _ = write!(line, " {}", base);
            }
            Rep::Star => {
                let _ = write!(line, " {}*", base);
            }
            Rep::Optional => {
                let _ = write!(line, " ( {} )", base);
            }
        }
    }
    line.push('.');
    line
}
