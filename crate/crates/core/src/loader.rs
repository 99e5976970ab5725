//! Text format loader for grammar files.
//!
//! The format is line oriented. `#` starts a comment. A `root:` directive
//! names the classes whose domain sequence may root a sentence. Sections are
//! introduced by `classes:`, `deps:`, `templates:`, `domains:`,
//! `predicates:`, `paths:` and `lexicon:`; their items follow one per line.
//! Templates are a pure load-time macro facility: `@(NAME arg ...)` is
//! replaced textually by the template body before the line is parsed, so
//! templates never appear in the resolved grammar.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::grammar::{
    Cardinality, DomainSlotSpec, DomainSpec, Grammar, LexicalEntry, ModifierPathSpec, Optionality,
    PrecedencePredicate, PredicateKind, ValencySlot, WordClass,
};
use crate::regpath;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl LoadError {
    fn new(line: usize, column: usize, message: String) -> Self {
        LoadError {
            line,
            column,
            message,
        }
    }
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}:{}: {}", self.line, self.column, self.message)
    }
}

impl core::error::Error for LoadError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Classes,
    Deps,
    Templates,
    Domains,
    Predicates,
    Paths,
    Lexicon,
}

struct Template {
    params: Vec<String>,
    body: String,
}

/// Parse grammar file contents into a resolved [`Grammar`]. Syntax errors,
/// references to undeclared classes or dependencies, and duplicate
/// declarations are reported with their line.
pub fn load_grammar(text: &str) -> Result<Grammar, LoadError> {
    let mut g = Grammar::default();
    let mut templates: BTreeMap<String, Template> = BTreeMap::new();
    let mut section: Option<Section> = None;
    let mut saw_root = false;

    // First pass: collect declarations and raw item lines so later sections
    // can reference classes and dependencies declared after them.
    let mut items: Vec<(usize, Section, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("root:") {
            if saw_root {
                return Err(LoadError::new(lineno, 1, "duplicate root directive".into()));
            }
            saw_root = true;
            g.roots = rest.split_whitespace().map(|s| s.to_string()).collect();
            continue;
        }
        let new_section = match trimmed {
            "classes:" => Some(Section::Classes),
            "deps:" => Some(Section::Deps),
            "templates:" => Some(Section::Templates),
            "domains:" => Some(Section::Domains),
            "predicates:" => Some(Section::Predicates),
            "paths:" => Some(Section::Paths),
            "lexicon:" => Some(Section::Lexicon),
            _ => None,
        };
        if let Some(s) = new_section {
            section = Some(s);
            continue;
        }
        match section {
            None => {
                return Err(LoadError::new(
                    lineno,
                    1,
                    alloc::format!("expected a section header, found '{}'", trimmed),
                ))
            }
            Some(s) => items.push((lineno, s, trimmed.to_string())),
        }
    }

    // Template definitions must be collected before anything expands them.
    for (lineno, section, line) in &items {
        if *section == Section::Templates {
            let (name, template) = parse_template(*lineno, line)?;
            if templates.contains_key(&name) {
                return Err(LoadError::new(
                    *lineno,
                    1,
                    alloc::format!("duplicate template '{}'", name),
                ));
            }
            templates.insert(name, template);
        }
    }

    for (lineno, section, line) in &items {
        let lineno = *lineno;
        if *section == Section::Templates {
            continue;
        }
        let line = expand_templates(lineno, line, &templates)?;
        match section {
            Section::Classes => {
                let mut toks = line.split_whitespace();
                let name = toks.next().unwrap().to_string();
                let mut punct = false;
                for t in toks {
                    match t {
                        "@punct" => punct = true,
                        other => {
                            return Err(LoadError::new(
                                lineno,
                                1,
                                alloc::format!("unexpected token '{}' in class declaration", other),
                            ))
                        }
                    }
                }
                if g.classes.iter().any(|c| c.name == name) {
                    return Err(LoadError::new(
                        lineno,
                        1,
                        alloc::format!("duplicate word class '{}'", name),
                    ));
                }
                g.classes.push(WordClass { name, punct });
            }
            Section::Deps => {
                for name in line.split_whitespace() {
                    if g.deps.iter().any(|d| d == name) {
                        return Err(LoadError::new(
                            lineno,
                            1,
                            alloc::format!("duplicate dependency type '{}'", name),
                        ));
                    }
                    g.deps.push(name.to_string());
                }
            }
            Section::Domains => {
                let (class, rest) = split_head(lineno, &line)?;
                if g.domain_specs.iter().any(|d| d.class == class) {
                    return Err(LoadError::new(
                        lineno,
                        1,
                        alloc::format!("duplicate domain specification for '{}'", class),
                    ));
                }
                let slots = parse_slots(lineno, rest)?;
                g.domain_specs.push(DomainSpec { class, slots });
            }
            Section::Predicates => {
                let (class, rest) = split_head(lineno, &line)?;
                for tok in rest.split_whitespace() {
                    let kind = match tok {
                        "self-first" => PredicateKind::SelfFirst,
                        "self-last" => PredicateKind::SelfLast,
                        other => match other.split_once('<') {
                            Some((l, r)) if !l.is_empty() && !r.is_empty() => {
                                PredicateKind::Before {
                                    left: l.to_string(),
                                    right: r.to_string(),
                                }
                            }
                            _ => {
                                return Err(LoadError::new(
                                    lineno,
                                    1,
                                    alloc::format!("malformed predicate '{}'", other),
                                ))
                            }
                        },
                    };
                    g.predicates.push(PrecedencePredicate {
                        holder: class.clone(),
                        kind,
                    });
                }
            }
            Section::Paths => {
                let (dep, rest) = split_head(lineno, &line)?;
                if g.path_specs.iter().any(|p| p.dep == dep) {
                    return Err(LoadError::new(
                        lineno,
                        1,
                        alloc::format!("duplicate path specification for '{}'", dep),
                    ));
                }
                let mut toks: Vec<&str> = rest.split_whitespace().collect();
                let mut target_field = None;
                if let Some(last) = toks.last() {
                    if let Some(f) = last.strip_prefix("field=") {
                        target_field = Some(f.to_string());
                        toks.pop();
                    }
                }
                let expr = toks.join(" ");
                let float_path = regpath::parse(&expr).map_err(|e| {
                    LoadError::new(lineno, e.offset + 1, alloc::format!("bad float path: {}", e.message))
                })?;
                g.path_specs.push(ModifierPathSpec {
                    dep,
                    float_path,
                    target_field,
                });
            }
            Section::Lexicon => {
                let entry = parse_entry(lineno, &line)?;
                if g
                    .lexicon
                    .iter()
                    .any(|e| e.surface == entry.surface && e.class == entry.class)
                {
                    return Err(LoadError::new(
                        lineno,
                        1,
                        alloc::format!(
                            "duplicate lexical entry for '{}' as '{}'",
                            entry.surface, entry.class
                        ),
                    ));
                }
                g.lexicon.push(entry);
            }
            Section::Templates => unreachable!(),
        }
    }

    check_references(&g, &items)?;
    Ok(g)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn split_head(lineno: usize, line: &str) -> Result<(String, &str), LoadError> {
    match line.split_once(':') {
        Some((head, rest)) if !head.trim().is_empty() => Ok((head.trim().to_string(), rest)),
        _ => Err(LoadError::new(
            lineno,
            1,
            alloc::format!("expected 'name: ...', found '{}'", line),
        )),
    }
}

fn parse_slots(lineno: usize, rest: &str) -> Result<Vec<DomainSlotSpec>, LoadError> {
    let mut slots = Vec::new();
    let mut remaining = rest.trim();
    while !remaining.is_empty() {
        let open = remaining.find('(').ok_or_else(|| {
            LoadError::new(
                lineno,
                1,
                alloc::format!("expected 'slot(...)', found '{}'", remaining),
            )
        })?;
        let close = remaining[open..].find(')').ok_or_else(|| {
            LoadError::new(lineno, open + 1, "unterminated slot specification".into())
        })? + open;
        let name = remaining[..open].trim();
        if name.is_empty() {
            return Err(LoadError::new(lineno, open + 1, "slot without a name".into()));
        }
        let mut cardinality: Option<Cardinality> = None;
        let mut holds_self = false;
        let mut field = None;
        for tok in remaining[open + 1..close].split_whitespace() {
            match tok {
                "*" => set_card(lineno, &mut cardinality, Cardinality::ZeroOrMore)?,
                "?" => set_card(lineno, &mut cardinality, Cardinality::AtMostOne)?,
                "+" => set_card(lineno, &mut cardinality, Cardinality::AtLeastOne)?,
                "!" => set_card(lineno, &mut cardinality, Cardinality::ExactlyOne)?,
                "@self" => holds_self = true,
                other => match other.strip_prefix("field=") {
                    Some(f) if !f.is_empty() => field = Some(f.to_string()),
                    _ => {
                        return Err(LoadError::new(
                            lineno,
                            1,
                            alloc::format!("unexpected token '{}' in slot specification", other),
                        ))
                    }
                },
            }
        }
        let cardinality = match (cardinality, holds_self) {
            (Some(c), _) => c,
            (None, true) => Cardinality::Empty,
            (None, false) => {
                return Err(LoadError::new(
                    lineno,
                    1,
                    alloc::format!("slot '{}' needs a cardinality or @self", name),
                ))
            }
        };
        slots.push(DomainSlotSpec {
            name: name.to_string(),
            cardinality,
            holds_self,
            field,
        });
        remaining = remaining[close + 1..].trim_start();
    }
    if slots.is_empty() {
        return Err(LoadError::new(lineno, 1, "domain specification without slots".into()));
    }
    Ok(slots)
}

fn set_card(
    lineno: usize,
    slot: &mut Option<Cardinality>,
    value: Cardinality,
) -> Result<(), LoadError> {
    if slot.is_some() {
        return Err(LoadError::new(lineno, 1, "slot has two cardinality marks".into()));
    }
    *slot = Some(value);
    Ok(())
}

fn parse_entry(lineno: usize, line: &str) -> Result<LexicalEntry, LoadError> {
    let mut toks = line.split_whitespace().peekable();
    let surface = toks
        .next()
        .ok_or_else(|| LoadError::new(lineno, 1, "empty lexical entry".into()))?
        .to_string();
    let class = toks
        .next()
        .ok_or_else(|| LoadError::new(lineno, 1, "lexical entry without a word class".into()))?
        .to_string();
    let mut lexeme = None;
    let mut valency = Vec::new();
    let mut features = Vec::new();
    while let Some(tok) = toks.next() {
        if tok == "req" || tok == "opt" {
            let optionality = if tok == "req" {
                Optionality::Req
            } else {
                Optionality::Opt
            };
            let dep = toks.next().ok_or_else(|| {
                LoadError::new(lineno, 1, alloc::format!("'{}' needs a dependency and a class", tok))
            })?;
            let mod_class = toks.next().ok_or_else(|| {
                LoadError::new(lineno, 1, alloc::format!("'{} {}' needs a class", tok, dep))
            })?;
            valency.push(ValencySlot {
                optionality,
                dep: dep.to_string(),
                mod_class: mod_class.to_string(),
            });
        } else if let Some((key, value)) = tok.split_once('=') {
            if key.is_empty() || value.is_empty() {
                return Err(LoadError::new(
                    lineno,
                    1,
                    alloc::format!("malformed attribute '{}'", tok),
                ));
            }
            if key == "lexeme" {
                lexeme = Some(value.to_string());
            } else {
                let path: Vec<String> = key.split('.').map(|s| s.to_string()).collect();
                if path.iter().any(|s| s.is_empty()) {
                    return Err(LoadError::new(
                        lineno,
                        1,
                        alloc::format!("malformed feature path '{}'", key),
                    ));
                }
                features.push((path, value.to_string()));
            }
        } else {
            return Err(LoadError::new(
                lineno,
                1,
                alloc::format!("unexpected token '{}' in lexical entry", tok),
            ));
        }
    }
    let lexeme = lexeme.unwrap_or_else(|| surface.clone());
    Ok(LexicalEntry {
        surface,
        class,
        lexeme,
        valency,
        features,
    })
}

fn parse_template(lineno: usize, line: &str) -> Result<(String, Template), LoadError> {
    let (head, body) = line.split_once('=').ok_or_else(|| {
        LoadError::new(lineno, 1, "template definition needs 'NAME(params) = body'".into())
    })?;
    let head = head.trim();
    let open = head
        .find('(')
        .ok_or_else(|| LoadError::new(lineno, 1, "template head needs a parameter list".into()))?;
    let close = head
        .rfind(')')
        .filter(|&c| c > open)
        .ok_or_else(|| LoadError::new(lineno, 1, "unterminated template parameter list".into()))?;
    let name = head[..open].trim().to_string();
    if name.is_empty() {
        return Err(LoadError::new(lineno, 1, "template without a name".into()));
    }
    let params: Vec<String> = head[open + 1..close]
        .split_whitespace()
        .map(|s| s.to_string())
        .collect();
    Ok((
        name,
        Template {
            params,
            body: body.trim().to_string(),
        },
    ))
}

fn expand_templates(
    lineno: usize,
    line: &str,
    templates: &BTreeMap<String, Template>,
) -> Result<String, LoadError> {
    let mut current = line.to_string();
    for _ in 0..16 {
        let Some(start) = current.find("@(") else {
            return Ok(current);
        };
        let mut depth = 0usize;
        let mut end = None;
        for (i, c) in current[start..].char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(start + i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| {
            LoadError::new(lineno, start + 1, "unterminated template invocation".into())
        })?;
        let inside = &current[start + 2..end];
        let mut parts = inside.split_whitespace();
        let name = parts.next().ok_or_else(|| {
            LoadError::new(lineno, start + 1, "template invocation without a name".into())
        })?;
        let args: Vec<&str> = parts.collect();
        let template = templates.get(name).ok_or_else(|| {
            LoadError::new(lineno, start + 1, alloc::format!("unknown template '{}'", name))
        })?;
        if args.len() != template.params.len() {
            return Err(LoadError::new(
                lineno,
                start + 1,
                alloc::format!(
                    "template '{}' expects {} arguments, got {}",
                    name,
                    template.params.len(),
                    args.len()
                ),
            ));
        }
        let mut expansion = template.body.clone();
        for (param, arg) in template.params.iter().zip(&args) {
            expansion = expansion.replace(&alloc::format!("${}", param), arg);
        }
        current = alloc::format!("{}{}{}", &current[..start], expansion, &current[end + 1..]);
    }
    Err(LoadError::new(
        lineno,
        1,
        "template expansion did not terminate (recursive templates?)".into(),
    ))
}

/// Hard reference checks, with the line of the offending item.
fn check_references(g: &Grammar, items: &[(usize, Section, String)]) -> Result<(), LoadError> {
    let class_known = |name: &str| g.classes.iter().any(|c| c.name == name);
    let dep_known = |name: &str| g.deps.iter().any(|d| d == name);

    for r in &g.roots {
        if !class_known(r) {
            return Err(LoadError::new(
                1,
                1,
                alloc::format!("root directive references undeclared class '{}'", r),
            ));
        }
    }
    for (lineno, section, line) in items {
        match section {
            Section::Domains | Section::Predicates => {
                let head = line.split(':').next().unwrap_or("").trim();
                if !class_known(head) {
                    return Err(LoadError::new(
                        *lineno,
                        1,
                        alloc::format!("undeclared class '{}'", head),
                    ));
                }
                if *section == Section::Predicates {
                    for p in g.predicates.iter().filter(|p| p.holder == head) {
                        if let PredicateKind::Before { left, right } = &p.kind {
                            for d in [left, right] {
                                if !dep_known(d) {
                                    return Err(LoadError::new(
                                        *lineno,
                                        1,
                                        alloc::format!("undeclared dependency '{}'", d),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
            Section::Paths => {
                let head = line.split(':').next().unwrap_or("").trim();
                if !dep_known(head) {
                    return Err(LoadError::new(
                        *lineno,
                        1,
                        alloc::format!("undeclared dependency '{}'", head),
                    ));
                }
                if let Some(spec) = g.path_spec(head) {
                    for sym in spec.float_path.symbols() {
                        if !dep_known(sym) {
                            return Err(LoadError::new(
                                *lineno,
                                1,
                                alloc::format!("undeclared dependency '{}' in float path", sym),
                            ));
                        }
                    }
                }
            }
            Section::Lexicon => {
                let surface = line.split_whitespace().next().unwrap_or("");
                for e in g.lexicon.iter().filter(|e| e.surface == surface) {
                    if !class_known(&e.class) {
                        return Err(LoadError::new(
                            *lineno,
                            1,
                            alloc::format!("undeclared class '{}'", e.class),
                        ));
                    }
                    for slot in &e.valency {
                        if !dep_known(&slot.dep) {
                            return Err(LoadError::new(
                                *lineno,
                                1,
                                alloc::format!("undeclared dependency '{}'", slot.dep),
                            ));
                        }
                        if !class_known(&slot.mod_class) {
                            return Err(LoadError::new(
                                *lineno,
                                1,
                                alloc::format!("undeclared class '{}'", slot.mod_class),
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::{dump_grammar, validate_grammar};

    const TINY: &str = "
root: N

classes:
  N
  D

deps:
  SPEC

templates:
  VALENCY(o d c) = $o $d $c

domains:
  N: main(* @self)
  D: main(@self)

paths:
  SPEC: -

lexicon:
  hund N lexeme=hund @(VALENCY opt SPEC D)
  der D
";

    #[test]
    fn loads_and_expands_templates() {
        let g = load_grammar(TINY).unwrap();
        assert_eq!(g.classes.len(), 2);
        assert_eq!(g.lexicon[0].valency.len(), 1);
        assert_eq!(g.lexicon[0].valency[0].dep, "SPEC");
        assert_eq!(g.lexicon[1].lexeme, "der");
        assert!(validate_grammar(&g).is_empty());
    }

    #[test]
    fn empty_sections_are_valid() {
        let g = load_grammar("classes:\ndeps:\nlexicon:\n").unwrap();
        assert!(g.classes.is_empty());
        assert!(g.deps.is_empty());
        assert!(g.lexicon.is_empty());
    }

    #[test]
    fn undeclared_class_is_reported_with_line() {
        let text = "classes:\n  N\ndeps:\ndomains:\n  N: main(* @self)\npaths:\nlexicon:\n  hund X\n";
        let err = load_grammar(text).unwrap_err();
        assert!(err.message.contains("'X'"), "{}", err);
        assert_eq!(err.line, 8);
    }

    #[test]
    fn duplicate_declarations_are_errors() {
        let err = load_grammar("classes:\n  N\n  N\n").unwrap_err();
        assert!(err.message.contains("duplicate word class"));
    }

    #[test]
    fn recursive_templates_error_out() {
        let text = "templates:\n  A(x) = @(A $x)\nlexicon:\n  w N @(A y)\n";
        let err = load_grammar(text).unwrap_err();
        assert!(err.message.contains("did not terminate"));
    }

    #[test]
    fn dump_round_trips() {
        let g = load_grammar(TINY).unwrap();
        let dumped = dump_grammar(&g);
        let g2 = load_grammar(&dumped).unwrap();
        assert_eq!(g, g2);
        assert_eq!(dump_grammar(&g2), dumped);
    }
}
