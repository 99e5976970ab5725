//! Regular expressions over symbol alphabets.
//!
//! Both float paths (over dependency names) and uncertainty paths (over
//! attribute names) are regular languages over symbols rather than
//! characters. The supported constructs are exactly: atoms, concatenation,
//! disjunction `{a|b}`, optionality `(a)`, and Kleene star `a*`.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum RegPath {
    /// The language containing only the empty sequence.
    Epsilon,
    Atom(String),
    Seq(Vec<RegPath>),
    Alt(Vec<RegPath>),
    Opt(Box<RegPath>),
    Star(Box<RegPath>),
}

impl RegPath {
    /// True if the language is exactly `{ε}`, i.e. forces continuous
    /// attachment when used as a float path.
    pub fn is_epsilon_only(&self) -> bool {
        match self {
            RegPath::Epsilon => true,
            RegPath::Seq(parts) => parts.iter().all(|p| p.is_epsilon_only()),
            RegPath::Alt(parts) => !parts.is_empty() && parts.iter().all(|p| p.is_epsilon_only()),
            RegPath::Opt(inner) | RegPath::Star(inner) => inner.is_epsilon_only(),
            RegPath::Atom(_) => false,
        }
    }

    /// Every symbol mentioned anywhere in the expression.
    pub fn symbols(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            RegPath::Epsilon => {}
            RegPath::Atom(s) => out.push(s),
            RegPath::Seq(ps) | RegPath::Alt(ps) => {
                for p in ps {
                    p.collect_symbols(out);
                }
            }
            RegPath::Opt(p) | RegPath::Star(p) => p.collect_symbols(out),
        }
    }

    /// Compile to an epsilon-free NFA for matching.
    pub fn compile(&self) -> Nfa {
        let mut nfa = Nfa {
            states: 2,
            edges: Vec::new(),
            start: 0,
            accept: 1,
        };
        let frag = nfa.build(self);
        nfa.edges.push(NfaEdge {
            from: 0,
            to: frag.start,
            label: None,
        });
        nfa.edges.push(NfaEdge {
            from: frag.end,
            to: 1,
            label: None,
        });
        nfa
    }

    /// Whether `seq` is in the language.
    pub fn matches<S: AsRef<str>>(&self, seq: &[S]) -> bool {
        self.compile().matches(seq)
    }
}

impl fmt::Display for RegPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegPath::Epsilon => write!(f, "-"),
            RegPath::Atom(s) => write!(f, "{}", s),
            RegPath::Seq(ps) => {
                let mut first = true;
                for p in ps {
                    if !first {
                        write!(f, " ")?;
                    }
                    first = false;
                    write!(f, "{}", p)?;
                }
                Ok(())
            }
            RegPath::Alt(ps) => {
                write!(f, "{{")?;
                let mut first = true;
                for p in ps {
                    if !first {
                        write!(f, "|")?;
                    }
                    first = false;
                    write!(f, "{}", p)?;
                }
                write!(f, "}}")
            }
            RegPath::Opt(p) => write!(f, "({})", p),
            RegPath::Star(p) => match **p {
                RegPath::Atom(_) | RegPath::Alt(_) | RegPath::Opt(_) => write!(f, "{}*", p),
                _ => write!(f, "{{{}}}*", p),
            },
        }
    }
}

struct Frag {
    start: usize,
    end: usize,
}

#[derive(Debug, Clone)]
struct NfaEdge {
    from: usize,
    to: usize,
    /// `None` is an epsilon edge.
    label: Option<String>,
}

/// Thompson-style NFA over symbols.
#[derive(Debug, Clone)]
pub struct Nfa {
    states: usize,
    edges: Vec<NfaEdge>,
    start: usize,
    accept: usize,
}

impl Nfa {
    fn fresh(&mut self) -> usize {
        let s = self.states;
        self.states += 1;
        s
    }

    fn build(&mut self, re: &RegPath) -> Frag {
        match re {
            RegPath::Epsilon => {
                let s = self.fresh();
                Frag { start: s, end: s }
            }
            RegPath::Atom(a) => {
                let s = self.fresh();
                let e = self.fresh();
                self.edges.push(NfaEdge {
                    from: s,
                    to: e,
                    label: Some(a.clone()),
                });
                Frag { start: s, end: e }
            }
            RegPath::Seq(parts) => {
                let s = self.fresh();
                let mut cur = s;
                for p in parts {
                    let frag = self.build(p);
                    self.edges.push(NfaEdge {
                        from: cur,
                        to: frag.start,
                        label: None,
                    });
                    cur = frag.end;
                }
                Frag { start: s, end: cur }
            }
            RegPath::Alt(parts) => {
                let s = self.fresh();
                let e = self.fresh();
                for p in parts {
                    let frag = self.build(p);
                    self.edges.push(NfaEdge {
                        from: s,
                        to: frag.start,
                        label: None,
                    });
                    self.edges.push(NfaEdge {
                        from: frag.end,
                        to: e,
                        label: None,
                    });
                }
                Frag { start: s, end: e }
            }
            RegPath::Opt(inner) => {
                let frag = self.build(inner);
                self.edges.push(NfaEdge {
                    from: frag.start,
                    to: frag.end,
                    label: None,
                });
                frag
            }
            RegPath::Star(inner) => {
                let s = self.fresh();
                let frag = self.build(inner);
                self.edges.push(NfaEdge {
                    from: s,
                    to: frag.start,
                    label: None,
                });
                self.edges.push(NfaEdge {
                    from: frag.end,
                    to: s,
                    label: None,
                });
                Frag { start: s, end: s }
            }
        }
    }

    fn eps_closure(&self, set: &mut Vec<bool>) {
        let mut changed = true;
        while changed {
            changed = false;
            for edge in &self.edges {
                if edge.label.is_none() && set[edge.from] && !set[edge.to] {
                    set[edge.to] = true;
                    changed = true;
                }
            }
        }
    }

    /// The start state set (epsilon-closed).
    pub fn start_set(&self) -> Vec<bool> {
        let mut set = vec![false; self.states];
        set[self.start] = true;
        self.eps_closure(&mut set);
        set
    }

    /// Advance a state set over one symbol.
    pub fn step(&self, set: &[bool], sym: &str) -> Vec<bool> {
        let mut next = vec![false; self.states];
        for edge in &self.edges {
            if let Some(label) = &edge.label {
                if label == sym && set[edge.from] {
                    next[edge.to] = true;
                }
            }
        }
        self.eps_closure(&mut next);
        next
    }

    pub fn is_accepting(&self, set: &[bool]) -> bool {
        set[self.accept]
    }

    pub fn is_dead(&self, set: &[bool]) -> bool {
        set.iter().all(|b| !b)
    }

    pub fn matches<S: AsRef<str>>(&self, seq: &[S]) -> bool {
        let mut set = self.start_set();
        for sym in seq {
            set = self.step(&set, sym.as_ref());
            if self.is_dead(&set) {
                return false;
            }
        }
        self.is_accepting(&set)
    }
}

/// Parse error for the concrete regular path syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegPathError {
    pub message: String,
    pub offset: usize,
}

impl fmt::Display for RegPathError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at byte {})", self.message, self.offset)
    }
}

impl core::error::Error for RegPathError {}

/// Parse the concrete syntax: symbols are juxtaposed for concatenation,
/// `{a|b}` is disjunction, `(a)` optionality, `a*` Kleene star, and a lone
/// `-` denotes the empty-sequence language.
pub fn parse(input: &str) -> Result<RegPath, RegPathError> {
    let mut p = Parser {
        chars: input.char_indices().peekable(),
        input,
    };
    p.skip_ws();
    if p.chars.peek().is_none() {
        return Err(RegPathError {
            message: "empty path expression".to_string(),
            offset: 0,
        });
    }
    let re = p.parse_seq()?;
    p.skip_ws();
    if let Some(&(off, c)) = p.chars.peek() {
        return Err(RegPathError {
            message: alloc::format!("unexpected '{}'", c),
            offset: off,
        });
    }
    Ok(re)
}

struct Parser<'a> {
    chars: core::iter::Peekable<core::str::CharIndices<'a>>,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(&(_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn parse_seq(&mut self) -> Result<RegPath, RegPathError> {
        let mut parts = Vec::new();
        loop {
            self.skip_ws();
            match self.chars.peek() {
                None => break,
                Some(&(_, c)) if c == '|' || c == '}' || c == ')' => break,
                _ => parts.push(self.parse_item()?),
            }
        }
        match parts.len() {
            0 => Ok(RegPath::Epsilon),
            1 => Ok(parts.pop().unwrap()),
            _ => Ok(RegPath::Seq(parts)),
        }
    }

    fn parse_item(&mut self) -> Result<RegPath, RegPathError> {
        let base = self.parse_base()?;
        if matches!(self.chars.peek(), Some(&(_, '*'))) {
            self.chars.next();
            return Ok(RegPath::Star(Box::new(base)));
        }
        Ok(base)
    }

    fn parse_base(&mut self) -> Result<RegPath, RegPathError> {
        let &(off, c) = self.chars.peek().ok_or(RegPathError {
            message: "unexpected end of path expression".to_string(),
            offset: self.input.len(),
        })?;
        match c {
            '{' => {
                self.chars.next();
                let mut alts = vec![self.parse_seq()?];
                loop {
                    self.skip_ws();
                    match self.chars.next() {
                        Some((_, '|')) => alts.push(self.parse_seq()?),
                        Some((_, '}')) => break,
                        Some((o, other)) => {
                            return Err(RegPathError {
                                message: alloc::format!("expected '|' or '}}', found '{}'", other),
                                offset: o,
                            })
                        }
                        None => {
                            return Err(RegPathError {
                                message: "unterminated '{'".to_string(),
                                offset: off,
                            })
                        }
                    }
                }
                // A single-alternative brace group is plain grouping.
                if alts.len() == 1 {
                    Ok(alts.pop().unwrap())
                } else {
                    Ok(RegPath::Alt(alts))
                }
            }
            '(' => {
                self.chars.next();
                let inner = self.parse_seq()?;
                self.skip_ws();
                match self.chars.next() {
                    Some((_, ')')) => Ok(RegPath::Opt(Box::new(inner))),
                    Some((o, other)) => Err(RegPathError {
                        message: alloc::format!("expected ')', found '{}'", other),
                        offset: o,
                    }),
                    None => Err(RegPathError {
                        message: "unterminated '('".to_string(),
                        offset: off,
                    }),
                }
            }
            '-' => {
                self.chars.next();
                Ok(RegPath::Epsilon)
            }
            c if is_sym_char(c) => {
                let mut sym = String::new();
                while matches!(self.chars.peek(), Some(&(_, c)) if is_sym_char(c)) {
                    sym.push(self.chars.next().unwrap().1);
                }
                Ok(RegPath::Atom(sym))
            }
            other => Err(RegPathError {
                message: alloc::format!("unexpected '{}'", other),
                offset: off,
            }),
        }
    }
}

fn is_sym_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> RegPath {
        parse(s).unwrap()
    }

    #[test]
    fn parses_float_path_expressions() {
        assert!(p("VPART* OBJ").matches(&["VPART", "OBJ"]));
        assert!(p("VPART* OBJ").matches(&["OBJ"]));
        assert!(p("VPART* OBJ").matches(&["VPART", "VPART", "OBJ"]));
        assert!(!p("VPART* OBJ").matches(&["VPART"]));

        let rela = p("{SUBJ|OBJ|VPART}* RELA");
        assert!(rela.matches(&["RELA"]));
        assert!(rela.matches(&["SUBJ", "VPART", "RELA"]));
        assert!(!rela.matches(&["SPEC", "RELA"]));
    }

    #[test]
    fn optionality_and_epsilon() {
        let opt = p("(VCOMP) OBJ");
        assert!(opt.matches(&["OBJ"]));
        assert!(opt.matches(&["VCOMP", "OBJ"]));
        assert!(!opt.matches(&["VCOMP", "VCOMP", "OBJ"]));

        assert!(p("-").matches::<&str>(&[]));
        assert!(!p("-").matches(&["X"]));
        assert!(p("-").is_epsilon_only());
        assert!(p("{-|-}").is_epsilon_only());
        assert!(!p("(X)").is_epsilon_only());
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse("").is_err());
        assert!(parse("{A|B").is_err());
        assert!(parse("(A").is_err());
        assert!(parse("A)").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in ["VPART* OBJ", "{SUBJ|OBJ|VPART}* RELA", "(VCOMP) OBJ", "-"] {
            let re = p(s);
            let printed = alloc::format!("{}", re);
            assert_eq!(p(&printed), re, "round trip of {}", s);
        }
    }
}
