//! Command-line front end: parse sentences against a grammar, validate
//! grammars, enumerate linearizations for a dependency tree, cross-check
//! the parser against the generation oracle, and dump the compiled
//! backbone or the resolved grammar.
//!
//! Exit codes: 0 success, 1 no parse (or a failed cross-check), 2 usage or
//! grammar errors.

use std::collections::BTreeMap;
use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use domgram_core::backbone::{compile_domains, dump_backbone};
use domgram_core::grammar::{dump_grammar, validate_grammar, Grammar};
use domgram_core::loader::load_grammar;
use domgram_core::oracle::{cross_validate, enumerate_linearizations, DEFAULT_BOUND};
use domgram_core::order::{DepEdge, DepTree, Word};
use domgram_core::pipeline::{Analysis, Engine, DEFAULT_MAX_UNPACK};

mod output;

#[derive(Parser)]
#[command(name = "domgram", version, about = "Word order domain grammar engine")]
struct Cli {
    /// Grammar file
    #[arg(short = 'g', long = "grammar", global = true)]
    grammar: Option<String>,
    /// Output format for analyses
    #[arg(long, value_enum, default_value_t = Format::StructuredAll, global = true)]
    format: Format,
    /// Cap on unpacked c-structure trees per sentence
    #[arg(long, default_value_t = DEFAULT_MAX_UNPACK, global = true)]
    max_unpack: usize,
    /// Word-count bound for the generation oracle
    #[arg(long, default_value_t = DEFAULT_BOUND, global = true)]
    oracle_bound: usize,
    /// Treat every input line as a separate sentence, prefixing output
    /// lines with the input line number
    #[arg(long, global = true)]
    batch: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    BracketedC,
    Avm,
    DepTriples,
    DomainTree,
    StructuredAll,
}

#[derive(Subcommand)]
enum Command {
    /// Parse sentences from stdin
    Parse,
    /// Validate the grammar and print a report
    Check,
    /// Enumerate linearizations for a dependency tree read from stdin
    Gen,
    /// Cross-check parser and oracle on word multisets read from stdin
    Xcheck,
    /// Print the compiled backbone rules
    DumpBackbone,
    /// Print the resolved grammar in canonical form
    DumpGrammar,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {}", message);
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, String> {
    let grammar_path = cli
        .grammar
        .as_deref()
        .ok_or_else(|| "a grammar file is required (-g <file>)".to_string())?;
    let text = std::fs::read_to_string(grammar_path)
        .map_err(|e| format!("cannot read '{}': {}", grammar_path, e))?;
    let grammar = load_grammar(&text).map_err(|e| format!("{}: {}", grammar_path, e))?;

    match cli.command {
        Command::Check => {
            let report = validate_grammar(&grammar);
            if report.is_empty() {
                println!("ok");
                return Ok(ExitCode::SUCCESS);
            }
            print!("{}", report);
            if report.has_errors() {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpBackbone => {
            print!("{}", dump_backbone(&compile_domains(&grammar)));
            Ok(ExitCode::SUCCESS)
        }
        Command::DumpGrammar => {
            print!("{}", dump_grammar(&grammar));
            Ok(ExitCode::SUCCESS)
        }
        Command::Parse => {
            let report = validate_grammar(&grammar);
            if report.has_errors() {
                return Err(format!("grammar is not valid:\n{}", report));
            }
            let engine = Engine::with_max_unpack(&grammar, cli.max_unpack)
                .map_err(|e| e.to_string())?;
            let input = read_stdin()?;
            let lines: Vec<&str> = if cli.batch {
                input.lines().collect()
            } else {
                input.lines().take(1).collect()
            };
            let mut any_parse = false;
            let mut all_parse = true;
            for (i, line) in lines.iter().enumerate() {
                let analyses = engine
                    .analyses(line)
                    .map_err(|e| format!("line {}: {}", i + 1, e))?;
                if analyses.is_empty() {
                    all_parse = false;
                } else {
                    any_parse = true;
                }
                let block = render_analyses(line, &analyses, cli.format, &grammar);
                if cli.batch {
                    for out_line in block.lines() {
                        println!("{}: {}", i + 1, out_line);
                    }
                } else {
                    print!("{}", block);
                }
            }
            if lines.is_empty() || !any_parse || !all_parse {
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen => {
            let input = read_stdin()?;
            let dep = parse_dep_input(&input, &grammar)?;
            let lins = enumerate_linearizations(&dep, &grammar, cli.oracle_bound)
                .map_err(|e| e.to_string())?;
            println!("linearizations {}", lins.len());
            for lin in &lins {
                match cli.format {
                    Format::DomainTree => {
                        println!("{}\t{}", lin.surfaces.join(" "), lin.witness.bracketed())
                    }
                    Format::StructuredAll => {
                        let value = serde_json::json!({
                            "schema": "domgram/linearization/1",
                            "sequence": lin.surfaces,
                            "witness": lin.witness.bracketed(),
                        });
                        println!("{}", value);
                    }
                    _ => println!("{}", lin.surfaces.join(" ")),
                }
            }
            if lins.is_empty() {
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Xcheck => {
            let input = read_stdin()?;
            let mut all_agree = true;
            for (i, line) in input.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let words: Vec<String> = line.split_whitespace().map(|s| s.to_string()).collect();
                let report = cross_validate(&words, &grammar, cli.oracle_bound)
                    .map_err(|e| format!("line {}: {}", i + 1, e))?;
                let prefix = if cli.batch {
                    format!("{}: ", i + 1)
                } else {
                    String::new()
                };
                if report.agree() {
                    println!(
                        "{}agree parser={} oracle={}",
                        prefix,
                        report.parser.len(),
                        report.oracle.len()
                    );
                } else {
                    all_agree = false;
                    println!(
                        "{}DISAGREE parser={} oracle={}",
                        prefix,
                        report.parser.len(),
                        report.oracle.len()
                    );
                    for s in report.only_parser() {
                        println!("{}only-parser: {}", prefix, s.join(" "));
                    }
                    for s in report.only_oracle() {
                        println!("{}only-oracle: {}", prefix, s.join(" "));
                    }
                }
            }
            if all_agree {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn read_stdin() -> Result<String, String> {
    let mut buf = String::new();
    std::io::stdin()
        .read_to_string(&mut buf)
        .map_err(|e| e.to_string())?;
    Ok(buf)
}

fn render_analyses(line: &str, analyses: &[Analysis], format: Format, g: &Grammar) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "analyses {}", analyses.len());
    for (k, a) in analyses.iter().enumerate() {
        let _ = writeln!(out, "-- analysis {}", k + 1);
        match format {
            Format::BracketedC => {
                let _ = writeln!(out, "{}", a.c_tree.bracketed());
            }
            Format::Avm => {
                let _ = writeln!(out, "{}", a.avm());
            }
            Format::DepTriples => {
                for (h, d, m) in a.dep_tree.content_triples(g) {
                    let _ = writeln!(out, "{} {} {}", h, d, m);
                }
            }
            Format::DomainTree => {
                let _ = writeln!(out, "{}", a.domain_tree.bracketed());
            }
            Format::StructuredAll => {
                let _ = writeln!(out, "{}", output::analysis_json(line, a, g));
            }
        }
    }
    out
}

/// Dependency-tree input: one arc per line as `head DEP modifier`, plus a
/// `root <word>` line. Words repeat with `~2`, `~3` ... suffixes; a
/// `@Class` suffix picks the entry when a surface is ambiguous.
fn parse_dep_input(input: &str, g: &Grammar) -> Result<DepTree, String> {
    struct Token {
        surface: String,
        class: Option<String>,
    }
    fn parse_token(tok: &str) -> Token {
        let (body, class) = match tok.split_once('@') {
            Some((b, c)) => (b, Some(c.to_string())),
            None => (tok, None),
        };
        let surface = match body.split_once('~') {
            Some((s, _)) => s.to_string(),
            None => body.to_string(),
        };
        Token { surface, class }
    }

    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut words: BTreeMap<usize, Word> = BTreeMap::new();
    let mut edges: Vec<DepEdge> = Vec::new();
    let mut root: Option<usize> = None;

    let intern = |raw: &str, ids: &mut BTreeMap<String, usize>,
                      words: &mut BTreeMap<usize, Word>|
     -> Result<usize, String> {
        if let Some(&id) = ids.get(raw) {
            return Ok(id);
        }
        let tok = parse_token(raw);
        let entries = g.entries_for(&tok.surface);
        let entry = match (&tok.class, entries.len()) {
            (Some(c), _) => entries
                .into_iter()
                .find(|e| &e.class == c)
                .ok_or_else(|| format!("no entry for '{}' as '{}'", tok.surface, c))?,
            (None, 0) => return Err(format!("no lexical entry for '{}'", tok.surface)),
            (None, 1) => entries.into_iter().next().unwrap(),
            (None, _) => {
                return Err(format!(
                    "'{}' is ambiguous; disambiguate with {}@Class",
                    tok.surface, tok.surface
                ))
            }
        };
        let id = ids.len();
        ids.insert(raw.to_string(), id);
        words.insert(
            id,
            Word {
                token: id,
                surface: tok.surface.clone(),
                lexeme: entry.lexeme.clone(),
                class: entry.class.clone(),
            },
        );
        Ok(id)
    };

    for (i, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["root", w] => {
                let id = intern(w, &mut ids, &mut words)?;
                if root.replace(id).is_some() {
                    return Err(format!("line {}: two root lines", i + 1));
                }
            }
            [head, dep, modifier] => {
                if !g.deps.iter().any(|d| d == dep) {
                    return Err(format!("line {}: unknown dependency '{}'", i + 1, dep));
                }
                let h = intern(head, &mut ids, &mut words)?;
                let m = intern(modifier, &mut ids, &mut words)?;
                edges.push(DepEdge {
                    head: h,
                    dep: dep.to_string(),
                    modifier: m,
                });
            }
            _ => {
                return Err(format!(
                    "line {}: expected 'root <word>' or '<head> <DEP> <modifier>'",
                    i + 1
                ))
            }
        }
    }
    let root = root.ok_or_else(|| "no 'root <word>' line".to_string())?;
    // Sanity: single head per word, root headless.
    let mut seen = std::collections::BTreeSet::new();
    for e in &edges {
        if !seen.insert(e.modifier) {
            return Err(format!("word #{} has two heads", e.modifier));
        }
    }
    if seen.contains(&root) {
        return Err("the root word has a head".to_string());
    }
    Ok(DepTree { root, words, edges })
}
