//! The full analysis pipeline: tokenize, parse the backbone, solve the
//! annotations, derive domain and dependency trees, and filter by the
//! ordering checks.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::backbone::{
    compile_domains, expand_metacategories, specialize_domain_union, BackboneRuleSet, MetacatCycle,
};
use crate::chart::{parse_with_tables, ChartTables, CNode, ParseError};
use crate::fstruct::{FGraph, NodeId};
use crate::grammar::Grammar;
use crate::order::{
    check_float_licensing, check_precedence, derive_dependency_tree, extract_domain_structure,
    DepTree, DomainTree, Word,
};
use crate::solver::{solve, Placement};

pub const DEFAULT_MAX_UNPACK: usize = 1000;

/// One complete syntactic analysis: the two linked trees (constituent and
/// dependency), the order domain structure, and the solved f-structure.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub c_tree: CNode,
    pub graph: FGraph,
    pub f_root: NodeId,
    pub domain_tree: DomainTree,
    pub dep_tree: DepTree,
    pub placements: Vec<Placement>,
}

impl Analysis {
    pub fn avm(&self) -> String {
        self.graph.render_avm(self.f_root)
    }
}

/// A grammar compiled for parsing; reusable across sentences.
pub struct Engine<'g> {
    pub grammar: &'g Grammar,
    rules: BackboneRuleSet,
    tables: ChartTables,
    max_unpack: usize,
}

impl<'g> Engine<'g> {
    pub fn new(grammar: &'g Grammar) -> Result<Self, MetacatCycle> {
        Self::with_max_unpack(grammar, DEFAULT_MAX_UNPACK)
    }

    pub fn with_max_unpack(grammar: &'g Grammar, max_unpack: usize) -> Result<Self, MetacatCycle> {
        Self::with_options(grammar, max_unpack, true)
    }

    /// `specialize` controls the optional DOMAIN-narrowing pass; it must
    /// never change the set of accepted sentences.
    pub fn with_options(
        grammar: &'g Grammar,
        max_unpack: usize,
        specialize: bool,
    ) -> Result<Self, MetacatCycle> {
        let rs = expand_metacategories(&compile_domains(grammar))?;
        let rules = if specialize {
            specialize_domain_union(&rs, grammar)
        } else {
            rs
        };
        let tables = ChartTables::build(&rules, grammar);
        Ok(Engine {
            grammar,
            rules,
            tables,
            max_unpack,
        })
    }

    pub fn rules(&self) -> &BackboneRuleSet {
        &self.rules
    }

    /// All analyses of a sentence, in derivation order: every c-structure
    /// tree of the backbone, every consistent solution of its annotations,
    /// kept only if the ordering checks report no violations.
    pub fn analyses(&self, sentence: &str) -> Result<Vec<Analysis>, ParseError> {
        let tokens = tokenize(sentence);
        self.analyses_of_tokens(&tokens)
    }

    pub fn analyses_of_tokens(&self, tokens: &[String]) -> Result<Vec<Analysis>, ParseError> {
        let trees = parse_with_tables(tokens, &self.tables, self.grammar, self.max_unpack)?;
        let mut out = Vec::new();
        for tree in trees {
            let domain_tree = extract_domain_structure(&tree, &self.rules, self.grammar);
            let words = words_of(&tree, self.grammar);
            for sol in solve(&tree, &self.rules, self.grammar) {
                let mut node_tokens: BTreeMap<NodeId, usize> = BTreeMap::new();
                for (&token, &node) in &sol.word_nodes {
                    node_tokens.insert(sol.graph.resolve(node), token);
                }
                let dep_tree = match derive_dependency_tree(
                    &sol.graph,
                    sol.root,
                    self.grammar,
                    &node_tokens,
                    &words,
                ) {
                    Ok(t) => t,
                    Err(_) => {
                        debug_assert!(false, "solved structure without LEXEME under a dependency");
                        continue;
                    }
                };
                let mut violations = check_precedence(&domain_tree, &dep_tree, self.grammar);
                violations.extend(check_float_licensing(&domain_tree, &dep_tree, self.grammar));
                if violations.is_empty() {
                    out.push(Analysis {
                        c_tree: tree.clone(),
                        graph: sol.graph.clone(),
                        f_root: sol.root,
                        domain_tree: domain_tree.clone(),
                        dep_tree,
                        placements: sol.placements.clone(),
                    });
                }
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper compiling the grammar per call.
pub fn analyses(sentence: &str, g: &Grammar) -> Result<Vec<Analysis>, ParseError> {
    let engine = Engine::new(g).map_err(|_| ParseError::NoStartCategory)?;
    engine.analyses(sentence)
}

pub fn tokenize(sentence: &str) -> Vec<String> {
    sentence.split_whitespace().map(|s| s.to_string()).collect()
}

fn words_of(tree: &CNode, g: &Grammar) -> BTreeMap<usize, Word> {
    let mut out = BTreeMap::new();
    for leaf in tree.leaves() {
        let (Some(token), Some(surface)) = (leaf.token_index, leaf.word.as_ref()) else {
            continue;
        };
        let lexeme = g
            .entry(surface, &leaf.cat)
            .map(|e| e.lexeme.clone())
            .unwrap_or_else(|| surface.clone());
        out.insert(
            token,
            Word {
                token,
                surface: surface.clone(),
                lexeme,
                class: leaf.cat.clone(),
            },
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loader::load_grammar;

    fn fixture() -> Grammar {
        load_grammar(include_str!("../../../fixtures/german.dg")).unwrap()
    }

    #[test]
    fn fronted_object_example_has_exactly_one_analysis() {
        let g = fixture();
        let engine = Engine::new(&g).unwrap();
        let analyses = engine.analyses("den Mann hat der Junge gesehen .").unwrap();
        assert_eq!(
            analyses.len(),
            1,
            "analyses:\n{}",
            analyses
                .iter()
                .map(|a| alloc::format!("{}\n{}", a.c_tree.bracketed(), a.avm()))
                .collect::<Vec<_>>()
                .join("\n---\n")
        );
        let a = &analyses[0];
        let triples = a.dep_tree.content_triples(&g);
        let expected: Vec<(String, String, String)> = [
            ("hat", "SUBJ", "junge"),
            ("hat", "VPART", "gesehen"),
            ("gesehen", "OBJ", "mann"),
            ("mann", "SPEC", "den"),
            ("junge", "SPEC", "der"),
        ]
        .iter()
        .map(|(h, d, m)| (h.to_string(), d.to_string(), m.to_string()))
        .collect();
        let mut got = triples.clone();
        let mut want = expected.clone();
        got.sort();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn object_is_attached_through_vpart_obj() {
        let g = fixture();
        let engine = Engine::new(&g).unwrap();
        let analyses = engine.analyses("den Mann hat der Junge gesehen .").unwrap();
        let a = &analyses[0];
        let mann = a
            .placements
            .iter()
            .find(|p| p.dep == "OBJ")
            .expect("an OBJ placement");
        assert_eq!(mann.path, alloc::vec!["VPART".to_string(), "OBJ".to_string()]);
        assert_eq!(mann.modifier_token, 1);
    }

    #[test]
    fn subject_object_swap_unambiguous() {
        let g = fixture();
        let engine = Engine::new(&g).unwrap();
        // Nominative first: subject stays the subject.
        let analyses = engine.analyses("der Junge hat den Mann gesehen .").unwrap();
        assert!(!analyses.is_empty());
        for a in &analyses {
            let triples = a.dep_tree.content_triples(&g);
            assert!(triples.iter().any(|(h, d, m)| h == "hat" && d == "SUBJ" && m == "junge"));
            assert!(triples.iter().any(|(h, d, m)| h == "gesehen" && d == "OBJ" && m == "mann"));
        }
    }

    #[test]
    fn double_prefield_is_rejected() {
        let g = fixture();
        let engine = Engine::new(&g).unwrap();
        let analyses = engine.analyses("der Junge den Mann hat gesehen .").unwrap();
        assert!(analyses.is_empty());
    }

    #[test]
    fn determiner_follows_noun_is_rejected() {
        let g = fixture();
        let engine = Engine::new(&g).unwrap();
        let analyses = engine.analyses("Mann den hat der Junge gesehen .").unwrap();
        assert!(analyses.is_empty());
    }

    #[test]
    fn auxiliary_chain_attaches_object_two_levels_deep() {
        let g = load_grammar(include_str!("../../../fixtures/german-aux.dg")).unwrap();
        let engine = Engine::new(&g).unwrap();
        let analyses = engine
            .analyses("den Mann will der Junge gesehen haben .")
            .unwrap();
        assert!(!analyses.is_empty());
        let found = analyses.iter().any(|a| {
            a.placements.iter().any(|p| {
                p.dep == "OBJ"
                    && p.path
                        == alloc::vec![
                            "VPART".to_string(),
                            "VPART".to_string(),
                            "OBJ".to_string()
                        ]
            })
        });
        assert!(found, "no analysis attaches OBJ at VPART.VPART.OBJ");
        let chain = analyses.iter().any(|a| {
            let t = a.dep_tree.content_triples(&g);
            t.contains(&("will".into(), "VPART".into(), "haben".into()))
                && t.contains(&("haben".into(), "VPART".into(), "gesehen".into()))
                && t.contains(&("gesehen".into(), "OBJ".into(), "mann".into()))
        });
        assert!(chain, "expected the will -> haben -> gesehen -> mann chain");
    }
}
