//! Dependency grammar engine built on word order domains.
//!
//! A grammar associates every word class with a sequence of order domains
//! (roughly: topological fields). The engine compiles those domain
//! specifications into an annotated context-free backbone, parses input with
//! a chart parser, and solves the annotations into attribute-value structures
//! using unification with non-constructive functional uncertainty. Domain
//! trees and dependency trees are derived from each solution and checked
//! against domain-scoped precedence predicates and float-path licensing.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion CLI
//! crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod backbone;
pub mod chart;
pub mod fstruct;
pub mod grammar;
pub mod loader;
pub mod oracle;
pub mod order;
pub mod pipeline;
pub mod regpath;
pub mod solver;

pub use grammar::Grammar;
pub use pipeline::{analyses, Analysis, Engine};
