//! Fact records and read-only views over them.

use std::collections::{BTreeMap, BTreeSet};

use crate::certainty::Certainty;
use crate::term::{Literal, Sym};

/// Who put a fact in the database.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    /// Stated by the user.
    Asserted,
    /// Derived by the structural recognizer from certain facts.
    Deduced,
    /// Carried by plausible rules, defaults, or definitional degree evaluation.
    Inferred,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Asserted => write!(f, "asserted"),
            Provenance::Deduced => write!(f, "deduced"),
            Provenance::Inferred => write!(f, "inferred"),
        }
    }
}

/// One row of the fact database as reported to callers. The sequence number
/// records the statement that introduced the fact; it is display metadata
/// and takes no part in state comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Fact {
    pub literal: Literal,
    pub certainty: Certainty,
    pub provenance: Provenance,
    pub sequence: u64,
}

/// An immutable literal-to-certainty snapshot, used by the recognizer (over
/// certain facts) and the degree evaluator (over everything known).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactView {
    facts: BTreeMap<Literal, Certainty>,
}

impl FactView {
    pub fn new() -> FactView {
        FactView::default()
    }

    pub fn insert(&mut self, literal: Literal, certainty: Certainty) {
        self.facts.insert(literal, certainty);
    }

    pub fn certainty(&self, literal: &Literal) -> Option<Certainty> {
        self.facts.get(literal).copied()
    }

    pub fn contains(&self, literal: &Literal) -> bool {
        self.facts.contains_key(literal)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Literal, &Certainty)> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Every instance mentioned anywhere in the view.
    pub fn instances(&self) -> BTreeSet<Sym> {
        let mut out = BTreeSet::new();
        for lit in self.facts.keys() {
            for i in lit.instances() {
                out.insert(i.clone());
            }
        }
        out
    }

    /// Concept facts about `x`: `(concept, certainty)` pairs.
    pub fn concepts_of<'a>(&'a self, x: &'a Sym) -> impl Iterator<Item = (&'a Sym, Certainty)> {
        self.facts.iter().filter_map(move |(lit, c)| match lit {
            Literal::Concept(p, i) if i == x => Some((p, *c)),
            _ => None,
        })
    }

    /// Role facts leaving `x`: `(role, object, certainty)` triples.
    pub fn roles_from<'a>(&'a self, x: &'a Sym) -> impl Iterator<Item = (&'a Sym, &'a Sym, Certainty)> {
        self.facts.iter().filter_map(move |(lit, c)| match lit {
            Literal::Role(r, s, o) if s == x => Some((r, o, *c)),
            _ => None,
        })
    }
}

impl FromIterator<(Literal, Certainty)> for FactView {
    fn from_iter<T: IntoIterator<Item = (Literal, Certainty)>>(iter: T) -> FactView {
        FactView { facts: iter.into_iter().collect() }
    }
}
