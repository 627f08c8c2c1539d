//! The term language: symbols, concept/role expressions, literals, statements.
//!
//! Expressions are a small intersection language over named concepts and
//! roles: conjunction, value restrictions, and unqualified number
//! restrictions. Statements are the top-level program forms accepted by the
//! shell and the batch loader.

use std::sync::Arc;

use crate::certainty::Certainty;

/// An interned, case-sensitive symbol. Cloning is cheap.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(Arc<str>);

impl Sym {
    pub fn new(s: &str) -> Sym {
        Sym(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Symbols starting with `?` are pattern variables inside rule bodies.
    pub fn is_variable(&self) -> bool {
        self.0.starts_with('?')
    }
}

impl std::fmt::Display for Sym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::fmt::Debug for Sym {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<&str> for Sym {
    fn from(s: &str) -> Sym {
        Sym::new(s)
    }
}

/// A concept or role expression as written, before normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermExpr {
    /// Reference to a defined name; its sort is resolved against the terminology.
    Ref(Sym),
    /// A fresh primitive atom carrying the name it was minted under.
    Primitive(Sym),
    /// The unresolved `(:primitive)` marker as parsed; named at definition time.
    PrimitiveMarker,
    ConceptAnd(Vec<TermExpr>),
    RoleAnd(Vec<TermExpr>),
    /// `(:all role filler)` — every filler of the role belongs to the concept.
    All(Box<TermExpr>, Box<TermExpr>),
    /// `(:at-least n role)` — at least `n` distinct fillers.
    AtLeast(u32, Box<TermExpr>),
    /// `(:at-most n role)` — at most `n` distinct fillers.
    AtMost(u32, Box<TermExpr>),
}

impl std::fmt::Display for TermExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TermExpr::Ref(n) => write!(f, "{n}"),
            TermExpr::Primitive(_) | TermExpr::PrimitiveMarker => write!(f, "(:primitive)"),
            TermExpr::ConceptAnd(es) | TermExpr::RoleAnd(es) => {
                write!(f, "(:and")?;
                for e in es {
                    write!(f, " {e}")?;
                }
                write!(f, ")")
            }
            TermExpr::All(r, c) => write!(f, "(:all {r} {c})"),
            TermExpr::AtLeast(n, r) => write!(f, "(:at-least {n} {r})"),
            TermExpr::AtMost(n, r) => write!(f, "(:at-most {n} {r})"),
        }
    }
}

/// A ground atomic fact: concept membership or a role filler pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    /// `(Concept instance)`
    Concept(Sym, Sym),
    /// `(Role subject object)`
    Role(Sym, Sym, Sym),
}

impl Literal {
    pub fn predicate(&self) -> &Sym {
        match self {
            Literal::Concept(p, _) | Literal::Role(p, _, _) => p,
        }
    }

    pub fn subject(&self) -> &Sym {
        match self {
            Literal::Concept(_, x) | Literal::Role(_, x, _) => x,
        }
    }

    pub fn instances(&self) -> Vec<&Sym> {
        match self {
            Literal::Concept(_, x) => vec![x],
            Literal::Role(_, x, y) => vec![x, y],
        }
    }
}

impl std::fmt::Display for Literal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Literal::Concept(p, x) => write!(f, "({p} {x})"),
            Literal::Role(p, x, y) => write!(f, "({p} {x} {y})"),
        }
    }
}

/// One argument position in a rule pattern: a constant instance or a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Arg {
    Const(Sym),
    Var(Sym),
}

impl std::fmt::Display for Arg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Arg::Const(s) | Arg::Var(s) => write!(f, "{s}"),
        }
    }
}

/// A literal pattern inside a rule: like [`Literal`] but instance positions
/// may hold variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Concept(Sym, Arg),
    Role(Sym, Arg, Arg),
}

impl Pattern {
    pub fn predicate(&self) -> &Sym {
        match self {
            Pattern::Concept(p, _) | Pattern::Role(p, _, _) => p,
        }
    }

    pub fn args(&self) -> Vec<&Arg> {
        match self {
            Pattern::Concept(_, a) => vec![a],
            Pattern::Role(_, a, b) => vec![a, b],
        }
    }

    pub fn variables(&self) -> Vec<&Sym> {
        self.args()
            .into_iter()
            .filter_map(|a| match a {
                Arg::Var(v) => Some(v),
                Arg::Const(_) => None,
            })
            .collect()
    }

    /// The ground literal this pattern denotes, if it has no variables.
    pub fn as_literal(&self) -> Option<Literal> {
        match self {
            Pattern::Concept(p, Arg::Const(x)) => Some(Literal::Concept(p.clone(), x.clone())),
            Pattern::Role(p, Arg::Const(x), Arg::Const(y)) => {
                Some(Literal::Role(p.clone(), x.clone(), y.clone()))
            }
            _ => None,
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Pattern::Concept(p, a) => write!(f, "({p} {a})"),
            Pattern::Role(p, a, b) => write!(f, "({p} {a} {b})"),
        }
    }
}

/// How a plausible rule carries uncertainty from body to head.
#[derive(Debug, Clone, PartialEq)]
pub enum RuleMode {
    /// Detach the conclusion at `T(antecedent, sufficiency)`.
    Possibilistic { sufficiency: Certainty },
    /// Emulate probability propagation: interval-valued conditionals on the
    /// consequent given the antecedent and given its complement.
    Probabilistic { given: Certainty, given_not: Certainty },
}

/// A monotonic plausible rule as written.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub name: Sym,
    pub antecedent: Vec<Pattern>,
    pub consequent: Pattern,
    pub mode: RuleMode,
}

impl std::fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(defrule {} :if ", self.name)?;
        if self.antecedent.len() == 1 {
            write!(f, "{}", self.antecedent[0])?;
        } else {
            write!(f, "(:and")?;
            for p in &self.antecedent {
                write!(f, " {p}")?;
            }
            write!(f, ")")?;
        }
        write!(f, " :then {}", self.consequent)?;
        match &self.mode {
            RuleMode::Possibilistic { sufficiency } => {
                write!(
                    f,
                    " :sufficiency [{} {}])",
                    sufficiency.lower(),
                    sufficiency.upper()
                )
            }
            RuleMode::Probabilistic { given, given_not } => write!(
                f,
                " :prob-given [{} {}] :prob-given-not [{} {}])",
                given.lower(),
                given.upper(),
                given_not.lower(),
                given_not.upper()
            ),
        }
    }
}

/// A default rule: concludes with a preferred degree unless the blocking
/// literal is already believed above the threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct DefaultSpec {
    pub name: Sym,
    pub unless: Literal,
    pub threshold: f64,
    pub then: Literal,
    pub degree: f64,
}

impl std::fmt::Display for DefaultSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(defdefault {} :unless {} :threshold {} :then {} {})",
            self.name, self.unless, self.threshold, self.then, self.degree
        )
    }
}

/// A top-level program statement.
#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    DefConcept(Sym, TermExpr),
    /// `None` body means the relation is primitive.
    DefRelation(Sym, Option<TermExpr>),
    DefRule(RuleSpec),
    DefDefault(DefaultSpec),
    Tell(Literal, Option<Certainty>),
    Forget(Literal),
    Ask(Literal),
    CloseRole(Sym, Sym),
}

impl std::fmt::Display for Statement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Statement::DefConcept(n, e) => write!(f, "(defconcept {n} {e})"),
            Statement::DefRelation(n, Some(e)) => write!(f, "(defrelation {n} {e})"),
            Statement::DefRelation(n, None) => write!(f, "(defrelation {n} :primitive)"),
            Statement::DefRule(r) => write!(f, "{r}"),
            Statement::DefDefault(d) => write!(f, "{d}"),
            Statement::Tell(l, None) => write!(f, "(tell {l})"),
            Statement::Tell(l, Some(c)) => {
                write!(f, "(tell ({l} [{} {}]))", c.lower(), c.upper())
            }
            Statement::Forget(l) => write!(f, "(forget {l})"),
            Statement::Ask(l) => write!(f, "(ask {l})"),
            Statement::CloseRole(x, r) => write!(f, "(close-role {x} {r})"),
        }
    }
}
