//! A hybrid knowledge-base core that keeps three cooperating reasoners in
//! one session: a structural classifier over concept and relation
//! definitions, a degree evaluator that scores how well an instance fits a
//! definition, and a plausible-rule engine that propagates certainty
//! intervals through rules and defaults. [`Session`] arbitrates between
//! them, promoting conclusions that harden to full certainty and retracting
//! everything downstream of a forgotten fact.

pub mod arbitration;
pub mod certainty;
pub mod classify;
pub mod error;
pub mod fuzzy;
pub mod parse;
pub mod plausible;
pub mod recognize;
pub mod scc;
pub mod store;
pub mod tbox;
pub mod term;

pub use arbitration::{Answer, Effect, Session};
pub use certainty::Certainty;
pub use classify::{classify, coherent, subsumes, Taxonomy};
pub use error::{EngineError, Error, ParseError, Pos, SessionError, TermError};
pub use fuzzy::{AllSemantics, ConjunctionMode, DegreeConfig, ImplicationKind, TnormFamily};
pub use parse::{parse_program, parse_program_spanned, parse_statement};
pub use plausible::{Diagnostic, Engine, Propagation};
pub use recognize::recognize;
pub use store::{Fact, FactView, Provenance};
pub use tbox::{NormalForm, RoleKey, TBox};
pub use term::{Arg, DefaultSpec, Literal, Pattern, RuleMode, RuleSpec, Statement, Sym, TermExpr};
