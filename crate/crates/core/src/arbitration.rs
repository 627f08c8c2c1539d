//! Session arbitration: one fact store, two reasoners.
//!
//! Assertions land here and are routed. Certain facts feed the structural
//! recognizer; degreed facts feed the rule engine; the two stay in step
//! because every engine conclusion that reaches full certainty is promoted
//! into the certain view, and structural evidence about an instance is
//! scored into a membership degree for each defined concept it touches.
//! Every mutation rebuilds the derived picture from the asserted base, so
//! queries are pure lookups and replaying a statement log is deterministic.

use std::collections::{BTreeMap, BTreeSet};

use crate::certainty::Certainty;
use crate::error::{Error, SessionError};
use crate::fuzzy::{satisfaction, ConjunctionMode, DegreeConfig};
use crate::plausible::Engine;
use crate::recognize::{recognize, Closures};
use crate::store::{Fact, FactView, Provenance};
use crate::tbox::{DefKind, NormalForm, TBox};
use crate::term::{DefaultSpec, Literal, Pattern, RuleSpec, Statement, Sym, TermExpr};

/// Iteration cap for the promote/recognize loop; hitting it means the rule
/// set keeps flipping some conclusion in and out of full certainty.
const DIVERGENCE_GUARD: usize = 100;

/// What a query returns: the best live fact for the literal, or ignorance.
#[derive(Debug, Clone, PartialEq)]
pub struct Answer {
    pub literal: Literal,
    pub certainty: Certainty,
    /// `None` when nothing at all is known about the literal.
    pub provenance: Option<Provenance>,
}

impl Answer {
    /// English rendering; the hedged form quotes the confirmation degree.
    pub fn prose(&self) -> String {
        match &self.literal {
            Literal::Concept(c, x) => {
                let c = c.as_str().to_lowercase();
                match self.provenance {
                    None => format!("It is unknown whether {x} is {c}."),
                    Some(_) if self.certainty.is_certain() => format!("{x} is {c}."),
                    Some(_) => format!("{x} is likely ({}) to be {c}.", self.certainty.lower()),
                }
            }
            Literal::Role(r, x, y) => {
                let r = r.as_str().to_lowercase();
                match self.provenance {
                    None => format!("It is unknown whether {x} {r} {y}."),
                    Some(_) if self.certainty.is_certain() => format!("{x} {r} {y}."),
                    Some(_) => {
                        format!("It is likely ({}) that {x} {r} {y}.", self.certainty.lower())
                    }
                }
            }
        }
    }

    /// One machine-readable line: literal, both bounds, provenance.
    pub fn machine(&self) -> String {
        let prov = match self.provenance {
            Some(p) => p.to_string(),
            None => "unknown".into(),
        };
        format!(
            "{} {} {} {}",
            self.literal,
            self.certainty.lower(),
            self.certainty.upper(),
            prov
        )
    }
}

/// Observable side effects of one statement, in order of occurrence.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Answer(Answer),
    /// A degreed assertion displaced a certain one: the certain fact is
    /// first withdrawn from the deductive side...
    InternalForget(Literal),
    /// ...and the degree is handed to the approximate side.
    InternalAssert(Literal, Certainty),
    /// An inferred fact reached full certainty and joined the certain view.
    Promoted(Literal),
    /// A previously promoted fact fell out of full certainty.
    Demoted(Literal),
    /// One belief-update line from the rule engine.
    EngineTrace(String),
    Diagnostic(String),
    Warning(String),
}

impl std::fmt::Display for Effect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Effect::Answer(a) => write!(f, "{}", a.prose()),
            Effect::InternalForget(l) => write!(f, "internal: forget {l} to deductive reasoner"),
            Effect::InternalAssert(l, c) => {
                write!(f, "internal: assert {l} {c} to approximate reasoner")
            }
            Effect::Promoted(l) => write!(f, "promoted {l} to the certain view"),
            Effect::Demoted(l) => write!(f, "demoted {l} from the certain view"),
            Effect::EngineTrace(s) | Effect::Diagnostic(s) | Effect::Warning(s) => {
                write!(f, "{s}")
            }
        }
    }
}

enum RuleDef {
    Monotonic(RuleSpec),
    Default(DefaultSpec),
}

/// One interactive session: terminology, rules, assertions, and the derived
/// state (recognized memberships, promoted certainties, engine values).
pub struct Session {
    tbox: TBox,
    degrees: DegreeConfig,
    scc_bound: usize,
    engine: Engine,
    rule_log: Vec<RuleDef>,
    /// Certain assertions, the deductive reasoner's ground truth.
    asserted: BTreeSet<Literal>,
    /// Degreed assertions, owned by the approximate reasoner.
    degreed: BTreeMap<Literal, Certainty>,
    closures: Closures,
    /// Memberships proven by the recognizer in the last refresh.
    deduced: BTreeSet<Literal>,
    /// Engine conclusions at full certainty, visible to the recognizer.
    promoted: BTreeSet<Literal>,
    seq: u64,
    stamps: BTreeMap<Literal, u64>,
}

impl Session {
    pub fn new(degrees: DegreeConfig, scc_bound: usize) -> Session {
        Session {
            tbox: TBox::new(),
            degrees,
            scc_bound,
            engine: Engine::new(degrees.tnorm, scc_bound),
            rule_log: Vec::new(),
            asserted: BTreeSet::new(),
            degreed: BTreeMap::new(),
            closures: Closures::new(),
            deduced: BTreeSet::new(),
            promoted: BTreeSet::new(),
            seq: 0,
            stamps: BTreeMap::new(),
        }
    }

    pub fn tbox(&self) -> &TBox {
        &self.tbox
    }

    pub fn degrees(&self) -> DegreeConfig {
        self.degrees
    }

    pub fn scc_bound(&self) -> usize {
        self.scc_bound
    }

    /// Swap the operator configuration and recompute everything under it.
    /// The rule set is revalidated against the new bound first; on failure
    /// the session is left untouched.
    pub fn set_config(&mut self, degrees: DegreeConfig, scc_bound: usize) -> Result<Vec<Effect>, Error> {
        let mut engine = Engine::new(degrees.tnorm, scc_bound);
        for def in &self.rule_log {
            match def {
                RuleDef::Monotonic(spec) => engine.add_rule(spec.clone())?,
                RuleDef::Default(spec) => engine.add_default(spec.clone())?,
            }
        }
        self.engine = engine;
        self.degrees = degrees;
        self.scc_bound = scc_bound;
        self.refresh()
    }

    pub fn execute(&mut self, statement: Statement) -> Result<Vec<Effect>, Error> {
        match statement {
            Statement::DefConcept(name, expr) => {
                self.tbox.define_concept(name, expr)?;
                self.refresh()
            }
            Statement::DefRelation(name, expr) => {
                self.tbox.define_relation(name, expr)?;
                self.refresh()
            }
            Statement::DefRule(spec) => {
                for pattern in spec.antecedent.iter().chain([&spec.consequent]) {
                    self.validate_pattern(pattern)?;
                }
                self.engine.add_rule(spec.clone())?;
                self.rule_log.push(RuleDef::Monotonic(spec));
                self.refresh()
            }
            Statement::DefDefault(spec) => {
                self.validate_literal(&spec.unless)?;
                self.validate_literal(&spec.then)?;
                self.engine.add_default(spec.clone())?;
                self.rule_log.push(RuleDef::Default(spec));
                self.refresh()
            }
            Statement::Tell(literal, certainty) => self.tell(literal, certainty),
            Statement::Forget(literal) => self.forget(literal),
            Statement::Ask(literal) => Ok(vec![Effect::Answer(self.ask(&literal))]),
            Statement::CloseRole(instance, role) => {
                let key = self.tbox.role_key(&TermExpr::Ref(role))?;
                self.closures.insert((instance, key));
                self.refresh()
            }
        }
    }

    fn tell(&mut self, literal: Literal, certainty: Option<Certainty>) -> Result<Vec<Effect>, Error> {
        self.validate_literal(&literal)?;
        let mut effects = Vec::new();
        self.seq += 1;
        self.stamps.insert(literal.clone(), self.seq);
        match certainty {
            // a bare tell and a tell at full certainty are the same fact
            None => {
                self.degreed.remove(&literal);
                self.asserted.insert(literal);
            }
            Some(c) if c.is_certain() => {
                self.degreed.remove(&literal);
                self.asserted.insert(literal);
            }
            Some(c) => {
                // downgrading a certain fact takes two internal changes:
                // the deductive side forgets it, the approximate side
                // receives the degree
                if self.asserted.remove(&literal) {
                    effects.push(Effect::InternalForget(literal.clone()));
                }
                effects.push(Effect::InternalAssert(literal.clone(), c));
                self.degreed.insert(literal, c);
            }
        }
        effects.extend(self.refresh()?);
        Ok(effects)
    }

    fn forget(&mut self, literal: Literal) -> Result<Vec<Effect>, Error> {
        let certain = self.asserted.remove(&literal);
        let degreed = self.degreed.remove(&literal).is_some();
        if !certain && !degreed {
            return Ok(vec![Effect::Warning(format!("nothing asserted about {literal}"))]);
        }
        self.stamps.remove(&literal);
        self.refresh()
    }

    /// Look up the best live fact: asserted certainties first, then proven
    /// memberships, then the approximate picture. A degreed assertion keeps
    /// its asserted label even though it is ranked with the inferred facts.
    pub fn ask(&self, literal: &Literal) -> Answer {
        if self.asserted.contains(literal) {
            return Answer {
                literal: literal.clone(),
                certainty: Certainty::CERTAIN,
                provenance: Some(Provenance::Asserted),
            };
        }
        if self.deduced.contains(literal) {
            return Answer {
                literal: literal.clone(),
                certainty: Certainty::CERTAIN,
                provenance: Some(Provenance::Deduced),
            };
        }
        let value = self.engine.value(literal).or_else(|| self.degreed.get(literal).copied());
        match value {
            Some(certainty) => {
                let provenance = if self.degreed.contains_key(literal) {
                    Provenance::Asserted
                } else {
                    Provenance::Inferred
                };
                Answer { literal: literal.clone(), certainty, provenance: Some(provenance) }
            }
            None => Answer { literal: literal.clone(), certainty: Certainty::UNKNOWN, provenance: None },
        }
    }

    /// Every literal with a live fact, one row each at query precedence,
    /// optionally filtered to those mentioning an instance.
    pub fn facts(&self, instance: Option<&Sym>) -> Vec<Fact> {
        let mut literals: BTreeSet<Literal> = self.asserted.iter().cloned().collect();
        literals.extend(self.degreed.keys().cloned());
        literals.extend(self.deduced.iter().cloned());
        literals.extend(self.engine.values().keys().cloned());
        literals
            .into_iter()
            .filter(|l| instance.map_or(true, |x| l.instances().contains(&x)))
            .map(|l| {
                let a = self.ask(&l);
                Fact {
                    literal: l,
                    certainty: a.certainty,
                    provenance: a.provenance.expect("listed literals have a live fact"),
                    sequence: self.stamps.get(&a.literal).copied().unwrap_or(0),
                }
            })
            .collect()
    }

    /// The full store in machine format, one line per literal, sorted.
    /// Replaying the same statements always reproduces this byte for byte.
    pub fn dump_machine(&self) -> String {
        let mut out = String::new();
        for fact in self.facts(None) {
            let a = Answer {
                literal: fact.literal,
                certainty: fact.certainty,
                provenance: Some(fact.provenance),
            };
            out.push_str(&a.machine());
            out.push('\n');
        }
        out
    }

    fn validate_literal(&self, literal: &Literal) -> Result<(), Error> {
        match literal {
            Literal::Concept(p, _) => {
                if self.tbox.concept(p).is_some() {
                    Ok(())
                } else if self.tbox.relation(p).is_some() {
                    Err(SessionError::Sort(format!(
                        "`{p}` is a relation, but the fact names one instance"
                    ))
                    .into())
                } else {
                    Err(SessionError::UnknownSymbol(p.clone()).into())
                }
            }
            Literal::Role(p, _, _) => {
                if self.tbox.relation(p).is_some() {
                    Ok(())
                } else if self.tbox.concept(p).is_some() {
                    Err(SessionError::Sort(format!(
                        "`{p}` is a concept, but the fact names two instances"
                    ))
                    .into())
                } else {
                    Err(SessionError::UnknownSymbol(p.clone()).into())
                }
            }
        }
    }

    fn validate_pattern(&self, pattern: &Pattern) -> Result<(), Error> {
        match pattern {
            Pattern::Concept(p, _) => {
                if self.tbox.concept(p).is_some() {
                    Ok(())
                } else if self.tbox.relation(p).is_some() {
                    Err(SessionError::Sort(format!(
                        "`{p}` is a relation, but the pattern names one argument"
                    ))
                    .into())
                } else {
                    Err(SessionError::UnknownSymbol(p.clone()).into())
                }
            }
            Pattern::Role(p, _, _) => {
                if self.tbox.relation(p).is_some() {
                    Ok(())
                } else if self.tbox.concept(p).is_some() {
                    Err(SessionError::Sort(format!(
                        "`{p}` is a concept, but the pattern names two arguments"
                    ))
                    .into())
                } else {
                    Err(SessionError::UnknownSymbol(p.clone()).into())
                }
            }
        }
    }

    /// Rebuild the derived state from the asserted base: recognize, score
    /// memberships, propagate rules, promote fresh certainties, and repeat
    /// until nothing new becomes certain.
    fn refresh(&mut self) -> Result<Vec<Effect>, Error> {
        let mut effects = Vec::new();
        let previous = std::mem::take(&mut self.promoted);
        let mut promoted: BTreeSet<Literal> = BTreeSet::new();
        let mut deduced: BTreeSet<Literal> = BTreeSet::new();
        let mut reported: BTreeSet<String> = BTreeSet::new();
        let mut settled = false;

        for _ in 0..DIVERGENCE_GUARD {
            let mut certain = FactView::new();
            for lit in self.asserted.iter().chain(promoted.iter()) {
                certain.insert(lit.clone(), Certainty::CERTAIN);
            }

            let mut universe: BTreeSet<Sym> = certain.instances();
            for lit in self.degreed.keys() {
                universe.extend(lit.instances().into_iter().cloned());
            }
            for (instance, _) in &self.closures {
                universe.insert(instance.clone());
            }

            deduced = BTreeSet::new();
            for x in &universe {
                for concept in recognize(x, &self.tbox, &certain, &self.closures) {
                    deduced.insert(Literal::Concept(concept, x.clone()));
                }
            }
            for lit in &deduced {
                certain.insert(lit.clone(), Certainty::CERTAIN);
            }

            // the graded picture: degreed assertions, overridden by anything certain
            let mut graded = FactView::new();
            for (lit, c) in &self.degreed {
                graded.insert(lit.clone(), *c);
            }
            for (lit, c) in certain.iter() {
                graded.insert(lit.clone(), *c);
            }

            self.engine.clear_inputs();
            self.feed_membership_degrees(&graded, &universe);
            for (lit, c) in &self.degreed {
                self.engine.set_input(lit.clone(), *c);
            }
            for (lit, c) in certain.iter() {
                self.engine.set_input(lit.clone(), *c);
            }

            let propagation = self.engine.propagate();
            for delta in &propagation.deltas {
                effects.push(Effect::EngineTrace(delta.to_string()));
            }
            for diagnostic in &propagation.diagnostics {
                let line = diagnostic.to_string();
                if reported.insert(line.clone()) {
                    effects.push(Effect::Diagnostic(line));
                }
            }

            // engine conclusions at full certainty that the certain view
            // does not already carry
            let next: BTreeSet<Literal> = self
                .engine
                .values()
                .iter()
                .filter(|(lit, c)| {
                    c.is_certain() && !self.asserted.contains(lit) && !deduced.contains(lit)
                })
                .map(|(lit, _)| lit.clone())
                .collect();
            if next == promoted {
                settled = true;
                break;
            }
            promoted = next;
        }
        if !settled {
            return Err(SessionError::DivergenceGuard(DIVERGENCE_GUARD).into());
        }

        for lit in promoted.difference(&previous) {
            effects.push(Effect::Promoted(lit.clone()));
        }
        for lit in previous.difference(&promoted) {
            effects.push(Effect::Demoted(lit.clone()));
        }
        self.promoted = promoted;
        self.deduced = deduced;
        Ok(effects)
    }

    /// Score each defined concept for each instance with relevant
    /// structural evidence and hand the degrees to the engine as inputs.
    /// Scalar scores confirm without refuting; intervals pass through.
    fn feed_membership_degrees(&mut self, graded: &FactView, universe: &BTreeSet<Sym>) {
        let mut contributions: Vec<(Literal, Certainty)> = Vec::new();
        for name in self.tbox.concept_names() {
            let def = self.tbox.concept(name).unwrap();
            if def.kind != DefKind::Definitional || def.nf.bottom {
                continue;
            }
            let mut sig_prims = BTreeSet::new();
            let mut sig_roles = BTreeSet::new();
            signature(&def.nf, &mut sig_prims, &mut sig_roles);
            for x in universe {
                if !self.has_relevant_evidence(x, graded, &sig_prims, &sig_roles) {
                    continue;
                }
                let scored = match satisfaction(x, &def.nf, &self.tbox, graded, &self.degrees) {
                    Ok(c) => c,
                    Err(_) => continue,
                };
                let fed = match self.degrees.conjunction {
                    // a scalar is a confirmation degree, silent on refutation
                    ConjunctionMode::MinScalar => {
                        Certainty::from_degree(scored.lower()).unwrap()
                    }
                    ConjunctionMode::TnormInterval => scored,
                };
                if fed.is_vacuous() {
                    continue;
                }
                contributions.push((Literal::Concept(name.clone(), x.clone()), fed));
            }
        }
        for (literal, certainty) in contributions {
            self.engine.set_input(literal, certainty);
        }
    }

    /// Does the graded view hold any fact about `x` that touches the
    /// concept's signature? Without one, the concept has nothing to say
    /// about the instance and scoring it would only manufacture noise.
    fn has_relevant_evidence(
        &self,
        x: &Sym,
        graded: &FactView,
        sig_prims: &BTreeSet<Sym>,
        sig_roles: &BTreeSet<Sym>,
    ) -> bool {
        for (p, _) in graded.concepts_of(x) {
            if let Some(def) = self.tbox.concept(p) {
                if !def.nf.primitives.is_disjoint(sig_prims) {
                    return true;
                }
                if def.nf.roles.keys().any(|k| !k.is_disjoint(sig_roles)) {
                    return true;
                }
            }
        }
        for (r, _, _) in graded.roles_from(x) {
            if let Some(def) = self.tbox.relation(r) {
                if !def.prims.is_disjoint(sig_roles) {
                    return true;
                }
            }
        }
        false
    }
}

/// All primitive concept and role names a normal form can ever consult.
fn signature(nf: &NormalForm, prims: &mut BTreeSet<Sym>, roles: &mut BTreeSet<Sym>) {
    prims.extend(nf.primitives.iter().cloned());
    for (key, rc) in &nf.roles {
        roles.extend(key.iter().cloned());
        signature(&rc.value, prims, roles);
    }
}
