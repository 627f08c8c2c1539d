//! The terminology: named concept and relation definitions, and the
//! canonical normal form every concept expression is compiled into.
//!
//! A normal form is a conjunction of primitive atoms plus, per role, a merged
//! constraint record (value restriction, minimum and maximum cardinality).
//! Roles are canonicalized to the set of primitive role names they conjoin.
//! Contradictory cardinalities mark the form incoherent.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::TermError;
use crate::term::{Sym, TermExpr};

/// A canonical role: the set of primitive role names whose conjunction it is.
/// A key with more names denotes a smaller relation.
pub type RoleKey = BTreeSet<Sym>;

/// Merged constraints on one canonical role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleConstraint {
    /// Every filler must belong here; `NormalForm::top()` when unconstrained.
    pub value: NormalForm,
    pub min: u32,
    /// `None` means unbounded.
    pub max: Option<u32>,
}

impl RoleConstraint {
    fn unconstrained() -> RoleConstraint {
        RoleConstraint { value: NormalForm::top(), min: 0, max: None }
    }

    fn is_trivial(&self) -> bool {
        self.min == 0 && self.max.is_none() && self.value.is_top()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub primitives: BTreeSet<Sym>,
    pub roles: BTreeMap<RoleKey, RoleConstraint>,
    pub bottom: bool,
}

impl NormalForm {
    pub fn top() -> NormalForm {
        NormalForm { primitives: BTreeSet::new(), roles: BTreeMap::new(), bottom: false }
    }

    /// The canonical incoherent form; all structure is cleared.
    pub fn incoherent() -> NormalForm {
        NormalForm { primitives: BTreeSet::new(), roles: BTreeMap::new(), bottom: true }
    }

    pub fn is_top(&self) -> bool {
        !self.bottom && self.primitives.is_empty() && self.roles.is_empty()
    }

    pub fn of_primitive(name: Sym) -> NormalForm {
        NormalForm {
            primitives: BTreeSet::from([name]),
            roles: BTreeMap::new(),
            bottom: false,
        }
    }

    /// Conjoin two normal forms.
    pub fn merge(mut self, other: NormalForm) -> NormalForm {
        if self.bottom || other.bottom {
            return NormalForm::incoherent();
        }
        self.primitives.extend(other.primitives);
        for (key, rc) in other.roles {
            match self.roles.entry(key) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(rc);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let cur = e.get_mut();
                    cur.min = cur.min.max(rc.min);
                    cur.max = match (cur.max, rc.max) {
                        (None, m) | (m, None) => m,
                        (Some(a), Some(b)) => Some(a.min(b)),
                    };
                    let value = std::mem::replace(&mut cur.value, NormalForm::top());
                    cur.value = value.merge(rc.value);
                }
            }
        }
        self.canonicalize()
    }

    /// Detect contradictions, rewrite empty-valued roles, drop trivial entries.
    fn canonicalize(mut self) -> NormalForm {
        let mut bottom = self.bottom;
        let mut roles = BTreeMap::new();
        for (key, mut rc) in std::mem::take(&mut self.roles) {
            if rc.value.bottom {
                // every filler would be incoherent, so either there are
                // required fillers (contradiction) or there can be none
                if rc.min >= 1 {
                    bottom = true;
                    break;
                }
                rc.value = NormalForm::top();
                rc.max = Some(0);
            }
            if let Some(max) = rc.max {
                if rc.min > max {
                    bottom = true;
                    break;
                }
            }
            if !rc.is_trivial() {
                roles.insert(key, rc);
            }
        }
        if bottom {
            return NormalForm::incoherent();
        }
        self.roles = roles;
        self
    }

    /// Rebuild a surface expression denoting this form. `None` for the two
    /// forms the grammar cannot write down: top and the incoherent form.
    /// Primitive atoms come back as name references, so the result only
    /// normalizes in a terminology where those names are defined.
    pub fn to_expr(&self) -> Option<TermExpr> {
        if self.bottom || self.is_top() {
            return None;
        }
        let role_expr = |key: &RoleKey| {
            let refs: Vec<TermExpr> = key.iter().cloned().map(TermExpr::Ref).collect();
            if refs.len() == 1 {
                refs.into_iter().next().unwrap()
            } else {
                TermExpr::RoleAnd(refs)
            }
        };
        let mut parts: Vec<TermExpr> =
            self.primitives.iter().cloned().map(TermExpr::Ref).collect();
        for (key, rc) in &self.roles {
            if !rc.value.is_top() {
                let filler = rc.value.to_expr().expect("non-top coherent value");
                parts.push(TermExpr::All(Box::new(role_expr(key)), Box::new(filler)));
            }
            if rc.min > 0 {
                parts.push(TermExpr::AtLeast(rc.min, Box::new(role_expr(key))));
            }
            if let Some(max) = rc.max {
                parts.push(TermExpr::AtMost(max, Box::new(role_expr(key))));
            }
        }
        match parts.len() {
            0 => None,
            1 => Some(parts.into_iter().next().unwrap()),
            _ => Some(TermExpr::ConceptAnd(parts)),
        }
    }
}

/// How a concept name was introduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefKind {
    Primitive,
    Definitional,
}

#[derive(Debug, Clone)]
pub struct ConceptDef {
    pub expr: TermExpr,
    pub nf: NormalForm,
    pub kind: DefKind,
}

#[derive(Debug, Clone)]
pub struct RelationDef {
    pub expr: Option<TermExpr>,
    pub prims: RoleKey,
    pub primitive: bool,
}

/// The terminology. Definitions are resolved eagerly, so every stored name
/// carries its normal form and later definitions may only reference earlier
/// ones — which rules out cycles by construction.
#[derive(Debug, Clone, Default)]
pub struct TBox {
    concepts: BTreeMap<Sym, ConceptDef>,
    relations: BTreeMap<Sym, RelationDef>,
    anon: u32,
}

impl TBox {
    pub fn new() -> TBox {
        TBox::default()
    }

    pub fn concept(&self, name: &Sym) -> Option<&ConceptDef> {
        self.concepts.get(name)
    }

    pub fn relation(&self, name: &Sym) -> Option<&RelationDef> {
        self.relations.get(name)
    }

    pub fn concept_names(&self) -> impl Iterator<Item = &Sym> {
        self.concepts.keys()
    }

    pub fn relation_names(&self) -> impl Iterator<Item = &Sym> {
        self.relations.keys()
    }

    fn mentions(expr: &TermExpr, name: &Sym) -> bool {
        match expr {
            TermExpr::Ref(n) => n == name,
            TermExpr::Primitive(_) | TermExpr::PrimitiveMarker => false,
            TermExpr::ConceptAnd(es) | TermExpr::RoleAnd(es) => {
                es.iter().any(|e| TBox::mentions(e, name))
            }
            TermExpr::All(r, c) => TBox::mentions(r, name) || TBox::mentions(c, name),
            TermExpr::AtLeast(_, r) | TermExpr::AtMost(_, r) => TBox::mentions(r, name),
        }
    }

    /// Replace each `(:primitive)` marker with a fresh named atom.
    fn name_markers(&mut self, expr: TermExpr, owner: &Sym, top_level: bool) -> TermExpr {
        match expr {
            TermExpr::PrimitiveMarker => {
                if top_level {
                    TermExpr::Primitive(owner.clone())
                } else {
                    self.anon += 1;
                    TermExpr::Primitive(Sym::new(&format!("{owner}*{}", self.anon)))
                }
            }
            TermExpr::ConceptAnd(es) => TermExpr::ConceptAnd(
                es.into_iter().map(|e| self.name_markers(e, owner, false)).collect(),
            ),
            TermExpr::RoleAnd(es) => TermExpr::RoleAnd(
                es.into_iter().map(|e| self.name_markers(e, owner, false)).collect(),
            ),
            TermExpr::All(r, c) => TermExpr::All(
                Box::new(self.name_markers(*r, owner, false)),
                Box::new(self.name_markers(*c, owner, false)),
            ),
            other => other,
        }
    }

    pub fn define_concept(&mut self, name: Sym, expr: TermExpr) -> Result<(), TermError> {
        if self.concepts.contains_key(&name) {
            return Err(TermError::DuplicateDefinition(name));
        }
        if TBox::mentions(&expr, &name) {
            return Err(TermError::CyclicDefinition(name));
        }
        let kind = if matches!(expr, TermExpr::PrimitiveMarker) {
            DefKind::Primitive
        } else {
            DefKind::Definitional
        };
        let expr = self.name_markers(expr, &name, true);
        let nf = self.normalize(&expr)?;
        self.concepts.insert(name, ConceptDef { expr, nf, kind });
        Ok(())
    }

    pub fn define_relation(&mut self, name: Sym, expr: Option<TermExpr>) -> Result<(), TermError> {
        if self.relations.contains_key(&name) {
            return Err(TermError::DuplicateDefinition(name));
        }
        match expr {
            None => {
                let prims = BTreeSet::from([name.clone()]);
                self.relations
                    .insert(name, RelationDef { expr: None, prims, primitive: true });
            }
            Some(e) => {
                if TBox::mentions(&e, &name) {
                    return Err(TermError::CyclicDefinition(name));
                }
                let prims = self.role_key(&e)?;
                self.relations
                    .insert(name, RelationDef { expr: Some(e), prims, primitive: false });
            }
        }
        Ok(())
    }

    /// Canonicalize a role expression to its set of primitive role names.
    pub fn role_key(&self, expr: &TermExpr) -> Result<RoleKey, TermError> {
        match expr {
            TermExpr::Ref(n) => match self.relations.get(n) {
                Some(def) => Ok(def.prims.clone()),
                None if self.concepts.contains_key(n) => Err(TermError::Sort(format!(
                    "`{n}` names a concept but is used as a role"
                ))),
                None => Err(TermError::UnknownName(n.clone())),
            },
            TermExpr::RoleAnd(es) => {
                let mut key = RoleKey::new();
                for e in es {
                    key.extend(self.role_key(e)?);
                }
                Ok(key)
            }
            other => Err(TermError::Sort(format!(
                "`{other}` is not a role expression"
            ))),
        }
    }

    /// Compile a concept expression to its normal form.
    pub fn normalize(&self, expr: &TermExpr) -> Result<NormalForm, TermError> {
        match expr {
            TermExpr::Ref(n) => match self.concepts.get(n) {
                Some(def) => Ok(def.nf.clone()),
                None if self.relations.contains_key(n) => Err(TermError::Sort(format!(
                    "`{n}` names a role but is used as a concept"
                ))),
                None => Err(TermError::UnknownName(n.clone())),
            },
            TermExpr::Primitive(n) => Ok(NormalForm::of_primitive(n.clone())),
            TermExpr::PrimitiveMarker => Err(TermError::Sort(
                "(:primitive) is only meaningful inside a definition".into(),
            )),
            TermExpr::ConceptAnd(es) => {
                let mut nf = NormalForm::top();
                for e in es {
                    nf = nf.merge(self.normalize(e)?);
                }
                Ok(nf)
            }
            TermExpr::RoleAnd(_) => Err(TermError::Sort(
                "a role conjunction is not a concept expression".into(),
            )),
            TermExpr::All(r, c) => {
                let key = self.role_key(r)?;
                let value = self.normalize(c)?;
                let mut nf = NormalForm::top();
                nf.roles.insert(key, RoleConstraint { value, ..RoleConstraint::unconstrained() });
                Ok(nf.canonicalize())
            }
            TermExpr::AtLeast(n, r) => {
                let key = self.role_key(r)?;
                let mut nf = NormalForm::top();
                nf.roles.insert(key, RoleConstraint { min: *n, ..RoleConstraint::unconstrained() });
                Ok(nf.canonicalize())
            }
            TermExpr::AtMost(n, r) => {
                let key = self.role_key(r)?;
                let mut nf = NormalForm::top();
                nf.roles
                    .insert(key, RoleConstraint { max: Some(*n), ..RoleConstraint::unconstrained() });
                Ok(nf.canonicalize())
            }
        }
    }
}

/// Test fixture: build a terminology from definition statements, panicking
/// on anything else.
#[cfg(test)]
pub(crate) fn tbox_from(src: &str) -> TBox {
    use crate::parse::parse_program;
    use crate::term::Statement;

    let mut tbox = TBox::new();
    for stmt in parse_program(src).unwrap() {
        match stmt {
            Statement::DefConcept(n, e) => tbox.define_concept(n, e).unwrap(),
            Statement::DefRelation(n, e) => tbox.define_relation(n, e).unwrap(),
            other => panic!("not a definition: {other}"),
        }
    }
    tbox
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family() -> TBox {
        tbox_from(
            "(defconcept Male (:primitive))\n\
             (defconcept College-Graduate (:primitive))\n\
             (defrelation Child :primitive)\n\
             (defconcept Father (:and Male (:at-least 1 Child)))\n\
             (defconcept Successful-Father (:and Father (:all Child College-Graduate)))",
        )
    }

    #[test]
    fn value_restrictions_on_one_role_merge() {
        let tbox = tbox_from(
            "(defconcept Male (:primitive))\n\
             (defconcept Rich (:primitive))\n\
             (defrelation Child :primitive)\n\
             (defconcept T (:and (:all Child Male) (:all Child Rich)))",
        );
        let nf = &tbox.concept(&"T".into()).unwrap().nf;
        assert_eq!(nf.roles.len(), 1);
        let rc = nf.roles.values().next().unwrap();
        let expected: BTreeSet<Sym> = ["Male".into(), "Rich".into()].into();
        assert_eq!(rc.value.primitives, expected);
    }

    #[test]
    fn contradictory_cardinalities_are_incoherent() {
        let tbox = tbox_from(
            "(defrelation Child :primitive)\n\
             (defconcept Odd (:and (:at-least 3 Child) (:at-most 2 Child)))",
        );
        assert!(tbox.concept(&"Odd".into()).unwrap().nf.bottom);
    }

    #[test]
    fn composed_definition_unfolds() {
        let tbox = family();
        let nf = &tbox.concept(&"Successful-Father".into()).unwrap().nf;
        assert!(nf.primitives.contains(&"Male".into()));
        let key: RoleKey = BTreeSet::from([Sym::new("Child")]);
        let rc = &nf.roles[&key];
        assert_eq!(rc.min, 1);
        assert_eq!(rc.max, None);
        assert!(rc.value.primitives.contains(&"College-Graduate".into()));
    }

    #[test]
    fn unknown_and_cyclic_names_are_rejected() {
        let mut tbox = TBox::new();
        let err = tbox
            .define_concept("A".into(), TermExpr::Ref("Missing".into()))
            .unwrap_err();
        assert_eq!(err, TermError::UnknownName("Missing".into()));

        let err = tbox
            .define_concept(
                "B".into(),
                TermExpr::ConceptAnd(vec![
                    TermExpr::Ref("B".into()),
                    TermExpr::PrimitiveMarker,
                ]),
            )
            .unwrap_err();
        assert_eq!(err, TermError::CyclicDefinition("B".into()));
    }

    #[test]
    fn normalize_is_idempotent_via_surface_syntax() {
        let tbox = family();
        for name in ["Male", "Father", "Successful-Father"] {
            let nf = &tbox.concept(&name.into()).unwrap().nf;
            let expr = nf.to_expr().unwrap();
            let again = tbox.normalize(&expr).unwrap();
            assert_eq!(&again, nf, "{name} did not round trip");
        }
    }

    #[test]
    fn empty_value_restriction_becomes_zero_cardinality() {
        let tbox = tbox_from(
            "(defrelation Child :primitive)\n\
             (defconcept None (:and (:at-least 1 Child) (:at-most 0 Child)))",
        );
        assert!(tbox.concept(&"None".into()).unwrap().nf.bottom);

        let tbox = tbox_from(
            "(defrelation Child :primitive)\n\
             (defconcept Bad (:and (:at-least 1 Child) (:at-most 0 Child)))\n\
             (defconcept Childless (:all Child Bad))",
        );
        let nf = &tbox.concept(&"Childless".into()).unwrap().nf;
        assert!(!nf.bottom);
        let rc = nf.roles.values().next().unwrap();
        assert_eq!(rc.max, Some(0));
        assert!(rc.value.is_top());
    }

    #[test]
    fn duplicate_definitions_are_rejected() {
        let mut tbox = TBox::new();
        tbox.define_concept("A".into(), TermExpr::PrimitiveMarker).unwrap();
        assert_eq!(
            tbox.define_concept("A".into(), TermExpr::PrimitiveMarker),
            Err(TermError::DuplicateDefinition("A".into()))
        );
    }
}
