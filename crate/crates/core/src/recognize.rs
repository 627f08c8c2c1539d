//! Structural instance recognition over certain facts.
//!
//! Recognition proves concept memberships, never assumes them: primitive
//! atoms must be entailed by asserted memberships, minimum cardinalities by
//! counting distinct fillers (or by an asserted description that promises
//! them), and maximum cardinalities and value restrictions additionally need
//! the role closed for the instance, since an open role could always acquire
//! new fillers.

use std::collections::{BTreeMap, BTreeSet};

use crate::classify::subsumes;
use crate::store::FactView;
use crate::tbox::{NormalForm, RoleConstraint, RoleKey, TBox};
use crate::term::Sym;

/// `(instance, canonical role)` pairs the user has declared complete.
pub type Closures = BTreeSet<(Sym, RoleKey)>;

/// Everything certain that is known about one instance, in resolved form.
struct Profile<'a> {
    /// Primitive atoms entailed by asserted or deduced memberships.
    prims: BTreeSet<Sym>,
    /// Role constraints promised by asserted or deduced memberships.
    promised: Vec<(&'a RoleKey, &'a RoleConstraint)>,
    /// For each related instance, the primitive role names connecting to it.
    fillers: BTreeMap<&'a Sym, RoleKey>,
    /// Canonical roles closed for this instance.
    closed: Vec<&'a RoleKey>,
}

fn profile<'a>(
    x: &'a Sym,
    tbox: &'a TBox,
    certain: &'a FactView,
    closures: &'a Closures,
) -> Profile<'a> {
    let mut prims = BTreeSet::new();
    let mut promised = Vec::new();
    for (concept, _) in certain.concepts_of(x) {
        if let Some(def) = tbox.concept(concept) {
            prims.extend(def.nf.primitives.iter().cloned());
            promised.extend(def.nf.roles.iter());
        }
    }
    let mut fillers: BTreeMap<&Sym, RoleKey> = BTreeMap::new();
    for (role, object, _) in certain.roles_from(x) {
        if let Some(def) = tbox.relation(role) {
            fillers.entry(object).or_default().extend(def.prims.iter().cloned());
        }
    }
    let closed = closures
        .iter()
        .filter(|(inst, _)| inst == x)
        .map(|(_, key)| key)
        .collect();
    Profile { prims, promised, fillers, closed }
}

impl Profile<'_> {
    fn count_fillers(&self, key: &RoleKey) -> u32 {
        self.fillers.values().filter(|have| key.is_subset(have)).count() as u32
    }

    fn fillers_of<'b>(&'b self, key: &'b RoleKey) -> impl Iterator<Item = &'b Sym> + 'b {
        self.fillers
            .iter()
            .filter(move |(_, have)| key.is_subset(have))
            .map(|(y, _)| *y)
    }
}

fn proves(
    x: &Sym,
    nf: &NormalForm,
    tbox: &TBox,
    certain: &FactView,
    closures: &Closures,
) -> bool {
    if nf.bottom {
        return false;
    }
    let prof = profile(x, tbox, certain, closures);
    if !nf.primitives.is_subset(&prof.prims) {
        return false;
    }
    for (key, want) in &nf.roles {
        if want.min > 0 {
            let counted = prof.count_fillers(key);
            let promised = prof
                .promised
                .iter()
                .filter(|(k, _)| key.is_subset(k))
                .map(|(_, rc)| rc.min)
                .max()
                .unwrap_or(0);
            if counted.max(promised) < want.min {
                return false;
            }
        }
        if let Some(max) = want.max {
            // sound upper bounds on the filler count: a closed wider role
            // bounds every role inside it, and asserted descriptions carry
            // their own caps
            let closed_bound = prof
                .closed
                .iter()
                .filter(|q| q.is_subset(key))
                .map(|q| prof.count_fillers(q))
                .min();
            let promised_bound = prof
                .promised
                .iter()
                .filter(|(k, _)| k.is_subset(key))
                .filter_map(|(_, rc)| rc.max)
                .min();
            let bound = match (closed_bound, promised_bound) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            if !bound.is_some_and(|b| b <= max) {
                return false;
            }
        }
        if !want.value.is_top() {
            let by_promise = prof.promised.iter().any(|(k, rc)| {
                k.is_subset(key) && (subsumes(&want.value, &rc.value) || rc.max == Some(0))
            });
            let by_closure = prof.closed.iter().any(|q| {
                q.is_subset(key)
                    && prof
                        .fillers_of(q)
                        .all(|y| proves(y, &want.value, tbox, certain, closures))
            });
            if !by_promise && !by_closure {
                return false;
            }
        }
    }
    true
}

/// Every named concept the instance provably belongs to.
pub fn recognize(x: &Sym, tbox: &TBox, certain: &FactView, closures: &Closures) -> BTreeSet<Sym> {
    tbox.concept_names()
        .filter(|name| proves(x, &tbox.concept(name).unwrap().nf, tbox, certain, closures))
        .cloned()
        .collect()
}
