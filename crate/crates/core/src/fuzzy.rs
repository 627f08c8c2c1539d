//! Graded semantics for concept expressions.
//!
//! Where the recognizer proves memberships outright, this module scores them:
//! given degreed facts, it computes how strongly an instance satisfies a
//! normal form. Quantifiers range over the fillers present in the store, so
//! the scores are relative to what is currently known. All operator choices
//! (fuzzy implication, quantifier semantics, conjunction style, triangular
//! norm family) are carried in a [`DegreeConfig`].

use crate::certainty::Certainty;
use crate::store::FactView;
use crate::tbox::{NormalForm, RoleKey, TBox};
use crate::term::{Literal, Sym};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImplicationKind {
    KleeneDienes,
    Goedel,
    Lukasiewicz,
    Goguen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AllSemantics {
    /// Infimum of pointwise implications over known fillers.
    Implication,
    /// One minus the conditional possibility of a filler escaping the target.
    Possibility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConjunctionMode {
    /// Conjoin by minimum; the result is a single degree.
    MinScalar,
    /// Conjoin into an interval: bold intersection below, minimum above.
    TnormInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TnormFamily {
    Min,
    Product,
    Lukasiewicz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeConfig {
    pub implication: ImplicationKind,
    pub all_semantics: AllSemantics,
    pub conjunction: ConjunctionMode,
    pub tnorm: TnormFamily,
}

impl Default for DegreeConfig {
    fn default() -> DegreeConfig {
        DegreeConfig {
            implication: ImplicationKind::KleeneDienes,
            all_semantics: AllSemantics::Implication,
            conjunction: ConjunctionMode::MinScalar,
            tnorm: TnormFamily::Min,
        }
    }
}

/// Fuzzy implication `a -> b` on degrees in [0, 1].
pub fn implication(kind: ImplicationKind, a: f64, b: f64) -> f64 {
    match kind {
        ImplicationKind::KleeneDienes => (1.0 - a).max(b),
        ImplicationKind::Goedel => {
            if a <= b {
                1.0
            } else {
                b
            }
        }
        ImplicationKind::Lukasiewicz => (1.0 - a + b).min(1.0),
        ImplicationKind::Goguen => {
            if a == 0.0 {
                1.0
            } else {
                (b / a).min(1.0)
            }
        }
    }
}

/// Triangular norm: graded conjunction.
pub fn tnorm(family: TnormFamily, a: f64, b: f64) -> f64 {
    match family {
        TnormFamily::Min => a.min(b),
        TnormFamily::Product => a * b,
        TnormFamily::Lukasiewicz => (a + b - 1.0).max(0.0),
    }
}

/// Triangular conorm: graded disjunction, dual to [`tnorm`].
pub fn tconorm(family: TnormFamily, a: f64, b: f64) -> f64 {
    match family {
        TnormFamily::Min => a.max(b),
        TnormFamily::Product => a + b - a * b,
        TnormFamily::Lukasiewicz => (a + b).min(1.0),
    }
}

/// Scalar cardinality of a fuzzy filler set: the sum of membership degrees.
pub fn sigma_count<I: IntoIterator<Item = f64>>(degrees: I) -> f64 {
    degrees.into_iter().sum()
}

/// Degree to which a scalar cardinality `s` counts as "at least n":
/// 0 up to `n - 1`, then a linear ramp reaching 1 at `n`.
pub fn at_least_degree(n: u32, s: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let n = n as f64;
    if s <= n - 1.0 {
        0.0
    } else if s >= n {
        1.0
    } else {
        s - n + 1.0
    }
}

/// Degree to which a scalar cardinality `s` counts as "at most n":
/// 1 up to `n`, then a linear descent hitting 0 at `n + 1`. The descending
/// branch is `n + 1 - s`, the interpolation between those endpoints.
pub fn at_most_degree(n: u32, s: f64) -> f64 {
    let n = n as f64;
    if s <= n {
        1.0
    } else if s >= n + 1.0 {
        0.0
    } else {
        n + 1.0 - s
    }
}

/// Interval conjunction of scored conjuncts: bold intersection of the lower
/// bounds paired with the minimum of the upper bounds.
pub fn interval_conjunction<I: IntoIterator<Item = (f64, f64)>>(parts: I) -> (f64, f64) {
    let mut lower = 1.0_f64;
    let mut upper = 1.0_f64;
    for (l, u) in parts {
        lower = (lower + l - 1.0).max(0.0);
        upper = upper.min(u);
    }
    (lower, upper)
}

/// Value-restriction degree as a graded universal: the infimum over known
/// fillers of `filler-degree -> member-degree`. No known fillers scores 1.
pub fn all_degree_by_implication<I>(kind: ImplicationKind, fillers: I) -> f64
where
    I: IntoIterator<Item = (f64, f64)>, // (role degree, member degree)
{
    fillers
        .into_iter()
        .map(|(r, m)| implication(kind, r, m))
        .fold(1.0, f64::min)
}

/// Value-restriction degree via conditional possibility: how impossible it
/// is, relative to the role's reach, for a filler to fall outside the
/// target. An empty or zero-reach filler set scores 1.
pub fn all_degree_by_possibility<I>(fillers: I) -> f64
where
    I: IntoIterator<Item = (f64, f64)>,
{
    let mut escape: f64 = 0.0;
    let mut reach: f64 = 0.0;
    for (r, m) in fillers {
        escape = escape.max((1.0 - m).min(r));
        reach = reach.max(r);
    }
    if reach == 0.0 {
        1.0
    } else {
        1.0 - escape / reach
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DegreeError {
    #[error("cannot score membership in an incoherent concept")]
    IncoherentConcept,
}

/// How strongly does `x` belong to each primitive role name, per related
/// instance. A fact on a defined relation vouches for each of its parts.
fn role_degree(view: &FactView, tbox: &TBox, cfg: &DegreeConfig, x: &Sym, y: &Sym, key: &RoleKey) -> f64 {
    let mut out = 1.0;
    for prim in key {
        let mut best = 0.0f64;
        for (role, object, c) in view.roles_from(x) {
            if object != y {
                continue;
            }
            if let Some(def) = tbox.relation(role) {
                if def.prims.contains(prim) {
                    best = best.max(c.lower());
                }
            }
        }
        out = tnorm(cfg.tnorm, out, best);
    }
    out
}

/// All instances with any role evidence from `x` touching `key`.
fn candidate_fillers(view: &FactView, tbox: &TBox, x: &Sym, key: &RoleKey) -> Vec<Sym> {
    let mut out = Vec::new();
    for (role, object, _) in view.roles_from(x) {
        if let Some(def) = tbox.relation(role) {
            if !def.prims.is_disjoint(key) && !out.contains(object) {
                out.push(object.clone());
            }
        }
    }
    out
}

/// Score the membership of `x` in a normal form against the view.
///
/// In min-scalar mode the result is a point interval; in interval mode the
/// conjuncts combine into a genuine interval. Either way primitives read
/// their stored certainty ([0, 1] when absent) and quantified constraints
/// are scored over the fillers currently in view.
pub fn satisfaction(
    x: &Sym,
    nf: &NormalForm,
    tbox: &TBox,
    view: &FactView,
    cfg: &DegreeConfig,
) -> Result<Certainty, DegreeError> {
    if nf.bottom {
        return Err(DegreeError::IncoherentConcept);
    }
    let mut parts: Vec<(f64, f64)> = Vec::new();
    for p in &nf.primitives {
        let c = view
            .certainty(&Literal::Concept(p.clone(), x.clone()))
            .unwrap_or(Certainty::UNKNOWN);
        parts.push((c.lower(), c.upper()));
    }
    for (key, rc) in &nf.roles {
        let fillers = candidate_fillers(view, tbox, x, key);
        let degrees: Vec<(Sym, f64)> = fillers
            .into_iter()
            .map(|y| {
                let d = role_degree(view, tbox, cfg, x, &y, key);
                (y, d)
            })
            .collect();
        if rc.min > 0 {
            let s = sigma_count(degrees.iter().map(|(_, d)| *d));
            let v = at_least_degree(rc.min, s);
            parts.push((v, v));
        }
        if let Some(max) = rc.max {
            let s = sigma_count(degrees.iter().map(|(_, d)| *d));
            let v = at_most_degree(max, s);
            parts.push((v, v));
        }
        if !rc.value.is_top() {
            let scored: Vec<(f64, f64)> = degrees
                .iter()
                .map(|(y, d)| {
                    let m = satisfaction(y, &rc.value, tbox, view, cfg)?.lower();
                    Ok((*d, m))
                })
                .collect::<Result<_, DegreeError>>()?;
            let v = match cfg.all_semantics {
                AllSemantics::Implication => all_degree_by_implication(cfg.implication, scored),
                AllSemantics::Possibility => all_degree_by_possibility(scored),
            };
            parts.push((v, v));
        }
    }
    Ok(match cfg.conjunction {
        ConjunctionMode::MinScalar => {
            let m = parts.iter().map(|(l, _)| *l).fold(1.0, f64::min);
            Certainty::new(m, m).unwrap()
        }
        ConjunctionMode::TnormInterval => {
            let (l, u) = interval_conjunction(parts);
            // the bold lower bound cannot exceed the minimum upper bound,
            // so the interval is always well formed
            Certainty::new(l, u).unwrap()
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tbox::tbox_from;

    const TOL: f64 = 1e-12;

    #[test]
    fn implication_families_agree_on_crisp_inputs() {
        for kind in [
            ImplicationKind::KleeneDienes,
            ImplicationKind::Goedel,
            ImplicationKind::Lukasiewicz,
            ImplicationKind::Goguen,
        ] {
            assert_eq!(implication(kind, 1.0, 1.0), 1.0);
            assert_eq!(implication(kind, 1.0, 0.0), 0.0);
            assert_eq!(implication(kind, 0.0, 0.0), 1.0);
            assert_eq!(implication(kind, 0.0, 1.0), 1.0);
        }
    }

    #[test]
    fn implication_families_differ_on_graded_inputs() {
        assert!((implication(ImplicationKind::KleeneDienes, 0.8, 0.5) - 0.5).abs() < TOL);
        assert!((implication(ImplicationKind::Goedel, 0.8, 0.5) - 0.5).abs() < TOL);
        assert!((implication(ImplicationKind::Goedel, 0.5, 0.5) - 1.0).abs() < TOL);
        assert!((implication(ImplicationKind::Lukasiewicz, 0.8, 0.5) - 0.7).abs() < TOL);
        assert!((implication(ImplicationKind::Goguen, 0.8, 0.5) - 0.625).abs() < TOL);
    }

    #[test]
    fn ramp_memberships_match_their_breakpoints() {
        assert_eq!(at_least_degree(2, 1.0), 0.0);
        assert!((at_least_degree(2, 1.6) - 0.6).abs() < TOL);
        assert_eq!(at_least_degree(2, 2.0), 1.0);
        assert_eq!(at_least_degree(0, 0.0), 1.0);

        assert_eq!(at_most_degree(1, 1.0), 1.0);
        assert!((at_most_degree(1, 1.5) - 0.5).abs() < TOL);
        assert_eq!(at_most_degree(1, 2.0), 0.0);
        assert!((at_most_degree(0, 0.4) - 0.6).abs() < TOL);
    }

    #[test]
    fn interval_conjunction_bounds() {
        let (l, u) = interval_conjunction([(0.8, 0.8), (0.7, 0.7)]);
        assert!((l - 0.5).abs() < TOL);
        assert!((u - 0.7).abs() < TOL);
        let (l, u) = interval_conjunction([]);
        assert_eq!((l, u), (1.0, 1.0));
    }

    fn graded_family() -> (TBox, FactView) {
        let tbox = tbox_from(
            "(defconcept Male (:primitive))\n\
             (defconcept College-Graduate (:primitive))\n\
             (defrelation Child :primitive)\n\
             (defconcept Father (:and Male (:at-least 1 Child)))\n\
             (defconcept Successful-Father (:and Father (:all Child College-Graduate)))",
        );
        let view: FactView = [
            (Literal::Concept("Male".into(), "John".into()), Certainty::CERTAIN),
            (Literal::Role("Child".into(), "John".into(), "Philip".into()), Certainty::CERTAIN),
            (Literal::Role("Child".into(), "John".into(), "Angela".into()), Certainty::CERTAIN),
            (
                Literal::Concept("College-Graduate".into(), "Philip".into()),
                Certainty::from_degree(0.9).unwrap(),
            ),
            (
                Literal::Concept("College-Graduate".into(), "Angela".into()),
                Certainty::from_degree(0.7).unwrap(),
            ),
        ]
        .into_iter()
        .collect();
        (tbox, view)
    }

    #[test]
    fn graded_value_restriction_under_both_quantifier_readings() {
        let (tbox, view) = graded_family();
        let nf = &tbox.concept(&"Successful-Father".into()).unwrap().nf;

        let cfg = DegreeConfig::default();
        let c = satisfaction(&"John".into(), nf, &tbox, &view, &cfg).unwrap();
        assert!((c.lower() - 0.7).abs() < TOL);
        assert!((c.upper() - 0.7).abs() < TOL);

        let cfg = DegreeConfig { all_semantics: AllSemantics::Possibility, ..cfg };
        let c = satisfaction(&"John".into(), nf, &tbox, &view, &cfg).unwrap();
        assert!((c.lower() - 0.7).abs() < TOL);
    }

    #[test]
    fn unknown_filler_standing_drags_the_universal_down() {
        let (tbox, _) = graded_family();
        let nf = &tbox.concept(&"Successful-Father".into()).unwrap().nf;
        let view: FactView = [
            (Literal::Concept("Male".into(), "John".into()), Certainty::CERTAIN),
            (Literal::Role("Child".into(), "John".into(), "Philip".into()), Certainty::CERTAIN),
        ]
        .into_iter()
        .collect();
        let cfg = DegreeConfig::default();
        let c = satisfaction(&"John".into(), nf, &tbox, &view, &cfg).unwrap();
        assert!((c.lower() - 0.0).abs() < TOL);
    }

    #[test]
    fn quantifiers_without_fillers() {
        let tbox = tbox_from(
            "(defconcept College-Graduate (:primitive))\n\
             (defrelation Child :primitive)\n\
             (defconcept Proud (:all Child College-Graduate))\n\
             (defconcept Parent (:at-least 1 Child))",
        );
        let lonely: FactView = FactView::new();
        let cfg = DegreeConfig::default();

        // a universal over an empty filler set is vacuously full
        let nf = &tbox.concept(&"Proud".into()).unwrap().nf;
        let c = satisfaction(&"John".into(), nf, &tbox, &lonely, &cfg).unwrap();
        assert_eq!(c.lower(), 1.0);

        // an existence demand over an empty filler set fails outright
        let nf = &tbox.concept(&"Parent".into()).unwrap().nf;
        let c = satisfaction(&"John".into(), nf, &tbox, &lonely, &cfg).unwrap();
        assert_eq!(c.lower(), 0.0);
    }

    #[test]
    fn incoherent_concepts_cannot_be_scored() {
        let tbox = tbox_from(
            "(defrelation Child :primitive)\n\
             (defconcept Odd (:and (:at-least 2 Child) (:at-most 1 Child)))",
        );
        let nf = &tbox.concept(&"Odd".into()).unwrap().nf;
        let err = satisfaction(&"John".into(), nf, &tbox, &FactView::new(), &DegreeConfig::default());
        assert_eq!(err, Err(DegreeError::IncoherentConcept));
    }

    #[test]
    fn interval_mode_carries_primitive_intervals_through() {
        let tbox = tbox_from("(defconcept A (:primitive))\n(defconcept B (:primitive))\n(defconcept AB (:and A B))");
        let view: FactView = [
            (Literal::Concept("A".into(), "x".into()), Certainty::point(0.8).unwrap()),
            (Literal::Concept("B".into(), "x".into()), Certainty::point(0.7).unwrap()),
        ]
        .into_iter()
        .collect();
        let cfg = DegreeConfig { conjunction: ConjunctionMode::TnormInterval, ..DegreeConfig::default() };
        let nf = &tbox.concept(&"AB".into()).unwrap().nf;
        let c = satisfaction(&"x".into(), nf, &tbox, &view, &cfg).unwrap();
        assert!((c.lower() - 0.5).abs() < TOL);
        assert!((c.upper() - 0.7).abs() < TOL);
    }

    #[test]
    fn defined_relation_facts_vouch_for_their_parts() {
        let tbox = tbox_from(
            "(defrelation R1 :primitive)\n\
             (defrelation R2 :primitive)\n\
             (defrelation Both (:and R1 R2))\n\
             (defconcept HasR1 (:at-least 1 R1))",
        );
        let view: FactView = [(
            Literal::Role("Both".into(), "a".into(), "b".into()),
            Certainty::from_degree(0.6).unwrap(),
        )]
        .into_iter()
        .collect();
        let nf = &tbox.concept(&"HasR1".into()).unwrap().nf;
        let c = satisfaction(&"a".into(), nf, &tbox, &view, &DegreeConfig::default()).unwrap();
        assert!((c.lower() - 0.6).abs() < TOL);
    }
}
