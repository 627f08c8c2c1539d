//! End-to-end behavior checks. Each test pins one externally observable
//! guarantee — golden dialogue strings, worked numeric values, operator
//! axioms, and randomized differential oracles — and prints a PASS line
//! once its claim has been verified.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use credal_core::fuzzy::{
    at_least_degree, at_most_degree, interval_conjunction, satisfaction, tconorm, tnorm,
};
use credal_core::scc::condense;
use credal_core::{
    classify, parse_program, subsumes, AllSemantics, Answer, Arg, Certainty, ConjunctionMode,
    DefaultSpec, DegreeConfig, Effect, Engine, FactView, ImplicationKind, Literal, NormalForm,
    Pattern, Provenance, RuleMode, RuleSpec, Session, Statement, Sym, TBox, TermExpr, TnormFamily,
};

const TOL: f64 = 1e-12;
const GRID_TOL: f64 = 1e-9;

fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parse a source block and feed every statement to the session, panicking
/// on any error and returning the accumulated effects.
fn run(session: &mut Session, src: &str) -> Vec<Effect> {
    let mut effects = Vec::new();
    for statement in parse_program(src).expect("source parses") {
        effects.extend(session.execute(statement).expect("statement executes"));
    }
    effects
}

fn answers(effects: &[Effect]) -> Vec<Answer> {
    effects
        .iter()
        .filter_map(|e| match e {
            Effect::Answer(a) => Some(a.clone()),
            _ => None,
        })
        .collect()
}

/// Build a terminology from definition statements only.
fn tbox_of(src: &str) -> TBox {
    let mut tbox = TBox::new();
    for statement in parse_program(src).expect("definitions parse") {
        match statement {
            Statement::DefConcept(n, e) => tbox.define_concept(n, e).expect("concept defines"),
            Statement::DefRelation(n, e) => tbox.define_relation(n, e).expect("relation defines"),
            other => panic!("not a definition: {other}"),
        }
    }
    tbox
}

// ---------------------------------------------------------------------------
// 1. The rich-man dialogue: a plausible answer, overridden by a proof, and
//    restored when the proof's premise is withdrawn.

const DIALOGUE: &str = "
(defconcept Mercedes (:primitive))
(defconcept Mansion (:primitive))
(defrelation Drives :primitive)
(defrelation Live-in :primitive)
(defrelation Mansion-home :primitive)
(defconcept Rich (:at-least 1 Mansion-home))
(defrule home-of-substance
  :if (:and (Live-in ?x ?y) (Mansion ?y)) :then (Mansion-home ?x ?y) :sufficiency 1)
(defrule mercedes-owners-are-rich
  :if (:and (Drives ?x ?y) (Mercedes ?y)) :then (Rich ?x) :sufficiency 0.8)
(tell (Drives John car-1))
(tell (Mercedes car-1))
(ask (Rich John))
(tell (Live-in John house-1))
(tell (Mansion house-1))
(ask (Rich John))
(forget (Live-in John house-1))
(ask (Rich John))
";

#[test]
fn dialogue_answers_override_then_revert() {
    let mut session = Session::new(DegreeConfig::default(), 10);
    let effects = run(&mut session, DIALOGUE);
    let prose: Vec<String> = answers(&effects).iter().map(|a| a.prose()).collect();
    assert_eq!(
        prose,
        [
            "John is likely (0.8) to be rich.",
            "John is rich.",
            "John is likely (0.8) to be rich.",
        ]
    );
    println!("PASS: dialogue answers 0.8, then certain, then 0.8 again after the forget");
}

// ---------------------------------------------------------------------------
// 2. Downgrading a certain fact to a degree is reported as exactly two
//    internal changes: the deductive side forgets, the approximate side
//    receives the degree.

#[test]
fn downgrading_a_certain_fact_reports_two_internal_changes() {
    let mut session = Session::new(DegreeConfig::default(), 10);
    run(
        &mut session,
        "(defconcept Rich-person (:primitive)) (tell (Rich-person John))",
    );
    let effects = run(&mut session, "(tell ((Rich-person John) 0.8))");
    assert!(effects.len() >= 2, "expected the two internal changes");
    assert_eq!(
        effects[0].to_string(),
        "internal: forget (Rich-person John) to deductive reasoner"
    );
    assert_eq!(
        effects[1].to_string(),
        "internal: assert (Rich-person John) [0.8, 1] to approximate reasoner"
    );
    let internal = effects
        .iter()
        .filter(|e| matches!(e, Effect::InternalForget(_) | Effect::InternalAssert(..)))
        .count();
    assert_eq!(internal, 2, "no internal changes beyond the pair");

    let answer = session.ask(&Literal::Concept(Sym::new("Rich-person"), Sym::new("John")));
    assert_eq!(answer.certainty, Certainty::from_degree(0.8).unwrap());
    assert_eq!(answer.provenance, Some(Provenance::Asserted));
    println!("PASS: downgrade emits exactly the forget/assert pair and re-asks give [0.8, 1] asserted");
}

// ---------------------------------------------------------------------------
// 3. On complete crisp stores the graded scorer collapses to a classical
//    interpreter, for every operator configuration.

const CRISP_PRIMS: [&str; 3] = ["P", "Q", "R"];
const CRISP_RELS: [&str; 2] = ["r", "s"];
const CRISP_INSTS: [&str; 3] = ["a", "b", "c"];

struct CrispWorld {
    concepts: [[bool; 3]; 3],     // [primitive][instance]
    roles: [[[bool; 3]; 3]; 2],   // [relation][from][to]
}

impl CrispWorld {
    fn random(rng: &mut ChaCha8Rng) -> CrispWorld {
        let mut concepts = [[false; 3]; 3];
        let mut roles = [[[false; 3]; 3]; 2];
        for row in concepts.iter_mut() {
            for cell in row.iter_mut() {
                *cell = rng.gen_bool(0.5);
            }
        }
        for rel in roles.iter_mut() {
            for row in rel.iter_mut() {
                for cell in row.iter_mut() {
                    *cell = rng.gen_bool(0.5);
                }
            }
        }
        CrispWorld { concepts, roles }
    }

    /// Pin every membership and every role pair to exactly true or false.
    fn view(&self) -> FactView {
        let point = |b: bool| {
            if b {
                Certainty::CERTAIN
            } else {
                Certainty::new(0.0, 0.0).unwrap()
            }
        };
        let mut facts: Vec<(Literal, Certainty)> = Vec::new();
        for (p, name) in CRISP_PRIMS.iter().enumerate() {
            for (x, inst) in CRISP_INSTS.iter().enumerate() {
                facts.push((
                    Literal::Concept(Sym::new(name), Sym::new(inst)),
                    point(self.concepts[p][x]),
                ));
            }
        }
        for (r, name) in CRISP_RELS.iter().enumerate() {
            for (x, from) in CRISP_INSTS.iter().enumerate() {
                for (y, to) in CRISP_INSTS.iter().enumerate() {
                    facts.push((
                        Literal::Role(Sym::new(name), Sym::new(from), Sym::new(to)),
                        point(self.roles[r][x][y]),
                    ));
                }
            }
        }
        facts.into_iter().collect()
    }

    fn edge(&self, role: &TermExpr, x: usize, y: usize) -> bool {
        match role {
            TermExpr::Ref(n) => {
                let r = CRISP_RELS.iter().position(|c| *c == n.as_str()).unwrap();
                self.roles[r][x][y]
            }
            TermExpr::RoleAnd(es) => es.iter().all(|e| self.edge(e, x, y)),
            other => panic!("not a role expression: {other}"),
        }
    }

    fn count(&self, role: &TermExpr, x: usize) -> u32 {
        (0..3).filter(|&y| self.edge(role, x, y)).count() as u32
    }

    fn holds(&self, expr: &TermExpr, x: usize) -> bool {
        match expr {
            TermExpr::Ref(n) => {
                let p = CRISP_PRIMS.iter().position(|c| *c == n.as_str()).unwrap();
                self.concepts[p][x]
            }
            TermExpr::ConceptAnd(es) => es.iter().all(|e| self.holds(e, x)),
            TermExpr::All(r, c) => (0..3).all(|y| !self.edge(r, x, y) || self.holds(c, y)),
            TermExpr::AtLeast(n, r) => self.count(r, x) >= *n,
            TermExpr::AtMost(n, r) => self.count(r, x) <= *n,
            other => panic!("not a generated concept form: {other}"),
        }
    }
}

fn random_role_expr(rng: &mut ChaCha8Rng) -> TermExpr {
    match rng.gen_range(0..3) {
        0 => TermExpr::Ref(Sym::new("r")),
        1 => TermExpr::Ref(Sym::new("s")),
        _ => TermExpr::RoleAnd(vec![TermExpr::Ref(Sym::new("r")), TermExpr::Ref(Sym::new("s"))]),
    }
}

fn random_concept_expr(rng: &mut ChaCha8Rng, depth: u32) -> TermExpr {
    let roll = if depth == 0 { 0 } else { rng.gen_range(0..8) };
    match roll {
        0..=2 => TermExpr::Ref(Sym::new(CRISP_PRIMS[rng.gen_range(0..3)])),
        3 => TermExpr::ConceptAnd(vec![
            random_concept_expr(rng, depth - 1),
            random_concept_expr(rng, depth - 1),
        ]),
        4 | 5 => TermExpr::All(
            Box::new(random_role_expr(rng)),
            Box::new(random_concept_expr(rng, depth - 1)),
        ),
        6 => TermExpr::AtLeast(rng.gen_range(0..=3), Box::new(random_role_expr(rng))),
        _ => TermExpr::AtMost(rng.gen_range(0..=3), Box::new(random_role_expr(rng))),
    }
}

#[test]
fn crisp_stores_match_a_classical_interpreter() {
    let configs = [
        DegreeConfig::default(),
        DegreeConfig {
            implication: ImplicationKind::Goedel,
            all_semantics: AllSemantics::Implication,
            conjunction: ConjunctionMode::TnormInterval,
            tnorm: TnormFamily::Product,
        },
        DegreeConfig {
            implication: ImplicationKind::Lukasiewicz,
            all_semantics: AllSemantics::Implication,
            conjunction: ConjunctionMode::MinScalar,
            tnorm: TnormFamily::Lukasiewicz,
        },
        DegreeConfig {
            implication: ImplicationKind::Goguen,
            all_semantics: AllSemantics::Implication,
            conjunction: ConjunctionMode::TnormInterval,
            tnorm: TnormFamily::Product,
        },
        DegreeConfig {
            implication: ImplicationKind::KleeneDienes,
            all_semantics: AllSemantics::Possibility,
            conjunction: ConjunctionMode::MinScalar,
            tnorm: TnormFamily::Min,
        },
    ];
    let mut rng = seeded(0xC415);
    for _ in 0..1000 {
        let world = CrispWorld::random(&mut rng);
        let view = world.view();

        let mut tbox = TBox::new();
        for name in CRISP_PRIMS {
            tbox.define_concept(Sym::new(name), TermExpr::PrimitiveMarker).unwrap();
        }
        for name in CRISP_RELS {
            tbox.define_relation(Sym::new(name), None).unwrap();
        }
        let mut exprs = Vec::new();
        for i in 0..3 {
            let expr = random_concept_expr(&mut rng, 3);
            let name = format!("D{i}");
            tbox.define_concept(Sym::new(&name), expr.clone()).unwrap();
            exprs.push((Sym::new(&name), expr));
        }

        for (name, expr) in &exprs {
            let nf = &tbox.concept(name).unwrap().nf;
            for (x, inst) in CRISP_INSTS.iter().enumerate() {
                let expected = world.holds(expr, x);
                for cfg in &configs {
                    let got = satisfaction(&Sym::new(inst), nf, &tbox, &view, cfg);
                    if nf.bottom {
                        // an unsatisfiable definition is unscorable, and the
                        // classical reading agrees it holds nowhere
                        assert!(got.is_err());
                        assert!(!expected);
                        continue;
                    }
                    let got = got.unwrap();
                    let want = if expected { 1.0 } else { 0.0 };
                    assert_eq!(got.lower(), want, "{name} on {inst}: lower bound drifted");
                    assert_eq!(got.upper(), want, "{name} on {inst}: upper bound drifted");
                }
            }
        }
    }
    println!("PASS: 1000 crisp stores score exactly 0/1, matching the classical interpreter");
}

// ---------------------------------------------------------------------------
// 4. Worked degree values: the two-graduate family scores 0.7 under both
//    universal-quantifier semantics, and the ramp/connective formulas hit
//    their published points.

#[test]
fn graded_scores_hit_the_worked_values() {
    let tbox = tbox_of(
        "(defconcept Male (:primitive))
         (defconcept College-Graduate (:primitive))
         (defrelation Child :primitive)
         (defconcept Successful-Father
           (:and Male (:at-least 1 Child) (:all Child College-Graduate)))",
    );
    let view: FactView = [
        (Literal::Concept(Sym::new("Male"), Sym::new("John")), Certainty::CERTAIN),
        (Literal::Role(Sym::new("Child"), Sym::new("John"), Sym::new("Mary")), Certainty::CERTAIN),
        (Literal::Role(Sym::new("Child"), Sym::new("John"), Sym::new("Philip")), Certainty::CERTAIN),
        (
            Literal::Concept(Sym::new("College-Graduate"), Sym::new("Mary")),
            Certainty::point(0.9).unwrap(),
        ),
        (
            Literal::Concept(Sym::new("College-Graduate"), Sym::new("Philip")),
            Certainty::point(0.7).unwrap(),
        ),
    ]
    .into_iter()
    .collect();

    let father = Sym::new("Successful-Father");
    let nf = &tbox.concept(&father).unwrap().nf;
    for all_semantics in [AllSemantics::Implication, AllSemantics::Possibility] {
        let cfg = DegreeConfig { all_semantics, ..DegreeConfig::default() };
        let got = satisfaction(&Sym::new("John"), nf, &tbox, &view, &cfg).unwrap();
        assert!((got.lower() - 0.7).abs() <= TOL, "{all_semantics:?}: {}", got.lower());
        assert!((got.upper() - 0.7).abs() <= TOL);
    }

    assert!((at_least_degree(2, 1.6) - 0.6).abs() <= TOL);
    assert!((at_most_degree(1, 1.5) - 0.5).abs() <= TOL);
    let (lower, upper) = interval_conjunction([(0.8, 0.8), (0.7, 0.7)]);
    assert!((lower - 0.5).abs() <= TOL);
    assert!((upper - 0.7).abs() <= TOL);
    println!("PASS: family scores 0.7 both ways; ramps give 0.6 and 0.5; conjunction gives [0.5, 0.7]");
}

// ---------------------------------------------------------------------------
// 5. Conjunction operator axioms on a 101x101 grid for all three families,
//    plus the pointwise ordering between them.

#[test]
fn tnorm_families_satisfy_the_axioms() {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let families = [TnormFamily::Min, TnormFamily::Product, TnormFamily::Lukasiewicz];
    for &family in &families {
        for (i, &a) in grid.iter().enumerate() {
            for &b in &grid {
                let t = tnorm(family, a, b);
                assert!((t - tnorm(family, b, a)).abs() <= TOL);
                assert!(t <= a.min(b) + TOL);
                assert!((tnorm(family, a, 1.0) - a).abs() <= TOL);
                assert!(tnorm(family, a, 0.0).abs() <= TOL);
                if i > 0 {
                    assert!(tnorm(family, grid[i - 1], b) <= t + TOL);
                }
                let s = tconorm(family, a, b);
                assert!((s - (1.0 - tnorm(family, 1.0 - a, 1.0 - b))).abs() <= TOL);
            }
        }
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    let left = tnorm(family, tnorm(family, a, b), c);
                    let right = tnorm(family, a, tnorm(family, b, c));
                    assert!((left - right).abs() <= TOL);
                }
            }
        }
    }
    for &a in &grid {
        for &b in &grid {
            let m = tnorm(TnormFamily::Min, a, b);
            let p = tnorm(TnormFamily::Product, a, b);
            let l = tnorm(TnormFamily::Lukasiewicz, a, b);
            assert!(l <= p + TOL);
            assert!(p <= m + TOL);
        }
    }
    println!("PASS: commutativity, associativity, monotonicity, identity, duality, and ordering hold");
}

// ---------------------------------------------------------------------------
// 6. Subsumption soundness: no claimed pair has a countermodel over any
//    interpretation with domain size up to three, and the published taxonomy
//    is exactly the transitive reduction of the pairwise claims.

/// Extension of a normal form as a bitmask over a domain of `d` elements,
/// under primitive extensions `prim_ext` and relation rows `rows`.
fn model_extension(nf: &NormalForm, d: usize, prim_ext: &[u32; 2], rows: &[u32; 3]) -> u32 {
    let full: u32 = (1 << d) - 1;
    if nf.bottom {
        return 0;
    }
    let mut out = full;
    for p in &nf.primitives {
        out &= match p.as_str() {
            "P0" => prim_ext[0],
            "P1" => prim_ext[1],
            other => panic!("unexpected primitive {other}"),
        };
    }
    for rc in nf.roles.values() {
        if out == 0 {
            break;
        }
        let value_ext = if rc.value.is_top() {
            full
        } else {
            model_extension(&rc.value, d, prim_ext, rows)
        };
        for x in 0..d {
            if out & (1 << x) == 0 {
                continue;
            }
            let fillers = rows[x] & full;
            let n = fillers.count_ones();
            let ok = n >= rc.min
                && rc.max.map_or(true, |m| n <= m)
                && fillers & !value_ext == 0;
            if !ok {
                out &= !(1 << x);
            }
        }
    }
    out
}

fn random_def_expr(rng: &mut ChaCha8Rng, depth: u32, avail: &[Sym]) -> TermExpr {
    let roll = if depth == 0 { 0 } else { rng.gen_range(0..7) };
    match roll {
        0 | 1 => TermExpr::Ref(avail[rng.gen_range(0..avail.len())].clone()),
        2 | 3 => TermExpr::ConceptAnd(vec![
            random_def_expr(rng, depth - 1, avail),
            random_def_expr(rng, depth - 1, avail),
        ]),
        4 => TermExpr::All(
            Box::new(TermExpr::Ref(Sym::new("r"))),
            Box::new(random_def_expr(rng, depth - 1, avail)),
        ),
        5 => TermExpr::AtLeast(rng.gen_range(0..=2), Box::new(TermExpr::Ref(Sym::new("r")))),
        _ => TermExpr::AtMost(rng.gen_range(0..=2), Box::new(TermExpr::Ref(Sym::new("r")))),
    }
}

/// Independent reconstruction of the published taxonomy edges from a raw
/// subsumption matrix: group mutually subsuming items, name each group the
/// way the classifier prints it, and keep only covering pairs.
fn reduction_edges(sub: &[Vec<bool>], names: &[Sym]) -> BTreeSet<(String, String)> {
    let count = sub.len();
    let mut class_of = vec![usize::MAX; count];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in 0..count {
        if class_of[i] != usize::MAX {
            continue;
        }
        let id = classes.len();
        class_of[i] = id;
        let mut members = vec![i];
        for j in i + 1..count {
            if class_of[j] == usize::MAX && sub[i][j] && sub[j][i] {
                class_of[j] = id;
                members.push(j);
            }
        }
        classes.push(members);
    }
    let top_class = class_of[0];
    let name_of = |c: usize| -> String {
        if c == top_class {
            return "*top*".into();
        }
        match classes[c].iter().find(|&&i| i != 0 && i != count - 1) {
            Some(&i) => names[i - 1].to_string(),
            None => "*bottom*".into(),
        }
    };
    let above = |a: usize, b: usize| a != b && sub[classes[a][0]][classes[b][0]];
    let mut out = BTreeSet::new();
    for a in 0..classes.len() {
        for b in 0..classes.len() {
            if above(a, b) && !(0..classes.len()).any(|c| above(a, c) && above(c, b)) {
                out.insert((name_of(a), name_of(b)));
            }
        }
    }
    out
}

#[test]
fn subsumption_claims_survive_exhaustive_model_search() {
    let mut rng = seeded(0x50BD);
    for _ in 0..500 {
        let mut tbox = TBox::new();
        tbox.define_concept(Sym::new("P0"), TermExpr::PrimitiveMarker).unwrap();
        tbox.define_concept(Sym::new("P1"), TermExpr::PrimitiveMarker).unwrap();
        tbox.define_relation(Sym::new("r"), None).unwrap();
        let mut avail: Vec<Sym> = vec![Sym::new("P0"), Sym::new("P1")];
        for i in 0..rng.gen_range(2..=4) {
            let expr = random_def_expr(&mut rng, 3, &avail);
            let name = Sym::new(&format!("D{i}"));
            tbox.define_concept(name.clone(), expr).unwrap();
            avail.push(name);
        }

        let names: Vec<Sym> = tbox.concept_names().cloned().collect();
        let top = NormalForm::top();
        let bottom = NormalForm::incoherent();
        let mut nfs: Vec<NormalForm> = vec![top];
        nfs.extend(names.iter().map(|n| tbox.concept(n).unwrap().nf.clone()));
        nfs.push(bottom);
        let count = nfs.len();

        let mut sub = vec![vec![false; count]; count];
        for i in 0..count {
            for j in 0..count {
                sub[i][j] = subsumes(&nfs[i], &nfs[j]);
            }
        }

        // nontrivial claims only: the synthetic top contains everything and
        // the synthetic bottom is contained in everything by construction
        let claims: Vec<(usize, usize)> = (0..count)
            .flat_map(|i| (0..count).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j && i != 0 && j != count - 1 && sub[i][j])
            .collect();
        let involved: BTreeSet<usize> =
            claims.iter().flat_map(|&(i, j)| [i, j]).collect();

        for d in 1..=3usize {
            let full: u32 = (1 << d) - 1;
            for p0 in 0..=full {
                for p1 in 0..=full {
                    let prim_ext = [p0, p1];
                    for packed in 0..(1u32 << (d * d)) {
                        let mut rows = [0u32; 3];
                        for (x, row) in rows.iter_mut().enumerate().take(d) {
                            *row = (packed >> (x * d)) & full;
                        }
                        let mut exts = [0u32; 8];
                        for &i in &involved {
                            exts[i] = model_extension(&nfs[i], d, &prim_ext, &rows);
                        }
                        for &(i, j) in &claims {
                            assert_eq!(
                                exts[j] & !exts[i] & full,
                                0,
                                "countermodel: d={d} p0={p0:b} p1={p1:b} rows={packed:b} pair {i}->{j}"
                            );
                        }
                    }
                }
            }
        }

        assert_eq!(classify(&tbox).edges(), reduction_edges(&sub, &names));
    }
    println!("PASS: 500 random terminologies survive exhaustive model search; taxonomies reduce exactly");
}

// ---------------------------------------------------------------------------
// 7. Interval-probability rules: the endpoint formula agrees with a grid
//    brute force over the three input intervals.

fn sorted_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a: f64 = rng.gen();
    let b: f64 = rng.gen();
    (a.min(b), a.max(b))
}

fn steps(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..=100).map(move |i| if i == 100 { hi } else { lo + (hi - lo) * i as f64 / 100.0 })
}

#[test]
fn probabilistic_rules_match_grid_search() {
    let src = Literal::Concept(Sym::new("Src"), Sym::new("o"));
    let dst = Literal::Concept(Sym::new("Dst"), Sym::new("o"));
    let rule_with = |given: Certainty, given_not: Certainty| RuleSpec {
        name: Sym::new("carry"),
        antecedent: vec![Pattern::Concept(Sym::new("Src"), Arg::Var(Sym::new("?x")))],
        consequent: Pattern::Concept(Sym::new("Dst"), Arg::Var(Sym::new("?x"))),
        mode: RuleMode::Probabilistic { given, given_not },
    };

    // the worked triple
    let mut engine = Engine::new(TnormFamily::Min, 10);
    engine
        .add_rule(rule_with(
            Certainty::new(0.9, 1.0).unwrap(),
            Certainty::new(0.1, 0.2).unwrap(),
        ))
        .unwrap();
    engine.set_input(src.clone(), Certainty::new(0.6, 0.8).unwrap());
    engine.propagate();
    let got = engine.value(&dst).unwrap();
    assert!((got.lower() - 0.58).abs() <= GRID_TOL);
    assert!((got.upper() - 0.84).abs() <= GRID_TOL);

    let mut rng = seeded(0x9815);
    for _ in 0..200 {
        let (al, au) = sorted_pair(&mut rng);
        let (gl, gu) = sorted_pair(&mut rng);
        let (hl, hu) = sorted_pair(&mut rng);
        let mut engine = Engine::new(TnormFamily::Min, 10);
        engine
            .add_rule(rule_with(
                Certainty::new(gl, gu).unwrap(),
                Certainty::new(hl, hu).unwrap(),
            ))
            .unwrap();
        engine.set_input(src.clone(), Certainty::new(al, au).unwrap());
        engine.propagate();
        let got = engine.value(&dst).unwrap_or(Certainty::UNKNOWN);

        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in steps(al, au) {
            for g in steps(gl, gu) {
                let support = g * p;
                for h in steps(hl, hu) {
                    let v = support + h * (1.0 - p);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        assert!((got.lower() - lo).abs() <= GRID_TOL, "lower {} vs grid {lo}", got.lower());
        assert!((got.upper() - hi).abs() <= GRID_TOL, "upper {} vs grid {hi}", got.upper());
    }
    println!("PASS: worked triple gives [0.58, 0.84]; 200 random triples match the grid brute force");
}

// ---------------------------------------------------------------------------
// 8. Graph condensation against brute-force reachability, revision that
//    leaves no trace, and the default fire/block/retract scenarios.

const REVISION_DEFS: &str = "
(defconcept Metal (:primitive))
(defconcept Shiny (:primitive))
(defrelation Touches :primitive)
(defconcept Conductor (:and Metal (:at-least 1 Touches)))
(defrule gleam :if (Metal ?x) :then (Shiny ?x) :sufficiency 0.7)
";

fn random_revision_literal(rng: &mut ChaCha8Rng) -> Literal {
    let insts = ["m1", "m2", "m3", "m4"];
    if rng.gen_bool(0.5) {
        let concept = ["Metal", "Shiny", "Conductor"][rng.gen_range(0..3)];
        Literal::Concept(Sym::new(concept), Sym::new(insts[rng.gen_range(0..4)]))
    } else {
        Literal::Role(
            Sym::new("Touches"),
            Sym::new(insts[rng.gen_range(0..4)]),
            Sym::new(insts[rng.gen_range(0..4)]),
        )
    }
}

fn random_revision_certainty(rng: &mut ChaCha8Rng) -> Option<Certainty> {
    match rng.gen_range(0..5) {
        0 | 1 => None,
        2 => Some(Certainty::from_degree([0.3, 0.55, 0.8][rng.gen_range(0..3)]).unwrap()),
        3 => Some(Certainty::new(0.2, 0.9).unwrap()),
        _ => Some(Certainty::new(0.0, 0.5).unwrap()),
    }
}

#[test]
fn condensation_revision_and_defaults_are_exact() {
    // (a) condensation vs brute-force mutual reachability
    let mut rng = seeded(0x5CC8);
    for _ in 0..200 {
        let n = rng.gen_range(1..=8);
        let mut adj = vec![Vec::new(); n];
        let mut reach = vec![vec![false; n]; n];
        for u in 0..n {
            for v in 0..n {
                let keep = if u == v { rng.gen_bool(0.1) } else { rng.gen_bool(0.25) };
                if keep {
                    adj[u].push(v);
                    reach[u][v] = true;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        let cond = condense(n, &adj);
        for i in 0..n {
            for j in 0..n {
                let together = cond.component_of[i] == cond.component_of[j];
                let mutual = i == j || (reach[i][j] && reach[j][i]);
                assert_eq!(together, mutual, "partition mismatch at ({i}, {j})");
            }
        }
        for (c, comp) in cond.components.iter().enumerate() {
            for &v in comp {
                assert_eq!(cond.component_of[v], c);
            }
        }
        let mut expected: BTreeSet<(usize, usize)> = BTreeSet::new();
        for u in 0..n {
            for &v in &adj[u] {
                let (a, b) = (cond.component_of[u], cond.component_of[v]);
                if a != b {
                    expected.insert((a, b));
                }
            }
        }
        let mut got: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (a, outs) in cond.edges.iter().enumerate() {
            assert!(outs.windows(2).all(|w| w[0] < w[1]), "edge list not sorted/deduped");
            for &b in outs {
                assert!(a < b, "condensed edge against dependency order");
                got.insert((a, b));
            }
        }
        assert_eq!(got, expected);
    }

    // (b) forget followed by an identical re-tell leaves no trace
    for round in 0..100u64 {
        let mut session_rng = seeded(0xBE11 + round);
        let mut session = Session::new(DegreeConfig::default(), 10);
        run(&mut session, REVISION_DEFS);
        let mut told: BTreeMap<Literal, Option<Certainty>> = BTreeMap::new();
        for _ in 0..8 {
            let literal = random_revision_literal(&mut session_rng);
            let certainty = random_revision_certainty(&mut session_rng);
            session.execute(Statement::Tell(literal.clone(), certainty)).unwrap();
            told.insert(literal, certainty);
        }
        let keys: Vec<Literal> = told.keys().cloned().collect();
        let target = keys[session_rng.gen_range(0..keys.len())].clone();
        let certainty = told[&target];
        let before = session.dump_machine();
        session.execute(Statement::Forget(target.clone())).unwrap();
        session.execute(Statement::Tell(target, certainty)).unwrap();
        assert_eq!(session.dump_machine(), before, "revision left a trace in round {round}");
    }

    // (c) a default fires while its guard is unknown, is blocked when the
    // guard is already established, and retracts when the guard arrives
    let penguin = Literal::Concept(Sym::new("Penguin"), Sym::new("tweety"));
    let flies = Literal::Concept(Sym::new("Flies"), Sym::new("tweety"));
    let assume = || DefaultSpec {
        name: Sym::new("assume-flight"),
        unless: penguin.clone(),
        threshold: 0.5,
        then: flies.clone(),
        degree: 0.8,
    };
    let fired = Certainty::new(0.8, 1.0).unwrap();

    let mut engine = Engine::new(TnormFamily::Min, 10);
    engine.add_default(assume()).unwrap();
    engine.propagate();
    assert_eq!(engine.value(&flies), Some(fired));
    assert!(engine.diagnostics().is_empty());

    let mut engine = Engine::new(TnormFamily::Min, 10);
    engine.add_default(assume()).unwrap();
    engine.set_input(penguin.clone(), Certainty::CERTAIN);
    engine.propagate();
    assert_eq!(engine.value(&flies), None, "default fired against established guard");

    let mut engine = Engine::new(TnormFamily::Min, 10);
    engine.add_default(assume()).unwrap();
    engine.propagate();
    assert_eq!(engine.value(&flies), Some(fired));
    engine.set_input(penguin.clone(), Certainty::CERTAIN);
    let propagation = engine.propagate();
    assert_eq!(engine.value(&flies), None, "default survived the arriving guard");
    let delta = propagation
        .deltas
        .iter()
        .find(|d| d.literal == flies)
        .expect("retraction is reported");
    assert_eq!(delta.old, fired);
    assert_eq!(delta.new, Certainty::UNKNOWN);

    println!("PASS: condensation matches brute force; re-tells leave no trace; defaults fire, block, retract");
}

// ---------------------------------------------------------------------------
// 9. Replay determinism: the order of independent tells never shows in the
//    machine dump.

const REPLAY_DEFS: &str = "
(defconcept Person (:primitive))
(defconcept Rich (:primitive))
(defconcept Happy (:primitive))
(defrelation Knows :primitive)
(defconcept Socialite (:and Person (:at-least 1 Knows)))
(defrule wealth-smiles :if (:and (Rich ?x) (Person ?x)) :then (Happy ?x) :sufficiency 0.8)
";

const REPLAY_TELLS: &str = "
(tell (Person p1))
(tell (Person p2))
(tell (Person p3))
(tell (Person p4))
(tell ((Person p5) 0.9))
(tell ((Person p6) 0.4))
(tell (Rich p1))
(tell ((Rich p2) 0.7))
(tell ((Rich p3) 0.55))
(tell (Rich p4))
(tell ((Happy p6) 0.3))
(tell (Happy p5))
(tell (Knows p1 p2))
(tell (Knows p2 p1))
(tell ((Knows p3 p4) 0.8))
(tell ((Knows p4 p3) 0.6))
(tell (Knows p5 p6))
(tell ((Knows p6 p5) 0.45))
(tell ((Rich p5) 0.2))
(tell ((Rich p6) 0.35))
";

#[test]
fn independent_tells_replay_identically() {
    let tells = parse_program(REPLAY_TELLS).unwrap();
    assert_eq!(tells.len(), 20);
    let build = |order: &[Statement]| -> String {
        let mut session = Session::new(DegreeConfig::default(), 10);
        run(&mut session, REPLAY_DEFS);
        for statement in order {
            session.execute(statement.clone()).unwrap();
        }
        session.dump_machine()
    };
    let baseline = build(&tells);
    assert!(baseline.lines().count() >= 20, "dump unexpectedly sparse");

    let mut rng = seeded(0x4EF1);
    for _ in 0..100 {
        let mut shuffled = tells.clone();
        shuffled.shuffle(&mut rng);
        assert_eq!(build(&shuffled), baseline);
    }
    println!("PASS: 100 shuffles of 20 independent tells give byte-identical dumps");
}
