//! Rule network over weighted ground facts.
//!
//! Monotonic rules come in two flavors: possibilistic, where a sufficiency
//! degree caps how strongly an antecedent vouches for its conclusion, and
//! probabilistic, where interval weights on the conclusion given the
//! antecedent (and given its complement) bound the conclusion from both
//! sides. Ground default rules fire only while a blocking literal stays
//! below a threshold, which makes them retractable. Propagation recomputes
//! everything from the current inputs, so the computed values are a pure
//! function of the rule set plus the inputs — no residue from earlier
//! rounds can survive a retraction.

use std::collections::{BTreeMap, BTreeSet};

use crate::certainty::Certainty;
use crate::error::EngineError;
use crate::fuzzy::{tconorm, tnorm, TnormFamily};
use crate::scc::condense;
use crate::term::{Arg, DefaultSpec, Literal, Pattern, RuleMode, RuleSpec, Sym};

const FIX_ITERS: usize = 200;
const FIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Rule {
    spec: RuleSpec,
    /// A refuting rule bounds its conclusion from above instead of below.
    refuting: bool,
}

/// One belief update: a node whose certainty changed during propagation,
/// labeled with the rule (or `input`) that settles its new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta {
    pub literal: Literal,
    pub old: Certainty,
    pub new: Certainty,
    pub via: Sym,
}

impl std::fmt::Display for Delta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "node {} old={} new={} via={}", self.literal, self.old, self.new, self.via)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Support pushed the lower bound past the refuted upper bound; the
    /// reported value keeps the lower bound and flags the clash.
    Conflict { literal: Literal, lower: f64, upper: f64 },
    /// No self-consistent way to fire the interlocked defaults; none fired.
    NoConsistentExtension { defaults: Vec<Sym> },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::Conflict { literal, lower, upper } => {
                write!(f, "conflict on ({literal}): support {lower} exceeds refutation {upper}")
            }
            Diagnostic::NoConsistentExtension { defaults } => {
                write!(f, "no consistent way to fire defaults:")?;
                for d in defaults {
                    write!(f, " {d}")?;
                }
                Ok(())
            }
        }
    }
}

pub struct Propagation {
    pub deltas: Vec<Delta>,
    pub diagnostics: Vec<Diagnostic>,
}

/// The rule engine. Monotonic rules may chain but never cycle (checked per
/// predicate at definition time); defaults may interlock, and each cyclic
/// cluster of defaults is resolved by choosing the best self-consistent
/// firing pattern, so the cluster size is bounded at definition time too.
pub struct Engine {
    tnorm: TnormFamily,
    scc_bound: usize,
    rules: BTreeMap<Sym, Rule>,
    defaults: BTreeMap<Sym, DefaultSpec>,
    inputs: BTreeMap<Literal, Certainty>,
    values: BTreeMap<Literal, Certainty>,
    diagnostics: Vec<Diagnostic>,
}

impl Engine {
    pub fn new(tnorm: TnormFamily, scc_bound: usize) -> Engine {
        Engine {
            tnorm,
            scc_bound,
            rules: BTreeMap::new(),
            defaults: BTreeMap::new(),
            inputs: BTreeMap::new(),
            values: BTreeMap::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn add_rule(&mut self, spec: RuleSpec) -> Result<(), EngineError> {
        self.insert_rule(spec, false)
    }

    /// A refuting rule argues *against* its conclusion: each firing caps the
    /// conclusion's upper bound at one minus the rule's support.
    pub fn add_refuting_rule(
        &mut self,
        name: Sym,
        antecedent: Vec<Pattern>,
        consequent: Pattern,
        sufficiency: Certainty,
    ) -> Result<(), EngineError> {
        let spec = RuleSpec {
            name,
            antecedent,
            consequent,
            mode: RuleMode::Possibilistic { sufficiency },
        };
        self.insert_rule(spec, true)
    }

    fn insert_rule(&mut self, spec: RuleSpec, refuting: bool) -> Result<(), EngineError> {
        if self.rules.contains_key(&spec.name) || self.defaults.contains_key(&spec.name) {
            return Err(EngineError::DuplicateRule(spec.name));
        }
        let bound: BTreeSet<&Sym> = spec.antecedent.iter().flat_map(|p| p.variables()).collect();
        for v in spec.consequent.variables() {
            if !bound.contains(v) {
                return Err(EngineError::UnboundVariable { rule: spec.name.clone(), var: v.clone() });
            }
        }
        let rule = Rule { spec, refuting };
        self.check_structure(Some(&rule), None, &rule.spec.name)?;
        self.rules.insert(rule.spec.name.clone(), rule);
        Ok(())
    }

    pub fn add_default(&mut self, spec: DefaultSpec) -> Result<(), EngineError> {
        if self.rules.contains_key(&spec.name) || self.defaults.contains_key(&spec.name) {
            return Err(EngineError::DuplicateRule(spec.name));
        }
        if !(spec.threshold.is_finite() && spec.threshold > 0.0 && spec.threshold <= 1.0) {
            return Err(EngineError::InvalidThreshold(spec.threshold));
        }
        Certainty::from_degree(spec.degree)?;
        self.check_structure(None, Some(&spec), &spec.name)?;
        self.defaults.insert(spec.name.clone(), spec);
        Ok(())
    }

    /// Drop a rule or default by name. The next propagation forgets
    /// everything it ever concluded.
    pub fn remove_rule(&mut self, name: &Sym) -> bool {
        self.rules.remove(name).is_some() || self.defaults.remove(name).is_some()
    }

    pub fn set_input(&mut self, literal: Literal, certainty: Certainty) {
        self.inputs.insert(literal, certainty);
    }

    pub fn clear_inputs(&mut self) {
        self.inputs.clear();
    }

    pub fn value(&self, literal: &Literal) -> Option<Certainty> {
        self.values.get(literal).copied()
    }

    pub fn values(&self) -> &BTreeMap<Literal, Certainty> {
        &self.values
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// Definition-time structure checks, run as if the candidate were
    /// already present: monotonic rules must stay acyclic per predicate,
    /// and no cyclic cluster may interlock more defaults than the bound.
    fn check_structure(
        &self,
        extra_rule: Option<&Rule>,
        extra_default: Option<&DefaultSpec>,
        added: &Sym,
    ) -> Result<(), EngineError> {
        let rules = self.rules.values().chain(extra_rule);
        let defaults = || self.defaults.values().chain(extra_default);

        let mut preds: BTreeSet<Sym> = BTreeSet::new();
        let mut mono_edges: Vec<(Sym, Sym)> = Vec::new();
        for r in rules {
            let head = r.spec.consequent.predicate().clone();
            preds.insert(head.clone());
            for a in &r.spec.antecedent {
                preds.insert(a.predicate().clone());
                mono_edges.push((a.predicate().clone(), head.clone()));
            }
        }
        let mut default_edges: Vec<(Sym, Sym)> = Vec::new();
        for d in defaults() {
            preds.insert(d.unless.predicate().clone());
            preds.insert(d.then.predicate().clone());
            default_edges.push((d.unless.predicate().clone(), d.then.predicate().clone()));
        }

        let names: Vec<&Sym> = preds.iter().collect();
        let index: BTreeMap<&Sym, usize> = names.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let adj_of = |edges: &[(Sym, Sym)]| {
            let mut adj = vec![Vec::new(); names.len()];
            for (a, b) in edges {
                adj[index[a]].push(index[b]);
            }
            adj
        };

        if extra_rule.is_some() {
            let adj = adj_of(&mono_edges);
            let cyclic = mono_edges.iter().any(|(a, b)| a == b)
                || condense(names.len(), &adj).components.iter().any(|c| c.len() > 1);
            if cyclic {
                return Err(EngineError::CyclicMonotonicRules(added.clone()));
            }
        }

        let mut all_edges = mono_edges;
        all_edges.extend(default_edges);
        let cond = condense(names.len(), &adj_of(&all_edges));
        for comp in &cond.components {
            let comp: BTreeSet<usize> = comp.iter().copied().collect();
            let size = defaults()
                .filter(|d| {
                    comp.contains(&index[d.unless.predicate()]) && comp.contains(&index[d.then.predicate()])
                })
                .count();
            if size > self.scc_bound {
                return Err(EngineError::SccTooLarge {
                    rule: added.clone(),
                    size,
                    bound: self.scc_bound,
                });
            }
        }
        Ok(())
    }

    /// Recompute all node values from the inputs and report what changed.
    pub fn propagate(&mut self) -> Propagation {
        let ground = self.instantiate();
        let mut eval = Evaluation::new(self, &ground);
        eval.run();
        let Evaluation { lo, hi, fired, diagnostics, .. } = eval;

        let mut values: BTreeMap<Literal, Certainty> = BTreeMap::new();
        for (n, lit) in ground.nodes.iter().enumerate() {
            let l = lo[n].clamp(0.0, 1.0);
            let u = hi[n].clamp(l, 1.0);
            if (l, u) != (0.0, 1.0) {
                values.insert(lit.clone(), Certainty::new(l, u).unwrap());
            }
        }

        let old_values = std::mem::replace(&mut self.values, values);
        let mut deltas = Vec::new();
        let keys: BTreeSet<&Literal> = old_values.keys().chain(self.values.keys()).collect();
        for key in keys {
            let old = old_values.get(key).copied().unwrap_or(Certainty::UNKNOWN);
            let new = self.values.get(key).copied().unwrap_or(Certainty::UNKNOWN);
            if old != new {
                let via = if self.values.contains_key(key) {
                    self.via_for(&ground, &lo, &hi, &fired, key)
                } else {
                    Sym::new("input")
                };
                deltas.push(Delta { literal: key.clone(), old, new, via });
            }
        }
        self.diagnostics = diagnostics.clone();
        Propagation { deltas, diagnostics }
    }

    /// Ground the rule patterns against everything that could become known:
    /// the inputs, the default literals, and (to a fixpoint) the heads of
    /// already-grounded rules.
    fn instantiate(&self) -> GroundNet {
        let mut base: BTreeSet<Literal> = self.inputs.keys().cloned().collect();
        for d in self.defaults.values() {
            base.insert(d.unless.clone());
            base.insert(d.then.clone());
        }
        let mut firings: BTreeSet<(Sym, Vec<Literal>, Literal)> = BTreeSet::new();
        loop {
            let mut grew = false;
            for rule in self.rules.values() {
                for theta in solutions(&rule.spec.antecedent, &base) {
                    let ants: Vec<Literal> =
                        rule.spec.antecedent.iter().map(|p| ground(p, &theta)).collect();
                    let cons = ground(&rule.spec.consequent, &theta);
                    if firings.insert((rule.spec.name.clone(), ants, cons.clone())) {
                        grew = true;
                    }
                    if base.insert(cons) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }

        let nodes: Vec<Literal> = base.into_iter().collect();
        let index: BTreeMap<&Literal, usize> = nodes.iter().enumerate().map(|(i, l)| (l, i)).collect();
        let firings: Vec<GroundFiring> = firings
            .into_iter()
            .map(|(name, ants, cons)| GroundFiring {
                rule: name,
                ants: ants.iter().map(|l| index[l]).collect(),
                cons: index[&cons],
            })
            .collect();
        let mut by_cons = vec![Vec::new(); nodes.len()];
        for (i, f) in firings.iter().enumerate() {
            by_cons[f.cons].push(i);
        }
        let defaults: Vec<GroundDefault> = self
            .defaults
            .values()
            .map(|d| GroundDefault { spec: d.clone(), unless: index[&d.unless], then: index[&d.then] })
            .collect();
        let mut by_then = vec![Vec::new(); nodes.len()];
        for (i, d) in defaults.iter().enumerate() {
            by_then[d.then].push(i);
        }

        let mut adj = vec![Vec::new(); nodes.len()];
        for f in &firings {
            for &a in &f.ants {
                adj[a].push(f.cons);
            }
        }
        for d in &defaults {
            adj[d.unless].push(d.then);
        }

        GroundNet { nodes, firings, by_cons, defaults, by_then, adj }
    }

    /// The contribution that settles a node's final value, for trace lines:
    /// the strongest supporter, or the sharpest refuter when nothing
    /// supports, or `input` as the fallback label.
    fn via_for(
        &self,
        ground: &GroundNet,
        lo: &[f64],
        hi: &[f64],
        fired: &BTreeSet<Sym>,
        literal: &Literal,
    ) -> Sym {
        let n = match ground.nodes.iter().position(|l| l == literal) {
            Some(n) => n,
            None => return Sym::new("input"),
        };
        let mut cands: Vec<(Sym, f64, f64)> = Vec::new();
        if let Some(c) = self.inputs.get(literal) {
            cands.push((Sym::new("input"), c.lower(), c.upper()));
        }
        for &fi in &ground.by_cons[n] {
            let f = &ground.firings[fi];
            let rule = &self.rules[&f.rule];
            let a = f.ants.iter().fold((1.0, 1.0), |acc, &i| {
                (tnorm(self.tnorm, acc.0, lo[i]), tnorm(self.tnorm, acc.1, hi[i]))
            });
            let (l, u) = contribution(self.tnorm, rule, a);
            cands.push((f.rule.clone(), l, u));
        }
        for &di in &ground.by_then[n] {
            let d = &ground.defaults[di];
            if fired.contains(&d.spec.name) {
                cands.push((d.spec.name.clone(), d.spec.degree, 1.0));
            }
        }
        // ties go to the name that sorts first
        cands.sort_by(|a, b| a.0.cmp(&b.0));
        let mut support: Option<(&Sym, f64)> = None;
        let mut refuter: Option<(&Sym, f64)> = None;
        for (name, l, u) in &cands {
            if *l > 0.0 && support.map_or(true, |(_, best)| *l > best) {
                support = Some((name, *l));
            }
            if *u < 1.0 && refuter.map_or(true, |(_, best)| *u < best) {
                refuter = Some((name, *u));
            }
        }
        match (support, refuter) {
            (Some((s, _)), _) | (None, Some((s, _))) => s.clone(),
            (None, None) => Sym::new("input"),
        }
    }
}

struct GroundFiring {
    rule: Sym,
    ants: Vec<usize>,
    cons: usize,
}

struct GroundDefault {
    spec: DefaultSpec,
    unless: usize,
    then: usize,
}

struct GroundNet {
    nodes: Vec<Literal>,
    firings: Vec<GroundFiring>,
    by_cons: Vec<Vec<usize>>,
    defaults: Vec<GroundDefault>,
    by_then: Vec<Vec<usize>>,
    adj: Vec<Vec<usize>>,
}

/// Lower and upper candidate bounds a single firing contributes to its
/// conclusion, given the antecedent interval `a`.
fn contribution(family: TnormFamily, rule: &Rule, a: (f64, f64)) -> (f64, f64) {
    match &rule.spec.mode {
        RuleMode::Possibilistic { sufficiency } => {
            let strength = tnorm(family, a.0, sufficiency.lower());
            if rule.refuting {
                (0.0, 1.0 - strength)
            } else {
                (strength, 1.0)
            }
        }
        RuleMode::Probabilistic { given, given_not } => {
            let lo = |p: f64| given.lower() * p + given_not.lower() * (1.0 - p);
            let hi = |p: f64| given.upper() * p + given_not.upper() * (1.0 - p);
            (lo(a.0).min(lo(a.1)), hi(a.0).max(hi(a.1)))
        }
    }
}

fn unify(arg: &Arg, value: &Sym, theta: &mut BTreeMap<Sym, Sym>) -> bool {
    match arg {
        Arg::Const(c) => c == value,
        Arg::Var(v) => match theta.get(v) {
            Some(bound) => bound == value,
            None => {
                theta.insert(v.clone(), value.clone());
                true
            }
        },
    }
}

fn match_pattern(pat: &Pattern, lit: &Literal, theta: &BTreeMap<Sym, Sym>) -> Option<BTreeMap<Sym, Sym>> {
    let mut out = theta.clone();
    let ok = match (pat, lit) {
        (Pattern::Concept(p, a), Literal::Concept(q, x)) => p == q && unify(a, x, &mut out),
        (Pattern::Role(p, a, b), Literal::Role(q, x, y)) => {
            p == q && unify(a, x, &mut out) && unify(b, y, &mut out)
        }
        _ => false,
    };
    ok.then_some(out)
}

/// All substitutions grounding every pattern against the literal base.
fn solutions(patterns: &[Pattern], base: &BTreeSet<Literal>) -> Vec<BTreeMap<Sym, Sym>> {
    let mut out = vec![BTreeMap::new()];
    for pat in patterns {
        let mut next = Vec::new();
        for theta in &out {
            for lit in base {
                if let Some(extended) = match_pattern(pat, lit, theta) {
                    next.push(extended);
                }
            }
        }
        next.dedup();
        out = next;
    }
    out
}

fn ground(pat: &Pattern, theta: &BTreeMap<Sym, Sym>) -> Literal {
    let resolve = |a: &Arg| match a {
        Arg::Const(c) => c.clone(),
        Arg::Var(v) => theta[v].clone(),
    };
    match pat {
        Pattern::Concept(p, a) => Literal::Concept(p.clone(), resolve(a)),
        Pattern::Role(p, a, b) => Literal::Role(p.clone(), resolve(a), resolve(b)),
    }
}

/// One propagation pass: walks the condensed ground graph in dependency
/// order, resolving each cyclic cluster of defaults by picking its best
/// self-consistent firing pattern.
struct Evaluation<'e> {
    engine: &'e Engine,
    ground: &'e GroundNet,
    lo: Vec<f64>,
    hi: Vec<f64>,
    fired: BTreeSet<Sym>,
    diagnostics: Vec<Diagnostic>,
}

impl<'e> Evaluation<'e> {
    fn new(engine: &'e Engine, ground: &'e GroundNet) -> Evaluation<'e> {
        Evaluation {
            engine,
            ground,
            lo: vec![0.0; ground.nodes.len()],
            hi: vec![1.0; ground.nodes.len()],
            fired: BTreeSet::new(),
            diagnostics: Vec::new(),
        }
    }

    fn run(&mut self) {
        let cond = condense(self.ground.nodes.len(), &self.ground.adj);
        for comp in &cond.components {
            self.resolve_component(comp);
        }
    }

    fn resolve_component(&mut self, comp: &[usize]) {
        let comp_set: BTreeSet<usize> = comp.iter().copied().collect();

        // defaults already decided by earlier components
        let mut settled: BTreeSet<usize> = BTreeSet::new();
        // defaults whose blocking literal lives inside this component: their
        // firing pattern must be chosen self-consistently
        let mut open: Vec<usize> = Vec::new();
        for (di, d) in self.ground.defaults.iter().enumerate() {
            if !comp_set.contains(&d.then) {
                continue;
            }
            if comp_set.contains(&d.unless) {
                open.push(di);
            } else if self.lo[d.unless] < d.spec.threshold {
                settled.insert(di);
            }
        }

        let mut best: Option<(f64, Vec<Sym>, BTreeMap<usize, (f64, f64)>, BTreeSet<usize>)> = None;
        for mask in 0u64..(1u64 << open.len()) {
            let chosen: BTreeSet<usize> = open
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &di)| di)
                .collect();
            let mut active = settled.clone();
            active.extend(chosen.iter().copied());
            let local = self.fixpoint(&comp_set, &active);
            let consistent = open.iter().all(|&di| {
                let d = &self.ground.defaults[di];
                let unblocked = local[&d.unless].0 < d.spec.threshold;
                chosen.contains(&di) == unblocked
            });
            if !consistent {
                continue;
            }
            let score: f64 = local.values().map(|(l, _)| l).sum();
            let mut names: Vec<Sym> =
                chosen.iter().map(|&di| self.ground.defaults[di].spec.name.clone()).collect();
            names.sort();
            let replace = match &best {
                None => true,
                Some((s, n, _, _)) => {
                    score > s + FIX_TOL || ((score - s).abs() <= FIX_TOL && names < *n)
                }
            };
            if replace {
                best = Some((score, names, local, active));
            }
        }

        let (local, active) = match best {
            Some((_, _, local, active)) => (local, active),
            None => {
                self.diagnostics.push(Diagnostic::NoConsistentExtension {
                    defaults: open.iter().map(|&di| self.ground.defaults[di].spec.name.clone()).collect(),
                });
                (self.fixpoint(&comp_set, &settled), settled)
            }
        };

        for di in active {
            self.fired.insert(self.ground.defaults[di].spec.name.clone());
        }
        for (n, (l, u)) in local {
            if l > u + FIX_TOL {
                self.diagnostics.push(Diagnostic::Conflict {
                    literal: self.ground.nodes[n].clone(),
                    lower: l,
                    upper: u,
                });
            }
            self.lo[n] = l;
            self.hi[n] = u.max(l);
        }
    }

    /// Kleene iteration over one component: lower bounds only climb and
    /// upper bounds only descend, so the loop settles (we stop on a small
    /// delta because product-family norms can approach their limit
    /// asymptotically).
    fn fixpoint(&self, comp: &BTreeSet<usize>, active: &BTreeSet<usize>) -> BTreeMap<usize, (f64, f64)> {
        let mut cur: BTreeMap<usize, (f64, f64)> = comp.iter().map(|&n| (n, (0.0, 1.0))).collect();
        for _ in 0..FIX_ITERS {
            let mut next = BTreeMap::new();
            let mut delta = 0.0f64;
            for &n in comp {
                let v = self.aggregate(n, &cur, active);
                let (ol, ou) = cur[&n];
                delta = delta.max((v.0 - ol).abs()).max((v.1 - ou).abs());
                next.insert(n, v);
            }
            cur = next;
            if delta < FIX_TOL {
                break;
            }
        }
        cur
    }

    /// Combine everything bearing on one node: confirmations accumulate
    /// through the conorm, refutations and probabilistic caps meet at the
    /// minimum. The pair is returned unclamped so a genuine conflict stays
    /// visible to the caller.
    fn aggregate(
        &self,
        n: usize,
        local: &BTreeMap<usize, (f64, f64)>,
        active: &BTreeSet<usize>,
    ) -> (f64, f64) {
        let value = |i: usize| local.get(&i).copied().unwrap_or((self.lo[i], self.hi[i]));
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        if let Some(c) = self.engine.inputs.get(&self.ground.nodes[n]) {
            lo = tconorm(self.engine.tnorm, lo, c.lower());
            hi = hi.min(c.upper());
        }
        for &fi in &self.ground.by_cons[n] {
            let f = &self.ground.firings[fi];
            let rule = &self.engine.rules[&f.rule];
            let a = f.ants.iter().fold((1.0, 1.0), |acc, &i| {
                let v = value(i);
                (tnorm(self.engine.tnorm, acc.0, v.0), tnorm(self.engine.tnorm, acc.1, v.1))
            });
            let (l, u) = contribution(self.engine.tnorm, rule, a);
            lo = tconorm(self.engine.tnorm, lo, l);
            hi = hi.min(u);
        }
        for &di in &self.ground.by_then[n] {
            if active.contains(&di) {
                lo = tconorm(self.engine.tnorm, lo, self.ground.defaults[di].spec.degree);
            }
        }
        (lo, hi)
    }
}
