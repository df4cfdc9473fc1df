//! Recognition of special pattern rules and construction of ground
//! non-termination witnesses.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use num_rational::Ratio;

use crate::context::{GroundContext1, MultiContext};
use crate::interp::{derive_bounded, DerivationStatus, Strategy};
use crate::pattern::{initial_rules, PatternRule};
use crate::program::Program;
use crate::simple::{to_pure, ExtHead, ExtTerm};
use crate::subst::{match_term, Substitution};
use crate::term::{Symbol, Term, Tree, Var};
use crate::unfold::{patunf_bounded, StopReason, StoredRule, UnfoldBudget, UnfoldStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// Both ground and variable holes.
    Full,
    /// No ground hole (including no hole at all).
    A1Empty,
    /// No variable hole.
    A2Empty,
}

/// One hole of the common outer context: `ci^{ai,bi}(ti)` on the left and
/// `ci^{a'i,b'i}(t'i)` on the right. `ctx` is `None` when both sides are
/// plain there, in which case all four exponents are 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hole {
    pub ctx: Option<GroundContext1>,
    pub a: usize,
    pub b: usize,
    pub t: Term,
    pub a2: usize,
    pub b2: usize,
    pub t2: Term,
}

impl Hole {
    pub fn is_ground(&self) -> bool {
        self.t.is_ground()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecialRuleData {
    pub outer: MultiContext,
    pub holes: Vec<Hole>,
    pub rho: Substitution,
    pub e: usize,
    pub a: usize,
    pub a2: usize,
    pub b: usize,
    pub b2: usize,
    pub d: usize,
    pub d2: usize,
    pub k: usize,
    pub alpha: Ratio<i64>,
    pub variant: Variant,
}

impl SpecialRuleData {
    /// The least natural `n ≥ α`.
    pub fn start_index(&self) -> usize {
        let c = self.alpha.ceil().to_integer();
        c.max(0) as usize
    }
}

type Side = (Option<GroundContext1>, usize, usize, ExtTerm);

fn split(u: &ExtTerm) -> Option<Side> {
    match u {
        Tree::App(ExtHead::Pow(e), args) => {
            to_pure(&args[0])?;
            Some((Some(e.ctx().clone()), e.a(), e.b(), args[0].clone()))
        }
        _ => {
            to_pure(u)?;
            Some((None, 0, 0, u.clone()))
        }
    }
}

/// Pair `lhs` and `rhs` position by position through equal plain symbols;
/// every other position becomes a hole of the returned skeleton.
fn common_outer(l: &ExtTerm, r: &ExtTerm, holes: &mut Vec<(ExtTerm, ExtTerm)>) -> Term {
    if let (Tree::App(ExtHead::Sym(f), ls), Tree::App(ExtHead::Sym(g), rs)) = (l, r) {
        if f == g && ls.len() == rs.len() {
            let args = ls
                .iter()
                .zip(rs)
                .map(|(a, b)| common_outer(a, b, holes))
                .collect();
            return Tree::App(f.clone(), args);
        }
    }
    holes.push((l.clone(), r.clone()));
    Tree::Var(Var::hole(holes.len()))
}

fn uniform<T: Copy + PartialEq>(mut it: impl Iterator<Item = T>) -> Option<T> {
    let first = it.next()?;
    it.all(|x| x == first).then_some(first)
}

/// Decide whether the rule with canonical sides `lhs`, `rhs` is special.
pub fn match_special_ext(lhs: &ExtTerm, rhs: &ExtTerm) -> Option<SpecialRuleData> {
    let mut pairs = Vec::new();
    let skeleton = common_outer(lhs, rhs, &mut pairs);
    let outer = MultiContext::new_ground(skeleton).ok()?;
    let mut holes = Vec::new();
    for (l, r) in &pairs {
        let (lc, a, mut b, mut t) = split(l)?;
        let (rc, a2, mut b2, mut t2) = split(r)?;
        let ctx = match (lc, rc) {
            (Some(c), Some(c2)) => {
                if c != c2 {
                    return None;
                }
                Some(c)
            }
            (Some(c), None) => {
                let (k, inner) = c.peel_max(&t2);
                b2 = k;
                t2 = inner.clone();
                Some(c)
            }
            (None, Some(c)) => {
                let (k, inner) = c.peel_max(&t);
                b = k;
                t = inner.clone();
                Some(c)
            }
            (None, None) => None,
        };
        let t = to_pure(&t)?;
        if !(t.is_var() || t.is_ground()) {
            return None;
        }
        holes.push(Hole {
            ctx,
            a,
            b,
            t,
            a2,
            b2,
            t2: to_pure(&t2)?,
        });
    }

    // ρ with t_i ρ = t'_i; ground t_i must be left unchanged
    let mut bind: BTreeMap<Var, Term> = BTreeMap::new();
    for h in &holes {
        match h.t.as_var() {
            Some(x) => match bind.get(&x) {
                Some(prev) if *prev != h.t2 => return None,
                Some(_) => {}
                None => {
                    bind.insert(x, h.t2.clone());
                }
            },
            None => {
                if h.t != h.t2 {
                    return None;
                }
            }
        }
    }
    // equal variable fillers need equal contexts
    for (i, h) in holes.iter().enumerate() {
        for g in &holes[i + 1..] {
            if h.t.is_var() && h.t == g.t {
                if let (Some(c), Some(c2)) = (&h.ctx, &g.ctx) {
                    if c != c2 {
                        return None;
                    }
                }
            }
        }
    }
    let rho = Substitution::from_pairs(bind);

    let ground: Vec<&Hole> = holes.iter().filter(|h| h.is_ground()).collect();
    let var: Vec<&Hole> = holes.iter().filter(|h| !h.is_ground()).collect();
    let signed = |x: usize| x as i64;
    let mut data = SpecialRuleData {
        outer,
        holes: holes.clone(),
        rho,
        e: 0,
        a: 0,
        a2: 0,
        b: 0,
        b2: 0,
        d: 0,
        d2: 0,
        k: 0,
        alpha: Ratio::from_integer(0),
        variant: Variant::Full,
    };

    if !ground.is_empty() && !var.is_empty() {
        let (e, e2) = uniform(ground.iter().map(|h| (h.a, h.a2)))?;
        if e != e2 || e == 0 {
            return None;
        }
        let (a, a2) = uniform(var.iter().map(|h| (h.a, h.a2)))?;
        if a > a2 {
            return None;
        }
        let (b, b2) = uniform(ground.iter().map(|h| (h.b, h.b2)))?;
        if b > b2 {
            return None;
        }
        let (d, d2) = uniform(var.iter().map(|h| (h.b, h.b2)))?;
        if (b2 - b) % e != 0 {
            return None;
        }
        let k = (b2 - b) / e;
        let slack = signed(d2) - signed(d) - signed(a) * signed(k);
        if a == a2 && slack < 0 {
            return None;
        }
        let alpha = if a == a2 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(-slack, signed(a2) - signed(a))
        };
        data = SpecialRuleData {
            e,
            a,
            a2,
            b,
            b2,
            d,
            d2,
            k,
            alpha,
            variant: Variant::Full,
            ..data
        };
        return Some(data);
    }

    let (a, b, a2, b2) = if holes.is_empty() {
        (0, 0, 0, 0)
    } else {
        uniform(holes.iter().map(|h| (h.a, h.b, h.a2, h.b2)))?
    };
    if ground.is_empty() {
        if a > a2 || (a == a2 && b > b2) {
            return None;
        }
        let alpha = if a == a2 {
            Ratio::from_integer(0)
        } else {
            Ratio::new(signed(b) - signed(b2), signed(a2) - signed(a))
        };
        Some(SpecialRuleData {
            a,
            a2,
            b,
            b2,
            d: b,
            d2: b2,
            alpha,
            variant: Variant::A1Empty,
            ..data
        })
    } else {
        if a != a2 || a == 0 || b2 < b || (b2 - b) % a != 0 {
            return None;
        }
        Some(SpecialRuleData {
            e: a,
            a,
            a2,
            b,
            b2,
            k: (b2 - b) / a,
            variant: Variant::A2Empty,
            ..data
        })
    }
}

pub fn match_special(s: &StoredRule) -> Option<SpecialRuleData> {
    match_special_ext(&s.lhs_ext, &s.rhs_ext)
}

/// Whether `q(n)` is an instance of `p(n+k)`.
pub fn instance_check(r: &PatternRule, data: &SpecialRuleData, n: usize) -> bool {
    match_term(&r.lhs.eval(n + data.k), &r.rhs.eval(n)).is_some()
}

/// The constant used to ground witnesses: `0` when the program has it, else
/// its first constant, else a fresh one.
pub fn grounding_constant(p: &Program) -> Symbol {
    let zero = Symbol::new("0", 0);
    let consts = p.constants_in_order();
    if consts.contains(&zero) {
        return zero;
    }
    if let Some(c) = consts.into_iter().next() {
        return c;
    }
    let mut name = String::from("c0");
    let mut i = 0;
    while p.symbols.contains_key(&name) {
        i += 1;
        name = format!("c{i}");
    }
    Symbol::new(name, 0)
}

#[derive(Clone, Debug)]
pub struct NontermWitness {
    pub rule: PatternRule,
    pub data: SpecialRuleData,
    pub n: usize,
    pub grounding: Substitution,
    pub witness: Term,
}

pub fn witness_from(r: &PatternRule, data: SpecialRuleData, ground: &Symbol) -> NontermWitness {
    let n = data.start_index();
    let open = r.lhs.eval(n);
    let grounding = Substitution::from_pairs(
        open.vars()
            .into_iter()
            .map(|x| (x, Term::app(ground.clone(), vec![]))),
    );
    let witness = grounding.apply(&open);
    NontermWitness {
        rule: r.clone(),
        data,
        n,
        grounding,
        witness,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownReason {
    Timeout,
    IterationCap,
    RuleCap,
    /// Saturation finished without a special rule.
    Fixpoint,
    /// A special rule was found but its witness did not reach the
    /// derivation bound.
    ValidationFailed,
}

impl fmt::Display for UnknownReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnknownReason::Timeout => "timeout",
            UnknownReason::IterationCap => "iteration-cap",
            UnknownReason::RuleCap => "rule-cap",
            UnknownReason::Fixpoint => "fixpoint",
            UnknownReason::ValidationFailed => "validation-failed",
        })
    }
}

#[derive(Clone, Debug)]
pub enum ProofOutcome {
    Proven(Box<NontermWitness>),
    Unknown(UnknownReason),
}

#[derive(Clone, Debug)]
pub struct ProofReport {
    pub outcome: ProofOutcome,
    pub stats: UnfoldStats,
    pub validation: Option<DerivationStatus>,
}

impl ProofReport {
    pub fn witness(&self) -> Option<&NontermWitness> {
        match &self.outcome {
            ProofOutcome::Proven(w) => Some(w),
            ProofOutcome::Unknown(_) => None,
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.stats.elapsed
    }
}

/// Search for a special rule whose left-hand side is rooted at `query` (any
/// root when `None`) and validate its witness with up to `validate_steps`
/// resolution steps (0 skips validation).
pub fn prove(
    p: &Program,
    query: Option<&Symbol>,
    budget: UnfoldBudget,
    validate_steps: usize,
) -> ProofReport {
    prove_traced(p, query, budget, validate_steps, |_| {})
}

pub fn prove_traced(
    p: &Program,
    query: Option<&Symbol>,
    budget: UnfoldBudget,
    validate_steps: usize,
    mut trace: impl FnMut(&StoredRule),
) -> ProofReport {
    let b = initial_rules(p);
    let ground = grounding_constant(p);
    let mut found: Option<NontermWitness> = None;
    let mut validation = None;
    let mut failed = false;
    let (_, stats) = patunf_bounded(p, &b, budget, |s| {
        trace(s);
        if query.is_some_and(|q| s.rule.lhs.skeleton.root() != Some(q)) {
            return false;
        }
        let Some(data) = match_special(s) else {
            return false;
        };
        let w = witness_from(&s.rule, data, &ground);
        let k = w.data.k;
        if !(0..3).all(|j| instance_check(&w.rule, &w.data, w.n + j * k)) {
            return false;
        }
        if validate_steps > 0 {
            let st = derive_bounded(
                p,
                &crate::term::Query::single(w.witness.clone()),
                validate_steps,
                Strategy::IterativeDeepening,
            );
            validation = Some(st);
            if !st.reached_bound() {
                failed = true;
                return true;
            }
        }
        found = Some(w);
        true
    });
    let outcome = match found {
        Some(w) => ProofOutcome::Proven(Box::new(w)),
        None if failed => ProofOutcome::Unknown(UnknownReason::ValidationFailed),
        None => ProofOutcome::Unknown(match stats.stop {
            StopReason::Timeout => UnknownReason::Timeout,
            StopReason::IterationCap => UnknownReason::IterationCap,
            StopReason::RuleCap => UnknownReason::RuleCap,
            StopReason::Fixpoint | StopReason::Found => UnknownReason::Fixpoint,
        }),
    };
    ProofReport {
        outcome,
        stats,
        validation,
    }
}
