//! Bounded binary unfolding: the set of binary rules summarising
//! consecutive calls of a program, computed up to a depth.

use std::collections::HashSet;
use std::fmt;

use crate::program::Program;
use crate::subst::{rename_apart, Substitution};
use crate::term::{canonical, Term, VarGen};
use crate::unify::unify_extend;

/// `(lhs, rhs)` with `rhs` possibly `ε`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryRule {
    pub lhs: Term,
    pub rhs: Term,
}

impl BinaryRule {
    pub fn new(lhs: Term, rhs: Term) -> Self {
        BinaryRule { lhs, rhs }
    }

    pub fn fact(lhs: Term) -> Self {
        BinaryRule {
            lhs,
            rhs: Term::empty(),
        }
    }

    pub fn key(&self) -> Vec<Term> {
        canonical(&[&self.lhs, &self.rhs])
    }
}

impl fmt::Display for BinaryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for BinaryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Binary rules modulo renaming, in insertion order.
#[derive(Clone, Default, Debug)]
pub struct BinaryRuleSet {
    rules: Vec<BinaryRule>,
    keys: HashSet<Vec<Term>>,
}

impl BinaryRuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert unless a variant is already present.
    pub fn insert(&mut self, r: BinaryRule) -> bool {
        if self.keys.insert(r.key()) {
            self.rules.push(r);
            true
        } else {
            false
        }
    }

    pub fn contains_variant(&self, r: &BinaryRule) -> bool {
        self.keys.contains(&r.key())
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, BinaryRule> {
        self.rules.iter()
    }

    pub fn rules(&self) -> &[BinaryRule] {
        &self.rules
    }
}

impl FromIterator<BinaryRule> for BinaryRuleSet {
    fn from_iter<I: IntoIterator<Item = BinaryRule>>(iter: I) -> Self {
        let mut s = BinaryRuleSet::new();
        for r in iter {
            s.insert(r);
        }
        s
    }
}

/// `(f(x1..xm), f(x1..xm))` for every symbol of the program.
pub fn identity_rules(p: &Program) -> BinaryRuleSet {
    let mut gen = VarGen::default();
    p.signature()
        .iter()
        .map(|sym| {
            let t = Program::generic_atom(sym, &mut gen);
            BinaryRule::new(t.clone(), t)
        })
        .collect()
}

/// Default cap on the size of a bounded unfolding.
pub const RULE_CAP: usize = 10_000;

/// One application of the unfolding operator to `u`.
pub fn t_beta_step(p: &Program, u: &BinaryRuleSet) -> BinaryRuleSet {
    let ids = identity_rules(p);
    let cands: Vec<(&BinaryRule, bool)> = ids.iter().chain(u.iter()).map(|r| (r, true)).collect();
    let mut out = BinaryRuleSet::new();
    round(p, &cands, true, &mut out, usize::MAX);
    out
}

/// `depth` rounds of the unfolding operator from the empty set, accumulated.
/// Each round only considers tuples using at least one rule that is new in
/// the previous round, which yields the same set as the plain iteration.
pub fn binunf_bounded(p: &Program, depth: usize) -> BinaryRuleSet {
    binunf_capped(p, depth, RULE_CAP)
}

pub fn binunf_capped(p: &Program, depth: usize, cap: usize) -> BinaryRuleSet {
    let ids = identity_rules(p);
    let mut acc = BinaryRuleSet::new();
    let mut delta_start = 0;
    for d in 0..depth {
        let first = d == 0;
        let cands: Vec<(&BinaryRule, bool)> = ids
            .iter()
            .map(|r| (r, first))
            .chain(acc.iter().enumerate().map(|(i, r)| (r, i >= delta_start)))
            .collect();
        let mut fresh = BinaryRuleSet::new();
        round(p, &cands, first, &mut fresh, cap);
        let before = acc.len();
        for r in fresh.rules {
            if acc.len() >= cap {
                break;
            }
            acc.insert(r);
        }
        if acc.len() == before || acc.len() >= cap {
            break;
        }
        delta_start = before;
    }
    acc
}

fn round(
    p: &Program,
    cands: &[(&BinaryRule, bool)],
    with_facts: bool,
    out: &mut BinaryRuleSet,
    cap: usize,
) {
    let mut gen = p.var_gen();
    for (r, _) in cands {
        gen.reserve(&r.lhs);
        gen.reserve(&r.rhs);
    }
    for rule in &p.rules {
        if rule.body.is_empty() {
            if with_facts {
                out.insert(BinaryRule::fact(rule.head.clone()));
            }
            continue;
        }
        let mut search = Search {
            body: &rule.body,
            head: &rule.head,
            cands,
            gen: &mut gen,
            out,
            cap,
        };
        search.extend(0, &Substitution::new(), false);
    }
}

struct Search<'a, 'b> {
    head: &'a Term,
    body: &'a [Term],
    cands: &'a [(&'b BinaryRule, bool)],
    gen: &'a mut VarGen,
    out: &'a mut BinaryRuleSet,
    cap: usize,
}

impl Search<'_, '_> {
    fn extend(&mut self, j: usize, theta: &Substitution, any_new: bool) {
        if self.out.len() >= self.cap {
            return;
        }
        let m = self.body.len();
        let goal = &self.body[j];
        for &(cand, is_new) in self.cands {
            if cand.lhs.root() != goal.root() {
                continue;
            }
            let last = j + 1 == m;
            let closes = cand.rhs.is_empty_marker();
            if !closes && !(any_new || is_new) {
                continue;
            }
            if closes && last && !(any_new || is_new) {
                continue;
            }
            let (renamed, _) = rename_apart(&[cand.lhs.clone(), cand.rhs.clone()], self.gen);
            let Some(next) = unify_extend(theta, goal, &renamed[0]) else {
                continue;
            };
            if closes && !last {
                self.extend(j + 1, &next, any_new || is_new);
            } else {
                let lhs = next.apply(self.head);
                let rhs = next.apply(&renamed[1]);
                self.out.insert(BinaryRule::new(lhs, rhs));
            }
        }
    }
}
