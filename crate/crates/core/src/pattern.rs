//! Pattern substitutions, terms and rules, which describe infinite families
//! of substitutions, terms and binary rules indexed by `n`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::binunf::{binunf_bounded, BinaryRule};
use crate::program::{Program, Rule};
use crate::subst::{fresh_renaming, match_term, Substitution};
use crate::term::{Term, Tree, Var, VarGen};

/// `⟨σ, μ⟩`, standing for `σⁿμ`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PatternSubst {
    pub sigma: Substitution,
    pub mu: Substitution,
}

impl PatternSubst {
    pub fn new(sigma: Substitution, mu: Substitution) -> Self {
        PatternSubst { sigma, mu }
    }

    pub fn eval(&self, n: usize) -> Substitution {
        self.sigma.power(n).compose(&self.mu)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.sigma.vars();
        out.extend(self.mu.vars());
        out
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Self {
        PatternSubst::new(self.sigma.rename(map), self.mu.rename(map))
    }
}

impl fmt::Display for PatternSubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨{}, {}⟩", self.sigma, self.mu)
    }
}

impl fmt::Debug for PatternSubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `(s, σ, μ)`, standing for `sσⁿμ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PatternTerm {
    pub skeleton: Term,
    pub subst: PatternSubst,
}

impl PatternTerm {
    pub fn new(skeleton: Term, sigma: Substitution, mu: Substitution) -> Self {
        PatternTerm {
            skeleton,
            subst: PatternSubst::new(sigma, mu),
        }
    }

    /// `⌈s⌉ = (s, ∅, ∅)`.
    pub fn lift(skeleton: Term) -> Self {
        PatternTerm::new(skeleton, Substitution::new(), Substitution::new())
    }

    pub fn sigma(&self) -> &Substitution {
        &self.subst.sigma
    }

    pub fn mu(&self) -> &Substitution {
        &self.subst.mu
    }

    pub fn is_empty_marker(&self) -> bool {
        self.skeleton.is_empty_marker()
    }

    pub fn eval(&self, n: usize) -> Term {
        self.subst.eval(n).apply(&self.skeleton)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.skeleton.var_set();
        out.extend(self.subst.vars());
        out
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Self {
        PatternTerm {
            skeleton: self.skeleton.rename(map),
            subst: self.subst.rename(map),
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.subst.sigma.is_empty() && self.subst.mu.is_empty() {
            write!(f, "⌈{}⌉", self.skeleton)
        } else {
            write!(
                f,
                "({}, {}, {})",
                self.skeleton, self.subst.sigma, self.subst.mu
            )
        }
    }
}

impl fmt::Debug for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PatternRule {
    pub lhs: PatternTerm,
    pub rhs: PatternTerm,
}

impl PatternRule {
    pub fn new(lhs: PatternTerm, rhs: PatternTerm) -> Self {
        PatternRule { lhs, rhs }
    }

    /// The binary rule `(p(n), q(n))`.
    pub fn instance(&self, n: usize) -> BinaryRule {
        BinaryRule::new(self.lhs.eval(n), self.rhs.eval(n))
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.lhs.vars();
        out.extend(self.rhs.vars());
        out
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Self {
        PatternRule::new(self.lhs.rename(map), self.rhs.rename(map))
    }

    /// A copy whose variables are all fresh.
    pub fn rename_fresh(&self, gen: &mut VarGen) -> Self {
        let map = fresh_renaming(self.vars(), gen);
        self.rename(&map)
    }

    pub fn reserve_in(&self, gen: &mut VarGen) {
        if let Some(max) = self.vars().into_iter().filter(|v| !v.is_hole()).max() {
            gen.reserve(&Term::var(max));
        }
    }
}

impl fmt::Display for PatternRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for PatternRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// The initial pattern rules obtained from pairs of a recursive rule
/// `c(c1(x1),…,cm(xm)) :- c(x1,…,xm)` and a fact `c(t1,…,tm)` over the same
/// variable-free outer context `c` and ground 1-contexts `ck`.
pub fn initial_rules(p: &Program) -> Vec<PatternRule> {
    let mut out = Vec::new();
    for r in &p.rules {
        let [v] = r.body.as_slice() else { continue };
        let Some((outer, xs, sigma)) = recursive_shape(r, v) else {
            continue;
        };
        for fact in p
            .rules
            .iter()
            .filter(|f| f.is_fact() && f.head.root() == r.head.root())
        {
            let Some(bind) = match_term(&outer, &fact.head) else {
                continue;
            };
            let ts: Vec<Term> = (1..=xs.len()).map(|k| bind.image(Var::hole(k))).collect();
            let ts = reuse_rule_vars(&xs, &ts);
            let mu = Substitution::from_pairs(xs.iter().copied().zip(ts));
            out.push(PatternRule::new(
                PatternTerm::new(v.clone(), sigma.clone(), mu),
                PatternTerm::lift(Term::empty()),
            ));
            out.push(PatternRule::new(
                PatternTerm::new(r.head.clone(), sigma.clone(), Substitution::new()),
                PatternTerm::lift(v.clone()),
            ));
        }
    }
    out
}

/// Rename each fact variable to the `xk` of the first `tk` it occurs in, when
/// that `xk` is still free. The renaming is injective and the `xk` do not
/// survive `μ`, so the described family is unchanged up to renaming.
fn reuse_rule_vars(xs: &[Var], ts: &[Term]) -> Vec<Term> {
    let mut map = HashMap::new();
    let mut used = BTreeSet::new();
    for (x, t) in xs.iter().zip(ts) {
        for y in t.vars() {
            if !map.contains_key(&y) && !used.contains(x) {
                map.insert(y, *x);
                used.insert(*x);
            }
        }
    }
    // fact variables that found no slot must not collide with a reused xk
    let taken: BTreeSet<Var> = xs.iter().copied().collect();
    if ts
        .iter()
        .flat_map(|t| t.vars())
        .any(|y| !map.contains_key(&y) && taken.contains(&y))
    {
        return ts.to_vec();
    }
    ts.iter().map(|t| t.rename(&map)).collect()
}

/// For `r = (u, v)` of the recursive shape, the outer context of `v` with
/// holes `□1..□m`, the variables `x1..xm`, and `σ = {xk ↦ ck(xk)}`.
fn recursive_shape(r: &Rule, v: &Term) -> Option<(Term, Vec<Var>, Substitution)> {
    let xs = v.vars();
    let mut count = HashMap::new();
    v.for_each_var(&mut |x| *count.entry(x).or_insert(0) += 1);
    if count.values().any(|&c| c > 1) {
        return None;
    }
    let holes: HashMap<Var, Term> = xs
        .iter()
        .enumerate()
        .map(|(k, x)| (*x, Tree::Var(Var::hole(k + 1))))
        .collect();
    let outer = v.replace_vars(&|x| holes.get(&x).cloned());
    let bind = match_term(&outer, &r.head)?;
    let mut sigma = Substitution::new();
    for (k, x) in xs.iter().enumerate() {
        let uk = bind.image(Var::hole(k + 1));
        if uk.var_set() != BTreeSet::from([*x]) {
            return None;
        }
        sigma.insert(*x, uk);
    }
    Some((outer, xs, sigma))
}

/// Whether `rules(r)` up to `n_max` lies in the bounded binary unfolding.
pub fn check_correct_sampled(r: &PatternRule, p: &Program, n_max: usize, depth: usize) -> bool {
    let oracle = binunf_bounded(p, depth);
    (0..=n_max).all(|n| oracle.contains_variant(&r.instance(n)))
}
