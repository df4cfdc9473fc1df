//! Pattern unfolding: breadth-first saturation of a set of simple pattern
//! rules under the unfolding operator, within a budget.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::pattern::{PatternRule, PatternTerm};
use crate::program::{Program, Rule};
use crate::simple::{lift, upsilon, upsilon_inv, ExtSubst, ExtTerm};
use crate::subst::{fresh_renaming, Substitution};
use crate::term::{canonical, Term, Var, VarGen};
use crate::unify::unify_extend;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnfoldBudget {
    pub max_iterations: usize,
    pub max_rules: usize,
    pub timeout: Duration,
}

impl Default for UnfoldBudget {
    fn default() -> Self {
        UnfoldBudget {
            max_iterations: 10,
            max_rules: 100_000,
            timeout: Duration::from_secs(10),
        }
    }
}

/// Where a selected unfolding rule came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Identity(usize),
    Stored(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// Index of the program rule that was unfolded.
    pub program_rule: usize,
    /// Number of body atoms unfolded.
    pub prefix: usize,
    pub used: Vec<Origin>,
}

#[derive(Clone, Debug)]
pub struct StoredRule {
    pub rule: PatternRule,
    pub lhs_ext: ExtTerm,
    pub rhs_ext: ExtTerm,
    /// Round in which the rule was added (1 for the initial rules).
    pub round: usize,
    /// `None` for initial rules.
    pub provenance: Option<Provenance>,
}

impl StoredRule {
    /// Both sides simple, or `None`.
    pub fn new(rule: PatternRule, round: usize, provenance: Option<Provenance>) -> Option<Self> {
        Some(StoredRule {
            lhs_ext: upsilon(&rule.lhs)?,
            rhs_ext: upsilon(&rule.rhs)?,
            rule,
            round,
            provenance,
        })
    }

    fn key(&self) -> Vec<ExtTerm> {
        canonical(&[&self.lhs_ext, &self.rhs_ext])
    }
}

impl fmt::Display for StoredRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs_ext, self.rhs_ext)
    }
}

/// Simple pattern rules, deduplicated modulo renaming of their canonical
/// extended forms, in insertion order.
#[derive(Clone, Debug, Default)]
pub struct PatternRuleSet {
    rules: Vec<StoredRule>,
    keys: HashSet<Vec<ExtTerm>>,
}

impl PatternRuleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of the rule when it is new.
    pub fn insert(&mut self, r: StoredRule) -> Option<usize> {
        if self.keys.insert(r.key()) {
            self.rules.push(r);
            Some(self.rules.len() - 1)
        } else {
            None
        }
    }

    pub fn contains_variant(&self, r: &PatternRule) -> bool {
        StoredRule::new(r.clone(), 0, None).is_some_and(|s| self.keys.contains(&s.key()))
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn get(&self, i: usize) -> &StoredRule {
        &self.rules[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StoredRule> {
        self.rules.iter()
    }
}

/// `(⌈f(x1..xm)⌉, ⌈f(x1..xm)⌉)` for every symbol of the program.
pub fn patid_rules(p: &Program) -> Vec<PatternRule> {
    let mut gen = VarGen::default();
    p.signature()
        .iter()
        .map(|sym| {
            let t = Program::generic_atom(sym, &mut gen);
            PatternRule::new(PatternTerm::lift(t.clone()), PatternTerm::lift(t))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Fixpoint,
    IterationCap,
    RuleCap,
    Timeout,
    /// The callback asked to stop.
    Found,
}

#[derive(Clone, Debug)]
pub struct UnfoldStats {
    /// Number of distinct stored rules.
    pub unf: usize,
    pub iterations: usize,
    pub elapsed: Duration,
    pub stop: StopReason,
    /// Unfolding tuples whose unifier existed but was rejected (not
    /// simple, or failing the commutation guard).
    pub rejected: usize,
}

/// One application of the operator to `u`, without budget.
pub fn t_pi_step(p: &Program, b: &[PatternRule], u: &PatternRuleSet) -> PatternRuleSet {
    let mut engine = Engine::new(
        p,
        b,
        UnfoldBudget {
            max_iterations: usize::MAX,
            max_rules: usize::MAX,
            timeout: Duration::MAX,
        },
    );
    for r in u.iter() {
        engine.reserve(&r.rule);
    }
    let cands: Vec<Cand> = engine
        .ids
        .iter()
        .enumerate()
        .map(|(i, s)| (s, Origin::Identity(i), true))
        .chain(
            u.iter()
                .enumerate()
                .map(|(i, s)| (s, Origin::Stored(i), true)),
        )
        .map(|(s, o, n)| Cand::of(s, o, n))
        .collect();
    let mut out = PatternRuleSet::new();
    for r in b {
        if let Some(s) = StoredRule::new(r.clone(), 1, None) {
            out.insert(s);
        }
    }
    let mut fresh = Vec::new();
    engine.round(&cands, &mut fresh);
    for s in fresh {
        out.insert(s);
    }
    out
}

/// Saturate from the empty set. `on_new` sees every stored rule right after
/// insertion and may stop the run by returning `true`.
pub fn patunf_bounded(
    p: &Program,
    b: &[PatternRule],
    budget: UnfoldBudget,
    mut on_new: impl FnMut(&StoredRule) -> bool,
) -> (PatternRuleSet, UnfoldStats) {
    let mut engine = Engine::new(p, b, budget);
    let stop = engine.run(b, &mut on_new);
    let stats = UnfoldStats {
        unf: engine.set.len(),
        iterations: engine.iterations,
        elapsed: engine.start.elapsed(),
        stop,
        rejected: engine.rejected,
    };
    (engine.set, stats)
}

#[derive(Clone)]
struct Cand {
    rule: PatternRule,
    lhs_ext: ExtTerm,
    rhs_is_empty: bool,
    origin: Origin,
    is_new: bool,
}

impl Cand {
    fn of(s: &StoredRule, origin: Origin, is_new: bool) -> Self {
        Cand {
            rule: s.rule.clone(),
            lhs_ext: s.lhs_ext.clone(),
            rhs_is_empty: s.rule.rhs.is_empty_marker(),
            origin,
            is_new,
        }
    }
}

struct Engine<'p> {
    program: &'p Program,
    ids: Vec<StoredRule>,
    set: PatternRuleSet,
    gen: VarGen,
    budget: UnfoldBudget,
    start: Instant,
    iterations: usize,
    derived: usize,
    rejected: usize,
    ticks: usize,
    halted: Option<StopReason>,
}

impl<'p> Engine<'p> {
    fn new(program: &'p Program, b: &[PatternRule], budget: UnfoldBudget) -> Self {
        let ids: Vec<StoredRule> = patid_rules(program)
            .into_iter()
            .filter_map(|r| StoredRule::new(r, 0, None))
            .collect();
        let mut e = Engine {
            program,
            ids,
            set: PatternRuleSet::new(),
            gen: program.var_gen(),
            budget,
            start: Instant::now(),
            iterations: 0,
            derived: 0,
            rejected: 0,
            ticks: 0,
            halted: None,
        };
        for r in b {
            e.reserve(r);
        }
        let ids = e.ids.clone();
        for r in &ids {
            e.reserve(&r.rule);
        }
        e
    }

    fn reserve(&mut self, r: &PatternRule) {
        r.reserve_in(&mut self.gen);
    }

    fn out_of_time(&mut self) -> bool {
        self.ticks += 1;
        if self.ticks.is_multiple_of(64) && self.start.elapsed() >= self.budget.timeout {
            self.halted.get_or_insert(StopReason::Timeout);
        }
        self.halted.is_some()
    }

    fn run(
        &mut self,
        b: &[PatternRule],
        on_new: &mut dyn FnMut(&StoredRule) -> bool,
    ) -> StopReason {
        let mut delta_start = 0;
        loop {
            if self.iterations >= self.budget.max_iterations {
                return StopReason::IterationCap;
            }
            if self.start.elapsed() >= self.budget.timeout {
                return StopReason::Timeout;
            }
            self.iterations += 1;
            let round = self.iterations;
            let before = self.set.len();
            if round == 1 {
                for r in b {
                    if let Some(s) = StoredRule::new(r.clone(), 1, None) {
                        if let Some(i) = self.set.insert(s) {
                            if on_new(self.set.get(i)) {
                                return StopReason::Found;
                            }
                        }
                    }
                }
            }
            let first = round == 1;
            let cands: Vec<Cand> = self
                .ids
                .iter()
                .enumerate()
                .map(|(i, s)| Cand::of(s, Origin::Identity(i), first))
                .chain(
                    self.set.rules[..before]
                        .iter()
                        .enumerate()
                        .map(|(i, s)| Cand::of(s, Origin::Stored(i), i >= delta_start)),
                )
                .collect();
            let mut found = false;
            self.round_into(&cands, on_new, &mut found);
            if found {
                return StopReason::Found;
            }
            if let Some(reason) = self.halted {
                return reason;
            }
            if self.set.len() == before {
                return StopReason::Fixpoint;
            }
            delta_start = before;
        }
    }

    /// Generate the tuples of one round, inserting new rules into the set
    /// immediately so that the callback can short-circuit.
    fn round_into(
        &mut self,
        cands: &[Cand],
        on_new: &mut dyn FnMut(&StoredRule) -> bool,
        found: &mut bool,
    ) {
        let program = self.program;
        for (ri, rule) in program.rules.iter().enumerate() {
            if rule.body.is_empty() {
                continue;
            }
            self.expand(ri, rule, cands, &mut |engine, s| {
                if engine.derived >= engine.budget.max_rules {
                    engine.halted.get_or_insert(StopReason::RuleCap);
                    return true;
                }
                if let Some(i) = engine.set.insert(s) {
                    engine.derived += 1;
                    if on_new(engine.set.get(i)) {
                        *found = true;
                        return true;
                    }
                }
                false
            });
            if *found || self.halted.is_some() {
                return;
            }
        }
    }

    fn round(&mut self, cands: &[Cand], out: &mut Vec<StoredRule>) {
        let program = self.program;
        for (ri, rule) in program.rules.iter().enumerate() {
            if rule.body.is_empty() {
                continue;
            }
            self.expand(ri, rule, cands, &mut |_, s| {
                out.push(s);
                false
            });
        }
    }

    /// Enumerate the tuples for one program rule; `emit` returns `true` to
    /// stop.
    fn expand(
        &mut self,
        ri: usize,
        rule: &Rule,
        cands: &[Cand],
        emit: &mut dyn FnMut(&mut Engine<'p>, StoredRule) -> bool,
    ) {
        let goals: Vec<ExtTerm> = rule.body.iter().map(lift).collect();
        let mut chosen: Vec<usize> = Vec::new();
        let mut renamed: Vec<PatternRule> = Vec::new();
        self.extend(
            ri,
            rule,
            &goals,
            cands,
            &ExtSubst::new(),
            false,
            &mut chosen,
            &mut renamed,
            emit,
        );
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &mut self,
        ri: usize,
        rule: &Rule,
        goals: &[ExtTerm],
        cands: &[Cand],
        theta: &ExtSubst,
        any_new: bool,
        chosen: &mut Vec<usize>,
        renamed: &mut Vec<PatternRule>,
        emit: &mut dyn FnMut(&mut Engine<'p>, StoredRule) -> bool,
    ) -> bool {
        let j = chosen.len();
        let m = goals.len();
        let goal_root = rule.body[j].root();
        for (ci, cand) in cands.iter().enumerate() {
            if self.out_of_time() {
                return true;
            }
            if cand.rule.lhs.skeleton.root() != goal_root {
                continue;
            }
            let last = j + 1 == m;
            let terminal = !cand.rhs_is_empty || last;
            let new_here = any_new || cand.is_new;
            if terminal && !new_here {
                continue;
            }
            let map = fresh_renaming(cand.rule.vars(), &mut self.gen);
            let lhs_ext = cand.lhs_ext.rename(&map);
            let Some(next) = unify_extend(theta, &goals[j], &lhs_ext) else {
                continue;
            };
            chosen.push(ci);
            renamed.push(cand.rule.rename(&map));
            let stop = if terminal {
                self.finish(ri, rule, cands, &next, chosen, renamed, emit)
            } else {
                self.extend(
                    ri, rule, goals, cands, &next, new_here, chosen, renamed, emit,
                )
            };
            chosen.pop();
            renamed.pop();
            if stop {
                return true;
            }
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        &mut self,
        ri: usize,
        rule: &Rule,
        cands: &[Cand],
        theta: &ExtSubst,
        chosen: &[usize],
        renamed: &[PatternRule],
        emit: &mut dyn FnMut(&mut Engine<'p>, StoredRule) -> bool,
    ) -> bool {
        let Some(ps) = upsilon_inv(theta) else {
            self.rejected += 1;
            return false;
        };
        let last = renamed.last().expect("non-empty tuple");
        let (sigma_i, mu_i) = (last.rhs.sigma(), last.rhs.mu());
        if !ps.sigma.commutes_with(sigma_i) || !ps.sigma.commutes_with(mu_i) {
            self.rejected += 1;
            return false;
        }
        let lhs = restricted(rule.head.clone(), &ps.sigma, &ps.mu);
        let rhs = restricted(
            last.rhs.skeleton.clone(),
            &sigma_i.compose(&ps.sigma),
            &mu_i.compose(&ps.mu),
        );
        let prov = Provenance {
            program_rule: ri,
            prefix: chosen.len(),
            used: chosen.iter().map(|&c| cands[c].origin.clone()).collect(),
        };
        let Some(stored) = StoredRule::new(PatternRule::new(lhs, rhs), self.iterations, Some(prov))
        else {
            self.rejected += 1;
            return false;
        };
        emit(self, stored)
    }
}

/// `(s, σ, μ)` with `σ` and `μ` cut down to the variables of `s`. When `σ`
/// maps each variable of `s` to a term over that variable only, this does
/// not change the denoted terms; otherwise the full substitutions are kept.
fn restricted(skeleton: Term, sigma: &Substitution, mu: &Substitution) -> PatternTerm {
    let keep: BTreeSet<Var> = skeleton.var_set();
    let local = keep
        .iter()
        .all(|x| sigma.image(*x).var_set().iter().all(|y| y == x));
    if local {
        PatternTerm::new(skeleton, sigma.restrict(&keep), mu.restrict(&keep))
    } else {
        PatternTerm::new(skeleton, sigma.clone(), mu.clone())
    }
}

/// Renaming helper used by tests and detection: a variant of `r` whose
/// variables are `X0, X1, ...` in order of first occurrence.
pub fn canonical_rule(r: &PatternRule) -> PatternRule {
    let mut order: Vec<Var> = Vec::new();
    for x in r
        .lhs
        .skeleton
        .vars()
        .into_iter()
        .chain(r.rhs.skeleton.vars())
        .chain(r.vars())
    {
        if !order.contains(&x) {
            order.push(x);
        }
    }
    let map: HashMap<Var, Var> = order
        .iter()
        .enumerate()
        .map(|(i, x)| (*x, Var(i as u32)))
        .collect();
    r.rename(&map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;
    use crate::pattern::initial_rules;
    use crate::simple::ext_eval;
    use crate::term::build::*;

    const RUNNING: &str = "
        while(X, Y) :- gt(X, Y), add(X, Y, Z), while(Z, s(Y)).
        gt(s(X), 0).
        gt(s(X), s(Y)) :- gt(X, Y).
        add(X, 0, X).
        add(X, s(Y), s(Z)) :- add(X, Y, Z).
        while(X, Y) :- le(X, Y).
        le(0, X).
        le(s(X), s(Y)) :- le(X, Y).
    ";

    /// `while(s^{n+1}(x), s^n(0)) -> while(s^{2n+1}(x), s^{n+1}(0))`
    fn is_loop_rule(s: &StoredRule) -> bool {
        (0..4).all(|n| {
            let l = ext_eval(&s.lhs_ext, n);
            let r = ext_eval(&s.rhs_ext, n);
            let Some(x) = l.args().first().and_then(|a| {
                let mut t = a;
                for _ in 0..=n {
                    t = t.args().first()?;
                }
                t.as_var()
            }) else {
                return false;
            };
            l == f("while", vec![s_pow(n + 1, Term::var(x)), s_pow(n, c("0"))])
                && r == f(
                    "while",
                    vec![s_pow(2 * n + 1, Term::var(x)), s_pow(n + 1, c("0"))],
                )
        })
    }

    #[test]
    fn identity_pattern_rules() {
        let p = parse_program(RUNNING).unwrap();
        let ids = patid_rules(&p);
        assert_eq!(ids.len(), p.signature().len());
        assert!(ids.iter().any(|r| {
            let args = r.lhs.skeleton.args();
            r.lhs.skeleton.root().map(|s| s.name()) == Some("while")
                && args.len() == 2
                && args.iter().all(Term::is_var)
                && args[0] != args[1]
                && r.lhs == r.rhs
        }));
        assert!(ids.iter().any(|r| r.lhs.skeleton == c("0")));
    }

    #[test]
    fn empty_initial_set_on_facts() {
        let p = parse_program("p(a). q(b).").unwrap();
        assert!(t_pi_step(&p, &[], &PatternRuleSet::new()).is_empty());
    }

    #[test]
    fn loop_rule_found_in_second_round() {
        let p = parse_program(RUNNING).unwrap();
        let b = initial_rules(&p);
        let (set, stats) = patunf_bounded(
            &p,
            &b,
            UnfoldBudget {
                max_iterations: 2,
                ..UnfoldBudget::default()
            },
            |_| false,
        );
        let hit = set.iter().find(|s| is_loop_rule(s)).expect("loop rule");
        assert_eq!(hit.round, 2);
        let shown = hit.lhs_ext.to_string();
        assert!(
            shown.starts_with("while(s^{1,1}(X") && shown.ends_with("),s^{1,0}(0))"),
            "{shown}"
        );
        assert!(
            hit.rhs_ext.to_string().ends_with("),s^{1,1}(0))"),
            "{}",
            hit.rhs_ext
        );
        assert!(stats.unf < 100, "{}", stats.unf);
    }

    #[test]
    fn step_contains_initial_rules() {
        let p = parse_program(RUNNING).unwrap();
        let b = initial_rules(&p);
        let one = t_pi_step(&p, &b, &PatternRuleSet::new());
        assert!(b.iter().all(|r| one.contains_variant(r)));
        let two = t_pi_step(&p, &b, &one);
        assert!(two.iter().any(is_loop_rule));
    }

    #[test]
    fn callback_short_circuits() {
        let p = parse_program(RUNNING).unwrap();
        let b = initial_rules(&p);
        let mut seen = 0;
        let (_, stats) = patunf_bounded(&p, &b, UnfoldBudget::default(), |_| {
            seen += 1;
            seen == 3
        });
        assert_eq!(stats.stop, StopReason::Found);
        assert_eq!(stats.unf, 3);
    }

    #[test]
    fn rule_cap_keeps_initial_rules() {
        let p = parse_program(RUNNING).unwrap();
        let b = initial_rules(&p);
        let budget = UnfoldBudget {
            max_rules: 0,
            ..UnfoldBudget::default()
        };
        let (set, stats) = patunf_bounded(&p, &b, budget, |_| false);
        assert_eq!(stats.stop, StopReason::RuleCap);
        assert_eq!(set.len(), b.len());
    }

    #[test]
    fn stored_rules_are_simple() {
        let p = parse_program(RUNNING).unwrap();
        let b = initial_rules(&p);
        let (set, _) = patunf_bounded(
            &p,
            &b,
            UnfoldBudget {
                max_iterations: 3,
                ..Default::default()
            },
            |_| false,
        );
        for s in set.iter() {
            assert!(upsilon(&s.rule.lhs).is_some() && upsilon(&s.rule.rhs).is_some());
            for n in 0..3 {
                assert_eq!(s.rule.lhs.eval(n), ext_eval(&s.lhs_ext, n));
                assert_eq!(s.rule.rhs.eval(n), ext_eval(&s.rhs_ext, n));
            }
        }
    }
}
