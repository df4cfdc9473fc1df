//! Leftmost resolution over a program, used to validate witnesses and as a
//! ground-truth oracle in tests.

use std::collections::{BTreeSet, HashSet};

use crate::program::{Program, Rule};
use crate::subst::{rename_apart, Substitution};
use crate::term::{Query, Term, Var, VarGen};
use crate::unify::mgu;

/// Successors of `q` under one rule: the renamed head is unified with the
/// first term of `q` and the renamed body is put in front of the rest.
/// Fresh variables avoid both `q` and `avoid`.
pub fn rewrite_step(q: &Query, r: &Rule, avoid: &BTreeSet<Var>) -> Vec<(Query, Substitution)> {
    let floor = avoid
        .iter()
        .filter(|v| !v.is_hole())
        .map(|v| v.0 + 1)
        .max()
        .unwrap_or(0);
    let mut gen = VarGen::starting_at(VarGen::above(q.terms()).peek().max(floor));
    step_with(q, r, &mut gen).into_iter().collect()
}

fn step_with(q: &Query, r: &Rule, gen: &mut VarGen) -> Option<(Query, Substitution)> {
    let (first, rest) = q.terms().split_first()?;
    if first.root() != r.head.root() {
        return None;
    }
    let parts: Vec<Term> = r.terms().cloned().collect();
    let (renamed, _) = rename_apart(&parts, gen);
    let theta = mgu(&renamed[0], first)?;
    let next = renamed[1..]
        .iter()
        .chain(rest)
        .map(|t| theta.apply(t))
        .collect();
    Some((Query(next), theta))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    DepthFirst,
    /// Depth-first with a doubling depth limit.
    IterativeDeepening,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Some chain reached the requested length.
    ReachedBound(usize),
    /// Every chain stops; the payload is the longest chain length seen.
    AllBranchesFinite(usize),
    /// The node budget ran out before either of the above was settled.
    BudgetExhausted(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DerivationStatus {
    pub outcome: Outcome,
    /// Whether `ε` was reached on some explored branch.
    pub reached_empty: bool,
}

impl DerivationStatus {
    pub fn reached_bound(&self) -> bool {
        matches!(self.outcome, Outcome::ReachedBound(_))
    }
}

/// Default limit on the number of visited queries in one exploration.
pub const NODE_BUDGET: usize = 2_000_000;

pub fn derive_bounded(
    p: &Program,
    q: &Query,
    max_steps: usize,
    strategy: Strategy,
) -> DerivationStatus {
    derive_with_budget(p, q, max_steps, strategy, NODE_BUDGET)
}

pub fn derive_with_budget(
    p: &Program,
    q: &Query,
    max_steps: usize,
    strategy: Strategy,
    budget: usize,
) -> DerivationStatus {
    let mut gen = p.var_gen();
    for t in q.terms() {
        gen.reserve(t);
    }
    let mut nodes = 0usize;
    match strategy {
        Strategy::DepthFirst => dfs(p, q, max_steps, &mut gen, &mut nodes, budget),
        Strategy::IterativeDeepening => {
            let mut limit = max_steps.min(16);
            let mut reached_empty = false;
            loop {
                let st = dfs(p, q, limit, &mut gen, &mut nodes, budget);
                reached_empty |= st.reached_empty;
                match st.outcome {
                    Outcome::ReachedBound(_) if limit < max_steps => {
                        limit = (limit * 2).min(max_steps);
                    }
                    outcome => {
                        return DerivationStatus {
                            outcome,
                            reached_empty,
                        }
                    }
                }
            }
        }
    }
}

fn dfs(
    p: &Program,
    q: &Query,
    limit: usize,
    gen: &mut VarGen,
    nodes: &mut usize,
    budget: usize,
) -> DerivationStatus {
    let mut reached_empty = false;
    let mut deepest = 0;
    let mut stack = vec![(q.clone(), 0usize)];
    while let Some((query, depth)) = stack.pop() {
        deepest = deepest.max(depth);
        if depth >= limit {
            return DerivationStatus {
                outcome: Outcome::ReachedBound(limit),
                reached_empty,
            };
        }
        if query.is_empty() {
            reached_empty = true;
            continue;
        }
        *nodes += 1;
        if *nodes > budget {
            return DerivationStatus {
                outcome: Outcome::BudgetExhausted(deepest),
                reached_empty,
            };
        }
        let succ: Vec<Query> = p
            .rules
            .iter()
            .filter_map(|r| step_with(&query, r, gen).map(|(next, _)| next))
            .collect();
        // reversed so the first rule is explored first
        stack.extend(succ.into_iter().rev().map(|n| (n, depth + 1)));
    }
    DerivationStatus {
        outcome: Outcome::AllBranchesFinite(deepest),
        reached_empty,
    }
}

/// First terms of the queries reachable from `⟨s⟩` in at most `max_steps`
/// steps, not counting the start itself; `ε` is included when reached.
pub fn calls_bounded(p: &Program, s: &Term, max_steps: usize) -> HashSet<Term> {
    let mut gen = p.var_gen();
    gen.reserve(s);
    let mut out = HashSet::new();
    let mut frontier = vec![Query::single(s.clone())];
    for _ in 0..max_steps {
        let mut next = Vec::new();
        for q in &frontier {
            for r in &p.rules {
                if let Some((succ, _)) = step_with(q, r, &mut gen) {
                    out.insert(succ.first().cloned().unwrap_or_else(Term::empty));
                    if !succ.is_empty() {
                        next.push(succ);
                    }
                }
            }
        }
        if next.is_empty() || out.len() > NODE_BUDGET {
            break;
        }
        frontier = next;
    }
    out
}
