//! Martelli-Montanari unification with occurs check.
//!
//! Heads are compared with `==` only, so the same code unifies plain terms
//! and terms over the extended signature (where each power symbol is an
//! opaque unary head).

use crate::subst::Subst;
use crate::term::{Query, Symbol, Tree, Var};

/// An idempotent most general unifier of the two sequences, or `None` when
/// they have different lengths, clash, or fail the occurs check.
pub fn mgu_seq<H: Clone + Eq>(left: &[Tree<H>], right: &[Tree<H>]) -> Option<Subst<H>> {
    if left.len() != right.len() {
        return None;
    }
    let eqs = left.iter().cloned().zip(right.iter().cloned()).collect();
    solve(eqs, Subst::new())
}

pub fn mgu<H: Clone + Eq>(s: &Tree<H>, t: &Tree<H>) -> Option<Subst<H>> {
    solve(vec![(s.clone(), t.clone())], Subst::new())
}

pub fn mgu_query(left: &Query, right: &Query) -> Option<Subst<Symbol>> {
    mgu_seq(left.terms(), right.terms())
}

/// Extend an idempotent unifier `theta` so that it also unifies `s` and `t`.
/// The result is `theta · mgu(sθ, tθ)`, again idempotent.
pub fn unify_extend<H: Clone + Eq>(theta: &Subst<H>, s: &Tree<H>, t: &Tree<H>) -> Option<Subst<H>> {
    solve(vec![(theta.apply(s), theta.apply(t))], theta.clone())
}

/// The rule system: delete, decompose, clash, orient, occurs check,
/// eliminate. `solved` is kept in solved form: its domain never occurs in
/// its range or in the pending equations.
fn solve<H: Clone + Eq>(
    mut pending: Vec<(Tree<H>, Tree<H>)>,
    mut solved: Subst<H>,
) -> Option<Subst<H>> {
    while let Some((s, t)) = pending.pop() {
        match (s, t) {
            (Tree::Var(x), Tree::Var(y)) if x == y => {}
            (Tree::App(f, fs), Tree::App(g, gs)) => {
                if f != g || fs.len() != gs.len() {
                    return None;
                }
                pending.extend(fs.into_iter().zip(gs));
            }
            (Tree::App(f, fs), Tree::Var(x)) => {
                eliminate(x, Tree::App(f, fs), &mut pending, &mut solved)?
            }
            (Tree::Var(x), t) => eliminate(x, t, &mut pending, &mut solved)?,
        }
    }
    Some(solved)
}

fn eliminate<H: Clone + Eq>(
    x: Var,
    t: Tree<H>,
    pending: &mut [(Tree<H>, Tree<H>)],
    solved: &mut Subst<H>,
) -> Option<()> {
    if t.contains_var(x) {
        return None;
    }
    let single = Subst::from_pairs([(x, t)]);
    for (l, r) in pending.iter_mut() {
        *l = single.apply(l);
        *r = single.apply(r);
    }
    *solved = solved.compose(&single);
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::build::*;
    use crate::term::Term;

    #[test]
    fn identical_terms_give_empty_unifier() {
        assert_eq!(mgu(&v(0), &v(0)), Some(Subst::new()));
    }

    #[test]
    fn occurs_check_fails() {
        assert_eq!(mgu(&v(0), &s_pow(1, v(0))), None);
    }

    #[test]
    fn clash_and_length_mismatch() {
        assert_eq!(mgu(&c("0"), &s_pow(1, v(0))), None);
        assert_eq!(mgu_seq(&[v(0)], &[v(0), v(1)]), None);
    }

    #[test]
    fn running_example_unifier() {
        // gt(s(x1),0), add(x2,0,x2), while(x3,y3)  vs  gt(x,y), add(x,y,z), while(z,s(y))
        let (x, y, z, x1, x2, x3, y3) = (0, 1, 2, 3, 4, 5, 6);
        let left: Vec<Term> = vec![
            f("gt", vec![s_pow(1, v(x1)), c("0")]),
            f("add", vec![v(x2), c("0"), v(x2)]),
            f("while", vec![v(x3), v(y3)]),
        ];
        let right: Vec<Term> = vec![
            f("gt", vec![v(x), v(y)]),
            f("add", vec![v(x), v(y), v(z)]),
            f("while", vec![v(z), s_pow(1, v(y))]),
        ];
        let th = mgu_seq(&left, &right).unwrap();
        let expected = Subst::from_pairs([
            (Var(x), s_pow(1, v(x1))),
            (Var(y), c("0")),
            (Var(z), s_pow(1, v(x1))),
            (Var(x2), s_pow(1, v(x1))),
            (Var(x3), s_pow(1, v(x1))),
            (Var(y3), s_pow(1, c("0"))),
        ]);
        assert_eq!(th, expected);
        assert!(th.is_idempotent());
    }

    #[test]
    fn extend_is_sequential_mgu() {
        let a = f("p", vec![v(0), v(1)]);
        let b = f("p", vec![v(1), c("0")]);
        let th = unify_extend(&Subst::new(), &a, &b).unwrap();
        let th2 = unify_extend(&th, &v(2), &f("g", vec![v(0)])).unwrap();
        assert_eq!(th2.apply(&v(2)), f("g", vec![c("0")]));
        assert!(th2.is_idempotent());
    }
}
