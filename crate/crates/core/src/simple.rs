//! Terms over the signature extended with power symbols `c^{a,b}`, which
//! stand for `c^{a·n+b}` at index `n`, and the correspondence with simple
//! pattern terms and substitutions.

use std::fmt;

use crate::context::{decompose_power, GroundContext1};
use crate::pattern::{PatternSubst, PatternTerm};
use crate::subst::{Subst, Substitution};
use crate::term::{HeadDisplay, Symbol, SymbolHead, Term, Tree, Var};
use crate::unify::mgu_seq;

/// The unary symbol `c^{a,b}`. The context always has minimal period.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtSymbol {
    ctx: GroundContext1,
    a: usize,
    b: usize,
}

impl ExtSymbol {
    /// Rewrites `(d^j)^{a,b}` as `d^{a·j,b·j}`.
    pub fn new(ctx: GroundContext1, a: usize, b: usize) -> Self {
        let (root, j) = ctx.minimal_root();
        ExtSymbol {
            ctx: root,
            a: a * j,
            b: b * j,
        }
    }

    pub fn ctx(&self) -> &GroundContext1 {
        &self.ctx
    }

    pub fn a(&self) -> usize {
        self.a
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn exponent(&self, n: usize) -> usize {
        self.a * n + self.b
    }
}

impl fmt::Display for ExtSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let skel = self.ctx.skeleton();
        match skel.args() {
            [only] if only.as_var() == Some(Var::hole(1)) => {
                write!(f, "{}", skel.root().expect("context root").name())?
            }
            _ => write!(f, "[{skel}]")?,
        }
        write!(f, "^{{{},{}}}", self.a, self.b)
    }
}

impl fmt::Debug for ExtSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtHead {
    Sym(Symbol),
    Pow(ExtSymbol),
}

impl SymbolHead for ExtHead {
    fn from_symbol(s: &Symbol) -> Self {
        ExtHead::Sym(s.clone())
    }

    fn as_symbol(&self) -> Option<&Symbol> {
        match self {
            ExtHead::Sym(s) => Some(s),
            ExtHead::Pow(_) => None,
        }
    }
}

impl HeadDisplay for ExtHead {
    fn fmt_head(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtHead::Sym(s) => f.write_str(s.name()),
            ExtHead::Pow(e) => write!(f, "{e}"),
        }
    }
}

pub type ExtTerm = Tree<ExtHead>;
pub type ExtSubst = Subst<ExtHead>;

pub fn lift(t: &Term) -> ExtTerm {
    t.map_heads(&ExtHead::from_symbol)
}

pub fn pow(ctx: GroundContext1, a: usize, b: usize, t: ExtTerm) -> ExtTerm {
    Tree::App(ExtHead::Pow(ExtSymbol::new(ctx, a, b)), vec![t])
}

/// The plain term, if `u` has no power symbol.
pub fn to_pure(u: &ExtTerm) -> Option<Term> {
    match u {
        Tree::Var(x) => Some(Tree::Var(*x)),
        Tree::App(ExtHead::Sym(f), args) => {
            let args = args.iter().map(to_pure).collect::<Option<Vec<_>>>()?;
            Some(Tree::App(f.clone(), args))
        }
        Tree::App(ExtHead::Pow(_), _) => None,
    }
}

pub fn is_pure(u: &ExtTerm) -> bool {
    match u {
        Tree::Var(_) => true,
        Tree::App(ExtHead::Sym(_), args) => args.iter().all(is_pure),
        Tree::App(ExtHead::Pow(_), _) => false,
    }
}

/// `u(n)`: every `c^{a,b}` replaced by `c^{a·n+b}`.
pub fn ext_eval(u: &ExtTerm, n: usize) -> Term {
    match u {
        Tree::Var(x) => Tree::Var(*x),
        Tree::App(ExtHead::Sym(f), args) => {
            Tree::App(f.clone(), args.iter().map(|a| ext_eval(a, n)).collect())
        }
        Tree::App(ExtHead::Pow(e), args) => e.ctx.plug_power(e.exponent(n), &ext_eval(&args[0], n)),
    }
}

pub fn ext_eval_subst(theta: &ExtSubst, n: usize) -> Substitution {
    Substitution::from_pairs(theta.iter().map(|(x, u)| (x, ext_eval(u, n))))
}

/// Canonical representative: nested powers of one context are fused, plain
/// copies of a context next to its power are absorbed into it, and powers
/// with `a = 0` are expanded.
pub fn normalize(u: &ExtTerm) -> ExtTerm {
    match u {
        Tree::Var(_) => u.clone(),
        Tree::App(ExtHead::Pow(e), args) => make_pow(&e.ctx, e.a, e.b, normalize(&args[0])),
        Tree::App(ExtHead::Sym(f), args) => {
            let node = Tree::App(
                ExtHead::Sym(f.clone()),
                args.iter().map(normalize).collect(),
            );
            absorb_above(node)
        }
    }
}

fn make_pow(ctx: &GroundContext1, a: usize, mut b: usize, mut inner: ExtTerm) -> ExtTerm {
    let mut a = a;
    loop {
        if let Tree::App(ExtHead::Pow(e), args) = &inner {
            if e.ctx == *ctx {
                a += e.a;
                b += e.b;
                inner = args[0].clone();
                continue;
            }
        }
        match ctx.peel(&inner) {
            Some(next) => {
                let next = next.clone();
                b += 1;
                inner = next;
            }
            None => break,
        }
    }
    if a == 0 {
        ctx.plug_power(b, &inner)
    } else {
        Tree::App(
            ExtHead::Pow(ExtSymbol {
                ctx: ctx.clone(),
                a,
                b,
            }),
            vec![inner],
        )
    }
}

/// `c(c^{a,b}(t))` becomes `c^{a,b+1}(t)`.
fn absorb_above(node: ExtTerm) -> ExtTerm {
    let mut ctxs: Vec<GroundContext1> = Vec::new();
    collect_pow_ctxs(&node, &mut ctxs);
    for ctx in ctxs {
        if let Some(Tree::App(ExtHead::Pow(e), args)) = ctx.peel(&node) {
            if e.ctx == ctx {
                return Tree::App(
                    ExtHead::Pow(ExtSymbol {
                        ctx,
                        a: e.a,
                        b: e.b + 1,
                    }),
                    args.clone(),
                );
            }
        }
    }
    node
}

fn collect_pow_ctxs(u: &ExtTerm, out: &mut Vec<GroundContext1>) {
    if let Tree::App(h, args) = u {
        if let ExtHead::Pow(e) = h {
            if !out.contains(&e.ctx) {
                out.push(e.ctx.clone());
            }
        }
        for a in args {
            collect_pow_ctxs(a, out);
        }
    }
}

/// How a simple pattern term drives one skeleton variable:
/// `σ(x) = c^a(x)` and `μ(x) = c^b(t)`, or `σ(x) = x` and `μ(x) = t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimpleEntry {
    pub var: Var,
    pub ctx: Option<GroundContext1>,
    pub a: usize,
    pub b: usize,
    pub t: Term,
}

pub fn decompose_simple(p: &PatternTerm) -> Option<Vec<SimpleEntry>> {
    p.skeleton
        .vars()
        .into_iter()
        .map(|x| {
            let xt = Tree::Var(x);
            let s = p.sigma().image(x);
            let m = p.mu().image(x);
            if s == xt {
                return Some(SimpleEntry {
                    var: x,
                    ctx: None,
                    a: 0,
                    b: 0,
                    t: m,
                });
            }
            let (ctx, a) = decompose_power(&s, &xt)?;
            let (b, t) = ctx.peel_max(&m);
            Some(SimpleEntry {
                var: x,
                t: t.clone(),
                ctx: Some(ctx),
                a,
                b,
            })
        })
        .collect()
}

/// The canonical extended term `sθ_p`, or `None` when `p` is not simple.
pub fn upsilon(p: &PatternTerm) -> Option<ExtTerm> {
    let entries = decompose_simple(p)?;
    let theta = ExtSubst::from_pairs(entries.into_iter().map(|e| {
        let t = lift(&e.t);
        let img = match e.ctx {
            None => t,
            Some(ctx) => pow(ctx, e.a, e.b, t),
        };
        (e.var, img)
    }));
    Some(normalize(&theta.apply(&lift(&p.skeleton))))
}

/// The pattern substitution of a simple substitution, or `None` when some
/// binding does not normalise to `c^{a,b}(t)` with `t` plain.
pub fn upsilon_inv(theta: &ExtSubst) -> Option<PatternSubst> {
    let mut sigma = Substitution::new();
    let mut mu = Substitution::new();
    for (x, u) in theta.iter() {
        let u = normalize(u);
        if let Some(t) = to_pure(&u) {
            mu.insert(x, t);
            continue;
        }
        let Tree::App(ExtHead::Pow(e), args) = &u else {
            return None;
        };
        let t = to_pure(&args[0])?;
        sigma.insert(x, e.ctx.plug_power(e.a, &Tree::Var(x)));
        mu.insert(x, e.ctx.plug_power(e.b, &t));
    }
    Some(PatternSubst::new(sigma, mu))
}

/// Unifier of two sequences of simple pattern terms, computed on their
/// canonical extended representatives. May fail although a unifier exists.
pub fn pattern_mgu(left: &[PatternTerm], right: &[PatternTerm]) -> Option<PatternSubst> {
    let ls = left.iter().map(upsilon).collect::<Option<Vec<_>>>()?;
    let rs = right.iter().map(upsilon).collect::<Option<Vec<_>>>()?;
    let theta = mgu_seq(&ls, &rs)?;
    upsilon_inv(&theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::build::*;

    fn s1() -> GroundContext1 {
        GroundContext1::unary("s")
    }

    fn f3() -> GroundContext1 {
        // f(□1, 0, □1)
        GroundContext1::new(f("f", vec![hole(1), c("0"), hole(1)])).unwrap()
    }

    fn plain(c: &GroundContext1, n: usize, t: ExtTerm) -> ExtTerm {
        c.plug_power(n, &t)
    }

    #[test]
    fn eval_context_power() {
        let u = pow(f3(), 1, 1, lift(&c("1")));
        assert_eq!(ext_eval(&u, 1), f3().plug_power(2, &c("1")));
        let inner = f("f", vec![c("1"), c("0"), c("1")]);
        assert_eq!(ext_eval(&u, 1), f("f", vec![inner.clone(), c("0"), inner]));
        let t = f("g", vec![v(0)]);
        assert_eq!(ext_eval(&lift(&t), 7), t);
        assert_eq!(ext_eval(&pow(s1(), 2, 1, lift(&v(3))), 0), s_pow(1, v(3)));
    }

    #[test]
    fn normalize_fuses_powers_and_copies() {
        for ctx in [s1(), f3()] {
            let u = plain(
                &ctx,
                1,
                pow(
                    ctx.clone(),
                    2,
                    1,
                    pow(ctx.clone(), 1, 2, plain(&ctx, 1, lift(&c("0")))),
                ),
            );
            assert_eq!(normalize(&u), pow(ctx.clone(), 3, 5, lift(&c("0"))));
            let w = pow(ctx.clone(), 1, 0, pow(ctx.clone(), 0, 1, lift(&c("1"))));
            assert_eq!(normalize(&w), pow(ctx.clone(), 1, 1, lift(&c("1"))));
        }
        let t = lift(&f("g", vec![s_pow(2, v(0)), c("0")]));
        assert_eq!(normalize(&t), t);
    }

    #[test]
    fn non_minimal_context_is_canonicalised() {
        let ss = GroundContext1::new(s_pow(2, hole(1))).unwrap();
        let e = ExtSymbol::new(ss, 1, 1);
        assert_eq!(e.ctx(), &s1());
        assert_eq!((e.a(), e.b()), (2, 2));
    }

    #[test]
    fn upsilon_examples() {
        // (f(s(x), y), {x↦s²(x)}, {x↦s(x1), y↦0}) ~ f(s^{2,2}(x1), 0)
        let p = PatternTerm::new(
            f("f", vec![s_pow(1, v(0)), v(1)]),
            Substitution::from_pairs([(Var(0), s_pow(2, v(0)))]),
            Substitution::from_pairs([(Var(0), s_pow(1, v(2))), (Var(1), c("0"))]),
        );
        assert_eq!(
            upsilon(&p).unwrap(),
            Tree::App(
                ExtHead::Sym(Symbol::new("f", 2)),
                vec![pow(s1(), 2, 2, lift(&v(2))), lift(&c("0"))],
            )
        );
        let t = f("while", vec![v(0), v(1)]);
        assert_eq!(upsilon(&PatternTerm::lift(t.clone())).unwrap(), lift(&t));
        // p1 of the gt pair: gt(s^{1,1}(x), s^{1,0}(0))
        let p1 = PatternTerm::new(
            f("gt", vec![v(0), v(1)]),
            Substitution::from_pairs([(Var(0), s_pow(1, v(0))), (Var(1), s_pow(1, v(1)))]),
            Substitution::from_pairs([(Var(0), s_pow(1, v(0))), (Var(1), c("0"))]),
        );
        assert_eq!(
            upsilon(&p1).unwrap().to_string(),
            "gt(s^{1,1}(X0),s^{1,0}(0))"
        );
    }

    #[test]
    fn non_simple_pattern_term() {
        // σ(y) = cons(x, y): the context has a variable
        let p = PatternTerm::new(
            f("while", vec![v(0), v(1)]),
            Substitution::from_pairs([(Var(1), f("cons", vec![v(0), v(1)]))]),
            Substitution::from_pairs([(Var(1), c("nil"))]),
        );
        assert!(upsilon(&p).is_none());
    }

    #[test]
    fn upsilon_inv_example() {
        let theta = ExtSubst::from_pairs([
            (Var(0), lift(&s_pow(2, c("1")))),
            (
                Var(1),
                plain(
                    &s1(),
                    1,
                    pow(s1(), 2, 1, pow(s1(), 1, 2, plain(&s1(), 1, lift(&c("0"))))),
                ),
            ),
        ]);
        let ps = upsilon_inv(&theta).unwrap();
        assert_eq!(
            ps.sigma,
            Substitution::from_pairs([(Var(1), s_pow(3, v(1)))])
        );
        assert_eq!(
            ps.mu,
            Substitution::from_pairs([(Var(0), s_pow(2, c("1"))), (Var(1), s_pow(5, c("0")))])
        );
        for n in 0..6 {
            assert_eq!(ext_eval_subst(&theta, n), ps.eval(n));
        }
        let pure = ExtSubst::from_pairs([(Var(0), lift(&c("a")))]);
        let ps = upsilon_inv(&pure).unwrap();
        assert!(ps.sigma.is_empty());
        // a power strictly above a different power is not simple
        let nested =
            ExtSubst::from_pairs([(Var(0), pow(s1(), 1, 0, pow(f3(), 1, 0, lift(&c("0")))))]);
        assert!(upsilon_inv(&nested).is_none());
    }

    #[test]
    fn unify_identical_plain_terms() {
        let t = PatternTerm::lift(f("p", vec![v(0), c("0")]));
        let th = pattern_mgu(std::slice::from_ref(&t), std::slice::from_ref(&t)).unwrap();
        assert!(th.sigma.is_empty() && th.mu.is_empty());
    }

    pub(crate) fn unifier_example() -> (Vec<PatternTerm>, Vec<PatternTerm>) {
        let (x, y, z, x1, y1, x2, y2, z2, x3, y3) = (0, 1, 2, 3, 4, 5, 6, 7, 8, 9);
        let sub = |pairs: Vec<(u32, Term)>| {
            Substitution::from_pairs(pairs.into_iter().map(|(k, t)| (Var(k), t)))
        };
        let left = vec![
            PatternTerm::lift(f("gt", vec![v(x), v(y)])),
            PatternTerm::lift(f("add", vec![v(x), v(y), v(z)])),
            PatternTerm::lift(f("while", vec![v(z), s_pow(1, v(y))])),
        ];
        let right = vec![
            PatternTerm::new(
                f("gt", vec![v(x1), v(y1)]),
                sub(vec![(x1, s_pow(1, v(x1))), (y1, s_pow(1, v(y1)))]),
                sub(vec![(x1, s_pow(1, v(x1))), (y1, c("0"))]),
            ),
            PatternTerm::new(
                f("add", vec![v(x2), v(y2), v(z2)]),
                sub(vec![(y2, s_pow(1, v(y2))), (z2, s_pow(1, v(z2)))]),
                sub(vec![(y2, c("0")), (z2, v(x2))]),
            ),
            PatternTerm::lift(f("while", vec![v(x3), v(y3)])),
        ];
        (left, right)
    }

    #[test]
    fn unifier_of_loop_body() {
        let (left, right) = unifier_example();
        let th = pattern_mgu(&left, &right).unwrap();
        let sub = |pairs: Vec<(u32, Term)>| {
            Substitution::from_pairs(pairs.into_iter().map(|(k, t)| (Var(k), t)))
        };
        let rho = sub(vec![
            (0, s_pow(1, v(0))),
            (1, s_pow(1, v(1))),
            (2, s_pow(2, v(2))),
            (5, s_pow(1, v(5))),
            (8, s_pow(2, v(8))),
            (9, s_pow(1, v(9))),
        ]);
        let nu = sub(vec![
            (0, s_pow(1, v(3))),
            (1, c("0")),
            (2, s_pow(1, v(3))),
            (5, s_pow(1, v(3))),
            (8, s_pow(1, v(3))),
            (9, s_pow(1, c("0"))),
        ]);
        assert_eq!(th, PatternSubst::new(rho, nu));
    }

    #[test]
    fn natural_choice_is_incomplete() {
        let p = PatternTerm::new(
            f("f", vec![v(0)]),
            Substitution::from_pairs([(Var(0), s_pow(1, v(0)))]),
            Substitution::new(),
        );
        let q = PatternTerm::new(
            f("f", vec![v(0)]),
            Substitution::from_pairs([(Var(0), s_pow(2, v(0)))]),
            Substitution::from_pairs([(Var(0), v(1))]),
        );
        assert!(pattern_mgu(&[p], &[q]).is_none());
    }
}
