//! Contexts: terms with holes. A hole `□i` is the reserved variable
//! [`Var::hole`]`(i)`, so plugging is substitution of holes.

use std::fmt;

use thiserror::Error;

use crate::subst::Subst;
use crate::term::{Symbol, SymbolHead, Term, Tree, Var};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContextError {
    #[error("context must contain □1 and no variable, got {0}")]
    NotGround1(String),
    #[error("context {skeleton} has {holes} hole(s) but {args} argument(s) were given")]
    ArityMismatch {
        skeleton: String,
        holes: usize,
        args: usize,
    },
    #[error("context {0} must use exactly the holes □1..□m")]
    BadHoles(String),
}

/// A 1-context with no variable (an element of `χ^(1)`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundContext1 {
    skeleton: Term,
}

const HOLE: Var = Var::hole(1);

impl GroundContext1 {
    pub fn new(skeleton: Term) -> Result<Self, ContextError> {
        let mut has_hole = false;
        let mut other = false;
        skeleton.for_each_var(&mut |v| {
            if v == HOLE {
                has_hole = true
            } else {
                other = true
            }
        });
        if has_hole && !other {
            Ok(GroundContext1 { skeleton })
        } else {
            Err(ContextError::NotGround1(skeleton.to_string()))
        }
    }

    /// `s(□1)`-style context for a unary symbol.
    pub fn unary(sym: &str) -> Self {
        GroundContext1 {
            skeleton: Tree::App(Symbol::new(sym, 1), vec![Tree::Var(HOLE)]),
        }
    }

    pub fn skeleton(&self) -> &Term {
        &self.skeleton
    }

    /// `c(t)`: every occurrence of `□1` replaced by `t`.
    pub fn plug<H: SymbolHead>(&self, t: &Tree<H>) -> Tree<H> {
        self.skeleton
            .map_heads(&H::from_symbol)
            .replace_vars(&|v| (v == HOLE).then(|| t.clone()))
    }

    /// `c^n(t)`.
    pub fn plug_power<H: SymbolHead>(&self, n: usize, t: &Tree<H>) -> Tree<H> {
        (0..n).fold(t.clone(), |acc, _| self.plug(&acc))
    }

    /// `c^n` as a term over `Σ ∪ {□1}`; `c^0 = □1`.
    pub fn power(&self, n: usize) -> Term {
        self.plug_power(n, &Tree::Var(HOLE))
    }

    /// If `t = c(u)` return `u`.
    pub fn peel<'a, H: SymbolHead>(&self, t: &'a Tree<H>) -> Option<&'a Tree<H>> {
        let mut found = None;
        peel_into(&self.skeleton, t, &mut found).then_some(())?;
        found
    }

    /// Peel as many copies of `c` as possible: `t = c^b(u)` with `u` not of
    /// the form `c(_)`.
    pub fn peel_max<'a, H: SymbolHead>(&self, mut t: &'a Tree<H>) -> (usize, &'a Tree<H>) {
        let mut b = 0;
        while let Some(inner) = self.peel(t) {
            b += 1;
            t = inner;
        }
        (b, t)
    }

    /// Depth of the shallowest hole occurrence.
    fn hole_depth(&self) -> usize {
        shallowest_hole(&self.skeleton)
            .map(|p| p.len())
            .unwrap_or(0)
    }

    /// Write this context as `d^k` with `d` of minimal period.
    pub fn minimal_root(&self) -> (GroundContext1, usize) {
        match decompose_context(&self.skeleton) {
            Some(pair) => pair,
            None => (self.clone(), 1),
        }
    }

    pub fn is_minimal(&self) -> bool {
        self.minimal_root().1 == 1
    }
}

impl fmt::Display for GroundContext1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.skeleton)
    }
}

impl fmt::Debug for GroundContext1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn peel_into<'a, H: SymbolHead>(
    ctx: &Term,
    t: &'a Tree<H>,
    found: &mut Option<&'a Tree<H>>,
) -> bool {
    match ctx {
        Tree::Var(v) => {
            debug_assert_eq!(*v, HOLE);
            match found {
                Some(prev) => *prev == t,
                None => {
                    *found = Some(t);
                    true
                }
            }
        }
        Tree::App(f, cs) => match t {
            Tree::App(g, ts) => {
                g.as_symbol() == Some(f)
                    && cs.len() == ts.len()
                    && cs.iter().zip(ts).all(|(c, t)| peel_into(c, t, found))
            }
            Tree::Var(_) => false,
        },
    }
}

/// Path (argument indices) to the leftmost of the shallowest hole occurrences.
fn shallowest_hole(t: &Term) -> Option<Vec<usize>> {
    let mut level: Vec<(Vec<usize>, &Term)> = vec![(Vec::new(), t)];
    while !level.is_empty() {
        let mut next = Vec::new();
        for (path, node) in level {
            match node {
                Tree::Var(v) if *v == HOLE => return Some(path),
                Tree::Var(_) => {}
                Tree::App(_, args) => {
                    for (i, a) in args.iter().enumerate() {
                        let mut p = path.clone();
                        p.push(i);
                        next.push((p, a));
                    }
                }
            }
        }
        level = next;
    }
    None
}

fn subterm_at<'a>(t: &'a Term, path: &[usize]) -> &'a Term {
    path.iter().fold(t, |acc, &i| &acc.args()[i])
}

/// Replace, top-down, every subterm equal to `r` by `□1`.
fn abstract_occurrences(t: &Term, r: &Term) -> Term {
    if t == r {
        return Tree::Var(HOLE);
    }
    match t {
        Tree::Var(_) => t.clone(),
        Tree::App(f, args) => Tree::App(
            f.clone(),
            args.iter().map(|a| abstract_occurrences(a, r)).collect(),
        ),
    }
}

/// For a ground 1-context `big` (skeleton with `□1`), find `d` of minimal
/// period and the largest `k` with `big = d^k`.
fn decompose_context(big: &Term) -> Option<(GroundContext1, usize)> {
    let path = shallowest_hole(big)?;
    let depth = path.len();
    if depth == 0 {
        // `□1` itself is `c^0` for any `c`; there is no minimal root.
        return None;
    }
    for k in (1..=depth).rev() {
        if depth % k != 0 {
            continue;
        }
        let step = depth / k;
        let rest = subterm_at(big, &path[..step]);
        let cand = abstract_occurrences(big, rest);
        let Ok(d) = GroundContext1::new(cand) else {
            continue;
        };
        if d.hole_depth() == step && d.power(k) == *big {
            return Some((d, k));
        }
    }
    None
}

/// Decompose `t = c^a(filler)` with `c` a ground 1-context of minimal period
/// and `a` maximal. `filler` is typically a variable (recognising `σ(x) =
/// c^a(x)`); it may also be a ground term. Returns `None` when `t` is not of
/// that shape with `a ≥ 1` (for instance when the abstracted context still
/// contains a variable, as `cons(x,□1)` does).
pub fn decompose_power(t: &Term, filler: &Term) -> Option<(GroundContext1, usize)> {
    if t == filler {
        return None;
    }
    let big = abstract_occurrences(t, filler);
    GroundContext1::new(big.clone()).ok()?;
    decompose_context(&big)
}

/// An m-context over `Σ ∪ {□1..□m}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiContext {
    skeleton: Term,
    holes: usize,
}

impl MultiContext {
    /// Checks that exactly `□1..□m` occur for some `m`. Variables are allowed.
    pub fn new(skeleton: Term) -> Result<Self, ContextError> {
        let mut seen = std::collections::BTreeSet::new();
        skeleton.for_each_var(&mut |v| {
            if let Some(i) = v.hole_index() {
                seen.insert(i);
            }
        });
        let m = seen.len();
        if seen.iter().copied().eq(1..=m) {
            Ok(MultiContext { skeleton, holes: m })
        } else {
            Err(ContextError::BadHoles(skeleton.to_string()))
        }
    }

    /// As [`MultiContext::new`], additionally rejecting variables.
    pub fn new_ground(skeleton: Term) -> Result<Self, ContextError> {
        let c = MultiContext::new(skeleton)?;
        if c.has_variables() {
            return Err(ContextError::NotGround1(c.skeleton.to_string()));
        }
        Ok(c)
    }

    pub fn skeleton(&self) -> &Term {
        &self.skeleton
    }

    pub fn holes(&self) -> usize {
        self.holes
    }

    pub fn has_variables(&self) -> bool {
        let mut any = false;
        self.skeleton.for_each_var(&mut |v| any |= !v.is_hole());
        any
    }

    pub fn plug<H: SymbolHead>(&self, args: &[Tree<H>]) -> Result<Tree<H>, ContextError> {
        if args.len() != self.holes {
            return Err(ContextError::ArityMismatch {
                skeleton: self.skeleton.to_string(),
                holes: self.holes,
                args: args.len(),
            });
        }
        let lifted: Tree<H> = self.skeleton.map_heads(&H::from_symbol);
        Ok(lifted.replace_vars(&|v| v.hole_index().map(|i| args[i - 1].clone())))
    }

    /// The substitution `{□i ↦ args[i-1]}`.
    pub fn hole_subst(args: &[Term]) -> Subst<Symbol> {
        Subst::from_pairs(
            args.iter()
                .enumerate()
                .map(|(i, a)| (Var::hole(i + 1), a.clone())),
        )
    }
}

impl fmt::Display for MultiContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.skeleton)
    }
}

impl fmt::Debug for MultiContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::build::*;

    fn fc() -> GroundContext1 {
        GroundContext1::new(f("f", vec![hole(1), c("0"), hole(1)])).unwrap()
    }

    #[test]
    fn plug_multi_contexts() {
        let gt = MultiContext::new_ground(f("gt", vec![hole(1), hole(2)])).unwrap();
        assert_eq!(
            gt.plug(&[s_pow(1, v(0)), c("0")]).unwrap(),
            f("gt", vec![s_pow(1, v(0)), c("0")])
        );
        let id = MultiContext::new(hole(1)).unwrap();
        assert_eq!(id.plug(&[c("t")]).unwrap(), c("t"));
        assert!(matches!(
            gt.plug(&[c("t")]),
            Err(ContextError::ArityMismatch { .. })
        ));
        assert_eq!(fc().plug(&c("1")), f("f", vec![c("1"), c("0"), c("1")]));
    }

    #[test]
    fn bad_hole_sets_are_rejected() {
        assert!(MultiContext::new(f("g", vec![hole(2)])).is_err());
        assert!(MultiContext::new_ground(f("g", vec![hole(1), v(0)])).is_err());
        assert!(GroundContext1::new(f("cons", vec![v(0), hole(1)])).is_err());
        assert!(GroundContext1::new(c("0")).is_err());
    }

    #[test]
    fn powers() {
        let s = GroundContext1::unary("s");
        assert_eq!(s.plug_power(3, &c("0")), s_pow(3, c("0")));
        assert_eq!(s.power(0), hole(1));
        let one = c("1");
        let f1 = f("f", vec![one.clone(), c("0"), one.clone()]);
        assert_eq!(
            fc().plug_power(2, &one),
            f("f", vec![f1.clone(), c("0"), f1])
        );
    }

    #[test]
    fn peeling() {
        let s = GroundContext1::unary("s");
        assert_eq!(s.peel_max(&s_pow(3, v(0))), (3, &v(0)));
        assert_eq!(fc().peel(&f("f", vec![c("1"), c("0"), c("2")])), None);
        assert_eq!(
            fc().peel(&f("f", vec![c("1"), c("0"), c("1")])),
            Some(&c("1"))
        );
    }

    #[test]
    fn decompose_forced_shapes() {
        let s = GroundContext1::unary("s");
        assert_eq!(
            decompose_power(&s_pow(2, v(0)), &v(0)),
            Some((s.clone(), 2))
        );
        assert_eq!(decompose_power(&s_pow(1, c("0")), &c("0")), Some((s, 1)));
        // cons(x, □1) is not ground
        let lst = f("cons", vec![v(0), v(1)]);
        assert_eq!(decompose_power(&lst, &v(1)), None);
        assert_eq!(decompose_power(&v(0), &v(0)), None);
    }

    #[test]
    fn decompose_multi_hole_context() {
        let x = v(0);
        let t = fc().plug_power(3, &x);
        assert_eq!(decompose_power(&t, &x), Some((fc(), 3)));
        // g(s(□), s(□)) squared is not a power of a smaller context
        let g = GroundContext1::new(f("g", vec![s_pow(1, hole(1)), s_pow(1, hole(1))])).unwrap();
        assert_eq!(decompose_power(&g.plug_power(2, &x), &x), Some((g, 2)));
    }

    #[test]
    fn minimal_root_of_square() {
        let ss = GroundContext1::new(s_pow(2, hole(1))).unwrap();
        assert_eq!(ss.minimal_root(), (GroundContext1::unary("s"), 2));
        assert!(!ss.is_minimal());
        assert!(GroundContext1::unary("s").is_minimal());
    }
}
