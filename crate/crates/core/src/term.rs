//! First-order terms over a signature, generic in the kind of head symbol so
//! that plain terms and terms over the extended (power) signature share the
//! same machinery.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// A function symbol. Identity is the pair `(name, arity)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    name: Arc<str>,
    arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<Arc<str>>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }

    /// The special constant standing for the empty query.
    pub fn empty() -> Self {
        Symbol::new("ε", 0)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_empty_marker(&self) -> bool {
        self.arity == 0 && &*self.name == "ε"
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A variable. The top of the id space is reserved for context holes.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub u32);

const HOLE_BASE: u32 = u32::MAX - 1024;

impl Var {
    /// The hole `□i` (1-based), represented as a reserved variable.
    pub const fn hole(i: usize) -> Var {
        Var(u32::MAX - i as u32)
    }

    pub fn is_hole(self) -> bool {
        self.0 > HOLE_BASE
    }

    pub fn hole_index(self) -> Option<usize> {
        self.is_hole().then(|| (u32::MAX - self.0) as usize)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.hole_index() {
            Some(i) => write!(f, "□{i}"),
            None => write!(f, "X{}", self.0),
        }
    }
}

/// Monotone source of fresh variables, scoped to one proof session.
#[derive(Clone, Debug)]
pub struct VarGen {
    next: u32,
}

impl VarGen {
    pub fn starting_at(next: u32) -> Self {
        VarGen { next }
    }

    /// A generator whose variables never clash with those of `terms`.
    pub fn above<'a, H: 'a>(terms: impl IntoIterator<Item = &'a Tree<H>>) -> Self {
        let mut next = 0;
        for t in terms {
            t.for_each_var(&mut |v| {
                if !v.is_hole() {
                    next = next.max(v.0 + 1);
                }
            });
        }
        VarGen { next }
    }

    pub fn fresh(&mut self) -> Var {
        let v = Var(self.next);
        self.next += 1;
        assert!(self.next < HOLE_BASE, "variable space exhausted");
        v
    }

    pub fn peek(&self) -> u32 {
        self.next
    }

    /// Make sure later fresh variables are above every variable of `t`.
    pub fn reserve<H>(&mut self, t: &Tree<H>) {
        t.for_each_var(&mut |v| {
            if !v.is_hole() && v.0 >= self.next {
                self.next = v.0 + 1;
            }
        });
    }
}

impl Default for VarGen {
    fn default() -> Self {
        VarGen::starting_at(0)
    }
}

/// A term whose inner nodes are labelled by heads of type `H`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree<H> {
    Var(Var),
    App(H, Vec<Tree<H>>),
}

/// A first-order term over the program signature.
pub type Term = Tree<Symbol>;

impl<H> Tree<H> {
    pub fn var(v: Var) -> Self {
        Tree::Var(v)
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Tree::Var(v) => Some(*v),
            Tree::App(..) => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Tree::Var(_))
    }

    pub fn head(&self) -> Option<&H> {
        match self {
            Tree::Var(_) => None,
            Tree::App(h, _) => Some(h),
        }
    }

    pub fn args(&self) -> &[Tree<H>] {
        match self {
            Tree::Var(_) => &[],
            Tree::App(_, args) => args,
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(Var)) {
        match self {
            Tree::Var(v) => f(*v),
            Tree::App(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    /// Variables in order of first occurrence, without repetition.
    pub fn vars(&self) -> Vec<Var> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.for_each_var(&mut |v| {
            if seen.insert(v) {
                out.push(v)
            }
        });
        out
    }

    pub fn var_set(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.for_each_var(&mut |v| {
            out.insert(v);
        });
        out
    }

    pub fn contains_var(&self, x: Var) -> bool {
        match self {
            Tree::Var(v) => *v == x,
            Tree::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    /// No variable (holes count as variables here).
    pub fn is_ground(&self) -> bool {
        match self {
            Tree::Var(_) => false,
            Tree::App(_, args) => args.iter().all(Tree::is_ground),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Tree::Var(_) => 1,
            Tree::App(_, args) => 1 + args.iter().map(Tree::size).sum::<usize>(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Var(_) => 0,
            Tree::App(_, args) => 1 + args.iter().map(Tree::depth).max().unwrap_or(0),
        }
    }
}

impl<H: Clone> Tree<H> {
    pub fn map_heads<H2>(&self, f: &impl Fn(&H) -> H2) -> Tree<H2> {
        match self {
            Tree::Var(v) => Tree::Var(*v),
            Tree::App(h, args) => Tree::App(f(h), args.iter().map(|a| a.map_heads(f)).collect()),
        }
    }

    /// Replace variables through `f`; variables mapped to `None` stay.
    pub fn replace_vars(&self, f: &impl Fn(Var) -> Option<Tree<H>>) -> Tree<H> {
        match self {
            Tree::Var(v) => f(*v).unwrap_or_else(|| Tree::Var(*v)),
            Tree::App(h, args) => {
                Tree::App(h.clone(), args.iter().map(|a| a.replace_vars(f)).collect())
            }
        }
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Tree<H> {
        self.replace_vars(&|v| map.get(&v).map(|w| Tree::Var(*w)))
    }
}

impl Term {
    pub fn app(sym: Symbol, args: Vec<Term>) -> Term {
        debug_assert_eq!(sym.arity(), args.len());
        Tree::App(sym, args)
    }

    pub fn constant(name: &str) -> Term {
        Tree::App(Symbol::new(name, 0), Vec::new())
    }

    /// The empty query `ε`, used as right-hand side of binary rules.
    pub fn empty() -> Term {
        Tree::App(Symbol::empty(), Vec::new())
    }

    pub fn is_empty_marker(&self) -> bool {
        matches!(self, Tree::App(s, _) if s.is_empty_marker())
    }

    pub fn root(&self) -> Option<&Symbol> {
        self.head()
    }

    pub fn for_each_symbol(&self, f: &mut impl FnMut(&Symbol)) {
        if let Tree::App(s, args) = self {
            f(s);
            args.iter().for_each(|a| a.for_each_symbol(f));
        }
    }
}

/// Lets contexts (built over `Symbol`) be matched against and plugged into
/// trees with richer heads.
pub trait SymbolHead: Clone + Eq {
    fn from_symbol(s: &Symbol) -> Self;
    fn as_symbol(&self) -> Option<&Symbol>;
}

impl SymbolHead for Symbol {
    fn from_symbol(s: &Symbol) -> Self {
        s.clone()
    }
    fn as_symbol(&self) -> Option<&Symbol> {
        Some(self)
    }
}

/// Rendering of heads; unary chains of the same symbol stay expanded.
pub trait HeadDisplay {
    fn fmt_head(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result;
}

impl HeadDisplay for Symbol {
    fn fmt_head(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl<H: HeadDisplay> fmt::Display for Tree<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tree::Var(v) => write!(f, "{v}"),
            Tree::App(h, args) => {
                h.fmt_head(f)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl<H: HeadDisplay> fmt::Debug for Tree<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A query: a finite sequence of terms, the empty one being `ε`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Query(pub Vec<Term>);

impl Query {
    pub fn empty() -> Self {
        Query(Vec::new())
    }

    pub fn single(t: Term) -> Self {
        Query(vec![t])
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    pub fn first(&self) -> Option<&Term> {
        self.0.first()
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        f.write_str("⟨")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str("⟩")
    }
}

impl fmt::Debug for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rename the variables of `terms` to `X0, X1, ...` in order of first
/// occurrence. Two sequences are variants iff their canonical forms agree.
pub fn canonical<H: Clone>(terms: &[&Tree<H>]) -> Vec<Tree<H>> {
    let mut map = HashMap::new();
    for t in terms {
        t.for_each_var(&mut |v| {
            if !v.is_hole() {
                let n = map.len() as u32;
                map.entry(v).or_insert(Var(n));
            }
        });
    }
    terms.iter().map(|t| t.rename(&map)).collect()
}

/// Convenience constructors used throughout the tests and examples.
pub mod build {
    use super::*;

    pub fn f(name: &str, args: Vec<Term>) -> Term {
        Tree::App(Symbol::new(name, args.len()), args)
    }

    pub fn c(name: &str) -> Term {
        Term::constant(name)
    }

    pub fn v(id: u32) -> Term {
        Tree::Var(Var(id))
    }

    /// `s^n(t)`
    pub fn s_pow(n: usize, t: Term) -> Term {
        (0..n).fold(t, |acc, _| f("s", vec![acc]))
    }

    pub fn hole(i: usize) -> Term {
        Tree::Var(Var::hole(i))
    }
}
