//! Substitutions: finite maps from variables to trees, with identity
//! bindings never stored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::term::{HeadDisplay, Query, Symbol, Term, Tree, Var, VarGen};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subst<H> {
    map: BTreeMap<Var, Tree<H>>,
}

/// Substitution over plain terms.
pub type Substitution = Subst<Symbol>;

impl<H> Default for Subst<H> {
    fn default() -> Self {
        Subst {
            map: BTreeMap::new(),
        }
    }
}

impl<H: Clone + Eq> Subst<H> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Tree<H>)>) -> Self {
        let mut s = Subst::new();
        for (x, t) in pairs {
            s.insert(x, t);
        }
        s
    }

    /// Bind `x` to `t`; a binding `x ↦ x` removes `x` from the domain.
    pub fn insert(&mut self, x: Var, t: Tree<H>) {
        if t.as_var() == Some(x) {
            self.map.remove(&x);
        } else {
            self.map.insert(x, t);
        }
    }

    pub fn get(&self, x: Var) -> Option<&Tree<H>> {
        self.map.get(&x)
    }

    /// `θ(x)`, which is `x` itself outside the domain.
    pub fn image(&self, x: Var) -> Tree<H> {
        self.map.get(&x).cloned().unwrap_or(Tree::Var(x))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, &Tree<H>)> {
        self.map.iter().map(|(v, t)| (*v, t))
    }

    pub fn domain(&self) -> BTreeSet<Var> {
        self.map.keys().copied().collect()
    }

    pub fn range_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for t in self.map.values() {
            t.for_each_var(&mut |v| {
                out.insert(v);
            });
        }
        out
    }

    /// `Dom ∪ Ran`.
    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = self.domain();
        out.extend(self.range_vars());
        out
    }

    pub fn apply(&self, t: &Tree<H>) -> Tree<H> {
        if self.map.is_empty() {
            return t.clone();
        }
        t.replace_vars(&|v| self.map.get(&v).cloned())
    }

    /// The composition `self · other`: first `self`, then `other`.
    pub fn compose(&self, other: &Subst<H>) -> Subst<H> {
        let mut out = Subst::new();
        for (x, t) in &self.map {
            out.insert(*x, other.apply(t));
        }
        for (x, t) in &other.map {
            if !self.map.contains_key(x) {
                out.insert(*x, t.clone());
            }
        }
        out
    }

    /// `self^n`, with `self^0` the identity.
    pub fn power(&self, n: usize) -> Subst<H> {
        let mut acc = Subst::new();
        for _ in 0..n {
            acc = acc.compose(self);
        }
        acc
    }

    /// Whether `xσθ = xθσ` for every variable. Variables outside both
    /// substitutions are fixed by either order, so only `Var(σ) ∪ Var(θ)`
    /// needs checking.
    pub fn commutes_with(&self, other: &Subst<H>) -> bool {
        let st = self.compose(other);
        let ts = other.compose(self);
        self.vars()
            .union(&other.vars())
            .all(|&x| st.image(x) == ts.image(x))
    }

    /// `Dom(θ) ∩ Ran(θ) = ∅`.
    pub fn is_idempotent(&self) -> bool {
        self.domain().is_disjoint(&self.range_vars())
    }

    /// Keep only the bindings of the given variables.
    pub fn restrict(&self, keep: &BTreeSet<Var>) -> Subst<H> {
        Subst {
            map: self
                .map
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, t)| (*v, t.clone()))
                .collect(),
        }
    }

    pub fn map_terms<H2: Clone + Eq>(&self, f: impl Fn(&Tree<H>) -> Tree<H2>) -> Subst<H2> {
        Subst::from_pairs(self.map.iter().map(|(v, t)| (*v, f(t))))
    }

    pub fn rename(&self, map: &HashMap<Var, Var>) -> Subst<H> {
        let r = |v: Var| *map.get(&v).unwrap_or(&v);
        Subst::from_pairs(self.map.iter().map(|(v, t)| (r(*v), t.rename(map))))
    }
}

impl Substitution {
    pub fn apply_query(&self, q: &Query) -> Query {
        Query(q.0.iter().map(|t| self.apply(t)).collect())
    }
}

impl<H: HeadDisplay> fmt::Display for Subst<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (x, t)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}↦{t}")?;
        }
        f.write_str("}")
    }
}

impl<H: HeadDisplay> fmt::Debug for Subst<H> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Rename every variable of `vars` to a fresh one, avoiding everything the
/// generator has handed out so far. Returns the renaming used.
pub fn fresh_renaming(vars: impl IntoIterator<Item = Var>, gen: &mut VarGen) -> HashMap<Var, Var> {
    let mut map = HashMap::new();
    for v in vars {
        if !v.is_hole() {
            map.entry(v).or_insert_with(|| gen.fresh());
        }
    }
    map
}

/// Rename a sequence of items apart from the generator's used range and from
/// each other. The returned renaming is a bijection from old to new variables.
pub fn rename_apart(items: &[Term], gen: &mut VarGen) -> (Vec<Term>, HashMap<Var, Var>) {
    let mut vars = Vec::new();
    for t in items {
        vars.extend(t.vars());
    }
    let map = fresh_renaming(vars, gen);
    (items.iter().map(|t| t.rename(&map)).collect(), map)
}

/// One-way matching: a substitution `η` over the variables of `pattern` with
/// `pattern η = target`, treating the variables of `target` as constants.
pub fn match_term<H: Clone + Eq>(pattern: &Tree<H>, target: &Tree<H>) -> Option<Subst<H>> {
    let mut bind: BTreeMap<Var, Tree<H>> = BTreeMap::new();
    if match_into(pattern, target, &mut bind) {
        Some(Subst::from_pairs(bind))
    } else {
        None
    }
}

fn match_into<H: Clone + Eq>(p: &Tree<H>, t: &Tree<H>, bind: &mut BTreeMap<Var, Tree<H>>) -> bool {
    match p {
        Tree::Var(x) => match bind.get(x) {
            Some(prev) => prev == t,
            None => {
                bind.insert(*x, t.clone());
                true
            }
        },
        Tree::App(h, ps) => match t {
            Tree::App(g, ts) if g == h && ps.len() == ts.len() => {
                ps.iter().zip(ts).all(|(p, t)| match_into(p, t, bind))
            }
            _ => false,
        },
    }
}

/// Whether `a` and `b` are equal up to a variable renaming.
pub fn is_variant<H: Clone + Eq>(a: &[&Tree<H>], b: &[&Tree<H>]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let pack = |ts: &[&Tree<H>]| -> Vec<Tree<H>> { ts.iter().map(|t| (*t).clone()).collect() };
    let (a, b) = (pack(a), pack(b));
    let both_ways = |x: &[Tree<H>], y: &[Tree<H>]| {
        let mut bind = BTreeMap::new();
        x.iter().zip(y).all(|(p, t)| match_into(p, t, &mut bind))
            && bind.values().all(Tree::is_var)
            && {
                let imgs: BTreeSet<_> = bind.values().filter_map(Tree::as_var).collect();
                imgs.len() == bind.len()
            }
    };
    both_ways(&a, &b) && both_ways(&b, &a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::build::*;

    fn x() -> Var {
        Var(0)
    }
    fn y() -> Var {
        Var(1)
    }

    #[test]
    fn apply_single_binding() {
        let th = Subst::from_pairs([(x(), c("0"))]);
        assert_eq!(
            th.apply(&f("f", vec![v(0), v(1)])),
            f("f", vec![c("0"), v(1)])
        );
        assert_eq!(Substitution::new().apply(&v(0)), v(0));
    }

    #[test]
    fn apply_running_example_binding() {
        // while(x,y){x↦s(x1), y↦0}
        let th = Subst::from_pairs([(x(), s_pow(1, v(5))), (y(), c("0"))]);
        assert_eq!(
            th.apply(&f("while", vec![v(0), v(1)])),
            f("while", vec![s_pow(1, v(5)), c("0")])
        );
    }

    #[test]
    fn identity_bindings_are_pruned() {
        let th = Subst::from_pairs([(x(), v(0)), (y(), c("0"))]);
        assert_eq!(th.domain().len(), 1);
    }

    #[test]
    fn compose_forced_by_definition() {
        let s = Subst::from_pairs([(x(), s_pow(1, v(0)))]);
        let t = Subst::from_pairs([(x(), c("0"))]);
        assert_eq!(s.compose(&t), Subst::from_pairs([(x(), s_pow(1, c("0")))]));
        assert_eq!(Substitution::new().compose(&t), t);
    }

    #[test]
    fn compose_prunes_cancelled_bindings() {
        let s = Subst::from_pairs([(x(), v(1))]);
        let t = Subst::from_pairs([(y(), v(0))]);
        let st = s.compose(&t);
        assert_eq!(st.get(x()), None);
        assert_eq!(st.image(y()), v(0));
    }

    #[test]
    fn commutation_examples() {
        let sx = Subst::from_pairs([(x(), s_pow(1, v(0)))]);
        let sy = Subst::from_pairs([(y(), s_pow(1, v(1)))]);
        assert!(sx.commutes_with(&sy));
        let zx = Subst::from_pairs([(x(), c("0"))]);
        assert!(!sx.commutes_with(&zx));
        let both = Subst::from_pairs([(x(), s_pow(1, v(0))), (y(), s_pow(1, v(1)))]);
        assert!(sx.commutes_with(&both));
    }

    #[test]
    fn power_iterates() {
        let s = Subst::from_pairs([(x(), s_pow(1, v(0)))]);
        assert_eq!(s.power(3).image(x()), s_pow(3, v(0)));
        assert!(s.power(0).is_empty());
    }

    #[test]
    fn rename_apart_gives_fresh_disjoint_copies() {
        let rule = f("gt", vec![s_pow(1, v(0)), c("0")]);
        let mut gen = VarGen::above([&rule]);
        let (a, _) = rename_apart(std::slice::from_ref(&rule), &mut gen);
        let (b, map) = rename_apart(std::slice::from_ref(&rule), &mut gen);
        assert!(a[0].var_set().is_disjoint(&rule.var_set()));
        assert!(a[0].var_set().is_disjoint(&b[0].var_set()));
        let back: HashMap<Var, Var> = map.iter().map(|(k, v)| (*v, *k)).collect();
        assert_eq!(b[0].rename(&back), rule);
    }

    #[test]
    fn matching_and_variants() {
        let p = f("p", vec![v(0), v(0)]);
        assert!(match_term(&p, &f("p", vec![c("a"), c("a")])).is_some());
        assert!(match_term(&p, &f("p", vec![c("a"), c("b")])).is_none());
        assert!(is_variant(&[&f("p", vec![v(0)])], &[&f("p", vec![v(3)])]));
        assert!(!is_variant(
            &[&f("p", vec![v(0)])],
            &[&f("p", vec![c("0")])]
        ));
        assert!(!is_variant(
            &[&f("p", vec![v(0), v(1)])],
            &[&f("p", vec![v(2), v(2)])]
        ));
    }
}
