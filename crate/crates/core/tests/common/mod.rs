//! Shared generators and fixtures for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use lpnt::context::GroundContext1;
use lpnt::pattern::PatternTerm;
use lpnt::program::Program;
use lpnt::simple::{lift, pow, ExtSubst, ExtTerm};
use lpnt::subst::Substitution;
use lpnt::term::build::*;
use lpnt::term::{Term, Tree, Var};
use proptest::prelude::*;
use proptest::strategy::ValueTree;

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(format!("{name}.pl"))
}

pub fn corpus(name: &str) -> Program {
    let text = std::fs::read_to_string(corpus_path(name)).expect("corpus file");
    lpnt::parser::parse_program(&text).expect("corpus program parses")
}

/// Programs expected to be proven non-terminating.
pub const LOOPING: [&str; 5] = [
    "running_example",
    "while_lt",
    "gt_counter",
    "isnat_loop",
    "add_counter",
];

pub fn sub(pairs: Vec<(u32, Term)>) -> Substitution {
    Substitution::from_pairs(pairs.into_iter().map(|(x, t)| (Var(x), t)))
}

pub fn ground_term() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![Just(c("0")), Just(c("a"))];
    leaf.prop_recursive(2, 5, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| f("s", vec![t])),
            (inner.clone(), inner).prop_map(|(l, r)| f("g", vec![l, r])),
        ]
    })
}

/// A ground 1-context of depth 1 to 3.
pub fn ground_ctx() -> impl Strategy<Value = GroundContext1> {
    let step = prop_oneof![
        3 => Just(None),
        1 => (ground_term(), any::<bool>()).prop_map(Some),
    ];
    prop::collection::vec(step, 1..=3).prop_map(|steps| {
        let mut t = hole(1);
        for s in steps {
            t = match s {
                None => f("s", vec![t]),
                Some((g, true)) => f("g", vec![t, g]),
                Some((g, false)) => f("g", vec![g, t]),
            };
        }
        GroundContext1::new(t).expect("ground 1-context")
    })
}

/// A term over the variables `base..base+4`, of size at most 7.
pub fn open_term(base: u32) -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        4 => (base..base + 4).prop_map(v),
        1 => Just(c("0")),
        1 => Just(c("a")),
    ];
    leaf.prop_recursive(3, 7, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| f("s", vec![t])),
            (inner.clone(), inner.clone()).prop_map(|(l, r)| f("g", vec![l, r])),
            (inner.clone(), inner.clone(), inner).prop_map(|(x, y, z)| f("h", vec![x, y, z])),
        ]
    })
    .prop_filter("size at most 7", |t| t.size() <= 7)
}

/// How one skeleton variable is driven: `None` leaves it alone, otherwise
/// `σ(x) = c^a(x)` and `μ(x) = c^b(t)`.
type Entry = Option<(GroundContext1, usize, usize, Term)>;

fn filler(base: u32) -> impl Strategy<Value = Term> {
    prop_oneof![(base + 10..base + 14).prop_map(v), ground_term()]
}

fn entry(base: u32) -> impl Strategy<Value = Entry> {
    prop_oneof![
        1 => Just(None),
        3 => (ground_ctx(), 0..=3usize, 0..=3usize, filler(base)).prop_map(Some),
    ]
}

/// A simple pattern term over skeleton variables `base..base+4` and filler
/// variables `base+10..base+14`.
pub fn simple_pattern_term(base: u32) -> impl Strategy<Value = PatternTerm> {
    (open_term(base), prop::collection::vec(entry(base), 4))
        .prop_map(move |(s, entries)| drive(&s, base, entries))
}

fn drive(s: &Term, base: u32, entries: Vec<Entry>) -> PatternTerm {
    let mut sigma = Substitution::new();
    let mut mu = Substitution::new();
    for (i, e) in entries.into_iter().enumerate() {
        let x = Var(base + i as u32);
        if let Some((ctx, a, b, t)) = e {
            if a > 0 {
                sigma.insert(x, ctx.plug_power(a, &Tree::Var(x)));
            }
            mu.insert(x, ctx.plug_power(b, &t));
        }
    }
    PatternTerm::new(s.clone(), sigma, mu)
}

/// Two variable-disjoint simple pattern terms over the same skeleton shape,
/// so that they often unify.
pub fn simple_pattern_pair() -> impl Strategy<Value = (PatternTerm, PatternTerm)> {
    (
        open_term(0),
        prop::collection::vec(entry(0), 4),
        prop::collection::vec(entry(20), 4),
    )
        .prop_map(|(s, l, r)| {
            let shifted = s.rename(&(0..4).map(|i| (Var(i), Var(i + 20))).collect());
            (drive(&s, 0, l), drive(&shifted, 20, r))
        })
}

/// A binding of a simple extended substitution: plain, or `c^j(c^{a,b}(t))`.
fn ext_binding() -> impl Strategy<Value = ExtTerm> {
    prop_oneof![
        1 => filler(0).prop_map(|t| lift(&t)),
        3 => (ground_ctx(), 0..=3usize, 0..=3usize, filler(0), 0..=2usize)
            .prop_map(|(ctx, a, b, t, j)| ctx.plug_power(j, &pow(ctx.clone(), a, b, lift(&t)))),
    ]
}

/// A simple extended substitution over `X0..X3` with fillers in `X10..X13`.
pub fn simple_ext_subst() -> impl Strategy<Value = ExtSubst> {
    prop::collection::vec(prop::option::of(ext_binding()), 4).prop_map(|bs| {
        ExtSubst::from_pairs(
            bs.into_iter()
                .enumerate()
                .filter_map(|(i, b)| b.map(|b| (Var(i as u32), b))),
        )
    })
}

/// Images of the given variables, for comparing substitutions extensionally.
pub fn images(s: &Substitution, vars: impl IntoIterator<Item = Var>) -> Vec<Term> {
    vars.into_iter().map(|x| s.image(x)).collect()
}

/// Draw `count` values from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).expect("generate").current())
        .collect()
}
