//! Logic programs as ordered lists of rules, plus query-mode directives.

use std::collections::BTreeMap;
use std::fmt;

use crate::term::{Symbol, Term, Tree, Var, VarGen};

/// `(head, body)`. An empty body is a fact.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Term,
    pub body: Vec<Term>,
}

impl Rule {
    pub fn new(head: Term, body: Vec<Term>) -> Self {
        Rule { head, body }
    }

    pub fn fact(head: Term) -> Self {
        Rule {
            head,
            body: Vec::new(),
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    /// At most one body atom.
    pub fn is_binary(&self) -> bool {
        self.body.len() <= 1
    }

    pub fn terms(&self) -> impl Iterator<Item = &Term> {
        std::iter::once(&self.head).chain(self.body.iter())
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for t in self.terms() {
            for v in t.vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, b) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{b}")?;
            }
        }
        f.write_str(".")
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Mode {
    /// A ground term.
    Input,
}

/// A `%query: f(i,...,i).` directive.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QueryMode {
    pub predicate: Symbol,
    pub modes: Vec<Mode>,
}

impl fmt::Display for QueryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.predicate.name())?;
        if !self.modes.is_empty() {
            let flags: Vec<&str> = self.modes.iter().map(|_| "i").collect();
            write!(f, "({})", flags.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Program {
    pub rules: Vec<Rule>,
    /// name -> arity, for every symbol occurring in the program.
    pub symbols: BTreeMap<String, usize>,
    pub queries: Vec<QueryMode>,
    /// Source names of parsed variables, for display only.
    pub var_names: BTreeMap<Var, String>,
}

impl Program {
    pub fn from_rules(rules: Vec<Rule>) -> Self {
        let mut symbols = BTreeMap::new();
        for r in &rules {
            for t in r.terms() {
                t.for_each_symbol(&mut |s| {
                    symbols.insert(s.name().to_string(), s.arity());
                });
            }
        }
        Program {
            rules,
            symbols,
            queries: Vec::new(),
            var_names: BTreeMap::new(),
        }
    }

    /// Every symbol occurring in the program, in name order.
    pub fn signature(&self) -> Vec<Symbol> {
        self.symbols
            .iter()
            .map(|(n, a)| Symbol::new(n.as_str(), *a))
            .collect()
    }

    pub fn constants(&self) -> Vec<Symbol> {
        self.signature()
            .into_iter()
            .filter(|s| s.arity() == 0)
            .collect()
    }

    /// Constants in order of first occurrence in the source.
    pub fn constants_in_order(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for r in &self.rules {
            for t in r.terms() {
                t.for_each_symbol(&mut |s| {
                    if s.arity() == 0 && !out.contains(s) {
                        out.push(s.clone());
                    }
                });
            }
        }
        out
    }

    /// Distinct root symbols of rule heads.
    pub fn head_relations(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = Vec::new();
        for r in &self.rules {
            if let Some(s) = r.head.root() {
                if !out.contains(s) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// A generator whose fresh variables avoid every variable of the program.
    pub fn var_gen(&self) -> VarGen {
        VarGen::above(self.rules.iter().flat_map(|r| r.terms()))
    }

    pub fn rule_vars_max(&self) -> u32 {
        self.var_gen().peek()
    }

    /// `f(x1,...,xm)` with fresh distinct variables.
    pub fn generic_atom(sym: &Symbol, gen: &mut VarGen) -> Term {
        Tree::App(
            sym.clone(),
            (0..sym.arity()).map(|_| Tree::Var(gen.fresh())).collect(),
        )
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in &self.queries {
            writeln!(f, "%query: {q}.")?;
        }
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
