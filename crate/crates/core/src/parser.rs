//! Reader for the Prolog-like input format.
//!
//! ```text
//! program   ::= { clause | directive }
//! clause    ::= term [ ":-" term { "," term } ] "."
//! term      ::= VARIABLE | NAME [ "(" term { "," term } ")" ]
//! NAME      ::= [a-z][A-Za-z0-9_]* | [0-9]+
//! VARIABLE  ::= [A-Z_][A-Za-z0-9_]*
//! directive ::= "%query:" NAME [ "(" mode { "," mode } ")" ] [ "." ]   (until end of line)
//! mode      ::= "i"
//! ```
//!
//! `%mode:` is accepted as a synonym of `%query:`. Any other `%` starts a
//! comment running to the end of the line; `/* ... */` block comments are
//! skipped too. Every occurrence of `_` is a distinct fresh variable.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::program::{Mode, Program, QueryMode, Rule};
use crate::term::{Symbol, Term, Tree, Var, VarGen};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error(
        "{line}:{col}: symbol `{name}` used with arity {found} but earlier with arity {expected}"
    )]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        line: usize,
        col: usize,
    },
    #[error("{line}:{col}: unsupported mode `{mode}` (only `i` is supported)")]
    Mode {
        mode: String,
        line: usize,
        col: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Variable(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Directive(String),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(&c) = self.chars.peek() {
            let (line, col) = (self.line, self.col);
            let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, col });
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '%' => {
                    self.bump();
                    let mut text = String::new();
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        text.push(c);
                        self.bump();
                    }
                    let trimmed = text.trim_start();
                    for key in ["query:", "mode:"] {
                        if let Some(rest) = trimmed.strip_prefix(key) {
                            push(&mut out, Tok::Directive(rest.trim().to_string()));
                        }
                    }
                }
                '/' => {
                    self.bump();
                    if self.chars.peek() != Some(&'*') {
                        return Err(self.err("unexpected `/`"));
                    }
                    self.bump();
                    let mut prev = ' ';
                    loop {
                        match self.bump() {
                            None => return Err(self.err("unterminated block comment")),
                            Some('/') if prev == '*' => break,
                            Some(c) => prev = c,
                        }
                    }
                }
                '(' => {
                    self.bump();
                    push(&mut out, Tok::LParen)
                }
                ')' => {
                    self.bump();
                    push(&mut out, Tok::RParen)
                }
                ',' => {
                    self.bump();
                    push(&mut out, Tok::Comma)
                }
                '.' => {
                    self.bump();
                    push(&mut out, Tok::Dot)
                }
                ':' => {
                    self.bump();
                    if self.bump() != Some('-') {
                        return Err(ParseError::Syntax {
                            line,
                            col,
                            msg: "expected `:-`".into(),
                        });
                    }
                    push(&mut out, Tok::Neck)
                }
                c if c.is_ascii_alphanumeric() || c == '_' => {
                    let mut word = String::new();
                    let digits = c.is_ascii_digit();
                    while let Some(&c) = self.chars.peek() {
                        let ok = if digits {
                            c.is_ascii_digit()
                        } else {
                            c.is_ascii_alphanumeric() || c == '_'
                        };
                        if !ok {
                            break;
                        }
                        word.push(c);
                        self.bump();
                    }
                    let tok = if c.is_ascii_uppercase() || c == '_' {
                        Tok::Variable(word)
                    } else {
                        Tok::Name(word)
                    };
                    push(&mut out, tok)
                }
                other => return Err(self.err(format!("unexpected character `{other}`"))),
            }
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
    arities: BTreeMap<String, usize>,
    gen: VarGen,
    clause_vars: HashMap<String, Var>,
    var_names: BTreeMap<Var, String>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or(self.eof)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn declare(
        &mut self,
        name: &str,
        arity: usize,
        at: (usize, usize),
    ) -> Result<Symbol, ParseError> {
        match self.arities.get(name) {
            Some(&expected) if expected != arity => Err(ParseError::Arity {
                name: name.to_string(),
                expected,
                found: arity,
                line: at.0,
                col: at.1,
            }),
            _ => {
                self.arities.insert(name.to_string(), arity);
                Ok(Symbol::new(name, arity))
            }
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Variable(name)) => {
                self.pos += 1;
                if name == "_" {
                    return Ok(Tree::Var(self.gen.fresh()));
                }
                let v = match self.clause_vars.get(&name) {
                    Some(v) => *v,
                    None => {
                        let v = self.gen.fresh();
                        self.clause_vars.insert(name.clone(), v);
                        self.var_names.insert(v, name);
                        v
                    }
                };
                Ok(Tree::Var(v))
            }
            Some(Tok::Name(name)) => {
                self.pos += 1;
                let mut args = Vec::new();
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    args.push(self.term()?);
                    while self.peek() == Some(&Tok::Comma) {
                        self.pos += 1;
                        args.push(self.term()?);
                    }
                    self.expect(Tok::RParen, "`)` or `,`")?;
                }
                let sym = self.declare(&name, args.len(), at)?;
                Ok(Tree::App(sym, args))
            }
            _ => Err(self.err("expected a term")),
        }
    }

    fn clause(&mut self) -> Result<Rule, ParseError> {
        self.clause_vars.clear();
        let head = self.term()?;
        if head.is_var() {
            return Err(ParseError::Syntax {
                line: self.toks[self.pos - 1].line,
                col: self.toks[self.pos - 1].col,
                msg: "clause head must not be a variable".into(),
            });
        }
        let mut body = Vec::new();
        if self.peek() == Some(&Tok::Neck) {
            self.pos += 1;
            body.push(self.term()?);
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                body.push(self.term()?);
            }
        }
        self.expect(Tok::Dot, "`.` at end of clause")?;
        Ok(Rule::new(head, body))
    }
}

fn parse_directive(text: &str, line: usize, col: usize) -> Result<(String, Vec<Mode>), ParseError> {
    let syntax = |msg: &str| ParseError::Syntax {
        line,
        col,
        msg: format!("bad query directive `{text}`: {msg}"),
    };
    let body = text.trim().trim_end_matches('.').trim();
    let (name, modes) = match body.find('(') {
        None => (body, Vec::new()),
        Some(open) => {
            let inner = body[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| syntax("missing `)`"))?;
            let mut modes = Vec::new();
            for m in inner.split(',') {
                match m.trim() {
                    "i" => modes.push(Mode::Input),
                    other => {
                        return Err(ParseError::Mode {
                            mode: other.to_string(),
                            line,
                            col,
                        })
                    }
                }
            }
            (body[..open].trim(), modes)
        }
    };
    let first = name
        .chars()
        .next()
        .ok_or_else(|| syntax("missing predicate name"))?;
    if !(first.is_ascii_lowercase() || first.is_ascii_digit())
        || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
    {
        return Err(syntax("invalid predicate name"));
    }
    Ok((name.to_string(), modes))
}

/// Parse a program. Variable ids are unique across the whole program, so
/// distinct clauses never share a variable.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let eof = {
        let line = text.lines().count().max(1);
        let col = text
            .lines()
            .last()
            .map(|l| l.chars().count() + 1)
            .unwrap_or(1);
        (line, col)
    };
    let mut p = Parser {
        toks,
        pos: 0,
        eof,
        arities: BTreeMap::new(),
        gen: VarGen::default(),
        clause_vars: HashMap::new(),
        var_names: BTreeMap::new(),
    };
    let mut rules = Vec::new();
    let mut pending_queries = Vec::new();
    while let Some(tok) = p.peek().cloned() {
        match tok {
            Tok::Directive(text) => {
                let (line, col) = p.here();
                p.pos += 1;
                let (name, modes) = parse_directive(&text, line, col)?;
                pending_queries.push((name, modes, line, col));
            }
            _ => rules.push(p.clause()?),
        }
    }
    let mut queries = Vec::new();
    for (name, modes, line, col) in pending_queries {
        let predicate = p.declare(&name, modes.len(), (line, col))?;
        queries.push(QueryMode { predicate, modes });
    }
    let mut program = Program::from_rules(rules);
    program.queries = queries;
    program.var_names = p.var_names;
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const RUNNING: &str = "
        %query: while(i,i).
        while(X, Y) :- gt(X, Y), add(X, Y, Z), while(Z, s(Y)).
        gt(s(X), 0).
        gt(s(X), s(Y)) :- gt(X, Y).
        add(X, 0, X).
        add(X, s(Y), s(Z)) :- add(X, Y, Z).
        while(X, Y) :- le(X, Y).
        le(0, X).
        le(s(X), s(Y)) :- le(X, Y).
    ";

    #[test]
    fn single_fact() {
        let p = parse_program("p(X).").unwrap();
        assert_eq!(p.rules.len(), 1);
        assert!(p.rules[0].is_fact());
        assert_eq!(p.rules[0].head.to_string(), "p(X0)");
    }

    #[test]
    fn running_example_shape() {
        let p = parse_program(RUNNING).unwrap();
        assert_eq!(p.rules.len(), 8);
        assert_eq!(p.rules[0].body.len(), 3);
        assert_eq!(p.queries.len(), 1);
        assert_eq!(p.queries[0].to_string(), "while(i,i)");
        assert_eq!(p.head_relations().len(), 4);
        // clauses never share variables
        let v0 = p.rules[0].vars();
        assert!(p.rules[1..]
            .iter()
            .all(|r| r.vars().iter().all(|v| !v0.contains(v))));
    }

    #[test]
    fn arity_clash_names_symbol() {
        let err = parse_program("p(X) :- q(X,Y,Z). q(A).").unwrap_err();
        match err {
            ParseError::Arity {
                name,
                expected,
                found,
                ..
            } => {
                assert_eq!((name.as_str(), expected, found), ("q", 3, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_program("p(X) :- q(X\n").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }), "{err}");
        let err = parse_program("p(X).\nq(X) r.").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => assert_eq!((line, col), (2, 6)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn directives_and_comments() {
        let src = "% a comment\n%mode: f(i).\n/* block\n comment */ f(X) :- f(s(X)). % trailing\n%query: g.\n";
        let p = parse_program(src).unwrap();
        assert_eq!(p.queries.len(), 2);
        assert_eq!(p.queries[1].predicate, Symbol::new("g", 0));
        assert_eq!(p.rules.len(), 1);
        assert!(matches!(
            parse_program("%query: f(o).\nf(a)."),
            Err(ParseError::Mode { .. })
        ));
        assert!(matches!(
            parse_program("%query: f(i,i).\nf(a)."),
            Err(ParseError::Arity { .. })
        ));
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program("p(_, _).").unwrap();
        let vs = p.rules[0].vars();
        assert_eq!(vs.len(), 2);
    }
}
