use std::collections::BTreeMap;

use crate::logic::{Formula, Quantifier, Signature, Variable, DEFAULT_SORT};
use crate::{Error, Result};

/// Parses a formula from the concrete grammar and checks it against `sig`.
///
/// Grammar (UTF-8 text): keywords `exists` / `forall`, connectives `&`, `|`,
/// `!`, parentheses; quantifier form `exists x y z. BODY` binds a block and
/// its scope extends to the end of the current parenthesized group;
/// precedence `!` > `&` > `|`. Binders may carry a sort annotation `x:s`;
/// unannotated variables take their sort from the signature arity of the
/// atoms they occur in, defaulting to `U`.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let raw = p.parse_or()?;
    p.expect_end()?;
    let formula = resolve(&raw, sig)?;
    formula.validate(sig)?;
    Ok(formula)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Amp,
    Pipe,
    Bang,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '#' {
            // comment to end of line
            while let Some(&c) = chars.peek() {
                bump(&mut chars);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        let tok = match c {
            '(' => {
                bump(&mut chars);
                Tok::LParen
            }
            ')' => {
                bump(&mut chars);
                Tok::RParen
            }
            ',' => {
                bump(&mut chars);
                Tok::Comma
            }
            '.' => {
                bump(&mut chars);
                Tok::Dot
            }
            ':' => {
                bump(&mut chars);
                Tok::Colon
            }
            '&' => {
                bump(&mut chars);
                Tok::Amp
            }
            '|' => {
                bump(&mut chars);
                Tok::Pipe
            }
            '!' => {
                bump(&mut chars);
                Tok::Bang
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        name.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Tok::Ident(name)
            }
            other => return Err(syntax(tline, tcol, format!("unexpected character `{other}`"))),
        };
        out.push(Token {
            tok,
            line: tline,
            col: tcol,
        });
    }
    Ok(out)
}

/// AST before sort resolution; binders carry optional annotations.
#[derive(Debug)]
enum Raw {
    Atom {
        relation: String,
        args: Vec<String>,
        line: usize,
        col: usize,
    },
    Not(Box<Raw>),
    And(Box<Raw>, Box<Raw>),
    Or(Box<Raw>, Box<Raw>),
    Quant {
        q: Quantifier,
        vars: Vec<(String, Option<String>)>,
        body: Box<Raw>,
        line: usize,
        col: usize,
    },
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        self.peek()
            .map(|t| (t.line, t.col))
            .or_else(|| self.tokens.last().map(|t| (t.line, t.col + 1)))
            .unwrap_or((1, 1))
    }

    fn eat(&mut self, want: &Tok, what: &str) -> Result<Token> {
        match self.next() {
            Some(t) if &t.tok == want => Ok(t),
            Some(t) => Err(syntax(t.line, t.col, format!("expected {what}"))),
            None => {
                let (l, c) = self.here();
                Err(syntax(l, c, format!("expected {what}, found end of input")))
            }
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(syntax(t.line, t.col, "trailing input after formula")),
        }
    }

    fn parse_or(&mut self) -> Result<Raw> {
        let mut lhs = self.parse_and()?;
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Pipe)) {
            self.next();
            let rhs = self.parse_and()?;
            lhs = Raw::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Raw> {
        let mut lhs = self.parse_unary()?;
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Amp)) {
            self.next();
            let rhs = self.parse_unary()?;
            lhs = Raw::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Raw> {
        let (line, col) = self.here();
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Bang) => {
                self.next();
                Ok(Raw::Not(Box::new(self.parse_unary()?)))
            }
            Some(Tok::LParen) => {
                self.next();
                let inner = self.parse_or()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) if name == "exists" || name == "forall" => {
                self.next();
                let q = if name == "exists" {
                    Quantifier::Exists
                } else {
                    Quantifier::Forall
                };
                let mut vars = Vec::new();
                loop {
                    match self.peek().map(|t| t.tok.clone()) {
                        Some(Tok::Ident(v)) => {
                            self.next();
                            let sort = if matches!(self.peek().map(|t| &t.tok), Some(Tok::Colon)) {
                                self.next();
                                match self.next() {
                                    Some(Token {
                                        tok: Tok::Ident(s), ..
                                    }) => Some(s),
                                    _ => {
                                        let (l, c) = self.here();
                                        return Err(syntax(l, c, "expected sort after `:`"));
                                    }
                                }
                            } else {
                                None
                            };
                            if vars.iter().any(|(n, _)| n == &v) {
                                return Err(syntax(
                                    line,
                                    col,
                                    format!("duplicate variable `{v}` in quantifier block"),
                                ));
                            }
                            vars.push((v, sort));
                        }
                        Some(Tok::Dot) => {
                            self.next();
                            break;
                        }
                        _ => {
                            let (l, c) = self.here();
                            return Err(syntax(l, c, "expected variable or `.` in quantifier"));
                        }
                    }
                }
                if vars.is_empty() {
                    return Err(syntax(line, col, "quantifier binds no variables"));
                }
                // The body extends to the end of the current group.
                let body = self.parse_or()?;
                Ok(Raw::Quant {
                    q,
                    vars,
                    body: Box::new(body),
                    line,
                    col,
                })
            }
            Some(Tok::Ident(relation)) => {
                self.next();
                self.eat(&Tok::LParen, "`(` after relation symbol")?;
                let mut args = Vec::new();
                loop {
                    match self.next() {
                        Some(Token {
                            tok: Tok::Ident(v), ..
                        }) => args.push(v),
                        Some(t) => {
                            return Err(syntax(t.line, t.col, "expected variable in atom"))
                        }
                        None => {
                            let (l, c) = self.here();
                            return Err(syntax(l, c, "expected variable in atom"));
                        }
                    }
                    match self.next() {
                        Some(Token { tok: Tok::Comma, .. }) => continue,
                        Some(Token { tok: Tok::RParen, .. }) => break,
                        Some(t) => return Err(syntax(t.line, t.col, "expected `,` or `)`")),
                        None => {
                            let (l, c) = self.here();
                            return Err(syntax(l, c, "unterminated atom"));
                        }
                    }
                }
                Ok(Raw::Atom {
                    relation,
                    args,
                    line,
                    col,
                })
            }
            _ => Err(syntax(line, col, "expected formula")),
        }
    }
}

/// One binder instance (or one free-variable name) during sort resolution.
#[derive(Debug, Default)]
struct Slot {
    sort: Option<String>,
}

struct Resolver<'a> {
    sig: &'a Signature,
    slots: Vec<Slot>,
    /// free-variable name -> slot
    free: BTreeMap<String, usize>,
    /// slots created for binders, in depth-first creation order
    binder_slots: Vec<usize>,
}

impl<'a> Resolver<'a> {
    fn unify(&mut self, slot: usize, sort: &str, name: &str, line: usize, col: usize) -> Result<()> {
        match &self.slots[slot].sort {
            None => {
                self.slots[slot].sort = Some(sort.to_owned());
                Ok(())
            }
            Some(s) if s == sort => Ok(()),
            Some(s) => Err(syntax(
                line,
                col,
                format!("variable `{name}` used with conflicting sorts `{s}` and `{sort}`"),
            )),
        }
    }

    /// First pass: create slots and record every sort constraint.
    fn constrain(&mut self, raw: &Raw, scope: &mut Vec<(String, usize)>) -> Result<()> {
        match raw {
            Raw::Atom {
                relation,
                args,
                line,
                col,
            } => {
                let arity = self
                    .sig
                    .arity(relation)
                    .map_err(|_| syntax(*line, *col, format!("unknown relation symbol `{relation}`")))?
                    .to_vec();
                if arity.len() != args.len() {
                    return Err(Error::ArityMismatch {
                        relation: relation.clone(),
                        expected: arity.len(),
                        got: args.len(),
                    });
                }
                for (name, sort) in args.iter().zip(&arity) {
                    let slot = self.lookup(name, scope);
                    self.unify(slot, sort, name, *line, *col)?;
                }
                Ok(())
            }
            Raw::Not(f) => self.constrain(f, scope),
            Raw::And(l, r) | Raw::Or(l, r) => {
                self.constrain(l, scope)?;
                self.constrain(r, scope)
            }
            Raw::Quant {
                vars,
                body,
                line,
                col,
                ..
            } => {
                let depth = scope.len();
                for (name, ann) in vars {
                    let slot = self.slots.len();
                    self.slots.push(Slot::default());
                    self.binder_slots.push(slot);
                    if let Some(sort) = ann {
                        self.unify(slot, sort, name, *line, *col)?;
                    }
                    scope.push((name.clone(), slot));
                }
                self.constrain(body, scope)?;
                scope.truncate(depth);
                Ok(())
            }
        }
    }

    fn lookup(&mut self, name: &str, scope: &[(String, usize)]) -> usize {
        if let Some((_, slot)) = scope.iter().rev().find(|(n, _)| n == name) {
            return *slot;
        }
        if let Some(&slot) = self.free.get(name) {
            return slot;
        }
        let slot = self.slots.len();
        self.slots.push(Slot::default());
        self.free.insert(name.to_owned(), slot);
        slot
    }

    fn sort_of(&self, slot: usize) -> String {
        self.slots[slot]
            .sort
            .clone()
            .unwrap_or_else(|| DEFAULT_SORT.to_owned())
    }

}

fn resolve(raw: &Raw, sig: &Signature) -> Result<Formula> {
    let mut r = Resolver {
        sig,
        slots: Vec::new(),
        free: BTreeMap::new(),
        binder_slots: Vec::new(),
    };
    r.constrain(raw, &mut Vec::new())?;
    // Re-walk in the same depth-first order; binder slots replay in sequence.
    let mut next_binder = 0usize;
    Ok(rebuild(raw, &mut r, &mut next_binder, &mut Vec::new()))
}

fn rebuild(
    raw: &Raw,
    r: &mut Resolver,
    next_binder: &mut usize,
    scope: &mut Vec<(String, usize)>,
) -> Formula {
    match raw {
        Raw::Atom { relation, args, .. } => {
            let vars = args
                .iter()
                .map(|name| {
                    let slot = r.lookup(name, scope);
                    Variable::new(name.clone(), r.sort_of(slot))
                })
                .collect();
            Formula::atom(relation.clone(), vars)
        }
        Raw::Not(f) => Formula::not(rebuild(f, r, next_binder, scope)),
        Raw::And(l, r2) => Formula::and(
            rebuild(l, r, next_binder, scope),
            rebuild(r2, r, next_binder, scope),
        ),
        Raw::Or(l, r2) => Formula::or(
            rebuild(l, r, next_binder, scope),
            rebuild(r2, r, next_binder, scope),
        ),
        Raw::Quant { q, vars, body, .. } => {
            let depth = scope.len();
            let mut resolved = Vec::new();
            for (name, _) in vars {
                let slot = r.binder_slots[*next_binder];
                *next_binder += 1;
                resolved.push(Variable::new(name.clone(), r.sort_of(slot)));
                scope.push((name.clone(), slot));
            }
            let body = rebuild(body, r, next_binder, scope);
            scope.truncate(depth);
            Formula::quant(*q, resolved, body)
        }
    }
}
