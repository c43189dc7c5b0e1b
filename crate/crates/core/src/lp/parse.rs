use std::collections::BTreeSet;

use super::{BodyLiteral, LpRule, Program};
use crate::error::{Error, Result};
use crate::logic::Name;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Directive(String),
    Not,
    Implies,
    Comma,
    Dot,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax { line, column, message: message.into() }
}

fn lex(text: &str) -> Result<(Vec<Token>, (usize, usize))> {
    let mut out = Vec::new();
    let mut end = (1, 1);
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (ln, col) = (li + 1, i + 1);
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: ln, column: col });
            match c {
                '%' => break,
                c if c.is_whitespace() => i += 1,
                ',' => {
                    push(&mut out, Tok::Comma);
                    i += 1;
                }
                '.' => {
                    push(&mut out, Tok::Dot);
                    i += 1;
                }
                ':' if chars.get(i + 1) == Some(&'-') => {
                    push(&mut out, Tok::Implies);
                    i += 2;
                }
                '#' | 'a'..='z' | 'A'..='Z' | '_' | '0'..='9' => {
                    let start = i;
                    i += 1;
                    while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..i].iter().collect();
                    let tok = if let Some(d) = word.strip_prefix('#') {
                        Tok::Directive(d.to_string())
                    } else if word == "not" {
                        Tok::Not
                    } else if crate::logic::is_identifier(&word) {
                        Tok::Ident(word)
                    } else {
                        return Err(syntax(ln, col, format!("invalid atom name `{word}`")));
                    };
                    push(&mut out, tok);
                }
                other => return Err(syntax(ln, col, format!("unexpected character `{other}`"))),
            }
        }
        end = (li + 1, chars.len() + 1);
    }
    Ok((out, end))
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.end, |t| (t.line, t.column))
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let (l, c) = self.here();
        syntax(l, c, message)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect_dot(&mut self) -> Result<()> {
        match self.peek() {
            Some(Token { tok: Tok::Dot, .. }) => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.error("expected `.`")),
        }
    }

    fn atom(&mut self, what: &str) -> Result<(String, usize, usize)> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(name), line, column }) => {
                let r = (name.clone(), *line, *column);
                self.pos += 1;
                Ok(r)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn literal(&mut self) -> Result<BodyLiteral> {
        if let Some(Token { tok: Tok::Not, line, column }) = self.peek().cloned() {
            self.pos += 1;
            return match self.peek() {
                Some(Token { tok: Tok::Ident(name), .. }) => {
                    let lit = BodyLiteral::neg(name);
                    self.pos += 1;
                    Ok(lit)
                }
                _ => Err(syntax(line, column, "dangling `not`: expected an atom after it")),
            };
        }
        let (name, _, _) = self.atom("a body literal")?;
        Ok(BodyLiteral::pos(&name))
    }
}

/// Parses `a :- b, not c.`, `a.`, `#open a.` and `#defined a.`; `%` starts a
/// comment. Directives take one or more comma-separated atoms.
pub fn parse_program(text: &str) -> Result<Program> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, pos: 0, end };
    let mut rules = Vec::new();
    let mut open: BTreeSet<Name> = BTreeSet::new();
    let mut defined: BTreeSet<Name> = BTreeSet::new();
    let mut heads: Vec<(Name, usize, usize)> = Vec::new();
    let mut open_at: Vec<(Name, usize, usize)> = Vec::new();

    while let Some(t) = p.peek().cloned() {
        match t.tok {
            Tok::Directive(d) => {
                p.pos += 1;
                let is_open = match d.as_str() {
                    "open" => true,
                    "defined" => false,
                    _ => return Err(syntax(t.line, t.column, format!("unknown directive `#{d}`"))),
                };
                loop {
                    let (name, line, column) = p.atom("an atom name")?;
                    let set = if is_open { &mut open } else { &mut defined };
                    if !set.insert(Name::from(name.as_str())) {
                        return Err(Error::DuplicateDirective { name, line, column });
                    }
                    if is_open {
                        open_at.push((name.as_str().into(), line, column));
                    }
                    match p.peek() {
                        Some(Token { tok: Tok::Comma, .. }) => p.pos += 1,
                        _ => break,
                    }
                }
                p.expect_dot()?;
            }
            Tok::Ident(_) => {
                let (head, line, column) = p.atom("a rule head")?;
                let mut body = Vec::new();
                if let Some(Token { tok: Tok::Implies, .. }) = p.peek() {
                    p.pos += 1;
                    body.push(p.literal()?);
                    while let Some(Token { tok: Tok::Comma, .. }) = p.peek() {
                        p.pos += 1;
                        body.push(p.literal()?);
                    }
                }
                p.expect_dot()?;
                heads.push((head.as_str().into(), line, column));
                rules.push(LpRule::new(&head, body));
            }
            _ => {
                let message = match t.tok {
                    Tok::Not => "unexpected `not`: expected a rule head or directive",
                    Tok::Implies => "unexpected `:-`: expected a rule head",
                    _ => "expected a rule head or directive",
                };
                p.next();
                return Err(syntax(t.line, t.column, message));
            }
        }
    }

    for (name, line, column) in open_at {
        if defined.contains(&name) || heads.iter().any(|(h, ..)| h == &name) {
            return Err(Error::Program(format!("`{name}` is declared open at {line}:{column} but is defined")));
        }
    }
    Program::new(rules, open, defined)
}
