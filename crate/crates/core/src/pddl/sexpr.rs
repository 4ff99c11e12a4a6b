//! Tokenizer and s-expression reader for PDDL sources.
//!
//! PDDL is case-insensitive, so every atom is lowercased on the way in.
//! Comments start with `;` and run to the end of the line.

use std::fmt;

use super::error::PddlError;

/// Line/column of a token, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexpr {
    Atom(String, Pos),
    List(Vec<Sexpr>, Pos),
}

impl Sexpr {
    pub fn pos(&self) -> Pos {
        match self {
            Sexpr::Atom(_, p) | Sexpr::List(_, p) => *p,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexpr::Atom(s, _) => Some(s),
            Sexpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexpr]> {
        match self {
            Sexpr::List(items, _) => Some(items),
            Sexpr::Atom(..) => None,
        }
    }

    /// Head keyword of a list, e.g. `and` for `(and ...)`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|l| l.first()).and_then(Sexpr::as_atom)
    }
}

impl fmt::Display for Sexpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexpr::Atom(s, _) => f.write_str(s),
            Sexpr::List(items, _) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Open(Pos),
    Close(Pos),
    Atom(String, Pos),
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut col = 0;
    let mut chars = text.chars().peekable();
    let mut current: Option<(String, Pos)> = None;

    let flush = |current: &mut Option<(String, Pos)>, tokens: &mut Vec<Token>| {
        if let Some((s, p)) = current.take() {
            tokens.push(Token::Atom(s.to_lowercase(), p));
        }
    };

    while let Some(c) = chars.next() {
        col += 1;
        match c {
            '\n' => {
                flush(&mut current, &mut tokens);
                line += 1;
                col = 0;
            }
            ';' => {
                flush(&mut current, &mut tokens);
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        col = 0;
                        break;
                    }
                }
            }
            '(' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Open(Pos { line, col }));
            }
            ')' => {
                flush(&mut current, &mut tokens);
                tokens.push(Token::Close(Pos { line, col }));
            }
            c if c.is_whitespace() => flush(&mut current, &mut tokens),
            c => match &mut current {
                Some((s, _)) => s.push(c),
                None => current = Some((c.to_string(), Pos { line, col })),
            },
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

/// Reads exactly one top-level s-expression; trailing non-whitespace is an error.
pub fn parse_sexpr(text: &str) -> Result<Sexpr, PddlError> {
    let tokens = tokenize(text);
    let mut stack: Vec<(Vec<Sexpr>, Pos)> = Vec::new();
    let mut result = None;
    for tok in tokens {
        if result.is_some() {
            let pos = match tok {
                Token::Open(p) | Token::Close(p) | Token::Atom(_, p) => p,
            };
            return Err(PddlError::syntax(pos, "unexpected content after top-level expression"));
        }
        match tok {
            Token::Open(p) => stack.push((Vec::new(), p)),
            Token::Close(p) => {
                let (items, open) = stack
                    .pop()
                    .ok_or_else(|| PddlError::syntax(p, "unbalanced ')'"))?;
                let list = Sexpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(list),
                    None => result = Some(list),
                }
            }
            Token::Atom(s, p) => match stack.last_mut() {
                Some((parent, _)) => parent.push(Sexpr::Atom(s, p)),
                None => result = Some(Sexpr::Atom(s, p)),
            },
        }
    }
    if let Some((_, open)) = stack.last() {
        return Err(PddlError::syntax(*open, "unclosed '('"));
    }
    result.ok_or_else(|| PddlError::syntax(Pos { line: 1, col: 1 }, "empty input"))
}
