//! Parenthesised token trees with source positions. `;` starts a comment
//! running to the end of the line.

use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SyntaxError {
    /// `open` is the unclosed parenthesis, if that is what ran out.
    #[error("syntax error at end-of-input: {message}")]
    EndOfInput { message: String, open: Option<Pos> },
    #[error("syntax error at {pos}: {message}")]
    At { pos: Pos, message: String },
}

impl SyntaxError {
    pub fn at(pos: Pos, message: impl Into<String>) -> Self {
        SyntaxError::At { pos, message: message.into() }
    }

    /// Source line of the error; for end of input, the line of the
    /// unclosed parenthesis.
    pub fn line(&self) -> Option<usize> {
        match self {
            SyntaxError::At { pos, .. } => Some(pos.line),
            SyntaxError::EndOfInput { open, .. } => open.map(|p| p.line),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Sym { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Sym { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            Sexp::Sym { .. } => None,
        }
    }

    /// The head symbol of a nonempty list.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(Sexp::as_sym)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Sym(String),
}

struct Lexer<'a> {
    src: &'a str,
    offset: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, offset: 0, line: 1, col: 1 }
    }

    fn pos(&self) -> Pos {
        Pos { offset: self.offset, line: self.line, col: self.col }
    }

    fn bump(&mut self, c: char) {
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn next_token(&mut self) -> Option<(Tok, Pos)> {
        loop {
            let c = self.peek()?;
            if c.is_whitespace() {
                self.bump(c);
            } else if c == ';' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump(c);
                }
            } else {
                break;
            }
        }
        let start = self.pos();
        let c = self.peek()?;
        match c {
            '(' => {
                self.bump(c);
                Some((Tok::Open, start))
            }
            ')' => {
                self.bump(c);
                Some((Tok::Close, start))
            }
            _ => {
                let mut text = String::new();
                while let Some(c) = self.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    text.push(c);
                    self.bump(c);
                }
                Some((Tok::Sym(text), start))
            }
        }
    }
}

/// Reads every top-level expression in `src`.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, SyntaxError> {
    let mut lexer = Lexer::new(src);
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    while let Some((tok, pos)) = lexer.next_token() {
        match tok {
            Tok::Open => stack.push((pos, Vec::new())),
            Tok::Close => {
                let (open, items) = stack
                    .pop()
                    .ok_or_else(|| SyntaxError::at(pos, "unbalanced closing parenthesis"))?;
                let list = Sexp::List { items, pos: open };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => top.push(list),
                }
            }
            Tok::Sym(text) => {
                let sym = Sexp::Sym { text, pos };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(sym),
                    None => top.push(sym),
                }
            }
        }
    }
    if let Some((open, _)) = stack.last() {
        return Err(SyntaxError::EndOfInput {
            message: format!("unclosed parenthesis opened at {open}"),
            open: Some(*open),
        });
    }
    Ok(top)
}

/// Reads exactly one expression.
pub fn read_one(src: &str) -> Result<Sexp, SyntaxError> {
    let mut all = read_all(src)?;
    match all.len() {
        0 => Err(SyntaxError::EndOfInput { message: "expected an expression".into(), open: None }),
        1 => Ok(all.pop().unwrap()),
        _ => Err(SyntaxError::at(all[1].pos(), "trailing input after expression")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let s = read_one("(a (b c)\n  d)").unwrap();
        let items = s.as_list().unwrap();
        assert_eq!(items.len(), 3);
        assert_eq!(items[2].pos().line, 2);
        assert_eq!(items[2].pos().col, 3);
    }

    #[test]
    fn comments_are_skipped() {
        let all = read_all("; header\n(a) ; trailing\n(b)").unwrap();
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn unbalanced_input() {
        assert!(matches!(read_one("(B I"), Err(SyntaxError::EndOfInput { .. })));
        assert!(matches!(read_one("a)"), Err(SyntaxError::At { .. })));
    }
}
