//! Shared tokenizer for the fact-file and predicate-file formats.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Lowercase identifier: `[a-z][A-Za-z0-9_]*`.
    LIdent(String),
    /// Uppercase identifier (variables in predicate files).
    UIdent(String),
    Int(i64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Dot,
    /// The `:-` clause separator.
    ColonDash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LIdent(s) | Tok::UIdent(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBracket => write!(f, "["),
            Tok::RBracket => write!(f, "]"),
            Tok::LBrace => write!(f, "{{"),
            Tok::RBrace => write!(f, "}}"),
            Tok::Comma => write!(f, ","),
            Tok::Dot => write!(f, "."),
            Tok::ColonDash => write!(f, ":-"),
        }
    }
}

/// Source location, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct SpannedTok {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

/// Tokenizes `text`. `%` starts a comment running to end of line.
pub fn lex(text: &str) -> Result<Vec<SpannedTok>, LexError> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();

    macro_rules! bump {
        ($c:expr) => {
            if $c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
        };
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '%' => {
                while let Some(&c2) = chars.peek() {
                    chars.next();
                    bump!(c2);
                    if c2 == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {
                chars.next();
                bump!(c);
            }
            '(' | ')' | '[' | ']' | '{' | '}' | ',' | '.' => {
                chars.next();
                bump!(c);
                let tok = match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    _ => Tok::Dot,
                };
                out.push(SpannedTok { tok, pos });
            }
            ':' => {
                chars.next();
                bump!(':');
                match chars.peek() {
                    Some('-') => {
                        chars.next();
                        bump!('-');
                        out.push(SpannedTok {
                            tok: Tok::ColonDash,
                            pos,
                        });
                    }
                    _ => {
                        return Err(LexError {
                            pos,
                            msg: "expected `:-`".into(),
                        })
                    }
                }
            }
            '-' | '0'..='9' => {
                let mut s = String::new();
                if c == '-' {
                    s.push('-');
                    chars.next();
                    bump!('-');
                    if !matches!(chars.peek(), Some('0'..='9')) {
                        return Err(LexError {
                            pos,
                            msg: "expected digit after `-`".into(),
                        });
                    }
                }
                while let Some(&d @ '0'..='9') = chars.peek() {
                    s.push(d);
                    chars.next();
                    bump!(d);
                }
                let n: i64 = s.parse().map_err(|_| LexError {
                    pos,
                    msg: format!("integer out of range: {s}"),
                })?;
                out.push(SpannedTok {
                    tok: Tok::Int(n),
                    pos,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let upper = c.is_ascii_uppercase() || c == '_';
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        chars.next();
                        bump!(d);
                    } else {
                        break;
                    }
                }
                let tok = if upper { Tok::UIdent(s) } else { Tok::LIdent(s) };
                out.push(SpannedTok { tok, pos });
            }
            other => {
                return Err(LexError {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_fact_syntax() {
        let toks = lex("next(p11, p12). % tail\npos(srtl(p11,[1,2,3])).").unwrap();
        assert!(matches!(toks[0].tok, Tok::LIdent(ref s) if s == "next"));
        assert_eq!(toks[0].pos.line, 1);
        let pos_tok = toks.iter().find(|t| matches!(t.tok, Tok::LIdent(ref s) if s == "pos"));
        assert_eq!(pos_tok.unwrap().pos.line, 2);
    }

    #[test]
    fn rejects_stray_colon() {
        assert!(lex("a : b").is_err());
    }

    #[test]
    fn negative_ints() {
        let toks = lex("value(a, -3).").unwrap();
        assert!(toks.iter().any(|t| t.tok == Tok::Int(-3)));
    }
}
