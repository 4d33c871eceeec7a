//! Tokenizer for `.bhv` sources. `#` starts a line comment.

use super::ast::{Diag, Span};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    If,
    Then,
    Else,
    RSelect,
    Monitor,
    Both,
    Attempt,
    FallbackOver,
    Cmp,
    Pure,
    True,
    False,
    Assign,   // =
    LParen,
    RParen,
    Comma,
    Semi,
    Question, // ?
    BindArrow, // <-
    Par,       // |||
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(n) => format!("identifier `{n}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            other => format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Ident(_) | Tok::Int(_) => "",
            Tok::If => "if",
            Tok::Then => "then",
            Tok::Else => "else",
            Tok::RSelect => "rSelect",
            Tok::Monitor => "monitor",
            Tok::Both => "both",
            Tok::Attempt => "attempt",
            Tok::FallbackOver => "fallbackOver",
            Tok::Cmp => "cmp",
            Tok::Pure => "pure",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Assign => "=",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Question => "?",
            Tok::BindArrow => "<-",
            Tok::Par => "|||",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, Diag> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let (start_line, start_col) = (line, col);
        let Some(&c) = chars.peek() else { break };
        let span1 = |l: u32, c0: u32, len: u32| Span {
            line: l,
            col: c0,
            end_line: l,
            end_col: c0 + len,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let len = word.len() as u32;
                let tok = match word.as_str() {
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "rSelect" => Tok::RSelect,
                    "monitor" => Tok::Monitor,
                    "both" => Tok::Both,
                    "attempt" => Tok::Attempt,
                    "fallbackOver" => Tok::FallbackOver,
                    "cmp" => Tok::Cmp,
                    "pure" => Tok::Pure,
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(word),
                };
                out.push(Token {
                    tok,
                    span: span1(start_line, start_col, len),
                });
            }
            '0'..='9' | '-' => {
                let negative = c == '-';
                if negative {
                    bump!();
                    if !chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                        return Err(Diag::new(
                            Span::at(start_line, start_col),
                            "`-` must be followed by digits",
                        ));
                    }
                }
                let mut digits = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        digits.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let value: i64 = digits.parse().map_err(|_| {
                    Diag::new(Span::at(start_line, start_col), "integer out of range")
                })?;
                let value = if negative { -value } else { value };
                out.push(Token {
                    tok: Tok::Int(value),
                    span: span1(start_line, start_col, digits.len() as u32),
                });
            }
            _ => {
                bump!();
                let two = |tok: Tok| Token {
                    tok,
                    span: span1(start_line, start_col, 2),
                };
                let one = |tok: Tok| Token {
                    tok,
                    span: span1(start_line, start_col, 1),
                };
                let token = match c {
                    '(' => one(Tok::LParen),
                    ')' => one(Tok::RParen),
                    ',' => one(Tok::Comma),
                    ';' => one(Tok::Semi),
                    '?' => one(Tok::Question),
                    '=' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            two(Tok::EqEq)
                        } else {
                            one(Tok::Assign)
                        }
                    }
                    '<' => match chars.peek() {
                        Some('-') => {
                            bump!();
                            two(Tok::BindArrow)
                        }
                        Some('=') => {
                            bump!();
                            two(Tok::Le)
                        }
                        _ => one(Tok::Lt),
                    },
                    '>' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            two(Tok::Ge)
                        } else {
                            one(Tok::Gt)
                        }
                    }
                    '!' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            two(Tok::Ne)
                        } else {
                            return Err(Diag::new(
                                Span::at(start_line, start_col),
                                "unexpected `!` (did you mean `!=`?)",
                            ));
                        }
                    }
                    '|' => {
                        if chars.peek() == Some(&'|') {
                            bump!();
                            if chars.peek() == Some(&'|') {
                                bump!();
                                Token {
                                    tok: Tok::Par,
                                    span: span1(start_line, start_col, 3),
                                }
                            } else {
                                return Err(Diag::new(
                                    Span::at(start_line, start_col),
                                    "unexpected `||` (parallel is spelled `|||`)",
                                ));
                            }
                        } else {
                            return Err(Diag::new(
                                Span::at(start_line, start_col),
                                "unexpected `|` (parallel is spelled `|||`)",
                            ));
                        }
                    }
                    other => {
                        return Err(Diag::new(
                            Span::at(start_line, start_col),
                            format!("unexpected character `{other}`"),
                        ))
                    }
                };
                out.push(token);
            }
        }
    }
    Ok(out)
}
