//! Tokenizer for the Hamiltonian modeling language.

use super::SourceError;

#[derive(Clone, Debug, PartialEq)]
pub enum TokKind {
    Ident(String),
    Int(u64),
    Num(f64),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Dot,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub kind: TokKind,
    pub line: u32,
    pub col: u32,
    /// Byte span in the source text, used by the mutation-fuzz tests.
    pub start: usize,
    pub end: usize,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.kind {
            TokKind::Ident(s) => format!("identifier `{s}`"),
            TokKind::Int(v) => format!("integer `{v}`"),
            TokKind::Num(v) => format!("number `{v}`"),
            TokKind::LBrace => "`{`".into(),
            TokKind::RBrace => "`}`".into(),
            TokKind::LBracket => "`[`".into(),
            TokKind::RBracket => "`]`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::Semi => "`;`".into(),
            TokKind::Dot => "`.`".into(),
            TokKind::Plus => "`+`".into(),
            TokKind::Minus => "`-`".into(),
            TokKind::Star => "`*`".into(),
            TokKind::Slash => "`/`".into(),
            TokKind::Eof => "end of input".into(),
        }
    }
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, SourceError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;

    let push = |kind: TokKind, line: u32, col: u32, start: usize, end: usize, toks: &mut Vec<Token>| {
        toks.push(Token { kind, line, col, start, end });
    };

    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
            }
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '{' | '}' | '[' | ']' | '(' | ')' | ';' | '.' | '+' | '-' | '*' | '/' => {
                let kind = match c {
                    '{' => TokKind::LBrace,
                    '}' => TokKind::RBrace,
                    '[' => TokKind::LBracket,
                    ']' => TokKind::RBracket,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    ';' => TokKind::Semi,
                    '.' => TokKind::Dot,
                    '+' => TokKind::Plus,
                    '-' => TokKind::Minus,
                    '*' => TokKind::Star,
                    _ => TokKind::Slash,
                };
                push(kind, line, col, i, i + 1, &mut toks);
                i += 1;
                col += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                let start_col = col;
                let mut is_float = false;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                // A dot is part of the number only when followed by a digit;
                // `q[0].X` must keep its dot as punctuation.
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    is_float = true;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        is_float = true;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lexeme = &text[start..i];
                let kind = if is_float {
                    TokKind::Num(lexeme.parse().map_err(|_| SourceError {
                        message: format!("invalid number `{lexeme}`"),
                        line,
                        col: start_col,
                    })?)
                } else {
                    TokKind::Int(lexeme.parse().map_err(|_| SourceError {
                        message: format!("integer `{lexeme}` out of range"),
                        line,
                        col: start_col,
                    })?)
                };
                col += (i - start) as u32;
                push(kind, line, start_col, start, i, &mut toks);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                let start_col = col;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let lexeme = text[start..i].to_string();
                col += (i - start) as u32;
                push(TokKind::Ident(lexeme), line, start_col, start, i, &mut toks);
            }
            other => {
                return Err(SourceError {
                    message: format!("unexpected character `{other}`"),
                    line,
                    col,
                });
            }
        }
    }
    toks.push(Token { kind: TokKind::Eof, line, col, start: bytes.len(), end: bytes.len() });
    Ok(toks)
}
