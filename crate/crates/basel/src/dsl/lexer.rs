//! Tokenizer for program source. Statements end at semicolons or at
//! newlines, but a newline only terminates a statement when it appears at
//! paren depth zero after a token that can end one — so definitions may wrap
//! their bodies across lines, as the usual listing style does.

use crate::diag::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(i64),
    // keywords
    Const,
    Lambda,
    Let,
    In,
    If,
    Else,
    And,
    Or,
    Not,
    Queue,
    Port,
    Buffer,
    Mark,
    Notify,
    NoneKw,
    // punctuation
    LParen,
    RParen,
    Comma,
    Dot,
    Assign,
    PlusAssign,
    Plus,
    Minus,
    Star,
    Slash,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    /// Statement separator (semicolon or significant newline).
    Sep,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier '{}'", s),
            Tok::Number(n) => format!("number {}", n),
            Tok::Sep => "end of statement".to_string(),
            Tok::Eof => "end of input".to_string(),
            other => format!("'{}'", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Const => "const",
            Tok::Lambda => "lambda",
            Tok::Let => "let",
            Tok::In => "in",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::And => "and",
            Tok::Or => "or",
            Tok::Not => "not",
            Tok::Queue => "Queue",
            Tok::Port => "Port",
            Tok::Buffer => "Buffer",
            Tok::Mark => "MARK",
            Tok::Notify => "NOTIFY",
            Tok::NoneKw => "NONE",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Assign => "=",
            Tok::PlusAssign => "+=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Lexeme {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "const" => Tok::Const,
        "lambda" => Tok::Lambda,
        "let" => Tok::Let,
        "in" => Tok::In,
        "if" => Tok::If,
        "else" => Tok::Else,
        "and" => Tok::And,
        "or" => Tok::Or,
        "not" => Tok::Not,
        "Queue" => Tok::Queue,
        "Port" => Tok::Port,
        "Buffer" => Tok::Buffer,
        "MARK" => Tok::Mark,
        "NOTIFY" => Tok::Notify,
        "NONE" => Tok::NoneKw,
        _ => return None,
    })
}

/// Can a statement end right after this token?
fn ends_statement(tok: &Tok) -> bool {
    matches!(
        tok,
        Tok::Ident(_) | Tok::Number(_) | Tok::RParen | Tok::Mark | Tok::Notify | Tok::NoneKw
    )
}

pub fn lex(src: &str) -> Result<Vec<Lexeme>, Diagnostic> {
    let mut out: Vec<Lexeme> = Vec::new();
    let mut depth: u32 = 0;
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = src.chars().peekable();

    macro_rules! push {
        ($tok:expr, $line:expr, $col:expr) => {
            out.push(Lexeme {
                tok: $tok,
                line: $line,
                col: $col,
            })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        match c {
            '\n' => {
                chars.next();
                if depth == 0 && out.last().map(|l| ends_statement(&l.tok)).unwrap_or(false) {
                    push!(Tok::Sep, tline, tcol);
                }
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '/' => {
                chars.next();
                if chars.peek() == Some(&'/') {
                    // line comment
                    for c in chars.by_ref() {
                        if c == '\n' {
                            if depth == 0
                                && out.last().map(|l| ends_statement(&l.tok)).unwrap_or(false)
                            {
                                push!(Tok::Sep, tline, tcol);
                            }
                            line += 1;
                            col = 1;
                            break;
                        }
                    }
                } else {
                    push!(Tok::Slash, tline, tcol);
                    col += 1;
                }
            }
            ';' => {
                chars.next();
                col += 1;
                // collapse repeated separators
                if !matches!(out.last().map(|l| &l.tok), Some(Tok::Sep) | None) {
                    push!(Tok::Sep, tline, tcol);
                }
            }
            '(' => {
                chars.next();
                depth += 1;
                col += 1;
                push!(Tok::LParen, tline, tcol);
            }
            ')' => {
                chars.next();
                depth = depth.saturating_sub(1);
                col += 1;
                push!(Tok::RParen, tline, tcol);
            }
            ',' => {
                chars.next();
                col += 1;
                push!(Tok::Comma, tline, tcol);
            }
            '.' => {
                chars.next();
                col += 1;
                push!(Tok::Dot, tline, tcol);
            }
            '*' => {
                chars.next();
                col += 1;
                push!(Tok::Star, tline, tcol);
            }
            '+' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::PlusAssign, tline, tcol);
                } else {
                    push!(Tok::Plus, tline, tcol);
                }
            }
            '-' => {
                chars.next();
                col += 1;
                push!(Tok::Minus, tline, tcol);
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::EqEq, tline, tcol);
                } else {
                    push!(Tok::Assign, tline, tcol);
                }
            }
            '<' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::Le, tline, tcol);
                } else {
                    push!(Tok::Lt, tline, tcol);
                }
            }
            '>' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::Ge, tline, tcol);
                } else {
                    push!(Tok::Gt, tline, tcol);
                }
            }
            '!' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push!(Tok::Ne, tline, tcol);
                } else {
                    return Err(Diagnostic::new(tline, tcol, "unexpected character '!'"));
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_digit() {
                        text.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let value: i64 = text.parse().map_err(|_| {
                    Diagnostic::new(tline, tcol, format!("number literal out of range: {}", text))
                })?;
                push!(Tok::Number(value), tline, tcol);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        word.push(d);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                match keyword(&word) {
                    Some(tok) => push!(tok, tline, tcol),
                    None => push!(Tok::Ident(word), tline, tcol),
                }
            }
            other => {
                return Err(Diagnostic::new(
                    tline,
                    tcol,
                    format!("unexpected character '{}'", other),
                ));
            }
        }
    }

    // trailing separator so the parser can always expect one after a statement
    if !matches!(out.last().map(|l| &l.tok), Some(Tok::Sep) | None) {
        push!(Tok::Sep, line, col);
    }
    push!(Tok::Eof, line, col);
    Ok(out)
}
