use super::Diagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// Decimal digits, range-checked by the parser.
    Int(String),
    Str(String),
    Sym(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(s) => format!("integer {s}"),
            Tok::Str(_) => "string".into(),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: &[char] = &['(', ')', ',', '=', '/', '+', '-', '*', '^'];

/// Splits the text into tokens. `#` starts a comment running to the end of
/// the line; whitespace, including newlines, only separates tokens.
pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let advance = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        let (l0, c0) = (line, col);
        if c.is_whitespace() {
            chars.next();
            advance(c, &mut line, &mut col);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                advance(c, &mut line, &mut col);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !(c.is_ascii_alphanumeric() || c == '_') {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut line, &mut col);
            }
            out.push(Token { tok: Tok::Ident(s), line: l0, col: c0 });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                chars.next();
                advance(c, &mut line, &mut col);
            }
            out.push(Token { tok: Tok::Int(s), line: l0, col: c0 });
        } else if c == '"' {
            chars.next();
            advance(c, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.next() {
                    None | Some('\n') => {
                        return Err(Diagnostic::new(l0, c0, "unterminated string", &["'\"'"]));
                    }
                    Some('"') => {
                        advance('"', &mut line, &mut col);
                        break;
                    }
                    Some('\\') => {
                        advance('\\', &mut line, &mut col);
                        match chars.next() {
                            Some(e @ ('"' | '\\')) => {
                                advance(e, &mut line, &mut col);
                                s.push(e);
                            }
                            _ => {
                                return Err(Diagnostic::new(line, col, "unknown escape in string", &["'\\\"'", "'\\\\'"]));
                            }
                        }
                    }
                    Some(ch) => {
                        advance(ch, &mut line, &mut col);
                        s.push(ch);
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: l0, col: c0 });
        } else if SYMBOLS.contains(&c) {
            chars.next();
            advance(c, &mut line, &mut col);
            out.push(Token { tok: Tok::Sym(c), line: l0, col: c0 });
        } else {
            return Err(Diagnostic::new(
                l0,
                c0,
                format!("unexpected character {c:?}"),
                &["identifier", "integer", "string", "symbol"],
            ));
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
