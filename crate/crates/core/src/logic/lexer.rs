//! Tokenizer shared by the formula, proof-script, theory and strategy readers.

use super::ParseError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Meta(String),
    Str(String),
    Op(&'static str),
    Newline,
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub offset: usize,
}

const OPS: &[&str] = &[
    "<->", "->", "/\\", "\\/", "(", ")", "{", "}", ",", ";", ".", "=", "*", ":",
];

fn unicode_alias(c: char) -> Option<Tok> {
    let tok = match c {
        '∈' => Tok::Word("in".into()),
        '⊂' | '⊆' => Tok::Word("subset".into()),
        '⊃' | '⊇' => Tok::Word("supset".into()),
        '¬' => Tok::Word("not".into()),
        '∀' => Tok::Word("forall".into()),
        '∃' => Tok::Word("exists".into()),
        '∧' => Tok::Op("/\\"),
        '∨' => Tok::Op("\\/"),
        '⇒' | '→' => Tok::Op("->"),
        '⇔' | '↔' => Tok::Op("<->"),
        '∘' => Tok::Op("∘"),
        '∪' => Tok::Op("∪"),
        '∩' => Tok::Op("∩"),
        _ => return None,
    };
    Some(tok)
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (offset, c) = chars[i];
        if c == '\n' {
            out.push(Token { tok: Tok::Newline, offset });
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        if c == '⁻' && chars.get(i + 1).map(|p| p.1) == Some('¹') {
            out.push(Token { tok: Tok::Op("⁻¹"), offset });
            i += 2;
            continue;
        }
        if let Some(tok) = unicode_alias(c) {
            out.push(Token { tok, offset });
            i += 1;
            continue;
        }
        if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => return Err(ParseError::new(offset, "unterminated string literal")),
                    Some((_, '"')) => {
                        i += 1;
                        break;
                    }
                    Some((_, '\\')) if chars.get(i + 1).is_some() => {
                        s.push(chars[i + 1].1);
                        i += 2;
                    }
                    Some((_, ch)) => {
                        s.push(*ch);
                        i += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), offset });
            continue;
        }
        if c == '?' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && is_ident_continue(chars[j].1) {
                j += 1;
            }
            if j == start {
                return Err(ParseError::new(offset, "expected meta-variable name after '?'"));
            }
            let name: String = chars[start..j].iter().map(|p| p.1).collect();
            out.push(Token { tok: Tok::Meta(name), offset });
            i = j;
            continue;
        }
        if is_ident_start(c) {
            let mut j = i;
            loop {
                match chars.get(j).map(|p| p.1) {
                    Some(ch) if is_ident_continue(ch) => j += 1,
                    // hyphenated labels such as Def-eq, but never the arrow "->"
                    Some('-') if chars.get(j + 1).is_some_and(|p| p.1.is_ascii_alphanumeric()) => j += 1,
                    _ => break,
                }
            }
            let word: String = chars[i..j].iter().map(|p| p.1).collect();
            out.push(Token { tok: Tok::Word(word), offset });
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let word: String = chars[i..j].iter().map(|p| p.1).collect();
            out.push(Token { tok: Tok::Word(word), offset });
            i = j;
            continue;
        }
        let rest = &text[offset..];
        match OPS.iter().find(|op| rest.starts_with(**op)) {
            Some(op) => {
                out.push(Token { tok: Tok::Op(op), offset });
                i += op.chars().count();
            }
            None => return Err(ParseError::new(offset, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Token { tok: Tok::Eof, offset: text.len() });
    Ok(out)
}
