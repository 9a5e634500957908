use crate::diag::{DiagKind, Diagnostic, Loc};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `"..."` identifier; may contain characters such as `-`.
    Quoted(String),
    Kw(Kw),
    Int(u64),
    /// Based literal (`16#00FF`, `2#1001`), always WORD.
    Based(u16),
    /// `%Xn` bit selector following a `.`.
    BitSel(u32),
    Assign,
    Arrow,
    Colon,
    Semi,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    DotDot,
    Dot,
    Eq,
    Neq,
    Amp,
    /// Arithmetic or ordering operator; rejected by the parser.
    Unsupported(&'static str),
    /// `//#ASSERT <text>;` line comment.
    Assert { text: String, text_loc: Loc },
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kw {
    Function,
    FunctionBlock,
    EndFunction,
    EndFunctionBlock,
    VarInput,
    VarOutput,
    VarInOut,
    Var,
    VarTemp,
    VarConfig,
    EndVar,
    Bool,
    Word,
    Array,
    Of,
    If,
    Then,
    Elsif,
    Else,
    EndIf,
    For,
    To,
    Do,
    EndFor,
    And,
    Or,
    Xor,
    Not,
    True,
    False,
    Old,
    Begin,
    Void,
}

impl Kw {
    fn lookup(word: &str) -> Option<Kw> {
        let up = word.to_ascii_uppercase();
        Some(match up.as_str() {
            "FUNCTION" => Kw::Function,
            "FUNCTION_BLOCK" => Kw::FunctionBlock,
            "END_FUNCTION" => Kw::EndFunction,
            "END_FUNCTION_BLOCK" => Kw::EndFunctionBlock,
            "VAR_INPUT" => Kw::VarInput,
            "VAR_OUTPUT" => Kw::VarOutput,
            "VAR_IN_OUT" => Kw::VarInOut,
            "VAR" => Kw::Var,
            "VAR_TEMP" => Kw::VarTemp,
            "VAR_CONFIG" => Kw::VarConfig,
            "END_VAR" => Kw::EndVar,
            "BOOL" => Kw::Bool,
            "WORD" => Kw::Word,
            "ARRAY" => Kw::Array,
            "OF" => Kw::Of,
            "IF" => Kw::If,
            "THEN" => Kw::Then,
            "ELSIF" => Kw::Elsif,
            "ELSE" => Kw::Else,
            "END_IF" => Kw::EndIf,
            "FOR" => Kw::For,
            "TO" => Kw::To,
            "DO" => Kw::Do,
            "END_FOR" => Kw::EndFor,
            "AND" => Kw::And,
            "OR" => Kw::Or,
            "XOR" => Kw::Xor,
            "NOT" => Kw::Not,
            "TRUE" => Kw::True,
            "FALSE" => Kw::False,
            "OLD" => Kw::Old,
            "BEGIN" => Kw::Begin,
            "VOID" => Kw::Void,
            _ => return None,
        })
    }

    pub fn is_reserved(word: &str) -> bool {
        Kw::lookup(word).is_some()
    }

    pub fn text(self) -> &'static str {
        match self {
            Kw::Function => "FUNCTION",
            Kw::FunctionBlock => "FUNCTION_BLOCK",
            Kw::EndFunction => "END_FUNCTION",
            Kw::EndFunctionBlock => "END_FUNCTION_BLOCK",
            Kw::VarInput => "VAR_INPUT",
            Kw::VarOutput => "VAR_OUTPUT",
            Kw::VarInOut => "VAR_IN_OUT",
            Kw::Var => "VAR",
            Kw::VarTemp => "VAR_TEMP",
            Kw::VarConfig => "VAR_CONFIG",
            Kw::EndVar => "END_VAR",
            Kw::Bool => "BOOL",
            Kw::Word => "WORD",
            Kw::Array => "ARRAY",
            Kw::Of => "OF",
            Kw::If => "IF",
            Kw::Then => "THEN",
            Kw::Elsif => "ELSIF",
            Kw::Else => "ELSE",
            Kw::EndIf => "END_IF",
            Kw::For => "FOR",
            Kw::To => "TO",
            Kw::Do => "DO",
            Kw::EndFor => "END_FOR",
            Kw::And => "AND",
            Kw::Or => "OR",
            Kw::Xor => "XOR",
            Kw::Not => "NOT",
            Kw::True => "TRUE",
            Kw::False => "FALSE",
            Kw::Old => "OLD",
            Kw::Begin => "BEGIN",
            Kw::Void => "VOID",
        }
    }
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Quoted(s) => format!("identifier `\"{s}\"`"),
            Tok::Kw(k) => k.text().to_string(),
            Tok::Int(n) => format!("literal {n}"),
            Tok::Based(w) => format!("literal 16#{w:04X}"),
            Tok::BitSel(b) => format!("%X{b}"),
            Tok::Assign => "`:=`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`<>`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Unsupported(op) => format!("`{op}`"),
            Tok::Assert { .. } => "assertion comment".into(),
            Tok::Eof => "end of file".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub loc: Loc,
    /// Length of the token in bytes, for location checks.
    pub len: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    text: &'a str,
    pos: usize,
    line: usize,
    col: usize,
    base: Loc,
}

/// Tokenises `text`. Locations are relative to `base` (pass `Loc::new(1, 1, 0)`
/// for a whole file).
pub fn lex(text: &str, base: Loc) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer { src: text.as_bytes(), text, pos: 0, line: base.line, col: base.column, base };
    let mut out = Vec::new();
    loop {
        lx.skip_trivia()?;
        let loc = lx.loc();
        let start = lx.pos;
        if lx.pos >= lx.src.len() {
            out.push(Token { tok: Tok::Eof, loc, len: 0 });
            return Ok(out);
        }
        let tok = lx.token(loc)?;
        out.push(Token { tok, loc, len: lx.pos - start });
    }
}

impl<'a> Lexer<'a> {
    fn loc(&self) -> Loc {
        Loc::new(self.line, self.col, self.base.offset + self.pos)
    }

    fn peek(&self, ahead: usize) -> u8 {
        *self.src.get(self.pos + ahead).unwrap_or(&0)
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.pos];
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // count columns in characters, not continuation bytes
            self.col += 1;
        }
        c
    }

    fn err(&self, msg: impl Into<String>, loc: Loc) -> Diagnostic {
        Diagnostic::at(DiagKind::Lexical, msg, loc)
    }

    fn skip_trivia(&mut self) -> Result<(), Diagnostic> {
        loop {
            match self.peek(0) {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'/' if self.peek(1) == b'/' && !self.at_assert() => {
                    while self.pos < self.src.len() && self.peek(0) != b'\n' {
                        self.bump();
                    }
                }
                b'(' if self.peek(1) == b'*' => {
                    let loc = self.loc();
                    self.bump();
                    self.bump();
                    loop {
                        if self.pos >= self.src.len() {
                            return Err(self.err("unterminated block comment", loc));
                        }
                        if self.peek(0) == b'*' && self.peek(1) == b')' {
                            self.bump();
                            self.bump();
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn at_assert(&self) -> bool {
        self.text[self.pos..].starts_with("//#ASSERT")
    }

    fn token(&mut self, loc: Loc) -> Result<Tok, Diagnostic> {
        let c = self.peek(0);
        if self.at_assert() {
            for _ in 0.."//#ASSERT".len() {
                self.bump();
            }
            let text_loc = self.loc();
            let line_start = self.pos;
            while self.pos < self.src.len() && self.peek(0) != b'\n' {
                self.bump();
            }
            let line = self.text[line_start..self.pos].trim_end_matches('\r');
            return match line.find(';') {
                Some(end) => Ok(Tok::Assert { text: line[..end].to_string(), text_loc }),
                None => Err(Diagnostic::at(
                    DiagKind::Syntax,
                    "malformed assertion comment: missing terminating `;`",
                    loc,
                )),
            };
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.peek(0).is_ascii_alphanumeric() || self.peek(0) == b'_' {
                self.bump();
            }
            let word = &self.text[start..self.pos];
            return Ok(match Kw::lookup(word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            });
        }
        if c == b'"' {
            self.bump();
            let start = self.pos;
            while self.pos < self.src.len() && self.peek(0) != b'"' && self.peek(0) != b'\n' {
                self.bump();
            }
            if self.peek(0) != b'"' {
                return Err(self.err("unterminated quoted identifier", loc));
            }
            let name = self.text[start..self.pos].to_string();
            self.bump();
            if name.is_empty() {
                return Err(self.err("empty quoted identifier", loc));
            }
            return Ok(Tok::Quoted(name));
        }
        if c.is_ascii_digit() {
            return self.number(loc);
        }
        if c == b'%' {
            self.bump();
            if !matches!(self.peek(0), b'X' | b'x') {
                return Err(self.err("expected `X` after `%` in bit selector", loc));
            }
            self.bump();
            let start = self.pos;
            while self.peek(0).is_ascii_digit() {
                self.bump();
            }
            if start == self.pos {
                return Err(self.err("bit selector `%X` needs a bit number", loc));
            }
            return self.text[start..self.pos]
                .parse()
                .map(Tok::BitSel)
                .map_err(|_| self.err("bit number too large", loc));
        }
        self.bump();
        Ok(match c {
            b':' if self.peek(0) == b'=' => {
                self.bump();
                Tok::Assign
            }
            b':' => Tok::Colon,
            b'=' if self.peek(0) == b'>' => {
                self.bump();
                Tok::Arrow
            }
            b'=' => Tok::Eq,
            b'<' if self.peek(0) == b'>' => {
                self.bump();
                Tok::Neq
            }
            b'<' | b'>' => {
                if self.peek(0) == b'=' {
                    self.bump();
                }
                Tok::Unsupported(if c == b'<' { "<" } else { ">" })
            }
            b';' => Tok::Semi,
            b',' => Tok::Comma,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b'.' if self.peek(0) == b'.' => {
                self.bump();
                Tok::DotDot
            }
            b'.' => Tok::Dot,
            b'&' => Tok::Amp,
            b'+' => Tok::Unsupported("+"),
            b'-' => Tok::Unsupported("-"),
            b'*' => Tok::Unsupported("*"),
            b'/' => Tok::Unsupported("/"),
            _ => {
                let ch = self.text[loc.offset - self.base.offset..].chars().next().unwrap_or('?');
                // step over the rest of a multi-byte character
                while self.pos < self.src.len() && self.src[self.pos] & 0xC0 == 0x80 {
                    self.bump();
                }
                return Err(self.err(format!("unexpected character `{ch}`"), loc));
            }
        })
    }

    fn number(&mut self, loc: Loc) -> Result<Tok, Diagnostic> {
        let start = self.pos;
        while self.peek(0).is_ascii_digit() || self.peek(0) == b'_' {
            self.bump();
        }
        let digits: String = self.text[start..self.pos].chars().filter(|c| *c != '_').collect();
        if self.peek(0) == b'#' {
            let base: u32 = match digits.as_str() {
                "2" => 2,
                "8" => 8,
                "16" => 16,
                other => return Err(self.err(format!("unsupported literal base {other}"), loc)),
            };
            self.bump();
            let vstart = self.pos;
            while self.peek(0).is_ascii_alphanumeric() || self.peek(0) == b'_' {
                self.bump();
            }
            let body: String = self.text[vstart..self.pos].chars().filter(|c| *c != '_').collect();
            if body.is_empty() {
                return Err(self.err("based literal needs digits", loc));
            }
            return u16::from_str_radix(&body, base)
                .map(Tok::Based)
                .map_err(|_| self.err(format!("invalid WORD literal `{}#{}`", digits, body), loc));
        }
        digits
            .parse()
            .map(Tok::Int)
            .map_err(|_| self.err("integer literal too large", loc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s, Loc::new(1, 1, 0)).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn keywords_are_case_insensitive() {
        assert_eq!(toks("end_if End_If"), vec![Tok::Kw(Kw::EndIf), Tok::Kw(Kw::EndIf), Tok::Eof]);
    }

    #[test]
    fn hex_literals_and_bit_selectors() {
        assert_eq!(
            toks("w.%X3 := 16#FF_FF"),
            vec![
                Tok::Ident("w".into()),
                Tok::Dot,
                Tok::BitSel(3),
                Tok::Assign,
                Tok::Based(0xFFFF),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn assertion_comment_is_a_token_but_plain_comments_are_not() {
        let t = toks("// hello\n//#ASSERT (var1 AND var2) = result;\n(* block *) x");
        assert_eq!(t.len(), 3);
        match &t[0] {
            Tok::Assert { text, text_loc } => {
                assert_eq!(text, " (var1 AND var2) = result");
                assert_eq!((text_loc.line, text_loc.column), (2, 10));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn assertion_without_semicolon_is_rejected() {
        let e = lex("//#ASSERT a AND b\n", Loc::new(1, 1, 0)).unwrap_err();
        assert!(e.message.contains("missing terminating `;`"));
    }

    #[test]
    fn quoted_identifiers_keep_hyphens() {
        assert_eq!(toks("\"SC-S_0\""), vec![Tok::Quoted("SC-S_0".into()), Tok::Eof]);
    }

    #[test]
    fn crlf_line_endings() {
        let t = lex("a\r\n  b", Loc::new(1, 1, 0)).unwrap();
        assert_eq!((t[1].loc.line, t[1].loc.column), (2, 3));
    }
}
