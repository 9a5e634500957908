//! Textual frontend: the IL/ST-like source format and its inline
//! `//#ASSERT` comments.

mod lexer;
mod parser;
mod printer;

pub use lexer::{lex, Kw, Tok, Token};
pub use parser::{extract_assertions, parse_expression, parse_program, SourceFile};
pub use printer::{print_expr, print_program};

/// Whether `name` can be written without quotes.
pub fn is_plain_ident(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !Kw::is_reserved(name)
}
