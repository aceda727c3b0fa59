use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    OpAnd,
    OpNot,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub text: String,
    pub quoted: bool,
    pub kind: TokenKind,
    /// Character offset in the query; for implied operators, the offset of
    /// the keyword that follows.
    pub position: usize,
    /// True for an AND the tokenizer inserted between adjacent keywords.
    pub implicit: bool,
}

impl Token {
    fn keyword(text: String, quoted: bool, position: usize) -> Token {
        Token {
            text,
            quoted,
            kind: TokenKind::Keyword,
            position,
            implicit: false,
        }
    }

    fn op(kind: TokenKind, text: &str, position: usize, implicit: bool) -> Token {
        Token {
            text: text.to_owned(),
            quoted: false,
            kind,
            position,
            implicit,
        }
    }
}

/// Split a query into keywords and operators. Quoted spans are single
/// keywords; bare `and` / `not` are operators; an AND is implied between
/// adjacent keywords.
pub fn tokenize(query: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = query.chars().collect();
    let mut raw = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '"' {
            let start = i;
            let end = chars[i + 1..]
                .iter()
                .position(|&c| c == '"')
                .map(|p| p + i + 1)
                .ok_or_else(|| Error::Syntax {
                    position: start,
                    message: "unbalanced quote".into(),
                })?;
            let text: String = chars[start + 1..end].iter().collect();
            let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
            if !text.is_empty() {
                raw.push(Token::keyword(text, true, start));
            }
            i = end + 1;
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            raw.push(match text.to_lowercase().as_str() {
                "and" => Token::op(TokenKind::OpAnd, "and", start, false),
                "not" => Token::op(TokenKind::OpNot, "not", start, false),
                _ => Token::keyword(text, false, start),
            });
        }
    }

    let mut out: Vec<Token> = Vec::with_capacity(raw.len() * 2);
    for t in raw {
        let starts_operand = matches!(t.kind, TokenKind::Keyword | TokenKind::OpNot);
        if starts_operand && out.last().is_some_and(|p| p.kind == TokenKind::Keyword) {
            out.push(Token::op(TokenKind::OpAnd, "and", t.position, true));
        }
        out.push(t);
    }
    check_grammar(&out)?;
    Ok(out)
}

/// query := term (AND term)* ; term := NOT? keyword
fn check_grammar(tokens: &[Token]) -> Result<()> {
    let err = |t: &Token, m: &str| {
        Err(Error::Syntax {
            position: t.position,
            message: m.to_owned(),
        })
    };
    let mut expect_operand = true;
    let mut after_not = false;
    for t in tokens {
        match t.kind {
            TokenKind::Keyword => {
                if !expect_operand {
                    return err(t, "missing operator");
                }
                expect_operand = false;
                after_not = false;
            }
            TokenKind::OpNot => {
                if !expect_operand || after_not {
                    return err(t, "`not` must precede a single keyword");
                }
                after_not = true;
            }
            TokenKind::OpAnd => {
                if expect_operand {
                    return err(t, "`and` needs a keyword on both sides");
                }
                expect_operand = true;
            }
        }
    }
    if let Some(last) = tokens.last() {
        if expect_operand {
            return err(last, "query ends with an operator");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(q: &str) -> Vec<(TokenKind, String, bool)> {
        tokenize(q)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text, t.quoted))
            .collect()
    }

    #[test]
    fn explicit_and_implicit_conjunction() {
        use TokenKind::*;
        assert_eq!(
            shape("John and Mary"),
            [
                (Keyword, "John".into(), false),
                (OpAnd, "and".into(), false),
                (Keyword, "Mary".into(), false)
            ]
        );
        assert_eq!(shape("John Mary"), shape("John AND Mary"));
        let t = tokenize("John Mary").unwrap();
        assert!(t[1].implicit);
    }

    #[test]
    fn quotes_make_single_keywords() {
        use TokenKind::*;
        assert_eq!(
            shape("\"query optimization\" papers"),
            [
                (Keyword, "query optimization".into(), true),
                (OpAnd, "and".into(), false),
                (Keyword, "papers".into(), false)
            ]
        );
        assert_eq!(shape("\"not\"")[0], (Keyword, "not".into(), true));
    }

    #[test]
    fn negation() {
        use TokenKind::*;
        assert_eq!(
            shape("not running"),
            [(OpNot, "not".into(), false), (Keyword, "running".into(), false)]
        );
        let s = shape("John not running");
        assert_eq!(
            s.iter().map(|t| t.0).collect::<Vec<_>>(),
            [Keyword, OpAnd, OpNot, Keyword]
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match tokenize("John \"Mary") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 5),
            other => panic!("{other:?}"),
        }
        assert!(tokenize("and John").is_err());
        assert!(tokenize("John and").is_err());
        assert!(tokenize("not not John").is_err());
        assert!(tokenize("John not").is_err());
        assert!(tokenize("").unwrap().is_empty());
    }
}
