use super::Expr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("variable x{index} at byte {offset} is out of range 1..={n}")]
    VariableOutOfRange {
        offset: usize,
        index: usize,
        n: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::VariableOutOfRange { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Option<(usize, Tok<'a>)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return None;
        }
        let start = self.pos;
        match bytes[start] {
            b'(' => {
                self.pos += 1;
                Some((start, Tok::Open))
            }
            b')' => {
                self.pos += 1;
                Some((start, Tok::Close))
            }
            _ => {
                while self.pos < bytes.len()
                    && !bytes[self.pos].is_ascii_whitespace()
                    && bytes[self.pos] != b'('
                    && bytes[self.pos] != b')'
                {
                    self.pos += 1;
                }
                Some((start, Tok::Atom(&self.src[start..self.pos])))
            }
        }
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    at: usize,
    n: usize,
    end: usize,
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn peek_offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let Some((off, tok)) = self.toks.get(self.at).cloned() else {
            return Err(syntax(self.end, "unexpected end of input"));
        };
        self.at += 1;
        match tok {
            Tok::Close => Err(syntax(off, "unexpected ')'")),
            Tok::Atom(a) => self.atom(off, a),
            Tok::Open => {
                let Some((op_off, Tok::Atom(op))) = self.toks.get(self.at).cloned() else {
                    return Err(syntax(self.peek_offset(), "expected operator after '('"));
                };
                self.at += 1;
                let node = match op {
                    "+" | "*" => {
                        let children = self.children()?;
                        if children.is_empty() {
                            return Err(syntax(op_off, format!("'{op}' needs at least one operand")));
                        }
                        if op == "+" {
                            Expr::Sum(children)
                        } else {
                            Expr::Product(children)
                        }
                    }
                    "neg" => {
                        let child = self.expr()?;
                        Expr::Neg(Box::new(child))
                    }
                    "^" => {
                        let base = self.expr()?;
                        let k_off = self.peek_offset();
                        let Some((_, Tok::Atom(k))) = self.toks.get(self.at).cloned() else {
                            return Err(syntax(k_off, "'^' expects an integer exponent"));
                        };
                        self.at += 1;
                        let k: u32 = k
                            .parse()
                            .map_err(|_| syntax(k_off, format!("invalid exponent '{k}'")))?;
                        if k == 0 {
                            return Err(syntax(k_off, "exponent must be >= 1"));
                        }
                        Expr::Pow(Box::new(base), k)
                    }
                    other => return Err(syntax(op_off, format!("unknown operator '{other}'"))),
                };
                match self.toks.get(self.at) {
                    Some((_, Tok::Close)) => {
                        self.at += 1;
                        Ok(node)
                    }
                    _ => Err(syntax(self.peek_offset(), "expected ')'")),
                }
            }
        }
    }

    fn children(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        while !matches!(self.toks.get(self.at), Some((_, Tok::Close)) | None) {
            out.push(self.expr()?);
        }
        Ok(out)
    }

    fn atom(&self, off: usize, a: &str) -> Result<Expr, ParseError> {
        if let Some(digits) = a.strip_prefix('x') {
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(syntax(off, format!("invalid variable '{a}'")));
            }
            let index: usize = digits
                .parse()
                .map_err(|_| syntax(off, format!("invalid variable '{a}'")))?;
            if index == 0 || index > self.n {
                return Err(ParseError::VariableOutOfRange {
                    offset: off,
                    index,
                    n: self.n,
                });
            }
            return Ok(Expr::Var(index - 1));
        }
        let looks_numeric = a
            .bytes()
            .next()
            .is_some_and(|b| b.is_ascii_digit() || b == b'-' || b == b'+' || b == b'.');
        match a.parse::<f64>() {
            Ok(v) if looks_numeric && v.is_finite() => Ok(Expr::Const(v)),
            _ => Err(syntax(off, format!("unexpected token '{a}'"))),
        }
    }
}

/// Parses the prefix form over variables `x1..=xn`.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr, ParseError> {
    let mut lexer = Lexer { src: text, pos: 0 };
    let mut toks = Vec::new();
    while let Some(t) = lexer.next() {
        toks.push(t);
    }
    let mut parser = Parser {
        toks,
        at: 0,
        n,
        end: text.len(),
    };
    let e = parser.expr()?;
    if parser.at != parser.toks.len() {
        return Err(syntax(parser.peek_offset(), "trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar_examples() {
        assert_eq!(
            parse_expr("(+ x1 x2)", 2).unwrap(),
            Expr::Sum(vec![Expr::Var(0), Expr::Var(1)])
        );
        assert_eq!(
            parse_expr("(+ (neg x1) (^ x2 2))", 2).unwrap(),
            Expr::Sum(vec![
                Expr::Neg(Box::new(Expr::Var(0))),
                Expr::Pow(Box::new(Expr::Var(1)), 2)
            ])
        );
        assert_eq!(
            parse_expr("(^ x1 1)", 1).unwrap(),
            Expr::Pow(Box::new(Expr::Var(0)), 1)
        );
        assert_eq!(parse_expr("  -2.5 ", 1).unwrap(), Expr::Const(-2.5));
    }

    #[test]
    fn reports_offsets() {
        let e = parse_expr("(+ x1 x3)", 2).unwrap_err();
        assert_eq!(
            e,
            ParseError::VariableOutOfRange {
                offset: 6,
                index: 3,
                n: 2
            }
        );
        assert_eq!(parse_expr("(+ x1", 2).unwrap_err().offset(), 5);
        assert_eq!(parse_expr("(% x1 x2)", 2).unwrap_err().offset(), 1);
        assert_eq!(parse_expr("(^ x1 0)", 2).unwrap_err().offset(), 6);
        assert_eq!(parse_expr("(^ x1 1.5)", 2).unwrap_err().offset(), 6);
        assert_eq!(parse_expr("x1 x2", 2).unwrap_err().offset(), 3);
        assert_eq!(parse_expr("x0", 2).unwrap_err().offset(), 0);
        assert_eq!(parse_expr("abc", 2).unwrap_err().offset(), 0);
        assert_eq!(parse_expr("", 2).unwrap_err().offset(), 0);
        assert_eq!(parse_expr("(+)", 2).unwrap_err().offset(), 1);
    }
}
