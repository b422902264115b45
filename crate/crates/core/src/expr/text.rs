//! Infix text form for expression trees.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! additive := mul (('+' | '-') mul)*
//! mul      := unary (('*' | '/') unary)*
//! unary    := '-' unary | postfix
//! postfix  := primary ('^' '2')*
//! primary  := NUMBER | NAME | NAME '(' additive ')' | '(' additive ')'
//! ```
//!
//! `sqrt(...)` and `inv(...)` are the only functions. A chain of `+` (or
//! `*`) folds into one variadic node up to arity 5, then nests; `-` between
//! terms is binary subtraction; a leading `-` immediately before a numeric
//! literal folds into the constant. The formatter emits exactly the
//! parenthesization needed for `parse(format(t))` to rebuild `t`
//! structurally, including the variadic grouping.

use super::{Expr, Primitive, MAX_ARITY};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// Syntactic class of a rendered node, used for parenthesization decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Class {
    /// `Plus` / `Subtract`.
    Add,
    /// `Times` / `Divide`.
    Mul,
    /// Unary negation or a negative constant: starts with `-`.
    Neg,
    /// Everything that renders as a self-delimiting unit.
    Atom,
}

fn class(e: &Expr) -> Class {
    match e {
        Expr::Const(c) if c.is_sign_negative() => Class::Neg,
        Expr::Const(_) | Expr::Var(_) => Class::Atom,
        Expr::Op(p, _) => match p {
            Primitive::Plus | Primitive::Subtract => Class::Add,
            Primitive::Times | Primitive::Divide => Class::Mul,
            Primitive::Minus => Class::Neg,
            Primitive::Sqrt | Primitive::Square | Primitive::Inverse => Class::Atom,
        },
    }
}

pub(super) fn format_expr(e: &Expr, names: &[String]) -> String {
    let mut out = String::new();
    write_node(e, names, true, &mut out);
    out
}

/// `leftmost` is true when this node starts its enclosing parenthesis scope,
/// which is the only position where a leading `-` is unambiguous.
fn write_node(e: &Expr, names: &[String], leftmost: bool, out: &mut String) {
    match e {
        Expr::Const(c) => {
            debug_assert!(c.is_finite(), "non-finite constant in tree");
            out.push_str(&c.to_string());
        }
        Expr::Var(i) => match names.get(*i) {
            Some(n) => out.push_str(n),
            None => {
                out.push('x');
                out.push_str(&i.to_string());
            }
        },
        Expr::Op(p, kids) => write_op(*p, kids, names, leftmost, out),
    }
}

fn write_op(p: Primitive, kids: &[Expr], names: &[String], leftmost: bool, out: &mut String) {
    match p {
        Primitive::Plus => {
            for (k, c) in kids.iter().enumerate() {
                if k > 0 {
                    out.push_str(" + ");
                }
                // A bare leading Subtract re-folds into this chain exactly;
                // a bare leading Plus would merge arities, so it is wrapped.
                let bare = match class(c) {
                    Class::Atom | Class::Mul => true,
                    Class::Add => k == 0 && matches!(c, Expr::Op(Primitive::Subtract, _)),
                    Class::Neg => k == 0 && leftmost,
                };
                wrap(bare, c, names, k == 0 && leftmost, out);
            }
        }
        Primitive::Subtract => {
            let bare_l = class(&kids[0]) != Class::Neg || leftmost;
            wrap(bare_l, &kids[0], names, leftmost, out);
            out.push_str(" - ");
            let bare_r = matches!(class(&kids[1]), Class::Atom | Class::Mul);
            wrap(bare_r, &kids[1], names, false, out);
        }
        Primitive::Times => {
            for (k, c) in kids.iter().enumerate() {
                if k > 0 {
                    out.push('*');
                }
                // A bare leading Divide re-folds exactly; a bare leading
                // Times would merge arities.
                let bare = match class(c) {
                    Class::Atom => true,
                    Class::Mul => k == 0 && matches!(c, Expr::Op(Primitive::Divide, _)),
                    Class::Neg => k == 0 && leftmost,
                    Class::Add => false,
                };
                wrap(bare, c, names, k == 0 && leftmost, out);
            }
        }
        Primitive::Divide => {
            let bare_l = match class(&kids[0]) {
                Class::Atom | Class::Mul => true,
                Class::Neg => leftmost,
                Class::Add => false,
            };
            wrap(bare_l, &kids[0], names, leftmost, out);
            out.push('/');
            let bare_r = class(&kids[1]) == Class::Atom;
            wrap(bare_r, &kids[1], names, false, out);
        }
        Primitive::Minus => {
            out.push('-');
            // A bare literal would fold into the constant on re-parse, so
            // explicit negation of a constant keeps its parentheses.
            let bare = class(&kids[0]) == Class::Atom && !matches!(kids[0], Expr::Const(_));
            wrap(bare, &kids[0], names, false, out);
        }
        Primitive::Sqrt | Primitive::Inverse => {
            out.push_str(if p == Primitive::Sqrt { "sqrt(" } else { "inv(" });
            write_node(&kids[0], names, true, out);
            out.push(')');
        }
        Primitive::Square => {
            let bare = class(&kids[0]) == Class::Atom;
            wrap(bare, &kids[0], names, false, out);
            out.push_str("^2");
        }
    }
}

fn wrap(bare: bool, e: &Expr, names: &[String], leftmost_if_bare: bool, out: &mut String) {
    if bare {
        write_node(e, names, leftmost_if_bare, out);
    } else {
        out.push('(');
        write_node(e, names, true, out);
        out.push(')');
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

fn lex(src: &str) -> Result<Vec<(Tok<'_>, usize)>> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => toks.push((Tok::Plus, start)),
            b'-' => toks.push((Tok::Minus, start)),
            b'*' => toks.push((Tok::Star, start)),
            b'/' => toks.push((Tok::Slash, start)),
            b'^' => toks.push((Tok::Caret, start)),
            b'(' => toks.push((Tok::LParen, start)),
            b')' => toks.push((Tok::RParen, start)),
            b'0'..=b'9' | b'.' => {
                if b == b'.' && !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                    return Err(Error::parse(start, "unexpected character '.'"));
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
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
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::parse(start, format!("bad numeric literal '{text}'")))?;
                if !v.is_finite() {
                    return Err(Error::parse(
                        start,
                        format!("numeric literal '{text}' overflows"),
                    ));
                }
                toks.push((Tok::Num(v), start));
                continue;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(&src[start..i]), start));
                continue;
            }
            _ => {
                let c = src[start..].chars().next().unwrap_or('?');
                return Err(Error::parse(start, format!("unexpected character '{c}'")));
            }
        }
        i += 1;
    }
    toks.push((Tok::Eof, src.len()));
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok<'a>, usize)>,
    idx: usize,
    names: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok<'a> {
        &self.toks[self.idx].0
    }

    fn pos(&self) -> usize {
        self.toks[self.idx].1
    }

    fn bump(&mut self) -> Tok<'a> {
        let t = self.toks[self.idx].0.clone();
        if self.idx < self.toks.len() - 1 {
            self.idx += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(Error::parse(self.pos(), "expected ')'"))
        }
    }

    fn additive(&mut self) -> Result<Expr> {
        let mut acc = self.mul()?;
        // `chain` marks an accumulator this loop itself created, which may
        // keep absorbing terms up to the arity cap; a parenthesized Plus
        // from `primary` never absorbs.
        let mut chain = false;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.mul()?;
                    acc = match acc {
                        Expr::Op(Primitive::Plus, mut kids) if chain && kids.len() < MAX_ARITY => {
                            kids.push(rhs);
                            Expr::Op(Primitive::Plus, kids)
                        }
                        other => Expr::Op(Primitive::Plus, vec![other, rhs]),
                    };
                    chain = true;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.mul()?;
                    acc = Expr::Op(Primitive::Subtract, vec![acc, rhs]);
                    chain = false;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn mul(&mut self) -> Result<Expr> {
        let (mut acc, _) = self.unary()?;
        let mut chain = false;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let (rhs, _) = self.unary()?;
                    acc = match acc {
                        Expr::Op(Primitive::Times, mut kids)
                            if chain && kids.len() < MAX_ARITY =>
                        {
                            kids.push(rhs);
                            Expr::Op(Primitive::Times, kids)
                        }
                        other => Expr::Op(Primitive::Times, vec![other, rhs]),
                    };
                    chain = true;
                }
                Tok::Slash => {
                    self.bump();
                    let (rhs, _) = self.unary()?;
                    acc = Expr::Op(Primitive::Divide, vec![acc, rhs]);
                    chain = false;
                }
                _ => return Ok(acc),
            }
        }
    }

    /// Returns the expression and whether it is a bare numeric literal
    /// (eligible for minus-sign folding).
    fn unary(&mut self) -> Result<(Expr, bool)> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let (inner, bare_literal) = self.unary()?;
            if bare_literal {
                if let Expr::Const(c) = inner {
                    return Ok((Expr::Const(-c), false));
                }
            }
            return Ok((Expr::Op(Primitive::Minus, vec![inner]), false));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<(Expr, bool)> {
        let (mut e, mut bare_literal) = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            match self.peek() {
                Tok::Num(v) if *v == 2.0 => {
                    self.bump();
                }
                _ => return Err(Error::parse(self.pos(), "only '^2' is supported")),
            }
            e = Expr::Op(Primitive::Square, vec![e]);
            bare_literal = false;
        }
        Ok((e, bare_literal))
    }

    fn primary(&mut self) -> Result<(Expr, bool)> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok((Expr::Const(v), true)),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let p = match name {
                        "sqrt" => Primitive::Sqrt,
                        "inv" => Primitive::Inverse,
                        _ => {
                            return Err(Error::parse(pos, format!("unknown function '{name}'")))
                        }
                    };
                    self.bump();
                    let arg = self.additive()?;
                    self.expect_rparen()?;
                    Ok((Expr::Op(p, vec![arg]), false))
                } else {
                    match self.names.iter().position(|n| n == name) {
                        Some(i) => Ok((Expr::Var(i), false)),
                        None => Err(Error::parse(pos, format!("unknown variable '{name}'"))),
                    }
                }
            }
            Tok::LParen => {
                let e = self.additive()?;
                self.expect_rparen()?;
                Ok((e, false))
            }
            _ => Err(Error::parse(pos, "expected expression")),
        }
    }
}

/// Parses an expression in the infix grammar, resolving variable names by
/// position in `names`.
pub fn parse_expr(text: &str, names: &[String]) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        names,
    };
    let e = p.additive()?;
    if *p.peek() != Tok::Eof {
        return Err(Error::parse(p.pos(), "unexpected trailing input"));
    }
    e.validate()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::super::{random_model_tree, random_tree, MAX_COMPLEXITY};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    fn v(i: usize) -> Expr {
        Expr::Var(i)
    }

    fn op(p: Primitive, kids: Vec<Expr>) -> Expr {
        Expr::Op(p, kids)
    }

    #[test]
    fn formats_affine_model_exactly() {
        let t = op(
            Primitive::Plus,
            vec![c(-25.2334), op(Primitive::Times, vec![c(3.21666), v(0)])],
        );
        let ns = names(&["windGust2"]);
        assert_eq!(t.to_text(&ns), "-25.2334 + 3.21666*windGust2");
        assert_eq!(parse_expr(&t.to_text(&ns), &ns).unwrap(), t);
    }

    #[test]
    fn parses_variadic_chains_with_arity_cap() {
        let ns = names(&["a", "b", "c", "d", "e", "f", "g"]);
        let t = parse_expr("a + b + c + d + e", &ns).unwrap();
        assert_eq!(
            t,
            op(Primitive::Plus, vec![v(0), v(1), v(2), v(3), v(4)])
        );
        let t6 = parse_expr("a + b + c + d + e + f + g", &ns).unwrap();
        assert_eq!(
            t6,
            op(
                Primitive::Plus,
                vec![
                    op(Primitive::Plus, vec![v(0), v(1), v(2), v(3), v(4)]),
                    v(5),
                    v(6)
                ]
            )
        );
    }

    #[test]
    fn subtraction_is_left_associative_and_breaks_chains() {
        let ns = names(&["a", "b", "c"]);
        let t = parse_expr("a - b - c", &ns).unwrap();
        assert_eq!(
            t,
            op(
                Primitive::Subtract,
                vec![op(Primitive::Subtract, vec![v(0), v(1)]), v(2)]
            )
        );
        let mixed = parse_expr("a - b + c", &ns).unwrap();
        assert_eq!(
            mixed,
            op(
                Primitive::Plus,
                vec![op(Primitive::Subtract, vec![v(0), v(1)]), v(2)]
            )
        );
    }

    #[test]
    fn precedence_binds_mul_over_add_and_postfix_over_unary() {
        let ns = names(&["a", "b", "c"]);
        assert_eq!(
            parse_expr("a + b*c", &ns).unwrap(),
            op(
                Primitive::Plus,
                vec![v(0), op(Primitive::Times, vec![v(1), v(2)])]
            )
        );
        // Unary minus applies after postfix squaring: -a^2 == -(a^2).
        assert_eq!(
            parse_expr("-a^2", &ns).unwrap(),
            op(
                Primitive::Minus,
                vec![op(Primitive::Square, vec![v(0)])]
            )
        );
    }

    #[test]
    fn leading_minus_folds_into_literals_only() {
        let ns = names(&["a"]);
        assert_eq!(parse_expr("-3.5", &ns).unwrap(), c(-3.5));
        assert_eq!(parse_expr("-3.5e-2", &ns).unwrap(), c(-0.035));
        assert_eq!(
            parse_expr("-(3.5)", &ns).unwrap(),
            op(Primitive::Minus, vec![c(3.5)])
        );
        assert_eq!(
            parse_expr("-a", &ns).unwrap(),
            op(Primitive::Minus, vec![v(0)])
        );
        assert_eq!(
            parse_expr("-sqrt(a)", &ns).unwrap(),
            op(Primitive::Minus, vec![op(Primitive::Sqrt, vec![v(0)])])
        );
    }

    #[test]
    fn functions_and_squares_parse() {
        let ns = names(&["a"]);
        assert_eq!(
            parse_expr("inv(a)", &ns).unwrap(),
            op(Primitive::Inverse, vec![v(0)])
        );
        assert_eq!(
            parse_expr("a^2^2", &ns).unwrap(),
            op(
                Primitive::Square,
                vec![op(Primitive::Square, vec![v(0)])]
            )
        );
        assert_eq!(
            parse_expr("(a + 1)^2", &ns).unwrap(),
            op(
                Primitive::Square,
                vec![op(Primitive::Plus, vec![v(0), c(1.0)])]
            )
        );
    }

    #[test]
    fn parse_errors_carry_positions() {
        let ns = names(&["a"]);
        let cases = [
            ("a + ", 4usize),
            ("a $ 2", 2),
            ("foo(3)", 0),
            ("a + bogus", 4),
            ("a^3", 2),
            ("(a + 1", 6),
            ("a) ", 1),
        ];
        for (text, want_pos) in cases {
            match parse_expr(text, &ns) {
                Err(Error::Parse { position, .. }) => {
                    assert_eq!(position, want_pos, "for input {text:?}")
                }
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn negation_of_constants_round_trips() {
        let ns = names(&[]);
        for t in [
            c(-4.0),
            op(Primitive::Minus, vec![c(4.0)]),
            op(Primitive::Minus, vec![c(-4.0)]),
            op(Primitive::Times, vec![c(2.0), c(-3.0)]),
            op(Primitive::Subtract, vec![c(1.0), c(-3.0)]),
        ] {
            let text = t.to_text(&ns);
            assert_eq!(parse_expr(&text, &ns).unwrap(), t, "via {text:?}");
        }
    }

    #[test]
    fn random_trees_round_trip_exactly() {
        let ns = names(&["windGust2", "dewPoint", "hum", "t4"]);
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for i in 0..2500 {
            let t = if i % 2 == 0 {
                random_tree(&mut rng, ns.len(), 6, MAX_COMPLEXITY)
            } else {
                random_model_tree(&mut rng, ns.len(), MAX_COMPLEXITY)
            };
            let text = t.to_text(&ns);
            let back = parse_expr(&text, &ns)
                .unwrap_or_else(|e| panic!("reparse failed for {text:?}: {e}"));
            assert_eq!(back, t, "via {text:?}");
        }
    }

    #[test]
    fn nested_variadic_grouping_survives_round_trip() {
        let ns = names(&["a", "b", "c", "d", "e", "f", "g"]);
        // Plus(Plus(a,b,c,d,e), f, g) must not re-flatten into arity 7.
        let inner = op(Primitive::Plus, vec![v(0), v(1), v(2), v(3), v(4)]);
        let t = op(Primitive::Plus, vec![inner, v(5), v(6)]);
        let text = t.to_text(&ns);
        assert_eq!(text, "(a + b + c + d + e) + f + g");
        assert_eq!(parse_expr(&text, &ns).unwrap(), t);

        // Times(Divide(a,b), c) folds back from a bare chain.
        let t2 = op(
            Primitive::Times,
            vec![op(Primitive::Divide, vec![v(0), v(1)]), v(2)],
        );
        assert_eq!(t2.to_text(&ns), "a/b*c");
        assert_eq!(parse_expr("a/b*c", &ns).unwrap(), t2);
    }
}
