//! Polynomial expressions and the plain-text polynomial file format.
//!
//! Expression grammar (`^` binds tighter than `*`, which binds tighter than
//! `+` and `-`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := '-' factor | atom ('^' uint)?
//! atom   := number | identifier | '(' expr ')'
//! ```
//!
//! A leading minus is read as `0 - factor`. Exponents are literal
//! non-negative integers.
//!
//! File format, one item per line, `#` starts a comment, blank lines are
//! ignored:
//!
//! ```text
//! vars x y z
//! <coeff> <e_x> <e_y> <e_z>
//! ```

use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::exponent::{Layout, MonomialOrder};
use crate::parmul::{mul, MulConfig};
use crate::poly::{canonicalize, PolySpace, Polynomial, VarTable};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Numeric literal, kept as text until the coefficient ring is known.
    Num(String),
    /// Index into the variable table.
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let lit = &text[start..i];
                if lit.matches('.').count() > 1 || lit == "." {
                    return Err(Error::Syntax {
                        pos: start,
                        msg: format!("malformed number `{lit}`"),
                    });
                }
                out.push((Tok::Num(lit.to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap();
                return Err(Error::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

/// Identifiers of `text` in order of first appearance.
pub fn variables_in(text: &str) -> Result<Vec<String>> {
    let mut names: Vec<String> = Vec::new();
    for (tok, _) in lex(text)? {
        if let Tok::Ident(name) = tok {
            if !names.contains(&name) {
                names.push(name);
            }
        }
    }
    Ok(names)
}

struct Parser<'v> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'v VarTable,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while *self.peek() == Tok::Star {
            self.bump();
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Sub(Box::new(Expr::Num("0".into())), Box::new(inner)));
        }
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        match self.peek().clone() {
            Tok::Num(lit) if lit.bytes().all(|b| b.is_ascii_digit()) => match lit.parse::<u32>() {
                Ok(n) => {
                    self.bump();
                    Ok(Expr::Pow(Box::new(base), n))
                }
                Err(_) => self.error(format!("exponent `{lit}` too large")),
            },
            _ => self.error("exponent must be a non-negative integer literal"),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(lit) => Ok(Expr::Num(lit)),
            Tok::Ident(name) => match self.vars.index_of(&name) {
                Some(i) => Ok(Expr::Var(i)),
                None => Err(Error::UnknownVariable { name, pos }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.error("expected `)`");
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(Error::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
            other => Err(Error::Syntax {
                pos,
                msg: format!("unexpected {other:?}"),
            }),
        }
    }
}

pub fn parse_expr(text: &str, vars: &VarTable) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

/// Upper bounds on the exponents an expression can produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeBounds {
    pub per_var: Vec<u64>,
    pub total: u64,
}

impl DegreeBounds {
    pub fn zero(nvars: usize) -> Self {
        DegreeBounds {
            per_var: vec![0; nvars],
            total: 0,
        }
    }

    /// Bounds of a product.
    pub fn plus(&self, other: &DegreeBounds) -> DegreeBounds {
        DegreeBounds {
            per_var: self
                .per_var
                .iter()
                .zip(&other.per_var)
                .map(|(a, b)| a.saturating_add(*b))
                .collect(),
            total: self.total.saturating_add(other.total),
        }
    }

    /// Bounds of a sum.
    pub fn max(&self, other: &DegreeBounds) -> DegreeBounds {
        DegreeBounds {
            per_var: self
                .per_var
                .iter()
                .zip(&other.per_var)
                .map(|(a, b)| *a.max(b))
                .collect(),
            total: self.total.max(other.total),
        }
    }

    fn times(&self, n: u32) -> DegreeBounds {
        DegreeBounds {
            per_var: self
                .per_var
                .iter()
                .map(|a| a.saturating_mul(n as u64))
                .collect(),
            total: self.total.saturating_mul(n as u64),
        }
    }

    pub fn layout(&self, order: MonomialOrder) -> Result<Layout> {
        Layout::for_degree_bounds(order, &self.per_var, self.total)
    }
}

impl Expr {
    pub fn num(v: i64) -> Expr {
        Expr::Num(v.to_string())
    }

    pub fn degree_bounds(&self, nvars: usize) -> DegreeBounds {
        match self {
            Expr::Num(_) => DegreeBounds::zero(nvars),
            Expr::Var(i) => {
                let mut d = DegreeBounds::zero(nvars);
                d.per_var[*i] = 1;
                d.total = 1;
                d
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.degree_bounds(nvars).max(&b.degree_bounds(nvars))
            }
            Expr::Mul(a, b) => a.degree_bounds(nvars).plus(&b.degree_bounds(nvars)),
            Expr::Pow(a, n) => a.degree_bounds(nvars).times(*n),
        }
    }
}

/// Evaluates an expression into a canonical polynomial. Powers are expanded
/// by repeated multiplication with the base, which for the sparse bases of
/// typical benchmarks costs far less than repeated squaring.
pub fn eval_expr<C: Coeff>(expr: &Expr, space: &Arc<PolySpace>) -> Result<Polynomial<C>> {
    let cfg = MulConfig::sequential();
    eval_with(expr, space, &cfg)
}

/// [`eval_expr`] with an explicit multiplication configuration.
pub fn eval_with<C: Coeff>(
    expr: &Expr,
    space: &Arc<PolySpace>,
    cfg: &MulConfig,
) -> Result<Polynomial<C>> {
    Ok(match expr {
        Expr::Num(lit) => {
            let c = C::parse_literal(lit).ok_or_else(|| Error::InvalidCoefficient(lit.clone()))?;
            Polynomial::constant(space, c)
        }
        Expr::Var(i) => Polynomial::variable(space, *i)?,
        Expr::Add(a, b) => eval_with::<C>(a, space, cfg)?.add(&eval_with(b, space, cfg)?)?,
        Expr::Sub(a, b) => eval_with::<C>(a, space, cfg)?.sub(&eval_with(b, space, cfg)?)?,
        Expr::Mul(a, b) => mul(&eval_with(a, space, cfg)?, &eval_with(b, space, cfg)?, cfg)?,
        Expr::Pow(a, n) => {
            let base = eval_with::<C>(a, space, cfg)?;
            let mut acc = Polynomial::constant(space, C::one());
            for _ in 0..*n {
                acc = mul(&acc, &base, cfg)?;
            }
            acc
        }
    })
}

/// Parses and evaluates `text` in `space`.
pub fn parse_poly_expr<C: Coeff>(text: &str, space: &Arc<PolySpace>) -> Result<Polynomial<C>> {
    eval_expr(&parse_expr(text, space.vars())?, space)
}

/// Parsed file contents before a layout has been chosen.
#[derive(Clone, Debug, PartialEq)]
pub struct RawPoly<C> {
    pub vars: VarTable,
    pub terms: Vec<(C, Vec<u32>)>,
    lines: Vec<usize>,
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(k) => &line[..k],
        None => line,
    }
}

impl<C: Coeff> RawPoly<C> {
    pub fn parse(text: &str) -> Result<RawPoly<C>> {
        let mut vars: Option<VarTable> = None;
        let mut terms = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw).trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let Some(table) = &vars else {
                if fields.next() != Some("vars") {
                    return Err(Error::Format {
                        line,
                        msg: "expected header `vars <name>...`".into(),
                    });
                }
                let table = VarTable::new(fields).map_err(|e| Error::Format {
                    line,
                    msg: e.to_string(),
                })?;
                vars = Some(table);
                continue;
            };
            let lit = fields.next().unwrap();
            let c = C::parse_literal(lit).ok_or_else(|| Error::Format {
                line,
                msg: format!("invalid coefficient `{lit}`"),
            })?;
            let exps = fields
                .map(|f| {
                    f.parse::<u32>().map_err(|_| Error::Format {
                        line,
                        msg: format!("invalid exponent `{f}`"),
                    })
                })
                .collect::<Result<Vec<u32>>>()?;
            if exps.len() != table.len() {
                return Err(Error::Format {
                    line,
                    msg: format!("expected {} exponents, got {}", table.len(), exps.len()),
                });
            }
            terms.push((c, exps));
            lines.push(line);
        }
        let vars = vars.ok_or(Error::Format {
            line: 1,
            msg: "missing `vars` header".into(),
        })?;
        Ok(RawPoly { vars, terms, lines })
    }

    pub fn degree_bounds(&self) -> DegreeBounds {
        let mut d = DegreeBounds::zero(self.vars.len());
        for (_, v) in &self.terms {
            for (m, &e) in d.per_var.iter_mut().zip(v) {
                *m = (*m).max(e as u64);
            }
            d.total = d.total.max(v.iter().map(|&e| e as u64).sum());
        }
        d
    }

    pub fn into_polynomial(self, space: &Arc<PolySpace>) -> Result<Polynomial<C>> {
        if *space.vars() != self.vars {
            return Err(Error::SpaceMismatch(format!(
                "file declares [{}], expected [{}]",
                self.vars.names().join(", "),
                space.vars().names().join(", ")
            )));
        }
        let mut packed = Vec::with_capacity(self.terms.len());
        for ((c, v), line) in self.terms.into_iter().zip(self.lines) {
            let e = space.pack(&v).map_err(|e| match e {
                Error::ExponentOverflow { .. } => e,
                other => Error::Format {
                    line,
                    msg: other.to_string(),
                },
            })?;
            packed.push((c, e));
        }
        Ok(canonicalize(space, packed))
    }
}

pub fn format_poly<C: Coeff>(p: &Polynomial<C>) -> String {
    let space = p.space();
    let layout = space.layout();
    let mut out = String::with_capacity(16 * (p.len() + 1));
    out.push_str("vars");
    for name in space.vars().names() {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for (c, e) in p.terms() {
        out.push_str(&c.to_string());
        for i in 0..layout.nvars() {
            out.push(' ');
            out.push_str(&layout.component(e, i).to_string());
        }
        out.push('\n');
    }
    out
}

/// Parses file contents into the given space.
pub fn parse_poly_in<C: Coeff>(text: &str, space: &Arc<PolySpace>) -> Result<Polynomial<C>> {
    RawPoly::parse(text)?.into_polynomial(space)
}

/// Parses file contents into a fresh space with an evenly split layout.
pub fn parse_poly<C: Coeff>(text: &str, order: MonomialOrder) -> Result<Polynomial<C>> {
    let raw = RawPoly::<C>::parse(text)?;
    let layout = Layout::even(order, raw.vars.len())?;
    let space = PolySpace::new(raw.vars.clone(), layout)?;
    raw.into_polynomial(&space)
}

pub fn read_raw<C: Coeff>(path: impl AsRef<Path>) -> Result<RawPoly<C>> {
    RawPoly::parse(&fs::read_to_string(path)?)
}

pub fn read_poly<C: Coeff>(path: impl AsRef<Path>, order: MonomialOrder) -> Result<Polynomial<C>> {
    parse_poly(&fs::read_to_string(path)?, order)
}

pub fn read_poly_in<C: Coeff>(
    path: impl AsRef<Path>,
    space: &Arc<PolySpace>,
) -> Result<Polynomial<C>> {
    parse_poly_in(&fs::read_to_string(path)?, space)
}

pub fn write_poly<C: Coeff>(path: impl AsRef<Path>, p: &Polynomial<C>) -> Result<()> {
    fs::write(path, format_poly(p))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::naive_mul;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    type P = Polynomial<BigInt>;

    fn vars(names: &[&str]) -> VarTable {
        VarTable::new(names.iter().copied()).unwrap()
    }

    fn space(names: &[&str]) -> Arc<PolySpace> {
        PolySpace::new(
            vars(names),
            Layout::even(MonomialOrder::Grlex, names.len()).unwrap(),
        )
        .unwrap()
    }

    fn b(e: Expr) -> Box<Expr> {
        Box::new(e)
    }

    #[test]
    fn parses_power_of_sum() {
        let v = vars(&["x"]);
        assert_eq!(
            parse_expr("(1+x)^2", &v).unwrap(),
            Expr::Pow(b(Expr::Add(b(Expr::num(1)), b(Expr::Var(0)))), 2)
        );
    }

    #[test]
    fn precedence() {
        let v = vars(&["x", "y"]);
        assert_eq!(
            parse_expr("1+x*y^3", &v).unwrap(),
            Expr::Add(
                b(Expr::num(1)),
                b(Expr::Mul(b(Expr::Var(0)), b(Expr::Pow(b(Expr::Var(1)), 3))))
            )
        );
        assert_eq!(
            parse_expr("-x^2", &v).unwrap(),
            Expr::Sub(b(Expr::num(0)), b(Expr::Pow(b(Expr::Var(0)), 2)))
        );
        // left associative
        assert_eq!(
            parse_expr("x-y-1", &v).unwrap(),
            Expr::Sub(
                b(Expr::Sub(b(Expr::Var(0)), b(Expr::Var(1)))),
                b(Expr::num(1))
            )
        );
    }

    #[test]
    fn syntax_errors() {
        let v = vars(&["x"]);
        assert!(matches!(
            parse_expr("x^(2)", &v),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("x^2^3", &v),
            Err(Error::Syntax { pos: 3, .. })
        ));
        assert!(matches!(parse_expr("x^1.5", &v), Err(Error::Syntax { .. })));
        assert!(matches!(
            parse_expr("(1+x", &v),
            Err(Error::Syntax { pos: 4, .. })
        ));
        assert!(matches!(
            parse_expr("1+", &v),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("x $ 1", &v),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("x x", &v),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("1+y", &v),
            Err(Error::UnknownVariable { ref name, pos: 2 }) if name == "y"
        ));
    }

    #[test]
    fn variables_in_order_of_appearance() {
        assert_eq!(variables_in("(1+x+y+z+t)^8").unwrap(), ["x", "y", "z", "t"]);
        assert_eq!(variables_in("u*x + x*u2").unwrap(), ["u", "x", "u2"]);
    }

    #[test]
    fn evaluates_benchmark_operands() {
        let s = space(&["x", "y", "z", "t"]);
        let f: P = parse_poly_expr("(1+x+y+z+t)^8", &s).unwrap();
        assert_eq!(f.len(), 495);
        let g: P = parse_poly_expr("(1+x+y+z+t)^8+1", &s).unwrap();
        assert_eq!(g.len(), 495);
        let diff = g.sub(&f).unwrap();
        assert_eq!(diff, P::constant(&s, BigInt::from(1)));
        assert_eq!(g.coeff_of(&[0, 0, 0, 0]).unwrap(), BigInt::from(2));
    }

    #[test]
    fn evaluates_decimal_literals_only_for_floats() {
        let s = space(&["x"]);
        let p: Polynomial<f64> = parse_poly_expr("0.5*x + 0.25", &s).unwrap();
        assert_eq!(p.coeffs(), &[0.25, 0.5]);
        assert!(matches!(
            parse_poly_expr::<BigInt>("0.5*x", &s),
            Err(Error::InvalidCoefficient(_))
        ));
    }

    #[test]
    fn degree_bounds_size_the_layout() {
        let v = vars(&["x", "y", "z", "t"]);
        let e = parse_expr("(1+x+y+z+t)^40", &v).unwrap();
        let d = e.degree_bounds(4);
        assert_eq!(d.per_var, vec![40; 4]);
        assert_eq!(d.total, 40);
        let prod = d.plus(&d);
        let layout = prod.layout(MonomialOrder::Grlex).unwrap();
        assert_eq!(layout.var_width(0), 7);
        assert_eq!(layout.degree_width(), 7);
    }

    /// Builds the expected polynomial term by term with the schoolbook product.
    fn naive_eval(e: &Expr, s: &Arc<PolySpace>) -> P {
        match e {
            Expr::Num(lit) => P::constant(s, lit.parse().unwrap()),
            Expr::Var(i) => P::variable(s, *i).unwrap(),
            Expr::Add(a, c) => naive_eval(a, s).add(&naive_eval(c, s)).unwrap(),
            Expr::Sub(a, c) => naive_eval(a, s).sub(&naive_eval(c, s)).unwrap(),
            Expr::Mul(a, c) => naive_mul(&naive_eval(a, s), &naive_eval(c, s)).unwrap(),
            Expr::Pow(a, n) => {
                let base = naive_eval(a, s);
                (0..*n).fold(P::constant(s, BigInt::from(1)), |acc, _| {
                    naive_mul(&acc, &base).unwrap()
                })
            }
        }
    }

    #[test]
    fn expression_corpus_matches_naive_construction() {
        let s = space(&["x", "y", "z"]);
        let corpus = [
            "0",
            "1",
            "x",
            "-x",
            "x-x",
            "(1+x)^2",
            "(1+x)*(1-x)",
            "(x+y)^2",
            "(x+y+z)^5",
            "1+x*y^3",
            "2*x^2 - 3*y*z + 7",
            "(1+x+y)^3*(1-z)^2",
            "-(x-y)^3",
            "(x^2+y^2+z^2)^2 - (x+y+z)^4",
            "((1+x)^2)^3",
            "x^0 + y^0",
            "(1 + 2*x + 3*y^2 + 5*z^3)^4",
            "(1+x+y+z)^6 + 1",
            "123456789123456789*x*y*z",
            "(1-x)^7*(1+x)^7",
        ];
        for text in corpus {
            let e = parse_expr(text, s.vars()).unwrap();
            let fast: P = eval_expr(&e, &s).unwrap();
            assert_eq!(fast, naive_eval(&e, &s), "{text}");
        }
    }

    #[test]
    fn file_round_trip() {
        let s = space(&["x", "y"]);
        let p: P = parse_poly_expr("(x+y)^2", &s).unwrap();
        let text = format_poly(&p);
        assert_eq!(text, "vars x y\n1 0 2\n2 1 1\n1 2 0\n");
        assert_eq!(parse_poly_in::<BigInt>(&text, &s).unwrap(), p);
        assert_eq!(
            parse_poly::<BigInt>(&text, MonomialOrder::Grlex).unwrap(),
            p
        );

        let dir = std::env::temp_dir().join(format!("polymul-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.poly");
        write_poly(&path, &p).unwrap();
        assert_eq!(read_poly::<BigInt>(&path, MonomialOrder::Grlex).unwrap(), p);
        assert_eq!(read_poly_in::<BigInt>(&path, &s).unwrap(), p);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn file_duplicates_and_comments() {
        let text = "# header next\nvars x y\n\n1 1 0  # x\n2 1 0\n-3 0 0\n3 0 0\n";
        let p = parse_poly::<BigInt>(text, MonomialOrder::Grlex).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff_of(&[1, 0]).unwrap(), BigInt::from(3));
    }

    #[test]
    fn file_errors_name_the_line() {
        let err = parse_poly::<BigInt>("vars x y\n1 0 0\n2 1\n", MonomialOrder::Grlex).unwrap_err();
        assert!(matches!(err, Error::Format { line: 3, .. }), "{err}");
        let err = parse_poly::<BigInt>("vars x\n1.5 1\n", MonomialOrder::Grlex).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
        let err = parse_poly::<BigInt>("1 2\n", MonomialOrder::Grlex).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }), "{err}");
        let err = parse_poly::<BigInt>("vars x x\n", MonomialOrder::Grlex).unwrap_err();
        assert!(matches!(err, Error::Format { line: 1, .. }), "{err}");
        let err = parse_poly::<BigInt>("# nothing\n", MonomialOrder::Grlex).unwrap_err();
        assert!(matches!(err, Error::Format { .. }), "{err}");
        let err = parse_poly::<BigInt>("vars x\n1 -2\n", MonomialOrder::Grlex).unwrap_err();
        assert!(matches!(err, Error::Format { line: 2, .. }), "{err}");
        let s = space(&["x", "z"]);
        assert!(matches!(
            parse_poly_in::<BigInt>("vars x y\n1 0 0\n", &s),
            Err(Error::SpaceMismatch(_))
        ));
    }

    fn canonical_poly() -> impl Strategy<Value = Vec<(i64, Vec<u32>)>> {
        prop::collection::vec((-1000i64..=1000, prop::collection::vec(0u32..50, 3)), 0..30)
    }

    proptest! {
        #[test]
        fn format_then_parse_is_identity(terms in canonical_poly()) {
            let s = space(&["a", "b", "c"]);
            let p = P::from_terms(&s, terms.into_iter().map(|(c, v)| (BigInt::from(c), v))).unwrap();
            prop_assert_eq!(parse_poly_in::<BigInt>(&format_poly(&p), &s).unwrap(), p);
        }
    }
}
