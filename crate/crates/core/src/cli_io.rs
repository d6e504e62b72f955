//! Text and JSON formats: the polynomial expression grammar, the input
//! schema for persistent CDGAs, persistence modules and persistent complexes,
//! and saved models.
//!
//! Grammar:
//!
//! ```text
//! expr     := ['-'] term (('+' | '-') term)*
//! term     := factor ('*' factor)*
//! factor   := IDENT ['^' NAT] | '(' expr ')' | rational
//! rational := INT ['/' NAT]
//! ```

use crate::cdga::{mul_terms, Cdga, CdgaMorphism, Element, FiniteCdga, FreeCdga, Generator, Monomial, Terms};
use crate::error::{Error, Result};
use crate::exactla::{format_rational, parse_rational, unit_vec, zero_vec, QMatrix, Rational};
use crate::homotopy::IntervalElement;
use crate::pcomplex::{PComplexMap, PersistentComplex};
use crate::persistence::{Grid, PersistenceModule};
use crate::pminimal::{PersistentCdga, PersistentGenerator, TameMinimalModel};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(Rational),
    Ident { name: String, column: usize },
    Pow { base: Box<Expr>, exp: u32, column: usize },
    Product(Vec<Expr>, usize),
    Sum(Vec<(bool, Expr)>),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Sym(char),
}

fn perr<T>(column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { column, message: message.into() })
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut j = i;
            while j < chars.len() && chars[j] == ' ' {
                j += 1;
            }
            if j < chars.len() && chars[j] == '/' {
                j += 1;
                while j < chars.len() && chars[j] == ' ' {
                    j += 1;
                }
                if j >= chars.len() || !chars[j].is_ascii_digit() {
                    return perr(j + 1, "expected a denominator after '/'");
                }
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
            let text: String = chars[start..i].iter().filter(|c| **c != ' ').collect();
            let r = parse_rational(&text).ok_or(Error::Parse { column: col, message: format!("bad number '{text}'") })?;
            if text.contains('/') && text.ends_with("/0") {
                return perr(col, "zero denominator");
            }
            out.push((Tok::Num(r), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if "+-*^()".contains(c) {
            out.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return perr(col, format!("unexpected character '{c}'"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let neg = self.eat('-');
        terms.push((neg, self.term()?));
        loop {
            if self.eat('+') {
                terms.push((false, self.term()?));
            } else if self.eat('-') {
                terms.push((true, self.term()?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 && !terms[0].0 { terms.pop().unwrap().1 } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr> {
        let col = self.col();
        let mut f = vec![self.factor()?];
        while self.eat('*') {
            f.push(self.factor()?);
        }
        Ok(if f.len() == 1 { f.pop().unwrap() } else { Expr::Product(f, col) })
    }

    fn factor(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.toks.get(self.pos).cloned() {
            Some((Tok::Num(r), _)) => {
                self.pos += 1;
                Ok(Expr::Num(r))
            }
            Some((Tok::Ident(name), _)) => {
                self.pos += 1;
                let base = Expr::Ident { name, column: col };
                if self.eat('^') {
                    let ecol = self.col();
                    match self.toks.get(self.pos).cloned() {
                        Some((Tok::Num(r), _)) if r.is_integer() && r >= Rational::zero() => {
                            self.pos += 1;
                            let exp: u32 = r.to_integer().try_into().map_err(|_| Error::Parse {
                                column: ecol,
                                message: "exponent too large".into(),
                            })?;
                            Ok(Expr::Pow { base: Box::new(base), exp, column: col })
                        }
                        _ => perr(ecol, "expected a natural number exponent"),
                    }
                } else {
                    Ok(base)
                }
            }
            Some((Tok::Sym('('), _)) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return perr(self.col(), "expected ')'");
                }
                Ok(e)
            }
            Some((t, _)) => perr(col, format!("unexpected token {t:?}")),
            None => perr(col, "unexpected end of expression"),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end: src.chars().count() + 1 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return perr(p.col(), "trailing input");
    }
    Ok(e)
}

/// Ring in which expressions are evaluated.
trait EvalCtx {
    type V: Clone;
    fn scalar(&self, c: &Rational) -> Self::V;
    /// Value and degree of an identifier.
    fn ident(&self, name: &str, column: usize) -> Result<(Self::V, usize)>;
    fn add(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn scale(&self, c: &Rational, a: &Self::V) -> Self::V;
    fn mul(&self, a: &Self::V, b: &Self::V, column: usize) -> Result<Self::V>;
}

fn eval<C: EvalCtx>(ctx: &C, e: &Expr) -> Result<C::V> {
    match e {
        Expr::Num(r) => Ok(ctx.scalar(r)),
        Expr::Ident { name, column } => Ok(ctx.ident(name, *column)?.0),
        Expr::Pow { base, exp, column } => {
            let Expr::Ident { name, column: c } = &**base else { unreachable!("powers of identifiers only") };
            let (v, deg) = ctx.ident(name, *c)?;
            if deg % 2 == 1 && *exp >= 2 {
                return perr(*column, format!("power of the odd element '{name}'"));
            }
            let mut acc = ctx.scalar(&Rational::one());
            for _ in 0..*exp {
                acc = ctx.mul(&acc, &v, *column)?;
            }
            Ok(acc)
        }
        Expr::Product(fs, column) => {
            let mut coeff = Rational::one();
            let mut acc: Option<C::V> = None;
            for f in fs {
                if let Expr::Num(r) = f {
                    coeff *= r;
                    continue;
                }
                let v = eval(ctx, f)?;
                acc = Some(match acc {
                    None => v,
                    Some(a) => ctx.mul(&a, &v, *column)?,
                });
            }
            Ok(match acc {
                None => ctx.scalar(&coeff),
                Some(a) => ctx.scale(&coeff, &a),
            })
        }
        Expr::Sum(ts) => {
            let mut acc = ctx.scalar(&Rational::zero());
            for (neg, t) in ts {
                let v = eval(ctx, t)?;
                let c = if *neg { -Rational::one() } else { Rational::one() };
                acc = ctx.add(&acc, &ctx.scale(&c, &v));
            }
            Ok(acc)
        }
    }
}

struct TermsCtx<'a> {
    names: &'a [String],
    gens: &'a [Generator],
}

impl EvalCtx for TermsCtx<'_> {
    type V = Terms;

    fn scalar(&self, c: &Rational) -> Terms {
        let mut t = Terms::new();
        if !c.is_zero() {
            t.insert(Monomial::one(), c.clone());
        }
        t
    }

    fn ident(&self, name: &str, column: usize) -> Result<(Terms, usize)> {
        let i = self
            .names
            .iter()
            .position(|n| n == name)
            .ok_or(Error::Parse { column, message: format!("unknown identifier '{name}'") })?;
        let mut t = Terms::new();
        t.insert(Monomial::generator(i), Rational::one());
        Ok((t, self.gens[i].degree))
    }

    fn add(&self, a: &Terms, b: &Terms) -> Terms {
        let mut out = a.clone();
        for (m, c) in b {
            *out.entry(m.clone()).or_insert_with(Rational::zero) += c;
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn scale(&self, c: &Rational, a: &Terms) -> Terms {
        let mut out: Terms = a.iter().map(|(m, x)| (m.clone(), c * x)).collect();
        out.retain(|_, c| !c.is_zero());
        out
    }

    fn mul(&self, a: &Terms, b: &Terms, _: usize) -> Result<Terms> {
        Ok(mul_terms(a, b, self.gens, usize::MAX))
    }
}

/// Graded value: degree -> coordinates.
type Graded = BTreeMap<usize, Vec<Rational>>;

fn add_graded(a: &Graded, b: &Graded) -> Graded {
    let mut out = a.clone();
    for (n, v) in b {
        match out.get_mut(n) {
            Some(w) => crate::exactla::axpy(w, &Rational::one(), v),
            None => {
                out.insert(*n, v.clone());
            }
        }
    }
    out.retain(|_, v| !crate::exactla::is_zero_vec(v));
    out
}

fn scale_graded(c: &Rational, a: &Graded) -> Graded {
    let mut out: Graded = a.iter().map(|(n, v)| (*n, crate::exactla::scale_vec(c, v))).collect();
    out.retain(|_, v| !crate::exactla::is_zero_vec(v));
    out
}

struct AlgCtx<'a> {
    alg: &'a Cdga,
}

impl EvalCtx for AlgCtx<'_> {
    type V = Graded;

    fn scalar(&self, c: &Rational) -> Graded {
        scale_graded(c, &Graded::from([(0, self.alg.unit().coords)]))
    }

    fn ident(&self, name: &str, column: usize) -> Result<(Graded, usize)> {
        let e = self
            .alg
            .named_element(name)
            .ok_or(Error::Parse { column, message: format!("unknown identifier '{name}'") })?;
        let n = e.degree;
        Ok((scale_graded(&Rational::one(), &Graded::from([(n, e.coords)])), n))
    }

    fn add(&self, a: &Graded, b: &Graded) -> Graded {
        add_graded(a, b)
    }

    fn scale(&self, c: &Rational, a: &Graded) -> Graded {
        scale_graded(c, a)
    }

    fn mul(&self, a: &Graded, b: &Graded, _: usize) -> Result<Graded> {
        let mut out = Graded::new();
        for (p, x) in a {
            for (q, y) in b {
                if p + q > self.alg.cap() {
                    continue;
                }
                let z = self.alg.multiply(&Element { degree: *p, coords: x.clone() }, &Element { degree: *q, coords: y.clone() });
                out = add_graded(&out, &Graded::from([(p + q, z.coords)]));
            }
        }
        Ok(out)
    }
}

/// Linear combinations of basis labels, used while a finite algebra is
/// still being described.
struct LabelCtx<'a> {
    labels: &'a [Vec<String>],
}

impl EvalCtx for LabelCtx<'_> {
    type V = Graded;

    fn scalar(&self, c: &Rational) -> Graded {
        scale_graded(c, &Graded::from([(0, unit_vec(self.labels[0].len(), 0))]))
    }

    fn ident(&self, name: &str, column: usize) -> Result<(Graded, usize)> {
        for (n, l) in self.labels.iter().enumerate() {
            if let Some(i) = l.iter().position(|x| x == name) {
                return Ok((Graded::from([(n, unit_vec(l.len(), i))]), n));
            }
        }
        perr(column, format!("unknown basis label '{name}'"))
    }

    fn add(&self, a: &Graded, b: &Graded) -> Graded {
        add_graded(a, b)
    }

    fn scale(&self, c: &Rational, a: &Graded) -> Graded {
        scale_graded(c, a)
    }

    fn mul(&self, _: &Graded, _: &Graded, column: usize) -> Result<Graded> {
        perr(column, "products are not allowed here; give a linear combination of basis labels")
    }
}

fn homogeneous(g: Graded, degree: usize, dim: usize) -> Result<Vec<Rational>> {
    match g.len() {
        0 => Ok(zero_vec(dim)),
        1 if g.contains_key(&degree) => Ok(g.into_values().next().unwrap()),
        _ => Err(Error::Schema(format!(
            "expression is not homogeneous of degree {degree} (has degrees {:?})",
            g.keys().collect::<Vec<_>>()
        ))),
    }
}

/// Parses an element of degree `degree` of `alg`.
pub fn parse_element(src: &str, alg: &Cdga, degree: usize) -> Result<Element> {
    let e = parse_expr(src)?;
    let g = match alg {
        Cdga::Free(f) => {
            let names: Vec<String> = f.generators().iter().map(|g| g.name.clone()).collect();
            let t = eval(&TermsCtx { names: &names, gens: f.generators() }, &e)?;
            check_terms_degree(&t, f.generators(), degree)?;
            return f.element_from_terms(degree, &t);
        }
        Cdga::Finite(_) => eval(&AlgCtx { alg }, &e)?,
    };
    Ok(Element { degree, coords: homogeneous(g, degree, alg.dim(degree))? })
}

/// Parses any expression in `alg`, returning its homogeneous parts.
pub fn parse_expression(src: &str, alg: &Cdga) -> Result<Vec<Element>> {
    let e = parse_expr(src)?;
    let g = eval(&AlgCtx { alg }, &e)?;
    Ok(g.into_iter().map(|(degree, coords)| Element { degree, coords }).collect())
}

fn check_terms_degree(t: &Terms, gens: &[Generator], degree: usize) -> Result<()> {
    if let Some(m) = t.keys().find(|m| m.degree(gens) != degree) {
        return Err(Error::Schema(format!(
            "expression is not homogeneous of degree {degree} (has a term of degree {})",
            m.degree(gens)
        )));
    }
    Ok(())
}

/// Parses a polynomial in named generators, checking its degree.
pub fn parse_terms(src: &str, gens: &[Generator], degree: usize) -> Result<Terms> {
    let names: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
    let t = eval(&TermsCtx { names: &names, gens }, &parse_expr(src)?)?;
    check_terms_degree(&t, gens, degree)?;
    Ok(t)
}

fn render_coeff_term(c: &Rational, body: &str, first: bool) -> String {
    let neg = c < &Rational::zero();
    let a = if neg { -c.clone() } else { c.clone() };
    let mag = if body.is_empty() {
        format_rational(&a)
    } else if a.is_one() {
        body.to_string()
    } else {
        format!("{}*{body}", format_rational(&a))
    };
    match (first, neg) {
        (true, false) => mag,
        (true, true) => format!("-{mag}"),
        (false, false) => format!(" + {mag}"),
        (false, true) => format!(" - {mag}"),
    }
}

/// Renders a polynomial in the grammar above; `0` for the empty sum.
pub fn render_polynomial(names: &[String], t: &Terms) -> String {
    if t.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (k, (m, c)) in t.iter().enumerate() {
        let body: Vec<String> = m
            .0
            .iter()
            .map(|&(i, e)| if e == 1 { names[i].clone() } else { format!("{}^{e}", names[i]) })
            .collect();
        out.push_str(&render_coeff_term(c, &body.join("*"), k == 0));
    }
    out
}

/// Renders an element of a free or finite algebra.
pub fn render_element(alg: &Cdga, e: &Element) -> String {
    match alg {
        Cdga::Free(f) => {
            let names: Vec<String> = f.generators().iter().map(|g| g.name.clone()).collect();
            render_polynomial(&names, &f.terms(e))
        }
        Cdga::Finite(f) => {
            let mut out = String::new();
            for (i, c) in e.coords.iter().enumerate() {
                if !c.is_zero() {
                    out.push_str(&render_coeff_term(c, &f.labels(e.degree)[i], out.is_empty()));
                }
            }
            if out.is_empty() {
                "0".into()
            } else {
                out
            }
        }
    }
}

// ---------------------------------------------------------------- input schema

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InputDocument {
    pub grid: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
    pub stages: Vec<StageDocument>,
    #[serde(default)]
    pub maps: Vec<MapDocument>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum StageDocument {
    Free {
        generators: Vec<GeneratorDocument>,
    },
    /// `basis[n]` lists the labels of degree `n`; the first label of degree 0
    /// is the unit. Products not listed are zero, apart from those with the
    /// unit and the graded-commutative partners of listed ones.
    Finite {
        basis: Vec<Vec<String>>,
        #[serde(default)]
        products: Vec<ProductDocument>,
        #[serde(default)]
        differential: BTreeMap<String, String>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDocument {
    pub name: String,
    pub degree: usize,
    #[serde(default = "zero_string")]
    pub d: String,
}

fn zero_string() -> String {
    "0".into()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ProductDocument {
    pub left: String,
    pub right: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    /// Image of each generator (free domain) or basis label (finite domain);
    /// missing entries map to zero.
    #[serde(default)]
    pub images: BTreeMap<String, String>,
    /// Alternatively, `matrices[n]` as rows of rational strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Vec<Vec<String>>>>,
}

/// Default user degree cap.
pub const DEFAULT_DEGREE_CAP: usize = 6;

/// Degree cap used internally for a user cap.
pub fn working_cap(user_cap: usize) -> usize {
    user_cap + 2
}

fn schema<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Schema(msg.into()))
}

fn located(e: Error, place: &str) -> Error {
    match e {
        Error::Parse { column, message } => Error::Parse { column, message: format!("{place}: {message}") },
        Error::Schema(m) => Error::Schema(format!("{place}: {m}")),
        Error::Dimension(m) => Error::Dimension(format!("{place}: {m}")),
        Error::Validation(m) => Error::Validation(format!("{place}: {m}")),
        Error::Invariant(m) => Error::Invariant(format!("{place}: {m}")),
    }
}

pub fn parse_grid(times: &[String]) -> Result<Grid> {
    if times.is_empty() {
        return schema("empty grid");
    }
    let ts = times
        .iter()
        .map(|t| parse_rational(t).ok_or_else(|| Error::Schema(format!("grid time '{t}' is not a rational number"))))
        .collect::<Result<Vec<_>>>()?;
    Grid::new(ts).map_err(|e| Error::Schema(e.to_string()))
}

pub fn parse_matrix(rows: &[Vec<String>], nrows: usize, ncols: usize) -> Result<QMatrix> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension(format!("expected a {nrows}x{ncols} matrix")));
    }
    let vals = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|x| parse_rational(x).ok_or_else(|| Error::Schema(format!("'{x}' is not a rational number"))))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    QMatrix::from_rows(vals, ncols)
}

pub fn matrix_strings(m: &QMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

fn build_stage(doc: &StageDocument, cap: usize) -> Result<Cdga> {
    match doc {
        StageDocument::Free { generators } => {
            let mut gens: Vec<Generator> = Vec::new();
            let mut diffs = Vec::new();
            for g in generators {
                if gens.iter().any(|x| x.name == g.name) {
                    return schema(format!("generator '{}' declared twice", g.name));
                }
                if g.degree == 0 {
                    return schema(format!("generator '{}' has degree 0", g.name));
                }
                let d = parse_terms(&g.d, &gens, g.degree + 1).map_err(|e| located(e, &format!("d {}", g.name)))?;
                gens.push(Generator { name: g.name.clone(), degree: g.degree });
                diffs.push(d);
            }
            let gens_in_cap: Vec<usize> = (0..gens.len()).filter(|&i| gens[i].degree <= cap).collect();
            if gens_in_cap.len() != gens.len() {
                // generators above the cap never contribute below it
                let keep: Vec<Generator> = gens_in_cap.iter().map(|&i| gens[i].clone()).collect();
                let kd: Vec<Terms> = gens_in_cap.iter().map(|&i| diffs[i].clone()).collect();
                return Ok(Cdga::Free(FreeCdga::new(keep, kd, cap)?));
            }
            Ok(Cdga::Free(FreeCdga::new(gens, diffs, cap)?))
        }
        StageDocument::Finite { basis, products, differential } => {
            if basis.is_empty() || basis[0].is_empty() {
                return schema("finite algebra needs a unit label in degree 0");
            }
            let mut seen = std::collections::HashSet::new();
            for l in basis.iter().flatten() {
                if !seen.insert(l) {
                    return schema(format!("basis label '{l}' declared twice"));
                }
            }
            let ctx = LabelCtx { labels: basis };
            let find = |name: &str| -> Result<(usize, usize)> {
                ctx.ident(name, 1).map(|(g, n)| (n, g[&n].iter().position(|x| !x.is_zero()).unwrap()))
            };
            let dim = |n: usize| basis.get(n).map_or(0, |l| l.len());
            let mut table: HashMap<(usize, usize, usize, usize), Vec<Rational>> = HashMap::new();
            for p in products {
                let place = format!("product {} * {}", p.left, p.right);
                let (a, i) = find(&p.left).map_err(|e| located(e, &place))?;
                let (b, j) = find(&p.right).map_err(|e| located(e, &place))?;
                let v = eval(&ctx, &parse_expr(&p.value).map_err(|e| located(e, &place))?).map_err(|e| located(e, &place))?;
                let v = homogeneous(v, a + b, dim(a + b)).map_err(|e| located(e, &place))?;
                if a + b > cap {
                    continue;
                }
                let sign = if a % 2 == 1 && b % 2 == 1 { -Rational::one() } else { Rational::one() };
                let w = crate::exactla::scale_vec(&sign, &v);
                for (key, val) in [((a, i, b, j), v), ((b, j, a, i), w)] {
                    if let Some(old) = table.get(&key) {
                        if *old != val {
                            return schema(format!("{place}: conflicts with an earlier product entry"));
                        }
                    }
                    table.insert(key, val);
                }
            }
            for (n, l) in basis.iter().enumerate().take(cap + 1) {
                for i in 0..l.len() {
                    let v = unit_vec(l.len(), i);
                    for key in [(0, 0, n, i), (n, i, 0, 0)] {
                        if table.get(&key).is_some_and(|old| *old != v) {
                            return schema(format!("product with the unit {} must be the identity", basis[0][0]));
                        }
                        table.insert(key, v.clone());
                    }
                }
            }
            let top = basis.len() - 1;
            let mut dmats: Vec<QMatrix> = (0..=top.min(cap)).map(|n| QMatrix::zeros(dim(n + 1), dim(n))).collect();
            for (name, value) in differential {
                let place = format!("d {name}");
                let (n, i) = find(name).map_err(|e| located(e, &place))?;
                let v = eval(&ctx, &parse_expr(value).map_err(|e| located(e, &place))?).map_err(|e| located(e, &place))?;
                let v = homogeneous(v, n + 1, dim(n + 1)).map_err(|e| located(e, &place))?;
                if n < cap {
                    for (r, x) in v.into_iter().enumerate() {
                        dmats[n].set(r, i, x);
                    }
                }
            }
            let mut labels = basis.clone();
            labels.truncate(cap + 1);
            if let Some(m) = dmats.get_mut(cap) {
                *m = QMatrix::zeros(0, dim(cap));
            }
            let unit = unit_vec(basis[0].len(), 0);
            Ok(Cdga::Finite(FiniteCdga::new(labels, unit, table, dmats, cap)?))
        }
    }
}

fn build_map(doc: &MapDocument, a: &Arc<Cdga>, b: &Arc<Cdga>) -> Result<CdgaMorphism> {
    let cap = a.cap();
    if let Some(ms) = &doc.matrices {
        if !doc.images.is_empty() {
            return schema("give either images or matrices, not both");
        }
        let mats = (0..=cap)
            .map(|n| match ms.get(n) {
                Some(rows) => parse_matrix(rows, b.dim(n), a.dim(n)),
                None => Ok(QMatrix::zeros(b.dim(n), a.dim(n))),
            })
            .collect::<Result<Vec<_>>>()?;
        return CdgaMorphism::from_matrices(a.clone(), b.clone(), mats);
    }
    match &**a {
        Cdga::Free(f) => {
            for k in doc.images.keys() {
                if f.generator_index(k).is_none() {
                    return schema(format!("image given for unknown generator '{k}'"));
                }
            }
            let images = f
                .generators()
                .iter()
                .map(|g| match doc.images.get(&g.name) {
                    Some(src) => parse_element(src, b, g.degree).map_err(|e| located(e, &format!("image of {}", g.name))),
                    None => Ok(Element::zero(b, g.degree)),
                })
                .collect::<Result<Vec<_>>>()?;
            CdgaMorphism::from_generator_images(a.clone(), b.clone(), images)
        }
        Cdga::Finite(f) => {
            let mut mats = Vec::new();
            for n in 0..=cap {
                let mut cols = Vec::new();
                for (i, l) in f.labels(n).iter().enumerate() {
                    let v = match doc.images.get(l) {
                        Some(src) => parse_element(src, b, n).map_err(|e| located(e, &format!("image of {l}")))?.coords,
                        None if n == 0 && i == 0 => b.unit().coords,
                        None => zero_vec(b.dim(n)),
                    };
                    cols.push(v);
                }
                mats.push(QMatrix::from_columns(&cols, b.dim(n)));
            }
            for k in doc.images.keys() {
                if f.label_position(k).is_none() {
                    return schema(format!("image given for unknown basis label '{k}'"));
                }
            }
            CdgaMorphism::from_matrices(a.clone(), b.clone(), mats)
        }
    }
}

impl InputDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Builds the persistent CDGA with stage algebras at degree cap `cap`.
    pub fn load(&self, cap: usize) -> Result<PersistentCdga> {
        let grid = parse_grid(&self.grid)?;
        if self.stages.len() != grid.len() {
            return schema(format!("{} grid points but {} stages", grid.len(), self.stages.len()));
        }
        if self.maps.len() + 1 != grid.len() {
            return schema(format!("{} grid points need {} maps, found {}", grid.len(), grid.len() - 1, self.maps.len()));
        }
        let stages = self
            .stages
            .iter()
            .enumerate()
            .map(|(r, s)| build_stage(s, cap).map(Arc::new).map_err(|e| located(e, &format!("stage {}", self.grid[r]))))
            .collect::<Result<Vec<_>>>()?;
        for (r, s) in stages.iter().enumerate() {
            if !s.is_simply_connected() {
                return Err(Error::Validation(format!("stage {}: not simply-connected", self.grid[r])));
            }
        }
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(r, m)| {
                build_map(m, &stages[r], &stages[r + 1])
                    .map_err(|e| located(e, &format!("map {} -> {}", self.grid[r], self.grid[r + 1])))
            })
            .collect::<Result<Vec<_>>>()?;
        PersistentCdga::new(grid, stages, maps)
    }

    /// Copy with stage `i` repeated at time `time`, joined by the identity.
    pub fn duplicate_stage(&self, i: usize, time: &str) -> Self {
        let mut doc = self.clone();
        doc.grid.insert(i + 1, time.to_string());
        doc.stages.insert(i + 1, self.stages[i].clone());
        let identity = match &self.stages[i] {
            StageDocument::Free { generators } => MapDocument {
                images: generators.iter().map(|g| (g.name.clone(), g.name.clone())).collect(),
                matrices: None,
            },
            StageDocument::Finite { basis, .. } => MapDocument {
                images: basis.iter().flatten().map(|l| (l.clone(), l.clone())).collect(),
                matrices: None,
            },
        };
        doc.maps.insert(i, identity);
        doc
    }
}

// ------------------------------------------------------- modules and complexes

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModuleDocument {
    pub grid: Vec<String>,
    #[serde(default)]
    pub degree: usize,
    pub dims: Vec<usize>,
    /// `maps[i]` has `dims[i+1]` rows and `dims[i]` columns.
    pub maps: Vec<Vec<Vec<String>>>,
}

impl ModuleDocument {
    pub fn load(&self) -> Result<PersistenceModule> {
        let grid = parse_grid(&self.grid)?;
        if self.dims.len() != grid.len() || self.maps.len() + 1 != grid.len() {
            return schema("module needs one dimension per grid point and one map per gap");
        }
        let maps = (0..self.maps.len())
            .map(|i| parse_matrix(&self.maps[i], self.dims[i + 1], self.dims[i]))
            .collect::<Result<Vec<_>>>()?;
        PersistenceModule::new(grid, self.dims.clone(), maps)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexDocument {
    pub grid: Vec<String>,
    pub max_degree: usize,
    /// `dims[r][k]` for `k = 0..=max_degree`.
    pub dims: Vec<Vec<usize>>,
    /// `differentials[r][k]` for `k < max_degree`.
    pub differentials: Vec<Vec<Vec<Vec<String>>>>,
    /// `structure[r][k]`, from stage `r` to `r + 1`.
    pub structure: Vec<Vec<Vec<Vec<String>>>>,
}

impl ComplexDocument {
    pub fn load(&self) -> Result<PersistentComplex> {
        let grid = parse_grid(&self.grid)?;
        let n = grid.len();
        let top = self.max_degree;
        if self.dims.len() != n || self.differentials.len() != n || self.structure.len() + 1 != n {
            return schema("complex needs dims and differentials per stage and structure maps per gap");
        }
        if self.dims.iter().any(|d| d.len() != top + 1) {
            return schema("each stage needs dims for degrees 0..=max_degree");
        }
        let mut diffs = Vec::new();
        for r in 0..n {
            let mut ds = Vec::new();
            for k in 0..=top {
                let m = if k < top {
                    match self.differentials[r].get(k) {
                        Some(rows) => parse_matrix(rows, self.dims[r][k + 1], self.dims[r][k])?,
                        None => QMatrix::zeros(self.dims[r][k + 1], self.dims[r][k]),
                    }
                } else {
                    QMatrix::zeros(0, self.dims[r][k])
                };
                ds.push(m);
            }
            diffs.push(ds);
        }
        let structure = (0..n - 1)
            .map(|r| {
                (0..=top)
                    .map(|k| match self.structure[r].get(k) {
                        Some(rows) => parse_matrix(rows, self.dims[r + 1][k], self.dims[r][k]),
                        None => Ok(QMatrix::zeros(self.dims[r + 1][k], self.dims[r][k])),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PersistentComplex::new(grid, top, self.dims.clone(), diffs, structure)
    }

    pub fn from_complex(c: &PersistentComplex) -> Self {
        let n = c.stages();
        ComplexDocument {
            grid: (0..n).map(|r| c.grid.label(r)).collect(),
            max_degree: c.max_degree,
            dims: c.dims.clone(),
            differentials: (0..n).map(|r| (0..c.max_degree).map(|k| matrix_strings(&c.d(r, k))).collect()).collect(),
            structure: (0..n - 1).map(|r| (0..=c.max_degree).map(|k| matrix_strings(&c.sigma(r, k))).collect()).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ComplexMapDocument {
    pub source: ComplexDocument,
    pub target: ComplexDocument,
    /// `components[r][k]`
    pub components: Vec<Vec<Vec<Vec<String>>>>,
}

impl ComplexMapDocument {
    pub fn load(&self) -> Result<PComplexMap> {
        let x = self.source.load()?;
        let y = self.target.load()?;
        if x.grid != y.grid || x.max_degree != y.max_degree {
            return schema("source and target must share grid and max_degree");
        }
        if self.components.len() != x.stages() {
            return schema("map needs components for every stage");
        }
        let comps = (0..x.stages())
            .map(|r| {
                (0..=x.max_degree)
                    .map(|k| match self.components[r].get(k) {
                        Some(rows) => parse_matrix(rows, y.dims[r][k], x.dims[r][k]),
                        None => Ok(QMatrix::zeros(y.dims[r][k], x.dims[r][k])),
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        PComplexMap::new(x, y, comps)
    }
}

/// Input of `decompose`: a persistence module or a persistent complex.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DecomposeInput {
    Module(ModuleDocument),
    Complex(ComplexDocument),
}

// ----------------------------------------------------------------- saved models

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SavedGenerator {
    pub name: String,
    pub degree: usize,
    pub birth: String,
    pub death: Option<String>,
    pub d: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SavedHomotopyValue {
    /// Coefficients of `t^k`.
    pub poly: Vec<String>,
    /// Coefficients of `t^k dt`.
    pub dt: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub degree_cap: usize,
    pub input: InputDocument,
    pub generators: Vec<SavedGenerator>,
    /// Per stage, image of each alive generator.
    pub stage_maps: Vec<BTreeMap<String, String>>,
    /// Per gap, homotopy value on each generator alive at its source.
    pub homotopies: Vec<BTreeMap<String, SavedHomotopyValue>>,
}

impl ModelDocument {
    pub fn from_model(model: &TameMinimalModel, a: &PersistentCdga, input: &InputDocument) -> Self {
        let grid = &model.grid;
        let names: Vec<String> = model.generators.iter().map(|g| g.name.clone()).collect();
        let generators = model
            .generators
            .iter()
            .map(|g| SavedGenerator {
                name: g.name.clone(),
                degree: g.degree,
                birth: grid.label(g.birth),
                death: g.death.map(|d| grid.label(d)),
                d: render_polynomial(&names, &g.differential),
                endpoint: g.endpoint.as_ref().map(|e| render_polynomial(&names, e)),
            })
            .collect();
        let stage_maps = (0..grid.len())
            .map(|r| {
                let imgs = model.stage_maps[r].generator_images().expect("free domain");
                model.assembled.alive[r]
                    .iter()
                    .zip(imgs)
                    .map(|(&i, e)| (names[i].clone(), render_element(&a.stages[r], e)))
                    .collect()
            })
            .collect();
        let homotopies = (0..grid.len() - 1)
            .map(|r| {
                let b = &a.stages[r + 1];
                model.assembled.alive[r]
                    .iter()
                    .zip(&model.homotopies[r].values)
                    .map(|(&i, v)| {
                        let poly = v.poly.iter().map(|c| render_element(b, &Element { degree: v.degree, coords: c.clone() })).collect();
                        let dt = v
                            .dt
                            .iter()
                            .map(|c| render_element(b, &Element { degree: v.degree - 1, coords: c.clone() }))
                            .collect();
                        (names[i].clone(), SavedHomotopyValue { poly, dt })
                    })
                    .collect()
            })
            .collect();
        ModelDocument {
            schema_version: 1,
            degree_cap: model.degree,
            input: input.clone(),
            generators,
            stage_maps,
            homotopies,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Rebuilds the input and the model. Fails if the stored data does not
    /// assemble into a model (for instance when an endpoint is incompatible).
    pub fn load(&self) -> Result<(PersistentCdga, TameMinimalModel)> {
        let a = self.input.load(working_cap(self.degree_cap))?;
        let grid = &a.grid;
        let index_of = |label: &str| -> Result<usize> {
            let t = parse_rational(label).ok_or_else(|| Error::Schema(format!("'{label}' is not a time")))?;
            grid.times().iter().position(|x| *x == t).ok_or_else(|| Error::Schema(format!("time {label} is not on the grid")))
        };
        let globals: Vec<Generator> =
            self.generators.iter().map(|g| Generator { name: g.name.clone(), degree: g.degree }).collect();
        let mut gens = Vec::new();
        for g in &self.generators {
            let place = format!("generator {}", g.name);
            gens.push(PersistentGenerator {
                name: g.name.clone(),
                degree: g.degree,
                birth: index_of(&g.birth)?,
                death: g.death.as_deref().map(index_of).transpose()?,
                differential: parse_terms(&g.d, &globals, g.degree + 1).map_err(|e| located(e, &place))?,
                endpoint: g
                    .endpoint
                    .as_deref()
                    .map(|s| parse_terms(s, &globals, g.degree).map_err(|e| located(e, &place)))
                    .transpose()?,
            });
        }
        if self.stage_maps.len() != grid.len() || self.homotopies.len() + 1 != grid.len() {
            return schema("model needs stage maps per grid point and homotopies per gap");
        }
        let alive = |r: usize| gens.iter().filter(|g| g.alive_at(r)).collect::<Vec<_>>();
        let mut stage_images = Vec::new();
        for r in 0..grid.len() {
            let imgs = alive(r)
                .iter()
                .map(|g| {
                    let src = self.stage_maps[r]
                        .get(&g.name)
                        .ok_or_else(|| Error::Schema(format!("stage {}: no image for {}", grid.label(r), g.name)))?;
                    parse_element(src, &a.stages[r], g.degree).map_err(|e| located(e, &format!("image of {}", g.name)))
                })
                .collect::<Result<Vec<_>>>()?;
            stage_images.push(imgs);
        }
        let mut hvals = Vec::new();
        for r in 0..grid.len() - 1 {
            let b = &a.stages[r + 1];
            let vals = alive(r)
                .iter()
                .map(|g| {
                    let v = self.homotopies[r]
                        .get(&g.name)
                        .ok_or_else(|| Error::Schema(format!("gap {}: no homotopy value for {}", grid.label(r), g.name)))?;
                    let place = format!("homotopy value of {}", g.name);
                    let poly = v
                        .poly
                        .iter()
                        .map(|s| parse_element(s, b, g.degree).map(|e| e.coords).map_err(|e| located(e, &place)))
                        .collect::<Result<Vec<_>>>()?;
                    let dt = v
                        .dt
                        .iter()
                        .map(|s| parse_element(s, b, g.degree - 1).map(|e| e.coords).map_err(|e| located(e, &place)))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(IntervalElement { degree: g.degree, poly, dt })
                })
                .collect::<Result<Vec<_>>>()?;
            hvals.push(vals);
        }
        let model = TameMinimalModel::from_parts(&a, gens, stage_images, hvals, self.degree_cap)?;
        Ok((a, model))
    }
}
