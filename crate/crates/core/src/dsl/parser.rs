use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::Diagnostic;
use crate::lattice::MAX_LATTICE_DIM;
use crate::psystem::is_prime;

/// Semigroup rings beyond this dimension are rejected by the cone kernels.
const MAX_SEMIGROUP_DIM: usize = crate::cone::MAX_CONE_DIM;
const MAX_DEPTH: usize = 64;
pub const E_MAX_LIMIT: u32 = 16;
pub const SAMPLES_RANGE: (u64, u64) = (100, 10_000_000);

const KEYWORDS: &[&str] = &[
    "ring", "ideal", "family", "experiment", "regular", "semigroup", "frobenius", "power", "cartier",
    "custom", "ceil", "floor", "q",
];
const DECL_START: &[&str] = &["'ideal'", "'family'", "'experiment'"];

pub fn parse_spec_bytes(bytes: &[u8]) -> Result<ExperimentSpec, Diagnostic> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_spec(text),
        Err(e) => {
            let valid = &bytes[..e.valid_up_to()];
            let text = std::str::from_utf8(valid).expect("valid prefix");
            let line = text.matches('\n').count() + 1;
            let col = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(Diagnostic::new(line, col, "input is not valid UTF-8", &[]))
        }
    }
}

pub fn parse_spec(text: &str) -> Result<ExperimentSpec, Diagnostic> {
    let toks = lex(text)?;
    Parser {
        toks,
        pos: 0,
        depth: 0,
        names: HashMap::new(),
        d: 0,
    }
    .spec()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum NameKind {
    Ideal,
    Family,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
    names: HashMap<String, NameKind>,
    d: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(t: &Token, message: impl Into<String>, expected: &[&str]) -> Diagnostic {
        Diagnostic::new(t.line, t.col, message, expected)
    }

    fn unexpected(&self, expected: &[&str]) -> Diagnostic {
        let t = self.peek();
        Self::err_at(t, format!("unexpected {}", t.tok.describe()), expected)
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(x) if x == s)
    }

    fn sym(&mut self, c: char) -> PResult<Token> {
        if self.is_sym(c) {
            Ok(self.next())
        } else {
            Err(self.unexpected(&[&format!("'{c}'")]))
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<Token> {
        if self.is_ident(kw) {
            Ok(self.next())
        } else {
            Err(self.unexpected(&[&format!("'{kw}'")]))
        }
    }

    fn name(&mut self) -> PResult<(String, Token)> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok((s.clone(), t))
            }
            Tok::Ident(s) => Err(Self::err_at(&t, format!("'{s}' is a reserved word"), &["name"])),
            _ => Err(self.unexpected(&["name"])),
        }
    }

    fn uint(&mut self) -> PResult<(u64, Token)> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(s) => {
                self.next();
                let v = s
                    .parse::<u64>()
                    .map_err(|_| Self::err_at(&t, format!("integer {s} is out of range"), &[]))?;
                Ok((v, t))
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn signed(&mut self) -> PResult<i64> {
        let neg = self.is_sym('-');
        if neg {
            self.next();
        }
        let (v, t) = self.uint()?;
        let v = i64::try_from(v).map_err(|_| Self::err_at(&t, "integer is out of range", &[]))?;
        Ok(if neg { -v } else { v })
    }

    fn rational(&mut self) -> PResult<(BigRational, Token)> {
        let start = self.peek().clone();
        let neg = self.is_sym('-');
        if neg {
            self.next();
        }
        let (n, _) = self.uint()?;
        let mut den = BigInt::from(1);
        if self.is_sym('/') {
            self.next();
            let (d, dt) = self.uint()?;
            if d == 0 {
                return Err(Self::err_at(&dt, "zero denominator", &["positive integer"]));
            }
            den = BigInt::from(d);
        }
        let mut v = BigRational::new(BigInt::from(n), den);
        if neg {
            v = -v;
        }
        Ok((v, start))
    }

    fn tuple(&mut self) -> PResult<Vec<i64>> {
        let open = self.sym('(')?;
        let mut v = vec![self.signed()?];
        while self.is_sym(',') {
            self.next();
            v.push(self.signed()?);
        }
        self.sym(')')?;
        if v.len() != self.d {
            return Err(Self::err_at(
                &open,
                format!("tuple has {} entries but d = {}", v.len(), self.d),
                &[],
            ));
        }
        Ok(v)
    }

    /// `tuple ("," tuple)*`; a comma not followed by `(` ends the list.
    fn tuple_list(&mut self) -> PResult<Vec<Vec<i64>>> {
        let mut v = vec![self.tuple()?];
        while self.is_sym(',') && self.toks.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::Sym('(')) {
            self.next();
            v.push(self.tuple()?);
        }
        Ok(v)
    }

    fn spec(mut self) -> PResult<ExperimentSpec> {
        let ring = match &self.peek().tok {
            Tok::Ident(s) if s == "ring" => self.ring()?,
            Tok::Ident(s) if matches!(s.as_str(), "ideal" | "family" | "experiment") => {
                let t = self.peek();
                return Err(Self::err_at(t, format!("ring block required before {s}"), &["'ring'"]));
            }
            _ => return Err(self.unexpected(&["'ring'"])),
        };
        let mut decls = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) if s == "ideal" => decls.push(Decl::Ideal(self.ideal()?)),
                Tok::Ident(s) if s == "family" => decls.push(Decl::Family(self.family()?)),
                Tok::Ident(s) if s == "experiment" => decls.push(Decl::Experiment(self.experiment()?)),
                Tok::Ident(s) if s == "ring" => {
                    return Err(Self::err_at(&t, "only one ring block is allowed", DECL_START));
                }
                _ => return Err(self.unexpected(DECL_START)),
            }
        }
        Ok(ExperimentSpec { ring, decls })
    }

    fn ring(&mut self) -> PResult<RingDecl> {
        self.keyword("ring")?;
        self.keyword("d")?;
        self.sym('=')?;
        let (d, dt) = self.uint()?;
        if d < 1 || d > MAX_LATTICE_DIM as u64 {
            return Err(Self::err_at(&dt, format!("d must lie in 1..={MAX_LATTICE_DIM}"), &[]));
        }
        self.d = d as usize;
        self.keyword("p")?;
        self.sym('=')?;
        let (p, pt) = self.uint()?;
        if p > u32::MAX as u64 || !is_prime(p as u32) {
            return Err(Self::err_at(&pt, format!("p = {p} is not a prime"), &["prime"]));
        }
        let kind = if self.is_ident("regular") {
            self.next();
            RingKind::Regular
        } else if self.is_ident("semigroup") {
            let t = self.next();
            if self.d > MAX_SEMIGROUP_DIM {
                return Err(Self::err_at(
                    &t,
                    format!("semigroup rings are supported up to d = {MAX_SEMIGROUP_DIM}"),
                    &["'regular'"],
                ));
            }
            RingKind::Semigroup(self.tuple_list()?)
        } else {
            return Err(self.unexpected(&["'regular'", "'semigroup'"]));
        };
        let a = if self.is_ident("a") {
            let t = self.next();
            self.sym('=')?;
            let mut v = vec![self.rational()?.0];
            while self.is_sym(',') {
                self.next();
                v.push(self.rational()?.0);
            }
            if v.len() != self.d {
                return Err(Self::err_at(&t, format!("a has {} entries but d = {}", v.len(), self.d), &[]));
            }
            Some(v)
        } else {
            None
        };
        Ok(RingDecl {
            d: self.d,
            p: p as u32,
            kind,
            a,
        })
    }

    fn bind(&mut self, name: &str, at: &Token, kind: NameKind) -> PResult<()> {
        if self.names.contains_key(name) {
            return Err(Self::err_at(at, format!("'{name}' is already defined"), &[]));
        }
        self.names.insert(name.to_string(), kind);
        Ok(())
    }

    fn lookup(&mut self, want: NameKind) -> PResult<String> {
        let (name, t) = self.name()?;
        match self.names.get(&name) {
            Some(k) if *k == want => Ok(name),
            Some(_) => Err(Self::err_at(
                &t,
                format!(
                    "'{name}' is not {}",
                    if want == NameKind::Ideal { "an ideal" } else { "a family" }
                ),
                &[],
            )),
            None => Err(Self::err_at(&t, format!("unknown identifier '{name}'"), &[])),
        }
    }

    fn ideal(&mut self) -> PResult<IdealDecl> {
        self.keyword("ideal")?;
        let (name, t) = self.name()?;
        self.sym('=')?;
        let gens = self.tuple_list()?;
        self.bind(&name, &t, NameKind::Ideal)?;
        Ok(IdealDecl { name, gens })
    }

    fn family(&mut self) -> PResult<FamilyDecl> {
        self.keyword("family")?;
        let (name, t) = self.name()?;
        self.sym('=')?;
        let ct = self.peek().clone();
        let ctor_name = match &ct.tok {
            Tok::Ident(s) if matches!(s.as_str(), "frobenius" | "power" | "cartier" | "custom") => s.clone(),
            _ => return Err(self.unexpected(&["'frobenius'", "'power'", "'cartier'", "'custom'"])),
        };
        self.next();
        self.sym('(')?;
        let ctor = match ctor_name.as_str() {
            "frobenius" => CtorExpr::Frobenius(self.lookup(NameKind::Ideal)?),
            "cartier" => CtorExpr::Cartier(self.lookup(NameKind::Ideal)?),
            "power" => {
                let base = self.lookup(NameKind::Ideal)?;
                self.sym(',')?;
                let (t_val, tt) = self.rational()?;
                if !t_val.is_positive() {
                    return Err(Self::err_at(&tt, "power exponent must be positive", &["positive rational"]));
                }
                CtorExpr::Power(base, t_val)
            }
            _ => {
                if self.is_sym('(') {
                    let mut gens = vec![self.expr_tuple()?];
                    while self.is_sym(',') {
                        self.next();
                        gens.push(self.expr_tuple()?);
                    }
                    CtorExpr::CustomTemplate(gens)
                } else {
                    let base = self.lookup(NameKind::Ideal)?;
                    self.sym(',')?;
                    CtorExpr::CustomPower(base, self.expr()?)
                }
            }
        };
        self.sym(')')?;
        self.bind(&name, &t, NameKind::Family)?;
        Ok(FamilyDecl { name, ctor })
    }

    fn expr_tuple(&mut self) -> PResult<Vec<Expr>> {
        let open = self.sym('(')?;
        let mut v = vec![self.expr()?];
        while self.is_sym(',') {
            self.next();
            v.push(self.expr()?);
        }
        self.sym(')')?;
        if v.len() != self.d {
            return Err(Self::err_at(
                &open,
                format!("tuple has {} entries but d = {}", v.len(), self.d),
                &[],
            ));
        }
        Ok(v)
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(Self::err_at(self.peek(), "expression nested too deeply", &[]));
        }
        Ok(())
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let mut lhs = self.term()?;
        while self.is_sym('+') || self.is_sym('-') {
            let op = if self.next().tok == Tok::Sym('+') { BinOp::Add } else { BinOp::Sub };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.is_sym('*') || self.is_sym('/') {
            let op = if self.next().tok == Tok::Sym('*') { BinOp::Mul } else { BinOp::Div };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_sym('-') {
            self.next();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let base = self.atom()?;
        if self.is_sym('^') {
            self.next();
            let (n, t) = self.uint()?;
            if n > MAX_EXPONENT as u64 {
                return Err(Self::err_at(&t, format!("exponent exceeds {MAX_EXPONENT}"), &[]));
            }
            return Ok(Expr::Pow(Box::new(base), n as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let t = self.peek().clone();
        match &t.tok {
            Tok::Int(_) => Ok(Expr::Int(self.uint()?.0)),
            Tok::Ident(s) if s == "q" => {
                self.next();
                Ok(Expr::Q)
            }
            Tok::Ident(s) if s == "ceil" || s == "floor" => {
                let ceil = s == "ceil";
                self.next();
                self.sym('(')?;
                let inner = Box::new(self.expr()?);
                self.sym(')')?;
                Ok(if ceil { Expr::Ceil(inner) } else { Expr::Floor(inner) })
            }
            Tok::Sym('(') => {
                self.next();
                let inner = self.expr()?;
                self.sym(')')?;
                Ok(inner)
            }
            _ => Err(self.unexpected(&["integer", "'q'", "'ceil'", "'floor'", "'('"])),
        }
    }

    fn experiment(&mut self) -> PResult<ExperimentDecl> {
        let start = self.keyword("experiment")?;
        let kt = self.peek().clone();
        let kind = match &kt.tok {
            Tok::Ident(s) => ExperimentKind::from_keyword(s),
            _ => None,
        }
        .ok_or_else(|| self.unexpected(&["'volmult'", "'limit317'", "'fujita'", "'validate'"]))?;
        self.next();
        let family = self.lookup(NameKind::Family)?;
        let mut params = Params::default();
        while let Tok::Ident(key) = &self.peek().tok {
            if matches!(key.as_str(), "ideal" | "family" | "experiment" | "ring") {
                break;
            }
            let key = key.clone();
            let t = self.next();
            if !Params::KEYS.contains(&key.as_str()) {
                return Err(Self::err_at(&t, format!("unknown parameter '{key}'"), &Params::KEYS));
            }
            if params.has(&key) {
                return Err(Self::err_at(&t, format!("parameter '{key}' given twice"), &[]));
            }
            self.sym('=')?;
            self.param(&key, &mut params)?;
        }
        for key in kind.required() {
            if !params.has(key) {
                return Err(Self::err_at(
                    &start,
                    format!("{} experiment requires parameter '{key}'", kind.keyword()),
                    &[],
                ));
            }
        }
        if kind == ExperimentKind::Validate && params.e_max == Some(0) {
            return Err(Self::err_at(&start, "validate needs e_max >= 1", &[]));
        }
        Ok(ExperimentDecl { kind, family, params })
    }

    fn param(&mut self, key: &str, params: &mut Params) -> PResult<()> {
        match key {
            "e_max" => {
                let (v, t) = self.uint()?;
                if v > E_MAX_LIMIT as u64 {
                    return Err(Self::err_at(&t, format!("e_max must lie in 0..={E_MAX_LIMIT}"), &[]));
                }
                params.e_max = Some(v as u32);
            }
            "seed" => params.seed = Some(self.uint()?.0),
            "samples" => {
                let (v, t) = self.uint()?;
                if !(SAMPLES_RANGE.0..=SAMPLES_RANGE.1).contains(&v) {
                    return Err(Self::err_at(
                        &t,
                        format!("samples must lie in {}..={}", SAMPLES_RANGE.0, SAMPLES_RANGE.1),
                        &[],
                    ));
                }
                params.samples = Some(v);
            }
            "out" => {
                let t = self.peek().clone();
                match t.tok {
                    Tok::Str(s) => {
                        self.next();
                        params.out = Some(s);
                    }
                    _ => return Err(self.unexpected(&["string"])),
                }
            }
            _ => {
                let (v, t) = self.rational()?;
                let ok = match key {
                    "tol" => !v.is_negative(),
                    "target" => true,
                    _ => v.is_positive(),
                };
                if !ok {
                    let bound = if key == "tol" { "non-negative" } else { "positive" };
                    return Err(Self::err_at(&t, format!("{key} must be {bound}"), &[]));
                }
                let slot = match key {
                    "alpha" => &mut params.alpha,
                    "epsilon" => &mut params.epsilon,
                    "tol" => &mut params.tol,
                    _ => &mut params.target,
                };
                *slot = Some(v);
            }
        }
        Ok(())
    }
}
