//! Canonical text form. Parsing the output gives back the same tree.

use std::fmt::Write;

use num_rational::BigRational;

use super::ast::*;

fn rational(x: &BigRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn tuple(v: &[i64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

fn tuples(v: &[Vec<i64>]) -> String {
    v.iter().map(|t| tuple(t)).collect::<Vec<_>>().join(",")
}

/// Binary and negated children are parenthesised; nothing else is.
fn operand(e: &Expr) -> String {
    match e {
        Expr::Bin(..) | Expr::Neg(_) | Expr::Pow(..) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

pub fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Q => "q".into(),
        Expr::Neg(x) => format!("-{}", operand(x)),
        Expr::Bin(op, l, r) => format!("{}{}{}", operand(l), op.symbol(), operand(r)),
        Expr::Pow(x, n) => format!("{}^{n}", operand(x)),
        Expr::Ceil(x) => format!("ceil({})", expr(x)),
        Expr::Floor(x) => format!("floor({})", expr(x)),
    }
}

fn ctor(c: &CtorExpr) -> String {
    match c {
        CtorExpr::Frobenius(i) => format!("frobenius({i})"),
        CtorExpr::Power(i, t) => format!("power({i}, {})", rational(t)),
        CtorExpr::Cartier(i) => format!("cartier({i})"),
        CtorExpr::CustomPower(i, e) => format!("custom({i}, {})", expr(e)),
        CtorExpr::CustomTemplate(gens) => {
            let parts: Vec<String> = gens
                .iter()
                .map(|g| format!("({})", g.iter().map(expr).collect::<Vec<_>>().join(",")))
                .collect();
            format!("custom({})", parts.join(","))
        }
    }
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn print_spec(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    let r = &spec.ring;
    write!(out, "ring d={} p={} ", r.d, r.p).unwrap();
    match &r.kind {
        RingKind::Regular => out.push_str("regular"),
        RingKind::Semigroup(g) => write!(out, "semigroup {}", tuples(g)).unwrap(),
    }
    if let Some(a) = &r.a {
        write!(out, " a={}", a.iter().map(rational).collect::<Vec<_>>().join(",")).unwrap();
    }
    out.push('\n');
    for d in &spec.decls {
        match d {
            Decl::Ideal(i) => writeln!(out, "ideal {} = {}", i.name, tuples(&i.gens)).unwrap(),
            Decl::Family(f) => writeln!(out, "family {} = {}", f.name, ctor(&f.ctor)).unwrap(),
            Decl::Experiment(e) => {
                write!(out, "experiment {} {}", e.kind.keyword(), e.family).unwrap();
                let p = &e.params;
                if let Some(v) = p.e_max {
                    write!(out, " e_max={v}").unwrap();
                }
                for (key, v) in [("alpha", &p.alpha), ("epsilon", &p.epsilon), ("tol", &p.tol), ("target", &p.target)] {
                    if let Some(v) = v {
                        write!(out, " {key}={}", rational(v)).unwrap();
                    }
                }
                if let Some(v) = p.seed {
                    write!(out, " seed={v}").unwrap();
                }
                if let Some(v) = p.samples {
                    write!(out, " samples={v}").unwrap();
                }
                if let Some(v) = &p.out {
                    write!(out, " out={}", quoted(v)).unwrap();
                }
                out.push('\n');
            }
        }
    }
    out
}
