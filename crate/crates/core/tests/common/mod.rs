//! Independent oracles and generators shared by the integration tests.
//! Nothing here calls into the counting kernels under test.
#![allow(dead_code)]

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use plab::dsl::*;
use plab::semigroup::make_standard_semigroup;
use plab::toric::{MonomialIdeal, ToricRing};
use plab::LatticePoint;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

pub fn pts(v: &[Vec<i64>]) -> Vec<LatticePoint> {
    v.iter().map(|c| LatticePoint::from_i64(c)).collect()
}

pub fn reg(d: usize) -> Arc<ToricRing> {
    Arc::new(ToricRing::regular(d, 2).unwrap())
}

/// The quadric cone `<(1,0),(1,1),(1,2)>`.
pub fn a1() -> Arc<ToricRing> {
    let s = make_standard_semigroup(&pts(&[vec![1, 0], vec![1, 1], vec![1, 2]]), None).unwrap();
    Arc::new(ToricRing::new(Arc::new(s), 2, None).unwrap())
}

pub fn ideal(ring: &Arc<ToricRing>, gens: &[Vec<i64>]) -> MonomialIdeal {
    MonomialIdeal::new(ring.clone(), &pts(gens)).unwrap()
}

/// An m-primary generator set in `N^d`: one pure power per axis plus up to
/// `5 - d` mixed generators, every exponent at most 6.
pub fn random_m_primary<R: Rng>(rng: &mut R, d: usize) -> Vec<Vec<i64>> {
    let mut gens: Vec<Vec<i64>> = (0..d)
        .map(|i| {
            let mut g = vec![0; d];
            g[i] = rng.gen_range(1..=6);
            g
        })
        .collect();
    let extra = rng.gen_range(0..=5 - d);
    for _ in 0..extra {
        let g: Vec<i64> = (0..d).map(|_| rng.gen_range(0..=6)).collect();
        if g.iter().any(|&x| x > 0) {
            gens.push(g);
        }
    }
    gens.shuffle(rng);
    gens
}

fn dominated(g: &[i64], u: &[i64]) -> bool {
    g.iter().zip(u).all(|(a, b)| a <= b)
}

/// Counts exponents outside the staircase one point at a time.
pub fn brute_colength(gens: &[Vec<i64>]) -> u64 {
    let d = gens[0].len();
    let bounds: Vec<i64> = (0..d)
        .map(|i| {
            gens.iter()
                .filter(|g| g.iter().enumerate().all(|(j, &x)| j == i || x == 0))
                .map(|g| g[i])
                .min()
                .expect("m-primary")
        })
        .collect();
    let mut count = 0;
    let mut u = vec![0i64; d];
    loop {
        if !gens.iter().any(|g| dominated(g, &u)) {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == d {
                return count;
            }
            u[i] += 1;
            if u[i] < bounds[i] {
                break;
            }
            u[i] = 0;
            i += 1;
        }
    }
}

fn in_a1(x: i64, y: i64) -> bool {
    x >= 0 && y >= 0 && y <= 2 * x
}

/// `ℓ(R/m^{[q]})` on the quadric cone, by scanning vertical slices.
pub fn a1_frobenius_colength(q: i64) -> u64 {
    let gens = [(q, 0), (q, q), (q, 2 * q)];
    let mut count = 0;
    for x in 0..=2 * q {
        for y in 0..=2 * x {
            if !gens.iter().any(|&(a, b)| in_a1(x - a, y - b)) {
                count += 1;
            }
        }
    }
    count
}

const NAMES: &[&str] = &["m", "i", "j2", "fam", "big_ideal", "x_1", "A", "Tq", "n0"];
const PRIMES: &[u32] = &[2, 3, 5, 7, 11, 101];

fn random_rational<R: Rng>(rng: &mut R, positive: bool) -> BigRational {
    let n: i64 = rng.gen_range(1..=50);
    let d: i64 = rng.gen_range(1..=12);
    let v = rat(n, d);
    if !positive && rng.gen_bool(0.3) {
        -v
    } else {
        v
    }
}

fn random_tuple<R: Rng>(rng: &mut R, d: usize, lo: i64) -> Vec<i64> {
    (0..d).map(|_| rng.gen_range(lo..=9)).collect()
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.3) {
        return if rng.gen_bool(0.5) { Expr::Q } else { Expr::Int(rng.gen_range(0..=20)) };
    }
    let sub = |rng: &mut R| Box::new(random_expr(rng, depth - 1));
    match rng.gen_range(0..6) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Pow(sub(rng), rng.gen_range(0..=4)),
        2 => Expr::Ceil(sub(rng)),
        3 => Expr::Floor(sub(rng)),
        _ => {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div].choose(rng).unwrap();
            Expr::Bin(op, sub(rng), sub(rng))
        }
    }
}

fn random_params<R: Rng>(rng: &mut R, kind: ExperimentKind) -> Params {
    let mut p = Params::default();
    let required = kind.required();
    let want = |rng: &mut R, key: &str| required.contains(&key) || rng.gen_bool(0.3);
    if want(rng, "e_max") {
        let lo = if kind == ExperimentKind::Validate { 1 } else { 0 };
        p.e_max = Some(rng.gen_range(lo..=16));
    }
    if want(rng, "alpha") {
        p.alpha = Some(random_rational(rng, true));
    }
    if want(rng, "epsilon") {
        p.epsilon = Some(random_rational(rng, true));
    }
    if want(rng, "tol") {
        p.tol = Some(if rng.gen_bool(0.2) { rat(0, 1) } else { random_rational(rng, true) });
    }
    if want(rng, "target") {
        p.target = Some(random_rational(rng, false));
    }
    if want(rng, "seed") {
        p.seed = Some(rng.gen());
    }
    if want(rng, "samples") {
        p.samples = Some(rng.gen_range(100..=10_000_000));
    }
    if want(rng, "out") {
        p.out = Some(["runs", "a b", "quote\"d", "back\\slash", ""].choose(rng).unwrap().to_string());
    }
    p
}

/// A syntactically and semantically valid spec tree; the parser must accept
/// its canonical print.
pub fn random_spec<R: Rng>(rng: &mut R) -> ExperimentSpec {
    let semigroup = rng.gen_bool(0.3);
    let d = if semigroup { rng.gen_range(1..=4) } else { rng.gen_range(1..=6) };
    let kind = if semigroup {
        RingKind::Semigroup((0..rng.gen_range(1..=4)).map(|_| random_tuple(rng, d, -3)).collect())
    } else {
        RingKind::Regular
    };
    let a = rng
        .gen_bool(0.4)
        .then(|| (0..d).map(|_| random_rational(rng, false)).collect());
    let ring = RingDecl {
        d,
        p: *PRIMES.choose(rng).unwrap(),
        kind,
        a,
    };
    let mut ideals: Vec<String> = Vec::new();
    let mut families: Vec<String> = Vec::new();
    let mut decls = Vec::new();
    for k in 0..rng.gen_range(0..8) {
        let name = format!("{}{k}", NAMES.choose(rng).unwrap());
        let choice = rng.gen_range(0..3);
        if choice == 0 || ideals.is_empty() {
            let gens = (0..rng.gen_range(1..=3)).map(|_| random_tuple(rng, d, 0)).collect();
            decls.push(Decl::Ideal(IdealDecl { name: name.clone(), gens }));
            ideals.push(name);
        } else if choice == 1 || families.is_empty() {
            let base = ideals.choose(rng).unwrap().clone();
            let ctor = match rng.gen_range(0..5) {
                0 => CtorExpr::Frobenius(base),
                1 => CtorExpr::Power(base, random_rational(rng, true)),
                2 => CtorExpr::Cartier(base),
                3 => CtorExpr::CustomPower(base, random_expr(rng, 3)),
                _ => CtorExpr::CustomTemplate(
                    (0..rng.gen_range(1..=3))
                        .map(|_| (0..d).map(|_| random_expr(rng, 3)).collect())
                        .collect(),
                ),
            };
            decls.push(Decl::Family(FamilyDecl { name: name.clone(), ctor }));
            families.push(name);
        } else {
            let kind = *ExperimentKind::ALL.choose(rng).unwrap();
            decls.push(Decl::Experiment(ExperimentDecl {
                kind,
                family: families.choose(rng).unwrap().clone(),
                params: random_params(rng, kind),
            }));
        }
    }
    ExperimentSpec { ring, decls }
}

pub const SAMPLE_SPEC: &str = "\
# x^2, y^3 and the maximal ideal
ring d=2 p=2 regular a=1,1
ideal I = (2,0),(0,3)
ideal M = (1,0),(0,1)
family F = frobenius(I)
family P = power(M, 1/2)
family C = cartier(I)
family corners = custom((ceil(q/3),0),(0,ceil(q/2)))
family bad = custom(M, q^2)
experiment volmult F e_max=4 tol=0
experiment fujita corners e_max=10 alpha=2 epsilon=1/20
experiment validate bad e_max=3
";

/// Flips, inserts or deletes a few bytes.
pub fn mutate<R: Rng>(rng: &mut R, bytes: &[u8]) -> Vec<u8> {
    let mut v = bytes.to_vec();
    for _ in 0..rng.gen_range(1..=4) {
        let at = rng.gen_range(0..=v.len());
        match rng.gen_range(0..3) {
            0 if at < v.len() => v[at] = rng.gen(),
            1 => v.insert(at, *b"()=,/-^#\"q0(9\n ".choose(rng).unwrap()),
            _ if at < v.len() => {
                v.remove(at);
            }
            _ => v.push(rng.gen()),
        }
    }
    v
}

pub fn big(n: u64) -> BigInt {
    BigInt::from(n)
}
