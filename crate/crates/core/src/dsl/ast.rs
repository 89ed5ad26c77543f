use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentSpec {
    pub ring: RingDecl,
    pub decls: Vec<Decl>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingDecl {
    pub d: usize,
    pub p: u32,
    pub kind: RingKind,
    pub a: Option<Vec<BigRational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RingKind {
    Regular,
    Semigroup(Vec<Vec<i64>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Ideal(IdealDecl),
    Family(FamilyDecl),
    Experiment(ExperimentDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealDecl {
    pub name: String,
    pub gens: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyDecl {
    pub name: String,
    pub ctor: CtorExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CtorExpr {
    Frobenius(String),
    /// `I^{⌈t q⌉}`.
    Power(String, BigRational),
    Cartier(String),
    /// `I^{n(q)}` for an integer-valued expression `n`.
    CustomPower(String, Expr),
    /// Generators given as tuples of expressions in `q`.
    CustomTemplate(Vec<Vec<Expr>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Rational-valued expressions in the level `q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Int(u64),
    Q,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Ceil(Box<Expr>),
    Floor(Box<Expr>),
}

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 16;

impl Expr {
    pub fn eval(&self, q: u64) -> Result<BigRational, String> {
        Ok(match self {
            Expr::Int(n) => BigRational::from_integer(BigInt::from(*n)),
            Expr::Q => BigRational::from_integer(BigInt::from(q)),
            Expr::Neg(x) => -x.eval(q)?,
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(q)?, r.eval(q)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => {
                        if r.is_zero() {
                            return Err("division by zero".into());
                        }
                        l / r
                    }
                }
            }
            Expr::Pow(x, n) => num_traits::pow(x.eval(q)?, *n as usize),
            Expr::Ceil(x) => x.eval(q)?.ceil(),
            Expr::Floor(x) => x.eval(q)?.floor(),
        })
    }

    /// Evaluates and insists on an integer result.
    pub fn eval_integer(&self, q: u64) -> Result<BigInt, String> {
        let v = self.eval(q)?;
        if v.is_integer() {
            Ok(v.to_integer())
        } else {
            Err(format!("expression takes the non-integer value {v} at q = {q}"))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Volmult,
    Limit317,
    Fujita,
    Validate,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 4] = [
        ExperimentKind::Volmult,
        ExperimentKind::Limit317,
        ExperimentKind::Fujita,
        ExperimentKind::Validate,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ExperimentKind::Volmult => "volmult",
            ExperimentKind::Limit317 => "limit317",
            ExperimentKind::Fujita => "fujita",
            ExperimentKind::Validate => "validate",
        }
    }

    pub fn from_keyword(s: &str) -> Option<ExperimentKind> {
        ExperimentKind::ALL.into_iter().find(|k| k.keyword() == s)
    }

    pub fn required(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::Volmult | ExperimentKind::Validate => &["e_max"],
            ExperimentKind::Limit317 => &["e_max", "alpha"],
            ExperimentKind::Fujita => &["e_max", "alpha", "epsilon"],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Params {
    pub e_max: Option<u32>,
    pub alpha: Option<BigRational>,
    pub epsilon: Option<BigRational>,
    pub tol: Option<BigRational>,
    pub target: Option<BigRational>,
    pub seed: Option<u64>,
    pub samples: Option<u64>,
    pub out: Option<String>,
}

impl Params {
    pub const KEYS: [&'static str; 8] = ["e_max", "alpha", "epsilon", "tol", "target", "seed", "samples", "out"];

    pub fn has(&self, key: &str) -> bool {
        match key {
            "e_max" => self.e_max.is_some(),
            "alpha" => self.alpha.is_some(),
            "epsilon" => self.epsilon.is_some(),
            "tol" => self.tol.is_some(),
            "target" => self.target.is_some(),
            "seed" => self.seed.is_some(),
            "samples" => self.samples.is_some(),
            "out" => self.out.is_some(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentDecl {
    pub kind: ExperimentKind,
    pub family: String,
    pub params: Params,
}

impl ExperimentSpec {
    pub fn experiments(&self) -> impl Iterator<Item = &ExperimentDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Experiment(e) => Some(e),
            _ => None,
        })
    }
}
