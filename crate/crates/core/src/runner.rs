//! Turns a parsed experiment description into domain objects, runs the
//! experiments and writes their reports.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cone::TruncatingHalfspace;
use crate::dsl::{CtorExpr, Decl, ExperimentDecl, ExperimentKind, ExperimentSpec, RingKind};
use crate::error::Error;
use crate::family::{FamilyConstructor, PFamily};
use crate::lab::{default_tolerance, ColengthCache, Lab, LabOptions};
use crate::lattice::{LatticePoint, WeightVector};
use crate::pbody::{fujita_check, limit_check_3_17};
use crate::report::{rational_string, CompareOn, ConvergenceReport, SequencePoint, Verdict};
use crate::sampling::McOptions;
use crate::semigroup::make_standard_semigroup;
use crate::toric::{MonomialIdeal, ToricRing};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{context}: {source}")]
    Domain {
        context: String,
        #[source]
        source: Error,
    },
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

fn domain(context: impl Into<String>) -> impl FnOnce(Error) -> RunError {
    let context = context.into();
    move |source| RunError::Domain { context, source }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Default)]
pub struct RunOptions {
    /// Where report files go; nothing is written when absent.
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    /// Default seed for experiments that do not set one.
    pub seed: Option<u64>,
    pub cache: Option<Arc<dyn ColengthCache>>,
}

/// The ring, ideals and families declared by a spec.
pub struct Model {
    pub ring: Arc<ToricRing>,
    pub ideals: HashMap<String, MonomialIdeal>,
    pub families: HashMap<String, Arc<PFamily>>,
}

fn points(gens: &[Vec<i64>]) -> Vec<LatticePoint> {
    gens.iter().map(|g| LatticePoint::from_i64(g)).collect()
}

fn eval_error(context: &str) -> impl Fn(String) -> Error + '_ {
    move |m| Error::InvalidParameter(format!("{context}: {m}"))
}

fn custom_rule(name: &str, ring: &Arc<ToricRing>, ideals: &HashMap<String, MonomialIdeal>, ctor: &CtorExpr) -> FamilyConstructor {
    let label = name.to_string();
    match ctor.clone() {
        CtorExpr::CustomPower(base, expr) => {
            let base = ideals[&base].clone();
            let ctx = label.clone();
            FamilyConstructor::Custom {
                label,
                ring: ring.clone(),
                rule: Arc::new(move |q| {
                    let n = expr.eval_integer(q).map_err(eval_error(&ctx))?;
                    if !n.is_positive() {
                        return Err(Error::InvalidParameter(format!("{ctx}: exponent {n} at q = {q} is not positive")));
                    }
                    base.ordinary_power(n.to_u64().ok_or(Error::Overflow)?)
                }),
            }
        }
        CtorExpr::CustomTemplate(gens) => {
            let r = ring.clone();
            let ctx = label.clone();
            FamilyConstructor::Custom {
                label,
                ring: ring.clone(),
                rule: Arc::new(move |q| {
                    let pts = gens
                        .iter()
                        .map(|g| {
                            let coords = g
                                .iter()
                                .map(|e| e.eval_integer(q).map_err(eval_error(&ctx)))
                                .collect::<Result<Vec<BigInt>, Error>>()?;
                            LatticePoint::new(coords)
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    MonomialIdeal::new(r.clone(), &pts)
                }),
            }
        }
        _ => unreachable!("only custom constructors reach here"),
    }
}

/// Builds every declared object, checking semigroup standardness, weights
/// and that ideal generators lie in the semigroup. Families are not
/// validated here.
pub fn build_model(spec: &ExperimentSpec) -> Result<Model, RunError> {
    let r = &spec.ring;
    let semigroup = match &r.kind {
        RingKind::Regular => crate::semigroup::StandardSemigroup::regular(r.d),
        RingKind::Semigroup(gens) => make_standard_semigroup(&points(gens), None),
    }
    .map_err(domain("ring"))?;
    let a = r
        .a
        .clone()
        .map(WeightVector::new)
        .transpose()
        .map_err(domain("ring weights"))?;
    let ring = Arc::new(ToricRing::new(Arc::new(semigroup), r.p, a).map_err(domain("ring"))?);
    let mut ideals = HashMap::new();
    let mut families = HashMap::new();
    for decl in &spec.decls {
        match decl {
            Decl::Ideal(i) => {
                let ideal = MonomialIdeal::new(ring.clone(), &points(&i.gens)).map_err(domain(format!("ideal {}", i.name)))?;
                ideals.insert(i.name.clone(), ideal);
            }
            Decl::Family(f) => {
                let ctor = match &f.ctor {
                    CtorExpr::Frobenius(i) => FamilyConstructor::Frobenius(ideals[i].clone()),
                    CtorExpr::Power(i, t) => FamilyConstructor::Power(ideals[i].clone(), t.clone()),
                    CtorExpr::Cartier(i) => FamilyConstructor::Cartier(ideals[i].clone()),
                    c => custom_rule(&f.name, &ring, &ideals, c),
                };
                let fam = PFamily::from_constructor(ctor)
                    .map_err(domain(format!("family {}", f.name)))?
                    .with_label(f.name.clone());
                families.insert(f.name.clone(), Arc::new(fam));
            }
            Decl::Experiment(_) => {}
        }
    }
    Ok(Model { ring, ideals, families })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedReport {
    pub tag: String,
    pub report: ConvergenceReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    /// `<index>-<kind>-<family>`, also the output file stem.
    pub name: String,
    pub kind: ExperimentKind,
    pub family: String,
    pub verdict: Verdict,
    pub reports: Vec<TaggedReport>,
    pub details: Value,
}

fn mc_options(e: &ExperimentDecl, opts: &RunOptions) -> McOptions {
    let base = McOptions::default();
    McOptions {
        samples: e.params.samples.unwrap_or(base.samples),
        seed: e.params.seed.or(opts.seed).unwrap_or(base.seed),
    }
}

fn rat(x: &BigRational) -> Value {
    Value::String(rational_string::encode(x))
}

fn run_one(index: usize, e: &ExperimentDecl, model: &Model, opts: &RunOptions) -> Result<ExperimentOutcome, RunError> {
    let name = format!("{}-{}-{}", index + 1, e.kind.keyword(), e.family);
    let ctx = name.clone();
    let family = model.families[&e.family].clone();
    let ring = &model.ring;
    let e_max = e.params.e_max.expect("required by the parser");
    let mc = mc_options(e, opts);
    let tol = e.params.tol.clone().unwrap_or_else(|| default_tolerance(ring));
    let lab = {
        let lab = Lab::new(LabOptions {
            mc,
            ..LabOptions::default()
        });
        match &opts.cache {
            Some(c) => lab.with_cache(c.clone()),
            None => lab,
        }
    };
    let halfspace = |alpha: &BigRational| {
        TruncatingHalfspace::new(ring.a().clone(), alpha.clone()).map_err(domain(ctx.clone()))
    };
    let (verdict, reports, details) = match e.kind {
        ExperimentKind::Volmult => {
            let r = lab.vol_mult_check(&family, e_max, tol).map_err(domain(ctx.clone()))?;
            let details = json!({
                "estimates": r.estimates,
                "spread": rat(&r.spread),
                "tolerance": rat(&r.tolerance),
                "halfspace": r.halfspace,
            });
            let reports = vec![
                TaggedReport { tag: "length".into(), report: r.length },
                TaggedReport { tag: "hk".into(), report: r.hk },
                TaggedReport { tag: "pbody".into(), report: r.pbody },
            ];
            (r.verdict, reports, details)
        }
        ExperimentKind::Limit317 => {
            let h = halfspace(e.params.alpha.as_ref().expect("required"))?;
            let system = Arc::new(family.to_system().map_err(domain(ctx.clone()))?);
            let r = limit_check_3_17(&system, &h, 0..=e_max, tol, &mc).map_err(domain(ctx.clone()))?;
            let details = json!({ "alpha": rat(h.alpha()) });
            (r.verdict, vec![TaggedReport { tag: "count".into(), report: r }], details)
        }
        ExperimentKind::Fujita => {
            if e_max >= 1 {
                family
                    .validate(e_max)
                    .and_then(|v| v.into_result())
                    .map_err(domain(ctx.clone()))?;
            }
            let h = halfspace(e.params.alpha.as_ref().expect("required"))?;
            let eps = e.params.epsilon.clone().expect("required");
            let system = Arc::new(family.to_system().map_err(domain(ctx.clone()))?);
            let r = fujita_check(&system, &h, &eps, e_max, e.params.target.clone(), &mc).map_err(domain(ctx.clone()))?;
            let sequence = r
                .rows
                .iter()
                .map(|row| SequencePoint {
                    e: row.e,
                    q: row.q,
                    value: row.inner.value.clone(),
                })
                .collect();
            let std_err = r.rows.iter().filter_map(|row| row.inner.std_err).reduce(f64::max);
            let report = ConvergenceReport::new("fujita inner volume", sequence).with_target(
                r.target.clone(),
                std_err,
                eps.clone(),
                CompareOn::LastValue,
            );
            let verdict = if r.q0.is_some() { Verdict::Pass } else { Verdict::Fail };
            let details = json!({
                "q0": r.q0,
                "epsilon": rat(&eps),
                "target": rat(&r.target),
                "threshold": rat(&r.threshold),
                "rows": r.rows,
            });
            (verdict, vec![TaggedReport { tag: "inner".into(), report }], details)
        }
        ExperimentKind::Validate => {
            let v = family.validate(e_max).map_err(domain(ctx.clone()))?;
            let verdict = if v.passed() { Verdict::Pass } else { Verdict::Fail };
            (verdict, Vec::new(), serde_json::to_value(&v).expect("serialisable"))
        }
    };
    Ok(ExperimentOutcome {
        name,
        kind: e.kind,
        family: e.family.clone(),
        verdict,
        reports,
        details,
    })
}

/// Runs every experiment in order and writes reports when an output
/// directory is configured.
pub fn run_experiment(spec: &ExperimentSpec, opts: &RunOptions) -> Result<Vec<ExperimentOutcome>, RunError> {
    let model = build_model(spec)?;
    let mut outcomes = Vec::new();
    for (i, e) in spec.experiments().enumerate() {
        let outcome = run_one(i, e, &model, opts)?;
        if let Some(dir) = &opts.out_dir {
            let dir = match &e.params.out {
                Some(sub) => dir.join(sub),
                None => dir.clone(),
            };
            emit_report(&outcome, opts.format, &dir)?;
        }
        outcomes.push(outcome);
    }
    Ok(outcomes)
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// Writes one outcome. CSV gives one file per series with columns
/// `e,q,value_num,value_den,limit,target,verdict` plus a one-row summary;
/// JSON gives a single document holding the whole outcome.
pub fn emit_report(outcome: &ExperimentOutcome, format: OutputFormat, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    match format {
        OutputFormat::Json => {
            let path = dir.join(format!("{}.json", outcome.name));
            let text = serde_json::to_string_pretty(outcome).expect("serialisable");
            fs::write(&path, text + "\n").map_err(io_err(&path))?;
            written.push(path);
        }
        OutputFormat::Csv => {
            for tagged in &outcome.reports {
                let path = dir.join(format!("{}-{}.csv", outcome.name, tagged.tag));
                let r = &tagged.report;
                let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                })?;
                let csv_err = |e: csv::Error| RunError::Io {
                    path: path.display().to_string(),
                    message: e.to_string(),
                };
                w.write_record(["e", "q", "value_num", "value_den", "limit", "target", "verdict"])
                    .map_err(csv_err)?;
                let limit = rational_string::encode(&r.extrapolated_limit);
                let target = r.comparison_target.as_ref().map(rational_string::encode).unwrap_or_default();
                for p in &r.sequence {
                    w.write_record([
                        p.e.to_string(),
                        p.q.to_string(),
                        p.value.numer().to_string(),
                        p.value.denom().to_string(),
                        limit.clone(),
                        target.clone(),
                        verdict_word(r.verdict).to_string(),
                    ])
                    .map_err(csv_err)?;
                }
                w.flush().map_err(io_err(&path))?;
                written.push(path.clone());
            }
            let path = dir.join(format!("{}-summary.csv", outcome.name));
            let mut w = csv::Writer::from_path(&path).map_err(|e| RunError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            let csv_err = |e: csv::Error| RunError::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            };
            w.write_record(["name", "kind", "family", "verdict", "details"]).map_err(csv_err)?;
            w.write_record([
                outcome.name.as_str(),
                outcome.kind.keyword(),
                outcome.family.as_str(),
                verdict_word(outcome.verdict),
                &outcome.details.to_string(),
            ])
            .map_err(csv_err)?;
            w.flush().map_err(io_err(&path))?;
            written.push(path);
        }
    }
    Ok(written)
}
