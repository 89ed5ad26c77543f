mod common;

use std::sync::Arc;

use common::*;
use plab::dsl::parse_spec;
use plab::lab::ColengthCache;
use plab::report::Verdict;
use plab::runner::*;
use plab::store::DiskCache;

fn sample() -> Vec<ExperimentOutcome> {
    run_experiment(&parse_spec(SAMPLE_SPEC).unwrap(), &RunOptions::default()).unwrap()
}

#[test]
fn sample_experiments() {
    let out = sample();
    assert_eq!(out.len(), 3);
    let vol = &out[0];
    assert_eq!(vol.name, "1-volmult-F");
    assert_eq!(vol.verdict, Verdict::Pass);
    let tags: Vec<&str> = vol.reports.iter().map(|r| r.tag.as_str()).collect();
    assert_eq!(tags, ["length", "hk", "pbody"]);
    for r in &vol.reports {
        assert!(r.report.sequence.iter().all(|p| p.value == rat(6, 1)), "{}", r.tag);
    }
    assert_eq!(vol.details["spread"], "0/1");

    let fujita = &out[1];
    assert_eq!(fujita.verdict, Verdict::Pass);
    assert_eq!(fujita.details["q0"], 8);
    for p in &fujita.reports[0].report.sequence {
        let q = p.q as i64;
        let expected = rat(2, 1) - rat((q + 2) / 3, q) * rat((q + 1) / 2, q);
        assert_eq!(p.value, expected);
    }

    let bad = &out[2];
    assert_eq!(bad.verdict, Verdict::Fail);
    assert!(bad.reports.is_empty());
    let v = &bad.details["violation"];
    assert_eq!(v["e"], 0);
    assert_eq!((&v["generator"], &v["witness"]), (&"(1,0)".into(), &"(2,0)".into()));
}

#[test]
fn limit_experiment() {
    let spec = "ring d=2 p=2 regular a=1,1
ideal M = (1,0),(0,1)
family F = power(M, 1)
experiment limit317 F e_max=8 alpha=2 tol=1/100";
    let out = run_experiment(&parse_spec(spec).unwrap(), &RunOptions::default()).unwrap();
    let r = &out[0].reports[0].report;
    assert_eq!(out[0].verdict, Verdict::Pass);
    for p in &r.sequence {
        assert_eq!(p.value, rat(3, 2) + rat(1, 2 * p.q as i64));
    }
    assert_eq!(r.extrapolated_limit, rat(3, 2));
}

#[test]
fn build_errors_name_the_object() {
    let spec = parse_spec("ring d=2 p=2 semigroup (1,0),(-1,0)\n").unwrap();
    let err = build_model(&spec).err().unwrap();
    assert!(err.to_string().starts_with("ring"), "{err}");
    let spec = parse_spec("ring d=2 p=2 regular\nideal I = (1,1)\nfamily F = frobenius(I)\nexperiment volmult F e_max=2").unwrap();
    let err = run_experiment(&spec, &RunOptions::default()).err().unwrap();
    assert!(err.to_string().contains("1-volmult-F"), "{err}");
    let spec = parse_spec("ring d=1 p=2 regular\nideal I = (1)\nfamily F = custom(I, q/3)\nexperiment validate F e_max=2").unwrap();
    assert!(run_experiment(&spec, &RunOptions::default()).is_err());
}

#[test]
fn csv_and_json_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = sample();
    let files = emit_report(&out[0], OutputFormat::Csv, dir.path()).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["1-volmult-F-length.csv", "1-volmult-F-hk.csv", "1-volmult-F-pbody.csv", "1-volmult-F-summary.csv"]
    );
    let mut rdr = csv::Reader::from_path(&files[0]).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["e", "q", "value_num", "value_den", "limit", "target", "verdict"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    for (e, row) in rows.iter().enumerate() {
        assert_eq!(row[0], e.to_string());
        assert_eq!(row[1], (1u64 << e).to_string());
        assert_eq!((&row[2], &row[3]), ("6", "1"));
        assert_eq!(&row[6], "pass");
    }

    let json = emit_report(&out[1], OutputFormat::Json, dir.path()).unwrap();
    assert_eq!(json.len(), 1);
    let text = std::fs::read_to_string(&json[0]).unwrap();
    let back: ExperimentOutcome = serde_json::from_str(&text).unwrap();
    assert_eq!(back, out[1]);
}

#[test]
fn out_param_is_a_subdirectory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = "ring d=1 p=3 regular
ideal I = (2)
family F = frobenius(I)
experiment validate F e_max=2 out=\"checks\"";
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        format: OutputFormat::Json,
        ..RunOptions::default()
    };
    run_experiment(&parse_spec(spec).unwrap(), &opts).unwrap();
    assert!(dir.path().join("checks").join("1-validate-F.json").exists());
}

const A1_SPEC: &str = "ring d=2 p=2 semigroup (1,0),(1,1),(1,2)
ideal M = (1,0),(1,1),(1,2)
family F = frobenius(M)
experiment volmult F e_max=3 samples=20000 seed=11";

#[test]
fn disk_cache_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = parse_spec(A1_SPEC).unwrap();
    let cold = run_experiment(&spec, &RunOptions::default()).unwrap();
    let cache = Arc::new(DiskCache::open(dir.path().join("cache")).unwrap());
    let opts = RunOptions {
        cache: Some(cache.clone() as Arc<dyn ColengthCache>),
        ..RunOptions::default()
    };
    let first = run_experiment(&spec, &opts).unwrap();
    assert!(!cache.is_empty());
    let entries = cache.len();
    let warm = run_experiment(&spec, &opts).unwrap();
    assert_eq!(cache.len(), entries);
    assert_eq!(serde_json::to_string(&cold).unwrap(), serde_json::to_string(&first).unwrap());
    assert_eq!(serde_json::to_string(&cold).unwrap(), serde_json::to_string(&warm).unwrap());
    DiskCache::clear(cache.dir()).unwrap();
    assert!(!cache.dir().exists());
}

#[test]
fn thread_count_does_not_change_results() {
    let spec = parse_spec(A1_SPEC).unwrap();
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| serde_json::to_string(&run_experiment(&spec, &RunOptions::default()).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn seeds_come_from_the_experiment_first() {
    let spec = parse_spec(A1_SPEC).unwrap();
    let with = |seed| RunOptions {
        seed: Some(seed),
        ..RunOptions::default()
    };
    let a = run_experiment(&spec, &with(1)).unwrap();
    let b = run_experiment(&spec, &with(2)).unwrap();
    assert_eq!(a, b);
    let unseeded = parse_spec(&A1_SPEC.replace(" seed=11", "")).unwrap();
    let a = run_experiment(&unseeded, &with(1)).unwrap();
    let b = run_experiment(&unseeded, &with(2)).unwrap();
    assert_ne!(a[0].details["estimates"], b[0].details["estimates"]);
}
