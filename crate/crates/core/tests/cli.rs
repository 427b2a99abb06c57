use std::path::Path;
use std::process::{Command, Output};

use primespiral::dataset::BlockManifest;

fn run(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_primespiral"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn baseline_prints_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&run(dir.path(), &["baseline", "--p", "0.0527", "--q", "0.0527"]));
    assert!(text.contains("0.900155"), "{text}");
    let text = stdout(&run(dir.path(), &["baseline", "--p", "0.3", "--q", "1"]));
    assert!(text.lines().any(|l| l.contains("recall") && l.ends_with("1.000000")), "{text}");
}

#[test]
fn sieve_counts_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&run(dir.path(), &["sieve", "--hi", "1000001", "--out", "p.upb"]));
    assert!(text.contains("78498"), "{text}");
    let bm = primespiral::primes::PrimalityBitmap::read_upb1(&dir.path().join("p.upb")).unwrap();
    assert_eq!(primespiral::primes::count_primes(&bm), 78_498);
}

#[test]
fn render_writes_image_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["render", "--range", "1:10_201", "--out", "img"]);
    let img = primespiral::pgm::read(&dir.path().join("img/1_10201.pgm")).unwrap();
    assert_eq!(img.shape(), (101, 101));
    assert!(dir.path().join("img/1_10201.json").is_file());
}

#[test]
fn dataset_workflow_and_topk_eval() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let blocks = |out: &str, jobs: &str| {
        run(
            d,
            &["blocks", "--range", "1:1_050_625", "--count", "12", "--size", "256", "--jobs", jobs, "--out", out],
        )
    };
    blocks("a", "1");
    blocks("b", "3");
    let manifest = "a/manifest-1_1050625.json";
    let a = std::fs::read(d.join(manifest)).unwrap();
    let b = std::fs::read(d.join("b/manifest-1_1050625.json")).unwrap();
    assert_eq!(a, b, "manifest depends on --jobs");

    run(d, &["split", "--manifest", manifest, "--train", "8", "--val", "2"]);
    let m = BlockManifest::read(&d.join(manifest)).unwrap();
    assert_eq!(m.entries.len(), 12);
    assert_eq!(m.role_count(primespiral::dataset::Role::Test), 2);

    let text = stdout(&run(d, &["mask", "--manifest", manifest, "--ratio", "0.3"]));
    assert!(text.contains("12 masks"), "{text}");

    run(d, &["mock", "--manifest", manifest, "--kind", "ratio", "--out", "pred"]);
    let eval = |jobs: &str, out: &str| {
        stdout(&run(
            d,
            &[
                "eval", "--manifest", manifest, "--predictions", "pred", "--topk", "0.06",
                "--replicates", "500", "--jobs", jobs, "--out", out,
            ],
        ))
    };
    let text = eval("1", "e1.json");
    let counts: Vec<&str> = text.lines().filter(|l| l.starts_with("block ")).collect();
    assert_eq!(counts.len(), 12);
    assert!(counts.iter().all(|l| l.ends_with("predicted white 3932")), "{text}");
    eval("2", "e2.json");
    assert_eq!(
        std::fs::read(d.join("e1.json")).unwrap(),
        std::fs::read(d.join("e2.json")).unwrap()
    );
}

#[test]
fn density_csv() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&run(
        dir.path(),
        &["density", "--from", "1000", "--to", "100000000", "--points", "5", "--normalize"],
    ));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,index");
    assert_eq!(lines.len(), 6);
    assert!(lines[1].ends_with(",1"), "{text}");
}

#[test]
fn report_from_config_and_mock() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("exp.cfg"),
        "ranges = 1:1_050_625, 1_050_625:4_198_401\nblock_size = 64\nblock_count = 30\n\
         n_train = 20\nn_val = 5\nbootstrap_replicates = 200\nruns_to_average = 1\n",
    )
    .unwrap();
    let text = stdout(&run(
        d,
        &["report", "--config", "exp.cfg", "--mock", "oracle", "--format", "csv,markdown", "--out", "rep"],
    ));
    assert!(text.contains("matrix.json"));
    let csv = std::fs::read_to_string(d.join("rep/accuracy_micro_f1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().contains("1.0000"), "{csv}");
    assert!(d.join("rep/white_f1.md").is_file());
}

#[test]
fn bad_arguments_fail() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["baseline", "--p", "1.5", "--q", "0.1"][..],
        &["render", "--range", "12m"],
        &["sieve", "--lo", "10", "--hi", "5"],
    ] {
        let out = Command::new(env!("CARGO_BIN_EXE_primespiral"))
            .current_dir(dir.path())
            .args(args)
            .output()
            .unwrap();
        assert!(!out.status.success(), "{args:?} should fail");
    }
}

#[test]
fn render_preset_25m_is_5001_square() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), &["render", "--range", "25m"]);
    let len = std::fs::metadata(dir.path().join("25m.pgm")).unwrap().len();
    let header = "P5\n5001 5001\n255\n".len() as u64;
    assert_eq!(len, header + 5001 * 5001);
}

#[test]
fn report_json_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("exp.cfg"),
        "ranges = 1:1_050_625, 1_050_625:4_198_401\nblock_size = 64\nblock_count = 40\n\
         n_train = 20\nn_val = 10\nbootstrap_replicates = 500\n",
    )
    .unwrap();
    for jobs in ["1", "4"] {
        run(
            d,
            &["report", "--config", "exp.cfg", "--mock", "ratio", "--format", "json", "--jobs", jobs, "--out", jobs],
        );
    }
    for name in ["matrix.json", "white_f1.json", "black_recall.json"] {
        assert_eq!(
            std::fs::read(d.join("1").join(name)).unwrap(),
            std::fs::read(d.join("4").join(name)).unwrap(),
            "{name}"
        );
    }
}
