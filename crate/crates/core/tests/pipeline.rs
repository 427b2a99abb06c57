use std::path::Path;

use primespiral::config::ExperimentConfig;
use primespiral::metrics::{Metric, MetricsBundle};
use primespiral::report::{self, CrossEvalMatrix, MockPredictor, PredictionSource, RangeData, ReportFormat};
use primespiral::Error;

fn small_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::default();
    c.ranges = vec!["1:1_050_625".into(), "1_050_625:4_198_401".into()];
    c.block_size = 64;
    c.block_count = 24;
    c.n_train = 16;
    c.n_val = 4;
    c.bootstrap_replicates = 300;
    c
}

/// Writes one run of predictions for every (train, test) cell.
fn write_run(root: &Path, data: &[RangeData], mock: MockPredictor, key: u64) {
    for train in data {
        for test in data {
            for i in test.eval_indices() {
                let id = test.manifest.entries[i].block_id;
                let path = report::prediction_path(root, &train.range().name, &test.range().name, id);
                std::fs::create_dir_all(path.parent().unwrap()).unwrap();
                mock.predict(&test.blocks[i], train.train_prevalence(), key, id)
                    .write(&path)
                    .unwrap();
            }
        }
    }
}

#[test]
fn file_predictions_match_the_mock_source() {
    let config = small_config();
    let data = report::prepare_ranges(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &data, MockPredictor::Oracle, 0);
    let m = report::run_pipeline_on(&data, &config, &PredictionSource::Files(dir.path().into())).unwrap();
    for row in &m.cells {
        for cell in row {
            assert_eq!(cell.accuracy_micro_f1, 1.0);
            assert_eq!(cell.white_f1, 1.0);
        }
    }
}

#[test]
fn run_directories_are_averaged() {
    let config = small_config();
    let data = report::prepare_ranges(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let noisy = MockPredictor::NoisyOracle { corruption: 0.2 };
    for (r, mock) in [(1, MockPredictor::Oracle), (2, noisy)] {
        write_run(&dir.path().join(format!("run-{r}")), &data, mock, 5);
    }
    let both = report::run_pipeline_on(&data, &config, &PredictionSource::Files(dir.path().into())).unwrap();

    let single = tempfile::tempdir().unwrap();
    write_run(single.path(), &data, noisy, 5);
    let only_noisy = report::run_pipeline_on(&data, &config, &PredictionSource::Files(single.path().into())).unwrap();

    for t in 0..2 {
        for s in 0..2 {
            let want = (1.0 + only_noisy.cell(t, s).accuracy_micro_f1) / 2.0;
            assert!((both.cell(t, s).accuracy_micro_f1 - want).abs() < 1e-12);
        }
    }
}

#[test]
fn missing_predictions_are_listed() {
    let config = small_config();
    let data = report::prepare_ranges(&config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run(dir.path(), &data, MockPredictor::Oracle, 0);
    let victim = report::prediction_path(
        dir.path(),
        &data[0].range().name,
        &data[1].range().name,
        data[1].manifest.entries[data[1].eval_indices()[0]].block_id,
    );
    std::fs::remove_file(&victim).unwrap();
    match report::run_pipeline_on(&data, &config, &PredictionSource::Files(dir.path().into())) {
        Err(Error::MissingPredictions(paths)) => assert_eq!(paths, vec![victim]),
        other => panic!("unexpected {other:?}"),
    }
}

fn synthetic_matrix(names: &[&str]) -> CrossEvalMatrix {
    let n = names.len();
    let cells = (0..n)
        .map(|t| {
            (0..n)
                .map(|s| {
                    let mut b = MetricsBundle::default();
                    for (k, m) in Metric::ALL.into_iter().enumerate() {
                        b.set(m, (t * n + s) as f64 / (n * n) as f64 + k as f64 * 1e-3);
                        b.half_widths.insert(m, 0.001);
                    }
                    b
                })
                .collect()
        })
        .collect();
    let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    CrossEvalMatrix {
        train_ranges: names.clone(),
        test_ranges: names,
        cells,
    }
}

#[test]
fn full_report_has_eight_square_tables() {
    let names = ["25m", "50m", "100m", "200m", "300m", "400m", "500m"];
    let matrix = synthetic_matrix(&names);
    let dir = tempfile::tempdir().unwrap();
    let files = report::emit_report(&matrix, ReportFormat::parse("csv").unwrap(), dir.path()).unwrap();
    assert_eq!(files.len(), 8);
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 8, "{}", f.display());
        assert!(rows.iter().all(|r| r.len() == 8), "{}", f.display());
        assert_eq!(&rows[0][1..], &names[..]);
    }

    let md = report::emit_report(&matrix, ReportFormat::parse("markdown").unwrap(), dir.path()).unwrap();
    let text = std::fs::read_to_string(&md[0]).unwrap();
    let table: Vec<&str> = text.lines().filter(|l| l.starts_with('|')).collect();
    assert_eq!(table.len(), 9); // header, rule, seven rows
    assert!(text.contains("(±0.0010)"), "{text}");

    let json = report::emit_report(&matrix, ReportFormat::parse("json").unwrap(), dir.path()).unwrap();
    assert_eq!(json.len(), 8);
    assert_eq!(CrossEvalMatrix::from_json(&matrix.to_json().unwrap()).unwrap(), matrix);
}
