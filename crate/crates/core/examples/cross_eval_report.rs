//! Cross-evaluation over several bands with a built-in predictor, written as
//! one table per metric in every report format.
//!
//! ```text
//! cargo run --release --example cross_eval_report -- ratio report/
//! ```
//!
//! The default configuration is desk-sized: three small bands and 64px
//! blocks. Pass a config file as the third argument to run the full setup.

use std::path::PathBuf;

use primespiral::config::ExperimentConfig;
use primespiral::metrics::Metric;
use primespiral::report::{self, MockPredictor, PredictionSource, ReportFormat};

fn main() -> primespiral::Result<()> {
    let mut args = std::env::args().skip(1);
    let mock = MockPredictor::parse(&args.next().unwrap_or_else(|| "noisy-oracle:0.05".into()))?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| "report-out".into()));
    let config = match args.next() {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::parse(
            "ranges = 1:1_050_625, 1_050_625:4_198_401, 4_198_401:9_443_329\n\
             block_size = 64\nblock_count = 80\nn_train = 50\nn_val = 10\n\
             bootstrap_replicates = 2000\n",
        )?,
    };

    let matrix = report::run_pipeline(&config, &PredictionSource::Mock(mock))?;
    std::fs::create_dir_all(&out).map_err(|e| primespiral::Error::Io { path: out.clone(), source: e })?;
    for fmt in ["csv", "markdown", "html", "json"] {
        report::emit_report(&matrix, ReportFormat::parse(fmt)?, &out)?;
    }
    print!("{}", matrix.table(Metric::WhiteF1).to_markdown());
    println!("\ntables written to {}", out.display());
    Ok(())
}
