//! Validate an arbitrary config file and run it, like `decohere run`.
//!
//! ```text
//! cargo run --release --example run_config -- configs/figure1.toml
//! ```

use conjugate_decoherence::config::ExperimentConfig;
use conjugate_decoherence::runner::run;

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "configs/figure1.toml".into());
    let outcome = ExperimentConfig::from_path(&path).and_then(|cfg| {
        print!("{}", cfg.to_toml());
        run(&cfg)
    });
    match outcome {
        Ok(report) => {
            for row in &report.rows {
                let m = &row.metrics;
                println!(
                    "t = {:5.1} {:<8}  purity {:.5}  entropy {:.4}  raw trace {:.12}",
                    m.t,
                    m.basis.as_str(),
                    m.purity,
                    m.entropy,
                    row.raw_trace
                );
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
