use std::process::ExitCode;

use chainrisk::cli::{run, Cli};
use clap::Parser;

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("CHAINRISK_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("CHAINRISK_THREADS must be a positive integer, got `{v}`"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match run(&cli) {
        Ok(m) => {
            if let Some(reports) = m.metrics.get("reports").and_then(|r| r.as_array()) {
                for r in reports {
                    println!(
                        "{:<5}  auc {:.4}  ks {:.4}",
                        r["split"].as_str().unwrap_or("?"),
                        r["auc"].as_f64().unwrap_or(f64::NAN),
                        r["ks"].as_f64().unwrap_or(f64::NAN)
                    );
                }
            } else {
                println!("{}", serde_json::to_string_pretty(&m.metrics).unwrap_or_default());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
