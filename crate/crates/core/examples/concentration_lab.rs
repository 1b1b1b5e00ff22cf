//! The lemma suites, Bernstein MGF checks and bound-coverage experiments.
//!
//! ```text
//! cargo run --release --example concentration_lab -- [--full] [out_dir]
//! ```

use std::path::PathBuf;

use pacbandit::lab::{run_lab, LabOptions};

fn main() -> pacbandit::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let opts = if args.iter().any(|a| a == "--full") { LabOptions::default() } else { LabOptions::quick() };
    let out = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .map(PathBuf::from)
        .unwrap_or_else(|| "out/lab".into());
    let report = run_lab(&opts)?;
    print!("{}", report.to_table());
    let (txt, _) = report.write(&out)?;
    println!("report: {}", txt.display());
    if !report.all_passed() {
        std::process::exit(1);
    }
    Ok(())
}
