//! Runs an experiment from an inline TOML config and prints the CSV table.

use loopcover::experiment::{run, ExperimentConfig};

const CONFIG: &str = r#"
kind = "phase-sweep"
sizes = [6, 8, 10, 12]

[killing]
rule = "exp-rate"
a = 0.6931471805599453

[params]
oracle = "dp"
"#;

fn main() -> loopcover::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let record = run(&config)?;
    print!("{}", record.to_csv());
    for d in &record.diagnostics {
        eprintln!("{d}");
    }
    Ok(())
}
