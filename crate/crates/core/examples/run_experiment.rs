//! Drive an experiment from a TOML config and write its report and tables.

use fingap::cli::{run, ExperimentConfig};

const CONFIG: &str = r#"
kind = "sum_rule"
endpoints = [-2.0, -1.0, 1.0, 2.0]

[operator]
tail = { kind = "periodic", a = [1.5, 0.5], b = [0.0, 0.0] }
head = [{ n = 1, a = 1.0, b = 0.0 }, { n = 2, a = 0.7, b = 0.2 }]

[knobs]
horizon = 20
"#;

fn main() -> fingap::Result<()> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let out = run(&cfg);
    for c in &out.report.checks {
        println!(
            "{:<24} {:.2e} < {:.0e}: {}",
            c.name, c.value, c.tolerance, c.pass
        );
    }
    println!(
        "results {}",
        serde_json::to_string_pretty(&out.report.results).unwrap()
    );
    let dir = std::env::temp_dir().join("fingap-example");
    let paths = out.write(&dir).expect("writable temp dir");
    println!("wrote {paths:?}");
    Ok(())
}
