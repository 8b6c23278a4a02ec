//! Running a configured experiment in memory, the way the `tclab` binary does
//! before it commits files.

use tclab::harness::{execute, ExperimentConfig};

fn main() {
    let text = r#"
experiment = "clock-mean"
seed = 5

[clock-mean]
times = [0.5, 1.0, 2.0]
n_paths = 20000
rate_model = { model = "cir", kappa = 3.0, theta = 1.0, sigma_v = 0.5, v0 = 1.0 }
"#;
    let config = match ExperimentConfig::from_toml(text) {
        Ok(c) => c,
        Err(e) => panic!("{e:?}"),
    };
    let outputs = execute(&config).expect("experiment runs");
    println!("{}", outputs.summary);
    for (name, bytes) in &outputs.files {
        println!("{name}: {} bytes", bytes.len());
    }
    print!("{}", String::from_utf8_lossy(outputs.file("clock_mean.csv").unwrap()));
}
