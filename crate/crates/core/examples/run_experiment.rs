//! Drive the experiment runner from a JSON config and list the artifacts.
//!
//! `cargo run --example run_experiment -- [config.json] [out_dir]`

use fracsus::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use std::path::PathBuf;

fn main() {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(p) => ExperimentConfig::load(p.as_ref()),
        None => Ok(ExperimentConfig::default()),
    };
    let cfg = cfg.unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(e.exit_code());
    });
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/example".into()));
    for kind in [ExperimentKind::Density, ExperimentKind::Response, ExperimentKind::Susceptibility] {
        match run_experiment(kind, &cfg, &out.join(format!("{kind:?}").to_lowercase())) {
            Ok(m) => println!("{kind:?}: {:?} in {:.2}s", m.files, m.timings.iter().map(|(_, s)| s).sum::<f64>()),
            Err(e) => {
                eprintln!("{kind:?}: {e}");
                std::process::exit(e.exit_code());
            }
        }
    }
}
