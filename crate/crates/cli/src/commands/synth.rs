use std::process::ExitCode;

use whydiffer::synth::{generate, SynthSpec};

use crate::failure::Failure;
use crate::Globals;

pub fn run(globals: &Globals, n: usize, noise: f64, workers: usize) -> Result<ExitCode, Failure> {
    let spec = SynthSpec {
        n,
        seed: globals.seed,
        noise,
        n_workers: workers,
    };
    let fixture = generate(&spec)?;
    fixture.write_to(&globals.out)?;
    let k = usize::from(globals.threshold_or_default().get()) - 1;
    println!("wrote {n} records to {}", globals.out.display());
    for t in &fixture.truth.labels {
        let planted = t
            .planted_ground_truth_rate
            .map_or_else(|| "-".to_string(), |r| format!("{:.3}", r[k]));
        println!(
            "{}  planted {planted:>5}  realized {:.3}",
            t.label, t.realized_ground_truth_rate[k]
        );
    }
    Ok(ExitCode::SUCCESS)
}
