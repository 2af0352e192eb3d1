// Run experiment configurations for all three scenarios and print the reports.

use std::error::Error;

use red_kit::harness::{battery, run_experiment, ExperimentConfig};

pub fn run() -> Result<(), Box<dyn Error>> {
    let kg = ExperimentConfig::from_json(
        r#"{
            "scenario": "kg",
            "seed": 11,
            "kg": {"base_triples": 60, "novel_triples": 8},
            "tasks": [
                {"id": "main", "theta": 1.0, "omega": 1.0,
                 "curricula": [{"probability": 0.7}, {"probability": 0.3, "shuffle_seed": 5}]},
                {"id": "nuisance", "theta": 0.5, "omega": 0.0}
            ]
        }"#,
    )?;
    println!("config hash {}", kg.hash());
    print!("{}", run_experiment(&kg)?.to_json());

    for scenario in ["regression", "network"] {
        let cfg =
            ExperimentConfig::from_json(&format!(r#"{{"scenario": "{scenario}", "seed": 2}}"#))?;
        let report = run_experiment(&cfg)?;
        let t = &report.tasks[0];
        println!(
            "{scenario}: red {:.4}, pd {:.4}, eeff {:.4}, aeff {:.4}",
            t.red, t.pd, t.eeff, t.aeff.value
        );
    }

    for (seed, result) in battery(&kg, 3) {
        println!(
            "seed {seed}: aggregate {:?}",
            result.map(|r| r.aggregate).map_err(|e| e.to_string())
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
