// Flag a regime switch by the jump in per-point code length.

use std::error::Error;

use red_kit::harness::{gen_regression_novelty, FittedModel, Switch, DEFAULT_MARGIN, DEFAULT_TAU};
use red_kit::mdl::{fit_family, Dataset, Family, DEFAULT_EPSILON};

pub fn run() -> Result<(), Box<dyn Error>> {
    let data = gen_regression_novelty(7, 200, 50, Switch::PolyToSine)?;
    let model = FittedModel::new(&data.train, fit_family(&data.train, Family::Polynomial, 8)?)?;

    let far = Dataset::new(vec![(3.0, 0.0), (3.5, 1.0), (4.0, -1.0)], DEFAULT_EPSILON)?;
    for (name, batch) in [
        ("same regime", &data.test_same),
        ("switched", &data.test_novel),
        ("out of range", &far),
    ] {
        let r = model.detect(batch, DEFAULT_TAU, DEFAULT_MARGIN)?;
        println!(
            "{name:>12}: {:.2} vs {:.2} bits/point, flagged {}, {:?}",
            r.batch_bits_per_point, r.baseline_bits_per_point, r.flagged, r.classification
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
