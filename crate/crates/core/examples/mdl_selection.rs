// Two-part code model selection on noisy quadratic data.

use std::error::Error;

use red_kit::harness::{gen_regression_novelty, Switch};
use red_kit::mdl::{fit_candidate, fit_family, Family};

pub fn run() -> Result<(), Box<dyn Error>> {
    let data = gen_regression_novelty(1, 200, 50, Switch::PolyToSine)?.train;
    let fit = fit_family(&data, Family::Polynomial, 8)?;
    for t in &fit.per_k_totals {
        let mark = if t.k == fit.hypothesis.term_count() {
            "  <- selected"
        } else {
            ""
        };
        println!("k={} total {:.1} bits{mark}", t.k, t.total.bits());
    }
    println!("coefficients {:?}", fit.hypothesis.coefficients());
    println!(
        "L(H) = {:.1}, L(D|H) = {:.1}",
        fit.l_h.bits(),
        fit.l_d.bits()
    );

    let interpolant = fit_candidate(&data, Family::Polynomial, data.len())?;
    println!(
        "{}-term fit: {:.1} bits",
        data.len(),
        interpolant.total().bits()
    );

    let fourier = fit_family(&data, Family::Fourier, 8)?;
    println!(
        "best fourier: k={} at {:.1} bits",
        fourier.hypothesis.term_count(),
        fourier.total.bits()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
