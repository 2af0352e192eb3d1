// Edit distance, priors, experience and adaptability on an injected KG novelty.

use std::error::Error;

use red_kit::compressor::CompressorId;
use red_kit::harness::gen_kg_novelty;
use red_kit::kg::{self, strip_novel};
use red_kit::metrics::{
    adaptability_aeff, experience_eff, priors_pd, red_estimate, AgentSnapshots, Curriculum, KgUnion,
};

pub fn run() -> Result<(), Box<dyn Error>> {
    let c = CompressorId::Lz;
    let g = gen_kg_novelty(3, 100, 20)?;
    let pretr = strip_novel(&g.post, &g.marks)?;
    let snaps = AgentSnapshots {
        pre: kg::encode(&g.pre)?,
        pretr: kg::encode(&pretr)?,
        post: kg::encode(&g.post)?,
    };

    let red = red_estimate(&snaps, Some((&pretr, &g.post)), &c)?;
    let pd = priors_pd(&snaps, &c)?;
    let curriculum = Curriculum::new(g.curriculum.clone(), 1.0)?;
    let exp = experience_eff(&snaps.post, &curriculum, &KgUnion, &g.pre, &c)?;
    let aeff = adaptability_aeff(red.red, pd, exp.eeff);

    println!(
        "red {:.4} (conditional {:.4}, edit script {:?})",
        red.red, red.conditional, red.edit_script
    );
    println!(
        "pd {pd:.4}, eeff {:.4} over {} steps",
        exp.eeff,
        exp.steps.len()
    );
    println!("aeff {:.4}", aeff.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
