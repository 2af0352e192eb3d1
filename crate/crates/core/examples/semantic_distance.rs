// Word distances from document co-occurrence counts.

use std::error::Error;

use red_kit::infodist::{nwd, CorpusCounts};

pub fn run() -> Result<(), Box<dyn Error>> {
    let toy = CorpusCounts::toy();
    for (a, b) in [
        ("fried", "chicken"),
        ("chicken", "feather"),
        ("fried", "feather"),
    ] {
        println!("nwd({a}, {b}) = {:.4}", nwd(a, b, &toy)?);
    }

    let own = CorpusCounts::from_text("red apple\nred car\napple pie\ngreen apple\n");
    println!("nwd(red, apple) = {:.4}", nwd("red", "apple", &own)?);
    if let Err(e) = nwd("red", "pie", &own) {
        println!("red/pie: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
