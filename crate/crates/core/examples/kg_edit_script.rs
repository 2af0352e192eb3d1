// Encode two knowledge graphs, diff them and replay the edit script.

use std::error::Error;

use red_kit::kg::{self, apply, edit_script, parse_tsv, script_codelength, to_tsv};

pub fn run() -> Result<(), Box<dyn Error>> {
    let before = parse_tsv("ada\tknows\tbob\nbob\tknows\tcyd\ncyd\tworks_at\tacme\n")?;
    let after =
        parse_tsv("ada\tknows\tbob\nbob\tknows\tcyd\ncyd\tworks_at\tinit\ndee\tknows\tada\n")?;

    let bytes = kg::encode(&before)?;
    println!(
        "encoded {} triples in {} bytes",
        before.triples().len(),
        bytes.len()
    );
    assert_eq!(kg::decode(bytes.as_bytes())?, before);

    let script = edit_script(&before, &after);
    println!("{}", serde_json::to_string_pretty(&script)?);
    println!("script length: {}", script_codelength(&script, &before)?);

    let replayed = apply(&script, &before)?;
    assert_eq!(replayed, after);
    print!("{}", to_tsv(&replayed));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
