// Compression distances between a few short texts, then a full matrix.

use std::error::Error;

use red_kit::compressor::{compress_len, ByteSequence, CompressorId};
use red_kit::infodist::{cond_len, distance_matrix, ncd, Metric, Schedule};

pub fn run() -> Result<(), Box<dyn Error>> {
    let texts = [
        (
            "fox",
            "the quick brown fox jumps over the lazy dog. ".repeat(12),
        ),
        (
            "fox2",
            "the quick brown fox leaps over the lazy cat. ".repeat(12),
        ),
        (
            "lorem",
            "lorem ipsum dolor sit amet consectetur adipiscing ".repeat(10),
        ),
    ];
    let items: Vec<(String, ByteSequence)> = texts
        .iter()
        .map(|(id, t)| (id.to_string(), ByteSequence::new(t.as_bytes())))
        .collect();

    for backend in [CompressorId::Store, CompressorId::Rle, CompressorId::Lz] {
        let c = compress_len(&items[0].1, &backend)?;
        println!("C(fox) under {backend}: {c}");
    }

    let lz = CompressorId::Lz;
    let (x, y) = (&items[0].1, &items[1].1);
    println!("ncd(fox, fox2) = {:.4}", ncd(x, y, &lz)?);
    println!("ncd(fox, lorem) = {:.4}", ncd(x, &items[2].1, &lz)?);
    println!("C(fox2 | fox) = {}", cond_len(y, x, &lz)?);

    let m = distance_matrix(&items, &lz, Metric::Ncd, Schedule::Parallel)?;
    print!("{}", m.to_csv());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
