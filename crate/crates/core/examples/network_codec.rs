// Train a small network on XOR, quantize it and round-trip the encoding.

use std::error::Error;

use red_kit::net::{decode_net, dequantize, encode_net, quantize, train, DenseNetwork, NetTask};

pub fn run() -> Result<(), Box<dyn Error>> {
    let data = NetTask::Xor.examples();
    let init = DenseNetwork::seeded(&[2, 4, 1], 42)?;
    let net = train(&init, &data, 5000, 0.2)?;
    println!(
        "mse before {:.4}, after {:.6}",
        init.mse(&data)?,
        net.mse(&data)?
    );

    for bits in [4, 8, 12] {
        let q = quantize(&net, bits)?;
        let bytes = encode_net(&q);
        assert_eq!(decode_net(bytes.as_bytes())?, q);
        let mse = dequantize(&q).mse(&data)?;
        println!(
            "{bits:>2} bits: {} bytes, dequantized mse {mse:.6}",
            bytes.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
