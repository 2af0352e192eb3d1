use std::io::Write;
use std::process::{Command, Stdio};

use super::CompressError;

/// Environment variable holding the external compressor command template.
pub const EXTERNAL_COMPRESSOR_ENV: &str = "RED_KIT_EXTERNAL_COMPRESSOR";

/// Runs `sh -c <template>` with `data` on stdin and returns the stdout length.
pub(super) fn compressed_len(template: &str, data: &[u8]) -> Result<usize, CompressError> {
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(template)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| CompressError::Unavailable(format!("{template}: {e}")))?;

    // Feed stdin from a separate thread so a large input cannot deadlock
    // against a full stdout pipe.
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let input = data.to_vec();
    let writer = std::thread::spawn(move || stdin.write_all(&input));

    let output = child
        .wait_with_output()
        .map_err(|e| CompressError::External(e.to_string()))?;
    writer
        .join()
        .map_err(|_| CompressError::External("stdin writer panicked".into()))?
        .map_err(|e| CompressError::External(format!("writing stdin: {e}")))?;

    if !output.status.success() {
        return Err(CompressError::External(format!(
            "{template} exited with {}: {}",
            output.status,
            String::from_utf8_lossy(&output.stderr).trim()
        )));
    }
    if output.stdout.is_empty() {
        return Err(CompressError::External(format!(
            "{template} produced no output"
        )));
    }
    Ok(output.stdout.len())
}

#[cfg(test)]
mod tests {
    use super::super::{compress_len, ByteSequence, CompressorId};

    #[test]
    fn cat_counts_bytes() {
        let id = CompressorId::External("cat".into());
        let len = compress_len(&ByteSequence::from("hello"), &id).unwrap();
        assert_eq!(len.bits(), 40.0);
    }

    #[test]
    fn failing_command_is_an_error() {
        let id = CompressorId::External("exit 3".into());
        assert!(compress_len(&ByteSequence::from("x"), &id).is_err());
    }

    #[test]
    fn missing_binary_is_an_error() {
        let id = CompressorId::External("definitely-not-a-compressor-xyz".into());
        assert!(compress_len(&ByteSequence::from("x"), &id).is_err());
    }
}
