//! Run manifests: the fully resolved configuration plus a SHA-256 line per
//! artifact, sorted, one `key = value` per line. A manifest is itself a
//! valid config, so feeding it back to `run` reproduces the artifacts
//! byte for byte.

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Renders manifest text from resolved config lines and artifact digests.
pub fn render(
    config_lines: &[(String, String)],
    artifacts: &[(String, String)],
) -> String {
    let mut lines: Vec<(String, String)> = config_lines.to_vec();
    for (name, hash) in artifacts {
        lines.push((format!("artifact.{name}.sha256"), hash.clone()));
    }
    lines.sort();
    let mut text = String::new();
    for (k, v) in lines {
        text.push_str(&format!("{k} = {v}\n"));
    }
    text
}
