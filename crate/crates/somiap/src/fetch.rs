//! Download helper for the stock frontal-face cascade. The file is never
//! committed to the repository; this fetches it over HTTPS, optionally
//! verifies a caller-supplied SHA-256, structurally validates it by parsing,
//! and only then writes it to disk. The computed digest is always reported
//! so it can be pinned for future runs.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::cascade_xml::parse_cascade;
use crate::error::{Result, ToolError};

/// Upstream location of the stock frontal-face model.
pub const FRONTAL_CASCADE_URL: &str =
    "https://raw.githubusercontent.com/opencv/opencv/4.x/data/haarcascades/haarcascade_frontalface_default.xml";

/// Default file name the fetch writes and the other commands look for.
pub const DEFAULT_CASCADE_FILE: &str = "haarcascade_frontalface_default.xml";

#[derive(Debug)]
pub struct FetchOutcome {
    pub bytes_written: usize,
    pub sha256: String,
    pub stages: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Downloads `url`, checks the digest when `expected_sha256` is given,
/// parses the document as a cascade, and atomically writes it to `dest`.
pub fn fetch_cascade(url: &str, dest: &Path, expected_sha256: Option<&str>) -> Result<FetchOutcome> {
    let mut response = ureq::get(url)
        .call()
        .map_err(|e| ToolError::Decode(format!("downloading {url}: {e}")))?;
    let bytes = response
        .body_mut()
        .with_config()
        .limit(64 * 1024 * 1024)
        .read_to_vec()
        .map_err(|e| ToolError::Decode(format!("downloading {url}: {e}")))?;

    let sha256 = sha256_hex(&bytes);
    if let Some(expected) = expected_sha256 {
        if !expected.eq_ignore_ascii_case(&sha256) {
            return Err(ToolError::Contract(format!(
                "checksum mismatch: expected {expected}, downloaded {sha256}"
            )));
        }
    }

    let text = String::from_utf8(bytes.clone())
        .map_err(|_| ToolError::Decode("downloaded cascade is not UTF-8".into()))?;
    let model = parse_cascade(&text)?;

    let tmp = dest.with_extension("xml.tmp");
    fs::write(&tmp, &bytes).map_err(|e| ToolError::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, dest)
        .map_err(|e| ToolError::io(format!("renaming over {}", dest.display()), e))?;
    Ok(FetchOutcome {
        bytes_written: bytes.len(),
        sha256,
        stages: model.stages.len(),
    })
}
