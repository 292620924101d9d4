//! Record downloading.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::time::Duration;

use super::{parse_header, signal, WfdbError};

/// Where the arrhythmia database is published.
pub const DEFAULT_BASE_URL: &str = "https://physionet.org/files/mitdb/1.0.0/";

/// Hard cap on a single downloaded file; a full record's `.dat` is under
/// 2 MB, so anything near this size is not the file we asked for.
const MAX_FILE_BYTES: u64 = 64 * 1024 * 1024;

/// Downloads the `.hea`/`.dat`/`.atr` triple for `name` into `dest_dir`,
/// returning the three local paths.
///
/// Idempotent: when all three files already exist and the `.dat` size
/// matches what the `.hea` declares, nothing is downloaded. Writes go to a
/// temporary file first and are renamed into place, so a failed or
/// interrupted fetch never leaves a partial record behind.
pub fn fetch_record(name: &str, base_url: &str, dest_dir: &Path) -> Result<Vec<PathBuf>, WfdbError> {
    std::fs::create_dir_all(dest_dir)?;
    let paths: Vec<PathBuf> =
        ["hea", "dat", "atr"].iter().map(|ext| dest_dir.join(format!("{name}.{ext}"))).collect();

    if record_is_complete(&paths) {
        return Ok(paths);
    }

    let base = if base_url.ends_with('/') { base_url.to_string() } else { format!("{base_url}/") };
    let agent = ureq::AgentBuilder::new()
        .timeout_connect(Duration::from_secs(20))
        .timeout(Duration::from_secs(120))
        .build();

    for (ext, path) in ["hea", "dat", "atr"].iter().zip(&paths) {
        let url = format!("{base}{name}.{ext}");
        let body = download(&agent, &url)?;
        let tmp = dest_dir.join(format!(".{name}.{ext}.part"));
        let write = std::fs::write(&tmp, &body).and_then(|_| std::fs::rename(&tmp, path));
        if let Err(e) = write {
            let _ = std::fs::remove_file(&tmp);
            return Err(e.into());
        }
    }
    Ok(paths)
}

/// All three files present and the `.dat` holds as many bytes as the header
/// says it should.
fn record_is_complete(paths: &[PathBuf]) -> bool {
    if !paths.iter().all(|p| p.is_file()) {
        return false;
    }
    let Ok(text) = std::fs::read_to_string(&paths[0]) else { return false };
    let Ok(header) = parse_header(&text) else { return false };
    let expected = signal::required_bytes(header.n_samples as usize * header.n_signal) as u64;
    std::fs::metadata(&paths[1]).map(|m| m.len() >= expected).unwrap_or(false)
}

fn download(agent: &ureq::Agent, url: &str) -> Result<Vec<u8>, WfdbError> {
    let response = agent.get(url).call().map_err(|e| WfdbError::Fetch {
        url: url.to_string(),
        msg: e.to_string(),
    })?;
    let mut body = Vec::new();
    response
        .into_reader()
        .take(MAX_FILE_BYTES)
        .read_to_end(&mut body)
        .map_err(|e| WfdbError::Fetch { url: url.to_string(), msg: e.to_string() })?;
    Ok(body)
}
