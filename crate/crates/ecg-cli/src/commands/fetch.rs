//! `fetch`: download records into the data directory.

use ecg_core::wfdb::{fetch_record, DEFAULT_BASE_URL};

use crate::args::FetchArgs;
use crate::config::Context;
use crate::{CliError, Stage};

/// Tries every requested record even after a failure, so one missing
/// upstream file does not block the rest; exits non-zero if anything
/// failed.
pub fn run(ctx: &Context, args: &FetchArgs) -> Result<(), CliError> {
    let base_url = args.base_url.as_deref().unwrap_or(DEFAULT_BASE_URL);
    let mut failed: Vec<&str> = Vec::new();
    for name in &args.records {
        match fetch_record(name, base_url, &ctx.data_dir) {
            Ok(paths) => {
                for path in paths {
                    println!("{}", path.display());
                }
            }
            Err(e) => {
                eprintln!("fetch {name}: {e}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(
            Stage::Fetch,
            format!("failed to fetch: {}", failed.join(", ")),
        ))
    }
}
