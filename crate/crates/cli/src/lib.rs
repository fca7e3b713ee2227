//! Batch front-end for the augmentation toolkit: ingest raw datasets, write
//! augmented `KIND+` datasets, score detections and check metamorphic
//! relations.

pub mod args;
mod augment;
mod commands;
pub mod manifest;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use args::{Cli, Command};
pub use augment::{augment_kind, AugmentSummary};
pub use commands::{check_mr_dirs, run};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input.
    #[error("{0}")]
    Input(String),
    /// Inputs that parse but do not belong together.
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Mismatch(_) => EXIT_MISMATCH,
        }
    }
}

impl From<tigaug_core::dataset::DatasetError> for CliError {
    fn from(e: tigaug_core::dataset::DatasetError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Per-image seed: the first eight bytes (little endian) of
/// `sha256(seed.to_le_bytes() ++ id)`. Independent of scheduling and of
/// which other images are in the run.
pub fn image_seed(global: u64, id: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(global.to_le_bytes());
    hasher.update(id.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("eight bytes"))
}

/// Sibling staging directory for `target`, unique to this process.
fn staging_dir(target: &Path) -> Result<PathBuf, CliError> {
    let name = target
        .file_name()
        .ok_or_else(|| CliError::Input(format!("{}: not a directory name", target.display())))?;
    let parent = match target.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut staged = std::ffi::OsString::from(".");
    staged.push(name);
    staged.push(format!(".staging-{}", std::process::id()));
    Ok(parent.join(staged))
}

/// Swaps a fully written staging directory into place.
fn commit_dir(staging: &Path, target: &Path) -> Result<(), CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Input(format!("{}: {e}", p.display()));
    if target.exists() {
        std::fs::remove_dir_all(target).map_err(|e| io(target, e))?;
    }
    std::fs::rename(staging, target).map_err(|e| io(target, e))
}
