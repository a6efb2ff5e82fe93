use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use walkdir::WalkDir;

use super::model::{GroundTruth, TopologySnapshot};
use super::{parse_snapshot, parse_truth, serialize_snapshot, validate_truth, TopologyError};

pub const TRUTH_SUFFIX: &str = ".truth.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoreEntry {
    /// `<topology_id>/<file stem>` relative to the store root.
    pub id: String,
    pub path: PathBuf,
    pub has_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StoreListing {
    pub entries: Vec<StoreEntry>,
    pub rejected: Vec<RejectedFile>,
}

pub fn truth_path_for(snapshot_path: &Path) -> PathBuf {
    let stem = snapshot_path
        .file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.strip_suffix(".json"))
        .unwrap_or_default();
    snapshot_path.with_file_name(format!("{stem}{TRUTH_SUFFIX}"))
}

/// Path for a snapshot inside a store: `<root>/<topology_id>/<name>.json`.
pub fn store_path(root: &Path, topology_id: &str, name: &str) -> PathBuf {
    root.join(topology_id).join(format!("{name}.json"))
}

/// Default file name for a snapshot: its timestamp with `:` replaced so the
/// name is portable.
pub fn timestamp_file_name(s: &TopologySnapshot) -> String {
    s.timestamp
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        .replace(':', "-")
}

/// Writes a snapshot (and optional truth) under the store layout and returns
/// the written paths.
pub fn write_entry(
    root: &Path,
    name: &str,
    snapshot: &TopologySnapshot,
    truth: Option<&GroundTruth>,
) -> Result<Vec<PathBuf>, TopologyError> {
    let path = store_path(root, &snapshot.topology_id, name);
    let dir = path.parent().expect("store path has a parent");
    fs::create_dir_all(dir).map_err(|e| TopologyError::io(dir, e))?;
    fs::write(&path, serialize_snapshot(snapshot)).map_err(|e| TopologyError::io(&path, e))?;
    let mut written = vec![path.clone()];
    if let Some(truth) = truth {
        let tpath = truth_path_for(&path);
        let mut bytes = serde_json::to_vec_pretty(truth).expect("ground truth serializes");
        bytes.push(b'\n');
        fs::write(&tpath, bytes).map_err(|e| TopologyError::io(&tpath, e))?;
        written.push(tpath);
    }
    Ok(written)
}

pub fn load_snapshot(path: &Path) -> Result<TopologySnapshot, TopologyError> {
    let raw = fs::read(path).map_err(|e| TopologyError::io(path, e))?;
    parse_snapshot(&raw)
}

pub fn load_truth(path: &Path) -> Result<GroundTruth, TopologyError> {
    let raw = fs::read(path).map_err(|e| TopologyError::io(path, e))?;
    parse_truth(&raw)
}

/// Enumerates snapshot/ground-truth pairs under `dir`. Unparsable files are
/// reported in `rejected` and do not abort the scan.
pub fn validate_store(dir: &Path) -> Result<StoreListing, TopologyError> {
    let meta = fs::metadata(dir).map_err(|e| TopologyError::io(dir, e))?;
    if !meta.is_dir() {
        return Err(TopologyError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a directory"),
        ));
    }
    fs::read_dir(dir).map_err(|e| TopologyError::io(dir, e))?;

    let mut listing = StoreListing::default();
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(dir).follow_links(false) {
        match entry {
            Ok(e) if e.file_type().is_file() => files.push(e.into_path()),
            Ok(_) => {}
            Err(err) => listing.rejected.push(RejectedFile {
                path: err
                    .path()
                    .map(Path::to_path_buf)
                    .unwrap_or_else(|| dir.to_path_buf()),
                reason: err.to_string(),
            }),
        }
    }
    files.sort();

    for path in files {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if !name.ends_with(".json") || name.ends_with(TRUTH_SUFFIX) {
            continue;
        }
        let snapshot = match load_snapshot(&path) {
            Ok(s) => s,
            Err(err) => {
                listing.rejected.push(RejectedFile {
                    path,
                    reason: err.to_string(),
                });
                continue;
            }
        };
        let tpath = truth_path_for(&path);
        let has_truth = if tpath.exists() {
            match load_truth(&tpath).and_then(|t| validate_truth(&t, &snapshot)) {
                Ok(()) => true,
                Err(err) => {
                    listing.rejected.push(RejectedFile {
                        path: tpath,
                        reason: err.to_string(),
                    });
                    false
                }
            }
        } else {
            false
        };
        let rel = path.strip_prefix(dir).unwrap_or(&path);
        let id = rel
            .with_extension("")
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        listing.entries.push(StoreEntry {
            id,
            path,
            has_truth,
        });
    }
    Ok(listing)
}
