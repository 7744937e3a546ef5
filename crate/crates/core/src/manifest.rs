//! Scan manifest: one organized cloud plus one mask file per leaf instance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct MaskEntry {
    pub leaf_id: String,
    pub path: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ScanManifest {
    pub cloud: String,
    pub masks: Vec<MaskEntry>,
    pub scan_id: String,
    /// ISO-8601 date of the scan.
    pub date: String,
}

impl ScanManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: ScanManifest = serde_json::from_str(text)?;
        if m.masks.is_empty() {
            return Err(Error::Manifest("manifest lists no masks".into()));
        }
        let mut ids: Vec<&str> = m.masks.iter().map(|e| e.leaf_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != m.masks.len() {
            return Err(Error::Manifest("duplicate leaf_id in manifest".into()));
        }
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// Resolve a manifest-relative path against the manifest's directory.
    pub fn resolve(base_dir: &Path, rel: &str) -> PathBuf {
        let p = Path::new(rel);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base_dir.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_validation() {
        let m = ScanManifest {
            cloud: "scan.ply".into(),
            masks: vec![
                MaskEntry {
                    leaf_id: "leaf-1".into(),
                    path: "mask_leaf-1.pgm".into(),
                },
                MaskEntry {
                    leaf_id: "leaf-2".into(),
                    path: "mask_leaf-2.pgm".into(),
                },
            ],
            scan_id: "scan-01".into(),
            date: "2026-08-01".into(),
        };
        let back = ScanManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn duplicate_leaf_ids_rejected() {
        let text = r#"{"cloud":"c.ply","masks":[{"leaf_id":"a","path":"a.pgm"},{"leaf_id":"a","path":"b.pgm"}],"scan_id":"s","date":"2026-01-01"}"#;
        assert!(ScanManifest::from_json(text).is_err());
    }
}
