//! Content-addressed cache for sampled fields and spectral-flow records.
//!
//! Keys are SHA-256 digests of the exact inputs (grid, rank, winding index,
//! profile parameter bits, calibration tag, solver and step-control bits), so
//! a hit is only possible when recomputation would be bit-identical. Corrupt
//! entries are dropped and recomputed with a warning.

use anyhow::Result;
use diracflow::fieldio::{self, FieldHeader};
use diracflow::fields::UnitaryField;
use diracflow::sfl::SflResult;
use diracflow::topology::CALIBRATION_TAG;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

pub const CACHE_ENV: &str = "DIRACFLOW_CACHE_DIR";

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
    pub enabled: bool,
}

/// All inputs that determine a constructed gauge field bit-for-bit.
#[derive(Debug)]
pub struct FieldKey {
    pub k: i64,
    pub n_g: usize,
    pub rank: usize,
    pub radius: f64,
    pub sharpness: f64,
    pub flatness_power: f64,
}

impl FieldKey {
    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"field-v1|");
        h.update(CALIBRATION_TAG.as_bytes());
        h.update(self.k.to_le_bytes());
        h.update(self.n_g.to_le_bytes());
        h.update(self.rank.to_le_bytes());
        h.update(self.radius.to_bits().to_le_bytes());
        h.update(self.sharpness.to_bits().to_le_bytes());
        h.update(self.flatness_power.to_bits().to_le_bytes());
        hex::encode(h.finalize())
    }
}

/// Inputs determining a spectral-flow record on top of a field key.
#[derive(Debug)]
pub struct FlowKey<'a> {
    pub field: &'a FieldKey,
    pub delta: [u8; 3],
    pub window: f64,
    pub solver: &'a str,
    pub safety: f64,
    pub band: f64,
    pub zero_tol: f64,
    pub seed: u64,
}

impl FlowKey<'_> {
    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"flow-v1|");
        h.update(self.field.digest().as_bytes());
        h.update(self.delta);
        h.update(self.window.to_bits().to_le_bytes());
        h.update(self.solver.as_bytes());
        h.update(self.safety.to_bits().to_le_bytes());
        h.update(self.band.to_bits().to_le_bytes());
        h.update(self.zero_tol.to_bits().to_le_bytes());
        h.update(self.seed.to_le_bytes());
        hex::encode(h.finalize())
    }
}

impl Cache {
    /// Cache under `out_dir/cache` unless the environment variable overrides.
    pub fn new(out_dir: &Path, enabled: bool) -> Self {
        let root = std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| out_dir.join("cache"));
        Cache { root, enabled }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn field_path(&self, key: &FieldKey) -> PathBuf {
        self.root.join(key.digest()).join("field.bin")
    }

    fn flow_path(&self, key: &FlowKey) -> PathBuf {
        self.root.join(key.digest()).join("flow.json")
    }

    pub fn load_field(&self, key: &FieldKey) -> Option<UnitaryField<f64>> {
        if !self.enabled {
            return None;
        }
        let path = self.field_path(key);
        let bytes = std::fs::read(&path).ok()?;
        match fieldio::read_unitary::<f64, _>(&mut bytes.as_slice()) {
            Ok((header, field))
                if header.n_g == key.n_g
                    && header.rank == key.rank
                    && header.k == Some(key.k)
                    && header.calibration == CALIBRATION_TAG =>
            {
                Some(field)
            }
            _ => {
                eprintln!(
                    "warning: corrupt cache entry {} (recomputing)",
                    path.display()
                );
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    pub fn store_field(&self, key: &FieldKey, field: &UnitaryField<f64>) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        let path = self.field_path(key);
        std::fs::create_dir_all(path.parent().unwrap())?;
        let mut header = FieldHeader::unitary(field);
        header.k = Some(key.k);
        header.profile_radius = Some(key.radius);
        header.profile_sharpness = Some(key.sharpness);
        let mut buf = Vec::new();
        fieldio::write_unitary(&mut buf, field, &header)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load_flow(&self, key: &FlowKey) -> Option<SflResult<f64>> {
        if !self.enabled {
            return None;
        }
        let path = self.flow_path(key);
        let bytes = std::fs::read(&path).ok()?;
        match serde_json::from_slice(&bytes) {
            Ok(r) => Some(r),
            Err(_) => {
                eprintln!(
                    "warning: corrupt cache entry {} (recomputing)",
                    path.display()
                );
                let _ = std::fs::remove_file(&path);
                None
            }
        }
    }

    pub fn store_flow(&self, key: &FlowKey, result: &SflResult<f64>) -> Result<()> {
        if !self.enabled {
            return Ok(());
        }
        let path = self.flow_path(key);
        std::fs::create_dir_all(path.parent().unwrap())?;
        std::fs::write(path, serde_json::to_vec_pretty(result)?)?;
        Ok(())
    }

    /// Remove entries; with `all` every entry goes, otherwise only ones whose
    /// directory name no longer matches any current-format digest shape.
    pub fn gc(&self, all: bool) -> Result<usize> {
        let mut removed = 0;
        let Ok(entries) = std::fs::read_dir(&self.root) else {
            return Ok(0);
        };
        for entry in entries.flatten() {
            let name = entry.file_name();
            let name = name.to_string_lossy();
            let is_digest = name.len() == 64 && name.chars().all(|c| c.is_ascii_hexdigit());
            if all || !is_digest {
                std::fs::remove_dir_all(entry.path())?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}
