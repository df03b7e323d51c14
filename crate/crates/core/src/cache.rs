//! On-disk cache for dipole records.
//!
//! Ensemble × φ sweeps would otherwise recompute identical dipoles. Each
//! record lives in its own JSON file keyed by a content hash of the physical
//! config fields and the sample coordinates. Files embed a schema version and
//! their own key; anything inconsistent is treated as a miss and recomputed.
//! Writes go through a temporary file plus atomic rename, so concurrent
//! readers never observe partial records.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::DriverConfig;
use crate::dipole::{default_window, DipoleRecord};
use crate::error::{Error, Result};
use crate::field::PhaseSpaceSample;

const SCHEMA_VERSION: u32 = 1;

/// Cache key for one (config, sample) pair: hex SHA-256 over the fields the
/// dipole actually depends on. `rho_coupling` and the squeezing statistics
/// are deliberately excluded — they act downstream of the dipole stage.
pub fn record_key(config: &DriverConfig, sample: &PhaseSpaceSample) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!(
        "v{SCHEMA_VERSION};omega={:.17e};e={:.17e};eps={:.17e};phi={:.17e};ip={:.17e};\
         cycles={};env={:?};grid={:.17e},{:.17e},{};win={:?};gx={:.17e};gy={:.17e}",
        config.omega,
        config.e_omega,
        config.epsilon_ratio,
        config.phi,
        config.ip,
        config.n_cycles,
        config.envelope,
        config.time_grid.t_start,
        config.time_grid.t_end,
        config.time_grid.n_steps,
        default_window(config.envelope),
        sample.gamma_x,
        sample.gamma_y,
    ));
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Stored form: the time series plus enough metadata to rebuild the spectrum
/// exactly. The spectrum itself is recomputed on load (a deterministic FFT),
/// which keeps cache files a third of the size.
#[derive(Serialize, Deserialize)]
struct CacheFile {
    schema_version: u32,
    key: String,
    omega: f64,
    time_grid: crate::config::TimeGrid,
    window: crate::dipole::SpectralWindow,
    d_t: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DipoleCache {
    dir: PathBuf,
}

impl DipoleCache {
    /// Open (creating if needed) a cache directory.
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|e| Error::Cache {
            path: dir.clone(),
            message: format!("cannot create cache directory: {e}"),
        })?;
        Ok(DipoleCache { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("dipole-{key}.json"))
    }

    /// Load a record by key. Any read, parse, or consistency failure is a
    /// miss: corrupt entries are logged and recomputed by the caller.
    pub fn load(&self, key: &str) -> Option<DipoleRecord> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(_) => return None,
        };
        let file: CacheFile = match serde_json::from_str(&text) {
            Ok(file) => file,
            Err(e) => {
                log::warn!("corrupt cache entry {path:?} ({e}); recomputing");
                return None;
            }
        };
        if file.schema_version != SCHEMA_VERSION || file.key != key {
            log::warn!("stale or mismatched cache entry {path:?}; recomputing");
            return None;
        }
        match DipoleRecord::from_time_series(0, file.d_t, file.time_grid, file.omega, file.window)
        {
            Ok(record) => Some(record),
            Err(e) => {
                log::warn!("unusable cache entry {path:?} ({e}); recomputing");
                None
            }
        }
    }

    /// Store a record under `key` with an atomic rename.
    pub fn store(&self, key: &str, record: &DipoleRecord) -> Result<()> {
        let file = CacheFile {
            schema_version: SCHEMA_VERSION,
            key: key.to_string(),
            omega: record.omega,
            time_grid: record.time_grid,
            window: record.window,
            d_t: record.d_t.clone(),
        };
        self.store_file(key, file)
    }

    fn store_file(&self, key: &str, file: CacheFile) -> Result<()> {
        let path = self.path_for(key);
        let tmp = self.dir.join(format!(
            ".dipole-{key}.{}.tmp",
            std::process::id()
        ));
        let body = serde_json::to_string(&file).map_err(|e| Error::Cache {
            path: path.clone(),
            message: format!("serialization failed: {e}"),
        })?;
        fs::write(&tmp, body).map_err(|e| Error::Cache {
            path: tmp.clone(),
            message: format!("write failed: {e}"),
        })?;
        fs::rename(&tmp, &path).map_err(|e| Error::Cache {
            path,
            message: format!("rename failed: {e}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dipole::{ensemble_dipoles, sfa_dipole};
    use crate::field::sample_phase_space;

    fn small_config() -> DriverConfig {
        let mut config = DriverConfig::default();
        config.time_grid.n_steps = 512;
        config.n_cycles = 3;
        config.time_grid.t_end = 3.0 * config.cycle_period();
        config
    }

    #[test]
    fn key_separates_configs_and_samples() {
        let config = small_config();
        let a = PhaseSpaceSample::delta();
        let b = PhaseSpaceSample {
            gamma_x: 0.0,
            gamma_y: 1e-3,
            weight: 1.0,
        };
        assert_ne!(record_key(&config, &a), record_key(&config, &b));
        assert_ne!(
            record_key(&config, &a),
            record_key(&config.with_phi(0.1), &a)
        );
        assert_eq!(record_key(&config, &a), record_key(&config, &a));
    }

    #[test]
    fn rho_coupling_does_not_touch_the_key() {
        let config = small_config();
        let sample = PhaseSpaceSample::delta();
        assert_eq!(
            record_key(&config, &sample),
            record_key(&config.with_rho(0.7), &sample)
        );
    }

    #[test]
    fn warm_cache_round_trips_bit_identically() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DipoleCache::new(dir.path()).unwrap();
        let config = small_config();
        let samples = sample_phase_space(&config, 3).unwrap();

        let cold = ensemble_dipoles(&config, &samples, Some(&cache)).unwrap();
        let warm = ensemble_dipoles(&config, &samples, Some(&cache)).unwrap();
        assert_eq!(cold.len(), warm.len());
        for (a, b) in cold.iter().zip(&warm) {
            assert_eq!(a.sample_id, b.sample_id);
            assert_eq!(a.d_t, b.d_t);
            assert_eq!(a.spectrum, b.spectrum);
        }
    }

    #[test]
    fn permuted_samples_match_by_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DipoleCache::new(dir.path()).unwrap();
        let config = small_config();
        let samples = sample_phase_space(&config, 5).unwrap();

        let records = ensemble_dipoles(&config, &samples, Some(&cache)).unwrap();
        assert_eq!(records.len(), samples.len());
        let permuted: Vec<_> = samples.iter().rev().copied().collect();
        let re_records = ensemble_dipoles(&config, &permuted, Some(&cache)).unwrap();
        for (k, record) in re_records.iter().enumerate() {
            assert_eq!(record.sample_id, k);
            let original = &records[samples.len() - 1 - k];
            assert_eq!(record.d_t, original.d_t);
        }
    }

    #[test]
    fn corrupt_entries_fall_back_to_recompute() {
        let dir = tempfile::tempdir().unwrap();
        let cache = DipoleCache::new(dir.path()).unwrap();
        let config = small_config();
        let sample = PhaseSpaceSample::delta();
        let key = record_key(&config, &sample);

        let record = sfa_dipole(&config, &sample).unwrap();
        cache.store(&key, &record).unwrap();
        std::fs::write(cache.path_for(&key), "{not json").unwrap();
        assert!(cache.load(&key).is_none());

        let recomputed = ensemble_dipoles(&config, &[sample], Some(&cache)).unwrap();
        assert_eq!(recomputed[0].d_t, record.d_t);
    }
}
