//! Disk cache for χ interference tables.
//!
//! A table depends only on the (link, grid) pair, is expensive for wide
//! grids, and is reused by every prediction and sweep over powers, formats,
//! blocklengths or windows. Entries are stored one file per key under a
//! caller-chosen directory:
//!
//! * file name: `<sha-256 of the canonical config rendering>.chi`
//!   (see [`chi_cache_key`]),
//! * content: comment header plus the versioned key-value text form of
//!   [`ChiIntegrals`] (`format = chitable/1`), written with round-trip
//!   precision and no timestamps, so identical inputs produce identical
//!   bytes.
//!
//! Unreadable or corrupt entries are treated as misses, never as errors;
//! writes go through a temporary file and an atomic rename.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::chi::{chi_cache_key, chi_table, ChiError, ChiIntegrals, ChiOptions};
use super::config::{LinkConfig, WdmConfig};

/// File-per-key cache of χ tables in one directory.
#[derive(Debug, Clone)]
pub struct ChiCache {
    dir: PathBuf,
}

impl ChiCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.chi"))
    }

    /// Cached table for this configuration, if present and parseable.
    pub fn load(&self, link: &LinkConfig, grid: &WdmConfig) -> Option<ChiIntegrals> {
        let text = fs::read_to_string(self.path_for(&chi_cache_key(link, grid))).ok()?;
        ChiIntegrals::from_kv_str(&text).ok()
    }

    /// Writes the table for this configuration, replacing any existing
    /// entry, and returns the entry path.
    pub fn store(
        &self,
        link: &LinkConfig,
        grid: &WdmConfig,
        table: &ChiIntegrals,
    ) -> io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let key = chi_cache_key(link, grid);
        let path = self.path_for(&key);
        let mut text = format!("# chi interference table cache\n# key = {key}\n");
        text.push_str(&table.to_kv_string());
        let tmp = self.dir.join(format!("{key}.chi.tmp"));
        fs::write(&tmp, text)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Cached table if present, otherwise computes, stores and returns it.
    /// A failed store is not an error: the computed table is still usable.
    pub fn get_or_compute(
        &self,
        link: &LinkConfig,
        grid: &WdmConfig,
        opts: &ChiOptions,
    ) -> Result<ChiIntegrals, ChiError> {
        if let Some(table) = self.load(link, grid) {
            return Ok(table);
        }
        let table = chi_table(link, grid, opts)?;
        let _ = self.store(link, grid, &table);
        Ok(table)
    }

    /// Keys of all entries currently on disk, sorted.
    pub fn entries(&self) -> io::Result<Vec<String>> {
        let mut keys = Vec::new();
        let dir = match fs::read_dir(&self.dir) {
            Ok(d) => d,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(keys),
            Err(e) => return Err(e),
        };
        for entry in dir {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "chi") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    keys.push(stem.to_string());
                }
            }
        }
        keys.sort();
        Ok(keys)
    }

    /// Removes every cache entry; returns how many were deleted.
    pub fn clear(&self) -> io::Result<usize> {
        let mut removed = 0;
        for key in self.entries()? {
            fs::remove_file(self.path_for(&key))?;
            removed += 1;
        }
        Ok(removed)
    }
}
