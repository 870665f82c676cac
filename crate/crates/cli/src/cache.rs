//! Build cache. Each entry holds graph6 bytes, labels JSON and the sha256 of
//! both; the hash is verified on every read and a mismatch counts as a miss.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct Entry {
    pub g6: Vec<u8>,
    pub labels: Vec<u8>,
}

pub fn key(parts: &[&str]) -> String {
    hex::encode(Sha256::digest(parts.join("\0").as_bytes()))
}

fn content_hash(g6: &[u8], labels: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update((g6.len() as u64).to_le_bytes());
    h.update(g6);
    h.update(labels);
    hex::encode(h.finalize())
}

fn paths(dir: &Path, key: &str) -> [PathBuf; 3] {
    ["g6", "labels.json", "sha256"].map(|ext| dir.join(format!("{key}.{ext}")))
}

pub fn load(dir: &Path, key: &str) -> Result<Option<Entry>> {
    let [g6, labels, hash] = paths(dir, key);
    let (Ok(g6), Ok(labels), Ok(hash)) = (fs::read(g6), fs::read(labels), fs::read_to_string(hash)) else {
        return Ok(None);
    };
    if content_hash(&g6, &labels) != hash.trim() {
        eprintln!("cache entry {} failed its hash check; rebuilding", &key[..12]);
        return Ok(None);
    }
    Ok(Some(Entry { g6, labels }))
}

pub fn store(dir: &Path, key: &str, g6: &[u8], labels: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("IoError: creating {}", dir.display()))?;
    let [p6, pl, ph] = paths(dir, key);
    let write = |p: &Path, b: &[u8]| fs::write(p, b).with_context(|| format!("IoError: writing {}", p.display()));
    write(&p6, g6)?;
    write(&pl, labels)?;
    write(&ph, content_hash(g6, labels).as_bytes())
}
