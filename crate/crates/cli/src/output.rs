//! Output directories: atomic writes and the manifest of content digests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

use crate::text::Doc;

pub const MANIFEST: &str = "manifest.txt";

/// Write through a temporary file so that readers never see partial data.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp~");
    fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming to {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Every regular file of `dir` except the manifest, sorted by name.
pub fn listed_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let p = entry?.path();
        let name = p.file_name().and_then(|s| s.to_str()).unwrap_or_default().to_string();
        if p.is_file() && name != MANIFEST && !name.ends_with(".tmp~") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Add a `files` section with the digest of every file in `dir` and write
/// the manifest there.
pub fn write_manifest(dir: &Path, mut doc: Doc) -> Result<()> {
    let mut files = Doc::new();
    for p in listed_files(dir)? {
        let bytes = fs::read(&p).with_context(|| format!("reading {}", p.display()))?;
        let name = p.file_name().unwrap().to_string_lossy().into_owned();
        files.put(&name, format!("sha256:{}", sha256_hex(&bytes)));
    }
    doc.section("files", files);
    write_atomic(&dir.join(MANIFEST), doc.render().as_bytes())
}

/// Create `dir` for a fresh run; a directory that already holds a run is
/// only reused when `force` is set.
pub fn prepare_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.join(MANIFEST).exists() && !force {
        anyhow::bail!("{} already holds a run (use --force to overwrite)", dir.display());
    }
    if force && dir.is_dir() {
        for p in listed_files(dir)? {
            fs::remove_file(&p).with_context(|| format!("removing {}", p.display()))?;
        }
        let _ = fs::remove_file(dir.join(MANIFEST));
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// `toml` data as nested structured text.
pub fn toml_section(v: &toml::Value) -> Doc {
    let mut d = Doc::new();
    if let toml::Value::Table(t) = v {
        for (k, v) in t {
            match v {
                toml::Value::Table(_) => {
                    d.section(k, toml_section(v));
                }
                toml::Value::String(s) => {
                    d.put(k, s.as_str());
                }
                other => {
                    d.put(k, other.to_string());
                }
            }
        }
    }
    d
}
