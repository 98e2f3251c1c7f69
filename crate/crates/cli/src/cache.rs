//! Content-addressed report cache. Entries are written atomically; unreadable
//! or corrupt entries are ignored and rebuilt.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::report::{Analysis, FieldHeader, Job};

pub struct Cache {
    dir: PathBuf,
}

pub enum Lookup {
    Hit(Box<Analysis>),
    Miss,
    Corrupt,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Cache {
        Cache { dir: dir.into() }
    }

    pub fn key(job: &Job, field: &FieldHeader) -> String {
        let material = format!(
            "{}|{}|{}|{:?}|{}|{}|{}|{}",
            job.p,
            job.n,
            field.q,
            field.modulus,
            job.family.label(),
            job.level.label(),
            job.class,
            job.oracle,
        );
        let mut h = Sha256::new();
        h.update(material.as_bytes());
        h.update(b"|");
        h.update(psl_saxl::ENGINE_VERSION.as_bytes());
        hex::encode(h.finalize())
    }

    pub fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn load(&self, key: &str) -> Lookup {
        let Ok(bytes) = fs::read(self.path(key)) else {
            return Lookup::Miss;
        };
        match serde_json::from_slice(&bytes) {
            Ok(a) => Lookup::Hit(a),
            Err(_) => Lookup::Corrupt,
        }
    }

    pub fn store(&self, key: &str, analysis: &Analysis) -> std::io::Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, analysis)?;
        tmp.flush()?;
        let dest = self.path(key);
        tmp.persist(&dest).map_err(|e| e.error)?;
        Ok(dest)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

/// Runs `job`, going through the cache when one is configured. Status lines go
/// to stderr so the report itself stays byte-stable.
pub fn analyze_cached(job: &Job, cache: Option<&Cache>, want_dot: bool) -> anyhow::Result<(Analysis, Option<String>)> {
    let Some(cache) = cache else {
        return crate::report::analyze(job, want_dot);
    };
    let field = FieldHeader::for_job(job)?;
    let key = Cache::key(job, &field);
    if !want_dot {
        match cache.load(&key) {
            Lookup::Hit(a) => {
                eprintln!("cache: hit {}", cache.path(&key).display());
                return Ok((*a, None));
            }
            Lookup::Corrupt => eprintln!("cache: ignoring corrupt entry {}", cache.path(&key).display()),
            Lookup::Miss => eprintln!("cache: miss {key}"),
        }
    }
    let (a, dot) = crate::report::analyze(job, want_dot)?;
    match cache.store(&key, &a) {
        Ok(p) => eprintln!("cache: stored {}", p.display()),
        Err(e) => eprintln!("warning: cache directory {} not writable: {e}", cache.dir().display()),
    }
    Ok((a, dot))
}
