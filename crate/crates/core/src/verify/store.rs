//! On-disk certificate store: `<digest>.json` files plus an `index.jsonl`
//! listing statement, α, range and digest per certificate.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bounds::{Certificate, Statement};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub statement: Statement,
    pub alpha: String,
    pub range: [u64; 2],
    pub outcome: String,
    pub digest: String,
}

#[derive(Clone, Debug)]
pub struct CertificateStore {
    dir: PathBuf,
}

impl CertificateStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        fs::create_dir_all(dir.as_ref())?;
        Ok(CertificateStore {
            dir: dir.as_ref().to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_of(&self, digest: &str) -> PathBuf {
        self.dir.join(format!("{digest}.json"))
    }

    /// Stores `cert` (idempotent) and returns its digest.
    pub fn put(&self, cert: &Certificate) -> Result<String> {
        let digest = cert.digest();
        let path = self.path_of(&digest);
        if path.exists() {
            return Ok(digest);
        }
        fs::write(&path, format!("{}\n", cert.to_json_line()))?;
        let entry = IndexEntry {
            statement: cert.statement,
            alpha: cert.alpha.clone(),
            range: cert.range,
            outcome: cert.outcome.to_string(),
            digest: digest.clone(),
        };
        let mut index = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join("index.jsonl"))?;
        writeln!(index, "{}", serde_json::to_string(&entry)?)?;
        Ok(digest)
    }

    /// Loads a certificate and checks that its content matches the digest.
    pub fn get(&self, digest: &str) -> Result<Certificate> {
        let text = fs::read_to_string(self.path_of(digest))?;
        let cert = Certificate::from_json_line(&text)?;
        if cert.digest() != digest {
            return Err(Error::Certificate(format!("content of {digest}.json does not match its name")));
        }
        Ok(cert)
    }

    pub fn index(&self) -> Result<Vec<IndexEntry>> {
        let path = self.dir.join("index.jsonl");
        if !path.exists() {
            return Ok(Vec::new());
        }
        fs::read_to_string(path)?
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(Error::from))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Method;

    #[test]
    fn put_get_index() {
        let dir = tempfile::tempdir().unwrap();
        let store = CertificateStore::open(dir.path()).unwrap();
        let c = Certificate::new(Statement::LogConcave, "3/1".into(), [1, 10], Method::Exact);
        let d = store.put(&c).unwrap();
        assert_eq!(store.put(&c).unwrap(), d);
        assert_eq!(store.get(&d).unwrap(), c);
        let idx = store.index().unwrap();
        assert_eq!(idx.len(), 1);
        assert_eq!(idx[0].digest, d);

        fs::write(dir.path().join(format!("{d}.json")), c.to_json_line().replace("[1,10]", "[1,11]")).unwrap();
        assert!(store.get(&d).is_err());
    }
}
