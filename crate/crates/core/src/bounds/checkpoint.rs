//! Bit-exact checkpoints of a [`BoundRunState`].
//!
//! Layout (UTF-8 text):
//!
//! ```text
//! {"format":"etacert-checkpoint","version":1,...}      header, one JSON line
//! <n> <lower: sign exp hex> <upper: sign exp hex> <lower pmax> <upper pmax>
//! ...                                                   one line per window entry
//! sha256 <hex digest of every preceding byte>
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::engine::BoundRunState;
use super::schedule::make_schedule;
use crate::directed::{DirectedValue, Rounding};
use crate::rational::{format_rational, parse_rational};
use crate::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "etacert-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format: String,
    pub version: u32,
    pub alpha: String,
    pub schedule_name: String,
    pub schedule: String,
    pub precision_bits: u32,
    pub horizon: u64,
    pub current_n: u64,
    pub integrity: String,
    pub window_start: u64,
    pub window_len: u64,
    /// Caller data stored alongside the run (certification progress).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attachment: Option<serde_json::Value>,
}

/// Writes `state` to `path` atomically and returns the file's SHA-256 digest.
pub fn checkpoint_save(state: &BoundRunState, path: &Path) -> Result<String> {
    checkpoint_save_with(state, path, None)
}

pub fn checkpoint_save_with(state: &BoundRunState, path: &Path, attachment: Option<serde_json::Value>) -> Result<String> {
    let window = state.window_range();
    let header = CheckpointHeader {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        alpha: format_rational(state.alpha()),
        schedule_name: state.schedule().name().into(),
        schedule: state.schedule().spec(),
        precision_bits: state.precision_bits(),
        horizon: state.horizon(),
        current_n: state.current_n(),
        integrity: state.integrity_hex(),
        window_start: *window.start(),
        window_len: window.end() - window.start() + 1,
        attachment,
    };
    let mut body = serde_json::to_string(&header)?;
    body.push('\n');
    for n in window {
        let (l, u) = (&state.lower, &state.upper);
        body.push_str(&format!(
            "{n} {} {} {} {}\n",
            l.value(n),
            u.value(n),
            l.pmax(n),
            u.pmax(n)
        ));
    }
    let digest = hex::encode(Sha256::digest(body.as_bytes()));
    body.push_str(&format!("sha256 {digest}\n"));

    let tmp = path.with_extension("tmp");
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| Error::checkpoint(path, format!("write failed: {e}")))?;
    Ok(digest)
}

/// The SHA-256 digest recorded in the trailer of a checkpoint file.
pub fn checkpoint_digest(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::checkpoint(path, format!("read failed: {e}")))?;
    text.lines()
        .last()
        .and_then(|l| l.strip_prefix("sha256 "))
        .map(|d| d.trim().to_string())
        .ok_or_else(|| Error::checkpoint(path, "missing sha256 trailer (truncated file?)"))
}

pub fn checkpoint_load(path: &Path) -> Result<BoundRunState> {
    checkpoint_load_with(path).map(|(s, _)| s)
}

/// Loads a checkpoint, returning the run state and the stored attachment.
pub fn checkpoint_load_with(path: &Path) -> Result<(BoundRunState, Option<serde_json::Value>)> {
    let fail = |detail: String| Error::checkpoint(path, detail);
    let text = fs::read_to_string(path).map_err(|e| fail(format!("read failed: {e}")))?;
    let body_end = text
        .trim_end_matches('\n')
        .rfind('\n')
        .map(|i| i + 1)
        .ok_or_else(|| fail("truncated file".into()))?;
    let (body, trailer) = text.split_at(body_end);
    let stored = trailer
        .trim_end()
        .strip_prefix("sha256 ")
        .ok_or_else(|| fail("missing sha256 trailer (truncated file?)".into()))?;
    let actual = hex::encode(Sha256::digest(body.as_bytes()));
    if stored != actual {
        return Err(fail(format!("hash mismatch: stored {stored}, computed {actual}")));
    }

    let mut lines = body.lines();
    let header: CheckpointHeader = serde_json::from_str(lines.next().ok_or_else(|| fail("empty file".into()))?)
        .map_err(|e| fail(format!("bad header: {e}")))?;
    if header.format != CHECKPOINT_FORMAT {
        return Err(fail(format!("unknown format {:?}", header.format)));
    }
    if header.version != CHECKPOINT_VERSION {
        return Err(fail(format!(
            "version mismatch: file has {}, expected {CHECKPOINT_VERSION}",
            header.version
        )));
    }
    let alpha = parse_rational(&header.alpha)?;
    let schedule = make_schedule(&header.schedule)?;
    let schedule = if header.schedule_name != header.schedule {
        super::schedule::rename(schedule, &header.schedule_name)
    } else {
        schedule
    };
    let integrity: [u8; 32] = hex::decode(&header.integrity)
        .ok()
        .and_then(|v| v.try_into().ok())
        .ok_or_else(|| fail("bad integrity hash".into()))?;
    let mut state = BoundRunState::from_parts(
        &alpha,
        schedule,
        header.precision_bits,
        header.horizon,
        header.current_n,
        integrity,
    )?;
    if header.window_len == 0
        || header.window_start + header.window_len != header.current_n + 1
        || header.window_len as usize > state.window_capacity()
    {
        return Err(fail("inconsistent window bounds".into()));
    }
    state.restart_window_at(header.window_start);
    let mut count = 0u64;
    for line in lines {
        let f: Vec<&str> = line.split(' ').collect();
        if f.len() != 9 {
            return Err(fail(format!("bad window line {line:?}")));
        }
        let n: u64 = f[0].parse().map_err(|_| fail("bad index".into()))?;
        if n != header.window_start + count {
            return Err(fail(format!("window index {n} out of sequence")));
        }
        let lower = DirectedValue::decode(f[1], f[2], f[3], Rounding::Down)?;
        let upper = DirectedValue::decode(f[4], f[5], f[6], Rounding::Up)?;
        if lower.mantissa().len() != state.limbs() || upper.mantissa().len() != state.limbs() {
            return Err(fail("precision mismatch in window".into()));
        }
        let pl: i64 = f[7].parse().map_err(|_| fail("bad pmax".into()))?;
        let pu: i64 = f[8].parse().map_err(|_| fail("bad pmax".into()))?;
        state.restore_entry(&lower, &upper, (pl, pu));
        count += 1;
    }
    if count != header.window_len {
        return Err(fail(format!("expected {} window lines, found {count}", header.window_len)));
    }
    Ok((state, header.attachment))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::schedule::make_schedule;
    use rug::Rational;

    fn advanced(n: u64) -> BoundRunState {
        let mut s = BoundRunState::new(&Rational::from(4), make_schedule("pow(10,3)").unwrap(), 128, 400).unwrap();
        for _ in 0..n {
            s.step().unwrap();
        }
        s
    }

    #[test]
    fn resume_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        let mut a = advanced(150);
        checkpoint_save(&a, &path).unwrap();
        let mut b = checkpoint_load(&path).unwrap();
        assert_eq!(b.current_n(), 150);
        assert_eq!(b.integrity_hex(), a.integrity_hex());
        for _ in 0..100 {
            assert_eq!(a.step().unwrap(), b.step().unwrap());
        }
        assert_eq!(b.integrity_hex(), a.integrity_hex());
    }

    #[test]
    fn detects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        checkpoint_save(&advanced(20), &path).unwrap();
        let mut bytes = fs::read(&path).unwrap();

        let mut flipped = bytes.clone();
        flipped[200] ^= 1;
        fs::write(&path, &flipped).unwrap();
        let err = checkpoint_load(&path).unwrap_err().to_string();
        assert!(err.contains("hash mismatch"), "{err}");

        bytes.truncate(bytes.len() / 2);
        fs::write(&path, &bytes).unwrap();
        assert!(checkpoint_load(&path).is_err());
    }

    #[test]
    fn detects_version_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.ckpt");
        checkpoint_save(&advanced(5), &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let body: String = text
            .lines()
            .filter(|l| !l.starts_with("sha256 "))
            .map(|l| format!("{l}\n"))
            .collect::<String>()
            .replace("\"version\":1", "\"version\":99");
        let digest = hex::encode(Sha256::digest(body.as_bytes()));
        fs::write(&path, format!("{body}sha256 {digest}\n")).unwrap();
        let err = checkpoint_load(&path).unwrap_err().to_string();
        assert!(err.contains("version mismatch"), "{err}");
    }
}
