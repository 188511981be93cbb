use std::fs;
use std::io::ErrorKind;
use std::path::Path;

/// Outcome of a write-once attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WriteOnce {
    Created,
    /// An equivalent file was already there.
    Existing,
    /// A different file is already there.
    Conflict,
}

/// Write `bytes` to `path` unless it exists. An existing file is accepted when
/// `same(existing)` holds. The file appears atomically through a hard link
/// from a temp file, so concurrent writers cannot interleave.
pub fn write_once_by(path: &Path, bytes: &[u8], same: impl Fn(&[u8]) -> bool) -> std::io::Result<WriteOnce> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let judge = |existing: Vec<u8>| if same(&existing) { WriteOnce::Existing } else { WriteOnce::Conflict };
    match fs::read(path) {
        Ok(existing) => return Ok(judge(existing)),
        Err(e) if e.kind() == ErrorKind::NotFound => {}
        Err(e) => return Err(e),
    }
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    fs::write(tmp.path(), bytes)?;
    match fs::hard_link(tmp.path(), path) {
        Ok(()) => Ok(WriteOnce::Created),
        Err(e) if e.kind() == ErrorKind::AlreadyExists => Ok(judge(fs::read(path)?)),
        Err(e) => Err(e),
    }
}

/// Byte-exact write-once.
pub fn write_once(path: &Path, bytes: &[u8]) -> std::io::Result<WriteOnce> {
    write_once_by(path, bytes, |existing| existing == bytes)
}

/// Replace `path` atomically with `bytes`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    fs::write(tmp.path(), bytes)?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concurrent_writers_agree() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        let results: Vec<WriteOnce> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..16)
                .map(|i| {
                    let path = &path;
                    s.spawn(move || {
                        let body = if i % 2 == 0 { "even" } else { "odd" };
                        write_once(path, body.as_bytes()).unwrap()
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        assert_eq!(results.iter().filter(|r| **r == WriteOnce::Created).count(), 1);
        let winner = fs::read_to_string(&path).unwrap();
        assert!(winner == "even" || winner == "odd");
        assert_eq!(results.iter().filter(|r| **r == WriteOnce::Existing).count(), 7);
        assert_eq!(results.iter().filter(|r| **r == WriteOnce::Conflict).count(), 8);
    }
}
