use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::TempDir;

use crate::error::{Error, Result};

fn file_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::File {
        path: path.to_owned(),
        source,
    }
}

/// Report files written under a hidden directory inside the target and
/// moved into place by [`Staging::commit`]. Dropping an uncommitted
/// staging area deletes everything written so far.
pub(crate) struct Staging {
    target: PathBuf,
    dir: TempDir,
    files: BTreeSet<PathBuf>,
}

impl Staging {
    pub(crate) fn new(target: &Path) -> Result<Self> {
        fs::create_dir_all(target).map_err(file_err(target))?;
        let dir = tempfile::Builder::new()
            .prefix(".staging-")
            .tempdir_in(target)
            .map_err(file_err(target))?;
        Ok(Staging {
            target: target.to_owned(),
            dir,
            files: BTreeSet::new(),
        })
    }

    pub(crate) fn write<P, F>(&mut self, rel: P, body: F) -> Result<()>
    where
        P: AsRef<Path>,
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let rel = rel.as_ref();
        let path = self.dir.path().join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(file_err(parent))?;
        }
        let mut w = BufWriter::new(File::create(&path).map_err(file_err(&path))?);
        body(&mut w)?;
        w.flush().map_err(file_err(&path))?;
        self.files.insert(rel.to_owned());
        Ok(())
    }

    /// Renames every staged file over its final path, in sorted order, and
    /// returns the relative paths.
    pub(crate) fn commit(self) -> Result<Vec<PathBuf>> {
        for rel in &self.files {
            let dest = self.target.join(rel);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).map_err(file_err(parent))?;
            }
            fs::rename(self.dir.path().join(rel), &dest).map_err(file_err(&dest))?;
        }
        Ok(self.files.into_iter().collect())
    }
}

/// Writes `path` through a temporary sibling that is renamed over it once
/// complete.
pub(crate) fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> Result<()>,
{
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_owned(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(file_err(&parent))?;
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(&parent).map_err(file_err(&parent))?;
    {
        let mut w = BufWriter::new(&mut tmp);
        body(&mut w)?;
        w.flush().map_err(file_err(path))?;
    }
    tmp.persist(path).map_err(|e| Error::File {
        path: path.to_owned(),
        source: e.error,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_moves_files_and_drop_discards() {
        let root = tempfile::tempdir().unwrap();
        let out = root.path().join("out");
        let mut s = Staging::new(&out).unwrap();
        s.write("a/b.csv", |w| Ok(w.write_all(b"x\n")?)).unwrap();
        s.write("c.json", |w| Ok(w.write_all(b"{}\n")?)).unwrap();
        let files = s.commit().unwrap();
        assert_eq!(files, vec![PathBuf::from("a/b.csv"), PathBuf::from("c.json")]);
        assert_eq!(fs::read_to_string(out.join("a/b.csv")).unwrap(), "x\n");

        let mut failed = Staging::new(&out).unwrap();
        failed.write("d.csv", |w| Ok(w.write_all(b"y")?)).unwrap();
        assert!(failed.write("e.csv", |_| Err(Error::invalid("boom"))).is_err());
        drop(failed);
        let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 2, "{names:?}");
        assert!(!out.join("d.csv").exists());
    }

    #[test]
    fn atomic_write_replaces() {
        let root = tempfile::tempdir().unwrap();
        let p = root.path().join("f.txt");
        write_atomic(&p, |w| Ok(w.write_all(b"one")?)).unwrap();
        write_atomic(&p, |w| Ok(w.write_all(b"two")?)).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert!(write_atomic(&p, |_| Err(Error::invalid("x"))).is_err());
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(root.path()).unwrap().count(), 1);
    }
}
