use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rss_sense::sim::corpora::MANIFEST;

use crate::Select;

/// Trace files named by the first column of a corpus manifest.
fn manifest_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.starts_with("file,") || h.trim() == "file" => {}
        _ => bail!("{}: first column must be `file`", path.display()),
    }
    Ok(lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| dir.join(l.split(',').next().unwrap_or("").trim()))
        .collect())
}

/// Expands corpus directories into their traces, then keeps the rows picked
/// by `select` (counted from zero).
pub fn expand(inputs: &[PathBuf], select: Select) -> Result<Vec<PathBuf>> {
    let mut all = Vec::new();
    for p in inputs {
        if p.is_dir() {
            all.extend(manifest_files(p)?);
        } else {
            all.push(p.clone());
        }
    }
    let keep = |i: usize| match select {
        Select::All => true,
        Select::Even => i % 2 == 0,
        Select::Odd => i % 2 == 1,
    };
    let out: Vec<PathBuf> = all.into_iter().enumerate().filter(|(i, _)| keep(*i)).map(|(_, p)| p).collect();
    if out.is_empty() {
        bail!("no input traces");
    }
    Ok(out)
}

/// File name used to identify a trace in output tables.
pub fn trace_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directory_expansion_and_selection() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join(MANIFEST), "file,x\na.csv,1\nb.csv,2\nc.csv,3\n").unwrap();
        let all = expand(&[dir.path().to_path_buf()], Select::All).unwrap();
        assert_eq!(all.iter().map(|p| trace_name(p)).collect::<Vec<_>>(), ["a.csv", "b.csv", "c.csv"]);
        assert_eq!(expand(&[dir.path().to_path_buf()], Select::Odd).unwrap().len(), 1);
        assert_eq!(expand(&[dir.path().to_path_buf()], Select::Even).unwrap().len(), 2);
        fs::write(dir.path().join(MANIFEST), "name\n").unwrap();
        assert!(expand(&[dir.path().to_path_buf()], Select::All).is_err());
    }
}
