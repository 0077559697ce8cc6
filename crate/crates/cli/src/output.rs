//! Number formatting and atomic artifact writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Shortest decimal form with up to 17 significant digits; scientific outside [1e-5, 1e17).
pub fn fmt17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { format!("{v}") };
    }
    let e = v.abs().log10().floor() as i32;
    if (-5..17).contains(&e) {
        let s = format!("{:.*}", (16 - e).max(0) as usize, v);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn header_comment(command: &str, seed: u64, params: &str) -> String {
    format!("# fracstorm {} command={command} seed={seed} {params}", env!("CARGO_PKG_VERSION"))
}

/// CSV text: the comment line, the header row, then one row per record.
pub fn csv(comment: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = format!("{comment}\n{}\n", header.join(","));
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Writes `bytes` to `dir/name` through a temporary file in the same directory and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&path).with_context(|| format!("renaming into {}", path.display()))?;
    readable(&path)?;
    Ok(path)
}

/// Temporary files are created 0600; artifacts get the usual 0644.
pub fn readable(path: &Path) -> Result<()> {
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(path, std::fs::Permissions::from_mode(0o644))?;
    }
    #[cfg(not(unix))]
    let _ = path;
    Ok(())
}
