//! CSV tables, snapshots and the run manifest.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use displab::Field;
use sha2::{Digest, Sha256};

/// Round-trip exact rendering of a double: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Optional value: empty cell when absent.
pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Writes a header and rows to `dir/name`, creating `dir` if needed.
pub fn write_csv(dir: &Path, name: &str, header: &str, rows: &[Vec<String>]) -> io::Result<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = String::with_capacity(64 * (rows.len() + 1));
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::File::create(&path)?.write_all(text.as_bytes())?;
    Ok(path)
}

/// One line per mode, `n,re,im`.
pub fn write_field(dir: &Path, name: &str, field: &Field) -> io::Result<PathBuf> {
    let rows: Vec<Vec<String>> = field
        .modes()
        .map(|(n, c)| vec![n.to_string(), num(c.re), num(c.im)])
        .collect();
    write_csv(dir, name, "n,re,im", &rows)
}

/// Writes `summary.csv` with `key,value` rows.
pub fn write_summary(dir: &Path, entries: &[(String, String)]) -> io::Result<PathBuf> {
    let rows: Vec<Vec<String>> = entries.iter().map(|(k, v)| vec![k.clone(), v.clone()]).collect();
    write_csv(dir, "summary.csv", "key,value", &rows)
}

/// Hex SHA-256 of the resolved settings and the seed, shortened to 16 digits.
pub fn run_id(canonical_settings: &str, seed: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(canonical_settings.as_bytes());
    hasher.update(seed.to_le_bytes());
    hex::encode(hasher.finalize())[..16].to_string()
}

pub struct Manifest<'a> {
    pub subcommand: &'a str,
    pub config: Option<&'a Path>,
    pub out: &'a Path,
    pub seed: u64,
    pub settings: &'a str,
}

impl Manifest<'_> {
    pub fn id(&self) -> String {
        run_id(self.settings, self.seed)
    }

    pub fn write(&self) -> io::Result<PathBuf> {
        fs::create_dir_all(self.out)?;
        let mut text = format!(
            "subcommand={}\nconfig={}\nout={}\nseed={}\nrun_id={}\n",
            self.subcommand,
            self.config.map(|p| p.display().to_string()).unwrap_or_default(),
            self.out.display(),
            self.seed,
            self.id()
        );
        for line in self.settings.lines() {
            text.push_str("setting.");
            text.push_str(line);
            text.push('\n');
        }
        let path = self.out.join("manifest.txt");
        fs::write(&path, text)?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn run_id_depends_on_settings_and_seed() {
        assert_eq!(run_id("a=1\n", 7), run_id("a=1\n", 7));
        assert_ne!(run_id("a=1\n", 7), run_id("a=1\n", 8));
        assert_ne!(run_id("a=1\n", 7), run_id("a=2\n", 7));
        assert_eq!(run_id("", 0).len(), 16);
    }
}
