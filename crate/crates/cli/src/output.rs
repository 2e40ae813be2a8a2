use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const TOOL: &str = "epsdd";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stamped into every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_hash: String, seed: u64) -> Self {
        Self {
            tool: TOOL,
            version: VERSION,
            config_hash,
            seed,
        }
    }

    fn comment(&self) -> String {
        format!(
            "# {} {} config_hash={} seed={}\n",
            self.tool, self.version, self.config_hash, self.seed
        )
    }
}

#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    body: &'a T,
}

/// Output directory plus the provenance every file written into it carries.
pub struct OutDir {
    pub root: PathBuf,
    pub provenance: Provenance,
}

impl OutDir {
    pub fn new(root: PathBuf, provenance: Provenance) -> Self {
        Self { root, provenance }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    fn create(&self, rel: &str) -> Result<(PathBuf, fs::File)> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        }
        let file = fs::File::create(&path).with_context(|| format!("cannot write {}", path.display()))?;
        Ok((path, file))
    }

    /// Pretty JSON object with a leading `provenance` member; `body` must
    /// serialize to a map.
    pub fn json<T: Serialize>(&self, rel: &str, body: &T) -> Result<PathBuf> {
        let (path, mut f) = self.create(rel)?;
        let stamped = Stamped {
            provenance: &self.provenance,
            body,
        };
        let mut text = serde_json::to_string_pretty(&stamped)?;
        text.push('\n');
        f.write_all(text.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }

    /// CSV produced by `fill`, preceded by a `#` provenance line.
    pub fn csv<F>(&self, rel: &str, fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<()>,
    {
        let mut buf = self.provenance.comment().into_bytes();
        fill(&mut buf)?;
        let (path, mut f) = self.create(rel)?;
        f.write_all(&buf).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

/// Read a file that an earlier stage should have produced.
pub fn read_stage_file(path: &Path, stage: &str) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("missing {} (run `epsdd {stage}` first)", path.display()))
}

/// Single-column numeric CSV: the named column, or the first one.
pub fn read_values(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let header = r.headers()?.clone();
    let idx = match column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{} has no column `{name}`", path.display()))?,
        None => 0,
    };
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let row = row?;
        let v = row.get(idx).unwrap_or("");
        out.push(
            v.parse::<f64>()
                .with_context(|| format!("{} line {}: `{v}` is not a number", path.display(), i + 2))?,
        );
    }
    Ok(out)
}
