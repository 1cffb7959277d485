//! Text file formats. Every format starts with a `# wrglauber-<kind> <version>`
//! header; reals are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use wrglauber_core::simulator::{EventKind, EventRecord, Snapshot};
use wrglauber_core::{Point, TwoTypeConfiguration};

use crate::error::CliError;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;
pub const EVENT_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.txt";

fn header(kind: &str, version: u32) -> String {
    format!("# wrglauber-{kind} {version}\n")
}

fn check_header<'a>(lines: &mut impl Iterator<Item = &'a str>, kind: &str, version: u32) -> Result<(), CliError> {
    let want = format!("# wrglauber-{kind} {version}");
    match lines.next() {
        Some(h) if h == want => Ok(()),
        Some(h) => Err(CliError::Format(format!("expected header `{want}`, found `{h}`"))),
        None => Err(CliError::Format(format!("empty file, expected header `{want}`"))),
    }
}

fn num(s: &str, what: &str) -> Result<f64, CliError> {
    s.parse().map_err(|_| CliError::Format(format!("bad {what} `{s}`")))
}

fn count(s: &str, what: &str) -> Result<usize, CliError> {
    s.parse().map_err(|_| CliError::Format(format!("bad {what} `{s}`")))
}

fn push_point(out: &mut String, p: Point, dim: usize) {
    if dim == 2 {
        let _ = write!(out, "{:?} {:?}", p.x(), p.y());
    } else {
        let _ = write!(out, "{:?}", p.x());
    }
}

fn parse_point(fields: &[&str], dim: usize) -> Result<Point, CliError> {
    if fields.len() != dim {
        return Err(CliError::Format(format!("expected {dim} coordinates, got {}", fields.len())));
    }
    Ok(if dim == 2 {
        Point::new_2d(num(fields[0], "coordinate")?, num(fields[1], "coordinate")?)
    } else {
        Point::new_1d(num(fields[0], "coordinate")?)
    })
}

/// ```text
/// # wrglauber-snapshots 1
/// dim 1
/// snapshot <time> <n_plus> <n_minus>
/// + <x>
/// - <x>
/// ```
pub fn write_snapshots(dim: usize, snapshots: &[Snapshot]) -> String {
    let mut out = header("snapshots", SNAPSHOT_FORMAT_VERSION);
    let _ = writeln!(out, "dim {dim}");
    for s in snapshots {
        let _ = writeln!(out, "snapshot {:?} {} {}", s.time, s.config.plus.len(), s.config.minus.len());
        for (sign, pts) in [('+', &s.config.plus), ('-', &s.config.minus)] {
            for &p in pts.iter() {
                out.push(sign);
                out.push(' ');
                push_point(&mut out, p, dim);
                out.push('\n');
            }
        }
    }
    out
}

pub fn read_snapshots(text: &str) -> Result<(usize, Vec<Snapshot>), CliError> {
    let mut lines = text.lines();
    check_header(&mut lines, "snapshots", SNAPSHOT_FORMAT_VERSION)?;
    let dim = match lines.next().and_then(|l| l.strip_prefix("dim ")) {
        Some(d) => count(d, "dimension")?,
        None => return Err(CliError::Format("missing `dim` line".into())),
    };
    let mut out = Vec::new();
    while let Some(line) = lines.next() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 || f[0] != "snapshot" {
            return Err(CliError::Format(format!("expected a snapshot record, found `{line}`")));
        }
        let time = num(f[1], "time")?;
        let (np, nm) = (count(f[2], "count")?, count(f[3], "count")?);
        let mut config = TwoTypeConfiguration { plus: Vec::with_capacity(np), minus: Vec::with_capacity(nm) };
        for i in 0..np + nm {
            let line = lines.next().ok_or_else(|| CliError::Format("truncated snapshot".into()))?;
            let f: Vec<&str> = line.split_whitespace().collect();
            let want = if i < np { "+" } else { "-" };
            if f.first() != Some(&want) {
                return Err(CliError::Format(format!("expected `{want}` record, found `{line}`")));
            }
            let p = parse_point(&f[1..], dim)?;
            if i < np {
                config.plus.push(p);
            } else {
                config.minus.push(p);
            }
        }
        out.push(Snapshot { time, config });
    }
    Ok((dim, out))
}

/// One line per proposal: `<time> <kind> <coords...> <n_plus> <n_minus>`.
pub fn write_events(dim: usize, events: &[EventRecord]) -> String {
    let mut out = header("events", EVENT_FORMAT_VERSION);
    let _ = writeln!(out, "dim {dim}");
    for e in events {
        let _ = write!(out, "{:?} {} ", e.time, e.kind.label());
        push_point(&mut out, e.position, dim);
        let _ = writeln!(out, " {} {}", e.counts.0, e.counts.1);
    }
    out
}

pub fn read_events(text: &str) -> Result<Vec<EventRecord>, CliError> {
    let mut lines = text.lines();
    check_header(&mut lines, "events", EVENT_FORMAT_VERSION)?;
    let dim = match lines.next().and_then(|l| l.strip_prefix("dim ")) {
        Some(d) => count(d, "dimension")?,
        None => return Err(CliError::Format("missing `dim` line".into())),
    };
    lines
        .map(|line| {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 + dim {
                return Err(CliError::Format(format!("malformed event `{line}`")));
            }
            let kind = EventKind::from_label(f[1]).ok_or_else(|| CliError::Format(format!("unknown event kind `{}`", f[1])))?;
            Ok(EventRecord {
                time: num(f[0], "time")?,
                kind,
                position: parse_point(&f[2..2 + dim], dim)?,
                counts: (count(f[2 + dim], "count")?, count(f[3 + dim], "count")?),
            })
        })
        .collect()
}

/// Comma-separated table with a header row.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(columns: &[&str]) -> Self {
        Csv { text: columns.join(",") + "\n" }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let row: Vec<String> = fields.into_iter().collect();
        self.text.push_str(&row.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

/// Shortest round-trip form of a real.
pub fn real(x: f64) -> String {
    format!("{x:?}")
}

/// `key = value` records.
#[derive(Default)]
pub struct KvRecord {
    text: String,
}

impl KvRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.text, "{key} = {value}");
        self
    }

    pub fn put_real(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, real(value))
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn parse_kv(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = ").map(|(k, v)| (k.to_string(), v.to_string())))
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one experiment: the resolved configuration, seeds and every
/// produced file with its digest.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentManifest {
    pub experiment: String,
    pub code_version: String,
    pub created_unix: u64,
    pub seed: u64,
    pub replica_seeds: Vec<u64>,
    pub warnings: Vec<String>,
    pub config: String,
    pub files: Vec<FileEntry>,
}

impl ExperimentManifest {
    pub fn to_text(&self) -> String {
        let mut out = header("manifest", MANIFEST_FORMAT_VERSION);
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "code_version = {}", self.code_version);
        let _ = writeln!(out, "created_unix = {}", self.created_unix);
        let _ = writeln!(out, "seed = {}", self.seed);
        let seeds: Vec<String> = self.replica_seeds.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "replica_seeds = {}", seeds.join(" "));
        for w in &self.warnings {
            let _ = writeln!(out, "warning = {w}");
        }
        for l in self.config.lines() {
            let _ = writeln!(out, "config | {l}");
        }
        for f in &self.files {
            let _ = writeln!(out, "file {} {} {}", f.sha256, f.bytes, f.path);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        check_header(&mut lines, "manifest", MANIFEST_FORMAT_VERSION)?;
        let mut m = ExperimentManifest {
            experiment: String::new(),
            code_version: String::new(),
            created_unix: 0,
            seed: 0,
            replica_seeds: Vec::new(),
            warnings: Vec::new(),
            config: String::new(),
            files: Vec::new(),
        };
        for line in lines {
            if let Some(c) = line.strip_prefix("config | ") {
                m.config.push_str(c);
                m.config.push('\n');
            } else if let Some(rest) = line.strip_prefix("file ") {
                let mut it = rest.splitn(3, ' ');
                let (Some(sha), Some(bytes), Some(path)) = (it.next(), it.next(), it.next()) else {
                    return Err(CliError::Format(format!("malformed file entry `{line}`")));
                };
                m.files.push(FileEntry {
                    path: path.to_string(),
                    bytes: bytes.parse().map_err(|_| CliError::Format(format!("bad size in `{line}`")))?,
                    sha256: sha.to_string(),
                });
            } else if let Some((k, v)) = line.split_once(" = ") {
                let bad = || CliError::Format(format!("bad value in `{line}`"));
                match k {
                    "experiment" => m.experiment = v.to_string(),
                    "code_version" => m.code_version = v.to_string(),
                    "created_unix" => m.created_unix = v.parse().map_err(|_| bad())?,
                    "seed" => m.seed = v.parse().map_err(|_| bad())?,
                    "replica_seeds" => {
                        m.replica_seeds = v.split_whitespace().map(|s| s.parse().map_err(|_| bad())).collect::<Result<_, _>>()?
                    }
                    "warning" => m.warnings.push(v.to_string()),
                    _ => return Err(CliError::Format(format!("unknown manifest key `{k}`"))),
                }
            } else if !(line.starts_with("config |") || line.is_empty()) {
                return Err(CliError::Format(format!("unrecognized manifest line `{line}`")));
            } else {
                m.config.push('\n');
            }
        }
        Ok(m)
    }

    pub fn digest_of(&self, path: &str) -> Option<&str> {
        self.files.iter().find(|f| f.path == path).map(|f| f.sha256.as_str())
    }
}

/// All regular files under `dir`, relative and sorted.
pub fn list_files(dir: &Path) -> io::Result<Vec<String>> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<String>) -> io::Result<()> {
        for entry in fs::read_dir(dir)? {
            let entry = entry?;
            let path = entry.path();
            if entry.file_type()?.is_dir() {
                walk(base, &path, out)?;
            } else {
                let rel: PathBuf = path.strip_prefix(base).expect("walked under base").to_path_buf();
                out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}

/// Re-reads a finished output directory: the manifest must list exactly
/// the files present, with matching sizes and digests.
pub fn verify_output_dir(dir: &Path) -> Result<ExperimentManifest, CliError> {
    let text = fs::read_to_string(dir.join(MANIFEST_NAME)).map_err(|e| CliError::io(dir.join(MANIFEST_NAME), e))?;
    let manifest = ExperimentManifest::parse(&text)?;
    let present: Vec<String> = list_files(dir)
        .map_err(|e| CliError::io(dir, e))?
        .into_iter()
        .filter(|p| p != MANIFEST_NAME)
        .collect();
    let mut listed: Vec<String> = manifest.files.iter().map(|f| f.path.clone()).collect();
    listed.sort();
    if present != listed {
        return Err(CliError::Format(format!(
            "manifest lists {} files but directory holds {}: {:?} vs {:?}",
            listed.len(),
            present.len(),
            listed,
            present
        )));
    }
    for f in &manifest.files {
        let bytes = fs::read(dir.join(&f.path)).map_err(|e| CliError::io(dir.join(&f.path), e))?;
        if bytes.len() as u64 != f.bytes || sha256_hex(&bytes) != f.sha256 {
            return Err(CliError::Format(format!("digest mismatch for {}", f.path)));
        }
    }
    Ok(manifest)
}
