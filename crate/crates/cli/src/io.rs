//! Output files. Every file carries the config hash and the seed manifest so
//! that stale inputs are rejected downstream.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ladderlab::walk::LadderSample;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    /// Stream ids `first..first + count`.
    pub stream_first: u64,
    pub stream_count: u64,
    pub version: String,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, streams: u64) -> Self {
        Self {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            stream_first: 0,
            stream_count: streams,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    fn csv_header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# config_hash={}", self.config_hash);
        let _ = writeln!(s, "# seed={}", self.seed);
        let _ = writeln!(s, "# stream_first={}", self.stream_first);
        let _ = writeln!(s, "# stream_count={}", self.stream_count);
        let _ = writeln!(s, "# version={}", self.version);
        s
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    manifest: &'a Manifest,
    #[serde(flatten)]
    body: &'a T,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

/// Pretty JSON with the manifest first and a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, manifest: &Manifest, body: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(&Envelope { manifest, body })
        .map_err(|e| io_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn write_csv<T: Serialize>(path: &Path, manifest: &Manifest, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(manifest.csv_header().into_bytes());
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    let bytes = w.into_inner().map_err(|e| io_err(path, e))?;
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

#[derive(Serialize, Deserialize)]
struct SamplesJson {
    manifest: Manifest,
    samples: Vec<LadderSample>,
}

pub fn samples_path(dir: &Path, format: crate::config::Format) -> PathBuf {
    match format {
        crate::config::Format::Csv => dir.join("samples.csv"),
        crate::config::Format::Json => dir.join("samples.json"),
    }
}

/// Finds an existing samples file, preferring the requested format.
pub fn find_samples(dir: &Path, format: crate::config::Format) -> Result<PathBuf, CliError> {
    let first = samples_path(dir, format);
    if first.exists() {
        return Ok(first);
    }
    for name in ["samples.csv", "samples.json"] {
        let p = dir.join(name);
        if p.exists() {
            return Ok(p);
        }
    }
    Err(CliError::Config(format!("no samples file in {}; run simulate first", dir.display())))
}

fn parse_csv_manifest(text: &str, path: &Path) -> Result<(Manifest, usize), CliError> {
    let mut fields = std::collections::BTreeMap::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let Some(rest) = line.strip_prefix("# ") else { break };
        let (k, v) = rest
            .trim_end()
            .split_once('=')
            .ok_or_else(|| io_err(path, "malformed header line"))?;
        fields.insert(k.to_string(), v.to_string());
        offset += line.len();
    }
    let get = |k: &str| fields.get(k).cloned().ok_or_else(|| io_err(path, format!("missing `{k}` header")));
    let num = |k: &str| get(k)?.parse::<u64>().map_err(|e| io_err(path, format!("`{k}`: {e}")));
    Ok((
        Manifest {
            config_hash: get("config_hash")?,
            seed: num("seed")?,
            stream_first: num("stream_first")?,
            stream_count: num("stream_count")?,
            version: get("version")?,
        },
        offset,
    ))
}

/// Reads a samples file and checks it against `cfg`: hash, seed, stream ids
/// and per-row invariants.
pub fn read_samples(path: &Path, cfg: &ExperimentConfig) -> Result<(Manifest, Vec<LadderSample>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let (manifest, samples) = if path.extension().is_some_and(|e| e == "json") {
        let s: SamplesJson = serde_json::from_str(&text).map_err(|e| io_err(path, e))?;
        (s.manifest, s.samples)
    } else {
        let (m, offset) = parse_csv_manifest(&text, path)?;
        let mut r = csv::Reader::from_reader(&text.as_bytes()[offset..]);
        let rows: Result<Vec<LadderSample>, _> = r.deserialize().collect();
        (m, rows.map_err(|e| io_err(path, e))?)
    };
    let expect = cfg.hash();
    if manifest.config_hash != expect {
        return Err(io_err(
            path,
            format!("config hash {} does not match {expect}; rerun simulate", manifest.config_hash),
        ));
    }
    if manifest.seed != cfg.seed {
        return Err(io_err(path, "seed does not match the config"));
    }
    if manifest.stream_count != samples.len() as u64 || manifest.stream_count != cfg.n_samples {
        return Err(io_err(
            path,
            format!("expected {} samples, found {}", cfg.n_samples, samples.len()),
        ));
    }
    for (i, s) in samples.iter().enumerate() {
        let ok = s.stream_id == manifest.stream_first + i as u64
            && s.seed == cfg.seed
            && s.tau >= 1
            && s.tau <= cfg.step_cap
            && s.m_tau >= 0.0
            && (s.censored || s.s_tau <= 0.0)
            && s.s_tau.is_finite()
            && s.m_tau.is_finite();
        if !ok {
            return Err(io_err(path, format!("row {i} is inconsistent: {s:?}")));
        }
    }
    Ok((manifest, samples))
}

pub fn write_samples(
    path: &Path,
    manifest: &Manifest,
    samples: &[LadderSample],
    format: crate::config::Format,
) -> Result<(), CliError> {
    match format {
        crate::config::Format::Csv => write_csv(path, manifest, samples),
        crate::config::Format::Json => {
            let body = SamplesJson { manifest: manifest.clone(), samples: samples.to_vec() };
            let mut text = serde_json::to_string(&body).map_err(|e| io_err(path, e))?;
            text.push('\n');
            fs::write(path, text).map_err(|e| io_err(path, e))
        }
    }
}
