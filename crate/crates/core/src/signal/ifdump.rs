//! Raw IF dump: interleaved little-endian i16 samples plus a key-value
//! sidecar describing the stream.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::{IfSampleBlock, SignalError};

/// Sidecar metadata for an IF dump.
#[derive(Debug, Clone, PartialEq)]
pub struct IfDumpMeta {
    pub f_s: f64,
    pub f_if: f64,
    pub t_start: f64,
    pub n_samples: u64,
    /// Hash of the scenario configuration that produced the dump.
    pub scenario_hash: String,
}

/// Append blocks to `path` (single real channel, 16-bit LE) and write the
/// sidecar `<path>.meta` describing them.
pub fn write_if_dump(
    path: &Path,
    blocks: impl Iterator<Item = IfSampleBlock>,
    scenario_hash: &str,
) -> Result<IfDumpMeta, SignalError> {
    let mut w = BufWriter::new(File::create(path)?);
    let mut meta: Option<IfDumpMeta> = None;
    let mut n: u64 = 0;
    for b in blocks {
        if meta.is_none() {
            meta = Some(IfDumpMeta {
                f_s: b.f_s as f64,
                f_if: b.f_if,
                t_start: b.t_start,
                n_samples: 0,
                scenario_hash: scenario_hash.to_string(),
            });
        }
        for s in &b.samples {
            w.write_all(&s.to_le_bytes())?;
        }
        n += b.samples.len() as u64;
    }
    w.flush()?;
    let mut meta = meta.ok_or_else(|| SignalError::BadDump("no blocks".into()))?;
    meta.n_samples = n;
    let meta_path = path.with_extension(format!(
        "{}meta",
        path.extension().map(|e| format!("{}.", e.to_string_lossy())).unwrap_or_default()
    ));
    let mut mw = BufWriter::new(File::create(meta_path)?);
    writeln!(mw, "format = i16le_real")?;
    writeln!(mw, "f_s_hz = {}", meta.f_s)?;
    writeln!(mw, "f_if_hz = {}", meta.f_if)?;
    writeln!(mw, "t_start_s = {}", meta.t_start)?;
    writeln!(mw, "n_samples = {}", meta.n_samples)?;
    writeln!(mw, "scenario_hash = {}", meta.scenario_hash)?;
    mw.flush()?;
    Ok(meta)
}

/// Parse a sidecar written by [`write_if_dump`].
pub fn read_if_dump_meta(meta_path: &Path) -> Result<IfDumpMeta, SignalError> {
    let mut text = String::new();
    File::open(meta_path)?.read_to_string(&mut text)?;
    let mut f_s = None;
    let mut f_if = None;
    let mut t_start = None;
    let mut n_samples = None;
    let mut hash = None;
    for line in text.lines() {
        let Some((k, v)) = line.split_once('=') else {
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        match k {
            "f_s_hz" => f_s = v.parse().ok(),
            "f_if_hz" => f_if = v.parse().ok(),
            "t_start_s" => t_start = v.parse().ok(),
            "n_samples" => n_samples = v.parse().ok(),
            "scenario_hash" => hash = Some(v.to_string()),
            _ => {}
        }
    }
    Ok(IfDumpMeta {
        f_s: f_s.ok_or_else(|| SignalError::BadDump("missing f_s_hz".into()))?,
        f_if: f_if.ok_or_else(|| SignalError::BadDump("missing f_if_hz".into()))?,
        t_start: t_start.ok_or_else(|| SignalError::BadDump("missing t_start_s".into()))?,
        n_samples: n_samples.ok_or_else(|| SignalError::BadDump("missing n_samples".into()))?,
        scenario_hash: hash.ok_or_else(|| SignalError::BadDump("missing scenario_hash".into()))?,
    })
}
