//! File formats: MORF field dumps, basis files and CSV outputs.
//!
//! MORF layout: `b"MORF"`, `u32 nx`, `u32 ny`, `u64 frame_count`, then
//! `frame_count × nx × ny` little-endian `f64` in row-major order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::basis::{ProductKind, Provenance, SnapshotBasis};
use crate::error::{Error, Result};
use crate::inverse::{LineSearchResult, TraceSet};
use crate::rom::ErrorSeries;

pub const MORF_MAGIC: &[u8; 4] = b"MORF";
const COUNT_OFFSET: u64 = 12;

/// Streaming MORF writer; the frame count is patched in on [`MorfWriter::finish`].
#[derive(Debug)]
pub struct MorfWriter<W: Write + Seek> {
    out: W,
    frame_len: usize,
    frames: u64,
}

impl MorfWriter<BufWriter<File>> {
    pub fn create(path: &Path, nx: usize, ny: usize) -> Result<Self> {
        MorfWriter::new(BufWriter::new(File::create(path)?), nx, ny)
    }
}

impl<W: Write + Seek> MorfWriter<W> {
    pub fn new(mut out: W, nx: usize, ny: usize) -> Result<Self> {
        let to_u32 = |v: usize| u32::try_from(v).map_err(|_| Error::Format("dimension exceeds u32".into()));
        out.write_all(MORF_MAGIC)?;
        out.write_all(&to_u32(nx)?.to_le_bytes())?;
        out.write_all(&to_u32(ny)?.to_le_bytes())?;
        out.write_all(&0u64.to_le_bytes())?;
        Ok(MorfWriter {
            out,
            frame_len: nx * ny,
            frames: 0,
        })
    }

    pub fn write_frame(&mut self, frame: &[f64]) -> Result<()> {
        if frame.len() != self.frame_len {
            return Err(Error::Dimension(format!(
                "frame has {} values, expected {}",
                frame.len(),
                self.frame_len
            )));
        }
        for v in frame {
            self.out.write_all(&v.to_le_bytes())?;
        }
        self.frames += 1;
        Ok(())
    }

    pub fn frames(&self) -> u64 {
        self.frames
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.seek(SeekFrom::Start(COUNT_OFFSET))?;
        self.out.write_all(&self.frames.to_le_bytes())?;
        self.out.seek(SeekFrom::End(0))?;
        self.out.flush()?;
        Ok(self.out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorfData {
    pub nx: usize,
    pub ny: usize,
    /// Frames concatenated, `frame_count × nx × ny`.
    pub data: Vec<f64>,
}

impl MorfData {
    pub fn frame_count(&self) -> usize {
        let len = self.nx * self.ny;
        if len == 0 {
            0
        } else {
            self.data.len() / len
        }
    }

    pub fn frame(&self, i: usize) -> &[f64] {
        let len = self.nx * self.ny;
        &self.data[i * len..(i + 1) * len]
    }
}

pub fn read_morf_from<R: Read>(mut r: R) -> Result<MorfData> {
    let mut head = [0u8; 20];
    r.read_exact(&mut head)
        .map_err(|_| Error::Format("truncated MORF header".into()))?;
    if &head[..4] != MORF_MAGIC {
        return Err(Error::Format("missing MORF magic".into()));
    }
    let nx = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let ny = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let count = u64::from_le_bytes(head[12..20].try_into().unwrap()) as usize;
    let total = nx * ny * count;
    let mut bytes = Vec::with_capacity(total * 8);
    r.read_to_end(&mut bytes)?;
    if bytes.len() != total * 8 {
        return Err(Error::Format(format!(
            "MORF payload has {} bytes, header implies {}",
            bytes.len(),
            total * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(MorfData { nx, ny, data })
}

pub fn read_morf(path: &Path) -> Result<MorfData> {
    read_morf_from(BufReader::new(File::open(path)?))
}

/// Sidecar manifest path of a basis file.
pub fn basis_manifest_path(path: &Path) -> PathBuf {
    path.with_extension("manifest")
}

/// Writes the vectors as MORF frames and a text manifest next to them.
pub fn write_basis(path: &Path, basis: &SnapshotBasis, nodes_per_side: usize) -> Result<PathBuf> {
    if nodes_per_side * nodes_per_side != basis.len() {
        return Err(Error::Dimension("basis length is not nodes_per_side²".into()));
    }
    let mut w = MorfWriter::create(path, nodes_per_side, nodes_per_side)?;
    for v in basis.vectors() {
        w.write_frame(v)?;
    }
    w.finish()?;
    let stats = basis.stats();
    let mut text = String::new();
    text.push_str(&format!("inner_product = {}\n", basis.kind().as_str()));
    text.push_str(&format!("epsilon = {:?}\n", basis.epsilon()));
    text.push_str(&format!("count = {}\n", basis.count()));
    text.push_str(&format!("candidates = {}\n", stats.candidates));
    text.push_str(&format!("degenerate = {}\n", stats.degenerate));
    text.push_str("# vector = level step\n");
    for p in basis.provenance() {
        text.push_str(&format!("vector = {} {}\n", p.level, p.step));
    }
    let mpath = basis_manifest_path(path);
    std::fs::write(&mpath, text)?;
    Ok(mpath)
}

pub fn read_basis(path: &Path) -> Result<SnapshotBasis> {
    let morf = read_morf(path)?;
    let text = std::fs::read_to_string(basis_manifest_path(path))?;
    let mut kind = None;
    let mut epsilon = None;
    let mut count = None;
    let mut provenance = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |reason: &str| Error::Parse {
            line: i + 1,
            reason: reason.to_string(),
        };
        let (k, v) = line.split_once('=').ok_or_else(|| bad("expected key = value"))?;
        let v = v.trim();
        match k.trim() {
            "inner_product" => kind = Some(v.parse::<ProductKind>()?),
            "epsilon" => epsilon = Some(v.parse::<f64>().map_err(|_| bad("bad epsilon"))?),
            "count" => count = Some(v.parse::<usize>().map_err(|_| bad("bad count"))?),
            "vector" => {
                let mut it = v.split_whitespace().map(str::parse::<usize>);
                match (it.next(), it.next()) {
                    (Some(Ok(level)), Some(Ok(step))) => provenance.push(Provenance { level, step }),
                    _ => return Err(bad("vector needs level and step")),
                }
            }
            "candidates" | "degenerate" => {}
            other => return Err(bad(&format!("unknown key `{other}`"))),
        }
    }
    let kind = kind.ok_or_else(|| Error::MissingKey("inner_product".into()))?;
    let epsilon = epsilon.ok_or_else(|| Error::MissingKey("epsilon".into()))?;
    let count = count.ok_or_else(|| Error::MissingKey("count".into()))?;
    if count != provenance.len() || count != morf.frame_count() {
        return Err(Error::Format(format!(
            "manifest count {count}, {} provenance lines, {} frames",
            provenance.len(),
            morf.frame_count()
        )));
    }
    SnapshotBasis::from_parts(morf.nx * morf.ny, morf.data, provenance, kind, epsilon)
}

fn fmt(v: f64) -> String {
    format!("{v:?}")
}

/// Header `time,x₁,…,x_R`, then one row per step.
pub fn write_traces_csv(path: &Path, traces: &TraceSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["time".to_string()];
    header.extend(traces.positions().iter().map(|(x, _)| fmt(*x)));
    w.write_record(&header)?;
    for (i, t) in traces.times().iter().enumerate() {
        let mut rec = vec![fmt(*t)];
        rec.extend(traces.row(i).iter().map(|v| fmt(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a traces CSV; receiver depth is not stored and is taken from `y`.
pub fn read_traces_csv(path: &Path, y: f64) -> Result<TraceSet> {
    let mut r = csv::Reader::from_path(path)?;
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Format(format!("bad number `{s}` in {}", path.display())))
    };
    let headers = r.headers()?.clone();
    let positions = headers
        .iter()
        .skip(1)
        .map(|h| parse(h).map(|x| (x, y)))
        .collect::<Result<Vec<_>>>()?;
    let mut times = Vec::new();
    let mut samples = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut it = rec.iter();
        times.push(parse(it.next().unwrap_or(""))?);
        for s in it {
            samples.push(parse(s)?);
        }
    }
    TraceSet::new(times, positions, samples)
}

pub fn write_cost_csv(path: &Path, result: &LineSearchResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["alpha", "J"])?;
    for (a, j) in result.alphas.iter().zip(&result.costs) {
        w.write_record([fmt(*a), fmt(*j)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_error_csv(path: &Path, series: &ErrorSeries, dt: f64) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["step", "time", "rel_error"])?;
    for (i, e) in series.errors.iter().enumerate() {
        let n = i + 1;
        w.write_record([n.to_string(), fmt(n as f64 * dt), fmt(*e)])?;
    }
    w.flush()?;
    Ok(())
}
