//! File formats: grids (one text header line plus a raw little-endian payload),
//! multiscale records, and whitespace-delimited seed lists.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolutionSchedule, SplitOrder, VelocityKind, VelocityModel};
use crate::grid::{GridGeometry, ScalarGrid, Vec3, VectorGrid};
use crate::msr::{DisplacementSet, MultiscaleRecord};

pub const GRID_MAGIC: &str = "shape-msr-grid";
pub const RECORD_MAGIC: &str = "shape-msr-record";
pub const FORMAT_VERSION: u32 = 1;
const MAX_HEADER: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalarWidth {
    W32,
    #[default]
    W64,
}

impl ScalarWidth {
    pub fn bits(self) -> usize {
        match self {
            ScalarWidth::W32 => 32,
            ScalarWidth::W64 => 64,
        }
    }

    fn bytes(self) -> usize {
        self.bits() / 8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridHeader {
    pub geometry: GridGeometry,
    pub width: ScalarWidth,
    pub components: usize,
}

impl GridHeader {
    pub fn payload_len(&self) -> usize {
        self.geometry.len() * self.components * self.width.bytes()
    }

    fn to_line(&self) -> String {
        let [nx, ny, nz] = self.geometry.dims();
        let o = self.geometry.origin();
        format!(
            "{GRID_MAGIC} version={FORMAT_VERSION} nx={nx} ny={ny} nz={nz} h={} ox={} oy={} oz={} width={} components={}\n",
            self.geometry.spacing(),
            o.x,
            o.y,
            o.z,
            self.width.bits(),
            self.components
        )
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| format_err(path, format!("cannot open: {e}")))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| format_err(path, format!("cannot create: {e}")))
}

fn read_line(r: &mut impl Read, path: &Path) -> Result<String> {
    let mut bytes = Vec::new();
    let mut b = [0u8; 1];
    loop {
        if r.read(&mut b)? == 0 {
            return Err(format_err(path, "unexpected end of file in header"));
        }
        if b[0] == b'\n' {
            break;
        }
        bytes.push(b[0]);
        if bytes.len() > MAX_HEADER {
            return Err(format_err(path, "header line too long"));
        }
    }
    String::from_utf8(bytes).map_err(|_| format_err(path, "header is not UTF-8"))
}

fn parse_pairs<'a>(line: &'a str, magic: &str, path: &Path) -> Result<Vec<(&'a str, &'a str)>> {
    let mut words = line.split_whitespace();
    if words.next() != Some(magic) {
        return Err(format_err(path, format!("missing `{magic}` signature")));
    }
    words
        .map(|w| w.split_once('=').ok_or_else(|| format_err(path, format!("malformed header field `{w}`"))))
        .collect()
}

fn field<T: std::str::FromStr>(pairs: &[(&str, &str)], key: &str, path: &Path) -> Result<T> {
    let raw = pairs
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| format_err(path, format!("header lacks `{key}`")))?;
    raw.parse()
        .map_err(|_| format_err(path, format!("cannot parse `{key}={raw}`")))
}

fn check_version(pairs: &[(&str, &str)], path: &Path) -> Result<()> {
    let v: u32 = field(pairs, "version", path)?;
    if v != FORMAT_VERSION {
        return Err(format_err(path, format!("unknown format version {v}")));
    }
    Ok(())
}

fn read_grid_header(r: &mut impl Read, path: &Path) -> Result<GridHeader> {
    let line = read_line(r, path)?;
    let pairs = parse_pairs(&line, GRID_MAGIC, path)?;
    check_version(&pairs, path)?;
    let dims = [
        field(&pairs, "nx", path)?,
        field(&pairs, "ny", path)?,
        field(&pairs, "nz", path)?,
    ];
    let h: f64 = field(&pairs, "h", path)?;
    let origin = Vec3::new(field(&pairs, "ox", path)?, field(&pairs, "oy", path)?, field(&pairs, "oz", path)?);
    let width = match field::<u32>(&pairs, "width", path)? {
        32 => ScalarWidth::W32,
        64 => ScalarWidth::W64,
        w => return Err(format_err(path, format!("unsupported scalar width {w}"))),
    };
    let components: usize = field(&pairs, "components", path)?;
    if components != 1 && components != 3 {
        return Err(format_err(path, format!("unsupported component count {components}")));
    }
    let geometry = GridGeometry::new(dims, h, origin).map_err(|e| format_err(path, e.to_string()))?;
    Ok(GridHeader {
        geometry,
        width,
        components,
    })
}

fn encode(values: &[f64], width: ScalarWidth, out: &mut Vec<u8>) {
    match width {
        ScalarWidth::W64 => {
            for v in values {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        ScalarWidth::W32 => {
            for v in values {
                out.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
    }
}

fn decode(bytes: &[u8], width: ScalarWidth) -> Vec<f64> {
    match width {
        ScalarWidth::W64 => bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        ScalarWidth::W32 => bytes
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect(),
    }
}

/// Reads exactly `len` payload bytes, reporting a short read as a size mismatch.
fn read_payload(r: &mut impl Read, len: usize) -> Result<Vec<u8>> {
    let mut buf = Vec::with_capacity(len);
    r.take(len as u64).read_to_end(&mut buf)?;
    if buf.len() != len {
        return Err(Error::PayloadSize {
            expected: len,
            actual: buf.len(),
        });
    }
    Ok(buf)
}

fn write_grid_raw(w: &mut impl Write, header: &GridHeader, values: &[f64]) -> Result<()> {
    w.write_all(header.to_line().as_bytes())?;
    let mut bytes = Vec::with_capacity(header.payload_len());
    encode(values, header.width, &mut bytes);
    w.write_all(&bytes)?;
    Ok(())
}

/// Header and flat component-interleaved values of one grid in a stream.
fn read_grid_raw(r: &mut impl Read, path: &Path) -> Result<(GridHeader, Vec<f64>)> {
    let header = read_grid_header(r, path)?;
    let bytes = read_payload(r, header.payload_len())?;
    let values = decode(&bytes, header.width);
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(format_err(path, format!("non-finite value at payload index {i}")));
    }
    Ok((header, values))
}

fn ensure_eof(r: &mut impl Read, path: &Path) -> Result<()> {
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(format_err(path, "trailing bytes after payload"));
    }
    Ok(())
}

pub fn save_grid(path: &Path, grid: &ScalarGrid, width: ScalarWidth) -> Result<()> {
    let header = GridHeader {
        geometry: *grid.geometry(),
        width,
        components: 1,
    };
    let mut w = BufWriter::new(create(path)?);
    write_grid_raw(&mut w, &header, grid.values())?;
    w.flush()?;
    Ok(())
}

pub fn load_grid(path: &Path) -> Result<ScalarGrid> {
    let mut r = BufReader::new(open(path)?);
    let (header, values) = read_grid_raw(&mut r, path)?;
    if header.components != 1 {
        return Err(format_err(path, format!("expected a scalar grid, found {} components", header.components)));
    }
    ensure_eof(&mut r, path)?;
    ScalarGrid::new(header.geometry, values)
}

pub fn save_vector_grid(path: &Path, grid: &VectorGrid, width: ScalarWidth) -> Result<()> {
    let header = GridHeader {
        geometry: *grid.geometry(),
        width,
        components: 3,
    };
    let flat: Vec<f64> = grid.values().iter().flat_map(|v| [v.x, v.y, v.z]).collect();
    let mut w = BufWriter::new(create(path)?);
    write_grid_raw(&mut w, &header, &flat)?;
    w.flush()?;
    Ok(())
}

pub fn load_vector_grid(path: &Path) -> Result<VectorGrid> {
    let mut r = BufReader::new(open(path)?);
    let (header, values) = read_grid_raw(&mut r, path)?;
    if header.components != 3 {
        return Err(format_err(path, format!("expected a vector grid, found {} components", header.components)));
    }
    ensure_eof(&mut r, path)?;
    let vectors = values.chunks_exact(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect();
    VectorGrid::new(header.geometry, vectors)
}

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleManifest {
    nodes: Vec<f64>,
    dt: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelManifest {
    kind: String,
    c: f64,
    lambda: f64,
    split: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LevelManifest {
    level: usize,
    interval: [f64; 2],
    points: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct RecordManifest {
    version: u32,
    schedule: ScheduleManifest,
    model: ModelManifest,
    target_spacing: f64,
    initial_points: usize,
    levels: Vec<LevelManifest>,
    level_fields: usize,
}

pub fn kind_name(kind: VelocityKind) -> &'static str {
    match kind {
        VelocityKind::Constant => "constant",
        VelocityKind::ConstantMinusCurvature => "constant-minus-curvature",
        VelocityKind::VolumePreservingMC => "volume-preserving",
        VelocityKind::CombinedInpainting => "combined",
    }
}

pub fn parse_kind(name: &str) -> Option<VelocityKind> {
    Some(match name {
        "constant" => VelocityKind::Constant,
        "constant-minus-curvature" => VelocityKind::ConstantMinusCurvature,
        "volume-preserving" => VelocityKind::VolumePreservingMC,
        "combined" => VelocityKind::CombinedInpainting,
        _ => return None,
    })
}

fn split_name(s: SplitOrder) -> &'static str {
    match s {
        SplitOrder::CurvatureFirst => "curvature-first",
        SplitOrder::ConstantFirst => "constant-first",
    }
}

fn f64s(values: impl IntoIterator<Item = f64>, out: &mut Vec<u8>) {
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn points_bytes(points: &[Vec3], out: &mut Vec<u8>) {
    f64s(points.iter().flat_map(|p| [p.x, p.y, p.z]), out);
}

/// Writes a record: header line, JSON manifest, per-level arrays, then the
/// coarse grid and any retained level fields as embedded grid files.
pub fn save_record(path: &Path, rec: &MultiscaleRecord) -> Result<()> {
    let manifest = RecordManifest {
        version: FORMAT_VERSION,
        schedule: ScheduleManifest {
            nodes: rec.schedule.nodes().to_vec(),
            dt: rec.schedule.dt(),
        },
        model: ModelManifest {
            kind: kind_name(rec.model.kind).to_string(),
            c: rec.model.c,
            lambda: rec.model.lambda,
            split: split_name(rec.model.split).to_string(),
        },
        target_spacing: rec.target_spacing,
        initial_points: rec.initial_points.len(),
        levels: rec
            .levels
            .iter()
            .map(|l| LevelManifest {
                level: l.level,
                interval: [l.interval.0, l.interval.1],
                points: l.len(),
            })
            .collect(),
        level_fields: rec.level_fields.len(),
    };
    let json = serde_json::to_vec(&manifest).map_err(|e| format_err(path, e.to_string()))?;
    let mut w = BufWriter::new(create(path)?);
    writeln!(w, "{RECORD_MAGIC} version={FORMAT_VERSION} manifest_bytes={}", json.len())?;
    w.write_all(&json)?;
    let mut bytes = Vec::new();
    points_bytes(&rec.initial_points, &mut bytes);
    for l in &rec.levels {
        for id in &l.ids {
            bytes.extend_from_slice(&(*id as u64).to_le_bytes());
        }
        points_bytes(&l.base_points, &mut bytes);
        points_bytes(&l.vectors, &mut bytes);
        f64s(l.details.iter().copied(), &mut bytes);
    }
    w.write_all(&bytes)?;
    for g in std::iter::once(&rec.coarse).chain(&rec.level_fields) {
        let header = GridHeader {
            geometry: *g.geometry(),
            width: ScalarWidth::W64,
            components: 1,
        };
        write_grid_raw(&mut w, &header, g.values())?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor {
    bytes: Vec<u8>,
    pos: usize,
}

impl Cursor {
    fn f64(&mut self) -> f64 {
        let v = f64::from_le_bytes(self.bytes[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        v
    }

    fn u64(&mut self) -> u64 {
        let v = u64::from_le_bytes(self.bytes[self.pos..self.pos + 8].try_into().unwrap());
        self.pos += 8;
        v
    }

    fn points(&mut self, n: usize) -> Vec<Vec3> {
        (0..n)
            .map(|_| {
                let x = self.f64();
                let y = self.f64();
                let z = self.f64();
                Vec3::new(x, y, z)
            })
            .collect()
    }
}

pub fn load_record(path: &Path) -> Result<MultiscaleRecord> {
    let mut r = BufReader::new(open(path)?);
    let line = read_line(&mut r, path)?;
    let pairs = parse_pairs(&line, RECORD_MAGIC, path)?;
    check_version(&pairs, path)?;
    let json_len: usize = field(&pairs, "manifest_bytes", path)?;
    let json = read_payload(&mut r, json_len)?;
    let m: RecordManifest = serde_json::from_slice(&json).map_err(|e| format_err(path, format!("bad manifest: {e}")))?;
    if m.version != FORMAT_VERSION {
        return Err(format_err(path, format!("unknown manifest version {}", m.version)));
    }
    let array_len = 24 * m.initial_points + m.levels.iter().map(|l| l.points * (8 + 24 + 24 + 8)).sum::<usize>();
    let mut cur = Cursor {
        bytes: read_payload(&mut r, array_len)?,
        pos: 0,
    };
    let initial_points = cur.points(m.initial_points);
    let mut levels = Vec::with_capacity(m.levels.len());
    for lm in &m.levels {
        let ids: Vec<usize> = (0..lm.points).map(|_| cur.u64() as usize).collect();
        if ids.iter().any(|&i| i >= m.initial_points) {
            return Err(format_err(path, format!("point id out of range at level {}", lm.level)));
        }
        let base_points = cur.points(lm.points);
        let vectors = cur.points(lm.points);
        let details = (0..lm.points).map(|_| cur.f64()).collect();
        levels.push(DisplacementSet {
            level: lm.level,
            interval: (lm.interval[0], lm.interval[1]),
            ids,
            base_points,
            vectors,
            details,
        });
    }
    let mut grids = Vec::with_capacity(1 + m.level_fields);
    for _ in 0..=m.level_fields {
        let (header, values) = read_grid_raw(&mut r, path)?;
        if header.components != 1 {
            return Err(format_err(path, "embedded grid must be scalar"));
        }
        grids.push(ScalarGrid::new(header.geometry, values)?);
    }
    ensure_eof(&mut r, path)?;
    let coarse = grids.remove(0);
    let kind = parse_kind(&m.model.kind).ok_or_else(|| format_err(path, format!("unknown model `{}`", m.model.kind)))?;
    let split = match m.model.split.as_str() {
        "curvature-first" => SplitOrder::CurvatureFirst,
        "constant-first" => SplitOrder::ConstantFirst,
        s => return Err(format_err(path, format!("unknown split order `{s}`"))),
    };
    Ok(MultiscaleRecord {
        initial_points,
        levels,
        coarse,
        schedule: EvolutionSchedule::new(m.schedule.nodes, m.schedule.dt)?,
        model: VelocityModel {
            kind,
            c: m.model.c,
            lambda: m.model.lambda,
            split,
        },
        target_spacing: m.target_spacing,
        level_fields: grids,
    })
}

/// One `x y z` triple per line; blank lines and `#` comments are skipped.
pub fn parse_seeds(text: &str, path: &Path) -> Result<Vec<Vec3>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums: Vec<f64> = line
            .split_whitespace()
            .map(|w| w.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format_err(path, format!("line {}: expected numbers", n + 1)))?;
        if nums.len() != 3 || nums.iter().any(|v| !v.is_finite()) {
            return Err(format_err(path, format!("line {}: expected three finite coordinates", n + 1)));
        }
        out.push(Vec3::new(nums[0], nums[1], nums[2]));
    }
    Ok(out)
}

pub fn load_seeds(path: &Path) -> Result<Vec<Vec3>> {
    let text = std::fs::read_to_string(path).map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    parse_seeds(&text, path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// `base` with `suffix` inserted before the extension, e.g. `out.grid` → `out_1.grid`.
pub fn indexed_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match base.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{stem}_{suffix}"),
    };
    base.with_file_name(name)
}
