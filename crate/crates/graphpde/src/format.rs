//! Binary dataset (`GPDS`) and model (`GPNN`) files.
//!
//! Both formats are little-endian throughout and end with a metadata block:
//! a `u32` byte length followed by UTF-8 `key=value` lines, each terminated
//! by `\n`.
//!
//! Dataset layout after the 4-byte magic `GPDS` and `u32` version:
//!
//! ```text
//! u8  equation kind (0 heat, 1 convdiff, 2 burgers)
//! f64 diffusion, f64 vx, f64 vy
//! u8  boundary (0 periodic, 1 dirichlet)
//! f64 x_lo, f64 y_lo, f64 x_hi, f64 y_hi
//! u32 fourier modes, u32 reference grid side, f64 reference step
//! u32 simulation count
//! per simulation:
//!   u32 N, u32 M+1, u8 d
//!   N × (f64 x, f64 y)
//!   (M+1) × f64 time
//!   (M+1) × N × d × f64 state
//! metadata block
//! ```
//!
//! Model layout after the magic `GPNN` and `u32` version:
//!
//! ```text
//! u32 state dim, u32 hidden width, u32 hidden layers, u32 message width,
//! u32 graph layers, u8 edge features (0/1)
//! u64 parameter count, then that many f64
//! metadata block
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use graphpde_core::datagen::{Boundary, Dataset, EquationKind, EquationSpec, SimulationRecord};
use graphpde_core::mpnn::{Surrogate, SurrogateConfig};
use graphpde_core::nn::ParamVector;

use crate::error::{Error, Result};

pub const DATASET_MAGIC: &[u8; 4] = b"GPDS";
pub const MODEL_MAGIC: &[u8; 4] = b"GPNN";
pub const FORMAT_VERSION: u32 = 1;

/// A trained surrogate as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub config: SurrogateConfig,
    pub params: ParamVector,
    pub metadata: Vec<(String, String)>,
}

impl ModelFile {
    pub fn surrogate(&self) -> Result<Surrogate> {
        Ok(Surrogate::new(self.config)?)
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) -> std::result::Result<(), String> {
        let v = u32::try_from(v).map_err(|_| format!("{v} does not fit in 32 bits"))?;
        self.0.extend_from_slice(&v.to_le_bytes());
        Ok(())
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s(&mut self, v: &[f64]) {
        self.0.reserve(8 * v.len());
        for x in v {
            self.f64(*x);
        }
    }
    fn metadata(&mut self, entries: &[(String, String)]) -> std::result::Result<(), String> {
        let mut text = String::new();
        for (k, v) in entries {
            if k.is_empty() || k.contains(['=', '\n']) || v.contains('\n') {
                return Err(format!("metadata entry {k:?}={v:?} cannot be stored"));
            }
            text.push_str(k);
            text.push('=');
            text.push_str(v);
            text.push('\n');
        }
        self.u32(text.len())?;
        self.0.extend_from_slice(text.as_bytes());
        Ok(())
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> std::result::Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or("unexpected end of file")?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> std::result::Result<u8, String> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> std::result::Result<usize, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> std::result::Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> std::result::Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64s(&mut self, n: usize) -> std::result::Result<Vec<f64>, String> {
        let bytes = self.take(n.checked_mul(8).ok_or("length overflow")?)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
    fn header(&mut self, magic: &[u8; 4]) -> std::result::Result<(), String> {
        if self.take(4)? != magic {
            return Err(format!("not a {} file", String::from_utf8_lossy(magic)));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION as usize {
            return Err(format!("unsupported format version {version}"));
        }
        Ok(())
    }
    fn metadata(&mut self) -> std::result::Result<Vec<(String, String)>, String> {
        let len = self.u32()?;
        let text = std::str::from_utf8(self.take(len)?).map_err(|e| format!("metadata is not UTF-8: {e}"))?;
        text.lines()
            .map(|line| {
                line.split_once('=')
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .ok_or_else(|| format!("malformed metadata line {line:?}"))
            })
            .collect()
    }
    fn finish(&self) -> std::result::Result<(), String> {
        if self.pos != self.data.len() {
            return Err(format!("{} trailing bytes", self.data.len() - self.pos));
        }
        Ok(())
    }
}

fn kind_code(kind: EquationKind) -> u8 {
    match kind {
        EquationKind::Heat => 0,
        EquationKind::ConvDiff => 1,
        EquationKind::Burgers => 2,
    }
}

pub fn encode_dataset(ds: &Dataset) -> std::result::Result<Vec<u8>, String> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(DATASET_MAGIC);
    w.u32(FORMAT_VERSION as usize)?;
    let eq = &ds.equation;
    w.u8(kind_code(eq.kind));
    w.f64(eq.diffusion);
    w.f64s(&eq.velocity);
    w.u8(match eq.boundary {
        Boundary::Periodic => 0,
        Boundary::Dirichlet => 1,
    });
    w.f64s(&[eq.lo[0], eq.lo[1], eq.hi[0], eq.hi[1]]);
    w.u32(eq.fourier_n)?;
    w.u32(eq.gt_grid)?;
    w.f64(eq.gt_dt);
    w.u32(ds.simulations.len())?;
    for sim in &ds.simulations {
        let n = sim.coords.len();
        w.u32(n)?;
        w.u32(sim.times.len())?;
        w.u8(u8::try_from(sim.state_dim).map_err(|_| "state dimension too large")?);
        for c in &sim.coords {
            w.f64s(c);
        }
        w.f64s(&sim.times);
        if sim.states.len() != sim.times.len() {
            return Err("simulation has a different number of states and times".into());
        }
        for s in &sim.states {
            if s.len() != n * sim.state_dim {
                return Err("state length does not match node count".into());
            }
            w.f64s(s);
        }
    }
    w.metadata(&ds.metadata)?;
    Ok(w.0)
}

pub fn decode_dataset(bytes: &[u8]) -> std::result::Result<Dataset, String> {
    let mut r = Reader { data: bytes, pos: 0 };
    r.header(DATASET_MAGIC)?;
    let kind = match r.u8()? {
        0 => EquationKind::Heat,
        1 => EquationKind::ConvDiff,
        2 => EquationKind::Burgers,
        k => return Err(format!("unknown equation kind {k}")),
    };
    let diffusion = r.f64()?;
    let velocity = [r.f64()?, r.f64()?];
    let boundary = match r.u8()? {
        0 => Boundary::Periodic,
        1 => Boundary::Dirichlet,
        b => return Err(format!("unknown boundary code {b}")),
    };
    let (x0, y0, x1, y1) = (r.f64()?, r.f64()?, r.f64()?, r.f64()?);
    let fourier_n = r.u32()?;
    let gt_grid = r.u32()?;
    let gt_dt = r.f64()?;
    let equation =
        EquationSpec { kind, diffusion, velocity, lo: [x0, y0], hi: [x1, y1], boundary, fourier_n, gt_grid, gt_dt };
    let count = r.u32()?;
    let mut simulations = Vec::with_capacity(count.min(1 << 16));
    for _ in 0..count {
        let n = r.u32()?;
        let m = r.u32()?;
        let d = r.u8()? as usize;
        let flat = r.f64s(2 * n)?;
        let coords = flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        let times = r.f64s(m)?;
        let states = (0..m).map(|_| r.f64s(n * d)).collect::<std::result::Result<Vec<_>, _>>()?;
        simulations.push(SimulationRecord { coords, times, states, state_dim: d });
    }
    let metadata = r.metadata()?;
    r.finish()?;
    Ok(Dataset { equation, simulations, metadata })
}

pub fn encode_model(model: &ModelFile) -> std::result::Result<Vec<u8>, String> {
    let c = &model.config;
    let expected = c.param_count().map_err(|e| e.to_string())?;
    if model.params.len() != expected {
        return Err(format!("{} parameters for an architecture with {expected}", model.params.len()));
    }
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MODEL_MAGIC);
    w.u32(FORMAT_VERSION as usize)?;
    w.u32(c.state_dim)?;
    w.u32(c.hidden_width)?;
    w.u32(c.hidden_layers)?;
    w.u32(c.message_dim)?;
    w.u32(c.graph_layers)?;
    w.u8(c.use_edge_features as u8);
    w.u64(model.params.len() as u64);
    w.f64s(&model.params);
    w.metadata(&model.metadata)?;
    Ok(w.0)
}

pub fn decode_model(bytes: &[u8]) -> std::result::Result<ModelFile, String> {
    let mut r = Reader { data: bytes, pos: 0 };
    r.header(MODEL_MAGIC)?;
    let config = SurrogateConfig {
        state_dim: r.u32()?,
        hidden_width: r.u32()?,
        hidden_layers: r.u32()?,
        message_dim: r.u32()?,
        graph_layers: r.u32()?,
        use_edge_features: match r.u8()? {
            0 => false,
            1 => true,
            f => return Err(format!("invalid edge-feature flag {f}")),
        },
    };
    let count = r.u64()?;
    let expected = config.param_count().map_err(|e| e.to_string())?;
    if count != expected as u64 {
        return Err(format!("file holds {count} parameters, architecture needs {expected}"));
    }
    let params = r.f64s(expected)?.into();
    let metadata = r.metadata()?;
    r.finish()?;
    Ok(ModelFile { config, params, metadata })
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(fs::Permissions::from_mode(0o644)).map_err(|e| Error::io(tmp.path(), e))?;
    }
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn format_error(path: &Path, message: String) -> Error {
    Error::Format { path: path.to_path_buf(), message }
}

pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let bytes = encode_dataset(ds).map_err(|m| format_error(path, m))?;
    write_atomic(path, &bytes)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let ds = decode_dataset(&bytes).map_err(|m| format_error(path, m))?;
    ds.validate().map_err(|e| format_error(path, e.to_string()))?;
    Ok(ds)
}

pub fn write_model(path: &Path, model: &ModelFile) -> Result<()> {
    let bytes = encode_model(model).map_err(|m| format_error(path, m))?;
    write_atomic(path, &bytes)
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes).map_err(|m| format_error(path, m))
}
