//! Binary snapshot (`EULR`) and characteristic-geometry (`EULG`) files.
//!
//! All integers are little-endian `u32`, all reals little-endian binary64.
//!
//! ```text
//! EULR: magic | version | n | length | gamma | count | count x (time, rho[n^3], v1[n^3], v2[n^3], v3[n^3])
//! EULG: magic | version | count | count x graph record
//! ```
//!
//! Writers stream into a temporary sibling and rename on [`SnapshotWriter::finish`],
//! so a failed run never leaves a partial file behind.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use eulerbench_core::{EquationOfState, FluidState, SnapshotStack};
use eulerbench_geometry::{ConnectionCoefficients, FoliationGraph, NullFrame};
use eulerbench_spectral::{Grid, ScalarField, VectorField};

use crate::artifacts::temp_path;
use crate::error::{CliError, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"EULR";
pub const GEOMETRY_MAGIC: &[u8; 4] = b"EULG";
pub const FORMAT_VERSION: u32 = 1;

/// Byte offset of the snapshot count in an `EULR` header.
const COUNT_OFFSET: u64 = 4 + 4 + 4 + 8 + 8;

pub struct SnapshotWriter {
    out: BufWriter<File>,
    tmp: PathBuf,
    path: PathBuf,
    n: usize,
    count: u32,
}

impl SnapshotWriter {
    pub fn create(path: impl AsRef<Path>, grid: Grid, eos: &EquationOfState) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let tmp = temp_path(&path);
        let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        let mut w = Self {
            out: BufWriter::new(file),
            tmp,
            path,
            n: grid.n(),
            count: 0,
        };
        let mut header = Vec::with_capacity(COUNT_OFFSET as usize + 4);
        header.extend_from_slice(SNAPSHOT_MAGIC);
        header.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        header.extend_from_slice(&(grid.n() as u32).to_le_bytes());
        header.extend_from_slice(&grid.length().to_le_bytes());
        header.extend_from_slice(&eos.gamma().to_le_bytes());
        header.extend_from_slice(&0u32.to_le_bytes());
        w.write(&header)?;
        Ok(w)
    }

    fn write(&mut self, bytes: &[u8]) -> Result<()> {
        self.out.write_all(bytes).map_err(|e| CliError::io(&self.tmp, e))
    }

    pub fn push(&mut self, state: &FluidState) -> Result<()> {
        if state.grid().n() != self.n {
            return Err(CliError::Format("snapshot grid differs from the file header".into()));
        }
        let mut buf = Vec::with_capacity(8 + 4 * 8 * state.grid().len());
        buf.extend_from_slice(&state.time().to_le_bytes());
        for f in std::iter::once(state.rho_log()).chain(state.velocity().components()) {
            for x in f.values() {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        self.write(&buf)?;
        self.count += 1;
        Ok(())
    }

    /// Patches the count, flushes and moves the file into place.
    pub fn finish(self) -> Result<PathBuf> {
        let Self { out, tmp, path, count, .. } = self;
        let mut file = out.into_inner().map_err(|e| CliError::io(&tmp, e.into_error()))?;
        file.seek(SeekFrom::Start(COUNT_OFFSET)).map_err(|e| CliError::io(&tmp, e))?;
        file.write_all(&count.to_le_bytes()).map_err(|e| CliError::io(&tmp, e))?;
        file.sync_all().map_err(|e| CliError::io(&tmp, e))?;
        drop(file);
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    /// Removes the temporary file; used on error paths.
    pub fn abandon(self) {
        let tmp = self.tmp.clone();
        drop(self);
        let _ = std::fs::remove_file(tmp);
    }
}

pub fn write_snapshots(path: impl AsRef<Path>, stack: &SnapshotStack) -> Result<PathBuf> {
    let mut w = SnapshotWriter::create(path, stack.grid(), stack.eos())?;
    for s in stack.states() {
        w.push(s)?;
    }
    w.finish()
}

struct Cursor<R> {
    inner: R,
    path: PathBuf,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                CliError::Format(format!("{}: truncated file", self.path.display()))
            } else {
                CliError::io(&self.path, e)
            }
        })?;
        Ok(b)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn f64s(&mut self, len: usize) -> Result<Vec<f64>> {
        let mut raw = vec![0u8; len * 8];
        self.inner.read_exact(&mut raw).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                CliError::Format(format!("{}: truncated file", self.path.display()))
            } else {
                CliError::io(&self.path, e)
            }
        })?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn header(&mut self, magic: &[u8; 4]) -> Result<()> {
        let found: [u8; 4] = self.bytes()?;
        if &found != magic {
            return Err(CliError::Format(format!(
                "{}: bad magic {:?}, expected {:?}",
                self.path.display(),
                String::from_utf8_lossy(&found),
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(CliError::Format(format!(
                "{}: unsupported format version {version}",
                self.path.display()
            )));
        }
        Ok(())
    }

    fn expect_end(&mut self) -> Result<()> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe) {
            Ok(0) => Ok(()),
            Ok(_) => Err(CliError::Format(format!("{}: trailing bytes", self.path.display()))),
            Err(e) => Err(CliError::io(&self.path, e)),
        }
    }
}

fn open(path: &Path) -> Result<Cursor<BufReader<File>>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(Cursor {
        inner: BufReader::new(file),
        path: path.to_path_buf(),
    })
}

/// Reads an `EULR` file. The reference density is not stored and is taken as 1.
pub fn read_snapshots(path: impl AsRef<Path>) -> Result<SnapshotStack> {
    let path = path.as_ref();
    let mut r = open(path)?;
    r.header(SNAPSHOT_MAGIC)?;
    let n = r.u32()? as usize;
    let length = r.f64()?;
    let gamma = r.f64()?;
    let count = r.u32()? as usize;
    let grid = Grid::with_params(n, length, Grid::DEFAULT_DEALIAS)
        .map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    let eos = EquationOfState::new(gamma, 1.0).map_err(|e| CliError::Format(format!("{}: {e}", path.display())))?;
    if count == 0 {
        return Err(CliError::Format(format!("{}: no snapshots", path.display())));
    }
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        let time = r.f64()?;
        let mut field = || -> Result<ScalarField> { Ok(ScalarField::from_values_unchecked(grid, r.f64s(grid.len())?)) };
        let rho = field()?;
        let v = VectorField::from_components(field()?, field()?, field()?)
            .map_err(|e| CliError::Format(e.to_string()))?;
        states.push(FluidState::new(rho, v, time)?);
    }
    r.expect_end()?;
    let dt = if count > 1 {
        (states[count - 1].time() - states[0].time()) / (count - 1) as f64
    } else {
        1.0
    };
    Ok(SnapshotStack::with_spacing(states, dt, eos)?)
}

/// One foliation leaf with its null frame and connection coefficients.
pub struct GeometryRecord<'a> {
    pub graph: &'a FoliationGraph,
    pub frame: &'a NullFrame,
    pub connection: &'a ConnectionCoefficients,
}

/// Decoded `EULG` record; frame vectors are stored per (time, node) as `l, lbar, e1, e2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredGraph {
    pub direction: [i64; 3],
    pub r: f64,
    pub m: [usize; 2],
    pub period: [f64; 2],
    pub times: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    pub dphi_dt: Vec<Vec<f64>>,
    pub frames: Vec<Vec<[[f64; 4]; 4]>>,
    pub chi: Vec<Vec<[[f64; 2]; 2]>>,
}

/// Record layout: direction (3 x i64) | r | m1 | m2 | period1 | period2 | n_times | times,
/// then per time: phi[m1 m2], dphi_dt[m1 m2], 16 frame reals and 4 chi reals per node.
pub fn write_geometry(path: impl AsRef<Path>, records: &[GeometryRecord<'_>]) -> Result<PathBuf> {
    let mut buf = Vec::new();
    buf.extend_from_slice(GEOMETRY_MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(records.len() as u32).to_le_bytes());
    let put = |buf: &mut Vec<u8>, x: f64| buf.extend_from_slice(&x.to_le_bytes());
    for rec in records {
        let g = rec.graph;
        for d in g.direction.integer() {
            buf.extend_from_slice(&d.to_le_bytes());
        }
        put(&mut buf, g.r);
        for m in g.torus.m {
            buf.extend_from_slice(&(m as u32).to_le_bytes());
        }
        for p in g.torus.period {
            put(&mut buf, p);
        }
        buf.extend_from_slice(&(g.times.len() as u32).to_le_bytes());
        for &t in &g.times {
            put(&mut buf, t);
        }
        for ti in 0..g.times.len() {
            for &x in g.phi[ti].iter().chain(&g.dphi_dt[ti]) {
                put(&mut buf, x);
            }
            for (p, fp) in rec.frame.points[ti].iter().enumerate() {
                for v in [fp.l, fp.lbar, fp.e[0], fp.e[1]] {
                    for x in v {
                        put(&mut buf, x);
                    }
                }
                for row in rec.connection.chi[ti][p] {
                    for x in row {
                        put(&mut buf, x);
                    }
                }
            }
        }
    }
    crate::artifacts::write_atomic(path, &buf)
}

pub fn read_geometry(path: impl AsRef<Path>) -> Result<Vec<StoredGraph>> {
    let path = path.as_ref();
    let mut r = open(path)?;
    r.header(GEOMETRY_MAGIC)?;
    let count = r.u32()?;
    let mut out = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let direction = [r.i64()?, r.i64()?, r.i64()?];
        let rr = r.f64()?;
        let m = [r.u32()? as usize, r.u32()? as usize];
        let period = [r.f64()?, r.f64()?];
        let nt = r.u32()? as usize;
        let times = r.f64s(nt)?;
        let len = m[0] * m[1];
        let (mut phi, mut dphi_dt, mut frames, mut chi) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for _ in 0..nt {
            phi.push(r.f64s(len)?);
            dphi_dt.push(r.f64s(len)?);
            let (mut fr, mut ch) = (Vec::with_capacity(len), Vec::with_capacity(len));
            for _ in 0..len {
                let raw = r.f64s(20)?;
                let mut f = [[0.0; 4]; 4];
                for (k, x) in raw[..16].iter().enumerate() {
                    f[k / 4][k % 4] = *x;
                }
                fr.push(f);
                ch.push([[raw[16], raw[17]], [raw[18], raw[19]]]);
            }
            frames.push(fr);
            chi.push(ch);
        }
        out.push(StoredGraph {
            direction,
            r: rr,
            m,
            period,
            times,
            phi,
            dphi_dt,
            frames,
            chi,
        });
    }
    r.expect_end()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use eulerbench_core::{simulate, InitialData, SimConfig, TimeStep};

    fn stack() -> SnapshotStack {
        let mut cfg = SimConfig::new(8, InitialData::RandomBandLimited { band: 2.0, amplitude: 0.1 }, 0.02, TimeStep::Fixed(0.005));
        cfg.seed = 3;
        simulate(&cfg).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let s = stack();
        write_snapshots(&path, &s).unwrap();
        let back = read_snapshots(&path).unwrap();
        assert_eq!(back.len(), s.len());
        for (a, b) in s.states().iter().zip(back.states()) {
            assert_eq!(a.time().to_bits(), b.time().to_bits());
            assert_eq!(a.rho_log().values(), b.rho_log().values());
            for c in 0..3 {
                assert_eq!(a.velocity().component(c).values(), b.velocity().component(c).values());
            }
        }
        assert_eq!(back.eos().gamma(), s.eos().gamma());
        // header: 4 + 4 + 4 + 8 + 8 + 4, then (8 + 4 * 8 * 512) per snapshot
        let bytes = std::fs::metadata(&path).unwrap().len() as usize;
        assert_eq!(bytes, 32 + s.len() * (8 + 32 * 512));
    }

    #[test]
    fn wrong_magic_and_version_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        write_snapshots(&path, &stack()).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut bad = good.clone();
        bad[0] = b'X';
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_snapshots(&path), Err(CliError::Format(m)) if m.contains("magic")));

        let mut bad = good.clone();
        bad[4] = 9;
        std::fs::write(&path, &bad).unwrap();
        assert!(matches!(read_snapshots(&path), Err(CliError::Format(m)) if m.contains("version")));

        std::fs::write(&path, &good[..good.len() - 3]).unwrap();
        assert!(matches!(read_snapshots(&path), Err(CliError::Format(m)) if m.contains("truncated")));
    }

    #[test]
    fn abandoned_writer_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let s = stack();
        let mut w = SnapshotWriter::create(&path, s.grid(), s.eos()).unwrap();
        w.push(s.state(0)).unwrap();
        w.abandon();
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
