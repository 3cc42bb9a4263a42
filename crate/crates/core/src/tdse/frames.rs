//! Frame stores: the time series of ψ written during an evolution and read
//! back by the trajectory integrator.
//!
//! On-disk layout (little-endian):
//!
//! ```text
//! "QHWF" | version u32 | points_per_axis u32 | x_min f64 | x_max f64
//!        | frame_count u32 | frame_dt f64 | symmetry u8
//! frame_count × points² × (re f64, im f64), row-major
//! ```
//!
//! Frame k is taken at t = k·frame_dt.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use super::grid::Axis;
use super::state::Wavefunction2D;
use crate::error::{Error, Result};
use crate::model::Symmetry;

pub const MAGIC: &[u8; 4] = b"QHWF";
pub const VERSION: u32 = 1;
const HEADER_LEN: u64 = 4 + 4 + 4 + 8 + 8 + 4 + 8 + 1;
const FRAME_COUNT_OFFSET: u64 = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameHeader {
    pub points_per_axis: u32,
    pub x_min: f64,
    pub x_max: f64,
    pub frame_count: u32,
    pub frame_dt: f64,
    pub symmetry: Symmetry,
}

impl FrameHeader {
    pub fn axis(&self) -> Axis {
        let n = self.points_per_axis as usize;
        Axis {
            x_min: self.x_min,
            dx: (self.x_max - self.x_min) / n as f64,
            n,
        }
    }

    pub fn frame_len(&self) -> usize {
        let n = self.points_per_axis as usize;
        n * n
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.frame_dt
    }

    /// Wraps the amplitudes of frame `k` as a state.
    pub fn state(&self, k: usize, amplitudes: Vec<Complex64>) -> Result<Wavefunction2D> {
        if amplitudes.len() != self.frame_len() {
            return Err(Error::precondition(format!(
                "frame holds {} values, header implies {}",
                amplitudes.len(),
                self.frame_len()
            )));
        }
        Ok(Wavefunction2D {
            axis: self.axis(),
            amplitudes,
            symmetry: self.symmetry,
            t: self.time(k),
        })
    }
}

/// Receiver of frames produced by an evolution.
pub trait FrameSink {
    fn begin(&mut self, header: &FrameHeader) -> Result<()>;
    fn push(&mut self, psi: &[Complex64]) -> Result<()>;
    fn finish(&mut self) -> Result<()>;
}

/// Sequential access to stored frames.
pub trait FrameSource {
    fn header(&self) -> &FrameHeader;
    /// Next frame into `out`; `Ok(false)` once the store is exhausted.
    fn next_frame(&mut self, out: &mut [Complex64]) -> Result<bool>;
}

/// Frames kept in memory; fine for small grids and tests.
#[derive(Debug, Clone, Default)]
pub struct MemoryFrames {
    pub header: Option<FrameHeader>,
    pub frames: Vec<Vec<Complex64>>,
    cursor: usize,
}

impl MemoryFrames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rewind(&mut self) {
        self.cursor = 0;
    }
}

impl FrameSink for MemoryFrames {
    fn begin(&mut self, header: &FrameHeader) -> Result<()> {
        self.header = Some(*header);
        self.frames.clear();
        self.cursor = 0;
        Ok(())
    }

    fn push(&mut self, psi: &[Complex64]) -> Result<()> {
        self.frames.push(psi.to_vec());
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        if let Some(h) = &mut self.header {
            h.frame_count = self.frames.len() as u32;
        }
        Ok(())
    }
}

impl FrameSource for MemoryFrames {
    fn header(&self) -> &FrameHeader {
        self.header
            .as_ref()
            .expect("frame store has no header; nothing was recorded")
    }

    fn next_frame(&mut self, out: &mut [Complex64]) -> Result<bool> {
        match self.frames.get(self.cursor) {
            Some(f) => {
                out.copy_from_slice(f);
                self.cursor += 1;
                Ok(true)
            }
            None => Ok(false),
        }
    }
}

/// Streams frames to a QHWF file. The frame count in the header is patched
/// when the writer finishes.
pub struct FrameWriter {
    path: PathBuf,
    out: Option<BufWriter<File>>,
    written: u32,
    frame_len: usize,
}

impl FrameWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path)?;
        Ok(Self {
            path,
            out: Some(BufWriter::with_capacity(1 << 20, file)),
            written: 0,
            frame_len: 0,
        })
    }

    fn out(&mut self) -> Result<&mut BufWriter<File>> {
        let path = self.path.clone();
        self.out.as_mut().ok_or(Error::FrameStore {
            path,
            reason: "writer already finished".into(),
        })
    }
}

pub fn write_header<W: Write>(w: &mut W, h: &FrameHeader) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&h.points_per_axis.to_le_bytes())?;
    w.write_all(&h.x_min.to_le_bytes())?;
    w.write_all(&h.x_max.to_le_bytes())?;
    w.write_all(&h.frame_count.to_le_bytes())?;
    w.write_all(&h.frame_dt.to_le_bytes())?;
    w.write_all(&[h.symmetry.as_u8()])?;
    Ok(())
}

impl FrameSink for FrameWriter {
    fn begin(&mut self, header: &FrameHeader) -> Result<()> {
        self.frame_len = header.frame_len();
        let h = FrameHeader {
            frame_count: 0,
            ..*header
        };
        write_header(self.out()?, &h)
    }

    fn push(&mut self, psi: &[Complex64]) -> Result<()> {
        if psi.len() != self.frame_len {
            return Err(Error::FrameStore {
                path: self.path.clone(),
                reason: format!("frame of {} values, expected {}", psi.len(), self.frame_len),
            });
        }
        let mut bytes = Vec::with_capacity(psi.len() * 16);
        for z in psi {
            bytes.extend_from_slice(&z.re.to_le_bytes());
            bytes.extend_from_slice(&z.im.to_le_bytes());
        }
        self.out()?.write_all(&bytes)?;
        self.written += 1;
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        let Some(out) = self.out.take() else {
            return Ok(());
        };
        let mut file = out.into_inner().map_err(|e| e.into_error())?;
        file.seek(SeekFrom::Start(FRAME_COUNT_OFFSET))?;
        file.write_all(&self.written.to_le_bytes())?;
        file.sync_all()?;
        Ok(())
    }
}

/// Streaming reader for QHWF files.
pub struct FrameReader {
    path: PathBuf,
    header: FrameHeader,
    input: BufReader<File>,
    read: u32,
    bytes: Vec<u8>,
}

fn bad(path: &Path, reason: impl Into<String>) -> Error {
    Error::FrameStore {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

impl FrameReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::open(&path)?;
        let file_len = file.metadata()?.len();
        let mut input = BufReader::with_capacity(1 << 20, file);
        let mut head = [0u8; HEADER_LEN as usize];
        input
            .read_exact(&mut head)
            .map_err(|_| bad(&path, "truncated header"))?;
        if &head[0..4] != MAGIC {
            return Err(bad(&path, "bad magic, not a QHWF frame store"));
        }
        let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
        let version = u32_at(4);
        if version != VERSION {
            return Err(bad(&path, format!("unsupported version {version}")));
        }
        let symmetry =
            Symmetry::from_u8(head[40]).ok_or_else(|| bad(&path, "unknown symmetry tag"))?;
        let header = FrameHeader {
            points_per_axis: u32_at(8),
            x_min: f64_at(12),
            x_max: f64_at(20),
            frame_count: u32_at(28),
            frame_dt: f64_at(32),
            symmetry,
        };
        if header.points_per_axis == 0 || !(header.x_max > header.x_min) {
            return Err(bad(&path, "degenerate grid in header"));
        }
        let expected = HEADER_LEN + header.frame_count as u64 * header.frame_len() as u64 * 16;
        if file_len != expected {
            return Err(bad(
                &path,
                format!("file is {file_len} bytes, header implies {expected}"),
            ));
        }
        Ok(Self {
            bytes: vec![0u8; header.frame_len() * 16],
            path,
            header,
            input,
            read: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Positions the stream so the next read returns frame `k`.
    pub fn seek_frame(&mut self, k: u32) -> Result<()> {
        if k > self.header.frame_count {
            return Err(bad(
                &self.path,
                format!("frame {k} is past the end ({})", self.header.frame_count),
            ));
        }
        let offset = HEADER_LEN + k as u64 * self.bytes.len() as u64;
        self.input.seek(SeekFrom::Start(offset))?;
        self.read = k;
        Ok(())
    }

    /// Reads frame `k` as a state; sequential reading resumes after it.
    pub fn read_state(&mut self, k: u32) -> Result<Wavefunction2D> {
        self.seek_frame(k)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.header.frame_len()];
        if !self.next_frame(&mut amps)? {
            return Err(bad(&self.path, format!("frame {k} is past the end")));
        }
        self.header.state(k as usize, amps)
    }
}

impl FrameSource for FrameReader {
    fn header(&self) -> &FrameHeader {
        &self.header
    }

    fn next_frame(&mut self, out: &mut [Complex64]) -> Result<bool> {
        if self.read >= self.header.frame_count {
            return Ok(false);
        }
        self.input
            .read_exact(&mut self.bytes)
            .map_err(|_| bad(&self.path, "truncated frame data"))?;
        for (z, chunk) in out.iter_mut().zip(self.bytes.chunks_exact(16)) {
            z.re = f64::from_le_bytes(chunk[0..8].try_into().unwrap());
            z.im = f64::from_le_bytes(chunk[8..16].try_into().unwrap());
        }
        self.read += 1;
        Ok(true)
    }
}
