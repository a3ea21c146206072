//! Binary containers for tensors, sampling masks and transform matrices.
//!
//! All integers and floats are little-endian 64-bit.
//!
//! ```text
//! TensorFile  "TNS1" | flags u8 (bit0 complex, bit1 real hint) | n1 n2 n3 | payload
//! MaskFile    "MSK1" | n1 n2 n3 | count | count x (i, j, k)
//! MatrixFile  TensorFile with dims (N3, n3, 1)
//! ```
//!
//! The payload follows the tensor layout; complex payloads interleave
//! `(re, im)`. A tensor is written as real only when every imaginary part is
//! `+0.0`, so round trips are bit-exact either way.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::c64;
use crate::solver::SamplingMask;
use crate::tensor::Tensor3;
use crate::transform::LinearTransform;

const TENSOR_MAGIC: &[u8; 4] = b"TNS1";
const MASK_MAGIC: &[u8; 4] = b"MSK1";
const FLAG_COMPLEX: u8 = 1;
const FLAG_REAL_HINT: u8 = 2;
const TENSOR_HEADER: u64 = 4 + 1 + 24;
const MASK_HEADER: u64 = 4 + 24 + 8;

struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn format(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: offset as u64,
            msg: msg.into(),
        }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(self.format(self.pos, format!("file ends inside {what}")));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        let b = self.take(8, what)?;
        Ok(u64::from_le_bytes(b.try_into().expect("eight bytes")))
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<()> {
        let got = self.take(4, "magic")?;
        if got != want {
            return Err(self.format(0, format!("bad magic {got:?}, expected {:?}", std::str::from_utf8(want).unwrap())));
        }
        Ok(())
    }

    fn dims(&mut self) -> Result<[usize; 3]> {
        let start = self.pos;
        let mut dims = [0usize; 3];
        for d in &mut dims {
            let v = self.u64("dims")?;
            *d = usize::try_from(v).map_err(|_| self.format(start, format!("dimension {v} does not fit in memory")))?;
        }
        if dims.iter().any(|&d| d == 0) {
            return Err(self.format(start, format!("zero dimension in {dims:?}")));
        }
        Ok(dims)
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    w.write_all(bytes).map_err(io)?;
    w.flush().map_err(io)
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_dims(out: &mut Vec<u8>, dims: [usize; 3]) {
    for d in dims {
        put_u64(out, d as u64);
    }
}

/// Serialises a tensor into the TensorFile layout.
pub fn encode_tensor(t: &Tensor3) -> Vec<u8> {
    let complex = t.data().iter().any(|z| z.im.to_bits() != 0);
    let width = if complex { 16 } else { 8 };
    let mut out = Vec::with_capacity(TENSOR_HEADER as usize + t.len() * width);
    out.extend_from_slice(TENSOR_MAGIC);
    let mut flags = 0;
    if complex {
        flags |= FLAG_COMPLEX;
    }
    if t.real_hint() {
        flags |= FLAG_REAL_HINT;
    }
    out.push(flags);
    put_dims(&mut out, t.dims());
    for z in t.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        if complex {
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

/// Parses a TensorFile image; `path` is only used in diagnostics.
pub fn decode_tensor(path: &Path, bytes: &[u8]) -> Result<Tensor3> {
    let mut r = Reader { path, bytes, pos: 0 };
    r.magic(TENSOR_MAGIC)?;
    let flags = r.take(1, "flags")?[0];
    if flags & !(FLAG_COMPLEX | FLAG_REAL_HINT) != 0 {
        return Err(r.format(4, format!("unknown flag bits {flags:#04x}")));
    }
    let complex = flags & FLAG_COMPLEX != 0;
    let dims = r.dims()?;
    let expected = dims
        .iter()
        .try_fold(if complex { 16u64 } else { 8 }, |acc, &d| acc.checked_mul(d as u64))
        .ok_or_else(|| r.format(5, format!("dims {dims:?} overflow the payload size")))?;
    let actual = (bytes.len() - r.pos) as u64;
    if actual < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: TENSOR_HEADER + expected,
            actual: bytes.len() as u64,
        });
    }
    if actual > expected {
        return Err(r.format(r.pos + expected as usize, "trailing bytes after payload"));
    }
    let payload = &bytes[r.pos..];
    let f = |c: &[u8]| f64::from_le_bytes(c.try_into().expect("eight bytes"));
    let data: Vec<c64> = if complex {
        payload.chunks_exact(16).map(|c| c64::new(f(&c[..8]), f(&c[8..]))).collect()
    } else {
        payload.chunks_exact(8).map(|c| c64::new(f(c), 0.0)).collect()
    };
    let header = r.pos;
    let t = Tensor3::new(dims, data).map_err(|e| r.format(header, e.to_string()))?;
    t.with_real_hint(flags & FLAG_REAL_HINT != 0)
        .map_err(|e| r.format(4, e.to_string()))
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    write_file(path.as_ref(), &encode_tensor(t))
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    let path = path.as_ref();
    decode_tensor(path, &read_file(path)?)
}

pub fn encode_mask(mask: &SamplingMask) -> Vec<u8> {
    let mut out = Vec::with_capacity(MASK_HEADER as usize + 24 * mask.len());
    out.extend_from_slice(MASK_MAGIC);
    put_dims(&mut out, mask.dims());
    put_u64(&mut out, mask.len() as u64);
    for idx in mask.observed() {
        for &v in idx {
            put_u64(&mut out, v as u64);
        }
    }
    out
}

pub fn decode_mask(path: &Path, bytes: &[u8]) -> Result<SamplingMask> {
    let mut r = Reader { path, bytes, pos: 0 };
    r.magic(MASK_MAGIC)?;
    let dims = r.dims()?;
    let count = r.u64("count")?;
    let expected = count
        .checked_mul(24)
        .and_then(|p| p.checked_add(MASK_HEADER))
        .ok_or_else(|| r.format(28, format!("count {count} overflows the file size")))?;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected,
            actual,
        });
    }
    if actual > expected {
        return Err(r.format(expected as usize, "trailing bytes after indices"));
    }
    let mut indices: Vec<[usize; 3]> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let at = r.pos;
        let mut idx = [0usize; 3];
        for (a, v) in idx.iter_mut().enumerate() {
            let raw = r.u64("index")?;
            if raw >= dims[a] as u64 {
                return Err(r.format(at, format!("index component {raw} out of range for dims {dims:?}")));
            }
            *v = raw as usize;
        }
        if let Some(prev) = indices.last() {
            if *prev >= idx {
                return Err(r.format(at, format!("index {idx:?} not strictly after {prev:?}")));
            }
        }
        indices.push(idx);
    }
    SamplingMask::from_indices(dims, indices)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &SamplingMask) -> Result<()> {
    write_file(path.as_ref(), &encode_mask(mask))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<SamplingMask> {
    let path = path.as_ref();
    decode_mask(path, &read_file(path)?)
}

/// Stores an `N3 x n3` matrix as a `(N3, n3, 1)` tensor.
pub fn write_matrix(path: impl AsRef<Path>, m: faer::MatRef<'_, c64>) -> Result<()> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let t = Tensor3::from_fn([rows, cols, 1], |i, j, _| m[(i, j)])?;
    write_tensor(path, &t)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Mat<c64>> {
    let path = path.as_ref();
    let t = read_tensor(path)?;
    let [rows, cols, slices] = t.dims();
    if slices != 1 {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 21,
            msg: format!("matrix file needs n3 = 1, found dims {:?}", t.dims()),
        });
    }
    Ok(Mat::from_fn(rows, cols, |i, j| t[(i, j, 0)]))
}

pub fn write_transform(path: impl AsRef<Path>, t: &LinearTransform) -> Result<()> {
    write_matrix(path, t.matrix())
}

/// Reads a matrix file and validates it as a transform, named after the file
/// stem.
pub fn read_transform(path: impl AsRef<Path>) -> Result<LinearTransform> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| PathBuf::from(path).display().to_string());
    LinearTransform::from_matrix(name, read_matrix(path)?)
}
