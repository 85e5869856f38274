//! `DMX1` dense matrix files.
//!
//! Layout, all little endian:
//!
//! ```text
//! b"DMX1" | rows: u64 | cols: u64 | rows*cols f64, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use dihs_core::DenseMatrix;

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DMX1";

pub fn write_to<W: Write>(mut w: W, m: &DenseMatrix) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(m.rows() as u64).to_le_bytes())?;
    w.write_all(&(m.cols() as u64).to_le_bytes())?;
    for v in m.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_from<R: Read>(mut r: R) -> Result<DenseMatrix> {
    let mut magic = [0u8; 4];
    read_exact(&mut r, &mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected DMX1")));
    }
    let mut word = [0u8; 8];
    read_exact(&mut r, &mut word)?;
    let rows = u64::from_le_bytes(word);
    read_exact(&mut r, &mut word)?;
    let cols = u64::from_le_bytes(word);
    let len = rows
        .checked_mul(cols)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::Format(format!("matrix {rows}x{cols} is too large")))?;
    let mut data = Vec::with_capacity(len.min(1 << 24));
    for _ in 0..len {
        read_exact(&mut r, &mut word)?;
        data.push(f64::from_le_bytes(word));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing).map_err(|e| Error::Format(e.to_string()))? != 0 {
        return Err(Error::Format("trailing bytes after matrix payload".into()));
    }
    Ok(DenseMatrix::new(rows as usize, cols as usize, data)?)
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Format(format!("truncated DMX1 file: {e}")))
}

pub fn write(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_to(BufWriter::new(file), m).map_err(|e| Error::io(path, e))
}

pub fn read(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_from(BufReader::new(file)).map_err(|e| e.context(path.display().to_string()))
}
