//! Spectrum exports.
//!
//! Eigenvector file layout (little endian):
//!
//! ```text
//! offset 0   magic   b"SPEV"
//! offset 4   u32     format version (1)
//! offset 8   u32     rows  (vector length)
//! offset 12  u32     cols  (number of vectors)
//! offset 16  f64 × rows·cols, column-major
//! ```

use std::io::{Read, Write};

use super::Spectrum;
use crate::error::{Error, Result};

pub const EIGVEC_MAGIC: [u8; 4] = *b"SPEV";
pub const EIGVEC_VERSION: u32 = 1;

/// `index,eigenvalue` with 17 significant digits.
pub fn write_spectrum_csv<W: Write>(spec: &Spectrum, mut w: W) -> Result<()> {
    writeln!(w, "index,eigenvalue")?;
    for (k, e) in spec.eigenvalues.iter().enumerate() {
        writeln!(w, "{k},{e:.16e}")?;
    }
    Ok(())
}

pub fn write_eigenvectors_bin<W: Write>(spec: &Spectrum, mut w: W) -> Result<()> {
    let rows = spec.eigenvectors.first().map_or(0, |p| p.1.len());
    let cols = spec.eigenvectors.len();
    let to_u32 = |x: usize| {
        u32::try_from(x).map_err(|_| Error::Shape(format!("dimension {x} exceeds u32")))
    };
    w.write_all(&EIGVEC_MAGIC)?;
    w.write_all(&EIGVEC_VERSION.to_le_bytes())?;
    w.write_all(&to_u32(rows)?.to_le_bytes())?;
    w.write_all(&to_u32(cols)?.to_le_bytes())?;
    for (_, v) in &spec.eigenvectors {
        if v.len() != rows {
            return Err(Error::Shape("ragged eigenvector set".into()));
        }
        for x in v {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Columns of an eigenvector file.
pub fn read_eigenvectors_bin<R: Read>(mut r: R) -> Result<Vec<Vec<f64>>> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if header[..4] != EIGVEC_MAGIC {
        return Err(Error::Shape("bad eigenvector file magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(header[k..k + 4].try_into().expect("4 bytes"));
    if word(4) != EIGVEC_VERSION {
        return Err(Error::Shape(format!("unsupported eigenvector file version {}", word(4))));
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let mut buf = [0u8; 8];
    (0..cols)
        .map(|_| {
            (0..rows)
                .map(|_| {
                    r.read_exact(&mut buf)?;
                    Ok(f64::from_le_bytes(buf))
                })
                .collect()
        })
        .collect()
}
