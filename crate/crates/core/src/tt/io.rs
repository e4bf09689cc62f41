//! Binary container for tensor-train operators.
//!
//! Layout (all integers and floats little-endian):
//!
//! | field            | type        |
//! |------------------|-------------|
//! | magic            | `b"TTOP"`   |
//! | version          | `u32` (= 1) |
//! | length `L`       | `u64`       |
//! | physical dim `d` | `u64`       |
//!
//! followed by `L` core records, each holding its shape as four `u64`
//! (left bond, right bond, row, column) and then `left·right·d·d` complex values
//! in row-major order over that shape, each written as real part then imaginary
//! part (`f64`).

use super::{Core, TensorTrainOperator};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use num_complex::Complex64;
use std::io::{Read, Write};

pub const MAGIC: &[u8; 4] = b"TTOP";
pub const VERSION: u32 = 1;

/// Upper bound on any single stored dimension; guards allocation on corrupt input.
const MAX_DIM: u64 = 1 << 20;

impl<T: Scalar> TensorTrainOperator<T> {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.phys as u64).to_le_bytes())?;
        for core in &self.cores {
            for dim in [core.left, core.right, core.phys, core.phys] {
                w.write_all(&(dim as u64).to_le_bytes())?;
            }
            for l in 0..core.left {
                for r in 0..core.right {
                    for i in 0..core.phys {
                        for j in 0..core.phys {
                            let z = core.get(l, i, j, r).to_c64();
                            w.write_all(&z.re.to_le_bytes())?;
                            w.write_all(&z.im.to_le_bytes())?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Reads a container; fails with [`Error::Format`] on bad magic, version or
    /// shapes, and when complex entries do not fit the requested scalar type.
    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let len = read_dim(&mut r)?;
        let phys = read_dim(&mut r)?;
        if len == 0 {
            return Err(Error::Format("empty chain".into()));
        }
        let mut cores = Vec::with_capacity(len);
        for k in 0..len {
            let left = read_dim(&mut r)?;
            let right = read_dim(&mut r)?;
            let rows = read_dim(&mut r)?;
            let cols = read_dim(&mut r)?;
            if rows != phys || cols != phys {
                return Err(Error::Format(format!(
                    "core {k} has physical shape {rows}x{cols}, header says {phys}"
                )));
            }
            let mut core = Core::zeros(left, phys, right);
            for l in 0..left {
                for rr in 0..right {
                    for i in 0..phys {
                        for j in 0..phys {
                            let re = read_f64(&mut r)?;
                            let im = read_f64(&mut r)?;
                            let v = T::from_c64(Complex64::new(re, im))
                                .ok_or_else(|| Error::Format("complex entry in a real container".into()))?;
                            let idx = core.index(l, i, j, rr);
                            core.data[idx] = v;
                        }
                    }
                }
            }
            cores.push(core);
        }
        Self::new(cores).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_dim<R: Read>(r: &mut R) -> Result<usize> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    let v = u64::from_le_bytes(buf);
    if v == 0 || v > MAX_DIM {
        return Err(Error::Format(format!("implausible dimension {v}")));
    }
    Ok(v as usize)
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn header_layout() {
        let id = TensorTrainOperator::<f64>::identity(2, 2).unwrap();
        let mut buf = Vec::new();
        id.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"TTOP");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 2);
        assert_eq!(u64::from_le_bytes(buf[16..24].try_into().unwrap()), 2);
        // 24 header + per core (4*8 shape + 4 complex * 16)
        assert_eq!(buf.len(), 24 + 2 * (32 + 64));
        // entry (0,0,0,1) of the first core is the off-diagonal zero: third f64 pair
        let first_vals = &buf[24 + 32..];
        assert_eq!(f64::from_le_bytes(first_vals[0..8].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(first_vals[16..24].try_into().unwrap()), 0.0);
    }

    #[test]
    fn row_major_order_over_shape() {
        // σ_x: row-major values are 0, 1, 1, 0
        let x = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        let op = TensorTrainOperator::product(&[x]).unwrap();
        let mut buf = Vec::new();
        op.write_to(&mut buf).unwrap();
        let vals: Vec<f64> = buf[24 + 32..]
            .chunks(16)
            .map(|c| f64::from_le_bytes(c[..8].try_into().unwrap()))
            .collect();
        assert_eq!(vals, vec![0.0, 1.0, 2.0, 0.0]);
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let id = TensorTrainOperator::<f64>::identity(3, 2).unwrap();
        let mut buf = Vec::new();
        id.write_to(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(
            TensorTrainOperator::<f64>::read_from(&buf[..]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn truncated_stream_is_an_error() {
        let id = TensorTrainOperator::<f64>::identity(3, 2).unwrap();
        let mut buf = Vec::new();
        id.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(TensorTrainOperator::<f64>::read_from(&buf[..]).is_err());
    }

    #[test]
    fn complex_into_real_is_rejected() {
        let y = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let op = TensorTrainOperator::product(&[y]).unwrap();
        let mut buf = Vec::new();
        op.write_to(&mut buf).unwrap();
        assert!(TensorTrainOperator::<f64>::read_from(&buf[..]).is_err());
        let back = TensorTrainOperator::<Complex64>::read_from(&buf[..]).unwrap();
        assert_eq!(back, op);
    }
}
