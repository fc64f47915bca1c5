//! ZDF1 binary layout: magic `ZDF1`, then little-endian `u32 d`, `d` pairs
//! `(i64 lo_j, i64 hi_j)`, then row-major `(f64 re, f64 im)` values.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use super::{Field, GridBox};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ZDF1";

pub fn encode(x: &Field) -> Vec<u8> {
    let g = x.grid();
    let mut out = Vec::with_capacity(8 + 16 * g.dim() + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    for j in 0..g.dim() {
        out.extend_from_slice(&g.lo()[j].to_le_bytes());
        out.extend_from_slice(&g.hi()[j].to_le_bytes());
    }
    for v in x.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.bytes.len() {
            return Err(Error::Format(format!("truncated ZDF1 data at byte {}", self.pos)));
        }
        let mut b = [0u8; N];
        b.copy_from_slice(&self.bytes[self.pos..end]);
        self.pos = end;
        Ok(b)
    }
}

pub fn decode(bytes: &[u8]) -> Result<Field> {
    let mut c = Cursor { bytes, pos: 0 };
    if &c.take::<4>()? != MAGIC {
        return Err(Error::Format("missing ZDF1 magic".into()));
    }
    let d = u32::from_le_bytes(c.take()?) as usize;
    if d == 0 {
        return Err(Error::Format("ZDF1 dimension must be positive".into()));
    }
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for _ in 0..d {
        lo.push(i64::from_le_bytes(c.take()?));
        hi.push(i64::from_le_bytes(c.take()?));
    }
    let g = GridBox::new(lo, hi).map_err(|e| Error::Format(e.to_string()))?;
    let expected = 8 + 16 * d + 16 * g.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!("ZDF1 payload is {} bytes, box {g} needs {expected}", bytes.len())));
    }
    let mut data = Vec::with_capacity(g.len());
    for _ in 0..g.len() {
        let re = f64::from_le_bytes(c.take()?);
        let im = f64::from_le_bytes(c.take()?);
        data.push(Complex64::new(re, im));
    }
    Field::from_vec(g, data)
}

pub fn write(x: &Field, mut w: impl Write) -> Result<()> {
    w.write_all(&encode(x))?;
    Ok(())
}

pub fn read(mut r: impl Read) -> Result<Field> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    decode(&buf)
}

pub fn save(x: &Field, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, encode(x))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Field> {
    decode(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_bytes() {
        let g = GridBox::new(vec![-1], vec![0]).unwrap();
        let x = Field::from_vec(g, vec![Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.0)]).unwrap();
        let mut expect = b"ZDF1".to_vec();
        expect.extend_from_slice(&[1, 0, 0, 0]);
        expect.extend_from_slice(&[0xff; 8]);
        expect.extend_from_slice(&[0; 8]);
        expect.extend_from_slice(&[0, 0, 0, 0, 0, 0, 0xf0, 0x3f]);
        expect.extend_from_slice(&[0, 0, 0, 0, 0, 0, 0, 0xc0]);
        expect.extend_from_slice(&[0, 0, 0, 0, 0, 0, 0xe0, 0x3f]);
        expect.extend_from_slice(&[0; 8]);
        assert_eq!(encode(&x), expect);
        assert_eq!(decode(&expect).unwrap(), x);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode(b"ZDF2\x01\x00\x00\x00").is_err());
        let x = Field::zeros(GridBox::centered(2, 1));
        let mut b = encode(&x);
        b.pop();
        assert!(matches!(decode(&b), Err(Error::Format(_))));
    }
}
