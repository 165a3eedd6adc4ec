//! MBT tensor files and binary PGM masks.
//!
//! MBT layout, little-endian throughout:
//!
//! ```text
//! "MBT1" | version: u8 = 1 | dtype: u8 = 0 (f32) | ndim: u8 (1..=4) | reserved: u8 = 0
//! ndim x u64 extents
//! row-major f32 payload
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{BinaryMask, Tensor, MAX_RANK};

pub const MBT_MAGIC: [u8; 4] = *b"MBT1";
pub const MBT_VERSION: u8 = 1;
pub const MBT_DTYPE_F32: u8 = 0;
const FIXED_HEADER: usize = 8;

pub fn write_tensor(t: &Tensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(FIXED_HEADER + 8 * t.rank() + 4 * t.numel());
    out.extend_from_slice(&MBT_MAGIC);
    out.push(MBT_VERSION);
    out.push(MBT_DTYPE_F32);
    out.push(t.rank() as u8);
    out.push(0);
    for &d in t.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn read_tensor(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: FIXED_HEADER,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MBT_MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < FIXED_HEADER {
        return Err(Error::Truncated {
            expected: FIXED_HEADER,
            found: bytes.len(),
        });
    }
    let (version, dtype, ndim, reserved) = (bytes[4], bytes[5], bytes[6] as usize, bytes[7]);
    if version != MBT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    if dtype != MBT_DTYPE_F32 {
        return Err(Error::UnsupportedDtype(dtype));
    }
    if ndim == 0 || ndim > MAX_RANK {
        return Err(Error::BadHeader(format!("ndim {ndim} outside 1..=4")));
    }
    if reserved != 0 {
        return Err(Error::BadHeader(format!("reserved byte is {reserved}")));
    }
    let header = FIXED_HEADER + 8 * ndim;
    if bytes.len() < header {
        return Err(Error::Truncated {
            expected: header,
            found: bytes.len(),
        });
    }
    let mut shape = Vec::with_capacity(ndim);
    let mut numel: usize = 1;
    for i in 0..ndim {
        let at = FIXED_HEADER + 8 * i;
        let d = u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let d = usize::try_from(d)
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| Error::BadHeader(format!("extent {d} on axis {i}")))?;
        numel = numel
            .checked_mul(d)
            .ok_or_else(|| Error::BadHeader("element count overflows".into()))?;
        shape.push(d);
    }
    let payload = numel
        .checked_mul(4)
        .ok_or_else(|| Error::BadHeader("payload size overflows".into()))?;
    let found = bytes.len() - header;
    if found < payload {
        return Err(Error::Truncated {
            expected: payload,
            found,
        });
    }
    if found > payload {
        return Err(Error::TrailingBytes(found - payload));
    }
    let data = bytes[header..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Tensor::new(shape, data)
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_tensor(&bytes)
}

pub fn save_tensor(path: impl AsRef<Path>, t: &Tensor) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_tensor(t)).map_err(|e| Error::io(path, e))
}

/// Decodes a binary ("P5") PGM with maxval 255; pixels above 127 are anomalous.
pub fn read_mask_pgm(bytes: &[u8]) -> Result<BinaryMask> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(Error::BadPgm(format!(
            "magic {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = parse_number(next_token(bytes, &mut pos)?)?;
    let height = parse_number(next_token(bytes, &mut pos)?)?;
    let maxval = parse_number(next_token(bytes, &mut pos)?)?;
    if maxval != 255 {
        return Err(Error::BadPgm(format!("maxval {maxval}, expected 255")));
    }
    if width == 0 || height == 0 {
        return Err(Error::BadPgm(format!("zero extent {width}x{height}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::BadPgm("missing raster separator".into()));
    }
    pos += 1;
    let raster = &bytes[pos..];
    let expected = width * height;
    if raster.len() != expected {
        return Err(Error::PgmSize {
            expected,
            found: raster.len(),
        });
    }
    let bits = raster.iter().map(|&p| (p > 127) as u8).collect();
    BinaryMask::new(height, width, bits)
}

pub fn write_mask_pgm(m: &BinaryMask) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", m.width(), m.height()).into_bytes();
    out.extend(m.bits().iter().map(|&b| if b == 1 { 255u8 } else { 0 }));
    out
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    read_mask_pgm(&bytes)
}

pub fn save_mask(path: impl AsRef<Path>, m: &BinaryMask) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_mask_pgm(m)).map_err(|e| Error::io(path, e))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::BadPgm("header ended early".into()));
    }
    Ok(&bytes[start..*pos])
}

fn parse_number(tok: &[u8]) -> Result<usize> {
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::BadPgm(format!("bad number {:?}", String::from_utf8_lossy(tok))))
}
