//! The `LVTC` container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "LVTC"
//! 4       2     version (u16 LE) = 1
//! 6       2     flags (u16 LE) = 0
//! 8       16    L, C, H, W (u32 LE each)
//! 24      4     metadata length N (u32 LE)
//! 28      N     metadata, UTF-8 JSON
//! 28+N    4·LCHW  f32 LE, (frame, channel, row, column) order
//! ```

use std::io::Write;

use super::tensor::{ControlTensor, TensorMetadata};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LVTC";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 28;

pub fn write_tensor<W: Write>(t: &ControlTensor, mut out: W) -> Result<()> {
    let meta = serde_json::to_vec(t.metadata()).map_err(|e| Error::parse("metadata", e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&0u16.to_le_bytes())?;
    for d in t.shape() {
        out.write_all(&d.to_le_bytes())?;
    }
    out.write_all(&(meta.len() as u32).to_le_bytes())?;
    out.write_all(&meta)?;
    let mut buf = Vec::with_capacity(t.data().len() * 4);
    for v in t.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn serialize(t: &ControlTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 256 + t.data().len() * 4);
    write_tensor(t, &mut out).expect("writing to a Vec cannot fail");
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let avail = self.bytes.len() - self.pos;
        if avail < n {
            return Err(Error::parse(
                field,
                format!("truncated: expected {n} bytes at offset {}, got {avail}", self.pos),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self, field: &str) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2, field)?.try_into().unwrap()))
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, field)?.try_into().unwrap()))
    }
}

pub fn deserialize(bytes: &[u8]) -> Result<ControlTensor> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(Error::parse("magic", format!("expected \"LVTC\", got {magic:?}")));
    }
    let version = cur.u16("version")?;
    if version != VERSION {
        return Err(Error::parse("version", format!("unsupported version {version}, expected {VERSION}")));
    }
    let flags = cur.u16("flags")?;
    if flags != 0 {
        return Err(Error::parse("flags", format!("unknown flags {flags:#06x}")));
    }
    let mut shape = [0u32; 4];
    for (d, name) in shape.iter_mut().zip(["L", "C", "H", "W"]) {
        *d = cur.u32(name)?;
    }
    let meta_len = cur.u32("metadata_length")? as usize;
    let meta_bytes = cur.take(meta_len, "metadata")?;
    let metadata: TensorMetadata =
        serde_json::from_slice(meta_bytes).map_err(|e| Error::parse("metadata", e.to_string()))?;

    let count = shape
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::parse("shape", format!("{shape:?} overflows")))?;
    let payload = &bytes[cur.pos..];
    if payload.len() < count {
        return Err(Error::Truncated { expected: count, actual: payload.len() });
    }
    if payload.len() > count {
        return Err(Error::parse("payload", format!("{} trailing bytes", payload.len() - count)));
    }
    let data: Vec<f32> = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::parse("payload", format!("non-finite value at index {i}")));
    }
    ControlTensor::new(shape, data, metadata)
}
