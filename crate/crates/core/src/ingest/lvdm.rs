use crate::error::{Error, Result};
use crate::geometry::{DepthConvention, DepthMap};

pub const LVDM_MAGIC: &[u8; 4] = b"LVDM";
const HEADER: usize = 12;

/// Raw depth container: `"LVDM"`, u32 W, u32 H, then W·H little-endian f32.
pub fn encode_lvdm(depth: &DepthMap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER + depth.values().len() * 4);
    out.extend_from_slice(LVDM_MAGIC);
    out.extend_from_slice(&depth.width().to_le_bytes());
    out.extend_from_slice(&depth.height().to_le_bytes());
    for v in depth.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Values are clamped into `[0, 1]`; NaN is rejected.
pub fn decode_lvdm(bytes: &[u8], convention: DepthConvention) -> Result<DepthMap> {
    if bytes.len() < HEADER {
        return Err(Error::parse("header", format!("{} bytes is shorter than the LVDM header", bytes.len())));
    }
    if &bytes[..4] != LVDM_MAGIC {
        return Err(Error::parse("magic", format!("expected \"LVDM\", found {:?}", &bytes[..4])));
    }
    let w = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes"));
    let h = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    let n = (w as usize)
        .checked_mul(h as usize)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::parse("dimensions", format!("{w}x{h} overflows")))?;
    let payload = &bytes[HEADER..];
    if payload.len() < n {
        return Err(Error::Truncated { expected: n, actual: payload.len() });
    }
    if payload.len() > n {
        return Err(Error::parse("payload", format!("{} trailing bytes", payload.len() - n)));
    }
    let mut values = Vec::with_capacity(n / 4);
    for (i, b) in payload.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(b.try_into().expect("4 bytes"));
        if v.is_nan() {
            return Err(Error::parse("values", format!("NaN at ({}, {})", i % w as usize, i / w as usize)));
        }
        values.push(v.clamp(0.0, 1.0));
    }
    DepthMap::new(w, h, values, convention)
}
