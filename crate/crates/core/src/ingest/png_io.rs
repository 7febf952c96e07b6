use std::io::Cursor;

use png::{BitDepth, ColorType, Transformations};

use crate::error::{Error, Result};
use crate::geometry::{DepthConvention, DepthMap, InstanceMaskFrame};

pub(crate) const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];

/// 8-bit RGB image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    pub width: u32,
    pub height: u32,
    pub data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, data: Vec<u8>) -> Result<Self> {
        if data.len() != width as usize * height as usize * 3 {
            return Err(Error::validation(
                "image",
                format!("{} bytes for {width}x{height} RGB", data.len()),
            ));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        Self { width, height, data: rgb.repeat(width as usize * height as usize) }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 3] {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn put(&mut self, x: u32, y: u32, rgb: [u8; 3]) {
        let i = (y as usize * self.width as usize + x as usize) * 3;
        self.data[i..i + 3].copy_from_slice(&rgb);
    }
}

fn png_err(e: impl std::fmt::Display) -> Error {
    Error::parse("png", e.to_string())
}

struct Decoded {
    width: u32,
    height: u32,
    color: ColorType,
    depth: BitDepth,
    line: usize,
    data: Vec<u8>,
}

fn decode(bytes: &[u8], transform: Transformations) -> Result<(Decoded, Option<Vec<u8>>)> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(transform);
    let mut reader = decoder.read_info().map_err(png_err)?;
    let palette = reader.info().palette.as_ref().map(|p| p.to_vec());
    let size = reader.output_buffer_size().ok_or_else(|| png_err("image too large"))?;
    let mut data = vec![0; size];
    let info = reader.next_frame(&mut data).map_err(png_err)?;
    data.truncate(info.buffer_size());
    Ok((
        Decoded {
            width: info.width,
            height: info.height,
            color: info.color_type,
            depth: info.bit_depth,
            line: info.line_size,
            data,
        },
        palette,
    ))
}

/// Indexed-color PNG whose palette indices are instance ids.
pub fn decode_mask_png(bytes: &[u8], frame_index: usize) -> Result<InstanceMaskFrame> {
    let (img, _) = decode(bytes, Transformations::IDENTITY)?;
    if img.color != ColorType::Indexed {
        return Err(Error::parse("png", format!("not an indexed-color PNG ({:?})", img.color)));
    }
    let bits = img.depth as usize;
    let per_byte = 8 / bits;
    let mask = ((1u16 << bits) - 1) as u8;
    let mut labels = Vec::with_capacity(img.width as usize * img.height as usize);
    for row in img.data.chunks_exact(img.line).take(img.height as usize) {
        for x in 0..img.width as usize {
            let byte = row[x / per_byte];
            let shift = 8 - bits * (x % per_byte + 1);
            labels.push(((byte >> shift) & mask) as u32);
        }
    }
    InstanceMaskFrame::new(img.width, img.height, labels, frame_index)
}

/// The usual VOS benchmark colormap: id bits spread over the RGB channels.
pub fn vos_palette() -> Vec<u8> {
    let mut pal = Vec::with_capacity(256 * 3);
    for i in 0..256u32 {
        let (mut r, mut g, mut b) = (0u8, 0u8, 0u8);
        let mut c = i;
        for j in 0..8 {
            r |= ((c & 1) as u8) << (7 - j);
            g |= (((c >> 1) & 1) as u8) << (7 - j);
            b |= (((c >> 2) & 1) as u8) << (7 - j);
            c >>= 3;
        }
        pal.extend([r, g, b]);
    }
    pal
}

pub fn encode_mask_png(mask: &InstanceMaskFrame) -> Result<Vec<u8>> {
    if let Some(&id) = mask.labels().iter().find(|&&id| id > 255) {
        return Err(Error::validation("mask", format!("instance id {id} does not fit an 8-bit palette")));
    }
    let data: Vec<u8> = mask.labels().iter().map(|&id| id as u8).collect();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, mask.width(), mask.height());
        enc.set_color(ColorType::Indexed);
        enc.set_depth(BitDepth::Eight);
        enc.set_palette(vos_palette());
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&data).map_err(png_err)?;
        w.finish().map_err(png_err)?;
    }
    Ok(out)
}

/// Grayscale PNG depth: value / max → d, so white is nearest.
pub fn decode_depth_png(bytes: &[u8], convention: DepthConvention) -> Result<DepthMap> {
    let (img, _) = decode(bytes, Transformations::IDENTITY)?;
    if img.color != ColorType::Grayscale {
        return Err(Error::parse("png", format!("depth PNG must be grayscale, got {:?}", img.color)));
    }
    let (w, h) = (img.width as usize, img.height as usize);
    let rows = img.data.chunks_exact(img.line).take(h);
    let values: Vec<f32> = match img.depth {
        BitDepth::Sixteen => rows
            .flat_map(|r| r[..2 * w].chunks_exact(2).map(|b| u16::from_be_bytes([b[0], b[1]]) as f32 / 65535.0))
            .collect(),
        BitDepth::Eight => rows.flat_map(|r| r[..w].iter().map(|&v| v as f32 / 255.0)).collect(),
        other => return Err(Error::parse("png", format!("unsupported depth bit depth {other:?}"))),
    };
    DepthMap::new(img.width, img.height, values, convention)
}

pub fn encode_depth_png(depth: &DepthMap) -> Result<Vec<u8>> {
    let data: Vec<u8> = depth
        .values()
        .iter()
        .flat_map(|&v| ((v as f64 * 65535.0 + 0.5).floor() as u16).to_be_bytes())
        .collect();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, depth.width(), depth.height());
        enc.set_color(ColorType::Grayscale);
        enc.set_depth(BitDepth::Sixteen);
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&data).map_err(png_err)?;
        w.finish().map_err(png_err)?;
    }
    Ok(out)
}

/// Any PNG flattened to 8-bit RGB (alpha dropped, palettes expanded).
pub fn decode_rgb_png(bytes: &[u8]) -> Result<RgbImage> {
    let (img, _) = decode(bytes, Transformations::EXPAND | Transformations::STRIP_16)?;
    let (w, h) = (img.width as usize, img.height as usize);
    let channels = match img.color {
        ColorType::Grayscale => 1,
        ColorType::GrayscaleAlpha => 2,
        ColorType::Rgb => 3,
        ColorType::Rgba => 4,
        ColorType::Indexed => return Err(png_err("palette was not expanded")),
    };
    let mut data = Vec::with_capacity(w * h * 3);
    for row in img.data.chunks_exact(img.line).take(h) {
        for px in row[..w * channels].chunks_exact(channels) {
            match channels {
                1 | 2 => data.extend([px[0]; 3]),
                _ => data.extend(&px[..3]),
            }
        }
    }
    RgbImage::new(img.width, img.height, data)
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width, img.height);
        enc.set_color(ColorType::Rgb);
        enc.set_depth(BitDepth::Eight);
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&img.data).map_err(png_err)?;
        w.finish().map_err(png_err)?;
    }
    Ok(out)
}
