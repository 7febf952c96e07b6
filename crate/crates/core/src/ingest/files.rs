use std::fs;
use std::path::{Path, PathBuf};

use super::lvdm::{decode_lvdm, LVDM_MAGIC};
use super::png_io::{decode_depth_png, decode_mask_png, decode_rgb_png, RgbImage, PNG_SIGNATURE};
use crate::error::{Error, Result};
use crate::geometry::{DepthConvention, DepthMap, InstanceMaskFrame};

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::file(path, e.to_string()))
}

fn at(path: &Path) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::File { .. } => e,
        other => Error::file(path, other.to_string()),
    }
}

pub fn load_image(path: &Path) -> Result<RgbImage> {
    decode_rgb_png(&read(path)?).map_err(at(path))
}

/// Depth bytes in either supported container, chosen by magic.
pub fn decode_depth(bytes: &[u8], convention: DepthConvention) -> Result<DepthMap> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_depth_png(bytes, convention)
    } else if bytes.starts_with(LVDM_MAGIC) {
        decode_lvdm(bytes, convention)
    } else {
        let head = &bytes[..bytes.len().min(4)];
        Err(Error::parse("magic", format!("unknown depth container {head:?}; expected PNG or LVDM")))
    }
}

pub fn load_depth(path: &Path, convention: DepthConvention) -> Result<DepthMap> {
    decode_depth(&read(path)?, convention).map_err(at(path))
}

/// A single indexed mask PNG.
pub fn load_mask(path: &Path) -> Result<InstanceMaskFrame> {
    decode_mask_png(&read(path)?, 0).map_err(at(path))
}

/// Files in `dir` named `<frame number>.<ext>`, sorted, with gaps rejected.
fn numbered_files(dir: &Path, exts: &[&str]) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::file(dir, e.to_string()))?;
    let mut found: Vec<(u64, usize, PathBuf)> = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::file(dir, e.to_string()))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| exts.contains(&e.as_str())) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        match stem.parse::<u64>() {
            Ok(n) if stem.bytes().all(|b| b.is_ascii_digit()) => found.push((n, stem.len(), path)),
            _ => log::warn!("skipping {}: name is not a frame number", path.display()),
        }
    }
    if found.is_empty() {
        return Err(Error::file(dir, format!("no frame files with extension {}", exts.join("/"))));
    }
    found.sort();
    for pair in found.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(Error::file(&pair[1].2, format!("duplicate frame {}", pair[1].0)));
        }
    }
    let pad = found.iter().map(|f| f.1).max().unwrap_or(1);
    let first = found[0].0;
    for (i, (n, _, _)) in found.iter().enumerate() {
        let expected = first + i as u64;
        if *n != expected {
            return Err(Error::file(dir, format!("missing frame {expected:0pad$}")));
        }
    }
    Ok(found.into_iter().map(|f| f.2).collect())
}

/// A directory of per-frame indexed PNGs (`00000.png`, `00001.png`, ...).
pub fn load_masks_vos(dir: &Path) -> Result<Vec<InstanceMaskFrame>> {
    let files = numbered_files(dir, &["png"])?;
    let mut frames: Vec<InstanceMaskFrame> = Vec::with_capacity(files.len());
    for (t, path) in files.iter().enumerate() {
        let m = decode_mask_png(&read(path)?, t).map_err(at(path))?;
        if let Some(f0) = frames.first() {
            if !m.dims_match(f0.width(), f0.height()) {
                return Err(Error::file(
                    path,
                    format!("resolution {}x{} differs from {}x{}", m.width(), m.height(), f0.width(), f0.height()),
                ));
            }
        }
        frames.push(m);
    }
    Ok(frames)
}

/// A directory of per-frame depth files, PNG or LVDM, same naming as masks.
pub fn load_depth_sequence(dir: &Path, convention: DepthConvention) -> Result<Vec<DepthMap>> {
    let files = numbered_files(dir, &["png", "lvdm"])?;
    let mut maps: Vec<DepthMap> = Vec::with_capacity(files.len());
    for path in &files {
        let d = load_depth(path, convention)?;
        if let Some(d0) = maps.first() {
            if (d.width(), d.height()) != (d0.width(), d0.height()) {
                return Err(Error::file(
                    path,
                    format!("resolution {}x{} differs from {}x{}", d.width(), d.height(), d0.width(), d0.height()),
                ));
            }
        }
        maps.push(d);
    }
    Ok(maps)
}
