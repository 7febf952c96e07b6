//! Reading and validating external rasters: RGB frames, indexed VOS mask
//! PNGs, depth as 16-bit PNG or raw LVDM, and optional HTTP providers that
//! answer in those same formats.

mod files;
mod lvdm;
mod png_io;
mod provider;
mod session;

pub use files::{decode_depth, load_depth, load_depth_sequence, load_image, load_mask, load_masks_vos};
pub use lvdm::{decode_lvdm, encode_lvdm, LVDM_MAGIC};
pub use png_io::{
    decode_depth_png, decode_mask_png, decode_rgb_png, encode_depth_png, encode_mask_png, encode_rgb_png, vos_palette,
    RgbImage,
};
pub use provider::{ProviderClient, ProviderEndpoint, ProviderKind};
pub use session::Session;
