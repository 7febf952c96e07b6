use std::collections::BTreeMap;

use super::png_io::RgbImage;
use crate::error::{Error, Result};
use crate::geometry::{check_dims, DepthMap, InstanceId, InstanceInfo, InstanceMaskFrame};
use crate::pipeline::SessionConfig;

/// A first frame with its depth and instance masks, validated on construction.
#[derive(Clone, Debug)]
pub struct Session {
    id: String,
    image: RgbImage,
    depth0: DepthMap,
    masks0: InstanceMaskFrame,
    registry: BTreeMap<InstanceId, InstanceInfo>,
    config: SessionConfig,
}

impl Session {
    pub fn new(
        id: impl Into<String>,
        image: RgbImage,
        depth0: DepthMap,
        masks0: InstanceMaskFrame,
        config: SessionConfig,
    ) -> Result<Self> {
        config.validate()?;
        let dims = (config.width, config.height);
        check_dims("image", dims, (image.width, image.height))?;
        check_dims("depth", dims, (depth0.width(), depth0.height()))?;
        check_dims("masks", dims, (masks0.width(), masks0.height()))?;
        let depth0 = depth0.with_convention(config.depth_convention)?;
        let registry = masks0.registry();
        if registry.is_empty() {
            return Err(Error::validation("masks", "no instances in the first-frame masks"));
        }
        Ok(Self { id: id.into(), image, depth0, masks0, registry, config })
    }

    pub fn id(&self) -> &str {
        &self.id
    }
    pub fn image(&self) -> &RgbImage {
        &self.image
    }
    pub fn depth0(&self) -> &DepthMap {
        &self.depth0
    }
    pub fn masks0(&self) -> &InstanceMaskFrame {
        &self.masks0
    }
    pub fn registry(&self) -> &BTreeMap<InstanceId, InstanceInfo> {
        &self.registry
    }
    pub fn config(&self) -> &SessionConfig {
        &self.config
    }
}
