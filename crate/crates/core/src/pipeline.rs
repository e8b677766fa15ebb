//! End-to-end wiring: RGB image → V1 → V4/MT spikes → saliency maps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::filters::{
    opponent_responses, orientation_responses, oriented_filter_bank, OrientedFilterBank,
    ResponsePlane, ResponseTag,
};
use crate::plane::Plane;
use crate::saliency::{color_saliency, drop_bottom, fuse_maps, orientation_saliency, SaliencyMap};
use crate::snn::{
    build_mt_network, build_v4_network, run_network_with, spike_counts_to_response, Hue,
    NoObserver, SpikeCountPlane, SpikeObserver,
};
use crate::stimulus::RgbPlanes;

/// Which visual pathways contribute to the final map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pathway {
    Color,
    Orientation,
    #[default]
    Both,
}

impl Pathway {
    pub fn uses_color(self) -> bool {
        matches!(self, Pathway::Color | Pathway::Both)
    }

    pub fn uses_orientation(self) -> bool {
        matches!(self, Pathway::Orientation | Pathway::Both)
    }
}

impl FromStr for Pathway {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "color" => Ok(Pathway::Color),
            "orientation" => Ok(Pathway::Orientation),
            "both" => Ok(Pathway::Both),
            other => Err(Error::InvalidParameter {
                name: "pathway",
                reason: format!("unknown pathway `{other}`"),
            }),
        }
    }
}

impl fmt::Display for Pathway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pathway::Color => "color",
            Pathway::Orientation => "orientation",
            Pathway::Both => "both",
        })
    }
}

/// Everything produced for one image.
#[derive(Debug, Clone)]
pub struct SaliencyOutput {
    pub color: Option<SaliencyMap>,
    pub orientation: Option<SaliencyMap>,
    pub fused: SaliencyMap,
    /// V4 counts in [`Hue::ALL`] order (empty when the color pathway is off).
    pub v4_counts: Vec<SpikeCountPlane>,
    /// MT counts in orientation order (empty when the orientation pathway is off).
    pub mt_counts: Vec<SpikeCountPlane>,
}

/// A configured pipeline; cheap to share across threads.
#[derive(Debug, Clone)]
pub struct Pipeline {
    config: PipelineConfig,
    bank: OrientedFilterBank,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        let bank = oriented_filter_bank(
            config.oriented_sigma,
            config.oriented_radius,
            config.v1_scale,
        )?;
        Ok(Self { config, bank })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    /// Resizes `rgb` to the working resolution.
    pub fn prepare(&self, rgb: &RgbPlanes) -> Result<RgbPlanes> {
        rgb.resized(self.config.dims())
    }

    /// Spike counts of the six V4 hue populations for an image already at
    /// working resolution.
    pub fn v4_counts(&self, rgb: &RgbPlanes) -> Result<Vec<SpikeCountPlane>> {
        self.v4_counts_with(rgb, &mut NoObserver)
    }

    fn v4_counts_with(
        &self,
        rgb: &RgbPlanes,
        observer: &mut dyn SpikeObserver,
    ) -> Result<Vec<SpikeCountPlane>> {
        let channels = rgb.color_channels()?;
        let drive: Vec<Plane> =
            opponent_responses(&channels, self.config.sigma_cen, self.config.sigma_sur)?
                .into_iter()
                .map(|r| r.values)
                .collect();
        run_network_with(&build_v4_network(&self.config), &drive, observer)
    }

    /// Spike counts of the eight MT populations for an image already at
    /// working resolution.
    pub fn mt_counts(&self, rgb: &RgbPlanes) -> Result<Vec<SpikeCountPlane>> {
        self.mt_counts_with(rgb, &mut NoObserver)
    }

    fn mt_counts_with(
        &self,
        rgb: &RgbPlanes,
        observer: &mut dyn SpikeObserver,
    ) -> Result<Vec<SpikeCountPlane>> {
        let gray = rgb.grayscale()?;
        let drive: Vec<Plane> =
            orientation_responses(&gray, &self.bank, self.config.semisaturation)?
                .into_iter()
                .map(|r| r.values)
                .collect();
        run_network_with(&build_mt_network(&self.config), &drive, observer)
    }

    /// Runs the selected pathways on `rgb` (any size) and fuses the results.
    pub fn run(&self, rgb: &RgbPlanes, pathway: Pathway) -> Result<SaliencyOutput> {
        self.run_with(rgb, pathway, &mut NoObserver)
    }

    /// [`Pipeline::run`] reporting every V4 and MT spike to `observer`.
    pub fn run_with(
        &self,
        rgb: &RgbPlanes,
        pathway: Pathway,
        observer: &mut dyn SpikeObserver,
    ) -> Result<SaliencyOutput> {
        let rgb = self.prepare(rgb)?;
        let (mut color, mut orientation) = (None, None);
        let (mut v4_counts, mut mt_counts) = (Vec::new(), Vec::new());

        if pathway.uses_color() {
            v4_counts = self.v4_counts_with(&rgb, observer)?;
            color = Some(color_saliency(&hue_responses(&v4_counts), &self.config)?);
        }
        if pathway.uses_orientation() {
            mt_counts = self.mt_counts_with(&rgb, observer)?;
            orientation = Some(orientation_saliency(
                &orientation_count_responses(&mt_counts),
                &self.config,
            )?);
        }

        let kernel = self.config.smoothing_kernel();
        let passes = self.config.smooth_passes;
        let fused = match (&color, &orientation) {
            (Some(c), Some(o)) => fuse_maps(c, o, &kernel, passes)?,
            (Some(m), None) | (None, Some(m)) => fuse_maps(m, m, &kernel, passes)?,
            (None, None) => unreachable!("every pathway uses at least one map"),
        };
        let fused = drop_bottom(&fused, self.config.drop_bottom_fraction)?;
        Ok(SaliencyOutput {
            color,
            orientation,
            fused,
            v4_counts,
            mt_counts,
        })
    }
}

/// Tags V4 counts (in [`Hue::ALL`] order) as hue responses.
pub fn hue_responses(counts: &[SpikeCountPlane]) -> Vec<ResponsePlane> {
    counts
        .iter()
        .zip(Hue::ALL)
        .map(|(c, h)| ResponsePlane::new(ResponseTag::Hue(h), spike_counts_to_response(c)))
        .collect()
}

/// Tags MT counts (in channel order) as orientation responses.
pub fn orientation_count_responses(counts: &[SpikeCountPlane]) -> Vec<ResponsePlane> {
    counts
        .iter()
        .enumerate()
        .map(|(k, c)| ResponsePlane::new(ResponseTag::Orientation(k), spike_counts_to_response(c)))
        .collect()
}
