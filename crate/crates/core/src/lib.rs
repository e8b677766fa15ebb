//! Bottom-up saliency from a simulated primate visual cortex.
//!
//! Images are decomposed into color and gray planes ([`stimulus`]), filtered
//! by V1 double-opponent and oriented cells ([`filters`]), rate coded into
//! spiking V4 and MT populations ([`snn`]), and the resulting spike counts are
//! turned into color, orientation and fused saliency maps ([`saliency`]).
//! [`metrics`] scores maps against fixation data and [`datasets`] loads and
//! synthesizes stimuli.

pub mod config;
pub mod datasets;
pub mod error;
pub mod filters;
pub mod metrics;
pub mod pipeline;
pub mod plane;
pub mod saliency;
pub mod snn;
pub mod stimulus;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::{Pathway, Pipeline, SaliencyOutput};
pub use plane::{ChannelPlane, Dims, Plane};
pub use saliency::SaliencyMap;
pub use snn::Hue;
pub use stimulus::RgbPlanes;
