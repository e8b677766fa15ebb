//! Every tunable constant of the pipeline in one validated record.
//!
//! The on-disk form is flat `key = value` text, one entry per line, with keys
//! equal to the field names below. Missing keys keep their defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::Kernel;
use crate::plane::Dims;
use crate::snn::{Hue, IzhikevichParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Working resolution; inputs are resized to this before processing.
    pub width: usize,
    pub height: usize,

    pub sigma_cen: f64,
    pub sigma_sur: f64,

    pub oriented_sigma: f64,
    pub oriented_radius: usize,
    pub v1_scale: f64,
    pub semisaturation: f64,

    pub alpha_red: f64,
    pub alpha_green: f64,
    pub alpha_blue: f64,
    pub alpha_yellow: f64,
    pub alpha_cyan: f64,
    pub alpha_magenta: f64,

    /// Color values below this fraction of the channel maximum are zeroed.
    pub keep_fraction_color: f64,
    /// Color pixels above this fraction of the smoothed maximum count toward `N_c`.
    pub count_threshold_color: f64,
    /// Orientation pixels at or above this fraction count toward `N_θ`.
    pub count_threshold_orient: f64,
    /// Side of the square averaging kernel.
    pub smoothing_size: usize,
    /// Applications of the averaging kernel at every smoothing step.
    pub smooth_passes: usize,
    /// Fraction of lowest final-map values zeroed after fusion (0 disables).
    pub drop_bottom_fraction: f64,

    pub max_rate_hz: f64,
    pub duration_ms: f64,
    pub step_ms: f64,
    pub seed: u64,

    pub izh_a: f64,
    pub izh_b: f64,
    pub izh_c: f64,
    pub izh_d: f64,

    /// V1 opponent cell → V4 hue cell sharing its center color.
    pub w_v4_primary: f64,
    /// V1 opponent cell → cyan or magenta V4 cell.
    pub w_v4_secondary: f64,
    /// Cyan/magenta V4 cells → yellow V4 cell (inhibitory magnitude).
    pub w_v4_inhibit: f64,
    /// V1 orientation channel → MT cell.
    pub w_mt: f64,

    /// Center-prior width as a fraction of `min(width, height)`.
    pub center_prior_sigma_fraction: f64,
    /// Blur applied to fixation points when no density map is supplied, in pixels.
    pub density_sigma: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            sigma_cen: 1.2,
            sigma_sur: 1.6,
            oriented_sigma: 1.5,
            oriented_radius: 4,
            v1_scale: 1.0,
            semisaturation: 0.1,
            alpha_red: 0.8,
            alpha_green: 1.0,
            alpha_blue: 1.0,
            alpha_yellow: 0.9,
            alpha_cyan: 1.0,
            alpha_magenta: 1.0,
            keep_fraction_color: 0.7,
            count_threshold_color: 0.2,
            count_threshold_orient: 0.5,
            smoothing_size: 3,
            smooth_passes: 1,
            drop_bottom_fraction: 0.0,
            max_rate_hz: 50.0,
            duration_ms: 500.0,
            step_ms: 1.0,
            seed: 42,
            izh_a: 0.02,
            izh_b: 0.2,
            izh_c: -65.0,
            izh_d: 8.0,
            w_v4_primary: 18.0,
            w_v4_secondary: 16.0,
            w_v4_inhibit: 20.0,
            w_mt: 60.0,
            center_prior_sigma_fraction: 0.25,
            density_sigma: 3.0,
        }
    }
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} not in (0, 1)")))
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{v} is not positive")))
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::ZeroDimension {
                width: self.width,
                height: self.height,
            });
        }
        positive("sigma_cen", self.sigma_cen)?;
        if !(self.sigma_cen < self.sigma_sur) {
            return Err(invalid("sigma_cen", "must be smaller than sigma_sur"));
        }
        positive("oriented_sigma", self.oriented_sigma)?;
        if self.oriented_radius == 0 {
            return Err(invalid("oriented_radius", "must be at least 1"));
        }
        positive("v1_scale", self.v1_scale)?;
        positive("semisaturation", self.semisaturation)?;
        for hue in Hue::ALL {
            let a = self.alpha(hue);
            if !(a > 0.0 && a <= 1.0) {
                return Err(invalid("alpha", format!("{hue} weight {a} not in (0, 1]")));
            }
        }
        open_unit("keep_fraction_color", self.keep_fraction_color)?;
        open_unit("count_threshold_color", self.count_threshold_color)?;
        open_unit("count_threshold_orient", self.count_threshold_orient)?;
        if self.smoothing_size % 2 == 0 {
            return Err(invalid("smoothing_size", "must be odd"));
        }
        if !(0.0..1.0).contains(&self.drop_bottom_fraction) {
            return Err(invalid("drop_bottom_fraction", "must be in [0, 1)"));
        }
        positive("max_rate_hz", self.max_rate_hz)?;
        positive("duration_ms", self.duration_ms)?;
        positive("step_ms", self.step_ms)?;
        let steps = self.duration_ms / self.step_ms;
        if (steps - steps.round()).abs() > 1e-9 {
            return Err(invalid("duration_ms", "must be a multiple of step_ms"));
        }
        for (name, w) in [
            ("w_v4_primary", self.w_v4_primary),
            ("w_v4_secondary", self.w_v4_secondary),
            ("w_v4_inhibit", self.w_v4_inhibit),
            ("w_mt", self.w_mt),
        ] {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(invalid(name, format!("{w} is negative")));
            }
        }
        positive(
            "center_prior_sigma_fraction",
            self.center_prior_sigma_fraction,
        )?;
        positive("density_sigma", self.density_sigma)?;
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.width, self.height)
    }

    pub fn alpha(&self, hue: Hue) -> f64 {
        match hue {
            Hue::Red => self.alpha_red,
            Hue::Green => self.alpha_green,
            Hue::Blue => self.alpha_blue,
            Hue::Yellow => self.alpha_yellow,
            Hue::Cyan => self.alpha_cyan,
            Hue::Magenta => self.alpha_magenta,
        }
    }

    pub fn smoothing_kernel(&self) -> Kernel {
        Kernel::average(self.smoothing_size).expect("validated odd size")
    }

    pub fn neuron_params(&self) -> IzhikevichParams {
        IzhikevichParams {
            a: self.izh_a,
            b: self.izh_b,
            c: self.izh_c,
            d: self.izh_d,
        }
    }

    /// Parses flat `key = value` text over the defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::UnreadableFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Self::from_text(&text)
    }

    /// Flat `key = value` rendering, readable by [`PipelineConfig::from_text`].
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat record serializes")
    }
}
