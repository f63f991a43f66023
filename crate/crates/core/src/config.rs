//! Strict JSON run configuration. Every length is in meters and carries an
//! `_m` suffix; unknown fields are rejected.

use serde::{Deserialize, Serialize};

use crate::diffraction::{effective_geometry, linspace, Astigmatism, OpticalSetup, PropagationModel};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::lg::LgBasis;
use crate::mask::{MaskRecipe, PinholeMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mask: MaskRecipe,
    pub setup: SetupConfig,
    pub obs: ObsConfig,
    pub basis: BasisConfig,
    pub outputs: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<AnalysisConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetupConfig {
    pub lambda_m: f64,
    pub model: ModelConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub astig: Option<AstigConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelConfig {
    FreeSpace(FreeSpaceConfig),
    Lens(LensConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSpaceConfig {
    pub z_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensConfig {
    pub f_m: f64,
    pub delta_f_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AstigConfig {
    pub delta_fx_m: f64,
    pub delta_fy_m: f64,
    pub orientation_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObsConfig {
    pub nx: usize,
    pub ny: usize,
    pub window_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0_m: Option<f64>,
    pub p_max: usize,
    pub ell_abs_max: i64,
}

/// Optional measurement settings used by `spectrum`, `astig` and `zstack`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    /// Circle radii for winding and peak-count reports.
    #[serde(default)]
    pub ring_radii_m: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_samples: Option<usize>,
    /// Radius bounding the inner ring for the z-stack rms measurement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring_cutoff_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zstack: Option<ZStackConfig>,
    /// Keep only this OAM component before the astigmatic step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub astig_ell: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZStackConfig {
    pub start_m: f64,
    pub stop_m: f64,
    pub slices: usize,
}

fn cfg<T>(msg: String) -> Result<T> {
    Err(Error::Config(msg))
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        cfg(format!("{name} must be positive and finite, got {v}"))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("setup.lambda_m", self.setup.lambda_m)?;
        match &self.setup.model {
            ModelConfig::FreeSpace(m) => require_positive("setup.model.free_space.z_m", m.z_m)?,
            ModelConfig::Lens(m) => {
                require_positive("setup.model.lens.f_m", m.f_m)?;
                if m.delta_f_m == 0.0 || !m.delta_f_m.is_finite() {
                    return cfg("setup.model.lens.delta_f_m must be nonzero".into());
                }
            }
        }
        if let Some(a) = &self.setup.astig {
            if !(0.0..std::f64::consts::PI).contains(&a.orientation_rad) {
                return cfg(format!("setup.astig.orientation_rad {} must lie in [0, π)", a.orientation_rad));
            }
        }
        if self.obs.nx < 2 || self.obs.ny < 2 {
            return cfg("obs.nx and obs.ny must be at least 2".into());
        }
        require_positive("obs.window_m", self.obs.window_m)?;
        if let Some(w0) = self.basis.w0_m {
            require_positive("basis.w0_m", w0)?;
        }
        if self.basis.ell_abs_max < 0 {
            return cfg("basis.ell_abs_max must be non-negative".into());
        }
        for (k, m) in self.mask.motifs.iter().enumerate() {
            require_positive(&format!("mask.motifs[{k}].pinhole_radius_m"), m.pinhole_radius_m)?;
        }
        if let Some(a) = &self.analysis {
            for &r in &a.ring_radii_m {
                require_positive("analysis.ring_radii_m", r)?;
            }
            if let Some(c) = a.ring_cutoff_m {
                require_positive("analysis.ring_cutoff_m", c)?;
            }
            if let Some(z) = &a.zstack {
                if z.slices == 0 {
                    return cfg("analysis.zstack.slices must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    pub fn optical_setup(&self) -> OpticalSetup {
        let model = match &self.setup.model {
            ModelConfig::FreeSpace(m) => PropagationModel::FreeSpace { z: m.z_m },
            ModelConfig::Lens(m) => PropagationModel::Lens {
                f: m.f_m,
                delta_f: m.delta_f_m,
            },
        };
        OpticalSetup {
            lambda: self.setup.lambda_m,
            model,
            astig: self.setup.astig.as_ref().map(|a| Astigmatism {
                delta_f_x: a.delta_fx_m,
                delta_f_y: a.delta_fy_m,
                orientation: a.orientation_rad,
            }),
        }
    }

    /// Astigmatism from the config, or the default split about the base defocus.
    pub fn astigmatism(&self) -> Astigmatism {
        let setup = self.optical_setup();
        setup.astig.unwrap_or_else(|| match setup.model {
            PropagationModel::Lens { delta_f, .. } => Astigmatism::default_for(delta_f),
            PropagationModel::FreeSpace { z } => Astigmatism::default_for(z),
        })
    }

    pub fn obs_grid(&self) -> Result<GridSpec> {
        let o = &self.obs;
        GridSpec::new(o.nx, o.ny, o.window_m / o.nx as f64, o.window_m / o.ny as f64, (0.0, 0.0))
    }

    /// Basis over the observation window; `w0` defaults to a sixth of it.
    pub fn basis(&self) -> Result<LgBasis> {
        let b = &self.basis;
        let w0 = b.w0_m.unwrap_or(self.obs.window_m / 6.0);
        LgBasis::symmetric(w0, b.p_max, b.ell_abs_max, self.obs.window_m)
    }

    /// Builds the mask; Fermat motifs without `z_m` use the setup's effective distance.
    pub fn build_mask(&self) -> Result<PinholeMask> {
        let z = effective_geometry(&self.optical_setup())?.z_eff;
        self.mask.build(Some(z))
    }

    pub fn analysis(&self) -> AnalysisConfig {
        self.analysis.clone().unwrap_or_default()
    }

    pub fn zstack_defocus(&self) -> Option<Vec<f64>> {
        self.analysis
            .as_ref()
            .and_then(|a| a.zstack.as_ref())
            .map(|z| linspace(z.start_m, z.stop_m, z.slices))
    }
}
