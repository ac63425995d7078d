//! JSON scene configuration. Every field has a default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smoothrast::camera::Camera;
use smoothrast::losses::LossWeights;
use smoothrast::mesh::{icosphere, load_obj, ParamMask, ShapeParams, SymmetrySpec};
use smoothrast::optim::AdamConfig;
use smoothrast::renderer::{Lighting, RenderParams};
use smoothrast::{Camera64, Mesh64, RenderParams64};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneConfig {
    pub mesh: MeshSource,
    pub cameras: Vec<CameraSpec>,
    pub render: RenderConfig,
    pub losses: LossConfig,
    pub adam: AdamSection,
    pub shape: ShapeConfig,
    pub gradcheck: GradcheckConfig,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            mesh: MeshSource::Base { icosphere: 2 },
            cameras: vec![CameraSpec::default()],
            render: RenderConfig::default(),
            losses: LossConfig::default(),
            adam: AdamSection::default(),
            shape: ShapeConfig::default(),
            gradcheck: GradcheckConfig::default(),
            seed: 0,
            output_dir: PathBuf::from("runs"),
        }
    }
}

/// `"mesh": "path/to.obj"` or `"mesh": {"icosphere": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    Path(PathBuf),
    Base { icosphere: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CameraSpec {
    LookAt {
        eye: [f64; 3],
        #[serde(default)]
        look_at: [f64; 3],
        #[serde(default = "default_up")]
        up: [f64; 3],
        #[serde(default = "default_fov")]
        fov_y_deg: f64,
        #[serde(default = "default_size")]
        width: usize,
        #[serde(default = "default_size")]
        height: usize,
        #[serde(default = "default_near")]
        near: f64,
    },
    Orbit {
        #[serde(default)]
        target: [f64; 3],
        #[serde(default = "default_distance")]
        distance: f64,
        #[serde(default)]
        azimuth_deg: f64,
        #[serde(default = "default_elevation")]
        elevation_deg: f64,
        #[serde(default = "default_fov")]
        fov_y_deg: f64,
        #[serde(default = "default_size")]
        width: usize,
        #[serde(default = "default_size")]
        height: usize,
    },
}

fn default_up() -> [f64; 3] {
    [0.0, 1.0, 0.0]
}
fn default_fov() -> f64 {
    45.0
}
fn default_size() -> usize {
    64
}
fn default_near() -> f64 {
    0.01
}
fn default_distance() -> f64 {
    3.5
}
fn default_elevation() -> f64 {
    20.0
}

impl Default for CameraSpec {
    fn default() -> Self {
        CameraSpec::Orbit {
            target: [0.0; 3],
            distance: default_distance(),
            azimuth_deg: 0.0,
            elevation_deg: default_elevation(),
            fov_y_deg: default_fov(),
            width: default_size(),
            height: default_size(),
        }
    }
}

impl CameraSpec {
    pub fn build(&self) -> Result<Camera64, CliError> {
        let cam = match *self {
            CameraSpec::LookAt {
                eye,
                look_at,
                up,
                fov_y_deg,
                width,
                height,
                near,
            } => Camera::new(eye, look_at, up, fov_y_deg.to_radians(), width, height, near),
            CameraSpec::Orbit {
                target,
                distance,
                azimuth_deg,
                elevation_deg,
                fov_y_deg,
                width,
                height,
            } => Camera::orbit(
                target,
                distance,
                azimuth_deg.to_radians(),
                elevation_deg.to_radians(),
                fov_y_deg.to_radians(),
                width,
                height,
            ),
        };
        cam.map_err(|e| CliError::config(format!("camera: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub s: f64,
    pub o: f64,
    /// Direction toward the light; normalized on load.
    pub light_dir: [f64; 3],
    pub k_ambient: f64,
    pub k_diffuse: f64,
    pub k_specular: f64,
    pub shininess: f64,
    pub background_intensity: f64,
    pub background_depth: Option<f64>,
    pub eps: f64,
    pub single_sided: bool,
    pub distance_decay: Option<f64>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        let p = RenderParams64::default();
        Self {
            s: p.s,
            o: p.o,
            light_dir: p.lighting.light_dir,
            k_ambient: p.lighting.k_ambient,
            k_diffuse: p.lighting.k_diffuse,
            k_specular: p.lighting.k_specular,
            shininess: p.lighting.shininess,
            background_intensity: p.background_intensity,
            background_depth: p.background_depth,
            eps: p.eps,
            single_sided: p.single_sided,
            distance_decay: p.distance_decay,
        }
    }
}

impl RenderConfig {
    pub fn build(&self) -> Result<RenderParams64, CliError> {
        let l = self.light_dir;
        let n = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(CliError::config("render.light_dir must be a non-zero finite vector"));
        }
        let p = RenderParams {
            s: self.s,
            o: self.o,
            lighting: Lighting {
                light_dir: l.map(|c| c / n),
                k_ambient: self.k_ambient,
                k_diffuse: self.k_diffuse,
                k_specular: self.k_specular,
                shininess: self.shininess,
            },
            background_intensity: self.background_intensity,
            background_depth: self.background_depth,
            eps: self.eps,
            single_sided: self.single_sided,
            distance_decay: self.distance_decay,
        };
        p.validate().map_err(|e| CliError::config(format!("render: {e}")))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossConfig {
    pub image: f64,
    pub normal: f64,
    pub edge: f64,
    pub laplacian: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        let w = LossWeights::<f64>::default();
        Self {
            image: w.image,
            normal: w.normal,
            edge: w.edge,
            laplacian: w.laplacian,
        }
    }
}

impl LossConfig {
    pub fn build(&self) -> Result<LossWeights<f64>, CliError> {
        let w = LossWeights {
            image: self.image,
            normal: self.normal,
            edge: self.edge,
            laplacian: self.laplacian,
        };
        w.validate().map_err(|e| CliError::config(format!("losses: {e}")))?;
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdamSection {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_hat: f64,
    pub max_iterations: usize,
    pub log_every: usize,
    pub snapshot_every: usize,
}

impl Default for AdamSection {
    fn default() -> Self {
        let c = AdamConfig::<f64>::default();
        Self {
            learning_rate: c.learning_rate,
            beta1: c.beta1,
            beta2: c.beta2,
            eps_hat: c.eps_hat,
            max_iterations: c.max_iterations,
            log_every: c.log_every,
            snapshot_every: c.snapshot_every,
        }
    }
}

impl AdamSection {
    pub fn build(&self) -> Result<AdamConfig<f64>, CliError> {
        let c = AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            eps_hat: self.eps_hat,
            max_iterations: self.max_iterations,
            log_every: self.log_every,
            snapshot_every: self.snapshot_every,
        };
        c.validate().map_err(|e| CliError::config(format!("adam: {e}")))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    None,
    Quarters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShapeConfig {
    pub max_offset: f64,
    pub symmetry: Symmetry,
    pub optimize_offsets: bool,
    pub optimize_translation: bool,
    pub optimize_scale: bool,
}

impl Default for ShapeConfig {
    fn default() -> Self {
        Self {
            max_offset: 0.3,
            symmetry: Symmetry::None,
            optimize_offsets: true,
            optimize_translation: true,
            optimize_scale: true,
        }
    }
}

impl ShapeConfig {
    pub fn init(&self, base: &Mesh64) -> Result<ShapeParams<f64>, CliError> {
        if !(self.max_offset > 0.0 && self.max_offset.is_finite()) {
            return Err(CliError::config("shape.max_offset must be positive"));
        }
        let sym = match self.symmetry {
            Symmetry::None => None,
            Symmetry::Quarters => Some(
                SymmetrySpec::quarters(base, true, true).map_err(|e| CliError::config(format!("shape.symmetry: {e}")))?,
            ),
        };
        Ok(ShapeParams::zeros(base, sym, self.max_offset))
    }

    pub fn mask(&self) -> ParamMask {
        ParamMask {
            offsets: self.optimize_offsets,
            translation: self.optimize_translation,
            scale: self.optimize_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckConfig {
    pub probes: usize,
    pub step: f64,
    pub threshold: f64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            probes: 20,
            step: 1e-5,
            threshold: 1e-3,
        }
    }
}

impl SceneConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message)))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn build_cameras(&self) -> Result<Vec<Camera64>, CliError> {
        if self.cameras.is_empty() {
            return Err(CliError::config("at least one camera is required"));
        }
        self.cameras.iter().map(CameraSpec::build).collect()
    }

    /// Loads the mesh. Relative paths resolve against `base_dir`.
    pub fn load_mesh(&self, base_dir: &Path) -> Result<Mesh64, CliError> {
        match &self.mesh {
            MeshSource::Base { icosphere: level } => {
                icosphere(*level).map_err(|e| CliError::config(format!("mesh: {e}")))
            }
            MeshSource::Path(p) => {
                let full = if p.is_absolute() { p.clone() } else { base_dir.join(p) };
                load_obj(&full).map_err(|e| CliError::io(format!("{}: {e}", full.display())))
            }
        }
    }

    /// Checks every section without touching the filesystem.
    pub fn validate(&self) -> Result<(), CliError> {
        self.build_cameras()?;
        self.render.build()?;
        self.losses.build()?;
        self.adam.build()?;
        if let MeshSource::Base { icosphere: level } = self.mesh {
            if level > smoothrast::mesh::MAX_ICOSPHERE_LEVEL {
                return Err(CliError::config(format!(
                    "mesh.icosphere level {level} exceeds {}",
                    smoothrast::mesh::MAX_ICOSPHERE_LEVEL
                )));
            }
        }
        if !(self.gradcheck.step > 0.0) || !(self.gradcheck.threshold >= 0.0) {
            return Err(CliError::config("gradcheck.step must be positive and threshold non-negative"));
        }
        Ok(())
    }
}
