use std::fmt;

use smoothrast::optim::OptimError;
use smoothrast::camera::CameraError;
use smoothrast::renderer::io::ImageIoError;
use smoothrast::renderer::RenderError;

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_FRUSTUM: u8 = 3;
pub const EXIT_COUNT: u8 = 4;
pub const EXIT_GRADCHECK: u8 = 5;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(m: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: m.into() }
    }

    pub fn io(m: impl Into<String>) -> Self {
        Self { code: EXIT_IO, message: m.into() }
    }

    pub fn count(m: impl Into<String>) -> Self {
        Self { code: EXIT_COUNT, message: m.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<RenderError> for CliError {
    fn from(e: RenderError) -> Self {
        let code = match e {
            RenderError::Camera(CameraError::Frustum { .. }) => EXIT_FRUSTUM,
            RenderError::SizeMismatch(..) => EXIT_COUNT,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<ImageIoError> for CliError {
    fn from(e: ImageIoError) -> Self {
        Self::io(e.to_string())
    }
}

impl From<OptimError> for CliError {
    fn from(e: OptimError) -> Self {
        let code = match &e {
            OptimError::Render {
                source: RenderError::Camera(CameraError::Frustum { .. }),
                ..
            } => EXIT_FRUSTUM,
            OptimError::TargetSize { .. } | OptimError::NoTargets => EXIT_COUNT,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}
