//! Differentiable smooth triangle rasterizer and render-and-compare mesh optimizer.
//!
//! Every pixel of a [`renderer::render`] is a C∞ function of the mesh vertices:
//! coverage is a product of sigmoids of directed edge distances, depth
//! resolution is a visibility-weighted SoftMin over view-space depths, and
//! shading is flat grayscale Blinn-Phong. Gradients are exact reverse-mode
//! derivatives recorded on an [`autodiff::Tape`].
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below are the double-precision instantiations used by the CLI.

pub mod autodiff;
pub mod camera;
pub mod losses;
pub mod mesh;
pub mod optim;
pub mod renderer;
pub mod scalar;

pub use scalar::Scalar;

/// ε used by smooth absolute values and smooth norms.
pub const SMOOTH_EPS: f64 = 1e-12;

pub type Tape64 = autodiff::Tape<f64>;
pub type Mesh64 = mesh::Mesh<f64>;
pub type ShapeParams64 = mesh::ShapeParams<f64>;
pub type Camera64 = camera::Camera<f64>;
pub type RenderParams64 = renderer::RenderParams<f64>;
pub type Image64 = renderer::Image<f64>;
