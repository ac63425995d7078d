//! Adam and the render-and-compare loop that fits [`ShapeParams`] to target
//! images, plus a finite-difference check of the renderer's gradients.

mod adam;
mod gradcheck;

use std::fmt::Write as _;

use thiserror::Error;

pub use adam::{adam_step, AdamConfig, OptState};
pub use gradcheck::{gradcheck_render, occlusion_scene, GradcheckReport, Probe};

use crate::autodiff::Tape;
use crate::camera::Camera;
use crate::losses::{total_loss, LossError, LossReport, LossWeights};
use crate::mesh::{apply_params, apply_params_on_tape, mirror_quarters, Adjacency, Mesh, MeshError, ParamMask, ShapeParams};
use crate::renderer::{render, resolve_background_depth, Image, RenderError, RenderParams};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("length mismatch: {params} parameters, {grads} gradients, state for {state}")]
    LengthMismatch { params: usize, grads: usize, state: usize },
    #[error("gradient of parameter {index} is not finite")]
    NonFiniteGradient { index: usize },
    #[error("invalid optimizer configuration: {0}")]
    Config(String),
    #[error("no target views")]
    NoTargets,
    #[error("target {view} is {found:?} but its camera is {expected:?}")]
    TargetSize {
        view: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("iteration {iteration}: {source}")]
    Render {
        iteration: usize,
        #[source]
        source: RenderError,
    },
    #[error("iteration {iteration}: loss is not finite")]
    NonFiniteLoss { iteration: usize },
    #[error("iteration {iteration}: vertex {vertex} left its offset bound")]
    OffsetBound { iteration: usize, vertex: usize },
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// One view to match.
#[derive(Debug, Clone)]
pub struct Target<T> {
    pub image: Image<T>,
    pub camera: Camera<T>,
}

/// Everything held fixed during an optimization.
#[derive(Debug, Clone)]
pub struct Problem<'a, T> {
    pub base: &'a Mesh<T>,
    pub targets: &'a [Target<T>],
    pub render: RenderParams<T>,
    pub weights: LossWeights<T>,
    pub mask: ParamMask,
}

/// Loss history and parameter snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    /// Loss at the start of each iteration, before its update.
    pub reports: Vec<LossReport<T>>,
    pub snapshots: Vec<(usize, ShapeParams<T>)>,
}

impl<T: Scalar> RunTrace<T> {
    /// CSV with header `iter,image_l1,reg_normal,reg_edge,reg_laplacian,total`.
    /// Values use the shortest round-trip formatting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,image_l1,reg_normal,reg_edge,reg_laplacian,total\n");
        for (i, r) in self.reports.iter().enumerate() {
            let _ = writeln!(
                s,
                "{i},{},{},{},{},{}",
                r.image_l1, r.reg_normal, r.reg_edge, r.reg_laplacian, r.total
            );
        }
        s
    }
}

/// Passed to the observer once per iteration, before the update.
#[derive(Debug)]
pub struct Progress<'a, T> {
    pub iteration: usize,
    pub report: LossReport<T>,
    pub params: &'a ShapeParams<T>,
}

#[derive(Debug, Clone)]
pub struct Outcome<T> {
    pub params: ShapeParams<T>,
    pub trace: RunTrace<T>,
    /// Loss at the returned parameters.
    pub final_report: LossReport<T>,
    /// Background depth used for every render of the run.
    pub background_depth: T,
}

impl<'a, T: Scalar> Problem<'a, T> {
    fn validate(&self) -> Result<(), OptimError> {
        if self.targets.is_empty() {
            return Err(OptimError::NoTargets);
        }
        for (view, t) in self.targets.iter().enumerate() {
            let expected = (t.camera.width, t.camera.height);
            let found = (t.image.width, t.image.height);
            if expected != found {
                return Err(OptimError::TargetSize { view, expected, found });
            }
        }
        self.weights.validate()?;
        Ok(())
    }

    /// Render parameters with the background depth pinned for `params`.
    pub fn pinned_render(&self, params: &ShapeParams<T>) -> Result<RenderParams<T>, OptimError> {
        let mut rp = self.render;
        if rp.background_depth.is_none() {
            let mesh = apply_params(self.base, params)?;
            rp.background_depth = Some(resolve_background_depth(&mesh, self.targets.iter().map(|t| &t.camera)));
        }
        Ok(rp)
    }
}

/// Total loss at `params` and, when `with_grad`, its gradient in
/// [`ShapeParams::to_flat`] order. Masked-out groups get zero gradient.
pub fn loss_and_gradient<T: Scalar>(
    problem: &Problem<'_, T>,
    render_params: &RenderParams<T>,
    adjacency: &Adjacency,
    params: &ShapeParams<T>,
    with_grad: bool,
    iteration: usize,
) -> Result<(LossReport<T>, Option<Vec<T>>), OptimError> {
    let mut tape = Tape::new();
    let mask = if with_grad {
        problem.mask
    } else {
        ParamMask {
            offsets: false,
            translation: false,
            scale: false,
        }
    };
    let nodes = params.to_tape(&mut tape, mask);
    let mesh = apply_params_on_tape(&mut tape, problem.base, params, &nodes)?;
    let mut views = Vec::with_capacity(problem.targets.len());
    for t in problem.targets {
        let img = render(&mut tape, &mesh, &t.camera, render_params)
            .map_err(|source| OptimError::Render { iteration, source })?;
        views.push(img);
    }
    let targets: Vec<&Image<T>> = problem.targets.iter().map(|t| &t.image).collect();
    let report = total_loss(&mut tape, &views, &targets, &mesh, adjacency, &problem.weights)?;
    let values = report.values(&tape);
    if !values.total.is_finite() {
        return Err(OptimError::NonFiniteLoss { iteration });
    }
    let grad = if with_grad {
        let g = tape.backward(report.total).expect("loss node is on this tape");
        Some(nodes.flat().iter().map(|&n| g.wrt(n)).collect())
    } else {
        None
    };
    Ok((values, grad))
}

fn check_offsets<T: Scalar>(base: &Mesh<T>, params: &ShapeParams<T>, iteration: usize) -> Result<(), OptimError> {
    let offsets = mirror_quarters(params, base)?;
    match offsets
        .iter()
        .position(|o| o.iter().any(|c| !(c.abs() <= params.max_offset)))
    {
        Some(vertex) => Err(OptimError::OffsetBound { iteration, vertex }),
        None => Ok(()),
    }
}

/// Runs `cfg.max_iterations` Adam steps from `init`. Each iteration decodes
/// the parameters, renders every view, evaluates [`total_loss`], back-propagates
/// and updates. The background depth is resolved once from `init` when the
/// render parameters leave it unset.
pub fn optimize<T, F>(
    problem: &Problem<'_, T>,
    cfg: &AdamConfig<T>,
    init: ShapeParams<T>,
    mut observer: F,
) -> Result<Outcome<T>, OptimError>
where
    T: Scalar,
    F: FnMut(&Progress<'_, T>),
{
    problem.validate()?;
    cfg.validate()?;
    let render_params = problem.pinned_render(&init)?;
    let adjacency = Adjacency::new(problem.base);
    let mut params = init;
    let mut flat = params.to_flat();
    let mut state = OptState::new(flat.len());
    let mut trace = RunTrace {
        reports: Vec::with_capacity(cfg.max_iterations),
        snapshots: Vec::new(),
    };

    for it in 0..cfg.max_iterations {
        check_offsets(problem.base, &params, it)?;
        let (report, grad) = loss_and_gradient(problem, &render_params, &adjacency, &params, true, it)?;
        observer(&Progress {
            iteration: it,
            report,
            params: &params,
        });
        if cfg.snapshot_every > 0 && it % cfg.snapshot_every == 0 {
            trace.snapshots.push((it, params.clone()));
        }
        if cfg.log_every > 0 && it % cfg.log_every == 0 {
            log::info!(
                "iter {it}: total {:.6e} image {:.6e}",
                report.total.to_f64_lossy(),
                report.image_l1.to_f64_lossy()
            );
        }
        trace.reports.push(report);
        adam_step(&mut flat, &grad.expect("gradient requested"), &mut state, cfg)?;
        params.set_flat(&flat);
    }

    let n = cfg.max_iterations;
    check_offsets(problem.base, &params, n)?;
    let (final_report, _) = loss_and_gradient(problem, &render_params, &adjacency, &params, false, n)?;
    if cfg.snapshot_every > 0 {
        trace.snapshots.push((n, params.clone()));
    }
    Ok(Outcome {
        params,
        trace,
        final_report,
        background_depth: render_params.background_depth.expect("pinned"),
    })
}
