use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use smoothrast::losses::{laplacian_magnitudes, LossReport};
use smoothrast::mesh::{apply_params, icosphere, write_obj, Adjacency, Mesh, ShapeParams};
use smoothrast::optim::{gradcheck_render, optimize, Problem, Target};
use smoothrast::renderer::io::{encode_for_path, encode_pgm, load_image};
use smoothrast::renderer::{render_image, resolve_background_depth};
use smoothrast::{Camera64, Image64, Mesh64};

use crate::config::SceneConfig;
use crate::error::{CliError, EXIT_GRADCHECK};
use crate::output::{run_dir, with_suffix, Outputs};

/// Parameters file written next to every decoded mesh.
#[derive(Debug, Serialize, Deserialize)]
pub struct ParamsFile {
    pub raw_offsets: Vec<f64>,
    pub translation: [f64; 3],
    pub log_scale: f64,
    pub max_offset: f64,
    pub symmetric: bool,
}

impl From<&ShapeParams<f64>> for ParamsFile {
    fn from(p: &ShapeParams<f64>) -> Self {
        Self {
            raw_offsets: p.raw_offsets.clone(),
            translation: p.translation,
            log_scale: p.log_scale,
            max_offset: p.max_offset,
            symmetric: p.symmetry.is_some(),
        }
    }
}

fn obj_bytes(mesh: &Mesh64) -> Vec<u8> {
    let mut buf = Vec::new();
    write_obj(mesh, &mut buf).expect("writing to memory");
    buf
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// Formats a sweep value for file names: `80`, `2.5`.
fn num(v: f64) -> String {
    format!("{v}")
}

pub struct RenderArgs {
    pub out: Vec<PathBuf>,
    pub sweep: Option<(Vec<f64>, Vec<f64>)>,
}

pub fn render(cfg: &SceneConfig, config_dir: &Path, args: &RenderArgs) -> Result<(), CliError> {
    cfg.validate()?;
    let cameras = cfg.build_cameras()?;
    let mut params = cfg.render.build()?;
    let mesh = cfg.load_mesh(config_dir)?;
    if params.background_depth.is_none() {
        params.background_depth = Some(resolve_background_depth(&mesh, cameras.iter()));
    }
    let run = run_dir(&cfg.output_dir, cfg.seed);
    let n = cameras.len();
    let paths: Vec<PathBuf> = match args.out.len() {
        0 if n == 1 => vec![run.join("render.pgm")],
        0 => (0..n).map(|i| run.join(format!("render_v{i}.pgm"))).collect(),
        1 if n == 1 => args.out.clone(),
        1 => (0..n).map(|i| with_suffix(&args.out[0], &format!("_v{i}"))).collect(),
        k if k == n => args.out.clone(),
        k => return Err(CliError::config(format!("{k} --out paths for {n} cameras"))),
    };

    let mut outputs = Outputs::default();
    outputs.add(run.join("config.json"), cfg.to_json());
    match &args.sweep {
        None => {
            for (cam, path) in cameras.iter().zip(&paths) {
                let img = render_image(&mesh, cam, &params)?;
                outputs.add(path, encode_for_path(&img, path)?);
            }
        }
        Some((ss, os)) => {
            for &s in ss {
                for &o in os {
                    let p = params.with_so(s, o);
                    p.validate().map_err(|e| CliError::config(format!("sweep: {e}")))?;
                    for (cam, path) in cameras.iter().zip(&paths) {
                        let img = render_image(&mesh, cam, &p)?;
                        let target = with_suffix(path, &format!("_s{}_o{}", num(s), num(o)));
                        outputs.add(&target, encode_for_path(&img, &target)?);
                    }
                }
            }
        }
    }
    for p in outputs.commit()? {
        println!("{}", p.display());
    }
    Ok(())
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "png" | "raw"))
}

/// PGM and PNG files of `dir`, sorted by file name.
pub fn load_targets(dir: &Path, cameras: &[Camera64]) -> Result<Vec<Target<f64>>, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for e in entries {
        let p = e.map_err(|e| CliError::io(e.to_string()))?.path();
        if p.is_file() && is_image(&p) {
            files.push(p);
        }
    }
    files.sort();
    if files.len() != cameras.len() {
        return Err(CliError::count(format!(
            "{} target images in {} but {} cameras configured",
            files.len(),
            dir.display(),
            cameras.len()
        )));
    }
    files
        .iter()
        .zip(cameras)
        .map(|(f, cam)| {
            let image: Image64 = load_image(f).map_err(|e| CliError::io(format!("{}: {e}", f.display())))?;
            if (image.width, image.height) != (cam.width, cam.height) {
                return Err(CliError::count(format!(
                    "{} is {}x{} but its camera is {}x{}",
                    f.display(),
                    image.width,
                    image.height,
                    cam.width,
                    cam.height
                )));
            }
            Ok(Target {
                image,
                camera: cam.clone(),
            })
        })
        .collect()
}

pub fn optimize_cmd(cfg: &SceneConfig, config_dir: &Path, targets_dir: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    let cameras = cfg.build_cameras()?;
    let params = cfg.render.build()?;
    let weights = cfg.losses.build()?;
    let adam = cfg.adam.build()?;
    let base = cfg.load_mesh(config_dir)?;
    let init = cfg.shape.init(&base)?;
    let targets = load_targets(targets_dir, &cameras)?;
    let problem = Problem {
        base: &base,
        targets: &targets,
        render: params,
        weights,
        mask: cfg.shape.mask(),
    };
    let out = optimize(&problem, &adam, init, |_| {})?;

    let run = run_dir(&cfg.output_dir, cfg.seed);
    let mut outputs = Outputs::default();
    outputs.add(run.join("config.json"), cfg.to_json());
    outputs.add(run.join("trace.csv"), out.trace.to_csv());
    for (it, p) in &out.trace.snapshots {
        let mesh = apply_params(&base, p).map_err(|e| CliError::config(e.to_string()))?;
        outputs.add(run.join(format!("snapshots/iter_{it:06}.obj")), obj_bytes(&mesh));
        outputs.add(run.join(format!("snapshots/iter_{it:06}.json")), json_bytes(&ParamsFile::from(p)));
    }
    let final_mesh = apply_params(&base, &out.params).map_err(|e| CliError::config(e.to_string()))?;
    outputs.add(run.join("final.obj"), obj_bytes(&final_mesh));
    outputs.add(run.join("final_params.json"), json_bytes(&ParamsFile::from(&out.params)));
    let pinned = smoothrast::renderer::RenderParams {
        background_depth: Some(out.background_depth),
        ..params
    };
    for (i, cam) in cameras.iter().enumerate() {
        let img = render_image(&final_mesh, cam, &pinned)?;
        outputs.add(run.join(format!("final_view{i}.pgm")), encode_pgm(&img));
    }
    outputs.commit()?;

    report_final(&out.final_report, out.trace.reports.first(), &final_mesh);
    println!("{}", run.display());
    Ok(())
}

fn report_final(last: &LossReport<f64>, first: Option<&LossReport<f64>>, mesh: &Mesh<f64>) {
    if let Some(f) = first {
        eprintln!("total loss {:.6e} -> {:.6e}", f.total, last.total);
    }
    eprintln!(
        "image_l1 {:.6e}  reg_normal {:.6e}  reg_edge {:.6e}  reg_laplacian {:.6e}",
        last.image_l1, last.reg_normal, last.reg_edge, last.reg_laplacian
    );
    if let Ok(mags) = laplacian_magnitudes(mesh, &Adjacency::new(mesh)) {
        if let Some((v, m)) = mags.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
            eprintln!("largest laplacian magnitude {m:.4e} at vertex {v}");
        }
    }
}

pub fn gradcheck(cfg: &SceneConfig, config_dir: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    let cameras = cfg.build_cameras()?;
    let params = cfg.render.build()?;
    let mesh = cfg.load_mesh(config_dir)?;
    let g = &cfg.gradcheck;
    let rep = gradcheck_render(&mesh, &cameras[0], &params, g.probes, g.step, cfg.seed)?;

    let mut table = String::from("scene,vertex,coord,analytic,numeric,rel_err\n");
    println!("{:<10} {:>6} {:>5} {:>16} {:>16} {:>10}", "scene", "vertex", "coord", "analytic", "numeric", "rel_err");
    for p in &rep.probes {
        println!(
            "{:<10} {:>6} {:>5} {:>16.9e} {:>16.9e} {:>10.3e}",
            p.scene, p.vertex, p.coord, p.analytic, p.numeric, p.rel_err
        );
        table.push_str(&format!("{},{},{},{},{},{}\n", p.scene, p.vertex, p.coord, p.analytic, p.numeric, p.rel_err));
    }
    println!("max relative error {:.3e} (threshold {:.3e})", rep.max_rel_err, g.threshold);
    if !(rep.max_rel_err < g.threshold) {
        return Err(CliError {
            code: EXIT_GRADCHECK,
            message: format!("max relative error {:.3e} is not below {:.3e}", rep.max_rel_err, g.threshold),
        });
    }
    let run = run_dir(&cfg.output_dir, cfg.seed);
    let mut outputs = Outputs::default();
    outputs.add(run.join("config.json"), cfg.to_json());
    outputs.add(run.join("gradcheck.csv"), table);
    outputs.commit()?;
    Ok(())
}

pub fn make_sphere(level: u32, out: &Path) -> Result<(), CliError> {
    let mesh: Mesh64 = icosphere(level).map_err(|e| CliError::config(e.to_string()))?;
    let mut outputs = Outputs::default();
    outputs.add(out, obj_bytes(&mesh));
    outputs.commit()?;
    eprintln!("{} vertices, {} faces", mesh.vertex_count(), mesh.face_count());
    Ok(())
}
