//! Batch command line: extract, synth, objmc, preview, serve.

use std::ffi::OsString;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use levictl_core::geometry::DepthConvention;
use levictl_core::ingest::{
    encode_mask_png, load_depth, load_depth_sequence, load_image, load_mask, load_masks_vos, ProviderEndpoint,
    ProviderKind, Session,
};
use levictl_core::metrics::{objmc, TrackedTrajectorySet};
use levictl_core::pipeline::{extract_training_signals, synthesize_inference_signals, SessionConfig, TrajectoryDocument};
use levictl_core::signal::{serialize, EncodingMode};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::server::{serve, ServeConfig};

#[derive(Parser, Debug)]
#[command(name = "levictl", version, about = "Depth-aware trajectory control signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Control tensor from annotated VOS masks and per-frame depth.
    Extract(ExtractArgs),
    /// Control tensor from one image, its depth and masks, and trajectories.
    Synth(SynthArgs),
    /// Mean distance between reference and tracked trajectories.
    Objmc(ObjmcArgs),
    /// Rendered instance frames and control points for a trajectory file.
    Preview(PreviewArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Convention {
    LinearRange,
    DisparityInverse,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    MultiPoint,
    SinglePoint,
}

#[derive(Args, Debug)]
struct Tuning {
    /// Control points per unit of mask-area ratio.
    #[arg(long, default_value_t = 100.0)]
    alpha: f64,
    /// Heatmap standard deviation in pixels (default scales with resolution).
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, env = "LEVICTL_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Convention::LinearRange)]
    depth_convention: Convention,
    /// Splat radius in pixels (default scales with resolution).
    #[arg(long)]
    splat_radius: Option<u32>,
    #[arg(long, value_enum, default_value_t = Mode::MultiPoint)]
    mode: Mode,
}

impl Tuning {
    fn convention(&self) -> DepthConvention {
        match self.depth_convention {
            Convention::LinearRange => DepthConvention::default(),
            Convention::DisparityInverse => DepthConvention::disparity_inverse(),
        }
    }
}

#[derive(Args, Debug)]
struct ExtractArgs {
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    depth: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct SessionArgs {
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    depth: PathBuf,
    #[arg(long)]
    masks: PathBuf,
    #[arg(long)]
    traj: PathBuf,
    /// Multiplier on the number of control points.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Frame count; defaults to the trajectory file's `L`.
    #[arg(long)]
    frames: Option<usize>,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    session: SessionArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct PreviewArgs {
    #[command(flatten)]
    session: SessionArgs,
    /// Output directory for frame PNGs, overlay and manifest.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ObjmcArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long = "gen")]
    generated: PathBuf,
    /// Ignore pairs marked invisible in either file.
    #[arg(long)]
    visible_only: bool,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "LEVICTL_BIND", default_value = "127.0.0.1:8080")]
    bind: String,
    /// Sessions kept in memory before the least recently used is dropped.
    #[arg(long, default_value_t = 32)]
    capacity: usize,
    #[arg(long, env = "LEVICTL_SEED", default_value_t = 0)]
    seed: u64,
    /// Base URL of a depth provider.
    #[arg(long, env = "LEVICTL_PROVIDER_DEPTH")]
    depth_provider: Option<String>,
    /// Base URL of a segmentation provider.
    #[arg(long, env = "LEVICTL_PROVIDER_SEG")]
    seg_provider: Option<String>,
    /// Bearer token sent to both providers.
    #[arg(long, env = "LEVICTL_PROVIDER_TOKEN", hide_env_values = true)]
    provider_token: Option<String>,
}

/// Exit 2 for bad input (naming the flag), 1 for everything else.
#[derive(Debug)]
enum CliError {
    Usage { flag: String, message: String },
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

fn usage(flag: &str, message: impl Into<String>) -> CliError {
    CliError::Usage { flag: flag.to_string(), message: message.into() }
}

/// Input errors become usage errors on `flag`; the rest are runtime errors.
fn at(flag: &'static str) -> impl Fn(levictl_core::Error) -> CliError {
    move |e| {
        if e.is_validation() {
            usage(flag, e.to_string())
        } else {
            CliError::Runtime(e.into())
        }
    }
}

/// Config errors name the flag that controls the offending field.
fn config_error(e: levictl_core::Error) -> CliError {
    let flag = match &e {
        levictl_core::Error::Validation { field, .. } => match field.as_str() {
            "alpha" => "--alpha",
            "inference_scale" => "--scale",
            "sigma" => "--sigma",
            "frames" => "--frames",
            _ => "--masks",
        },
        _ => "--masks",
    };
    at(flag)(e)
}

fn build_config(height: u32, width: u32, frames: usize, t: &Tuning, scale: f64) -> Result<SessionConfig, CliError> {
    let mut c = SessionConfig::for_resolution(height, width).map_err(config_error)?;
    c.frames = frames;
    c.policy.alpha = t.alpha;
    c.policy.inference_scale = scale;
    if let Some(s) = t.sigma {
        c.heatmap.sigma = s;
    }
    if let Some(r) = t.splat_radius {
        c.splat_radius = r;
    }
    c.kmeans.seed = t.seed;
    c.depth_convention = t.convention();
    c.mode = match t.mode {
        Mode::MultiPoint => EncodingMode::MultiPoint,
        Mode::SinglePoint => EncodingMode::SinglePoint,
    };
    c.validate().map_err(config_error)?;
    Ok(c)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<serde_json::Value, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(json!({"path": path, "bytes": bytes.len(), "sha256": sha256_hex(bytes)}))
}

fn write_manifest(path: &Path, manifest: serde_json::Value) -> Result<(), CliError> {
    let file = fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    serde_json::to_writer_pretty(BufWriter::new(file), &manifest).context("writing manifest")?;
    Ok(())
}

fn manifest_beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(OsString::from).unwrap_or_default();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn extract(a: &ExtractArgs) -> Result<(), CliError> {
    let masks = load_masks_vos(&a.masks).map_err(at("--masks"))?;
    let depths = load_depth_sequence(&a.depth, a.tuning.convention()).map_err(at("--depth"))?;
    if depths.len() != masks.len() {
        return Err(usage("--depth", format!("{} depth maps for {} mask frames", depths.len(), masks.len())));
    }
    let (h, w) = (masks[0].height(), masks[0].width());
    let cfg = build_config(h, w, masks.len(), &a.tuning, 1.0)?;
    let out = extract_training_signals(&masks, &depths, &cfg).map_err(at("--depth"))?;
    let written = write_output(&a.out, &serialize(&out.tensor))?;
    write_manifest(
        &manifest_beside(&a.out),
        json!({
            "command": "extract",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "inputs": {"masks": a.masks, "depth": a.depth},
            "config": cfg,
            "k_per_frame": out.k_per_frame,
            "diagnostics": out.diagnostics,
            "outputs": [written],
        }),
    )
}

struct Loaded {
    session: Session,
    doc: TrajectoryDocument,
    cfg: SessionConfig,
}

fn load_session(a: &SessionArgs) -> Result<Loaded, CliError> {
    let image = load_image(&a.image).map_err(at("--image"))?;
    let depth = load_depth(&a.depth, a.tuning.convention()).map_err(at("--depth"))?;
    let masks = load_mask(&a.masks).map_err(at("--masks"))?;
    let raw = fs::read(&a.traj).map_err(|e| usage("--traj", format!("{}: {e}", a.traj.display())))?;
    let doc = TrajectoryDocument::from_json(&raw).map_err(at("--traj"))?;
    let problems = doc.check(&masks);
    if !problems.is_empty() {
        let msg = problems.iter().map(|p| format!("{}: {}", p.field, p.message)).collect::<Vec<_>>().join("; ");
        return Err(usage("--traj", msg));
    }
    let cfg = build_config(image.height, image.width, a.frames.unwrap_or(doc.frames), &a.tuning, a.scale)?;
    let session = Session::new("cli", image, depth, masks, cfg.clone()).map_err(|e| {
        let flag = match &e {
            levictl_core::Error::DimensionMismatch { what, .. } if what == "depth" => "--depth",
            levictl_core::Error::DimensionMismatch { what, .. } if what == "image" => "--image",
            _ => "--masks",
        };
        at(flag)(e)
    })?;
    Ok(Loaded { session, doc, cfg })
}

fn session_inputs(a: &SessionArgs) -> serde_json::Value {
    json!({"image": a.image, "depth": a.depth, "masks": a.masks, "traj": a.traj, "scale": a.scale})
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let l = load_session(&a.session)?;
    let out = synthesize_inference_signals(l.session.depth0(), l.session.masks0(), &l.doc.objects, &l.cfg)
        .map_err(at("--traj"))?;
    let written = write_output(&a.out, &serialize(&out.tensor))?;
    write_manifest(
        &manifest_beside(&a.out),
        json!({
            "command": "synth",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "inputs": session_inputs(&a.session),
            "config": l.cfg,
            "k_per_frame": out.k_per_frame,
            "diagnostics": out.diagnostics,
            "outputs": [written],
        }),
    )
}

fn preview(a: &PreviewArgs) -> Result<(), CliError> {
    let l = load_session(&a.session)?;
    let out = synthesize_inference_signals(l.session.depth0(), l.session.masks0(), &l.doc.objects, &l.cfg)
        .map_err(at("--traj"))?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut outputs = Vec::new();
    for (t, frame) in out.previews.iter().enumerate() {
        let png = encode_mask_png(&frame.to_mask(t)).map_err(|e| CliError::Runtime(e.into()))?;
        outputs.push(write_output(&a.out.join(format!("frame_{t:03}.png")), &png)?);
    }
    let overlay = serde_json::to_vec_pretty(&json!({
        "frames": out.control_points.frames,
        "k_per_frame": out.k_per_frame,
    }))
    .context("serializing overlay")?;
    outputs.push(write_output(&a.out.join("overlay.json"), &overlay)?);
    write_manifest(
        &a.out.join("manifest.json"),
        json!({
            "command": "preview",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "inputs": session_inputs(&a.session),
            "config": l.cfg,
            "diagnostics": out.diagnostics,
            "outputs": outputs,
        }),
    )
}

fn read_tracks(path: &Path, flag: &'static str) -> Result<TrackedTrajectorySet, CliError> {
    let raw = fs::read(path).map_err(|e| usage(flag, format!("{}: {e}", path.display())))?;
    TrackedTrajectorySet::from_json(&raw).map_err(at(flag))
}

fn run_objmc(a: &ObjmcArgs) -> Result<(), CliError> {
    let reference = read_tracks(&a.reference, "--ref")?;
    let generated = read_tracks(&a.generated, "--gen")?;
    let value = objmc(&reference, &generated, !a.visible_only).map_err(at("--gen"))?;
    println!("{value:?}");
    Ok(())
}

fn run_serve(a: &ServeArgs) -> Result<(), CliError> {
    let bind = a.bind.parse().map_err(|e| usage("--bind", format!("{}: {e}", a.bind)))?;
    let endpoint = |kind, url: &String| ProviderEndpoint {
        auth_token: a.provider_token.clone(),
        ..ProviderEndpoint::new(kind, url)
    };
    let cfg = ServeConfig {
        bind,
        capacity: a.capacity,
        seed: a.seed,
        depth_provider: a.depth_provider.as_ref().map(|u| endpoint(ProviderKind::Depth, u)),
        seg_provider: a.seg_provider.as_ref().map(|u| endpoint(ProviderKind::Segmentation, u)),
    };
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    rt.block_on(serve(cfg))?;
    Ok(())
}

/// Parse `argv`, run the command and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Extract(a) => extract(a),
        Command::Synth(a) => synth(a),
        Command::Objmc(a) => run_objmc(a),
        Command::Preview(a) => preview(a),
        Command::Serve(a) => run_serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(CliError::Usage { flag, message }) => {
            eprintln!("error: invalid value for {flag}: {message}");
            2
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
