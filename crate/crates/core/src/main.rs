use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use panodepth::depth::{densify, project_sparse_depth, DensifyParams};
use panodepth::geometry::{FrameConvention, PanoGeometry, RigidTransform};
use panodepth::io::{
    load_calibration, read_depth_png, read_metadata, read_rgb_png, write_depth_png, write_metadata, write_rgb_png,
    PanoMetadata, PoseRecord, DEPTH_SCALE_MM,
};
use panodepth::measure::{measure_segment, segment_from_depths, world_distance, MeasuredSegment};
use panodepth::pipeline::{fill_black_hole, nearest_neighbors, stitch_station, StationBundle, StitchParams};
use panodepth::synth::{read_scene_spec, synth_scene, write_scene, SceneSpec};
use panodepth::{Error, Result};

/// Depth-annotated panoramas from LiDAR clouds and multi-camera rigs.
#[derive(Parser, Debug)]
#[command(name = "panodepth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project the point cloud into every camera of a station as sparse depth PNGs.
    Project {
        #[command(flatten)]
        station: StationArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Upsample a sparse depth PNG guided by its color image.
    Densify {
        #[arg(long)]
        sparse: PathBuf,
        #[arg(long)]
        guide: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DensifyParams::default().max_radius)]
        max_radius: f64,
    },
    /// Build the panorama, its depth map and the metadata document.
    Pano {
        #[command(flatten)]
        station: StationArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = PanoGeometry::DEFAULT_WIDTH)]
        pano_width: u32,
        #[arg(long, default_value_t = 0.5)]
        seam_w: f64,
        /// Pyramid levels; derived from the overlap size when omitted.
        #[arg(long)]
        blend_levels: Option<usize>,
        /// Neighbouring stations used to fill the nadir band; 0 disables it.
        #[arg(long, default_value_t = 1)]
        neighbors: usize,
        #[arg(long, default_value_t = DensifyParams::default().max_radius)]
        max_radius: f64,
    },
    /// Distance between two panorama pixels, or between two world points.
    Measure(MeasureArgs),
    /// Generate a synthetic box-room scene.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Scene description in JSON; the built-in room when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct StationArgs {
    /// Calibration document.
    #[arg(long)]
    calib: PathBuf,
    /// Station to process; the first one when omitted.
    #[arg(long)]
    station: Option<String>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "points")]
struct MeasureTargets {
    /// Two panorama pixels `u1 v1 u2 v2`.
    #[arg(long, num_args = 4, value_names = ["U1", "V1", "U2", "V2"], allow_negative_numbers = true)]
    px: Option<Vec<f64>>,
    /// Two world points `x1 y1 z1 x2 y2 z2`.
    #[arg(long, num_args = 6, value_names = ["X1", "Y1", "Z1", "X2", "Y2", "Z2"], allow_negative_numbers = true)]
    world: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[command(flatten)]
    targets: MeasureTargets,
    /// Panorama metadata; supplies the depth map, size and station pose.
    #[arg(long, conflicts_with = "depths")]
    meta: Option<PathBuf>,
    /// Endpoint depths in meters instead of a depth map (identity pose).
    #[arg(long, num_args = 2, value_names = ["D1", "D2"])]
    depths: Option<Vec<f64>>,
    #[arg(long, default_value_t = PanoGeometry::DEFAULT_WIDTH)]
    pano_width: u32,
}

fn select_station(args: &StationArgs) -> Result<(Vec<StationBundle>, usize)> {
    let bundles = load_calibration(&args.calib)?;
    let index = match &args.station {
        None => 0,
        Some(id) => bundles
            .iter()
            .position(|b| &b.station_id == id)
            .ok_or_else(|| Error::InvalidBundle(format!("no station {id:?} in {}", args.calib.display())))?,
    };
    if bundles.is_empty() {
        return Err(Error::InvalidBundle(format!("{} lists no stations", args.calib.display())));
    }
    Ok((bundles, index))
}

fn project(args: &StationArgs, out: &Path) -> Result<()> {
    let (bundles, index) = select_station(args)?;
    let b = &bundles[index];
    for (i, cam) in b.cameras.iter().enumerate() {
        let pose = cam.pose.expect(FrameConvention::CameraFromWorld)?;
        let sparse = project_sparse_depth(&b.cloud, &cam.intrinsics, pose)?;
        let path = out.join(format!("{}_cam{i}_sparse.png", b.station_id));
        write_depth_png(&sparse, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn pano(args: &StationArgs, out: &Path, g: PanoGeometry, params: StitchParams, neighbors: usize) -> Result<()> {
    let (bundles, index) = select_station(args)?;
    let current = &bundles[index];
    let mut composite = stitch_station(current, &g, &params)?;
    if neighbors > 0 {
        let near = nearest_neighbors(current, &bundles, neighbors);
        if near.is_empty() {
            eprintln!("warning: no neighbouring station, the nadir band stays empty");
        } else {
            let report = fill_black_hole(&mut composite, current, &near, &g)?;
            eprintln!("nadir band: {} of {} pixels filled", report.filled, report.band_pixels);
        }
    }
    let id = &current.station_id;
    let rgb_name = format!("{id}_pano.png");
    let depth_name = format!("{id}_depth.png");
    write_rgb_png(&composite.rgb, &out.join(&rgb_name))?;
    write_depth_png(&composite.depth, &out.join(&depth_name))?;
    let meta = PanoMetadata {
        pano_width: g.width,
        pano_height: g.height,
        depth_scale_mm: DEPTH_SCALE_MM,
        h_floor: current.h_floor,
        virtual_pose: PoseRecord::from_pose(&current.virtual_pose),
        station_id: id.clone(),
        depth_path: depth_name,
        rgb_path: rgb_name,
    };
    let meta_path = out.join(format!("{id}_meta.json"));
    write_metadata(&meta, &meta_path)?;
    println!("{}", meta_path.display());
    Ok(())
}

fn print_segment(seg: &MeasuredSegment) {
    println!("{:.3}", seg.length);
    for w in [seg.w1, seg.w2] {
        println!("{:.3} {:.3} {:.3}", w[0], w[1], w[2]);
    }
}

fn measure(args: &MeasureArgs) -> Result<()> {
    if let Some(w) = &args.targets.world {
        println!("{:.3}", world_distance([w[0], w[1], w[2]], [w[3], w[4], w[5]]));
        return Ok(());
    }
    let px = args.targets.px.as_ref().expect("clap enforces one target group");
    let (p1, p2) = ((px[0], px[1]), (px[2], px[3]));
    let seg = match (&args.meta, &args.depths) {
        (Some(meta_path), _) => {
            let meta = read_metadata(meta_path)?;
            let g = PanoGeometry::new(meta.pano_width, meta.pano_height)?;
            let base = meta_path.parent().unwrap_or(Path::new("."));
            let depth = read_depth_png(&base.join(&meta.depth_path))?;
            let pose = meta.virtual_pose.to_pose(FrameConvention::VirtualFromWorld, "metadata")?;
            measure_segment(p1, p2, &depth, &pose.transform, &g)?
        }
        (None, Some(d)) => {
            let g = PanoGeometry::from_width(args.pano_width)?;
            segment_from_depths(p1, d[0], p2, d[1], &RigidTransform::identity(), &g)?
        }
        (None, None) => {
            return Err(Error::InvalidParams("--px needs either --meta or --depths".into()));
        }
    };
    print_segment(&seg);
    Ok(())
}

fn synth(out: &Path, seed: Option<u64>, spec_path: Option<&Path>) -> Result<()> {
    let mut spec = match spec_path {
        Some(p) => read_scene_spec(p)?,
        None => SceneSpec::default(),
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let scene = synth_scene(&spec)?;
    let calib = write_scene(&scene, out)?;
    println!("{}", calib.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Project { station, out } => project(&station, &out),
        Command::Densify { sparse, guide, out, max_radius } => {
            let params = DensifyParams { max_radius, ..DensifyParams::default() };
            let dense = densify(&read_depth_png(&sparse)?, &read_rgb_png(&guide)?, &params)?;
            write_depth_png(&dense, &out)
        }
        Command::Pano { station, out, pano_width, seam_w, blend_levels, neighbors, max_radius } => {
            let g = PanoGeometry::from_width(pano_width)?;
            let mut params = StitchParams { blend_levels, ..StitchParams::default() };
            params.seam.w = seam_w;
            params.densify.max_radius = max_radius;
            pano(&station, &out, g, params, neighbors)
        }
        Command::Measure(args) => measure(&args),
        Command::Synth { out, seed, spec } => synth(&out, seed, spec.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
