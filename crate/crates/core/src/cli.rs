//! Command-line driver.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::evolution::{default_vol_tol, evolve_with_tol, EvolutionSchedule, SplitOrder, VelocityModel};
use crate::grid::{GridGeometry, ScalarGrid, Vec3};
use crate::inpaint::{
    format_fractions, inpaint, inpainted_fraction, region_from_seeds, DetailSource, InpaintingProblem,
    DEFAULT_GAMMA, DEFAULT_MAX_OUTER, DEFAULT_STOP_TOL_CELLS,
};
use crate::io::{self, ScalarWidth};
use crate::mesh::export_mesh;
use crate::metrics::{area, center_mass_fraction, detail_histogram, hausdorff, isoperimetric_ratio, volume};
use crate::msr::{imst_cascade, imst_single_level, mst_decompose_with, DisplacementPolicy, MstOptions};
use crate::phantoms::{make_primitive, make_vessel, Damage, Primitive, VesselSpec};

#[derive(Debug, Parser)]
#[command(name = "shape-msr", version, about = "Multiscale level set shape representation and inpainting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a phantom level set grid.
    Gen(GenArgs),
    /// Evolve a grid under a velocity model.
    Evolve(EvolveArgs),
    /// Decompose a grid into a multiscale record.
    Decompose(DecomposeArgs),
    /// Reconstruct a grid from a multiscale record.
    Reconstruct(ReconstructArgs),
    /// Inpaint a damaged shape inside regions around seed points.
    Inpaint(InpaintArgs),
    /// Export the zero level set as an OBJ mesh.
    Mesh(MeshArgs),
    /// Volume, area and Hausdorff table for one or more grids.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Sphere,
    Cube,
    Torus,
    BumpySphere,
    Ellipsoid,
    Tube,
    BentTube,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Width {
    #[value(name = "64")]
    W64,
    #[value(name = "32")]
    W32,
}

impl From<Width> for ScalarWidth {
    fn from(w: Width) -> Self {
        match w {
            Width::W64 => ScalarWidth::W64,
            Width::W32 => ScalarWidth::W32,
        }
    }
}

#[derive(Debug, Args)]
struct DomainArgs {
    /// Nodes per axis.
    #[arg(long, default_value_t = 96)]
    n: usize,
    /// Grid spacing.
    #[arg(long, default_value_t = 1.0)]
    h: f64,
    /// Domain origin `x,y,z`.
    #[arg(long, value_parser = parse_vec3, default_value = "0,0,0")]
    origin: Vec3,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(value_enum)]
    shape: Shape,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    domain: DomainArgs,
    /// Shape center `x,y,z`; defaults to the domain center.
    #[arg(long, value_parser = parse_vec3)]
    center: Option<Vec3>,
    /// Radius (sphere, bumpy sphere, tube cross-section).
    #[arg(long, default_value_t = 16.0)]
    radius: f64,
    #[arg(long, default_value_t = 32.0)]
    side: f64,
    #[arg(long, default_value_t = 24.0)]
    major: f64,
    #[arg(long, default_value_t = 8.0)]
    minor: f64,
    #[arg(long, default_value_t = 0.1)]
    amplitude: f64,
    #[arg(long, default_value_t = 6)]
    frequency: u32,
    #[arg(long, value_parser = parse_vec3, default_value = "30,15,15")]
    semi_axes: Vec3,
    /// Tube endpoints `x,y,z`; default to a span along x through the center.
    #[arg(long, value_parser = parse_vec3)]
    start: Option<Vec3>,
    #[arg(long, value_parser = parse_vec3)]
    end: Option<Vec3>,
    /// Bend radius of the quarter-circle tube.
    #[arg(long, default_value_t = 40.0)]
    bend_radius: f64,
    /// Remove the tube between arclengths `s0,s1`.
    #[arg(long, value_parser = parse_pair)]
    chop: Option<(f64, f64)>,
    /// Narrow the tube between arclengths `s0,s1` to `factor` of its radius: `s0,s1,factor`.
    #[arg(long, value_parser = parse_vec3)]
    stenosis: Option<Vec3>,
    #[arg(long, value_enum, default_value = "64")]
    width: Width,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelName {
    VolumePreserving,
    Mcm,
    Constant,
    ConstantMinusCurvature,
    Combined,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitName {
    CurvatureFirst,
    ConstantFirst,
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "volume-preserving")]
    model: ModelName,
    /// Constant normal speed.
    #[arg(long, default_value_t = 0.5)]
    c: f64,
    /// Curvature weight.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "curvature-first")]
    split: SplitName,
}

impl ModelArgs {
    fn model(&self) -> VelocityModel {
        let m = match self.model {
            ModelName::VolumePreserving => VelocityModel::volume_preserving(),
            ModelName::Mcm => VelocityModel::constant_minus_curvature(0.0, 1.0),
            ModelName::Constant => VelocityModel::constant(self.c),
            ModelName::ConstantMinusCurvature => VelocityModel::constant_minus_curvature(self.c, self.lambda),
            ModelName::Combined => VelocityModel::combined(self.c),
        };
        m.with_split(match self.split {
            SplitName::CurvatureFirst => SplitOrder::CurvatureFirst,
            SplitName::ConstantFirst => SplitOrder::ConstantFirst,
        })
    }
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    /// Number of levels for a uniform schedule.
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// Time per level for a uniform schedule.
    #[arg(long, default_value_t = 4.0)]
    level_time: f64,
    /// Explicit time nodes `0,t1,...,tN`; overrides `--levels` and `--level-time`.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<f64>>,
    /// Evolution substep.
    #[arg(long, default_value_t = 2.0)]
    dt: f64,
}

impl ScheduleArgs {
    fn schedule(&self) -> Result<EvolutionSchedule> {
        match &self.nodes {
            Some(n) => EvolutionSchedule::new(n.clone(), self.dt),
            None => EvolutionSchedule::uniform(self.levels, self.level_time, self.dt),
        }
    }
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Volume tolerance of the threshold search; defaults to half a voxel.
    #[arg(long)]
    vol_tol: Option<f64>,
    /// Also write every intermediate node as `<out>_<i>`.
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value = "64")]
    width: Width,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyName {
    Strict,
    Drop,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    record: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Sample spacing of tracked points in cells.
    #[arg(long, default_value_t = 1.0)]
    spacing: f64,
    #[arg(long)]
    vol_tol: Option<f64>,
    #[arg(long, value_enum, default_value = "strict")]
    policy: PolicyName,
    /// Do not store the per-level fields in the record.
    #[arg(long)]
    no_level_fields: bool,
    /// Histogram bins.
    #[arg(long, default_value_t = 21)]
    bins: usize,
    /// Write one `hist_<level>.txt` per level into this directory.
    #[arg(long)]
    histograms: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReconstructArgs {
    #[arg(long, short)]
    record: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Viscosity of the reverse transport.
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Level to write out.
    #[arg(long, default_value_t = 0)]
    level: usize,
    /// Report single-level reconstructions from the stored next-level field
    /// instead of the cascade.
    #[arg(long)]
    single: bool,
    #[arg(long, value_enum, default_value = "64")]
    width: Width,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SourceName {
    Known,
    All,
}

#[derive(Debug, Args)]
struct InpaintArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Seed file with one `x y z` triple per line.
    #[arg(long, short)]
    seeds: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Region ball radius around each seed; defaults to 8h.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, default_value_t = 12)]
    levels: usize,
    #[arg(long, default_value_t = 4.0)]
    level_time: f64,
    #[arg(long, default_value_t = 2.0)]
    dt: f64,
    /// Expansion speed; defaults to 0.5 h / dt.
    #[arg(long)]
    c: Option<f64>,
    /// Initial viscosity; defaults to 0.5 h² / levels.
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    eps_min: f64,
    /// Stop tolerance; defaults to 0.5h.
    #[arg(long)]
    stop_tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_OUTER)]
    max_outer: usize,
    #[arg(long, value_enum, default_value = "known")]
    details: SourceName,
    /// Write the iteration report here as text.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "64")]
    width: Width,
}

#[derive(Debug, Args)]
struct MeshArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    /// Grids; Hausdorff distances are taken against the first.
    #[arg(required = true)]
    grids: Vec<PathBuf>,
}

fn parse_vec3(s: &str) -> std::result::Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(format!("expected `x,y,z`, got `{s}`")),
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    match s.split_once(',') {
        Some((a, b)) => Ok((
            a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?,
            b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?,
        )),
        None => Err(format!("expected `a,b`, got `{s}`")),
    }
}

fn fmt_vec(v: &Vec3) -> String {
    format!("{},{},{}", v.x, v.y, v.z)
}

fn fmt_nodes(s: &EvolutionSchedule) -> String {
    s.nodes().iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_model(m: &VelocityModel) -> String {
    format!(
        "model={} c={} lambda={} split={:?}",
        io::kind_name(m.kind),
        m.c,
        m.lambda,
        m.split
    )
}

/// Lengths in units of `h`, e.g. `1.12h, 0.74h`.
pub fn format_in_cells(values: &[f64], h: f64) -> String {
    values
        .iter()
        .map(|v| format!("{:.2}h", v / h))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Parses `argv` (program name first) and runs the command. Returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::Evolve(a) => evolve_cmd(a),
        Command::Decompose(a) => decompose(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::Inpaint(a) => inpaint_cmd(a),
        Command::Mesh(a) => mesh(a),
        Command::Metrics(a) => metrics(a),
    }
}

fn gen(a: GenArgs) -> Result<()> {
    let geom = GridGeometry::new([a.domain.n; 3], a.domain.h, a.domain.origin)?;
    let mid = (geom.origin() + geom.max_corner()) / 2.0;
    let center = a.center.unwrap_or(mid);
    let span = geom.max_corner() - geom.origin();
    let damage = match (a.chop, a.stenosis) {
        (Some(_), Some(_)) => {
            return Err(Error::InvalidParameter("--chop and --stenosis are exclusive".into()));
        }
        (Some((start, end)), None) => Some(Damage::Chop { start, end }),
        (None, Some(v)) => Some(Damage::Stenosis {
            start: v.x,
            end: v.y,
            factor: v.z,
        }),
        (None, None) => None,
    };
    let mut params = format!(
        "params: shape={:?} n={} h={} origin={} center={}",
        a.shape,
        a.domain.n,
        a.domain.h,
        fmt_vec(&a.domain.origin),
        fmt_vec(&center)
    );
    let grid = match a.shape {
        Shape::Tube | Shape::BentTube => {
            let mut spec = match a.shape {
                Shape::Tube => {
                    let start = a.start.unwrap_or(Vec3::new(geom.origin().x + 0.25 * span.x, center.y, center.z));
                    let end = a.end.unwrap_or(Vec3::new(geom.origin().x + 0.75 * span.x, center.y, center.z));
                    let _ = write!(params, " start={} end={}", fmt_vec(&start), fmt_vec(&end));
                    VesselSpec::straight(start, end, a.radius)
                }
                _ => {
                    let pivot = Vec3::new(geom.origin().x + 0.25 * span.x, geom.origin().y + 0.25 * span.y, center.z);
                    let _ = write!(params, " pivot={} bend_radius={}", fmt_vec(&pivot), a.bend_radius);
                    VesselSpec::arc(pivot, a.bend_radius, 0.0, std::f64::consts::FRAC_PI_2, 24, a.radius)
                }
            };
            let _ = write!(params, " radius={} length={} damage={:?}", a.radius, spec.length(), damage);
            if let Some(d) = damage {
                spec = spec.with_damage(d);
            }
            println!("{params}");
            make_vessel(&spec, geom)?
        }
        shape => {
            let p = match shape {
                Shape::Sphere => Primitive::Sphere {
                    center,
                    radius: a.radius,
                },
                Shape::Cube => Primitive::Cube { center, side: a.side },
                Shape::Torus => Primitive::Torus {
                    center,
                    major: a.major,
                    minor: a.minor,
                },
                Shape::BumpySphere => Primitive::BumpySphere {
                    center,
                    radius: a.radius,
                    amplitude: a.amplitude,
                    frequency: a.frequency,
                },
                _ => Primitive::Ellipsoid {
                    center,
                    semi_axes: a.semi_axes,
                },
            };
            println!("{params} primitive={p:?}");
            make_primitive(&p, geom)?
        }
    };
    io::save_grid(&a.out, &grid, a.width.into())?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn evolve_cmd(a: EvolveArgs) -> Result<()> {
    let phi = io::load_grid(&a.input)?;
    let model = a.model.model();
    let schedule = a.schedule.schedule()?;
    let vol_tol = a.vol_tol.unwrap_or_else(|| default_vol_tol(phi.spacing()));
    println!(
        "params: {} nodes={} dt={} vol_tol={}",
        fmt_model(&model),
        fmt_nodes(&schedule),
        schedule.dt(),
        vol_tol
    );
    let fields = evolve_with_tol(&phi, &model, &schedule, vol_tol)?;
    let w = a.width.into();
    if a.all {
        for (i, f) in fields.iter().enumerate() {
            let p = io::indexed_path(&a.out, &i.to_string());
            io::save_grid(&p, f, w)?;
            println!("node {i} t={} volume={} wrote {}", schedule.nodes()[i], volume(f), p.display());
        }
    }
    let last = fields.last().ok_or(Error::NoSurface)?;
    io::save_grid(&a.out, last, w)?;
    println!("final volume={} area={} wrote {}", volume(last), area(last), a.out.display());
    Ok(())
}

fn decompose(a: DecomposeArgs) -> Result<()> {
    let phi = io::load_grid(&a.input)?;
    let model = a.model.model();
    let schedule = a.schedule.schedule()?;
    let opts = MstOptions {
        target_spacing_cells: a.spacing,
        vol_tol: a.vol_tol,
        policy: match a.policy {
            PolicyName::Strict => DisplacementPolicy::Strict,
            PolicyName::Drop => DisplacementPolicy::Drop,
        },
        keep_level_fields: !a.no_level_fields,
    };
    println!(
        "params: {} nodes={} dt={} spacing_cells={} vol_tol={} policy={:?} level_fields={} bins={}",
        fmt_model(&model),
        fmt_nodes(&schedule),
        schedule.dt(),
        a.spacing,
        a.vol_tol.unwrap_or_else(|| default_vol_tol(phi.spacing())),
        opts.policy,
        opts.keep_level_fields,
        a.bins
    );
    let rec = mst_decompose_with(&phi, &model, &schedule, opts)?;
    io::save_record(&a.record, &rec)?;
    let h = phi.spacing();
    println!("points={}", rec.initial_points.len());
    if let Some(dir) = &a.histograms {
        std::fs::create_dir_all(dir)?;
    }
    for l in &rec.levels {
        let hist = detail_histogram(&rec, l.level, a.bins)?;
        println!(
            "level {} points={} max|W|={:.3}h center_mass={:.3}",
            l.level,
            l.len(),
            l.max_norm() / h,
            center_mass_fraction(&l.details)
        );
        if let Some(dir) = &a.histograms {
            io::write_text(&dir.join(format!("hist_{}.txt", l.level)), &hist.to_text())?;
        }
    }
    println!("wrote {}", a.record.display());
    Ok(())
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let rec = io::load_record(&a.record)?;
    let n = rec.level_count();
    if a.level >= n {
        return Err(Error::InvalidParameter(format!("level {} must be below {n}", a.level)));
    }
    println!(
        "params: levels={n} eps={} level={} single={} {} nodes={}",
        a.eps,
        a.level,
        a.single,
        fmt_model(&rec.model),
        fmt_nodes(&rec.schedule)
    );
    let h = rec.coarse.spacing();
    let fields: Vec<ScalarGrid> = if a.single {
        (0..n).map(|i| imst_single_level(&rec, i)).collect::<Result<_>>()?
    } else {
        imst_cascade(&rec, a.eps)?
    };
    if rec.level_fields.len() == n {
        let d: Vec<f64> = (0..n)
            .map(|i| hausdorff(&fields[i], &rec.level_fields[i]))
            .collect::<Result<_>>()?;
        println!("hausdorff: {}", format_in_cells(&d, h));
    } else {
        eprintln!("note: record holds no level fields; Hausdorff distances skipped");
    }
    io::save_grid(&a.out, &fields[a.level], a.width.into())?;
    println!("wrote {}", a.out.display());
    Ok(())
}

fn inpaint_cmd(a: InpaintArgs) -> Result<()> {
    let phi = io::load_grid(&a.input)?;
    let h = phi.spacing();
    let seeds = io::load_seeds(&a.seeds)?;
    let radius = a.radius.unwrap_or(8.0 * h);
    let mask = region_from_seeds(&phi, &seeds, radius)?;
    let schedule = EvolutionSchedule::uniform(a.levels, a.level_time, a.dt)?;
    let mut p = InpaintingProblem::new(phi.clone(), mask, schedule);
    if let Some(c) = a.c {
        p.c = c;
    }
    if let Some(e) = a.eps0 {
        p.eps0 = e;
    }
    p.gamma = a.gamma;
    p.eps_min = a.eps_min;
    p.stop_tol = a.stop_tol.unwrap_or(DEFAULT_STOP_TOL_CELLS * h);
    p.max_outer = a.max_outer;
    p.detail_source = match a.details {
        SourceName::Known => DetailSource::KnownOnly,
        SourceName::All => DetailSource::All,
    };
    println!(
        "params: seeds={} radius={} region_voxels={} nodes={} dt={} c={} eps0={} gamma={} eps_min={} stop_tol={} max_outer={} vol_tol={} details={:?}",
        seeds.len(),
        radius,
        p.mask.count(),
        fmt_nodes(&p.schedule),
        p.schedule.dt(),
        p.c,
        p.eps0,
        p.gamma,
        p.eps_min,
        p.stop_tol,
        p.max_outer,
        p.vol_tol,
        p.detail_source
    );
    let (result, report) = inpaint(&p)?;
    let mut text = String::from("iteration eps delta volume\n");
    for it in &report.iterations {
        let _ = writeln!(text, "{} {} {} {}", it.iteration, it.eps, it.delta, it.volume);
    }
    let _ = writeln!(text, "converged {}", report.converged);
    if let Some(f) = &report.failure {
        let _ = writeln!(text, "failure {f}");
    }
    let fraction = inpainted_fraction(&result, &phi, &p.mask)?;
    let _ = writeln!(text, "inpainted {}", format_fractions(&[fraction]));
    print!("{text}");
    if let Some(path) = &a.report {
        io::write_text(path, &text)?;
    }
    io::save_grid(&a.out, &result, a.width.into())?;
    println!("wrote {}", a.out.display());
    if !report.converged {
        eprintln!("warning: inpainting did not converge");
    }
    Ok(())
}

fn mesh(a: MeshArgs) -> Result<()> {
    let phi = io::load_grid(&a.input)?;
    println!("params: input={} out={}", a.input.display(), a.out.display());
    let m = export_mesh(&phi, &a.out)?;
    println!(
        "vertices={} triangles={} area={} euler={}",
        m.vertices.len(),
        m.triangles.len(),
        m.area(),
        m.euler_characteristic()
    );
    Ok(())
}

fn metrics(a: MetricsArgs) -> Result<()> {
    println!("params: grids={}", a.grids.len());
    let grids: Vec<ScalarGrid> = a.grids.iter().map(|p| io::load_grid(p)).collect::<Result<_>>()?;
    println!("grid volume area isoperimetric hausdorff_to_first");
    for (path, g) in a.grids.iter().zip(&grids) {
        let d = hausdorff(g, &grids[0])?;
        println!(
            "{} {} {} {} {}",
            display_name(path),
            volume(g),
            area(g),
            isoperimetric_ratio(g),
            d
        );
    }
    Ok(())
}

fn display_name(p: &Path) -> String {
    p.display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_flags_parse() {
        assert_eq!(parse_vec3("1, 2,3.5").unwrap(), Vec3::new(1.0, 2.0, 3.5));
        assert!(parse_vec3("1,2").is_err());
        assert_eq!(parse_pair("30,42").unwrap(), (30.0, 42.0));
    }

    #[test]
    fn cells_format() {
        assert_eq!(format_in_cells(&[1.12, 0.74], 1.0), "1.12h, 0.74h");
        assert_eq!(format_in_cells(&[0.5], 0.5), "1.00h");
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run_cli(["shape-msr", "gen", "sphere", "--bogus"]), 1);
        assert_eq!(run_cli(["shape-msr", "--help"]), 0);
    }
}
