//! `persboot`: file-based driver for sampling, density estimation,
//! persistence, landscapes and the two bootstrap procedures.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use persboot::bootstrap::{diagram_confidence, landscape_band, BootstrapSummary};
use persboot::density::{kde_evaluate, Grid, GridField, Kernel};
use persboot::filtration::{cubical_superlevel, Direction};
use persboot::io::{
    fmt_f64, read_circles_json, read_diagram_csv, read_field_json, read_json, read_points_csv,
    write_band_csv, write_diagram_csv, write_field_csv, write_field_json, write_json,
    write_landscape_csv, write_points_csv, DiagramMeta,
};
use persboot::landscape::diagram_to_landscape;
use persboot::metric::{bottleneck_matching, significant_points};
use persboot::persistence::{
    compute_persistence_with, rips_persistence, Algorithm, Diagram, PersistenceOptions,
};
use persboot::sampling::{nine_circles, sample_circles, sample_torus, PointCloud, Seed};
use persboot::Error;

#[derive(Parser)]
#[command(
    name = "persboot",
    version,
    about = "Bootstrap inference for persistence diagrams and landscapes"
)]
struct Cli {
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, global = true, env = "PERSBOOT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a point cloud.
    #[command(subcommand)]
    Sample(SampleCmd),
    /// Kernel density estimate on a grid.
    Kde(KdeArgs),
    /// Persistence diagram of a grid field (superlevel) or a point cloud (Rips).
    Persist(PersistArgs),
    /// Bottleneck distance between two diagrams.
    Bottleneck(BottleneckArgs),
    /// Persistence landscape of a diagram.
    Landscape(LandscapeArgs),
    /// KDE superlevel diagram with a bootstrap confidence radius.
    DiagramCi(DiagramCiArgs),
    /// Bootstrap confidence band for the mean landscape.
    LandscapeBand(LandscapeBandArgs),
}

#[derive(Subcommand)]
enum SampleCmd {
    /// Uniform sample from the torus with tube radius r around a circle of radius R.
    Torus {
        #[arg(long = "R", default_value_t = 1.5)]
        big_r: f64,
        #[arg(long = "r", default_value_t = 0.8)]
        small_r: f64,
        #[command(flatten)]
        common: SampleArgs,
    },
    /// Pick a circle uniformly, then a point uniformly on it.
    Circles {
        /// JSON array of {"center": [x, y], "radius": r}; defaults to the nine-circle layout.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        common: SampleArgs,
    },
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct PointsInput {
    /// Points CSV.
    #[arg(long)]
    points: PathBuf,
    /// The points CSV starts with a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct GridArgs {
    /// Grid JSON {"lower": [...], "upper": [...], "resolution": [...]}.
    #[arg(long, conflicts_with_all = ["lower", "upper"])]
    grid: Option<PathBuf>,
    /// Lower corner of a cube grid, shared by all axes.
    #[arg(long, allow_hyphen_values = true, requires = "upper")]
    lower: Option<f64>,
    /// Upper corner of a cube grid, shared by all axes.
    #[arg(long, allow_hyphen_values = true, requires = "lower")]
    upper: Option<f64>,
    /// Cells per axis of a cube grid.
    #[arg(long, default_value_t = 40)]
    resolution: usize,
}

impl GridArgs {
    fn resolve(&self, dim: usize) -> Result<Grid, CliError> {
        let grid = match (&self.grid, self.lower, self.upper) {
            (Some(path), _, _) => {
                let grid: Grid = read_json(open(path)?)?;
                grid.validate()?;
                grid
            }
            (None, Some(lo), Some(hi)) => Grid::cube(dim, lo, hi, self.resolution)?,
            _ => {
                return Err(CliError::Usage(
                    "give either --grid or --lower/--upper".into(),
                ))
            }
        };
        if grid.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: grid.dim(),
            }
            .into());
        }
        Ok(grid)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct KdeArgs {
    #[command(flatten)]
    input: PointsInput,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "gaussian")]
    kernel: Kernel,
    /// Bandwidth.
    #[arg(long)]
    h: f64,
    #[arg(long, value_enum, default_value_t = FieldFormat::Json)]
    format: FieldFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Twist,
    Cohomology,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Twist => Algorithm::Twist,
            AlgorithmArg::Cohomology => Algorithm::Cohomology,
        }
    }
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["field", "points"]))]
struct PersistArgs {
    /// Grid field JSON, filtered by superlevel sets.
    #[arg(long)]
    field: Option<PathBuf>,
    /// Points CSV, filtered by Rips.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    /// Highest simplex dimension of the Rips complex.
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Rips cutoff; also the diagram bound T.
    #[arg(long, default_value_t = 1.0)]
    max_radius: f64,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Twist)]
    algorithm: AlgorithmArg,
    /// Diagram CSV; metadata goes to `<out>.meta.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagramInput {
    /// Direction used when the `.meta.json` sidecar is missing.
    #[arg(long, value_enum, requires = "bound")]
    direction: Option<DirectionArg>,
    /// Bound T used when the `.meta.json` sidecar is missing.
    #[arg(long, requires = "direction")]
    bound: Option<f64>,
    /// Keep only this homology dimension.
    #[arg(long)]
    homology_dim: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Superlevel,
    Sublevel,
}

impl DiagramInput {
    fn read(&self, path: &Path) -> Result<Diagram, CliError> {
        let meta_path = sidecar(path);
        let meta = if meta_path.exists() {
            read_json(open(&meta_path)?)?
        } else {
            match (self.direction, self.bound) {
                (Some(d), Some(bound)) => DiagramMeta {
                    direction: match d {
                        DirectionArg::Superlevel => Direction::Superlevel,
                        DirectionArg::Sublevel => Direction::Sublevel,
                    },
                    bound,
                },
                _ => {
                    return Err(CliError::Usage(format!(
                        "{} not found; pass --direction and --bound",
                        meta_path.display()
                    )))
                }
            }
        };
        let diag = read_diagram_csv(open(path)?, meta)?;
        Ok(match self.homology_dim {
            Some(k) => diag.restrict(k),
            None => diag,
        })
    }
}

#[derive(Args)]
struct BottleneckArgs {
    a: PathBuf,
    b: PathBuf,
    #[command(flatten)]
    input: DiagramInput,
    /// Also write an optimal matching as JSON.
    #[arg(long)]
    matching: Option<PathBuf>,
}

#[derive(Args)]
struct LandscapeArgs {
    #[arg(long)]
    diagram: PathBuf,
    #[command(flatten)]
    input: DiagramInput,
    /// Number of levels.
    #[arg(long = "K", default_value_t = 1)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BootstrapArgs {
    #[arg(long = "B", default_value_t = 1000)]
    b: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include the replicate values in the summary JSON.
    #[arg(long)]
    replicates: bool,
}

impl BootstrapArgs {
    fn summary(&self, s: &BootstrapSummary) -> BootstrapSummary {
        if self.replicates {
            s.clone()
        } else {
            s.without_replicates()
        }
    }
}

#[derive(Args)]
struct DiagramCiArgs {
    #[command(flatten)]
    input: PointsInput,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value = "gaussian")]
    kernel: Kernel,
    #[arg(long)]
    h: f64,
    #[command(flatten)]
    boot: BootstrapArgs,
    /// Diagram CSV of the density estimate.
    #[arg(long)]
    diagram_out: PathBuf,
    /// Summary JSON.
    #[arg(long)]
    summary_out: PathBuf,
    /// Diagram CSV of the points with half-life above the radius.
    #[arg(long)]
    annotate: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["points", "diagrams"]))]
struct LandscapeBandArgs {
    /// Point-cloud CSVs, one per sample.
    #[arg(long, num_args = 1..)]
    points: Vec<PathBuf>,
    /// Diagram CSVs, one per sample.
    #[arg(long, num_args = 1..)]
    diagrams: Vec<PathBuf>,
    #[arg(long)]
    header: bool,
    /// Rips cutoff for point inputs; also the diagram bound T.
    #[arg(long, default_value_t = 1.0)]
    max_radius: f64,
    #[command(flatten)]
    input: DiagramInput,
    /// Number of levels.
    #[arg(long = "K", default_value_t = 1)]
    k: usize,
    #[command(flatten)]
    boot: BootstrapArgs,
    /// Band CSV; with K > 1 level k goes to `<stem>_k<k>.<ext>`.
    #[arg(long)]
    band_out: PathBuf,
    /// Summary JSON, named per level like the band.
    #[arg(long)]
    summary_out: PathBuf,
}

enum CliError {
    Usage(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Lib(Error::Io(e))
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(Error::Io(_)) => 1,
            CliError::Lib(Error::Json(e)) if e.is_io() => 1,
            CliError::Lib(_) => 2,
        }
    }

    fn is_broken_pipe(&self) -> bool {
        matches!(self, CliError::Lib(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe)
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| {
        CliError::Lib(Error::Io(io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        CliError::Lib(Error::Io(io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

fn write_diagram(path: &Path, diag: &Diagram) -> Result<(), CliError> {
    let mut w = create(path)?;
    write_diagram_csv(&mut w, diag)?;
    w.flush()?;
    let mut m = create(&sidecar(path))?;
    write_json(
        &mut m,
        &DiagramMeta {
            direction: diag.direction,
            bound: diag.bound,
        },
    )?;
    m.flush()?;
    Ok(())
}

fn read_points(path: &Path, header: bool) -> Result<PointCloud, CliError> {
    Ok(read_points_csv(open(path)?, header)?)
}

fn per_level(path: &Path, k: usize, depth: usize) -> PathBuf {
    if depth == 1 {
        return path.to_path_buf();
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_k{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}_k{k}"),
    };
    path.with_file_name(name)
}

fn cmd_sample(cmd: SampleCmd) -> Result<(), CliError> {
    let (cloud, common) = match cmd {
        SampleCmd::Torus {
            big_r,
            small_r,
            common,
        } => (
            sample_torus(big_r, small_r, common.n, Seed::new(common.seed))?,
            common,
        ),
        SampleCmd::Circles { spec, common } => {
            let specs = match spec {
                Some(p) => read_circles_json(open(&p)?)?,
                None => nine_circles(),
            };
            (
                sample_circles(&specs, common.n, Seed::new(common.seed))?,
                common,
            )
        }
    };
    let mut w = output(&common.out)?;
    write_points_csv(&mut w, &cloud, common.header)?;
    w.flush()?;
    Ok(())
}

fn cmd_kde(args: KdeArgs) -> Result<(), CliError> {
    let cloud = read_points(&args.input.points, args.input.header)?;
    let grid = args.grid.resolve(cloud.dim())?;
    let field = kde_evaluate(&cloud, &grid, args.kernel, args.h)?;
    let mut w = output(&args.out)?;
    match args.format {
        FieldFormat::Json => write_field_json(&mut w, &field)?,
        FieldFormat::Csv => write_field_csv(&mut w, &field)?,
    }
    w.flush()?;
    Ok(())
}

fn cmd_persist(args: PersistArgs) -> Result<(), CliError> {
    let diag = match (&args.field, &args.points) {
        (Some(path), _) => {
            let field: GridField = read_field_json(open(path)?)?;
            let opts = PersistenceOptions {
                algorithm: args.algorithm.into(),
                bound: None,
            };
            compute_persistence_with(&cubical_superlevel(&field)?, opts)?
        }
        (None, Some(path)) => rips_persistence(
            &read_points(path, args.header)?,
            args.max_dim,
            args.max_radius,
        )?,
        (None, None) => unreachable!("clap requires one source"),
    };
    write_diagram(&args.out, &diag)
}

fn cmd_bottleneck(args: BottleneckArgs) -> Result<(), CliError> {
    let a = args.input.read(&args.a)?;
    let b = args.input.read(&args.b)?;
    let matching = bottleneck_matching(&a, &b)?;
    if let Some(path) = &args.matching {
        let mut w = create(path)?;
        write_json(&mut w, &matching)?;
        w.flush()?;
    }
    let mut out = io::stdout().lock();
    writeln!(out, "{}", fmt_f64(matching.cost))?;
    Ok(())
}

fn cmd_landscape(args: LandscapeArgs) -> Result<(), CliError> {
    let diag = args.input.read(&args.diagram)?;
    let l = diagram_to_landscape(&diag, args.k)?;
    let mut w = output(&args.out)?;
    write_landscape_csv(&mut w, &l)?;
    w.flush()?;
    Ok(())
}

fn cmd_diagram_ci(args: DiagramCiArgs) -> Result<(), CliError> {
    let cloud = read_points(&args.input.points, args.input.header)?;
    let grid = args.grid.resolve(cloud.dim())?;
    let (diag, summary) = diagram_confidence(
        &cloud,
        &grid,
        args.kernel,
        args.h,
        args.boot.b,
        args.boot.alpha,
        Seed::new(args.boot.seed),
    )?;
    write_diagram(&args.diagram_out, &diag)?;
    let mut w = create(&args.summary_out)?;
    write_json(&mut w, &args.boot.summary(&summary))?;
    w.flush()?;
    if let Some(path) = &args.annotate {
        write_diagram(path, &significant_points(&diag, summary.radius)?)?;
    }
    Ok(())
}

fn cmd_landscape_band(args: LandscapeBandArgs) -> Result<(), CliError> {
    let diagrams: Vec<Diagram> = if !args.points.is_empty() {
        let dim = args.input.homology_dim.unwrap_or(1);
        args.points
            .par_iter()
            .map(|p| {
                let cloud = read_points(p, args.header)?;
                Ok(rips_persistence(&cloud, dim + 1, args.max_radius)?.restrict(dim))
            })
            .collect::<Result<_, CliError>>()?
    } else {
        args.diagrams
            .iter()
            .map(|p| args.input.read(p))
            .collect::<Result<_, _>>()?
    };
    let bands = landscape_band(
        &diagrams,
        args.k,
        args.boot.b,
        args.boot.alpha,
        Seed::new(args.boot.seed),
    )?;
    for (i, (band, summary)) in bands.iter().enumerate() {
        let k = i + 1;
        let mut w = create(&per_level(&args.band_out, k, args.k))?;
        write_band_csv(&mut w, band)?;
        w.flush()?;
        let mut s = create(&per_level(&args.summary_out, k, args.k))?;
        write_json(&mut s, &args.boot.summary(summary))?;
        s.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set thread count: {e}")))?;
    }
    match cli.command {
        Command::Sample(cmd) => cmd_sample(cmd),
        Command::Kde(a) => cmd_kde(a),
        Command::Persist(a) => cmd_persist(a),
        Command::Bottleneck(a) => cmd_bottleneck(a),
        Command::Landscape(a) => cmd_landscape(a),
        Command::DiagramCi(a) => cmd_diagram_ci(a),
        Command::LandscapeBand(a) => cmd_landscape_band(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_broken_pipe() => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
