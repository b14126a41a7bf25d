//! `rastershape`: index, query and evaluate raster shape vectors.
//!
//! Exit codes: 0 success, 1 internal error, 2 bad input or arguments.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rastershape::descriptor::raster_for;
use rastershape::evaluation::{
    occluded_queries, read_sweep_csv, DEFAULT_K, DEFAULT_OCCLUSION_SPECS, DEFAULT_SAMPLES,
    DEFAULT_SEPARATIONS,
};
use rastershape::matcher::quantize;
use rastershape::shape_io::{list_images, load_image, DEFAULT_OCCLUSION};
use rastershape::synth::{corpus, SynthConfig};
use rastershape::{
    evaluation, extract, occlusion_experiment, query, sweep, BinaryShape, DescriptorDatabase,
    EfficiencyMode, LoadOptions, OcclusionConfig, ScaleMode, SweepConfig, Variant,
};

#[derive(Parser)]
#[command(
    name = "rastershape",
    version,
    about = "Raster-based shape vectors for shape retrieval"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract one descriptor per image and write a database file.
    Index(IndexArgs),
    /// Print the k nearest database records to an image.
    Query(QueryArgs),
    /// Retrieval efficiency and timing over a (separation, samples) grid.
    Sweep(SweepArgs),
    /// Query occluded copies of dataset members against the clean dataset.
    Occlude(OccludeArgs),
    /// Print a sweep CSV as aligned tables.
    Report(ReportArgs),
    /// Write the seeded synthetic corpus as PGM files.
    Synth(SynthArgs),
}

#[derive(Args, Clone, Copy)]
struct LoadArgs {
    /// Gray levels above this value are shape pixels.
    #[arg(long, default_value_t = 127)]
    threshold: u8,
    /// Treat dark pixels as the shape.
    #[arg(long)]
    invert: bool,
    /// Extraction worker threads, 0 = one per core.
    #[arg(long, env = "RASTERSHAPE_THREADS", default_value_t = 0)]
    threads: usize,
}

impl LoadArgs {
    fn options(self) -> LoadOptions {
        LoadOptions {
            threshold: self.threshold,
            invert: self.invert,
        }
    }
}

#[derive(Args)]
struct IndexArgs {
    /// Directory of PBM/PGM images.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    variant: Variant,
    /// Separation between cycles in pixels.
    #[arg(long)]
    sep: u32,
    /// Samples per cycle.
    #[arg(long)]
    samples: u32,
    /// Database file to write.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    db: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K, value_parser = positive)]
    k: usize,
    /// Expected variant; must match the database.
    #[arg(long)]
    variant: Option<Variant>,
    /// Expected separation; must match the database.
    #[arg(long)]
    sep: Option<u32>,
    /// Expected samples per cycle; must match the database.
    #[arg(long)]
    samples: Option<u32>,
    /// Write the query image's raster as `k,j,x,y` CSV.
    #[arg(long)]
    dump_grid: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    variant: Variant,
    /// Comma-separated separations.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEPARATIONS)]
    seps: Vec<u32>,
    /// Comma-separated samples per cycle.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SAMPLES)]
    samples: Vec<u32>,
    #[arg(long, default_value_t = DEFAULT_K, value_parser = positive)]
    k: usize,
    /// Dataset label for the CSV (default: directory name).
    #[arg(long)]
    label: Option<String>,
    /// Score same-category matches over k instead of "at least one".
    #[arg(long)]
    precision: bool,
    /// Fixed cycle count with separation r_max / N instead of fixed pixels.
    #[arg(long, value_name = "N", value_parser = positive)]
    normalized: Option<usize>,
    /// CSV file to write; the tables go to stdout. Without it the CSV goes to
    /// stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct OccludeArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = DEFAULT_OCCLUSION, value_parser = fraction)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2, value_parser = positive)]
    per_category: usize,
    #[arg(long, default_value_t = DEFAULT_K, value_parser = positive)]
    k: usize,
    /// Configuration `variant:sep:samples`, repeatable (default: the four
    /// standard configurations).
    #[arg(long = "spec", value_parser = occlusion_spec)]
    specs: Vec<(Variant, u32, u32)>,
    /// Directory for PGM copies of the occluded queries.
    #[arg(long)]
    write_occluded: Option<PathBuf>,
    /// CSV file to write; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    load: LoadArgs,
}

#[derive(Args)]
struct ReportArgs {
    /// Sweep CSV to render.
    csv: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Small 3-category corpus instead of the 23 x 20 one.
    #[arg(long)]
    toy: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1)"))
    }
}

fn occlusion_spec(s: &str) -> Result<(Variant, u32, u32), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [variant, sep, samples] = parts[..] else {
        return Err(format!("expected variant:sep:samples, got {s:?}"));
    };
    let variant: Variant = variant
        .parse()
        .map_err(|e: rastershape::Error| e.to_string())?;
    let sep = sep.parse().map_err(|_| format!("bad separation {sep:?}"))?;
    let samples = samples
        .parse()
        .map_err(|_| format!("bad samples {samples:?}"))?;
    variant.spec(sep, samples).map_err(|e| e.to_string())?;
    Ok((variant, sep, samples))
}

/// A failure caused by the user's input rather than by the program.
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn bad_input(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(BadInput(msg.into()))
}

/// Loads every image of `dir`; an empty directory is an input error.
fn load_dataset(dir: &Path, opts: LoadOptions) -> anyhow::Result<Vec<BinaryShape>> {
    let paths = list_images(dir)?;
    if paths.is_empty() {
        return Err(bad_input(format!("no input images in {}", dir.display())));
    }
    paths
        .iter()
        .map(|p| load_image(p, opts).map_err(anyhow::Error::from))
        .collect()
}

fn dataset_label(dir: &Path) -> String {
    dir.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string())
}

/// Opens `path` for writing, or stdout when `path` is `None`.
fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn cmd_index(args: IndexArgs) -> anyhow::Result<()> {
    let shapes = load_dataset(&args.dataset, args.load.options())?;
    let db = evaluation::build_database(
        &shapes,
        args.variant,
        args.sep,
        args.samples,
        ScaleMode::FixedPixel,
        args.load.threads,
    )?;
    db.save(&args.out)?;
    println!("indexed {} records into {}", db.len(), args.out.display());
    Ok(())
}

fn cmd_query(args: QueryArgs) -> anyhow::Result<()> {
    let db = DescriptorDatabase::load(&args.db)?;
    let stored = (db.variant(), db.spec());
    let wanted_variant = args.variant.unwrap_or(db.variant());
    let wanted = (
        wanted_variant,
        wanted_variant.spec(
            args.sep.unwrap_or(db.spec().separation_px),
            args.samples.unwrap_or(db.spec().samples_per_cycle),
        )?,
    );
    if wanted != stored {
        return Err(bad_input(format!(
            "spec mismatch: database has {} {}, query requested {} {}",
            stored.0, stored.1, wanted.0, wanted.1
        )));
    }

    let shape = load_image(&args.image, args.load.options())?;
    if let Some(path) = &args.dump_grid {
        let grid = raster_for(&shape, db.spec(), ScaleMode::FixedPixel)?;
        let mut out = output(Some(path))?;
        grid.write_csv(&mut out)?;
        out.flush()?;
    }
    let vector = quantize(&extract(&shape, db.spec(), db.variant())?);
    let matches = query(&db, &vector, args.k, None)?;
    if args.k > matches.len() {
        eprintln!(
            "warning: k = {} but the database holds {} records; printing all of them",
            args.k,
            matches.len()
        );
    }
    let mut out = std::io::stdout().lock();
    for (rank, m) in matches.iter().enumerate() {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}",
            rank + 1,
            m.id,
            m.category,
            m.distance
        )?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let shapes = load_dataset(&args.dataset, args.load.options())?;
    let config = SweepConfig {
        separations: args.seps,
        samples: args.samples,
        k: args.k,
        mode: if args.precision {
            EfficiencyMode::Precision
        } else {
            EfficiencyMode::AnyInTopK
        },
        scale: match args.normalized {
            Some(cycles) => ScaleMode::Normalized { cycles },
            None => ScaleMode::FixedPixel,
        },
        threads: args.load.threads,
    };
    let label = args.label.unwrap_or_else(|| dataset_label(&args.dataset));
    let report = sweep(&shapes, &label, args.variant, &config)?;
    let mut out = output(args.out.as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    if args.out.is_some() {
        print!("{}", report.render_table());
    }
    Ok(())
}

fn cmd_occlude(args: OccludeArgs) -> anyhow::Result<()> {
    let shapes = load_dataset(&args.dataset, args.load.options())?;
    let config = OcclusionConfig {
        per_category: args.per_category,
        fraction: args.fraction,
        seed: args.seed,
        k: args.k,
        threads: args.load.threads,
    };
    if let Some(dir) = &args.write_occluded {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        for q in occluded_queries(&shapes, config.per_category, config.fraction, config.seed)? {
            let path = dir.join(format!("{}.pgm", q.id()));
            std::fs::write(&path, q.to_pgm())
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    let specs = if args.specs.is_empty() {
        DEFAULT_OCCLUSION_SPECS.to_vec()
    } else {
        args.specs
    };
    let report = occlusion_experiment(&shapes, &specs, &config)?;
    let mut out = output(args.out.as_deref())?;
    report.write_csv(&mut out)?;
    out.flush()?;
    if args.out.is_some() {
        println!(
            "occlusion {:.2} (synthetic half-plane cut), {} queries per category",
            config.fraction, config.per_category
        );
        for r in &report.rows {
            println!(
                "{:<13} sep {:>3} samples {:>3}  {:>5.1}%",
                r.variant.as_str(),
                r.separation_px,
                r.samples_per_cycle,
                r.efficiency_pct
            );
        }
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> anyhow::Result<()> {
    let file = File::open(&args.csv).map_err(|source| rastershape::Error::Io {
        path: args.csv.clone(),
        source,
    })?;
    let reports = read_sweep_csv(file)?;
    if reports.is_empty() {
        return Err(bad_input(format!(
            "{} has no data rows",
            args.csv.display()
        )));
    }
    for r in reports {
        print!("{}", r.render_table());
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> anyhow::Result<()> {
    let mut config = if args.toy {
        SynthConfig::toy()
    } else {
        SynthConfig::default()
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let shapes = corpus(&config);
    for s in &shapes {
        let path = args.out.join(format!("{}.pgm", s.id()));
        std::fs::write(&path, s.to_pgm())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    println!("wrote {} images to {}", shapes.len(), args.out.display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.is::<BadInput>() {
        return 2;
    }
    match err.downcast_ref::<rastershape::Error>() {
        Some(rastershape::Error::Csv(_)) | None => 1,
        Some(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Index(a) => cmd_index(a),
        Command::Query(a) => cmd_query(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Occlude(a) => cmd_occlude(a),
        Command::Report(a) => cmd_report(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
