//! Retrieval evaluation: average retrieval efficiency, timed query loops,
//! parameter sweeps over (separation, samples) and the occlusion experiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::hint::black_box;
use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;

use crate::descriptor::{extract_with, ScaleMode, Variant};
use crate::error::{Error, Result};
use crate::matcher::{query, DescriptorDatabase, DescriptorRecord};
use crate::shape_io::{occlude, BinaryShape};

/// Table title and cell formatter for [`SweepReport`] rendering.
type Section = (&'static str, fn(&SweepCell) -> String);

pub const DEFAULT_SEPARATIONS: [u32; 4] = [8, 16, 24, 32];
pub const DEFAULT_SAMPLES: [u32; 5] = [4, 6, 8, 12, 24];
pub const DEFAULT_K: usize = 3;

/// The four configurations compared in the occlusion experiment.
pub const DEFAULT_OCCLUSION_SPECS: [(Variant, u32, u32); 4] = [
    (Variant::CircRadial, 24, 24),
    (Variant::SpiralFull, 32, 24),
    (Variant::SpiralFixed, 24, 12),
    (Variant::CircAngular, 16, 8),
];

/// How a query's top-k list is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EfficiencyMode {
    /// A query is recognized when at least one of its k matches shares its
    /// category.
    #[default]
    AnyInTopK,
    /// Same-category matches over `k` per query, averaged.
    Precision,
}

/// Result of one timed query loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timing {
    pub total_time_s: f64,
    pub avg_time_s: f64,
    pub efficiency_pct: f64,
}

fn check_queries(db: &DescriptorDatabase, queries: &[DescriptorRecord]) -> Result<()> {
    for q in queries {
        if q.vector.variant != db.variant() || q.vector.spec != db.spec() {
            return Err(Error::Incompatible {
                left_variant: db.variant(),
                left_spec: db.spec(),
                right_variant: q.vector.variant,
                right_spec: q.vector.spec,
            });
        }
    }
    Ok(())
}

/// Sum of per-query scores: 0/1 for [`EfficiencyMode::AnyInTopK`], the
/// same-category fraction of k for [`EfficiencyMode::Precision`].
fn score_queries(
    db: &DescriptorDatabase,
    queries: &[DescriptorRecord],
    k: usize,
    exclude_self: bool,
    mode: EfficiencyMode,
) -> Result<f64> {
    let mut score = 0.0;
    for q in queries {
        let exclude = exclude_self.then_some(q.id.as_str());
        let hits = query(db, &q.vector, k, exclude)?;
        let relevant = hits.iter().filter(|m| m.category == q.category).count();
        score += match mode {
            EfficiencyMode::AnyInTopK => f64::from(u8::from(relevant > 0)),
            EfficiencyMode::Precision => relevant as f64 / k as f64,
        };
    }
    Ok(score)
}

fn to_percent(score: f64, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * score / n as f64
    }
}

/// Percentage of queries recognized, each query excluding its own record.
pub fn retrieval_efficiency(
    db: &DescriptorDatabase,
    queries: &[DescriptorRecord],
    k: usize,
) -> Result<f64> {
    retrieval_efficiency_with(db, queries, k, true, EfficiencyMode::AnyInTopK)
}

pub fn retrieval_efficiency_with(
    db: &DescriptorDatabase,
    queries: &[DescriptorRecord],
    k: usize,
    exclude_self: bool,
    mode: EfficiencyMode,
) -> Result<f64> {
    check_queries(db, queries)?;
    let score = score_queries(db, queries, k, exclude_self, mode)?;
    Ok(to_percent(score, queries.len()))
}

/// Wall-clock time of the leave-self-out query loop (matching only).
///
/// The loop runs once untimed as warm-up, then once timed on the calling
/// thread.
pub fn timed_retrieval(
    db: &DescriptorDatabase,
    queries: &[DescriptorRecord],
    k: usize,
) -> Result<Timing> {
    timed_retrieval_with(db, queries, k, EfficiencyMode::AnyInTopK)
}

pub fn timed_retrieval_with(
    db: &DescriptorDatabase,
    queries: &[DescriptorRecord],
    k: usize,
    mode: EfficiencyMode,
) -> Result<Timing> {
    check_queries(db, queries)?;
    black_box(score_queries(db, queries, k, true, mode)?);
    let start = Instant::now();
    let score = black_box(score_queries(black_box(db), queries, k, true, mode)?);
    let total_time_s = start.elapsed().as_secs_f64();
    let n = queries.len().max(1);
    Ok(Timing {
        total_time_s,
        avg_time_s: total_time_s / n as f64,
        efficiency_pct: to_percent(score, queries.len()),
    })
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker threads: {e}")))
}

/// Extracts one record per shape, in dataset order. Extraction fans out over
/// `threads` workers (0 = one per core).
pub fn build_records(
    shapes: &[BinaryShape],
    variant: Variant,
    separation_px: u32,
    samples_per_cycle: u32,
    scale: ScaleMode,
    threads: usize,
) -> Result<Vec<DescriptorRecord>> {
    let spec = variant.spec(separation_px, samples_per_cycle)?;
    let pool = thread_pool(threads)?;
    pool.install(|| {
        shapes
            .par_iter()
            .map(|shape| {
                extract_with(shape, spec, variant, scale)
                    .map(|vector| DescriptorRecord {
                        id: shape.id().to_string(),
                        category: shape.category().to_string(),
                        vector,
                    })
                    .map_err(|e| Error::for_item(shape.id(), e))
            })
            .collect()
    })
}

pub fn build_database(
    shapes: &[BinaryShape],
    variant: Variant,
    separation_px: u32,
    samples_per_cycle: u32,
    scale: ScaleMode,
    threads: usize,
) -> Result<DescriptorDatabase> {
    let records = build_records(
        shapes,
        variant,
        separation_px,
        samples_per_cycle,
        scale,
        threads,
    )?;
    DescriptorDatabase::from_records(
        variant.spec(separation_px, samples_per_cycle)?,
        variant,
        records,
    )
}

/// One (separation, samples) cell of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub separation_px: u32,
    pub samples_per_cycle: u32,
    pub efficiency_pct: f64,
    pub total_time_s: f64,
    pub avg_time_s: f64,
}

/// Efficiency and timing over a grid of raster parameters for one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub variant: Variant,
    pub dataset: String,
    pub cells: Vec<SweepCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub separations: Vec<u32>,
    pub samples: Vec<u32>,
    pub k: usize,
    pub mode: EfficiencyMode,
    pub scale: ScaleMode,
    /// Extraction workers, 0 = one per core. Timed loops are always serial.
    pub threads: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            separations: DEFAULT_SEPARATIONS.to_vec(),
            samples: DEFAULT_SAMPLES.to_vec(),
            k: DEFAULT_K,
            mode: EfficiencyMode::AnyInTopK,
            scale: ScaleMode::FixedPixel,
            threads: 0,
        }
    }
}

fn dedup_keep_order(values: &[u32]) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(values.len());
    for &v in values {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Runs leave-self-out retrieval for every (separation, samples) pair.
/// Cells are evaluated one after another.
pub fn sweep(
    dataset: &[BinaryShape],
    label: &str,
    variant: Variant,
    config: &SweepConfig,
) -> Result<SweepReport> {
    if dataset.is_empty() {
        return Err(Error::Dataset("dataset is empty".into()));
    }
    if config.separations.is_empty() || config.samples.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one separation and one sampling rate".into(),
        ));
    }
    if config.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut cells = Vec::new();
    for &d in &dedup_keep_order(&config.separations) {
        for &s in &dedup_keep_order(&config.samples) {
            let db = build_database(dataset, variant, d, s, config.scale, config.threads)?;
            let timing = timed_retrieval_with(&db, db.records(), config.k, config.mode)?;
            cells.push(SweepCell {
                separation_px: d,
                samples_per_cycle: s,
                efficiency_pct: timing.efficiency_pct,
                total_time_s: timing.total_time_s,
                avg_time_s: timing.avg_time_s,
            });
        }
    }
    Ok(SweepReport {
        variant,
        dataset: label.to_string(),
        cells,
    })
}

pub const SWEEP_CSV_HEADER: [&str; 7] = [
    "variant",
    "dataset",
    "separation",
    "samples",
    "efficiency_pct",
    "total_time_s",
    "avg_time_s",
];

pub const OCCLUSION_CSV_HEADER: [&str; 4] = ["variant", "separation", "samples", "efficiency_pct"];

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    if found.iter().ne(expected.iter().copied()) {
        return Err(Error::Format(format!(
            "unexpected CSV header {:?}, expected {:?}",
            found.iter().collect::<Vec<_>>(),
            expected
        )));
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, name: &str) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::Format(format!("bad {name} value {raw:?}")))
}

impl SweepReport {
    pub fn cell(&self, separation_px: u32, samples_per_cycle: u32) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.separation_px == separation_px && c.samples_per_cycle == samples_per_cycle)
    }

    /// Distinct separations in first-seen order.
    pub fn separations(&self) -> Vec<u32> {
        dedup_keep_order(
            &self
                .cells
                .iter()
                .map(|c| c.separation_px)
                .collect::<Vec<_>>(),
        )
    }

    /// Distinct sampling rates in first-seen order.
    pub fn samples(&self) -> Vec<u32> {
        dedup_keep_order(
            &self
                .cells
                .iter()
                .map(|c| c.samples_per_cycle)
                .collect::<Vec<_>>(),
        )
    }

    /// The report as it reads back from CSV (efficiency to 1 decimal, times
    /// to 3 decimals).
    pub fn rounded(&self) -> SweepReport {
        SweepReport {
            variant: self.variant,
            dataset: self.dataset.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| SweepCell {
                    efficiency_pct: round_to(c.efficiency_pct, 1),
                    total_time_s: round_to(c.total_time_s, 3),
                    avg_time_s: round_to(c.avg_time_s, 3),
                    ..*c
                })
                .collect(),
        }
    }

    /// Appends data rows (no header) to a CSV writer.
    fn write_rows<W: Write>(&self, w: &mut csv::Writer<W>) -> Result<()> {
        for c in &self.cells {
            w.write_record([
                self.variant.as_str().to_string(),
                self.dataset.clone(),
                c.separation_px.to_string(),
                c.samples_per_cycle.to_string(),
                format!("{:.1}", c.efficiency_pct),
                format!("{:.3}", c.total_time_s),
                format!("{:.3}", c.avg_time_s),
            ])?;
        }
        Ok(())
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        write_sweep_csv(std::slice::from_ref(self), out)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Aligned text tables (efficiency, then total time) with separations as
    /// rows, largest first, and sampling rates as columns.
    pub fn render_table(&self) -> String {
        let mut seps = self.separations();
        seps.sort_unstable_by(|a, b| b.cmp(a));
        let mut samples = self.samples();
        samples.sort_unstable();

        let mut out = String::new();
        let sections: [Section; 2] = [
            ("average retrieval efficiency (%)", |c| {
                format!("{:.1}", c.efficiency_pct)
            }),
            ("total retrieval time (s)", |c| {
                format!("{:.3}", c.total_time_s)
            }),
        ];
        for (title, fmt_cell) in sections {
            let _ = writeln!(out, "{} on {}: {}", self.variant, self.dataset, title);
            let _ = write!(out, "{:>12}", "sep \\ samples");
            for s in &samples {
                let _ = write!(out, " {s:>9}");
            }
            out.push('\n');
            for d in &seps {
                let _ = write!(out, "{d:>13}");
                for s in &samples {
                    let text = self
                        .cell(*d, *s)
                        .map(fmt_cell)
                        .unwrap_or_else(|| "-".into());
                    let _ = write!(out, " {text:>9}");
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// Writes several reports into one CSV with a single header.
pub fn write_sweep_csv(reports: &[SweepReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_CSV_HEADER)?;
    for r in reports {
        r.write_rows(&mut w)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Parses a sweep CSV; rows are grouped into one report per
/// (variant, dataset) in order of first appearance.
pub fn read_sweep_csv(input: impl Read) -> Result<Vec<SweepReport>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(r.headers()?, &SWEEP_CSV_HEADER)?;
    let mut reports: Vec<SweepReport> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let variant: Variant = rec.get(0).unwrap_or("").parse()?;
        let dataset = rec.get(1).unwrap_or("").to_string();
        let cell = SweepCell {
            separation_px: parse_field(&rec, 2, "separation")?,
            samples_per_cycle: parse_field(&rec, 3, "samples")?,
            efficiency_pct: parse_field(&rec, 4, "efficiency_pct")?,
            total_time_s: parse_field(&rec, 5, "total_time_s")?,
            avg_time_s: parse_field(&rec, 6, "avg_time_s")?,
        };
        match reports
            .iter_mut()
            .find(|rep| rep.variant == variant && rep.dataset == dataset)
        {
            Some(rep) => {
                if rep
                    .cell(cell.separation_px, cell.samples_per_cycle)
                    .is_some()
                {
                    return Err(Error::Format(format!(
                        "duplicate cell ({}, {}) for {variant} on {dataset}",
                        cell.separation_px, cell.samples_per_cycle
                    )));
                }
                rep.cells.push(cell)
            }
            None => reports.push(SweepReport {
                variant,
                dataset,
                cells: vec![cell],
            }),
        }
    }
    Ok(reports)
}

/// Settings of the occlusion experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionConfig {
    /// Shapes drawn from each category, first ones in id order.
    pub per_category: usize,
    pub fraction: f64,
    pub seed: u64,
    pub k: usize,
    pub threads: usize,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            per_category: 2,
            fraction: crate::shape_io::DEFAULT_OCCLUSION,
            seed: 0,
            k: DEFAULT_K,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OcclusionRow {
    pub variant: Variant,
    pub separation_px: u32,
    pub samples_per_cycle: u32,
    pub efficiency_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionReport {
    pub rows: Vec<OcclusionRow>,
}

impl OcclusionReport {
    pub fn efficiency(&self, variant: Variant, separation_px: u32, samples: u32) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| {
                r.variant == variant
                    && r.separation_px == separation_px
                    && r.samples_per_cycle == samples
            })
            .map(|r| r.efficiency_pct)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(OCCLUSION_CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.variant.as_str().to_string(),
                r.separation_px.to_string(),
                r.samples_per_cycle.to_string(),
                format!("{:.1}", r.efficiency_pct),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))
    }

    pub fn read_csv(input: impl Read) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        check_header(r.headers()?, &OCCLUSION_CSV_HEADER)?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            rows.push(OcclusionRow {
                variant: rec.get(0).unwrap_or("").parse()?,
                separation_px: parse_field(&rec, 1, "separation")?,
                samples_per_cycle: parse_field(&rec, 2, "samples")?,
                efficiency_pct: parse_field(&rec, 3, "efficiency_pct")?,
            });
        }
        Ok(Self { rows })
    }
}

/// Picks the first `per_category` shapes (by id) of every category and
/// occludes each with its own derived seed. Categories come out in sorted
/// order.
pub fn occluded_queries(
    dataset: &[BinaryShape],
    per_category: usize,
    fraction: f64,
    seed: u64,
) -> Result<Vec<BinaryShape>> {
    if per_category == 0 {
        return Err(Error::InvalidParameter(
            "per_category must be at least 1".into(),
        ));
    }
    let mut by_category: BTreeMap<&str, Vec<&BinaryShape>> = BTreeMap::new();
    for shape in dataset {
        by_category.entry(shape.category()).or_default().push(shape);
    }
    let mut out = Vec::with_capacity(by_category.len() * per_category);
    for (category, mut members) in by_category {
        if members.len() < per_category {
            return Err(Error::Dataset(format!(
                "category {category:?} has {} shapes, need {per_category}",
                members.len()
            )));
        }
        members.sort_by(|a, b| a.id().cmp(b.id()));
        for shape in members.into_iter().take(per_category) {
            let shape_seed = seed.wrapping_add(out.len() as u64);
            out.push(
                occlude(shape, fraction, shape_seed).map_err(|e| Error::for_item(shape.id(), e))?,
            );
        }
    }
    Ok(out)
}

/// Occluded copies of dataset members queried against the clean database,
/// one efficiency per (variant, separation, samples).
pub fn occlusion_experiment(
    dataset: &[BinaryShape],
    specs: &[(Variant, u32, u32)],
    config: &OcclusionConfig,
) -> Result<OcclusionReport> {
    if dataset.is_empty() {
        return Err(Error::Dataset("dataset is empty".into()));
    }
    let queries = occluded_queries(dataset, config.per_category, config.fraction, config.seed)?;
    let mut rows = Vec::with_capacity(specs.len());
    for &(variant, d, s) in specs {
        let db = build_database(
            dataset,
            variant,
            d,
            s,
            ScaleMode::FixedPixel,
            config.threads,
        )?;
        let q = build_records(
            &queries,
            variant,
            d,
            s,
            ScaleMode::FixedPixel,
            config.threads,
        )?;
        let efficiency_pct =
            retrieval_efficiency_with(&db, &q, config.k, false, EfficiencyMode::AnyInTopK)?;
        rows.push(OcclusionRow {
            variant,
            separation_px: d,
            samples_per_cycle: s,
            efficiency_pct,
        });
    }
    Ok(OcclusionReport { rows })
}
