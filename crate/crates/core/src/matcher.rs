//! Descriptor databases, Euclidean distance and top-k linear-scan queries.
//!
//! On-disk format (UTF-8, one line per record):
//!
//! ```text
//! RASTERDB v1 kind=circular variant=circ_radial sep=8 samples=24
//! apple-1\tapple\t3\t1.000000,0.958333,0.250000
//! ```

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::descriptor::{ShapeVector, Variant};
use crate::error::{Error, Result};
use crate::raster::{RasterKind, RasterSpec};

const MAGIC: &str = "RASTERDB";
const VERSION: &str = "v1";
/// Decimal places of stored values.
pub const STORED_DECIMALS: usize = 6;

/// A value as it reads back from a database file.
pub fn as_stored(v: f64) -> f64 {
    format!("{v:.STORED_DECIMALS$}")
        .parse()
        .expect("formatted float parses")
}

/// Rounds every value to the stored precision, so a vector extracted from a
/// database member's image is at distance 0 from its reloaded record.
pub fn quantize(vector: &ShapeVector) -> ShapeVector {
    ShapeVector {
        values: vector.values.iter().map(|&v| as_stored(v)).collect(),
        ..vector.clone()
    }
}

/// One labeled descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorRecord {
    pub id: String,
    pub category: String,
    pub vector: ShapeVector,
}

/// Records that share one raster spec and variant. Ids are unique.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorDatabase {
    spec: RasterSpec,
    variant: Variant,
    records: Vec<DescriptorRecord>,
    by_id: HashMap<String, usize>,
}

/// A query hit.
#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub id: String,
    pub category: String,
    pub distance: f64,
}

fn check_compatible(
    left_variant: Variant,
    left_spec: RasterSpec,
    right_variant: Variant,
    right_spec: RasterSpec,
) -> Result<()> {
    if left_variant != right_variant || left_spec != right_spec {
        return Err(Error::Incompatible {
            left_variant,
            left_spec,
            right_variant,
            right_spec,
        });
    }
    Ok(())
}

/// Euclidean distance of two value sequences, the shorter one zero-padded.
#[inline]
pub fn padded_distance(a: &[f64], b: &[f64]) -> f64 {
    let common = a.len().min(b.len());
    let mut sum = 0.0;
    for i in 0..common {
        let d = a[i] - b[i];
        sum += d * d;
    }
    let tail = if a.len() > common {
        &a[common..]
    } else {
        &b[common..]
    };
    for v in tail {
        sum += v * v;
    }
    sum.sqrt()
}

/// Euclidean distance between two vectors of the same variant and spec.
/// Lengths may differ; the shorter vector is zero-padded.
pub fn distance(a: &ShapeVector, b: &ShapeVector) -> Result<f64> {
    check_compatible(a.variant, a.spec, b.variant, b.spec)?;
    Ok(padded_distance(&a.values, &b.values))
}

impl DescriptorDatabase {
    pub fn new(spec: RasterSpec, variant: Variant) -> Result<Self> {
        if spec.kind != variant.kind() {
            return Err(Error::WrongRasterKind(format!(
                "{variant} needs a {} raster, got {spec}",
                variant.kind()
            )));
        }
        Ok(Self {
            spec,
            variant,
            records: Vec::new(),
            by_id: HashMap::new(),
        })
    }

    /// Builds a database from records, checking the usual invariants.
    pub fn from_records(
        spec: RasterSpec,
        variant: Variant,
        records: impl IntoIterator<Item = DescriptorRecord>,
    ) -> Result<Self> {
        let mut db = Self::new(spec, variant)?;
        for r in records {
            db.push(r)?;
        }
        Ok(db)
    }

    pub fn push(&mut self, record: DescriptorRecord) -> Result<()> {
        check_compatible(
            self.variant,
            self.spec,
            record.vector.variant,
            record.vector.spec,
        )?;
        if self.by_id.contains_key(&record.id) {
            return Err(Error::InvalidParameter(format!(
                "duplicate record id {:?}",
                record.id
            )));
        }
        self.by_id.insert(record.id.clone(), self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn spec(&self) -> RasterSpec {
        self.spec
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn records(&self) -> &[DescriptorRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&DescriptorRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    /// Header line of the on-disk format.
    pub fn header(&self) -> String {
        format!(
            "{MAGIC} {VERSION} kind={} variant={} sep={} samples={}",
            self.spec.kind, self.variant, self.spec.separation_px, self.spec.samples_per_cycle
        )
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<()> {
        let io = |e| Error::io("<database>", e);
        writeln!(out, "{}", self.header()).map_err(io)?;
        for r in &self.records {
            for field in [&r.id, &r.category] {
                if field.is_empty() || field.contains(['\t', '\n', '\r']) {
                    return Err(Error::InvalidParameter(format!(
                        "record field {field:?} cannot be stored (empty or contains tab/newline)"
                    )));
                }
            }
            let values: Vec<String> = r
                .vector
                .values
                .iter()
                .map(|v| format!("{v:.STORED_DECIMALS$}"))
                .collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                r.id,
                r.category,
                r.vector.values.len(),
                values.join(",")
            )
            .map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| match e {
            Error::Io { source, .. } => Error::io(path, source),
            other => other,
        })
    }

    pub fn read_from(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(line) => line.map_err(|e| Error::io("<database>", e))?,
            None => return Err(Error::Format("empty database file".into())),
        };
        let (spec, variant) = parse_header(&header)?;
        let mut db = Self::new(spec, variant)?;
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io("<database>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let record = parse_record(&line, spec, variant)
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?;
            db.push(record)
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 2)))?;
        }
        Ok(db)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}

fn parse_header(line: &str) -> Result<(RasterSpec, Variant)> {
    let mut tokens = line.split_whitespace();
    if tokens.next() != Some(MAGIC) {
        return Err(Error::Format(format!(
            "not a raster descriptor database (header {line:?})"
        )));
    }
    match tokens.next() {
        Some(VERSION) => {}
        other => {
            return Err(Error::Version {
                found: other.unwrap_or("").to_string(),
            })
        }
    }
    let (mut kind, mut variant, mut sep, mut samples) = (None, None, None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("malformed header field {tok:?}")))?;
        let bad = |_| Error::Format(format!("malformed header field {tok:?}"));
        match key {
            "kind" => kind = Some(value.parse::<RasterKind>()?),
            "variant" => variant = Some(value.parse::<Variant>()?),
            "sep" => sep = Some(value.parse::<u32>().map_err(bad)?),
            "samples" => samples = Some(value.parse::<u32>().map_err(bad)?),
            _ => return Err(Error::Format(format!("unknown header field {key:?}"))),
        }
    }
    let missing = |name: &str| Error::Format(format!("header is missing {name}="));
    let kind = kind.ok_or_else(|| missing("kind"))?;
    let variant = variant.ok_or_else(|| missing("variant"))?;
    let spec = RasterSpec::new(
        kind,
        sep.ok_or_else(|| missing("sep"))?,
        samples.ok_or_else(|| missing("samples"))?,
    )?;
    Ok((spec, variant))
}

fn parse_record(line: &str, spec: RasterSpec, variant: Variant) -> Result<DescriptorRecord> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(Error::Format(format!(
            "expected 4 tab-separated fields, found {}",
            fields.len()
        )));
    }
    let len: usize = fields[2]
        .parse()
        .map_err(|_| Error::Format(format!("bad length {:?}", fields[2])))?;
    let values: Vec<f64> = if fields[3].is_empty() {
        Vec::new()
    } else {
        fields[3]
            .split(',')
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Format(format!("bad value {v:?}")))
            })
            .collect::<Result<_>>()?
    };
    if values.len() != len {
        return Err(Error::Format(format!(
            "declared length {len} but found {} values",
            values.len()
        )));
    }
    Ok(DescriptorRecord {
        id: fields[0].to_string(),
        category: fields[1].to_string(),
        vector: ShapeVector {
            variant,
            spec,
            values,
        },
    })
}

/// Top-k nearest records by Euclidean distance.
///
/// Results are ascending by distance with ties broken by record order. The
/// record whose id equals `exclude_id` is skipped. Fewer than `k` matches are
/// returned only when the database holds fewer candidates.
pub fn query(
    db: &DescriptorDatabase,
    q: &ShapeVector,
    k: usize,
    exclude_id: Option<&str>,
) -> Result<Vec<Match>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    check_compatible(db.variant, db.spec, q.variant, q.spec)?;
    let excluded = exclude_id.and_then(|id| db.by_id.get(id).copied());
    let candidates = db.len() - usize::from(excluded.is_some());
    if candidates == 0 {
        return Err(Error::EmptyDatabase);
    }

    // Sorted by (distance, index); indices arrive in increasing order so an
    // equal distance always lands after the incumbents.
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, r) in db.records.iter().enumerate() {
        if Some(i) == excluded {
            continue;
        }
        let d = padded_distance(&q.values, &r.vector.values);
        if best.len() == k && d >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= d);
        best.insert(pos, (d, i));
        best.truncate(k);
    }

    Ok(best
        .into_iter()
        .map(|(distance, i)| Match {
            id: db.records[i].id.clone(),
            category: db.records[i].category.clone(),
            distance,
        })
        .collect())
}
