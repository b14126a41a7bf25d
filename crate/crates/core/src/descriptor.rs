//! The four normalized shape vectors computed from a raster laid over a shape.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::raster::{self, RasterGrid, RasterKind, RasterSpec};
use crate::shape_io::{centroid, max_radius, BinaryShape, Centroid};

/// Alignment tolerance between a grid center and the shape centroid.
const CENTER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Circular raster, one entry per circle.
    CircRadial,
    /// Circular raster, one entry per radial line.
    CircAngular,
    /// Spiral raster, one entry per full turn.
    SpiralFull,
    /// Spiral raster, one entry per fixed-angle segment.
    SpiralFixed,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::CircRadial,
        Variant::CircAngular,
        Variant::SpiralFull,
        Variant::SpiralFixed,
    ];

    pub fn kind(self) -> RasterKind {
        match self {
            Variant::CircRadial | Variant::CircAngular => RasterKind::Circular,
            Variant::SpiralFull | Variant::SpiralFixed => RasterKind::Spiral,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CircRadial => "circ_radial",
            Variant::CircAngular => "circ_angular",
            Variant::SpiralFull => "spiral_full",
            Variant::SpiralFixed => "spiral_fixed",
        }
    }

    /// Spec of this variant's raster kind.
    pub fn spec(self, separation_px: u32, samples_per_cycle: u32) -> Result<RasterSpec> {
        RasterSpec::new(self.kind(), separation_px, samples_per_cycle)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown variant {s:?} (expected circ_radial, circ_angular, spiral_full or spiral_fixed)"
                ))
            })
    }
}

/// A normalized descriptor; every value lies in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeVector {
    pub variant: Variant,
    pub spec: RasterSpec,
    pub values: Vec<f64>,
}

impl ShapeVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// How the raster size follows the shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    /// Separation is the `RasterSpec` pixel distance; the cycle count
    /// grows with the shape.
    #[default]
    FixedPixel,
    /// Fixed cycle count with separation `r_max / cycles`; a spiral gets one
    /// extra turn as in fixed-pixel mode.
    Normalized { cycles: usize },
}

fn check_kind(variant: Variant, grid: &RasterGrid) -> Result<()> {
    if grid.spec.kind != variant.kind() {
        return Err(Error::WrongRasterKind(format!(
            "{variant} needs a {} raster, got {}",
            variant.kind(),
            grid.spec
        )));
    }
    Ok(())
}

fn check_alignment(shape: &BinaryShape, grid: &RasterGrid) -> Result<()> {
    let c = centroid(shape)?;
    if (c.cx - grid.center.cx).abs() > CENTER_TOLERANCE
        || (c.cy - grid.center.cy).abs() > CENTER_TOLERANCE
    {
        return Err(Error::Misaligned {
            grid_x: grid.center.cx,
            grid_y: grid.center.cy,
            shape_x: c.cx,
            shape_y: c.cy,
        });
    }
    Ok(())
}

fn validated(variant: Variant, shape: &BinaryShape, grid: &RasterGrid) -> Result<()> {
    check_kind(variant, grid)?;
    check_alignment(shape, grid)
}

/// Per-sample membership of a grid's points, in emission order.
pub fn membership(shape: &BinaryShape, grid: &RasterGrid) -> Vec<bool> {
    grid.points
        .iter()
        .map(|p| shape.contains(p.x, p.y))
        .collect()
}

fn per_cycle_fraction(inside: &[bool], n: usize, s: usize) -> Vec<f64> {
    (0..n)
        .map(|k| inside[k * s..(k + 1) * s].iter().filter(|&&b| b).count() as f64 / s as f64)
        .collect()
}

fn compute(variant: Variant, shape: &BinaryShape, grid: &RasterGrid) -> ShapeVector {
    let inside = membership(shape, grid);
    let n = grid.n_cycles;
    let s = grid.samples_per_cycle();
    let values = match variant {
        Variant::CircRadial | Variant::SpiralFull => per_cycle_fraction(&inside, n, s),
        Variant::CircAngular => {
            let mut counts = vec![0usize; s];
            for (p, &hit) in grid.points.iter().zip(&inside) {
                if hit {
                    counts[p.angle] += 1;
                }
            }
            counts
                .into_iter()
                .map(|c| if n == 0 { 0.0 } else { c as f64 / n as f64 })
                .collect()
        }
        Variant::SpiralFixed => inside.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    };
    ShapeVector {
        variant,
        spec: grid.spec,
        values,
    }
}

/// Fraction of each circle's samples that fall inside the shape.
pub fn circular_radial_vector(shape: &BinaryShape, grid: &RasterGrid) -> Result<ShapeVector> {
    validated(Variant::CircRadial, shape, grid)?;
    Ok(compute(Variant::CircRadial, shape, grid))
}

/// Fraction of each radial line's samples that fall inside the shape.
pub fn angular_vector(shape: &BinaryShape, grid: &RasterGrid) -> Result<ShapeVector> {
    validated(Variant::CircAngular, shape, grid)?;
    Ok(compute(Variant::CircAngular, shape, grid))
}

/// Fraction of each spiral turn's samples that fall inside the shape.
pub fn spiral_full_cycle_vector(shape: &BinaryShape, grid: &RasterGrid) -> Result<ShapeVector> {
    validated(Variant::SpiralFull, shape, grid)?;
    Ok(compute(Variant::SpiralFull, shape, grid))
}

/// One 0/1 entry per spiral segment between consecutive radial arms, in
/// order along the spiral. Each segment carries exactly one sample.
pub fn spiral_fixed_angle_vector(shape: &BinaryShape, grid: &RasterGrid) -> Result<ShapeVector> {
    validated(Variant::SpiralFixed, shape, grid)?;
    Ok(compute(Variant::SpiralFixed, shape, grid))
}

/// Builds the raster a variant would use for `shape`, anchored at its
/// centroid and sized to cover it.
pub fn raster_for(shape: &BinaryShape, spec: RasterSpec, mode: ScaleMode) -> Result<RasterGrid> {
    let c: Centroid = centroid(shape)?;
    let r = max_radius(shape, c)?;
    match mode {
        ScaleMode::FixedPixel => Ok(raster::grid(c, spec, raster::cycle_count(spec, r))),
        ScaleMode::Normalized { cycles } => {
            if cycles == 0 {
                return Err(Error::InvalidParameter(
                    "normalized mode needs at least one cycle".into(),
                ));
            }
            let sep = if r.value() > 0.0 {
                r.value() / cycles as f64
            } else {
                1.0
            };
            let n = match spec.kind {
                RasterKind::Circular => cycles,
                RasterKind::Spiral => cycles + 1,
            };
            raster::grid_with_separation(c, spec, sep, n)
        }
    }
}

/// Full pipeline: centroid, max radius, cycle count, grid, vector.
pub fn extract(shape: &BinaryShape, spec: RasterSpec, variant: Variant) -> Result<ShapeVector> {
    extract_with(shape, spec, variant, ScaleMode::FixedPixel)
}

pub fn extract_with(
    shape: &BinaryShape,
    spec: RasterSpec,
    variant: Variant,
    mode: ScaleMode,
) -> Result<ShapeVector> {
    if spec.kind != variant.kind() {
        return Err(Error::WrongRasterKind(format!(
            "{variant} needs a {} raster, got {spec}",
            variant.kind()
        )));
    }
    let grid = raster_for(shape, spec, mode)?;
    Ok(compute(variant, shape, &grid))
}
