//! Sample-point geometry of circular and Archimedean-spiral rasters.
//!
//! Both rasters are anchored at a centroid. Image coordinates are used (y
//! grows downward) while angles run counter-clockwise in the usual
//! mathematical sense, so a sample at angle `phi` and radius `rho` sits at
//! `(cx + rho cos phi, cy - rho sin phi)`.
//!
//! Offsets from the center are rounded to the same 2^-32 lattice as the
//! centroid. Together with exact quarter-turn symmetry of the direction
//! table this makes integer translation and 90 degree rotation act on sample
//! coordinates without any floating-point drift.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::shape_io::{Centroid, MaxRadius, FRAC_SCALE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RasterKind {
    /// Concentric circles crossed by equally spaced radial lines.
    Circular,
    /// Archimedean spiral crossed by equally spaced radial arms.
    Spiral,
}

impl RasterKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RasterKind::Circular => "circular",
            RasterKind::Spiral => "spiral",
        }
    }
}

impl fmt::Display for RasterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RasterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circular" => Ok(RasterKind::Circular),
            "spiral" => Ok(RasterKind::Spiral),
            other => Err(Error::InvalidParameter(format!(
                "unknown raster kind {other:?} (expected circular or spiral)"
            ))),
        }
    }
}

/// Raster kind plus the two swept parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RasterSpec {
    pub kind: RasterKind,
    /// Radial distance between successive circles or spiral turnings.
    pub separation_px: u32,
    pub samples_per_cycle: u32,
}

impl RasterSpec {
    pub fn new(kind: RasterKind, separation_px: u32, samples_per_cycle: u32) -> Result<Self> {
        if separation_px == 0 {
            return Err(Error::InvalidParameter(
                "separation between cycles must be at least 1 pixel".into(),
            ));
        }
        if samples_per_cycle == 0 {
            return Err(Error::InvalidParameter(
                "samples per cycle must be at least 1".into(),
            ));
        }
        Ok(Self {
            kind,
            separation_px,
            samples_per_cycle,
        })
    }

    pub fn circular(separation_px: u32, samples_per_cycle: u32) -> Result<Self> {
        Self::new(RasterKind::Circular, separation_px, samples_per_cycle)
    }

    pub fn spiral(separation_px: u32, samples_per_cycle: u32) -> Result<Self> {
        Self::new(RasterKind::Spiral, separation_px, samples_per_cycle)
    }

    pub fn samples(&self) -> usize {
        self.samples_per_cycle as usize
    }
}

impl fmt::Display for RasterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "kind={} sep={} samples={}",
            self.kind, self.separation_px, self.samples_per_cycle
        )
    }
}

/// One raster sample: position plus its (cycle, angle) lattice index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplePoint {
    pub x: f64,
    pub y: f64,
    pub cycle: usize,
    pub angle: usize,
}

/// Sample points of a raster, in (cycle, angle) lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    pub spec: RasterSpec,
    pub center: Centroid,
    /// Effective separation. Equals `spec.separation_px` except for
    /// scale-normalized grids.
    pub separation: f64,
    pub n_cycles: usize,
    pub points: Vec<SamplePoint>,
}

impl RasterGrid {
    pub fn samples_per_cycle(&self) -> usize {
        self.spec.samples()
    }

    /// Points of one cycle (circle or spiral turn).
    pub fn cycle(&self, k: usize) -> &[SamplePoint] {
        let s = self.samples_per_cycle();
        &self.points[k * s..(k + 1) * s]
    }

    /// Radius of the sample at lattice index `(k, j)`.
    pub fn radius_of(&self, k: usize, j: usize) -> f64 {
        sample_radius(
            self.spec.kind,
            self.separation,
            self.samples_per_cycle(),
            k,
            j,
        )
    }

    /// Dumps the grid as `k,j,x,y` CSV for plotting.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "k,j,x,y")?;
        for p in &self.points {
            writeln!(out, "{},{},{},{}", p.cycle, p.angle, p.x, p.y)?;
        }
        Ok(())
    }
}

/// Number of cycles needed for a raster to cover a shape of radius `r`.
///
/// Circular: `ceil(r / d)` so the outermost circle reaches `r`. Spiral: one
/// more turn so the last turn's samples reach `r`. Never less than one.
pub fn cycle_count(spec: RasterSpec, r: MaxRadius) -> usize {
    let base = (r.value() / spec.separation_px as f64).ceil().max(0.0) as usize;
    match spec.kind {
        RasterKind::Circular => base.max(1),
        RasterKind::Spiral => base + 1,
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Unit direction `(cos, sin)` of angle `2 pi j / s`.
///
/// The angle is reduced to the first quadrant as a lowest-terms fraction and
/// rotated back by exact sign swaps, so `unit_direction(j + s/4, s)` is
/// exactly the quarter-turn of `unit_direction(j, s)`. Directions at
/// multiples of 30 degrees have their rational component snapped to 0, 1/2
/// or 1.
pub fn unit_direction(j: usize, s: usize) -> (f64, f64) {
    assert!(s > 0, "samples per cycle must be positive");
    let j = j % s;
    let quadrant = (4 * j) / s;
    let mut num = 4 * j - quadrant * s;
    let mut den = 4 * s;
    let g = gcd(num, den);
    num /= g;
    den /= g;

    let (c, sn) = if num == 0 {
        (1.0, 0.0)
    } else {
        let alpha = std::f64::consts::TAU * num as f64 / den as f64;
        if den == 12 * num {
            (alpha.cos(), 0.5)
        } else if den == 6 * num {
            (0.5, alpha.sin())
        } else {
            (alpha.cos(), alpha.sin())
        }
    };
    match quadrant {
        0 => (c, sn),
        1 => (-sn, c),
        2 => (-c, -sn),
        _ => (sn, -c),
    }
}

fn sample_radius(kind: RasterKind, separation: f64, s: usize, k: usize, j: usize) -> f64 {
    match kind {
        RasterKind::Circular => separation * (k + 1) as f64,
        RasterKind::Spiral => {
            // rho = d (k + j/s), from the lowest-terms fraction (ks + j) / s
            let mut num = k * s + j;
            let mut den = s;
            let g = gcd(num, den).max(1);
            num /= g;
            den /= g;
            separation * num as f64 / den as f64
        }
    }
}

#[inline]
fn snap(v: f64) -> f64 {
    (v * FRAC_SCALE).round() / FRAC_SCALE
}

fn build(center: Centroid, spec: RasterSpec, separation: f64, n: usize) -> RasterGrid {
    let s = spec.samples();
    let dirs: Vec<(f64, f64)> = (0..s).map(|j| unit_direction(j, s)).collect();
    let mut points = Vec::with_capacity(n * s);
    for k in 0..n {
        for (j, &(c, sn)) in dirs.iter().enumerate() {
            let rho = sample_radius(spec.kind, separation, s, k, j);
            points.push(SamplePoint {
                x: center.cx + snap(rho * c),
                y: center.cy - snap(rho * sn),
                cycle: k,
                angle: j,
            });
        }
    }
    RasterGrid {
        spec,
        center,
        separation,
        n_cycles: n,
        points,
    }
}

/// Concentric circles of radius `(k + 1) d`, each sampled at `s` angles.
pub fn circular_grid(center: Centroid, spec: RasterSpec, n: usize) -> Result<RasterGrid> {
    if spec.kind != RasterKind::Circular {
        return Err(Error::WrongRasterKind(format!(
            "circular grid requested with {spec}"
        )));
    }
    Ok(build(center, spec, spec.separation_px as f64, n))
}

/// Archimedean spiral `rho = d theta / 2 pi` starting at the center; turn `k`
/// holds the samples at radii `d (k + j / s)`.
pub fn spiral_grid(center: Centroid, spec: RasterSpec, n: usize) -> Result<RasterGrid> {
    if spec.kind != RasterKind::Spiral {
        return Err(Error::WrongRasterKind(format!(
            "spiral grid requested with {spec}"
        )));
    }
    Ok(build(center, spec, spec.separation_px as f64, n))
}

/// Grid of whichever kind `spec` names.
pub fn grid(center: Centroid, spec: RasterSpec, n: usize) -> RasterGrid {
    build(center, spec, spec.separation_px as f64, n)
}

/// Grid with an explicit (possibly fractional) separation, used by the
/// scale-normalized extraction mode.
pub fn grid_with_separation(
    center: Centroid,
    spec: RasterSpec,
    separation: f64,
    n: usize,
) -> Result<RasterGrid> {
    if !(separation.is_finite() && separation > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "separation must be positive, got {separation}"
        )));
    }
    Ok(build(center, spec, separation, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> Centroid {
        Centroid::new(0.0, 0.0)
    }

    fn close(a: (f64, f64), b: (f64, f64)) -> bool {
        (a.0 - b.0).abs() < 1e-9 && (a.1 - b.1).abs() < 1e-9
    }

    #[test]
    fn spec_validation() {
        assert!(RasterSpec::circular(0, 4).is_err());
        assert!(RasterSpec::spiral(8, 0).is_err());
        assert_eq!(
            RasterSpec::spiral(8, 6).unwrap().to_string(),
            "kind=spiral sep=8 samples=6"
        );
    }

    #[test]
    fn cycle_count_examples() {
        let circ32 = RasterSpec::circular(32, 4).unwrap();
        assert_eq!(cycle_count(circ32, MaxRadius(100.0)), 4);
        assert_eq!(cycle_count(circ32, MaxRadius(96.0)), 3);
        let circ8 = RasterSpec::circular(8, 4).unwrap();
        assert_eq!(cycle_count(circ8, MaxRadius(0.0)), 1);
        let sp32 = RasterSpec::spiral(32, 4).unwrap();
        assert_eq!(cycle_count(sp32, MaxRadius(100.0)), 5);
        assert_eq!(cycle_count(sp32, MaxRadius(0.0)), 1);
    }

    #[test]
    fn circular_right_angles() {
        let g = circular_grid(origin(), RasterSpec::circular(10, 4).unwrap(), 2).unwrap();
        let got: Vec<(f64, f64)> = g.points.iter().map(|p| (p.x, p.y)).collect();
        let want = [
            (10.0, 0.0),
            (0.0, -10.0),
            (-10.0, 0.0),
            (0.0, 10.0),
            (20.0, 0.0),
            (0.0, -20.0),
            (-20.0, 0.0),
            (0.0, 20.0),
        ];
        assert_eq!(got, want);
        assert_eq!(g.points[5].cycle, 1);
        assert_eq!(g.points[5].angle, 1);
    }

    #[test]
    fn circular_sixty_degrees() {
        let g = circular_grid(origin(), RasterSpec::circular(8, 6).unwrap(), 1).unwrap();
        let p = g.points[1];
        assert!(close((p.x, p.y), (4.0, -6.92820323)), "{p:?}");
        assert_eq!(p.x, 4.0);
    }

    #[test]
    fn empty_grid() {
        let g = circular_grid(origin(), RasterSpec::circular(8, 6).unwrap(), 0).unwrap();
        assert!(g.points.is_empty());
        assert_eq!(g.n_cycles, 0);
    }

    #[test]
    fn spiral_first_turns() {
        let g = spiral_grid(origin(), RasterSpec::spiral(10, 4).unwrap(), 2).unwrap();
        let got: Vec<(f64, f64)> = g.points.iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(
            &got[..4],
            &[(0.0, 0.0), (0.0, -2.5), (-5.0, 0.0), (0.0, 7.5)]
        );
        assert_eq!(got[4], (10.0, 0.0));
    }

    #[test]
    fn kind_mismatch_rejected() {
        assert!(circular_grid(origin(), RasterSpec::spiral(8, 4).unwrap(), 1).is_err());
        assert!(spiral_grid(origin(), RasterSpec::circular(8, 4).unwrap(), 1).is_err());
    }

    #[test]
    fn directions_have_exact_quarter_turn_symmetry() {
        for s in [4usize, 8, 12, 24, 36, 100] {
            for j in 0..s {
                let (c, sn) = unit_direction(j, s);
                let (c2, s2) = unit_direction(j + s / 4, s);
                assert_eq!((c2, s2), (-sn, c), "s={s} j={j}");
                let a = std::f64::consts::TAU * j as f64 / s as f64;
                assert!(close((c, sn), (a.cos(), a.sin())));
            }
        }
    }

    #[test]
    fn directions_agree_across_refinements() {
        for (s, m) in [(4usize, 2usize), (4, 6), (6, 4), (8, 3), (12, 2)] {
            for j in 0..s {
                assert_eq!(unit_direction(j, s), unit_direction(j * m, s * m));
            }
        }
    }

    #[test]
    fn csv_dump() {
        let g = circular_grid(origin(), RasterSpec::circular(10, 4).unwrap(), 1).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("k,j,x,y"));
        assert_eq!(text.lines().count(), 5);
        assert!(text.contains("0,2,-10,0"));
    }
}
