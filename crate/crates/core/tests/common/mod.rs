//! Shared fixtures and independent reference implementations for the
//! integration tests and the acceptance suite.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rastershape::raster::RasterGrid;
use rastershape::{BinaryShape, RasterKind, RasterSpec, Variant};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random blob: a union of 1 to 5 rotated ellipses plus sparse speckle, in a
/// frame of random size. Never empty.
pub fn random_blob(rng: &mut ChaCha8Rng, id: &str) -> BinaryShape {
    let w = rng.random_range(40..140usize);
    let h = rng.random_range(40..140usize);
    let blobs: Vec<(f64, f64, f64, f64, f64)> = (0..rng.random_range(1..=5))
        .map(|_| {
            (
                rng.random_range(0.2..0.8) * w as f64,
                rng.random_range(0.2..0.8) * h as f64,
                rng.random_range(2.0..0.4 * w as f64),
                rng.random_range(2.0..0.4 * h as f64),
                rng.random_range(0.0..std::f64::consts::PI),
            )
        })
        .collect();
    let noise: Vec<bool> = (0..w * h).map(|_| rng.random_bool(0.01)).collect();
    let mut mask: Vec<bool> = (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64, (i / w) as f64);
            noise[i]
                || blobs.iter().any(|&(cx, cy, a, b, t)| {
                    let (dx, dy) = (x - cx, y - cy);
                    let u = dx * t.cos() + dy * t.sin();
                    let v = -dx * t.sin() + dy * t.cos();
                    (u / a).powi(2) + (v / b).powi(2) <= 1.0
                })
        })
        .collect();
    mask[(h / 2) * w + w / 2] = true;
    BinaryShape::new(w, h, mask, id, "blob").unwrap()
}

/// Round half away from zero, written without `f64::round`.
pub fn round_half_away(v: f64) -> i64 {
    let t = (v.abs() + 0.5).floor() as i64;
    if v < 0.0 {
        -t
    } else {
        t
    }
}

/// Nearest-pixel lookup; anything outside the frame is background.
pub fn oracle_contains(shape: &BinaryShape, x: f64, y: f64) -> bool {
    let (px, py) = (round_half_away(x), round_half_away(y));
    if px < 0 || py < 0 || px >= shape.width() as i64 || py >= shape.height() as i64 {
        return false;
    }
    shape.mask()[py as usize * shape.width() + px as usize]
}

/// Descriptor values recomputed from a grid's points by plain counting.
pub fn oracle_values(shape: &BinaryShape, grid: &RasterGrid, variant: Variant) -> Vec<f64> {
    let s = grid.spec.samples_per_cycle as usize;
    let n = grid.n_cycles;
    assert_eq!(grid.points.len(), n * s, "grid point count");
    let mut per_cycle = vec![0usize; n];
    let mut per_ray = vec![0usize; s];
    let mut flags = vec![0.0; n * s];
    for p in &grid.points {
        if oracle_contains(shape, p.x, p.y) {
            per_cycle[p.cycle] += 1;
            per_ray[p.angle] += 1;
            flags[p.cycle * s + p.angle] = 1.0;
        }
    }
    match variant {
        Variant::CircRadial | Variant::SpiralFull => {
            per_cycle.iter().map(|&c| c as f64 / s as f64).collect()
        }
        Variant::CircAngular => per_ray.iter().map(|&c| c as f64 / n as f64).collect(),
        Variant::SpiralFixed => flags,
    }
}

fn round_div(num: i128, den: i128) -> i64 {
    assert!(den > 0);
    let t = (2 * num.abs() + den) / (2 * den);
    (if num < 0 { -t } else { t }) as i64
}

/// Exact `cos(2 pi m / 12)` as halves, when rational.
fn cos_halves(j: usize, s: usize) -> Option<i128> {
    if !(12 * j).is_multiple_of(s) {
        return None;
    }
    match (12 * j / s) % 12 {
        0 => Some(2),
        2 | 10 => Some(1),
        3 | 9 => Some(0),
        4 | 8 => Some(-1),
        6 => Some(-2),
        _ => None,
    }
}

fn sin_halves(j: usize, s: usize) -> Option<i128> {
    if !(12 * j).is_multiple_of(s) {
        return None;
    }
    match (12 * j / s) % 12 {
        0 | 6 => Some(0),
        1 | 5 => Some(1),
        3 => Some(2),
        7 | 11 => Some(-1),
        9 => Some(-2),
        _ => None,
    }
}

/// Straight-line reimplementation of the extraction pipeline: centroid,
/// max radius, cycle count, sample points, membership, aggregation.
///
/// Coordinates with a rational direction component are rounded exactly in
/// integer arithmetic (common denominator `2 s N`); the others use f64.
pub fn oracle_extract(shape: &BinaryShape, spec: RasterSpec, variant: Variant) -> Vec<f64> {
    let pixels: Vec<(i128, i128)> = shape
        .pixels()
        .map(|(x, y)| (x as i128, y as i128))
        .collect();
    let npix = pixels.len() as i128;
    assert!(npix > 0);
    let sx: i128 = pixels.iter().map(|p| p.0).sum();
    let sy: i128 = pixels.iter().map(|p| p.1).sum();

    // r_max^2 * N^2, exactly
    let r2n2 = pixels
        .iter()
        .map(|&(x, y)| (npix * x - sx).pow(2) + (npix * y - sy).pow(2))
        .max()
        .unwrap();
    let d = spec.separation_px as i128;
    let mut base = 0i128;
    while (base * d * npix).pow(2) < r2n2 {
        base += 1;
    }
    let n = match spec.kind {
        RasterKind::Circular => base.max(1),
        RasterKind::Spiral => base + 1,
    } as usize;

    let s = spec.samples_per_cycle as usize;
    let s128 = s as i128;
    let mut inside = vec![false; n * s];
    for k in 0..n {
        for j in 0..s {
            // rho = rho_num / s
            let rho_num = match spec.kind {
                RasterKind::Circular => d * (k as i128 + 1) * s128,
                RasterKind::Spiral => d * (k as i128 * s128 + j as i128),
            };
            let den = 2 * s128 * npix;
            let px = match cos_halves(j, s) {
                Some(c) => round_div(2 * s128 * sx + npix * rho_num * c, den),
                None => {
                    let phi = std::f64::consts::TAU * j as f64 / s as f64;
                    round_half_away(sx as f64 / npix as f64 + rho_num as f64 / s as f64 * phi.cos())
                }
            };
            let py = match sin_halves(j, s) {
                Some(sn) => round_div(2 * s128 * sy - npix * rho_num * sn, den),
                None => {
                    let phi = std::f64::consts::TAU * j as f64 / s as f64;
                    round_half_away(sy as f64 / npix as f64 - rho_num as f64 / s as f64 * phi.sin())
                }
            };
            inside[k * s + j] = px >= 0
                && py >= 0
                && (px as usize) < shape.width()
                && (py as usize) < shape.height()
                && shape.get(px as usize, py as usize);
        }
    }
    let count = |it: &mut dyn Iterator<Item = &bool>| it.filter(|&&b| b).count() as f64;
    match variant {
        Variant::CircRadial | Variant::SpiralFull => (0..n)
            .map(|k| count(&mut inside[k * s..(k + 1) * s].iter()) / s as f64)
            .collect(),
        Variant::CircAngular => (0..s)
            .map(|j| count(&mut inside.iter().skip(j).step_by(s)) / n as f64)
            .collect(),
        Variant::SpiralFixed => inside.iter().map(|&b| f64::from(u8::from(b))).collect(),
    }
}

/// Copy of `shape` moved by `(dx, dy)` inside a frame grown by `pad` on every
/// side.
pub fn translate(shape: &BinaryShape, pad: usize, dx: i64, dy: i64) -> BinaryShape {
    let (w, h) = (shape.width() + 2 * pad, shape.height() + 2 * pad);
    let pixels: Vec<(usize, usize)> = shape
        .pixels()
        .map(|(x, y)| {
            (
                (x as i64 + pad as i64 + dx) as usize,
                (y as i64 + pad as i64 + dy) as usize,
            )
        })
        .collect();
    BinaryShape::from_pixels(w, h, &pixels, shape.id(), shape.category()).unwrap()
}

/// Rotation of a square mask by 90 degrees counter-clockwise (as seen on
/// screen): pixel `(x, y)` moves to `(y, w - 1 - x)`.
pub fn rotate90(shape: &BinaryShape) -> BinaryShape {
    assert_eq!(shape.width(), shape.height());
    let w = shape.width();
    let pixels: Vec<(usize, usize)> = shape.pixels().map(|(x, y)| (y, w - 1 - x)).collect();
    BinaryShape::from_pixels(w, w, &pixels, shape.id(), shape.category()).unwrap()
}

/// Filled disk of radius `r` centered in a square frame.
pub fn disk(r: f64) -> BinaryShape {
    let size = 2 * (r as usize) + 41;
    let c = (size / 2) as f64;
    BinaryShape::from_fn(size, size, "disk-1", "disk", |x, y| {
        (x as f64 - c).powi(2) + (y as f64 - c).powi(2) <= r * r
    })
    .unwrap()
}

/// Annulus `r0 <= rho <= r1` centered in a square frame.
pub fn annulus(r0: f64, r1: f64) -> BinaryShape {
    let size = 2 * (r1 as usize) + 41;
    let c = (size / 2) as f64;
    BinaryShape::from_fn(size, size, "ring-1", "ring", |x, y| {
        let d2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2);
        d2 >= r0 * r0 && d2 <= r1 * r1
    })
    .unwrap()
}
