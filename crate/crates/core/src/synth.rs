//! Seeded synthetic shape corpus in the layout of MPEG-7 CE-Shape-1 part B:
//! a set of categories with a fixed number of samples each, every sample a
//! randomly rotated, translated, rescaled and boundary-warped copy of its
//! category template.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::shape_io::BinaryShape;

/// Category templates, in generation order.
pub const TEMPLATES: [&str; 23] = [
    "disk", "ellipse", "slim", "square", "bar", "triangle", "pentagon", "star", "gear", "flower",
    "cross", "ring", "thinring", "ell", "tee", "crescent", "halfdisk", "cardioid", "dumbbell",
    "hbeam", "nut", "comb", "key",
];

/// Generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Templates to use, by index into [`TEMPLATES`].
    pub templates: Vec<usize>,
    pub per_category: usize,
    /// Square frame side in pixels.
    pub size: usize,
    /// Nominal template radius in pixels.
    pub radius: f64,
    /// Relative scale jitter, uniform in `[-j, j]`.
    pub scale_jitter: f64,
    /// Maximum translation of the template origin from the frame center.
    pub max_shift: f64,
    /// Amplitude bound of each low-order boundary warp harmonic.
    pub warp: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// 23 categories x 20 samples, the size of the part B test set.
    fn default() -> Self {
        Self {
            templates: (0..TEMPLATES.len()).collect(),
            per_category: 20,
            size: 256,
            radius: 80.0,
            scale_jitter: 0.06,
            max_shift: 20.0,
            warp: 0.03,
            seed: 7,
        }
    }
}

impl SynthConfig {
    /// Three categories (disk, bar, cross) x four samples.
    pub fn toy() -> Self {
        Self {
            templates: vec![0, 4, 10],
            per_category: 4,
            size: 160,
            radius: 50.0,
            ..Self::default()
        }
    }
}

fn regular_polygon(u: f64, v: f64, sides: usize) -> bool {
    let r = u.hypot(v);
    let sector = TAU / sides as f64;
    let phi = v.atan2(u).rem_euclid(sector) - sector / 2.0;
    r * phi.cos() <= (PI / sides as f64).cos()
}

fn in_box(u: f64, v: f64, u0: f64, u1: f64, v0: f64, v1: f64) -> bool {
    u >= u0 && u <= u1 && v >= v0 && v <= v1
}

/// Membership of template `index` at unit-scale coordinates.
pub fn template_contains(index: usize, u: f64, v: f64) -> bool {
    let r = u.hypot(v);
    let phi = v.atan2(u);
    match index {
        0 => r <= 1.0,
        1 => (u / 1.0).powi(2) + (v / 0.6).powi(2) <= 1.0,
        2 => (u / 1.0).powi(2) + (v / 0.35).powi(2) <= 1.0,
        3 => u.abs() <= 0.72 && v.abs() <= 0.72,
        4 => u.abs() <= 1.0 && v.abs() <= 0.4,
        5 => regular_polygon(u, v, 3),
        6 => regular_polygon(u, v, 5),
        7 => r <= 0.6 + 0.4 * (5.0 * phi).cos(),
        8 => r <= 0.85 + 0.15 * (8.0 * phi).cos().signum(),
        9 => r <= 0.7 + 0.3 * (4.0 * phi).cos(),
        10 => (u.abs() <= 0.3 && v.abs() <= 1.0) || (v.abs() <= 0.3 && u.abs() <= 1.0),
        11 => (0.6..=1.0).contains(&r),
        12 => (0.8..=1.0).contains(&r),
        13 => in_box(u, v, -0.8, -0.3, -0.9, 0.9) || in_box(u, v, -0.8, 0.8, 0.4, 0.9),
        14 => in_box(u, v, -0.9, 0.9, -0.9, -0.45) || in_box(u, v, -0.22, 0.22, -0.9, 0.9),
        15 => r <= 1.0 && (u - 0.45).hypot(v) > 0.75,
        16 => r <= 1.0 && v <= 0.0,
        17 => r <= 0.55 * (1.0 + phi.cos()),
        18 => {
            (u - 0.55).hypot(v) <= 0.45
                || (u + 0.55).hypot(v) <= 0.45
                || (u.abs() <= 0.6 && v.abs() <= 0.15)
        }
        19 => in_box(u.abs(), v, 0.5, 0.9, -0.9, 0.9) || (u.abs() <= 0.9 && v.abs() <= 0.15),
        20 => regular_polygon(u, v, 6) && r >= 0.35,
        21 => {
            in_box(u, v, -0.9, 0.9, 0.5, 0.9)
                || [-0.75, 0.0, 0.75]
                    .iter()
                    .any(|c| in_box(u, v, c - 0.15, c + 0.15, -0.9, 0.9))
        }
        22 => {
            (u + 0.5).hypot(v) <= 0.45
                || in_box(u, v, -0.5, 0.95, -0.12, 0.12)
                || in_box(u, v, 0.45, 0.6, 0.0, 0.4)
                || in_box(u, v, 0.75, 0.9, 0.0, 0.3)
        }
        _ => panic!("unknown template index {index}"),
    }
}

struct Pose {
    cx: f64,
    cy: f64,
    radius: f64,
    rotation: f64,
    harmonics: [(f64, f64); 3],
}

impl Pose {
    fn warp(&self, phi: f64) -> f64 {
        1.0 + self
            .harmonics
            .iter()
            .enumerate()
            .map(|(m, &(a, p))| a * ((m + 2) as f64 * phi + p).cos())
            .sum::<f64>()
    }
}

/// Renders one posed sample of a template.
fn render(index: usize, pose: &Pose, size: usize, id: String, category: &str) -> BinaryShape {
    // Templates fit in |u|,|v| <= 1 and the warp adds at most three harmonics.
    let max_warp: f64 = pose.harmonics.iter().map(|h| h.0).sum();
    let reach = pose.radius * std::f64::consts::SQRT_2 * (1.0 + max_warp) + 1.0;
    let reach2 = reach * reach;
    BinaryShape::from_fn(size, size, id, category, |x, y| {
        let dx = x as f64 - pose.cx;
        let dy = pose.cy - y as f64;
        let rho2 = dx * dx + dy * dy;
        if rho2 > reach2 {
            return false;
        }
        let phi = dy.atan2(dx);
        let rho = rho2.sqrt() / (pose.radius * pose.warp(phi));
        let local = phi - pose.rotation;
        template_contains(index, rho * local.cos(), rho * local.sin())
    })
    .expect("positive frame size")
}

/// Generates the corpus: categories in template order, samples numbered from
/// 1 (`disk-1`, `disk-2`, ...).
pub fn corpus(config: &SynthConfig) -> Vec<BinaryShape> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let center = (config.size as f64 - 1.0) / 2.0;
    let warp = config.warp.clamp(0.0, 0.5);
    let mut jobs = Vec::with_capacity(config.templates.len() * config.per_category);
    for &t in &config.templates {
        for i in 0..config.per_category {
            let pose = Pose {
                cx: center + rng.random_range(-1.0..=1.0) * config.max_shift,
                cy: center + rng.random_range(-1.0..=1.0) * config.max_shift,
                radius: config.radius * (1.0 + rng.random_range(-1.0..=1.0) * config.scale_jitter),
                rotation: rng.random::<f64>() * TAU,
                harmonics: std::array::from_fn(|_| {
                    (rng.random::<f64>() * warp, rng.random::<f64>() * TAU)
                }),
            };
            jobs.push((t, i + 1, pose));
        }
    }
    jobs.into_par_iter()
        .map(|(t, n, pose)| {
            let name = TEMPLATES[t];
            render(t, &pose, config.size, format!("{name}-{n}"), name)
        })
        .collect()
}
