//! Shape ingestion and geometry: binarized masks, centroid, max radius,
//! sub-pixel membership and synthetic occlusion.

pub mod pnm;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use pnm::PnmImage;

/// Fractional bits kept for centroid coordinates. Coordinates live on a
/// 2^-32 lattice so that integer translations and quarter-turn rotations act
/// on them without rounding.
pub(crate) const FRAC_BITS: u32 = 32;
pub(crate) const FRAC_SCALE: f64 = (1u64 << FRAC_BITS) as f64;

/// A binary pixel mask (`true` = shape pixel) with its identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryShape {
    width: usize,
    height: usize,
    mask: Vec<bool>,
    id: String,
    category: String,
}

impl BinaryShape {
    /// Builds a shape from a row-major mask. An all-background mask is
    /// accepted here; descriptor operations reject it later.
    pub fn new(
        width: usize,
        height: usize,
        mask: Vec<bool>,
        id: impl Into<String>,
        category: impl Into<String>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "shape dimensions must be positive, got {width}x{height}"
            )));
        }
        if mask.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "mask has {} entries, expected {}",
                mask.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            mask,
            id: id.into(),
            category: category.into(),
        })
    }

    /// Builds a shape by evaluating `inside(x, y)` on every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        id: impl Into<String>,
        category: impl Into<String>,
        mut inside: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut mask = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                mask.push(inside(x, y));
            }
        }
        Self::new(width, height, mask, id, category)
    }

    /// Builds a shape from a list of foreground pixel coordinates.
    pub fn from_pixels(
        width: usize,
        height: usize,
        pixels: &[(usize, usize)],
        id: impl Into<String>,
        category: impl Into<String>,
    ) -> Result<Self> {
        let mut mask = vec![false; width * height];
        for &(x, y) in pixels {
            if x >= width || y >= height {
                return Err(Error::InvalidParameter(format!(
                    "pixel ({x}, {y}) outside {width}x{height} frame"
                )));
            }
            mask[y * width + x] = true;
        }
        Self::new(width, height, mask, id, category)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn with_identity(mut self, id: impl Into<String>, category: impl Into<String>) -> Self {
        self.id = id.into();
        self.category = category.into();
        self
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.mask[y * self.width + x]
    }

    pub fn pixel_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// Iterates foreground pixel coordinates in row-major order.
    pub fn pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Nearest-pixel membership test for a sub-pixel location.
    ///
    /// Coordinates are rounded half away from zero; anything outside the
    /// frame is background.
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let rx = x.round();
        let ry = y.round();
        if !(rx >= 0.0 && ry >= 0.0) || rx >= self.width as f64 || ry >= self.height as f64 {
            return false;
        }
        self.get(rx as usize, ry as usize)
    }

    /// Encodes the mask as a raw PGM (shape = 255, background = 0).
    pub fn to_pgm(&self) -> Vec<u8> {
        let samples: Vec<u8> = self.mask.iter().map(|&b| if b { 255 } else { 0 }).collect();
        pnm::encode_pgm(self.width, self.height, &samples)
    }

    /// Encodes the mask as a raw PBM (shape = set bit).
    pub fn to_pbm(&self) -> Vec<u8> {
        pnm::encode_pbm(self.width, self.height, &self.mask)
    }
}

/// Sub-pixel centroid of a shape; the raster anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Centroid {
    pub cx: f64,
    pub cy: f64,
}

impl Centroid {
    pub fn new(cx: f64, cy: f64) -> Self {
        Self { cx, cy }
    }
}

/// Farthest distance from the centroid to any shape-pixel center.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MaxRadius(pub f64);

impl MaxRadius {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Binarization settings for [`load_image`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Gray levels strictly above this value are foreground.
    pub threshold: u8,
    /// Swap foreground and background after thresholding.
    pub invert: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            threshold: 127,
            invert: false,
        }
    }
}

/// Splits an MPEG-7 style stem (`apple-3`) into its category (`apple`).
pub fn category_from_stem(stem: &str) -> &str {
    match stem.rfind('-') {
        Some(i) => &stem[..i],
        None => stem,
    }
}

/// Binarizes a decoded netpbm image.
///
/// Gray samples are rescaled to 0..=255 before the threshold is applied, so
/// the threshold means the same thing for any maxval.
pub fn binarize(
    image: &PnmImage,
    opts: LoadOptions,
    id: impl Into<String>,
    category: impl Into<String>,
) -> Result<BinaryShape> {
    let (width, height, mask) = match image {
        PnmImage::Bitmap {
            width,
            height,
            bits,
        } => (
            *width,
            *height,
            bits.iter().map(|&b| b != opts.invert).collect(),
        ),
        PnmImage::Graymap {
            width,
            height,
            maxval,
            samples,
        } => {
            let maxval = *maxval as u32;
            let mask = samples
                .iter()
                .map(|&v| {
                    let level = (v as u32 * 255 + maxval / 2) / maxval;
                    (level > opts.threshold as u32) != opts.invert
                })
                .collect();
            (*width, *height, mask)
        }
    };
    BinaryShape::new(width, height, mask, id, category)
}

/// Reads a PBM/PGM file into a binary shape. The id is the file stem and the
/// category is the stem up to its last `-`.
pub fn load_image(path: impl AsRef<Path>, opts: LoadOptions) -> Result<BinaryShape> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let image = pnm::decode(&data).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let category = category_from_stem(&stem).to_string();
    binarize(&image, opts, stem, category)
}

/// Lists the `.pbm`/`.pgm`/`.pnm` files of a directory, sorted by file name.
pub fn list_images(dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| matches!(e.to_ascii_lowercase().as_str(), "pbm" | "pgm" | "pnm"))
            .unwrap_or(false);
        if is_image && path.is_file() {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Loads every image of a directory, in file-name order.
pub fn load_dir(dir: impl AsRef<Path>, opts: LoadOptions) -> Result<Vec<BinaryShape>> {
    list_images(dir)?
        .into_iter()
        .map(|p| load_image(p, opts))
        .collect()
}

/// Arithmetic mean of the foreground pixel coordinates.
///
/// The integer part is exact and the fractional part is rounded to the
/// nearest multiple of 2^-32, which makes the result exactly
/// translation-equivariant.
pub fn centroid(shape: &BinaryShape) -> Result<Centroid> {
    let (mut sx, mut sy, mut n) = (0u64, 0u64, 0u64);
    for (x, y) in shape.pixels() {
        sx += x as u64;
        sy += y as u64;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyShape);
    }
    Ok(Centroid {
        cx: lattice_mean(sx, n),
        cy: lattice_mean(sy, n),
    })
}

fn lattice_mean(sum: u64, n: u64) -> f64 {
    let whole = sum / n;
    let rem = (sum % n) as u128;
    let n128 = n as u128;
    let frac = ((rem << FRAC_BITS) + n128 / 2) / n128;
    whole as f64 + frac as f64 / FRAC_SCALE
}

/// Largest Euclidean distance from `c` to a foreground pixel center.
pub fn max_radius(shape: &BinaryShape, c: Centroid) -> Result<MaxRadius> {
    let mut best: Option<f64> = None;
    for (x, y) in shape.pixels() {
        let dx = x as f64 - c.cx;
        let dy = y as f64 - c.cy;
        let d2 = dx * dx + dy * dy;
        best = Some(best.map_or(d2, |b: f64| b.max(d2)));
    }
    best.map(|d2| MaxRadius(d2.sqrt())).ok_or(Error::EmptyShape)
}

/// Default erased fraction for synthetic occlusion.
pub const DEFAULT_OCCLUSION: f64 = 0.2;

/// Erases the part of a shape lying beyond a seeded straight cut.
///
/// A direction is drawn from the seed; pixels are ranked by their projection
/// onto it and the cut is placed between two distinct projection values so
/// that the erased count is as close as possible to `ceil(fraction * N)`.
/// The result keeps the category and gets `-occ` appended to its id.
pub fn occlude(shape: &BinaryShape, fraction: f64, seed: u64) -> Result<BinaryShape> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::InvalidParameter(format!(
            "occlusion fraction must be in [0, 1), got {fraction}"
        )));
    }
    let c = centroid(shape)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    let (uy, ux) = theta.sin_cos();

    let mut proj: Vec<(f64, usize)> = shape
        .pixels()
        .map(|(x, y)| {
            let p = (x as f64 - c.cx) * ux + (y as f64 - c.cy) * uy;
            (p, y * shape.width + x)
        })
        .collect();
    let n = proj.len();
    let target = ((fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;

    // Farthest along the direction first.
    proj.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    // A cut can only fall between two distinct projection values.
    let mut erase = 0usize;
    let mut best_gap = target;
    for cut in 1..=n {
        let separable = cut == n || proj[cut - 1].0 > proj[cut].0;
        if !separable {
            continue;
        }
        let gap = cut.abs_diff(target);
        if gap < best_gap {
            best_gap = gap;
            erase = cut;
        }
        if cut >= target {
            break;
        }
    }

    let mut mask = shape.mask.clone();
    for &(_, idx) in &proj[..erase] {
        mask[idx] = false;
    }
    BinaryShape::new(
        shape.width,
        shape.height,
        mask,
        format!("{}-occ", shape.id),
        shape.category.clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk(size: usize, cx: f64, cy: f64, r: f64) -> BinaryShape {
        BinaryShape::from_fn(size, size, "disk-1", "disk", |x, y| {
            let dx = x as f64 - cx;
            let dy = y as f64 - cy;
            dx * dx + dy * dy <= r * r
        })
        .unwrap()
    }

    #[test]
    fn construction_validates_dimensions() {
        assert!(BinaryShape::new(0, 3, vec![], "a", "a").is_err());
        assert!(BinaryShape::new(2, 2, vec![true; 3], "a", "a").is_err());
        assert!(BinaryShape::new(2, 2, vec![false; 4], "a", "a").is_ok());
    }

    #[test]
    fn centroid_examples() {
        let one = BinaryShape::from_pixels(10, 10, &[(5, 7)], "p", "p").unwrap();
        assert_eq!(centroid(&one).unwrap(), Centroid::new(5.0, 7.0));

        let block =
            BinaryShape::from_pixels(20, 20, &[(10, 10), (11, 10), (10, 11), (11, 11)], "b", "b")
                .unwrap();
        assert_eq!(centroid(&block).unwrap(), Centroid::new(10.5, 10.5));

        let tri = BinaryShape::from_pixels(4, 4, &[(0, 0), (1, 0), (0, 1)], "t", "t").unwrap();
        let c = centroid(&tri).unwrap();
        assert!((c.cx - 1.0 / 3.0).abs() < 1e-9);
        assert!((c.cy - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn empty_shape_is_rejected() {
        let empty = BinaryShape::new(3, 3, vec![false; 9], "e", "e").unwrap();
        assert!(matches!(centroid(&empty), Err(Error::EmptyShape)));
        assert!(matches!(
            max_radius(&empty, Centroid::new(1.0, 1.0)),
            Err(Error::EmptyShape)
        ));
        assert!(matches!(occlude(&empty, 0.2, 1), Err(Error::EmptyShape)));
    }

    #[test]
    fn max_radius_examples() {
        let one = BinaryShape::from_pixels(10, 10, &[(5, 7)], "p", "p").unwrap();
        let c = centroid(&one).unwrap();
        assert_eq!(max_radius(&one, c).unwrap().value(), 0.0);

        let block =
            BinaryShape::from_pixels(20, 20, &[(10, 10), (11, 10), (10, 11), (11, 11)], "b", "b")
                .unwrap();
        let c = centroid(&block).unwrap();
        assert!((max_radius(&block, c).unwrap().value() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn max_radius_of_rasterized_disk() {
        let d = disk(121, 60.0, 60.0, 50.0);
        let c = centroid(&d).unwrap();
        // exhaustive scan of the generated mask
        let mut expected = 0.0f64;
        for y in 0..121 {
            for x in 0..121 {
                if d.get(x, y) {
                    expected = expected
                        .max(((x as f64 - c.cx).powi(2) + (y as f64 - c.cy).powi(2)).sqrt());
                }
            }
        }
        let r = max_radius(&d, c).unwrap().value();
        assert_eq!(r, expected);
        assert!((r - 50.0).abs() <= 1.0);
    }

    #[test]
    fn contains_rounds_half_away_from_zero() {
        let one = BinaryShape::from_pixels(10, 10, &[(5, 7)], "p", "p").unwrap();
        assert!(one.contains(5.4, 6.6));
        assert!(one.contains(4.5, 6.5));
        assert!(!one.contains(5.5, 7.0));
        assert!(!one.contains(-3.0, 0.0));
        assert!(!one.contains(f64::NAN, 7.0));

        let corner = BinaryShape::from_pixels(2, 2, &[(0, 0)], "c", "c").unwrap();
        assert!(corner.contains(-0.49, -0.2));
        assert!(!corner.contains(-0.5, 0.0));
        assert!(!corner.contains(1.5, 0.0));
    }

    #[test]
    fn category_naming() {
        assert_eq!(category_from_stem("apple-3"), "apple");
        assert_eq!(category_from_stem("device0-12"), "device0");
        assert_eq!(category_from_stem("a-b-7"), "a-b");
        assert_eq!(category_from_stem("plain"), "plain");
    }

    #[test]
    fn binarize_threshold_and_invert() {
        let img = PnmImage::Graymap {
            width: 3,
            height: 1,
            maxval: 255,
            samples: vec![127, 128, 0],
        };
        let s = binarize(&img, LoadOptions::default(), "x", "x").unwrap();
        assert_eq!(s.mask(), &[false, true, false]);
        let inv = binarize(
            &img,
            LoadOptions {
                threshold: 127,
                invert: true,
            },
            "x",
            "x",
        )
        .unwrap();
        assert_eq!(inv.mask(), &[true, false, true]);

        let small = PnmImage::Graymap {
            width: 2,
            height: 1,
            maxval: 1,
            samples: vec![0, 1],
        };
        let s = binarize(&small, LoadOptions::default(), "x", "x").unwrap();
        assert_eq!(s.mask(), &[false, true]);

        let bits = PnmImage::Bitmap {
            width: 2,
            height: 1,
            bits: vec![true, false],
        };
        assert_eq!(
            binarize(&bits, LoadOptions::default(), "x", "x")
                .unwrap()
                .mask(),
            &[true, false]
        );
    }

    #[test]
    fn occlude_fraction_zero_is_identity() {
        let d = disk(64, 31.0, 30.0, 20.0);
        let o = occlude(&d, 0.0, 9).unwrap();
        assert_eq!(o.mask(), d.mask());
        assert_eq!(o.id(), "disk-1-occ");
        assert_eq!(o.category(), "disk");
    }

    #[test]
    fn occlude_rejects_bad_fraction() {
        let d = disk(16, 8.0, 8.0, 4.0);
        assert!(occlude(&d, 1.0, 0).is_err());
        assert!(occlude(&d, -0.1, 0).is_err());
        assert!(occlude(&d, f64::NAN, 0).is_err());
    }

    #[test]
    fn occlude_is_deterministic_and_subtractive() {
        let d = disk(80, 40.0, 40.0, 30.0);
        let a = occlude(&d, 0.3, 42).unwrap();
        let b = occlude(&d, 0.3, 42).unwrap();
        assert_eq!(a, b);
        for (orig, occ) in d.mask().iter().zip(a.mask()) {
            assert!(!*occ || *orig);
        }
        let c = occlude(&d, 0.3, 43).unwrap();
        assert_ne!(a.mask(), c.mask());
    }
}
