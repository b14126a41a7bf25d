//! Minimal netpbm reader/writer for the bilevel and grayscale members of the
//! family: PBM (P1/P4) and PGM (P2/P5) with maxval up to 255.

use crate::error::{Error, Result};

/// Upper bound on decoded pixel count, guards against absurd headers.
const MAX_PIXELS: usize = 1 << 28;

/// Decoded raster, before binarization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PnmImage {
    /// PBM data; `true` is a set bit (black in netpbm convention).
    Bitmap {
        width: usize,
        height: usize,
        bits: Vec<bool>,
    },
    /// PGM data with the raw sample values.
    Graymap {
        width: usize,
        height: usize,
        maxval: u8,
        samples: Vec<u8>,
    },
}

impl PnmImage {
    pub fn width(&self) -> usize {
        match self {
            PnmImage::Bitmap { width, .. } | PnmImage::Graymap { width, .. } => *width,
        }
    }

    pub fn height(&self) -> usize {
        match self {
            PnmImage::Bitmap { height, .. } | PnmImage::Graymap { height, .. } => *height,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Magic {
    PlainPbm,
    RawPbm,
    PlainPgm,
    RawPgm,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.data.get(self.pos).copied()
    }

    /// Skips whitespace and `#` comments (a comment runs to end of line).
    fn skip_ws_and_comments(&mut self) {
        while let Some(b) = self.peek() {
            if b == b'#' {
                while let Some(c) = self.peek() {
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<usize> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while let Some(b) = self.peek() {
            if !b.is_ascii_digit() {
                break;
            }
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.peek() {
                None => Error::Format(format!("unexpected end of data while reading {what}")),
                Some(b) => Error::Format(format!(
                    "expected a decimal number for {what}, found byte 0x{b:02x}"
                )),
            });
        }
        let digits = std::str::from_utf8(&self.data[start..self.pos]).expect("ascii digits");
        digits
            .parse::<usize>()
            .map_err(|_| Error::Format(format!("{what} out of range: {digits}")))
    }

    fn remaining(&self) -> &'a [u8] {
        &self.data[self.pos.min(self.data.len())..]
    }
}

fn parse_magic(data: &[u8]) -> Result<Magic> {
    if data.len() < 2 {
        return Err(Error::Format(format!(
            "file too short for a netpbm magic number ({} bytes)",
            data.len()
        )));
    }
    match &data[..2] {
        b"P1" => Ok(Magic::PlainPbm),
        b"P4" => Ok(Magic::RawPbm),
        b"P2" => Ok(Magic::PlainPgm),
        b"P5" => Ok(Magic::RawPgm),
        other => Err(Error::Format(format!(
            "unsupported format magic {:?} (0x{:02x} 0x{:02x}); expected P1, P2, P4 or P5",
            String::from_utf8_lossy(other),
            other[0],
            other[1]
        ))),
    }
}

/// Decodes a PBM or PGM byte stream.
pub fn decode(data: &[u8]) -> Result<PnmImage> {
    let magic = parse_magic(data)?;
    let mut cur = Cursor { data, pos: 2 };

    let width = cur.read_uint("width")?;
    let height = cur.read_uint("height")?;
    if width == 0 || height == 0 {
        return Err(Error::Format(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    let count = width
        .checked_mul(height)
        .filter(|&n| n <= MAX_PIXELS)
        .ok_or_else(|| Error::Format(format!("image too large: {width}x{height}")))?;

    let maxval = match magic {
        Magic::PlainPgm | Magic::RawPgm => {
            let m = cur.read_uint("maxval")?;
            if m == 0 || m > 255 {
                return Err(Error::Format(format!(
                    "maxval {m} not supported (must be 1..=255)"
                )));
            }
            m as u8
        }
        _ => 1,
    };

    match magic {
        Magic::RawPbm | Magic::RawPgm => {
            // Exactly one whitespace byte separates the header from the raster.
            match cur.peek() {
                Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
                Some(b) => {
                    return Err(Error::Format(format!(
                        "expected whitespace after header, found byte 0x{b:02x}"
                    )))
                }
                None => return Err(Error::Format("missing raster data".into())),
            }
        }
        _ => {}
    }

    match magic {
        Magic::PlainPbm => {
            let mut bits = Vec::with_capacity(count);
            while bits.len() < count {
                cur.skip_ws_and_comments();
                match cur.peek() {
                    Some(b'0') => bits.push(false),
                    Some(b'1') => bits.push(true),
                    Some(b) => {
                        return Err(Error::Format(format!(
                            "invalid P1 pixel byte 0x{b:02x} at offset {}",
                            cur.pos
                        )))
                    }
                    None => {
                        return Err(Error::Format(format!(
                            "truncated P1 raster: {} of {count} pixels",
                            bits.len()
                        )))
                    }
                }
                cur.pos += 1;
            }
            Ok(PnmImage::Bitmap {
                width,
                height,
                bits,
            })
        }
        Magic::RawPbm => {
            let stride = width.div_ceil(8);
            let raw = cur.remaining();
            if raw.len() < stride * height {
                return Err(Error::Format(format!(
                    "truncated P4 raster: need {} bytes, have {}",
                    stride * height,
                    raw.len()
                )));
            }
            let mut bits = Vec::with_capacity(count);
            for row in raw.chunks_exact(stride).take(height) {
                for x in 0..width {
                    bits.push(row[x / 8] & (0x80 >> (x % 8)) != 0);
                }
            }
            Ok(PnmImage::Bitmap {
                width,
                height,
                bits,
            })
        }
        Magic::PlainPgm => {
            let mut samples = Vec::with_capacity(count);
            while samples.len() < count {
                let v = cur.read_uint("sample")?;
                if v > maxval as usize {
                    return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
                }
                samples.push(v as u8);
            }
            Ok(PnmImage::Graymap {
                width,
                height,
                maxval,
                samples,
            })
        }
        Magic::RawPgm => {
            let raw = cur.remaining();
            if raw.len() < count {
                return Err(Error::Format(format!(
                    "truncated P5 raster: need {count} bytes, have {}",
                    raw.len()
                )));
            }
            let samples = raw[..count].to_vec();
            if let Some(&v) = samples.iter().find(|&&v| v > maxval) {
                return Err(Error::Format(format!("sample {v} exceeds maxval {maxval}")));
            }
            Ok(PnmImage::Graymap {
                width,
                height,
                maxval,
                samples,
            })
        }
    }
}

/// Encodes a raw (P5) graymap with maxval 255.
pub fn encode_pgm(width: usize, height: usize, samples: &[u8]) -> Vec<u8> {
    assert_eq!(samples.len(), width * height, "sample count mismatch");
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(samples);
    out
}

/// Encodes a raw (P4) bitmap; `true` becomes a set (black) bit.
pub fn encode_pbm(width: usize, height: usize, bits: &[bool]) -> Vec<u8> {
    assert_eq!(bits.len(), width * height, "bit count mismatch");
    let mut out = format!("P4\n{width} {height}\n").into_bytes();
    let stride = width.div_ceil(8);
    for row in bits.chunks_exact(width) {
        let mut packed = vec![0u8; stride];
        for (x, &b) in row.iter().enumerate() {
            if b {
                packed[x / 8] |= 0x80 >> (x % 8);
            }
        }
        out.extend_from_slice(&packed);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_pgm_with_comments() {
        let data = b"P2\n# a comment\n3 2 # trailing\n255\n0 10 20\n30 40 255\n";
        let img = decode(data).unwrap();
        assert_eq!(
            img,
            PnmImage::Graymap {
                width: 3,
                height: 2,
                maxval: 255,
                samples: vec![0, 10, 20, 30, 40, 255]
            }
        );
    }

    #[test]
    fn plain_pbm_without_separators() {
        let img = decode(b"P1 4 2\n0110\n1 0 0 1").unwrap();
        match img {
            PnmImage::Bitmap { bits, .. } => assert_eq!(
                bits,
                vec![false, true, true, false, true, false, false, true]
            ),
            _ => panic!("expected bitmap"),
        }
    }

    #[test]
    fn raw_pbm_row_padding() {
        // 10 pixels per row -> 2 bytes per row
        let bits: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let enc = encode_pbm(10, 2, &bits);
        assert_eq!(enc.len(), "P4\n10 2\n".len() + 4);
        match decode(&enc).unwrap() {
            PnmImage::Bitmap { bits: back, .. } => assert_eq!(back, bits),
            _ => panic!("expected bitmap"),
        }
    }

    #[test]
    fn raw_pgm_roundtrip() {
        let samples: Vec<u8> = (0..=255).collect();
        let enc = encode_pgm(16, 16, &samples);
        match decode(&enc).unwrap() {
            PnmImage::Graymap { samples: back, .. } => assert_eq!(back, samples),
            _ => panic!("expected graymap"),
        }
    }

    #[test]
    fn rejects_unknown_magic_by_name() {
        let err = decode(b"P6\n1 1\n255\n\0\0\0").unwrap_err().to_string();
        assert!(err.contains("P6"), "{err}");
        let err = decode(b"GIF89a").unwrap_err().to_string();
        assert!(err.contains("GI"), "{err}");
    }

    #[test]
    fn rejects_malformed_headers() {
        assert!(decode(b"P2\n3\n").is_err());
        assert!(decode(b"P2\n0 3 255\n").is_err());
        assert!(decode(b"P5\n2 2\n65535\n").is_err());
        assert!(decode(b"P5\n2 2\n255\n\x01\x02").is_err());
        assert!(decode(b"P2 2 1 10 3 11").is_err());
        assert!(decode(b"P1 2 2 0 1 2 0").is_err());
        assert!(decode(b"P").is_err());
    }
}
