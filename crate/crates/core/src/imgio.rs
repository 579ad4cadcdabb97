//! Binary PPM (P6, maxval 255) reading and writing, plus extension-based
//! image loading.
//!
//! Writing is canonical: `P6\n<w> <h>\n255\n` followed by the raster, with no
//! comments. Reading accepts `#` comments anywhere in the header.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::types::Frame;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PpmError {
    #[error("not a binary PPM (expected magic \"P6\")")]
    BadMagic,
    #[error("unsupported maxval {0} (only 255 is supported)")]
    UnsupportedMaxval(u32),
    #[error("raster truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("malformed PPM header: {0}")]
    Malformed(String),
}

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("unknown image format for {0:?} (supported: .ppm, .png)")]
    UnknownFormat(String),
    #[error(transparent)]
    Ppm(#[from] PpmError),
    #[error("decode error: {0}")]
    Decode(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PpmHeader {
    pub width: u32,
    pub height: u32,
    pub maxval: u32,
}

impl PpmHeader {
    pub const MAGIC: &'static [u8; 2] = b"P6";

    pub fn raster_len(&self) -> usize {
        3 * self.width as usize * self.height as usize
    }
}

struct HeaderCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderCursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&c) = self.bytes.get(self.pos) {
            if c == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn next_uint(&mut self, field: &str) -> Result<u32, PpmError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(match self.bytes.get(self.pos) {
                None => PpmError::Malformed(format!("missing {field}")),
                Some(_) => PpmError::Malformed(format!("{field} is not a number")),
            });
        }
        if self
            .bytes
            .get(self.pos)
            .is_some_and(|c| !c.is_ascii_whitespace() && *c != b'#')
        {
            return Err(PpmError::Malformed(format!("{field} is not a number")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PpmError::Malformed(format!("{field} out of range")))
    }
}

/// Parses the header and returns it with the offset of the first raster byte.
pub fn read_ppm_header(bytes: &[u8]) -> Result<(PpmHeader, usize), PpmError> {
    if bytes.len() < 2 || &bytes[..2] != PpmHeader::MAGIC {
        return Err(PpmError::BadMagic);
    }
    let mut cur = HeaderCursor { bytes, pos: 2 };
    if !cur
        .bytes
        .get(2)
        .is_some_and(|c| c.is_ascii_whitespace() || *c == b'#')
    {
        return Err(PpmError::BadMagic);
    }
    let width = cur.next_uint("width")?;
    let height = cur.next_uint("height")?;
    let maxval = cur.next_uint("maxval")?;
    if width == 0 || height == 0 {
        return Err(PpmError::Malformed(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(PpmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates maxval from the raster
    match bytes.get(cur.pos) {
        Some(c) if c.is_ascii_whitespace() => {}
        _ => {
            return Err(PpmError::Malformed(
                "missing whitespace after maxval".into(),
            ))
        }
    }
    Ok((
        PpmHeader {
            width,
            height,
            maxval,
        },
        cur.pos + 1,
    ))
}

pub fn read_ppm(bytes: &[u8]) -> Result<Frame, PpmError> {
    let (header, offset) = read_ppm_header(bytes)?;
    let expected = header.raster_len();
    let raster = &bytes[offset..];
    if raster.len() < expected {
        return Err(PpmError::Truncated {
            expected,
            actual: raster.len(),
        });
    }
    Frame::from_rgb_bytes(header.width, header.height, &raster[..expected])
        .map_err(|e| PpmError::Malformed(e.to_string()))
}

pub fn write_ppm(frame: &Frame) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", frame.width(), frame.height());
    let mut out = Vec::with_capacity(header.len() + 3 * frame.pixel_count());
    out.extend_from_slice(header.as_bytes());
    for p in frame.pixels() {
        out.extend_from_slice(&[p.r, p.g, p.b]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "ppm" => Some(ImageFormat::Ppm),
            "png" => Some(ImageFormat::Png),
            _ => None,
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<Frame, ImageError> {
    let path = path.as_ref();
    let format = ImageFormat::from_path(path)
        .ok_or_else(|| ImageError::UnknownFormat(path.display().to_string()))?;
    let bytes = fs::read(path)?;
    match format {
        ImageFormat::Ppm => Ok(read_ppm(&bytes)?),
        ImageFormat::Png => decode_png(&bytes),
    }
}

fn decode_png(bytes: &[u8]) -> Result<Frame, ImageError> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| ImageError::Decode(e.to_string()))?;
    if img.color().has_alpha() || img.color().bytes_per_pixel() / img.color().channel_count() != 1 {
        // 16-bit or alpha images would need a conversion that is not bit-exact
        return Err(ImageError::Decode(format!(
            "unsupported PNG color type {:?} (8-bit RGB or gray required)",
            img.color()
        )));
    }
    let rgb = img.to_rgb8();
    Frame::from_rgb_bytes(rgb.width(), rgb.height(), rgb.as_raw())
        .map_err(|e| ImageError::Decode(e.to_string()))
}

/// Encodes a frame as 8-bit RGB PNG.
pub fn write_png(frame: &Frame) -> Result<Vec<u8>, ImageError> {
    let buf = image::RgbImage::from_raw(frame.width(), frame.height(), frame.to_rgb_bytes())
        .ok_or_else(|| ImageError::Decode("raster size mismatch".into()))?;
    let mut out = io::Cursor::new(Vec::new());
    buf.write_to(&mut out, image::ImageFormat::Png)
        .map_err(|e| ImageError::Decode(e.to_string()))?;
    Ok(out.into_inner())
}

/// Writes a frame, choosing the encoder from the file extension.
pub fn save_image(path: impl AsRef<Path>, frame: &Frame) -> Result<(), ImageError> {
    let path = path.as_ref();
    let bytes = match ImageFormat::from_path(path) {
        Some(ImageFormat::Ppm) => write_ppm(frame),
        Some(ImageFormat::Png) => write_png(frame)?,
        None => return Err(ImageError::UnknownFormat(path.display().to_string())),
    };
    fs::write(path, bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RgbPixel;
    use proptest::prelude::*;

    fn frame_strategy(max: u32) -> impl Strategy<Value = Frame> {
        (1..=max, 1..=max).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<[u8; 3]>(), (w * h) as usize).prop_map(move |v| {
                let px = v
                    .into_iter()
                    .map(|[r, g, b]| RgbPixel::new(r, g, b))
                    .collect();
                Frame::new(w, h, px).unwrap()
            })
        })
    }

    #[test]
    fn reads_2x2() {
        let mut bytes = b"P6 2 2 255\n".to_vec();
        bytes.extend(0u8..12);
        let f = read_ppm(&bytes).unwrap();
        assert_eq!(f.dims(), (2, 2));
        assert_eq!(f.get(1, 0), RgbPixel::new(3, 4, 5));
        assert_eq!(f.get(0, 1), RgbPixel::new(6, 7, 8));
    }

    #[test]
    fn skips_comments() {
        let mut bytes = b"P6\n# made by hand\n1 # width done\n1\n255\n".to_vec();
        bytes.extend([9, 8, 7]);
        assert_eq!(read_ppm(&bytes).unwrap().get(0, 0), RgbPixel::new(9, 8, 7));
    }

    #[test]
    fn error_classes() {
        assert_eq!(read_ppm(b"P3 1 1 255\n000"), Err(PpmError::BadMagic));
        assert_eq!(read_ppm(b""), Err(PpmError::BadMagic));
        assert_eq!(
            read_ppm(b"P6 2 2 65535\n"),
            Err(PpmError::UnsupportedMaxval(65535))
        );
        let mut short = b"P6 2 2 255\n".to_vec();
        short.extend([0u8; 11]);
        assert_eq!(
            read_ppm(&short),
            Err(PpmError::Truncated {
                expected: 12,
                actual: 11
            })
        );
        assert!(matches!(
            read_ppm(b"P6 x 2 255\n"),
            Err(PpmError::Malformed(_))
        ));
        assert!(matches!(read_ppm(b"P6 2"), Err(PpmError::Malformed(_))));
        assert!(matches!(
            read_ppm(b"P6 0 2 255\n"),
            Err(PpmError::Malformed(_))
        ));
        assert!(matches!(
            read_ppm(b"P6 2a 2 255\n"),
            Err(PpmError::Malformed(_))
        ));
    }

    #[test]
    fn canonical_1x1() {
        let f = Frame::filled(1, 1, RgbPixel::BLACK).unwrap();
        let mut expected = b"P6\n1 1\n255\n".to_vec();
        expected.extend([0, 0, 0]);
        assert_eq!(write_ppm(&f), expected);
    }

    #[test]
    fn unknown_extension() {
        assert!(matches!(
            load_image("a.xyz"),
            Err(ImageError::UnknownFormat(_))
        ));
    }

    #[test]
    fn png_decodes_to_same_frame() {
        let px = (0..48u32)
            .map(|i| RgbPixel::new(i as u8 * 5, 255 - i as u8, (i * 7 % 256) as u8))
            .collect();
        let f = Frame::new(8, 6, px).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_image(dir.path().join("a.png"), &f).unwrap();
        save_image(dir.path().join("a.ppm"), &f).unwrap();
        let a = load_image(dir.path().join("a.png")).unwrap();
        let b = load_image(dir.path().join("a.ppm")).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, f);
    }

    #[test]
    fn large_round_trip() {
        let px = (0..640u32 * 480)
            .map(|i| RgbPixel::new(i as u8, (i >> 8) as u8, (i >> 16) as u8 ^ 0x5a))
            .collect();
        let f = Frame::new(640, 480, px).unwrap();
        let bytes = write_ppm(&f);
        assert_eq!(read_ppm(&bytes).unwrap(), f);
    }

    proptest! {
        #[test]
        fn round_trip_identity(f in frame_strategy(64)) {
            let bytes = write_ppm(&f);
            let header = format!("P6\n{} {}\n255\n", f.width(), f.height());
            prop_assert_eq!(bytes.len(), header.len() + 3 * f.pixel_count());
            let back = read_ppm(&bytes).unwrap();
            prop_assert_eq!(write_ppm(&back), bytes);
            prop_assert_eq!(back, f);
        }
    }
}
