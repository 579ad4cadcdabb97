//! Pixel, frame and threshold types shared by every backend.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An 8-bit-per-channel RGB sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RgbPixel {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbPixel {
    pub const WHITE: RgbPixel = RgbPixel::new(255, 255, 255);
    pub const BLACK: RgbPixel = RgbPixel::new(0, 0, 0);
    pub const PURE_GREEN: RgbPixel = RgbPixel::new(0, 255, 0);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// Signed `r - g`, range [-255, 255].
    #[inline]
    pub fn red_minus_green(self) -> i16 {
        i16::from(self.r) - i16::from(self.g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame dimensions must be at least 1x1, got {width}x{height}")]
    EmptyDimensions { width: u32, height: u32 },
    #[error("frame {width}x{height} needs {expected} pixels, got {actual}")]
    PixelCount {
        width: u32,
        height: u32,
        expected: usize,
        actual: usize,
    },
    #[error("dimensions mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (u32, u32),
        actual: (u32, u32),
    },
}

/// Row-major raster of [`RgbPixel`]s, x varying fastest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: u32,
    height: u32,
    pixels: Vec<RgbPixel>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<RgbPixel>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::EmptyDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(FrameError::PixelCount {
                width,
                height,
                expected,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: u32, height: u32, pixel: RgbPixel) -> Result<Self, FrameError> {
        Self::new(width, height, vec![pixel; width as usize * height as usize])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[RgbPixel] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<RgbPixel> {
        self.pixels
    }

    #[inline]
    pub fn index(&self, x: u32, y: u32) -> usize {
        y as usize * self.width as usize + x as usize
    }

    /// Panics if `(x, y)` is out of bounds.
    pub fn get(&self, x: u32, y: u32) -> RgbPixel {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x},{y}) out of bounds"
        );
        self.pixels[self.index(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, pixel: RgbPixel) {
        assert!(
            x < self.width && y < self.height,
            "pixel ({x},{y}) out of bounds"
        );
        let i = self.index(x, y);
        self.pixels[i] = pixel;
    }

    /// Raw interleaved R,G,B octets.
    pub fn to_rgb_bytes(&self) -> Vec<u8> {
        self.pixels.iter().flat_map(|p| [p.r, p.g, p.b]).collect()
    }

    pub fn from_rgb_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self, FrameError> {
        if !bytes.len().is_multiple_of(3) {
            return Err(FrameError::PixelCount {
                width,
                height,
                expected: width as usize * height as usize,
                actual: bytes.len() / 3,
            });
        }
        let pixels = bytes
            .chunks_exact(3)
            .map(|c| RgbPixel::new(c[0], c[1], c[2]))
            .collect();
        Self::new(width, height, pixels)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ThresholdError {
    #[error("t_blue must be in [0, 256], got {0}")]
    BlueOutOfRange(i32),
    #[error("t_diff must be in [-255, 256], got {0}")]
    DiffOutOfRange(i32),
}

/// The two comparator constants plus the overlay marker color.
///
/// A pixel is in the ROI iff `b < t_blue`; an ROI pixel is green iff
/// `r - g < t_diff`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    t_blue: u16,
    t_diff: i16,
    marker: RgbPixel,
}

impl Thresholds {
    pub const DEFAULT_T_BLUE: u16 = 200;
    pub const DEFAULT_T_DIFF: i16 = 20;
    pub const T_BLUE_MAX: u16 = 256;
    pub const T_DIFF_MIN: i16 = -255;
    pub const T_DIFF_MAX: i16 = 256;
    pub const DEFAULT_MARKER: RgbPixel = RgbPixel::PURE_GREEN;

    pub fn new(t_blue: i32, t_diff: i32, marker: RgbPixel) -> Result<Self, ThresholdError> {
        if !(0..=i32::from(Self::T_BLUE_MAX)).contains(&t_blue) {
            return Err(ThresholdError::BlueOutOfRange(t_blue));
        }
        if !(i32::from(Self::T_DIFF_MIN)..=i32::from(Self::T_DIFF_MAX)).contains(&t_diff) {
            return Err(ThresholdError::DiffOutOfRange(t_diff));
        }
        Ok(Self {
            t_blue: t_blue as u16,
            t_diff: t_diff as i16,
            marker,
        })
    }

    pub fn t_blue(&self) -> u16 {
        self.t_blue
    }

    pub fn t_diff(&self) -> i16 {
        self.t_diff
    }

    pub fn marker(&self) -> RgbPixel {
        self.marker
    }

    pub fn with_marker(self, marker: RgbPixel) -> Self {
        Self { marker, ..self }
    }

    #[inline]
    pub fn in_roi(&self, p: RgbPixel) -> bool {
        u16::from(p.b) < self.t_blue
    }

    /// Green test alone, without the ROI conjunction.
    #[inline]
    pub fn is_greenish(&self, p: RgbPixel) -> bool {
        p.red_minus_green() < self.t_diff
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            t_blue: Self::DEFAULT_T_BLUE,
            t_diff: Self::DEFAULT_T_DIFF,
            marker: Self::DEFAULT_MARKER,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_rejects_bad_lengths() {
        assert!(matches!(
            Frame::new(2, 2, vec![RgbPixel::BLACK; 3]),
            Err(FrameError::PixelCount {
                expected: 4,
                actual: 3,
                ..
            })
        ));
        assert!(matches!(
            Frame::new(0, 2, vec![]),
            Err(FrameError::EmptyDimensions { .. })
        ));
    }

    #[test]
    fn frame_is_row_major() {
        let px: Vec<_> = (0..6).map(|i| RgbPixel::new(i, 0, 0)).collect();
        let f = Frame::new(3, 2, px).unwrap();
        assert_eq!(f.get(2, 0).r, 2);
        assert_eq!(f.get(0, 1).r, 3);
    }

    #[test]
    fn threshold_ranges() {
        assert!(Thresholds::new(256, -255, RgbPixel::BLACK).is_ok());
        assert!(Thresholds::new(0, 256, RgbPixel::BLACK).is_ok());
        assert_eq!(
            Thresholds::new(257, 0, RgbPixel::BLACK),
            Err(ThresholdError::BlueOutOfRange(257))
        );
        assert_eq!(
            Thresholds::new(10, -256, RgbPixel::BLACK),
            Err(ThresholdError::DiffOutOfRange(-256))
        );
    }

    #[test]
    fn signed_difference_does_not_wrap() {
        assert_eq!(RgbPixel::new(0, 255, 0).red_minus_green(), -255);
        assert_eq!(RgbPixel::new(255, 0, 0).red_minus_green(), 255);
    }
}
