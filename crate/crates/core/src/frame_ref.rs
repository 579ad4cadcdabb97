//! Frame-at-once reference backend.
//!
//! Masks are materialized so they can be inspected and compared; the
//! streaming backend in [`crate::stream_hw`] is the fused path and must agree
//! with this one exactly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::grading::{BackendKind, GradeError, GradeReport};
use crate::types::{Frame, FrameError, RgbPixel, Thresholds};

/// Row-major per-pixel flags with the dimensions of their source frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, FrameError> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(FrameError::PixelCount {
                width,
                height,
                expected,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        assert!(x < self.width && y < self.height);
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn count_ones(&self) -> u64 {
        self.bits.iter().filter(|&&b| b).count() as u64
    }

    /// Every set bit here is also set in `other`.
    pub fn is_subset_of(&self, other: &BitMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// Coordinates of set bits in row-major order.
    pub fn coordinates(&self) -> Vec<(u32, u32)> {
        let w = self.width as usize;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| ((i % w) as u32, (i / w) as u32))
            .collect()
    }
}

pub fn roi_mask(frame: &Frame, t_blue: u16) -> BitMask {
    let bits = frame
        .pixels()
        .iter()
        .map(|p| u16::from(p.b) < t_blue)
        .collect();
    BitMask {
        width: frame.width(),
        height: frame.height(),
        bits,
    }
}

pub fn green_mask(frame: &Frame, roi: &BitMask, t_diff: i16) -> Result<BitMask, FrameError> {
    check_dims(frame, roi)?;
    let bits = frame
        .pixels()
        .iter()
        .zip(roi.bits())
        .map(|(p, &in_roi)| in_roi && p.red_minus_green() < t_diff)
        .collect();
    Ok(BitMask {
        width: frame.width(),
        height: frame.height(),
        bits,
    })
}

fn check_dims(frame: &Frame, mask: &BitMask) -> Result<(), FrameError> {
    if frame.dims() != mask.dims() {
        return Err(FrameError::DimensionMismatch {
            expected: frame.dims(),
            actual: mask.dims(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAnalysis {
    pub report: GradeReport,
    pub roi: BitMask,
    pub green: BitMask,
}

pub fn analyze_frame(frame: &Frame, thresholds: &Thresholds) -> Result<FrameAnalysis, GradeError> {
    let roi = roi_mask(frame, thresholds.t_blue());
    let green = green_mask(frame, &roi, thresholds.t_diff()).expect("roi built from frame");
    let report = GradeReport::from_counts(
        green.count_ones(),
        roi.count_ones(),
        BackendKind::Frame,
        *thresholds,
    )?;
    Ok(FrameAnalysis { report, roi, green })
}

pub fn render_overlay(
    frame: &Frame,
    green: &BitMask,
    marker: RgbPixel,
) -> Result<Frame, FrameError> {
    check_dims(frame, green)?;
    let pixels = frame
        .pixels()
        .iter()
        .zip(green.bits())
        .map(|(&p, &g)| if g { marker } else { p })
        .collect();
    Frame::new(frame.width(), frame.height(), pixels)
}

/// Fraction of border-ring pixels inside the ROI above which a warning fires.
pub const BORDER_ROI_LIMIT: f64 = 0.05;

/// Channel spread at or below which a border pixel counts as neutral gray.
const NEUTRAL_SPREAD: u8 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CaptureWarning {
    /// Colored content touches the border: the backdrop is not plain white.
    BackgroundNotWhite { border_roi_fraction: f64 },
    /// Mostly neutral, darkened border pixels fall inside the ROI.
    SuspectedShadow { border_roi_fraction: f64 },
}

impl CaptureWarning {
    pub fn fraction(&self) -> f64 {
        match *self {
            CaptureWarning::BackgroundNotWhite {
                border_roi_fraction,
            }
            | CaptureWarning::SuspectedShadow {
                border_roi_fraction,
            } => border_roi_fraction,
        }
    }
}

impl fmt::Display for CaptureWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CaptureWarning::BackgroundNotWhite { .. } => "background_not_white",
            CaptureWarning::SuspectedShadow { .. } => "suspected_shadow",
        };
        write!(
            f,
            "{name}: {:.4} of border pixels inside ROI",
            self.fraction()
        )
    }
}

/// Indices of the one-pixel border ring, each pixel exactly once.
fn border_ring(width: u32, height: u32) -> Vec<(u32, u32)> {
    if width <= 2 || height <= 2 {
        return (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .collect();
    }
    let mut ring = Vec::with_capacity(2 * (width + height) as usize - 4);
    ring.extend((0..width).map(|x| (x, 0)));
    ring.extend((0..width).map(|x| (x, height - 1)));
    ring.extend((1..height - 1).map(|y| (0, y)));
    ring.extend((1..height - 1).map(|y| (width - 1, y)));
    ring
}

/// Checks the capture conditions: the tuber sits on a white background with
/// no shadow reaching the image border. Warnings never affect grading.
pub fn validate_capture(frame: &Frame, thresholds: &Thresholds) -> Vec<CaptureWarning> {
    let ring = border_ring(frame.width(), frame.height());
    let offending: Vec<RgbPixel> = ring
        .iter()
        .map(|&(x, y)| frame.get(x, y))
        .filter(|&p| thresholds.in_roi(p))
        .collect();
    let fraction = offending.len() as f64 / ring.len() as f64;
    if fraction <= BORDER_ROI_LIMIT {
        return Vec::new();
    }
    let neutral = offending
        .iter()
        .filter(|p| p.r.max(p.g).max(p.b) - p.r.min(p.g).min(p.b) <= NEUTRAL_SPREAD)
        .count();
    let border_roi_fraction = fraction;
    if 2 * neutral > offending.len() {
        vec![CaptureWarning::SuspectedShadow {
            border_roi_fraction,
        }]
    } else {
        vec![CaptureWarning::BackgroundNotWhite {
            border_roi_fraction,
        }]
    }
}
