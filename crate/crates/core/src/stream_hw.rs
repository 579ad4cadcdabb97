//! Pixel-serial model of the hardware pipeline.
//!
//! The frame is serialized in row-major order and pushed through a datapath
//! that only compares, subtracts and increments bounded-width integers. The
//! grade is decided once at end of frame with shift-compares; the single
//! division (for the displayed percentage) also happens there, outside the
//! per-pixel path.
//!
//! Cycle accounting: one pixel per clock plus a fixed pipeline latency.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grading::{percentage_centi, BackendKind, Grade, GradeError, GradeReport};
use crate::types::{Frame, RgbPixel, Thresholds};

/// Minimum clock period of the synthesized design, in nanoseconds.
pub const DEFAULT_CLOCK_PERIOD_NS: f64 = 10.169;

/// Modeled register stages: compare, count, output.
pub const DEFAULT_LATENCY: u32 = 3;

/// Other figures from the reference synthesis timing report. Carried as
/// metadata only; they never enter the time estimate.
pub mod reference_timing {
    pub const MIN_INPUT_ARRIVAL_NS: f64 = 9.024;
    pub const MAX_OUTPUT_REQUIRED_NS: f64 = 6.363;
    pub const MAX_COMBINATIONAL_NS: f64 = 7.114;
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StreamError {
    #[error("stream of {actual} pixels does not match {width}x{height}")]
    LengthMismatch {
        width: u32,
        height: u32,
        actual: usize,
    },
    #[error(transparent)]
    Grade(#[from] GradeError),
    #[error("clock period must be positive and finite, got {0}")]
    InvalidClock(f64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelStream {
    width: u32,
    height: u32,
    pixels: Vec<RgbPixel>,
}

impl PixelStream {
    pub fn new(width: u32, height: u32, pixels: Vec<RgbPixel>) -> Result<Self, StreamError> {
        if width == 0 || height == 0 || pixels.len() != width as usize * height as usize {
            return Err(StreamError::LengthMismatch {
                width,
                height,
                actual: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn dims(&self) -> (u32, u32) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = RgbPixel> + '_ {
        self.pixels.iter().copied()
    }
}

/// Row-major, top row first, left to right.
pub fn serialize(frame: &Frame) -> PixelStream {
    PixelStream {
        width: frame.width(),
        height: frame.height(),
        pixels: frame.pixels().to_vec(),
    }
}

pub fn deserialize(stream: PixelStream) -> Result<Frame, StreamError> {
    let PixelStream {
        width,
        height,
        pixels,
    } = stream;
    let actual = pixels.len();
    Frame::new(width, height, pixels).map_err(|_| StreamError::LengthMismatch {
        width,
        height,
        actual,
    })
}

/// Bits needed to count up to `width * height` inclusive.
pub fn counter_bits(width: u32, height: u32) -> u32 {
    let max = u64::from(width) * u64::from(height);
    (u64::BITS - max.leading_zeros()).max(1)
}

/// An unsigned register of fixed width that wraps like hardware would.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counter {
    value: u64,
    bits: u32,
}

impl Counter {
    pub fn new(bits: u32) -> Self {
        assert!(
            (1..=63).contains(&bits),
            "counter width {bits} out of range"
        );
        Self { value: 0, bits }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    #[inline]
    fn incremented_if(self, enable: bool) -> Self {
        let mask = (1u64 << self.bits) - 1;
        Self {
            value: (self.value + u64::from(enable)) & mask,
            bits: self.bits,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineState {
    pub roi_counter: Counter,
    pub green_counter: Counter,
    pub pixels_seen: Counter,
}

impl PipelineState {
    /// Zeroed state with counters sized for a `width x height` frame.
    pub fn for_frame(width: u32, height: u32) -> Self {
        let bits = counter_bits(width, height);
        Self {
            roi_counter: Counter::new(bits),
            green_counter: Counter::new(bits),
            pixels_seen: Counter::new(bits),
        }
    }

    /// One clock of the datapath.
    ///
    /// Returns the next state, the overlay pixel and the green flag.
    #[inline]
    pub fn step(self, pixel: RgbPixel, thresholds: &Thresholds) -> (Self, RgbPixel, bool) {
        // 9-bit unsigned compare
        let in_roi = u16::from(pixel.b) < thresholds.t_blue();
        // 9-bit signed subtract, 10-bit signed compare
        let diff = i16::from(pixel.r) - i16::from(pixel.g);
        let is_green = in_roi & (diff < thresholds.t_diff());
        let overlay = if is_green { thresholds.marker() } else { pixel };
        let next = Self {
            roi_counter: self.roi_counter.incremented_if(in_roi),
            green_counter: self.green_counter.incremented_if(is_green),
            pixels_seen: self.pixels_seen.incremented_if(true),
        };
        (next, overlay, is_green)
    }
}

/// End-of-frame grade using shifts only: `green << 1 > roi`, `green << 2 > roi`.
pub fn frame_end_grade(green: u64, roi: u64) -> Result<Grade, GradeError> {
    if roi == 0 {
        return Err(GradeError::NoRoi);
    }
    if green > roi {
        return Err(GradeError::GreenExceedsRoi { green, roi });
    }
    // counters are at most 63 bits wide so the shifted values fit in u128
    let (g, r) = (u128::from(green), u128::from(roi));
    Ok(if (g << 1) > r {
        Grade::SeriouslyDamaged
    } else if (g << 2) > r {
        Grade::Damaged
    } else {
        Grade::NotDamaged
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockConfig {
    period_ns: f64,
}

impl ClockConfig {
    pub fn new(period_ns: f64) -> Result<Self, StreamError> {
        if !(period_ns.is_finite() && period_ns > 0.0) {
            return Err(StreamError::InvalidClock(period_ns));
        }
        Ok(Self { period_ns })
    }

    pub fn period_ns(&self) -> f64 {
        self.period_ns
    }
}

impl Default for ClockConfig {
    fn default() -> Self {
        Self {
            period_ns: DEFAULT_CLOCK_PERIOD_NS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleStats {
    pub cycles: u64,
    pub latency: u32,
    pub clock_period_ns: f64,
    pub estimated_time_ns: f64,
}

impl CycleStats {
    pub fn for_pixels(pixels: u64, latency: u32, clock: ClockConfig) -> Self {
        let cycles = pixels + u64::from(latency);
        Self {
            cycles,
            latency,
            clock_period_ns: clock.period_ns(),
            estimated_time_ns: estimate_hw_time(cycles, clock),
        }
    }
}

pub fn estimate_hw_time(cycles: u64, clock: ClockConfig) -> f64 {
    cycles as f64 * clock.period_ns()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StreamRun {
    pub report: GradeReport,
    pub overlay: Frame,
    pub stats: CycleStats,
    /// Datapath invocations; always `width * height`.
    pub steps: u64,
}

pub fn run_stream(
    stream: &PixelStream,
    thresholds: &Thresholds,
    clock: ClockConfig,
) -> Result<StreamRun, StreamError> {
    run_stream_with_latency(stream, thresholds, clock, DEFAULT_LATENCY)
}

pub fn run_stream_with_latency(
    stream: &PixelStream,
    thresholds: &Thresholds,
    clock: ClockConfig,
    latency: u32,
) -> Result<StreamRun, StreamError> {
    let (width, height) = stream.dims();
    let mut state = PipelineState::for_frame(width, height);
    let mut overlay = Vec::with_capacity(stream.len());
    let mut steps = 0u64;
    for pixel in stream.iter() {
        let (next, out, _) = state.step(pixel, thresholds);
        state = next;
        overlay.push(out);
        steps += 1;
    }

    let green = state.green_counter.value();
    let roi = state.roi_counter.value();
    let grade = frame_end_grade(green, roi)?;
    let report = GradeReport {
        roi_pixels: roi,
        green_pixels: green,
        percent_centi: percentage_centi(green, roi)?,
        grade,
        backend: BackendKind::Stream,
        thresholds: *thresholds,
    };
    let overlay = deserialize(PixelStream::new(width, height, overlay)?)?;
    Ok(StreamRun {
        report,
        overlay,
        stats: CycleStats::for_pixels(steps, latency, clock),
        steps,
    })
}
