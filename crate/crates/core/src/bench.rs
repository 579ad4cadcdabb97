//! Software-vs-hardware timing comparison.
//!
//! Software time is measured (median over repeated runs of each backend);
//! hardware time is estimated from the cycle model. The ratio of software
//! per-pixel time to the hardware clock period is the speedup, since the
//! hardware consumes one pixel per clock.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{AnalysisParams, BackendError, FrameBackend, GradingBackend, StreamBackend};
use crate::stream_hw::{reference_timing, ClockConfig, CycleStats, DEFAULT_LATENCY};
use crate::types::{Frame, Thresholds};

pub const MIN_ITERATIONS: usize = 3;

/// Published software figures for the original 640x480 implementation.
pub mod reference_software {
    /// Total profiled time, seconds.
    pub const TOTAL_TIME_S: f64 = 12.012_077;
    /// Profiled invocations (one per pixel plus one).
    pub const CALLS: u64 = 307_201;
    /// Seconds per invocation.
    pub const TIME_PER_CALL_S: f64 = 3.910_168_587e-5;
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("at least {MIN_ITERATIONS} iterations are required, got {0}")]
    TooFewIterations(usize),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendTimes {
    pub frame: f64,
    pub stream: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub frame_dims: (u32, u32),
    pub iterations: usize,
    /// Median wall time per frame for each backend.
    pub sw_frame_ns: BackendTimes,
    /// Stream backend median divided by pixel count.
    pub sw_per_pixel_ns: f64,
    pub hw_cycles: u64,
    pub hw_clock_period_ns: f64,
    pub hw_frame_ns: f64,
    pub speedup_ratio: f64,
}

impl BenchReport {
    pub fn pixels(&self) -> u64 {
        u64::from(self.frame_dims.0) * u64::from(self.frame_dims.1)
    }
}

/// Software time per pixel over hardware time per pixel (one clock).
pub fn speedup_ratio(sw_per_pixel_ns: f64, clock_period_ns: f64) -> f64 {
    sw_per_pixel_ns / clock_period_ns
}

/// The ratio implied by the published software and synthesis figures.
pub fn reference_speedup() -> f64 {
    speedup_ratio(
        reference_software::TIME_PER_CALL_S * 1e9,
        crate::stream_hw::DEFAULT_CLOCK_PERIOD_NS,
    )
}

/// Median of a non-empty sample; mean of the two middle values when even.
pub fn median(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty(), "median of empty sample");
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        (samples[n / 2 - 1] + samples[n / 2]) / 2.0
    }
}

pub fn run_bench(
    frame: &Frame,
    thresholds: &Thresholds,
    clock: ClockConfig,
    iterations: usize,
) -> Result<BenchReport, BenchError> {
    run_bench_with_hook(frame, thresholds, clock, iterations, &|| {})
}

/// As [`run_bench`], calling `hook` inside every timed region.
pub fn run_bench_with_hook(
    frame: &Frame,
    thresholds: &Thresholds,
    clock: ClockConfig,
    iterations: usize,
    hook: &dyn Fn(),
) -> Result<BenchReport, BenchError> {
    if iterations < MIN_ITERATIONS {
        return Err(BenchError::TooFewIterations(iterations));
    }
    let params = AnalysisParams {
        thresholds: *thresholds,
        clock,
        latency: DEFAULT_LATENCY,
    };

    let time = |backend: &dyn GradingBackend| -> Result<f64, BenchError> {
        let mut samples = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            let start = Instant::now();
            let out = backend.analyze(frame, &params)?;
            hook();
            let elapsed = start.elapsed().as_nanos() as f64;
            std::hint::black_box(out);
            samples.push(elapsed);
        }
        Ok(median(&mut samples))
    };
    let frame_ns = time(&FrameBackend)?;
    let stream_ns = time(&StreamBackend)?;

    let pixels = frame.pixel_count() as u64;
    let stats = CycleStats::for_pixels(pixels, DEFAULT_LATENCY, clock);
    let sw_per_pixel_ns = stream_ns / pixels as f64;
    Ok(BenchReport {
        frame_dims: frame.dims(),
        iterations,
        sw_frame_ns: BackendTimes {
            frame: frame_ns,
            stream: stream_ns,
        },
        sw_per_pixel_ns,
        hw_cycles: stats.cycles,
        hw_clock_period_ns: stats.clock_period_ns,
        hw_frame_ns: stats.estimated_time_ns,
        speedup_ratio: speedup_ratio(sw_per_pixel_ns, stats.clock_period_ns),
    })
}

/// Two-table text rendering: measured software timing, then the modeled
/// hardware timing, each followed by the published reference figures.
pub fn render_tables(report: &BenchReport) -> String {
    let mut s = String::new();
    let (w, h) = report.frame_dims;
    let pixels = report.pixels();
    let ms = |ns: f64| ns / 1e6;
    macro_rules! out {
        ($($arg:tt)*) => { writeln!(s, $($arg)*).expect("write to String") };
    }
    out!(
        "SOFTWARE TIMING ({w}x{h} = {pixels} pixels, median of {} runs)",
        report.iterations
    );
    out!(
        "{:<28} {:>16} {:>12} {:>18}",
        "function",
        "total time (ms)",
        "calls",
        "time/call (ns)"
    );
    out!(
        "{:<28} {:>16.4} {:>12} {:>18.4}",
        "frame backend",
        ms(report.sw_frame_ns.frame),
        pixels,
        report.sw_frame_ns.frame / pixels as f64
    );
    out!(
        "{:<28} {:>16.4} {:>12} {:>18.4}",
        "stream backend",
        ms(report.sw_frame_ns.stream),
        pixels,
        report.sw_per_pixel_ns
    );
    out!(
        "{:<28} {:>16.4} {:>12} {:>18.4}",
        "reference (published)",
        reference_software::TOTAL_TIME_S * 1e3,
        reference_software::CALLS,
        reference_software::TIME_PER_CALL_S * 1e9
    );
    out!("");
    out!("HARDWARE TIMING (cycle model)");
    out!(
        "{:<36} {:>14.3} ns",
        "minimum period",
        report.hw_clock_period_ns
    );
    out!(
        "{:<36} {:>14}",
        "cycles (pixels + latency)",
        report.hw_cycles
    );
    out!(
        "{:<36} {:>14.3} ms",
        "estimated frame time",
        ms(report.hw_frame_ns)
    );
    out!(
        "{:<36} {:>14.3} ns",
        "reference min input arrival",
        reference_timing::MIN_INPUT_ARRIVAL_NS
    );
    out!(
        "{:<36} {:>14.3} ns",
        "reference max output required",
        reference_timing::MAX_OUTPUT_REQUIRED_NS
    );
    out!(
        "{:<36} {:>14.3} ns",
        "reference max combinational",
        reference_timing::MAX_COMBINATIONAL_NS
    );
    out!("");
    out!(
        "speedup (sw per pixel / hw period): {:.1}x",
        report.speedup_ratio
    );
    out!(
        "reference speedup from published figures: {:.1}x",
        reference_speedup()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::RgbPixel;
    use std::time::Duration;

    fn small_frame() -> Frame {
        let mut f = Frame::filled(32, 24, RgbPixel::WHITE).unwrap();
        for y in 4..20 {
            for x in 4..28 {
                f.set(x, y, RgbPixel::new(150, 100, 60));
            }
        }
        f
    }

    #[test]
    fn reference_ratio() {
        // 3.910168587e-5 s / 10.169e-9 s
        let expected = 3.910168587e-5 / 10.169e-9;
        assert!((reference_speedup() - expected).abs() < 1e-9);
        assert!((reference_speedup() - 3845.2).abs() < 0.5);
    }

    #[test]
    fn reference_total_is_consistent() {
        let per_call = reference_software::TOTAL_TIME_S / reference_software::CALLS as f64;
        assert!((per_call - reference_software::TIME_PER_CALL_S).abs() / per_call < 1e-6);
    }

    #[test]
    fn median_odd_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn too_few_iterations() {
        let err = run_bench(
            &small_frame(),
            &Thresholds::default(),
            ClockConfig::default(),
            2,
        );
        assert!(matches!(err, Err(BenchError::TooFewIterations(2))));
    }

    #[test]
    fn report_is_self_consistent() {
        let f = small_frame();
        let r = run_bench(&f, &Thresholds::default(), ClockConfig::default(), 3).unwrap();
        let pixels = f.pixel_count() as f64;
        assert!(
            (r.sw_per_pixel_ns * pixels - r.sw_frame_ns.stream).abs()
                <= 1e-6 * r.sw_frame_ns.stream
        );
        let ratio = r.sw_per_pixel_ns / r.hw_clock_period_ns;
        assert!((r.speedup_ratio - ratio).abs() <= 1e-6 * ratio);
        assert_eq!(r.hw_cycles, 32 * 24 + 3);
        assert!(r.sw_frame_ns.frame >= 0.0 && r.sw_frame_ns.stream >= 0.0);
        let text = render_tables(&r);
        assert!(text.contains("SOFTWARE TIMING"));
        assert!(text.contains("HARDWARE TIMING"));
        assert!(text.contains("10.169"));
    }

    #[test]
    fn median_tracks_added_delay() {
        let f = small_frame();
        let t = Thresholds::default();
        let base = run_bench(&f, &t, ClockConfig::default(), 3).unwrap();
        let slow = run_bench_with_hook(&f, &t, ClockConfig::default(), 3, &|| {
            std::thread::sleep(Duration::from_millis(5))
        })
        .unwrap();
        assert!(slow.sw_frame_ns.stream >= 5e6);
        assert!(slow.sw_frame_ns.stream > base.sw_frame_ns.stream);
        assert!(slow.speedup_ratio > base.speedup_ratio);
    }

    #[test]
    fn hw_frame_time_at_vga() {
        let f = Frame::filled(640, 480, RgbPixel::new(150, 100, 60)).unwrap();
        let r = run_bench(&f, &Thresholds::default(), ClockConfig::default(), 3).unwrap();
        assert!((r.hw_frame_ns - 3.124e6).abs() < 1e3);
    }

    #[test]
    fn no_roi_propagates() {
        let f = Frame::filled(8, 8, RgbPixel::WHITE).unwrap();
        let err = run_bench(&f, &Thresholds::default(), ClockConfig::default(), 3).unwrap_err();
        assert!(matches!(err, BenchError::Backend(e) if e.is_no_roi()));
    }
}
