//! Potato greening detection and USDA surface grading.
//!
//! Two interchangeable backends compute the same report:
//!
//! * [`frame_ref`]: frame-at-once reference with materialized masks.
//! * [`stream_hw`]: pixel-serial integer datapath modeling the hardware
//!   pipeline, with cycle and time accounting.
//!
//! Both are registered by name in [`backend::BackendRegistry`]. Supporting
//! modules cover PPM I/O ([`imgio`]), a synthetic image generator with exact
//! ground truth ([`synthgen`]), Verilog emission ([`hdl_emit`]) and the
//! software-vs-hardware timing comparison ([`bench`]).

pub mod backend;
pub mod bench;
pub mod frame_ref;
pub mod grading;
pub mod hdl_emit;
pub mod imgio;
pub mod stream_hw;
pub mod synthgen;
pub mod types;

pub use backend::{Analysis, AnalysisParams, BackendError, BackendRegistry, GradingBackend};
pub use grading::{classify_grade, percentage_centi, BackendKind, Grade, GradeError, GradeReport};
pub use types::{Frame, FrameError, RgbPixel, ThresholdError, Thresholds};
