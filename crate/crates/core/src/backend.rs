//! Grading backends behind a common trait, looked up by name at runtime.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::frame_ref::{analyze_frame, render_overlay};
use crate::grading::{GradeError, GradeReport};
use crate::stream_hw::{self, ClockConfig, CycleStats, StreamError};
use crate::types::{Frame, Thresholds};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error(transparent)]
    Grade(#[from] GradeError),
    #[error("stream pipeline: {0}")]
    Stream(StreamError),
    #[error("unknown backend {name:?} (available: {available})")]
    Unknown { name: String, available: String },
}

impl From<StreamError> for BackendError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Grade(g) => BackendError::Grade(g),
            other => BackendError::Stream(other),
        }
    }
}

impl BackendError {
    pub fn is_no_roi(&self) -> bool {
        matches!(self, BackendError::Grade(GradeError::NoRoi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisParams {
    pub thresholds: Thresholds,
    pub clock: ClockConfig,
    pub latency: u32,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            clock: ClockConfig::default(),
            latency: stream_hw::DEFAULT_LATENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub report: GradeReport,
    pub overlay: Frame,
    /// Present only for backends that model hardware timing.
    pub cycles: Option<CycleStats>,
}

pub trait GradingBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str {
        ""
    }

    fn analyze(&self, frame: &Frame, params: &AnalysisParams) -> Result<Analysis, BackendError>;
}

/// Materialized masks, frame at once.
#[derive(Debug, Default, Clone, Copy)]
pub struct FrameBackend;

impl GradingBackend for FrameBackend {
    fn name(&self) -> &'static str {
        "frame"
    }

    fn description(&self) -> &'static str {
        "reference implementation with materialized masks"
    }

    fn analyze(&self, frame: &Frame, params: &AnalysisParams) -> Result<Analysis, BackendError> {
        let a = analyze_frame(frame, &params.thresholds)?;
        let overlay = render_overlay(frame, &a.green, params.thresholds.marker())
            .expect("mask built from this frame");
        Ok(Analysis {
            report: a.report,
            overlay,
            cycles: None,
        })
    }
}

/// Pixel-serial integer datapath with cycle accounting.
#[derive(Debug, Default, Clone, Copy)]
pub struct StreamBackend;

impl GradingBackend for StreamBackend {
    fn name(&self) -> &'static str {
        "stream"
    }

    fn description(&self) -> &'static str {
        "pixel-serial hardware pipeline model"
    }

    fn analyze(&self, frame: &Frame, params: &AnalysisParams) -> Result<Analysis, BackendError> {
        let run = stream_hw::run_stream_with_latency(
            &stream_hw::serialize(frame),
            &params.thresholds,
            params.clock,
            params.latency,
        )?;
        Ok(Analysis {
            report: run.report,
            overlay: run.overlay,
            cycles: Some(run.stats),
        })
    }
}

#[derive(Clone, Default)]
pub struct BackendRegistry {
    backends: BTreeMap<&'static str, Arc<dyn GradingBackend>>,
}

impl fmt::Debug for BackendRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.backends.keys()).finish()
    }
}

impl BackendRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the `frame` and `stream` backends.
    pub fn with_defaults() -> Self {
        let mut r = Self::new();
        r.register(FrameBackend);
        r.register(StreamBackend);
        r
    }

    /// Adds a backend, replacing any previous one with the same name.
    pub fn register<B: GradingBackend + 'static>(&mut self, backend: B) {
        self.backends.insert(backend.name(), Arc::new(backend));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn GradingBackend>, BackendError> {
        self.backends
            .get(name)
            .cloned()
            .ok_or_else(|| BackendError::Unknown {
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.backends.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn GradingBackend>> {
        self.backends.values()
    }
}
