use serde::Serialize;

use spudgrade_core::frame_ref::CaptureWarning;
use spudgrade_core::grading::format_centi;
use spudgrade_core::{Analysis, Frame, Grade};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Params {
    pub t_blue: u16,
    pub t_diff: i16,
}

/// One graded image. Field order and names are part of the output contract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportJson {
    pub width: u32,
    pub height: u32,
    pub roi_pixels: u64,
    pub green_pixels: u64,
    pub green_percent_centi: u32,
    pub grade: Grade,
    pub backend: &'static str,
    pub params: Params,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hw_time_ns: Option<f64>,
}

impl ReportJson {
    pub fn new(frame: &Frame, analysis: &Analysis, warnings: &[CaptureWarning]) -> Self {
        let r = &analysis.report;
        Self {
            width: frame.width(),
            height: frame.height(),
            roi_pixels: r.roi_pixels,
            green_pixels: r.green_pixels,
            green_percent_centi: r.percent_centi,
            grade: r.grade,
            backend: r.backend.as_str(),
            params: Params {
                t_blue: r.thresholds.t_blue(),
                t_diff: r.thresholds.t_diff(),
            },
            warnings: warnings.iter().map(ToString::to_string).collect(),
            cycles: analysis.cycles.map(|c| c.cycles),
            hw_time_ns: analysis.cycles.map(|c| c.estimated_time_ns),
        }
    }

    pub fn to_text(&self, source: &str) -> String {
        let mut lines = vec![
            format!("file:         {source}"),
            format!("size:         {}x{}", self.width, self.height),
            format!("roi pixels:   {}", self.roi_pixels),
            format!("green pixels: {}", self.green_pixels),
            format!("green:        {}%", format_centi(self.green_percent_centi)),
            format!("grade:        {}", self.grade),
            format!(
                "backend:      {} (t_blue={}, t_diff={})",
                self.backend, self.params.t_blue, self.params.t_diff
            ),
        ];
        if let (Some(cycles), Some(ns)) = (self.cycles, self.hw_time_ns) {
            lines.push(format!("cycles:       {cycles} (estimated {ns:.3} ns)"));
        }
        lines.extend(self.warnings.iter().map(|w| format!("warning:      {w}")));
        lines.join("\n")
    }
}

/// A batch line: either a report or an inline error, tagged with the file.
#[derive(Debug, Clone, Serialize)]
pub struct BatchLine {
    pub file: String,
    #[serde(flatten)]
    pub outcome: BatchOutcome,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum BatchOutcome {
    Report(ReportJson),
    Error {
        error: &'static str,
        message: String,
    },
}
