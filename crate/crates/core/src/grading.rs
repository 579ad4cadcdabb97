//! USDA aggregate-surface grading in exact integer arithmetic.
//!
//! A tuber is *damaged* when green covers more than 25% of its visible
//! surface and *seriously damaged* above 50%. Both limits are strict and are
//! evaluated by cross-multiplication, so no division is involved and the
//! boundaries are exact.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::Thresholds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GradeError {
    #[error("no ROI pixels: the image contains no tuber under the current thresholds")]
    NoRoi,
    #[error("green count {green} exceeds ROI count {roi}")]
    GreenExceedsRoi { green: u64, roi: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    NotDamaged,
    Damaged,
    SeriouslyDamaged,
}

impl Grade {
    pub fn as_str(self) -> &'static str {
        match self {
            Grade::NotDamaged => "not_damaged",
            Grade::Damaged => "damaged",
            Grade::SeriouslyDamaged => "seriously_damaged",
        }
    }

    /// 2-bit encoding shared with the emitted HDL.
    pub fn code(self) -> u8 {
        match self {
            Grade::NotDamaged => 0,
            Grade::Damaged => 1,
            Grade::SeriouslyDamaged => 2,
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which backend produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Frame,
    Stream,
}

impl BackendKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BackendKind::Frame => "frame",
            BackendKind::Stream => "stream",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeReport {
    pub roi_pixels: u64,
    pub green_pixels: u64,
    /// Hundredths of a percent, 0..=10000.
    pub percent_centi: u32,
    pub grade: Grade,
    pub backend: BackendKind,
    pub thresholds: Thresholds,
}

impl GradeReport {
    /// Builds a report from raw counts, deriving percentage and grade.
    pub fn from_counts(
        green: u64,
        roi: u64,
        backend: BackendKind,
        thresholds: Thresholds,
    ) -> Result<Self, GradeError> {
        Ok(Self {
            roi_pixels: roi,
            green_pixels: green,
            percent_centi: percentage_centi(green, roi)?,
            grade: classify_grade(green, roi)?,
            backend,
            thresholds,
        })
    }

    /// True when both reports agree on everything except the backend tag.
    pub fn same_result(&self, other: &GradeReport) -> bool {
        self.roi_pixels == other.roi_pixels
            && self.green_pixels == other.green_pixels
            && self.percent_centi == other.percent_centi
            && self.grade == other.grade
            && self.thresholds == other.thresholds
    }
}

fn check_counts(green: u64, roi: u64) -> Result<(), GradeError> {
    if roi == 0 {
        return Err(GradeError::NoRoi);
    }
    if green > roi {
        return Err(GradeError::GreenExceedsRoi { green, roi });
    }
    Ok(())
}

pub fn classify_grade(green: u64, roi: u64) -> Result<Grade, GradeError> {
    check_counts(green, roi)?;
    let (green, roi) = (u128::from(green), u128::from(roi));
    Ok(if 2 * green > roi {
        Grade::SeriouslyDamaged
    } else if 4 * green > roi {
        Grade::Damaged
    } else {
        Grade::NotDamaged
    })
}

/// `round_half_up(10000 * green / roi)` in integer arithmetic.
pub fn percentage_centi(green: u64, roi: u64) -> Result<u32, GradeError> {
    check_counts(green, roi)?;
    let (green, roi) = (u128::from(green), u128::from(roi));
    let centi = (10_000 * green + roi / 2) / roi;
    Ok(centi as u32)
}

/// Formats centi-percent as a decimal string, e.g. `3333` -> `"33.33"`.
pub fn format_centi(percent_centi: u32) -> String {
    format!("{}.{:02}", percent_centi / 100, percent_centi % 100)
}
