//! Deterministic synthetic tuber images with exact ground truth.
//!
//! A frame is a plain background with one elliptical body painted on it and a
//! connected patch of greened skin grown inside the ellipse. The counts in
//! [`GroundTruth`] come straight from the paint loop, so any analyzer that
//! disagrees with them is wrong.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imgio::write_ppm;
use crate::types::{Frame, RgbPixel, Thresholds};

pub const DEFAULT_BODY: RgbPixel = RgbPixel::new(150, 100, 60);
pub const DEFAULT_PATCH: RgbPixel = RgbPixel::new(90, 140, 60);
pub const DEFAULT_BACKGROUND: RgbPixel = RgbPixel::WHITE;

/// Target fractions used first by [`generate_corpus`]: empty, both sides of
/// each grade limit, full, then a few interior points.
pub const FRACTION_SCHEDULE: [f64; 9] = [0.0, 0.24, 0.26, 0.49, 0.51, 1.0, 0.1, 0.4, 0.75];

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub width: u32,
    pub height: u32,
    pub center: (u32, u32),
    pub semi_axes: (u32, u32),
    pub body_color: RgbPixel,
    pub patch_color: RgbPixel,
    pub background: RgbPixel,
    pub target_fraction: f64,
    pub seed: u64,
    /// Thresholds the colors are validated against.
    pub thresholds: Thresholds,
}

impl SynthSpec {
    /// Ellipse centered in the frame with default colors.
    pub fn centered(
        width: u32,
        height: u32,
        semi_axes: (u32, u32),
        fraction: f64,
        seed: u64,
    ) -> Self {
        Self {
            width,
            height,
            center: (width / 2, height / 2),
            semi_axes,
            body_color: DEFAULT_BODY,
            patch_color: DEFAULT_PATCH,
            background: DEFAULT_BACKGROUND,
            target_fraction: fraction,
            seed,
            thresholds: Thresholds::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let invalid = |msg: String| Err(SynthError::InvalidSpec(msg));
        let (cx, cy) = (u64::from(self.center.0), u64::from(self.center.1));
        let (a, b) = (u64::from(self.semi_axes.0), u64::from(self.semi_axes.1));
        if a == 0 || b == 0 {
            return invalid(format!("semi-axes must be positive, got {a}x{b}"));
        }
        // strictly inside the one-pixel border ring
        if cx < a + 1
            || cy < b + 1
            || cx + a + 2 > u64::from(self.width)
            || cy + b + 2 > u64::from(self.height)
        {
            return invalid(format!(
                "ellipse at ({cx},{cy}) with axes ({a},{b}) touches the border of {}x{}",
                self.width, self.height
            ));
        }
        if !(0.0..=1.0).contains(&self.target_fraction) {
            return invalid(format!(
                "target fraction {} outside [0, 1]",
                self.target_fraction
            ));
        }
        let t = &self.thresholds;
        if t.in_roi(self.background) {
            return invalid(format!(
                "background {:?} falls inside the ROI",
                self.background
            ));
        }
        if !t.in_roi(self.body_color) || t.is_greenish(self.body_color) {
            return invalid(format!(
                "body {:?} must be inside the ROI and not green",
                self.body_color
            ));
        }
        if !t.in_roi(self.patch_color) || !t.is_greenish(self.patch_color) {
            return invalid(format!(
                "patch {:?} must be inside the ROI and green",
                self.patch_color
            ));
        }
        Ok(())
    }

    fn contains(&self, x: u32, y: u32) -> bool {
        // (dx/a)^2 + (dy/b)^2 <= 1, multiplied through by a^2 b^2
        let dx = i128::from(x) - i128::from(self.center.0);
        let dy = i128::from(y) - i128::from(self.center.1);
        let a2 = i128::from(self.semi_axes.0).pow(2);
        let b2 = i128::from(self.semi_axes.1).pow(2);
        dx * dx * b2 + dy * dy * a2 <= a2 * b2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub roi_pixels: u64,
    pub green_pixels: u64,
    /// Row-major order.
    pub green_coordinates: Vec<(u32, u32)>,
}

impl GroundTruth {
    pub fn achieved_fraction(&self) -> f64 {
        if self.roi_pixels == 0 {
            0.0
        } else {
            self.green_pixels as f64 / self.roi_pixels as f64
        }
    }
}

/// Smallest `k` with `k / total >= fraction`.
fn target_count(fraction: f64, total: u64) -> u64 {
    let t = total as f64;
    let mut k = ((fraction * t).ceil() as u64).min(total);
    while k > 0 && (k - 1) as f64 / t >= fraction {
        k -= 1;
    }
    while k < total && (k as f64) / t < fraction {
        k += 1;
    }
    k
}

pub fn generate(spec: &SynthSpec) -> Result<(Frame, GroundTruth), SynthError> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let idx = |x: u32, y: u32| y as usize * w as usize + x as usize;

    let mut pixels = vec![spec.background; w as usize * h as usize];
    let mut inside = vec![false; pixels.len()];
    let mut cells = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if spec.contains(x, y) {
                pixels[idx(x, y)] = spec.body_color;
                inside[idx(x, y)] = true;
                cells.push((x, y));
            }
        }
    }
    let total = cells.len() as u64;
    let wanted = target_count(spec.target_fraction, total);

    // randomized flood: pick a random frontier pixel each step
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut painted = vec![false; pixels.len()];
    let mut queued = vec![false; pixels.len()];
    let mut frontier: Vec<(u32, u32)> = Vec::new();
    let mut count = 0u64;
    while count < wanted {
        if frontier.is_empty() {
            // new seed: first unpainted ellipse cell at or after a random index
            let start = rng.gen_range(0..cells.len());
            let seed = (0..cells.len())
                .map(|i| cells[(start + i) % cells.len()])
                .find(|&(x, y)| !queued[idx(x, y)])
                .expect("unpainted cell exists while count < total");
            queued[idx(seed.0, seed.1)] = true;
            frontier.push(seed);
        }
        let (x, y) = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        painted[idx(x, y)] = true;
        pixels[idx(x, y)] = spec.patch_color;
        count += 1;
        let neighbors = [
            (x.wrapping_sub(1), y),
            (x + 1, y),
            (x, y.wrapping_sub(1)),
            (x, y + 1),
        ];
        for (nx, ny) in neighbors {
            if nx < w && ny < h && inside[idx(nx, ny)] && !queued[idx(nx, ny)] {
                queued[idx(nx, ny)] = true;
                frontier.push((nx, ny));
            }
        }
    }

    let green_coordinates = cells
        .iter()
        .copied()
        .filter(|&(x, y)| painted[idx(x, y)])
        .collect();
    let frame = Frame::new(w, h, pixels).expect("dimensions from spec");
    Ok((
        frame,
        GroundTruth {
            roi_pixels: total,
            green_pixels: count,
            green_coordinates,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct SynthSample {
    pub name: String,
    pub spec: SynthSpec,
    pub frame: Frame,
    pub truth: GroundTruth,
}

/// Builds `count` specs of size `dims`, with varied geometry and target
/// fractions following [`FRACTION_SCHEDULE`] and then uniform draws.
pub fn corpus_specs(
    count: usize,
    dims: (u32, u32),
    seed: u64,
) -> Result<Vec<SynthSpec>, SynthError> {
    corpus_specs_with(count, dims, seed, None)
}

pub fn corpus_specs_with(
    count: usize,
    (width, height): (u32, u32),
    seed: u64,
    fraction: Option<f64>,
) -> Result<Vec<SynthSpec>, SynthError> {
    if width < 5 || height < 5 {
        return Err(SynthError::InvalidSpec(format!(
            "corpus frames need at least 5x5 pixels, got {width}x{height}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = |rng: &mut ChaCha8Rng, extent: u32| {
        let max = (extent - 3) / 2;
        let lo = (max / 2).max(1);
        let hi = (max * 9 / 10).max(lo);
        rng.gen_range(lo..=hi)
    };
    let specs = (0..count)
        .map(|i| {
            let a = axis(&mut rng, width);
            let b = axis(&mut rng, height);
            let cx = rng.gen_range(a + 1..=width - 2 - a);
            let cy = rng.gen_range(b + 1..=height - 2 - b);
            let target = fraction.unwrap_or_else(|| match FRACTION_SCHEDULE.get(i) {
                Some(&f) => f,
                None => rng.gen_range(0.0..=1.0),
            });
            SynthSpec {
                center: (cx, cy),
                semi_axes: (a, b),
                seed: rng.gen(),
                ..SynthSpec::centered(width, height, (a, b), target, 0)
            }
        })
        .collect();
    Ok(specs)
}

pub fn generate_corpus(
    count: usize,
    dims: (u32, u32),
    seed: u64,
) -> Result<Vec<SynthSample>, SynthError> {
    generate_specs(corpus_specs(count, dims, seed)?)
}

pub fn generate_specs(specs: Vec<SynthSpec>) -> Result<Vec<SynthSample>, SynthError> {
    specs
        .into_iter()
        .enumerate()
        .map(|(i, spec)| {
            let (frame, truth) = generate(&spec)?;
            Ok(SynthSample {
                name: format!("potato_{i:03}"),
                spec,
                frame,
                truth,
            })
        })
        .collect()
}

/// Contents of a `<name>.truth.json` side file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthFile {
    pub roi_pixels: u64,
    pub green_pixels: u64,
}

impl From<&GroundTruth> for TruthFile {
    fn from(t: &GroundTruth) -> Self {
        Self {
            roi_pixels: t.roi_pixels,
            green_pixels: t.green_pixels,
        }
    }
}

/// Writes `<name>.ppm` and `<name>.truth.json` for every sample.
pub fn write_corpus(dir: impl AsRef<Path>, samples: &[SynthSample]) -> Result<(), SynthError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for s in samples {
        fs::write(dir.join(format!("{}.ppm", s.name)), write_ppm(&s.frame))?;
        let truth = serde_json::to_string(&TruthFile::from(&s.truth)).map_err(io::Error::from)?;
        fs::write(dir.join(format!("{}.truth.json", s.name)), truth + "\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_ref::analyze_frame;
    use crate::grading::{classify_grade, Grade};

    #[test]
    fn zero_fraction_has_no_patch() {
        let (f, t) = generate(&SynthSpec::centered(64, 48, (20, 15), 0.0, 1)).unwrap();
        assert_eq!(t.green_pixels, 0);
        assert!(t.green_coordinates.is_empty());
        assert!(f.pixels().iter().all(|&p| p != DEFAULT_PATCH));
    }

    #[test]
    fn full_fraction_paints_everything() {
        let (f, t) = generate(&SynthSpec::centered(64, 48, (20, 15), 1.0, 1)).unwrap();
        assert_eq!(t.green_pixels, t.roi_pixels);
        assert!(f.pixels().iter().all(|&p| p != DEFAULT_BODY));
    }

    #[test]
    fn oracle_closure_320x240() {
        let spec = SynthSpec::centered(320, 240, (100, 70), 0.3, 42);
        let (f, t) = generate(&spec).unwrap();
        let a = analyze_frame(&f, &Thresholds::default()).unwrap();
        assert_eq!(a.report.roi_pixels, t.roi_pixels);
        assert_eq!(a.report.green_pixels, t.green_pixels);
        assert_eq!(a.green.coordinates(), t.green_coordinates);
        assert!(t.achieved_fraction() >= 0.3);
        assert!(t.achieved_fraction() < 0.3 + 1.0 / t.roi_pixels as f64);
    }

    #[test]
    fn ellipse_count_matches_float_formula() {
        let spec = SynthSpec::centered(101, 81, (37, 23), 0.0, 0);
        let (_, t) = generate(&spec).unwrap();
        let mut n = 0;
        for y in 0..81u32 {
            for x in 0..101u32 {
                let dx = (f64::from(x) - 50.0) / 37.0;
                let dy = (f64::from(y) - 40.0) / 23.0;
                if dx * dx + dy * dy <= 1.0 + 1e-12 {
                    n += 1;
                }
            }
        }
        assert_eq!(t.roi_pixels, n);
    }

    #[test]
    fn patch_is_connected_when_grown_from_one_seed() {
        let (_, t) = generate(&SynthSpec::centered(120, 90, (50, 35), 0.2, 9)).unwrap();
        let set: std::collections::HashSet<_> = t.green_coordinates.iter().copied().collect();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![t.green_coordinates[0]];
        while let Some((x, y)) = stack.pop() {
            if !seen.insert((x, y)) {
                continue;
            }
            for n in [
                (x.wrapping_sub(1), y),
                (x + 1, y),
                (x, y.wrapping_sub(1)),
                (x, y + 1),
            ] {
                if set.contains(&n) {
                    stack.push(n);
                }
            }
        }
        assert_eq!(seen.len(), set.len());
    }

    #[test]
    fn invalid_specs() {
        let touching = SynthSpec::centered(20, 20, (9, 5), 0.5, 0);
        assert!(matches!(
            generate(&touching),
            Err(SynthError::InvalidSpec(_))
        ));
        let mut s = SynthSpec::centered(40, 40, (10, 10), 0.5, 0);
        s.background = RgbPixel::new(200, 200, 100);
        assert!(matches!(generate(&s), Err(SynthError::InvalidSpec(_))));
        let mut s = SynthSpec::centered(40, 40, (10, 10), 0.5, 0);
        s.body_color = DEFAULT_PATCH;
        assert!(generate(&s).is_err());
        let mut s = SynthSpec::centered(40, 40, (10, 10), 0.5, 0);
        s.thresholds = Thresholds::new(200, -100, RgbPixel::BLACK).unwrap();
        assert!(generate(&s).is_err());
        assert!(generate(&SynthSpec::centered(40, 40, (10, 10), 1.5, 0)).is_err());
        assert!(generate(&SynthSpec::centered(40, 40, (0, 10), 0.5, 0)).is_err());
    }

    #[test]
    fn target_count_is_minimal() {
        for total in 1..200u64 {
            for f in [0.0, 0.1, 0.25, 0.3, 1.0 / 3.0, 0.5, 0.99, 1.0] {
                let k = target_count(f, total);
                assert!(k as f64 / total as f64 >= f);
                assert!(k == 0 || ((k - 1) as f64 / total as f64) < f);
            }
        }
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = generate_corpus(9, (640, 480), 7).unwrap();
        let b = generate_corpus(9, (640, 480), 7).unwrap();
        assert_eq!(a.len(), 9);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(write_ppm(&x.frame), write_ppm(&y.frame));
            assert_eq!(x.truth, y.truth);
        }
        let c = generate_corpus(9, (640, 480), 8).unwrap();
        assert_ne!(a[1].frame, c[1].frame);
    }

    #[test]
    fn corpus_brackets_both_limits() {
        let corpus = generate_corpus(9, (640, 480), 7).unwrap();
        let grades: Vec<Grade> = corpus
            .iter()
            .map(|s| classify_grade(s.truth.green_pixels, s.truth.roi_pixels).unwrap())
            .collect();
        let below_quarter = corpus
            .iter()
            .any(|s| 4 * s.truth.green_pixels <= s.truth.roi_pixels);
        assert!(below_quarter);
        assert!(grades.contains(&Grade::NotDamaged));
        assert!(grades.contains(&Grade::Damaged));
        assert!(grades.contains(&Grade::SeriouslyDamaged));
        // both sides of one half
        assert!(corpus.iter().any(|s| {
            2 * s.truth.green_pixels <= s.truth.roi_pixels
                && 4 * s.truth.green_pixels > s.truth.roi_pixels
        }));
        assert_eq!(corpus[0].truth.green_pixels, 0);
        assert_eq!(corpus[5].truth.green_pixels, corpus[5].truth.roi_pixels);
    }

    #[test]
    fn achieved_fraction_overshoot_is_below_one_pixel() {
        for spec in corpus_specs(30, (97, 61), 3).unwrap() {
            let (_, t) = generate(&spec).unwrap();
            let f = spec.target_fraction;
            assert!(t.achieved_fraction() >= f);
            assert!(t.achieved_fraction() - f < 1.0 / t.roi_pixels as f64 + 1e-12);
        }
    }

    #[test]
    fn writes_side_files() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = generate_corpus(2, (32, 24), 1).unwrap();
        write_corpus(dir.path(), &corpus).unwrap();
        let text = fs::read_to_string(dir.path().join("potato_001.truth.json")).unwrap();
        assert_eq!(
            text,
            format!(
                "{{\"roi_pixels\":{},\"green_pixels\":{}}}\n",
                corpus[1].truth.roi_pixels, corpus[1].truth.green_pixels
            )
        );
        let frame = crate::imgio::load_image(dir.path().join("potato_000.ppm")).unwrap();
        assert_eq!(frame, corpus[0].frame);
    }
}
