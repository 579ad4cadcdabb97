use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use rayon::prelude::*;

use spudgrade_core::bench::{reference_speedup, render_tables, run_bench};
use spudgrade_core::frame_ref::validate_capture;
use spudgrade_core::grading::format_centi;
use spudgrade_core::hdl_emit::{emit_pipeline, EmitConfig};
use spudgrade_core::imgio::{load_image, save_image, ImageFormat};
use spudgrade_core::stream_hw::ClockConfig;
use spudgrade_core::synthgen::{self, SynthSpec};
use spudgrade_core::{AnalysisParams, BackendError, BackendRegistry, Grade, RgbPixel, Thresholds};

use crate::report::{BatchLine, BatchOutcome, ReportJson};
use crate::{AnalysisArgs, BatchCmd, BenchCmd, EmitHdlCmd, GradeCmd, SynthCmd, ThresholdArgs};

pub const EXIT_NO_ROI: u8 = 1;
pub const EXIT_FAILURE: u8 = 2;

/// Command failures, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// The image has no tuber pixels; it cannot be graded.
    NoRoi(String),
    /// I/O, parse or configuration failure.
    Failure(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::NoRoi(_) => ExitCode::from(EXIT_NO_ROI),
            CliError::Failure(_) => ExitCode::from(EXIT_FAILURE),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::NoRoi(m) => f.write_str(m),
            CliError::Failure(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failure(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failure(e.into())
    }
}

type CliResult = Result<ExitCode, CliError>;

fn thresholds(args: &ThresholdArgs) -> anyhow::Result<Thresholds> {
    Ok(Thresholds::new(
        args.t_blue,
        args.t_diff,
        Thresholds::DEFAULT_MARKER,
    )?)
}

fn clock(period_ns: f64) -> anyhow::Result<ClockConfig> {
    Ok(ClockConfig::new(period_ns)?)
}

struct Grader {
    registry: BackendRegistry,
    backend: String,
    params: AnalysisParams,
}

impl Grader {
    fn from_args(args: &AnalysisArgs) -> anyhow::Result<Self> {
        let registry = BackendRegistry::with_defaults();
        registry.get(&args.backend)?;
        Ok(Self {
            registry,
            backend: args.backend.clone(),
            params: AnalysisParams {
                thresholds: thresholds(&args.thresholds)?,
                clock: clock(args.clock_ns)?,
                ..AnalysisParams::default()
            },
        })
    }

    /// Loads and grades one file; the second element is the overlay.
    fn grade_file(&self, path: &Path) -> Result<(ReportJson, spudgrade_core::Frame), CliError> {
        let frame = load_image(path).with_context(|| format!("reading {}", path.display()))?;
        let warnings = validate_capture(&frame, &self.params.thresholds);
        let backend = self
            .registry
            .get(&self.backend)
            .map_err(anyhow::Error::from)?;
        let analysis = backend.analyze(&frame, &self.params).map_err(|e| match e {
            e @ BackendError::Grade(_) if e.is_no_roi() => {
                CliError::NoRoi(format!("{}: {e}", path.display()))
            }
            other => CliError::Failure(anyhow!(other)),
        })?;
        Ok((
            ReportJson::new(&frame, &analysis, &warnings),
            analysis.overlay,
        ))
    }
}

pub fn grade(cmd: GradeCmd) -> CliResult {
    let grader = Grader::from_args(&cmd.analysis)?;
    let (report, overlay) = grader.grade_file(&cmd.path)?;
    if let Some(out) = &cmd.overlay {
        save_image(out, &overlay).with_context(|| format!("writing overlay {}", out.display()))?;
    }
    let mut stdout = io::stdout().lock();
    if cmd.json {
        writeln!(
            stdout,
            "{}",
            serde_json::to_string(&report).context("encoding report")?
        )?;
    } else {
        writeln!(
            stdout,
            "{}",
            report.to_text(&cmd.path.display().to_string())
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

/// Environment variable capping batch parallelism.
pub const THREADS_ENV: &str = "SPUDGRADE_THREADS";

fn worker_count(requested: Option<usize>) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    let default = std::thread::available_parallelism().map_or(1, |n| n.get());
    let jobs = requested.unwrap_or(default).max(1);
    cap.map_or(jobs, |c| jobs.min(c))
}

fn list_images(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.is_file() && ImageFormat::from_path(p).is_some());
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

pub fn batch(cmd: BatchCmd) -> CliResult {
    let grader = Grader::from_args(&cmd.analysis)?;
    let files = list_images(&cmd.dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cmd.jobs))
        .build()
        .context("starting worker pool")?;
    let lines: Vec<BatchLine> = pool.install(|| {
        files
            .par_iter()
            .map(|path| {
                let file = path
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let outcome = match grader.grade_file(path) {
                    Ok((report, _)) => BatchOutcome::Report(report),
                    Err(CliError::NoRoi(message)) => BatchOutcome::Error {
                        error: "no_roi",
                        message,
                    },
                    Err(CliError::Failure(e)) => BatchOutcome::Error {
                        error: "failure",
                        message: format!("{e:#}"),
                    },
                };
                BatchLine { file, outcome }
            })
            .collect()
    });

    let mut stdout = io::stdout().lock();
    for line in &lines {
        writeln!(
            stdout,
            "{}",
            serde_json::to_string(line).context("encoding report")?
        )?;
    }
    stdout.flush()?;
    eprint!("{}", summary_table(&lines));

    let mut worst = 0u8;
    for line in &lines {
        if let BatchOutcome::Error { error, .. } = &line.outcome {
            worst = worst.max(if *error == "no_roi" {
                EXIT_NO_ROI
            } else {
                EXIT_FAILURE
            });
        }
    }
    Ok(ExitCode::from(worst))
}

fn summary_table(lines: &[BatchLine]) -> String {
    let mut s = format!(
        "{:<32} {:>18} {:>8} {:>10} {:>10}\n",
        "file", "grade", "green%", "roi", "green"
    );
    let mut counts = [0usize; 4];
    for line in lines {
        match &line.outcome {
            BatchOutcome::Report(r) => {
                counts[usize::from(r.grade.code())] += 1;
                s += &format!(
                    "{:<32} {:>18} {:>8} {:>10} {:>10}\n",
                    line.file,
                    r.grade.as_str(),
                    format_centi(r.green_percent_centi),
                    r.roi_pixels,
                    r.green_pixels
                );
            }
            BatchOutcome::Error { error, .. } => {
                counts[3] += 1;
                s += &format!("{:<32} {:>18}\n", line.file, format!("error:{error}"));
            }
        }
    }
    s += &format!(
        "{} files: {} {}, {} {}, {} {}, {} errors\n",
        lines.len(),
        counts[0],
        Grade::NotDamaged,
        counts[1],
        Grade::Damaged,
        counts[2],
        Grade::SeriouslyDamaged,
        counts[3]
    );
    s
}

pub fn synth(cmd: SynthCmd) -> CliResult {
    if cmd.count == 0 {
        return Err(anyhow!("--count must be at least 1").into());
    }
    if let Some(f) = cmd.fraction {
        if !(0.0..=1.0).contains(&f) {
            return Err(anyhow!("--fraction must be within [0, 1], got {f}").into());
        }
    }
    let specs = synthgen::corpus_specs_with(cmd.count, cmd.dims, cmd.seed, cmd.fraction)
        .map_err(anyhow::Error::from)?;
    let samples = synthgen::generate_specs(specs).map_err(anyhow::Error::from)?;
    synthgen::write_corpus(&cmd.out_dir, &samples)
        .with_context(|| format!("writing corpus to {}", cmd.out_dir.display()))?;
    let mut stdout = io::stdout().lock();
    for s in &samples {
        writeln!(
            stdout,
            "{}.ppm roi={} green={} fraction={:.4}",
            s.name,
            s.truth.roi_pixels,
            s.truth.green_pixels,
            s.truth.achieved_fraction()
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn bench(cmd: BenchCmd) -> CliResult {
    let t = thresholds(&cmd.thresholds)?;
    let frame = match &cmd.path {
        Some(p) => load_image(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let spec = SynthSpec {
                thresholds: t,
                ..SynthSpec::centered(640, 480, (200, 150), 0.3, 7)
            };
            synthgen::generate(&spec).map_err(anyhow::Error::from)?.0
        }
    };
    let report =
        run_bench(&frame, &t, clock(cmd.clock_ns)?, cmd.iterations).map_err(|e| match e {
            spudgrade_core::bench::BenchError::Backend(b) if b.is_no_roi() => {
                CliError::NoRoi(b.to_string())
            }
            other => CliError::Failure(other.into()),
        })?;
    let mut stdout = io::stdout().lock();
    if cmd.json {
        let mut value = serde_json::to_value(&report).context("encoding report")?;
        value["reference_speedup_ratio"] = reference_speedup().into();
        writeln!(stdout, "{value}")?;
    } else {
        write!(stdout, "{}", render_tables(&report))?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn emit_hdl(cmd: EmitHdlCmd) -> CliResult {
    let config = EmitConfig {
        thresholds: thresholds(&cmd.thresholds)?.with_marker(RgbPixel::PURE_GREEN),
        width: cmd.dims.0,
        height: cmd.dims.1,
        module_name: cmd.module_name,
    };
    let text = emit_pipeline(&config).map_err(anyhow::Error::from)?;
    fs::write(&cmd.out, text).with_context(|| format!("writing {}", cmd.out.display()))?;
    println!(
        "wrote {} ({} counter bits)",
        cmd.out.display(),
        config.counter_bits()
    );
    Ok(ExitCode::SUCCESS)
}
