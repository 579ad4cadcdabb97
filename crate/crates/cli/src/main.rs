//! `spudgrade`: grade potato images for surface greening.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "spudgrade",
    version,
    about = "Potato greening detection and USDA surface grading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grade a single image.
    Grade(GradeCmd),
    /// Grade every supported image in a directory.
    Batch(BatchCmd),
    /// Write a synthetic corpus with ground-truth side files.
    Synth(SynthCmd),
    /// Time both software backends against the hardware cycle model.
    Bench(BenchCmd),
    /// Emit the pipeline as a Verilog module.
    EmitHdl(EmitHdlCmd),
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Blue cut: a pixel is in the ROI iff b < t_blue (0..=256).
    #[arg(long, default_value_t = 200)]
    pub t_blue: i32,
    /// Green cut: an ROI pixel is green iff r - g < t_diff (-255..=256).
    #[arg(long, default_value_t = 20, allow_hyphen_values = true)]
    pub t_diff: i32,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    /// Backend to run.
    #[arg(long, default_value = "stream")]
    pub backend: String,
    /// Hardware clock period in nanoseconds.
    #[arg(long, default_value_t = spudgrade_core::stream_hw::DEFAULT_CLOCK_PERIOD_NS)]
    pub clock_ns: f64,
}

#[derive(Debug, Args)]
pub struct GradeCmd {
    pub path: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Write the overlay image (green pixels painted) here.
    #[arg(long)]
    pub overlay: Option<PathBuf>,
    /// Print one JSON object instead of the text report.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct BatchCmd {
    pub dir: PathBuf,
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Worker threads (capped by SPUDGRADE_THREADS when set).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SynthCmd {
    #[arg(long, default_value_t = 9)]
    pub count: usize,
    /// Frame size as WIDTHxHEIGHT.
    #[arg(long, default_value = "640x480", value_parser = parse_dims)]
    pub dims: (u32, u32),
    /// Use this target fraction for every frame instead of the default schedule.
    #[arg(long)]
    pub fraction: Option<f64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchCmd {
    /// Image to time; omit with --synthetic.
    #[arg(required_unless_present = "synthetic", conflicts_with = "synthetic")]
    pub path: Option<PathBuf>,
    /// Time a generated 640x480 frame.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long, default_value_t = 5)]
    pub iterations: usize,
    #[arg(long, default_value_t = spudgrade_core::stream_hw::DEFAULT_CLOCK_PERIOD_NS)]
    pub clock_ns: f64,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct EmitHdlCmd {
    #[arg(long, default_value = "pipeline.v")]
    pub out: PathBuf,
    #[command(flatten)]
    pub thresholds: ThresholdArgs,
    #[arg(long, default_value = "640x480", value_parser = parse_dims)]
    pub dims: (u32, u32),
    #[arg(long, default_value = "potato_green_grader")]
    pub module_name: String,
}

fn parse_dims(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<u32>()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| format!("invalid dimension {v:?}"))
    };
    Ok((parse(w)?, parse(h)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Grade(c) => commands::grade(c),
        Command::Batch(c) => commands::batch(c),
        Command::Synth(c) => commands::synth(c),
        Command::Bench(c) => commands::bench(c),
        Command::EmitHdl(c) => commands::emit_hdl(c),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse() {
        assert_eq!(parse_dims("640x480"), Ok((640, 480)));
        assert_eq!(parse_dims("8X9"), Ok((8, 9)));
        assert!(parse_dims("0x4").is_err());
        assert!(parse_dims("640").is_err());
    }

    #[test]
    fn negative_t_diff_parses() {
        let cli = Cli::try_parse_from(["spudgrade", "grade", "a.ppm", "--t-diff", "-40"]).unwrap();
        match cli.command {
            Command::Grade(g) => assert_eq!(g.analysis.thresholds.t_diff, -40),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn verify_cli() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
