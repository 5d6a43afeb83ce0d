use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use geonorm::error::at;
use geonorm::io::corpus::{read_corpus, read_detections, write_corpus, write_detection_file};
use geonorm::io::{load_config, parse_icdar, write_icdar, AugmentMode, ConfigFile};
use geonorm::sampling::{
    gen_rotated_benchmark, gen_synthetic, geometry_aware_augment, sample_dataset, AugmentTargets, SamplingMode,
};
use geonorm::{angle_histogram, match_detections, run_pipeline, BranchConfig, Error, EvalCounts, EvalReport, Rng};

#[derive(Parser)]
#[command(name = "geonorm", version, about = "Geometry normalization tools for oriented text boxes")]
struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Gss,
    Gvs,
    Lgss,
    Aware,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus with uniform geometry.
    GenSynth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        images: usize,
        #[arg(long)]
        per_image: usize,
    },
    /// Rotate every image of a corpus by a uniform random angle.
    RotateBenchmark {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a box file into a branch frame, or back with --inverse.
    Transform {
        /// `<snu>,<onu>`, e.g. `s1/2,o_r`.
        #[arg(long)]
        branch: String,
        #[arg(long)]
        height: f64,
        #[arg(long)]
        width: f64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        inverse: bool,
    },
    /// Build a training corpus with one of the sampling strategies.
    Sample {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the multi-branch pipeline with the simulated detector.
    Simulate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detection files against ground truth.
    Evaluate {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        det: PathBuf,
        #[arg(long)]
        iou: Option<f64>,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Angle histogram of a corpus as CSV.
    AngleHist {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 18)]
        bins: usize,
    },
}

fn parse_branch(s: &str) -> geonorm::Result<BranchConfig> {
    let (snu, onu) =
        s.split_once(',').ok_or_else(|| Error::Config(format!("--branch expects `<snu>,<onu>`, got `{s}`")))?;
    let snu = snu.trim().parse()?;
    let onu = onu.trim().parse()?;
    // the feasible range plays no part in the box transform
    let any = geonorm::GeometryRange::all_angles(f64::MIN_POSITIVE, f64::MAX)?;
    Ok(BranchConfig::new(snu, onu, any))
}

fn run(cli: Cli) -> geonorm::Result<()> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => ConfigFile::default(),
    };
    let mut rng = Rng::new(cli.seed.unwrap_or(cfg.seed));
    let corpus = |dir: &Path| read_corpus(dir, cfg.canvas);

    match cli.command {
        Command::GenSynth { out, images, per_image } => {
            let synth = gen_synthetic(&mut rng, images, per_image, &cfg.synth_domain, cfg.canvas)?;
            if synth.shortfall > 0 {
                eprintln!("warning: {} boxes could not be placed", synth.shortfall);
            }
            write_corpus(&out, &synth.images)
        }
        Command::RotateBenchmark { input, out } => {
            let data = corpus(&input)?;
            write_corpus(&out, &gen_rotated_benchmark(&data, &mut rng))
        }
        Command::Transform { branch, height, width, input, out, inverse } => {
            let br = parse_branch(&branch)?;
            if !(height > 0.0 && width > 0.0) {
                return Err(Error::Config("--height and --width must be positive".into()));
            }
            let mut instances = parse_icdar(&at(&input, std::fs::read_to_string(&input))?)?;
            for inst in &mut instances {
                inst.bbox = if inverse {
                    br.backward_box(&inst.bbox, height, width)
                } else {
                    br.forward_box(&inst.bbox, height, width)
                };
            }
            at(&out, std::fs::write(&out, write_icdar(&instances)))?;
            Ok(())
        }
        Command::Sample { mode, input, out } => {
            let data = corpus(&input)?;
            let sampled = match mode {
                ModeArg::Aware => {
                    let targets = match cfg.augment_mode {
                        AugmentMode::PerBranch => AugmentTargets::PerBranch(&cfg.pipeline.gnm),
                        AugmentMode::Random => AugmentTargets::Random(cfg.pipeline.gnm.global_domain()),
                    };
                    let mut all = Vec::new();
                    for img in &data {
                        all.push(img.clone());
                        all.extend(geometry_aware_augment(img, &mut rng.split(), &targets, cfg.augment_k));
                    }
                    all
                }
                other => {
                    let m = match other {
                        ModeArg::Gss => SamplingMode::Gss,
                        ModeArg::Gvs => SamplingMode::Gvs,
                        _ => SamplingMode::Lgss,
                    };
                    sample_dataset(m, &data, &cfg.eval_range, &cfg.wide_range, &mut rng)?
                }
            };
            write_corpus(&out, &sampled)
        }
        Command::Simulate { input, out } => {
            let data = corpus(&input)?;
            at(&out, std::fs::create_dir_all(&out))?;
            for img in &data {
                let dets = run_pipeline(&cfg.pipeline, img, &mut rng.split());
                write_detection_file(&out, &img.id, &dets)?;
            }
            Ok(())
        }
        Command::Evaluate { gt, det, iou, format } => {
            let iou = iou.unwrap_or(cfg.iou_thresh);
            if !(iou > 0.0 && iou < 1.0) {
                return Err(Error::Config(format!("--iou must lie in (0, 1), got {iou}")));
            }
            let gt = corpus(&gt)?;
            let dets = read_detections(&det)?;
            let counts: EvalCounts = gt
                .iter()
                .map(|img| {
                    let d = dets.get(&img.id).map(Vec::as_slice).unwrap_or(&[]);
                    match_detections(&img.instances, d, iou).counts()
                })
                .sum();
            let report = EvalReport::from_counts(counts);
            match format {
                FormatArg::Json => println!("{}", report.to_json()),
                FormatArg::Table => println!("{report}"),
            }
            Ok(())
        }
        Command::AngleHist { input, bins } => {
            if bins == 0 {
                return Err(Error::Config("--bins must be positive".into()));
            }
            let data = corpus(&input)?;
            print!("{}", geonorm::evaluation::histogram_csv(&angle_histogram(&data, bins)));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
