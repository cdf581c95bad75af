use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qsea::experiment::{self, AblationAxis};
use qsea::report::{self, ChartKind, CsvRow};
use qsea::{RunConfig, RunMetrics};

#[derive(Parser)]
#[command(name = "qsea", version, about = "Quantum self-supervised learning with entanglement augmentation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Config file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Number of seeded repeats, overriding the config.
    #[arg(long)]
    repeats: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Classes,
    Qubits,
    Samples,
}

impl From<Axis> for AblationAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Classes => AblationAxis::Classes,
            Axis::Qubits => AblationAxis::Qubits,
            Axis::Samples => AblationAxis::Samples,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Chart {
    Line,
    Bar,
}

#[derive(Subcommand)]
enum Command {
    /// Train augmentation angles on the training split; writes train.csv and params.txt.
    Train(Common),
    /// Evaluate trained angles, or train and evaluate every repeat; writes eval.csv.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Angles written by `train`; when omitted each repeat trains its own.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Sweep one experiment axis; writes ablation_<axis>.csv.
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<usize>,
    },
    /// Train once per repeat and evaluate at each noise strength; writes noise_sweep.csv.
    NoiseSweep {
        #[command(flatten)]
        common: Common,
        /// Comma-separated per-channel probabilities.
        #[arg(long, value_delimiter = ',', default_value = "0,0.005,0.01,0.02")]
        probs: Vec<f64>,
    },
    /// Render an SVG chart from a metrics CSV.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "bar")]
        kind: Chart,
        #[arg(long)]
        title: Option<String>,
    },
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn load_config(c: &Common) -> CliResult<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(r) = c.repeats {
        cfg.repeats = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_rows(dir: &Path, name: &str, rows: &[CsvRow]) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    report::write_csv(BufWriter::new(File::create(&path)?), rows)?;
    Ok(path)
}

fn print_accuracy(rows: &[CsvRow]) {
    let accs: Vec<f64> = rows.iter().filter_map(|r| r.acc).collect();
    if accs.is_empty() {
        return;
    }
    let max = accs.iter().copied().fold(f64::MIN, f64::max);
    let avg = accs.iter().sum::<f64>() / accs.len() as f64;
    println!("accuracy over {} run(s): max {max:.4} avg {avg:.4}", accs.len());
}

fn train(c: &Common) -> CliResult<()> {
    let cfg = load_config(c)?;
    let split = experiment::prepare(&cfg, experiment::load_pool(&cfg)?.as_ref())?;
    let (params, metrics) = qsea::train::train(&split.train_states, &cfg)?;
    let path = write_rows(&c.out, "train.csv", &CsvRow::per_epoch(0, "none", "", &metrics))?;
    fs::write(c.out.join("params.txt"), report::params_to_text(&params))?;
    if let (Some(first), Some(last)) = (metrics.losses.first(), metrics.losses.last()) {
        println!("loss {:.4} -> {:.4} over {} epochs", first.total, last.total, metrics.losses.len());
    }
    println!("wrote {} and params.txt", path.display());
    Ok(())
}

fn eval(c: &Common, params: Option<&Path>) -> CliResult<()> {
    let cfg = load_config(c)?;
    let rows = match params {
        Some(p) => {
            let trained = report::params_from_text(&fs::read_to_string(p)?)?;
            if trained.n_data() != cfg.n_qubits {
                return Err(format!("{} holds {}-qubit angles, config has {}", p.display(), trained.n_data(), cfg.n_qubits).into());
            }
            let split = experiment::prepare(&cfg, experiment::load_pool(&cfg)?.as_ref())?;
            let start = std::time::Instant::now();
            let acc = experiment::evaluate(&cfg, &trained, &split)?;
            let m = RunMetrics { seed: cfg.seed, accuracy: Some(acc), wall_s: start.elapsed().as_secs_f64(), ..Default::default() };
            vec![CsvRow::summary(0, "none", "", &m)]
        }
        None => {
            let s = experiment::run_repeats(&cfg, cfg.repeats)?;
            s.runs.iter().enumerate().map(|(i, m)| CsvRow::summary(i, "repeat", &i.to_string(), m)).collect()
        }
    };
    print_accuracy(&rows);
    println!("wrote {}", write_rows(&c.out, "eval.csv", &rows)?.display());
    Ok(())
}

fn ablate(c: &Common, axis: AblationAxis, values: &[usize]) -> CliResult<()> {
    let cfg = load_config(c)?;
    let rows = experiment::run_ablation(&cfg, axis, values, cfg.repeats)?;
    for v in values {
        let cell: Vec<CsvRow> = rows.iter().filter(|r| r.value == v.to_string()).cloned().collect();
        print!("{axis}={v}: ");
        print_accuracy(&cell);
    }
    println!("wrote {}", write_rows(&c.out, &format!("ablation_{axis}.csv"), &rows)?.display());
    Ok(())
}

fn noise_sweep(c: &Common, probs: &[f64]) -> CliResult<()> {
    let cfg = load_config(c)?;
    let rows = experiment::noise_sweep(&cfg, probs, cfg.repeats)?;
    for p in probs {
        let cell: Vec<CsvRow> = rows.iter().filter(|r| r.value == p.to_string()).cloned().collect();
        print!("p={p}: ");
        print_accuracy(&cell);
    }
    println!("wrote {}", write_rows(&c.out, "noise_sweep.csv", &rows)?.display());
    Ok(())
}

fn plot(input: &Path, output: Option<&Path>, kind: Chart, title: Option<&str>) -> CliResult<()> {
    let rows = report::read_csv(File::open(input)?)?;
    let acc = report::accuracy_series(&rows);
    // accuracy per axis value when available, otherwise loss curves
    let (series, y_label) = if acc.iter().any(|s| s.points.len() > 1) || rows.iter().all(|r| r.epoch.is_none()) {
        (acc, "accuracy")
    } else {
        (report::loss_series(&rows), "total loss")
    };
    let kind = match kind {
        Chart::Line => ChartKind::Line,
        Chart::Bar => ChartKind::Bar,
    };
    let title = title.map(str::to_string).unwrap_or_else(|| input.file_stem().unwrap_or_default().to_string_lossy().into_owned());
    let out = output.map(Path::to_path_buf).unwrap_or_else(|| input.with_extension("svg"));
    fs::write(&out, report::render_svg(&title, y_label, &series, kind))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    experiment::configure_threads()?;
    match cli.command {
        Command::Train(c) => train(&c),
        Command::Eval { common, params } => eval(&common, params.as_deref()),
        Command::Ablate { common, axis, values } => ablate(&common, axis.into(), &values),
        Command::NoiseSweep { common, probs } => noise_sweep(&common, &probs),
        Command::Plot { input, output, kind, title } => plot(&input, output.as_deref(), kind, title.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
