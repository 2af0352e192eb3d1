//! Command-line surface of the `red-kit` binary.
//!
//! Results go to stdout. Failures print one JSON error record to stderr and
//! exit with 1 (invalid input) or 2 (computation failed).

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::compressor::{compress_len, ByteSequence, CompressError, CompressorId};
use crate::harness::{
    battery, run_experiment, write_report, ExperimentConfig, FittedModel, HarnessError,
};
use crate::infodist::{distance_matrix, ncd, nwd, CorpusCounts, Metric, NwdError, Schedule};
use crate::kg::{self, KgError};
use crate::mdl::{fit_family, Dataset, Family, MdlError, DEFAULT_EPSILON};
use crate::metrics::{priors_pd, red_estimate, AgentSnapshots, MetricError};

#[derive(Parser, Debug)]
#[command(
    name = "red-kit",
    version,
    about = "Compression-based distances, edit distances and adaptation metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized compression distance between two files.
    Ncd {
        file_a: PathBuf,
        file_b: PathBuf,
        #[arg(long, default_value = "lz")]
        backend: String,
    },
    /// Pairwise distance matrix over the files of a directory, as CSV.
    Matrix {
        dir: PathBuf,
        #[arg(long, default_value = "ncd")]
        metric: String,
        #[arg(long, default_value = "lz")]
        backend: String,
        /// Evaluate pairs on one thread.
        #[arg(long)]
        serial: bool,
    },
    /// Normalized web distance between two terms over a corpus file.
    Nwd {
        term_a: String,
        term_b: String,
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Canonical binary encoding of a triples file.
    KgEncode {
        triples: PathBuf,
        /// Write the encoding here instead of printing it as hex.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "lz")]
        backend: String,
    },
    /// Two-part MDL fit of x,y data; prints a model for `detect`.
    Fit {
        data: PathBuf,
        #[arg(long, default_value = "polynomial")]
        family: String,
        #[arg(long, default_value_t = 8)]
        max_terms: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Scores a batch against a fitted model and classifies any mismatch.
    Detect {
        model: PathBuf,
        batch: PathBuf,
        #[arg(long, default_value_t = crate::harness::DEFAULT_TAU)]
        tau: f64,
        #[arg(long, default_value_t = crate::harness::DEFAULT_MARGIN)]
        margin: f64,
    },
    /// Representation edit distance and priors from three snapshot files.
    Red {
        #[arg(long)]
        pre: PathBuf,
        #[arg(long)]
        pretr: PathBuf,
        #[arg(long)]
        post: PathBuf,
        #[arg(long, default_value = "lz")]
        backend: String,
        /// Decode `pretr` and `post` as graph encodings and add the edit-script estimator.
        #[arg(long)]
        kg: bool,
    },
    /// Runs one experiment and prints (or writes) its report.
    Experiment {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs an experiment over consecutive seeds in parallel.
    Battery {
        config: PathBuf,
        #[arg(long)]
        seeds: usize,
        /// Directory for one `report-<seed>.json` per successful run.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub validation: bool,
}

impl CliError {
    fn input(kind: &'static str, message: impl Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
            validation: true,
        }
    }

    fn compute(kind: &'static str, message: impl Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
            validation: false,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.validation {
            1
        } else {
            2
        }
    }

    pub fn record(&self) -> String {
        json!({"error": {"kind": self.kind, "message": self.message}}).to_string()
    }
}

impl From<CompressError> for CliError {
    fn from(e: CompressError) -> Self {
        match e {
            CompressError::UnknownBackend(_) => Self::input("backend", e),
            _ => Self::compute("compressor", e),
        }
    }
}

impl From<KgError> for CliError {
    fn from(e: KgError) -> Self {
        Self::input("kg", e)
    }
}

impl From<MdlError> for CliError {
    fn from(e: MdlError) -> Self {
        match e {
            MdlError::Dataset(_)
            | MdlError::TooFewPoints { .. }
            | MdlError::TermCount(_)
            | MdlError::Degenerate { .. } => Self::input("mdl", e),
            _ => Self::compute("mdl", e),
        }
    }
}

impl From<NwdError> for CliError {
    fn from(e: NwdError) -> Self {
        Self::compute("nwd", e)
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        match e {
            MetricError::Validation(_) | MetricError::EmptyPost => Self::input("metric", e),
            MetricError::Compress(c) => c.into(),
            _ => Self::compute("metric", e),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let kind = e.kind();
        if e.is_validation() {
            Self::input(kind, e)
        } else {
            Self::compute(kind, e)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::input("io", format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    String::from_utf8(read(path)?)
        .map_err(|_| CliError::input("io", format!("{}: not UTF-8", path.display())))
}

fn backend(s: &str) -> Result<CompressorId, CliError> {
    Ok(s.parse::<CompressorId>()?)
}

fn dataset(path: &Path, epsilon: f64) -> Result<Dataset, CliError> {
    Ok(Dataset::from_csv(read(path)?.as_slice(), epsilon)?)
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match cmd {
        Command::Ncd {
            file_a,
            file_b,
            backend: b,
        } => {
            let c = backend(&b)?;
            let d = ncd(
                &ByteSequence::new(read(&file_a)?),
                &ByteSequence::new(read(&file_b)?),
                &c,
            )?;
            format!("{d:.6}\n")
        }
        Command::Matrix {
            dir,
            metric,
            backend: b,
            serial,
        } => {
            let metric: Metric = metric.parse().map_err(|e| CliError::input("metric", e))?;
            let c = backend(&b)?;
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| CliError::input("io", format!("{}: {e}", dir.display())))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(CliError::input(
                    "matrix",
                    format!("{} contains no files", dir.display()),
                ));
            }
            let items = paths
                .iter()
                .map(|p| {
                    let id = p
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    Ok((id, ByteSequence::new(read(p)?)))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let schedule = if serial {
                Schedule::Serial
            } else {
                Schedule::Parallel
            };
            distance_matrix(&items, &c, metric, schedule)?.to_csv()
        }
        Command::Nwd {
            term_a,
            term_b,
            corpus,
        } => {
            let counts = CorpusCounts::from_text(&read_text(&corpus)?);
            format!("{:.6}\n", nwd(&term_a, &term_b, &counts)?)
        }
        Command::KgEncode {
            triples,
            out: path,
            backend: b,
        } => {
            let c = backend(&b)?;
            let g = kg::parse_tsv(&read_text(&triples)?)?;
            let bytes = kg::encode(&g)?;
            let mut summary = json!({
                "entities": g.entities().len(),
                "relations": g.relations().len(),
                "triples": g.triples().len(),
                "bytes": bytes.len(),
                "compressed_bits": compress_len(&bytes, &c)?.bits(),
            });
            match path {
                Some(p) => std::fs::write(&p, bytes.as_bytes())
                    .map_err(|e| CliError::compute("io", format!("{}: {e}", p.display())))?,
                None => summary["hex"] = json!(hex::encode(bytes.as_bytes())),
            }
            pretty(&summary)
        }
        Command::Fit {
            data,
            family,
            max_terms,
            epsilon,
        } => {
            let family: Family = family.parse().map_err(|e| CliError::input("family", e))?;
            let d = dataset(&data, epsilon)?;
            let fit = fit_family(&d, family, max_terms)?;
            pretty(&FittedModel::new(&d, fit)?)
        }
        Command::Detect {
            model,
            batch,
            tau,
            margin,
        } => {
            let m: FittedModel = serde_json::from_str(&read_text(&model)?)
                .map_err(|e| CliError::input("model", e))?;
            let d = dataset(&batch, m.epsilon)?;
            pretty(&m.detect(&d, tau, margin)?)
        }
        Command::Red {
            pre,
            pretr,
            post,
            backend: b,
            kg: graphs,
        } => {
            let c = backend(&b)?;
            let s = AgentSnapshots {
                pre: ByteSequence::new(read(&pre)?),
                pretr: ByteSequence::new(read(&pretr)?),
                post: ByteSequence::new(read(&post)?),
            };
            let decoded = if graphs {
                Some((
                    kg::decode(s.pretr.as_bytes())?,
                    kg::decode(s.post.as_bytes())?,
                ))
            } else {
                None
            };
            let est = red_estimate(&s, decoded.as_ref().map(|(a, b)| (a, b)), &c)?;
            pretty(&json!({
                "backend": c.to_string(),
                "red": est.red,
                "red_estimators": {"conditional": est.conditional, "edit_script": est.edit_script},
                "pd": priors_pd(&s, &c)?,
            }))
        }
        Command::Experiment { config, out: path } => {
            let cfg = ExperimentConfig::from_json(&read_text(&config)?)?;
            let report = run_experiment(&cfg)?;
            match path {
                Some(p) => {
                    write_report(&p, &report)?;
                    String::new()
                }
                None => report.to_json(),
            }
        }
        Command::Battery {
            config,
            seeds,
            out_dir,
        } => {
            if seeds == 0 {
                return Err(CliError::input("battery", "--seeds must be at least 1"));
            }
            let cfg = ExperimentConfig::from_json(&read_text(&config)?)?;
            if let Some(d) = &out_dir {
                std::fs::create_dir_all(d)
                    .map_err(|e| CliError::compute("io", format!("{}: {e}", d.display())))?;
            }
            let mut runs = Vec::with_capacity(seeds);
            let mut failed = 0usize;
            for (seed, result) in battery(&cfg, seeds) {
                match result {
                    Ok(report) => {
                        if let Some(d) = &out_dir {
                            write_report(&d.join(format!("report-{seed}.json")), &report)?;
                        }
                        let value = serde_json::to_value(&report).expect("report serializes");
                        runs.push(json!({"seed": seed, "aggregate": value["aggregate"]}));
                    }
                    Err(e) => {
                        failed += 1;
                        runs.push(json!({"seed": seed, "error": {"kind": e.kind(), "message": e.to_string()}}));
                    }
                }
            }
            let summary =
                pretty(&json!({"config_hash": cfg.hash(), "runs": runs, "failed": failed}));
            if failed > 0 {
                write_output(out, &summary)?;
                return Err(CliError::compute(
                    "battery",
                    format!("{failed} of {seeds} runs failed"),
                ));
            }
            summary
        }
    };
    write_output(out, &text)
}

fn write_output(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::compute("io", e))
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and error records to `err`. Returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", e.record());
            e.exit_code()
        }
    }
}
