//! The `ils` command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ils_core::learning::{DEFAULT_CANDIDATE_CAP, DEFAULT_MAX_PATH_EDGES};
use ils_core::retrieval::DEFAULT_TOP_K;
use ils_core::{learn, query, tensor_product, Csd, ExtractOptions, ThreadStore, DEFAULT_DECAY};
use thiserror::Error;

use crate::dot::{cluster_to_dot, csd_to_dot};
use crate::format::{
    decode, parse_constraints, parse_thread_blocks, parse_thread_file, serialize_threads,
    FormatError,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ils",
    version,
    about = "Combine, sieve and query knowledge threads"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check every thread of a file.
    Validate {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DECAY)]
        decay: f64,
    },
    /// Tensor two threads together and keep the valid derived threads.
    Combine {
        file1: PathBuf,
        file2: PathBuf,
        /// Thread of FILE1 to use when it holds more than one.
        #[arg(long)]
        thread1: Option<String>,
        /// Thread of FILE2 to use when it holds more than one.
        #[arg(long)]
        thread2: Option<String>,
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_DECAY)]
        decay: f64,
        #[arg(long = "max-len", default_value_t = DEFAULT_MAX_PATH_EDGES)]
        max_len: usize,
        #[arg(long = "min-score", default_value_t = 0.0)]
        min_score: f64,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        cap: usize,
        /// Print the verdict of every rejected candidate.
        #[arg(long)]
        explain: bool,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Rank the threads that hold a concept.
    Query {
        /// A thread file, or a directory whose `*.ilt` files are loaded.
        store: PathBuf,
        #[arg(long)]
        concept: String,
        #[arg(long, default_value_t = DEFAULT_TOP_K as u64, value_parser = clap::value_parser!(u64).range(1..))]
        top: u64,
        #[arg(long, default_value_t = DEFAULT_DECAY)]
        decay: f64,
    },
    /// Render threads, or the product of two threads, as Graphviz DOT.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        thread: Option<String>,
        /// Render the product of the selected thread with a thread of this file.
        #[arg(long)]
        with: Option<PathBuf>,
        #[arg(long = "with-thread")]
        with_thread: Option<String>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_threads(path: &Path, decay: f64) -> Result<Vec<Csd>, CliError> {
    parse_thread_file(&read(path)?, decay).map_err(|source| CliError::Format {
        path: path.to_path_buf(),
        source,
    })
}

fn check_decay(decay: f64) -> Result<(), CliError> {
    if decay > 0.0 && decay < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--decay {decay} is outside (0, 1)"
        )))
    }
}

/// The thread named `wanted`, or the only thread of the file.
fn pick(threads: Vec<Csd>, wanted: Option<&str>, path: &Path) -> Result<Csd, CliError> {
    match wanted {
        Some(id) => threads
            .into_iter()
            .find(|t| t.id() == id)
            .ok_or_else(|| CliError::Usage(format!("{}: no thread `{id}`", path.display()))),
        None if threads.len() == 1 => Ok(threads.into_iter().next().expect("one thread")),
        None => Err(CliError::Usage(format!(
            "{}: holds {} threads, choose one by id",
            path.display(),
            threads.len()
        ))),
    }
}

fn store_files(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let io_err = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(io_err)? {
        let p = entry.map_err(io_err)?.path();
        if p.is_file() && p.extension().is_some_and(|e| e == "ilt") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn validate(file: &Path, decay: f64, out: &mut dyn Write) -> Result<i32, CliError> {
    check_decay(decay)?;
    let bytes = read(file)?;
    let format_err = |source| CliError::Format {
        path: file.to_path_buf(),
        source,
    };
    let blocks = parse_thread_blocks(decode(&bytes).map_err(format_err)?).map_err(format_err)?;
    let mut code = EXIT_OK;
    for b in &blocks {
        match b.validate(decay) {
            Ok(_) => writeln!(out, "{}\tvalid", b.id),
            Err(e) => {
                code = EXIT_INVALID;
                writeln!(out, "{}\tinvalid\t{}\t{}", b.id, e.kind(), e)
            }
        }
        .map_err(stdout_err)?;
    }
    Ok(code)
}

fn stdout_err(source: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source,
    }
}

fn execute(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Validate { file, decay } => validate(&file, decay, out),
        Command::Combine {
            file1,
            file2,
            thread1,
            thread2,
            constraints,
            decay,
            max_len,
            min_score,
            cap,
            explain,
            output,
        } => {
            check_decay(decay)?;
            let left = pick(load_threads(&file1, decay)?, thread1.as_deref(), &file1)?;
            let right = pick(load_threads(&file2, decay)?, thread2.as_deref(), &file2)?;
            let constraints = match constraints {
                Some(p) => parse_constraints(&read(&p)?).map_err(|source| CliError::Format {
                    path: p.clone(),
                    source,
                })?,
                None => Default::default(),
            };
            let opts = ExtractOptions {
                max_path_edges: max_len,
                cap,
                decay,
            };
            let cluster = tensor_product(&left, &right);
            let set = learn(&cluster, &opts, &constraints, min_score)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let derived = set.ranked_threads(&format!("{}x{}", left.id(), right.id()));
            let text = serialize_threads(&derived).map_err(|source| CliError::Format {
                path: output.clone(),
                source,
            })?;
            write(&output, &text)?;
            writeln!(
                out,
                "valid={} rejected={}",
                set.valid.len(),
                set.rejected.len()
            )
            .map_err(stdout_err)?;
            if explain {
                for c in &set.rejected {
                    writeln!(out, "rejected\t{c}").map_err(stdout_err)?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Query {
            store,
            concept,
            top,
            decay,
        } => {
            check_decay(decay)?;
            let mut threads = ThreadStore::new();
            for f in store_files(&store)? {
                for t in load_threads(&f, decay)? {
                    threads.insert(t);
                }
            }
            let top = usize::try_from(top).unwrap_or(usize::MAX);
            for hit in query(&threads, &concept, top) {
                writeln!(out, "{:.6}\t{}\t{}", hit.score, hit.thread.id(), hit.anchor)
                    .map_err(stdout_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::ExportDot {
            file,
            thread,
            with,
            with_thread,
            output,
        } => {
            let threads = load_threads(&file, DEFAULT_DECAY)?;
            let text = match with {
                Some(other) => {
                    let left = pick(threads, thread.as_deref(), &file)?;
                    let right = pick(
                        load_threads(&other, DEFAULT_DECAY)?,
                        with_thread.as_deref(),
                        &other,
                    )?;
                    cluster_to_dot(&tensor_product(&left, &right))
                }
                None => match thread {
                    Some(_) => csd_to_dot(&pick(threads, thread.as_deref(), &file)?),
                    None => threads.iter().map(csd_to_dot).collect(),
                },
            };
            write(&output, &text)?;
            Ok(EXIT_OK)
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("usage error");
            let _ = writeln!(err, "ils: {}", first.trim_start_matches("error: "));
            return EXIT_ERROR;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "ils: {e}");
            EXIT_ERROR
        }
    }
}
