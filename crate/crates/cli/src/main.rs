//! `potts-lab`: command-line driver for the potts-glass library.
//!
//! Results go to `--out`, else to `$POTTS_LAB_OUT_DIR/<command>.<csv|json>`,
//! else to standard output. The human-readable summary always goes to
//! standard error.

mod commands;
mod options;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use options::{Command, Format};

const OUT_DIR_VAR: &str = "POTTS_LAB_OUT_DIR";

fn destination(command: Command, out: Option<PathBuf>, format: Format) -> Option<PathBuf> {
    if let Some(p) = out {
        return (p.as_os_str() != "-").then_some(p);
    }
    let dir = std::env::var_os(OUT_DIR_VAR).filter(|d| !d.is_empty())?;
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    Some(PathBuf::from(dir).join(format!("{}.{ext}", commands::file_stem(command))))
}

fn write_output(path: Option<&PathBuf>, body: &str) -> std::io::Result<()> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(p, body)
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match options::parse(std::env::args().collect()) {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let opts = cli.opts;

    if let Some(threads) = opts.threads {
        if threads == 0 {
            eprintln!("error: invalid `threads`: must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: threads: {e}");
            return ExitCode::from(2);
        }
    }

    let report = match commands::run(cli.command, &opts) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };

    let format = opts.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Csv => report.csv,
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json).expect("json values serialize");
            s.push('\n');
            s
        }
    };
    let path = destination(cli.command, opts.out, format);
    if let Err(e) = write_output(path.as_ref(), &body) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(2);
    }
    eprintln!("{}", report.summary);
    if let Some(p) = path {
        eprintln!("wrote {}", p.display());
    }
    if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
