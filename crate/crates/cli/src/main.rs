use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use superloops_cli::suite::{check_golden, run_file, run_suite, Format, Golden};
use superloops_cli::{parse, CliError, Options};

#[derive(Parser)]
#[command(name = "superloops", version, about = "Run exact verification scripts")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one script and print its report.
    Run {
        script: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run every `.sl` script of a directory.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print a script in canonical form.
    Fmt { script: PathBuf },
}

#[derive(Args)]
struct Flags {
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
    /// Compare reports with the files stored in this directory.
    #[arg(long, value_name = "DIR")]
    golden: Option<PathBuf>,
    /// With --golden, overwrite the stored files.
    #[arg(long, requires = "golden")]
    bless: bool,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Default nilpotency order for additivity and taylor.
    #[arg(long, default_value_t = 3)]
    caps: u32,
    /// Add wall-clock timing to reports.
    #[arg(long)]
    timing: bool,
}

impl Flags {
    fn options(&self) -> Options {
        Options {
            seed: self.seed,
            caps: self.caps,
            timing: self.timing,
        }
    }

    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            Format::Text
        }
    }

    fn golden(&self) -> Option<Golden> {
        self.golden.as_ref().map(|dir| Golden {
            dir: dir.clone(),
            bless: self.bless,
        })
    }
}

const FAILED: u8 = 1;
const ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { script, flags } => run_one(&script, &flags),
        Cmd::Suite { dir, flags } => suite(&dir, &flags),
        Cmd::Fmt { script } => match fs::read_to_string(&script) {
            Ok(src) => match parse(&src) {
                Ok(s) => {
                    print!("{s}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", script.display());
                    ExitCode::from(ERROR)
                }
            },
            Err(e) => {
                eprintln!("error: {}: {e}", script.display());
                ExitCode::from(ERROR)
            }
        },
    }
}

fn run_one(script: &Path, flags: &Flags) -> ExitCode {
    let report = match run_file(script, &flags.options()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR);
        }
    };
    let format = flags.format();
    let rendered = format.render(&report);
    print!("{rendered}");
    if let Some(g) = flags.golden() {
        if let Err(e) = check_golden(script, &rendered, format, &g) {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                CliError::Golden { .. } => FAILED,
                _ => ERROR,
            });
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILED)
    }
}

fn suite(dir: &Path, flags: &Flags) -> ExitCode {
    let golden = flags.golden();
    let entries = match run_suite(dir, &flags.options(), flags.format(), golden.as_ref()) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(ERROR);
        }
    };
    let mut errors = false;
    for e in &entries {
        let name = e.script.file_name().unwrap_or_default().to_string_lossy();
        match &e.outcome {
            Ok(r) => {
                let mark = if e.passed() { "PASS" } else { "FAIL" };
                println!("[{mark}] {name}: {} {}", r.command, r.verdict());
                if let Some(Err(g)) = &e.golden {
                    println!("       {g}");
                }
            }
            Err(err) => {
                errors = true;
                println!("[ERROR] {name}: {err}");
            }
        }
    }
    let passed = entries.iter().filter(|e| e.passed()).count();
    println!("suite: {passed}/{} scripts passed", entries.len());
    if errors {
        ExitCode::from(ERROR)
    } else if passed == entries.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILED)
    }
}
