//! Command line front end for `polyeval`.

pub mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyeval::mpeval::multipoint_eval_report;
use polyeval::oracle::horner_precision;
use polyeval::refine::{refine_batch, RefineJob};
use polyeval::taylor::{taylor_shift, ShiftProblem};
use polyeval::workload::{eval_instance, horner_eval_all};
use polyeval::{interpolate, multipoint_eval, DyadicComplex, Error, InterpProblem};

use files::ParseError;

#[derive(Parser, Debug)]
#[command(name = "polyeval", version, about = "Certified polynomial evaluation, interpolation, Taylor shift and root refinement")]
struct Cli {
    /// Upper limit on worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Prec {
    /// Absolute precision L: results are within 2^-L.
    #[arg(long = "prec", value_name = "L", allow_negative_numbers = true)]
    l: i64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate a polynomial at a list of points.
    Eval {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[command(flatten)]
        prec: Prec,
    },
    /// Interpolate values at distinct points.
    Interp {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        values: PathBuf,
        #[command(flatten)]
        prec: Prec,
    },
    /// Taylor shift: the coefficients of F(m + x).
    Shift {
        #[arg(long)]
        poly: PathBuf,
        /// Complex literal, e.g. `0x3p0+0x1p-1i`.
        #[arg(long, allow_hyphen_values = true)]
        m: String,
        #[command(flatten)]
        prec: Prec,
    },
    /// Refine isolating intervals of real roots to width 2^-L.
    Refine {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        intervals: PathBuf,
        #[command(flatten)]
        prec: Prec,
    },
    /// Time random evaluation instances and write a CSV report.
    Bench {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        n: usize,
        #[arg(long = "prec", value_name = "L")]
        l: i64,
        #[arg(long, default_value_t = 8)]
        tau: i64,
        #[arg(long, default_value_t = 8)]
        gamma: i64,
        #[arg(long, default_value_t = 1)]
        repeat: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Eval,
    Horner,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Parse(PathBuf, ParseError),
    Io(PathBuf, std::io::Error),
    Compute(Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Parse(..) => 2,
            Failure::Compute(Error::PrecisionExhausted { .. } | Error::CoincidentPoints { .. } | Error::EvaluationUndecidable { .. }) => 3,
            Failure::Compute(Error::Parse(_)) => 2,
            Failure::Io(..) | Failure::Compute(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn parsed<T>(path: &Path, f: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, Failure> {
    f(&read(path)?).map_err(|e| Failure::Parse(path.to_owned(), e))
}

/// Runs the command line `args` (program name first) and returns the exit
/// status. Diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = write!(stderr, "{e}");
            return code;
        }
    };
    let result = match cli.workers {
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(cli.cmd)),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
        None => dispatch(cli.cmd),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = match &f {
                Failure::Usage(m) => writeln!(stderr, "error: {m}"),
                Failure::Parse(p, e) => writeln!(stderr, "{}: parse error at {e}", p.display()),
                Failure::Io(p, e) => writeln!(stderr, "{}: {e}", p.display()),
                Failure::Compute(e) => writeln!(stderr, "{}: {e}", e.name()),
            };
            f.code()
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Eval { poly, points, prec } => {
            let f = parsed(&poly, files::parse_poly)?;
            let pts = parsed(&points, files::parse_complex_list)?;
            let ys = multipoint_eval(&f, &pts, prec.l)?;
            write(&prec.out, &files::format_complex_list(&ys))
        }
        Cmd::Interp { points, values, prec } => {
            let pts = parsed(&points, files::parse_complex_list)?;
            let vals = parsed(&values, files::parse_complex_list)?;
            if pts.len() != vals.len() {
                return Err(Failure::Usage(format!("{} points but {} values", pts.len(), vals.len())));
            }
            if pts.is_empty() {
                return Err(Failure::Usage("no points".into()));
            }
            let f = interpolate(&InterpProblem::new(pts, vals), prec.l)?;
            write(&prec.out, &files::format_poly(&f))
        }
        Cmd::Shift { poly, m, prec } => {
            let f = parsed(&poly, files::parse_poly)?;
            let m: DyadicComplex = m.parse().map_err(|_| Failure::Usage(format!("invalid complex literal `{m}` for --m")))?;
            let g = taylor_shift(&ShiftProblem { f, m, big_l: prec.l })?;
            write(&prec.out, &files::format_poly(&g))
        }
        Cmd::Refine { poly, intervals, prec } => {
            let f = parsed(&poly, files::parse_poly)?;
            let ivs = parsed(&intervals, files::parse_intervals)?;
            let out = refine_batch(&RefineJob { f, intervals: ivs, big_l: prec.l })?;
            write(&prec.out, &files::format_intervals(&out))
        }
        Cmd::Bench { mode, n, l, tau, gamma, repeat, seed, out } => bench(mode, n, l, tau, gamma, repeat, seed, &out),
    }
}

#[allow(clippy::too_many_arguments)]
fn bench(mode: Mode, n: usize, l: i64, tau: i64, gamma: i64, repeat: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::Usage("--n must be positive".into()));
    }
    let mut csv = String::from("mode,n,prec,tau,gamma,run,seconds,work_bits,tree_bits,div_bits,escalations\n");
    for run in 0..repeat.max(1) {
        let (f, pts) = eval_instance(seed + run as u64, n, tau, gamma);
        let t = Instant::now();
        let (work, tree, div, esc) = match mode {
            Mode::Eval => {
                let (_, rep) = multipoint_eval_report(&f, &pts, l)?;
                (rep.query_bits, rep.max_tree_bits, rep.max_div_bits, rep.escalations)
            }
            Mode::Horner => {
                horner_eval_all(&f, &pts, l);
                let work = pts.iter().map(|x| horner_precision(&f, x, l)).max().unwrap_or(0);
                (work, 0, 0, 0)
            }
        };
        let secs = t.elapsed().as_secs_f64();
        let name = match mode {
            Mode::Eval => "eval",
            Mode::Horner => "horner",
        };
        csv.push_str(&format!("{name},{n},{l},{tau},{gamma},{run},{secs:.6},{work},{tree},{div},{esc}\n"));
    }
    write(out, &csv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Compute(Error::EvaluationUndecidable { interval: 0 }).code(), 3);
        assert_eq!(Failure::Compute(Error::PrecisionExhausted { attempts: 7 }).code(), 3);
        assert_eq!(Failure::Compute(Error::CoincidentPoints { first: 0, second: 1 }).code(), 3);
        assert_eq!(Failure::Parse(PathBuf::from("x"), ParseError { line: 4, msg: String::new() }).code(), 2);
        assert_eq!(Failure::Compute(Error::NotMonic).code(), 1);
    }
}
