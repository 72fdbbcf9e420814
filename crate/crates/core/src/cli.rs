//! The `matfix` command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or bad input,
//! 3 I/O failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::bits::SeededBits;
use crate::format::{read_matrix, write_matrix, FormatError};
use crate::harness::criteria::{run_criteria, Suite};
use crate::harness::{generate_instance, run_algo, Algo, Pattern, RunConfig, RunStats};
use crate::matrix::Matrix;
use crate::ring::RingContext;
use crate::verifier::{default_rounds, freivalds_rounds, verify_product};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "matfix", version, about = "Verify and correct matrix products with a few wrong entries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write a random instance: A, B, a corrupted product and the true product.
    Gen(GenArgs),
    /// Check C = A B with random 0/1 vectors.
    Verify(VerifyArgs),
    /// Repair C so that it equals A B.
    Correct(CorrectArgs),
    /// Run the acceptance grid and write per-trial statistics.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Ring modulus; 0 selects wrapping u64 arithmetic.
    #[arg(long = "mod", default_value_t = 2_147_483_647)]
    modulus: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Pattern::UniformCells)]
    pattern: Pattern,
    #[arg(long)]
    out_a: PathBuf,
    #[arg(long)]
    out_b: PathBuf,
    #[arg(long)]
    out_c: PathBuf,
    #[arg(long)]
    out_truth: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    c: PathBuf,
    /// Number of random vectors; defaults to 3 ceil(log2 n).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct CorrectArgs {
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long)]
    c: PathBuf,
    /// Number of wrong entries (a bound for det1/det2).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Suite::Smoke)]
    suite: Suite,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated criterion numbers; all ten by default.
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..=10))]
    criteria: Vec<u64>,
}

/// A failed command: exit code and message.
struct Fail(i32, String);

impl From<FormatError> for Fail {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Io(_) => Fail(EXIT_IO, e.to_string()),
            FormatError::Parse { .. } => Fail(EXIT_USAGE, e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<Matrix<RingContext>, Fail> {
    read_matrix(path).map_err(|e| {
        let Fail(code, msg) = Fail::from(e);
        Fail(code, format!("{}: {msg}", path.display()))
    })
}

fn save(path: &Path, m: &Matrix<RingContext>) -> Result<(), Fail> {
    write_matrix(path, m).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", path.display())))
}

fn io_fail(e: std::io::Error) -> Fail {
    Fail(EXIT_IO, e.to_string())
}

fn load_triple(a: &Path, b: &Path, c: &Path) -> Result<[Matrix<RingContext>; 3], Fail> {
    let (a, b, c) = (load(a)?, load(b)?, load(c)?);
    if a.ring() != b.ring() || a.ring() != c.ring() {
        return Err(Fail(EXIT_USAGE, "input files use different moduli".into()));
    }
    if a.cols() != b.rows() || a.rows() != c.rows() || b.cols() != c.cols() {
        return Err(Fail(
            EXIT_USAGE,
            format!(
                "dimension mismatch: A {}x{}, B {}x{}, C {}x{}",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols()
            ),
        ));
    }
    Ok([a, b, c])
}

fn cmd_gen(g: &GenArgs) -> Result<(), Fail> {
    let cells = g.n * g.n;
    if g.k > cells {
        return Err(Fail(EXIT_USAGE, format!("k exceeds n^2 ({} > {cells})", g.k)));
    }
    let ring = RingContext::from_modulus(g.modulus).map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    let inst = generate_instance(g.n, g.k, ring, g.seed, g.pattern).map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    save(&g.out_a, &inst.a)?;
    save(&g.out_b, &inst.b)?;
    save(&g.out_c, &inst.c_err)?;
    save(&g.out_truth, &inst.c_true)
}

fn cmd_verify(v: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let [a, b, c] = load_triple(&v.a, &v.b, &v.c)?;
    let n = c.rows().max(c.cols());
    let rounds = v.rounds.unwrap_or_else(|| default_rounds(3, n));
    let mut bits = SeededBits::seeded(v.seed);
    let rows = freivalds_rounds(&a, &b, &c, rounds, &mut bits).map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    if rows.is_empty() {
        writeln!(out, "ok").map_err(io_fail)?;
        return Ok(EXIT_OK);
    }
    let list: Vec<String> = rows.iter().map(usize::to_string).collect();
    writeln!(out, "mismatch rows: {}", list.join(" ")).map_err(io_fail)?;
    Ok(EXIT_VERIFY)
}

fn cmd_correct(c: &CorrectArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    if c.algo.needs_k() && c.k.is_none() {
        return Err(Fail(EXIT_USAGE, format!("--algo {} requires --k", c.algo)));
    }
    let [a, b, cm] = load_triple(&c.a, &c.b, &c.c)?;
    let cells = cm.rows() * cm.cols();
    if let Some(k) = c.k.filter(|&k| k > cells) {
        return Err(Fail(EXIT_USAGE, format!("k exceeds n^2 ({k} > {cells})")));
    }
    let k = if c.algo == Algo::Rand { None } else { c.k };
    let start = Instant::now();
    let result = run_algo(c.algo, &a, &b, &cm, k, &RunConfig::default(), c.seed);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let (fixed, report) = result.map_err(|e| Fail(EXIT_VERIFY, format!("{} failed: {e}", c.algo)))?;

    let n = cm.rows().max(cm.cols());
    // independent of the corrector's own stream
    let mut check_bits = SeededBits::stream(c.seed, 0xC4EC);
    let ok = verify_product(&a, &b, &fixed, default_rounds(3, n), &mut check_bits)
        .map_err(|e| Fail(EXIT_USAGE, e.to_string()))?;
    save(&c.out, &fixed)?;
    let stats = RunStats {
        algo: c.algo.name().to_string(),
        n,
        k_true: report.corrections.len(),
        k_param: k,
        corrections: report.corrections.len(),
        ring_mults: report.ring_mults,
        random_bits: report.random_bits,
        restarts: report.restarts,
        wall_ms,
        success: ok,
    };
    writeln!(out, "{}", stats.to_json_line()).map_err(io_fail)?;
    Ok(if ok { EXIT_OK } else { EXIT_VERIFY })
}

fn cmd_bench(bench: &BenchArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let ids: Vec<usize> = if bench.criteria.is_empty() {
        (1..=10).collect()
    } else {
        bench.criteria.iter().map(|&c| c as usize).collect()
    };
    let report = run_criteria(&ids, bench.suite);
    let mut jsonl = String::new();
    for s in &report.stats {
        jsonl.push_str(&s.to_json_line());
        jsonl.push('\n');
    }
    std::fs::write(&bench.out, jsonl).map_err(|e| Fail(EXIT_IO, format!("{}: {e}", bench.out.display())))?;
    for o in &report.outcomes {
        writeln!(out, "{}", o.line()).map_err(io_fail)?;
    }
    Ok(if report.all_pass() { EXIT_OK } else { EXIT_VERIFY })
}

/// Runs the command line on `args` (including the program name) and returns
/// the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let code = e.exit_code();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    let result = match &cli.cmd {
        Cmd::Gen(g) => cmd_gen(g).map(|()| EXIT_OK),
        Cmd::Verify(v) => cmd_verify(v, out),
        Cmd::Correct(c) => cmd_correct(c, out),
        Cmd::Bench(b) => cmd_bench(b, out),
    };
    match result {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

/// Drops `wall_ms` from every JSON line.
fn strip_wall_time(text: &str) -> String {
    text.lines()
        .map(|line| match serde_json::from_str::<serde_json::Value>(line) {
            Ok(serde_json::Value::Object(mut m)) => {
                m.remove("wall_ms");
                serde_json::Value::Object(m).to_string()
            }
            _ => line.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Runs every subcommand twice with the same seed in scratch directories and
/// compares outputs and printed statistics. Returns the number of reruns
/// compared.
pub fn determinism_audit() -> Result<usize, String> {
    let dirs = [
        tempfile::tempdir().map_err(|e| e.to_string())?,
        tempfile::tempdir().map_err(|e| e.to_string())?,
    ];
    let mut checks = 0;
    let run_in = |dir: &Path, args: &[String]| -> (i32, String, Vec<(String, Vec<u8>)>) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let full: Vec<String> = std::iter::once("matfix".to_string())
            .chain(args.iter().map(|a| a.replace("{dir}", &dir.display().to_string())))
            .collect();
        let code = run(full, &mut out, &mut err);
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .map(|rd| {
                rd.filter_map(|e| e.ok())
                    .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap_or_default()))
                    .collect()
            })
            .unwrap_or_default();
        files.sort();
        (code, strip_wall_time(&String::from_utf8_lossy(&out)), files)
    };

    let words = |s: &str| s.split_whitespace().map(str::to_string).collect::<Vec<_>>();
    let mut commands = vec![
        words("gen --n 24 --k 6 --seed 5 --pattern cancelling --out-a {dir}/a --out-b {dir}/b --out-c {dir}/c --out-truth {dir}/t"),
        words("gen --n 24 --k 1 --mod 0 --seed 6 --out-a {dir}/a1 --out-b {dir}/b1 --out-c {dir}/c1 --out-truth {dir}/t1"),
        words("verify --a {dir}/a --b {dir}/b --c {dir}/c --seed 3"),
        words("verify --a {dir}/a --b {dir}/b --c {dir}/t --rounds 5 --seed 3"),
        words("correct --algo single --a {dir}/a1 --b {dir}/b1 --c {dir}/c1 --seed 2 --out {dir}/single"),
    ];
    for algo in ["det1", "det2", "fewbits", "randk", "sketch", "auto"] {
        commands.push(words(&format!(
            "correct --algo {algo} --a {{dir}}/a --b {{dir}}/b --c {{dir}}/c --k 6 --seed 9 --out {{dir}}/{algo}"
        )));
    }
    commands.push(words("correct --algo rand --a {dir}/a --b {dir}/b --c {dir}/c --seed 9 --out {dir}/rand"));
    commands.push(words("correct --algo auto --a {dir}/a --b {dir}/b --c {dir}/c --seed 9 --out {dir}/auto-unknown"));
    commands.push(words("bench --suite smoke --criteria 3,7 --out {dir}/stats.jsonl"));

    for args in &commands {
        let first = run_in(dirs[0].path(), args);
        let second = run_in(dirs[1].path(), args);
        if first.0 != second.0 || first.1 != second.1 {
            return Err(format!("{:?}: exit code or output differs", args[0]));
        }
        if first.2.len() != second.2.len() {
            return Err(format!("{:?}: different files written", args[0]));
        }
        for ((name, x), (_, y)) in first.2.iter().zip(&second.2) {
            let same = if name.ends_with(".jsonl") {
                strip_wall_time(&String::from_utf8_lossy(x)) == strip_wall_time(&String::from_utf8_lossy(y))
            } else {
                x == y
            };
            if !same {
                return Err(format!("{} differs between reruns of {}", name, args.join(" ")));
            }
        }
        if first.0 >= EXIT_USAGE {
            return Err(format!("{} exited with {}", args.join(" "), first.0));
        }
        checks += 1;
    }
    Ok(checks)
}
