//! Instance generation, error injection and experiment running.

pub mod criteria;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::SeededBits;
use crate::compressed::{correct_compressed, CompressedConfig};
use crate::deterministic::{ceil_sqrt, correct_deterministic, DetConfig, DetMode};
use crate::error::{Error, Result};
use crate::fewbits::{correct_fewbits, FewBitsConfig};
use crate::matrix::{naive_multiply, Matrix};
use crate::randomized::{correct_rand_known, correct_rand_unknown, RandConfig};
use crate::report::ErrorReport;
use crate::ring::Ring;
use crate::single::correct_single_error_with;

/// Where the injected errors go.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// Distinct uniformly random cells.
    UniformCells,
    /// Runs of about `sqrt k` cells per row, spread over many rows.
    RowBurst,
    /// Runs of about `sqrt k` cells per column.
    ColBurst,
    /// Whole rows filled one after another (a single row when `k <= n`).
    SingleRowAll,
    /// `+d, -d` pairs sharing a row, so row sums do not move.
    Cancelling,
}

impl Pattern {
    pub const ALL: [Pattern; 5] = [
        Pattern::UniformCells,
        Pattern::RowBurst,
        Pattern::ColBurst,
        Pattern::SingleRowAll,
        Pattern::Cancelling,
    ];
}

/// A random product together with a corrupted copy.
#[derive(Clone, Debug)]
pub struct Instance<R: Ring> {
    pub a: Matrix<R>,
    pub b: Matrix<R>,
    pub c_true: Matrix<R>,
    pub c_err: Matrix<R>,
    /// `(row, col, delta)` with `c_err = c_true + delta` at that cell.
    pub injected: Vec<(usize, usize, R::Elem)>,
    pub seed: u64,
    pub pattern: Pattern,
}

impl<R: Ring> Instance<R> {
    pub fn n(&self) -> usize {
        self.c_true.rows()
    }

    pub fn k(&self) -> usize {
        self.injected.len()
    }
}

fn shuffled(len: usize, bits: &mut SeededBits) -> Vec<usize> {
    let mut v: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = bits.below(i as u64 + 1) as usize;
        v.swap(i, j);
    }
    v
}

/// Cells taken round-robin over rows in random order, `burst` per row per
/// round, each row's columns in random order. Consecutive cells of one chunk
/// share a row.
fn burst_cells(n: usize, k: usize, burst: usize, bits: &mut SeededBits) -> Vec<Vec<(usize, usize)>> {
    let rows = shuffled(n, bits);
    let cols: Vec<Vec<usize>> = (0..n).map(|_| shuffled(n, bits)).collect();
    let mut chunks = Vec::new();
    let mut taken = 0;
    let mut start = 0;
    while taken < k {
        for &i in &rows {
            let end = (start + burst).min(n).min(start + k - taken);
            if end <= start {
                break;
            }
            chunks.push(cols[i][start..end].iter().map(|&j| (i, j)).collect());
            taken += end - start;
        }
        start += burst;
    }
    chunks
}

/// Random `n x n` factors, their product, and a copy with `k` wrong cells.
pub fn generate_instance<R: Ring>(n: usize, k: usize, ring: R, seed: u64, pattern: Pattern) -> Result<Instance<R>> {
    let cells = n * n;
    if k > cells {
        return Err(Error::KTooLarge { k, cells });
    }
    let mut bits = SeededBits::seeded(seed);
    let a = Matrix::from_fn(ring, n, n, |_, _| ring.random(&mut bits));
    let b = Matrix::from_fn(ring, n, n, |_, _| ring.random(&mut bits));
    let c_true = naive_multiply(&a, &b)?;

    let chunks: Vec<Vec<(usize, usize)>> = match pattern {
        Pattern::UniformCells => shuffled(cells, &mut bits)[..k]
            .iter()
            .map(|&x| vec![(x / n, x % n)])
            .collect(),
        Pattern::RowBurst => burst_cells(n, k, ceil_sqrt(k).max(1), &mut bits),
        Pattern::ColBurst => burst_cells(n, k, ceil_sqrt(k).max(1), &mut bits)
            .into_iter()
            .map(|ch| ch.into_iter().map(|(i, j)| (j, i)).collect())
            .collect(),
        Pattern::SingleRowAll => burst_cells(n, k, n, &mut bits),
        Pattern::Cancelling => burst_cells(n, k, 2, &mut bits),
    };

    let mut injected = Vec::with_capacity(k);
    for chunk in chunks {
        if pattern == Pattern::Cancelling && chunk.len() == 2 {
            let d = ring.random_nonzero(&mut bits);
            injected.push((chunk[0].0, chunk[0].1, d));
            injected.push((chunk[1].0, chunk[1].1, ring.neg(d)));
        } else {
            for (i, j) in chunk {
                injected.push((i, j, ring.random_nonzero(&mut bits)));
            }
        }
    }
    let mut c_err = c_true.clone();
    for &(i, j, d) in &injected {
        c_err.set_entry(i, j, ring.add(c_true.get(i, j), d));
    }
    Ok(Instance {
        a,
        b,
        c_true,
        c_err,
        injected,
        seed,
        pattern,
    })
}

/// The correctors exposed by the harness and the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Algo {
    Single,
    Det1,
    Det2,
    Fewbits,
    Rand,
    Randk,
    Sketch,
    /// `rand` without a known `k`, `sketch` with one.
    Auto,
}

impl Algo {
    pub const ALL: [Algo; 8] = [
        Algo::Single,
        Algo::Det1,
        Algo::Det2,
        Algo::Fewbits,
        Algo::Rand,
        Algo::Randk,
        Algo::Sketch,
        Algo::Auto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Single => "single",
            Algo::Det1 => "det1",
            Algo::Det2 => "det2",
            Algo::Fewbits => "fewbits",
            Algo::Rand => "rand",
            Algo::Randk => "randk",
            Algo::Sketch => "sketch",
            Algo::Auto => "auto",
        }
    }

    pub fn needs_k(self) -> bool {
        matches!(self, Algo::Det1 | Algo::Det2 | Algo::Fewbits | Algo::Randk | Algo::Sketch)
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, Algo::Single | Algo::Det1 | Algo::Det2)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm {s:?}"))
    }
}

/// Tunables for every corrector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunConfig {
    pub det_c: f64,
    pub det_early_exit: bool,
    pub fewbits: FewBitsConfig,
    pub rand: RandConfig,
    pub compressed: CompressedConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            det_c: 2.0,
            det_early_exit: true,
            fewbits: FewBitsConfig::default(),
            rand: RandConfig::default(),
            compressed: CompressedConfig::default(),
        }
    }
}

/// Runs one corrector. `k` is ignored by `rand` and selects the mode of `auto`.
pub fn run_algo<R: Ring>(
    algo: Algo,
    a: &Matrix<R>,
    b: &Matrix<R>,
    c: &Matrix<R>,
    k: Option<usize>,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(Matrix<R>, ErrorReport<R::Elem>)> {
    let need = |k: Option<usize>| k.ok_or_else(|| Error::MissingK(algo.name().to_string()));
    let mut bits = SeededBits::seeded(seed);
    let det = |k: usize, mode| {
        let mut d = DetConfig::new(k, mode).with_early_exit(cfg.det_early_exit);
        d.c_budget = cfg.det_c;
        d
    };
    match algo {
        Algo::Single => correct_single_error_with(a, b, c, Default::default()).map(|(m, _, r)| (m, r)),
        Algo::Det1 => correct_deterministic(a, b, c, &det(need(k)?, DetMode::SinglePass)),
        Algo::Det2 => correct_deterministic(a, b, c, &det(need(k)?, DetMode::TwoPass)),
        Algo::Fewbits => correct_fewbits(a, b, c, need(k)?, &mut bits, &cfg.fewbits).map(|(m, r, _)| (m, r)),
        Algo::Rand => correct_rand_unknown(a, b, c, &cfg.rand, &mut bits),
        Algo::Randk => correct_rand_known(a, b, c, need(k)?, &cfg.rand, &mut bits),
        Algo::Sketch => correct_compressed(a, b, c, Some(need(k)?), &cfg.compressed, &mut bits),
        Algo::Auto => match k {
            None => correct_rand_unknown(a, b, c, &cfg.rand, &mut bits),
            Some(k) => correct_compressed(a, b, c, Some(k), &cfg.compressed, &mut bits),
        },
    }
}

/// One JSON-lines record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub algo: String,
    pub n: usize,
    pub k_true: usize,
    pub k_param: Option<usize>,
    pub corrections: usize,
    pub ring_mults: u64,
    pub random_bits: u64,
    pub restarts: usize,
    pub wall_ms: f64,
    pub success: bool,
}

impl RunStats {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// A trial's record plus what does not go on the wire.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub stats: RunStats,
    pub iterations: usize,
    pub error: Option<String>,
}

/// Runs `algo` on `inst` and checks the output against the true product.
pub fn run_trial<R: Ring>(algo: Algo, inst: &Instance<R>, k_param: Option<usize>, cfg: &RunConfig, seed: u64) -> Trial {
    let start = Instant::now();
    let out = run_algo(algo, &inst.a, &inst.b, &inst.c_err, k_param, cfg, seed);
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let mut stats = RunStats {
        algo: algo.name().to_string(),
        n: inst.n(),
        k_true: inst.k(),
        k_param,
        corrections: 0,
        ring_mults: 0,
        random_bits: 0,
        restarts: 0,
        wall_ms,
        success: false,
    };
    match out {
        Ok((m, report)) => {
            stats.corrections = report.corrections.len();
            stats.ring_mults = report.ring_mults;
            stats.random_bits = report.random_bits;
            stats.restarts = report.restarts;
            stats.success = m == inst.c_true;
            Trial {
                stats,
                iterations: report.iterations,
                error: None,
            }
        }
        Err(e) => Trial {
            stats,
            iterations: 0,
            error: Some(e.to_string()),
        },
    }
}

/// Seed of trial `t` derived from an experiment seed.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    let mut bits = SeededBits::stream(seed, t);
    bits.bits(64)
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub trials: Vec<Trial>,
    pub success_rate: f64,
    pub median_iterations: usize,
    /// 10th, 50th and 90th percentile of `ring_mults`.
    pub mult_quantiles: [u64; 3],
}

impl Experiment {
    pub fn from_trials(trials: Vec<Trial>) -> Self {
        assert!(!trials.is_empty(), "an experiment needs at least one trial");
        let ok = trials.iter().filter(|t| t.stats.success).count();
        let mut iters: Vec<usize> = trials.iter().map(|t| t.iterations).collect();
        iters.sort_unstable();
        let mut mults: Vec<u64> = trials.iter().map(|t| t.stats.ring_mults).collect();
        mults.sort_unstable();
        let q = |f: f64| mults[((mults.len() - 1) as f64 * f).round() as usize];
        Self {
            success_rate: ok as f64 / trials.len() as f64,
            median_iterations: iters[iters.len() / 2],
            mult_quantiles: [q(0.1), q(0.5), q(0.9)],
            trials,
        }
    }
}

/// `trials` independent runs on one instance, in parallel, with per-trial
/// seeds derived from `seed`. The result does not depend on scheduling.
pub fn run_experiment<R: Ring>(
    algo: Algo,
    inst: &Instance<R>,
    k_param: Option<usize>,
    cfg: &RunConfig,
    trials: usize,
    seed: u64,
) -> Experiment {
    let runs = (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(algo, inst, k_param, cfg, trial_seed(seed, t)))
        .collect();
    Experiment::from_trials(runs)
}
