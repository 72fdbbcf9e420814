//! The acceptance grid: ten pass/fail checks with their sample sizes.

use std::time::Instant;

use rayon::prelude::*;

use super::{generate_instance, run_trial, trial_seed, Algo, Instance, Pattern, RunConfig, RunStats, Trial};
use crate::bits::SeededBits;
use crate::compressed::{build_sketch, hash_modulus, sample_hash_pairs, HashPair, PolyBackend};
use crate::deterministic::ceil_sqrt;
use crate::matrix::{naive_multiply, Matrix};
use crate::ring::{ModPrime, Ring, RingContext};
use crate::single::correct_single_error_with;
use crate::verifier::{freivalds_rounds, verify_product};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// Small sizes, a few seconds.
    Smoke,
    /// The sizes the acceptance targets are stated for.
    Full,
}

pub const NAMES: [&str; 10] = [
    "deterministic exactness",
    "randomized exactness",
    "single-error cost",
    "two-pass k-scaling",
    "few-bits budget",
    "hash collision rate",
    "sketch coefficient identity",
    "sketch corruption rate",
    "verifier soundness",
    "determinism audit",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    fn new(id: usize, pass: bool, detail: String) -> Self {
        Self {
            id,
            name: NAMES[id - 1],
            pass,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  {}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub outcomes: Vec<Outcome>,
    pub stats: Vec<RunStats>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

/// Runs the listed criteria (1-based ids) in order.
pub fn run_criteria(ids: &[usize], suite: Suite) -> Report {
    let mut report = Report::default();
    for &id in ids {
        let outcome = run_criterion(id, suite, &mut report.stats);
        report.outcomes.push(outcome);
    }
    report
}

pub fn run_criterion(id: usize, suite: Suite, stats: &mut Vec<RunStats>) -> Outcome {
    match id {
        1 => deterministic_exactness(suite, stats),
        2 => randomized_exactness(suite, stats),
        3 => single_cost(suite),
        4 => twopass_scaling(suite, stats),
        5 => fewbits_budget(suite, stats),
        6 => collision_rate(suite),
        7 => coefficient_identity(),
        8 => corruption_rate(suite),
        9 => verifier_soundness(suite),
        10 => determinism_audit(),
        _ => panic!("no criterion {id}"),
    }
}

const GRID_PRIME: u64 = 2_147_483_647;

/// Alternates a prime field and wrapping `u64` across seeds.
fn grid_ring(seed: u64) -> RingContext {
    if seed.is_multiple_of(2) {
        RingContext::ModPrime(ModPrime::new(GRID_PRIME).expect("prime"))
    } else {
        RingContext::Wrap64
    }
}

pub fn grid_k_values(n: usize) -> Vec<usize> {
    let mut ks = vec![1, 2, ceil_sqrt(n), n.div_ceil(2), n];
    ks.sort_unstable();
    ks.dedup();
    ks
}

#[derive(Clone, Copy, Debug)]
struct Point {
    n: usize,
    k: usize,
    pattern: Pattern,
    seed: u64,
}

fn grid(suite: Suite) -> Vec<Point> {
    let (ns, seeds): (&[usize], u64) = match suite {
        Suite::Smoke => (&[8, 16], 4),
        Suite::Full => (&[8, 16, 32, 64], 50),
    };
    let mut points = Vec::new();
    for &n in ns {
        for k in grid_k_values(n) {
            for (pi, &pattern) in Pattern::ALL.iter().enumerate() {
                for s in 0..seeds {
                    let seed = (((n as u64 * 1000 + k as u64) * 10 + pi as u64) * 1000) + s;
                    points.push(Point { n, k, pattern, seed });
                }
            }
        }
    }
    points
}

fn instance(p: &Point) -> Instance<RingContext> {
    generate_instance(p.n, p.k, grid_ring(p.seed), p.seed, p.pattern).expect("k <= n^2 on the grid")
}

/// Runs `algos` on every grid point; trials come back in grid order.
fn grid_trials(suite: Suite, algos: &[(Algo, bool)], cfg: &RunConfig) -> Vec<Trial> {
    grid(suite)
        .par_iter()
        .flat_map_iter(|p| {
            let inst = instance(p);
            algos
                .iter()
                .enumerate()
                .filter(|(_, (algo, _))| *algo != Algo::Single || p.k == 1)
                .map(|(ai, &(algo, with_k))| {
                    let k = with_k.then_some(p.k);
                    run_trial(algo, &inst, k, cfg, trial_seed(p.seed, ai as u64))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn failures(trials: &[Trial], algo: Algo) -> (usize, usize) {
    let mine: Vec<&Trial> = trials.iter().filter(|t| t.stats.algo == algo.name()).collect();
    (mine.iter().filter(|t| !t.stats.success).count(), mine.len())
}

fn deterministic_exactness(suite: Suite, stats: &mut Vec<RunStats>) -> Outcome {
    let start = Instant::now();
    let algos = [(Algo::Single, true), (Algo::Det1, true), (Algo::Det2, true)];
    let trials = grid_trials(suite, &algos, &RunConfig::default());
    let secs = start.elapsed().as_secs_f64();
    let bits: u64 = trials.iter().map(|t| t.stats.random_bits).sum();
    let mut pass = bits == 0 && secs < 300.0;
    let mut parts = Vec::new();
    for (algo, _) in algos {
        let (bad, total) = failures(&trials, algo);
        pass &= bad == 0;
        parts.push(format!("{algo} {}/{total}", total - bad));
    }
    stats.extend(trials.into_iter().map(|t| t.stats));
    Outcome::new(1, pass, format!("{}; random bits {bits}; {secs:.1}s", parts.join(", ")))
}

fn randomized_exactness(suite: Suite, stats: &mut Vec<RunStats>) -> Outcome {
    let algos = [
        (Algo::Fewbits, true),
        (Algo::Randk, true),
        (Algo::Rand, false),
        (Algo::Sketch, true),
    ];
    let trials = grid_trials(suite, &algos, &RunConfig::default());
    let mut pass = true;
    let mut parts = Vec::new();
    for (algo, _) in algos {
        let (bad, total) = failures(&trials, algo);
        pass &= bad == 0;
        parts.push(format!("{algo} {}/{total}", total - bad));
    }
    let sketch: Vec<&Trial> = trials.iter().filter(|t| t.stats.algo == "sketch").collect();
    let first_try = sketch.iter().filter(|t| t.stats.success && t.stats.restarts == 0).count();
    let rate = first_try as f64 / sketch.len() as f64;
    pass &= rate >= 0.99;
    stats.extend(trials.into_iter().map(|t| t.stats));
    Outcome::new(2, pass, format!("{}; sketch first-try {:.4}", parts.join(", "), rate))
}

fn single_cost(suite: Suite) -> Outcome {
    let shapes = match suite {
        Suite::Smoke => 40,
        Suite::Full => 200,
    };
    let results: Vec<(bool, f64)> = (0..shapes as u64)
        .into_par_iter()
        .map(|s| {
            let mut bits = SeededBits::stream(0x5151, s);
            let mut dim = || 1 + bits.below(128) as usize;
            let (p, q, r) = (dim(), dim(), dim());
            let ring = grid_ring(s);
            let a = Matrix::from_fn(ring, p, q, |_, _| ring.random(&mut bits));
            let b = Matrix::from_fn(ring, q, r, |_, _| ring.random(&mut bits));
            let truth = naive_multiply(&a, &b).expect("shapes agree");
            let mut c = truth.clone();
            let (i, j) = (bits.below(p as u64) as usize, bits.below(r as u64) as usize);
            c.set_entry(i, j, ring.add(truth.get(i, j), ring.random_nonzero(&mut bits)));
            let bound = 4 * (p * q + q * r + p * r) as u64;
            match correct_single_error_with(&a, &b, &c, Default::default()) {
                Ok((m, _, report)) => (m == truth && report.ring_mults <= bound, report.ring_mults as f64 / bound as f64 * 4.0),
                Err(_) => (false, f64::NAN),
            }
        })
        .collect();
    let ok = results.iter().filter(|r| r.0).count();
    let worst = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Outcome::new(
        3,
        ok == shapes,
        format!("{ok}/{shapes} shapes within 4(pq+qr+pr); worst mults/(pq+qr+pr) = {worst:.3}"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn twopass_scaling(suite: Suite, stats: &mut Vec<RunStats>) -> Outcome {
    let (n, seeds) = match suite {
        Suite::Smoke => (32, 6),
        Suite::Full => (64, 30),
    };
    // the full prime sweep, whose cost the two bounds describe
    let cfg = RunConfig {
        det_early_exit: false,
        ..RunConfig::default()
    };
    let runs: Vec<[Trial; 4]> = (0..seeds as u64)
        .into_par_iter()
        .map(|s| {
            let small = generate_instance(n, 4, grid_ring(s), 4_000 + s, Pattern::UniformCells).expect("k <= n^2");
            let large = generate_instance(n, 16, grid_ring(s), 16_000 + s, Pattern::UniformCells).expect("k <= n^2");
            [
                run_trial(Algo::Det1, &small, Some(4), &cfg, 0),
                run_trial(Algo::Det1, &large, Some(16), &cfg, 0),
                run_trial(Algo::Det2, &small, Some(4), &cfg, 0),
                run_trial(Algo::Det2, &large, Some(16), &cfg, 0),
            ]
        })
        .collect();
    let all_ok = runs.iter().flatten().all(|t| t.stats.success);
    let ratio = |x: usize, y: usize| {
        median(
            runs.iter()
                .map(|r| r[y].stats.ring_mults as f64 / r[x].stats.ring_mults as f64)
                .collect(),
        )
    };
    let (r1, r2) = (ratio(0, 1), ratio(2, 3));
    stats.extend(runs.into_iter().flatten().map(|t| t.stats));
    Outcome::new(
        4,
        all_ok && r1 >= 2.0 * r2,
        format!("n={n}: det1 16/4 = {r1:.2}, det2 16/4 = {r2:.2}, need det1 >= {:.2}", 2.0 * r2),
    )
}

/// `40 (log2^2 k + log2 k log2 log2 n)`.
pub fn fewbits_ceiling(n: usize, k: usize) -> f64 {
    let lk = (k as f64).log2();
    40.0 * (lk * lk + lk * (n as f64).log2().log2())
}

fn fewbits_budget(suite: Suite, stats: &mut Vec<RunStats>) -> Outcome {
    let seeds = match suite {
        Suite::Smoke => 20,
        Suite::Full => 100,
    };
    let n = 64;
    let mut pass = true;
    let mut parts = Vec::new();
    for k in [4usize, 16, 64] {
        let ceiling = fewbits_ceiling(n, k);
        let trials: Vec<Trial> = (0..seeds as u64)
            .into_par_iter()
            .map(|s| {
                let inst = generate_instance(n, k, grid_ring(s), 50_000 + 100 * k as u64 + s, Pattern::UniformCells)
                    .expect("k <= n^2");
                run_trial(Algo::Fewbits, &inst, Some(k), &RunConfig::default(), trial_seed(s, k as u64))
            })
            .collect();
        let within = trials
            .iter()
            .filter(|t| t.stats.success && t.stats.random_bits as f64 <= ceiling)
            .count();
        let max_bits = trials.iter().map(|t| t.stats.random_bits).max().unwrap_or(0);
        pass &= within * 100 >= 95 * seeds;
        parts.push(format!("k={k}: {within}/{seeds} <= {ceiling:.0} (max {max_bits})"));
        stats.extend(trials.into_iter().map(|t| t.stats));
    }
    Outcome::new(5, pass, parts.join("; "))
}

/// Fraction of samples where two distinct cells share an exponent under a
/// fresh pair.
pub fn collision_rate_at(s: usize, n: usize, samples: usize, seed: u64) -> f64 {
    let mut bits = SeededBits::seeded(seed);
    let mut hits = 0;
    for _ in 0..samples {
        let pair = sample_hash_pairs(1, s, n, &mut bits).expect("small range")[0];
        let (i1, j1, i2, j2) = loop {
            let c: Vec<usize> = (0..4).map(|_| 1 + bits.below(n as u64) as usize).collect();
            if (c[0], c[1]) != (c[2], c[3]) {
                break (c[0], c[1], c[2], c[3]);
            }
        };
        if pair.g(i1) + pair.h(j1) == pair.g(i2) + pair.h(j2) {
            hits += 1;
        }
    }
    hits as f64 / samples as f64
}

fn collision_rate(suite: Suite) -> Outcome {
    let samples = match suite {
        Suite::Smoke => 20_000,
        Suite::Full => 100_000,
    };
    let rates: Vec<(usize, f64)> = [16usize, 64, 256]
        .par_iter()
        .map(|&s| (s, collision_rate_at(s, 64, samples, 0xC0 + s as u64)))
        .collect();
    let pass = rates.iter().all(|&(s, r)| r <= 1.5 / s as f64);
    let detail = rates
        .iter()
        .map(|&(s, r)| format!("s={s}: {:.3}/s", r * s as f64))
        .collect::<Vec<_>>()
        .join(", ");
    Outcome::new(6, pass, format!("{detail} (limit 1.5/s)"))
}

/// Every error configuration with at most two wrong cells on 3 x 3 over
/// `Z/5`, under fixed hash pairs, against direct enumeration. Returns
/// `(coefficients checked, mismatches)`.
pub fn coefficient_identity_check() -> (usize, usize) {
    let ring = ModPrime::new(5).expect("prime");
    let n = 3;
    let p = hash_modulus(n, 3).expect("small");
    let pairs = [
        HashPair { a_g: 1, b_g: 0, a_h: 1, b_h: 0, p, s: 3 },
        HashPair { a_g: 2, b_g: 1, a_h: 1, b_h: 2, p, s: 3 },
        HashPair { a_g: 1, b_g: 0, a_h: 3, b_h: 1, p, s: 2 },
        HashPair { a_g: 4, b_g: 3, a_h: 5, b_h: 0, p, s: 1 },
    ];
    let mut bits = SeededBits::seeded(7);
    let factors: Vec<(Matrix<ModPrime>, Matrix<ModPrime>)> = (0..3)
        .map(|_| {
            (
                Matrix::from_fn(ring, n, n, |_, _| ring.random(&mut bits)),
                Matrix::from_fn(ring, n, n, |_, _| ring.random(&mut bits)),
            )
        })
        .collect();

    let mut configs: Vec<Vec<(usize, u64)>> = vec![vec![]];
    for c1 in 0..9 {
        for d1 in 1..5 {
            configs.push(vec![(c1, d1)]);
            for c2 in c1 + 1..9 {
                for d2 in 1..5 {
                    configs.push(vec![(c1, d1), (c2, d2)]);
                }
            }
        }
    }

    let (mut checked, mut bad) = (0, 0);
    for (a, b) in &factors {
        let truth = naive_multiply(a, b).expect("square");
        for cfg in &configs {
            let mut c = truth.clone();
            for &(cell, d) in cfg {
                c.set_entry(cell / n, cell % n, ring.add(truth.get(cell / n, cell % n), d));
            }
            for pair in &pairs {
                let sk = build_sketch(a, b, &c, std::slice::from_ref(pair), PolyBackend::Schoolbook).expect("shapes");
                let mut expect = vec![0u64; 2 * pair.s + 1];
                for i in 0..n {
                    for j in 0..n {
                        let e = pair.g(i + 1) + pair.h(j + 1);
                        expect[e] = ring.add(expect[e], ring.sub(truth.get(i, j), c.get(i, j)));
                    }
                }
                checked += expect.len();
                bad += expect.iter().zip(&sk.polys[0]).filter(|(x, y)| x != y).count();
            }
        }
    }
    (checked, bad)
}

fn coefficient_identity() -> Outcome {
    let (checked, bad) = coefficient_identity_check();
    Outcome::new(7, bad == 0, format!("{checked} coefficients, {bad} mismatches"))
}

/// Fraction of sampled `(cell, l)` reads that differ from the cell's own
/// delta, at `s = 4k`.
pub fn corruption_rate_at(n: usize, k: usize, instances: usize, reads: usize, seed: u64) -> f64 {
    let per_instance: Vec<(usize, usize)> = (0..instances as u64)
        .into_par_iter()
        .map(|x| {
            let inst = generate_instance(n, k, grid_ring(x), seed + x, Pattern::UniformCells).expect("k <= n^2");
            let mut bits = SeededBits::stream(seed, x);
            let t = 8;
            let pairs = sample_hash_pairs(t, 4 * k, n, &mut bits).expect("small range");
            let sk = build_sketch(&inst.a, &inst.b, &inst.c_err, &pairs, PolyBackend::Karatsuba).expect("shapes");
            let ring = *inst.c_true.ring();
            let mut corrupted = 0;
            for _ in 0..reads {
                let (i, j) = (bits.below(n as u64) as usize, bits.below(n as u64) as usize);
                let l = bits.below(t as u64) as usize;
                let delta = ring.sub(inst.c_true.get(i, j), inst.c_err.get(i, j));
                if sk.coefficient(l, i, j) != delta {
                    corrupted += 1;
                }
            }
            (corrupted, reads)
        })
        .collect();
    let (bad, total) = per_instance.iter().fold((0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    bad as f64 / total as f64
}

fn corruption_rate(suite: Suite) -> Outcome {
    let (instances, reads) = match suite {
        Suite::Smoke => (10, 300),
        Suite::Full => (20, 500),
    };
    let rate = corruption_rate_at(64, 8, instances, reads, 0x8000);
    Outcome::new(
        8,
        rate <= 0.3,
        format!("{} reads at s=32, k=8: corrupted {rate:.4} (limit 0.3)", instances * reads),
    )
}

fn verifier_soundness(suite: Suite) -> Outcome {
    let (correct, single) = match suite {
        Suite::Smoke => (200, 2_000),
        Suite::Full => (1_000, 10_000),
    };
    let false_pos: usize = (0..correct as u64)
        .into_par_iter()
        .map(|s| {
            let n = 2 + (s as usize % 31);
            let inst = generate_instance(n, 0, grid_ring(s), 90_000 + s, Pattern::UniformCells).expect("k = 0");
            let mut bits = SeededBits::stream(0x900D, s);
            usize::from(!verify_product(&inst.a, &inst.b, &inst.c_err, 8, &mut bits).expect("shapes"))
        })
        .sum();
    let detected: usize = (0..single as u64)
        .into_par_iter()
        .map(|s| {
            let n = 2 + (s as usize % 15);
            let inst = generate_instance(n, 1, grid_ring(s), 190_000 + s, Pattern::UniformCells).expect("k <= n^2");
            let mut bits = SeededBits::stream(0xBAD, s);
            let rows = freivalds_rounds(&inst.a, &inst.b, &inst.c_err, 1, &mut bits).expect("shapes");
            usize::from(!rows.is_empty())
        })
        .sum();
    let rate = detected as f64 / single as f64;
    Outcome::new(
        9,
        false_pos == 0 && rate >= 0.45,
        format!("{false_pos} false positives in {correct}; single-round detection {rate:.4} over {single}"),
    )
}

fn determinism_audit() -> Outcome {
    match crate::cli::determinism_audit() {
        Ok(checks) => Outcome::new(10, true, format!("{checks} reruns byte-identical")),
        Err(why) => Outcome::new(10, false, why),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_k_values_examples() {
        assert_eq!(grid_k_values(8), vec![1, 2, 3, 4, 8]);
        assert_eq!(grid_k_values(16), vec![1, 2, 4, 8, 16]);
        assert_eq!(grid_k_values(64), vec![1, 2, 8, 32, 64]);
    }

    #[test]
    fn ceiling_values() {
        // 40 (4 + 2 log2 6)
        assert!((fewbits_ceiling(64, 4) - 366.797).abs() < 1e-2);
    }

    #[test]
    fn identity_check_is_exact() {
        let (checked, bad) = coefficient_identity_check();
        assert!(checked > 10_000);
        assert_eq!(bad, 0);
    }

    #[test]
    fn outcome_line_format() {
        let o = Outcome::new(3, true, "x".into());
        assert!(o.line().starts_with("criterion  3 single-error cost"));
        assert!(o.line().contains("PASS"));
    }
}
