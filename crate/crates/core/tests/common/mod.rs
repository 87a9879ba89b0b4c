#![allow(dead_code)]

use fairtopk::{build_instance, Candidate, Instance, PolicyParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const A1_SEED: u64 = 20_170_501;
pub const BIG_SEED: u64 = 20_170_505;

pub fn instance_from(classes: &[Vec<f64>]) -> Instance {
    let mut cands = Vec::new();
    for (i, scores) in classes.iter().enumerate() {
        for (j, &s) in scores.iter().enumerate() {
            cands.push(Candidate::new(format!("c{i:02}-{j:04}"), s, vec![format!("c{i:02}")]));
        }
    }
    build_instance(cands).unwrap()
}

#[derive(Debug, Clone)]
pub struct Case {
    pub instance: Instance,
    pub params: PolicyParams,
}

/// Splits `n` into `parts` positive sizes uniformly at random.
fn composition(rng: &mut impl Rng, n: usize, parts: usize) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..n).collect();
    for i in 0..parts - 1 {
        let j = rng.random_range(i..cuts.len());
        cuts.swap(i, j);
    }
    let mut chosen: Vec<usize> = cuts[..parts - 1].to_vec();
    chosen.sort_unstable();
    let mut sizes = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in chosen {
        sizes.push(c - prev);
        prev = c;
    }
    sizes.push(n - prev);
    sizes
}

pub fn small_scores(rng: &mut impl Rng, size: usize, coarse: bool) -> Vec<f64> {
    (0..size)
        .map(|_| {
            if coarse {
                // few distinct values: ties inside and across classes
                rng.random_range(1..=20) as f64 * 40.0
            } else {
                (rng.random_range(0.0..850.0f64) * 100.0).round() / 100.0
            }
        })
        .collect()
}

pub const A1_RATES: [f64; 2] = [0.25, 0.5];
pub const A1_LAMBDAS: [f64; 5] = [0.0, 0.5, 1.0, 5.0, 100.0];

/// 500 instances with |C| in {1,2,3}, n <= 14; every (p, lambda) pair
/// appears 50 times.
pub fn a1_cases() -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(A1_SEED);
    (0..500)
        .map(|idx| {
            let classes = rng.random_range(1..=3usize);
            let n = rng.random_range(classes.max(2)..=14usize);
            let sizes = composition(&mut rng, n, classes);
            let coarse = idx % 3 == 0;
            let scores: Vec<Vec<f64>> = sizes.iter().map(|&s| small_scores(&mut rng, s, coarse)).collect();
            let instance = instance_from(&scores);
            let rate = A1_RATES[idx % 2];
            let lambda = A1_LAMBDAS[(idx / 2) % 5];
            let params = PolicyParams::from_rate(n, rate, lambda).unwrap();
            Case { instance, params }
        })
        .collect()
}

pub const BIG_RATES: [f64; 4] = [0.05, 0.10, 0.15, 0.20];
pub const BIG_LAMBDAS: [f64; 5] = [0.0, 1e2, 1e3, 1e4, 1e5];

/// n = 5,000 split over 12 classes of uneven size with shifted score means.
pub fn big_cases(count: usize) -> Vec<Case> {
    let mut rng = ChaCha8Rng::seed_from_u64(BIG_SEED);
    (0..count)
        .map(|idx| {
            let n = 5_000usize;
            let weights: Vec<f64> = (0..12).map(|_| rng.random_range(0.5..1.5)).collect();
            let total: f64 = weights.iter().sum();
            let mut sizes: Vec<usize> = weights.iter().map(|w| (w / total * n as f64).floor() as usize).collect();
            let short = n - sizes.iter().sum::<usize>();
            for s in sizes.iter_mut().take(short) {
                *s += 1;
            }
            let scores: Vec<Vec<f64>> = sizes
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let normal = Normal::new(800.0 - 12.0 * i as f64, 60.0).unwrap();
                    (0..s)
                        .map(|_| (normal.sample(&mut rng).clamp(0.0, 850.0) * 100.0).round() / 100.0)
                        .collect()
                })
                .collect();
            let instance = instance_from(&scores);
            let rate = BIG_RATES[idx % BIG_RATES.len()];
            let lambda = BIG_LAMBDAS[(idx / BIG_RATES.len()) % BIG_LAMBDAS.len()];
            let params = PolicyParams::from_rate(n, rate, lambda).unwrap();
            Case { instance, params }
        })
        .collect()
}

/// Relative-or-absolute closeness at `tol`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn report(id: &str, pass: bool, detail: &str) {
    println!("[{}] {id}: {detail}", if pass { "PASS" } else { "FAIL" });
}
