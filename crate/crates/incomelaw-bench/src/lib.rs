//! Shared input builders for the benchmark suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use incomelaw::{CumulativeSample, Period, QuantileRow};

/// Quantile table backed by pseudo-random draws of the shifted exponential
/// (mu, theta), reduced to `grid` points — the realistic fit workload.
pub fn noisy_sample(seed: u64, mu: f64, theta: f64, draws: usize, grid: usize) -> CumulativeSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..draws)
        .map(|_| mu - theta * (1.0 - rng.random::<f64>()).ln())
        .collect();
    values.sort_by(f64::total_cmp);

    let mut rows: Vec<QuantileRow> = Vec::with_capacity(grid);
    for j in 0..grid {
        let p = 0.05 + (0.90 * j as f64) / (grid - 1) as f64;
        let idx = ((p * draws as f64) as usize).min(draws - 1);
        let threshold = values[idx];
        let frac = 1.0 - p;
        if let Some(last) = rows.last() {
            if threshold <= last.threshold || frac >= last.frac_at_or_above {
                continue;
            }
        }
        rows.push(QuantileRow {
            threshold,
            frac_at_or_above: frac,
        });
    }
    CumulativeSample::new(rows, "", Period::Annual).expect("reduction preserves validity")
}

/// Paired regression inputs of length `n` with mild noise.
pub fn regression_inputs(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n)
        .map(|i| i as f64 + rng.random_range(0.0..0.5))
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&x| -0.3 * x + 12.0 + rng.random_range(-0.1..0.1))
        .collect();
    (xs, ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_produce_valid_inputs() {
        let sample = noisy_sample(3, 5000.0, 10_000.0, 20_000, 100);
        assert!(sample.len() >= 90);
        let (xs, ys) = regression_inputs(3, 50);
        assert_eq!(xs.len(), ys.len());
    }
}
