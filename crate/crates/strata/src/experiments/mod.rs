//! Desk-scale experiment runners.
//!
//! Two experiments are provided: [`run_aep`] checks the typical-set mass
//! and volume sandwich at finite word length, [`run_theorem`] checks
//! dimension concentration and the volume-growth bounds for doubly
//! typical words. Both produce a [`Report`].
//!
//! Words over the stratum alphabet are grouped by type class (the vector
//! of label counts): every per-word quantity used here is invariant
//! under permuting coordinates, so one representative per class
//! suffices. For two strata this turns `2^n` words into `n + 1` classes.
//!
//! Seed derivation: the word-sampling stream at length `n` is seeded
//! with `seed ^ (n * GOLDEN)`, independent of delta so that enlarging
//! delta can only enlarge the accepted set. Volume estimation for class
//! `j` at length `n` uses base seed `seed + 1 + (n << 32) + (j << 8)`,
//! leaving room for the per-stream offsets inside the estimator.

mod aep;
mod report;
mod theorem;

pub use aep::{run_aep, typical_volume_by_classes, ClassSummary};
pub use report::{
    parse_report_jsonl, EstimateRecord, FlagRecord, LogVolumeStats, NRecord, Provenance, Report,
    ReportFormat,
};
pub use theorem::run_theorem;

use crate::error::{Error, Result};

/// Largest nominal word count `|labels|^n` the brute-force mode accepts.
pub const BRUTE_FORCE_CAP: f64 = 1e6;

/// Fewest volume-estimation draws spent on any single type class.
const MIN_CLASS_TRIALS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    BruteForce,
    MonteCarlo,
}

impl Mode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "brute-force" => Ok(Mode::BruteForce),
            "monte-carlo" => Ok(Mode::MonteCarlo),
            other => Err(Error::config(format!(
                "unknown mode '{other}' (expected brute-force or monte-carlo)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::BruteForce => "brute-force",
            Mode::MonteCarlo => "monte-carlo",
        }
    }
}

/// Shared knobs for both experiment runners.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub n_values: Vec<usize>,
    pub delta: f64,
    pub xi: f64,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// slack used in the lower volume-growth reading; see `run_theorem`
    pub epsilon: f64,
}

impl ExperimentParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() {
            return Err(Error::config("at least one word length n is required"));
        }
        if self.n_values.iter().any(|&n| n == 0) {
            return Err(Error::config("word lengths must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.xi > 0.0 && self.xi < 0.5) {
            return Err(Error::config(format!(
                "xi must lie strictly between 0 and 1/2, got {}",
                self.xi
            )));
        }
        if self.trials < 2 {
            return Err(Error::config("at least two trials are required"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    pub(crate) fn check_brute_force_cap(&self, alphabet: usize, n: usize) -> Result<()> {
        let nominal = (alphabet as f64).powi(n as i32);
        if nominal > BRUTE_FORCE_CAP {
            return Err(Error::config(format!(
                "brute-force enumeration of {alphabet}^{n} words exceeds the cap of \
                 {BRUTE_FORCE_CAP:.0}; rerun with mode = \"monte-carlo\""
            )));
        }
        Ok(())
    }
}

pub(crate) fn word_stream_seed(seed: u64, n: usize) -> u64 {
    seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub(crate) fn class_seed(seed: u64, n: usize, class: usize) -> u64 {
    seed.wrapping_add(1)
        .wrapping_add((n as u64) << 32)
        .wrapping_add((class as u64) << 8)
}

pub(crate) fn class_trials(total_trials: usize, classes: usize) -> usize {
    MIN_CLASS_TRIALS.max(total_trials / classes.max(1))
}

/// All count vectors of length `k` summing to `n`, in lexicographic
/// order. The first axis moves slowest, so for `k = 2` this is
/// `(0, n), (1, n-1), ..., (n, 0)`.
pub(crate) fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    assert!(k >= 1);
    let mut out = Vec::new();
    let mut current = vec![0usize; k];
    fn recurse(n: usize, axis: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if axis + 1 == current.len() {
            current[axis] = n;
            out.push(current.clone());
            return;
        }
        for c in 0..=n {
            current[axis] = c;
            recurse(n - c, axis + 1, current, out);
        }
    }
    recurse(n, 0, &mut current, &mut out);
    out
}

/// Number of words in the type class with the given counts, exact.
pub(crate) fn multinomial(counts: &[usize]) -> Option<u128> {
    let mut remaining: usize = counts.iter().sum();
    let mut result: u128 = 1;
    for &c in counts {
        result = result.checked_mul(binomial(remaining, c)?)?;
        remaining -= c;
    }
    Some(result)
}

fn binomial(n: usize, k: usize) -> Option<u128> {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        // stays exact: after step i the value is C(n, i + 1)
        result = result.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(result)
}

/// `ln` of the multinomial coefficient; overflow-free companion to
/// [`multinomial`].
pub(crate) fn ln_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    ln_factorial(n) - counts.iter().map(|&c| ln_factorial(c)).sum::<f64>()
}

fn ln_factorial(m: usize) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// Sorted representative word for a count vector.
pub(crate) fn class_word(counts: &[usize]) -> Vec<usize> {
    let mut word = Vec::with_capacity(counts.iter().sum());
    for (label, &c) in counts.iter().enumerate() {
        word.extend(std::iter::repeat(label).take(c));
    }
    word
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_count_and_order() {
        let two = compositions(12, 2);
        assert_eq!(two.len(), 13);
        assert_eq!(two[0], vec![0, 12]);
        assert_eq!(two[12], vec![12, 0]);
        // C(5 + 2, 2) = 21
        assert_eq!(compositions(5, 3).len(), 21);
        for c in compositions(5, 3) {
            assert_eq!(c.iter().sum::<usize>(), 5);
        }
    }

    #[test]
    fn multinomial_matches_binomials() {
        assert_eq!(multinomial(&[4, 8]), Some(495));
        assert_eq!(multinomial(&[6, 6]), Some(924));
        assert_eq!(multinomial(&[2, 2, 1]), Some(30));
        assert_eq!(multinomial(&[0, 0, 3]), Some(1));
        let total: u128 = compositions(12, 2).iter().map(|c| multinomial(c).unwrap()).sum();
        assert_eq!(total, 1 << 12);
    }

    #[test]
    fn ln_multinomial_agrees_with_exact() {
        for counts in [[4usize, 8], [6, 6], [0, 12]] {
            let exact = multinomial(&counts).unwrap() as f64;
            assert!((ln_multinomial(&counts) - exact.ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn class_word_is_sorted_with_given_counts() {
        assert_eq!(class_word(&[2, 3]), vec![0, 0, 1, 1, 1]);
        assert_eq!(class_word(&[0, 1, 2]), vec![1, 2, 2]);
    }

    #[test]
    fn seeds_are_distinct_across_items() {
        let mut seen = std::collections::HashSet::new();
        for n in [8, 12, 20] {
            assert!(seen.insert(word_stream_seed(7, n)));
            for class in 0..=n {
                // volume streams occupy [base, base + 4)
                let base = class_seed(7, n, class);
                for i in 0..4 {
                    assert!(seen.insert(base + i));
                }
            }
        }
    }

    #[test]
    fn cap_is_enforced_per_alphabet() {
        let params = ExperimentParams {
            n_values: vec![12],
            delta: 0.15,
            xi: 0.2,
            trials: 100,
            seed: 0,
            mode: Mode::BruteForce,
            epsilon: 0.1,
        };
        assert!(params.check_brute_force_cap(2, 12).is_ok());
        assert!(params.check_brute_force_cap(2, 19).is_ok());
        assert!(params.check_brute_force_cap(2, 20).is_err());
        assert!(params.check_brute_force_cap(4, 9).is_ok());
        assert!(params.check_brute_force_cap(4, 10).is_err());
    }

    #[test]
    fn params_validation_rejects_bad_fields() {
        let good = ExperimentParams {
            n_values: vec![4],
            delta: 0.1,
            xi: 0.2,
            trials: 10,
            seed: 0,
            mode: Mode::MonteCarlo,
            epsilon: 0.1,
        };
        assert!(good.validate().is_ok());
        assert!(ExperimentParams { n_values: vec![], ..good.clone() }.validate().is_err());
        assert!(ExperimentParams { n_values: vec![0], ..good.clone() }.validate().is_err());
        assert!(ExperimentParams { delta: 0.0, ..good.clone() }.validate().is_err());
        assert!(ExperimentParams { xi: 0.5, ..good.clone() }.validate().is_err());
        assert!(ExperimentParams { trials: 1, ..good.clone() }.validate().is_err());
        assert!(ExperimentParams { epsilon: 0.0, ..good }.validate().is_err());
    }

    #[test]
    fn mode_names_round_trip() {
        for mode in [Mode::BruteForce, Mode::MonteCarlo] {
            assert_eq!(Mode::parse(mode.name()).unwrap(), mode);
        }
        assert!(Mode::parse("exact").is_err());
    }
}
