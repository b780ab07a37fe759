//! Typical-set mass and volume at finite word length.
//!
//! For each requested `n` the runner estimates two quantities about the
//! weakly typical set `W` of the n-fold product:
//!
//! * its probability, by the fraction of sampled words that land in it;
//! * its carrier volume, either exactly over type classes (brute-force
//!   mode) or by importance sampling from the product law (MC mode).
//!
//! The volume is then compared against the `(1 - eps) e^{n(H - delta)}`
//! and `e^{n(H + delta)}` sandwich, with `eps` taken from the observed
//! mass and estimates inflated by two standard errors before the
//! comparison so that MC noise cannot produce a spurious failure.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::measures::StratifiedMeasure;
use crate::typicality::{sandwich_bounds, word_dimension, TypicalityParams, VolumeEstimate};

use super::report::{EstimateRecord, FlagRecord, LogVolumeStats, NRecord, Provenance, Report};
use super::{
    class_seed, class_trials, class_word, compositions, multinomial, word_stream_seed,
    ExperimentParams, Mode,
};

/// One type class and the volume of its typical part.
#[derive(Debug, Clone)]
pub struct ClassSummary {
    /// label counts, summing to n
    pub counts: Vec<usize>,
    /// number of words sharing these counts
    pub words: u128,
    /// carrier dimension of any word in the class
    pub dimension: usize,
    pub volume: VolumeEstimate,
}

/// Exact-over-classes estimate of the typical-set volume at length `n`.
///
/// Every word-level quantity involved is permutation invariant, so the
/// volume of `W` intersected with one representative stratum per class,
/// scaled by the class size, sums to the full typical volume. The class
/// count grows like `n^(k-1)` for `k` labels, so this stays cheap far
/// beyond the word counts that direct enumeration could reach.
pub fn typical_volume_by_classes(
    measure: &StratifiedMeasure,
    n: usize,
    delta: f64,
    xi: f64,
    trials_per_class: usize,
    seed: u64,
) -> Result<(EstimateRecord, Vec<ClassSummary>)> {
    let k = measure.strata().len();
    let params = TypicalityParams::new(n, delta, xi, k)?;
    let mut classes = Vec::new();
    let mut total = 0.0;
    let mut var = 0.0;
    for (idx, counts) in compositions(n, k).into_iter().enumerate() {
        let words = multinomial(&counts).ok_or_else(|| {
            Error::config(format!(
                "word counts at n = {n} overflow exact arithmetic; use monte-carlo mode"
            ))
        })?;
        let word = class_word(&counts);
        let volume =
            crate::typicality::stratum_volume_estimate(measure, &word, &params, trials_per_class, class_seed(seed, n, idx))?;
        let dimension = word_dimension(measure, &word)?;
        total += words as f64 * volume.estimate;
        var += (words as f64 * volume.stderr).powi(2);
        classes.push(ClassSummary { counts, words, dimension, volume });
    }
    Ok((EstimateRecord { value: total, stderr: var.sqrt() }, classes))
}

/// Runs the typical-set experiment over `params.n_values`.
pub fn run_aep(
    measure: &StratifiedMeasure,
    measure_label: &str,
    params: &ExperimentParams,
) -> Result<Report> {
    params.validate()?;
    let start = Instant::now();
    let mut records = Vec::new();
    for &n in &params.n_values {
        records.push(aep_record(measure, n, params)?);
    }
    Ok(Report {
        provenance: provenance("aep", measure_label, params),
        records,
        wall_ms: start.elapsed().as_millis(),
    })
}

fn aep_record(measure: &StratifiedMeasure, n: usize, params: &ExperimentParams) -> Result<NRecord> {
    let entropy = measure.entropy();
    let k = measure.strata().len();

    // One pass of word sampling serves both the mass estimate and, in MC
    // mode, the volume estimate. Draws depend only on (seed, n), so the
    // accepted set can only grow with delta.
    let mut rng = ChaCha12Rng::seed_from_u64(word_stream_seed(params.seed, n));
    let mut typical = 0usize;
    let mut vol_sum = 0.0;
    let mut vol_sumsq = 0.0;
    let mut mc_histogram = std::collections::BTreeMap::<usize, u128>::new();
    for _ in 0..params.trials {
        let mut log_f = 0.0;
        let mut dim = 0usize;
        for _ in 0..n {
            let sample = measure.sample_with_rng(&mut rng)?;
            log_f += measure.log_density_at(&sample)?;
            dim += measure.strata()[sample.stratum].dim();
        }
        let rate = -log_f / n as f64;
        if (rate - entropy.total).abs() < params.delta {
            typical += 1;
            // reciprocal density turns probability mass into volume
            let w = (-log_f).exp();
            vol_sum += w;
            vol_sumsq += w * w;
            *mc_histogram.entry(dim).or_insert(0) += 1;
        }
    }
    let t = params.trials as f64;
    let mass = typical as f64 / t;
    let mass_stderr = (mass * (1.0 - mass) / t).sqrt();

    let (volume, histogram, log_volume) = match params.mode {
        Mode::BruteForce => {
            params.check_brute_force_cap(k, n)?;
            let (volume, classes) = typical_volume_by_classes(
                measure,
                n,
                params.delta,
                params.xi,
                class_trials(params.trials, n + 1),
                params.seed,
            )?;
            let mut histogram = std::collections::BTreeMap::<usize, u128>::new();
            let mut rates = Vec::new();
            for class in &classes {
                if class.volume.estimate > 0.0 {
                    *histogram.entry(class.dimension).or_insert(0) += class.words;
                    rates.push(class.volume.estimate.ln() / n as f64);
                }
            }
            (volume, histogram, log_volume_stats(&rates))
        }
        Mode::MonteCarlo => {
            let mc_mean = vol_sum / t;
            let mc_var = (vol_sumsq / t - mc_mean * mc_mean).max(0.0);
            (
                EstimateRecord { value: mc_mean, stderr: (mc_var / t).sqrt() },
                mc_histogram,
                None,
            )
        }
    };

    // sandwich with the observed miss probability; a mass estimate of
    // zero leaves no usable eps, so the bound is reported against the
    // largest admissible one
    let eps_observed = (1.0 - mass).clamp(0.0, 1.0 - 1e-12);
    let (lower, upper) = sandwich_bounds(entropy.total, params.delta, n, eps_observed)?;

    let mass_flag = FlagRecord {
        name: "typical-mass".into(),
        pass: mass >= 1.0 - eps_observed - 1e-15 && mass > 0.0,
        detail: format!(
            "P(W) = {mass:.6} +/- {mass_stderr:.6}, observed eps = {eps_observed:.6}"
        ),
    };
    let sandwich_flag = FlagRecord {
        name: "volume-sandwich".into(),
        pass: volume.value + 2.0 * volume.stderr >= lower
            && volume.value - 2.0 * volume.stderr <= upper,
        detail: format!(
            "{:.6e} <= {:.6e} +/- {:.1e} <= {:.6e}",
            lower, volume.value, volume.stderr, upper
        ),
    };

    Ok(NRecord {
        n,
        delta: params.delta,
        xi: None,
        typical_mass: EstimateRecord { value: mass, stderr: mass_stderr },
        volume: Some(volume),
        bound_lower: Some(lower),
        bound_upper: Some(upper),
        dimension_histogram: histogram.into_iter().collect(),
        log_volume,
        h_conditional: entropy.conditional_term,
        h_labels: entropy.mixture_term,
        flags: vec![mass_flag, sandwich_flag],
        notes: vec![],
    })
}

pub(super) fn log_volume_stats(rates: &[f64]) -> Option<LogVolumeStats> {
    if rates.is_empty() {
        return None;
    }
    Some(LogVolumeStats {
        min: rates.iter().copied().fold(f64::INFINITY, f64::min),
        mean: rates.iter().sum::<f64>() / rates.len() as f64,
        max: rates.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        classes: rates.len(),
    })
}

pub(super) fn provenance(
    command: &str,
    measure_label: &str,
    params: &ExperimentParams,
) -> Provenance {
    Provenance {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: params.seed,
        measure: measure_label.to_string(),
        params: vec![
            (
                "n".into(),
                params
                    .n_values
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("delta".into(), params.delta.to_string()),
            ("xi".into(), params.xi.to_string()),
            ("trials".into(), params.trials.to_string()),
            ("mode".into(), params.mode.name().to_string()),
            ("epsilon".into(), params.epsilon.to_string()),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmt::{point, segment};
    use crate::measures::{DensityFamily, RectifiableComponent, StratifiedMeasure};
    use crate::quad::QuadratureScheme;

    fn mixture(seg_to: f64, family: DensityFamily) -> StratifiedMeasure {
        let scheme = QuadratureScheme::default();
        let atom =
            RectifiableComponent::new(point(&[-1.0]).unwrap(), DensityFamily::Uniform, &scheme)
                .unwrap();
        let seg =
            RectifiableComponent::new(segment(&[0.0], &[seg_to]).unwrap(), family, &scheme)
                .unwrap();
        StratifiedMeasure::from_parts(vec![(atom, 0.5), (seg, 0.5)], &scheme).unwrap()
    }

    fn base_params(n: usize, delta: f64, mode: Mode) -> ExperimentParams {
        ExperimentParams {
            n_values: vec![n],
            delta,
            xi: 0.2,
            trials: 4096,
            seed: 7,
            mode,
            epsilon: 0.1,
        }
    }

    #[test]
    fn unit_segment_mixture_volume_is_two_to_the_n() {
        // constant density 1/2 everywhere: every word is typical and each
        // class contributes exactly one unit of volume per word
        let m = mixture(1.0, DensityFamily::Uniform);
        for n in [1, 5, 12, 20] {
            let (vol, classes) =
                typical_volume_by_classes(&m, n, 0.1, 0.2, 64, 11).unwrap();
            assert_eq!(vol.value, (1u128 << n) as f64, "n = {n}");
            assert!(vol.stderr < 1e-9);
            assert_eq!(classes.len(), n + 1);
            for class in &classes {
                assert_eq!(class.volume.accepted, 64);
            }
        }
    }

    #[test]
    fn length_two_mixture_matches_exhaustive_enumeration() {
        // direct enumeration over all 2^12 words collapses to the same
        // binomial sum the class method uses; the value is frozen here
        let m = mixture(2.0, DensityFamily::Uniform);
        let report = run_aep(&m, "atom+segment", &base_params(12, 0.15, Mode::BruteForce)).unwrap();
        let rec = &report.records[0];
        let vol = rec.volume.unwrap();
        assert!((vol.value - 320496.0).abs() < 1e-6, "{}", vol.value);
        // per-class weights are constants, so any spread is accumulation
        // noise at scale 256, not statistics
        assert!(vol.stderr < 1e-3);

        // exact mass is 3498/4096; the sampled fraction must sit within
        // binomial noise of it
        let exact = 0.85400390625;
        let mass = rec.typical_mass;
        assert!((mass.value - exact).abs() < 4.0 * mass.stderr.max(1e-3));

        assert!(rec.all_pass(), "{:?}", rec.flags);
        assert_eq!(
            rec.dimension_histogram,
            vec![(4, 495), (5, 792), (6, 924), (7, 792), (8, 495)]
        );
        let stats = rec.log_volume.unwrap();
        assert_eq!(stats.classes, 5);
        // class rates are (s/12) ln 2 for s = 4..8
        assert!((stats.min - 4.0 / 12.0 * 2f64.ln()).abs() < 1e-12);
        assert!((stats.max - 8.0 / 12.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn single_segment_component_is_all_typical() {
        let scheme = QuadratureScheme::default();
        let seg = RectifiableComponent::new(
            segment(&[0.0], &[2.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme,
        )
        .unwrap();
        let m = StratifiedMeasure::from_parts(vec![(seg, 1.0)], &scheme).unwrap();
        let report = run_aep(&m, "segment", &base_params(9, 0.05, Mode::BruteForce)).unwrap();
        let rec = &report.records[0];
        assert_eq!(rec.typical_mass.value, 1.0);
        let vol = rec.volume.unwrap();
        assert!((vol.value - 2f64.powi(9)).abs() < 1e-9);
        assert!(rec.all_pass());
    }

    #[test]
    fn brute_force_cap_suggests_monte_carlo() {
        let m = mixture(1.0, DensityFamily::Uniform);
        let err = run_aep(&m, "atom+segment", &base_params(20, 0.1, Mode::BruteForce))
            .unwrap_err();
        assert!(err.to_string().contains("monte-carlo"), "{err}");
    }

    #[test]
    fn modes_agree_within_combined_noise() {
        let m = mixture(2.0, DensityFamily::TruncatedExponential { rate: 1.0 });
        let mut params = base_params(8, 0.25, Mode::BruteForce);
        params.trials = 20_000;
        let bf = run_aep(&m, "m", &params).unwrap();
        params.mode = Mode::MonteCarlo;
        let mc = run_aep(&m, "m", &params).unwrap();
        let (a, b) = (bf.records[0].volume.unwrap(), mc.records[0].volume.unwrap());
        let tol = 4.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!(
            (a.value - b.value).abs() <= tol,
            "brute-force {} vs monte-carlo {} (tol {tol})",
            a.value,
            b.value
        );
    }

    #[test]
    fn mass_is_nondecreasing_in_delta() {
        let m = mixture(2.0, DensityFamily::TruncatedExponential { rate: 1.0 });
        let mut last = -1.0;
        for delta in [0.05, 0.1, 0.2, 0.4, 0.8] {
            let mut params = base_params(6, delta, Mode::MonteCarlo);
            params.trials = 2000;
            let report = run_aep(&m, "m", &params).unwrap();
            let mass = report.records[0].typical_mass.value;
            assert!(mass >= last, "delta {delta}: {mass} < {last}");
            last = mass;
        }
    }

    #[test]
    fn identical_runs_produce_identical_records() {
        let m = mixture(2.0, DensityFamily::Uniform);
        let params = base_params(6, 0.2, Mode::BruteForce);
        let a = run_aep(&m, "m", &params).unwrap();
        let b = run_aep(&m, "m", &params).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.provenance, b.provenance);
    }
}
