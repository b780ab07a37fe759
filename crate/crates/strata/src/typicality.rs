//! Typical sequences for stratified measures.
//!
//! Weak typicality constrains the per-coordinate log density of a word;
//! strong typicality constrains the empirical distribution of its
//! dimension labels; double typicality asks for both at once. The margin
//! schedule couples the strong margin to the word length so that the
//! probability of atypical label words vanishes while the induced weak
//! margin on labels tightens to zero.
//!
//! Everything here is a strict-inequality predicate on numbers the
//! caller supplies (density values, label words, margins), plus one
//! estimator: the Hausdorff volume of the typical part of a stratum,
//! computed by importance sampling from the stratum's own law.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::measures::{Sample, StratifiedMeasure};

/// Number of independent sampling streams used by
/// [`stratum_volume_estimate`]. Fixed so that results do not depend on
/// the machine; stream `i` seeds its generator with `seed + i`.
const VOLUME_STREAMS: u64 = 4;

/// Margins for a word of length `n`: the weak margin is chosen by the
/// caller, the strong margin and its consequences follow from `xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalityParams {
    n: usize,
    delta: f64,
    xi: f64,
    alphabet_size: usize,
}

impl TypicalityParams {
    pub fn new(n: usize, delta: f64, xi: f64, alphabet_size: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::contract("word length must be at least 1"));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::contract(format!("weak margin must be positive, got {delta}")));
        }
        if !(xi > 0.0 && xi < 0.5) {
            return Err(Error::contract(format!(
                "schedule exponent must lie strictly between 0 and 1/2, got {xi}"
            )));
        }
        if alphabet_size == 0 {
            return Err(Error::contract("alphabet must be nonempty"));
        }
        Ok(TypicalityParams { n, delta, xi, alphabet_size })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet_size
    }

    /// Strong margin `n^(xi - 1/2)`.
    pub fn eta(&self) -> f64 {
        (self.n as f64).powf(self.xi - 0.5)
    }

    /// Weak margin induced on label words, `-|alphabet| eta ln eta`.
    /// Degenerates to zero at `n = 1`, where `eta = 1`.
    pub fn delta_prime(&self) -> f64 {
        let eta = self.eta();
        -(self.alphabet_size as f64) * eta * eta.ln()
    }

    /// Bound on the probability that a label word is not strongly
    /// typical: `2 |alphabet| exp(-2 n eta^2)`.
    pub fn epsilon(&self) -> f64 {
        let eta = self.eta();
        2.0 * self.alphabet_size as f64 * (-2.0 * self.n as f64 * eta * eta).exp()
    }
}

/// `(eta, delta_prime, epsilon)` for a word length, schedule exponent,
/// and alphabet size; the margins of [`TypicalityParams`] without the
/// weak-margin field.
pub fn schedule(n: usize, xi: f64, alphabet_size: usize) -> Result<(f64, f64, f64)> {
    let p = TypicalityParams::new(n, 1.0, xi, alphabet_size)?;
    Ok((p.eta(), p.delta_prime(), p.epsilon()))
}

/// Symbol counts of a label word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    counts: Vec<usize>,
    n: usize,
}

/// Counts the symbols of `word` (labels `0..alphabet_size`).
pub fn empirical(word: &[usize], alphabet_size: usize) -> Result<EmpiricalDistribution> {
    if word.is_empty() {
        return Err(Error::contract("empirical distribution of an empty word"));
    }
    let mut counts = vec![0usize; alphabet_size];
    for &a in word {
        if a >= alphabet_size {
            return Err(Error::contract(format!(
                "label {a} outside alphabet of size {alphabet_size}"
            )));
        }
        counts[a] += 1;
    }
    Ok(EmpiricalDistribution { counts, n: word.len() })
}

impl EmpiricalDistribution {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn count(&self, a: usize) -> usize {
        self.counts.get(a).copied().unwrap_or(0)
    }

    pub fn freq(&self, a: usize) -> f64 {
        self.count(a) as f64 / self.n as f64
    }

    /// Largest `|freq(a) - q[a]|` over the alphabet.
    pub fn max_deviation(&self, q: &[f64]) -> f64 {
        (0..q.len().max(self.counts.len()))
            .map(|a| (self.freq(a) - q.get(a).copied().unwrap_or(0.0)).abs())
            .fold(0.0, f64::max)
    }
}

/// Empirical entropy rate `-(1/n) sum ln v_i` of positive density values.
pub fn empirical_rate(density_values: &[f64]) -> Result<f64> {
    if density_values.is_empty() {
        return Err(Error::contract("empirical rate of an empty word"));
    }
    let mut sum = 0.0;
    for &v in density_values {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::contract(format!("density values must be positive, got {v}")));
        }
        sum += v.ln();
    }
    Ok(-sum / density_values.len() as f64)
}

/// Strict test `|empirical rate - entropy| < delta`.
pub fn is_weakly_typical(density_values: &[f64], entropy: f64, delta: f64) -> Result<bool> {
    if !entropy.is_finite() {
        return Err(Error::contract("entropy must be finite"));
    }
    Ok((empirical_rate(density_values)? - entropy).abs() < delta)
}

/// Strict max-norm test of the empirical label distribution against `q`.
/// `q` must be strictly positive, which makes absolute continuity of the
/// empirical law automatic.
pub fn is_strongly_typical(word: &[usize], q: &[f64], eta: f64) -> Result<bool> {
    if q.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::contract("label law must have strictly positive entries"));
    }
    Ok(empirical(word, q.len())?.max_deviation(q) < eta)
}

/// Dimension of the stratum a label word selects: the sum of the carrier
/// dimensions of its letters.
pub fn word_dimension(measure: &StratifiedMeasure, word: &[usize]) -> Result<usize> {
    let dims = measure.stratum_dims();
    word.iter()
        .map(|&a| {
            dims.get(a).copied().ok_or_else(|| {
                Error::contract(format!("label {a} outside the measure's {} strata", dims.len()))
            })
        })
        .sum()
}

/// Tests a sampled word for double typicality: weak with `params.delta`
/// against the measure's entropy, strong with `params.eta()` against its
/// dimension-label law. Returns the verdict and the word's stratum
/// dimension.
pub fn is_doubly_typical(
    samples: &[Sample],
    measure: &StratifiedMeasure,
    params: &TypicalityParams,
) -> Result<(bool, usize)> {
    if samples.len() != params.n() {
        return Err(Error::contract(format!(
            "word length {} does not match parameters for n = {}",
            samples.len(),
            params.n()
        )));
    }
    let labels: Vec<usize> = samples.iter().map(|s| s.stratum).collect();
    let densities: Vec<f64> = samples
        .iter()
        .map(|s| measure.density_at(s))
        .collect::<Result<_>>()?;
    let weak = is_weakly_typical(&densities, measure.entropy().total, params.delta())?;
    let strong = is_strongly_typical(&labels, measure.weights(), params.eta())?;
    Ok((weak && strong, word_dimension(measure, &labels)?))
}

/// The dimension band `n E(D) +/- n^(1/2 + xi)` that the typical part of
/// the n-fold power concentrates on.
///
/// Containment of every strongly typical word is exact when the carrier
/// dimensions of adjacent strata differ by one (so for atom+curve or
/// curve+surface mixtures); label sets with wider gaps scale the
/// achievable deviation by the gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionWindow {
    pub center: f64,
    pub halfwidth: f64,
}

impl DimensionWindow {
    pub fn contains(&self, dimension: f64) -> bool {
        (dimension - self.center).abs() <= self.halfwidth
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.center - self.halfwidth, self.center + self.halfwidth)
    }
}

pub fn dimension_window(measure: &StratifiedMeasure, n: usize, xi: f64) -> Result<DimensionWindow> {
    if !(xi > 0.0 && xi < 0.5) {
        return Err(Error::contract(format!(
            "schedule exponent must lie strictly between 0 and 1/2, got {xi}"
        )));
    }
    Ok(DimensionWindow {
        center: n as f64 * measure.expected_dimension(),
        halfwidth: (n as f64).powf(0.5 + xi),
    })
}

/// Sandwich for the measure of the weakly typical set:
/// `(1 - epsilon) e^{n(H - delta)} <= mass <= e^{n(H + delta)}`.
pub fn sandwich_bounds(entropy: f64, delta: f64, n: usize, epsilon: f64) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::contract(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    if !(delta >= 0.0 && entropy.is_finite()) {
        return Err(Error::contract("margin must be nonnegative and entropy finite"));
    }
    let n = n as f64;
    Ok((
        (1.0 - epsilon) * (n * (entropy - delta)).exp(),
        (n * (entropy + delta)).exp(),
    ))
}

/// Importance-sampling estimate of a typical-stratum volume.
#[derive(Debug, Clone, Copy)]
pub struct VolumeEstimate {
    /// estimated Hausdorff volume of the typical part of the stratum
    pub estimate: f64,
    pub stderr: f64,
    /// `stderr / estimate`; infinite when the estimate is zero
    pub rel_stderr: f64,
    /// normal-approximation 95% interval
    pub ci95: (f64, f64),
    /// draws that landed in the typical set
    pub accepted: usize,
    pub trials: usize,
    /// set when fewer than ten draws were accepted
    pub low_confidence: bool,
}

/// Estimates the Hausdorff volume (of dimension `word_dimension`) of the
/// weakly typical part of the stratum selected by `word`.
///
/// Draws each coordinate from the conditional law of its stratum and
/// weights by the reciprocal per-coordinate density relative to
/// Hausdorff measure; the mixture weights `q` enter the typicality test
/// but not the weight, which is what turns probability into volume. Work
/// is split across a fixed set of independent streams (stream `i` is
/// seeded with `seed + i`), so the result is reproducible and
/// independent of thread scheduling.
pub fn stratum_volume_estimate(
    measure: &StratifiedMeasure,
    word: &[usize],
    params: &TypicalityParams,
    trials: usize,
    seed: u64,
) -> Result<VolumeEstimate> {
    let n = params.n();
    if word.len() != n {
        return Err(Error::contract(format!(
            "word length {} does not match parameters for n = {}",
            word.len(),
            n
        )));
    }
    if trials < 2 {
        return Err(Error::contract("volume estimation needs at least two trials"));
    }
    let strata_count = measure.strata().len();
    for &a in word {
        if a >= strata_count {
            return Err(Error::contract(format!(
                "label {a} outside the measure's {strata_count} strata"
            )));
        }
    }

    let log_q_total: f64 = word.iter().map(|&a| measure.weights()[a].ln()).sum();
    let entropy = measure.entropy().total;
    let delta = params.delta();

    let streams = VOLUME_STREAMS.min(trials as u64);
    let base = trials / streams as usize;
    let rem = trials % streams as usize;

    struct StreamAcc {
        sum: f64,
        sumsq: f64,
        accepted: usize,
    }

    let run_stream = |stream: u64, count: usize| -> Result<StreamAcc> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed.wrapping_add(stream));
        let mut acc = StreamAcc { sum: 0.0, sumsq: 0.0, accepted: 0 };
        for _ in 0..count {
            let mut log_weight = 0.0;
            for &a in word {
                let (piece, param) = measure.strata()[a].sample_param(&mut rng)?;
                log_weight -= measure.strata()[a].log_density_on_carrier(piece, &param)?;
            }
            // weak typicality of the word under the full mixture density
            let rate = -(log_q_total - log_weight) / n as f64;
            if (rate - entropy).abs() < delta {
                let w = log_weight.exp();
                acc.sum += w;
                acc.sumsq += w * w;
                acc.accepted += 1;
            }
        }
        Ok(acc)
    };

    let run_stream = &run_stream;
    let accs: Vec<Result<StreamAcc>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..streams)
            .map(|t| {
                let count = base + usize::from((t as usize) < rem);
                scope.spawn(move || run_stream(t, count))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("stream panicked")).collect()
    });

    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut accepted = 0;
    for acc in accs {
        let acc = acc?;
        sum += acc.sum;
        sumsq += acc.sumsq;
        accepted += acc.accepted;
    }

    let t = trials as f64;
    let estimate = sum / t;
    let var = (sumsq / t - estimate * estimate).max(0.0);
    let stderr = (var / t).sqrt();
    let rel_stderr = if estimate > 0.0 { stderr / estimate } else { f64::INFINITY };
    Ok(VolumeEstimate {
        estimate,
        stderr,
        rel_stderr,
        ci95: (estimate - 1.96 * stderr, estimate + 1.96 * stderr),
        accepted,
        trials,
        low_confidence: accepted < 10,
    })
}
