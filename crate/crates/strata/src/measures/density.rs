//! Parameter-space densities.
//!
//! A density lives on the parameter box of a chart, never on the carrier
//! itself; the chart's area factor converts between the two. The family
//! is a closed set on purpose: uniform, truncated exponential, and
//! normalized polynomial cover every configuration this crate ships, and
//! each one knows how to normalize itself, integrate its entropy, and
//! sample exactly.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gmt::ParamDomain;
use crate::quad::{integrate, integrate_1d, QuadratureScheme};

/// Rejection sampling gives up after this many consecutive misses, which
/// corresponds to an acceptance rate below 1e-4.
const MAX_CONSECUTIVE_REJECTS: usize = 10_000;

/// User-facing description of a density family.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFamily {
    Uniform,
    /// Density proportional to `exp(-rate * sum of coordinates)`. On boxes
    /// of dimension two and higher this is the product of per-axis
    /// truncated exponentials with the shared rate.
    TruncatedExponential { rate: f64 },
    /// `c_0 + c_1 t + c_2 t^2 + ...` scaled to unit mass. One-dimensional
    /// domains only; a coefficient list has no canonical meaning on a box.
    Polynomial { coeffs: Vec<f64> },
}

impl DensityFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DensityFamily::Uniform => "uniform",
            DensityFamily::TruncatedExponential { .. } => "truncated-exponential",
            DensityFamily::Polynomial { .. } => "polynomial",
        }
    }
}

#[derive(Debug, Clone)]
enum Normalized {
    Uniform {
        /// log of the region mass; the density is exp(-log_mass)
        log_mass: f64,
    },
    TruncExp {
        rate: f64,
        /// per-axis masses of exp(-rate t) over the axis interval
        axis_log_z: Vec<f64>,
    },
    Poly {
        /// coefficients after scaling to unit mass
        coeffs: Vec<f64>,
    },
}

/// A normalized probability density on a parameter domain.
#[derive(Debug, Clone)]
pub struct ParamDensity {
    family: DensityFamily,
    domain: ParamDomain,
    inner: Normalized,
}

impl ParamDensity {
    pub fn new(family: DensityFamily, domain: ParamDomain, scheme: &QuadratureScheme) -> Result<Self> {
        let m = domain.dim();
        let inner = match &family {
            DensityFamily::Uniform => {
                if m == 0 {
                    Normalized::Uniform { log_mass: 0.0 }
                } else if domain.has_membership() {
                    // region mass by quadrature; the membership indicator
                    // makes this the one family allowed on restricted domains
                    let est = integrate(
                        |x: &[f64]| if domain.contains(x) { 1.0 } else { 0.0 },
                        domain.bounds(),
                        scheme,
                    )?;
                    if !(est.value > 0.0) {
                        return Err(Error::contract("membership region has zero volume"));
                    }
                    Normalized::Uniform { log_mass: est.value.ln() }
                } else {
                    Normalized::Uniform { log_mass: domain.box_volume().ln() }
                }
            }
            DensityFamily::TruncatedExponential { rate } => {
                if m == 0 {
                    return Err(Error::contract(
                        "truncated-exponential needs a positive-dimensional domain",
                    ));
                }
                if domain.has_membership() {
                    return Err(Error::Unsupported(
                        "non-uniform densities on membership-restricted domains".into(),
                    ));
                }
                if !rate.is_finite() {
                    return Err(Error::contract("truncated-exponential rate must be finite"));
                }
                let axis_log_z = domain
                    .bounds()
                    .iter()
                    .map(|&(a, b)| log_axis_mass(*rate, a, b))
                    .collect::<Result<Vec<_>>>()?;
                Normalized::TruncExp { rate: *rate, axis_log_z }
            }
            DensityFamily::Polynomial { coeffs } => {
                if m != 1 {
                    return Err(Error::contract(
                        "polynomial densities are defined on 1-dimensional domains only",
                    ));
                }
                if domain.has_membership() {
                    return Err(Error::Unsupported(
                        "non-uniform densities on membership-restricted domains".into(),
                    ));
                }
                if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::contract("polynomial coefficients must be finite and nonempty"));
                }
                let (a, b) = domain.bounds()[0];
                let mass = poly_cdf_raw(coeffs, a, b);
                if !(mass > 0.0 && mass.is_finite()) {
                    return Err(Error::contract(format!(
                        "polynomial has nonpositive mass {mass} on [{a}, {b}]"
                    )));
                }
                let scaled: Vec<f64> = coeffs.iter().map(|c| c / mass).collect();
                // sign check on a dense grid; zeros on a null set are fine,
                // actual negativity is not
                for i in 0..=1000 {
                    let t = a + (b - a) * (i as f64) / 1000.0;
                    if horner(&scaled, t) < -1e-12 {
                        return Err(Error::contract(format!(
                            "polynomial density is negative near t={t}"
                        )));
                    }
                }
                Normalized::Poly { coeffs: scaled }
            }
        };
        Ok(ParamDensity { family, domain, inner })
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    /// Density value at a domain point.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.log_eval(x).exp()
    }

    /// Log density, computed without intermediate overflow.
    pub fn log_eval(&self, x: &[f64]) -> f64 {
        match &self.inner {
            Normalized::Uniform { log_mass } => -log_mass,
            Normalized::TruncExp { rate, axis_log_z } => {
                let s: f64 = x.iter().sum();
                -rate * s - axis_log_z.iter().sum::<f64>()
            }
            Normalized::Poly { coeffs } => horner(coeffs, x[0]).max(0.0).ln(),
        }
    }

    /// `|integral - 1|` by quadrature; construction normalizes analytically
    /// and this is the independent check.
    pub fn normalization_residual(&self, scheme: &QuadratureScheme) -> Result<f64> {
        if self.domain.dim() == 0 {
            return Ok(0.0);
        }
        let est = integrate(
            |x: &[f64]| {
                if self.domain.contains(x) {
                    self.eval(x)
                } else {
                    0.0
                }
            },
            self.domain.bounds(),
            scheme,
        )?;
        Ok((est.value - 1.0).abs())
    }

    /// Differential entropy with respect to Lebesgue measure on the
    /// domain. Uniform is closed-form; the others integrate `-g ln g`,
    /// axis by axis where the density factorizes.
    pub fn entropy(&self, scheme: &QuadratureScheme) -> Result<f64> {
        match &self.inner {
            Normalized::Uniform { log_mass } => Ok(*log_mass),
            Normalized::TruncExp { rate, axis_log_z } => {
                let mut total = 0.0;
                for (axis, &(a, b)) in self.domain.bounds().iter().enumerate() {
                    let log_z = axis_log_z[axis];
                    let est = integrate_1d(
                        |t| {
                            let lg = -rate * t - log_z;
                            -lg.exp() * lg
                        },
                        a,
                        b,
                        scheme,
                    )
                    .map_err(|e| {
                        Error::numeric(format!("entropy quadrature on axis {axis}: {e}"))
                    })?;
                    check_converged(&est, scheme, "density entropy")?;
                    total += est.value;
                }
                Ok(total)
            }
            Normalized::Poly { coeffs } => {
                let (a, b) = self.domain.bounds()[0];
                let est = integrate_1d(
                    |t| {
                        let g = horner(coeffs, t).max(0.0);
                        if g == 0.0 {
                            0.0
                        } else {
                            -g * g.ln()
                        }
                    },
                    a,
                    b,
                    scheme,
                )?;
                check_converged(&est, scheme, "density entropy")?;
                Ok(est.value)
            }
        }
    }

    /// Draws one parameter tuple. One-dimensional families invert their
    /// CDFs; higher-dimensional non-uniform densities reject against a
    /// uniform envelope over the box.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        match &self.inner {
            Normalized::Uniform { .. } => self.domain.sample(rng),
            Normalized::TruncExp { rate, .. } => {
                if self.domain.dim() == 1 {
                    let (a, b) = self.domain.bounds()[0];
                    Ok(vec![truncexp_inverse_cdf(*rate, a, b, rng.gen::<f64>())?])
                } else {
                    self.sample_by_rejection(rng)
                }
            }
            Normalized::Poly { coeffs } => {
                let (a, b) = self.domain.bounds()[0];
                Ok(vec![poly_inverse_cdf(coeffs, a, b, rng.gen::<f64>())])
            }
        }
    }

    fn sample_by_rejection(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        let log_sup = self.log_sup();
        let mut misses = 0usize;
        loop {
            let x = self.domain.sample(rng)?;
            let accept_logp = self.log_eval(&x) - log_sup;
            if rng.gen::<f64>() < accept_logp.exp() {
                return Ok(x);
            }
            misses += 1;
            if misses >= MAX_CONSECUTIVE_REJECTS {
                return Err(Error::Sampling(format!(
                    "rejection sampling for a {} density missed {MAX_CONSECUTIVE_REJECTS} \
                     times in a row (acceptance below 1e-4)",
                    self.family.name()
                )));
            }
        }
    }

    /// Supremum of the log density over the box, for rejection envelopes.
    fn log_sup(&self) -> f64 {
        match &self.inner {
            Normalized::Uniform { log_mass } => -log_mass,
            Normalized::TruncExp { rate, axis_log_z } => {
                let s: f64 = self
                    .domain
                    .bounds()
                    .iter()
                    .map(|&(a, b)| if *rate >= 0.0 { a } else { b })
                    .sum();
                -rate * s - axis_log_z.iter().sum::<f64>()
            }
            Normalized::Poly { coeffs } => {
                let (a, b) = self.domain.bounds()[0];
                let mut best = f64::NEG_INFINITY;
                for i in 0..=1000 {
                    let t = a + (b - a) * (i as f64) / 1000.0;
                    best = best.max(horner(coeffs, t));
                }
                best.ln()
            }
        }
    }
}

pub(crate) fn check_converged(
    est: &crate::quad::Estimate,
    scheme: &QuadratureScheme,
    term: &str,
) -> Result<()> {
    let limit = (1000.0 * scheme.abs_tol).max(1e-5);
    if est.error > limit {
        return Err(Error::numeric(format!(
            "quadrature for {term} did not converge (error estimate {:.3e})",
            est.error
        )));
    }
    Ok(())
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Raw polynomial mass on `[a, b]` before scaling.
fn poly_cdf_raw(coeffs: &[f64], a: f64, b: f64) -> f64 {
    let anti = |t: f64| {
        coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * t.powi(j as i32 + 1) / (j as f64 + 1.0))
            .sum::<f64>()
    };
    anti(b) - anti(a)
}

/// log of the mass of `exp(-rate t)` over `[a, b]`, stable for any sign
/// of the rate and for rates near zero.
fn log_axis_mass(rate: f64, a: f64, b: f64) -> Result<f64> {
    let span = b - a;
    if rate.abs() * span < 1e-12 {
        return Ok(span.ln());
    }
    // mass = exp(-rate a) (1 - exp(-rate span)) / rate
    let tail = -(-rate * span).exp_m1() / rate;
    if !(tail > 0.0 && tail.is_finite()) {
        return Err(Error::numeric(format!(
            "truncated-exponential mass overflowed on [{a}, {b}] at rate {rate}"
        )));
    }
    Ok(-rate * a + tail.ln())
}

fn truncexp_inverse_cdf(rate: f64, a: f64, b: f64, u: f64) -> Result<f64> {
    let span = b - a;
    if rate.abs() * span < 1e-12 {
        return Ok(a + span * u);
    }
    // CDF(t) = (1 - exp(-rate (t-a))) / (1 - exp(-rate span)), inverted
    let denom = -(-rate * span).exp_m1();
    let inner = 1.0 + u * (-denom);
    if !(inner > 0.0) {
        return Err(Error::numeric("truncated-exponential inverse CDF underflow"));
    }
    let t = a - inner.ln() / rate;
    Ok(t.clamp(a, b))
}

fn poly_inverse_cdf(coeffs: &[f64], a: f64, b: f64, u: f64) -> f64 {
    // bisection on the CDF; 80 halvings pin the result past f64 precision
    let target = u * poly_cdf_raw(coeffs, a, b);
    let (mut lo, mut hi) = (a, b);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if poly_cdf_raw(coeffs, a, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn unit_domain() -> ParamDomain {
        ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap()
    }

    fn scheme() -> QuadratureScheme {
        QuadratureScheme::default()
    }

    #[test]
    fn uniform_entropy_is_log_volume() {
        let d = ParamDensity::new(
            DensityFamily::Uniform,
            ParamDomain::new_box(vec![(0.0, 2.0), (0.0, 3.0)]).unwrap(),
            &scheme(),
        )
        .unwrap();
        assert!((d.entropy(&scheme()).unwrap() - 6.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn truncexp_entropy_matches_closed_form() {
        // rate 1 on [0,1]; closed form lambda E[t] + ln Z
        let d = ParamDensity::new(
            DensityFamily::TruncatedExponential { rate: 1.0 },
            unit_domain(),
            &scheme(),
        )
        .unwrap();
        let expect = -0.04065185225640838;
        assert!(
            (d.entropy(&scheme()).unwrap() - expect).abs() < 1e-9,
            "got {}",
            d.entropy(&scheme()).unwrap()
        );
    }

    #[test]
    fn polynomial_2t_entropy() {
        let d = ParamDensity::new(
            DensityFamily::Polynomial { coeffs: vec![0.0, 1.0] },
            unit_domain(),
            &scheme(),
        )
        .unwrap();
        let expect = 0.5 - std::f64::consts::LN_2;
        // the t ln t endpoint keeps quadrature a shade above 1e-9 here
        assert!((d.entropy(&scheme()).unwrap() - expect).abs() < 1e-7);
    }

    #[test]
    fn densities_integrate_to_one() {
        let cases = vec![
            ParamDensity::new(DensityFamily::Uniform, unit_domain(), &scheme()).unwrap(),
            ParamDensity::new(
                DensityFamily::TruncatedExponential { rate: 2.5 },
                ParamDomain::new_box(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap(),
                &scheme(),
            )
            .unwrap(),
            ParamDensity::new(
                DensityFamily::Polynomial { coeffs: vec![1.0, 0.0, 3.0] },
                ParamDomain::new_box(vec![(-1.0, 1.0)]).unwrap(),
                &scheme(),
            )
            .unwrap(),
        ];
        for d in cases {
            assert!(
                d.normalization_residual(&scheme()).unwrap() < 1e-8,
                "{:?} not normalized",
                d.family()
            );
        }
    }

    #[test]
    fn inverse_cdf_sampling_has_correct_mean() {
        let d = ParamDensity::new(
            DensityFamily::TruncatedExponential { rate: 1.0 },
            unit_domain(),
            &scheme(),
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| d.sample(&mut rng).unwrap()[0]).sum::<f64>() / n as f64;
        // E[t] = (1 - 2/e) / (1 - 1/e)
        let expect = (1.0 - 2.0 / std::f64::consts::E) / (1.0 - 1.0 / std::f64::consts::E);
        assert!((mean - expect).abs() < 0.005, "mean {mean} vs {expect}");
    }

    #[test]
    fn rejection_sampling_matches_marginal() {
        let d = ParamDensity::new(
            DensityFamily::TruncatedExponential { rate: 1.5 },
            ParamDomain::new_box(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            &scheme(),
        )
        .unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let n = 50_000;
        let mut mean0 = 0.0;
        for _ in 0..n {
            mean0 += d.sample(&mut rng).unwrap()[0];
        }
        mean0 /= n as f64;
        let lam = 1.5_f64;
        let expect = (1.0 - (1.0 + lam) * (-lam).exp()) / (lam * (1.0 - (-lam).exp()));
        assert!((mean0 - expect).abs() < 0.01, "mean {mean0} vs {expect}");
    }

    #[test]
    fn negative_polynomial_rejected() {
        let r = ParamDensity::new(
            DensityFamily::Polynomial { coeffs: vec![-1.0, 1.0] },
            unit_domain(),
            &scheme(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn polynomial_needs_one_dimension() {
        let r = ParamDensity::new(
            DensityFamily::Polynomial { coeffs: vec![1.0] },
            ParamDomain::new_box(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap(),
            &scheme(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn negative_rate_tilts_toward_upper_end() {
        let d = ParamDensity::new(
            DensityFamily::TruncatedExponential { rate: -2.0 },
            unit_domain(),
            &scheme(),
        )
        .unwrap();
        assert!(d.normalization_residual(&scheme()).unwrap() < 1e-8);
        assert!(d.eval(&[0.9]) > d.eval(&[0.1]));
    }
}
