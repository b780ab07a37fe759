//! Splitting a measure over a projection or a linear score.
//!
//! Two decompositions live here. `disintegrate_product` handles the easy
//! geometry: a product carrier splits over the projection onto its first
//! factor, the conditionals are all copies of the second factor, and the
//! joint entropy must equal the sum. `slice_by_functional` handles the
//! interesting one: slicing a flat carrier by the level sets of a linear
//! score `x -> Ax`. There the fibers see the carrier through the coarea
//! factor of the restricted map, and the entropy of the whole splits as
//!
//! ```text
//! H(total) = H(score) + mean fiber entropy - mean log coarea factor
//! ```
//!
//! when fiber entropies are taken against plain Hausdorff measure, and
//! with the correction absorbed when they are taken against the
//! coarea-weighted fiber reference. Both bookkeepings are computed from
//! scratch along separate float paths, so the reported residuals measure
//! the identity itself, not an algebraic tautology.

use crate::error::{Error, Result};
use crate::gmt::{coarea_factor, Matrix};
use crate::measures::{RectifiableComponent, StratifiedMeasure};
use crate::quad::{integrate, integrate_1d, QuadratureScheme};

/// Entropy split of a product measure over projection onto the first
/// factor. All terms are computed independently; `residual` is their
/// failure to satisfy `joint = base + conditional`.
#[derive(Debug, Clone, Copy)]
pub struct ProductDisintegration {
    pub joint_entropy: f64,
    pub base_entropy: f64,
    pub mean_conditional_entropy: f64,
    pub residual: f64,
}

/// Disintegrates `a (x) b` over the projection onto `a`'s ambient block.
///
/// The joint entropy is integrated directly on the product chart rather
/// than assembled from the factors, so the residual exercises the product
/// area factor and both densities.
pub fn disintegrate_product(
    a: &RectifiableComponent,
    b: &RectifiableComponent,
    scheme: &QuadratureScheme,
) -> Result<ProductDisintegration> {
    let base_entropy = a.entropy(scheme)?;
    let mean_conditional_entropy = b.entropy(scheme)?;

    let prod_chart = a.chart().product(b.chart())?;
    let ma = a.dim();
    let joint_entropy = if prod_chart.dim() == 0 {
        0.0
    } else {
        let mut failure: Option<Error> = None;
        let est = integrate(
            |xy: &[f64]| {
                let (xa, xb) = xy.split_at(ma);
                if !a.density().domain().contains(xa) || !b.density().domain().contains(xb) {
                    return 0.0;
                }
                let log_g = a.density().log_eval(xa) + b.density().log_eval(xb);
                match prod_chart.area_factor_at(xy) {
                    Ok(j) if j > 0.0 => log_g.exp() * (j.ln() - log_g),
                    Ok(_) => {
                        failure.get_or_insert(Error::Singular(
                            "product area factor vanishes".into(),
                        ));
                        f64::NAN
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            prod_chart.domain().bounds(),
            scheme,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        est?.value
    };

    Ok(ProductDisintegration {
        joint_entropy,
        base_entropy,
        mean_conditional_entropy,
        residual: (joint_entropy - base_entropy - mean_conditional_entropy).abs(),
    })
}

/// Entropy accounting for a component sliced by a linear score.
#[derive(Debug, Clone, Copy)]
pub struct SliceTerms {
    /// entropy of the component against Hausdorff measure on its carrier
    pub total_entropy: f64,
    /// entropy of the score's law on R^d
    pub score_entropy: f64,
    /// mean fiber entropy against plain Hausdorff measure on each fiber
    pub mean_fiber_entropy_plain: f64,
    /// mean fiber entropy against the coarea-weighted fiber reference
    pub mean_fiber_entropy_weighted: f64,
    /// log of the (constant) coarea factor of the restricted score
    pub log_coarea: f64,
    /// `|total - score - plain + log_coarea|`
    pub residual_plain: f64,
    /// `|total - score - weighted|`
    pub residual_weighted: f64,
}

/// Slices `comp` by the level sets of `x -> Ax` and returns every term of
/// the resulting entropy identity.
///
/// Supported geometry: the chart must be affine (flat carrier, spot
/// checked), the score must have one or two rows of full rank on the
/// carrier, and fibers may have dimension zero or one. That covers scores
/// on segments, planar patches, and planar slices of flat surfaces.
pub fn slice_by_functional(
    comp: &RectifiableComponent,
    score: &Matrix,
    scheme: &QuadratureScheme,
) -> Result<SliceTerms> {
    let k = comp.dim();
    let d = score.rows();
    if score.cols() != comp.ambient_dim() {
        return Err(Error::contract(format!(
            "score has {} columns, ambient dimension is {}",
            score.cols(),
            comp.ambient_dim()
        )));
    }
    if !(1..=2).contains(&d) || d > k || k - d > 1 {
        return Err(Error::Unsupported(format!(
            "slicing supports score dimension 1 or 2 with fibers of dimension \
             at most 1; got score dimension {d} on a {k}-dimensional carrier"
        )));
    }
    if comp.density().domain().has_membership() {
        return Err(Error::Unsupported(
            "slicing membership-restricted domains".into(),
        ));
    }

    let affine = AffineChart::extract(comp)?;
    // coarea factor of the score restricted to the carrier plane
    let tangent_score = score.matmul(&affine.tangent_frame)?;
    let coarea = coarea_factor(&tangent_score)?;
    if coarea < 1e-12 {
        return Err(Error::Singular(
            "score is degenerate on the carrier (coarea factor ~ 0)".into(),
        ));
    }
    let log_coarea = coarea.ln();

    let total_entropy = comp.entropy(scheme)?;
    let (score_entropy, plain, weighted) = if k == d {
        slice_zero_dim_fibers(comp, score, &affine, coarea, scheme)?
    } else {
        slice_line_fibers(comp, score, &affine, coarea, scheme)?
    };

    Ok(SliceTerms {
        total_entropy,
        score_entropy,
        mean_fiber_entropy_plain: plain,
        mean_fiber_entropy_weighted: weighted,
        log_coarea,
        residual_plain: (total_entropy - score_entropy - plain + log_coarea).abs(),
        residual_weighted: (total_entropy - score_entropy - weighted).abs(),
    })
}

/// Verifies the stratified entropy identity `H = H(dims) + sum q_i H_i`
/// against an independently computed total.
#[derive(Debug, Clone, Copy)]
pub struct ChainRuleCheck {
    /// mixture term plus weighted conditional terms
    pub decomposed: f64,
    /// the same entropy from a single pass that never forms those terms
    pub independent: f64,
    pub residual: f64,
    /// present when the independent route was Monte Carlo
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub enum ResidualMode {
    Quadrature,
    MonteCarlo { trials: usize, seed: u64 },
}

pub fn stratified_chain_rule_check(
    measure: &StratifiedMeasure,
    mode: ResidualMode,
    scheme: &QuadratureScheme,
) -> Result<ChainRuleCheck> {
    let decomposed = measure.entropy().total;
    let (independent, stderr) = match mode {
        ResidualMode::Quadrature => (measure.direct_entropy(scheme)?, None),
        ResidualMode::MonteCarlo { trials, seed } => {
            let (est, se) = measure.mc_entropy(trials, seed)?;
            (est, Some(se))
        }
    };
    Ok(ChainRuleCheck {
        decomposed,
        independent,
        residual: (independent - decomposed).abs(),
        stderr,
    })
}

/// An affine description `phi(x) = offset + M (x - lo)` recovered from a
/// chart, with the orthonormal tangent frame of the carrier plane.
struct AffineChart {
    lo: Vec<f64>,
    span: Vec<f64>,
    offset: Vec<f64>,
    linear: Matrix,
    tangent_frame: Matrix,
}

impl AffineChart {
    fn extract(comp: &RectifiableComponent) -> Result<Self> {
        let chart = comp.chart();
        let bounds = chart.domain().bounds();
        let k = chart.dim();
        let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let span: Vec<f64> = bounds.iter().map(|b| b.1 - b.0).collect();
        let offset = chart.map(&lo);
        let linear = chart.jacobian_at(&lo)?;

        // affinity spot check: the jacobian must not drift across the box
        // and the map must match its first-order model at the far corner
        // and the center
        let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        let mid: Vec<f64> = bounds.iter().map(|b| 0.5 * (b.0 + b.1)).collect();
        for probe in [&hi, &mid] {
            let jac = chart.jacobian_at(probe)?;
            let predicted: Vec<f64> = (0..chart.ambient_dim())
                .map(|i| {
                    offset[i]
                        + (0..k)
                            .map(|j| linear.get(i, j) * (probe[j] - lo[j]))
                            .sum::<f64>()
                })
                .collect();
            let actual = chart.map(probe);
            for i in 0..chart.ambient_dim() {
                let scale = 1.0 + actual[i].abs();
                if (actual[i] - predicted[i]).abs() > 1e-8 * scale {
                    return Err(Error::Unsupported(format!(
                        "slicing needs a flat carrier; chart '{}' bends",
                        chart.label()
                    )));
                }
                for j in 0..k {
                    if (jac.get(i, j) - linear.get(i, j)).abs() > 1e-8 {
                        return Err(Error::Unsupported(format!(
                            "slicing needs a flat carrier; chart '{}' bends",
                            chart.label()
                        )));
                    }
                }
            }
        }

        // Gram-Schmidt on the columns of the linear part (k <= 2)
        let mut cols: Vec<Vec<f64>> = (0..k).map(|j| linear.column_vec(j)).collect();
        for j in 0..k {
            for prev in 0..j {
                let dot: f64 = (0..cols[j].len())
                    .map(|i| cols[j][i] * cols[prev][i])
                    .sum();
                for i in 0..cols[j].len() {
                    cols[j][i] -= dot * cols[prev][i];
                }
            }
            let norm: f64 = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(Error::Singular(format!(
                    "chart '{}' is rank deficient",
                    chart.label()
                )));
            }
            for v in &mut cols[j] {
                *v /= norm;
            }
        }
        let n = offset.len();
        let tangent_frame = Matrix::from_fn(n, k, |i, j| cols[j][i])?;

        Ok(AffineChart { lo, span, offset, linear, tangent_frame })
    }

    /// score composed with the chart, as `t(xi) = a_eff . xi + c` on the
    /// offset coordinates `xi = x - lo`
    fn composed_score(&self, score: &Matrix) -> Result<(Matrix, Vec<f64>)> {
        let eff = score.matmul(&self.linear)?;
        let c: Vec<f64> = (0..score.rows())
            .map(|r| {
                (0..score.cols())
                    .map(|i| score.get(r, i) * self.offset[i])
                    .sum()
            })
            .collect();
        Ok((eff, c))
    }
}

/// `k == d`: every fiber is a single point. The fiber entropies are 0
/// (plain) and `-ln C` (weighted); the score entropy is integrated in
/// chart coordinates through the change of variables by `det`.
fn slice_zero_dim_fibers(
    comp: &RectifiableComponent,
    score: &Matrix,
    affine: &AffineChart,
    coarea: f64,
    scheme: &QuadratureScheme,
) -> Result<(f64, f64, f64)> {
    let (eff, _) = affine.composed_score(score)?;
    let det = eff.det()?.abs();
    if det < 1e-12 {
        return Err(Error::Singular("score collapses the carrier".into()));
    }
    let log_det = det.ln();
    // H(score law) = -int g ln(g / |det|) over the parameter box
    let dens = comp.density();
    let est = integrate(
        |x: &[f64]| {
            let lg = dens.log_eval(x);
            lg.exp() * (log_det - lg)
        },
        dens.domain().bounds(),
        scheme,
    )?;
    Ok((est.value, 0.0, -coarea.ln()))
}

/// `k == 2, d == 1`: fibers are chords of the parameter box. All fiber
/// quantities reduce to line integrals of the parameter density, clipped
/// to the box.
fn slice_line_fibers(
    comp: &RectifiableComponent,
    score: &Matrix,
    affine: &AffineChart,
    coarea: f64,
    scheme: &QuadratureScheme,
) -> Result<(f64, f64, f64)> {
    let (eff, c) = affine.composed_score(score)?;
    let a = [eff.get(0, 0), eff.get(0, 1)];
    let a_norm = (a[0] * a[0] + a[1] * a[1]).sqrt();
    if a_norm < 1e-12 {
        return Err(Error::Singular("score collapses the carrier".into()));
    }
    let dens = comp.density().clone();
    let lo = affine.lo.clone();
    let span = [affine.span[0], affine.span[1]];
    // constant area factor of the chart, as |det| of its linear part in
    // the tangent frame
    let tangential = affine.tangent_frame.transpose().matmul(&affine.linear)?;
    let j_const = tangential.det()?.abs();

    // score range over the box corners
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for corner in 0..4 {
        let xi = [
            if corner & 1 == 0 { 0.0 } else { span[0] },
            if corner & 2 == 0 { 0.0 } else { span[1] },
        ];
        let t = a[0] * xi[0] + a[1] * xi[1] + c[0];
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }

    let inner_scheme = QuadratureScheme {
        abs_tol: scheme.abs_tol * 1e-2,
        max_regions: 4000,
        ..scheme.clone()
    };
    // G0 = int g dl and G1 = int g ln g dl along the clipped fiber,
    // parametrized by arclength in parameter coordinates
    let fiber_integrals = move |t: f64| -> Result<(f64, f64)> {
        let u = [-a[1] / a_norm, a[0] / a_norm];
        let base = [
            a[0] * (t - c[0]) / (a_norm * a_norm),
            a[1] * (t - c[0]) / (a_norm * a_norm),
        ];
        let Some((s0, s1)) = clip_to_box(&base, &u, &span) else {
            return Ok((0.0, 0.0));
        };
        if s1 - s0 < 1e-13 {
            return Ok((0.0, 0.0));
        }
        let g_at = |s: f64| {
            let x = [lo[0] + base[0] + u[0] * s, lo[1] + base[1] + u[1] * s];
            dens.log_eval(&x)
        };
        let g0 = integrate_1d(|s| g_at(s).exp(), s0, s1, &inner_scheme)?;
        let g1 = integrate_1d(
            |s| {
                let lg = g_at(s);
                lg.exp() * lg
            },
            s0,
            s1,
            &inner_scheme,
        )?;
        Ok((g0.value, g1.value))
    };

    // three outer integrals share the fiber data: the score density
    // p(t) = G0/|a|, its entropy, and the two mean fiber entropies
    let mut failure: Option<Error> = None;
    let mut eval = |t: f64| -> (f64, f64, f64) {
        match fiber_integrals(t) {
            Ok((g0, g1)) => {
                let p = g0 / a_norm;
                if p <= 0.0 {
                    return (0.0, 0.0, 0.0);
                }
                let neg_p_ln_p = -p * p.ln();
                // fiber entropy against plain Hausdorff measure is
                // ln(J C p) - G1/(p |a|); weight by p for the mean, and
                // the coarea-weighted reference drops the C inside the ln
                let shared = -g1 / a_norm;
                let plain = p * (j_const * coarea * p).ln() + shared;
                let weighted = p * (j_const * p).ln() + shared;
                (neg_p_ln_p, plain, weighted)
            }
            Err(e) => {
                failure.get_or_insert(e);
                (f64::NAN, f64::NAN, f64::NAN)
            }
        }
    };

    let score_est = integrate_1d(|t| eval(t).0, t_min, t_max, scheme);
    let plain_est = integrate_1d(|t| eval(t).1, t_min, t_max, scheme);
    let weighted_est = integrate_1d(|t| eval(t).2, t_min, t_max, scheme);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((score_est?.value, plain_est?.value, weighted_est?.value))
}

/// Liang-Barsky clipping of the line `base + u s` against the box
/// `[0, span]`; returns the s-interval inside, if any.
fn clip_to_box(base: &[f64; 2], u: &[f64; 2], span: &[f64; 2]) -> Option<(f64, f64)> {
    let mut s0 = f64::NEG_INFINITY;
    let mut s1 = f64::INFINITY;
    for i in 0..2 {
        if u[i].abs() < 1e-15 {
            if base[i] < -1e-12 || base[i] > span[i] + 1e-12 {
                return None;
            }
            continue;
        }
        let ta = (0.0 - base[i]) / u[i];
        let tb = (span[i] - base[i]) / u[i];
        let (ta, tb) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        s0 = s0.max(ta);
        s1 = s1.min(tb);
    }
    (s0 < s1).then_some((s0, s1))
}
