//! Numerical integration over axis-aligned boxes.
//!
//! Dimensions 1 through 3 use tensor-product Gauss-Legendre rules with
//! adaptive bisection: each region carries the gap between its one-shot
//! value and the sum over its 2^m halves, and the worst region is split
//! until the summed gap meets the tolerance. Above dimension 3 the
//! integrand is averaged over uniform samples and the standard error is
//! reported instead.
//!
//! Reported errors are estimates, not certificates, but they are built to
//! be conservative: the refined value is returned while the error is the
//! coarse-vs-refined gap plus a roundoff floor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};

/// Gauss-Legendre order per axis. Order 8 integrates degree-15 polynomials
/// exactly, plenty between bisections.
const GL_ORDER: usize = 8;

/// Controls for [`integrate`]: absolute tolerance, a subdivision budget,
/// and the Monte Carlo settings used above dimension 3.
#[derive(Debug, Clone)]
pub struct QuadratureScheme {
    pub abs_tol: f64,
    pub max_regions: usize,
    pub mc_samples: usize,
    pub mc_seed: u64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        QuadratureScheme {
            abs_tol: 1e-8,
            max_regions: 40_000,
            mc_samples: 200_000,
            mc_seed: 0x5742_41AD,
        }
    }
}

impl QuadratureScheme {
    pub fn with_tol(abs_tol: f64) -> Self {
        QuadratureScheme { abs_tol, ..Default::default() }
    }
}

/// An integral value together with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gl_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| {
        // Newton iteration on the Legendre polynomial, nodes on [-1, 1].
        let n = GL_ORDER;
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            out.push((x, w));
        }
        out
    })
}

/// Value and derivative of the degree-`n` Legendre polynomial at `x`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// One tensor Gauss-Legendre pass over a box. Errors on non-finite values.
fn gl_box(f: &mut dyn FnMut(&[f64]) -> f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
    let m = lo.len();
    let nodes = gl_nodes();
    let mut idx = vec![0usize; m];
    let mut point = vec![0.0; m];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        for d in 0..m {
            let (x, wx) = nodes[idx[d]];
            let half = 0.5 * (hi[d] - lo[d]);
            point[d] = lo[d] + half * (x + 1.0);
            w *= wx * half;
        }
        let v = f(&point);
        if !v.is_finite() {
            return Err(Error::numeric(format!(
                "integrand returned non-finite value at {point:?}"
            )));
        }
        total += w * v;
        // odometer over the tensor grid
        let mut d = 0;
        loop {
            if d == m {
                return Ok(total);
            }
            idx[d] += 1;
            if idx[d] < GL_ORDER {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

struct Region {
    lo: Vec<f64>,
    hi: Vec<f64>,
    refined: f64,
    err: f64,
}

impl Region {
    fn evaluate(f: &mut dyn FnMut(&[f64]) -> f64, lo: Vec<f64>, hi: Vec<f64>) -> Result<Region> {
        let coarse = gl_box(f, &lo, &hi)?;
        let mut refined = 0.0;
        for (clo, chi) in halves(&lo, &hi) {
            refined += gl_box(f, &clo, &chi)?;
        }
        let err = (refined - coarse).abs();
        Ok(Region { lo, hi, refined, err })
    }
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

/// The 2^m half-boxes of a box.
fn halves(lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    let m = lo.len();
    let mut out = Vec::with_capacity(1 << m);
    for mask in 0..(1usize << m) {
        let mut clo = lo.to_vec();
        let mut chi = hi.to_vec();
        for d in 0..m {
            let mid = 0.5 * (lo[d] + hi[d]);
            if mask & (1 << d) == 0 {
                chi[d] = mid;
            } else {
                clo[d] = mid;
            }
        }
        out.push((clo, chi));
    }
    out
}

/// Integrates `f` over the box given by `bounds`.
///
/// Dimension 0 is rejected; dimensions above 3 switch to Monte Carlo and
/// the returned error is one standard error of the mean.
pub fn integrate(
    mut f: impl FnMut(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    let m = bounds.len();
    if m == 0 {
        return Err(Error::contract("integrate needs at least one dimension"));
    }
    for &(a, b) in bounds {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::contract(format!("bad integration bounds ({a}, {b})")));
        }
    }
    if m > 3 {
        return mc_integrate(&mut f, bounds, scheme);
    }

    let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
    let mut heap = BinaryHeap::new();
    let root = Region::evaluate(&mut f, lo, hi)?;
    let mut total_err = root.err;
    heap.push(root);

    let target = 0.5 * scheme.abs_tol;
    while total_err > target && heap.len() < scheme.max_regions {
        let worst = match heap.pop() {
            Some(r) => r,
            None => break,
        };
        if worst.err == 0.0 {
            heap.push(worst);
            break;
        }
        total_err -= worst.err;
        for (clo, chi) in halves(&worst.lo, &worst.hi) {
            let child = Region::evaluate(&mut f, clo, chi)?;
            total_err += child.err;
            heap.push(child);
        }
    }

    // Re-sum from scratch; the running totals drift over many splits.
    let mut value = 0.0;
    let mut err = 0.0;
    for r in heap.iter() {
        value += r.refined;
        err += r.err;
    }
    let floor = 1e-14 * (1.0 + value.abs());
    Ok(Estimate { value, error: err + floor })
}

fn mc_integrate(
    f: &mut dyn FnMut(&[f64]) -> f64,
    bounds: &[(f64, f64)],
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    let vol: f64 = bounds.iter().map(|&(a, b)| b - a).product();
    let n = scheme.mc_samples.max(2);
    let mut rng = ChaCha12Rng::seed_from_u64(scheme.mc_seed);
    let mut point = vec![0.0; bounds.len()];
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for _ in 0..n {
        for (d, &(a, b)) in bounds.iter().enumerate() {
            point[d] = a + (b - a) * rng.gen::<f64>();
        }
        let v = f(&point);
        if !v.is_finite() {
            return Err(Error::numeric(format!(
                "integrand returned non-finite value at {point:?}"
            )));
        }
        sum += v;
        sumsq += v * v;
    }
    let mean = sum / n as f64;
    let var = (sumsq / n as f64 - mean * mean).max(0.0);
    let stderr = vol * (var / n as f64).sqrt();
    Ok(Estimate { value: vol * mean, error: stderr })
}

/// 1-D convenience wrapper.
pub fn integrate_1d(
    f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    scheme: &QuadratureScheme,
) -> Result<Estimate> {
    let mut f = f;
    integrate(|x: &[f64]| f(x[0]), &[(a, b)], scheme)
}
