//! Parametrized patches: Lipschitz maps from a box into ambient space.
//!
//! A [`Chart`] is the unit of geometry everywhere in this crate. It knows
//! its parameter box, its ambient dimension, how to map parameters to
//! points, and optionally an analytic Jacobian and a Lipschitz bound.
//! Charts are validated at construction: a randomized collision check
//! guards injectivity, and an analytic Jacobian is cross-checked against
//! finite differences before it is trusted.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::gmt::factors::area_factor;
use crate::gmt::Matrix;
use crate::quad::{integrate, Estimate, QuadratureScheme};

/// Finite-difference step for numeric Jacobians.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Minimum image separation demanded by the construction-time collision
/// check, and the scale below which two ambient points count as equal.
pub const COLLISION_TOL: f64 = 1e-9;

/// A point of ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::contract("points need at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::contract("point coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dist(&self, other: &Point) -> f64 {
        dist(&self.coords, other.coords())
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

type MembershipFn = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// An axis-aligned parameter box, optionally restricted by a membership
/// predicate. Dimension 0 is the single empty parameter tuple.
#[derive(Clone)]
pub struct ParamDomain {
    bounds: Vec<(f64, f64)>,
    membership: Option<MembershipFn>,
}

impl ParamDomain {
    pub fn new_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for &(a, b) in &bounds {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::contract(format!("bad domain interval ({a}, {b})")));
            }
        }
        Ok(ParamDomain { bounds, membership: None })
    }

    /// The 0-dimensional domain.
    pub fn point() -> Self {
        ParamDomain { bounds: Vec::new(), membership: None }
    }

    pub fn with_membership(
        mut self,
        pred: impl Fn(&[f64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        self.membership = Some(Arc::new(pred));
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn has_membership(&self) -> bool {
        self.membership.is_some()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let in_box = self
            .bounds
            .iter()
            .zip(x)
            .all(|(&(a, b), &v)| v >= a && v <= b);
        in_box && self.membership.as_ref().map_or(true, |m| m(x))
    }

    pub fn box_volume(&self) -> f64 {
        self.bounds.iter().map(|&(a, b)| b - a).product()
    }

    pub fn diameter(&self) -> f64 {
        self.bounds
            .iter()
            .map(|&(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    /// Uniform draw from the box, rejecting against the membership
    /// predicate when one is present.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        const MAX_TRIES: usize = 100_000;
        for _ in 0..MAX_TRIES {
            let x: Vec<f64> = self
                .bounds
                .iter()
                .map(|&(a, b)| a + (b - a) * rng.gen::<f64>())
                .collect();
            if self.membership.as_ref().map_or(true, |m| m(&x)) {
                return Ok(x);
            }
        }
        Err(Error::Sampling(format!(
            "membership predicate rejected {MAX_TRIES} consecutive box draws"
        )))
    }

}

impl fmt::Debug for ParamDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamDomain")
            .field("bounds", &self.bounds)
            .field("membership", &self.membership.is_some())
            .finish()
    }
}

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JacFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

/// Result of a finite-difference Jacobian: the matrix plus the axes where
/// the stencil had to fall back to one-sided differences at the boundary.
#[derive(Debug, Clone)]
pub struct NumericJacobian {
    pub matrix: Matrix,
    pub one_sided_axes: Vec<usize>,
}

/// Lower bound on the Lipschitz constant, with a flag raised when the
/// sampled ratio exceeds a declared bound.
#[derive(Debug, Clone, Copy)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub exceeded_declared: bool,
}

/// An injective Lipschitz parametrization of a patch.
#[derive(Clone)]
pub struct Chart {
    label: String,
    domain: ParamDomain,
    ambient_dim: usize,
    map: MapFn,
    jacobian: Option<JacFn>,
    lipschitz_bound: Option<f64>,
}

impl fmt::Debug for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chart")
            .field("label", &self.label)
            .field("dim", &self.domain.dim())
            .field("ambient_dim", &self.ambient_dim)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .field("lipschitz_bound", &self.lipschitz_bound)
            .finish()
    }
}

impl Chart {
    /// Validates and builds a chart.
    ///
    /// Checks run here, not lazily: the map must land in the stated
    /// ambient dimension with finite coordinates, sampled parameter pairs
    /// that are far apart must not collide in the image, and an analytic
    /// Jacobian must agree with finite differences at sampled interior
    /// points.
    pub fn new(
        label: impl Into<String>,
        domain: ParamDomain,
        ambient_dim: usize,
        map: MapFn,
        jacobian: Option<JacFn>,
        lipschitz_bound: Option<f64>,
    ) -> Result<Self> {
        let label = label.into();
        if ambient_dim < domain.dim() {
            return Err(Error::contract(format!(
                "chart '{label}': ambient dimension {} below parameter dimension {}",
                ambient_dim,
                domain.dim()
            )));
        }
        if let Some(b) = lipschitz_bound {
            if !(b.is_finite() && b >= 0.0) {
                return Err(Error::contract(format!(
                    "chart '{label}': lipschitz bound must be finite and nonnegative"
                )));
            }
        }
        let chart = Chart {
            label,
            domain,
            ambient_dim,
            map,
            jacobian,
            lipschitz_bound,
        };
        chart.check_map_output()?;
        chart.check_injectivity()?;
        chart.check_analytic_jacobian()?;
        Ok(chart)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz_bound
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Image of a parameter tuple.
    pub fn map(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }

    /// Image as a validated [`Point`].
    pub fn map_point(&self, x: &[f64]) -> Result<Point> {
        Point::new(self.map(x))
    }

    fn rng_for_checks(&self) -> ChaCha12Rng {
        // Fixed seed: construction must be deterministic.
        ChaCha12Rng::seed_from_u64(0x0C0A_11DE)
    }

    fn check_map_output(&self) -> Result<()> {
        let mut rng = self.rng_for_checks();
        let probes = if self.dim() == 0 { 1 } else { 8 };
        for _ in 0..probes {
            let x = self.domain.sample(&mut rng)?;
            let y = self.map(&x);
            if y.len() != self.ambient_dim {
                return Err(Error::contract(format!(
                    "chart '{}': map produced {} coordinates, ambient dimension is {}",
                    self.label,
                    y.len(),
                    self.ambient_dim
                )));
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract(format!(
                    "chart '{}': map produced non-finite coordinates at {x:?}",
                    self.label
                )));
            }
        }
        Ok(())
    }

    fn check_injectivity(&self) -> Result<()> {
        if self.dim() == 0 {
            return Ok(());
        }
        let mut rng = self.rng_for_checks();
        let sep_floor = 1e-6 * self.domain.diameter();
        let mut checked = 0;
        let mut attempts = 0;
        while checked < 64 && attempts < 1024 {
            attempts += 1;
            let a = self.domain.sample(&mut rng)?;
            let b = self.domain.sample(&mut rng)?;
            if dist(&a, &b) <= sep_floor {
                continue;
            }
            checked += 1;
            let img_sep = dist(&self.map(&a), &self.map(&b));
            if img_sep <= COLLISION_TOL {
                return Err(Error::contract(format!(
                    "chart '{}': collision between parameters {a:?} and {b:?} \
                     (image separation {img_sep:.2e})",
                    self.label
                )));
            }
        }
        Ok(())
    }

    fn check_analytic_jacobian(&self) -> Result<()> {
        let Some(jac) = &self.jacobian else { return Ok(()) };
        if self.dim() == 0 {
            return Ok(());
        }
        let mut rng = self.rng_for_checks();
        for _ in 0..5 {
            let x = self.domain.sample(&mut rng)?;
            let analytic = jac(&x);
            if analytic.rows() != self.ambient_dim || analytic.cols() != self.dim() {
                return Err(Error::contract(format!(
                    "chart '{}': analytic jacobian is {}x{}, expected {}x{}",
                    self.label,
                    analytic.rows(),
                    analytic.cols(),
                    self.ambient_dim,
                    self.dim()
                )));
            }
            let numeric = self.numeric_jacobian(&x, DEFAULT_FD_STEP)?;
            for i in 0..analytic.rows() {
                for j in 0..analytic.cols() {
                    let diff = (analytic.get(i, j) - numeric.matrix.get(i, j)).abs();
                    if diff > 1e-5 {
                        return Err(Error::contract(format!(
                            "chart '{}': analytic jacobian disagrees with finite \
                             differences at {x:?} (entry ({i},{j}) differs by {diff:.2e})",
                            self.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Finite-difference Jacobian with step `h`. Central differences are
    /// used wherever `x` sits at least `h` inside the box; axes too close
    /// to the boundary fall back to a second-order one-sided stencil and
    /// are listed in the result.
    pub fn numeric_jacobian(&self, x: &[f64], h: f64) -> Result<NumericJacobian> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::contract("finite-difference step must be positive"));
        }
        if x.len() != self.dim() {
            return Err(Error::contract(format!(
                "chart '{}': jacobian point has {} coordinates, expected {}",
                self.label,
                x.len(),
                self.dim()
            )));
        }
        let m = self.dim();
        let d = self.ambient_dim;
        let mut matrix = Matrix::from_rows(d, m, vec![0.0; d * m])?;
        let mut one_sided_axes = Vec::new();
        let mut probe = x.to_vec();
        for j in 0..m {
            let (lo, hi) = self.domain.bounds()[j];
            let xj = x[j];
            let col: Vec<f64> = if xj - h >= lo && xj + h <= hi {
                probe[j] = xj + h;
                let fp = self.map(&probe);
                probe[j] = xj - h;
                let fm = self.map(&probe);
                probe[j] = xj;
                fp.iter().zip(&fm).map(|(p, q)| (p - q) / (2.0 * h)).collect()
            } else {
                let dir = if xj + 2.0 * h <= hi {
                    1.0
                } else if xj - 2.0 * h >= lo {
                    -1.0
                } else {
                    return Err(Error::contract(format!(
                        "chart '{}': axis {j} is narrower than two steps of {h}",
                        self.label
                    )));
                };
                one_sided_axes.push(j);
                let f0 = self.map(&probe);
                probe[j] = xj + dir * h;
                let f1 = self.map(&probe);
                probe[j] = xj + dir * 2.0 * h;
                let f2 = self.map(&probe);
                probe[j] = xj;
                (0..d)
                    .map(|i| dir * (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / (2.0 * h))
                    .collect()
            };
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(format!(
                    "chart '{}': non-finite finite-difference column at {x:?}",
                    self.label
                )));
            }
            for i in 0..d {
                matrix.set(i, j, col[i]);
            }
        }
        Ok(NumericJacobian { matrix, one_sided_axes })
    }

    /// Jacobian at `x`: analytic when available, numeric otherwise.
    pub fn jacobian_at(&self, x: &[f64]) -> Result<Matrix> {
        match &self.jacobian {
            Some(j) => Ok(j(x)),
            None => Ok(self.numeric_jacobian(x, DEFAULT_FD_STEP)?.matrix),
        }
    }

    /// Area factor of the Jacobian at `x`.
    pub fn area_factor_at(&self, x: &[f64]) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(1.0);
        }
        area_factor(&self.jacobian_at(x)?)
    }

    /// Measure of the image patch: the integral of the area factor over
    /// the parameter domain. Dimension 0 counts the single image point.
    pub fn measure(&self, scheme: &QuadratureScheme) -> Result<Estimate> {
        if self.dim() == 0 {
            return Ok(Estimate { value: 1.0, error: 0.0 });
        }
        let mut failure: Option<Error> = None;
        let est = integrate(
            |x: &[f64]| {
                if !self.domain.contains(x) {
                    return 0.0;
                }
                match self.area_factor_at(x) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            self.domain.bounds(),
            scheme,
        );
        match (est, failure) {
            (_, Some(e)) => Err(e),
            (Ok(e), None) => Ok(e),
            (Err(e), None) => Err(e),
        }
    }

    /// Sampled lower bound on the Lipschitz constant: the maximum of
    /// `|f(a) - f(b)| / |a - b|` over `trials` far pairs and `trials`
    /// nearby pairs. Nearby pairs are what make the estimate approach the
    /// true constant from below on curved charts.
    pub fn lipschitz_estimate(&self, trials: usize, seed: u64) -> Result<LipschitzEstimate> {
        if self.dim() == 0 {
            return Ok(LipschitzEstimate { value: 0.0, exceeded_declared: false });
        }
        if trials == 0 {
            return Err(Error::contract("lipschitz_estimate needs at least one trial"));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut best: f64 = 0.0;
        let local_step = 1e-6 * self.domain.diameter();
        for _ in 0..trials {
            let a = self.domain.sample(&mut rng)?;
            let b = self.domain.sample(&mut rng)?;
            let sep = dist(&a, &b);
            if sep > 0.0 {
                best = best.max(dist(&self.map(&a), &self.map(&b)) / sep);
            }

            // local pair around a, clamped to the box
            let mut c = a.clone();
            for (j, v) in c.iter_mut().enumerate() {
                let (lo, hi) = self.domain.bounds()[j];
                *v = (*v + local_step * (2.0 * rng.gen::<f64>() - 1.0)).clamp(lo, hi);
            }
            if self.domain.contains(&c) {
                let sep = dist(&a, &c);
                if sep > 0.0 {
                    best = best.max(dist(&self.map(&a), &self.map(&c)) / sep);
                }
            }
        }
        let exceeded = self
            .lipschitz_bound
            .map_or(false, |b| best > b * (1.0 + 1e-8) + 1e-12);
        Ok(LipschitzEstimate { value: best, exceeded_declared: exceeded })
    }

    /// Product chart: parameters concatenate, images concatenate, and the
    /// Jacobian is block diagonal.
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let m1 = self.dim();
        let m2 = other.dim();
        let d1 = self.ambient_dim;
        let d2 = other.ambient_dim;
        let mut bounds = self.domain.bounds().to_vec();
        bounds.extend_from_slice(other.domain.bounds());
        let mut domain = ParamDomain::new_box(bounds)?;
        if self.domain.has_membership() || other.domain.has_membership() {
            let da = self.domain.clone();
            let db = other.domain.clone();
            domain = domain.with_membership(move |x: &[f64]| {
                da.contains(&x[..m1]) && db.contains(&x[m1..])
            });
        }
        let fa = self.map.clone();
        let fb = other.map.clone();
        let map: MapFn = Arc::new(move |x: &[f64]| {
            let mut out = fa(&x[..m1]);
            out.extend(fb(&x[m1..]));
            out
        });
        let jacobian: Option<JacFn> = match (&self.jacobian, &other.jacobian) {
            (Some(ja), Some(jb)) => {
                let (ja, jb) = (ja.clone(), jb.clone());
                Some(Arc::new(move |x: &[f64]| {
                    let a = ja(&x[..m1]);
                    let b = jb(&x[m1..]);
                    let mut out = Matrix::from_rows(d1 + d2, m1 + m2, vec![0.0; (d1 + d2) * (m1 + m2)])
                        .expect("block jacobian allocation");
                    for i in 0..d1 {
                        for j in 0..m1 {
                            out.set(i, j, a.get(i, j));
                        }
                    }
                    for i in 0..d2 {
                        for j in 0..m2 {
                            out.set(d1 + i, m1 + j, b.get(i, j));
                        }
                    }
                    out
                }))
            }
            _ => None,
        };
        let lipschitz_bound = match (self.lipschitz_bound, other.lipschitz_bound) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        Chart::new(
            format!("{} x {}", self.label, other.label),
            domain,
            d1 + d2,
            map,
            jacobian,
            lipschitz_bound,
        )
    }

    /// Composes the chart with a map `g` of the ambient space. When `g`'s
    /// Jacobian is supplied and the chart's own Jacobian is analytic, the
    /// composition keeps an analytic Jacobian by the chain rule.
    pub fn postcompose(
        &self,
        label: impl Into<String>,
        new_ambient: usize,
        g: MapFn,
        g_jacobian: Option<JacFn>,
        g_lipschitz: Option<f64>,
    ) -> Result<Chart> {
        let f = self.map.clone();
        let map: MapFn = Arc::new(move |x: &[f64]| g(&f(x)));
        let jacobian: Option<JacFn> = match (&self.jacobian, g_jacobian) {
            (Some(jf), Some(jg)) => {
                let jf = jf.clone();
                let f = self.map.clone();
                Some(Arc::new(move |x: &[f64]| {
                    jg(&f(x)).matmul(&jf(x)).expect("chain-rule dimensions")
                }))
            }
            _ => None,
        };
        let lipschitz_bound = match (self.lipschitz_bound, g_lipschitz) {
            (Some(a), Some(b)) => Some(a * b),
            _ => None,
        };
        Chart::new(label.into(), self.domain.clone(), new_ambient, map, jacobian, lipschitz_bound)
    }

    /// Composes with an isometry `y = Q y + t` of the ambient space.
    /// `q` must be orthogonal.
    pub fn isometry(&self, q: &Matrix, t: &[f64]) -> Result<Chart> {
        let d = self.ambient_dim;
        if q.rows() != d || q.cols() != d || t.len() != d {
            return Err(Error::contract(format!(
                "isometry of chart '{}' needs a {d}x{d} matrix and a {d}-vector",
                self.label
            )));
        }
        let qtq = q.transpose().matmul(q)?;
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (qtq.get(i, j) - expect).abs() > 1e-10 {
                    return Err(Error::contract("isometry matrix is not orthogonal"));
                }
            }
        }
        let q_owned = q.clone();
        let t_owned = t.to_vec();
        let q_for_jac = q.clone();
        let g: MapFn = Arc::new(move |y: &[f64]| {
            (0..d)
                .map(|i| {
                    t_owned[i]
                        + (0..d).map(|j| q_owned.get(i, j) * y[j]).sum::<f64>()
                })
                .collect()
        });
        let gj: JacFn = Arc::new(move |_y: &[f64]| q_for_jac.clone());
        self.postcompose(
            format!("{} (moved)", self.label),
            d,
            g,
            Some(gj),
            Some(1.0),
        )
    }

    /// Composes with the scaling `y = c y`, `c > 0`.
    pub fn rescale(&self, c: f64) -> Result<Chart> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::contract("rescale factor must be positive and finite"));
        }
        let d = self.ambient_dim;
        let g: MapFn = Arc::new(move |y: &[f64]| y.iter().map(|v| c * v).collect());
        let gj: JacFn = Arc::new(move |_y: &[f64]| Matrix::identity(d).scale(c));
        self.postcompose(format!("{} (scaled by {c})", self.label), d, g, Some(gj), Some(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_segment() -> Chart {
        Chart::new(
            "test segment",
            ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap(),
            2,
            Arc::new(|x: &[f64]| vec![x[0], 0.0]),
            Some(Arc::new(|_: &[f64]| Matrix::column(&[1.0, 0.0]).unwrap())),
            Some(1.0),
        )
        .unwrap()
    }

    #[test]
    fn collapsing_map_is_rejected() {
        // constant map: every distant pair collides, so the spot check fires
        let r = Chart::new(
            "collapse",
            ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap(),
            1,
            Arc::new(|_x: &[f64]| vec![0.25]),
            None,
            None,
        );
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn fold_slips_past_the_spot_check() {
        // |x - 1/2| folds the interval onto itself. Its collisions form a
        // measure-zero set, which a randomized spot check cannot hit; this
        // documents the limitation rather than pretending otherwise.
        let r = Chart::new(
            "fold",
            ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap(),
            1,
            Arc::new(|x: &[f64]| vec![(x[0] - 0.5).abs()]),
            None,
            None,
        );
        assert!(r.is_ok());
    }

    #[test]
    fn wrong_analytic_jacobian_is_rejected() {
        let r = Chart::new(
            "bad jacobian",
            ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap(),
            1,
            Arc::new(|x: &[f64]| vec![x[0] * x[0]]),
            Some(Arc::new(|_: &[f64]| Matrix::column(&[7.0]).unwrap())),
            None,
        );
        assert!(r.is_err());
    }

    #[test]
    fn numeric_jacobian_interior_is_central() {
        let c = unit_segment();
        let nj = c.numeric_jacobian(&[0.5], 1e-5).unwrap();
        assert!(nj.one_sided_axes.is_empty());
        assert!((nj.matrix.get(0, 0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn numeric_jacobian_boundary_is_flagged() {
        let c = unit_segment();
        let nj = c.numeric_jacobian(&[0.0], 1e-5).unwrap();
        assert_eq!(nj.one_sided_axes, vec![0]);
        assert!((nj.matrix.get(0, 0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn measure_of_unit_segment() {
        let e = unit_segment().measure(&QuadratureScheme::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn linear_map_lipschitz_is_exact() {
        let c = Chart::new(
            "times three",
            ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap(),
            1,
            Arc::new(|x: &[f64]| vec![3.0 * x[0]]),
            None,
            Some(3.0),
        )
        .unwrap();
        let est = c.lipschitz_estimate(200, 7).unwrap();
        assert!((est.value - 3.0).abs() < 1e-7, "got {}", est.value);
        assert!(!est.exceeded_declared);
    }

    #[test]
    fn undeclared_excess_is_flagged() {
        let c = Chart::new(
            "underdeclared",
            ParamDomain::new_box(vec![(0.0, 1.0)]).unwrap(),
            1,
            Arc::new(|x: &[f64]| vec![3.0 * x[0]]),
            None,
            Some(2.0),
        )
        .unwrap();
        let est = c.lipschitz_estimate(100, 7).unwrap();
        assert!(est.exceeded_declared);
    }

    #[test]
    fn product_chart_concatenates() {
        let a = unit_segment();
        let p = a.product(&a).unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.ambient_dim(), 4);
        let img = p.map(&[0.25, 0.75]);
        assert_eq!(img, vec![0.25, 0.0, 0.75, 0.0]);
        let e = p.measure(&QuadratureScheme::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn isometry_preserves_measure() {
        let c = unit_segment();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = Matrix::from_rows(2, 2, vec![s, -s, s, s]).unwrap();
        let moved = c.isometry(&q, &[5.0, -1.0]).unwrap();
        let e0 = c.measure(&QuadratureScheme::default()).unwrap();
        let e1 = moved.measure(&QuadratureScheme::default()).unwrap();
        assert!((e0.value - e1.value).abs() < 1e-9);
    }

    #[test]
    fn rescale_scales_measure_by_power_of_dimension() {
        let c = unit_segment();
        let scaled = c.rescale(2.5).unwrap();
        let e = scaled.measure(&QuadratureScheme::default()).unwrap();
        assert!((e.value - 2.5).abs() < 1e-9);
    }
}
