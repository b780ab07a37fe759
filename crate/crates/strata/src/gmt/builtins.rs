//! The built-in chart family.
//!
//! Every constructor ships an analytic Jacobian and a Lipschitz bound, so
//! downstream integrals are exact where the geometry allows it. All of
//! them are addressable by name from measure descriptions; [`gallery`]
//! returns one instance of each for test sweeps.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gmt::chart::{Chart, MapFn, ParamDomain};
use crate::gmt::Matrix;

use std::f64::consts::TAU;

/// A 0-dimensional chart carrying a single atom.
pub fn point(coords: &[f64]) -> Result<Chart> {
    if coords.is_empty() {
        return Err(Error::contract("point chart needs at least one coordinate"));
    }
    let owned = coords.to_vec();
    let d = owned.len();
    let map: MapFn = Arc::new(move |_x: &[f64]| owned.clone());
    Chart::new(
        format!("point {coords:?}"),
        ParamDomain::point(),
        d,
        map,
        None,
        Some(0.0),
    )
}

/// The straight segment from `a` to `b`, parametrized on `[0, 1]`.
pub fn segment(a: &[f64], b: &[f64]) -> Result<Chart> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::contract("segment endpoints must share a positive dimension"));
    }
    let dir: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
    let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    if len == 0.0 {
        return Err(Error::contract("segment endpoints coincide"));
    }
    let d = a.len();
    let a_owned = a.to_vec();
    let dir_map = dir.clone();
    let map: MapFn = Arc::new(move |x: &[f64]| {
        a_owned.iter().zip(&dir_map).map(|(p, v)| p + x[0] * v).collect()
    });
    let jac = Matrix::column(&dir)?;
    Chart::new(
        format!("segment {a:?} -> {b:?}"),
        ParamDomain::new_box(vec![(0.0, 1.0)])?,
        d,
        map,
        Some(Arc::new(move |_x: &[f64]| jac.clone())),
        Some(len),
    )
}

/// Circle of radius `r` in the plane of the first two coordinates around
/// `center`, parametrized by one turn of `[0, 1)`.
pub fn circle(r: f64, center: &[f64]) -> Result<Chart> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::contract("circle radius must be positive"));
    }
    if center.len() < 2 {
        return Err(Error::contract("circle center needs at least two coordinates"));
    }
    let d = center.len();
    let c = center.to_vec();
    let c_jac = center.to_vec();
    let map: MapFn = Arc::new(move |x: &[f64]| {
        let ang = TAU * x[0];
        let mut out = c.clone();
        out[0] += r * ang.cos();
        out[1] += r * ang.sin();
        out
    });
    let jac = Arc::new(move |x: &[f64]| {
        let ang = TAU * x[0];
        let mut col = vec![0.0; c_jac.len()];
        col[0] = -TAU * r * ang.sin();
        col[1] = TAU * r * ang.cos();
        Matrix::column(&col).expect("circle jacobian")
    });
    Chart::new(
        format!("circle r={r} at {center:?}"),
        ParamDomain::new_box(vec![(0.0, 1.0)])?,
        d,
        map,
        Some(jac),
        Some(TAU * r),
    )
}

/// Circular arc of radius `r` around `center`, parametrized by angle on
/// `[theta0, theta1]`. The sweep must stay under a full turn.
pub fn arc(r: f64, center: &[f64], theta0: f64, theta1: f64) -> Result<Chart> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::contract("arc radius must be positive"));
    }
    if center.len() < 2 {
        return Err(Error::contract("arc center needs at least two coordinates"));
    }
    if !(theta1 > theta0 && theta1 - theta0 < TAU) {
        return Err(Error::contract(
            "arc needs theta0 < theta1 with a sweep below a full turn",
        ));
    }
    let d = center.len();
    let c = center.to_vec();
    let c_jac = center.to_vec();
    let map: MapFn = Arc::new(move |x: &[f64]| {
        let mut out = c.clone();
        out[0] += r * x[0].cos();
        out[1] += r * x[0].sin();
        out
    });
    let jac = Arc::new(move |x: &[f64]| {
        let mut col = vec![0.0; c_jac.len()];
        col[0] = -r * x[0].sin();
        col[1] = r * x[0].cos();
        Matrix::column(&col).expect("arc jacobian")
    });
    Chart::new(
        format!("arc r={r}, angle [{theta0}, {theta1}]"),
        ParamDomain::new_box(vec![(theta0, theta1)])?,
        d,
        map,
        Some(jac),
        Some(r),
    )
}

/// Unit-radius helix `t -> (cos t, sin t, c t)` over `turns` turns.
/// `c` must be nonzero, otherwise later turns would retrace the circle.
pub fn helix(c: f64, turns: f64) -> Result<Chart> {
    if !(c != 0.0 && c.is_finite()) {
        return Err(Error::contract("helix pitch must be nonzero"));
    }
    if !(turns > 0.0 && turns.is_finite()) {
        return Err(Error::contract("helix needs a positive number of turns"));
    }
    let map: MapFn = Arc::new(move |x: &[f64]| vec![x[0].cos(), x[0].sin(), c * x[0]]);
    let jac = Arc::new(move |x: &[f64]| {
        Matrix::column(&[-x[0].sin(), x[0].cos(), c]).expect("helix jacobian")
    });
    Chart::new(
        format!("helix c={c}, {turns} turns"),
        ParamDomain::new_box(vec![(0.0, TAU * turns)])?,
        3,
        map,
        Some(jac),
        Some((1.0 + c * c).sqrt()),
    )
}

/// The named scalar functions available to [`graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFn {
    /// `g(u) = sum of u_i^2`
    Quadratic,
    /// `g(u) = sum of sin(u_i)`
    Sine,
}

impl GraphFn {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "quadratic" => Ok(GraphFn::Quadratic),
            "sine" => Ok(GraphFn::Sine),
            other => Err(Error::config(format!(
                "unknown graph function '{other}' (known: quadratic, sine)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphFn::Quadratic => "quadratic",
            GraphFn::Sine => "sine",
        }
    }

    fn eval(self, u: &[f64]) -> f64 {
        match self {
            GraphFn::Quadratic => u.iter().map(|v| v * v).sum(),
            GraphFn::Sine => u.iter().map(|v| v.sin()).sum(),
        }
    }

    fn grad(self, u: &[f64]) -> Vec<f64> {
        match self {
            GraphFn::Quadratic => u.iter().map(|v| 2.0 * v).collect(),
            GraphFn::Sine => u.iter().map(|v| v.cos()).collect(),
        }
    }

    fn grad_sup_sq(self, bounds: &[(f64, f64)]) -> f64 {
        match self {
            GraphFn::Quadratic => bounds
                .iter()
                .map(|&(a, b)| {
                    let m = a.abs().max(b.abs());
                    4.0 * m * m
                })
                .sum(),
            GraphFn::Sine => bounds.len() as f64,
        }
    }
}

/// Graph of a named scalar function over a 1- or 2-dimensional box,
/// embedded as `u -> (u, g(u))`.
pub fn graph(function: GraphFn, bounds: &[(f64, f64)]) -> Result<Chart> {
    let m = bounds.len();
    if !(1..=2).contains(&m) {
        return Err(Error::contract("graph charts take a 1- or 2-dimensional box"));
    }
    let domain = ParamDomain::new_box(bounds.to_vec())?;
    let map: MapFn = Arc::new(move |u: &[f64]| {
        let mut out = u.to_vec();
        out.push(function.eval(u));
        out
    });
    let jac = Arc::new(move |u: &[f64]| {
        let g = function.grad(u);
        Matrix::from_fn(m + 1, m, |i, j| {
            if i < m {
                if i == j {
                    1.0
                } else {
                    0.0
                }
            } else {
                g[j]
            }
        })
        .expect("graph jacobian")
    });
    let lip = (1.0 + function.grad_sup_sq(bounds)).sqrt();
    Chart::new(
        format!("graph of {} over {bounds:?}", function.name()),
        domain,
        m + 1,
        map,
        Some(jac),
        Some(lip),
    )
}

/// Flat rectangle `(u, v) -> (u, v, 0)`.
pub fn planar_patch(bounds: &[(f64, f64); 2]) -> Result<Chart> {
    let domain = ParamDomain::new_box(bounds.to_vec())?;
    let map: MapFn = Arc::new(|u: &[f64]| vec![u[0], u[1], 0.0]);
    let jac = Arc::new(|_u: &[f64]| {
        Matrix::from_rows(3, 2, vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).expect("patch jacobian")
    });
    Chart::new(
        format!("planar patch {bounds:?}"),
        domain,
        3,
        map,
        Some(jac),
        Some(1.0),
    )
}

/// Patch of the radius-`r` sphere in polar/azimuthal angles. The polar
/// range must avoid the poles and the azimuthal sweep must stay under a
/// full turn, so the parametrization is injective with positive area
/// factor throughout.
pub fn sphere_patch(r: f64, theta: (f64, f64), phi: (f64, f64)) -> Result<Chart> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::contract("sphere radius must be positive"));
    }
    let (t0, t1) = theta;
    let (p0, p1) = phi;
    if !(0.0 < t0 && t0 < t1 && t1 < std::f64::consts::PI) {
        return Err(Error::contract(
            "sphere patch polar range must sit strictly inside (0, pi)",
        ));
    }
    if !(p0 < p1 && p1 - p0 < TAU) {
        return Err(Error::contract(
            "sphere patch azimuthal sweep must be positive and below a full turn",
        ));
    }
    let domain = ParamDomain::new_box(vec![(t0, t1), (p0, p1)])?;
    let map: MapFn = Arc::new(move |u: &[f64]| {
        let (th, ph) = (u[0], u[1]);
        vec![
            r * th.sin() * ph.cos(),
            r * th.sin() * ph.sin(),
            r * th.cos(),
        ]
    });
    let jac = Arc::new(move |u: &[f64]| {
        let (th, ph) = (u[0], u[1]);
        Matrix::from_rows(
            3,
            2,
            vec![
                r * th.cos() * ph.cos(),
                -r * th.sin() * ph.sin(),
                r * th.cos() * ph.sin(),
                r * th.sin() * ph.cos(),
                -r * th.sin(),
                0.0,
            ],
        )
        .expect("sphere jacobian")
    });
    Chart::new(
        format!("sphere patch r={r}, theta [{t0}, {t1}], phi [{p0}, {p1}]"),
        domain,
        3,
        map,
        Some(jac),
        Some(r),
    )
}

/// One representative instance of every built-in chart.
pub fn gallery() -> Vec<Chart> {
    vec![
        point(&[1.0, -2.0]).expect("gallery point"),
        segment(&[0.0, 0.0], &[3.0, 4.0]).expect("gallery segment"),
        circle(1.5, &[0.0, 0.0]).expect("gallery circle"),
        arc(2.0, &[1.0, 1.0], 0.3, 2.4).expect("gallery arc"),
        helix(0.5, 2.0).expect("gallery helix"),
        graph(GraphFn::Quadratic, &[(0.0, 1.0)]).expect("gallery graph 1d"),
        graph(GraphFn::Sine, &[(0.0, 1.0), (0.0, 1.0)]).expect("gallery graph 2d"),
        planar_patch(&[(0.0, 1.0), (0.0, 1.0)]).expect("gallery patch"),
        sphere_patch(2.0, (0.4, 1.3), (0.2, 1.9)).expect("gallery sphere patch"),
    ]
}

/// Closed-form measure of a gallery chart, where one exists. Used by
/// tests to pin quadrature against geometry.
pub fn closed_form_measure(chart_label: &str) -> Option<f64> {
    let g = gallery();
    let labels: Vec<&str> = g.iter().map(|c| c.label()).collect();
    let idx = labels.iter().position(|l| *l == chart_label)?;
    match idx {
        0 => Some(1.0),
        1 => Some(5.0),
        2 => Some(TAU * 1.5),
        3 => Some(2.0 * (2.4 - 0.3)),
        4 => Some(TAU * 2.0 * 1.25_f64.sqrt()),
        // graph of u^2 on [0,1]: sqrt(5)/2 + asinh(2)/4
        5 => Some(5.0_f64.sqrt() / 2.0 + (2.0_f64 + 5.0_f64.sqrt()).ln() / 4.0),
        6 => None,
        7 => Some(1.0),
        8 => {
            let (r, t0, t1, p0, p1) = (2.0, 0.4, 1.3, 0.2, 1.9);
            Some(r * r * (f64::cos(t0) - f64::cos(t1)) * (p1 - p0))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadratureScheme;

    #[test]
    fn segment_measure_is_length() {
        let c = segment(&[0.0, 0.0], &[2.0, 0.0]).unwrap();
        let e = c.measure(&QuadratureScheme::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn circle_measure_is_circumference() {
        let c = circle(0.75, &[1.0, 2.0]).unwrap();
        let e = c.measure(&QuadratureScheme::default()).unwrap();
        assert!((e.value - TAU * 0.75).abs() < 1e-9);
    }

    #[test]
    fn helix_jacobian_at_zero() {
        let c = helix(0.5, 2.0).unwrap();
        let j = c.numeric_jacobian(&[0.0], 1e-5).unwrap();
        // boundary point, so the one-sided stencil runs; second order
        // keeps it within 1e-6 of (0, 1, c)
        assert_eq!(j.one_sided_axes, vec![0]);
        let expect = [0.0, 1.0, 0.5];
        for i in 0..3 {
            assert!(
                (j.matrix.get(i, 0) - expect[i]).abs() < 1e-6,
                "row {i}: {} vs {}",
                j.matrix.get(i, 0),
                expect[i]
            );
        }
    }

    #[test]
    fn gallery_measures_match_closed_forms() {
        let scheme = QuadratureScheme::default();
        for chart in gallery() {
            let Some(expect) = closed_form_measure(chart.label()) else { continue };
            let e = chart.measure(&scheme).unwrap();
            let rel = (e.value - expect).abs() / expect.abs().max(1.0);
            assert!(rel < 1e-6, "{}: got {}, expected {}", chart.label(), e.value, expect);
            assert!(
                (e.value - expect).abs() <= e.error.max(1e-9),
                "{}: reported error {} does not cover true error {}",
                chart.label(),
                e.error,
                (e.value - expect).abs()
            );
        }
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        assert!(segment(&[1.0], &[1.0]).is_err());
        assert!(circle(0.0, &[0.0, 0.0]).is_err());
        assert!(helix(0.0, 1.0).is_err());
        assert!(sphere_patch(1.0, (0.0, 1.0), (0.0, 1.0)).is_err());
        assert!(arc(1.0, &[0.0, 0.0], 1.0, 1.0 + TAU).is_err());
    }

    #[test]
    fn sphere_patch_area_factor_is_r2_sin_theta() {
        let c = sphere_patch(2.0, (0.4, 1.3), (0.2, 1.9)).unwrap();
        let th = 0.9;
        let f = c.area_factor_at(&[th, 1.0]).unwrap();
        assert!((f - 4.0 * th.sin()).abs() < 1e-10);
    }
}
