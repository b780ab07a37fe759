//! A chart paired with a density: one rectifiable piece of a measure.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gmt::{Chart, Point};
use crate::measures::density::{check_converged, DensityFamily, ParamDensity};
use crate::quad::{integrate, QuadratureScheme};

/// A probability measure carried by a single chart. The density is a
/// parameter-space object; pushing it forward through the chart divides
/// by the area factor, and every entropy here is in nats.
#[derive(Debug, Clone)]
pub struct RectifiableComponent {
    label: String,
    chart: Chart,
    density: ParamDensity,
}

impl RectifiableComponent {
    pub fn new(chart: Chart, family: DensityFamily, scheme: &QuadratureScheme) -> Result<Self> {
        if chart.dim() == 0 && family != DensityFamily::Uniform {
            return Err(Error::contract(
                "zero-dimensional components carry only the uniform (trivial) density",
            ));
        }
        let density = ParamDensity::new(family, chart.domain().clone(), scheme)?;
        Ok(RectifiableComponent { label: chart.label().to_string(), chart, density })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn density(&self) -> &ParamDensity {
        &self.density
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn ambient_dim(&self) -> usize {
        self.chart.ambient_dim()
    }

    /// Entropy of the pushforward with respect to the dimension-matched
    /// Hausdorff measure on the carrier: the parameter-space entropy plus
    /// the mean log area factor. Atoms contribute zero.
    pub fn entropy(&self, scheme: &QuadratureScheme) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let base = self.density.entropy(scheme)?;
        Ok(base + self.mean_log_area_factor(scheme)?)
    }

    /// `E[ln J]` under the parameter density.
    pub fn mean_log_area_factor(&self, scheme: &QuadratureScheme) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(0.0);
        }
        let mut failure: Option<Error> = None;
        let est = integrate(
            |x: &[f64]| {
                if !self.density.domain().contains(x) {
                    return 0.0;
                }
                match self.chart.area_factor_at(x) {
                    Ok(j) if j > 0.0 => self.density.eval(x) * j.ln(),
                    Ok(_) => {
                        if failure.is_none() {
                            failure = Some(Error::Singular(format!(
                                "area factor vanishes on chart '{}'",
                                self.label
                            )));
                        }
                        f64::NAN
                    }
                    Err(e) => {
                        if failure.is_none() {
                            failure = Some(e);
                        }
                        f64::NAN
                    }
                }
            },
            self.density.domain().bounds(),
            scheme,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let est = est.map_err(|e| {
            Error::numeric(format!("mean log area factor on chart '{}': {e}", self.label))
        })?;
        check_converged(&est, scheme, "mean log area factor")?;
        Ok(est.value)
    }

    /// Draws a parameter tuple from the density.
    pub fn sample_param(&self, rng: &mut impl Rng) -> Result<Vec<f64>> {
        self.density.sample(rng)
    }

    pub fn point_at(&self, param: &[f64]) -> Result<Point> {
        self.chart.map_point(param)
    }

    /// Density of the pushforward at the carrier point over `param`,
    /// relative to Hausdorff measure of the chart's dimension.
    pub fn density_on_carrier(&self, param: &[f64]) -> Result<f64> {
        Ok(self.log_density_on_carrier(param)?.exp())
    }

    pub fn log_density_on_carrier(&self, param: &[f64]) -> Result<f64> {
        if self.dim() == 0 {
            return Ok(0.0);
        }
        if !self.density.domain().contains(param) {
            return Err(Error::contract(format!(
                "parameter {:?} lies outside the domain of chart '{}'",
                param, self.label
            )));
        }
        let j = self.chart.area_factor_at(param)?;
        if !(j > 0.0) {
            return Err(Error::Singular(format!(
                "area factor vanishes at {:?} on chart '{}'",
                param, self.label
            )));
        }
        Ok(self.density.log_eval(param) - j.ln())
    }

    /// Total Hausdorff mass of the carrier (not of the measure, which is
    /// always one).
    pub fn carrier_measure(&self, scheme: &QuadratureScheme) -> Result<crate::quad::Estimate> {
        self.chart.measure(scheme)
    }
}

/// `|H^(m1+m2)(S1 x S2) - H^m1(S1) H^m2(S2)|` for the product of two
/// carriers, measured through the product chart. Zero in exact
/// arithmetic; the return value is the observed residual together with
/// the quadrature error bound for judging it.
pub fn product_measure_residual(
    a: &RectifiableComponent,
    b: &RectifiableComponent,
    scheme: &QuadratureScheme,
) -> Result<(f64, f64)> {
    let prod = a.chart().product(b.chart())?;
    let mp = prod.measure(scheme)?;
    let ma = a.chart().measure(scheme)?;
    let mb = b.chart().measure(scheme)?;
    let residual = (mp.value - ma.value * mb.value).abs();
    let budget = mp.error + ma.error * mb.value.abs() + mb.error * ma.value.abs();
    Ok((residual, budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmt::builtins;

    fn scheme() -> QuadratureScheme {
        QuadratureScheme::default()
    }

    #[test]
    fn segment_with_uniform_density_has_log_length_entropy() {
        let c = RectifiableComponent::new(
            builtins::segment(&[0.0, 0.0], &[3.0, 4.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        // carrier length 5, uniform: entropy ln 5
        assert!((c.entropy(&scheme()).unwrap() - 5.0_f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn unit_circle_entropy_is_log_circumference() {
        let c = RectifiableComponent::new(
            builtins::circle(1.0, &[0.0, 0.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        let expect = (2.0 * std::f64::consts::PI).ln();
        assert!((c.entropy(&scheme()).unwrap() - expect).abs() < 1e-8);
    }

    #[test]
    fn radius_two_circle_entropy() {
        let c = RectifiableComponent::new(
            builtins::circle(2.0, &[0.0, 0.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        let expect = (4.0 * std::f64::consts::PI).ln();
        assert!((c.entropy(&scheme()).unwrap() - expect).abs() < 1e-8);
    }

    #[test]
    fn atom_entropy_is_zero() {
        let c = RectifiableComponent::new(
            builtins::point(&[1.0, 2.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        assert_eq!(c.entropy(&scheme()).unwrap(), 0.0);
        assert_eq!(c.log_density_on_carrier(&[]).unwrap(), 0.0);
    }

    #[test]
    fn nonuniform_density_on_segment_combines_terms() {
        // density 2t on [0,1] pushed through a segment of length 2:
        // entropy = (1/2 - ln 2) + ln 2 = 1/2... the ln J term is ln 2
        let c = RectifiableComponent::new(
            builtins::segment(&[0.0], &[2.0]).unwrap(),
            DensityFamily::Polynomial { coeffs: vec![0.0, 1.0] },
            &scheme(),
        )
        .unwrap();
        assert!((c.entropy(&scheme()).unwrap() - 0.5).abs() < 1e-8);
    }

    #[test]
    fn carrier_density_divides_by_area_factor() {
        let c = RectifiableComponent::new(
            builtins::segment(&[0.0], &[4.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        // uniform on the length-4 carrier: 1/4 per unit length
        assert!((c.density_on_carrier(&[0.3]).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn product_of_carriers_multiplies_measures() {
        let a = RectifiableComponent::new(
            builtins::segment(&[0.0], &[2.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        let b = RectifiableComponent::new(
            builtins::circle(1.5, &[0.0, 0.0]).unwrap(),
            DensityFamily::Uniform,
            &scheme(),
        )
        .unwrap();
        let (residual, budget) = product_measure_residual(&a, &b, &scheme()).unwrap();
        assert!(residual <= budget.max(1e-7), "residual {residual} budget {budget}");
    }
}
