//! Walk the built-in chart family: measure each patch by quadrature,
//! compare against the closed form where one exists, and build one
//! custom chart from scratch.
//!
//! Run with `cargo run --example charts_tour`.

use std::sync::Arc;

use strata::gmt::{closed_form_measure, gallery, Chart, ParamDomain};
use strata::quad::QuadratureScheme;

fn main() -> strata::Result<()> {
    let scheme = QuadratureScheme::default();

    println!("built-in charts:");
    for chart in gallery() {
        let est = chart.measure(&scheme)?;
        print!(
            "  {:<52} dim {}  H^m = {:.9}",
            chart.label(),
            chart.dim(),
            est.value
        );
        match closed_form_measure(chart.label()) {
            Some(exact) => println!("  (closed form {exact:.9}, off by {:.1e})", (est.value - exact).abs()),
            None => println!("  (quadrature error bound {:.1e})", est.error),
        }
    }

    // A chart is just a parametrization over a box: here a parabola
    // segment y = x^2 with its analytic Jacobian.
    let parabola = Chart::new(
        "parabola",
        ParamDomain::new_box(vec![(-1.0, 1.0)])?,
        2,
        Arc::new(|x: &[f64]| vec![x[0], x[0] * x[0]]),
        Some(Arc::new(|x: &[f64]| {
            strata::gmt::Matrix::column(&[1.0, 2.0 * x[0]]).unwrap()
        })),
        None,
    )?;
    let est = parabola.measure(&scheme)?;
    // arc length of y = x^2 over [-1, 1]: sqrt(5) + asinh(2)/2
    let exact = 5f64.sqrt() + 2f64.asinh() / 2.0;
    println!("\ncustom parabola: H^1 = {:.12} vs exact {:.12}", est.value, exact);

    // contractions can only shrink measure, scalings scale it by c^m
    let shrunk = parabola.rescale(0.5)?;
    println!(
        "rescaled by 1/2: H^1 = {:.12} (exactly half: {})",
        shrunk.measure(&scheme)?.value,
        (shrunk.measure(&scheme)?.value - est.value / 2.0).abs() < 1e-9
    );
    Ok(())
}
