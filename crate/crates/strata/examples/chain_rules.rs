//! Three ways an entropy splits into parts, each checked against an
//! independent evaluation.
//!
//! Products: the entropy of a product measure is the sum of the factor
//! entropies. Slices: mapping a component through a linear score splits
//! its entropy into the score's entropy plus a mean fiber entropy, with
//! a coarea correction that the weighted fiber reference absorbs.
//! Mixtures: the stratified total equals label entropy plus the
//! weighted conditional entropies.

use strata::disintegration::{
    disintegrate_product, slice_by_functional, stratified_chain_rule_check, ResidualMode,
};
use strata::gmt::{planar_patch, point, segment, Matrix};
use strata::measures::{DensityFamily, RectifiableComponent, StratifiedMeasure};
use strata::quad::QuadratureScheme;

fn main() -> strata::Result<()> {
    let scheme = QuadratureScheme::default();
    let uniform = |chart| RectifiableComponent::new(chart, DensityFamily::Uniform, &scheme);

    // product of a segment and a patch: entropies add
    let seg = uniform(segment(&[0.0], &[2.0])?)?;
    let patch = uniform(planar_patch(&[(0.0, 1.0), (0.0, 1.0)])?)?;
    let product = disintegrate_product(&seg, &patch, &scheme)?;
    println!("product segment x patch:");
    println!("  joint       {:+.9}", product.joint_entropy);
    println!("  base        {:+.9}", product.base_entropy);
    println!("  conditional {:+.9}", product.mean_conditional_entropy);
    println!("  residual    {:.1e}", product.residual.abs());

    // slice the unit square (in the z = 0 plane) by the score
    // f(x, y) = x + y: the score has the triangular density on [0, 2],
    // and the fibers are diagonal chords of the square
    let square = uniform(planar_patch(&[(0.0, 1.0), (0.0, 1.0)])?)?;
    let score = Matrix::row(&[1.0, 1.0, 0.0])?;
    let slice = slice_by_functional(&square, &score, &scheme)?;
    println!("\nunit square sliced along x + y:");
    println!("  total                {:+.9}", slice.total_entropy);
    println!("  score                {:+.9}  (triangular density: 1/2)", slice.score_entropy);
    println!("  mean fiber (plain)   {:+.9}", slice.mean_fiber_entropy_plain);
    println!("  mean log coarea      {:+.9}  (ln sqrt 2)", slice.log_coarea);
    println!("  plain residual       {:.1e}", slice.residual_plain.abs());
    println!("  weighted residual    {:.1e}", slice.residual_weighted.abs());

    // mixture chain rule on a three-part measure, checked two ways
    let measure = StratifiedMeasure::from_parts(
        vec![
            (uniform(point(&[-2.0, 0.0, 0.0])?)?, 0.25),
            (uniform(segment(&[0.0, 0.0, 1.0], &[2.0, 0.0, 1.0])?)?, 0.25),
            (
                RectifiableComponent::new(
                    planar_patch(&[(0.0, 1.0), (0.0, 2.0)])?,
                    DensityFamily::TruncatedExponential { rate: 0.8 },
                    &scheme,
                )?,
                0.5,
            ),
        ],
        &scheme,
    )?;
    println!("\nmixture of point + segment + tilted patch:");
    let quad = stratified_chain_rule_check(&measure, ResidualMode::Quadrature, &scheme)?;
    println!(
        "  by quadrature:  decomposed {:+.9} vs independent {:+.9} (residual {:.1e})",
        quad.decomposed,
        quad.independent,
        quad.residual
    );
    let mc = stratified_chain_rule_check(
        &measure,
        ResidualMode::MonteCarlo { trials: 200_000, seed: 5 },
        &scheme,
    )?;
    println!(
        "  by sampling:    independent {:+.9} +/- {:.1e} (residual {:.1e})",
        mc.independent,
        mc.stderr.unwrap(),
        mc.residual
    );
    Ok(())
}
