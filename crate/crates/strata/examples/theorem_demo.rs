//! Dimension concentration: long words from a mixed-dimension measure
//! land, with probability near one, on strata whose dimension hugs
//! n E(D), and each such stratum's typical volume grows no faster than
//! e^{n (H(X|Y) + margins)}.
//!
//! The schedule ties everything to one exponent xi: the label tolerance
//! is eta = n^(xi - 1/2), the entropy margin widens by
//! delta' = -|labels| eta ln eta, and the failure probability
//! eps_n = 2 |labels| e^{-2 n eta^2} vanishes as n grows.

use strata::config::parse_config;
use strata::experiments::{run_theorem, ExperimentParams, Mode, ReportFormat};
use strata::quad::QuadratureScheme;
use strata::typicality::schedule;

const CONFIG: &str = r#"
title = "point + segment[0,2]"

[[component]]
kind = "point"
at = [-1.0]
weight = 0.5

[[component]]
kind = "segment"
a = [0.0]
b = [2.0]
weight = 0.5
"#;

fn main() -> strata::Result<()> {
    let config = parse_config(CONFIG)?;
    let measure = config.build_measure(&QuadratureScheme::default())?;

    println!("schedule at xi = 0.2:");
    for n in [12, 48, 192] {
        let (eta, delta_prime, eps) = schedule(n, 0.2, 2)?;
        println!("  n = {n:>3}: eta = {eta:.4}, delta' = {delta_prime:.4}, eps_n = {eps:.2e}");
    }

    let params = ExperimentParams {
        n_values: vec![12],
        delta: 0.3,
        xi: 0.2,
        trials: 4096,
        seed: 7,
        mode: Mode::BruteForce,
        epsilon: 0.1,
    };
    let report = run_theorem(&measure, &config.label(), &params)?;
    println!();
    print!("{}", report.render(ReportFormat::HumanText)?);
    Ok(())
}
