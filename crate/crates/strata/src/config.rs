//! TOML descriptions of measures and experiment runs.
//!
//! A config has a list of `[[component]]` tables, each naming a chart
//! kind with its geometric fields, a mixture weight, and an optional
//! density table, plus an optional `[experiment]` block with run
//! parameters. Unknown keys are rejected, and every diagnostic points
//! at the offending line or field on a single line.
//!
//! ```toml
//! title = "atom and segment"
//!
//! [[component]]
//! kind = "point"
//! at = [-1.0]
//! weight = 0.5
//!
//! [[component]]
//! kind = "segment"
//! a = [0.0]
//! b = [2.0]
//! weight = 0.5
//!
//! [experiment]
//! n = [12]
//! delta = 0.15
//! xi = 0.2
//! trials = 4096
//! seed = 7
//! ```
//!
//! Weights that do not sum to one are rescaled with a warning, matching
//! the measure constructor. Omitting `density` means uniform.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentParams, Mode, ReportFormat};
use crate::gmt::{
    arc, circle, graph, helix, planar_patch, point, segment, sphere_patch, Chart, GraphFn,
};
use crate::measures::{DensityFamily, RectifiableComponent, StratifiedMeasure};
use crate::quad::QuadratureScheme;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    title: Option<String>,
    #[serde(default)]
    component: Vec<ComponentSpec>,
    experiment: Option<ExperimentSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentSpec {
    kind: String,
    weight: f64,
    density: Option<DensitySpec>,
    at: Option<Vec<f64>>,
    a: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    radius: Option<f64>,
    center: Option<Vec<f64>>,
    theta0: Option<f64>,
    theta1: Option<f64>,
    pitch: Option<f64>,
    turns: Option<f64>,
    function: Option<String>,
    bounds: Option<Vec<[f64; 2]>>,
    theta: Option<[f64; 2]>,
    phi: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "family", rename_all = "kebab-case")]
enum DensitySpec {
    Uniform,
    TruncatedExponential { rate: f64 },
    Polynomial { coeffs: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentSpec {
    n: Vec<usize>,
    delta: f64,
    xi: f64,
    trials: usize,
    seed: u64,
    mode: Option<String>,
    epsilon: Option<f64>,
    out: Option<String>,
    format: Option<String>,
}

/// A validated config: charts with densities and weights, and the
/// experiment block if one was present.
#[derive(Debug)]
pub struct Config {
    pub title: Option<String>,
    parts: Vec<(Chart, DensityFamily, f64)>,
    pub experiment: Option<ExperimentSettings>,
}

#[derive(Debug, Clone)]
pub struct ExperimentSettings {
    pub params: ExperimentParams,
    pub out: Option<PathBuf>,
    pub format: ReportFormat,
}

/// Run parameters used by `aep` and `theorem` when the config has no
/// `[experiment]` block.
pub fn default_experiment() -> ExperimentSettings {
    ExperimentSettings {
        params: ExperimentParams {
            n_values: vec![12],
            delta: 0.15,
            xi: 0.2,
            trials: 4096,
            seed: 0,
            mode: Mode::BruteForce,
            epsilon: 0.1,
        },
        out: None,
        format: ReportFormat::JsonLines,
    }
}

pub fn load_config(path: &Path) -> Result<Config> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_config(text: &str) -> Result<Config> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(toml_diag(text, &e)))?;
    if file.component.is_empty() {
        return Err(Error::config("at least one [[component]] is required"));
    }
    let mut parts = Vec::new();
    for (i, spec) in file.component.iter().enumerate() {
        parts.push(
            build_part(spec)
                .map_err(|e| amend(e, &format!("component {} (kind '{}')", i + 1, spec.kind)))?,
        );
    }
    let experiment = file.experiment.map(build_experiment).transpose()?;
    Ok(Config { title: file.title, parts, experiment })
}

impl Config {
    /// Display name: the title, or a summary of the chart kinds.
    pub fn label(&self) -> String {
        match &self.title {
            Some(t) => t.clone(),
            None => self
                .parts
                .iter()
                .map(|(chart, _, _)| chart.label().to_string())
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }

    pub fn component_count(&self) -> usize {
        self.parts.len()
    }

    pub fn build_measure(&self, scheme: &QuadratureScheme) -> Result<StratifiedMeasure> {
        let parts = self
            .parts
            .iter()
            .map(|(chart, family, weight)| {
                Ok((
                    RectifiableComponent::new(chart.clone(), family.clone(), scheme)?,
                    *weight,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        StratifiedMeasure::from_parts(parts, scheme)
    }
}

fn build_part(spec: &ComponentSpec) -> Result<(Chart, DensityFamily, f64)> {
    let chart = build_chart(spec)?;
    let family = match &spec.density {
        None | Some(DensitySpec::Uniform) => DensityFamily::Uniform,
        Some(DensitySpec::TruncatedExponential { rate }) => {
            DensityFamily::TruncatedExponential { rate: *rate }
        }
        Some(DensitySpec::Polynomial { coeffs }) => {
            DensityFamily::Polynomial { coeffs: coeffs.clone() }
        }
    };
    if !(spec.weight > 0.0 && spec.weight.is_finite()) {
        return Err(Error::config(format!(
            "weight must be positive and finite, got {}",
            spec.weight
        )));
    }
    Ok((chart, family, spec.weight))
}

fn build_chart(spec: &ComponentSpec) -> Result<Chart> {
    // every kind consumes its own fields; anything else set on the
    // component is reported as the first violation
    let (chart, used): (Chart, &[&str]) = match spec.kind.as_str() {
        "point" => (point(need(&spec.at, "at")?)?, &["at"]),
        "segment" => (
            segment(need(&spec.a, "a")?, need(&spec.b, "b")?)?,
            &["a", "b"],
        ),
        "circle" => (
            circle(*need(&spec.radius, "radius")?, need(&spec.center, "center")?)?,
            &["radius", "center"],
        ),
        "arc" => (
            arc(
                *need(&spec.radius, "radius")?,
                need(&spec.center, "center")?,
                *need(&spec.theta0, "theta0")?,
                *need(&spec.theta1, "theta1")?,
            )?,
            &["radius", "center", "theta0", "theta1"],
        ),
        "helix" => (
            helix(*need(&spec.pitch, "pitch")?, *need(&spec.turns, "turns")?)?,
            &["pitch", "turns"],
        ),
        "graph" => {
            let name = need(&spec.function, "function")?;
            let bounds: Vec<(f64, f64)> = need(&spec.bounds, "bounds")?
                .iter()
                .map(|&[lo, hi]| (lo, hi))
                .collect();
            (graph(GraphFn::parse(name)?, &bounds)?, &["function", "bounds"])
        }
        "planar-patch" => {
            let bounds = need(&spec.bounds, "bounds")?;
            if bounds.len() != 2 {
                return Err(Error::config(format!(
                    "planar-patch bounds need exactly 2 axes, got {}",
                    bounds.len()
                )));
            }
            let b = [(bounds[0][0], bounds[0][1]), (bounds[1][0], bounds[1][1])];
            (planar_patch(&b)?, &["bounds"])
        }
        "sphere-patch" => {
            let th = need(&spec.theta, "theta")?;
            let ph = need(&spec.phi, "phi")?;
            (
                sphere_patch(*need(&spec.radius, "radius")?, (th[0], th[1]), (ph[0], ph[1]))?,
                &["radius", "center", "theta", "phi"],
            )
        }
        other => {
            return Err(Error::config(format!(
                "unknown chart kind '{other}' (expected point, segment, circle, arc, helix, \
                 graph, planar-patch, or sphere-patch)"
            )))
        }
    };
    check_unused(spec, used)?;
    Ok(chart)
}

fn need<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::config(format!("missing required field '{name}'")))
}

fn check_unused(spec: &ComponentSpec, used: &[&str]) -> Result<()> {
    let set: &[(&str, bool)] = &[
        ("at", spec.at.is_some()),
        ("a", spec.a.is_some()),
        ("b", spec.b.is_some()),
        ("radius", spec.radius.is_some()),
        ("center", spec.center.is_some()),
        ("theta0", spec.theta0.is_some()),
        ("theta1", spec.theta1.is_some()),
        ("pitch", spec.pitch.is_some()),
        ("turns", spec.turns.is_some()),
        ("function", spec.function.is_some()),
        ("bounds", spec.bounds.is_some()),
        ("theta", spec.theta.is_some()),
        ("phi", spec.phi.is_some()),
    ];
    for (name, present) in set {
        if *present && !used.contains(name) {
            return Err(Error::config(format!("field '{name}' is not used here")));
        }
    }
    Ok(())
}

fn build_experiment(spec: ExperimentSpec) -> Result<ExperimentSettings> {
    let params = ExperimentParams {
        n_values: spec.n,
        delta: spec.delta,
        xi: spec.xi,
        trials: spec.trials,
        seed: spec.seed,
        mode: match &spec.mode {
            Some(name) => Mode::parse(name)?,
            None => Mode::BruteForce,
        },
        epsilon: spec.epsilon.unwrap_or(0.1),
    };
    params.validate()?;
    Ok(ExperimentSettings {
        params,
        out: spec.out.map(PathBuf::from),
        format: match &spec.format {
            Some(name) => ReportFormat::parse(name)?,
            None => ReportFormat::JsonLines,
        },
    })
}

/// Condenses a TOML parse error to one line with its position.
fn toml_diag(text: &str, err: &toml::de::Error) -> String {
    let msg = err.message().replace('\n', " ");
    match err.span() {
        Some(span) => {
            let (line, col) = offset_to_line_col(text, span.start);
            format!("line {line}, column {col}: {msg}")
        }
        None => msg,
    }
}

fn offset_to_line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut line = 1;
    let mut col = 1;
    for (i, ch) in text.char_indices() {
        if i >= offset {
            break;
        }
        if ch == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    (line, col)
}

fn amend(e: Error, context: &str) -> Error {
    match e {
        Error::Config(msg) => Error::Config(format!("{context}: {msg}")),
        Error::Contract(msg) => Error::Config(format!("{context}: {msg}")),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CANONICAL: &str = r#"
title = "atom and segment"

[[component]]
kind = "point"
at = [-1.0]
weight = 0.5

[[component]]
kind = "segment"
a = [0.0]
b = [2.0]
weight = 0.5

[experiment]
n = [12]
delta = 0.15
xi = 0.2
trials = 4096
seed = 7
"#;

    #[test]
    fn canonical_config_builds_the_expected_measure() {
        let config = parse_config(CANONICAL).unwrap();
        assert_eq!(config.label(), "atom and segment");
        assert_eq!(config.component_count(), 2);
        let scheme = QuadratureScheme::default();
        let measure = config.build_measure(&scheme).unwrap();
        assert!((measure.entropy().total - 1.5 * 2f64.ln()).abs() < 1e-9);
        let exp = config.experiment.unwrap();
        assert_eq!(exp.params.n_values, vec![12]);
        assert_eq!(exp.params.mode, Mode::BruteForce);
        assert_eq!(exp.format, ReportFormat::JsonLines);
    }

    #[test]
    fn minimal_single_component_config() {
        let text = "[[component]]\nkind = \"segment\"\na = [0.0]\nb = [1.0]\nweight = 1.0\n";
        let config = parse_config(text).unwrap();
        assert_eq!(config.component_count(), 1);
        assert!(config.experiment.is_none());
        let measure = config.build_measure(&QuadratureScheme::default()).unwrap();
        assert_eq!(measure.strata().len(), 1);
    }

    #[test]
    fn off_sum_weights_warn_and_rescale() {
        let text = "\
[[component]]
kind = \"point\"
at = [5.0]
weight = 0.5

[[component]]
kind = \"segment\"
a = [0.0]
b = [1.0]
weight = 0.6
";
        let measure = parse_config(text)
            .unwrap()
            .build_measure(&QuadratureScheme::default())
            .unwrap();
        assert!(!measure.warnings().is_empty());
        let total: f64 = measure.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((measure.weights()[0] - 5.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_top_level_field_is_located() {
        let text = "speed = 3\n[[component]]\nkind = \"point\"\nat = [0.0]\nweight = 1.0\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        assert!(err.contains("speed"), "{err}");
    }

    #[test]
    fn unknown_component_field_is_located() {
        let text = "[[component]]\nkind = \"point\"\nat = [0.0]\nweight = 1.0\ncolor = 3\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("color"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_chart_kind_names_the_kind() {
        let text = "[[component]]\nkind = \"torus\"\nweight = 1.0\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("torus"), "{err}");
    }

    #[test]
    fn missing_and_stray_fields_are_reported() {
        let missing = "[[component]]\nkind = \"circle\"\ncenter = [0.0, 0.0]\nweight = 1.0\n";
        let err = parse_config(missing).unwrap_err().to_string();
        assert!(err.contains("radius"), "{err}");

        let stray = "[[component]]\nkind = \"circle\"\nradius = 1.0\ncenter = [0.0, 0.0]\n\
                     a = [1.0]\nweight = 1.0\n";
        let err = parse_config(stray).unwrap_err().to_string();
        assert!(err.contains("'a' is not used"), "{err}");
    }

    #[test]
    fn density_tables_parse_into_families() {
        let text = "\
[[component]]
kind = \"segment\"
a = [0.0]
b = [1.0]
weight = 1.0

[component.density]
family = \"truncated-exponential\"
rate = 1.5
";
        let config = parse_config(text).unwrap();
        let measure = config.build_measure(&QuadratureScheme::default()).unwrap();
        // entropy drops below the uniform value ln 1 = 0 under a tilt
        assert!(measure.entropy().total < -1e-3);
    }

    #[test]
    fn experiment_validation_happens_at_parse_time() {
        let bad = format!("{}\n", CANONICAL.replace("xi = 0.2", "xi = 0.9"));
        let err = parse_config(&bad).unwrap_err().to_string();
        assert!(err.contains("xi"), "{err}");

        let bad_mode = CANONICAL.replace("seed = 7", "seed = 7\nmode = \"exact\"");
        let err = parse_config(&bad_mode).unwrap_err().to_string();
        assert!(err.contains("exact"), "{err}");
    }

    #[test]
    fn every_chart_kind_parses() {
        let text = r#"
[[component]]
kind = "circle"
radius = 1.0
center = [-2.0, 0.0, 0.0]
weight = 0.2

[[component]]
kind = "arc"
radius = 2.0
center = [0.0, 0.0]
theta0 = 0.0
theta1 = 1.5707963267948966
weight = 0.1

[[component]]
kind = "helix"
pitch = 0.5
turns = 2.0
weight = 0.2

[[component]]
kind = "graph"
function = "quadratic"
bounds = [[0.0, 1.0]]
weight = 0.1

[[component]]
kind = "planar-patch"
bounds = [[0.0, 1.0], [0.0, 2.0]]
weight = 0.2

[[component]]
kind = "sphere-patch"
radius = 1.0
theta = [0.3, 1.2]
phi = [0.0, 1.0]
weight = 0.2
"#;
        let config = parse_config(text).unwrap();
        assert_eq!(config.component_count(), 6);
    }

    #[test]
    fn nonpositive_weight_is_a_config_error() {
        let text = "[[component]]\nkind = \"point\"\nat = [0.0]\nweight = 0.0\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("weight"), "{err}");
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = load_config(Path::new("/nonexistent/config.toml")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("/nonexistent/config.toml"));
    }
}
