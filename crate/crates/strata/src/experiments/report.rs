//! Experiment reports and their serializations.
//!
//! A report is a provenance header, one record per word length, and a
//! wall-clock footer. All three output formats put the wall time on the
//! final line and nothing volatile anywhere else, so two runs with the
//! same seed can be compared byte for byte after dropping that line.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What produced the report: the subcommand, package version, base seed,
/// and the effective run parameters (config values with any command-line
/// overrides already applied).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub measure: String,
    /// effective parameters as ordered key-value pairs
    pub params: Vec<(String, String)>,
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub value: f64,
    pub stderr: f64,
}

/// Outcome of one asserted bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRecord {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Summary of per-stratum log-volume rates `(1/n) ln volume` over the
/// classes that contributed volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogVolumeStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub classes: usize,
}

/// Everything measured at one word length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NRecord {
    pub n: usize,
    pub delta: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi: Option<f64>,
    /// fraction of sampled words passing the typicality test of the run
    pub typical_mass: EstimateRecord,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub volume: Option<EstimateRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound_upper: Option<f64>,
    /// word dimension -> number of words, over typical classes
    pub dimension_histogram: Vec<(usize, u128)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_volume: Option<LogVolumeStats>,
    pub h_conditional: f64,
    pub h_labels: f64,
    pub flags: Vec<FlagRecord>,
    /// reported-but-not-asserted quantities, as ordered key-value pairs
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<(String, String)>,
}

impl NRecord {
    pub fn all_pass(&self) -> bool {
        self.flags.iter().all(|f| f.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub provenance: Provenance,
    pub records: Vec<NRecord>,
    pub wall_ms: u128,
}

/// Output encodings for [`Report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    JsonLines,
    Csv,
    HumanText,
}

impl ReportFormat {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "json-lines" | "jsonl" => Ok(ReportFormat::JsonLines),
            "csv" => Ok(ReportFormat::Csv),
            "human-text" | "text" => Ok(ReportFormat::HumanText),
            other => Err(Error::config(format!(
                "unknown report format '{other}' (expected json-lines, csv, or human-text)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReportFormat::JsonLines => "json-lines",
            ReportFormat::Csv => "csv",
            ReportFormat::HumanText => "human-text",
        }
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(NRecord::all_pass)
    }

    /// Renders the report; the wall-time footer is always the last line.
    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::JsonLines => self.render_jsonl(),
            ReportFormat::Csv => Ok(self.render_csv()),
            ReportFormat::HumanText => Ok(self.render_text()),
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        let body = self.render(format)?;
        let mut file = fs::File::create(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        file.write_all(body.as_bytes()).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    }

    fn render_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&serde_json::to_string(&self.provenance).map_err(json_err)?);
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).map_err(json_err)?);
            out.push('\n');
        }
        out.push_str(&format!("{{\"wall_ms\":{}}}\n", self.wall_ms));
        Ok(out)
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} v{} seed={} measure={} {}\n",
            self.provenance.command,
            self.provenance.version,
            self.provenance.seed,
            self.provenance.measure,
            self.provenance
                .params
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join(" "),
        ));
        out.push_str(
            "n,delta,xi,typical_mass,typical_mass_stderr,volume,volume_stderr,\
             bound_lower,bound_upper,h_conditional,h_labels,log_vol_min,log_vol_mean,\
             log_vol_max,dimension_histogram,flags,notes\n",
        );
        for r in &self.records {
            let opt = |v: Option<f64>| v.map(|x| fmt_f(x)).unwrap_or_default();
            let (vmin, vmean, vmax) = match r.log_volume {
                Some(s) => (fmt_f(s.min), fmt_f(s.mean), fmt_f(s.max)),
                None => (String::new(), String::new(), String::new()),
            };
            let hist = r
                .dimension_histogram
                .iter()
                .map(|(m, c)| format!("{m}:{c}"))
                .collect::<Vec<_>>()
                .join("|");
            let flags = r
                .flags
                .iter()
                .map(|f| format!("{}:{}", f.name, if f.pass { "pass" } else { "FAIL" }))
                .collect::<Vec<_>>()
                .join("|");
            let notes = r
                .notes
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect::<Vec<_>>()
                .join("|");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.n,
                fmt_f(r.delta),
                r.xi.map(|x| fmt_f(x)).unwrap_or_default(),
                fmt_f(r.typical_mass.value),
                fmt_f(r.typical_mass.stderr),
                opt(r.volume.map(|v| v.value)),
                opt(r.volume.map(|v| v.stderr)),
                opt(r.bound_lower),
                opt(r.bound_upper),
                fmt_f(r.h_conditional),
                fmt_f(r.h_labels),
                vmin,
                vmean,
                vmax,
                hist,
                flags,
                notes,
            ));
        }
        out.push_str(&format!("# wall_ms={}\n", self.wall_ms));
        out
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let p = &self.provenance;
        out.push_str(&format!("{} (v{})\n", p.command, p.version));
        out.push_str(&format!("measure: {}\nseed: {}\n", p.measure, p.seed));
        for (k, v) in &p.params {
            out.push_str(&format!("{k}: {v}\n"));
        }
        for r in &self.records {
            out.push_str(&format!("\n== n = {} (delta = {}) ==\n", r.n, fmt_f(r.delta)));
            out.push_str(&format!(
                "typical mass      {} +/- {}\n",
                fmt_f(r.typical_mass.value),
                fmt_f(r.typical_mass.stderr)
            ));
            if let Some(v) = r.volume {
                out.push_str(&format!(
                    "typical volume    {} +/- {}\n",
                    fmt_f(v.value),
                    fmt_f(v.stderr)
                ));
            }
            if let (Some(lo), Some(hi)) = (r.bound_lower, r.bound_upper) {
                out.push_str(&format!("sandwich          [{}, {}]\n", fmt_f(lo), fmt_f(hi)));
            }
            out.push_str(&format!(
                "H(X|Y) = {}   H(Y) = {}\n",
                fmt_f(r.h_conditional),
                fmt_f(r.h_labels)
            ));
            if let Some(s) = r.log_volume {
                out.push_str(&format!(
                    "log-volume rate   min {} mean {} max {} over {} classes\n",
                    fmt_f(s.min),
                    fmt_f(s.mean),
                    fmt_f(s.max),
                    s.classes
                ));
            }
            if !r.dimension_histogram.is_empty() {
                let hist = r
                    .dimension_histogram
                    .iter()
                    .map(|(m, c)| format!("{m}:{c}"))
                    .collect::<Vec<_>>()
                    .join("  ");
                out.push_str(&format!("dimension counts  {hist}\n"));
            }
            for (k, v) in &r.notes {
                out.push_str(&format!("{k}: {v}\n"));
            }
            for f in &r.flags {
                out.push_str(&format!(
                    "[{}] {} - {}\n",
                    if f.pass { "pass" } else { "FAIL" },
                    f.name,
                    f.detail
                ));
            }
        }
        out.push_str(&format!("wall ms: {}\n", self.wall_ms));
        out
    }
}

/// Rebuilds a report from its json-lines rendering.
pub fn parse_report_jsonl(text: &str) -> Result<Report> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines
        .next()
        .ok_or_else(|| Error::config("empty report"))?;
    let provenance: Provenance =
        serde_json::from_str(head).map_err(|e| Error::config(format!("provenance line: {e}")))?;
    let mut records = Vec::new();
    let mut wall_ms = None;
    for line in lines {
        if let Ok(rec) = serde_json::from_str::<NRecord>(line) {
            records.push(rec);
            continue;
        }
        #[derive(Deserialize)]
        struct Footer {
            wall_ms: u128,
        }
        let footer: Footer = serde_json::from_str(line)
            .map_err(|e| Error::config(format!("unrecognized report line: {e}")))?;
        wall_ms = Some(footer.wall_ms);
    }
    Ok(Report {
        provenance,
        records,
        wall_ms: wall_ms.ok_or_else(|| Error::config("report has no wall-time footer"))?,
    })
}

fn fmt_f(v: f64) -> String {
    // shortest roundtrip form; stable across runs since values are
    // deterministic
    format!("{v}")
}

fn json_err(e: serde_json::Error) -> Error {
    Error::numeric(format!("report serialization: {e}"))
}
