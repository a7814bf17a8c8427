use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CliError {
    Core(mmrelay::Error),
    Usage(String),
    Input(String),
    Io(io::Error),
    Csv(csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use mmrelay::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(E::Config { .. } | E::InvalidParameter { .. }) => 2,
            CliError::Core(E::NumericalFailure { .. } | E::UndefinedConditional(_) | E::UndefinedRatio(_)) => 3,
            CliError::Core(E::Io(_) | E::InputFormat { .. }) => 4,
            CliError::Input(_) | CliError::Io(_) | CliError::Csv(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Input(m) => write!(f, "bad input: {m}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Csv(e) => write!(f, "{e}"),
        }
    }
}

impl From<mmrelay::Error> for CliError {
    fn from(e: mmrelay::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyticRow {
    pub x: f64,
    pub value: f64,
    pub method: String,
    pub config_digest: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimRow {
    pub x: f64,
    pub value: f64,
    pub method: String,
    pub config_digest: String,
    pub ci_halfwidth: f64,
    pub n_drops: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub x: f64,
    pub analytic: f64,
    pub sim: f64,
    pub ci_halfwidth: f64,
    /// `sim - analytic`.
    pub gap: f64,
    /// The simulated value sits above the analytic bound by more than its interval.
    pub bound_violated: bool,
    pub config_digest: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub config_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub grid: String,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn new(command: String) -> Self {
        Self {
            command,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_digest: String::new(),
            seed: None,
            grid: String::new(),
            outputs: Vec::new(),
            warnings: Vec::new(),
        }
    }
}

/// CSV destination; a file also gets a `<file>.manifest.toml` next to it.
pub struct Output {
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(path: Option<PathBuf>) -> Self {
        Self { path }
    }

    pub fn write<T: Serialize>(&self, rows: &[T], manifest: &mut Manifest) -> Result<(), CliError> {
        for w in &manifest.warnings {
            eprintln!("warning: {w}");
        }
        let Some(path) = &self.path else {
            return write_csv(io::stdout().lock(), rows);
        };
        write_csv(File::create(path)?, rows)?;
        manifest.outputs.push(path.display().to_string());
        let mut name = path.as_os_str().to_owned();
        name.push(".manifest.toml");
        let text = toml::to_string(manifest).map_err(|e| CliError::Input(e.to_string()))?;
        File::create(PathBuf::from(name))?.write_all(text.as_bytes())?;
        Ok(())
    }
}

fn write_csv<W: Write, T: Serialize>(sink: W, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct InRow {
    x: f64,
    value: f64,
    method: String,
    config_digest: String,
    ci_halfwidth: Option<f64>,
}

/// One row per `x`; several methods in one file are ambiguous.
fn read_curve(path: &Path) -> Result<BTreeMap<u64, InRow>, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = BTreeMap::new();
    let mut method: Option<String> = None;
    for r in reader.deserialize() {
        let r: InRow = r?;
        match &method {
            None => method = Some(r.method.clone()),
            Some(m) if *m != r.method => {
                return Err(CliError::Input(format!("{} mixes methods `{m}` and `{}`", path.display(), r.method)))
            }
            _ => {}
        }
        let key = r.x.to_bits();
        if rows.insert(key, r).is_some() {
            return Err(CliError::Input(format!("{} repeats an x value", path.display())));
        }
    }
    Ok(rows)
}

/// Joins the two curves on `x` and summarizes the largest gap and bound violations.
pub fn compare(analytic: &Path, sim: &Path) -> Result<(Vec<CompareRow>, String), CliError> {
    let a = read_curve(analytic)?;
    let s = read_curve(sim)?;
    let mut rows: Vec<CompareRow> = a
        .iter()
        .filter_map(|(k, ar)| {
            let sr = s.get(k)?;
            let half = sr.ci_halfwidth.unwrap_or(0.0);
            let gap = sr.value - ar.value;
            Some(CompareRow {
                x: ar.x,
                analytic: ar.value,
                sim: sr.value,
                ci_halfwidth: half,
                gap,
                bound_violated: gap > half,
                config_digest: ar.config_digest.clone(),
            })
        })
        .collect();
    rows.sort_by(|p, q| p.x.total_cmp(&q.x));
    if rows.is_empty() {
        return Err(CliError::Input("the two curves share no x values".into()));
    }
    let mut summary = String::new();
    if let (Some(ar), Some(sr)) = (a.values().next(), s.values().next()) {
        if ar.config_digest != sr.config_digest {
            summary.push_str(&format!(
                "warning: config digests differ ({} vs {})\n",
                ar.config_digest, sr.config_digest
            ));
        }
    }
    let worst = rows.iter().max_by(|p, q| p.gap.abs().total_cmp(&q.gap.abs())).expect("nonempty");
    let violations = rows.iter().filter(|r| r.bound_violated).count();
    summary.push_str(&format!(
        "matched {} points; max |gap| {:.4} at x = {}; bound violations {}",
        rows.len(),
        worst.gap.abs(),
        worst.x,
        violations
    ));
    Ok((rows, summary))
}
