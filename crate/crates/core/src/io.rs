//! Plain-text persistence: nodal field files, α-curves, inversion reports and
//! run manifests. Every float that carries numeric results is written with 17
//! significant digits so reading it back reproduces the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{field_norm, LumpedMass, ScalarField};
use crate::inversion::{InversionConfig, InversionReport};
use crate::mesh::Mesh;

const FIELD_MAGIC: &str = "# porous-inverse field";
const CURVE_HEADER: &str = "alpha,value";

/// Full-precision decimal form of `v` (17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{what}: '{s}': {e}")))
}

/// A nodal field plus its header metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFile {
    pub name: String,
    pub gamma: Option<f64>,
    pub t: Option<f64>,
    pub field: ScalarField,
}

impl FieldFile {
    pub fn new(name: impl Into<String>, field: ScalarField) -> Self {
        Self { name: name.into(), gamma: None, t: None, field }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn to_text(&self) -> String {
        let mesh = self.field.mesh();
        let mut out = String::new();
        writeln!(out, "{FIELD_MAGIC}").unwrap();
        writeln!(out, "# name: {}", self.name).unwrap();
        writeln!(out, "# n: {}", mesh.n()).unwrap();
        writeln!(out, "# nodes: {}", mesh.node_count()).unwrap();
        if let Some(g) = self.gamma {
            writeln!(out, "# gamma: {}", fmt_f64(g)).unwrap();
        }
        if let Some(t) = self.t {
            writeln!(out, "# T: {}", fmt_f64(t)).unwrap();
        }
        writeln!(out, "index,x,y,value").unwrap();
        for (k, (&[x, y], &v)) in mesh.nodes().iter().zip(self.field.values()).enumerate() {
            writeln!(out, "{k},{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(v)).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(FIELD_MAGIC) {
            return Err(Error::Parse("missing field file header".into()));
        }
        let (mut name, mut n, mut nodes, mut gamma, mut t) = (String::new(), None, None, None, None);
        let mut saw_columns = false;
        for line in lines.by_ref() {
            let line = line.trim();
            if line == "index,x,y,value" {
                saw_columns = true;
                break;
            }
            let Some((key, value)) = line.strip_prefix('#').and_then(|l| l.split_once(':')) else {
                return Err(Error::Parse(format!("unexpected header line '{line}'")));
            };
            let value = value.trim();
            match key.trim() {
                "name" => name = value.to_string(),
                "n" => n = Some(value.parse::<usize>().map_err(|e| Error::Parse(format!("n: {e}")))?),
                "nodes" => nodes = Some(value.parse::<usize>().map_err(|e| Error::Parse(format!("nodes: {e}")))?),
                "gamma" => gamma = Some(parse_f64(value, "gamma")?),
                "T" => t = Some(parse_f64(value, "T")?),
                other => return Err(Error::Parse(format!("unknown header key '{other}'"))),
            }
        }
        if !saw_columns {
            return Err(Error::Parse("missing column header".into()));
        }
        let n = n.ok_or_else(|| Error::Parse("missing 'n' header".into()))?;
        let mesh = Arc::new(Mesh::unit_square(n)?);
        let nodes = nodes.ok_or_else(|| Error::Parse("missing 'nodes' header".into()))?;
        if nodes != mesh.node_count() {
            return Err(Error::Parse(format!("header says {nodes} nodes, N = {n} mesh has {}", mesh.node_count())));
        }

        let mut values = vec![f64::NAN; nodes];
        let mut seen = 0usize;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let cols: Vec<&str> = line.split(',').collect();
            let [idx, x, y, v] = cols.as_slice() else {
                return Err(Error::Parse(format!("expected 4 columns in '{line}'")));
            };
            let idx: usize = idx.trim().parse().map_err(|e| Error::Parse(format!("index '{idx}': {e}")))?;
            if idx >= nodes || !values[idx].is_nan() {
                return Err(Error::Parse(format!("bad or repeated node index {idx}")));
            }
            let [mx, my] = mesh.nodes()[idx];
            let (x, y) = (parse_f64(x, "x")?, parse_f64(y, "y")?);
            if (x - mx).abs() > 1e-12 || (y - my).abs() > 1e-12 {
                return Err(Error::Parse(format!("node {idx} at ({x}, {y}) does not match the N = {n} mesh")));
            }
            values[idx] = parse_f64(v, "value")?;
            seen += 1;
        }
        if seen != nodes {
            return Err(Error::Parse(format!("expected {nodes} records, found {seen}")));
        }
        Ok(Self { name, gamma, t, field: ScalarField::new(mesh, values)? })
    }
}

pub fn write_field(path: &Path, file: &FieldFile) -> Result<()> {
    fs::write(path, file.to_text())?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<FieldFile> {
    let text =
        fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    FieldFile::parse(&text)
}

pub fn curve_to_csv(curve: &[(f64, f64)]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for &(a, v) in curve {
        writeln!(out, "{},{}", fmt_f64(a), fmt_f64(v)).unwrap();
    }
    out
}

pub fn parse_curve(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CURVE_HEADER) {
        return Err(Error::Parse("missing curve header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (a, v) = l.split_once(',').ok_or_else(|| Error::Parse(format!("bad curve row '{l}'")))?;
            Ok((parse_f64(a, "alpha")?, parse_f64(v, "value")?))
        })
        .collect()
}

/// `key: value` rendering of an inversion report.
pub fn report_to_text(report: &InversionReport, config: &InversionConfig, mass: &LumpedMass) -> String {
    let mut out = String::from("# porous-inverse inversion report\n");
    let mut kv = |k: &str, v: String| writeln!(out, "{k}: {v}").unwrap();
    kv("gamma_m", fmt_f64(report.gamma_m));
    kv("objective_at_min", fmt_f64(report.objective_at_min));
    kv("norm", report.norm.to_string());
    kv("T", fmt_f64(report.t_final));
    kv("alpha_min", fmt_f64(config.alpha_min));
    kv("gamma_c", fmt_f64(config.gamma_c));
    kv("grid_step", fmt_f64(config.grid_step));
    kv("refine_tol", fmt_f64(config.refine_tol));
    kv("clamp_negative_measurements", config.clamp_negative_measurements.to_string());
    kv("coarse_samples", report.curve.len().to_string());
    kv("refinement_probes", report.probes.len().to_string());
    kv("w_norm", fmt_f64(field_norm(&report.w_field, mass, report.norm)));
    kv("degenerate", report.degenerate.to_string());
    if report.degenerate {
        kv("warning", "degenerate measurement: w = 0, objective identically zero".into());
    }
    out
}

/// Parses `key: value` lines, skipping `#` comments.
pub fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_once(':')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse(format!("expected 'key: value', got '{l}'")))
        })
        .collect()
}

/// Record of one CLI run: every numeric parameter with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub subcommand: String,
    /// Flag name (without dashes) and value, in command-line order.
    pub params: Vec<(String, String)>,
    pub version: String,
    pub wall_clock_seconds: f64,
    /// Free-form diagnostics (not replayed).
    pub diagnostics: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            params: Vec::new(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: 0.0,
            diagnostics: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn diagnostic(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.diagnostics.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# porous-inverse run manifest\n");
        writeln!(out, "subcommand: {}", self.subcommand).unwrap();
        writeln!(out, "version: {}", self.version).unwrap();
        writeln!(out, "wall_clock_seconds: {}", self.wall_clock_seconds).unwrap();
        for (k, v) in &self.params {
            writeln!(out, "param.{k}: {v}").unwrap();
        }
        for (k, v) in &self.diagnostics {
            writeln!(out, "diag.{k}: {v}").unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut m = RunManifest::new("");
        let mut saw_subcommand = false;
        for (k, v) in parse_key_values(text)? {
            if let Some(p) = k.strip_prefix("param.") {
                m.params.push((p.to_string(), v));
            } else if let Some(d) = k.strip_prefix("diag.") {
                m.diagnostics.push((d.to_string(), v));
            } else {
                match k.as_str() {
                    "subcommand" => {
                        m.subcommand = v;
                        saw_subcommand = true;
                    }
                    "version" => m.version = v,
                    "wall_clock_seconds" => m.wall_clock_seconds = parse_f64(&v, "wall_clock_seconds")?,
                    other => return Err(Error::Parse(format!("unknown manifest key '{other}'"))),
                }
            }
        }
        if !saw_subcommand {
            return Err(Error::Parse("manifest lacks a subcommand".into()));
        }
        Ok(m)
    }

    /// Command-line arguments that rerun this manifest.
    pub fn to_args(&self) -> Vec<String> {
        let mut args = vec![self.subcommand.clone()];
        for (k, v) in &self.params {
            args.push(format!("--{k}"));
            args.push(v.clone());
        }
        args
    }

    /// Conventional manifest location next to an output file.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest");
        PathBuf::from(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }
}
