//! Command-line front end.
//!
//! Every command reads one TOML config, computes, and writes CSV (and SVG)
//! artifacts into the output directory. Floats are written with 17
//! significant digits and `\n` line endings, so identical configs give
//! byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::coherent::{self, CoherentSpec, DEFAULT_N_CAP, DEFAULT_TOL};
use crate::error::Error;
use crate::ladder::{self, LadderAddress, LadderSpec};
use crate::oracle;
use crate::position_space::{self, Grid};
use crate::spectrum::Model;
use crate::susy::{self, SusyConfig};
use crate::uncertainty::{self, QuadratureKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_ORACLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "multiphoton", version, about = "Multiphoton ladder algebras, coherent states and SUSY partners")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/SVG artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Energies, ladder decomposition and the partner spectrum.
    Spectrum,
    /// Commutator structure functions.
    Algebra,
    /// Coherent-state coefficients.
    Coherent,
    /// Uncertainty-product scan.
    Uncertainty,
    /// Partner potential and transformed eigenfunctions on a grid.
    Potential,
    /// Matrix-oracle validation report.
    Oracle,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelBlock>,
    pub susy: Option<SusyBlock>,
    #[serde(default)]
    pub ladder: LadderBlock,
    #[serde(default)]
    pub coherent: CoherentBlock,
    #[serde(default)]
    pub spectrum: SpectrumBlock,
    #[serde(default)]
    pub algebra: SpectrumBlock,
    pub uncertainty: Option<UncertaintyBlock>,
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub potential: PotentialBlock,
    #[serde(default)]
    pub oracle: OracleBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub kind: String,
    pub nu: Option<f64>,
    pub levels: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SusyBlock {
    pub epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderBlock {
    pub m: usize,
    pub alpha: f64,
}

impl Default for LadderBlock {
    fn default() -> Self {
        LadderBlock { m: 1, alpha: 0.0 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoherentBlock {
    pub j: usize,
    pub z: [f64; 2],
    pub tol: f64,
    pub n_cap: usize,
}

impl Default for CoherentBlock {
    fn default() -> Self {
        CoherentBlock { j: 0, z: [0.0, 0.0], tol: DEFAULT_TOL, n_cap: DEFAULT_N_CAP }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumBlock {
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UncertaintyBlock {
    pub kind: String,
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    /// `radial` (real axis, plus the imaginary axis for m = 2) or `square`.
    #[serde(default = "default_scan_grid")]
    pub grid: String,
    #[serde(default = "default_true")]
    pub svg: bool,
}

fn default_z_max() -> f64 {
    3.0
}

fn default_points() -> usize {
    201
}

fn default_scan_grid() -> String {
    "radial".into()
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub xmin: f64,
    pub xmax: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PotentialBlock {
    pub eigenstates: usize,
}

impl Default for PotentialBlock {
    fn default() -> Self {
        PotentialBlock { eigenstates: 3 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleBlock {
    pub dim: usize,
    pub margin: Option<usize>,
    pub commutator_threshold: f64,
    pub compare_threshold: f64,
    pub z: Vec<[f64; 2]>,
}

impl Default for OracleBlock {
    fn default() -> Self {
        OracleBlock {
            dim: oracle::DEFAULT_DIM,
            margin: None,
            commutator_threshold: 1e-10,
            compare_threshold: 1e-7,
            z: vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.5], [-2.0, 1.0], [0.0, -3.0]],
        }
    }
}

/// Failure of a CLI run, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(Error),
    /// Some oracle checks exceeded their thresholds; the report is still written.
    OracleFailed { summary: String, artifacts: Vec<Artifact> },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute(e) if e.is_validation() => EXIT_CONFIG,
            CliError::Compute(_) => EXIT_NUMERIC,
            CliError::OracleFailed { .. } => EXIT_ORACLE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::OracleFailed { summary, .. } => write!(f, "oracle failure: {summary}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

/// A file to be written into the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

/// Result of a command: artifacts plus text for stdout.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub stdout: String,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Default)]
struct Csv {
    buf: String,
}

impl Csv {
    fn meta(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.buf, "# {key} = {value}");
        self
    }

    fn header(&mut self, cols: &[&str]) -> &mut Self {
        self.buf.push_str(&cols.join(","));
        self.buf.push('\n');
        self
    }

    fn row(&mut self, fields: &[String]) {
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    fn finish(self, name: &str) -> Artifact {
        Artifact { name: name.into(), contents: self.buf }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}

impl RunConfig {
    pub fn build_model(&self) -> Result<Model, CliError> {
        let block = self.model.as_ref().ok_or_else(|| CliError::Config("missing [model] block".into()))?;
        build_model(block)
    }

    pub fn build_susy(&self, model: &Model) -> Result<Option<SusyConfig>, CliError> {
        match &self.susy {
            None => Ok(None),
            Some(block) => Ok(Some(SusyConfig::new(model, block.epsilons.clone())?)),
        }
    }

    pub fn ladder_spec(&self) -> Result<LadderSpec, CliError> {
        Ok(LadderSpec::new(self.ladder.m, self.ladder.alpha)?)
    }

    fn coherent_spec(&self, model: &Model, cfg: Option<SusyConfig>) -> CoherentSpec {
        let c = &self.coherent;
        let mut spec = CoherentSpec::new(model.clone(), self.ladder.m, c.j, C64::new(c.z[0], c.z[1]))
            .with_alpha(self.ladder.alpha)
            .with_tol(c.tol)
            .with_n_cap(c.n_cap);
        if let Some(cfg) = cfg {
            spec = spec.with_susy(cfg);
        }
        spec
    }

    fn grid(&self) -> Result<Grid, CliError> {
        let g = self.grid.as_ref().ok_or_else(|| CliError::Config("missing [grid] block".into()))?;
        Ok(Grid::new(g.xmin, g.xmax, g.points)?)
    }
}

fn build_model(block: &ModelBlock) -> Result<Model, CliError> {
    match block.kind.as_str() {
        "harmonic" => Ok(Model::harmonic()),
        "poschl-teller" => {
            let nu = block.nu.ok_or_else(|| CliError::Config("poschl-teller model needs nu".into()))?;
            Ok(Model::poschl_teller(nu)?)
        }
        "custom" => {
            let levels = block.levels.clone().ok_or_else(|| CliError::Config("custom model needs levels".into()))?;
            let model = Model::custom_table(levels.clone())?;
            let report = model.validate(levels.len() - 1);
            if let Some(n) = report.first_violation {
                return Err(CliError::Config(format!(
                    "custom levels are not strictly increasing: E({}) = {} <= E({n}) = {}",
                    n + 1,
                    levels[n + 1],
                    levels[n]
                )));
            }
            Ok(model)
        }
        other => Err(CliError::Config(format!("unknown model kind '{other}'"))),
    }
}

fn model_levels(model: &Model, requested: Option<usize>, reserve: usize) -> usize {
    let wanted = requested.unwrap_or(20);
    match model.validate(wanted + reserve).missing_level {
        Some(missing) => wanted.min(missing.saturating_sub(reserve)),
        None => wanted,
    }
}

fn describe_susy(cfg: &Option<SusyConfig>) -> (usize, String) {
    match cfg {
        None => (0, "[]".into()),
        Some(c) => (c.k(), format!("{:?}", c.epsilons())),
    }
}

pub fn cmd_spectrum(config: &RunConfig) -> Result<Outcome, CliError> {
    let model = config.build_model()?;
    let cfg = config.build_susy(&model)?;
    let m = config.ladder.m;
    if m == 0 {
        return Err(CliError::Config("ladder.m must be >= 1".into()));
    }
    let levels = model_levels(&model, config.spectrum.levels, 0);
    let (k, eps) = describe_susy(&cfg);
    let mut csv = Csv::default();
    csv.meta("command", "spectrum").meta("model", &model).meta("m", m).meta("k", k).meta("epsilons", eps);
    csv.header(&["n", "E", "ladder_j", "step", "gap"]);
    if let Some(cfg) = &cfg {
        let partner = susy::partner_spectrum(&model, cfg, m, 0)?;
        for (_, e) in &partner.isolated {
            csv.row(&["isolated".into(), num(*e), String::new(), String::new(), String::new()]);
        }
    }
    for n in 0..levels {
        let addr = LadderAddress::decompose(n, m);
        let gap = model.gap(n).map(num).unwrap_or_default();
        csv.row(&[n.to_string(), num(model.energy(n)?), addr.j.to_string(), addr.step.to_string(), gap]);
    }
    Ok(Outcome { artifacts: vec![csv.finish("spectrum.csv")], stdout: String::new() })
}

pub fn cmd_algebra(config: &RunConfig) -> Result<Outcome, CliError> {
    let model = config.build_model()?;
    let cfg = config.build_susy(&model)?;
    let m = config.ladder_spec()?.m();
    let levels = model_levels(&model, config.algebra.levels, m);
    let (k, eps) = describe_susy(&cfg);
    let mut csv = Csv::default();
    csv.meta("command", "algebra").meta("model", &model).meta("m", m).meta("k", k).meta("epsilons", eps);
    let mut cols = vec!["n", "comm_aa", "comm_H_create_factor", "comm_H_annih_factor"];
    if cfg.is_some() {
        cols.extend(["comm_ll", "comm_Hk_create_factor", "comm_Hk_annih_factor"]);
    }
    csv.header(&cols);
    for n in 0..levels {
        let create = model.multiphoton_gap_signed(m, n as i64 - m as i64).map(num).unwrap_or_default();
        let annihilate = num(model.multiphoton_gap(m, n)?);
        let mut row = vec![n.to_string(), num(ladder::commutator_structure(&model, m, n)?), create.clone(), annihilate.clone()];
        if let Some(cfg) = &cfg {
            row.extend([num(susy::commutator_structure_susy(&model, cfg, m, n)?), create, annihilate]);
        }
        csv.row(&row);
    }
    Ok(Outcome { artifacts: vec![csv.finish("algebra.csv")], stdout: String::new() })
}

pub fn cmd_coherent(config: &RunConfig) -> Result<Outcome, CliError> {
    let model = config.build_model()?;
    let cfg = config.build_susy(&model)?;
    config.ladder_spec()?;
    let (k, eps) = describe_susy(&cfg);
    let spec = config.coherent_spec(&model, cfg);
    let vector = coherent::coefficients(&spec)?;
    let mut csv = Csv::default();
    csv.meta("command", "coherent")
        .meta("model", &model)
        .meta("m", spec.m)
        .meta("j", spec.j)
        .meta("k", k)
        .meta("epsilons", eps)
        .meta("alpha", spec.alpha)
        .meta("z", format!("{} {}", num(spec.z.re), num(spec.z.im)))
        .meta("terms", vector.truncation())
        .meta("tail_bound", num(vector.tail_bound));
    csv.header(&["level", "re_c", "im_c", "abs_c2"]);
    for (level, c) in vector.levels() {
        csv.row(&[level.to_string(), num(c.re), num(c.im), num(c.norm_sqr())]);
    }
    Ok(Outcome { artifacts: vec![csv.finish("coherent.csv")], stdout: String::new() })
}

/// Named slices of an uncertainty scan.
struct Slice {
    label: &'static str,
    grid: Vec<C64>,
}

fn scan_slices(block: &UncertaintyBlock, m: usize) -> Result<Vec<Slice>, CliError> {
    if !(block.z_max.is_finite() && block.z_max >= 0.0) || block.points < 2 {
        return Err(CliError::Config("uncertainty needs z_max >= 0 and points >= 2".into()));
    }
    match block.grid.as_str() {
        "radial" => {
            let real = uncertainty::radial_grid(block.z_max, block.points);
            let mut slices = vec![Slice { label: "real axis", grid: real.clone() }];
            if m == 2 {
                let imag = real.iter().map(|z| C64::new(0.0, z.re)).collect();
                slices.push(Slice { label: "imaginary axis", grid: imag });
            }
            Ok(slices)
        }
        "square" => Ok(vec![Slice { label: "square", grid: uncertainty::square_grid(block.z_max, block.points) }]),
        other => Err(CliError::Config(format!("unknown scan grid '{other}' (radial | square)"))),
    }
}

pub fn cmd_uncertainty(config: &RunConfig) -> Result<Outcome, CliError> {
    let block = config.uncertainty.as_ref().ok_or_else(|| CliError::Config("missing [uncertainty] block".into()))?;
    let kind = QuadratureKind::from_name(&block.kind).ok_or_else(|| {
        CliError::Config(format!(
            "unknown quadrature kind '{}' (intrinsic-h0 | multiphoton-h0 | natural-hk | multiphoton-hk)",
            block.kind
        ))
    })?;
    let model = config.build_model()?;
    let cfg = config.build_susy(&model)?;
    config.ladder_spec()?;
    let (k, eps) = describe_susy(&cfg);
    let template = config.coherent_spec(&model, cfg);
    template.validate()?;
    kind.check(&template)?;
    let slices = scan_slices(block, template.m)?;

    let mut csv = Csv::default();
    csv.meta("command", "uncertainty")
        .meta("kind", kind)
        .meta("model", &model)
        .meta("m", template.m)
        .meta("j", template.j)
        .meta("k", k)
        .meta("epsilons", eps)
        .meta("alpha", template.alpha)
        .meta("tol", template.tol)
        .meta("grid", &block.grid);
    csv.header(&["re_z", "im_z", "product"]);
    let mut curves = Vec::new();
    for slice in &slices {
        let points = uncertainty::scan(&template, &slice.grid, kind)?;
        let mut curve = Vec::with_capacity(points.len());
        for p in points {
            let value = p.product.map_err(CliError::Compute)?;
            csv.row(&[num(p.z.re), num(p.z.im), num(value)]);
            curve.push((p.z.norm(), value));
        }
        curves.push((slice.label, curve));
    }
    let mut artifacts = vec![csv.finish("uncertainty.csv")];
    if block.svg && block.grid == "radial" {
        let title = format!("{kind}, {model}, m = {}, j = {}", template.m, template.j);
        artifacts.push(Artifact { name: "uncertainty.svg".into(), contents: svg_plot(&title, &curves) });
    }
    Ok(Outcome { artifacts, stdout: String::new() })
}

/// Minimal polyline chart of product against `|z|`.
fn svg_plot(title: &str, curves: &[(&str, Vec<(f64, f64)>)]) -> String {
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let all = curves.iter().flat_map(|(_, c)| c.iter());
    let (mut x_max, mut y_min, mut y_max) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x_max = x_max.max(x);
        y_min = y_min.min(y);
        y_max = y_max.max(y);
    }
    if x_max <= 0.0 {
        x_max = 1.0;
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    let sx = |x: f64| pad + (w - 2.0 * pad) * x / x_max;
    let sy = |y: f64| h - pad - (h - 2.0 * pad) * (y - y_min) / (y_max - y_min);
    let colours = ["#1f5fa8", "#c0392b"];
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{pad}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        h - pad,
        w - pad,
        h - pad
    );
    let _ = writeln!(s, r#"<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}" stroke="black"/>"#, h - pad);
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">|z|</text>"#, w / 2.0, h - 20.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-size="12" transform="rotate(-90 15 {})">(ΔX)(ΔP)</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (value, anchor, x, y) in [
        (0.0, "middle", sx(0.0), h - pad + 16.0),
        (x_max, "middle", sx(x_max), h - pad + 16.0),
        (y_min, "end", pad - 6.0, sy(y_min)),
        (y_max, "end", pad - 6.0, sy(y_max)),
    ] {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="11">{value:.4}</text>"#);
    }
    for (i, (label, curve)) in curves.iter().enumerate() {
        let colour = colours[i % colours.len()];
        let points: Vec<String> = curve.iter().map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="11" fill="{colour}">{label}</text>"#,
            w - pad - 100.0,
            pad + 16.0 * (i as f64 + 1.0)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn cmd_potential(config: &RunConfig) -> Result<Outcome, CliError> {
    let model = config.build_model()?;
    let cfg = config.build_susy(&model)?.ok_or_else(|| CliError::Config("potential needs a [susy] block".into()))?;
    let grid = config.grid()?;
    let d = position_space::darboux(&model, &cfg, &grid)?;
    let (k, eps) = describe_susy(&Some(cfg.clone()));

    let mut pot = Csv::default();
    pot.meta("command", "potential")
        .meta("model", &model)
        .meta("k", k)
        .meta("epsilons", &eps)
        .meta("grid", format!("{} {} {}", grid.x_min, grid.x_max, grid.n_points))
        .meta("max_discrepancy", num(d.table.max_discrepancy));
    pot.header(&["x", "V0", "Vk_sum_form", "Vk_wronskian_form"]);
    for i in 0..d.table.x.len() {
        pot.row(&[num(d.table.x[i]), num(d.table.v0[i]), num(d.table.sum_form[i]), num(d.table.wronskian_form[i])]);
    }

    let mut columns = Vec::new();
    let mut names = vec!["x".to_string()];
    for n in 0..config.potential.eigenstates {
        let psi0 = position_space::eigenfunction(&model, n, &grid)?;
        columns.push(position_space::transform_eigenfunction(&grid, &d.chain, &psi0, model.energy(n)?)?);
        names.push(format!("psi_{n}"));
    }
    let mut psi = Csv::default();
    psi.meta("command", "potential").meta("model", &model).meta("k", k).meta("epsilons", &eps);
    if k == 1 {
        let (state, normalizable) = position_space::isolated_state(&d.seeds[0])?;
        psi.meta("psi_eps_normalizable", normalizable);
        columns.push(state);
        names.push("psi_eps".into());
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    psi.header(&refs);
    for i in 0..grid.n_points {
        let mut row = vec![num(grid.x(i))];
        row.extend(columns.iter().map(|c| num(c[i])));
        psi.row(&row);
    }
    Ok(Outcome { artifacts: vec![pot.finish("potential.csv"), psi.finish("eigenfunctions.csv")], stdout: String::new() })
}

/// One line of the oracle report.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub suite: String,
    pub check: String,
    pub dim: usize,
    pub margin: usize,
    pub deviation: f64,
    pub threshold: f64,
}

impl OracleRow {
    pub fn passed(&self) -> bool {
        self.deviation < self.threshold
    }
}

fn oracle_suite(
    rows: &mut Vec<OracleRow>,
    block: &OracleBlock,
    model: &Model,
    cfg: Option<&SusyConfig>,
    ladder: LadderSpec,
    j: usize,
) -> Result<(), CliError> {
    let m = ladder.m();
    let margin = block.margin.unwrap_or_else(|| oracle::default_margin(m));
    let ops = oracle::build(model, cfg, ladder, block.dim)?;
    let suite = format!("{model} m={m} k={}", cfg.map_or(0, |c| c.k()));
    for check in oracle::check_commutators(&ops, margin)?.checks {
        rows.push(OracleRow {
            suite: suite.clone(),
            check: check.name,
            dim: check.dim,
            margin,
            deviation: check.max_deviation,
            threshold: block.commutator_threshold,
        });
    }
    let kinds = if cfg.is_some() {
        [QuadratureKind::NaturalHk, QuadratureKind::MultiphotonHk]
    } else {
        [QuadratureKind::IntrinsicH0, QuadratureKind::MultiphotonH0]
    };
    for kind in kinds {
        let mut worst = 0.0f64;
        for z in &block.z {
            let mut spec = CoherentSpec::new(model.clone(), m, j, C64::new(z[0], z[1])).with_alpha(ladder.alpha());
            if let Some(cfg) = cfg {
                spec = spec.with_susy(cfg.clone());
            }
            let closed = uncertainty::uncertainty_product(&spec, kind)?;
            let raw = oracle::oracle_uncertainty_with(&ops, &spec, kind)?;
            worst = worst.max((closed - raw).abs());
        }
        rows.push(OracleRow {
            suite: suite.clone(),
            check: format!("uncertainty {kind} j={j}"),
            dim: block.dim,
            margin: 0,
            deviation: worst,
            threshold: block.compare_threshold,
        });
    }
    Ok(())
}

pub fn oracle_rows(config: &RunConfig) -> Result<Vec<OracleRow>, CliError> {
    let block = &config.oracle;
    let mut rows = Vec::new();
    if config.model.is_some() {
        let model = config.build_model()?;
        let cfg = config.build_susy(&model)?;
        let ladder = config.ladder_spec()?;
        oracle_suite(&mut rows, block, &model, cfg.as_ref(), ladder, config.coherent.j)?;
        return Ok(rows);
    }
    // default suite: oscillator and Pöschl-Teller (nu = 2), m = 1..3, k = 0, 1
    for model in [Model::harmonic(), Model::poschl_teller(2.0)?] {
        for m in 1..=3 {
            let ladder = LadderSpec::new(m, config.ladder.alpha)?;
            oracle_suite(&mut rows, block, &model, None, ladder, 0)?;
            let cfg = SusyConfig::new(&model, vec![-0.5])?;
            oracle_suite(&mut rows, block, &model, Some(&cfg), ladder, m - 1)?;
        }
    }
    Ok(rows)
}

pub fn cmd_oracle(config: &RunConfig) -> Result<Outcome, CliError> {
    let rows = oracle_rows(config)?;
    let mut csv = Csv::default();
    csv.meta("command", "oracle")
        .meta("commutator_threshold", config.oracle.commutator_threshold)
        .meta("compare_threshold", config.oracle.compare_threshold);
    csv.header(&["suite", "check", "dim", "margin", "max_deviation", "threshold", "pass"]);
    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<34} {:<30} {:>5} {:>6} {:>12} {:>10}  result",
        "suite", "check", "D", "margin", "deviation", "threshold"
    );
    let mut failed = 0;
    for r in &rows {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        if !r.passed() {
            failed += 1;
        }
        csv.row(&[
            r.suite.clone(),
            r.check.clone(),
            r.dim.to_string(),
            r.margin.to_string(),
            num(r.deviation),
            num(r.threshold),
            verdict.to_string(),
        ]);
        let _ = writeln!(
            table,
            "{:<34} {:<30} {:>5} {:>6} {:>12.3e} {:>10.1e}  {verdict}",
            r.suite, r.check, r.dim, r.margin, r.deviation, r.threshold
        );
    }
    let _ = writeln!(table, "{} checks, {failed} failed", rows.len());
    let outcome = Outcome { artifacts: vec![csv.finish("oracle.csv")], stdout: table };
    if failed > 0 {
        return Err(CliError::OracleFailed {
            summary: format!("{failed} of {} checks failed\n{}", rows.len(), outcome.stdout),
            artifacts: outcome.artifacts,
        });
    }
    Ok(outcome)
}

pub fn execute(command: Command, config: &RunConfig) -> Result<Outcome, CliError> {
    match command {
        Command::Spectrum => cmd_spectrum(config),
        Command::Algebra => cmd_algebra(config),
        Command::Coherent => cmd_coherent(config),
        Command::Uncertainty => cmd_uncertainty(config),
        Command::Potential => cmd_potential(config),
        Command::Oracle => cmd_oracle(config),
    }
}

fn write_artifacts(out: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Config(format!("{}: {e}", out.display())))?;
    for a in artifacts {
        let path = out.join(&a.name);
        std::fs::write(&path, &a.contents).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = (|| {
        let config = match &cli.config {
            Some(path) => load_config(path)?,
            None => RunConfig::default(),
        };
        let outcome = execute(cli.command, &config)?;
        write_artifacts(&cli.out, &outcome.artifacts)?;
        Ok::<_, CliError>(outcome)
    })();
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            for a in &outcome.artifacts {
                println!("wrote {}", cli.out.join(&a.name).display());
            }
            EXIT_OK
        }
        Err(e) => {
            if let CliError::OracleFailed { artifacts, .. } = &e {
                if write_artifacts(&cli.out, artifacts).is_ok() {
                    for a in artifacts {
                        println!("wrote {}", cli.out.join(&a.name).display());
                    }
                }
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
