//! INI-style run configuration.
//!
//! ```text
//! [mesh]
//! cartesian = 100, 100, -1.0, -1.0, 1.0, 1.0
//! [layout]
//! regions = annulus(0.0, 0.0, 0.316, 0.447)
//! [coupling]
//! gammas = linear(1.0), linear(2.0)
//! fluxes = quadratic(1.0, 1.0, 0.0), quadratic(1.0, 1.0, 0.9)
//! [scheme]
//! cfl_number = 0.5
//! [run]
//! initial = step(-0.8, 1.0, 0.0)
//! t_end = 4.5
//! ```
//!
//! Unknown sections and keys are errors. Every key of the serialized form can
//! be read back, and `parse(serialize(c)) == c`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::expr::{parse_expr, parse_list, Expr, ExprError};
use crate::coupling::{FluxFamily, Gamma, Shape};
use crate::flux::FluxKind;
use crate::mesh::{BetaRule, BoundingBox};
use crate::scheme::InitQuadrature;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}` in [{section}]")]
    UnknownKey { line: usize, section: String, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing section [{0}]")]
    MissingSection(String),
    #[error("missing key `{key}` in [{section}]")]
    MissingKey { section: String, key: String },
    #[error("{key} {message}")]
    Invalid { key: String, message: String },
    #[error("{0}")]
    Io(String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Cartesian { nx: usize, ny: usize, bbox: BoundingBox },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub source: MeshSource,
    /// Only `Centroid` and `UniformVertexWeights` are expressible.
    pub dual: BetaRule,
}

/// A length given directly or as a multiple of the mesh edge length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Width {
    Absolute(f64),
    Cells(f64),
}

impl Width {
    pub fn resolve(self, cell_width: f64) -> f64 {
        match self {
            Width::Absolute(w) => w,
            Width::Cells(n) => n * cell_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec {
    /// `D_1 .. D_L`.
    pub regions: Vec<Shape>,
    pub w_reg: Width,
    pub quadrature_order: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    pub gammas: Vec<Gamma>,
    pub fluxes: Vec<FluxFamily>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSpec {
    pub flux: FluxKind,
    pub cfl_number: f64,
    pub tol_root: f64,
    /// Cap on `τ`, active when no wave moves.
    pub max_dt: f64,
    pub init_quadrature: InitQuadrature,
    pub cfl_guard: bool,
    pub godunov_samples: usize,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        SchemeSpec {
            flux: FluxKind::Rusanov,
            cfl_number: 0.5,
            tol_root: 1e-12,
            max_dt: 1.0,
            init_quadrature: InitQuadrature::Centroid,
            cfl_guard: true,
            godunov_samples: crate::flux::DEFAULT_GODUNOV_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Constant(f64),
    /// `left` for `x < x0`, `right` otherwise.
    Step { x0: f64, left: f64, right: f64 },
    /// `base + amplitude · sin²(π ξ) sin²(π η)` with `(ξ, η)` the position
    /// relative to `bbox`, and `base` outside it.
    SinBump { bbox: BoundingBox, amplitude: f64, base: f64 },
    /// Independent uniform cell values, seeded.
    Random { lo: f64, hi: f64, seed: u64 },
}

impl InitialData {
    /// Pointwise value, or `None` for per-cell random data.
    pub fn eval(&self, x: f64, y: f64) -> Option<f64> {
        use std::f64::consts::PI;
        match *self {
            InitialData::Constant(c) => Some(c),
            InitialData::Step { x0, left, right } => Some(if x < x0 { left } else { right }),
            InitialData::SinBump { bbox, amplitude, base } => {
                if bbox.contains([x, y]) {
                    let sx = (PI * (x - bbox.xmin) / bbox.width()).sin();
                    let sy = (PI * (y - bbox.ymin) / bbox.height()).sin();
                    Some(base + amplitude * sx * sx * sy * sy)
                } else {
                    Some(base)
                }
            }
            InitialData::Random { .. } => None,
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            InitialData::Constant(c) => write!(f, "constant({c:?})"),
            InitialData::Step { x0, left, right } => write!(f, "step({x0:?}, {left:?}, {right:?})"),
            InitialData::SinBump { bbox, amplitude, base } => write!(
                f,
                "sinbump({:?}, {:?}, {:?}, {:?}, {amplitude:?}, {base:?})",
                bbox.xmin, bbox.ymin, bbox.xmax, bbox.ymax
            ),
            InitialData::Random { lo, hi, seed } => write!(f, "random({lo:?}, {hi:?}, {seed})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    VtkLegacy,
    Csv,
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::VtkLegacy => "vtk",
            OutputFormat::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub initial: InitialData,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<OutputFormat>,
    /// Compute subcell entropy residuals every step.
    pub entropy_diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    pub layout: LayoutSpec,
    pub coupling: CouplingSpec,
    pub scheme: SchemeSpec,
    pub run: RunSpec,
}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("mesh", &["cartesian", "file", "dual"]),
    ("layout", &["regions", "w_reg", "quadrature_order"]),
    ("coupling", &["gammas", "fluxes"]),
    (
        "scheme",
        &[
            "flux",
            "cfl_number",
            "tol_root",
            "max_dt",
            "init_quadrature",
            "cfl_guard",
            "godunov_samples",
        ],
    ),
    (
        "run",
        &["initial", "t_end", "snapshots", "output_dir", "formats", "entropy_diagnostics"],
    ),
];

type Section = BTreeMap<String, (usize, String)>;

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>, ConfigError> {
    let mut out: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("unterminated section header `{l}`"),
                })?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(ConfigError::UnknownSection {
                    line,
                    name: name.to_string(),
                });
            }
            if out.contains_key(name) {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("section [{name}] repeated"),
                });
            }
            out.insert(name.to_string(), Section::new());
            current = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = l.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, found `{l}`"),
            });
        };
        let Some(section) = &current else {
            return Err(ConfigError::Syntax {
                line,
                message: "key outside any section".into(),
            });
        };
        let key = key.trim();
        let allowed = SECTIONS.iter().find(|(s, _)| s == section).map(|s| s.1).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                section: section.clone(),
                key: key.to_string(),
            });
        }
        let map = out.get_mut(section).expect("section inserted");
        if map.insert(key.to_string(), (line, value.trim().to_string())).is_some() {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
    }
    Ok(out)
}

struct Reader<'a> {
    name: &'static str,
    map: &'a Section,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|(_, v)| v.as_str())
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or_else(|| ConfigError::MissingKey {
            section: self.name.to_string(),
            key: key.to_string(),
        })
    }

    fn parsed<T: FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| invalid(key, format!("`{v}`: {e}"))),
        }
    }

    fn number(&self, key: &str, default: Option<f64>) -> Result<f64, ConfigError> {
        match (self.raw(key), default) {
            (None, Some(d)) => Ok(d),
            (None, None) => Err(ConfigError::MissingKey {
                section: self.name.to_string(),
                key: key.to_string(),
            }),
            (Some(v), _) => parse_expr(v)
                .and_then(|e| e.number())
                .map_err(|e| invalid(key, e.to_string())),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<Expr>, ConfigError> {
        parse_list(self.raw(key).unwrap_or("")).map_err(|e| invalid(key, e.to_string()))
    }
}

fn with_key<T>(key: &str, r: Result<T, ExprError>) -> Result<T, ConfigError> {
    r.map_err(|e| invalid(key, e.to_string()))
}

pub fn parse_shape(e: &Expr) -> Result<Shape, ExprError> {
    let (name, args) = e.call()?;
    let n = |counts: &[usize]| Expr::numbers(args, name, counts);
    Ok(match name {
        "empty" => {
            n(&[0])?;
            Shape::Empty
        }
        "halfplane" => {
            let a = n(&[3])?;
            Shape::HalfPlane {
                normal: [a[0], a[1]],
                offset: a[2],
            }
        }
        "disk" => {
            let a = n(&[3])?;
            Shape::Disk {
                center: [a[0], a[1]],
                radius: a[2],
            }
        }
        "annulus" => {
            let a = n(&[4])?;
            if !(0.0 <= a[2] && a[2] < a[3]) {
                return Err(ExprError("annulus needs 0 <= r_inner < r_outer".into()));
            }
            Shape::Annulus {
                center: [a[0], a[1]],
                r_inner: a[2],
                r_outer: a[3],
            }
        }
        "triangle" => {
            let a = n(&[6])?;
            Shape::Triangle {
                vertices: [[a[0], a[1]], [a[2], a[3]], [a[4], a[5]]],
            }
        }
        "difference" => {
            if args.len() != 2 {
                return Err(ExprError("difference takes two shapes".into()));
            }
            Shape::Difference(Box::new(parse_shape(&args[0])?), Box::new(parse_shape(&args[1])?))
        }
        other => return Err(ExprError(format!("unknown shape `{other}`"))),
    })
}

pub fn parse_gamma(e: &Expr) -> Result<Gamma, ExprError> {
    let (name, args) = e.call()?;
    match name {
        "linear" => {
            let a = Expr::numbers(args, name, &[1, 2])?;
            Ok(Gamma::Linear {
                slope: a[0],
                offset: a.get(1).copied().unwrap_or(0.0),
            })
        }
        "cubic" => {
            let a = Expr::numbers(args, name, &[2])?;
            Ok(Gamma::CubicPlusLinear {
                cubic: a[0],
                linear: a[1],
            })
        }
        other => Err(ExprError(format!("unknown gamma family `{other}`"))),
    }
}

pub fn parse_flux_family(e: &Expr) -> Result<FluxFamily, ExprError> {
    let (name, args) = e.call()?;
    match name {
        "linear" => {
            let a = Expr::numbers(args, name, &[2])?;
            Ok(FluxFamily::Linear { velocity: [a[0], a[1]] })
        }
        "quadratic" => {
            let a = Expr::numbers(args, name, &[3])?;
            Ok(FluxFamily::Quadratic {
                direction: [a[0], a[1]],
                shift: a[2],
            })
        }
        "burgers" => {
            let a = Expr::numbers(args, name, &[2])?;
            Ok(FluxFamily::burgers([a[0], a[1]]))
        }
        other => Err(ExprError(format!("unknown flux family `{other}`"))),
    }
}

pub fn parse_initial(e: &Expr) -> Result<InitialData, ExprError> {
    let (name, args) = e.call()?;
    Ok(match name {
        "constant" => InitialData::Constant(Expr::numbers(args, name, &[1])?[0]),
        "step" => {
            let a = Expr::numbers(args, name, &[3])?;
            InitialData::Step {
                x0: a[0],
                left: a[1],
                right: a[2],
            }
        }
        "sinbump" => {
            let a = Expr::numbers(args, name, &[6])?;
            let bbox = BoundingBox::new(a[0], a[1], a[2], a[3]);
            if !bbox.is_valid() {
                return Err(ExprError("sinbump box is degenerate".into()));
            }
            InitialData::SinBump {
                bbox,
                amplitude: a[4],
                base: a[5],
            }
        }
        "random" => {
            let a = Expr::numbers(args, name, &[3])?;
            if !(a[0] <= a[1]) {
                return Err(ExprError("random needs lo <= hi".into()));
            }
            let seed = args[2]
                .integer()
                .map_err(|_| ExprError("random seed must be a non-negative integer".into()))?;
            InitialData::Random {
                lo: a[0],
                hi: a[1],
                seed,
            }
        }
        other => return Err(ExprError(format!("unknown initial data `{other}`"))),
    })
}

fn parse_bool(key: &str, v: Option<&str>, default: bool) -> Result<bool, ConfigError> {
    match v {
        None => Ok(default),
        Some("true") => Ok(true),
        Some("false") => Ok(false),
        Some(o) => Err(invalid(key, format!("expects true or false, got `{o}`"))),
    }
}

fn parse_usize(key: &str, e: &Expr) -> Result<usize, ConfigError> {
    let x = with_key(key, e.number())?;
    if x >= 0.0 && x.fract() == 0.0 && x < 1e15 {
        Ok(x as usize)
    } else {
        Err(invalid(key, format!("expects a non-negative integer, got {x}")))
    }
}

/// Parses and validates config text.
pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let sections = split_sections(text)?;
    let get = |name: &'static str| -> Result<Reader<'_>, ConfigError> {
        sections
            .get(name)
            .map(|map| Reader { name, map })
            .ok_or_else(|| ConfigError::MissingSection(name.to_string()))
    };
    let mesh = get("mesh")?;
    let layout = get("layout")?;
    let coupling = get("coupling")?;
    let scheme = get("scheme")?;
    let run = get("run")?;

    let source = match (mesh.raw("cartesian"), mesh.raw("file")) {
        (Some(_), Some(_)) => return Err(invalid("cartesian", "conflicts with `file`")),
        (None, None) => {
            return Err(ConfigError::MissingKey {
                section: "mesh".into(),
                key: "cartesian".into(),
            })
        }
        (None, Some(path)) => MeshSource::File(PathBuf::from(path)),
        (Some(_), None) => {
            let l = mesh.list("cartesian")?;
            if l.len() != 6 {
                return Err(invalid("cartesian", "expects nx, ny, xmin, ymin, xmax, ymax"));
            }
            let nx = parse_usize("cartesian", &l[0])?;
            let ny = parse_usize("cartesian", &l[1])?;
            let b: Vec<f64> = l[2..]
                .iter()
                .map(|e| with_key("cartesian", e.number()))
                .collect::<Result<_, _>>()?;
            let bbox = BoundingBox::new(b[0], b[1], b[2], b[3]);
            if nx == 0 || ny == 0 || !bbox.is_valid() {
                return Err(invalid("cartesian", "needs positive cell counts and a non-degenerate box"));
            }
            MeshSource::Cartesian { nx, ny, bbox }
        }
    };
    let dual = match mesh.raw("dual").unwrap_or("centroid") {
        "centroid" => BetaRule::Centroid,
        "uniform" => BetaRule::UniformVertexWeights,
        o => return Err(invalid("dual", format!("expects centroid or uniform, got `{o}`"))),
    };

    let regions = layout
        .list("regions")?
        .iter()
        .map(|e| with_key("regions", parse_shape(e)))
        .collect::<Result<Vec<_>, _>>()?;
    let w_reg = match layout.raw("w_reg") {
        None => Width::Cells(3.0),
        Some(v) => {
            let e = with_key("w_reg", parse_expr(v))?;
            match &e {
                Expr::Call { name, args } if name == "cells" => {
                    Width::Cells(with_key("w_reg", Expr::numbers(args, "cells", &[1]))?[0])
                }
                _ => Width::Absolute(with_key("w_reg", e.number())?),
            }
        }
    };
    let w_val = match w_reg {
        Width::Absolute(w) | Width::Cells(w) => w,
    };
    if !(w_val >= 0.0 && w_val.is_finite()) {
        return Err(invalid("w_reg", "must be finite and non-negative"));
    }
    let quadrature_order = match layout.raw("quadrature_order") {
        None => 4,
        Some(v) => parse_usize("quadrature_order", &with_key("quadrature_order", parse_expr(v))?)?,
    };
    if quadrature_order == 0 {
        return Err(invalid("quadrature_order", "must be positive"));
    }

    coupling.required("gammas")?;
    coupling.required("fluxes")?;
    let gammas = coupling
        .list("gammas")?
        .iter()
        .map(|e| with_key("gammas", parse_gamma(e)))
        .collect::<Result<Vec<_>, _>>()?;
    let fluxes = coupling
        .list("fluxes")?
        .iter()
        .map(|e| with_key("fluxes", parse_flux_family(e)))
        .collect::<Result<Vec<_>, _>>()?;
    if gammas.is_empty() {
        return Err(invalid("gammas", "needs at least one entry"));
    }
    if fluxes.len() != gammas.len() {
        return Err(invalid("fluxes", format!("needs {} entries, one per gamma", gammas.len())));
    }
    if regions.len() + 1 != gammas.len() {
        return Err(invalid(
            "regions",
            format!("needs {} entries for {} components", gammas.len() - 1, gammas.len()),
        ));
    }

    let d = SchemeSpec::default();
    let flux = scheme.parsed("flux", d.flux)?;
    let cfl_number = scheme.number("cfl_number", Some(d.cfl_number))?;
    if !(cfl_number > 0.0 && cfl_number <= 1.0) {
        return Err(invalid("cfl_number", "out of (0,1]"));
    }
    let tol_root = scheme.number("tol_root", Some(d.tol_root))?;
    if !(tol_root > 0.0 && tol_root < 1.0) {
        return Err(invalid("tol_root", "out of (0,1)"));
    }
    let max_dt = scheme.number("max_dt", Some(d.max_dt))?;
    if !(max_dt > 0.0 && max_dt.is_finite()) {
        return Err(invalid("max_dt", "must be positive and finite"));
    }
    let init_quadrature = match scheme.raw("init_quadrature").unwrap_or("centroid") {
        "centroid" => InitQuadrature::Centroid,
        "subcell-fan" => InitQuadrature::SubcellFan,
        o => return Err(invalid("init_quadrature", format!("expects centroid or subcell-fan, got `{o}`"))),
    };
    let cfl_guard = parse_bool("cfl_guard", scheme.raw("cfl_guard"), d.cfl_guard)?;
    let godunov_samples = match scheme.raw("godunov_samples") {
        None => d.godunov_samples,
        Some(v) => parse_usize("godunov_samples", &with_key("godunov_samples", parse_expr(v))?)?,
    };
    if godunov_samples < 2 {
        return Err(invalid("godunov_samples", "must be at least 2"));
    }

    let initial = with_key("initial", parse_initial(&with_key("initial", parse_expr(run.required("initial")?))?))?;
    let t_end = run.number("t_end", None)?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", "must be finite and non-negative"));
    }
    let snapshots = run
        .list("snapshots")?
        .iter()
        .map(|e| with_key("snapshots", e.number()))
        .collect::<Result<Vec<_>, _>>()?;
    validate_snapshots(&snapshots, t_end)?;
    let output_dir = run.raw("output_dir").filter(|s| !s.is_empty()).map(PathBuf::from);
    let formats = match run.raw("formats") {
        None => vec![OutputFormat::VtkLegacy, OutputFormat::Csv],
        Some(v) => v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "vtk" => Ok(OutputFormat::VtkLegacy),
                "csv" => Ok(OutputFormat::Csv),
                o => Err(invalid("formats", format!("unknown format `{o}`"))),
            })
            .collect::<Result<_, _>>()?,
    };
    let entropy_diagnostics = parse_bool("entropy_diagnostics", run.raw("entropy_diagnostics"), true)?;

    Ok(RunConfig {
        mesh: MeshSpec { source, dual },
        layout: LayoutSpec {
            regions,
            w_reg,
            quadrature_order,
        },
        coupling: CouplingSpec { gammas, fluxes },
        scheme: SchemeSpec {
            flux,
            cfl_number,
            tol_root,
            max_dt,
            init_quadrature,
            cfl_guard,
            godunov_samples,
        },
        run: RunSpec {
            initial,
            t_end,
            snapshots,
            output_dir,
            formats,
            entropy_diagnostics,
        },
    })
}

/// Snapshot times must be sorted and lie in `[0, t_end]`.
pub fn validate_snapshots(snapshots: &[f64], t_end: f64) -> Result<(), ConfigError> {
    if snapshots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("snapshots", "must be strictly increasing"));
    }
    if snapshots.iter().any(|&t| !(t >= 0.0 && t <= t_end)) {
        return Err(invalid("snapshots", format!("must lie in [0, {t_end}]")));
    }
    Ok(())
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| ConfigError::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_config_str(&text)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Canonical text form of a config.
pub fn serialize_config(c: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "[mesh]");
    match &c.mesh.source {
        MeshSource::Cartesian { nx, ny, bbox } => {
            let _ = writeln!(
                s,
                "cartesian = {nx}, {ny}, {:?}, {:?}, {:?}, {:?}",
                bbox.xmin, bbox.ymin, bbox.xmax, bbox.ymax
            );
        }
        MeshSource::File(p) => {
            let _ = writeln!(s, "file = {}", p.display());
        }
    }
    let dual = match c.mesh.dual {
        BetaRule::UniformVertexWeights => "uniform",
        _ => "centroid",
    };
    let _ = writeln!(s, "dual = {dual}\n\n[layout]");
    let _ = writeln!(s, "regions = {}", join(&c.layout.regions));
    match c.layout.w_reg {
        Width::Absolute(w) => {
            let _ = writeln!(s, "w_reg = {w:?}");
        }
        Width::Cells(n) => {
            let _ = writeln!(s, "w_reg = cells({n:?})");
        }
    }
    let _ = writeln!(s, "quadrature_order = {}\n\n[coupling]", c.layout.quadrature_order);
    let _ = writeln!(s, "gammas = {}", join(&c.coupling.gammas));
    let _ = writeln!(s, "fluxes = {}\n\n[scheme]", join(&c.coupling.fluxes));
    let sc = &c.scheme;
    let _ = writeln!(s, "flux = {}", sc.flux);
    let _ = writeln!(s, "cfl_number = {:?}", sc.cfl_number);
    let _ = writeln!(s, "tol_root = {:?}", sc.tol_root);
    let _ = writeln!(s, "max_dt = {:?}", sc.max_dt);
    let iq = match sc.init_quadrature {
        InitQuadrature::Centroid => "centroid",
        InitQuadrature::SubcellFan => "subcell-fan",
    };
    let _ = writeln!(s, "init_quadrature = {iq}");
    let _ = writeln!(s, "cfl_guard = {}", sc.cfl_guard);
    let _ = writeln!(s, "godunov_samples = {}\n\n[run]", sc.godunov_samples);
    let r = &c.run;
    let _ = writeln!(s, "initial = {}", r.initial);
    let _ = writeln!(s, "t_end = {:?}", r.t_end);
    let snaps: Vec<String> = r.snapshots.iter().map(|t| format!("{t:?}")).collect();
    let _ = writeln!(s, "snapshots = {}", snaps.join(", "));
    if let Some(dir) = &r.output_dir {
        let _ = writeln!(s, "output_dir = {}", dir.display());
    }
    let formats: Vec<&str> = r.formats.iter().map(|f| f.name()).collect();
    let _ = writeln!(s, "formats = {}", formats.join(", "));
    let _ = writeln!(s, "entropy_diagnostics = {}", r.entropy_diagnostics);
    s
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_config(self))
    }
}
