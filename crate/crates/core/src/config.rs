//! Flat `key = value` run configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::eigensolve::{SolverParams, Strategy};
use crate::error::{Error, Result};
use crate::fem::{FemParams, NodeFamily};
use crate::geometry::{check_angle, DomainSpec, Formulation};

/// Every accepted key with a one-line description.
pub const SCHEMA: &[(&str, &str)] = &[
    ("theta", "half-opening angle; accepts radians or expressions such as 0.5*pi/2"),
    ("formulation", "model | reference | full"),
    ("length", "number of periods in the straight arm before the artificial boundary"),
    ("level", "mesh level (subdivisions per period)"),
    ("degree", "polynomial degree 1..=6"),
    ("quad_degree", "quadrature exactness, or 'auto'"),
    ("nodes", "lobatto | equispaced"),
    ("nval", "number of eigenpairs"),
    ("nsub", "subspace dimension (> nval)"),
    ("eps", "relative convergence tolerance"),
    ("seed", "seed of the random start block"),
    ("max_iterations", "iteration cap of the eigensolver"),
    ("strategy", "inverted | direct"),
    ("thetas", "comma-separated angle list for sweep and bounds"),
    ("levels", "comma-separated mesh levels for convergence"),
    ("degrees", "comma-separated degrees for convergence"),
    ("cert_n", "cutoff length n of the existence certificate, or 'auto'"),
    ("modes", "number of sine modes of the arm trace"),
    ("margin", "distance kept from the corner and the artificial boundary in decay fits"),
    ("slices", "number of cross-sections in decay fits"),
    ("grid_nx", "export grid points along u"),
    ("grid_ny", "export grid points along v"),
    ("mode", "1-based index of the eigenvector used by decay and export"),
];

/// The problem and discretization part of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GuideConfig {
    pub spec: DomainSpec,
    pub fem: FemParams,
    pub solver: SolverParams,
}

/// A [`GuideConfig`] plus the options of the individual commands.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub theta: f64,
    pub formulation: Formulation,
    pub length: usize,
    pub level: usize,
    pub degree: usize,
    pub quad_degree: Option<usize>,
    pub nodes: NodeFamily,
    pub nval: usize,
    pub nsub: usize,
    pub eps: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub strategy: Strategy,
    pub thetas: Vec<f64>,
    pub levels: Vec<usize>,
    pub degrees: Vec<usize>,
    pub cert_n: Option<usize>,
    pub modes: usize,
    pub margin: f64,
    pub slices: usize,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub mode: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            theta: 0.5 * PI / 2.0,
            formulation: Formulation::ModelGuide,
            length: 5,
            level: 8,
            degree: 6,
            quad_degree: None,
            nodes: NodeFamily::GaussLobatto,
            nval: 10,
            nsub: 25,
            eps: 1e-8,
            seed: 0,
            max_iterations: 5000,
            strategy: Strategy::Inverted,
            thetas: Vec::new(),
            levels: vec![2, 4, 8],
            degrees: vec![2, 4, 6],
            cert_n: None,
            modes: 50,
            margin: PI,
            slices: 24,
            grid_nx: 200,
            grid_ny: 50,
            mode: 1,
        }
    }
}

/// Parses an angle: a number, or a product/quotient chain of numbers and `pi`
/// such as `0.5*pi/2`, `pi/4` or `0.3pi/2`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    if s.is_empty() {
        return Err(Error::Parse("empty angle".into()));
    }
    let factor = |tok: &str| -> Result<f64> {
        match tok {
            "pi" => Ok(PI),
            t if t.ends_with("pi") => Ok(t[..t.len() - 2].parse::<f64>().map_err(|_| bad(text))? * PI),
            t => t.parse::<f64>().map_err(|_| bad(text)),
        }
    };
    let mut value = 1.0;
    let mut op = '*';
    let mut start = 0;
    for (i, c) in s.char_indices().chain(std::iter::once((s.len(), '*'))) {
        if c == '*' || c == '/' {
            let f = factor(&s[start..i])?;
            value = if op == '*' { value * f } else { value / f };
            op = c;
            start = i + 1;
        }
    }
    Ok(value)
}

fn bad(text: &str) -> Error {
    Error::Parse(format!("cannot read angle '{text}'"))
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

fn auto<T: FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value.trim().eq_ignore_ascii_case("auto") {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key; unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "theta" => self.theta = parse_angle(v)?,
            "formulation" => self.formulation = v.parse()?,
            "length" => self.length = parse_num(key, v)?,
            "level" => self.level = parse_num(key, v)?,
            "degree" => self.degree = parse_num(key, v)?,
            "quad_degree" => self.quad_degree = auto(key, v)?,
            "nodes" => {
                self.nodes = match v.to_ascii_lowercase().as_str() {
                    "lobatto" | "gauss-lobatto" => NodeFamily::GaussLobatto,
                    "equispaced" => NodeFamily::Equispaced,
                    _ => return Err(Error::Config(format!("nodes: unknown family '{v}'"))),
                }
            }
            "nval" => self.nval = parse_num(key, v)?,
            "nsub" => self.nsub = parse_num(key, v)?,
            "eps" => self.eps = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "max_iterations" => self.max_iterations = parse_num(key, v)?,
            "strategy" => {
                self.strategy = match v.to_ascii_lowercase().as_str() {
                    "inverted" => Strategy::Inverted,
                    "direct" => Strategy::Direct,
                    _ => return Err(Error::Config(format!("strategy: unknown value '{v}'"))),
                }
            }
            "thetas" => self.thetas = parse_list(v, parse_angle)?,
            "levels" => self.levels = parse_list(v, |s| parse_num("levels", s))?,
            "degrees" => self.degrees = parse_list(v, |s| parse_num("degrees", s))?,
            "cert_n" => self.cert_n = auto(key, v)?,
            "modes" => self.modes = parse_num(key, v)?,
            "margin" => self.margin = parse_num(key, v)?,
            "slices" => self.slices = parse_num(key, v)?,
            "grid_nx" => self.grid_nx = parse_num(key, v)?,
            "grid_ny" => self.grid_ny = parse_num(key, v)?,
            "mode" => self.mode = parse_num(key, v)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines over the defaults; `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            cfg.set(k, v).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", n + 1)),
                other => Error::Config(format!("line {}: {other}", n + 1)),
            })?;
        }
        Ok(cfg)
    }

    /// Every key, in schema order; reading the text back reproduces the configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let q = |x: &Option<usize>| x.map(|n| n.to_string()).unwrap_or_else(|| "auto".into());
        let entries = [
            ("theta", format!("{:?}", self.theta)),
            ("formulation", self.formulation.as_str().to_string()),
            ("length", self.length.to_string()),
            ("level", self.level.to_string()),
            ("degree", self.degree.to_string()),
            ("quad_degree", q(&self.quad_degree)),
            ("nodes", match self.nodes {
                NodeFamily::GaussLobatto => "lobatto".into(),
                NodeFamily::Equispaced => "equispaced".into(),
            }),
            ("nval", self.nval.to_string()),
            ("nsub", self.nsub.to_string()),
            ("eps", format!("{:?}", self.eps)),
            ("seed", self.seed.to_string()),
            ("max_iterations", self.max_iterations.to_string()),
            ("strategy", match self.strategy {
                Strategy::Inverted => "inverted".into(),
                Strategy::Direct => "direct".into(),
            }),
            ("thetas", join(&self.thetas, |t| format!("{t:?}"))),
            ("levels", join(&self.levels, |l| l.to_string())),
            ("degrees", join(&self.degrees, |d| d.to_string())),
            ("cert_n", q(&self.cert_n)),
            ("modes", self.modes.to_string()),
            ("margin", format!("{:?}", self.margin)),
            ("slices", self.slices.to_string()),
            ("grid_nx", self.grid_nx.to_string()),
            ("grid_ny", self.grid_ny.to_string()),
            ("mode", self.mode.to_string()),
        ];
        for (k, v) in entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn guide(&self) -> Result<GuideConfig> {
        Ok(GuideConfig { spec: self.domain()?, fem: self.fem(), solver: self.solver() })
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        check_angle(self.theta)?;
        DomainSpec::new(self.formulation, self.theta, self.length)
    }

    pub fn domain_at(&self, theta: f64) -> Result<DomainSpec> {
        DomainSpec::new(self.formulation, theta, self.length)
    }

    pub fn fem(&self) -> FemParams {
        FemParams { level: self.level, degree: self.degree, quad_degree: self.quad_degree, family: self.nodes }
    }

    pub fn solver(&self) -> SolverParams {
        SolverParams {
            n_val: self.nval,
            n_sub: self.nsub,
            tolerance: self.eps,
            max_iterations: self.max_iterations,
            seed: self.seed,
            strategy: self.strategy,
        }
    }
}
