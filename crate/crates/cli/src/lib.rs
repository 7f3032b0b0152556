//! Experiment drivers behind the `bemalg` command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bemalg::calderon::{Recipe, Side};
use bemalg::mesh::{load_msh, make_cube, make_sphere, SurfaceMesh};
use bemalg::quadrature::QuadratureOrders;
use bemalg::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

pub mod calderon;
pub mod dirichlet;
pub mod fig1;
pub mod hyp_bench;
pub mod transmission;

#[derive(Debug, Clone, Parser)]
#[command(name = "bemalg", version, about = "Boundary element experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: RunConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// First-kind Dirichlet problem, plain and operator-preconditioned.
    Dirichlet,
    /// Three assembly routes for the hypersingular operator.
    HypBench,
    /// Idempotency and spectrum of a Calderón projector.
    Calderon,
    /// Calderón-preconditioned acoustic transmission problem.
    Transmission,
    /// Single layer of a constant, then the hypersingular operator of that.
    Fig1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sphere,
    Cube,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Spaces {
    Dual,
    P1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProjectorSide {
    Interior,
    Exterior,
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunConfig {
    #[arg(long, value_enum, global = true, default_value = "cube")]
    pub shape: Shape,
    /// Sphere refinement level; repeat for a refinement study.
    #[arg(long = "level", global = true)]
    pub levels: Vec<usize>,
    /// Cube element size; repeat for a refinement study.
    #[arg(long = "h", global = true)]
    pub hs: Vec<f64>,
    #[arg(long, global = true)]
    pub mesh: Option<PathBuf>,
    /// Wavenumber; defaults depend on the command.
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Refractive index of the interior.
    #[arg(long, global = true, default_value_t = 0.8)]
    pub n: f64,
    /// Relative GMRES residual; defaults depend on the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Regular and singular quadrature order.
    #[arg(long, global = true)]
    pub quad_order: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub use_strong_form: bool,
    #[arg(long, value_enum, global = true, default_value = "dual")]
    pub spaces: Spaces,
    /// Projector studied by `calderon`.
    #[arg(long, value_enum, global = true, default_value = "exterior")]
    pub side: ProjectorSide,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            shape: Shape::Cube,
            levels: Vec::new(),
            hs: Vec::new(),
            mesh: None,
            k: None,
            n: 0.8,
            tol: None,
            quad_order: None,
            out: PathBuf::from("out"),
            use_strong_form: false,
            spaces: Spaces::Dual,
            side: ProjectorSide::Exterior,
        }
    }
}

/// A mesh with the label used in reports.
#[derive(Debug, Clone)]
pub struct LabelledMesh {
    pub label: String,
    pub mesh: Arc<SurfaceMesh>,
}

impl RunConfig {
    pub fn sphere(levels: &[usize]) -> Self {
        RunConfig { shape: Shape::Sphere, levels: levels.to_vec(), ..Default::default() }
    }

    pub fn cube(hs: &[f64]) -> Self {
        RunConfig { shape: Shape::Cube, hs: hs.to_vec(), ..Default::default() }
    }

    /// Checks values that do not need a mesh.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self.shape {
            Shape::Sphere if self.levels.is_empty() => return bad("--shape sphere needs at least one --level".into()),
            Shape::Cube if self.hs.is_empty() => return bad("--shape cube needs at least one --h".into()),
            Shape::File if self.mesh.is_none() => return bad("--shape file needs --mesh".into()),
            _ => {}
        }
        if let Some(&h) = self.hs.iter().find(|h| !(**h > 0.0 && **h <= 1.0)) {
            return bad(format!("--h {h} must lie in (0, 1]"));
        }
        if let Some(k) = self.k {
            if !(k >= 0.0 && k.is_finite()) {
                return bad(format!("--k {k} must be finite and non-negative"));
            }
        }
        if !(self.n > 0.0 && self.n.is_finite()) {
            return bad(format!("--n {} must be positive", self.n));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("--tol {t} must lie in (0, 1)"));
            }
        }
        if let Some(q) = self.quad_order {
            if q == 0 {
                return bad("--quad-order must be positive".into());
            }
        }
        Ok(())
    }

    pub fn meshes(&self) -> Result<Vec<LabelledMesh>> {
        self.validate()?;
        let wrap = |label: String, m: SurfaceMesh| LabelledMesh { label, mesh: Arc::new(m) };
        match self.shape {
            Shape::Sphere => self.levels.iter().map(|&l| Ok(wrap(format!("sphere level {l}"), make_sphere(l)?))).collect(),
            Shape::Cube => self.hs.iter().map(|&h| Ok(wrap(format!("cube h={h}"), make_cube(h)?))).collect(),
            Shape::File => {
                let p = self.mesh.as_ref().unwrap();
                Ok(vec![wrap(p.display().to_string(), load_msh(p)?)])
            }
        }
    }

    pub fn orders(&self) -> QuadratureOrders {
        match self.quad_order {
            Some(q) => QuadratureOrders { regular: q, singular: q },
            None => QuadratureOrders::default(),
        }
    }

    pub fn recipe(&self) -> Recipe {
        match self.spaces {
            Spaces::Dual => Recipe::Dual,
            Spaces::P1 => Recipe::P1,
        }
    }

    pub fn projector_side(&self) -> Side {
        match self.side {
            ProjectorSide::Interior => Side::Interior,
            ProjectorSide::Exterior => Side::Exterior,
        }
    }
}

/// A named pass/fail check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

/// A CSV table: header and rows of preformatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shortest round-trip formatting.
pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Human summary, checks and CSV tables of one run.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub title: String,
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub tables: Vec<(String, Table)>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report { title: title.to_string(), ..Default::default() }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn table(&mut self, file: &str, t: Table) {
        self.tables.push((file.to_string(), t));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut s = format!("{}\n\n", self.title);
        for l in &self.lines {
            let _ = writeln!(s, "{l}");
        }
        if !self.checks.is_empty() {
            let _ = writeln!(s, "\nchecks:");
            for c in &self.checks {
                let _ = writeln!(s, "  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
        }
        s
    }

    /// Writes `report.txt` and every table into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let io = |e: std::io::Error, p: &Path| Error::Io { path: p.display().to_string(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(|e| io(e, dir))?;
        let p = dir.join("report.txt");
        fs::write(&p, self.render()).map_err(|e| io(e, &p))?;
        for (name, t) in &self.tables {
            let p = dir.join(name);
            fs::write(&p, t.to_csv()).map_err(|e| io(e, &p))?;
        }
        Ok(())
    }
}

/// Runs one command and returns its report.
pub fn run(command: Command, config: &RunConfig) -> Result<Report> {
    config.validate()?;
    match command {
        Command::Dirichlet => Ok(dirichlet::run(config)?.report),
        Command::HypBench => Ok(hyp_bench::run(config)?.report),
        Command::Calderon => Ok(calderon::run(config)?.report),
        Command::Transmission => Ok(transmission::run(config)?.report),
        Command::Fig1 => Ok(fig1::run(config)?.report),
    }
}

/// Relative Euclidean distance `|a - b| / |b|`.
pub fn relative_difference(a: &[bemalg::c64], b: &[bemalg::c64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let n: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (d / n).sqrt()
}
