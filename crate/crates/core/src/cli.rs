//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 input or assumption error, 3 negative verdict, 4 internal error.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::criteria::{transport_cycle, Criterion, CriterionError, Evaluation};
use crate::field::{Field, FieldKind, Mod2, Rational};
use crate::geometry::{ConvexPolygon, Point};
use crate::homology::ChainJson;
use crate::optcycle::lp::LpError;
use crate::optcycle::{minimal_coverage_cycle, CycleJson, FenceCost, L1Problem, OptError};
use crate::oracle::grid_coverage_check;
use crate::rips::RipsError;
use crate::scenario::{
    fence_sensors, generate_perturbation, generate_scenario, Perturbation, Radii, Scenario, SensorLayout,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NEGATIVE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

pub const DEFAULT_GRID_STEP: f64 = 0.02;

#[derive(Debug, Parser)]
#[command(name = "ripscover", version, about = "Homological coverage checks for planar sensor networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a scenario JSON.
    Generate(GenerateArgs),
    /// Evaluate the coverage criterion on a scenario.
    Check(CheckArgs),
    /// Draw a random admissible perturbation.
    Perturb(PerturbArgs),
    /// Grid-oracle coverage check of sensor positions.
    Verify(VerifyArgs),
    /// Transport the witness through a perturbation and minimize it.
    Optimize(OptimizeArgs),
    /// Draw a scenario as SVG.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// `square` or a JSON file with `{"vertices":[[x,y],...]}`.
    #[arg(long, default_value = "square")]
    pub domain: String,
    /// Side length of the square domain.
    #[arg(long, default_value_t = 1.0)]
    pub side: f64,
    /// `N` uniform random sensors or `grid:hex:SPACING`.
    #[arg(long)]
    pub sensors: SensorLayout,
    #[arg(long, default_value_t = 1.0)]
    pub rs: f64,
    /// Defaults to r_s/√2.
    #[arg(long)]
    pub rc: Option<f64>,
    /// Defaults to r_s·√10.
    #[arg(long)]
    pub rw: Option<f64>,
    #[arg(long, default_value_t = 0.15)]
    pub rf: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FieldArg {
    Rational,
    Mod2,
}

impl From<FieldArg> for FieldKind {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Rational => FieldKind::Rational,
            FieldArg::Mod2 => FieldKind::Mod2,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Raster step for A5 and the coverage oracle.
    #[arg(long, env = "RIPSCOVER_GRID_STEP", default_value_t = DEFAULT_GRID_STEP)]
    pub grid_step: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: Common,
    /// Use the perturbation-stable parameters.
    #[arg(long)]
    pub stable: bool,
    #[arg(long, value_enum, env = "RIPSCOVER_FIELD", default_value = "rational")]
    pub field: FieldArg,
    /// Verdict JSON; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Degree-2 barcode CSV.
    #[arg(long)]
    pub barcode: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub perturbation: Option<PathBuf>,
    /// Cycle JSON from `optimize`; only its active sensors are checked.
    #[arg(long)]
    pub active: Option<PathBuf>,
    /// Uncovered cell centers as CSV.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FenceCostArg {
    Charged,
    Free,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub perturbation: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cost of slack on fence simplices.
    #[arg(long, value_enum, default_value = "charged")]
    pub fence_cost: FenceCostArg,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub perturbation: Option<PathBuf>,
    /// Cycle JSON from `optimize` or a bare chain JSON.
    #[arg(long)]
    pub cycle: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<CriterionError> for Failure {
    fn from(e: CriterionError) -> Self {
        match e {
            CriterionError::AssumptionFailure(_)
            | CriterionError::BadPerturbation { .. }
            | CriterionError::Scenario(_)
            | CriterionError::Rips(RipsError::CombinatorialBlowup { .. }) => Failure::Input(e.to_string()),
            e => Failure::Internal(e.to_string()),
        }
    }
}

impl From<OptError> for Failure {
    fn from(e: OptError) -> Self {
        match e {
            OptError::Lp(LpError::TooLarge { .. }) => Failure::Input(e.to_string()),
            e => Failure::Internal(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

pub fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_json(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

pub fn load_perturbation(path: &Path) -> Result<Perturbation, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn generate(a: &GenerateArgs) -> Outcome {
    let domain = if a.domain == "square" {
        ConvexPolygon::square(a.side)
    } else {
        serde_json::from_str(&read(Path::new(&a.domain))?).map_err(|e| Failure::Input(format!("{}: {e}", a.domain)))?
    };
    let tight = Radii::tight(a.rs, a.rf);
    let radii = Radii { r_c: a.rc.unwrap_or(tight.r_c), r_w: a.rw.unwrap_or(tight.r_w), ..tight };
    let s = generate_scenario(domain, a.sensors, radii, a.epsilon, a.seed).map_err(|e| Failure::Input(e.to_string()))?;
    emit(a.out.as_deref(), &s.to_json())?;
    Ok(EXIT_OK)
}

fn check<F: Field>(a: &CheckArgs) -> Outcome {
    let s = load_scenario(&a.common.scenario)?;
    let crit = if a.stable { Criterion::Stable } else { Criterion::Dsg };
    let ev = Evaluation::<F>::prepare(&s, a.common.grid_step)?;
    let v = ev.verdict(crit, &s)?;
    let barcode_path = match &a.barcode {
        Some(p) => {
            fs::write(p, ev.persistence.barcode().to_csv()).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            Some(p.display().to_string())
        }
        None => None,
    };
    emit(a.out.as_deref(), &to_json(&v.to_json(&ev.complex, barcode_path)))?;
    Ok(if v.holds { EXIT_OK } else { EXIT_NEGATIVE })
}

fn perturb(a: &PerturbArgs) -> Outcome {
    let s = load_scenario(&a.scenario)?;
    emit(a.out.as_deref(), &to_json(&generate_perturbation(&s, a.seed)))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct VerifyReport {
    covered: bool,
    cells: usize,
    uncovered: usize,
    step: f64,
    sensors_checked: usize,
}

fn positions(s: &Scenario, p: Option<&Path>) -> Result<Vec<Point>, Failure> {
    match p {
        Some(path) => {
            let pert = load_perturbation(path)?;
            if pert.targets.len() != s.len() {
                return Err(Failure::Input(format!("perturbation has {} targets for {} sensors", pert.targets.len(), s.len())));
            }
            Ok(pert.targets)
        }
        None => Ok(s.sensors().to_vec()),
    }
}

fn verify(a: &VerifyArgs) -> Outcome {
    let s = load_scenario(&a.common.scenario)?;
    let mut pts = positions(&s, a.perturbation.as_deref())?;
    if let Some(path) = &a.active {
        let c: CycleJson = serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        if let Some(&i) = c.active_sensors.iter().find(|&&i| i >= pts.len()) {
            return Err(Failure::Input(format!("active sensor {i} out of range")));
        }
        pts = c.active_sensors.iter().map(|&i| pts[i]).collect();
    }
    let rep = grid_coverage_check(&pts, s.radii().r_c, &s, a.common.grid_step).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(w) = &a.witness {
        fs::write(w, rep.witness_csv()).map_err(|e| Failure::Input(format!("{}: {e}", w.display())))?;
    }
    let out = VerifyReport {
        covered: rep.covered(),
        cells: rep.cells,
        uncovered: rep.uncovered.len(),
        step: rep.step,
        sensors_checked: pts.len(),
    };
    println!("{}", to_json(&out));
    Ok(if out.covered { EXIT_OK } else { EXIT_NEGATIVE })
}

/// Relative tolerance between the exact and floating-point LP optima.
pub const LP_CROSS_CHECK_TOL: f64 = 1e-9;

fn optimize(a: &OptimizeArgs) -> Outcome {
    let s = load_scenario(&a.common.scenario)?;
    let p = load_perturbation(&a.perturbation)?;
    let step = a.common.grid_step;
    let ev = Evaluation::<Rational>::prepare(&s, step)?;
    let v = ev.verdict(Criterion::Stable, &s)?;
    let Some(w) = v.witness else {
        eprintln!("stable criterion fails at s = {}, w = {}", v.s, v.w);
        return Ok(EXIT_NEGATIVE);
    };
    let t = transport_cycle(&ev, &s, &w.cycle, &p, step)?;
    let k = &t.evaluation.complex;
    let r = s.radii();
    let cost = match a.fence_cost {
        FenceCostArg::Charged => FenceCost::Charged,
        FenceCostArg::Free => FenceCost::Free,
    };
    let (sol, cov) = minimal_coverage_cycle(k, &t.chain, r.r_s, r.r_c, cost)?;
    if sol.l1_norm > sol.input_norm {
        return Err(Failure::Internal(format!("optimum {} exceeds input norm {}", sol.l1_norm, sol.input_norm)));
    }
    let approx = L1Problem::relative(k, &t.chain, r.r_s, cost)?.solve_f64(k)?;
    let exact = sol.l1_norm.to_f64();
    if (approx - exact).abs() > LP_CROSS_CHECK_TOL * (1.0 + exact.abs()) {
        return Err(Failure::Internal(format!("floating-point optimum {approx} disagrees with exact {exact}")));
    }
    let active: Vec<Point> = cov.active.iter().map(|&i| p.targets[i]).collect();
    let rep = grid_coverage_check(&active, r.r_c, &s, step).map_err(|e| Failure::Input(e.to_string()))?;
    if !rep.covered() {
        return Err(Failure::Internal(format!("{} restricted-domain cells uncovered by the optimal cycle", rep.uncovered.len())));
    }
    let json = CycleJson::new(k, &sol, &cov, s.len());
    emit(a.out.as_deref(), &to_json(&json))?;
    eprintln!(
        "l1 norm {} (input {}), {} active, {} deactivated",
        sol.l1_norm,
        sol.input_norm,
        json.active_sensors.len(),
        json.deactivated.len()
    );
    Ok(EXIT_OK)
}

fn load_chain(path: &Path) -> Result<ChainJson, Failure> {
    let text = read(path)?;
    if let Ok(c) = serde_json::from_str::<CycleJson>(&text) {
        return Ok(c.chain);
    }
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

const SVG_SIZE: f64 = 800.0;

/// SVG with layers `domain`, `balls`, `edges`, `arrows`, `cycle`, `sensors`.
pub fn render_svg(s: &Scenario, targets: Option<&[Point]>, cycle: Option<&ChainJson>) -> String {
    let (lo, hi) = s.domain().bounding_box();
    let r = s.radii();
    let pad = r.r_c;
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]) + 2.0 * pad;
    let scale = SVG_SIZE / span;
    let tx = |p: Point| ((p[0] - lo[0] + pad) * scale, (hi[1] - p[1] + pad) * scale);
    let pts: Vec<Point> = targets.map_or_else(|| s.sensors().to_vec(), |t| t.to_vec());
    let fence: BTreeSet<usize> = fence_sensors(s);
    let mut o = String::new();
    let _ = writeln!(o, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">"#);
    let poly: Vec<String> = s.domain().vertices().iter().map(|&v| { let (x, y) = tx(v); format!("{x:.2},{y:.2}") }).collect();
    let _ = writeln!(o, r#"<g id="domain"><polygon points="{}" fill="none" stroke="black" stroke-width="2"/></g>"#, poly.join(" "));
    let _ = writeln!(o, r##"<g id="balls" fill="#9ecae1" fill-opacity="0.25" stroke="none">"##);
    for &p in &pts {
        let (x, y) = tx(p);
        let _ = writeln!(o, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}"/>"#, r.r_c * scale);
    }
    o.push_str("</g>\n");
    let _ = writeln!(o, r##"<g id="edges" stroke="#636363" stroke-width="0.6">"##);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if crate::geometry::dist(pts[i], pts[j]) <= r.r_s {
                let ((x1, y1), (x2, y2)) = (tx(pts[i]), tx(pts[j]));
                let _ = writeln!(o, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
            }
        }
    }
    o.push_str("</g>\n");
    if let Some(t) = targets {
        let _ = writeln!(o, r##"<g id="arrows" stroke="#e6550d" stroke-width="1.2">"##);
        for (&a, &b) in s.sensors().iter().zip(t) {
            if a != b {
                let ((x1, y1), (x2, y2)) = (tx(a), tx(b));
                let _ = writeln!(o, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
            }
        }
        o.push_str("</g>\n");
    }
    if let Some(c) = cycle.filter(|c| !c.terms.is_empty()) {
        let _ = writeln!(o, r##"<g id="cycle" fill="#fd8d3c" fill-opacity="0.45" stroke="#a63603" stroke-width="0.8">"##);
        for t in &c.terms {
            let vs: Vec<String> = t
                .simplex
                .iter()
                .filter(|&&v| v < pts.len())
                .map(|&v| { let (x, y) = tx(pts[v]); format!("{x:.2},{y:.2}") })
                .collect();
            let _ = writeln!(o, r#"<polygon points="{}"/>"#, vs.join(" "));
        }
        o.push_str("</g>\n");
    }
    o.push_str("<g id=\"sensors\">\n");
    for (i, &p) in pts.iter().enumerate() {
        let (x, y) = tx(p);
        let color = if fence.contains(&i) { "#cb181d" } else { "black" };
        let _ = writeln!(o, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
    }
    o.push_str("</g>\n</svg>\n");
    o
}

fn render(a: &RenderArgs) -> Outcome {
    let s = load_scenario(&a.scenario)?;
    let targets = match &a.perturbation {
        Some(p) => Some(positions(&s, Some(p))?),
        None => None,
    };
    let cycle = a.cycle.as_deref().map(load_chain).transpose()?;
    if let Some(c) = &cycle {
        if let Some(t) = c.terms.iter().find(|t| t.simplex.iter().any(|&v| v >= s.len())) {
            return Err(Failure::Input(format!("cycle simplex {:?} references a missing sensor", t.simplex)));
        }
    }
    let svg = render_svg(&s, targets.as_deref(), cycle.as_ref());
    fs::write(&a.out, svg).map_err(|e| Failure::Input(format!("{}: {e}", a.out.display())))?;
    Ok(EXIT_OK)
}

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Check(a) => match FieldKind::from(a.field) {
            FieldKind::Rational => check::<Rational>(a),
            FieldKind::Mod2 => check::<Mod2>(a),
        },
        Command::Perturb(a) => perturb(a),
        Command::Verify(a) => verify(a),
        Command::Optimize(a) => optimize(a),
        Command::Render(a) => render(a),
    }
}

/// Parses the process arguments, runs, and returns the exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            f.code()
        }
    }
}
