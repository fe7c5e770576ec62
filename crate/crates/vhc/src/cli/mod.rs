//! The `vhc` command line. Every command writes a JSON report (to `--out`
//! or stdout), optional CSV data (`--csv`), and a short summary on stderr.
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure.

mod report;
mod svg;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{classify, AnalysisError, ClassifyOptions, Kind, PairOptions, VirtualPair};
use crate::dynamics::{
    self, classify_orbit, limit_cycle, DynamicsError, IntegrateOptions, LimitCycle, LimitCycleOptions, OrbitThresholds,
    PortraitOptions,
};
use crate::lagrangian::{energy, synthesize};
use crate::model::{Model, ModelError};
use crate::reduction::{FullModel, ReducedDynamics, ReductionError, SimulateOptions, Topology};
use crate::xform::{conservative_form, transform, CircleDiffeo, XformError, XformOptions};

pub use report::SCHEMA;
use report::{LimitCycleBlock, PairSummary, Report, ReducedEcho, Tolerances, TrackingBlock, TrajectoryReport, TransformBlock};

#[derive(Debug)]
pub enum Failure {
    /// Unreadable, malformed or invalid input (exit 2).
    Input(String),
    /// A computation failed (exit 3).
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Reduction(r) => r.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Integration { .. } | ReductionError::SingularDecouplingAt { .. } | ReductionError::SingularMass => {
                Failure::Numerical(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Options(_) => Failure::Input(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<DynamicsError> for Failure {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Hypotheses(_) | DynamicsError::Options(_) => Failure::Input(e.to_string()),
            DynamicsError::Analysis(a) => a.into(),
            DynamicsError::NegativeRadicand { .. } => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<XformError> for Failure {
    fn from(e: XformError) -> Self {
        match e {
            XformError::Analysis(a) => a.into(),
            other => Failure::Input(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "vhc", version, about = "Reduced dynamics under virtual holonomic constraints: classification, Lagrangians, orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the reduced dynamics (mechanical, EL, SEL or non-Lagrangian).
    Classify(Common),
    /// Print Ψ₁, Ψ₂ and write them on a grid (CSV columns s, psi1, psi2).
    Reduce {
        #[command(flatten)]
        common: Common,
        /// Number of CSV grid points.
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Integrate one trajectory (CSV columns t, s, sdot, x, xdot, E0).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        v0: f64,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        /// Uniform output samples.
        #[arg(long, default_value_t = 2048)]
        samples: usize,
        /// Also run the closed-loop full model from q = σ(x0), q̇ = σ′(x0)·v0
        /// and report how closely it tracks the reduced trajectory.
        #[arg(long)]
        full: bool,
        /// Feedback gains for --full (default 4, 4).
        #[arg(long)]
        k1: Option<f64>,
        #[arg(long)]
        k2: Option<f64>,
    },
    /// Phase portrait over a grid of initial conditions.
    Portrait {
        #[command(flatten)]
        common: Common,
        /// Grid size as KxM (K positions, M velocities).
        #[arg(long, default_value = "20x20")]
        grid: String,
        #[arg(long, default_value_t = 60.0)]
        horizon: f64,
        /// Position range "lo,hi" (default: one period, or the line window).
        #[arg(long, allow_hyphen_values = true)]
        s_range: Option<String>,
        /// Velocity range "lo,hi".
        #[arg(long, default_value = "-3,3", allow_hyphen_values = true)]
        sdot_range: String,
        /// Write an SVG figure here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compute the limit cycle ṡ = ν(s) (CSV columns s, nu, nu_prime).
    #[command(name = "limit-cycle")]
    LimitCycle {
        #[command(flatten)]
        common: Common,
        /// Initial state of the transient used for the rate fit.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        v0: f64,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
    },
    /// Change coordinates by a circle diffeomorphism (CSV columns y, psi1, psi2).
    Transform {
        #[command(flatten)]
        common: Common,
        /// Use the map to the conservative normal form (M̃ ≡ 1, Ψ₂ ≡ 0).
        #[arg(long, conflicts_with = "phi")]
        to_conservative: bool,
        /// Lift of the map as an expression in s.
        #[arg(long, required_unless_present = "to_conservative")]
        phi: Option<String>,
        /// Closed-form inverse of --phi, if known.
        #[arg(long, requires = "phi")]
        phi_inverse: Option<String>,
        /// Target period T2 (number or expression; default: the model period).
        #[arg(long)]
        period: Option<String>,
        /// Write φ̃ on the source grid here (columns x, phi, dphi).
        #[arg(long)]
        phi_csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Model file (TOML with a [reduced] or [full] section).
    model: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write CSV data here.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    num: Numeric,
}

/// Numeric overrides; precedence is flag, then `[options]`, then default.
#[derive(Args, Debug, Clone, Copy)]
struct Numeric {
    /// Grid cells for M̃, Ṽ and sampled functions [default: 2048].
    #[arg(long)]
    n_grid: Option<usize>,
    /// Quadrature tolerance [default: 1e-10].
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Periodicity threshold for M̃(T) [default: 1e-6].
    #[arg(long)]
    eps_m: Option<f64>,
    /// Periodicity threshold for Ṽ(T), relative [default: 1e-6].
    #[arg(long)]
    eps_v: Option<f64>,
    /// Integrator relative tolerance [default: 1e-9].
    #[arg(long)]
    rtol: Option<f64>,
    /// Integrator absolute tolerance [default: 1e-11].
    #[arg(long)]
    atol: Option<f64>,
    /// Return closure tolerance on the cylinder [default: 1e-3].
    #[arg(long)]
    eps_close: Option<f64>,
    /// Equilibrium threshold on ‖(ẋ, ẍ)‖ [default: 1e-8].
    #[arg(long)]
    eps_eq: Option<f64>,
    /// Escape threshold factor on max(1, |ẋ₀|) [default: 10].
    #[arg(long)]
    escape_factor: Option<f64>,
    /// Half width of the grid window on a line [default: π].
    #[arg(long)]
    line_half_width: Option<f64>,
}

/// Fully resolved settings.
struct Settings {
    pair: PairOptions,
    classify: ClassifyOptions,
    integrate: IntegrateOptions,
    thresholds: OrbitThresholds,
    k1: f64,
    k2: f64,
}

impl Settings {
    fn resolve(num: &Numeric, model: &Model) -> Settings {
        let o = &model.options;
        let pd = PairOptions::default();
        let cd = ClassifyOptions::default();
        let id = IntegrateOptions::default();
        let td = OrbitThresholds::default();
        let sd = SimulateOptions::default();
        let eps_m = num.eps_m.or(o.eps_m).unwrap_or(cd.eps_m);
        Settings {
            pair: PairOptions {
                n: num.n_grid.or(o.grid).unwrap_or(pd.n),
                quad_tol: num.quad_tol.or(o.quad_tol).unwrap_or(pd.quad_tol),
                eps_m,
                line_half_width: num.line_half_width.or(o.line_half_width).unwrap_or(pd.line_half_width),
            },
            classify: ClassifyOptions { eps_m, eps_v: num.eps_v.or(o.eps_v).unwrap_or(cd.eps_v) },
            integrate: IntegrateOptions {
                rtol: num.rtol.or(o.rtol).unwrap_or(id.rtol),
                atol: num.atol.or(o.atol).unwrap_or(id.atol),
                ..id
            },
            thresholds: OrbitThresholds {
                eps_close: num.eps_close.or(o.eps_close).unwrap_or(td.eps_close),
                eps_eq: num.eps_eq.or(o.eps_eq).unwrap_or(td.eps_eq),
                escape_factor: num.escape_factor.or(o.escape_factor).unwrap_or(td.escape_factor),
            },
            k1: o.k1.unwrap_or(sd.k1),
            k2: o.k2.unwrap_or(sd.k2),
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            grid: self.pair.n,
            quad_tol: self.pair.quad_tol,
            eps_m: self.classify.eps_m,
            eps_v: self.classify.eps_v,
            rtol: self.integrate.rtol,
            atol: self.integrate.atol,
            eps_close: self.thresholds.eps_close,
            eps_eq: self.thresholds.eps_eq,
            escape_factor: self.thresholds.escape_factor,
        }
    }
}

struct Loaded {
    model: Model,
    rd: ReducedDynamics,
    settings: Settings,
}

fn load(common: &Common) -> Result<Loaded, Failure> {
    let model = Model::from_path(&common.model)?;
    let rd = model.reduced()?;
    let settings = Settings::resolve(&common.num, &model);
    Ok(Loaded { model, rd, settings })
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn emit_report(common: &Common, report: &Report) -> Result<(), Failure> {
    let json = report.to_json();
    match &common.out {
        Some(p) => write_file(p, &json),
        None => {
            let mut out = std::io::stdout().lock();
            // a closed pipe is not an error worth reporting
            let _ = out.write_all(json.as_bytes()).and_then(|_| out.flush());
            Ok(())
        }
    }
}

fn emit_csv(common: &Common, csv: &str) -> Result<(), Failure> {
    match &common.csv {
        Some(p) => write_file(p, csv),
        None => Ok(()),
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::Input(format!("{what} must look like \"lo,hi\" with lo < hi, got \"{s}\""));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::Input(format!("--grid must look like KxM with K, M >= 1, got \"{s}\""));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let k: usize = a.trim().parse().map_err(|_| bad())?;
    let m: usize = b.trim().parse().map_err(|_| bad())?;
    if k == 0 || m == 0 {
        return Err(bad());
    }
    Ok((k, m))
}

fn parse_number(s: &str, what: &str) -> Result<f64, Failure> {
    let e = crate::expr::Expr::parse(s, &[]).map_err(|e| Failure::Input(format!("{what}: {e}")))?;
    e.eval(&[]).map_err(|e| Failure::Input(format!("{what}: {e}")))
}

fn fmt(x: f64) -> String {
    format!("{x:e}")
}

/// The limit cycle when the dynamics are non-Lagrangian and satisfy its
/// sign hypotheses; otherwise the block records why not.
fn limit_cycle_block(rd: &ReducedDynamics, vp: &VirtualPair, opts: &LimitCycleOptions) -> (LimitCycleBlock, Option<LimitCycle>) {
    let hypotheses = crate::analysis::limit_cycle_hypotheses(rd, vp);
    let mut block = LimitCycleBlock { hypotheses, ..Default::default() };
    if !hypotheses {
        return (block, None);
    }
    match limit_cycle(rd, vp, opts) {
        Ok(lc) => {
            block.residual_sup = Some(lc.residual_sup);
            block.seam_error = Some(lc.seam_error);
            block.nu_min = Some(lc.nu.iter().cloned().fold(f64::INFINITY, f64::min));
            block.nu_max = Some(lc.nu.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            block.rate = lc.rate;
            (block, Some(lc))
        }
        Err(e) => {
            block.error = Some(e.to_string());
            (block, None)
        }
    }
}

fn default_lc_opts(settings: &Settings) -> LimitCycleOptions {
    let d = LimitCycleOptions::default();
    LimitCycleOptions { integrate: IntegrateOptions { rtol: settings.integrate.rtol.min(d.integrate.rtol), atol: settings.integrate.atol.min(d.integrate.atol), ..d.integrate }, ..d }
}

fn cmd_classify(common: &Common) -> Result<(), Failure> {
    let l = load(common)?;
    let vp = VirtualPair::new(&l.rd, &l.settings.pair)?;
    let cls = classify(&vp, &l.settings.classify);
    let mut report = Report::new("classify", &l.model, &l.rd, l.settings.tolerances());
    report.virtual_pair = Some(PairSummary::new(&vp));
    report.lagrangian = synthesize(&cls, &vp).ok().map(|h| h.descriptor());
    if cls.kind == Kind::NonLagrangian {
        report.limit_cycle = Some(limit_cycle_block(&l.rd, &vp, &default_lc_opts(&l.settings)).0);
    }
    eprintln!(
        "{}: {} (M(T) = {}, V(T) = {}, limit-cycle hypotheses: {})",
        common.model.display(),
        cls.kind.as_str(),
        fmt(vp.mt()),
        fmt(vp.vt()),
        cls.limit_cycle_hypotheses
    );
    report.classification = Some(cls);
    emit_report(common, &report)
}

fn grid_points(rd: &ReducedDynamics, n: usize, settings: &Settings) -> Vec<f64> {
    match rd.topology() {
        Topology::Circle { period } => (0..n).map(|k| period * k as f64 / n as f64).collect(),
        Topology::Line => {
            let w = settings.pair.line_half_width;
            (0..n).map(|k| -w + 2.0 * w * k as f64 / (n.max(2) - 1) as f64).collect()
        }
    }
}

fn cmd_reduce(common: &Common, points: usize) -> Result<(), Failure> {
    if points == 0 {
        return Err(Failure::Input("--points must be positive".into()));
    }
    let l = load(common)?;
    let report = Report::new("reduce", &l.model, &l.rd, l.settings.tolerances());
    let mut csv = String::from("s,psi1,psi2\n");
    for s in grid_points(&l.rd, points, &l.settings) {
        let (p1, p2) = (l.rd.psi1(s), l.rd.psi2(s));
        if !(p1.is_finite() && p2.is_finite()) {
            return Err(Failure::Numerical(format!("reduced dynamics not finite at s = {s}")));
        }
        let _ = writeln!(csv, "{s},{p1},{p2}");
    }
    eprintln!("psi1 = {}\npsi2 = {}", report.reduced.psi1, report.reduced.psi2);
    emit_csv(common, &csv)?;
    emit_report(common, &report)
}

fn tracking(full: &FullModel, rd: &ReducedDynamics, x0: f64, v0: f64, horizon: f64, settings: &Settings) -> Result<TrackingBlock, Failure> {
    let q0 = full.sigma(x0).map_err(|e| Failure::Numerical(e.to_string()))?;
    let dq0 = full.sigma_prime(x0).map_err(|e| Failure::Numerical(e.to_string()))? * v0;
    let opts = SimulateOptions { k1: settings.k1, k2: settings.k2, horizon, ..Default::default() };
    let tr = full.simulate_full(q0.as_slice(), dq0.as_slice(), &opts)?;
    let s = tr.projected_s(full)?;
    let red = dynamics::integrate(rd, x0, v0, horizon, &IntegrateOptions { rtol: 1e-11, atol: 1e-13, ..settings.integrate });
    if !red.completed() {
        return Err(Failure::Numerical(format!("reduced trajectory stopped early ({})", red.meta.termination)));
    }
    let mut sup: f64 = 0.0;
    for (smp, s) in tr.samples.iter().zip(&s) {
        if let Some((x, _)) = red.state_at(smp.t) {
            sup = sup.max((s - x).abs());
        }
    }
    Ok(TrackingBlock { k1: opts.k1, k2: opts.k2, horizon, sup_error: sup, max_constraint_error: tr.max_constraint_error() })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(common: &Common, x0: f64, v0: f64, horizon: f64, samples: usize, full: bool, k1: Option<f64>, k2: Option<f64>) -> Result<(), Failure> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Failure::Input("--horizon must be positive".into()));
    }
    let mut l = load(common)?;
    l.settings.integrate.samples = samples.max(2);
    l.settings.k1 = k1.unwrap_or(l.settings.k1);
    l.settings.k2 = k2.unwrap_or(l.settings.k2);
    let vp = VirtualPair::new(&l.rd, &l.settings.pair)?;
    let tr = dynamics::integrate(&l.rd, x0, v0, horizon, &l.settings.integrate);
    let class = classify_orbit(&tr, &l.settings.thresholds);
    let mut csv = String::from("t,s,sdot,x,xdot,E0\n");
    let e0 = energy(&vp, x0, v0);
    let mut drift: f64 = 0.0;
    for p in &tr.samples {
        let e = energy(&vp, p.x, p.xdot);
        drift = drift.max((e - e0).abs());
        let _ = writeln!(csv, "{},{},{},{},{},{}", p.t, tr.cylinder_s(p.x), p.xdot, p.x, p.xdot, e);
    }
    let mut report = Report::new("simulate", &l.model, &l.rd, l.settings.tolerances());
    report.virtual_pair = Some(PairSummary::new(&vp));
    let mut tr_report = TrajectoryReport::new(0, 0, x0, v0, &class, tr.meta);
    tr_report.energy_drift = Some(drift);
    report.trajectories.push(tr_report);
    if full {
        let fm = l.model.full_model()?;
        report.full_tracking = Some(tracking(&fm, &l.rd, x0, v0, horizon, &l.settings)?);
    }
    eprintln!("{}: {} over [0, {horizon}] ({})", common.model.display(), class.tag.as_str(), tr.meta.termination);
    emit_csv(common, &csv)?;
    emit_report(common, &report)
}

#[allow(clippy::too_many_arguments)]
fn cmd_portrait(common: &Common, grid: &str, horizon: f64, s_range: Option<&str>, sdot_range: &str, svg_path: Option<&Path>) -> Result<(), Failure> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Failure::Input("--horizon must be positive".into()));
    }
    let grid = parse_grid(grid)?;
    let sdot_range = parse_pair(sdot_range, "--sdot-range")?;
    let l = load(common)?;
    let s_range = match s_range {
        Some(s) => parse_pair(s, "--s-range")?,
        None => match l.rd.period() {
            Some(t) => (0.0, t),
            None => (-l.settings.pair.line_half_width, l.settings.pair.line_half_width),
        },
    };
    let opts = PortraitOptions { s_range, sdot_range, grid, horizon, integrate: l.settings.integrate, thresholds: l.settings.thresholds };
    let entries = dynamics::portrait(&l.rd, &opts);
    let mut report = Report::new("portrait", &l.model, &l.rd, l.settings.tolerances());
    let mut overlay = None;
    if l.rd.period().is_some() {
        let vp = VirtualPair::new(&l.rd, &l.settings.pair)?;
        let cls = classify(&vp, &l.settings.classify);
        if cls.kind == Kind::NonLagrangian {
            let (block, lc) = limit_cycle_block(&l.rd, &vp, &default_lc_opts(&l.settings));
            report.limit_cycle = Some(block);
            overlay = lc.map(|lc| lc.xs.iter().copied().zip(lc.nu.iter().copied()).collect::<Vec<_>>());
        }
        report.virtual_pair = Some(PairSummary::new(&vp));
        report.classification = Some(cls);
    }
    let mut csv = String::from("i,j,s0,sdot0,tag,returns,closure_error,net_winding,sign_changes,terminal_speed,termination\n");
    for e in &entries {
        let d = &e.class.diagnostics;
        let opt = |x: Option<String>| x.unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            e.i,
            e.j,
            e.s0,
            e.sdot0,
            e.class.tag.as_str(),
            d.returns,
            opt(d.closure_error.map(|x| x.to_string())),
            opt(d.net_winding.map(|x| x.to_string())),
            d.sign_changes_total,
            d.terminal_speed,
            e.trajectory.meta.termination
        );
        *report.verdicts.entry(e.class.tag.as_str()).or_default() += 1;
        report.trajectories.push(TrajectoryReport::new(e.i, e.j, e.s0, e.sdot0, &e.class, e.trajectory.meta));
    }
    if let Some(p) = svg_path {
        write_file(p, &svg::portrait(&entries, l.rd.period(), s_range, sdot_range, overlay.as_deref()))?;
    }
    let counts: Vec<String> = report.verdicts.iter().map(|(k, v)| format!("{k} {v}")).collect();
    eprintln!("{}: {} trajectories: {}", common.model.display(), entries.len(), counts.join(", "));
    emit_csv(common, &csv)?;
    emit_report(common, &report)
}

fn cmd_limit_cycle(common: &Common, x0: f64, v0: f64, horizon: f64) -> Result<(), Failure> {
    let l = load(common)?;
    let vp = VirtualPair::new(&l.rd, &l.settings.pair)?;
    let cls = classify(&vp, &l.settings.classify);
    if cls.kind != Kind::NonLagrangian {
        return Err(Failure::Input(format!("dynamics are {}; limit cycles require non-Lagrangian dynamics", cls.kind.as_str())));
    }
    let opts = LimitCycleOptions { transient: (x0, v0), horizon, ..default_lc_opts(&l.settings) };
    let lc = limit_cycle(&l.rd, &vp, &opts)?;
    let mut csv = String::from("s,nu,nu_prime\n");
    for k in 0..lc.xs.len() {
        let _ = writeln!(csv, "{},{},{}", lc.xs[k], lc.nu[k], lc.nu_prime[k]);
    }
    let mut report = Report::new("limit-cycle", &l.model, &l.rd, l.settings.tolerances());
    report.virtual_pair = Some(PairSummary::new(&vp));
    report.limit_cycle = Some(LimitCycleBlock {
        hypotheses: true,
        residual_sup: Some(lc.residual_sup),
        seam_error: Some(lc.seam_error),
        nu_min: Some(lc.nu.iter().cloned().fold(f64::INFINITY, f64::min)),
        nu_max: Some(lc.nu.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        rate: lc.rate,
        error: None,
    });
    report.classification = Some(cls);
    eprintln!(
        "{}: residual {} seam {} rate {}",
        common.model.display(),
        fmt(lc.residual_sup),
        fmt(lc.seam_error),
        lc.rate.map_or("n/a".to_string(), |r| format!("{} (R^2 {})", r.rate, r.r2))
    );
    emit_csv(common, &csv)?;
    emit_report(common, &report)
}

fn cmd_transform(
    common: &Common,
    to_conservative: bool,
    phi: Option<&str>,
    phi_inverse: Option<&str>,
    period: Option<&str>,
    phi_csv: Option<&Path>,
) -> Result<(), Failure> {
    let l = load(common)?;
    let Some(t1) = l.rd.period() else {
        return Err(Failure::Input("transform requires circle topology".into()));
    };
    let t2 = match period {
        Some(p) => parse_number(p, "--period")?,
        None => t1,
    };
    let xopts = XformOptions { n: l.settings.pair.n };
    let vp1 = VirtualPair::new(&l.rd, &l.settings.pair)?;
    let (rd2, d, mode) = if to_conservative {
        let (rd2, d) = conservative_form(&l.rd, &vp1, t2, &xopts)?;
        (rd2, d, "conservative")
    } else {
        let d = CircleDiffeo::from_expr(phi.expect("clap enforces --phi"), phi_inverse, t1, t2)?;
        (transform(&l.rd, &d, &xopts)?, d, "map")
    };
    let vp2 = VirtualPair::new(&rd2, &l.settings.pair)?;
    let before = classify(&vp1, &l.settings.classify).kind;
    let after = classify(&vp2, &l.settings.classify).kind;
    let n = xopts.n;
    let mut csv = String::from("y,psi1,psi2\n");
    let mut psi2_sup: f64 = 0.0;
    for j in 0..n {
        let y = t2 * j as f64 / n as f64;
        let (p1, p2) = (rd2.psi1(y), rd2.psi2(y));
        psi2_sup = psi2_sup.max(p2.abs());
        let _ = writeln!(csv, "{y},{p1},{p2}");
    }
    let mass_dev = vp2.grid_m().iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
    if let Some(p) = phi_csv {
        let mut s = String::from("x,phi,dphi\n");
        for k in 0..=n {
            let x = t1 * k as f64 / n as f64;
            let _ = writeln!(s, "{x},{},{}", d.phi(x), d.dphi(x));
        }
        write_file(p, &s)?;
    }
    let mut report = Report::new("transform", &l.model, &l.rd, l.settings.tolerances());
    report.virtual_pair = Some(PairSummary::new(&vp1));
    report.transform = Some(TransformBlock {
        mode,
        t1,
        t2,
        degree: d.degree(),
        closed_form: d.is_closed_form(),
        transformed: ReducedEcho::new(&rd2),
        virtual_pair: PairSummary::new(&vp2),
        psi2_sup,
        mass_deviation_sup: mass_dev,
        kind_before: before,
        kind_after: after,
    });
    eprintln!(
        "{}: {mode} transform to period {t2}: {} -> {}; sup|psi2| = {}, sup|M - 1| = {}",
        common.model.display(),
        before.as_str(),
        after.as_str(),
        fmt(psi2_sup),
        fmt(mass_dev)
    );
    emit_csv(common, &csv)?;
    emit_report(common, &report)
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify(c) => cmd_classify(&c),
        Command::Reduce { common, points } => cmd_reduce(&common, points),
        Command::Simulate { common, x0, v0, horizon, samples, full, k1, k2 } => {
            cmd_simulate(&common, x0, v0, horizon, samples, full, k1, k2)
        }
        Command::Portrait { common, grid, horizon, s_range, sdot_range, svg } => {
            cmd_portrait(&common, &grid, horizon, s_range.as_deref(), &sdot_range, svg.as_deref())
        }
        Command::LimitCycle { common, x0, v0, horizon } => cmd_limit_cycle(&common, x0, v0, horizon),
        Command::Transform { common, to_conservative, phi, phi_inverse, period, phi_csv } => {
            cmd_transform(&common, to_conservative, phi.as_deref(), phi_inverse.as_deref(), period.as_deref(), phi_csv.as_deref())
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("vhc: error: {}", f.message());
            f.code()
        }
    }
}
