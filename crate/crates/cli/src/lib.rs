//! Command-line front end for `holling-bt`: one subcommand per analysis,
//! each writing a JSON report and optionally CSV tables or an SVG plot.
//!
//! Exit codes: 0 success, 1 analysis error, 2 usage or config error.

pub mod config;
pub mod report;
pub mod svg;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use holling_bt::bt::{bifurcation_curves, bt_locate_detailed, normal_form, LambdaBox};
use holling_bt::equilibria::{interior_equilibria_detailed, trivial_equilibria_with_tol};
use holling_bt::hopf::{hopf_scan_detailed, EqBranch};
use holling_bt::model::{validate, State, EQUILIBRIUM_TOL};
use holling_bt::sim::{bound_check, detect_limit_cycle, phase_portrait};
use holling_bt::stability::classify;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use config::{ConfigError, RunConfig};
use report::{fmt10, provenance, Cell, Report, Table};

#[derive(Debug, Parser)]
#[command(
    name = "holling-bt",
    version,
    about = "Equilibria, stability, Hopf and Bogdanov-Takens analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (TOML with dotted keys, or `.json`).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; the report goes to stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Integration tolerance, overriding the config.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomised initial conditions, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Trivial and interior equilibria with the harvesting region.
    Equilibria,
    /// Stability label of every equilibrium.
    Stability,
    /// Hopf points along an interior equilibrium branch in `delta`.
    Hopf,
    /// Bogdanov-Takens points in the `(h, delta)` plane.
    BtLocate,
    /// Normal-form coefficients at each Bogdanov-Takens point.
    BtNormalForm,
    /// Fold, Hopf and homoclinic curves in a `lambda` box.
    BtCurves,
    /// Trajectories from the configured seeds, optionally a cycle probe.
    Simulate,
    /// Region, equilibrium count and labels on an `(h, c)` grid.
    Sweep,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Stability => "stability",
            Command::Hopf => "hopf",
            Command::BtLocate => "bt-locate",
            Command::BtNormalForm => "bt-normal-form",
            Command::BtCurves => "bt-curves",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
        }
    }

    fn has_svg(&self) -> bool {
        matches!(self, Command::BtCurves | Command::Simulate | Command::Sweep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Analysis(#[from] holling_bt::Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Analysis(_) | CliError::Io { .. } => 1,
        }
    }
}

/// Everything a command produced, before it is written anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Report,
    pub tables: Vec<Table>,
    pub svg: Option<String>,
    /// Human-readable lines at 10 significant digits.
    pub summary: Vec<String>,
}

/// Parse `argv`, run the command and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            match &e {
                CliError::Usage(_) | CliError::Config(_) => eprintln!("usage error: {e}"),
                _ => eprintln!("error: {e}"),
            }
            e.exit_code()
        }
    }
}

/// Resolve the config with command-line overrides applied.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(t) = cli.tol {
        cfg.tol = t;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run and write the outputs; returns the lines to print on stdout.
pub fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    if cli.format == Format::Svg && !cli.command.has_svg() {
        return Err(CliError::Usage(format!(
            "--format svg is not available for `{}`",
            cli.command.name()
        )));
    }
    let cfg = resolve_config(cli)?;
    let out = compute(cli.command, &cfg)?;
    let name = cli.command.name();
    let Some(dir) = &cli.out else {
        return Ok(vec![match cli.format {
            Format::Json => out.report.to_json(),
            Format::Csv => out
                .tables
                .iter()
                .map(|t| t.to_csv(name, &cfg))
                .collect::<Vec<_>>()
                .join("\n"),
            Format::Svg => out.svg.unwrap_or_default(),
        }]);
    };
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = vec![write(dir, &format!("{name}.json"), &out.report.to_json())?];
    match cli.format {
        Format::Json => {}
        Format::Csv => {
            for t in &out.tables {
                written.push(write(dir, &t.file, &t.to_csv(name, &cfg))?);
            }
        }
        Format::Svg => {
            if let Some(s) = &out.svg {
                written.push(write(dir, &format!("{name}.svg"), s)?);
            }
        }
    }
    let mut lines = out.summary;
    lines.extend(written.iter().map(|p| format!("wrote {}", p.display())));
    Ok(lines)
}

fn write(dir: &Path, file: &str, text: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(file);
    std::fs::write(&path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(path)
}

/// Compute a command's results from a resolved config.
pub fn compute(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    let name = command.name();
    let (results, diagnostics, tables, svg, summary) = match command {
        Command::Equilibria => equilibria(cfg)?,
        Command::Stability => stability(cfg)?,
        Command::Hopf => hopf(cfg)?,
        Command::BtLocate => bt_locate_cmd(cfg)?,
        Command::BtNormalForm => bt_normal_form(cfg)?,
        Command::BtCurves => bt_curves(cfg)?,
        Command::Simulate => simulate(cfg)?,
        Command::Sweep => sweep_cmd(cfg)?,
    };
    Ok(Output {
        report: Report::new(name, cfg, results, diagnostics),
        tables,
        svg,
        summary,
    })
}

type Parts = (Value, Vec<String>, Vec<Table>, Option<String>, Vec<String>);

fn equilibria(cfg: &RunConfig) -> Result<Parts, CliError> {
    let p = validate(cfg.params.model()?)?;
    let trivial = trivial_equilibria_with_tol(&p, cfg.region_tol);
    let rep = interior_equilibria_detailed(&p, cfg.region_tol)?;
    let mut t = Table::new("equilibria.csv", vec!["kind", "source", "x", "y"]);
    let mut summary = vec![format!("region {}", rep.region)];
    for e in trivial.iter().chain(&rep.equilibria) {
        t.push(vec![
            format!("{:?}", e.kind).into(),
            e.source.as_str().into(),
            e.x.into(),
            e.y.into(),
        ]);
        summary.push(format!("{:<18} ({}, {})", e.source, fmt10(e.x), fmt10(e.y)));
    }
    let mut diagnostics = Vec::new();
    if rep.merged_tangencies > 0 {
        diagnostics.push(format!(
            "{} tangential root pair(s) merged",
            rep.merged_tangencies
        ));
    }
    let results = json!({
        "region": rep.region,
        "trivial": trivial,
        "interior": rep.equilibria,
        "quartic": rep.coeffs,
        "route": rep.route,
        "discarded": {
            "complex": rep.discarded_complex,
            "nonpositive": rep.discarded_nonpositive,
            "residual": rep.discarded_residual,
        },
    });
    Ok((results, diagnostics, vec![t], None, summary))
}

fn stability(cfg: &RunConfig) -> Result<Parts, CliError> {
    let p = validate(cfg.params.model()?)?;
    let trivial = trivial_equilibria_with_tol(&p, cfg.region_tol);
    let interior = interior_equilibria_detailed(&p, cfg.region_tol)?.equilibria;
    let mut t = Table::new(
        "stability.csv",
        vec![
            "kind", "source", "x", "y", "label", "trace", "det", "re1", "im1", "re2", "im2",
        ],
    );
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    let mut summary = Vec::new();
    for e in trivial.iter().chain(&interior) {
        match classify(&p, e) {
            Ok(r) => {
                let [l1, l2] = r.eigenvalues;
                t.push(vec![
                    format!("{:?}", e.kind).into(),
                    e.source.as_str().into(),
                    e.x.into(),
                    e.y.into(),
                    r.label.to_string().into(),
                    r.trace.into(),
                    r.det.into(),
                    l1.re.into(),
                    l1.im.into(),
                    l2.re.into(),
                    l2.im.into(),
                ]);
                summary.push(format!(
                    "{:<18} ({}, {}) {}",
                    e.source,
                    fmt10(e.x),
                    fmt10(e.y),
                    r.label
                ));
                entries.push(
                    json!({ "equilibrium": e, "label_text": r.label.to_string(), "report": r }),
                );
            }
            Err(err) => {
                diagnostics.push(format!("{}: {err}", e.source));
                entries.push(json!({ "equilibrium": e, "error": err.to_string() }));
            }
        }
    }
    Ok((
        json!({ "equilibria": entries }),
        diagnostics,
        vec![t],
        None,
        summary,
    ))
}

fn hopf(cfg: &RunConfig) -> Result<Parts, CliError> {
    let h = cfg.hopf.ok_or(ConfigError::Missing("hopf"))?;
    let mut ps = cfg.params;
    ps.delta.get_or_insert(h.delta_lo);
    let p = validate(ps.model()?)?;
    let branch = EqBranch {
        index: h.branch,
        delta_lo: h.delta_lo,
        delta_hi: h.delta_hi,
    };
    let (points, skipped) = hopf_scan_detailed(&p, &branch, h.samples)?;
    let mut diagnostics = skipped.clone();
    let mut t = Table::new(
        "hopf.csv",
        vec![
            "delta_h",
            "x",
            "y",
            "omega",
            "trace",
            "det",
            "l_printed",
            "l_numeric",
            "transversality",
            "transversality_branch",
            "printed_verdict",
            "cycle_verdict",
            "empirical_verdict",
        ],
    );
    let mut summary = Vec::new();
    for d in &points {
        diagnostics.extend(
            d.diagnostics
                .iter()
                .map(|s| format!("delta_h = {}: {s}", d.delta_h)),
        );
        t.push(vec![
            d.delta_h.into(),
            d.x.into(),
            d.y.into(),
            d.omega.into(),
            d.trace.into(),
            d.det.into(),
            d.l.into(),
            d.l_numeric.into(),
            d.transversality.into(),
            d.transversality_branch.into(),
            format!("{:?}", d.printed_verdict).into(),
            format!("{:?}", d.cycle_verdict).into(),
            format!("{:?}", d.empirical_verdict).into(),
        ]);
        summary.push(format!(
            "delta_h = {}  (x, y) = ({}, {})  omega = {}  l = {}  cycle {:?}",
            fmt10(d.delta_h),
            fmt10(d.x),
            fmt10(d.y),
            fmt10(d.omega),
            fmt10(d.l_numeric),
            d.empirical_verdict
        ));
    }
    if points.is_empty() {
        summary.push("no Hopf point on the branch".into());
    }
    Ok((
        json!({ "branch": branch, "points": points, "skipped": skipped }),
        diagnostics,
        vec![t],
        None,
        summary,
    ))
}

fn bt_locate_cmd(cfg: &RunConfig) -> Result<Parts, CliError> {
    let rep = bt_locate_detailed(&cfg.params.bt())?;
    let mut t = Table::new("bt_points.csv", vec!["x", "y", "h_bt", "delta_bt", "case"]);
    let mut summary = Vec::new();
    for pt in &rep.points {
        t.push(vec![
            pt.x.into(),
            pt.y.into(),
            pt.h_bt.into(),
            pt.delta_bt.into(),
            format!("{:?}", pt.case_tag).into(),
        ]);
        summary.push(format!(
            "h_bt = {}  delta_bt = {}  (x, y) = ({}, {})",
            fmt10(pt.h_bt),
            fmt10(pt.delta_bt),
            fmt10(pt.x),
            fmt10(pt.y)
        ));
    }
    let mut diagnostics = rep.diagnostics.clone();
    if rep.points.is_empty() {
        diagnostics.push("no admissible Bogdanov-Takens point".into());
    }
    let results = json!({
        "points": rep.points,
        // acceptance thresholds each point passed
        "tolerances": { "residual": EQUILIBRIUM_TOL, "trace": 1e-8, "det": 1e-8 },
    });
    Ok((results, diagnostics, vec![t], None, summary))
}

fn bt_normal_form(cfg: &RunConfig) -> Result<Parts, CliError> {
    let bp = cfg.params.bt();
    let rep = bt_locate_detailed(&bp)?;
    let mut diagnostics = rep.diagnostics.clone();
    let mut forms = Vec::new();
    let mut t = Table::new("normal_form.csv", vec!["point", "name", "value"]);
    let mut summary = Vec::new();
    for (i, pt) in rep.points.iter().enumerate() {
        let nf = normal_form(&bp, pt)?;
        diagnostics.extend(nf.diagnostics.iter().map(|d| format!("point {i}: {d}")));
        let bj = nf.beta_jacobian;
        for (name, v) in [
            ("g11", nf.g11_0),
            ("2A", 2.0 * nf.a0),
            ("s", nf.s as f64),
            ("s_product", nf.s_product),
            ("det_dbeta_dlambda", nf.beta_jacobian_det),
            ("dbeta1_dlambda1", bj[0][0]),
            ("dbeta1_dlambda2", bj[0][1]),
            ("dbeta2_dlambda1", bj[1][0]),
            ("dbeta2_dlambda2", bj[1][1]),
        ]
        .into_iter()
        .chain(nf.coeffs.named())
        {
            t.push(vec![i.into(), name.into(), v.into()]);
        }
        summary.push(format!(
            "point {i}: g11 = {}  2A = {}  s = {:+}  det = {}",
            fmt10(nf.g11_0),
            fmt10(2.0 * nf.a0),
            nf.s,
            fmt10(nf.beta_jacobian_det)
        ));
        forms.push(json!({ "point": pt, "normal_form": nf }));
    }
    Ok((
        json!({ "points": forms }),
        diagnostics,
        vec![t],
        None,
        summary,
    ))
}

fn bt_curves(cfg: &RunConfig) -> Result<Parts, CliError> {
    let c = cfg.curves.ok_or(ConfigError::Missing("curves"))?;
    let bp = cfg.params.bt();
    let rep = bt_locate_detailed(&bp)?;
    let pt = *rep.points.get(c.point).ok_or_else(|| {
        CliError::Usage(format!(
            "curves.point = {} but only {} BT point(s) exist",
            c.point,
            rep.points.len()
        ))
    })?;
    let nf = normal_form(&bp, &pt)?;
    let lambda_box = LambdaBox {
        l1_min: c.lambda1_min,
        l1_max: c.lambda1_max,
        l2_min: c.lambda2_min,
        l2_max: c.lambda2_max,
    };
    let set = bifurcation_curves(&nf, lambda_box, c.n);
    let mut t = Table::new(
        "curves.csv",
        vec!["curve", "lambda1", "lambda2", "beta1", "beta2"],
    );
    for (name, pts) in [("T", &set.t), ("H", &set.h), ("P", &set.p)] {
        for q in pts {
            t.push(vec![
                name.into(),
                q.lambda1.into(),
                q.lambda2.into(),
                q.beta1.into(),
                q.beta2.into(),
            ]);
        }
    }
    let summary = vec![format!(
        "BT point h = {}, delta = {}: {} T, {} H, {} P samples",
        fmt10(pt.h_bt),
        fmt10(pt.delta_bt),
        set.t.len(),
        set.h.len(),
        set.p.len()
    )];
    let svg = svg::curves(&set, &provenance("bt-curves", cfg, ""));
    let results = json!({ "point": pt, "s": nf.s, "curves": set });
    Ok((results, set.dropped.clone(), vec![t], Some(svg), summary))
}

fn simulate(cfg: &RunConfig) -> Result<Parts, CliError> {
    let s = cfg
        .simulate
        .as_ref()
        .ok_or(ConfigError::Missing("simulate"))?;
    let p = validate(cfg.params.model()?)?;
    let mut seeds: Vec<State> = s.seeds.iter().map(|v| State::new(v[0], v[1])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [x0, x1, y0, y1] = s.random_box;
    for _ in 0..s.random {
        seeds.push(State::new(
            x0 + (x1 - x0) * rng.gen::<f64>(),
            y0 + (y1 - y0) * rng.gen::<f64>(),
        ));
    }
    let trajs = phase_portrait(&p, &seeds, s.t_end, cfg.tol);
    let mut tables = Vec::new();
    let mut entries = Vec::new();
    let mut diagnostics = Vec::new();
    let mut curves = Vec::new();
    for (i, (x0, tr)) in seeds.iter().zip(&trajs).enumerate() {
        match tr {
            Ok(tr) => {
                let mut t = Table::new(format!("trajectory_{i:03}.csv"), vec!["t", "x", "y"]);
                for (time, st) in tr.times.iter().zip(&tr.states) {
                    t.push(vec![(*time).into(), st.x.into(), st.y.into()]);
                }
                tables.push(t);
                curves.push(tr.states.iter().map(|s| (s.x, s.y)).collect());
                entries.push(json!({
                    "x0": x0,
                    "terminated": tr.terminated,
                    "points": tr.states.len(),
                    "t_final": tr.times.last(),
                    "final": tr.states.last(),
                    "bounds": bound_check(tr, &p, *x0),
                }));
            }
            Err(e) => {
                diagnostics.push(format!("seed {i} {x0:?}: {e}"));
                entries.push(json!({ "x0": x0, "error": e.to_string() }));
            }
        }
    }
    let mut summary = vec![format!("{} trajectories to t = {}", entries.len(), s.t_end)];
    let mut results = json!({ "trajectories": entries });
    if let Some(c) = &s.cycle {
        let interior = interior_equilibria_detailed(&p, cfg.region_tol)?.equilibria;
        let center = interior.get(c.center).ok_or_else(|| {
            CliError::Usage(format!(
                "simulate.cycle.center = {} but {} interior equilibria",
                c.center,
                interior.len()
            ))
        })?;
        match detect_limit_cycle(&p, center, c.radius, c.t_max) {
            Ok(probe) => {
                summary.push(match probe.stability {
                    Some(st) if probe.found => format!(
                        "{st:?} limit cycle: radius {}, period {}",
                        fmt10(probe.radius),
                        fmt10(probe.period)
                    ),
                    _ => "no limit cycle found".into(),
                });
                results["cycle"] = json!({ "center": center, "probe": probe });
            }
            Err(holling_bt::Error::Inconclusive(m)) => {
                diagnostics.push(format!("cycle probe inconclusive: {m}"));
                results["cycle"] = json!({ "center": center, "probe": null });
            }
            Err(e) => return Err(e.into()),
        }
    }
    let eqs: Vec<(f64, f64)> = holling_bt::equilibria::all_equilibria(&p)
        .map(|v| v.iter().map(|e| (e.x, e.y)).collect())
        .unwrap_or_default();
    let svg = svg::phase_portrait(&curves, &eqs, &provenance("simulate", cfg, ""));
    Ok((results, diagnostics, tables, Some(svg), summary))
}

fn sweep_cmd(cfg: &RunConfig) -> Result<Parts, CliError> {
    let s = cfg.sweep.ok_or(ConfigError::Missing("sweep"))?;
    let mut ps = cfg.params;
    // h and c come from the grid
    ps.h.get_or_insert(s.h_min);
    let base = ps.model()?;
    let rows = sweep::sweep(&base, &s, cfg.region_tol);
    let mut t = Table::new(
        "sweep.csv",
        vec!["h", "c", "region", "n_interior", "labels", "error"],
    );
    let mut diagnostics = Vec::new();
    for r in &rows {
        t.push(vec![
            r.h.into(),
            r.c.into(),
            r.region.to_string().into(),
            r.n_interior.map_or(Cell::Text(String::new()), Cell::from),
            r.labels.join(";").into(),
            r.error.clone().unwrap_or_default().into(),
        ]);
        if let Some(e) = &r.error {
            diagnostics.push(format!("(h, c) = ({}, {}): {e}", r.h, r.c));
        }
    }
    let cells: Vec<_> = rows.iter().map(|r| (r.h, r.c, r.region)).collect();
    let svg = svg::region_raster(&cells, s.nc, s.nh, &provenance("sweep", cfg, ""));
    let summary = vec![format!(
        "{} grid points, {} failures",
        rows.len(),
        diagnostics.len()
    )];
    let results = json!({ "h": s.h_nodes(), "c": s.c_nodes(), "rows": rows });
    Ok((results, diagnostics, vec![t], Some(svg), summary))
}
