//! Command-line front end: time-map evaluation, diagram export, fold and
//! stability queries, shooting verification and relaxation runs.
//!
//! Exit codes: 0 on success, 1 when `verify` finds residuals above tolerance,
//! 2 on usage or domain errors. `TWISTMAP_LOG` (error|info|debug) controls
//! diagnostics on standard error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use twistmap::{
    branch_time, build_diagram, critical_times, find_saddle_node, io, point_at, quad_oracle,
    relax, shoot_check, solve_at_l, zero_count, BranchId, BranchKind, CellParams, OracleQuery,
    OrbitParam, QuadConfig, RelaxOutcome, Stability,
};

#[derive(Parser)]
#[command(
    name = "twistmap",
    about = "Bifurcation structure of the planar pendulum boundary value problem",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CellArgs {
    /// Dirichlet angle at the left boundary, x(-L) = -phi0
    #[arg(long)]
    phi0: f64,
    /// Dirichlet angle at the right boundary, x(L) = phi1
    #[arg(long)]
    phi1: f64,
    /// Interpret angles in degrees instead of radians
    #[arg(long, global = false)]
    degrees: bool,
}

impl CellArgs {
    fn cell(&self) -> twistmap::Result<CellParams> {
        let s = if self.degrees {
            std::f64::consts::PI / 180.0
        } else {
            1.0
        };
        CellParams::new(self.phi0 * s, self.phi1 * s)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MapName {
    #[value(name = "T", alias = "t")]
    T,
    #[value(name = "T1", alias = "t1")]
    T1,
    #[value(name = "T2", alias = "t2")]
    T2,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "Cr", alias = "cr")]
    Cr,
    #[value(name = "Cl", alias = "cl")]
    Cl,
    #[value(name = "D", alias = "d")]
    D,
}

impl From<KindArg> for BranchKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::A => BranchKind::A,
            KindArg::Cr => BranchKind::Cr,
            KindArg::Cl => BranchKind::Cl,
            KindArg::D => BranchKind::D,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrdinateArg {
    #[value(name = "y-minus")]
    YMinus,
    #[value(name = "yL", alias = "y-plus")]
    YPlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum RootPick {
    Lower,
    Upper,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one of the time maps T, T1, T2
    Timemap {
        #[arg(long, value_enum)]
        map: MapName,
        /// Orbit amplitude alpha (T, T1)
        #[arg(long)]
        alpha: Option<f64>,
        /// Crossing height beta (T2)
        #[arg(long)]
        beta: Option<f64>,
        /// Target line x = phi (T1, T2)
        #[arg(long)]
        phi: Option<f64>,
        /// Cross-check against the raw-integrand oracle and print the delta
        #[arg(long)]
        verify: bool,
    },
    /// Trace all branches and export CSV, JSON and SVG
    Diagram {
        #[command(flatten)]
        cell: CellArgs,
        /// JSON file with a RunConfig; explicit flags win over it
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        k_max: Option<u32>,
        #[arg(long, alias = "L-max")]
        l_max: Option<f64>,
        #[arg(long)]
        n_points: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Overlay the symmetric cell at the midpoint angle, dashed
        #[arg(long)]
        overlay_symmetric: bool,
        /// Ordinate of the SVG plot
        #[arg(long, value_enum)]
        ordinate: Option<OrdinateArg>,
    },
    /// Evaluate a single branch point at a given orbit parameter
    Branch {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, value_enum)]
        branch: KindArg,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
    },
    /// Locate the saddle-node of a folded branch
    Saddle {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, value_enum)]
        branch: KindArg,
        #[arg(long, default_value_t = 0)]
        k: u32,
    },
    /// Solve every branch at a given half-length and print the verdicts
    Stability {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long = "L", alias = "l")]
        l: f64,
        #[arg(long, default_value_t = 2)]
        k_max: u32,
    },
    /// Re-shoot every point of a diagram CSV and report the worst residual
    Verify {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Perturb one equilibrium and relax it under the gradient flow
    Relax {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, value_enum)]
        branch: KindArg,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long = "L", alias = "l")]
        l: f64,
        /// Which fold root to use when two solutions exist
        #[arg(long, value_enum, default_value_t = RootPick::Lower)]
        root: RootPick,
        #[arg(long, default_value_t = 1e-3)]
        perturbation: f64,
        #[arg(long, default_value_t = 50.0)]
        t_final: f64,
        #[arg(long, default_value_t = 201)]
        grid_size: usize,
    },
}

fn fmt15(v: f64) -> String {
    format!("{v:.14e}")
}

fn cmd_timemap(
    map: MapName,
    alpha: Option<f64>,
    beta: Option<f64>,
    phi: Option<f64>,
    verify: bool,
) -> twistmap::Result<()> {
    let cfg = QuadConfig::default();
    let need = |opt: Option<f64>, name: &str| {
        opt.ok_or_else(|| twistmap::Error::Domain(format!("--{name} is required for this map")))
    };
    let (value, query) = match map {
        MapName::T => {
            let a = need(alpha, "alpha")?;
            (
                twistmap::quarter_period(a, &cfg)?,
                OracleQuery::QuarterPeriod { alpha: a },
            )
        }
        MapName::T1 => {
            let a = need(alpha, "alpha")?;
            let p = need(phi, "phi")?;
            (
                twistmap::time_to_line(a, p, &cfg)?,
                OracleQuery::TimeToLine { alpha: a, phi: p },
            )
        }
        MapName::T2 => {
            let b = need(beta, "beta")?;
            let p = need(phi, "phi")?;
            (
                twistmap::time_above(b, p, &cfg)?,
                OracleQuery::TimeAbove { beta: b, phi: p },
            )
        }
    };
    println!("{}", fmt15(value));
    if verify {
        let oracle = quad_oracle(query, 28)?;
        println!("oracle    {}", fmt15(oracle));
        println!("delta     {:.3e}", value - oracle);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_diagram(
    cell_args: &CellArgs,
    config_path: Option<&PathBuf>,
    k_max: Option<u32>,
    l_max: Option<f64>,
    n_points: Option<usize>,
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
    svg: Option<PathBuf>,
    overlay: bool,
    ordinate: Option<OrdinateArg>,
) -> twistmap::Result<()> {
    let mut config = match config_path {
        Some(path) => io::RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => io::RunConfig::default(),
    };
    let cell = cell_args.cell()?;
    config.phi0 = cell.phi0();
    config.phi1 = cell.phi1();
    if let Some(v) = k_max {
        config.k_max = v;
    }
    if let Some(v) = l_max {
        config.l_max = v;
    }
    if let Some(v) = n_points {
        config.n_points = v;
    }
    if overlay {
        config.overlay_symmetric = true;
    }
    if let Some(o) = ordinate {
        config.ordinate = match o {
            OrdinateArg::YMinus => io::Ordinate::YMinus,
            OrdinateArg::YPlus => io::Ordinate::YPlus,
        };
    }
    config.csv_path = csv.or(config.csv_path).or(Some(PathBuf::from("diagram.csv")));
    config.json_path = json
        .or(config.json_path)
        .or(Some(PathBuf::from("diagram.json")));
    config.svg_path = svg.or(config.svg_path).or(Some(PathBuf::from("diagram.svg")));
    config.validate()?;

    log::info!(
        "building diagram for phi0 = {}, phi1 = {}, k_max = {}, L_max = {}",
        config.phi0,
        config.phi1,
        config.k_max,
        config.l_max
    );
    let diagram = build_diagram(
        &cell,
        config.k_max,
        config.l_max,
        config.n_points,
        config.overlay_symmetric,
        &config.quad,
    )?;

    let mut outputs = Vec::new();
    if let Some(p) = &config.csv_path {
        outputs.push((p.clone(), io::diagram_to_csv(&diagram)));
    }
    if let Some(p) = &config.json_path {
        outputs.push((p.clone(), io::diagram_to_json(&diagram, &config)?));
    }
    if let Some(p) = &config.svg_path {
        outputs.push((p.clone(), io::diagram_to_svg(&diagram, config.ordinate)));
    }
    io::write_outputs(&outputs)?;
    for (p, _) in &outputs {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn pick_param(
    cell: &CellParams,
    id: BranchId,
    l: f64,
    root: RootPick,
    cfg: &QuadConfig,
) -> twistmap::Result<OrbitParam> {
    let roots = solve_at_l(cell, id, l, cfg)?;
    match (roots.len(), root) {
        (0, _) => Err(twistmap::Error::Domain(format!(
            "branch {id} has no solution at L = {l}"
        ))),
        (1, _) => Ok(roots[0]),
        (_, RootPick::Lower) => Ok(roots[0]),
        (_, RootPick::Upper) => Ok(*roots.last().unwrap()),
    }
}

fn cmd_stability(cell: &CellParams, l: f64, k_max: u32) -> twistmap::Result<()> {
    let cfg = QuadConfig::default();
    println!("branch  k  root   param             energy        verdict");
    for kind in BranchKind::ALL {
        for k in 0..=k_max {
            let id = BranchId::new(kind, k);
            let roots = solve_at_l(cell, id, l, &cfg)?;
            for (i, p) in roots.iter().enumerate() {
                let label = match (roots.len(), i) {
                    (1, _) => "-",
                    (_, 0) => "lower",
                    _ => "upper",
                };
                let pt = point_at(cell, id, *p, &cfg)?;
                println!(
                    "{:<6} {:>2}  {:<5}  {:<16.10} {:<13.8} {}",
                    kind.as_str(),
                    k,
                    label,
                    p.value(),
                    p.energy(),
                    pt.stability.as_str()
                );
            }
        }
    }
    Ok(())
}

fn run() -> twistmap::Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Timemap {
            map,
            alpha,
            beta,
            phi,
            verify,
        } => {
            cmd_timemap(map, alpha, beta, phi, verify)?;
            Ok(0)
        }
        Command::Diagram {
            cell,
            config,
            k_max,
            l_max,
            n_points,
            csv,
            json,
            svg,
            overlay_symmetric,
            ordinate,
        } => {
            cmd_diagram(
                &cell,
                config.as_ref(),
                k_max,
                l_max,
                n_points,
                csv,
                json,
                svg,
                overlay_symmetric,
                ordinate,
            )?;
            Ok(0)
        }
        Command::Branch {
            cell,
            branch,
            k,
            alpha,
            beta,
        } => {
            let cell = cell.cell()?;
            let cfg = QuadConfig::default();
            let id = BranchId::new(branch.into(), k);
            let param = match (alpha, beta) {
                (Some(a), None) => OrbitParam::from_alpha(a)?,
                (None, Some(b)) => OrbitParam::from_beta(b)?,
                _ => {
                    return Err(twistmap::Error::Domain(
                        "give exactly one of --alpha or --beta".into(),
                    ))
                }
            };
            let t = branch_time(&cell, id, &param, &cfg)?;
            let pt = point_at(&cell, id, param, &cfg)?;
            println!("branch      {id}");
            println!("transit     {}", fmt15(t));
            println!("L           {}", fmt15(pt.half_length));
            println!("lambda      {}", fmt15(pt.lambda));
            println!("y(-L)       {}", fmt15(pt.y_minus));
            println!("y(+L)       {}", fmt15(pt.y_plus));
            println!("zeros       {}", zero_count(id));
            println!("stability   {}", pt.stability.as_str());
            Ok(0)
        }
        Command::Saddle { cell, branch, k } => {
            let cell = cell.cell()?;
            let cfg = QuadConfig::default();
            let id = BranchId::new(branch.into(), k);
            let sn = find_saddle_node(&cell, id, &cfg)?;
            let crit = critical_times(&cell, k, &cfg)?;
            println!("branch       {id}");
            println!(
                "alpha_sn     {}",
                fmt15(sn.param_at_min.alpha().unwrap_or(f64::NAN))
            );
            println!(
                "alpha~_sn    {}",
                fmt15(sn.param_at_min.alpha_tilde().unwrap_or(f64::NAN))
            );
            println!("L_sn         {}", fmt15(sn.l_sn));
            println!("T_min        {}", fmt15(sn.t_min));
            println!("T_*k/2       {}", fmt15(0.5 * crit.t_star));
            println!("T^*k/2       {}", fmt15(0.5 * crit.t_upper));
            Ok(0)
        }
        Command::Stability { cell, l, k_max } => {
            let cell = cell.cell()?;
            cmd_stability(&cell, l, k_max)?;
            Ok(0)
        }
        Command::Verify { cell, input, tol } => {
            let cell = cell.cell()?;
            let text = std::fs::read_to_string(&input)?;
            let points = io::points_from_csv(&text)?;
            if points.is_empty() {
                return Err(twistmap::Error::Parse("diagram CSV has no points".into()));
            }
            let mut worst = 0.0_f64;
            for p in &points {
                worst = worst.max(shoot_check(&cell, p)?);
            }
            println!("points        {}", points.len());
            println!("max residual  {worst:.3e}");
            if worst > tol {
                println!("FAIL: residual above {tol:.1e}");
                Ok(1)
            } else {
                println!("OK: all residuals within {tol:.1e}");
                Ok(0)
            }
        }
        Command::Relax {
            cell,
            branch,
            k,
            l,
            root,
            perturbation,
            t_final,
            grid_size,
        } => {
            let cell = cell.cell()?;
            let cfg = QuadConfig::default();
            let id = BranchId::new(branch.into(), k);
            let param = pick_param(&cell, id, l, root, &cfg)?;
            let pt = point_at(&cell, id, param, &cfg)?;
            let run = relax(&cell, &pt, perturbation, t_final, grid_size)?;
            let outcome = match run.outcome {
                RelaxOutcome::ReturnedToStart => "ReturnedToStart",
                RelaxOutcome::EscapedToOther => "EscapedToOther",
                RelaxOutcome::Inconclusive => "Inconclusive",
            };
            println!("branch     {id}");
            println!("param      {}", fmt15(param.value()));
            println!("lambda     {}", fmt15(run.lambda));
            println!("maginu     {}", pt.stability.as_str());
            println!("t_final    {}", run.t_final);
            println!("outcome    {outcome}");
            let concordant = matches!(
                (pt.stability, run.outcome),
                (Stability::AsymptoticallyStable, RelaxOutcome::ReturnedToStart)
                    | (Stability::Unstable, RelaxOutcome::EscapedToOther)
            ) || run.outcome == RelaxOutcome::Inconclusive
                || pt.stability == Stability::Undetermined;
            println!("concordant {concordant}");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("TWISTMAP_LOG"))
        .format_timestamp(None)
        .init();
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
