//! The `qpcircle` command line.
//!
//! Every run prints a JSON record `{command, parameters, outputs, margins}`
//! and writes it, with any data files and a `manifest.json`, to `--out`.
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::circle::CircleInterval;
use crate::denjoy::{
    closest_return_bound, disjoint_iterates, distortion_integral, return_times, transitivity_probe, variation,
    BoxCombinatorics, Strip, TorusBox,
};
use crate::error::Error;
use crate::graphs::{
    check_invariance, decompose_graph, graph_curves, jumping_number, read_graph_csv, read_tube_csv, verify_tube,
    winding_number, write_graph_csv, DecomposeOptions,
};
use crate::harper::{
    gnuplot_script, harper_diagnostics, harper_trajectory, reconstruct_invariant_graph, ReconstructionOptions,
};
use crate::numerics::GOLDEN;
use crate::rotation::{
    default_tolerance, detect_rational_dependence, lyapunov_exponent, rotation_number_integrated,
    rotation_number_pointwise, Method,
};
use crate::systems::{parse_config, Params, QpfSystem, SystemConfig};

#[derive(Debug, Parser)]
#[command(name = "qpcircle", version, about = "Experiments on quasiperiodically forced circle maps")]
struct Cli {
    /// Output directory for the JSON record, data files and manifest.
    #[arg(long, global = true, default_value = "qpcircle-out")]
    out: PathBuf,
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true, env = "QPCIRCLE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SystemKind {
    Translation,
    Shift,
    Skew,
    Arnold,
    Harper,
    Contraction,
}

impl SystemKind {
    fn name(self) -> &'static str {
        match self {
            Self::Translation => "translation",
            Self::Shift => "shift",
            Self::Skew => "skew",
            Self::Arnold => "arnold",
            Self::Harper => "harper",
            Self::Contraction => "contraction",
        }
    }
}

fn parse_omega(s: &str) -> Result<f64, String> {
    if s == "golden" {
        return Ok(GOLDEN);
    }
    s.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("expected a number or `golden`, got `{s}`"))
}

/// `theta0,base_len,x0,fibre_len`.
fn parse_box(s: &str) -> Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|f| f.trim().parse::<f64>().map_err(|_| format!("bad number `{f}` in box `{s}`")))
        .collect::<Result<_, _>>()?;
    v.try_into()
        .map_err(|_| format!("a box is `theta0,base_len,x0,fibre_len`, got `{s}`"))
}

fn make_box(b: [f64; 4]) -> Result<TorusBox, Error> {
    TorusBox::from_sides(b[0], b[1], b[2], b[3])
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Catalog system.
    #[arg(long, required_unless_present = "config")]
    system: Option<SystemKind>,
    /// System configuration file (`key = value` lines).
    #[arg(long, conflicts_with = "system")]
    config: Option<PathBuf>,
    /// Forcing frequency, a number or `golden`.
    #[arg(long, value_parser = parse_omega)]
    omega: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    increment: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    amp: Option<f64>,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Harper energy `E`.
    #[arg(long)]
    energy: Option<f64>,
    /// Harper coupling `λ`.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    offset: Option<f64>,
}

impl SystemArgs {
    fn config(&self) -> Result<SystemConfig, Failure> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Failure::Domain(e.into()))?;
            let mut cfg = parse_config(&text).map_err(Failure::Domain)?;
            if let Some(w) = self.omega {
                cfg.omega = w;
            }
            return Ok(cfg);
        }
        let kind = self.system.expect("clap enforces --system or --config");
        let mut params = Params::new();
        let given = [
            ("k", self.k),
            ("q", self.q),
            ("l", self.l),
            ("p", self.p),
            ("increment", self.increment),
            ("tau", self.tau),
            ("amp", self.amp),
            ("rho0", self.rho0),
            ("a", self.a),
            ("b", self.b),
            ("E", self.energy),
            ("lambda", self.lambda),
            ("offset", self.offset),
        ];
        for (name, v) in given {
            if let Some(v) = v {
                params.insert(name.to_string(), v);
            }
        }
        Ok(SystemConfig {
            system: kind.name().to_string(),
            omega: self.omega.unwrap_or(GOLDEN),
            params,
        })
    }

    /// Build the system. Flag combinations the catalog rejects are usage
    /// errors; a bad config file is a domain error.
    fn load(&self) -> Result<(Box<dyn QpfSystem>, Value), Failure> {
        let cfg = self.config()?;
        let from_flags = self.config.is_none();
        let loaded = cfg.build().map_err(|e| match e {
            Error::Parameter(m) if from_flags => Failure::Usage(m),
            other => Failure::Domain(other),
        })?;
        let desc = json!({
            "system": loaded.config.system,
            "omega": loaded.config.omega,
            "params": loaded.config.params,
        });
        Ok((loaded.system, desc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Pointwise,
    Integrated,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fibrewise rotation number.
    Rotnum {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Pointwise)]
        method: MethodArg,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        /// Fibres for the integrated estimator.
        #[arg(long, default_value_t = 64)]
        m: usize,
        /// Search for `ρ = (k/q)ω + l/(pq)` with `q, p` up to this bound.
        #[arg(long)]
        detect: Option<i64>,
    },
    /// Fibre Lyapunov exponent.
    Lyapunov {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Check invariance of a sampled multi-valued graph.
    GraphCheck {
        #[command(flatten)]
        sys: SystemArgs,
        /// Graph CSV (`theta,branch,value`).
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Split an invariant graph into its indecomposable parts.
    GraphDecompose {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 10.0)]
        jump_factor: f64,
        #[arg(long, default_value_t = 0)]
        anchor_fibre: usize,
    },
    /// Winding numbers of the curves in a graph CSV.
    Winding {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        jump_factor: f64,
    },
    /// Jumping number of an invariant periodic graph.
    Jumping {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 10.0)]
        jump_factor: f64,
        #[arg(long, default_value_t = 0)]
        anchor_fibre: usize,
    },
    /// Verify an invariant tube given as interval CSV.
    TubeVerify {
        #[command(flatten)]
        sys: SystemArgs,
        /// Tube CSV (`theta,branch,side,value`).
        #[arg(long)]
        tube: PathBuf,
        /// Number of periodic parts.
        #[arg(long)]
        tube_p: usize,
        /// Intervals per part on each fibre.
        #[arg(long)]
        tube_q: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Variation `V(T)` of the fibre log-derivative.
    Variation {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, default_value_t = 64)]
        theta_grid: usize,
        #[arg(long, default_value_t = 256)]
        x_grid: usize,
    },
    /// Both sides of the distortion inequality over a box.
    Distortion {
        #[command(flatten)]
        sys: SystemArgs,
        /// `theta0,base_len,x0,fibre_len`.
        #[arg(long = "box", value_parser = parse_box)]
        rect: [f64; 4],
        /// Iterate count; defaults to the number of disjoint images found.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        n_max: usize,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 64)]
        theta_grid: usize,
        #[arg(long, default_value_t = 256)]
        x_grid: usize,
    },
    /// Return times `N(α)` of a base interval.
    Returns {
        #[arg(long, value_parser = parse_omega, default_value = "golden")]
        omega: f64,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        #[arg(long)]
        base_len: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = crate::denjoy::DEFAULT_HORIZON)]
        horizon: i64,
    },
    /// Closest return times of a wandering box.
    Closest {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long = "box", value_parser = parse_box)]
        rect: [f64; 4],
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = crate::denjoy::DEFAULT_HORIZON)]
        horizon: i64,
    },
    /// Image-area bound at each closest return.
    Bound {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long = "box", value_parser = parse_box)]
        rect: [f64; 4],
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 200)]
        horizon: i64,
        #[arg(long, default_value_t = 64)]
        theta_grid: usize,
        #[arg(long, default_value_t = 256)]
        x_grid: usize,
    },
    /// Search for an iterate of one box meeting another.
    Probe {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, value_parser = parse_box)]
        u: [f64; 4],
        #[arg(long, value_parser = parse_box)]
        v: [f64; 4],
        #[arg(long, default_value_t = crate::denjoy::DEFAULT_PROBE_HORIZON)]
        horizon: i64,
    },
    /// Critical Harper map experiments.
    Harper {
        #[command(subcommand)]
        action: HarperCommand,
    },
}

#[derive(Debug, Subcommand)]
enum HarperCommand {
    /// Dump a trajectory as CSV with a plotting script.
    Traj {
        #[arg(long, value_parser = parse_omega, default_value = "golden")]
        omega: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        skip: usize,
        #[arg(long, default_value_t = 0.0)]
        theta0: f64,
        /// Seed in the arctan chart.
        #[arg(long, default_value_t = 0.25)]
        x0: f64,
    },
    /// Reconstruct the invariant graph from ensemble orbits.
    Graph {
        #[arg(long, value_parser = parse_omega, default_value = "golden")]
        omega: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// Bin count; defaults to a resolution matched to the sample size.
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long, default_value_t = 8)]
        ensemble: usize,
    },
    /// Rotation number, Lyapunov exponent and symmetry residual.
    Diag {
        #[arg(long, value_parser = parse_omega, default_value = "golden")]
        omega: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

/// A finished run: its record and the data files to write next to it.
struct Run {
    command: &'static str,
    parameters: Value,
    outputs: Value,
    margins: Value,
    files: Vec<(String, String)>,
}

impl Run {
    fn new(command: &'static str, parameters: Value, outputs: Value) -> Self {
        Self {
            command,
            parameters,
            outputs,
            margins: json!({}),
            files: Vec::new(),
        }
    }

    fn margins(mut self, m: Value) -> Self {
        self.margins = m;
        self
    }

    fn file(mut self, name: &str, contents: String) -> Self {
        self.files.push((name.to_string(), contents));
        self
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serialises")
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    Ok(BufReader::new(File::open(path).map_err(Error::from)?))
}

fn utf8(buf: Vec<u8>) -> String {
    String::from_utf8(buf).expect("writers emit UTF-8")
}

fn execute(cmd: &Command, seed: u64) -> Result<Run, Failure> {
    match cmd {
        Command::Rotnum { sys, n, method, theta0, x0, m, detect } => {
            let (s, desc) = sys.load()?;
            let est = match method {
                MethodArg::Pointwise => rotation_number_pointwise(&s, *theta0, *x0, *n)?,
                MethodArg::Integrated => rotation_number_integrated(&s, *m, *n)?,
            };
            let signature = detect.and_then(|bound| {
                detect_rational_dependence(est.value, s.omega(), bound, bound, default_tolerance(&est))
            });
            let params = json!({"system": desc, "n": n, "method": match est.method { Method::Pointwise => "pointwise", Method::Integrated => "integrated" }, "theta0": theta0, "x0": x0, "m": m, "detect": detect});
            Ok(Run::new("rotnum", params, json!({"estimate": to_json(&est), "signature": to_json(&signature)}))
                .margins(json!({"residual": est.residual})))
        }
        Command::Lyapunov { sys, n, theta0, x0, samples } => {
            let (s, desc) = sys.load()?;
            let est = lyapunov_exponent(&s, *theta0, *x0, *n, *samples)?;
            let params = json!({"system": desc, "n": n, "theta0": theta0, "x0": x0, "samples": samples});
            Ok(Run::new("lyapunov", params, to_json(&est)).margins(json!({"per_orbit_spread": est.per_orbit_spread})))
        }
        Command::GraphCheck { sys, graph, tol } => {
            let (s, desc) = sys.load()?;
            let g = read_graph_csv(open(graph)?)?;
            let report = check_invariance(&s, &g, *tol);
            let params = json!({"system": desc, "graph": graph, "tol": tol});
            Ok(Run::new("graph-check", params, to_json(&report))
                .margins(json!({"defect_below_tol": tol - report.max_defect})))
        }
        Command::GraphDecompose { sys, graph, tol, jump_factor, anchor_fibre } => {
            let (s, desc) = sys.load()?;
            let g = read_graph_csv(open(graph)?)?;
            let opts = DecomposeOptions {
                jump_factor: *jump_factor,
                tol: *tol,
                anchor_fibre: *anchor_fibre,
            };
            let parts = decompose_graph(&s, &g, &opts)?;
            let params = json!({"system": desc, "graph": graph, "options": to_json(&opts)});
            let mut run = Run::new(
                "graph-decompose",
                params,
                json!({"parts": parts.iter().enumerate().map(|(i, (_, sig))| json!({"file": format!("part-{i}.csv"), "signature": to_json(sig)})).collect::<Vec<_>>()}),
            );
            for (i, (part, _)) in parts.iter().enumerate() {
                let mut buf = Vec::new();
                write_graph_csv(part, &mut buf)?;
                run = run.file(&format!("part-{i}.csv"), utf8(buf));
            }
            Ok(run)
        }
        Command::Winding { graph, jump_factor } => {
            let g = read_graph_csv(open(graph)?)?;
            let curves = graph_curves(&g, *jump_factor)?;
            let windings = curves
                .iter()
                .map(|c| winding_number(c).map(|(q, k)| json!({"q": q, "k": k})))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Run::new("winding", json!({"graph": graph, "jump_factor": jump_factor}), json!({"curves": windings})))
        }
        Command::Jumping { sys, graph, jump_factor, anchor_fibre } => {
            let (s, desc) = sys.load()?;
            let g = read_graph_csv(open(graph)?)?;
            let opts = DecomposeOptions {
                jump_factor: *jump_factor,
                anchor_fibre: *anchor_fibre,
                ..DecomposeOptions::default()
            };
            let l = jumping_number(&s, &g, &opts)?;
            let params = json!({"system": desc, "graph": graph, "options": to_json(&opts)});
            Ok(Run::new("jumping", params, json!({"l": l})))
        }
        Command::TubeVerify { sys, tube, tube_p, tube_q, tol } => {
            let (s, desc) = sys.load()?;
            let t = read_tube_csv(open(tube)?, *tube_p, *tube_q)?;
            let report = verify_tube(&s, &t, *tol)?;
            let params = json!({"system": desc, "tube": tube, "p": tube_p, "q": tube_q, "tol": tol});
            Ok(Run::new("tube-verify", params, to_json(&report))
                .margins(json!({"defect_below_tol": tol - report.invariance_defect})))
        }
        Command::Variation { sys, theta_grid, x_grid } => {
            let (s, desc) = sys.load()?;
            let v = variation(&s, *theta_grid, *x_grid)?;
            let params = json!({"system": desc, "theta_grid": theta_grid, "x_grid": x_grid});
            Ok(Run::new("variation", params, to_json(&v)))
        }
        Command::Distortion { sys, rect, n, n_max, s, theta_grid, x_grid } => {
            let (sm, desc) = sys.load()?;
            let b = make_box(*rect)?;
            let strip = Strip::rectangle(&b);
            let n = match n {
                Some(n) => *n,
                None => disjoint_iterates(&sm, &strip, *n_max),
            };
            let v = variation(&sm, *theta_grid, *x_grid)?;
            let d = distortion_integral(&sm, &strip, n, *s, v.value)?;
            let params = json!({"system": desc, "box": to_json(&b), "n": n, "s": s, "theta_grid": theta_grid, "x_grid": x_grid});
            Ok(Run::new("distortion", params, to_json(&d)).margins(json!({"lhs_minus_rhs": d.margin})))
        }
        Command::Returns { omega, theta0, base_len, alpha, horizon } => {
            let base = CircleInterval::with_length(*theta0, *base_len)?;
            let times = return_times(&base, *alpha, *omega, *horizon)?;
            let params = json!({"omega": omega, "theta0": theta0, "base_len": base_len, "alpha": alpha, "horizon": horizon});
            Ok(Run::new("returns", params, json!({"return_times": times})))
        }
        Command::Closest { sys, rect, alpha, horizon } => {
            let (s, desc) = sys.load()?;
            let b = make_box(*rect)?;
            let c = BoxCombinatorics::compute(&s, &b, *alpha, *horizon)?;
            let params = json!({"system": desc, "box": to_json(&b), "alpha": alpha, "horizon": horizon});
            Ok(Run::new("closest", params, to_json(&c)))
        }
        Command::Bound { sys, rect, alpha, horizon, theta_grid, x_grid } => {
            let (s, desc) = sys.load()?;
            let b = make_box(*rect)?;
            let c = BoxCombinatorics::compute(&s, &b, *alpha, *horizon)?;
            let v = variation(&s, *theta_grid, *x_grid)?.value;
            let bounds = c
                .closest_returns
                .iter()
                .map(|&n| closest_return_bound(&s, &b, *alpha, n, v))
                .collect::<Result<Vec<_>, _>>()?;
            let worst = bounds.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
            let params = json!({"system": desc, "box": to_json(&b), "alpha": alpha, "horizon": horizon, "variation": v});
            Ok(Run::new("bound", params, json!({"closest_returns": c.closest_returns, "bounds": to_json(&bounds)}))
                .margins(json!({"smallest_margin": if bounds.is_empty() { Value::Null } else { json!(worst) }})))
        }
        Command::Probe { sys, u, v, horizon } => {
            let (s, desc) = sys.load()?;
            let (bu, bv) = (make_box(*u)?, make_box(*v)?);
            let r = transitivity_probe(&s, &bu, &bv, *horizon)?;
            let verdict = if r.hit.is_some() { "hit" } else { "no hit within horizon" };
            let params = json!({"system": desc, "u": to_json(&bu), "v": to_json(&bv), "horizon": horizon});
            Ok(Run::new("probe", params, json!({"result": to_json(&r), "verdict": verdict})))
        }
        Command::Harper { action } => execute_harper(action, seed),
    }
}

fn execute_harper(action: &HarperCommand, seed: u64) -> Result<Run, Failure> {
    match action {
        HarperCommand::Traj { omega, n, skip, theta0, x0 } => {
            let d = harper_trajectory(*omega, *n, *skip, *theta0, *x0)?;
            let mut buf = Vec::new();
            d.write_csv(&mut buf)?;
            let params = json!({"omega": omega, "n": n, "skip": skip, "theta0": theta0, "x0": x0});
            Ok(Run::new("harper traj", params, json!({"rows": d.rows.len(), "file": "trajectory.csv"}))
                .file("trajectory.csv", utf8(buf))
                .file("plot.gp", gnuplot_script("trajectory.csv", "graph.csv")))
        }
        HarperCommand::Graph { omega, n, bins, ensemble } => {
            let mut opts = ReconstructionOptions::scaled(*n, *ensemble, seed);
            if let Some(b) = bins {
                opts.bins = *b;
            }
            let g = reconstruct_invariant_graph(*omega, &opts)?;
            let defect = g.invariance_defect(&crate::systems::Harper::critical(*omega));
            let mut buf = Vec::new();
            g.write_csv(&mut buf)?;
            let params = json!({"omega": omega, "options": to_json(&opts)});
            Ok(Run::new(
                "harper graph",
                params,
                json!({"invariance_defect": defect, "high_dispersion": g.high_dispersion, "file": "graph.csv"}),
            )
            .file("graph.csv", utf8(buf))
            .file("plot.gp", gnuplot_script("trajectory.csv", "graph.csv")))
        }
        HarperCommand::Diag { omega, n } => {
            let d = harper_diagnostics(*omega, *n)?;
            let params = json!({"omega": omega, "n": n});
            Ok(Run::new("harper diag", params, to_json(&d)).margins(json!({
                "rotation_error": d.rotation_error,
                "lyapunov_abs": d.lyapunov.value.abs(),
                "symmetry_residual": d.symmetry_residual,
            })))
        }
    }
}

fn write_outputs(out: &Path, run: &Run, record: &Value, seed: u64) -> Result<(), Error> {
    fs::create_dir_all(out)?;
    let stem = run.command.replace(' ', "-");
    let record_name = format!("{stem}.json");
    let mut files = vec![record_name.clone()];
    fs::write(out.join(&record_name), serde_json::to_string_pretty(record).expect("json") + "\n")?;
    for (name, contents) in &run.files {
        fs::write(out.join(name), contents)?;
        files.push(name.clone());
    }
    let manifest = json!({
        "command": run.command,
        "parameters": run.parameters,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "outputs": files,
    });
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest).expect("json") + "\n")?;
    Ok(())
}

/// Run the command line `argv` (program name first) and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        pool = pool.num_threads(t);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {:?} worker threads: {e}", cli.threads);
            return 2;
        }
    };
    let result = pool.install(|| execute(&cli.command, cli.seed));
    let run = match result {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let record = json!({
        "command": run.command,
        "parameters": run.parameters,
        "outputs": run.outputs,
        "margins": run.margins,
    });
    println!("{}", serde_json::to_string_pretty(&record).expect("json"));
    if let Err(e) = write_outputs(&cli.out, &run, &record, cli.seed) {
        eprintln!("error: {e}");
        return 1;
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_and_box_parsing() {
        assert_eq!(parse_omega("golden").unwrap(), GOLDEN);
        assert_eq!(parse_omega("0.25").unwrap(), 0.25);
        assert!(parse_omega("nan").is_err());
        assert_eq!(parse_box("0,0.1,0.5,0.01").unwrap(), [0.0, 0.1, 0.5, 0.01]);
        assert!(parse_box("0,0.1").is_err());
    }

    #[test]
    fn command_tree_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
