use std::path::PathBuf;
use std::process::ExitCode;

use anisofem::experiments::{
    default_eps_list, default_s_list, optimality_sweep, run_convergence, run_selftest, ConvergenceConfig, ElementFamily,
    DEFAULT_ORDER_TOL, DEFAULT_STABILITY_TOL, FAULT_ENV,
};
use anisofem::geometry::{to_standard_position, Simplex};
use anisofem::mesh::{read_mesh, FamilySpec};
use anisofem::poly::{Exponent, SeminormOptions};
use anisofem::shape::{param_h_t0, ShapeMetrics};
use anisofem::Error;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

const EXIT_INVARIANT: u8 = 1;
const EXIT_GEOMETRY: u8 = 2;
const EXIT_NONCONFORMING: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "anisofem", version, about = "Anisotropic interpolation error experiments on simplices")]
struct Cli {
    /// Seed for randomised suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; json by default for analyze-simplex and selftest, csv otherwise
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Standard position and shape parameters of one triangle or tetrahedron
    AnalyzeSimplex {
        /// Vertices as comma-separated coordinates, e.g. 0,0 1,0 0,1
        #[arg(required = true, num_args = 3..=4)]
        vertices: Vec<String>,
    },
    /// Per-element H_T0, h_T and their ratio for an anisomesh file
    MeshQuality {
        /// Path to an anisomesh file
        mesh: PathBuf,
        /// Report hanging nodes instead of failing with exit code 3
        #[arg(long)]
        allow_nonconforming: bool,
    },
    /// Interpolation error ratios over a mesh family
    Convergence {
        /// lagrange, cr or rt
        #[arg(long, default_value = "lagrange")]
        element: String,
        /// Polynomial degree of the element
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Regularity index: the bound uses derivatives of order l+1
        #[arg(long, default_value_t = 1)]
        l: u32,
        /// Derivative order of the measured error
        #[arg(long, default_value_t = 0)]
        m: u32,
        /// 2 or inf
        #[arg(long, default_value = "2")]
        p: String,
        /// Mesh family, e.g. aniso-strip-2d:gamma=2;n=2,3,4
        #[arg(long, default_value = "uniform-ref")]
        family: String,
        /// Field id; defaults to sinsin, or sincos-vec for rt
        #[arg(long)]
        field: Option<String>,
        /// Allowed relative growth of the error ratio along the family
        #[arg(long, default_value_t = DEFAULT_STABILITY_TOL)]
        stability_tol: f64,
        /// Allowed deviation of the observed order from l+1-m
        #[arg(long, default_value_t = DEFAULT_ORDER_TOL)]
        order_tol: f64,
    },
    /// P1 interpolation of x² + y²/4 + z² on the thin tetrahedra family
    Optimality {
        /// Comma-separated edge lengths s
        #[arg(long, value_delimiter = ',')]
        s_list: Option<Vec<f64>>,
        /// Comma-separated exponents ε of the height s^ε
        #[arg(long, value_delimiter = ',')]
        eps_list: Option<Vec<f64>>,
    },
    /// Run every invariant suite with fixed seeds
    Selftest,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_)
            | Error::InvalidSimplex(_)
            | Error::MalformedMesh { .. }
            | Error::DuplicateCell(_)
            | Error::IndexOutOfRange { .. }
            | Error::EmptyMesh
            | Error::Io(_) => EXIT_GEOMETRY,
            Error::Nonconforming(_) => EXIT_NONCONFORMING,
            Error::InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_INVARIANT,
        };
        Failure { code, message: e.to_string() }
    }
}

struct Output {
    text: String,
    ok: bool,
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure { code: EXIT_GEOMETRY, message: e.to_string() }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

fn parse_vertex(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Failure { code: EXIT_USAGE, message: format!("bad vertex '{text}'") })
}

fn analyze_simplex(cli: &Cli, vertices: &[String]) -> Result<Output, Failure> {
    let points = vertices.iter().map(|v| parse_vertex(v)).collect::<Result<Vec<_>, _>>()?;
    if points.iter().any(|p| p.len() + 1 != points.len()) {
        return Err(Failure { code: EXIT_USAGE, message: "give 3 points in 2D or 4 points in 3D".into() });
    }
    let s = Simplex::from_points(&points)?;
    let sp = to_standard_position(&s)?;
    let metrics = ShapeMetrics::from_standard(&s, &sp);
    let report = json!({
        "dim": s.dim(),
        "alphas": sp.alphas(),
        "type": sp.simplex_type().to_string(),
        "labels": sp.labels(),
        "shear": sp.shear(),
        "h_T": metrics.h_t,
        "H_T": metrics.big_h_t,
        "H_T0": metrics.big_h_t0,
        "circumradius": metrics.circumradius,
        "semiregularity": metrics.semiregularity,
        "angles": {
            "theta_max": metrics.theta_max,
            "theta_t": metrics.theta_t,
            "phi_t": metrics.phi_t,
        },
    });
    let text = match cli.format {
        Some(Format::Csv) => format!(
            "dim,type,h_T,H_T,H_T0,semiregularity\n{},{},{:e},{:e},{:e},{:e}\n",
            s.dim(),
            sp.simplex_type(),
            metrics.h_t,
            metrics.big_h_t,
            metrics.big_h_t0,
            metrics.semiregularity
        ),
        _ => json_text(&report),
    };
    Ok(Output { text, ok: true })
}

fn mesh_quality(cli: &Cli, path: &PathBuf, allow_nonconforming: bool) -> Result<Output, Failure> {
    let loaded = read_mesh(path)?;
    if !loaded.conformity.conforming && !allow_nonconforming {
        return Err(Error::Nonconforming(loaded.conformity.to_string()).into());
    }
    let mesh = &loaded.mesh;
    let rows: Vec<(f64, f64)> = mesh.simplices().map(|s| (param_h_t0(&s), s.diameter())).collect();
    let big_h = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let h = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_ratio = rows.iter().map(|r| r.0 / r.1).fold(0.0, f64::max);
    let text = match cli.format {
        Some(Format::Json) => json_text(&json!({
            "cells": rows.iter().enumerate().map(|(i, (ht0, ht))| json!({"cell": i, "H_T0": ht0, "h_T": ht, "ratio": ht0 / ht})).collect::<Vec<_>>(),
            "summary": {"h": h, "H": big_h, "max_ratio": max_ratio},
            "conforming": loaded.conformity.conforming,
            "violations": loaded.conformity.violations,
        })),
        _ => {
            let mut out = String::from("cell,H_T0,h_T,ratio\n");
            for (i, (ht0, ht)) in rows.iter().enumerate() {
                out.push_str(&format!("{i},{ht0:e},{ht:e},{:e}\n", ht0 / ht));
            }
            out.push_str(&format!("summary,{big_h:e},{h:e},{max_ratio:e}\n"));
            out
        }
    };
    Ok(Output { text, ok: true })
}

#[allow(clippy::too_many_arguments)]
fn convergence(
    cli: &Cli,
    element: &str,
    k: u32,
    l: u32,
    m: u32,
    p: &str,
    family: &str,
    field: Option<&str>,
    stability_tol: f64,
    order_tol: f64,
) -> Result<Output, Failure> {
    let element: ElementFamily = element.parse()?;
    let field = field.map(str::to_string).unwrap_or_else(|| if element == ElementFamily::Rt { "sincos-vec" } else { "sinsin" }.into());
    let config = ConvergenceConfig {
        element,
        k,
        l,
        m,
        p: p.parse::<Exponent>()?,
        field,
        family: family.parse::<FamilySpec>()?,
        stability_tol,
        order_tol,
    };
    let report = run_convergence(&config, &SeminormOptions::default())?;
    let text = match cli.format {
        Some(Format::Json) => json_text(&report),
        _ => report.to_csv(),
    };
    if !report.stable {
        log::error!("error ratio not stable: last level exceeds the running maximum by more than {stability_tol}");
    }
    Ok(Output { text, ok: report.stable })
}

fn optimality(cli: &Cli, s_list: Option<&[f64]>, eps_list: Option<&[f64]>) -> Result<Output, Failure> {
    let s = s_list.map(<[f64]>::to_vec).unwrap_or_else(default_s_list);
    let eps = eps_list.map(<[f64]>::to_vec).unwrap_or_else(default_eps_list);
    let sweep = optimality_sweep(&s, &eps, &SeminormOptions::default())?;
    let text = match cli.format {
        Some(Format::Json) => json_text(&sweep),
        _ => sweep.to_csv(),
    };
    Ok(Output { text, ok: sweep.pass })
}

fn selftest(cli: &Cli) -> Result<Output, Failure> {
    let fault = std::env::var(FAULT_ENV).ok();
    let report = run_selftest(cli.seed, fault.as_deref(), &SeminormOptions::default());
    if !report.pass() {
        eprintln!("failed suites: {}", report.failed_names().join(", "));
    }
    let text = match cli.format {
        Some(Format::Csv) => {
            let mut out = String::from("suite,pass,detail\n");
            for s in &report.suites {
                out.push_str(&format!("{},{},\"{}\"\n", s.name, s.pass, s.detail.replace('"', "'")));
            }
            out
        }
        _ => json_text(&report),
    };
    Ok(Output { text, ok: report.pass() })
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::AnalyzeSimplex { vertices } => analyze_simplex(cli, vertices),
        Command::MeshQuality { mesh, allow_nonconforming } => mesh_quality(cli, mesh, *allow_nonconforming),
        Command::Convergence { element, k, l, m, p, family, field, stability_tol, order_tol } => {
            convergence(cli, element, *k, *l, *m, p, family, field.as_deref(), *stability_tol, *order_tol)
        }
        Command::Optimality { s_list, eps_list } => optimality(cli, s_list.as_deref(), eps_list.as_deref()),
        Command::Selftest => selftest(cli),
    }
}

/// Vertex arguments such as `-1,0.5` would parse as flags; a leading space
/// keeps them positional and is trimmed when the coordinates are read.
fn protect_negative_coordinates(args: impl Iterator<Item = String>) -> Vec<String> {
    let mut seen_subcommand = false;
    args.map(|a| {
        seen_subcommand |= a == "analyze-simplex";
        let numeric = a.strip_prefix('-').is_some_and(|rest| rest.starts_with(|c: char| c.is_ascii_digit() || c == '.'));
        if seen_subcommand && numeric {
            format!(" {a}")
        } else {
            a
        }
    })
    .collect()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse_from(protect_negative_coordinates(std::env::args())) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli).and_then(|out| emit(&cli, &out.text).map(|_| out.ok)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INVARIANT),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
