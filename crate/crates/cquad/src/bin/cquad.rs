use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use cquad::core::fracdiff::{solve_fracdiff, FracDiffProblem, Grid1D, ManufacturedSource};
use cquad::core::quadrature::convolve_series;
use cquad::core::stability::{negative_sum_min, weight_positivity_audit};
use cquad::core::volterra::{manufacture_forcing, step_solve, VolterraProblem};
use cquad::core::weights::build_table;
use cquad::core::{Mesh, WeightOptions};
use cquad::experiment::ExperimentSpec;
use cquad::harness::{fill_rates, Exponent, Gamma, KernelKind, Row};
use cquad::report::{render_table, save};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cquad", version, about = "Product quadrature for weakly singular convolution integrals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Approximate `∫_0^t K(t-s) f(s) ds` at every mesh node; prints JSON.
    Integrate {
        #[arg(long, default_value = "power-singular")]
        kernel: KernelKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value = "3")]
        order: Gamma,
        #[arg(long = "N", default_value_t = 20)]
        n: usize,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        /// `1`, `t`, `t^p`, `exp`, `sin` or `cos`.
        #[arg(long, default_value = "t^3")]
        f: Integrand,
    },
    /// Collapsed weights for the final node as CSV.
    Weights {
        #[arg(long, default_value = "power-singular")]
        kernel: KernelKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value = "3")]
        order: Gamma,
        #[arg(long = "N", default_value_t = 10)]
        n: usize,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        /// Add the raw per-interval weights `w_j^k` as extra columns.
        #[arg(long)]
        raw: bool,
    },
    /// Coefficient-sum margins, and a weight positivity audit when `--alpha` is given.
    Stability {
        #[arg(long, default_value_t = 4)]
        order: u32,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "N", default_value_t = 32)]
        n: usize,
        #[arg(long, default_value = "power-singular")]
        kernel: KernelKind,
    },
    /// Solve `u = f + K∗u` with a manufactured monomial solution; prints JSON.
    Solve {
        /// `1` (`t^3`, kernel `t^α`), `2` (`t^6`, kernel `t^{α-1}`) or `custom`.
        #[arg(long, default_value = "1")]
        example: String,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value = "3")]
        order: Gamma,
        #[arg(long = "N", default_value_t = 40)]
        n: usize,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
        /// Kernel for `--example custom`.
        #[arg(long, default_value = "caputo")]
        kernel: KernelKind,
        /// Exponent of the exact solution for `--example custom`.
        #[arg(long, default_value_t = 2.0)]
        degree: f64,
    },
    /// Integrated fractional diffusion with `u = sin(πx) t^ρ`; prints JSON.
    Fracdiff {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value = "alpha")]
        rho: RhoArg,
        /// Spatial steps; the grid has `M - 1` interior points.
        #[arg(long = "M", default_value_t = 25)]
        m: usize,
        /// Time step counts, comma separated.
        #[arg(long = "N", value_delimiter = ',', default_values_t = [10, 20, 40, 80, 160])]
        n: Vec<usize>,
        #[arg(long = "T", default_value_t = 1.0)]
        t: f64,
    },
    /// Run a convergence experiment.
    Converge {
        #[arg(long)]
        spec: PathBuf,
        /// `.json` or `.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the long ladder when the experiment has one.
        #[arg(long)]
        long: bool,
        /// Exit nonzero if any reference value is out of tolerance.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Clone, Copy)]
enum Integrand {
    Power(f64),
    Exp,
    Sin,
    Cos,
}

impl std::str::FromStr for Integrand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        match s {
            "1" | "one" => return Ok(Self::Power(0.0)),
            "t" => return Ok(Self::Power(1.0)),
            "exp" => return Ok(Self::Exp),
            "sin" => return Ok(Self::Sin),
            "cos" => return Ok(Self::Cos),
            _ => {}
        }
        s.strip_prefix("t^")
            .and_then(|p| p.parse::<f64>().ok())
            .filter(|p| *p >= 0.0)
            .map(Self::Power)
            .ok_or_else(|| format!("unknown integrand {s:?}"))
    }
}

impl Integrand {
    fn eval(self, t: f64) -> f64 {
        match self {
            Self::Power(p) => t.powf(p),
            Self::Exp => t.exp(),
            Self::Sin => t.sin(),
            Self::Cos => t.cos(),
        }
    }
}

#[derive(Clone, Copy)]
struct RhoArg(Exponent);

impl std::str::FromStr for RhoArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "alpha" => Ok(Self(Exponent::Alpha)),
            "one-minus-alpha" | "1-alpha" => Ok(Self(Exponent::OneMinusAlpha)),
            other => Err(format!("expected alpha or one-minus-alpha, got {other:?}")),
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Integrate { kernel, alpha, order, n, t, f } => {
            let k = kernel.build(alpha)?;
            let mesh = Mesh::uniform(t, n)?;
            let values =
                convolve_series(|s| f.eval(s), &mesh, &k, order.order(alpha)?, WeightOptions::default())?;
            let nodes = &mesh.nodes()[1..];
            let mut out = json!({ "nodes": nodes, "values": values });
            if let Integrand::Power(p) = f {
                let exact: Vec<f64> =
                    nodes.iter().map(|&x| k.monomial_convolution(p, x)).collect::<Result<_, _>>()?;
                let error = values.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                out["exact"] = json!(exact);
                out["error"] = json!(error);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Weights { kernel, alpha, order, n, t, raw } => {
            let k = kernel.build(alpha)?;
            let mesh = Mesh::uniform(t, n)?;
            let table = build_table(&mesh, &k, order.order(alpha)?, n, WeightOptions::default())?;
            let span = table.raw.iter().map(Vec::len).max().unwrap_or(0);
            let mut w = csv::Writer::from_writer(std::io::stdout());
            let mut header = vec!["k".to_string(), "w_k".to_string()];
            if raw {
                header.extend((0..span).map(|j| format!("raw_{j}")));
            }
            w.write_record(&header)?;
            for (i, wk) in table.collapsed.iter().enumerate() {
                let mut rec = vec![i.to_string(), wk.to_string()];
                if raw {
                    // Row k carries w_j^k for the interval [t_{k-1}, t_k]; k = 0 has none.
                    let row = i.checked_sub(1).map(|r| table.raw[r].as_slice()).unwrap_or(&[]);
                    rec.extend((0..span).map(|j| row.get(j).map_or_else(String::new, f64::to_string)));
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
        Command::Stability { order, alpha, n, kernel } => {
            println!("{:>5}  {:>12}  {:>12}  {:>8}", "order", "argmin", "minimum", "verdict");
            for g in 3..=7 {
                let m = negative_sum_min(g)?;
                let verdict = if m.stable { "stable" } else { "unstable" };
                let mark = if g == order { " <" } else { "" };
                println!("{g:>5}  {:>12.6}  {:>12.6}  {verdict:>8}{mark}", m.argmin, m.minimum);
            }
            if let Some(alpha) = alpha {
                let k = kernel.build(alpha)?;
                let mesh = Mesh::uniform(1.0, n)?;
                let o = Gamma::Integer(order).order(alpha).or_else(|_| {
                    cquad::core::SchemeOrder::for_analysis(order)
                })?;
                let audit = weight_positivity_audit(&mesh, &k, o, WeightOptions::default())?;
                println!(
                    "\naudit {} alpha {alpha} N {n}: {} negative weights, smallest {:.6e} (target {}, index {})",
                    kernel.label(),
                    audit.violations.len(),
                    audit.worst.0,
                    audit.worst.1,
                    audit.worst.2
                );
            }
        }
        Command::Solve { example, alpha, order, n, t, kernel, degree } => {
            let (kind, degree) = match example.as_str() {
                "1" => (KernelKind::Power, 3.0),
                "2" => (KernelKind::PowerSingular, 6.0),
                "custom" => (kernel, degree),
                other => bail!("unknown example {other:?}; expected 1, 2 or custom"),
            };
            let k = kind.build(alpha)?;
            let forcing = manufacture_forcing(degree, &k)?;
            let mesh = Mesh::uniform(t, n)?;
            let sol = step_solve(&VolterraProblem::new(|s| forcing.eval(s), k, mesh, order.order(alpha)?))?;
            let exact: Vec<f64> = sol.nodes.iter().map(|&s| forcing.exact(s)).collect();
            let e_inf = sol.max_error(|s| forcing.exact(s));
            let out = json!({ "nodes": sol.nodes, "u": sol.u, "exact": exact, "E_inf": e_inf });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Fracdiff { alpha, rho, m, n, t } => {
            let grid = Grid1D::new(m.checked_sub(1).context("M must be at least 2")?)?;
            let source = ManufacturedSource::new(rho.0.value(alpha), alpha)?;
            let mut rows: Vec<Row> = n
                .iter()
                .map(|&steps| {
                    let solved = Mesh::uniform(t, steps)
                        .and_then(|mesh| FracDiffProblem::new(grid, alpha, mesh, source))
                        .and_then(|p| solve_fracdiff(&p))
                        .map(|s| s.max_error(|x, t| source.exact(x, t)));
                    match solved {
                        Ok(e) => Row { n: steps, e_inf: Some(e), rate: None, error: None },
                        Err(e) => Row { n: steps, e_inf: None, rate: None, error: Some(e.to_string()) },
                    }
                })
                .collect();
            fill_rates(&mut rows);
            let out = json!({ "alpha": alpha, "rho": source.rho, "M": m, "T": t, "rows": rows });
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Converge { spec, out, long, check } => {
            let spec = ExperimentSpec::load(&spec)?;
            let reports = spec.run(long);
            for r in &reports {
                println!("{}", render_table(r));
            }
            if let Some(path) = out {
                save(&reports, &path)?;
            }
            if check {
                let outcomes = spec.check(&reports);
                let failed = outcomes.iter().filter(|o| !o.pass).count();
                for o in &outcomes {
                    println!("{o}");
                }
                println!("{} checks, {failed} failed", outcomes.len());
                if failed > 0 {
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
